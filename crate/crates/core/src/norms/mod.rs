//! Function-space functionals: BMO-type seminorms on balls and Carleson-type
//! suprema over parabolic cylinders, plus the weighted sup terms of the
//! space-time norms.
//!
//! Every supremum runs over grid-centered balls with dyadic radii
//! `r_max, r_max/2, ...` down to `2h`. A site belongs to `B_r(x)` iff its
//! torus distance to `x` is at most `r` (compared in squared index units).
//! Cylinder time integrals use the trapezoid rule over ladder slices in
//! `[0, r^2]`, with `r^2` rounded up to the next slice. Ties between
//! maximizers go to the first candidate in (center, radius) scan order.

mod balls;
mod spacetime;

pub use balls::{
    ball_oscillation, ball_stencil, bmo_seminorm, exhaustive_radii, vmo_profile, BallSpec,
    BallStencil,
};
pub use spacetime::{
    abs_density, bmo_inv_norm, carleson_bmo, cylinder_value, grad_density, sup_weighted,
    x_norm, x_seminorm, y_norm, z_norm, CylinderDensity, ParabolicCylinder,
};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

/// Dyadic radii `r_max * 2^{-k}` down to `2h` (always at least `r_max`).
pub fn dyadic_radii(r_max: f64, h: f64) -> Vec<f64> {
    let mut radii = vec![r_max];
    let mut r = r_max / 2.0;
    while r >= 2.0 * h * (1.0 - 1e-12) {
        radii.push(r);
        r /= 2.0;
    }
    radii
}

/// Where a supremum was attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Maximizer {
    Ball {
        center: Vec<usize>,
        site: usize,
        radius: f64,
    },
    Cylinder {
        center: Vec<usize>,
        site: usize,
        radius: f64,
        window_end: usize,
    },
    Slice {
        time_index: usize,
        time: f64,
        site: usize,
    },
}

/// Value of a functional with its named terms and the maximizer of each
/// supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub value: f64,
    pub terms: Vec<(String, f64)>,
    pub maximizers: Vec<(String, Maximizer)>,
}

impl NormReport {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn maximizer(&self, name: &str) -> Option<&Maximizer> {
        self.maximizers.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report is serializable")
    }
}

struct Ordered<'a, T>(&'a [(String, T)]);

impl<T: Serialize> Serialize for Ordered<'_, T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for NormReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("value", &self.value)?;
        map.serialize_entry("terms", &Ordered(&self.terms))?;
        map.serialize_entry("maximizer", &Ordered(&self.maximizers))?;
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_radii_stop_at_two_cells() {
        let r = dyadic_radii(1.0, 1.0 / 16.0);
        assert_eq!(r, vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(dyadic_radii(0.1, 1.0), vec![0.1]);
    }

    #[test]
    fn report_json_shape() {
        let r = NormReport {
            value: 1.5,
            terms: vec![("b".into(), 1.0), ("a".into(), 0.5)],
            maximizers: vec![(
                "b".into(),
                Maximizer::Slice {
                    time_index: 2,
                    time: 0.5,
                    site: 3,
                },
            )],
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"value":1.5,"terms":{"b":1.0,"a":0.5},"maximizer":{"b":{"kind":"slice","time_index":2,"time":0.5,"site":3}}}"#
        );
    }
}
