//! Unit-sphere target geometry `S^{l-1} ⊂ ℝ^l`: nearest-point projection,
//! radial defect, distance energy and the second fundamental form
//! `A(y)(V, W) = -D²Π(y)(V, W)` from the closed-form Hessian of `y/|y|`.
//!
//! No extension of `Π` past the tube is built. Points with `|y| < 1/4` are
//! rejected with [`Error::TubeEscape`].

use crate::error::{Error, Result};
use crate::grid::{spectral_gradient, spectral_laplacian, Field, SpaceTimeField};

/// Points closer than this to the origin are outside every admissible tube.
pub const ESCAPE_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereTarget {
    ambient_dim: usize,
    tube_radius: f64,
}

impl SphereTarget {
    /// `S^{l-1}` with the default tube radius 1/2.
    pub fn new(ambient_dim: usize) -> Result<Self> {
        Self::with_tube(ambient_dim, 0.5)
    }

    pub fn with_tube(ambient_dim: usize, tube_radius: f64) -> Result<Self> {
        if ambient_dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "sphere target needs ambient dimension >= 2 (got {ambient_dim})"
            )));
        }
        if !(tube_radius > 0.0 && tube_radius <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "tube radius must lie in (0, 1/2] (got {tube_radius})"
            )));
        }
        Ok(SphereTarget {
            ambient_dim,
            tube_radius,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn tube_radius(&self) -> f64 {
        self.tube_radius
    }

    fn checked_norm(&self, y: &[f64]) -> Result<f64> {
        debug_assert_eq!(y.len(), self.ambient_dim);
        let r = norm(y);
        if !(r >= ESCAPE_RADIUS) {
            return Err(Error::TubeEscape {
                norm: r,
                site: 0,
                slice: None,
            });
        }
        Ok(r)
    }

    /// Whether `dist(y, S^{l-1}) <= δ_N`.
    pub fn in_tube(&self, y: &[f64]) -> bool {
        (norm(y) - 1.0).abs() <= self.tube_radius
    }

    /// `Π(y) = y / |y|`. Inputs already unit to rounding are returned as is,
    /// which makes the projection exactly idempotent.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        let r = self.checked_norm(y)?;
        let r2: f64 = y.iter().map(|v| v * v).sum();
        if (r2 - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(y.to_vec());
        }
        Ok(y.iter().map(|v| v / r).collect())
    }

    /// `Q(y) = y - Π(y)`.
    pub fn defect(&self, y: &[f64]) -> Result<Vec<f64>> {
        let p = self.project(y)?;
        Ok(y.iter().zip(&p).map(|(a, b)| a - b).collect())
    }

    /// `ρ(y) = |Q(y)|² / 2`.
    pub fn rho(&self, y: &[f64]) -> Result<f64> {
        Ok(0.5 * self.defect(y)?.iter().map(|q| q * q).sum::<f64>())
    }

    /// `D²Π(y)(v, w)` written into `out`.
    pub fn projection_hessian(&self, y: &[f64], v: &[f64], w: &[f64], out: &mut [f64]) -> Result<()> {
        let r = self.checked_norm(y)?;
        hessian_unchecked(y, r, v, w, out);
        Ok(())
    }

    /// `A(y)(V, V) = -Σ_i D²Π(y)(V_i, V_i)` for a gradient stack `V` with
    /// layout `V[a * n + i] = ∂_i u_a`.
    pub fn second_fundamental_form(&self, y: &[f64], stack: &[f64], n: usize, out: &mut [f64]) -> Result<()> {
        let r = self.checked_norm(y)?;
        sff_unchecked(y, r, stack, n, out);
        Ok(())
    }

    /// Polarized form `A(y)(V, W) = -Σ_i D²Π(y)(V_i, W_i)`.
    pub fn second_fundamental_form_bilinear(
        &self,
        y: &[f64],
        v: &[f64],
        w: &[f64],
        n: usize,
        out: &mut [f64],
    ) -> Result<()> {
        let r = self.checked_norm(y)?;
        let l = self.ambient_dim;
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut vi = vec![0.0; l];
        let mut wi = vec![0.0; l];
        let mut h = vec![0.0; l];
        for i in 0..n {
            for a in 0..l {
                vi[a] = v[a * n + i];
                wi[a] = w[a * n + i];
            }
            hessian_unchecked(y, r, &vi, &wi, &mut h);
            for a in 0..l {
                out[a] -= h[a];
            }
        }
        Ok(())
    }
}

fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `∂_c∂_bΠ_a v_b w_c` with
/// `∂_c∂_bΠ_a = -(δ_ab y_c + δ_ac y_b + δ_bc y_a)/|y|³ + 3 y_a y_b y_c/|y|⁵`.
fn hessian_unchecked(y: &[f64], r: f64, v: &[f64], w: &[f64], out: &mut [f64]) {
    let r3 = r * r * r;
    let r5 = r3 * r * r;
    let yv: f64 = y.iter().zip(v).map(|(a, b)| a * b).sum();
    let yw: f64 = y.iter().zip(w).map(|(a, b)| a * b).sum();
    let vw: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    for a in 0..y.len() {
        out[a] = -(v[a] * yw + w[a] * yv + vw * y[a]) / r3 + 3.0 * y[a] * yv * yw / r5;
    }
}

/// Diagonal case of the Hessian contraction summed over the `n` columns.
#[inline]
pub(crate) fn sff_unchecked(y: &[f64], r: f64, stack: &[f64], n: usize, out: &mut [f64]) {
    let l = y.len();
    let r3 = r * r * r;
    let r5 = r3 * r * r;
    out.iter_mut().for_each(|o| *o = 0.0);
    for i in 0..n {
        let mut yv = 0.0;
        let mut vv = 0.0;
        for a in 0..l {
            let va = stack[a * n + i];
            yv += y[a] * va;
            vv += va * va;
        }
        for a in 0..l {
            let va = stack[a * n + i];
            out[a] += (2.0 * va * yv + vv * y[a]) / r3 - 3.0 * y[a] * yv * yv / r5;
        }
    }
}

/// Pointwise `A(u)(∇u, ∇u)` on the grid (no dealiasing).
pub fn apply_sff_field(target: &SphereTarget, u: &Field, grad_u: &Field) -> Result<Field> {
    let l = target.ambient_dim();
    let n = u.grid().dim;
    if u.components() != l || grad_u.components() != l * n || u.grid() != grad_u.grid() {
        return Err(Error::ShapeMismatch(format!(
            "expected {l} components and a {l}x{n} gradient stack"
        )));
    }
    let mut values = vec![0.0; u.values().len()];
    for (s, out) in values.chunks_mut(l).enumerate() {
        let y = u.at(s);
        let r = norm(y);
        if !(r >= ESCAPE_RADIUS) {
            return Err(Error::TubeEscape {
                norm: r,
                site: s,
                slice: None,
            });
        }
        sff_unchecked(y, r, grad_u.at(s), n, out);
    }
    Field::new(*u.grid(), l, values)
}

/// `(∂_t - Δ)ρ(u) + |∇(Q(u))|²` with centered differences in time (one-sided
/// on the first and last slice). Vanishes for solutions of the flow that
/// stay in the tube.
pub fn subharmonicity_residual(target: &SphereTarget, u: &SpaceTimeField) -> Result<SpaceTimeField> {
    let ladder = *u.ladder();
    let grid = *u.grid();
    let mut rhos = Vec::with_capacity(ladder.slices());
    let mut grad_q2 = Vec::with_capacity(ladder.slices());
    for (j, slice) in u.slices().iter().enumerate() {
        let mut rho = Vec::with_capacity(grid.sites());
        let mut q = Vec::with_capacity(slice.values().len());
        for s in 0..grid.sites() {
            let d = target.defect(slice.at(s)).map_err(|e| match e {
                Error::TubeEscape { norm, .. } => Error::TubeEscape {
                    norm,
                    site: s,
                    slice: Some(j),
                },
                other => other,
            })?;
            rho.push(0.5 * d.iter().map(|x| x * x).sum::<f64>());
            q.extend(d);
        }
        let q = Field::new(grid, u.components(), q)?;
        grad_q2.push(
            spectral_gradient(&q)
                .pointwise_norm()
                .into_iter()
                .map(|g| g * g)
                .collect::<Vec<_>>(),
        );
        rhos.push(Field::new(grid, 1, rho)?);
    }
    let dt = ladder.dt();
    let m = ladder.steps;
    let slices = (0..=m)
        .map(|j| {
            let (a, b, span) = match j {
                0 => (1, 0, dt),
                j if j == m => (m, m - 1, dt),
                j => (j + 1, j - 1, 2.0 * dt),
            };
            let lap = spectral_laplacian(&rhos[j]);
            let vals = (0..grid.sites())
                .map(|s| {
                    let dtr = (rhos[a].values()[s] - rhos[b].values()[s]) / span;
                    dtr - lap.values()[s] + grad_q2[j][s]
                })
                .collect();
            Field::new(grid, 1, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(ladder, slices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_points_near_origin() {
        let s = SphereTarget::new(3).unwrap();
        assert!(matches!(s.project(&[0.2, 0.0, 0.0]), Err(Error::TubeEscape { .. })));
        assert!(s.project(&[0.3, 0.0, 0.0]).is_ok());
        let mut out = [0.0; 3];
        assert!(s
            .second_fundamental_form(&[0.0, 0.1, 0.0], &[1.0, 0.0, 0.0], 1, &mut out)
            .is_err());
    }

    #[test]
    fn tube_parameters_validated() {
        assert!(SphereTarget::new(1).is_err());
        assert!(SphereTarget::with_tube(3, 0.0).is_err());
        assert!(SphereTarget::with_tube(3, 0.6).is_err());
        let s = SphereTarget::new(3).unwrap();
        assert!(s.in_tube(&[0.0, 0.0, 1.5]));
        assert!(!s.in_tube(&[0.0, 0.0, 1.6]));
    }
}
