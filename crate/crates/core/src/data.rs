//! Seeded initial-data families and test corpora.
//!
//! Every pseudo-random draw comes from a ChaCha8 stream seeded by the caller,
//! so a `(family, grid, seed)` triple fixes the field bit for bit.

use crate::error::{Error, Result};
use crate::grid::{spectral_gradient, Field, GridSpec, SpaceTimeField, TimeLadder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn default_modes() -> usize {
    2
}
fn default_components() -> usize {
    3
}

/// Named initial-data family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataFamily {
    /// `(cos θ, sin θ[, 0])` with `θ = α Σ c_k cos(k·x + φ_k)` over random
    /// low modes `1 <= |k|_∞ <= modes`, scaled so that `max |θ| = α`.
    AngleModes {
        alpha: f64,
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_components")]
        components: usize,
    },
    /// `(cos θ, sin θ[, 0])` with `θ = α sin(2πKx₁/L)`.
    Oscillatory {
        alpha: f64,
        wavenumber: usize,
        #[serde(default = "default_components")]
        components: usize,
    },
    /// `(αz₁, αz₂, 1)/|·|` with periodic coordinates
    /// `z_i = (L/2π) sin(2π(x_i - L/2)/L)` centred in the box.
    Hedgehog { alpha: f64 },
    /// Divergence-free velocity `∇^⊥ψ` (`n = 2`) or `∇×A` (`n = 3`) from
    /// random low modes, scaled so that `max |u| = α`.
    StreamFunction {
        alpha: f64,
        #[serde(default = "default_modes")]
        modes: usize,
    },
    /// `α (sin x₁ cos x₂, -cos x₁ sin x₂[, 0])` in units `2π/L`.
    TaylorGreen { alpha: f64 },
    /// A constant field.
    Constant { value: Vec<f64> },
}

impl DataFamily {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            DataFamily::AngleModes { alpha, .. }
            | DataFamily::Oscillatory { alpha, .. }
            | DataFamily::Hedgehog { alpha }
            | DataFamily::StreamFunction { alpha, .. }
            | DataFamily::TaylorGreen { alpha } => Some(*alpha),
            DataFamily::Constant { .. } => None,
        }
    }

    /// The same family at a different amplitude.
    pub fn with_alpha(&self, a: f64) -> DataFamily {
        let mut out = self.clone();
        match &mut out {
            DataFamily::AngleModes { alpha, .. }
            | DataFamily::Oscillatory { alpha, .. }
            | DataFamily::Hedgehog { alpha }
            | DataFamily::StreamFunction { alpha, .. }
            | DataFamily::TaylorGreen { alpha } => *alpha = a,
            DataFamily::Constant { value } => value.iter_mut().for_each(|v| *v *= a),
        }
        out
    }

    pub fn name(&self) -> &'static str {
        match self {
            DataFamily::AngleModes { .. } => "angle_modes",
            DataFamily::Oscillatory { .. } => "oscillatory",
            DataFamily::Hedgehog { .. } => "hedgehog",
            DataFamily::StreamFunction { .. } => "stream_function",
            DataFamily::TaylorGreen { .. } => "taylor_green",
            DataFamily::Constant { .. } => "constant",
        }
    }

    /// Whether the family produces velocities rather than sphere-valued maps.
    pub fn is_velocity(&self) -> bool {
        matches!(self, DataFamily::StreamFunction { .. } | DataFamily::TaylorGreen { .. })
    }
}

/// Samples `family` on `grid`.
pub fn generate_data(family: &DataFamily, grid: &GridSpec, seed: u64) -> Result<Field> {
    grid.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim;
    let kappa = 2.0 * PI / grid.period;
    match family {
        DataFamily::AngleModes {
            alpha,
            modes,
            components,
        } => {
            let theta = random_modes(grid, *modes, &mut rng)?;
            let peak = theta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if peak > 0.0 { alpha / peak } else { 0.0 };
            circle_map(grid, *components, |s| scale * theta[s])
        }
        DataFamily::Oscillatory {
            alpha,
            wavenumber,
            components,
        } => {
            let k = *wavenumber as f64;
            circle_map(grid, *components, |s| alpha * (k * kappa * grid.coords(s)[0]).sin())
        }
        DataFamily::Hedgehog { alpha } => {
            let half = grid.period / 2.0;
            Field::from_fn(*grid, 3, |x, o| {
                let z = |i: usize| if i < n { (kappa * (x[i] - half)).sin() / kappa } else { 0.0 };
                let y = [alpha * z(0), alpha * z(1), 1.0];
                let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                for a in 0..3 {
                    o[a] = y[a] / r;
                }
            })
        }
        DataFamily::StreamFunction { alpha, modes } => {
            let u = match n {
                2 => {
                    let psi = Field::new(*grid, 1, random_modes(grid, *modes, &mut rng)?)?;
                    let g = spectral_gradient(&psi);
                    let v = g.values();
                    Field::new(*grid, 2, (0..grid.sites()).flat_map(|s| [-v[2 * s + 1], v[2 * s]]).collect())?
                }
                3 => {
                    let mut comps = Vec::with_capacity(3);
                    for _ in 0..3 {
                        comps.push(random_modes(grid, *modes, &mut rng)?);
                    }
                    let a = Field::from_components(*grid, &comps)?;
                    curl(&a)?
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "stream-function velocities need n = 2 or 3".into(),
                    ))
                }
            };
            let peak = u.sup_norm();
            Ok(if peak > 0.0 { u.scale(alpha / peak) } else { u })
        }
        DataFamily::TaylorGreen { alpha } => {
            if n < 2 {
                return Err(Error::InvalidArgument("Taylor–Green needs n >= 2".into()));
            }
            Field::from_fn(*grid, n, |x, o| {
                let (a, b) = (kappa * x[0], kappa * x[1]);
                o[0] = alpha * a.sin() * b.cos();
                o[1] = -alpha * a.cos() * b.sin();
                if n == 3 {
                    o[2] = 0.0;
                }
            })
        }
        DataFamily::Constant { value } => {
            if value.is_empty() {
                return Err(Error::InvalidArgument("constant value needs at least one component".into()));
            }
            Ok(Field::constant(*grid, value))
        }
    }
}

fn circle_map<F: Fn(usize) -> f64>(grid: &GridSpec, components: usize, theta: F) -> Result<Field> {
    if !(components == 2 || components == 3) {
        return Err(Error::InvalidArgument(format!(
            "angle data lives in S^1 or on a great circle of S^2 (components 2 or 3, got {components})"
        )));
    }
    let mut values = vec![0.0; grid.sites() * components];
    for (s, o) in values.chunks_mut(components).enumerate() {
        let t = theta(s);
        o[0] = t.cos();
        o[1] = t.sin();
    }
    Field::new(*grid, components, values)
}

/// Every integer vector `k` with `1 <= |k|_∞ <= kmax`, lexicographic.
fn mode_vectors(n: usize, kmax: usize) -> Vec<[i64; 3]> {
    let k = kmax as i64;
    let span = |a: usize| if a < n { -k..=k } else { 0..=0 };
    let mut out = Vec::new();
    for i in span(0) {
        for j in span(1) {
            for l in span(2) {
                if (i, j, l) != (0, 0, 0) {
                    out.push([i, j, l]);
                }
            }
        }
    }
    out
}

/// `Σ_k c_k cos(2π k·x/L + φ_k)` with `c_k ~ U[-1, 1]`, `φ_k ~ U[0, 2π)`.
fn random_modes(grid: &GridSpec, kmax: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    if kmax == 0 || 2 * kmax >= grid.points_per_axis / 2 {
        return Err(Error::InvalidArgument(format!(
            "mode cutoff {kmax} not resolved on {} points per axis",
            grid.points_per_axis
        )));
    }
    let kappa = 2.0 * PI / grid.period;
    let modes: Vec<([i64; 3], f64, f64)> = mode_vectors(grid.dim, kmax)
        .into_iter()
        .map(|k| (k, rng.gen_range(-1.0..=1.0), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    Ok((0..grid.sites())
        .map(|s| {
            let x = grid.coords(s);
            modes
                .iter()
                .map(|(k, c, phi)| {
                    let arg: f64 = (0..grid.dim).map(|a| k[a] as f64 * x[a]).sum::<f64>() * kappa;
                    c * (arg + phi).cos()
                })
                .sum()
        })
        .collect())
}

/// Spectral curl of a 3-vector field on a 3-torus.
fn curl(a: &Field) -> Result<Field> {
    let g = spectral_gradient(a);
    let v = g.values();
    // ∂_i A_c at v[s * 9 + c * 3 + i]
    let d = |s: usize, c: usize, i: usize| v[s * 9 + c * 3 + i];
    Field::new(
        *a.grid(),
        3,
        (0..a.grid().sites())
            .flat_map(|s| {
                [
                    d(s, 2, 1) - d(s, 1, 2),
                    d(s, 0, 2) - d(s, 2, 0),
                    d(s, 1, 0) - d(s, 0, 1),
                ]
            })
            .collect(),
    )
}

/// Smooth random space-time forcings `f(x, t) = a(t) g(x)` with
/// `components` entries per site. Member `i` uses mode cutoff `1 + i % 3`
/// and the time profile `1`, `e^{-4t/T}` or `1 - t/T` by `i / 3 % 3`.
pub fn forcing_corpus(
    grid: &GridSpec,
    ladder: &TimeLadder,
    components: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<SpaceTimeField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_final = ladder.t_final;
    (0..count)
        .map(|i| {
            let kmax = 1 + i % 3;
            let comps = (0..components)
                .map(|_| random_modes(grid, kmax, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let g = Field::from_components(*grid, &comps)?;
            let profile = i / 3 % 3;
            let slices = (0..ladder.slices())
                .map(|j| {
                    let t = ladder.time(j);
                    let a = match profile {
                        0 => 1.0,
                        1 => (-4.0 * t / t_final).exp(),
                        _ => 1.0 - t / t_final,
                    };
                    g.scale(a)
                })
                .collect();
            SpaceTimeField::new(*ladder, slices)
        })
        .collect()
}

/// Scalar fields of assorted shape for norm-equivalence studies: random low
/// modes, single oscillatory modes and smoothed steps, with amplitudes
/// spread log-uniformly over `[1e-3, 1]`.
pub fn bmo_corpus(grid: &GridSpec, count: usize, seed: u64) -> Result<Vec<Field>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kappa = 2.0 * PI / grid.period;
    let max_k = (grid.points_per_axis / 8).max(1);
    (0..count)
        .map(|i| {
            let amp = if count > 1 {
                10f64.powf(-3.0 + 3.0 * i as f64 / (count - 1) as f64)
            } else {
                1.0
            };
            let base: Vec<f64> = match i % 3 {
                0 => random_modes(grid, 1 + (i / 3) % 3, &mut rng)?,
                1 => {
                    let k = (1 + i / 3).min(max_k) as f64;
                    (0..grid.sites())
                        .map(|s| (k * kappa * grid.coords(s)[0]).sin())
                        .collect()
                }
                _ => {
                    let width = 0.05 * grid.period * (1.0 + (i / 3 % 3) as f64);
                    (0..grid.sites())
                        .map(|s| (((kappa * grid.coords(s)[0]).sin()) / (kappa * width)).tanh())
                        .collect()
                }
            };
            let f = Field::new(*grid, 1, base)?;
            // remove the mean; BMO is blind to it and it only inflates |f|
            let mean = f.mean()[0];
            Ok(f.map(|v| amp * (v - mean)))
        })
        .collect()
}

