//! Simplified Ericksen–Leslie system
//!
//! ```text
//! u_t - Δu + u·∇u + ∇P = -∇·(∇d ⊙ ∇d),   ∇·u = 0,
//! d_t + u·∇d - Δd = |∇d|² d,              |d| = 1,
//! ```
//!
//! solved by simultaneous Picard iteration of
//! `𝕋₁ = ũ₀ - 𝕍[u⊗u + ∇d⊙∇d]` and `𝕋₂ = d̃₀ + 𝕊[A(d)(∇d,∇d) - u·∇d]`.
//! The pressure never appears; [`crate::heat::recover_pressure`] rebuilds it
//! after the fact.

use crate::error::{Error, Result};
use crate::grid::spectral::{field_from_spectra, ModeTable};
use crate::grid::{spectral_divergence, spectral_laplacian, Dealiaser, Field, SpaceTimeField};
use crate::heat::{caloric_extension, integrate_forcing, projected_divergence, Spectra};
use crate::hmflow::{
    check_unit, contraction_estimates, failed_row, hmf_nonlinearity, sphere_source_spectra, summarize, theta_bar,
    SolverConfig, SweepReport, SweepRow,
};
use crate::manifold::SphereTarget;
use crate::norms::{bmo_inv_norm, bmo_seminorm, x_norm, x_seminorm, z_norm};
use rayon::prelude::*;

const BLOWUP: f64 = 1e6;

/// Velocity (`n` components) and director (3 components) on a shared ladder.
#[derive(Debug, Clone)]
pub struct LCState {
    pub u: SpaceTimeField,
    pub d: SpaceTimeField,
}

impl LCState {
    pub fn new(u: SpaceTimeField, d: SpaceTimeField) -> Result<Self> {
        let n = u.grid().dim;
        if u.components() != n || d.components() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "state needs a {n}-component velocity and a 3-component director"
            )));
        }
        if u.grid() != d.grid() || u.ladder() != d.ladder() {
            return Err(Error::ShapeMismatch("velocity and director live on different grids or ladders".into()));
        }
        Ok(LCState { u, d })
    }

    /// Largest slice-wise `‖∇·u‖_∞`.
    pub fn divergence_defect(&self) -> f64 {
        max_divergence(&self.u)
    }
}

pub(crate) fn max_divergence(u: &SpaceTimeField) -> f64 {
    u.slices()
        .par_iter()
        .map(|s| spectral_divergence(s).map(|d| d.max_abs()).unwrap_or(f64::NAN))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Divergence of `f` relative to `‖∇f‖_∞` (absolute if the gradient vanishes).
fn scaled_divergence(f: &Field) -> Result<f64> {
    let div = spectral_divergence(f)?.max_abs();
    let scale = crate::grid::spectral_gradient(f).max_abs().max(1.0);
    Ok(div / scale)
}

/// The coupled map with both caloric extensions cached.
pub struct LcMap {
    u_ext: SpaceTimeField,
    d_ext: SpaceTimeField,
    dealias: Dealiaser,
    modes: ModeTable,
}

impl LcMap {
    pub fn new(u0: &Field, d0: &Field, ladder: &crate::grid::TimeLadder) -> Result<Self> {
        let grid = *u0.grid();
        let n = grid.dim;
        if !(n == 2 || n == 3) {
            return Err(Error::InvalidArgument(format!(
                "the coupled flow needs n in {{2, 3}} (got {n})"
            )));
        }
        if u0.components() != n || d0.components() != 3 || d0.grid() != u0.grid() {
            return Err(Error::ShapeMismatch(format!(
                "initial data needs a {n}-component velocity and a 3-component director on one grid"
            )));
        }
        Ok(LcMap {
            u_ext: caloric_extension(u0, ladder),
            d_ext: caloric_extension(d0, ladder),
            dealias: Dealiaser::new(&grid),
            modes: ModeTable::new(&grid),
        })
    }

    pub fn extensions(&self) -> (&SpaceTimeField, &SpaceTimeField) {
        (&self.u_ext, &self.d_ext)
    }

    /// Slice-`j` forcings: `ℙ∇·(u⊗u + ∇d⊙∇d)` and `A(d)(∇d,∇d) - u·∇d`.
    fn slice_forcing(&self, u: &Field, d: &Field) -> Result<(Spectra, Spectra)> {
        let n = u.grid().dim;
        let u_pad = self.dealias.pad_field(u);
        let (d_spec, grad_d) = sphere_source_spectra(&self.dealias, d, Some(u_pad.as_slice()))?;
        let sites = self.dealias.padded_sites();
        let mut tensor = vec![vec![0.0; sites]; n * n];
        for s in 0..sites {
            for i in 0..n {
                for j in 0..n {
                    let mut v = u_pad[i][s] * u_pad[j][s];
                    for a in 0..3 {
                        v += grad_d[a * n + i][s] * grad_d[a * n + j][s];
                    }
                    tensor[i * n + j][s] = v;
                }
            }
        }
        let t_hat: Spectra = tensor.iter().map(|c| self.dealias.unpad_spectrum(c)).collect();
        let mut u_spec = projected_divergence(&t_hat, &self.modes);
        // 𝕋₁ subtracts 𝕍
        for c in u_spec.iter_mut().flatten() {
            *c = -*c;
        }
        Ok((u_spec, d_spec))
    }

    fn check(&self, state: &LCState) -> Result<()> {
        if state.u.ladder() != self.u_ext.ladder() || state.u.grid() != self.u_ext.grid() {
            return Err(Error::ShapeMismatch("state and data live on different ladders or grids".into()));
        }
        Ok(())
    }

    /// `(𝕋₁, 𝕋₂)` evaluated on the same state.
    pub fn apply(&self, state: &LCState) -> Result<LCState> {
        self.check(state)?;
        let ladder = *state.u.ladder();
        let grid = *state.u.grid();
        let forcing: Vec<(Spectra, Spectra)> = (0..ladder.steps)
            .into_par_iter()
            .map(|j| {
                self.slice_forcing(state.u.slice(j), state.d.slice(j))
                    .map_err(|e| e.with_slice(j))
            })
            .collect::<Result<_>>()?;
        let (fu, fd): (Vec<Spectra>, Vec<Spectra>) = forcing.into_iter().unzip();
        let (wu, wd) = rayon::join(
            || integrate_forcing(&grid, &ladder, &fu),
            || integrate_forcing(&grid, &ladder, &fd),
        );
        let u = add_slices(&self.u_ext, wu)?;
        let d = add_slices(&self.d_ext, wd)?;
        LCState::new(u, d)
    }
}

fn add_slices(base: &SpaceTimeField, w: Vec<Field>) -> Result<SpaceTimeField> {
    let slices = base
        .slices()
        .iter()
        .zip(&w)
        .map(|(a, b)| a.add(b))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(*base.ladder(), slices)
}

/// `𝕋₁[u, d] = ũ₀ - 𝕍[u⊗u + ∇d⊙∇d]`.
pub fn t1_map(state: &LCState, u0: &Field) -> Result<SpaceTimeField> {
    let d0 = state.d.slice(0).clone();
    Ok(LcMap::new(u0, &d0, state.u.ladder())?.apply(state)?.u)
}

/// `𝕋₂[u, d] = d̃₀ + 𝕊[A(d)(∇d,∇d) - u·∇d]`.
pub fn t2_map(state: &LCState, d0: &Field) -> Result<SpaceTimeField> {
    let u0 = state.u.slice(0).clone();
    Ok(LcMap::new(&u0, d0, state.u.ladder())?.apply(state)?.d)
}

#[derive(Debug, Clone)]
pub struct LcSolveResult {
    pub state: LCState,
    /// `‖Δu‖_{Z_T} + |||Δd|||_{X_T}` per iteration.
    pub increments: Vec<f64>,
    pub contraction_estimates: Vec<f64>,
    pub residual_u: f64,
    pub residual_d: f64,
    /// `sup_j ‖|d(t_j)| - 1‖_∞`
    pub constraint_defect: f64,
    pub constraint_ok: bool,
    pub divergence_defect: f64,
    pub converged: bool,
}

impl LcSolveResult {
    pub fn iterations(&self) -> usize {
        self.increments.len()
    }

    pub fn theta(&self) -> f64 {
        theta_bar(&self.contraction_estimates)
    }

    pub fn diagnostics(&self) -> serde_json::Value {
        serde_json::json!({
            "converged": self.converged,
            "iterations": self.iterations(),
            "increments": self.increments,
            "contraction_estimates": self.contraction_estimates,
            "theta": self.theta(),
            "residuals": { "u": self.residual_u, "d": self.residual_d },
            "constraint_defect": self.constraint_defect,
            "constraint_ok": self.constraint_ok,
            "divergence_defect": self.divergence_defect,
        })
    }
}

/// Interior residuals of the Leray-projected momentum equation and the
/// director equation, sup over slices `1..m`.
pub fn lc_residuals(state: &LCState) -> Result<(f64, f64)> {
    let ladder = *state.u.ladder();
    let grid = *state.u.grid();
    let n = grid.dim;
    let dt = ladder.dt();
    let dealias = Dealiaser::new(&grid);
    let modes = ModeTable::new(&grid);
    let rows = (1..ladder.steps)
        .into_par_iter()
        .map(|j| -> Result<(f64, f64)> {
            let u = state.u.slice(j);
            let d = state.d.slice(j);
            let u_pad = dealias.pad_field(u);
            let (d_src, grad_d) = sphere_source_spectra(&dealias, d, Some(u_pad.as_slice())).map_err(|e| e.with_slice(j))?;
            let sites = dealias.padded_sites();
            let mut tensor = vec![vec![0.0; sites]; n * n];
            for s in 0..sites {
                for i in 0..n {
                    for k in 0..n {
                        let mut v = u_pad[i][s] * u_pad[k][s];
                        for a in 0..3 {
                            v += grad_d[a * n + i][s] * grad_d[a * n + k][s];
                        }
                        tensor[i * n + k][s] = v;
                    }
                }
            }
            let t_hat: Spectra = tensor.iter().map(|c| dealias.unpad_spectrum(c)).collect();
            let pdiv = field_from_spectra(&grid, &projected_divergence(&t_hat, &modes));
            let dudt = state.u.slice(j + 1).sub(state.u.slice(j - 1))?.scale(0.5 / dt);
            let ru = dudt.sub(&spectral_laplacian(u))?.add(&pdiv)?.sup_norm();
            let src = field_from_spectra(&grid, &d_src);
            let dddt = state.d.slice(j + 1).sub(state.d.slice(j - 1))?.scale(0.5 / dt);
            let rd = dddt.sub(&spectral_laplacian(d))?.sub(&src)?.sup_norm();
            Ok((ru, rd))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (f64::max(a, x), f64::max(b, y))))
}

/// Simultaneous Picard iteration from `(ũ₀, d̃₀)`.
pub fn solve_lc(u0: &Field, d0: &Field, cfg: &SolverConfig) -> Result<LcSolveResult> {
    cfg.validate()?;
    if *u0.grid() != cfg.grid || *d0.grid() != cfg.grid {
        return Err(Error::ShapeMismatch("initial data grid differs from solver grid".into()));
    }
    let map = LcMap::new(u0, d0, &cfg.ladder)?;
    let div = scaled_divergence(u0)?;
    if div > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "initial velocity must be divergence-free to 1e-12 (got {div:e})"
        )));
    }
    check_unit(d0, 1e-12, "initial director")?;
    let (ue, de) = map.extensions();
    let mut state = LCState::new(ue.clone(), de.clone())?;
    let mut increments = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let next = map.apply(&state)?;
        let du = next.u.sub(&state.u)?;
        let dd = next.d.sub(&state.d)?;
        let (zu, xd) = rayon::join(|| z_norm(&du).value, || x_norm(&dd).value);
        let inc = zu + xd;
        increments.push(inc);
        state = next;
        if inc <= cfg.picard_tol {
            converged = true;
            break;
        }
        if !inc.is_finite() || inc > BLOWUP {
            break;
        }
    }
    if !converged {
        let last = increments.last().copied().unwrap_or(f64::NAN);
        return Err(Error::NoConvergence { increments, last });
    }
    let (residual_u, residual_d) = lc_residuals(&state)?;
    let constraint_defect = state.d.unit_defect();
    Ok(LcSolveResult {
        contraction_estimates: contraction_estimates(&increments),
        increments,
        residual_u,
        residual_d,
        constraint_ok: constraint_defect <= cfg.constraint_tol,
        constraint_defect,
        divergence_defect: state.divergence_defect(),
        converged,
        state,
    })
}

/// Sweep over a one-parameter family `α ↦ (u₀(α), d₀(α))`. The data size is
/// `‖u₀‖_{BMO⁻¹_R} + [d₀]_{BMO_R}` and the solution size `‖u‖_Z + ‖d‖_X`.
pub fn lc_sweep<F>(family: F, amplitudes: &[f64], cfg: &SolverConfig, radius: f64) -> Result<SweepReport>
where
    F: Fn(f64) -> Result<(Field, Field)>,
{
    let mut rows: Vec<SweepRow> = Vec::with_capacity(amplitudes.len());
    let mut prev: Option<(f64, LCState)> = None;
    for &alpha in amplitudes {
        let (u0, d0) = family(alpha)?;
        let data_size = bmo_inv_norm(&u0, radius, &cfg.ladder)?.value + bmo_seminorm(&d0, radius)?.value;
        match solve_lc(&u0, &d0, cfg) {
            Ok(res) => {
                let solution_size = z_norm(&res.state.u).value + x_seminorm(&x_norm(&res.state.d));
                let lipschitz = match &prev {
                    Some((a, s)) if alpha != *a => {
                        let du = z_norm(&res.state.u.sub(&s.u)?).value;
                        let dd = x_norm(&res.state.d.sub(&s.d)?).value;
                        Some((du + dd) / (alpha - a).abs())
                    }
                    _ => None,
                };
                rows.push(SweepRow {
                    amplitude: alpha,
                    data_size,
                    converged: true,
                    iterations: res.iterations(),
                    theta: res.theta(),
                    solution_size,
                    c0_ratio: if data_size > 0.0 { solution_size / data_size } else { 0.0 },
                    lipschitz,
                    constraint_defect: res.constraint_defect,
                    residual: res.residual_u.max(res.residual_d),
                });
                prev = Some((alpha, res.state));
            }
            Err(Error::NoConvergence { increments, .. }) => {
                let est = contraction_estimates(&increments);
                rows.push(failed_row(alpha, data_size, increments.len(), theta_bar(&est)));
            }
            Err(Error::TubeEscape { .. }) => rows.push(failed_row(alpha, data_size, 0, f64::NAN)),
            Err(e) => return Err(e),
        }
    }
    Ok(summarize(rows))
}

/// `|∇d|² d` on one slice, the sphere form of the director source.
pub fn sphere_source_literal(d: &Field) -> Result<Field> {
    let grid = *d.grid();
    let g = crate::grid::spectral_gradient(d);
    let gn: Vec<f64> = g.pointwise_norm().into_iter().map(|x| x * x).collect();
    let s = Field::new(grid, 1, gn)?;
    d.mul_scalar_field(&s)
}

/// Dealiased `A(d)(∇d,∇d)` for a 3-component director.
pub fn director_source(d: &Field) -> Result<Field> {
    hmf_nonlinearity(&SphereTarget::new(3)?, d)
}
