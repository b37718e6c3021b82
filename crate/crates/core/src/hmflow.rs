//! Harmonic map heat flow into a round sphere by Picard iteration of the
//! mild formulation
//!
//! ```text
//! u = ũ₀ + 𝕊(A(u)(∇u, ∇u))
//! ```
//!
//! on the whole space-time cylinder. Convergence is measured in
//! `|||·|||_{X_T}` and iterates are never renormalized onto the sphere.

use crate::error::{Error, Result};
use crate::grid::{spectral_laplacian, Dealiaser, Field, GridSpec, SpaceTimeField, TimeLadder};
use crate::heat::{caloric_extension, exponential_euler_step, integrate_forcing, Spectra};
use crate::manifold::{sff_unchecked, SphereTarget, ESCAPE_RADIUS};
use crate::norms::{bmo_seminorm, x_norm, x_seminorm};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Increments above this are treated as divergence.
const BLOWUP: f64 = 1e6;
/// Increments below this are at the rounding floor and carry no ratio
/// information.
const RATIO_FLOOR: f64 = 1e-13;

fn default_picard_tol() -> f64 {
    1e-10
}
fn default_max_iters() -> usize {
    60
}
fn default_constraint_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub ladder: TimeLadder,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_constraint_tol")]
    pub constraint_tol: f64,
}

impl SolverConfig {
    pub fn new(grid: GridSpec, ladder: TimeLadder) -> Self {
        SolverConfig {
            grid,
            ladder,
            picard_tol: default_picard_tol(),
            max_iters: default_max_iters(),
            constraint_tol: default_constraint_tol(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.ladder.validate()?;
        if !(self.picard_tol > 0.0) {
            return Err(Error::InvalidArgument("picard_tol must be positive".into()));
        }
        if self.max_iters < 2 {
            return Err(Error::InvalidArgument("max_iters must be at least 2".into()));
        }
        Ok(())
    }

    pub fn with_ladder(&self, ladder: TimeLadder) -> Self {
        SolverConfig { ladder, ..*self }
    }
}

/// Converged solution and iteration diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: SpaceTimeField,
    /// `|||u^{(k+1)} - u^{(k)}|||_{X_T}`
    pub increments: Vec<f64>,
    /// `increments[k + 1] / increments[k]`
    pub contraction_estimates: Vec<f64>,
    /// Interior PDE residual, sup over slices `1..m` and sites.
    pub residual: f64,
    /// `sup_j ‖ |u(t_j)| - 1 ‖_∞`
    pub constraint_defect: f64,
    pub constraint_ok: bool,
    pub converged: bool,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.increments.len()
    }

    /// Largest contraction ratio from the second ratio on (the first one
    /// still carries the transient from the initial guess).
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
            "residuals": { "u": self.residual },
            "constraint_defect": self.constraint_defect,
            "constraint_ok": self.constraint_ok,
        })
    }
}

pub(crate) fn theta_bar(est: &[f64]) -> f64 {
    match est.len() {
        0 => 0.0,
        1 => est[0],
        _ => est[1..].iter().copied().fold(0.0, f64::max),
    }
}

pub(crate) fn contraction_estimates(inc: &[f64]) -> Vec<f64> {
    inc.windows(2)
        .take_while(|w| w[0] > RATIO_FLOOR && w[1] > RATIO_FLOOR)
        .map(|w| w[1] / w[0])
        .collect()
}

pub(crate) fn check_unit(f: &Field, tol: f64, what: &str) -> Result<()> {
    let defect = f
        .pointwise_norm()
        .into_iter()
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max);
    if defect > tol {
        return Err(Error::InvalidArgument(format!(
            "{what} must be unit-valued to {tol:e} (defect {defect:e})"
        )));
    }
    Ok(())
}

/// Padded-grid values of `A(d)(∇d, ∇d) - (w·∇)d` for one slice, where `w`
/// is an optional padded velocity. Returns the truncated spectra.
pub(crate) fn sphere_source_spectra(
    dealias: &Dealiaser,
    d: &Field,
    velocity: Option<&[Vec<f64>]>,
) -> Result<(Spectra, Vec<Vec<f64>>)> {
    let n = dealias.grid().dim;
    let l = d.components();
    let (vals, grads) = dealias.pad_with_gradient(d);
    let sites = dealias.padded_sites();
    let mut out = vec![vec![0.0; sites]; l];
    let mut y = vec![0.0; l];
    let mut stack = vec![0.0; l * n];
    let mut res = vec![0.0; l];
    for s in 0..sites {
        for a in 0..l {
            y[a] = vals[a][s];
        }
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(r >= ESCAPE_RADIUS) {
            return Err(Error::TubeEscape {
                norm: r,
                site: s,
                slice: None,
            });
        }
        for (k, g) in grads.iter().enumerate() {
            stack[k] = g[s];
        }
        sff_unchecked(&y, r, &stack, n, &mut res);
        if let Some(w) = velocity {
            for a in 0..l {
                let tr: f64 = (0..n).map(|i| w[i][s] * stack[a * n + i]).sum();
                res[a] -= tr;
            }
        }
        for a in 0..l {
            out[a][s] = res[a];
        }
    }
    let spectra = out.iter().map(|o| dealias.unpad_spectrum(o)).collect();
    Ok((spectra, grads))
}

/// Dealiased `A(u)(∇u, ∇u)` on one slice.
pub fn hmf_nonlinearity(target: &SphereTarget, u: &Field) -> Result<Field> {
    if u.components() != target.ambient_dim() {
        return Err(Error::ShapeMismatch(format!(
            "field has {} components, target lives in R^{}",
            u.components(),
            target.ambient_dim()
        )));
    }
    let dealias = Dealiaser::new(u.grid());
    let (spectra, _) = sphere_source_spectra(&dealias, u, None)?;
    Ok(crate::grid::spectral::field_from_spectra(u.grid(), &spectra))
}

/// The map `𝐓u = ũ₀ + 𝕊(A(u)(∇u, ∇u))` with the caloric extension cached.
pub struct PicardMap {
    target: SphereTarget,
    extension: SpaceTimeField,
    dealias: Dealiaser,
}

impl PicardMap {
    pub fn new(target: SphereTarget, u0: &Field, ladder: &TimeLadder) -> Result<Self> {
        if u0.components() != target.ambient_dim() {
            return Err(Error::ShapeMismatch(format!(
                "initial data has {} components, target lives in R^{}",
                u0.components(),
                target.ambient_dim()
            )));
        }
        Ok(PicardMap {
            target,
            extension: caloric_extension(u0, ladder),
            dealias: Dealiaser::new(u0.grid()),
        })
    }

    pub fn extension(&self) -> &SpaceTimeField {
        &self.extension
    }

    pub fn target(&self) -> &SphereTarget {
        &self.target
    }

    /// Spectra of the nonlinearity on slices `0..m`.
    pub(crate) fn forcing(&self, u: &SpaceTimeField) -> Result<Vec<Spectra>> {
        let steps = u.ladder().steps;
        u.slices()[..steps]
            .par_iter()
            .enumerate()
            .map(|(j, s)| {
                sphere_source_spectra(&self.dealias, s, None)
                    .map(|(spec, _)| spec)
                    .map_err(|e| e.with_slice(j))
            })
            .collect()
    }

    pub fn apply(&self, u: &SpaceTimeField) -> Result<SpaceTimeField> {
        if u.ladder() != self.extension.ladder() || u.grid() != self.extension.grid() {
            return Err(Error::ShapeMismatch("iterate and data live on different ladders or grids".into()));
        }
        let forcing = self.forcing(u)?;
        let duhamel = integrate_forcing(u.grid(), u.ladder(), &forcing);
        let slices = self
            .extension
            .slices()
            .iter()
            .zip(&duhamel)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(*u.ladder(), slices)
    }
}

/// One application of `𝐓`.
pub fn picard_map(target: &SphereTarget, u: &SpaceTimeField, u0: &Field) -> Result<SpaceTimeField> {
    PicardMap::new(*target, u0, u.ladder())?.apply(u)
}

/// Interior residual `sup_j |(u_{j+1} - u_{j-1})/(2dt) - Δu_j - A(u_j)(∇u_j, ∇u_j)|`.
pub fn hmf_residual(target: &SphereTarget, u: &SpaceTimeField) -> Result<f64> {
    let ladder = *u.ladder();
    let dt = ladder.dt();
    let per_slice = (1..ladder.steps)
        .into_par_iter()
        .map(|j| {
            let lap = spectral_laplacian(u.slice(j));
            let nl = hmf_nonlinearity(target, u.slice(j)).map_err(|e| e.with_slice(j))?;
            let dudt = u.slice(j + 1).sub(u.slice(j - 1))?.scale(0.5 / dt);
            Ok(dudt.sub(&lap)?.sub(&nl)?.sup_norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_slice.into_iter().fold(0.0, f64::max))
}

/// Picard iteration from `u^{(0)} = ũ₀`.
pub fn solve_hmf(u0: &Field, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    if *u0.grid() != cfg.grid {
        return Err(Error::ShapeMismatch("initial data grid differs from solver grid".into()));
    }
    check_unit(u0, 1e-12, "initial map")?;
    let target = SphereTarget::new(u0.components())?;
    let map = PicardMap::new(target, u0, &cfg.ladder)?;
    let mut u = map.extension().clone();
    let mut increments = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let next = map.apply(&u)?;
        let inc = x_norm(&next.sub(&u)?).value;
        increments.push(inc);
        u = next;
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
    let residual = hmf_residual(&target, &u)?;
    let constraint_defect = u.unit_defect();
    Ok(SolveResult {
        contraction_estimates: contraction_estimates(&increments),
        increments,
        residual,
        constraint_ok: constraint_defect <= cfg.constraint_tol,
        constraint_defect,
        converged,
        solution: u,
    })
}

/// Independent stepwise discretization: `u_{j+1} = e^{dtΔ}u_j + φ₁(dtΔ) dt A(u_j)(∇u_j, ∇u_j)`.
pub fn time_march_oracle(u0: &Field, cfg: &SolverConfig) -> Result<SpaceTimeField> {
    time_march_oracle_with(u0, cfg, false)
}

/// [`time_march_oracle`] with optional radial renormalization after each step.
pub fn time_march_oracle_with(u0: &Field, cfg: &SolverConfig, renormalize: bool) -> Result<SpaceTimeField> {
    cfg.validate()?;
    let target = SphereTarget::new(u0.components())?;
    let dt = cfg.ladder.dt();
    let mut slices = Vec::with_capacity(cfg.ladder.slices());
    slices.push(u0.clone());
    for j in 0..cfg.ladder.steps {
        let cur = &slices[j];
        let nl = hmf_nonlinearity(&target, cur).map_err(|e| e.with_slice(j))?;
        let mut next = exponential_euler_step(cur, &nl, dt)?;
        if renormalize {
            let l = next.components();
            let vals = next
                .values()
                .chunks(l)
                .map(|y| target.project(y))
                .collect::<Result<Vec<_>>>()?
                .concat();
            next = Field::new(*next.grid(), l, vals)?;
        }
        slices.push(next);
    }
    SpaceTimeField::new(cfg.ladder, slices)
}

/// One row of a well-posedness sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub amplitude: f64,
    /// `[u₀]_{BMO_R}`
    pub data_size: f64,
    pub converged: bool,
    pub iterations: usize,
    pub theta: f64,
    /// `‖u‖_{X_T}`
    pub solution_size: f64,
    /// `‖u‖_{X_T} / [u₀]_{BMO_R}`
    pub c0_ratio: f64,
    /// `‖u(α) - u(α')‖_{X_T} / |α - α'|` against the previous converged row.
    pub lipschitz: Option<f64>,
    pub constraint_defect: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Largest amplitude up to which every run converged.
    pub threshold: Option<f64>,
    pub c0_max: f64,
    pub theta_nondecreasing: bool,
}

pub(crate) fn summarize(rows: Vec<SweepRow>) -> SweepReport {
    let mut threshold = None;
    for r in &rows {
        if r.converged {
            threshold = Some(r.amplitude);
        } else {
            break;
        }
    }
    let conv: Vec<&SweepRow> = rows.iter().filter(|r| r.converged).collect();
    let c0_max = conv
        .iter()
        .filter(|r| r.data_size > 0.0)
        .map(|r| r.c0_ratio)
        .fold(0.0, f64::max);
    let theta_nondecreasing = conv
        .windows(2)
        .all(|w| w[1].theta >= w[0].theta * (1.0 - 1e-6) || w[0].iterations <= 2);
    SweepReport {
        rows,
        threshold,
        c0_max,
        theta_nondecreasing,
    }
}

/// Solves along a one-parameter family `u₀(α)` (amplitudes ascending) and
/// reports threshold, contraction factors and the empirical bound constant.
pub fn wellposedness_sweep<F>(family: F, amplitudes: &[f64], cfg: &SolverConfig, radius: f64) -> Result<SweepReport>
where
    F: Fn(f64) -> Result<Field>,
{
    let mut rows = Vec::with_capacity(amplitudes.len());
    let mut prev: Option<(f64, SpaceTimeField)> = None;
    for &alpha in amplitudes {
        let u0 = family(alpha)?;
        let data_size = bmo_seminorm(&u0, radius)?.value;
        match solve_hmf(&u0, cfg) {
            Ok(res) => {
                let solution_size = x_seminorm(&x_norm(&res.solution));
                let lipschitz = match &prev {
                    Some((a, s)) if alpha != *a => {
                        Some(x_norm(&res.solution.sub(s)?).value / (alpha - a).abs())
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
                    residual: res.residual,
                });
                prev = Some((alpha, res.solution));
            }
            Err(Error::NoConvergence { increments, .. }) => {
                let est = contraction_estimates(&increments);
                rows.push(failed_row(alpha, data_size, increments.len(), theta_bar(&est)));
            }
            Err(Error::TubeEscape { .. }) => {
                rows.push(failed_row(alpha, data_size, 0, f64::NAN));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(summarize(rows))
}

pub(crate) fn failed_row(amplitude: f64, data_size: f64, iterations: usize, theta: f64) -> SweepRow {
    SweepRow {
        amplitude,
        data_size,
        converged: false,
        iterations,
        theta,
        solution_size: f64::NAN,
        c0_ratio: f64::NAN,
        lipschitz: None,
        constraint_defect: f64::NAN,
        residual: f64::NAN,
    }
}

/// Energy-inequality check for `W = 𝕊f` on `P_1(x, 1) = B_1(x) × [0, 1]`:
/// returns `(∫_{P_1}|∇W|², ‖W‖²_∞ + ‖W‖_∞ ‖f‖_{L¹})` with the sup and the
/// `L¹` norm taken over `B_2(x) × [0, 1]`. Needs `T >= 1` and `L/4 >= 2`.
pub fn energy_inequality_terms(f: &SpaceTimeField, w: &SpaceTimeField, center: usize) -> Result<(f64, f64)> {
    use crate::norms::{abs_density, ball_stencil, cylinder_value, grad_density, ParabolicCylinder};
    let grid = *f.grid();
    let ladder = *f.ladder();
    if ladder.t_final < 1.0 || grid.period / 4.0 < 2.0 {
        return Err(Error::InvalidArgument("energy inequality needs T >= 1 and L >= 8".into()));
    }
    let unit = ParabolicCylinder::new(&ladder, center, 1.0);
    let lhs = cylinder_value(&grad_density(w), &unit, false);
    let big = ParabolicCylinder {
        center,
        radius: 2.0,
        window_end: unit.window_end,
    };
    // cylinder_value divides by r^n; undo it for the raw L¹ integral
    let l1 = cylinder_value(&abs_density(f, 1), &big, false) * 2f64.powi(grid.dim as i32);
    let stencil = ball_stencil(&grid, 2.0);
    let mut wsup: f64 = 0.0;
    for j in 0..=unit.window_end {
        let slice = w.slice(j);
        for s in stencil.members(&grid, center) {
            let v = slice.at(s).iter().map(|x| x * x).sum::<f64>().sqrt();
            wsup = wsup.max(v);
        }
    }
    Ok((lhs, wsup * wsup + wsup * l1))
}

