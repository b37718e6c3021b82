//! Heat semigroup, caloric extension, the Duhamel operators and the Leray
//! projection, all realized as per-mode Fourier multipliers on the torus.
//!
//! Both Duhamel operators use the first-order exponential integrator: the
//! forcing is frozen at the left end of each step and the semigroup is
//! integrated exactly,
//!
//! ```text
//! W_{j+1} = e^{-|xi|^2 dt} W_j + (1 - e^{-|xi|^2 dt}) / |xi|^2 * f_j,   W_0 = 0,
//! ```
//!
//! with weight `dt` on the zero mode.

use crate::error::{Error, Result};
use crate::grid::spectral::{field_from_spectra, field_spectra, ModeTable};
use crate::grid::{Dealiaser, Field, GridSpec, SpaceTimeField};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

pub use crate::grid::TimeLadder;

pub(crate) type Spectra = Vec<Vec<Complex64>>;

/// `e^{t Δ} f` applied exactly per mode.
pub fn heat_semigroup(f: &Field, t: f64) -> Result<Field> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    let modes = ModeTable::new(f.grid());
    let mut spectra = field_spectra(f);
    apply_heat(&mut spectra, &modes, t);
    Ok(field_from_spectra(f.grid(), &spectra))
}

fn apply_heat(spectra: &mut Spectra, modes: &ModeTable, t: f64) {
    for spec in spectra.iter_mut() {
        for (c, &k2) in spec.iter_mut().zip(&modes.xi2) {
            *c *= (-k2 * t).exp();
        }
    }
}

/// `ũ₀(t_j) = e^{t_j Δ} u₀` on every slice of the ladder.
pub fn caloric_extension(u0: &Field, ladder: &TimeLadder) -> SpaceTimeField {
    let grid = *u0.grid();
    let modes = ModeTable::new(&grid);
    let base = field_spectra(u0);
    let slices: Vec<Field> = (0..ladder.slices())
        .into_par_iter()
        .map(|j| {
            if j == 0 {
                return u0.clone();
            }
            let mut spectra = base.clone();
            apply_heat(&mut spectra, &modes, ladder.time(j));
            field_from_spectra(&grid, &spectra)
        })
        .collect();
    SpaceTimeField::new(*ladder, slices).expect("slices share grid and ladder")
}

/// Exponential-integrator weights `(e^{-λ dt}, (1 - e^{-λ dt}) / λ)` per mode.
fn integrator_weights(modes: &ModeTable, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let decay = modes.xi2.iter().map(|&k2| (-k2 * dt).exp()).collect();
    let weight = modes
        .xi2
        .iter()
        .map(|&k2| if k2 == 0.0 { dt } else { -(-k2 * dt).exp_m1() / k2 })
        .collect();
    (decay, weight)
}

/// One step `e^{dt Δ} u + (1 - e^{-|ξ|² dt}) / |ξ|² f` of the exponential
/// Euler scheme.
pub fn exponential_euler_step(u: &Field, forcing: &Field, dt: f64) -> Result<Field> {
    if u.grid() != forcing.grid() || u.components() != forcing.components() {
        return Err(Error::ShapeMismatch("state and forcing differ in shape".into()));
    }
    if dt < 0.0 || dt.is_nan() {
        return Err(Error::NegativeTime(dt));
    }
    let modes = ModeTable::new(u.grid());
    let (decay, weight) = integrator_weights(&modes, dt);
    let mut su = field_spectra(u);
    let sf = field_spectra(forcing);
    for (a, b) in su.iter_mut().zip(&sf) {
        for k in 0..a.len() {
            a[k] = a[k] * decay[k] + b[k] * weight[k];
        }
    }
    Ok(field_from_spectra(u.grid(), &su))
}

/// Runs the exponential-integrator recurrence over forcing spectra given for
/// slices `0..m` (the last slice of forcing is never used).
pub(crate) fn integrate_forcing(grid: &GridSpec, ladder: &TimeLadder, forcing: &[Spectra]) -> Vec<Field> {
    let modes = ModeTable::new(grid);
    let (decay, weight) = integrator_weights(&modes, ladder.dt());
    let l = forcing[0].len();
    let sites = grid.sites();
    let steps = ladder.steps;
    // state[j][a][k]
    let mut state: Vec<Spectra> = vec![vec![vec![Complex64::new(0.0, 0.0); sites]; l]; steps + 1];
    for j in 0..steps {
        let (done, rest) = state.split_at_mut(j + 1);
        let prev = &done[j];
        let next = &mut rest[0];
        for a in 0..l {
            let f = &forcing[j][a];
            for k in 0..sites {
                next[a][k] = prev[a][k] * decay[k] + f[k] * weight[k];
            }
        }
    }
    state
        .into_par_iter()
        .enumerate()
        .map(|(j, spectra)| {
            if j == 0 {
                Field::zeros(*grid, l)
            } else {
                field_from_spectra(grid, &spectra)
            }
        })
        .collect()
}

/// `𝕊f(t) = ∫₀ᵗ e^{(t-s)Δ} f(s) ds`.
pub fn duhamel_s(f: &SpaceTimeField) -> SpaceTimeField {
    let ladder = *f.ladder();
    let grid = *f.grid();
    let forcing: Vec<Spectra> = f.slices()[..ladder.steps]
        .par_iter()
        .map(field_spectra)
        .collect();
    let slices = integrate_forcing(&grid, &ladder, &forcing);
    SpaceTimeField::new(ladder, slices).expect("ladder preserved")
}

/// Leray projection of vector spectra in place: `v - ξ (ξ·v) / |ξ|²`, zero
/// mode (and any mode with vanishing derivative wavenumber) passed through.
fn leray_in_place(spectra: &mut [Vec<Complex64>], modes: &ModeTable) {
    let n = modes.dim;
    let sites = spectra[0].len();
    for k in 0..sites {
        let xi = modes.xi(k);
        let q: f64 = xi.iter().map(|x| x * x).sum();
        if q == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for i in 0..n {
            dot += spectra[i][k] * xi[i];
        }
        for i in 0..n {
            spectra[i][k] -= dot * (xi[i] / q);
        }
    }
}

/// Projection onto divergence-free fields, multiplier `δ_ij - ξ_i ξ_j / |ξ|²`.
///
/// For `n = 1` only the mean survives.
pub fn leray_project(f: &Field) -> Result<Field> {
    let grid = *f.grid();
    if f.components() != grid.dim {
        return Err(Error::ShapeMismatch(format!(
            "Leray projection needs {} components, got {}",
            grid.dim,
            f.components()
        )));
    }
    let modes = ModeTable::new(&grid);
    let mut spectra = field_spectra(f);
    leray_in_place(&mut spectra, &modes);
    Ok(field_from_spectra(&grid, &spectra))
}

/// `ℙ∇·F` for a tensor field `F_ij` on one slice.
pub fn leray_divergence(f: &Field) -> Result<Field> {
    let grid = *f.grid();
    let n = grid.dim;
    if f.components() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "expected an {n}x{n} tensor field, got {} components",
            f.components()
        )));
    }
    let modes = ModeTable::new(&grid);
    Ok(field_from_spectra(&grid, &projected_divergence(&field_spectra(f), &modes)))
}

/// `ℙ∇·F` in Fourier space for a row-major tensor spectrum `F_ij`.
pub(crate) fn projected_divergence(tensor: &Spectra, modes: &ModeTable) -> Spectra {
    let n = modes.dim;
    let sites = tensor[0].len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); sites]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (k, acc) in row.iter_mut().enumerate() {
            let xi = modes.xi(k);
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                s += tensor[i * n + j][k] * Complex64::new(0.0, xi[j]);
            }
            *acc = s;
        }
    }
    leray_in_place(&mut out, modes);
    out
}

/// `𝕍F(t) = ∫₀ᵗ e^{(t-s)Δ} ℙ∇·F(s) ds` for a tensor field `F_ij`
/// (`n * n` components, row-major).
pub fn duhamel_v(f: &SpaceTimeField) -> Result<SpaceTimeField> {
    let ladder = *f.ladder();
    let grid = *f.grid();
    let n = grid.dim;
    if n < 2 {
        return Err(Error::InvalidArgument("𝕍 requires n >= 2".into()));
    }
    if f.components() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "𝕍 needs an {n}x{n} tensor field, got {} components",
            f.components()
        )));
    }
    let modes = ModeTable::new(&grid);
    let forcing: Vec<Spectra> = f.slices()[..ladder.steps]
        .par_iter()
        .map(|s| projected_divergence(&field_spectra(s), &modes))
        .collect();
    let slices = integrate_forcing(&grid, &ladder, &forcing);
    SpaceTimeField::new(ladder, slices)
}

/// Mean-zero pressure solving `-ΔP = ∇·(u·∇u + ∇·(∇d⊗∇d))`.
///
/// Products are formed on the padded grid. Diagnostic only: the flows never
/// need the pressure.
pub fn recover_pressure(u: &Field, d: &Field) -> Result<Field> {
    let grid = *u.grid();
    let n = grid.dim;
    if n < 2 {
        return Err(Error::InvalidArgument("pressure recovery requires n >= 2".into()));
    }
    if u.components() != n || d.grid() != u.grid() {
        return Err(Error::ShapeMismatch("velocity must have n components on the director grid".into()));
    }
    let l = d.components();
    let dealias = Dealiaser::new(&grid);
    let (u_pad, grad_u_pad) = dealias.pad_with_gradient(u);
    let (_, grad_d_pad) = dealias.pad_with_gradient(d);
    let psites = dealias.padded_sites();
    // u·∇u on the padded grid
    let mut conv = vec![vec![0.0; psites]; n];
    let mut stress = vec![vec![0.0; psites]; n * n];
    for s in 0..psites {
        for a in 0..n {
            conv[a][s] = (0..n).map(|i| u_pad[i][s] * grad_u_pad[a * n + i][s]).sum();
        }
        for i in 0..n {
            for j in 0..n {
                stress[i * n + j][s] = (0..l)
                    .map(|a| grad_d_pad[a * n + i][s] * grad_d_pad[a * n + j][s])
                    .sum();
            }
        }
    }
    let modes = ModeTable::new(&grid);
    let conv_hat: Spectra = conv.iter().map(|c| dealias.unpad_spectrum(c)).collect();
    let stress_hat: Spectra = stress.iter().map(|c| dealias.unpad_spectrum(c)).collect();
    let mut p_hat = vec![Complex64::new(0.0, 0.0); grid.sites()];
    for (k, p) in p_hat.iter_mut().enumerate() {
        let xi = modes.xi(k);
        let q: f64 = xi.iter().map(|x| x * x).sum();
        if q == 0.0 {
            continue;
        }
        // ĝ = iξ_i (conv_i + iξ_j F_ij)
        let mut g = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut v = conv_hat[i][k];
            for j in 0..n {
                v += stress_hat[i * n + j][k] * Complex64::new(0.0, xi[j]);
            }
            g += v * Complex64::new(0.0, xi[i]);
        }
        *p = g / q;
    }
    Ok(field_from_spectra(&grid, &[p_hat]))
}
