//! n-dimensional FFTs on the torus grid and the Fourier-multiplier calculus
//! built on them.
//!
//! Forward transforms are unnormalized; inverse transforms carry the `1/M^n`.
//! Derivative multipliers vanish on the Nyquist index (the interpolant of the
//! Nyquist mode has zero derivative at grid points), while `|xi|^2` keeps the
//! Nyquist wavenumber so the Laplacian and the heat semigroup stay exact on it.

use super::{Field, GridSpec};
use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// In-place transform along every axis of a `m^dim` row-major array.
pub(crate) fn fft_nd(data: &mut [Complex64], m: usize, dim: usize, inverse: bool) {
    debug_assert_eq!(data.len(), m.pow(dim as u32));
    let fft = plan(m, inverse);
    let total = data.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut lines = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..dim {
        let stride = m.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let outer = total / (m * stride);
        // gather every line along `axis` contiguously, transform, scatter back
        let mut k = 0;
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * m * stride + inner;
                for i in 0..m {
                    lines[k] = data[base + i * stride];
                    k += 1;
                }
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        let mut k = 0;
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * m * stride + inner;
                for i in 0..m {
                    data[base + i * stride] = lines[k];
                    k += 1;
                }
            }
        }
    }
    if inverse {
        let norm = 1.0 / total as f64;
        data.iter_mut().for_each(|c| *c *= norm);
    }
}

/// Forward transform of one real scalar array on `grid`.
pub fn fft_forward(grid: &GridSpec, real: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = real.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    fft_nd(&mut data, grid.points_per_axis, grid.dim, false);
    data
}

/// Inverse transform, keeping the real part.
pub fn fft_inverse(grid: &GridSpec, spectrum: &[Complex64]) -> Vec<f64> {
    let mut data = spectrum.to_vec();
    fft_nd(&mut data, grid.points_per_axis, grid.dim, true);
    data.into_iter().map(|c| c.re).collect()
}

/// Signed integer wavenumber of index `i` on an axis of `m` points; the
/// Nyquist index maps to `-m/2`.
pub(crate) fn signed_index(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// Per-mode wavenumber data for a grid.
pub(crate) struct ModeTable {
    pub dim: usize,
    /// Derivative wavenumbers, `dim` per mode, zero on Nyquist indices.
    pub xi: Vec<f64>,
    /// `|xi|^2` including Nyquist wavenumbers.
    pub xi2: Vec<f64>,
}

impl ModeTable {
    pub fn new(grid: &GridSpec) -> Self {
        let m = grid.points_per_axis;
        let n = grid.dim;
        let base = 2.0 * PI / grid.period;
        let sites = grid.sites();
        let mut xi = vec![0.0; sites * n];
        let mut xi2 = vec![0.0; sites];
        for s in 0..sites {
            let idx = grid.multi_index(s);
            let mut acc = 0.0;
            for a in 0..n {
                let k = signed_index(idx[a], m);
                let w = base * k as f64;
                acc += w * w;
                xi[s * n + a] = if idx[a] == m / 2 { 0.0 } else { w };
            }
            xi2[s] = acc;
        }
        ModeTable { dim: n, xi, xi2 }
    }

    #[inline]
    pub fn xi(&self, mode: usize) -> &[f64] {
        &self.xi[mode * self.dim..(mode + 1) * self.dim]
    }
}

/// Transforms every component of a field.
pub(crate) fn field_spectra(f: &Field) -> Vec<Vec<Complex64>> {
    (0..f.components())
        .map(|a| fft_forward(f.grid(), &f.component(a)))
        .collect()
}

/// Inverse of [`field_spectra`].
pub(crate) fn field_from_spectra(grid: &GridSpec, spectra: &[Vec<Complex64>]) -> Field {
    let comps: Vec<Vec<f64>> = spectra.iter().map(|s| fft_inverse(grid, s)).collect();
    let l = comps.len();
    let mut values = vec![0.0; grid.sites() * l];
    for (a, c) in comps.iter().enumerate() {
        for (s, v) in c.iter().enumerate() {
            values[s * l + a] = *v;
        }
    }
    Field::from_parts(*grid, l, values)
}

/// Applies a real per-mode multiplier to every component.
pub(crate) fn apply_multiplier<F>(f: &Field, mult: F) -> Field
where
    F: Fn(usize) -> f64,
{
    let mut spectra = field_spectra(f);
    for spec in spectra.iter_mut() {
        for (k, c) in spec.iter_mut().enumerate() {
            *c *= mult(k);
        }
    }
    field_from_spectra(f.grid(), &spectra)
}

/// Exact Laplacian of the trigonometric interpolant (multiplier `-|xi|^2`).
pub fn spectral_laplacian(f: &Field) -> Field {
    let modes = ModeTable::new(f.grid());
    apply_multiplier(f, |k| -modes.xi2[k])
}

/// Gradient with layout `out[a * n + i] = d_i f_a`.
pub fn spectral_gradient(f: &Field) -> Field {
    let grid = *f.grid();
    let modes = ModeTable::new(&grid);
    let n = grid.dim;
    let spectra = field_spectra(f);
    let mut out = Vec::with_capacity(spectra.len() * n);
    for spec in &spectra {
        for i in 0..n {
            out.push(
                spec.iter()
                    .enumerate()
                    .map(|(k, c)| c * Complex64::new(0.0, modes.xi(k)[i]))
                    .collect::<Vec<_>>(),
            );
        }
    }
    field_from_spectra(&grid, &out)
}

/// Divergence `sum_j d_j f_{ij}` of the trailing index.
///
/// A field with `l = n` yields a scalar; a tensor field with `l = n * n`
/// (row-major `f_{ij}`) yields a vector field with `l = n`.
pub fn spectral_divergence(f: &Field) -> Result<Field> {
    let grid = *f.grid();
    let n = grid.dim;
    let l = f.components();
    if l % n != 0 || !(l == n || l == n * n) {
        return Err(Error::ShapeMismatch(format!(
            "divergence needs n or n*n components on a {n}-d grid, got {l}"
        )));
    }
    let rows = l / n;
    let modes = ModeTable::new(&grid);
    let spectra = field_spectra(f);
    let mut out = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.sites()];
        for (j, spec) in spectra[r * n..(r + 1) * n].iter().enumerate() {
            for (k, c) in spec.iter().enumerate() {
                acc[k] += c * Complex64::new(0.0, modes.xi(k)[j]);
            }
        }
        out.push(acc);
    }
    Ok(field_from_spectra(&grid, &out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, m: usize) -> GridSpec {
        GridSpec::new(n, m, 2.0 * PI).unwrap()
    }

    #[test]
    fn nd_roundtrip_is_identity() {
        for (n, m) in [(1, 16), (2, 8), (3, 8)] {
            let g = grid(n, m);
            let x: Vec<f64> = (0..g.sites()).map(|i| ((i * 37 % 11) as f64).sin()).collect();
            let back = fft_inverse(&g, &fft_forward(&g, &x));
            for (a, b) in x.iter().zip(&back) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_mode_lands_on_expected_index() {
        let g = grid(2, 8);
        let f: Vec<f64> = (0..g.sites()).map(|s| g.coords(s)[1].cos()).collect();
        let spec = fft_forward(&g, &f);
        // cos(x_2): weight M^n / 2 at k = (0, +-1)
        assert!((spec[1].re - 32.0).abs() < 1e-12);
        assert!((spec[7].re - 32.0).abs() < 1e-12);
        assert!(spec[8].norm() < 1e-12);
    }

    #[test]
    fn nyquist_has_no_derivative() {
        let g = grid(1, 8);
        let f = Field::from_fn(g, 1, |x, o| o[0] = (4.0 * x[0]).cos()).unwrap();
        assert!(spectral_gradient(&f).max_abs() < 1e-12);
        let lap = spectral_laplacian(&f);
        for s in 0..g.sites() {
            assert!((lap.at(s)[0] + 16.0 * f.at(s)[0]).abs() < 1e-11);
        }
    }
}
