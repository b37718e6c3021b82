//! Zero-padding (3/2 rule) evaluation of pointwise nonlinearities.

use super::spectral::{fft_nd, field_spectra, signed_index, ModeTable};
use super::{Field, GridSpec};
use rustfft::num_complex::Complex64;

/// Evaluates pointwise kernels on a `3M/2` grid and truncates the result back
/// to the resolved modes. Nyquist modes are dropped on the way up and on the
/// way down.
#[derive(Debug, Clone)]
pub struct Dealiaser {
    grid: GridSpec,
    padded_m: usize,
    /// (index on the base grid, index on the padded grid) for resolved modes.
    map: Vec<(usize, usize)>,
    /// Padded-grid derivative wavenumbers for each entry of `map`.
    xi: Vec<f64>,
    up: f64,
}

impl Dealiaser {
    pub fn new(grid: &GridSpec) -> Self {
        let m = grid.points_per_axis;
        let pm = 3 * m / 2;
        let n = grid.dim;
        let modes = ModeTable::new(grid);
        let mut map = Vec::new();
        let mut xi = Vec::new();
        'modes: for s in 0..grid.sites() {
            let idx = grid.multi_index(s);
            let mut flat = 0usize;
            for &i in idx.iter().take(n) {
                if i == m / 2 {
                    continue 'modes;
                }
                let k = signed_index(i, m);
                flat = flat * pm + k.rem_euclid(pm as i64) as usize;
            }
            map.push((s, flat));
            xi.extend_from_slice(modes.xi(s));
        }
        let up = (pm as f64 / m as f64).powi(n as i32);
        Dealiaser {
            grid: *grid,
            padded_m: pm,
            map,
            xi,
            up,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn padded_points(&self) -> usize {
        self.padded_m
    }

    pub fn padded_sites(&self) -> usize {
        self.padded_m.pow(self.grid.dim as u32)
    }

    fn to_padded(&self, spectrum: &[Complex64], mult: impl Fn(usize) -> Complex64) -> Vec<f64> {
        let mut data = vec![Complex64::new(0.0, 0.0); self.padded_sites()];
        for (e, &(src, dst)) in self.map.iter().enumerate() {
            data[dst] = spectrum[src] * mult(e) * self.up;
        }
        fft_nd(&mut data, self.padded_m, self.grid.dim, true);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Physical values on the padded grid of the resolved part of `spectrum`.
    pub fn pad(&self, spectrum: &[Complex64]) -> Vec<f64> {
        self.to_padded(spectrum, |_| Complex64::new(1.0, 0.0))
    }

    /// Padded values of `d_i` applied to the resolved part of `spectrum`.
    pub fn pad_derivative(&self, spectrum: &[Complex64], axis: usize) -> Vec<f64> {
        let n = self.grid.dim;
        self.to_padded(spectrum, |e| Complex64::new(0.0, self.xi[e * n + axis]))
    }

    /// Spectrum on the base grid of padded physical values, truncated to the
    /// resolved modes.
    pub fn unpad_spectrum(&self, padded: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = padded.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        fft_nd(&mut data, self.padded_m, self.grid.dim, false);
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.sites()];
        let down = 1.0 / self.up;
        for &(src, dst) in &self.map {
            out[src] = data[dst] * down;
        }
        out
    }

    /// Truncated physical values on the base grid.
    pub fn unpad(&self, padded: &[f64]) -> Vec<f64> {
        let spec = self.unpad_spectrum(padded);
        super::spectral::fft_inverse(&self.grid, &spec)
    }

    /// Padded values of every component of `f` and of its gradient
    /// (gradient layout `a * n + i`).
    pub fn pad_with_gradient(&self, f: &Field) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n = self.grid.dim;
        let spectra = field_spectra(f);
        let values = spectra.iter().map(|s| self.pad(s)).collect();
        let mut grads = Vec::with_capacity(spectra.len() * n);
        for s in &spectra {
            for i in 0..n {
                grads.push(self.pad_derivative(s, i));
            }
        }
        (values, grads)
    }

    /// Padded values of every component of `f`.
    pub fn pad_field(&self, f: &Field) -> Vec<Vec<f64>> {
        field_spectra(f).iter().map(|s| self.pad(s)).collect()
    }

    /// Dealiased pointwise map. The kernel sees, at each padded site, the
    /// concatenated component values of `inputs` and writes `out_components`
    /// values.
    pub fn pointwise<K>(&self, inputs: &[&Field], out_components: usize, kernel: K) -> Field
    where
        K: Fn(&[f64], &mut [f64]),
    {
        let padded: Vec<Vec<f64>> = inputs.iter().flat_map(|f| self.pad_field(f)).collect();
        let sites = self.padded_sites();
        let mut outs = vec![vec![0.0; sites]; out_components];
        let mut arg = vec![0.0; padded.len()];
        let mut res = vec![0.0; out_components];
        for s in 0..sites {
            for (a, p) in padded.iter().enumerate() {
                arg[a] = p[s];
            }
            kernel(&arg, &mut res);
            for (o, r) in outs.iter_mut().zip(&res) {
                o[s] = *r;
            }
        }
        self.assemble(&outs)
    }

    /// Unpads each padded component and packs them into a field.
    pub fn assemble(&self, padded_components: &[Vec<f64>]) -> Field {
        let l = padded_components.len();
        let sites = self.grid.sites();
        let mut values = vec![0.0; sites * l];
        for (a, p) in padded_components.iter().enumerate() {
            for (s, v) in self.unpad(p).into_iter().enumerate() {
                values[s * l + a] = v;
            }
        }
        Field::from_parts(self.grid, l, values)
    }
}
