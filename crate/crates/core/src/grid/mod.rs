//! Periodic n-torus grids, sampled vector fields and their spectral calculus.
//!
//! The torus `[0, L)^n` sampled at `M` points per axis stands in for the whole
//! space. Values are stored in physical space, site-major: the `l` components
//! of site `s` live at `values[s * l .. (s + 1) * l]`. Sites are numbered
//! row-major with the last axis varying fastest.

mod algebra;
pub(crate) mod dealias;
mod snapshot;
mod spacetime;
pub(crate) mod spectral;

pub use algebra::{grad_outer, tensor_product, transport};
pub use dealias::Dealiaser;
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_MAGIC};
pub use spacetime::{SpaceTimeField, TimeLadder};
pub use spectral::{
    fft_forward, fft_inverse, spectral_divergence, spectral_gradient, spectral_laplacian,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform sampling of the flat torus `[0, L)^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        let g = GridSpec {
            dim,
            points_per_axis,
            period,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3 (got {})",
                self.dim
            )));
        }
        let m = self.points_per_axis;
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8 (got {m})"
            )));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period must be positive and finite (got {})",
                self.period
            )));
        }
        Ok(())
    }

    /// Grid spacing `h = L / M`.
    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    pub fn sites(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Volume element `h^n` of one site.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Multi-index of a site, `dim` entries.
    pub fn multi_index(&self, site: usize) -> [usize; 3] {
        let m = self.points_per_axis;
        let mut idx = [0usize; 3];
        let mut rest = site;
        for a in (0..self.dim).rev() {
            idx[a] = rest % m;
            rest /= m;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let m = self.points_per_axis;
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * m + i)
    }

    /// Site reached from `site` by the signed periodic offset `delta`.
    pub fn offset_site(&self, site: usize, delta: &[i64]) -> usize {
        let m = self.points_per_axis as i64;
        let idx = self.multi_index(site);
        let mut flat = 0usize;
        for a in 0..self.dim {
            let i = (idx[a] as i64 + delta[a]).rem_euclid(m);
            flat = flat * self.points_per_axis + i as usize;
        }
        flat
    }

    /// Physical coordinates of a site.
    pub fn coords(&self, site: usize) -> [f64; 3] {
        let h = self.spacing();
        let idx = self.multi_index(site);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * h;
        }
        x
    }
}

/// A vector-valued function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    components: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, components: usize, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if components == 0 {
            return Err(Error::ShapeMismatch("field needs at least one component".into()));
        }
        if values.len() != grid.sites() * components {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for {} sites x {} components, got {}",
                grid.sites() * components,
                grid.sites(),
                components,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Field {
            grid,
            components,
            values,
        })
    }

    /// Construction for values produced by spectral operators on valid input.
    pub(crate) fn from_parts(grid: GridSpec, components: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.sites() * components);
        Field {
            grid,
            components,
            values,
        }
    }

    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        Field::from_parts(grid, components, vec![0.0; grid.sites() * components])
    }

    pub fn constant(grid: GridSpec, value: &[f64]) -> Self {
        let mut values = Vec::with_capacity(grid.sites() * value.len());
        for _ in 0..grid.sites() {
            values.extend_from_slice(value);
        }
        Field::from_parts(grid, value.len(), values)
    }

    /// Samples `f(x, out)` at every site.
    pub fn from_fn<F>(grid: GridSpec, components: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let mut values = vec![0.0; grid.sites() * components];
        for (s, out) in values.chunks_mut(components).enumerate() {
            let x = grid.coords(s);
            f(&x[..grid.dim], out);
        }
        Field::new(grid, components, values)
    }

    /// Builds a field from per-component arrays.
    pub fn from_components(grid: GridSpec, comps: &[Vec<f64>]) -> Result<Self> {
        let l = comps.len();
        let sites = grid.sites();
        if comps.iter().any(|c| c.len() != sites) {
            return Err(Error::ShapeMismatch("component length differs from site count".into()));
        }
        let mut values = vec![0.0; sites * l];
        for (a, c) in comps.iter().enumerate() {
            for (s, v) in c.iter().enumerate() {
                values[s * l + a] = *v;
            }
        }
        Field::new(grid, l, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, site: usize) -> &[f64] {
        &self.values[site * self.components..(site + 1) * self.components]
    }

    pub fn component(&self, a: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(a)
            .step_by(self.components)
            .copied()
            .collect()
    }

    pub fn component_vecs(&self) -> Vec<Vec<f64>> {
        (0..self.components).map(|a| self.component(a)).collect()
    }

    /// Pointwise Euclidean norm of the component vector.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        self.values
            .chunks(self.components)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect()
    }

    /// `max_x |f(x)|` with the Euclidean norm over components.
    pub fn sup_norm(&self) -> f64 {
        self.pointwise_norm().into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute entry over all sites and components.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^2` norm `(h^n sum |f|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Uniform-weight mean of each component.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.components];
        for v in self.values.chunks(self.components) {
            for (acc, x) in m.iter_mut().zip(v) {
                *acc += x;
            }
        }
        let n = self.grid.sites() as f64;
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    fn check_same_shape(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid || self.components != other.components {
            return Err(Error::ShapeMismatch(format!(
                "fields differ in grid or components ({} vs {})",
                self.components, other.components
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a - b))
    }

    /// Componentwise product of two fields of the same shape.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.check_same_shape(other)?;
        Ok(self.zip_map(other, |a, b| a * b))
    }

    /// Multiplies every component by the matching site value of a scalar field.
    pub fn mul_scalar_field(&self, s: &Field) -> Result<Field> {
        if s.components != 1 || s.grid != self.grid {
            return Err(Error::ShapeMismatch("expected a scalar field on the same grid".into()));
        }
        let l = self.components;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * s.values[i / l])
            .collect();
        Ok(Field::from_parts(self.grid, l, values))
    }

    pub fn scale(&self, alpha: f64) -> Field {
        self.map(|v| alpha * v)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field::from_parts(
            self.grid,
            self.components,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Field {
        Field::from_parts(
            self.grid,
            self.components,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Cyclic translation: `out(x) = f(x - shift * h)`.
    pub fn shift(&self, shift: &[i64]) -> Field {
        let l = self.components;
        let mut values = vec![0.0; self.values.len()];
        for s in 0..self.grid.sites() {
            let t = self.grid.offset_site(s, shift);
            values[t * l..(t + 1) * l].copy_from_slice(self.at(s));
        }
        Field::from_parts(self.grid, l, values)
    }

    /// Selects a contiguous range of components.
    pub fn select(&self, start: usize, count: usize) -> Result<Field> {
        if start + count > self.components || count == 0 {
            return Err(Error::ShapeMismatch("component range out of bounds".into()));
        }
        let l = self.components;
        let values = self
            .values
            .chunks(l)
            .flat_map(|v| v[start..start + count].iter().copied())
            .collect();
        Ok(Field::from_parts(self.grid, count, values))
    }
}
