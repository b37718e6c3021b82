use super::{Field, GridSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform time ladder `t_j = j * T / m`, `j = 0..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeLadder {
    pub t_final: f64,
    pub steps: usize,
}

impl TimeLadder {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        let l = TimeLadder { t_final, steps };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive (got {})",
                self.t_final
            )));
        }
        if self.steps < 4 {
            return Err(Error::InvalidArgument(format!(
                "time ladder needs at least 4 steps (got {})",
                self.steps
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    pub fn slices(&self) -> usize {
        self.steps + 1
    }

    /// Index of the last slice of the window `[0, r^2]`, rounded up to the
    /// next slice and clamped to `[1, steps]`.
    pub fn window_end(&self, r: f64) -> usize {
        let raw = (r * r / self.dt() - 1e-9).ceil();
        (raw.max(1.0) as usize).min(self.steps)
    }

    /// Ratio `dt / h^2`; the semigroup is unconditionally stable so this is
    /// advisory only.
    pub fn parabolic_ratio(&self, grid: &GridSpec) -> f64 {
        self.dt() / (grid.spacing() * grid.spacing())
    }

    /// Same final time, `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> TimeLadder {
        TimeLadder {
            t_final: self.t_final,
            steps: self.steps * factor,
        }
    }
}

/// A field sampled at every slice of a [`TimeLadder`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    ladder: TimeLadder,
    slices: Vec<Field>,
}

impl SpaceTimeField {
    pub fn new(ladder: TimeLadder, slices: Vec<Field>) -> Result<Self> {
        ladder.validate()?;
        if slices.len() != ladder.slices() {
            return Err(Error::ShapeMismatch(format!(
                "ladder has {} slices, got {}",
                ladder.slices(),
                slices.len()
            )));
        }
        let (g, l) = (*slices[0].grid(), slices[0].components());
        if slices.iter().any(|s| *s.grid() != g || s.components() != l) {
            return Err(Error::ShapeMismatch("slices differ in grid or components".into()));
        }
        Ok(SpaceTimeField { ladder, slices })
    }

    pub fn constant_in_time(ladder: TimeLadder, f: &Field) -> Self {
        SpaceTimeField {
            ladder,
            slices: vec![f.clone(); ladder.slices()],
        }
    }

    pub fn zeros(ladder: TimeLadder, grid: GridSpec, components: usize) -> Self {
        Self::constant_in_time(ladder, &Field::zeros(grid, components))
    }

    /// Samples `f(x, t, out)` on every slice.
    pub fn from_fn<F>(ladder: TimeLadder, grid: GridSpec, components: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64], f64, &mut [f64]),
    {
        let slices = (0..ladder.slices())
            .map(|j| {
                let t = ladder.time(j);
                Field::from_fn(grid, components, |x, o| f(x, t, o))
            })
            .collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(ladder, slices)
    }

    pub fn ladder(&self) -> &TimeLadder {
        &self.ladder
    }

    pub fn grid(&self) -> &GridSpec {
        self.slices[0].grid()
    }

    pub fn components(&self) -> usize {
        self.slices[0].components()
    }

    pub fn slice(&self, j: usize) -> &Field {
        &self.slices[j]
    }

    pub fn slices(&self) -> &[Field] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<Field> {
        self.slices
    }

    pub fn sub(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn add(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn scale(&self, alpha: f64) -> SpaceTimeField {
        SpaceTimeField {
            ladder: self.ladder,
            slices: self.slices.iter().map(|s| s.scale(alpha)).collect(),
        }
    }

    fn zip_with<F>(&self, other: &SpaceTimeField, f: F) -> Result<SpaceTimeField>
    where
        F: Fn(&Field, &Field) -> Result<Field>,
    {
        if self.ladder != other.ladder {
            return Err(Error::ShapeMismatch("space-time fields on different ladders".into()));
        }
        let slices = self
            .slices
            .iter()
            .zip(&other.slices)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpaceTimeField {
            ladder: self.ladder,
            slices,
        })
    }

    /// Applies a slice-wise map, keeping the ladder.
    pub fn map_slices<F>(&self, f: F) -> Result<SpaceTimeField>
    where
        F: Fn(&Field) -> Result<Field>,
    {
        let slices = self.slices.iter().map(f).collect::<Result<Vec<_>>>()?;
        SpaceTimeField::new(self.ladder, slices)
    }

    /// `max_j max_x |f(x, t_j)|`.
    pub fn sup_norm(&self) -> f64 {
        self.slices.iter().map(Field::sup_norm).fold(0.0, f64::max)
    }

    /// `max_j max_x | |f(x, t_j)| - 1 |`.
    pub fn unit_defect(&self) -> f64 {
        self.slices
            .iter()
            .flat_map(|s| s.pointwise_norm())
            .map(|r| (r - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
