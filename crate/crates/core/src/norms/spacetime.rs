use super::balls::{ball_stencil, check_radius, max_radius, BallStencil};
use super::{dyadic_radii, Maximizer, NormReport};
use crate::error::{Error, Result};
use crate::grid::{spectral_gradient, Field, GridSpec, SpaceTimeField, TimeLadder};
use crate::heat::caloric_extension;
use rayon::prelude::*;

/// `P_R(x, R^2) = B_R(x) × [0, R^2]`; the time window ends at ladder slice
/// `window_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicCylinder {
    pub center: usize,
    pub radius: f64,
    pub window_end: usize,
}

impl ParabolicCylinder {
    pub fn new(ladder: &TimeLadder, center: usize, radius: f64) -> Self {
        ParabolicCylinder {
            center,
            radius,
            window_end: ladder.window_end(radius),
        }
    }
}

/// A nonnegative density sampled on every slice, integrated over cylinders.
#[derive(Debug, Clone)]
pub struct CylinderDensity {
    pub grid: GridSpec,
    pub ladder: TimeLadder,
    /// `values[j][site]`
    pub values: Vec<Vec<f64>>,
}

/// `|∇f|^2` (sum over components and axes) on every slice.
pub fn grad_density(f: &SpaceTimeField) -> CylinderDensity {
    let values = f
        .slices()
        .par_iter()
        .map(|s| {
            spectral_gradient(s)
                .pointwise_norm()
                .into_iter()
                .map(|g| g * g)
                .collect()
        })
        .collect();
    CylinderDensity {
        grid: *f.grid(),
        ladder: *f.ladder(),
        values,
    }
}

/// `|f|^power` on every slice.
pub fn abs_density(f: &SpaceTimeField, power: i32) -> CylinderDensity {
    let values = f
        .slices()
        .iter()
        .map(|s| s.pointwise_norm().into_iter().map(|v| v.powi(power)).collect())
        .collect();
    CylinderDensity {
        grid: *f.grid(),
        ladder: *f.ladder(),
        values,
    }
}

impl CylinderDensity {
    /// Trapezoid rule over slices `0..=end` at one site.
    fn time_integral(&self, site: usize, end: usize) -> f64 {
        let v = &self.values;
        let mut acc = 0.5 * (v[0][site] + v[end][site]);
        for row in &v[1..end] {
            acc += row[site];
        }
        acc * self.ladder.dt()
    }
}

/// `R^{-n} ∫_{P_R} density` on one cylinder, square-rooted if `root`.
pub fn cylinder_value(density: &CylinderDensity, cyl: &ParabolicCylinder, root: bool) -> f64 {
    let grid = density.grid;
    let stencil = ball_stencil(&grid, cyl.radius);
    let mut acc = 0.0;
    for s in stencil.members(&grid, cyl.center) {
        acc += density.time_integral(s, cyl.window_end);
    }
    finish_cylinder(acc, &grid, cyl.radius, root)
}

fn finish_cylinder(sum: f64, grid: &GridSpec, r: f64, root: bool) -> f64 {
    let v = sum * grid.cell_volume() / r.powi(grid.dim as i32);
    if root {
        v.sqrt()
    } else {
        v
    }
}

/// Supremum of [`cylinder_value`] over grid centers and dyadic radii up to
/// `r_max`.
fn cylinder_sup(density: &CylinderDensity, r_max: f64, root: bool) -> (f64, Maximizer) {
    let grid = density.grid;
    let ladder = density.ladder;
    let radii = dyadic_radii(r_max, grid.spacing());
    let maps: Vec<(Vec<f64>, usize)> = radii
        .iter()
        .map(|&r| {
            let end = ladder.window_end(r);
            let integrals: Vec<f64> = (0..grid.sites())
                .into_par_iter()
                .map(|s| density.time_integral(s, end))
                .collect();
            let stencil: BallStencil = ball_stencil(&grid, r);
            let map = (0..grid.sites())
                .into_par_iter()
                .map(|c| {
                    let mut acc = 0.0;
                    for s in stencil.members(&grid, c) {
                        acc += integrals[s];
                    }
                    finish_cylinder(acc, &grid, r, root)
                })
                .collect();
            (map, end)
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for c in 0..grid.sites() {
        for (k, (map, _)) in maps.iter().enumerate() {
            if map[c] > best.0 {
                best = (map[c], c, k);
            }
        }
    }
    let (v, c, k) = best;
    (
        v,
        Maximizer::Cylinder {
            center: grid.multi_index(c)[..grid.dim].to_vec(),
            site: c,
            radius: radii[k],
            window_end: maps[k].1,
        },
    )
}

/// `sup_{j >= 1} weight(t_j) * max_x magnitude_j(x)`.
pub fn sup_weighted<W>(magnitudes: &[Vec<f64>], ladder: &TimeLadder, weight: W) -> (f64, Maximizer)
where
    W: Fn(f64) -> f64,
{
    let mut best = (f64::NEG_INFINITY, 1, 0);
    for (j, row) in magnitudes.iter().enumerate().skip(1) {
        let w = weight(ladder.time(j));
        for (s, &m) in row.iter().enumerate() {
            let v = w * m;
            if v > best.0 {
                best = (v, j, s);
            }
        }
    }
    (
        best.0,
        Maximizer::Slice {
            time_index: best.1,
            time: ladder.time(best.1),
            site: best.2,
        },
    )
}

/// Radius bound `min(L/4, √T)` for space-time cylinders.
fn spacetime_rmax(grid: &GridSpec, ladder: &TimeLadder) -> f64 {
    max_radius(grid).min(ladder.t_final.sqrt())
}

fn norms_of(f: &SpaceTimeField) -> Vec<Vec<f64>> {
    f.slices().iter().map(Field::pointwise_norm).collect()
}

/// `|||f|||_{X_T}`: terms `sup_abs`, `sup_sqrt_t_grad`, `carleson_grad`.
/// The value is their sum; [`x_seminorm`] drops `sup_abs`.
pub fn x_norm(f: &SpaceTimeField) -> NormReport {
    let ladder = *f.ladder();
    let grid = *f.grid();
    let dens = grad_density(f);
    let grad_mag: Vec<Vec<f64>> = dens
        .values
        .iter()
        .map(|row| row.iter().map(|v| v.sqrt()).collect())
        .collect();
    let (sup_abs, m_abs) = sup_weighted(&norms_of(f), &ladder, |_| 1.0);
    let (sup_grad, m_grad) = sup_weighted(&grad_mag, &ladder, f64::sqrt);
    let (carl, m_carl) = cylinder_sup(&dens, spacetime_rmax(&grid, &ladder), true);
    NormReport {
        value: sup_abs + sup_grad + carl,
        terms: vec![
            ("sup_abs".into(), sup_abs),
            ("sup_sqrt_t_grad".into(), sup_grad),
            ("carleson_grad".into(), carl),
        ],
        maximizers: vec![
            ("sup_abs".into(), m_abs),
            ("sup_sqrt_t_grad".into(), m_grad),
            ("carleson_grad".into(), m_carl),
        ],
    }
}

/// `‖f‖_{X_T}` (no sup-norm term) from an [`x_norm`] report.
pub fn x_seminorm(report: &NormReport) -> f64 {
    report.term("sup_sqrt_t_grad").unwrap_or(0.0) + report.term("carleson_grad").unwrap_or(0.0)
}

/// `‖f‖_{Y_T}`: terms `sup_t_abs` (`sup t‖f‖_∞`) and `carleson_abs`
/// (`sup R^{-n}∫_{P_R}|f|`).
pub fn y_norm(f: &SpaceTimeField) -> NormReport {
    let ladder = *f.ladder();
    let grid = *f.grid();
    let (sup_t, m_t) = sup_weighted(&norms_of(f), &ladder, |t| t);
    let (carl, m_carl) = cylinder_sup(&abs_density(f, 1), spacetime_rmax(&grid, &ladder), false);
    NormReport {
        value: sup_t + carl,
        terms: vec![("sup_t_abs".into(), sup_t), ("carleson_abs".into(), carl)],
        maximizers: vec![("sup_t_abs".into(), m_t), ("carleson_abs".into(), m_carl)],
    }
}

/// `‖f‖_{Z_T}`: terms `sup_sqrt_t_abs` and `carleson_sq`
/// (`sup (R^{-n}∫_{P_R}|f|^2)^{1/2}`).
pub fn z_norm(f: &SpaceTimeField) -> NormReport {
    let ladder = *f.ladder();
    let grid = *f.grid();
    let (sup_t, m_t) = sup_weighted(&norms_of(f), &ladder, f64::sqrt);
    let (carl, m_carl) = cylinder_sup(&abs_density(f, 2), spacetime_rmax(&grid, &ladder), true);
    NormReport {
        value: sup_t + carl,
        terms: vec![("sup_sqrt_t_abs".into(), sup_t), ("carleson_sq".into(), carl)],
        maximizers: vec![("sup_sqrt_t_abs".into(), m_t), ("carleson_sq".into(), m_carl)],
    }
}

fn check_window(grid: &GridSpec, r: f64, ladder: &TimeLadder) -> Result<()> {
    check_radius(grid, r)?;
    if r * r > ladder.t_final * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "ladder ends at {} but cylinders of radius {r} need t up to {}",
            ladder.t_final,
            r * r
        )));
    }
    Ok(())
}

/// `sup_{x, r <= R} (r^{-n} ∫_{P_r} |∇ũ₀|^2)^{1/2}` from the caloric
/// extension on `ladder`.
pub fn carleson_bmo(u0: &Field, r: f64, ladder: &TimeLadder) -> Result<NormReport> {
    check_window(u0.grid(), r, ladder)?;
    let ext = caloric_extension(u0, ladder);
    let (v, m) = cylinder_sup(&grad_density(&ext), r, true);
    Ok(NormReport {
        value: v,
        terms: vec![("carleson_grad".into(), v)],
        maximizers: vec![("carleson_grad".into(), m)],
    })
}

/// `sup_{x, r <= R} (r^{-n} ∫_{P_r} |ũ₀|^2)^{1/2}`.
pub fn bmo_inv_norm(u0: &Field, r: f64, ladder: &TimeLadder) -> Result<NormReport> {
    check_window(u0.grid(), r, ladder)?;
    let ext = caloric_extension(u0, ladder);
    let (v, m) = cylinder_sup(&abs_density(&ext, 2), r, true);
    Ok(NormReport {
        value: v,
        terms: vec![("carleson_sq".into(), v)],
        maximizers: vec![("carleson_sq".into(), m)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn window_rounds_up() {
        let ladder = TimeLadder::new(1.0, 10).unwrap();
        assert_eq!(ladder.window_end(0.5), 3); // 0.25 / 0.1 = 2.5 -> 3
        assert_eq!(ladder.window_end(1.0), 10);
        assert_eq!(ladder.window_end(0.01), 1);
    }

    #[test]
    fn carleson_needs_long_enough_ladder() {
        let g = GridSpec::new(1, 32, 2.0 * PI).unwrap();
        let ladder = TimeLadder::new(1.0, 8).unwrap();
        let f = Field::zeros(g, 1);
        assert!(carleson_bmo(&f, 1.2, &ladder).is_err());
        assert!(carleson_bmo(&f, 1.0, &ladder).is_ok());
    }
}
