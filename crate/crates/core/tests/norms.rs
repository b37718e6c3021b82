use geoflow::data::{bmo_corpus, generate_data, DataFamily};
use geoflow::grid::spectral_gradient;
use geoflow::heat::caloric_extension;
use geoflow::norms::{
    abs_density, ball_oscillation, ball_stencil, bmo_inv_norm, bmo_seminorm, carleson_bmo, cylinder_value,
    grad_density, vmo_profile, x_norm, x_seminorm, y_norm, z_norm, Maximizer, NormReport, ParabolicCylinder,
};
use geoflow::{Field, GridSpec, SpaceTimeField, TimeLadder};
use std::f64::consts::PI;

fn torus(n: usize, m: usize) -> GridSpec {
    GridSpec::new(n, m, 2.0 * PI).unwrap()
}

/// Torus distance in index units, independent of the library's stencils.
fn torus_dist2(g: &GridSpec, a: usize, b: usize) -> f64 {
    let m = g.points_per_axis as i64;
    let (ia, ib) = (g.multi_index(a), g.multi_index(b));
    (0..g.dim)
        .map(|k| {
            let d = (ia[k] as i64 - ib[k] as i64).rem_euclid(m);
            let d = d.min(m - d) as f64;
            d * d
        })
        .sum()
}

/// `r^{-n} h^n Σ_{B_r(x)} |f - mean|` by scanning every site.
fn brute_oscillation(f: &Field, center: usize, r: f64) -> f64 {
    let g = f.grid();
    let h = g.spacing();
    let q = (r / h) * (r / h) * (1.0 + 1e-12);
    let members: Vec<usize> = (0..g.sites()).filter(|&s| torus_dist2(g, s, center) <= q).collect();
    let l = f.components();
    let mut mean = vec![0.0; l];
    for &s in &members {
        for a in 0..l {
            mean[a] += f.at(s)[a] / members.len() as f64;
        }
    }
    let sum: f64 = members
        .iter()
        .map(|&s| (0..l).map(|a| (f.at(s)[a] - mean[a]).powi(2)).sum::<f64>().sqrt())
        .sum();
    sum * g.cell_volume() / r.powi(g.dim as i32)
}

fn brute_bmo(f: &Field, radii: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for c in 0..f.grid().sites() {
        for &r in radii {
            best = best.max(brute_oscillation(f, c, r));
        }
    }
    best
}

fn oracle_dyadic(r_max: f64, h: f64) -> Vec<f64> {
    let mut out = vec![r_max];
    let mut r = r_max / 2.0;
    while r >= 2.0 * h - 1e-12 {
        out.push(r);
        r /= 2.0;
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn bmo_of_constant_is_zero() {
    let g = torus(2, 16);
    let f = Field::constant(g, &[0.3, -2.0, 1.0]);
    assert_eq!(bmo_seminorm(&f, PI / 2.0).unwrap().value, 0.0);
}

#[test]
fn bmo_is_homogeneous() {
    let g = torus(2, 32);
    let f = &bmo_corpus(&g, 3, 1).unwrap()[0];
    let base = bmo_seminorm(f, PI / 2.0).unwrap().value;
    for a in [-3.0, 0.5, 7.25] {
        let v = bmo_seminorm(&f.scale(a), PI / 2.0).unwrap().value;
        assert!(rel(v, a.abs() * base) < 1e-12);
    }
}

#[test]
fn bmo_matches_brute_force_oracle() {
    let g = torus(1, 64);
    let f = Field::from_fn(g, 1, |x, o| o[0] = x[0].sin()).unwrap();
    let report = bmo_seminorm(&f, PI / 2.0).unwrap();
    let dyadic = brute_bmo(&f, &oracle_dyadic(PI / 2.0, g.spacing()));
    assert!(rel(report.value, dyadic) < 1e-12, "{} vs {dyadic}", report.value);
    let all: Vec<f64> = (1..=16).map(|k| k as f64 * g.spacing()).collect();
    let exhaustive = brute_bmo(&f, &all);
    assert!(rel(report.value, exhaustive) < 1e-12, "{} vs {exhaustive}", report.value);
}

#[test]
fn dyadic_bmo_within_factor_of_exhaustive() {
    for (n, m) in [(1, 64), (2, 16)] {
        let g = torus(n, m);
        for f in bmo_corpus(&g, 3, 2).unwrap() {
            let d = bmo_seminorm(&f, PI / 2.0).unwrap().value;
            let all: Vec<f64> = (1..=m / 4).map(|k| k as f64 * g.spacing()).collect();
            let e = brute_bmo(&f, &all);
            assert!(d <= e * (1.0 + 1e-12));
            assert!(d * 2f64.powi(n as i32) >= e, "n={n}: {d} vs {e}");
        }
    }
}

#[test]
fn ball_averaged_variant_differs_by_discrete_ball_volume() {
    let g = torus(1, 64);
    let f = Field::from_fn(g, 1, |x, o| o[0] = x[0].sin()).unwrap();
    let r = bmo_seminorm(&f, PI / 2.0).unwrap();
    let avg = r.term("ball_averaged").unwrap();
    let Some(Maximizer::Ball { site, radius, .. }) = r.maximizer("ball_averaged") else {
        panic!("missing ball maximizer");
    };
    let st = ball_stencil(&g, *radius);
    let direct = ball_oscillation(&f, *site, &st) / (st.len() as f64 * g.cell_volume());
    assert!(rel(avg, direct) < 1e-12);
}

#[test]
fn vmo_profile_constant_monotone_and_linear_at_small_scales() {
    let g = torus(1, 64);
    let c = Field::constant(g, &[4.0]);
    assert!(vmo_profile(&c).iter().all(|&(_, v)| v == 0.0));

    let g = torus(1, 512);
    let f = Field::from_fn(g, 1, |x, o| o[0] = x[0].sin()).unwrap();
    let prof = vmo_profile(&f);
    assert!(prof.windows(2).all(|w| w[1].1 >= w[0].1));
    // a linear profile f' s on 2k+1 sites gives f' h (k+1); slope ‖f'‖ = 1
    let k = 8;
    let (r, v) = prof[k - 1];
    let expected = g.spacing() * (k + 1) as f64;
    assert!(rel(v, expected) < 0.01, "{v} vs {expected} at r={r}");
    assert!(prof[0].1 < prof[prof.len() - 1].1);
}

#[test]
fn carleson_and_bmo_inverse_vanish_and_scale() {
    let g = torus(2, 16);
    let ladder = TimeLadder::new(2.5, 20).unwrap();
    let c = Field::constant(g, &[1.0, 2.0]);
    assert!(carleson_bmo(&c, PI / 2.0, &ladder).unwrap().value < 1e-12);
    assert_eq!(bmo_inv_norm(&Field::zeros(g, 2), PI / 2.0, &ladder).unwrap().value, 0.0);

    let u = generate_data(&DataFamily::StreamFunction { alpha: 0.7, modes: 2 }, &g, 4).unwrap();
    let b = carleson_bmo(&u, PI / 2.0, &ladder).unwrap().value;
    let i = bmo_inv_norm(&u, PI / 2.0, &ladder).unwrap().value;
    for a in [-2.0, 0.125] {
        let s = u.scale(a);
        assert!(rel(carleson_bmo(&s, PI / 2.0, &ladder).unwrap().value, a.abs() * b) < 1e-12);
        assert!(rel(bmo_inv_norm(&s, PI / 2.0, &ladder).unwrap().value, a.abs() * i) < 1e-12);
    }
}

#[test]
fn bmo_inverse_of_derivative_is_controlled_by_bmo() {
    let g = torus(2, 32);
    let ladder = TimeLadder::new(2.5, 40).unwrap();
    let mut ratios = Vec::new();
    for gf in bmo_corpus(&g, 6, 8).unwrap() {
        let grad = spectral_gradient(&gf);
        let u0 = Field::from_components(g, &[grad.component(0), vec![0.0; g.sites()]]).unwrap();
        let inv = bmo_inv_norm(&u0, PI / 2.0, &ladder).unwrap().value;
        let bmo = bmo_seminorm(&gf, PI / 2.0).unwrap().value;
        ratios.push(inv / bmo);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    println!("bmo_inv(∂₁g) / [g]_BMO in [{lo:.4}, {hi:.4}]");
    assert!(lo > 0.0 && hi.is_finite() && hi / lo < 20.0);
}

#[test]
fn x_norm_of_constant() {
    let g = torus(2, 16);
    let ladder = TimeLadder::new(1.0, 8).unwrap();
    let f = SpaceTimeField::constant_in_time(ladder, &Field::constant(g, &[-3.0, 4.0]));
    let r = x_norm(&f);
    assert!(rel(r.value, 5.0) < 1e-15);
    assert!(x_seminorm(&r) < 1e-12);
}

#[test]
fn x_norm_gradient_term_of_decaying_mode() {
    // L = 4π so κ = 1/2; u0 = A cos(κx) has √t |∇ũ| = A κ √t e^{-κ²t} |sin κx|
    let g = GridSpec::new(1, 64, 4.0 * PI).unwrap();
    let ladder = TimeLadder::new(6.0, 60).unwrap();
    let (a, k) = (1.5, 0.5);
    let u0 = Field::from_fn(g, 1, |x, o| o[0] = a * (k * x[0]).cos()).unwrap();
    let r = x_norm(&caloric_extension(&u0, &ladder));
    let expected = (1..=ladder.steps)
        .map(|j| {
            let t = ladder.time(j);
            a * k * t.sqrt() * (-k * k * t).exp()
        })
        .fold(0.0, f64::max);
    assert!(rel(r.term("sup_sqrt_t_grad").unwrap(), expected) < 1e-12);
    assert!(rel(r.term("sup_abs").unwrap(), a * (-k * k * ladder.dt()).exp()) < 1e-12);
    assert!(r.term("carleson_grad").unwrap().is_finite());
}

#[test]
fn x_norm_triangle_inequality() {
    let g = torus(2, 16);
    let ladder = TimeLadder::new(1.0, 10).unwrap();
    for seed in 0..4 {
        let f = caloric_extension(&bmo_corpus(&g, 3, seed).unwrap()[0], &ladder);
        let h = caloric_extension(&bmo_corpus(&g, 3, seed + 10).unwrap()[1], &ladder);
        let sum = x_norm(&f.add(&h).unwrap()).value;
        assert!(sum <= x_norm(&f).value + x_norm(&h).value + 1e-12);
    }
}

#[test]
fn y_norm_of_zero_and_constant() {
    let g = torus(2, 16);
    let ladder = TimeLadder::new(2.0, 16).unwrap();
    assert_eq!(y_norm(&SpaceTimeField::zeros(ladder, g, 1)).value, 0.0);

    let c = 0.75;
    let r = y_norm(&SpaceTimeField::constant_in_time(ladder, &Field::constant(g, &[c])));
    // direct evaluation: R^{-n} · (#sites in B_R · h^n) · (window length) · |c|
    let h = g.spacing();
    let r_max = (PI / 2.0).min(ladder.t_final.sqrt());
    let mut carleson: f64 = 0.0;
    for rad in oracle_dyadic(r_max, h) {
        let k = (rad / h).floor() as i64;
        let q = (rad / h).powi(2) * (1.0 + 1e-12);
        let count = (-k..=k)
            .flat_map(|i| (-k..=k).map(move |j| (i, j)))
            .filter(|&(i, j)| ((i * i + j * j) as f64) <= q)
            .count();
        let end = ((rad * rad / ladder.dt() - 1e-9).ceil().max(1.0) as usize).min(ladder.steps);
        let v = count as f64 * h * h * end as f64 * ladder.dt() * c / (rad * rad);
        carleson = carleson.max(v);
    }
    assert!(rel(r.term("sup_t_abs").unwrap(), 2.0 * c) < 1e-14);
    assert!(rel(r.term("carleson_abs").unwrap(), carleson) < 1e-12);
    assert!(rel(r.value, 2.0 * c + carleson) < 1e-14);
}

#[test]
fn squared_gradient_y_terms_equal_squared_x_terms() {
    let g = torus(2, 32);
    let ladder = TimeLadder::new(2.0, 32).unwrap();
    for (i, f0) in bmo_corpus(&g, 3, 6).unwrap().into_iter().enumerate() {
        let u = caloric_extension(&f0, &ladder);
        let dens = grad_density(&u);
        let slices = dens.values.iter().map(|v| Field::new(g, 1, v.clone()).unwrap()).collect();
        let sq = SpaceTimeField::new(ladder, slices).unwrap();
        let x = x_norm(&u);
        let y = y_norm(&sq);
        let (s, c) = (x.term("sup_sqrt_t_grad").unwrap(), x.term("carleson_grad").unwrap());
        assert!(rel(y.term("sup_t_abs").unwrap(), s * s) < 1e-12, "member {i}");
        assert!(rel(y.term("carleson_abs").unwrap(), c * c) < 1e-12, "member {i}");
        assert!(y.value <= x_seminorm(&x).powi(2) * (1.0 + 1e-12));
    }
}

#[test]
fn z_norm_of_divergence_free_mode() {
    // u0 = (A sin x₂, 0): ũ = A e^{-t} (sin x₂, 0)
    let g = torus(2, 32);
    let ladder = TimeLadder::new(2.0, 40).unwrap();
    let a = 0.8;
    let u0 = Field::from_fn(g, 2, |x, o| {
        o[0] = a * x[1].sin();
        o[1] = 0.0;
    })
    .unwrap();
    assert_eq!(z_norm(&SpaceTimeField::zeros(ladder, g, 2)).value, 0.0);
    let r = z_norm(&caloric_extension(&u0, &ladder));
    let sup = (1..=ladder.steps)
        .map(|j| {
            let t = ladder.time(j);
            a * t.sqrt() * (-t).exp()
        })
        .fold(0.0, f64::max);
    assert!(rel(r.term("sup_sqrt_t_abs").unwrap(), sup) < 1e-12);

    // cylinder term from the closed-form extension, summed site by site
    let h = g.spacing();
    let dt = ladder.dt();
    let r_max = (PI / 2.0).min(ladder.t_final.sqrt());
    let mut best: f64 = 0.0;
    for rad in oracle_dyadic(r_max, h) {
        let end = ((rad * rad / dt - 1e-9).ceil().max(1.0) as usize).min(ladder.steps);
        let time_weight: f64 = (0..=end)
            .map(|j| {
                let w = if j == 0 || j == end { 0.5 } else { 1.0 };
                w * (-2.0 * ladder.time(j)).exp()
            })
            .sum::<f64>()
            * dt;
        // the integrand depends on x₂ only; scan centers along that axis
        for c in 0..g.points_per_axis {
            let center = g.flat_index(&[0, c]);
            let q = (rad / h).powi(2) * (1.0 + 1e-12);
            let sum: f64 = (0..g.sites())
                .filter(|&s| torus_dist2(&g, s, center) <= q)
                .map(|s| (a * g.coords(s)[1].sin()).powi(2))
                .sum();
            best = best.max((sum * h * h * time_weight / (rad * rad)).sqrt());
        }
    }
    assert!(rel(r.term("carleson_sq").unwrap(), best) < 1e-10);
}

#[test]
fn z_norm_of_extension_controlled_by_bmo_inverse() {
    let g = torus(2, 32);
    let ladder = TimeLadder::new(2.5, 40).unwrap();
    let mut ratios = Vec::new();
    for seed in 0..5 {
        for alpha in [0.01, 1.0] {
            let u0 = generate_data(&DataFamily::StreamFunction { alpha, modes: 2 }, &g, seed).unwrap();
            let z = z_norm(&caloric_extension(&u0, &ladder)).value;
            let inv = bmo_inv_norm(&u0, PI / 2.0, &ladder).unwrap().value;
            ratios.push(z / inv);
        }
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    println!("Z / BMO⁻¹ in [{lo:.4}, {hi:.4}]");
    assert!(lo >= 1.0 - 1e-12 && hi < 20.0);
}

#[test]
fn functionals_are_translation_invariant() {
    let g = torus(2, 16);
    let ladder = TimeLadder::new(2.5, 16).unwrap();
    let f = &bmo_corpus(&g, 3, 3).unwrap()[0];
    let shift = [5, -3];
    let fs = f.shift(&shift);
    assert_eq!(bmo_seminorm(f, PI / 2.0).unwrap().value, bmo_seminorm(&fs, PI / 2.0).unwrap().value);
    let u = caloric_extension(f, &ladder);
    let us = u.map_slices(|s| Ok(s.shift(&shift))).unwrap();
    assert_eq!(y_norm(&u).value, y_norm(&us).value);
    assert_eq!(z_norm(&u).value, z_norm(&us).value);
    assert!(rel(x_norm(&u).value, x_norm(&us).value) < 1e-12);
    assert!(rel(
        carleson_bmo(f, PI / 2.0, &ladder).unwrap().value,
        carleson_bmo(&fs, PI / 2.0, &ladder).unwrap().value
    ) < 1e-12);
}

fn assert_maximizers_reproduce(report: &NormReport, f: &SpaceTimeField) {
    for (name, m) in &report.maximizers {
        let value = report.term(name).unwrap();
        let again = match (name.as_str(), m) {
            ("sup_abs", Maximizer::Slice { time_index, site, .. }) => {
                f.slice(*time_index).pointwise_norm()[*site]
            }
            ("sup_sqrt_t_grad", Maximizer::Slice { time_index, time, site }) => {
                time.sqrt() * spectral_gradient(f.slice(*time_index)).pointwise_norm()[*site]
            }
            ("sup_t_abs", Maximizer::Slice { time_index, time, site }) => {
                time * f.slice(*time_index).pointwise_norm()[*site]
            }
            ("sup_sqrt_t_abs", Maximizer::Slice { time_index, time, site }) => {
                time.sqrt() * f.slice(*time_index).pointwise_norm()[*site]
            }
            (term, Maximizer::Cylinder { site, radius, window_end, .. }) => {
                let cyl = ParabolicCylinder { center: *site, radius: *radius, window_end: *window_end };
                match term {
                    "carleson_grad" => cylinder_value(&grad_density(f), &cyl, true),
                    "carleson_abs" => cylinder_value(&abs_density(f, 1), &cyl, false),
                    "carleson_sq" => cylinder_value(&abs_density(f, 2), &cyl, true),
                    other => panic!("unexpected term {other}"),
                }
            }
            (other, _) => panic!("unexpected maximizer for {other}"),
        };
        assert!((again - value).abs() <= 1e-12 * value.abs().max(1.0), "{name}: {again} vs {value}");
    }
}

#[test]
fn maximizers_reproduce_reported_values() {
    let g = torus(2, 16);
    let ladder = TimeLadder::new(2.0, 16).unwrap();
    let f0 = &bmo_corpus(&g, 3, 4).unwrap()[1];
    let b = bmo_seminorm(f0, PI / 2.0).unwrap();
    let Some(Maximizer::Ball { site, radius, .. }) = b.maximizer("radius_normalized") else {
        panic!("missing ball maximizer");
    };
    let again = ball_oscillation(f0, *site, &ball_stencil(&g, *radius)) / radius.powi(2);
    assert_eq!(again, b.value);

    let u = caloric_extension(f0, &ladder);
    assert_maximizers_reproduce(&x_norm(&u), &u);
    assert_maximizers_reproduce(&y_norm(&u), &u);
    assert_maximizers_reproduce(&z_norm(&u), &u);
}

#[test]
fn report_json_has_flat_shape() {
    let g = torus(1, 16);
    let ladder = TimeLadder::new(1.0, 8).unwrap();
    let f = Field::from_fn(g, 1, |x, o| o[0] = x[0].cos()).unwrap();
    let j = x_norm(&caloric_extension(&f, &ladder)).to_json();
    let obj = j.as_object().unwrap();
    assert_eq!(obj.keys().collect::<Vec<_>>(), ["maximizer", "terms", "value"]);
    let terms = obj["terms"].as_object().unwrap();
    assert_eq!(terms.len(), 3);
    let sum: f64 = terms.values().map(|v| v.as_f64().unwrap()).sum();
    assert!(rel(obj["value"].as_f64().unwrap(), sum) < 1e-15);
    assert_eq!(obj["maximizer"]["carleson_grad"]["kind"], "cylinder");
}
