use geoflow::grid::{
    grad_outer, read_snapshot, spectral_divergence, spectral_gradient, spectral_laplacian, tensor_product,
    transport, write_snapshot,
};
use geoflow::{Field, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn smooth_random(grid: GridSpec, l: usize, seed: u64) -> Field {
    // a few random low modes; resolved on every grid used below
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(usize, [f64; 3], f64, f64)> = (0..6 * l)
        .map(|i| {
            let k = [
                rng.gen_range(-2..=2) as f64,
                rng.gen_range(-2..=2) as f64,
                rng.gen_range(-2..=2) as f64,
            ];
            (i % l, k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let kappa = 2.0 * PI / grid.period;
    Field::from_fn(grid, l, |x, o| {
        o.iter_mut().for_each(|v| *v = 0.0);
        for (a, k, c, phi) in &terms {
            let arg: f64 = (0..grid.dim).map(|i| k[i] * x[i]).sum::<f64>() * kappa;
            o[*a] += c * (arg + phi).cos();
        }
    })
    .unwrap()
}

/// Second-order centered differences, independent of the spectral code.
fn fd_partial(f: &Field, comp: usize, axis: usize) -> Vec<f64> {
    let g = f.grid();
    let h = g.spacing();
    let mut d = [0i64; 3];
    d[axis] = 1;
    let mut m = [0i64; 3];
    m[axis] = -1;
    (0..g.sites())
        .map(|s| (f.at(g.offset_site(s, &d))[comp] - f.at(g.offset_site(s, &m))[comp]) / (2.0 * h))
        .collect()
}

fn fd_laplacian(f: &Field, comp: usize) -> Vec<f64> {
    let g = f.grid();
    let h = g.spacing();
    (0..g.sites())
        .map(|s| {
            let mut acc = -2.0 * g.dim as f64 * f.at(s)[comp];
            for axis in 0..g.dim {
                let mut d = [0i64; 3];
                d[axis] = 1;
                acc += f.at(g.offset_site(s, &d))[comp];
                d[axis] = -1;
                acc += f.at(g.offset_site(s, &d))[comp];
            }
            acc / (h * h)
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn grid_spec_validation() {
    assert!(GridSpec::new(0, 16, 1.0).is_err());
    assert!(GridSpec::new(4, 16, 1.0).is_err());
    assert!(GridSpec::new(2, 4, 1.0).is_err());
    assert!(GridSpec::new(2, 24, 1.0).is_err());
    assert!(GridSpec::new(2, 16, 0.0).is_err());
    let g = GridSpec::new(3, 8, 2.0).unwrap();
    assert_eq!(g.sites(), 512);
    assert_eq!(g.spacing(), 0.25);
}

#[test]
fn field_rejects_non_finite_values() {
    let g = GridSpec::new(1, 8, 1.0).unwrap();
    let mut v = vec![0.0; 8];
    v[3] = f64::NAN;
    assert!(Field::new(g, 1, v).is_err());
    assert!(Field::new(g, 1, vec![0.0; 7]).is_err());
}

#[test]
fn laplacian_of_constant_vanishes() {
    let g = GridSpec::new(2, 16, 3.0).unwrap();
    let f = Field::constant(g, &[2.5, -1.0]);
    assert!(spectral_laplacian(&f).max_abs() < 1e-12);
    assert!(spectral_gradient(&f).max_abs() < 1e-12);
}

#[test]
fn laplacian_eigenfunction() {
    let g = GridSpec::new(1, 32, 2.0 * PI).unwrap();
    let f = Field::from_fn(g, 1, |x, o| o[0] = x[0].sin()).unwrap();
    let lap = spectral_laplacian(&f);
    assert!(lap.add(&f).unwrap().max_abs() < 1e-13);
    let grad = spectral_gradient(&f);
    let cos = Field::from_fn(g, 1, |x, o| o[0] = x[0].cos()).unwrap();
    assert!(grad.sub(&cos).unwrap().max_abs() < 1e-13);
}

#[test]
fn gradient_in_two_dimensions_has_zero_transverse_part() {
    let g = GridSpec::new(2, 16, 2.0 * PI).unwrap();
    let f = Field::from_fn(g, 1, |x, o| o[0] = x[0].sin()).unwrap();
    let grad = spectral_gradient(&f);
    for s in 0..g.sites() {
        let x = g.coords(s);
        assert!((grad.at(s)[0] - x[0].cos()).abs() < 1e-13);
        assert!(grad.at(s)[1].abs() < 1e-13);
    }
}

#[test]
fn laplacian_matches_finite_differences_at_second_order() {
    let mut errs = Vec::new();
    for m in [32, 64, 128] {
        let g = GridSpec::new(2, m, 2.0 * PI).unwrap();
        let f = smooth_random(g, 1, 7);
        errs.push(max_abs_diff(&spectral_laplacian(&f).component(0), &fd_laplacian(&f, 0)));
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.15, "order {order} from {errs:?}");
    }
}

#[test]
fn divergence_matches_finite_differences_at_second_order() {
    let mut errs = Vec::new();
    for m in [32, 64, 128] {
        let g = GridSpec::new(2, m, 2.0 * PI).unwrap();
        let f = smooth_random(g, 2, 8);
        let fd: Vec<f64> = fd_partial(&f, 0, 0)
            .iter()
            .zip(fd_partial(&f, 1, 1))
            .map(|(a, b)| a + b)
            .collect();
        errs.push(max_abs_diff(&spectral_divergence(&f).unwrap().component(0), &fd));
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.15, "order {order} from {errs:?}");
    }
}

#[test]
fn div_grad_is_laplacian() {
    for n in 1..=3 {
        let g = GridSpec::new(n, 16, 5.0).unwrap();
        let f = smooth_random(g, 1, 3);
        let dg = spectral_divergence(&spectral_gradient(&f)).unwrap();
        let lap = spectral_laplacian(&f);
        assert!(dg.sub(&lap).unwrap().max_abs() < 1e-12 * lap.max_abs().max(1.0));
    }
}

#[test]
fn divergence_of_curl_field_vanishes() {
    let g = GridSpec::new(2, 32, 2.0 * PI).unwrap();
    let psi = smooth_random(g, 1, 9);
    let gp = spectral_gradient(&psi);
    let u = Field::new(g, 2, (0..g.sites()).flat_map(|s| [-gp.at(s)[1], gp.at(s)[0]]).collect()).unwrap();
    assert!(spectral_divergence(&u).unwrap().max_abs() < 1e-12);
}

#[test]
fn tensor_divergence_contracts_trailing_index() {
    // F = e_1 ⊗ (sin x_2, 0): row 0 has divergence ∂_1 sin x_2 = 0, so pick
    // F_01 = sin x_2, giving (div F)_0 = cos x_2
    let g = GridSpec::new(2, 16, 2.0 * PI).unwrap();
    let f = Field::from_fn(g, 4, |x, o| {
        o.iter_mut().for_each(|v| *v = 0.0);
        o[1] = x[1].sin();
    })
    .unwrap();
    let d = spectral_divergence(&f).unwrap();
    for s in 0..g.sites() {
        assert!((d.at(s)[0] - g.coords(s)[1].cos()).abs() < 1e-13);
        assert!(d.at(s)[1].abs() < 1e-13);
    }
}

#[test]
fn grad_outer_of_constant_is_zero_and_symmetric_in_general() {
    let g = GridSpec::new(2, 16, 2.0 * PI).unwrap();
    let d = Field::constant(g, &[0.0, 0.6, 0.8]);
    assert!(grad_outer(&spectral_gradient(&d)).unwrap().max_abs() < 1e-12);
    let d = smooth_random(g, 3, 11);
    let t = grad_outer(&spectral_gradient(&d)).unwrap();
    for s in 0..g.sites() {
        assert_eq!(t.at(s)[1], t.at(s)[2]);
    }
}

#[test]
fn transport_along_first_axis_is_partial_derivative() {
    let g = GridSpec::new(2, 16, 2.0 * PI).unwrap();
    let d = smooth_random(g, 3, 12);
    let grad = spectral_gradient(&d);
    let e1 = Field::constant(g, &[1.0, 0.0]);
    let t = transport(&e1, &grad).unwrap();
    for s in 0..g.sites() {
        for a in 0..3 {
            assert_eq!(t.at(s)[a], grad.at(s)[a * 2]);
        }
    }
}

#[test]
fn tensor_product_layout() {
    let g = GridSpec::new(1, 8, 1.0).unwrap();
    let a = Field::constant(g, &[1.0, 2.0]);
    let b = Field::constant(g, &[3.0, 5.0, 7.0]);
    let t = tensor_product(&a, &b).unwrap();
    assert_eq!(t.at(0), &[3.0, 5.0, 7.0, 6.0, 10.0, 14.0]);
}

#[test]
fn spectral_operators_commute_with_shifts() {
    let g = GridSpec::new(2, 16, 3.0).unwrap();
    let f = smooth_random(g, 2, 13);
    let shift = [3, -5];
    let a = spectral_laplacian(&f.shift(&shift));
    let b = spectral_laplacian(&f).shift(&shift);
    assert!(a.sub(&b).unwrap().max_abs() < 1e-12 * b.max_abs());
    let a = spectral_gradient(&f.shift(&shift));
    let b = spectral_gradient(&f).shift(&shift);
    assert!(a.sub(&b).unwrap().max_abs() < 1e-12 * b.max_abs());
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let g = GridSpec::new(2, 16, 0.1 * 3.0).unwrap();
    let f = smooth_random(g, 3, 14).map(|v| v * 1e-7 + 1.0 / 3.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.gfs");
    write_snapshot(std::fs::File::create(&path).unwrap(), &f).unwrap();
    let back = read_snapshot(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.grid(), f.grid());
    assert_eq!(back.components(), 3);
    for (a, b) in f.values().iter().zip(back.values()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    let bytes = std::fs::read(&path).unwrap();
    let header_end = bytes.iter().position(|&b| b == b'\n').unwrap();
    assert_eq!(&bytes[..header_end], format!("GEOFLOW1 2 16 {} 3", 0.1 * 3.0).as_bytes());
    assert_eq!(bytes.len() - header_end - 1, g.sites() * 3 * 8);
}

#[test]
fn snapshot_rejects_bad_header() {
    assert!(read_snapshot(&b"GEOFLOW2 1 8 1 1\n"[..]).is_err());
    assert!(read_snapshot(&b"GEOFLOW1 1 8 1\n"[..]).is_err());
}
