use geoflow::data::{bmo_corpus, forcing_corpus, generate_data, DataFamily};
use geoflow::grid::spectral_divergence;
use geoflow::norms::bmo_seminorm;
use geoflow::{Field, GridSpec, TimeLadder};
use std::f64::consts::PI;

fn torus(n: usize, m: usize) -> GridSpec {
    GridSpec::new(n, m, 2.0 * PI).unwrap()
}

#[test]
fn zero_amplitude_angle_modes_are_constant() {
    let g = torus(2, 16);
    let f = generate_data(&DataFamily::AngleModes { alpha: 0.0, modes: 2, components: 3 }, &g, 9).unwrap();
    assert_eq!(f.sub(&Field::constant(g, &[1.0, 0.0, 0.0])).unwrap().max_abs(), 0.0);
}

#[test]
fn sphere_families_are_unit_and_velocities_divergence_free() {
    for n in [2, 3] {
        let g = torus(n, 16);
        for fam in [
            DataFamily::AngleModes { alpha: 1.3, modes: 3, components: 3 },
            DataFamily::Oscillatory { alpha: 0.7, wavenumber: 3, components: 3 },
            DataFamily::Hedgehog { alpha: 2.0 },
        ] {
            let f = generate_data(&fam, &g, 1).unwrap();
            let defect = f.pointwise_norm().iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
            assert!(defect <= 1e-12, "{}: {defect}", fam.name());
        }
        for fam in [DataFamily::StreamFunction { alpha: 0.9, modes: 3 }, DataFamily::TaylorGreen { alpha: 1.0 }] {
            let u = generate_data(&fam, &g, 2).unwrap();
            assert_eq!(u.components(), n);
            assert!(spectral_divergence(&u).unwrap().max_abs() <= 1e-12, "{}", fam.name());
        }
    }
    let s = generate_data(&DataFamily::StreamFunction { alpha: 0.9, modes: 3 }, &torus(2, 32), 2).unwrap();
    assert!((s.sup_norm() - 0.9).abs() < 1e-12);
}

#[test]
fn seed_determines_the_data() {
    let g = torus(2, 16);
    let fam = DataFamily::AngleModes { alpha: 0.5, modes: 2, components: 3 };
    let a = generate_data(&fam, &g, 42).unwrap();
    let b = generate_data(&fam, &g, 42).unwrap();
    let c = generate_data(&fam, &g, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn oscillatory_bmo_does_not_decay_with_wavenumber() {
    // BMO is invariant under dilation, so raising K at fixed α leaves the
    // oscillation at the largest radius in place
    let g = torus(1, 256);
    let values: Vec<f64> = [1, 4, 16]
        .iter()
        .map(|&k| {
            let fam = DataFamily::Oscillatory { alpha: 0.5, wavenumber: k, components: 2 };
            bmo_seminorm(&generate_data(&fam, &g, 0).unwrap(), PI / 2.0).unwrap().value
        })
        .collect();
    println!("[u]_BMO for K = 1, 4, 16: {values:?}");
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn corpora_have_the_advertised_shape() {
    let g = torus(2, 16);
    let ladder = TimeLadder::new(0.5, 8).unwrap();
    let fs = forcing_corpus(&g, &ladder, 2, 20, 3).unwrap();
    assert_eq!(fs.len(), 20);
    assert!(fs.iter().all(|f| f.components() == 2 && f.sup_norm() > 0.0));
    let bs = bmo_corpus(&g, 24, 5).unwrap();
    let amps: Vec<f64> = bs.iter().map(Field::sup_norm).collect();
    let (lo, hi) = amps.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo >= 100.0, "amplitude span {lo}..{hi}");
    assert!(bs.iter().all(|f| f.mean()[0].abs() < 1e-12 * f.sup_norm().max(1e-300)));
}

#[test]
fn family_json_rejects_unknown_keys() {
    let ok: DataFamily = serde_json::from_str(r#"{"family": "oscillatory", "alpha": 0.1, "wavenumber": 8}"#).unwrap();
    assert_eq!(ok.name(), "oscillatory");
    assert_eq!(ok.with_alpha(0.4).alpha(), Some(0.4));
    assert!(serde_json::from_str::<DataFamily>(r#"{"family": "oscillatory", "alpha": 0.1, "k": 8}"#).is_err());
    assert!(serde_json::from_str::<DataFamily>(r#"{"family": "spiral", "alpha": 0.1}"#).is_err());
}
