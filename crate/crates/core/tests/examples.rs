//! Runs every example at reduced size.
#![allow(dead_code)]

mod brownian_paths {
    include!("../examples/brownian_paths.rs");
}
mod fbm_generator {
    include!("../examples/fbm_generator.rs");
}
mod barrier_rotation {
    include!("../examples/barrier_rotation.rs");
}
mod first_passage_exact {
    include!("../examples/first_passage_exact.rs");
}
mod lil_discriminant {
    include!("../examples/lil_discriminant.rs");
}
mod conditional_tau {
    include!("../examples/conditional_tau.rs");
}
mod gasket_entropy {
    include!("../examples/gasket_entropy.rs");
}
mod tip_exponent {
    include!("../examples/tip_exponent.rs");
}
mod curve_hitting {
    include!("../examples/curve_hitting.rs");
}
mod run_config {
    include!("../examples/run_config.rs");
}

#[test]
fn brownian_moments() {
    let m = brownian_paths::run_example(4000).unwrap();
    assert!((m.bm_var - 1.0).abs() < 0.1);
    assert!((m.bes3_second_moment - 3.0).abs() < 0.3);
    assert!((m.mixture_mean - m.mixture_mean_exact).abs() < 0.1);
}

#[test]
fn fbm_covariances() {
    for c in fbm_generator::run_example(4000).unwrap() {
        assert!((c.circulant - c.exact).abs() < 0.05, "H {}", c.hurst);
        assert!((c.cholesky - c.exact).abs() < 0.05, "H {}", c.hurst);
    }
}

#[test]
fn rotation_detectors_agree() {
    for c in barrier_rotation::run_example(50).unwrap() {
        assert_eq!(c.index_mismatches, 0);
        assert!(c.max_relative_tau_error < 1e-12);
    }
}

#[test]
fn first_passage_ks() {
    assert!(first_passage_exact::run_example(20_000).unwrap() < 1.95 / (20_000f64).sqrt());
}

#[test]
fn lil_means_are_ordered() {
    for s in lil_discriminant::run_example(100).unwrap() {
        assert!(s.mixture_mean < s.bm_mean);
    }
}

#[test]
fn conditional_tau_profiles() {
    let (rough, flat) = conditional_tau::run_example(2000).unwrap();
    assert!(!rough.insufficient && !flat.insufficient);
}

#[test]
fn gasket_rows() {
    let rows = gasket_entropy::run_example(4, 20_000).unwrap();
    assert_eq!(rows[0].entropy, 1.0);
    assert!(rows.iter().all(|r| r.entropy <= f64::from(r.n)));
    assert!(rows[2].mc_total_variation.unwrap() < 0.05);
}

#[test]
fn tip_sweep() {
    let sweep = tip_exponent::run_example(1000, 256).unwrap();
    assert_eq!(sweep.estimates.len(), 3);
}

#[test]
fn curve_dimensions() {
    let dims = curve_hitting::run_example(4000).unwrap();
    assert!((dims[0].1.slope - 1.0).abs() < 0.05);
}

#[test]
fn config_run() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_config::run_example(dir.path()).unwrap();
    assert_eq!(report.exit_code(), 0);
    assert!(dir.path().join("scan.csv").is_file());
}
