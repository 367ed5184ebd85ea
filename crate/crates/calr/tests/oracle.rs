//! Per-mode solver against an independent dense elimination.

mod common;

use common::{dense_oracle, full_pivot_solve, oracle_sweep};
use calr::cloak::build_cloak;
use calr::medium::RadialProfile;
use calr::spectral::{solve_field, Mode, ModeSpectrum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn full_pivot_solves_a_permuted_system() {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let a = vec![
        vec![c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0)],
        vec![c(1e-14, 0.0), c(1.0, 0.0), c(0.0, 3.0)],
        vec![c(4.0, 0.0), c(0.0, 0.0), c(1.0, -1.0)],
    ];
    let x = [c(1.0, 2.0), c(-0.5, 0.0), c(0.25, 1.0)];
    let b: Vec<Complex64> = a.iter().map(|r| r.iter().zip(&x).map(|(p, q)| p * q).sum()).collect();
    let y = full_pivot_solve(a, b).unwrap();
    for (p, q) in x.iter().zip(&y) {
        assert!((p - q).norm() < 1e-14);
    }
}

#[test]
fn milton_nicorovici_mode_five_matches_oracle() {
    let m = build_cloak(&RadialProfile::constant(1.0), 1.0, 4.0, 8.0, 2).unwrap();
    let g = Complex64::new(1.0, 0.0);
    let src = ModeSpectrum::single(1.5, 2, Mode::planar(5), g).unwrap();
    for delta in [1e-1, 1e-4, 1e-8] {
        let u = solve_field(&m, &src, delta, 16).unwrap();
        let mf = u.mode(Mode::planar(5)).unwrap();
        let oracle = dense_oracle(mf.layout(), &m, 1.5, delta, g);
        let err = common::relative_difference(mf.all_coefficients(), &oracle);
        assert!(err < 1e-12, "delta={delta:e}: {err:e}");
    }
}

#[test]
fn random_configurations_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (desc, err) in oracle_sweep(&mut rng, 50) {
        assert!(err < 1e-12, "{desc}: relative difference {err:e}");
    }
}
