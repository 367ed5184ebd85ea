//! Point evaluation against stored coefficients via an angular FFT.

use calr::cloak::build_cloak;
use calr::medium::RadialProfile;
use calr::spectral::{solve_field, Mode, ModeSpectrum, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

#[test]
fn ring_samples_reproduce_mode_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = build_cloak(&RadialProfile::expression("2 + sin(r)").unwrap(), 1.0, 4.0, 8.0, 2).unwrap();
    let mut src = ModeSpectrum::new(1.5, 2).unwrap();
    for k in -20i64..=20 {
        src.set(Mode::planar(k), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
    }
    let u = solve_field(&m, &src, 1e-3, 64).unwrap();
    let n = 64;
    for radius in [0.1, 0.6, 2.5, 6.0] {
        let mut samples: Vec<Complex64> = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                u.evaluate(&[radius * th.cos(), radius * th.sin()]).unwrap()
            })
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut samples);
        let stored = u.trace_coefficients(radius, Side::Outer);
        let scale = stored.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        for (mode, c) in stored {
            let bin = mode.order.rem_euclid(n as i64) as usize;
            let got = samples[bin] / n as f64;
            assert!((got - c).norm() <= 1e-12 * scale, "r={radius} {mode:?}: {got} vs {c}");
        }
        // bins no mode maps to carry nothing
        for k in 21..n - 20 {
            assert!(samples[k].norm() / (n as f64) <= 1e-12 * scale);
        }
    }
}
