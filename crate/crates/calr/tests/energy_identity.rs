//! Green's identity for each solved mode.
//!
//! Testing the mode equation against `ū` gives
//! `Σ_j s_j ∫_{layer j} a|∇u|² = −g ū(r₀) r₀^{d−1} |S|` with `|S|` the
//! angular weight. Its imaginary part is the dissipated power when the shell
//! coefficient is 1.

use calr::cloak::build_cloak;
use calr::medium::RadialProfile;
use calr::quadrature::composite;
use calr::resonance::power;
use calr::spectral::{angular_weight, separation_constant, solve_field, Mode, ModeSpectrum, Side};
use num_complex::Complex64;

fn check(d: usize, profile: &str, mode: Mode, delta: f64) {
    let a = RadialProfile::expression(profile).unwrap();
    let m = build_cloak(&a, 1.0, 4.0, 8.0, d).unwrap();
    let g = Complex64::new(0.7, -0.4);
    let r0 = 1.5;
    let src = ModeSpectrum::single(r0, d, mode, g).unwrap();
    let u = solve_field(&m, &src, delta, 64).unwrap();
    let mf = u.mode(mode).unwrap();
    let lambda = separation_constant(mode.degree, d);

    // ∫ s a (|u'|² + λ|u|²/r²) r^{d−1} dr, by quadrature from point values
    let mut balance = Complex64::new(0.0, 0.0);
    // layer terms cancel near resonance, so errors scale with their total size
    let mut magnitude = 0.0;
    for layer in m.layers() {
        let s = if layer.plasmonic { Complex64::new(-1.0, delta) } else { Complex64::new(1.0, 0.0) };
        let lo = layer.inner.max(1e-9);
        let mut pieces = vec![(lo, layer.outer)];
        if r0 > lo && r0 < layer.outer {
            pieces = vec![(lo, r0), (r0, layer.outer)];
        }
        for (x0, x1) in pieces {
            let e = composite(x0, x1, 400, |r| {
                let side = if r <= r0 { Side::Inner } else { Side::Outer };
                let (v, flux) = mf.radial(r, side);
                let (a, w) = (layer.profile.evaluate(r), r.powi(d as i32 - 1));
                flux.norm_sqr() / (a * w) + a * lambda * v.norm_sqr() / (r * r) * w
            });
            balance += s * e;
            magnitude += s.norm() * e;
        }
    }
    balance *= angular_weight(d);
    let (u0, _) = mf.radial(r0, Side::Inner);
    let pairing = -g * u0.conj() * r0.powi(d as i32 - 1) * angular_weight(d);
    let scale = magnitude * angular_weight(d);
    assert!((balance - pairing).norm() <= 1e-10 * scale, "{profile} d={d} {mode:?}: {balance} vs {pairing}");

    if d == 3 || profile != "1" {
        return;
    }
    // the shell coefficient is 1 here, so E_δ is the imaginary part
    let p = power(&u, &m, delta);
    assert!((p - pairing.im).abs() <= 1e-8 * p.abs().max(1e-300), "power {p} vs {}", pairing.im);
}

#[test]
fn green_identity_holds_mode_by_mode() {
    for d in [2, 3] {
        for profile in ["1", "2 + sin(r)"] {
            for (l, delta) in [(0, 1e-2), (1, 1e-3), (5, 1e-5), (12, 1e-7)] {
                let mode = if d == 2 { Mode::planar(l) } else { Mode::new(l as usize, 0) };
                check(d, profile, mode, delta);
            }
        }
    }
}
