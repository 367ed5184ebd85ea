//! Quadrature and closed-form integral helpers.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

const NODES_PER_PANEL: usize = 20;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(NODES_PER_PANEL).expect("non-zero")))
}

/// Composite Gauss–Legendre over `panels` equal panels of `[a, b]`.
pub fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let gl = rule();
    // Summed left to right so the result is reproducible.
    let mut total = 0.0;
    for k in 0..n {
        let lo = a + h * k as f64;
        let hi = if k + 1 == n { b } else { lo + h };
        total += gl.integrate(lo, hi, &mut f);
    }
    total
}

/// `∫_{x0}^{x1} x^k dx` for `0 ≤ x0 ≤ x1`, arranged to avoid overflow and cancellation.
pub fn power_integral(k: f64, x0: f64, x1: f64) -> f64 {
    if x1 <= x0 {
        return 0.0;
    }
    let s = k + 1.0;
    if s == 0.0 {
        return (x1 / x0).ln();
    }
    if s > 0.0 {
        if x0 == 0.0 {
            return x1.powf(s) / s;
        }
        x1.powf(s) * (-(s * (x0 / x1).ln()).exp_m1()) / s
    } else {
        x0.powf(s) * (-(s * (x1 / x0).ln()).exp_m1()) / (-s)
    }
}
