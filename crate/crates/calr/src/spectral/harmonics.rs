//! Angular harmonics and mode indexing.
//!
//! In two dimensions a mode is `e^{i m θ}` with `degree = |m|`, `order = m`.
//! In three dimensions it is the orthonormal complex spherical harmonic
//! `Y_ℓ^k` (Condon–Shortley phase) with `degree = ℓ`, `order = k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Angular mode index, ordered by degree then order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub degree: usize,
    pub order: i64,
}

impl Mode {
    pub fn new(degree: usize, order: i64) -> Self {
        Mode { degree, order }
    }

    /// The two-dimensional mode `e^{i m θ}`.
    pub fn planar(m: i64) -> Self {
        Mode { degree: m.unsigned_abs() as usize, order: m }
    }

    pub fn is_valid(&self, d: usize) -> bool {
        let l = self.degree as i64;
        match d {
            2 => self.order == l || self.order == -l,
            3 => self.order.abs() <= l,
            _ => false,
        }
    }
}

/// `∫_{S^{d-1}} |harmonic|²`: `2π` for `e^{imθ}`, `1` for orthonormal `Y_ℓ^k`.
pub fn angular_weight(d: usize) -> f64 {
    if d == 2 {
        2.0 * PI
    } else {
        1.0
    }
}

/// Separation constant `ℓ(ℓ + d − 2)`.
pub fn separation_constant(degree: usize, d: usize) -> f64 {
    let l = degree as f64;
    l * (l + d as f64 - 2.0)
}

/// All modes of a given degree, ascending order.
pub fn modes_of_degree(degree: usize, d: usize) -> Vec<Mode> {
    let l = degree as i64;
    if d == 2 {
        if degree == 0 {
            vec![Mode::new(0, 0)]
        } else {
            vec![Mode::new(degree, -l), Mode::new(degree, l)]
        }
    } else {
        (-l..=l).map(|k| Mode::new(degree, k)).collect()
    }
}

/// Surface measure of the sphere of radius `r` divided by the angular weight
/// convention: `2πr` in 2D, `r²` in 3D.
pub fn trace_measure(r: f64, d: usize) -> f64 {
    if d == 2 {
        2.0 * PI * r
    } else {
        r * r
    }
}

/// Orthonormal associated Legendre function `P̄_ℓ^m(x)` for `m ≥ 0`, such that
/// `Y_ℓ^m = P̄_ℓ^m(cos θ) e^{imφ}`.
pub fn normalized_legendre(l: usize, m: usize, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=m {
        let fi = i as f64;
        pmm *= -((2.0 * fi + 1.0) / (2.0 * fi)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mf = m as f64;
    let mut pm2 = pmm;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let p = a * (x * pm1 - b * pm2);
        pm2 = pm1;
        pm1 = p;
    }
    pm1
}

/// Complex orthonormal spherical harmonic `Y_ℓ^k(θ, φ)`, θ polar, φ azimuthal.
pub fn spherical_harmonic(l: usize, k: i64, theta: f64, phi: f64) -> Complex64 {
    let m = k.unsigned_abs() as usize;
    let p = normalized_legendre(l, m, theta.cos());
    let y = Complex64::from_polar(p, m as f64 * phi);
    if k >= 0 {
        y
    } else if m % 2 == 0 {
        y.conj()
    } else {
        -y.conj()
    }
}

/// Angular harmonic of `mode` in the direction of the (non-zero) point `x`.
pub fn harmonic_at(mode: Mode, d: usize, x: &[f64]) -> Complex64 {
    if d == 2 {
        let theta = x[1].atan2(x[0]);
        Complex64::from_polar(1.0, mode.order as f64 * theta)
    } else {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let theta = if r > 0.0 { (x[2] / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
        let phi = x[1].atan2(x[0]);
        spherical_harmonic(mode.degree, mode.order, theta, phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite;

    #[test]
    fn low_order_closed_forms() {
        let (th, ph) = (0.7f64, 1.3f64);
        let y00 = spherical_harmonic(0, 0, th, ph);
        assert!((y00.re - 0.5 / PI.sqrt()).abs() < 1e-15);
        let y10 = spherical_harmonic(1, 0, th, ph);
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * th.cos()).abs() < 1e-15);
        let y11 = spherical_harmonic(1, 1, th, ph);
        let want = -(3.0 / (8.0 * PI)).sqrt() * th.sin() * Complex64::from_polar(1.0, ph);
        assert!((y11 - want).norm() < 1e-15);
        let y1m1 = spherical_harmonic(1, -1, th, ph);
        assert!((y1m1 + want.conj()).norm() < 1e-15 || (y1m1 - (-want).conj()).norm() < 1e-15);
    }

    #[test]
    fn orthonormality_on_the_sphere() {
        let pairs = [((3, 1), (3, 1)), ((3, 1), (4, 1)), ((5, -2), (5, -2)), ((2, 0), (2, 2))];
        for ((l1, k1), (l2, k2)) in pairs {
            let re = composite(0.0, PI, 24, |th| {
                composite(0.0, 2.0 * PI, 12, |ph| {
                    (spherical_harmonic(l1, k1, th, ph) * spherical_harmonic(l2, k2, th, ph).conj()).re
                }) * th.sin()
            });
            let want = if (l1, k1) == (l2, k2) { 1.0 } else { 0.0 };
            assert!((re - want).abs() < 1e-12, "({l1},{k1}) vs ({l2},{k2}): {re}");
        }
    }

    #[test]
    fn mode_tables() {
        assert_eq!(modes_of_degree(0, 2).len(), 1);
        assert_eq!(modes_of_degree(3, 2).len(), 2);
        assert_eq!(modes_of_degree(3, 3).len(), 7);
        assert!(Mode::planar(-4).is_valid(2));
        assert!(!Mode::new(2, 1).is_valid(2));
        assert_eq!(separation_constant(3, 2), 9.0);
        assert_eq!(separation_constant(3, 3), 12.0);
    }
}
