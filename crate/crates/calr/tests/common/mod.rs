//! Shared test oracles and generators.

#![allow(dead_code)]

use calr::cloak::build_cloak;
use calr::medium::{LayeredMedium, RadialProfile};
use calr::spectral::{DegreeLayout, Mode, ModeSpectrum};
use num_complex::Complex64;
use rand::Rng;

type C = Complex64;

/// Gaussian elimination with full pivoting on a dense complex system.
pub fn full_pivot_solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Option<Vec<C>> {
    let n = b.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pr, mut pc, mut best) = (k, k, 0.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if v.norm() > best {
                    (pr, pc, best) = (i, j, v.norm());
                }
            }
        }
        if best == 0.0 {
            return None;
        }
        a.swap(k, pr);
        b.swap(k, pr);
        for row in a.iter_mut() {
            row.swap(k, pc);
        }
        perm.swap(k, pc);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == C::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
            let t = b[k];
            b[i] -= f * t;
        }
    }
    let mut y = vec![C::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let s: C = (k + 1..n).map(|j| a[k][j] * y[j]).sum();
        y[k] = (b[k] - s) / a[k][k];
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for (k, &p) in perm.iter().enumerate() {
        x[p] = y[k];
    }
    Some(x)
}

/// Exact product `a b = p + e` (Dekker/FMA) and exact sum `a + b = s + e` (Knuth).
fn exact_mul(a: f64, b: f64) -> [f64; 2] {
    let p = a * b;
    [p, a.mul_add(b, -p)]
}

/// Sum of `terms` with every rounding error carried along (cascaded summation).
fn cascaded_sum(terms: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut err = 0.0;
    for &t in terms {
        let n = s + t;
        let bb = n - s;
        err += (s - (n - bb)) + (t - bb);
        s = n;
    }
    s + err
}

/// `b − A x` accumulated in twice the working precision.
pub fn residual_extended(a: &[Vec<C>], x: &[C], b: &[C]) -> Vec<C> {
    a.iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut re = vec![bi.re];
            let mut im = vec![bi.im];
            for (m, v) in row.iter().zip(x) {
                re.extend(exact_mul(-m.re, v.re));
                re.extend(exact_mul(m.im, v.im));
                im.extend(exact_mul(-m.re, v.im));
                im.extend(exact_mul(-m.im, v.re));
            }
            C::new(cascaded_sum(&re), cascaded_sum(&im))
        })
        .collect()
}

/// Full-pivot solve followed by refinement against the extended residual.
pub fn refined_solve(a: &[Vec<C>], b: &[C]) -> Vec<C> {
    let mut x = full_pivot_solve(a.to_vec(), b.to_vec()).expect("oracle system is singular");
    for _ in 0..6 {
        let r = residual_extended(a, &x, b);
        let dx = full_pivot_solve(a.to_vec(), r).unwrap();
        let (nd, nx) = (dx.iter().map(|z| z.norm()).fold(0.0, f64::max), x.iter().map(|z| z.norm()).fold(0.0, f64::max));
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        if nd <= 1e-17 * nx {
            break;
        }
    }
    x
}

/// Layer coefficients of the degree-`layout.degree` solution with source
/// amplitude `g` on `r0`, from the layout's fundamental pairs only.
///
/// Unknowns are `(c_j, d_j)` per layer. Equations: the innermost solution is
/// the member regular at the origin, `u` and `s a r^{d-1} u'` are continuous
/// except across `r0` where the latter jumps by `g r0^{d-1}`, and `u(R_Ω) = 0`.
pub fn dense_oracle(layout: &DegreeLayout, medium: &LayeredMedium, r0: f64, delta: f64, g: C) -> Vec<[C; 2]> {
    let layers = &layout.layers;
    let n = 2 * layers.len();
    let d = layout.dimension as i32;
    let mut a = vec![vec![C::new(0.0, 0.0); n]; n];
    let mut b = vec![C::new(0.0, 0.0); n];
    let sign = |j: usize| {
        if medium.layers()[layers[j].medium_layer].plasmonic {
            C::new(-1.0, delta)
        } else {
            C::new(1.0, 0.0)
        }
    };

    // regularity: the second member grows toward the origin, the first does not
    let (near, nearer) = (layers[0].basis.values(1e-6 * layers[0].outer), layers[0].basis.values(1e-12 * layers[0].outer));
    assert!(nearer[1].abs() > 1.5 * near[1].abs(), "second member is not singular at 0");
    assert!(nearer[0].abs() <= near[0].abs() * (1.0 + 1e-9), "first member is not regular at 0");
    a[0][1] = C::new(1.0, 0.0);

    let mut row = 1;
    for i in 0..layers.len() - 1 {
        let rho = layers[i].outer;
        assert_eq!(rho, layers[i + 1].inner);
        let (vl, vr) = (layers[i].basis.values(rho), layers[i + 1].basis.values(rho));
        let (fl, fr) = (layers[i].basis.fluxes(rho), layers[i + 1].basis.fluxes(rho));
        for k in 0..2 {
            a[row][2 * i + k] = C::new(vl[k], 0.0);
            a[row][2 * i + 2 + k] = C::new(-vr[k], 0.0);
            a[row + 1][2 * i + 2 + k] = sign(i + 1) * fr[k];
            a[row + 1][2 * i + k] = -sign(i) * fl[k];
        }
        if (rho - r0).abs() < 1e-14 * r0 {
            b[row + 1] = g * r0.powi(d - 1);
        }
        row += 2;
    }
    let last = layers.len() - 1;
    let v = layers[last].basis.values(layout.omega_radius);
    a[row][2 * last] = C::new(v[0], 0.0);
    a[row][2 * last + 1] = C::new(v[1], 0.0);

    let x = refined_solve(&a, &b);
    x.chunks(2).map(|p| [p[0], p[1]]).collect()
}

/// A random cloak configuration with a single-mode source.
#[derive(Clone, Debug)]
pub struct RandomCase {
    pub medium: LayeredMedium,
    pub source: ModeSpectrum,
    pub mode: Mode,
    pub g: C,
    pub delta: f64,
    pub description: String,
}

pub fn random_case<R: Rng>(rng: &mut R) -> RandomCase {
    let d = if rng.gen_bool(0.5) { 2 } else { 3 };
    let r2 = rng.gen_range(0.5..2.0);
    let r3 = r2 * rng.gen_range(1.5..5.0);
    let omega = r3 * rng.gen_range(1.2..3.0);
    let c = rng.gen_range(0.5..3.0);
    let (profile, label) = match rng.gen_range(0..3) {
        0 => (RadialProfile::constant(c), format!("{c}")),
        1 => {
            let e = format!("{c} + {} * sin({} * r)", rng.gen_range(0.0..0.4) * c, rng.gen_range(0.5..2.0));
            (RadialProfile::expression(&e).unwrap(), e)
        }
        _ => {
            let e = format!("{c} + {} * r", rng.gen_range(0.0..0.5));
            (RadialProfile::expression(&e).unwrap(), e)
        }
    };
    let medium = build_cloak(&profile, r2, r3, omega, d).unwrap();
    let r0 = r2 + (r3 - r2) * rng.gen_range(0.1..0.9);
    let degree = rng.gen_range(0..=24usize);
    let order = if d == 2 {
        if degree == 0 || rng.gen_bool(0.5) { degree as i64 } else { -(degree as i64) }
    } else {
        rng.gen_range(-(degree as i64)..=degree as i64)
    };
    let mode = Mode::new(degree, order);
    let g = C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let delta = 10f64.powf(rng.gen_range(-6.0..-1.0));
    let source = ModeSpectrum::single(r0, d, mode, g).unwrap();
    let description = format!("d={d} r2={r2:.3} r3={r3:.3} R={omega:.3} a={label} r0={r0:.3} l={degree} delta={delta:.2e}");
    RandomCase { medium, source, mode, g, delta, description }
}

/// `max_j |x_j − y_j| / max_j |y_j|` over layer coefficients.
pub fn relative_difference(x: &[[C; 2]], y: &[[C; 2]]) -> f64 {
    let scale = y.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = x.iter().flatten().zip(y.iter().flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    diff / scale
}

/// Worst oracle mismatch over `n` random cases.
pub fn oracle_sweep<R: Rng>(rng: &mut R, n: usize) -> Vec<(String, f64)> {
    (0..n)
        .map(|_| {
            let case = random_case(rng);
            let u = calr::spectral::solve_field(&case.medium, &case.source, case.delta, 64).unwrap();
            let mf = u.mode(case.mode).unwrap();
            let oracle = dense_oracle(mf.layout(), &case.medium, case.source.radius(), case.delta, case.g);
            (case.description, relative_difference(mf.all_coefficients(), &oracle))
        })
        .collect()
}
