//! Desk-scale checks of the analytic lemmas: the three-spheres inequality,
//! plasmon mode pairs and their reflection identities, density of the pair
//! families on the inner sphere, and the rigidity lemmas.
//!
//! The plasmon medium is `a₁ = I` in `B_{R₁}`, `a` on `(R₁, R₂)` and `K_*a` on
//! `(R₂, R₃)` with `K` the Kelvin map at `R₂` and `R₃ = R₂²/R₁`. For a radial
//! `a` every object separates per degree, so all checks reduce to small
//! per-mode computations.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CalrError, Result};
use crate::medium::{pushforward_isotropic, RadialMap, RadialProfile};
use crate::spectral::harmonics::{angular_weight, harmonic_at, modes_of_degree, trace_measure};
use crate::spectral::{Mode, RadialBasis};

/// Threshold below which a rigidity determinant counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// three spheres

/// Result of the three-spheres comparison for one harmonic function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThreeSpheresReport {
    pub radii: [f64; 3],
    pub alpha: f64,
    /// `√R`-normalized circle norms at the three radii.
    pub norms: [f64; 3],
    /// `‖v‖_{R₂} / (‖v‖_{R₁}^α ‖v‖_{R₃}^{1−α})`.
    pub ratio: f64,
    pub passed: bool,
}

/// `α = ln(R₃/R₂)/ln(R₃/R₁)`.
pub fn three_spheres_alpha(r1: f64, r2: f64, r3: f64) -> f64 {
    (r3 / r2).ln() / (r3 / r1).ln()
}

/// `√R`-normalized `L²` norm of `Σ c_m r^ℓ Y_m` on `∂B_R`, by direct
/// evaluation on a grid that integrates the squared modulus exactly.
pub fn circle_norm(v: &[(Mode, Complex64)], radius: f64, d: usize) -> f64 {
    let lmax = v.iter().map(|(m, _)| m.degree).max().unwrap_or(0);
    let eval = |x: &[f64]| {
        v.iter()
            .map(|(m, c)| c * radius.powi(m.degree as i32) * harmonic_at(*m, d, x))
            .sum::<Complex64>()
    };
    let sum = if d == 2 {
        let n = 2 * lmax + 2;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        (0..n)
            .map(|k| {
                let th = k as f64 * h;
                eval(&[th.cos(), th.sin()]).norm_sqr()
            })
            .sum::<f64>()
            * h
    } else {
        use gauss_quad::GaussLegendre;
        let nt = lmax + 1;
        let np = 2 * lmax + 2;
        let gl = GaussLegendre::new(std::num::NonZeroUsize::new(nt.max(2)).expect("non-zero"));
        let h = 2.0 * std::f64::consts::PI / np as f64;
        gl.iter()
            .map(|&(x, w)| {
                let s = (1.0 - x * x).max(0.0).sqrt();
                (0..np)
                    .map(|k| {
                        let ph = k as f64 * h;
                        eval(&[s * ph.cos(), s * ph.sin(), x]).norm_sqr()
                    })
                    .sum::<f64>()
                    * h
                    * w
            })
            .sum::<f64>()
    };
    (sum / angular_weight(d)).sqrt()
}

/// Checks `‖v‖_{R₂} ≤ ‖v‖_{R₁}^α ‖v‖_{R₃}^{1−α}` with constant 1.
pub fn three_spheres_check(v: &[(Mode, Complex64)], radii: [f64; 3], d: usize) -> Result<ThreeSpheresReport> {
    let [r1, r2, r3] = radii;
    if !(0.0 < r1 && r1 < r2 && r2 < r3) {
        return Err(CalrError::Validation(format!("radii must increase, got {radii:?}")));
    }
    if let Some((m, _)) = v.iter().find(|(m, _)| !m.is_valid(d)) {
        return Err(CalrError::Validation(format!("invalid mode {m:?} for d={d}")));
    }
    let alpha = three_spheres_alpha(r1, r2, r3);
    let norms = radii.map(|r| circle_norm(v, r, d));
    let ratio = if norms[1] == 0.0 {
        1.0
    } else {
        (norms[1].ln() - alpha * norms[0].ln() - (1.0 - alpha) * norms[2].ln()).exp()
    };
    Ok(ThreeSpheresReport { radii, alpha, norms, ratio, passed: ratio <= 1.0 + 1e-10 })
}

// ---------------------------------------------------------------------------
// plasmon pairs

/// The medium `a₁` built from a shell profile on `(R₁, R₂)`.
#[derive(Clone, Debug)]
pub struct PlasmonMedium {
    pub dimension: usize,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub shell: RadialProfile,
    pub outer: RadialProfile,
}

impl PlasmonMedium {
    pub fn new(shell: RadialProfile, r1: f64, r2: f64, d: usize) -> Result<Self> {
        if !(0.0 < r1 && r1 < r2) {
            return Err(CalrError::Validation(format!("need 0 < R₁ < R₂, got {r1}, {r2}")));
        }
        for k in 0..=16 {
            let r = r1 + (r2 - r1) * k as f64 / 16.0;
            let v = shell.evaluate(r);
            if !(v.is_finite() && v > 0.0) {
                return Err(CalrError::Validation(format!("shell profile not elliptic at r={r}: {v}")));
            }
        }
        let outer = pushforward_isotropic(&shell, &RadialMap::kelvin(r2), d)?;
        Ok(PlasmonMedium { dimension: d, r1, r2, r3: r2 * r2 / r1, shell, outer })
    }
}

/// `v_ℓ` and its reflection `w_ℓ = v_ℓ∘K` for one degree, as real coefficient
/// tables on the anchored pairs of each layer. For `ℓ = 0`, `v₀ = 1` and `w`
/// holds `w₀`, the shell solution with `w₀(R₂) = 1`, `w₀(R₁) = 0`.
#[derive(Clone, Debug)]
pub struct PlasmonPair {
    pub degree: usize,
    pub dimension: usize,
    pub radii: [f64; 3],
    pub inner_basis: Arc<RadialBasis>,
    pub shell_basis: Arc<RadialBasis>,
    pub outer_basis: Arc<RadialBasis>,
    /// `v_ℓ` on `B_{R₁}` (growing member only), the shell and the outer annulus.
    pub v_inner: f64,
    pub v_shell: [f64; 2],
    pub v_outer: [f64; 2],
    /// `w_ℓ` on the shell.
    pub w: [f64; 2],
    /// Relative mismatch of `w = v` on `∂B_{R₂}`.
    pub trace_error: f64,
    /// Relative mismatch of `a∇w·x̂ = −a∇v·x̂` on `∂B_{R₂}`.
    pub flux_error: f64,
}

fn cauchy_real(b: &RadialBasis, r: f64, u: f64, flux: f64) -> [f64; 2] {
    let (v, f) = (b.values(r), b.fluxes(r));
    let det = v[0] * f[1] - v[1] * f[0];
    [(u * f[1] - flux * v[1]) / det, (flux * v[0] - u * f[0]) / det]
}

fn combine_real(b: &RadialBasis, c: [f64; 2], r: f64) -> (f64, f64) {
    let (v, f) = (b.values(r), b.fluxes(r));
    (c[0] * v[0] + c[1] * v[1], c[0] * f[0] + c[1] * f[1])
}

impl PlasmonPair {
    /// `(v, Φ_v)` at `r` (`Φ = a₁ r^{d-1} ∂_r`).
    pub fn v_at(&self, r: f64) -> (f64, f64) {
        let [r1, r2, _] = self.radii;
        if r <= r1 {
            let (v, f) = (self.inner_basis.values(r), self.inner_basis.fluxes(r));
            (self.v_inner * v[0], self.v_inner * f[0])
        } else if r <= r2 {
            combine_real(&self.shell_basis, self.v_shell, r)
        } else {
            combine_real(&self.outer_basis, self.v_outer, r)
        }
    }

    /// `(w, Φ_w)` at `r ∈ [R₁, R₂]`.
    pub fn w_at(&self, r: f64) -> (f64, f64) {
        combine_real(&self.shell_basis, self.w, r)
    }

    /// `(w, Φ_w)` by direct composition `v∘K` (not defined for `ℓ = 0`).
    pub fn w_direct(&self, r: f64) -> (f64, f64) {
        let r2 = self.radii[1];
        let (v, f) = combine_real(&self.outer_basis, self.v_outer, r2 * r2 / r);
        (v, -f)
    }
}

/// Builds the pair of degree `ℓ` and checks the reflection identities.
pub fn plasmon_pair(medium: &PlasmonMedium, degree: usize) -> Result<PlasmonPair> {
    let d = medium.dimension;
    let (r1, r2, r3) = (medium.r1, medium.r2, medium.r3);
    let inner_basis = Arc::new(RadialBasis::new(&RadialProfile::constant(1.0), degree, d, 0.0, r1)?);
    let shell_basis = Arc::new(RadialBasis::new(&medium.shell, degree, d, r1, r2)?);
    let outer_basis = Arc::new(RadialBasis::new(&medium.outer, degree, d, r2, r3)?);

    // The regular solution dominates outward, so single-point transfers are stable.
    let (vi, fi) = (inner_basis.values(r1)[0], inner_basis.fluxes(r1)[0]);
    let shell = cauchy_real(&shell_basis, r1, vi, fi);
    let (vs, fs) = combine_real(&shell_basis, shell, r2);
    let outer = cauchy_real(&outer_basis, r2, vs, fs);
    let (top, _) = combine_real(&outer_basis, outer, r3);
    if !(top.is_finite() && top != 0.0) {
        return Err(CalrError::Solver { degree, reason: format!("v_ℓ(R₃) = {top}") });
    }
    let s = 1.0 / top;
    let (v_inner, v_shell, v_outer) = (s, shell.map(|c| c * s), outer.map(|c| c * s));

    let w = if degree == 0 {
        let (a, b) = (shell_basis.values(r1), shell_basis.values(r2));
        let det = a[0] * b[1] - a[1] * b[0];
        [-a[1] / det, a[0] / det]
    } else {
        // Kelvin images: the growing outer member decays on the shell and is
        // matched at R₂, the decaying one at R₁.
        let image = |x: f64, k: usize| {
            let y = r2 * r2 / x;
            let (v, f) = (outer_basis.values(y), outer_basis.fluxes(y));
            cauchy_real(&shell_basis, x, v[k], -f[k])
        };
        let (p, q) = (image(r2, 0), image(r1, 1));
        [v_outer[0] * p[0] + v_outer[1] * q[0], v_outer[0] * p[1] + v_outer[1] * q[1]]
    };

    let mut pair = PlasmonPair {
        degree,
        dimension: d,
        radii: [r1, r2, r3],
        inner_basis,
        shell_basis,
        outer_basis,
        v_inner,
        v_shell,
        v_outer,
        w,
        trace_error: 0.0,
        flux_error: 0.0,
    };
    if degree > 0 {
        let (v, fv) = pair.v_at(r2);
        let (wv, fw) = pair.w_at(r2);
        pair.trace_error = (wv - v).abs() / v.abs();
        pair.flux_error = (fw + fv).abs() / fv.abs();
    }
    Ok(pair)
}

/// Pairs for degrees `0..=lmax`, in order.
pub fn plasmon_pairs(medium: &PlasmonMedium, lmax: usize) -> Result<Vec<PlasmonPair>> {
    (0..=lmax).into_par_iter().map(|l| plasmon_pair(medium, l)).collect()
}

// ---------------------------------------------------------------------------
// density

/// Which family is projected onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityFamily {
    /// Traces of `v_ℓ − w_ℓ` on `∂B_{R₁}` in `H^{1/2}`.
    Difference,
    /// `{1} ∪ {a∇(v_ℓ + w_ℓ)·η}` on `∂B_{R₁}` in `H^{-1/2}`.
    FluxSum,
    /// `{v_ℓ, w_ℓ}` as Cauchy data `(trace, flux)` on `∂B_{R₁}`.
    Joint,
}

/// Per-mode target on `∂B_{R₁}`: trace and conormal flux coefficients.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DensityTarget {
    pub modes: Vec<(Mode, Complex64, Complex64)>,
}

/// Residual of the least-squares projection onto the family truncated at degree `m`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityResidual {
    pub truncation: usize,
    pub residual: f64,
    pub target_norm: f64,
    /// Largest condition number among the per-mode normal systems.
    pub condition: f64,
}

/// Per-mode elements of the family at degree `ℓ`: each is `(trace, flux)` on `∂B_{R₁}`.
fn family_elements(pair: &PlasmonPair, family: DensityFamily) -> Vec<(f64, f64)> {
    let r1 = pair.radii[0];
    let area = r1.powi(pair.dimension as i32 - 1);
    let (v, fv) = pair.v_at(r1);
    let (w, fw) = if pair.degree == 0 { (1.0, 0.0) } else { pair.w_at(r1) };
    match family {
        DensityFamily::Difference => {
            if pair.degree == 0 {
                // v₀ − w₀ uses the Dirichlet w₀
                let (w0, fw0) = pair.w_at(r1);
                vec![(v - w0, (fv - fw0) / area)]
            } else {
                vec![(v - w, (fv - fw) / area)]
            }
        }
        DensityFamily::FluxSum => {
            if pair.degree == 0 {
                vec![(0.0, 1.0)]
            } else {
                vec![(v + w, (fv + fw) / area)]
            }
        }
        DensityFamily::Joint => {
            if pair.degree == 0 {
                let (w0, fw0) = pair.w_at(r1);
                vec![(1.0, 0.0), (w0, fw0 / area)]
            } else {
                vec![(v, fv / area), (w, fw / area)]
            }
        }
    }
}

/// Projects `target` onto the family truncated at degree `m` under the
/// matching trace norm. The family is orthogonal across modes, so the
/// projection is a small least-squares solve per mode.
pub fn density_residual(
    pairs: &[PlasmonPair],
    target: &DensityTarget,
    family: DensityFamily,
    m: usize,
) -> Result<DensityResidual> {
    let first = pairs.first().ok_or_else(|| CalrError::Insufficient("no plasmon pairs".into()))?;
    let (d, r1) = (first.dimension, first.radii[0]);
    let (use_trace, use_flux) = match family {
        DensityFamily::Difference => (true, false),
        DensityFamily::FluxSum => (false, true),
        DensityFamily::Joint => (true, true),
    };
    let mut res = 0.0;
    let mut total = 0.0;
    let mut condition = 1.0f64;
    for &(mode, t, f) in &target.modes {
        let l = mode.degree as f64;
        let wt = if use_trace { (1.0 + l * l).powf(0.25) } else { 0.0 };
        let wf = if use_flux { (1.0 + l * l).powf(-0.25) } else { 0.0 };
        let rhs = [t * wt, f * wf];
        total += rhs[0].norm_sqr() + rhs[1].norm_sqr();
        let pair = match pairs.get(mode.degree) {
            Some(p) if mode.degree <= m => p,
            _ => {
                res += rhs[0].norm_sqr() + rhs[1].norm_sqr();
                continue;
            }
        };
        let cols: Vec<[f64; 2]> = family_elements(pair, family).into_iter().map(|(a, b)| [a * wt, b * wf]).collect();
        let (r, cond) = least_squares_residual(&cols, rhs);
        condition = condition.max(cond);
        res += r;
    }
    let scale = trace_measure(r1, d);
    Ok(DensityResidual { truncation: m, residual: (scale * res).sqrt(), target_norm: (scale * total).sqrt(), condition })
}

/// Squared residual of `min ‖Σ x_k col_k − rhs‖` over at most two columns in `ℝ²`,
/// with the Gram matrix regularized when it is numerically singular.
fn least_squares_residual(cols: &[[f64; 2]], rhs: [Complex64; 2]) -> (f64, f64) {
    let g = |a: &[f64; 2], b: &[f64; 2]| a[0] * b[0] + a[1] * b[1];
    let proj = |a: &[f64; 2]| a[0] * rhs[0] + a[1] * rhs[1];
    let rr = rhs[0].norm_sqr() + rhs[1].norm_sqr();
    match cols {
        [a] => {
            let n = g(a, a);
            if n == 0.0 {
                (rr, f64::INFINITY)
            } else {
                let x = proj(a) / n;
                ((rhs[0] - x * a[0]).norm_sqr() + (rhs[1] - x * a[1]).norm_sqr(), 1.0)
            }
        }
        [a, b] => {
            // columns are normalized first: the members differ in scale by (R₃/R₁)^ℓ
            let unit = |c: &[f64; 2]| {
                let n = g(c, c).sqrt();
                if n == 0.0 { [0.0, 0.0] } else { [c[0] / n, c[1] / n] }
            };
            let (a, b) = (unit(a), unit(b));
            let (gaa, gab, gbb) = (g(&a, &a), g(&a, &b), g(&b, &b));
            let tr = gaa + gbb;
            let disc = ((gaa - gbb).powi(2) + 4.0 * gab * gab).sqrt();
            let (emax, emin) = (0.5 * (tr + disc), 0.5 * (tr - disc));
            let cond = if emin > 0.0 { emax / emin } else { f64::INFINITY };
            let eps = if cond > 1e14 { emax * 1e-14 } else { 0.0 };
            let (gaa, gbb) = (gaa + eps, gbb + eps);
            let det = gaa * gbb - gab * gab;
            let (pa, pb) = (proj(&a), proj(&b));
            let xa = (pa * gbb - pb * gab) / det;
            let xb = (pb * gaa - pa * gab) / det;
            let fit = [xa * a[0] + xb * b[0], xa * a[1] + xb * b[1]];
            (((rhs[0] - fit[0]).norm_sqr() + (rhs[1] - fit[1]).norm_sqr()), cond)
        }
        _ => (rr, 1.0),
    }
}

/// Expands a per-degree target into all modes of each degree.
pub fn target_from_degrees(d: usize, coeffs: &[(usize, Complex64, Complex64)]) -> DensityTarget {
    let mut modes = Vec::new();
    for &(l, t, f) in coeffs {
        for m in modes_of_degree(l, d) {
            modes.push((m, t, f));
        }
    }
    DensityTarget { modes }
}

// ---------------------------------------------------------------------------
// rigidity

/// Per-degree rigidity determinants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidityRow {
    pub degree: usize,
    /// `(w_ℓ − v_ℓ)(R₁)` normalized by `|v| + |w|`.
    pub trace_determinant: f64,
    /// `−a∇(v_ℓ + w_ℓ)·η` at `R₁` normalized by `|Φ_v| + |Φ_w|`.
    pub flux_determinant: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidityReport {
    pub rows: Vec<RigidityRow>,
    /// Degrees whose determinant falls below [`DEGENERACY_TOL`].
    pub degenerate: Vec<usize>,
    /// `∫_{∂B_{R₁}} a∇(v + w)·η` for a random combination, by quadrature.
    pub monopole_flux: f64,
    /// Whether `c = 0` is forced in both rigidity conditions.
    pub c_forced_zero: bool,
}

impl RigidityReport {
    pub fn passed(&self) -> bool {
        self.degenerate.is_empty() && self.c_forced_zero
    }
}

/// Rigidity determinants of the given pairs (index = degree; degree 0 is
/// handled by the flux-integral argument).
pub fn rigidity_check_pairs(pairs: &[PlasmonPair], seed_coeffs: &[Complex64]) -> Result<RigidityReport> {
    let first = pairs.first().ok_or_else(|| CalrError::Insufficient("no plasmon pairs".into()))?;
    let (d, r1) = (first.dimension, first.radii[0]);
    let mut rows = Vec::new();
    let mut degenerate = Vec::new();
    for p in pairs.iter().filter(|p| p.degree > 0) {
        let (v, fv) = p.v_at(r1);
        let (w, fw) = p.w_at(r1);
        let td = (w - v) / (v.abs() + w.abs());
        let fd = -(fv + fw) / (fv.abs() + fw.abs());
        if !(td > DEGENERACY_TOL && fd > DEGENERACY_TOL) {
            degenerate.push(p.degree);
        }
        rows.push(RigidityRow { degree: p.degree, trace_determinant: td, flux_determinant: fd });
    }
    let monopole_flux = total_flux(pairs, seed_coeffs, d, r1);
    let scale: f64 = seed_coeffs.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
    Ok(RigidityReport { rows, degenerate, c_forced_zero: monopole_flux.abs() <= 1e-10 * scale, monopole_flux })
}

/// Builds the pairs of `0..=lmax` and checks rigidity.
pub fn rigidity_check(medium: &PlasmonMedium, lmax: usize, seed_coeffs: &[Complex64]) -> Result<RigidityReport> {
    rigidity_check_pairs(&plasmon_pairs(medium, lmax)?, seed_coeffs)
}

/// `∫_{∂B_{R₁}} a∇V·η` for `V = v + w`, `v = Σ c_ℓ v_ℓ Y_ℓ` with `v₀∘K = 1`,
/// integrated on an angular grid.
fn total_flux(pairs: &[PlasmonPair], coeffs: &[Complex64], d: usize, r1: f64) -> f64 {
    let area = r1.powi(d as i32 - 1);
    let flux: Vec<(Mode, Complex64)> = pairs
        .iter()
        .zip(coeffs)
        .map(|(p, c)| {
            let (_, fv) = p.v_at(r1);
            let fw = if p.degree == 0 { 0.0 } else { p.w_at(r1).1 };
            let mode = if d == 2 { Mode::planar(p.degree as i64) } else { Mode::new(p.degree, 0) };
            (mode, c * (fv + fw) / area)
        })
        .collect();
    let lmax = pairs.len();
    let integral = if d == 2 {
        let n = 2 * lmax + 8;
        let h = 2.0 * std::f64::consts::PI / n as f64;
        (0..n)
            .map(|k| {
                let th = k as f64 * h;
                flux.iter().map(|(m, c)| c * harmonic_at(*m, d, &[th.cos(), th.sin()])).sum::<Complex64>()
            })
            .sum::<Complex64>()
            * h
            * r1
    } else {
        use gauss_quad::GaussLegendre;
        let gl = GaussLegendre::new(std::num::NonZeroUsize::new(lmax + 4).expect("non-zero"));
        let np = 8;
        let h = 2.0 * std::f64::consts::PI / np as f64;
        gl.iter()
            .map(|&(x, w)| {
                let s = (1.0 - x * x).max(0.0).sqrt();
                (0..np)
                    .map(|k| {
                        let ph = k as f64 * h;
                        let pt = [s * ph.cos(), s * ph.sin(), x];
                        flux.iter().map(|(m, c)| c * harmonic_at(*m, d, &pt)).sum::<Complex64>()
                    })
                    .sum::<Complex64>()
                    * h
                    * w
            })
            .sum::<Complex64>()
            * (r1 * r1)
    };
    integral.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_identity() {
        for &(a, b, c) in &[(1.0, 2.0, 4.0), (0.3, 1.7, 9.1)] {
            let al = three_spheres_alpha(a, b, c);
            let lhs: f64 = f64::ln(b);
            assert!((lhs - (al * f64::ln(a) + (1.0 - al) * f64::ln(c))).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_is_an_equality_case() {
        let v = [(Mode::planar(0), Complex64::new(2.0, 0.0))];
        let r = three_spheres_check(&v, [1.0, 2.0, 4.0], 2).unwrap();
        assert!((r.norms[0] - 2.0).abs() < 1e-14);
        assert!((r.ratio - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unit_pair_closed_form() {
        // a ≡ 1, 2D: v = (r/R₃)^ℓ, w = (R₂²/(R₃ r))^ℓ
        let m = PlasmonMedium::new(RadialProfile::constant(1.0), 0.5, 1.0, 2).unwrap();
        for l in [1usize, 3, 7] {
            let p = plasmon_pair(&m, l).unwrap();
            let li = l as i32;
            for r in [0.6, 0.8, 1.0] {
                assert!((p.v_at(r).0 - (r / 2.0).powi(li)).abs() < 1e-13);
                assert!((p.w_at(r).0 - (1.0 / (2.0 * r)).powi(li)).abs() < 1e-12);
            }
        }
        let w0 = plasmon_pair(&m, 0).unwrap();
        let want = |r: f64| (r / 0.5).ln() / 2f64.ln();
        assert!((w0.w_at(0.7).0 - want(0.7)).abs() < 1e-14);
    }

    #[test]
    fn constant_scaling_acts_inside_the_shell_only() {
        // The shell problems are homogeneous, but a₁ = I in B_{R₁} keeps the
        // transmission at R₁ sensitive to the scale of a.
        let one = PlasmonMedium::new(RadialProfile::constant(1.0), 0.5, 1.0, 3).unwrap();
        let two = PlasmonMedium::new(RadialProfile::constant(2.0), 0.5, 1.0, 3).unwrap();
        let (a, b) = (plasmon_pair(&one, 0).unwrap(), plasmon_pair(&two, 0).unwrap());
        assert!((a.w_at(0.7).0 - b.w_at(0.7).0).abs() < 1e-14);
        for l in [1usize, 4] {
            let (a, b) = (plasmon_pair(&one, l).unwrap(), plasmon_pair(&two, l).unwrap());
            assert!(b.trace_error < 1e-12 && b.flux_error < 1e-12);
            assert!((a.v_at(2.0).0 - b.v_at(2.0).0).abs() < 1e-14);
            assert!((a.v_at(0.3).0 - b.v_at(0.3).0).abs() > 1e-6);
        }
    }

    #[test]
    fn fake_pair_is_degenerate() {
        let m = PlasmonMedium::new(RadialProfile::constant(1.0), 0.5, 1.0, 2).unwrap();
        let mut pairs = plasmon_pairs(&m, 6).unwrap();
        let coeffs = vec![Complex64::new(1.0, 0.0); 7];
        assert!(rigidity_check_pairs(&pairs, &coeffs).unwrap().passed());
        for p in pairs.iter_mut().skip(1) {
            p.w = p.v_shell;
        }
        let rep = rigidity_check_pairs(&pairs, &coeffs).unwrap();
        assert_eq!(rep.degenerate, (1..=6).collect::<Vec<_>>());
    }

    #[test]
    fn projection_of_a_family_member_is_exact() {
        let m = PlasmonMedium::new(RadialProfile::constant(1.0), 0.5, 1.0, 2).unwrap();
        let pairs = plasmon_pairs(&m, 8).unwrap();
        let (v, _) = pairs[5].v_at(0.5);
        let (w, _) = pairs[5].w_at(0.5);
        let t = target_from_degrees(2, &[(5, Complex64::new(v - w, 0.0), Complex64::default())]);
        assert!(density_residual(&pairs, &t, DensityFamily::Difference, 4).unwrap().residual > 0.1);
        assert!(density_residual(&pairs, &t, DensityFamily::Difference, 5).unwrap().residual < 1e-14);
        let c = target_from_degrees(2, &[(0, Complex64::default(), Complex64::new(3.0, 0.0))]);
        assert!(density_residual(&pairs, &c, DensityFamily::FluxSum, 0).unwrap().residual < 1e-14);
    }
}
