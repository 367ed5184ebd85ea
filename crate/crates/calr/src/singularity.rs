//! Reflection of a solved field through the complementary maps, removal of the
//! localized singularity, and the auxiliary field `W_δ`.
//!
//! With `F` the Kelvin map at `r₂` and `G` the Kelvin map at `r₃`,
//! `v₁ = u∘F⁻¹` on `(r₂, r₃)` is the shell field seen from the annulus and
//! `v₂ = v₁∘G⁻¹` is the core field, `v₂(r) = u(κ r)` with `κ = r₁²/r₂²`.
//! Fluxes `Φ = a r^{d-1} ∂_r` change sign under a Kelvin map and are invariant
//! under a dilation, so at `r₃` the two reflections share their trace while
//! `Φ_{v₁} = Φ_{v₂} / (1 − iδ)`.
//!
//! `v₁ − v₂` is therefore `X ψ` with `X = iδ/(1−iδ) Φ_{v₂}(r₃)` and `ψ` the
//! annulus solution with `ψ(r₃) = 0`, `Φ_ψ(r₃) = 1`. Its decaying part is the
//! singular part `ĥv`; subtracting it from `u` glues a field `V` whose jumps
//! across `∂B_{r₂}` and `∂B_{r₃}` vanish as `δ → 0`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CalrError, Result};
use crate::medium::{LayerRole, LayeredMedium, RadialProfile};
use crate::resonance::{fit_line, log_sum_exp, normalization_constant, shell_energy, WCoefficients};
use crate::spectral::harmonics::{angular_weight, trace_measure, Mode};
use crate::spectral::{Field, ModeField, RadialBasis, Side};

/// Reflected data of one mode.
#[derive(Clone, Debug)]
pub struct ReflectedMode {
    pub mode: Mode,
    /// Anchored annulus pair on `[r₂, r₃]`.
    pub annulus: Arc<RadialBasis>,
    /// `v₁` on the annulus pair.
    pub v1: [Complex64; 2],
    /// `v₂` on `(r₂, r₃)` on the annulus pair.
    pub v2: [Complex64; 2],
    source: ModeField,
}

/// `v₁ = u∘F⁻¹` and `v₂ = v₁∘G⁻¹` for every mode of a solved field.
#[derive(Clone, Debug)]
pub struct ReflectionPair {
    pub dimension: usize,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// Dilation factor `r₁²/r₂²` of `(G∘F)⁻¹`.
    pub kappa: f64,
    pub delta: f64,
    pub modes: Vec<ReflectedMode>,
}

fn solve_cauchy(b: &RadialBasis, r: f64, u: Complex64, flux: Complex64) -> [Complex64; 2] {
    let (v, f) = (b.values(r), b.fluxes(r));
    let det = v[0] * f[1] - v[1] * f[0];
    [(u * f[1] - flux * v[1]) / det, (flux * v[0] - u * f[0]) / det]
}

impl ReflectedMode {
    /// `(v₁, Φ_{v₁})` at `r ∈ [r₂, r₃]` by composition with the Kelvin map.
    pub fn v1_direct(&self, r: f64, r2: f64) -> (Complex64, Complex64) {
        let rho = r2 * r2 / r;
        let (u, f) = self.source.radial(rho, Side::Inner);
        (u, -f)
    }

    /// `(v₂, Φ_{v₂})` at `r` by composition with the dilation (the inner ball side for `r ≤ r₂`).
    pub fn v2_direct(&self, r: f64, kappa: f64) -> (Complex64, Complex64) {
        self.source.radial(kappa * r, Side::Inner)
    }

    /// `(v₁, Φ_{v₁})` from the annulus coefficients.
    pub fn v1_at(&self, r: f64) -> (Complex64, Complex64) {
        self.annulus.combine(self.v1[0], self.v1[1], r)
    }

    pub fn v2_at(&self, r: f64) -> (Complex64, Complex64) {
        self.annulus.combine(self.v2[0], self.v2[1], r)
    }

    pub fn field(&self) -> &ModeField {
        &self.source
    }
}

fn geometry(medium: &LayeredMedium) -> Result<(f64, f64, f64)> {
    let g = medium
        .geometry()
        .ok_or_else(|| CalrError::Validation("reflection needs a doubly complementary medium".into()))?;
    Ok((g.r1, g.r2, g.r3))
}

/// Coefficient-level reflection of `u` through the complementary maps.
pub fn reflect(u: &Field, medium: &LayeredMedium) -> Result<ReflectionPair> {
    let (r1, r2, r3) = geometry(medium)?;
    let kappa = r1 * r1 / (r2 * r2);
    let profile = medium
        .layer(LayerRole::Annulus)
        .map(|l| l.profile.clone())
        .ok_or_else(|| CalrError::Validation("medium has no annulus layer".into()))?;
    let d = medium.dimension();
    let modes = u
        .modes()
        .par_iter()
        .map(|m| {
            let annulus = Arc::new(RadialBasis::new(&profile, m.mode.degree, d, r2, r3)?);
            let js = m.layout().layer_at(r2, Side::Inner);
            let shell = &m.layout().layers[js].basis;
            let [cs, ds] = m.coefficients(js);
            // Kelvin images: the growing shell member decays in r and is
            // projected where the growing annulus member dominates, and vice versa.
            let rho3 = r2 * r2 / r3;
            let img = |x: f64, rho: f64, k: usize| {
                let (v, f) = (shell.values(rho), shell.fluxes(rho));
                solve_cauchy(&annulus, x, Complex64::new(v[k], 0.0), Complex64::new(-f[k], 0.0))
            };
            let (p, q) = (img(r3, rho3, 0), img(r2, r2, 1));
            let v1 = [cs * p[0] + ds * q[0], cs * p[1] + ds * q[1]];
            let jc = m.layout().layer_at(r1, Side::Inner);
            let core = &m.layout().layers[jc].basis;
            let [cc, dc] = m.coefficients(jc);
            let dil = |x: f64, k: usize| {
                let (v, f) = (core.values(kappa * x), core.fluxes(kappa * x));
                solve_cauchy(&annulus, x, Complex64::new(v[k], 0.0), Complex64::new(f[k], 0.0))
            };
            let (p, q) = (dil(r2, 0), dil(r3, 1));
            let v2 = [cc * p[0] + dc * q[0], cc * p[1] + dc * q[1]];
            Ok(ReflectedMode { mode: m.mode, annulus, v1, v2, source: m.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReflectionPair { dimension: d, r1, r2, r3, kappa, delta: u.delta(), modes })
}

/// Singular part and jump diagnostics of the glued field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularPart {
    pub delta: f64,
    pub c_delta: f64,
    /// `(mode, coefficients of ĥv on the annulus pair)`.
    pub hv: Vec<(Mode, [Complex64; 2])>,
    /// Jumps of the normalized glued field.
    pub jumps: JumpNorms,
    /// Largest relative mismatch of the glued pieces against their own equations.
    pub glued_residual: f64,
}

/// `‖[V]‖_{H^{1/2}}` and `‖[Â∇V·η]‖_{H^{-1/2}}` on both interfaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpNorms {
    pub trace_r2: f64,
    pub flux_r2: f64,
    pub trace_r3: f64,
    pub flux_r3: f64,
}

/// Per-mode jumps of `V` (unnormalized): `[V](r₂), [flux](r₂), [V](r₃), [flux](r₃)`.
pub fn mode_jumps(pair: &ReflectionPair, m: &ReflectedMode, hv: [Complex64; 2]) -> [Complex64; 4] {
    let d = pair.dimension as i32;
    let (r2, r3) = (pair.r2, pair.r3);
    let (h2, fh2) = m.annulus.combine(hv[0], hv[1], r2);
    let (h3, fh3) = m.annulus.combine(hv[0], hv[1], r3);
    let (u2, fu2) = m.source.radial(r2, Side::Outer);
    let (w2, fw2) = m.v2_direct(r2, pair.kappa);
    [
        u2 - h2 - w2,
        (fu2 - fh2 - fw2) / r2.powi(d - 1),
        h3,
        fh3 / r3.powi(d - 1),
    ]
}

/// Builds `ĥv`, glues `V` and measures its jumps on the normalized field.
pub fn remove_singularity(pair: &ReflectionPair, u: &Field, medium: &LayeredMedium) -> Result<SingularPart> {
    let delta = pair.delta;
    let c = normalization_constant(shell_energy(u, medium), delta)?;
    let factor = Complex64::new(0.0, delta) / Complex64::new(1.0, -delta);
    let mut hv = Vec::with_capacity(pair.modes.len());
    let mut sums = [0.0f64; 4];
    let mut residual = 0.0f64;
    for m in &pair.modes {
        let coeffs = singular_coefficients(pair, m, factor);
        let j = mode_jumps(pair, m, coeffs);
        let l = m.mode.degree as f64;
        let w_half = (1.0 + l * l).sqrt();
        sums[0] += w_half * j[0].norm_sqr();
        sums[1] += j[1].norm_sqr() / w_half;
        sums[2] += w_half * j[2].norm_sqr();
        sums[3] += j[3].norm_sqr() / w_half;
        residual = residual.max(glued_mismatch(pair, m, coeffs));
        hv.push((m.mode, coeffs));
    }
    let d = pair.dimension;
    let norm = |s: f64, r: f64| c * (trace_measure(r, d) * s).sqrt();
    Ok(SingularPart {
        delta,
        c_delta: c,
        hv,
        jumps: JumpNorms {
            trace_r2: norm(sums[0], pair.r2),
            flux_r2: norm(sums[1], pair.r2),
            trace_r3: norm(sums[2], pair.r3),
            flux_r3: norm(sums[3], pair.r3),
        },
        glued_residual: residual,
    })
}

/// Coefficients of `ĥv` on the annulus pair for one mode.
pub fn singular_coefficients(pair: &ReflectionPair, m: &ReflectedMode, factor: Complex64) -> [Complex64; 2] {
    let r3 = pair.r3;
    let (_, phi2) = m.v2_at(r3);
    let x = factor * phi2;
    let psi = solve_cauchy(&m.annulus, r3, Complex64::default(), Complex64::new(1.0, 0.0));
    if pair.dimension == 2 && m.mode.degree == 0 {
        // monopole: −iδ/(1−iδ) f₀ ln(r/r₃)
        [-x * psi[0], -x * psi[1]]
    } else {
        [Complex64::default(), x * psi[1]]
    }
}

/// Re-expresses the members of `from` on `to`: growing members are matched at
/// the inner end `lo` and decaying ones at `hi`, where each is well resolved.
fn project_members(to: &RadialBasis, from: &RadialBasis, c: [Complex64; 2], lo: f64, hi: f64) -> [Complex64; 2] {
    let member = |x: f64, k: usize| {
        let (v, f) = (from.values(x), from.fluxes(x));
        solve_cauchy(to, x, Complex64::new(v[k], 0.0), Complex64::new(f[k], 0.0))
    };
    let (p, q) = (member(lo, 0), member(hi, 1));
    [c[0] * p[0] + c[1] * q[0], c[0] * p[1] + c[1] * q[1]]
}

/// Consistency of the glued annulus piece `u − ĥv` with the annulus equation:
/// the piece is re-expressed on the annulus pair and compared at the midpoint.
fn glued_mismatch(pair: &ReflectionPair, m: &ReflectedMode, hv: [Complex64; 2]) -> f64 {
    let layout = m.source.layout();
    let j = layout.layer_at(pair.r2, Side::Outer);
    let (lo, hi) = (layout.layers[j].inner, layout.layers[j].outer);
    let from = &layout.layers[j].basis;
    let c = project_members(&m.annulus, from, m.source.coefficients(j), lo, hi);
    let g = [c[0] - hv[0], c[1] - hv[1]];
    let x = 0.5 * (lo + hi);
    let (u, f) = m.source.radial_on(j, x);
    let (h, fh) = m.annulus.combine(hv[0], hv[1], x);
    let (pv, pf) = m.annulus.combine(g[0], g[1], x);
    let (v, fl) = (m.annulus.values(x), m.annulus.fluxes(x));
    let terms = g[0].norm() * (v[0].abs() + fl[0].abs()) + g[1].norm() * (v[1].abs() + fl[1].abs());
    let (bv, bf) = (from.values(x), from.fluxes(x));
    let [c0, c1] = m.source.coefficients(j);
    let own = c0.norm() * (bv[0].abs() + bf[0].abs()) + c1.norm() * (bv[1].abs() + bf[1].abs());
    let scale = (u.norm() + f.norm() + h.norm() + fh.norm()).max(terms).max(own);
    if scale == 0.0 {
        0.0
    } else {
        ((pv - (u - h)).norm() + (pf - (f - fh)).norm()) / scale
    }
}

/// Damped auxiliary field `W_δ` and its boundary datum `h_δ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuxiliaryW {
    pub delta: f64,
    /// `(degree, order, ln|G|, ln ξ_ℓ, ln|G/(1+ξ_ℓ)|)`; `ξ_0` is reported as `−∞`.
    pub modes: Vec<(usize, i64, f64, f64, f64)>,
    /// `‖W_δ‖_{H¹(B_{r₃}∖B_{r₂})}` in the rescaled variable `ρ = r/r₂`.
    pub w_norm: f64,
    /// `‖h_δ‖_{H^{-1/2}(∂B_{r₂})}`.
    pub h_norm: f64,
    pub bounds: Vec<ModeBound>,
}

/// Per-mode bounds on the damped energy and on `h_δ`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeBound {
    pub degree: usize,
    pub order: i64,
    pub xi_at_most_one: bool,
    /// `ln(ℓ|G|²ρ₃^{2ℓ}/(1+ξ²))` and its bound `ln(δ^{-1} ℓ|G|²ρ₀^{2ℓ})`.
    pub log_energy: f64,
    pub log_energy_bound: f64,
    /// `ln(ℓξ²|G|²/(1+ξ²))` and its bound `ln(δ ℓ|G|²ρ₀^{2ℓ})`.
    pub log_h: f64,
    pub log_h_bound: f64,
}

impl ModeBound {
    pub fn energy_ok(&self) -> bool {
        self.log_energy <= self.log_energy_bound + 1e-12
    }

    pub fn h_ok(&self) -> bool {
        self.log_h <= self.log_h_bound + 1e-12
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ξ_ℓ = δ^{1/2} (r₃/r₀)^ℓ`.
pub fn xi(delta: f64, r3: f64, r0: f64, degree: usize) -> f64 {
    delta.sqrt() * (r3 / r0).powi(degree as i32)
}

/// Builds `W_δ` from the coefficients of `W` (see [`crate::resonance::w_coefficients`]).
///
/// The damping uses `w.extension_radius`, not the source radius.
pub fn build_w_delta(w: &WCoefficients, delta: f64) -> Result<AuxiliaryW> {
    if !(delta > 0.0) {
        return Err(CalrError::Validation("W_δ needs δ > 0".into()));
    }
    let d = w.dimension;
    let (rho0, rho3) = (w.extension_radius / w.r2, w.r3 / w.r2);
    let one = RadialProfile::constant(1.0);
    let omega = angular_weight(d);
    let mut log_w_terms = Vec::new();
    let mut log_h_terms = Vec::new();
    let mut modes = Vec::new();
    let mut bounds = Vec::new();
    for &(l, k, ln_g, arg) in &w.entries {
        let phase = Complex64::from_polar(1.0, arg);
        let lf = l as f64;
        let basis = RadialBasis::new(&one, l, d, 1.0, rho3)?;
        if l == 0 {
            // undamped monopole: ln ρ (2D), 1 − 1/ρ (3D)
            let (c, dd) = if d == 2 { (Complex64::default(), phase) } else { (phase, -phase) };
            let e = basis.gradient_energy(c, dd, 1.0, rho3) + basis.l2_energy(c, dd, 1.0, rho3);
            log_w_terms.push(omega.ln() + 2.0 * ln_g + e.ln());
            modes.push((l, k, ln_g, f64::NEG_INFINITY, ln_g));
            continue;
        }
        let ln_xi = 0.5 * delta.ln() + lf * (rho3 / rho0).ln();
        let ln_damped = ln_g - softplus(ln_xi);
        // ρ^ℓ − ρ^{-ℓ-(d-2)} = ρ₃^ℓ (ρ/ρ₃)^ℓ − (1/ρ)^{ℓ+d-2}, scaled by ρ₃^ℓ
        let scale = ln_damped + lf * rho3.ln();
        let c = phase;
        let dd = -phase * (-lf * rho3.ln()).exp();
        let e = basis.gradient_energy(c, dd, 1.0, rho3) + basis.l2_energy(c, dd, 1.0, rho3);
        log_w_terms.push(omega.ln() + 2.0 * scale + e.ln());
        // h_δ = ξ/(1+ξ) G b'(1), b'(1) = 2ℓ + d − 2
        let kappa = 2.0 * lf + d as f64 - 2.0;
        let ln_h = ln_xi - softplus(ln_xi) + ln_g + kappa.ln();
        log_h_terms.push(2.0 * ln_h - 0.5 * (1.0 + lf * lf).ln());
        modes.push((l, k, ln_g, ln_xi, ln_damped));
        let xi_sq = 2.0 * ln_xi;
        bounds.push(ModeBound {
            degree: l,
            order: k,
            xi_at_most_one: ln_xi <= 0.0,
            log_energy: lf.ln() + 2.0 * ln_g + 2.0 * lf * rho3.ln() - softplus(xi_sq),
            log_energy_bound: -delta.ln() + lf.ln() + 2.0 * ln_g + 2.0 * lf * rho0.ln(),
            log_h: lf.ln() + xi_sq + 2.0 * ln_g - softplus(xi_sq),
            log_h_bound: delta.ln() + lf.ln() + 2.0 * ln_g + 2.0 * lf * rho0.ln(),
        });
    }
    let w_norm = (0.5 * log_sum_exp(&log_w_terms)).exp();
    let h_norm = (0.5 * (trace_measure(1.0, d).ln() + log_sum_exp(&log_h_terms))).exp();
    Ok(AuxiliaryW { delta, modes, w_norm, h_norm, bounds })
}

/// `‖W_δ‖` and `‖h_δ‖` along a δ grid with their fitted log-log slopes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WDeltaSweep {
    pub deltas: Vec<f64>,
    pub w_norms: Vec<f64>,
    pub h_norms: Vec<f64>,
    pub w_slope: f64,
    pub h_slope: f64,
    /// `max_δ δ^{1/2}‖W_δ‖`.
    pub w_constant: f64,
}

pub fn w_delta_sweep(w: &WCoefficients, deltas: &[f64]) -> Result<WDeltaSweep> {
    let aux = deltas.iter().map(|&dl| build_w_delta(w, dl)).collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = deltas.iter().map(|v| v.ln()).collect();
    let w_norms: Vec<f64> = aux.iter().map(|a| a.w_norm).collect();
    let h_norms: Vec<f64> = aux.iter().map(|a| a.h_norm).collect();
    let (w_slope, _) = fit_line(&x, &w_norms.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let (h_slope, _) = fit_line(&x, &h_norms.iter().map(|v| v.ln()).collect::<Vec<_>>());
    let w_constant = deltas.iter().zip(&w_norms).map(|(dl, n)| dl.sqrt() * n).fold(0.0, f64::max);
    Ok(WDeltaSweep { deltas: deltas.to_vec(), w_norms, h_norms, w_slope, h_slope, w_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::build_doubly_complementary;
    use crate::resonance::w_coefficients;
    use crate::spectral::{solve_field, ModeSpectrum};

    fn mn(d: usize) -> LayeredMedium {
        build_doubly_complementary(&RadialProfile::constant(1.0), 1.0, 4.0, 8.0, d).unwrap()
    }

    #[test]
    fn kelvin_reflection_swaps_the_pair() {
        // In the shell (r₁, r₂) = (0.25, 1): u = r² reflects to v₁ = r⁻².
        let m = mn(2);
        let src = ModeSpectrum::single(1.5, 2, Mode::planar(2), Complex64::new(1.0, 0.0)).unwrap();
        let u = solve_field(&m, &src, 1e-2, 4).unwrap();
        let pair = reflect(&u, &m).unwrap();
        let rm = &pair.modes[0];
        let shell = rm.field().monomial_coefficients(2).unwrap();
        let v1 = rm.annulus.monomial_coefficients(rm.v1[0], rm.v1[1]).unwrap();
        assert!((v1[0] - shell[1]).norm() < 1e-12 * shell[1].norm().max(1.0));
        assert!((v1[1] - shell[0]).norm() < 1e-12 * shell[0].norm().max(1.0));
    }

    #[test]
    fn reflection_identities_on_the_shell_boundary() {
        let m = mn(3);
        let src = ModeSpectrum::geometric(1.5, 3, 0.8, 12).unwrap();
        let u = solve_field(&m, &src, 1e-4, 12).unwrap();
        let pair = reflect(&u, &m).unwrap();
        for rm in &pair.modes {
            let (v, f) = rm.v1_at(1.0);
            let (us, fs) = rm.field().radial(1.0, Side::Inner);
            let s = us.norm() + fs.norm();
            assert!((v - us).norm() <= 1e-12 * s);
            assert!((f + fs).norm() <= 1e-12 * s);
            // direct composition agrees with the coefficient form inside the annulus
            let (vd, fd) = rm.v1_direct(2.3, pair.r2);
            let (vc, fc) = rm.v1_at(2.3);
            // both representations cancel at high degree, so compare against term size
            let (pv, pf) = (rm.annulus.values(2.3), rm.annulus.fluxes(2.3));
            let mut terms = rm.v1[0].norm() * (pv[0].abs() + pf[0].abs()) + rm.v1[1].norm() * (pv[1].abs() + pf[1].abs());
            let rho = pair.r2 * pair.r2 / 2.3;
            let j = rm.field().layout().layer_at(rho, Side::Inner);
            let sb = &rm.field().layout().layers[j].basis;
            let (sv, sf) = (sb.values(rho), sb.fluxes(rho));
            let [c, dd] = rm.field().coefficients(j);
            terms = terms.max(c.norm() * (sv[0].abs() + sf[0].abs()) + dd.norm() * (sv[1].abs() + sf[1].abs()));
            assert!((vd - vc).norm() + (fd - fc).norm() <= 1e-12 * terms, "{:?}", rm.mode);
        }
    }

    #[test]
    fn singular_part_closed_form_in_two_dimensions() {
        let m = mn(2);
        let delta = 1e-3;
        let src = ModeSpectrum::geometric(1.5, 2, 0.8, 10).unwrap();
        let u = solve_field(&m, &src, delta, 10).unwrap();
        let pair = reflect(&u, &m).unwrap();
        let factor = Complex64::new(0.0, delta) / Complex64::new(1.0, -delta);
        for rm in pair.modes.iter().filter(|r| r.mode.degree > 0) {
            let l = rm.mode.degree as i32;
            let [e, f] = rm.annulus.monomial_coefficients(rm.v2[0], rm.v2[1]).unwrap();
            let (big_e, big_f) = (e * 4f64.powi(l), f * 4f64.powi(-l));
            let want = -factor / 2.0 * (big_e - big_f);
            let h = singular_coefficients(&pair, rm, factor);
            // ĥv = h₋ (r₂/r)^ℓ = h₋ (r₂/r₃)^ℓ (r/r₃)^{-ℓ}
            let got = h[1] * 0.25f64.powi(l);
            assert!((got - want).norm() <= 1e-10 * want.norm(), "ℓ={l}");
            assert_eq!(h[0], Complex64::default());
        }
    }

    #[test]
    fn xi_arithmetic_and_damping() {
        assert!((xi(1e-4, 2.0, 1.0, 10) - 10.24).abs() < 1e-12);
        let m = mn(2);
        let src = ModeSpectrum::single(2.5, 2, Mode::planar(3), Complex64::new(0.7, 0.0)).unwrap();
        let w = w_coefficients(&src, &m).unwrap();
        let aux = build_w_delta(&w, 1e-4).unwrap();
        let (_, _, ln_g, ln_xi, ln_damped) = aux.modes[0];
        let x = xi(1e-4, 4.0, 2.5, 3);
        assert!((ln_xi - x.ln()).abs() < 1e-12);
        assert!((ln_damped - (ln_g - (1.0 + x).ln())).abs() < 1e-12);
    }

    #[test]
    fn w_delta_norm_respects_the_upper_rate() {
        let m = mn(2);
        let src = ModeSpectrum::geometric(1.5, 2, 0.6, 400).unwrap();
        let w = w_coefficients(&src, &m).unwrap();
        let sweep = w_delta_sweep(&w, &crate::resonance::log_delta_grid(1e-2, 1e-8, 13)).unwrap();
        assert!(sweep.w_slope >= -0.52, "slope {}", sweep.w_slope);
        let aux = build_w_delta(&w, 1e-6).unwrap();
        assert!(aux.bounds.iter().all(|b| b.energy_ok()));
        // the h_δ bound needs r₀ > √(r₂ r₃)
        assert!(!aux.bounds.iter().all(|b| b.h_ok()));
        // pushed to the maximal extension 2.5 the rate becomes sharp
        let wx = w.clone().with_extension_radius(2.5).unwrap();
        let sweep = w_delta_sweep(&wx, &crate::resonance::log_delta_grid(1e-2, 1e-8, 13)).unwrap();
        assert!((sweep.w_slope + 0.5).abs() < 0.05, "slope {}", sweep.w_slope);
        assert!((sweep.h_slope - 0.5).abs() < 0.05, "slope {}", sweep.h_slope);
        let aux = build_w_delta(&wx, 1e-6).unwrap();
        assert!(aux.bounds.iter().all(|b| b.energy_ok() && b.h_ok()));
        assert!(w.clone().with_extension_radius(1.0).is_err());
        let far = ModeSpectrum::geometric(2.5, 2, 0.6, 400).unwrap();
        let wf = w_coefficients(&far, &m).unwrap();
        for dl in [1e-2, 1e-5, 1e-9] {
            let aux = build_w_delta(&wf, dl).unwrap();
            assert!(aux.bounds.iter().all(|b| b.energy_ok() && b.h_ok()));
            assert!(aux.bounds.iter().any(|b| b.xi_at_most_one) && aux.bounds.iter().any(|b| !b.xi_at_most_one));
        }
    }
}
