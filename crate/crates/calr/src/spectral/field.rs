//! Solved fields: per-mode layer coefficients, evaluation and norms.
//!
//! Trace norms follow one convention throughout the crate:
//!
//! ```text
//!   ‖g‖²_{H^s(∂B_R)} = m(R) Σ (1 + ℓ²)^s |g_ℓ|²,    m(R) = 2πR (2D), R² (3D)
//! ```
//!
//! with `g_ℓ` the coefficients against `e^{imθ}` or `Y_ℓ^k`. At `s = 0` this is
//! the exact `L²(∂B_R)` norm.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CalrError, Result};
use crate::spectral::harmonics::{angular_weight, harmonic_at, trace_measure, Mode};
use crate::spectral::system::{layer_sign, DegreeLayout, Side};

/// Radial part of one angular mode.
#[derive(Clone, Debug)]
pub struct ModeField {
    pub mode: Mode,
    layout: Arc<DegreeLayout>,
    coefficients: Vec<[Complex64; 2]>,
    delta: f64,
}

fn is_zero(z: Complex64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

impl ModeField {
    pub fn new(mode: Mode, layout: Arc<DegreeLayout>, coefficients: Vec<[Complex64; 2]>, delta: f64) -> Self {
        assert_eq!(coefficients.len(), layout.layers.len(), "one coefficient pair per layer");
        ModeField { mode, layout, coefficients, delta }
    }

    pub fn layout(&self) -> &Arc<DegreeLayout> {
        &self.layout
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `(c, d)` on solver layer `j`.
    pub fn coefficients(&self, j: usize) -> [Complex64; 2] {
        self.coefficients[j]
    }

    pub fn all_coefficients(&self) -> &[[Complex64; 2]] {
        &self.coefficients
    }

    /// Coefficients of the raw monomials `(r^{q₊}, r^{q₋})` on a power-law layer.
    pub fn monomial_coefficients(&self, j: usize) -> Option<[Complex64; 2]> {
        let [c, d] = self.coefficients[j];
        self.layout.layers[j].basis.monomial_coefficients(c, d)
    }

    /// Radial value and (unsigned) flux `Φ = a r^{d-1} ∂_r u` at `r`.
    pub fn radial(&self, r: f64, side: Side) -> (Complex64, Complex64) {
        let j = self.layout.layer_at(r, side);
        self.radial_on(j, r)
    }

    /// Value and flux of the layer-`j` expression, also outside the layer.
    pub fn radial_on(&self, j: usize, r: f64) -> (Complex64, Complex64) {
        let b = &self.layout.layers[j].basis;
        let [c, d] = self.coefficients[j];
        let (mut u, mut f) = (Complex64::default(), Complex64::default());
        if !is_zero(c) || !is_zero(d) {
            let v = b.values(r);
            let fl = b.fluxes(r);
            if !is_zero(c) {
                u += c * v[0];
                f += c * fl[0];
            }
            if !is_zero(d) {
                u += d * v[1];
                f += d * fl[1];
            }
        }
        (u, f)
    }

    /// Signed flux `s_δ Φ` at `r`.
    pub fn signed_flux(&self, r: f64, side: Side) -> Complex64 {
        let j = self.layout.layer_at(r, side);
        let s = layer_sign(self.layout.layers[j].plasmonic, self.delta);
        s * self.radial_on(j, r).1
    }

    /// `∫ r^{d-1}(|R'|² + λ|R|²/r²) dr` over `[lo, hi]`, without angular weight.
    pub fn gradient_energy(&self, lo: f64, hi: f64) -> f64 {
        self.accumulate(lo, hi, |b, c, d, a, z| b.gradient_energy(c, d, a, z))
    }

    /// `∫ r^{d-1}|R|² dr` over `[lo, hi]`, without angular weight.
    pub fn l2_energy(&self, lo: f64, hi: f64) -> f64 {
        self.accumulate(lo, hi, |b, c, d, a, z| b.l2_energy(c, d, a, z))
    }

    fn accumulate<F>(&self, lo: f64, hi: f64, f: F) -> f64
    where
        F: Fn(&crate::spectral::basis::RadialBasis, Complex64, Complex64, f64, f64) -> f64,
    {
        let mut total = 0.0;
        for (j, l) in self.layout.layers.iter().enumerate() {
            let (a, z) = (lo.max(l.inner), hi.min(l.outer));
            if z > a {
                let [c, d] = self.coefficients[j];
                total += f(&l.basis, c, d, a, z);
            }
        }
        total
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut m = self.clone();
        m.coefficients.iter_mut().for_each(|p| {
            p[0] *= alpha;
            p[1] *= alpha;
        });
        m
    }

    /// `self − other` for two modes sharing the same layout.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if !same_layout(&self.layout, &other.layout) || self.mode != other.mode {
            return Err(CalrError::Validation("mode fields live on different layouts".into()));
        }
        let mut m = self.clone();
        for (p, q) in m.coefficients.iter_mut().zip(&other.coefficients) {
            p[0] -= q[0];
            p[1] -= q[1];
        }
        Ok(m)
    }
}

fn same_layout(a: &Arc<DegreeLayout>, b: &Arc<DegreeLayout>) -> bool {
    Arc::ptr_eq(a, b)
        || (a.degree == b.degree
            && a.layers.len() == b.layers.len()
            && a.layers.iter().zip(&b.layers).all(|(x, y)| x.inner == y.inner && x.outer == y.outer))
}

/// Sum of angular modes, each with its radial solution.
#[derive(Clone, Debug)]
pub struct Field {
    dimension: usize,
    delta: f64,
    omega_radius: f64,
    modes: Vec<ModeField>,
    cutoff: usize,
    dropped_modes: usize,
}

impl Field {
    pub fn from_modes(
        dimension: usize,
        delta: f64,
        omega_radius: f64,
        mut modes: Vec<ModeField>,
        cutoff: usize,
        dropped_modes: usize,
    ) -> Self {
        modes.sort_by_key(|m| m.mode);
        Field { dimension, delta, omega_radius, modes, cutoff, dropped_modes }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega_radius(&self) -> f64 {
        self.omega_radius
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Source modes above the cutoff that were not solved.
    pub fn dropped_modes(&self) -> usize {
        self.dropped_modes
    }

    pub fn modes(&self) -> &[ModeField] {
        &self.modes
    }

    pub fn mode(&self, mode: Mode) -> Option<&ModeField> {
        self.modes.binary_search_by_key(&mode, |m| m.mode).ok().map(|i| &self.modes[i])
    }

    /// Modes with at least one non-zero coefficient.
    pub fn active_modes(&self) -> Vec<Mode> {
        self.modes
            .iter()
            .filter(|m| m.coefficients.iter().any(|p| !is_zero(p[0]) || !is_zero(p[1])))
            .map(|m| m.mode)
            .collect()
    }

    /// Field value at the point `x` (length `d`).
    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dimension {
            return Err(CalrError::Domain(format!("expected a {}-dimensional point", self.dimension)));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r > self.omega_radius {
            return Err(CalrError::Domain(format!("|x| = {r} lies outside Ω")));
        }
        let mut total = Complex64::default();
        for m in &self.modes {
            if r == 0.0 && m.mode.degree > 0 {
                continue;
            }
            let (u, _) = m.radial(r, Side::Outer);
            if !is_zero(u) {
                total += u * harmonic_at(m.mode, self.dimension, x);
            }
        }
        Ok(total)
    }

    /// `∫_{lo<|x|<hi} |∇u|²`.
    pub fn h1_energy(&self, lo: f64, hi: f64) -> f64 {
        angular_weight(self.dimension) * self.modes.iter().map(|m| m.gradient_energy(lo, hi)).sum::<f64>()
    }

    /// `∫_{lo<|x|<hi} |u|²`.
    pub fn l2_energy(&self, lo: f64, hi: f64) -> f64 {
        angular_weight(self.dimension) * self.modes.iter().map(|m| m.l2_energy(lo, hi)).sum::<f64>()
    }

    /// Full `H¹` norm on the annulus `lo < |x| < hi`.
    pub fn h1_norm(&self, lo: f64, hi: f64) -> f64 {
        (self.h1_energy(lo, hi) + self.l2_energy(lo, hi)).sqrt()
    }

    /// Trace coefficients `(mode, u_ℓ(R))`.
    pub fn trace_coefficients(&self, radius: f64, side: Side) -> Vec<(Mode, Complex64)> {
        self.modes.iter().map(|m| (m.mode, m.radial(radius, side).0)).collect()
    }

    /// Conormal flux coefficients `(mode, s_δ a ∂_r u)` at `R`.
    pub fn flux_coefficients(&self, radius: f64, side: Side) -> Vec<(Mode, Complex64)> {
        let scale = radius.powi(self.dimension as i32 - 1);
        self.modes.iter().map(|m| (m.mode, m.signed_flux(radius, side) / scale)).collect()
    }

    /// `H^s(∂B_R)` norm of the trace.
    pub fn trace_norm(&self, radius: f64, s: f64) -> f64 {
        let c = self.trace_coefficients(radius, Side::Outer);
        sobolev_trace_norm(c.iter().map(|(m, g)| (m.degree, *g)), radius, self.dimension, s)
    }

    /// `H^s(∂B_R)` norm of the conormal flux taken from `side`.
    pub fn flux_norm(&self, radius: f64, side: Side, s: f64) -> f64 {
        let c = self.flux_coefficients(radius, side);
        sobolev_trace_norm(c.iter().map(|(m, g)| (m.degree, *g)), radius, self.dimension, s)
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut f = self.clone();
        f.modes = self.modes.iter().map(|m| m.scaled(alpha)).collect();
        f
    }

    /// `self − other`, for fields sharing layouts and modes.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.modes.len() != other.modes.len() {
            return Err(CalrError::Validation("fields carry different mode sets".into()));
        }
        let modes = self
            .modes
            .iter()
            .zip(&other.modes)
            .map(|(a, b)| a.difference(b))
            .collect::<Result<Vec<_>>>()?;
        let mut f = self.clone();
        f.modes = modes;
        Ok(f)
    }
}

/// `(m(R) Σ (1 + ℓ²)^s |g|²)^{1/2}` over `(degree, coefficient)` pairs.
pub fn sobolev_trace_norm<I: IntoIterator<Item = (usize, Complex64)>>(coeffs: I, radius: f64, d: usize, s: f64) -> f64 {
    let sum: f64 = coeffs
        .into_iter()
        .map(|(l, g)| (1.0 + (l * l) as f64).powf(s) * g.norm_sqr())
        .sum();
    (trace_measure(radius, d) * sum).sqrt()
}
