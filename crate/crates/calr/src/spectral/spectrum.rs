//! Sources concentrated on a circle or sphere, stored by mode.
//!
//! The source is the single-layer distribution `f = g δ_{|x| = r₀}`, so the
//! flux `a ∂_r u` jumps by `g` across the sphere. Its coefficients are taken
//! against `e^{imθ}` in 2D and `Y_ℓ^k` in 3D.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CalrError, Result};
use crate::medium::LayeredMedium;
use crate::spectral::harmonics::{modes_of_degree, Mode};
use crate::spectral::system::check_source_radius;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    radius: f64,
    dimension: usize,
    coefficients: BTreeMap<Mode, Complex64>,
}

impl ModeSpectrum {
    pub fn new(radius: f64, dimension: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CalrError::Validation(format!("source radius must be positive, got {radius}")));
        }
        if dimension != 2 && dimension != 3 {
            return Err(CalrError::Validation(format!("dimension must be 2 or 3, got {dimension}")));
        }
        Ok(ModeSpectrum { radius, dimension, coefficients: BTreeMap::new() })
    }

    /// Sets the coefficient of `mode`; zero coefficients are not stored.
    pub fn with(mut self, mode: Mode, g: Complex64) -> Result<Self> {
        self.set(mode, g)?;
        Ok(self)
    }

    pub fn set(&mut self, mode: Mode, g: Complex64) -> Result<()> {
        if !mode.is_valid(self.dimension) {
            return Err(CalrError::Validation(format!("mode {mode:?} is not valid in {}D", self.dimension)));
        }
        if !(g.re.is_finite() && g.im.is_finite()) {
            return Err(CalrError::Validation(format!("non-finite coefficient for {mode:?}")));
        }
        if g == Complex64::new(0.0, 0.0) {
            self.coefficients.remove(&mode);
        } else {
            self.coefficients.insert(mode, g);
        }
        Ok(())
    }

    /// Single-mode source.
    pub fn single(radius: f64, dimension: usize, mode: Mode, g: Complex64) -> Result<Self> {
        Self::new(radius, dimension)?.with(mode, g)
    }

    /// `g = t^ℓ` for every degree up to `max_mode`: both orders `±ℓ` in 2D,
    /// the zonal harmonic `Y_ℓ^0` in 3D.
    pub fn geometric(radius: f64, dimension: usize, t: f64, max_mode: usize) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CalrError::Validation(format!("geometric ratio must be positive, got {t}")));
        }
        let mut s = Self::new(radius, dimension)?;
        for l in 0..=max_mode {
            let g = Complex64::new(t.powi(l as i32), 0.0);
            if g.re == 0.0 {
                break;
            }
            if dimension == 2 {
                for m in modes_of_degree(l, 2) {
                    s.set(m, g)?;
                }
            } else {
                s.set(Mode::new(l, 0), g)?;
            }
        }
        Ok(s)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn coefficient(&self, mode: Mode) -> Complex64 {
        self.coefficients.get(&mode).copied().unwrap_or_default()
    }

    /// Stored modes in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (Mode, Complex64)> + '_ {
        self.coefficients.iter().map(|(m, g)| (*m, *g))
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Distinct degrees, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.coefficients.keys().map(|m| m.degree).collect();
        v.dedup();
        v
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.coefficients.keys().next_back().map(|m| m.degree)
    }

    /// `Σ (1 + ℓ)|g|²`, finite by construction for stored spectra.
    pub fn energy(&self) -> f64 {
        self.iter().map(|(m, g)| (1.0 + m.degree as f64) * g.norm_sqr()).sum()
    }

    /// Aggregate magnitude per degree, `(Σ_k |g_{ℓ,k}|²)^{1/2}`.
    pub fn degree_magnitudes(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (m, g) in self.iter() {
            *out.entry(m.degree).or_insert(0.0) += g.norm_sqr();
        }
        out.values_mut().for_each(|v| *v = v.sqrt());
        out
    }

    /// Tail size `|g_L| · ρ^L` at the cutoff, for a per-mode growth ratio `ρ`.
    pub fn tail_estimate(&self, cutoff: usize, growth_ratio: f64) -> f64 {
        let mags = self.degree_magnitudes();
        let g = mags.range(..=cutoff).next_back().map(|(_, v)| *v).unwrap_or(0.0);
        g * growth_ratio.powi(cutoff as i32)
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut s = self.clone();
        s.coefficients.values_mut().for_each(|g| *g *= alpha);
        s.coefficients.retain(|_, g| *g != Complex64::new(0.0, 0.0));
        s
    }

    /// `self + other` on the same sphere.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.radius != other.radius || self.dimension != other.dimension {
            return Err(CalrError::Validation("spectra live on different spheres".into()));
        }
        let mut s = self.clone();
        for (m, g) in other.iter() {
            let v = s.coefficient(m) + g;
            s.set(m, v)?;
        }
        Ok(s)
    }

    /// Keeps degrees `≤ cutoff`.
    pub fn truncated(&self, cutoff: usize) -> Self {
        let mut s = self.clone();
        s.coefficients.retain(|m, _| m.degree <= cutoff);
        s
    }

    /// The source must sit strictly inside `Ω` and off every material interface.
    pub fn check_against(&self, medium: &LayeredMedium) -> Result<()> {
        if medium.dimension() != self.dimension {
            return Err(CalrError::Validation("source and medium dimensions differ".into()));
        }
        check_source_radius(medium, self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_spectra() {
        let s = ModeSpectrum::geometric(1.5, 2, 0.5, 3).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s.coefficient(Mode::planar(-3)).re, 0.125);
        let z = ModeSpectrum::geometric(1.5, 3, 0.5, 3).unwrap();
        assert_eq!(z.len(), 4);
        assert_eq!(z.degrees(), vec![0, 1, 2, 3]);
        assert!(ModeSpectrum::geometric(1.5, 2, -0.5, 3).is_err());
    }

    #[test]
    fn energy_and_linear_ops() {
        let a = ModeSpectrum::single(1.0, 2, Mode::planar(2), Complex64::new(1.0, 1.0)).unwrap();
        assert_eq!(a.energy(), 6.0);
        let b = a.scaled(Complex64::new(-1.0, 0.0));
        assert!(a.add(&b).unwrap().is_empty());
        assert!(a.clone().with(Mode::new(2, 1), Complex64::new(1.0, 0.0)).is_err());
    }
}
