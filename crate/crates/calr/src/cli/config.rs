//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "omega_radius": 8.0,
//!   "annulus": {"r2": 1.0, "r3": 4.0},
//!   "profile": {"kind": "constant", "value": 1.0},
//!   "source": {"radius": 1.5, "spectrum": {"kind": "geometric", "t": 0.85, "max_mode": 200}},
//!   "sweep": {"delta_start": 1e-2, "delta_end": 1e-10, "points": 17},
//!   "cutoff": 200
//! }
//! ```
//!
//! Explicit spectra list coefficients either as plain numbers (entry `ℓ` is
//! the real coefficient of degree `ℓ`, spread like the geometric family) or as
//! objects `{"degree", "order", "re", "im"}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cloak::build_cloak;
use crate::error::{CalrError, Result};
use crate::medium::{LayeredMedium, RadialProfile};
use crate::resonance::{log_delta_grid, ClassifierPolicy};
use crate::spectral::harmonics::modes_of_degree;
use crate::spectral::{Mode, ModeSpectrum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub dimension: usize,
    pub omega_radius: f64,
    pub annulus: AnnulusSpec,
    pub profile: ProfileSpec,
    pub source: SourceSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    pub cutoff: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusSpec {
    pub r2: f64,
    pub r3: f64,
}

/// Annulus coefficient: a constant or an expression in `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant { value: f64 },
    Expr { value: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub radius: f64,
    pub spectrum: SpectrumSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpectrumSpec {
    Geometric { t: f64, max_mode: usize },
    Explicit { coefficients: Vec<CoefficientSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Degree(f64),
    Mode {
        degree: usize,
        #[serde(default)]
        order: i64,
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

/// δ grid (descending, log-spaced) and optional classifier thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_start")]
    pub delta_start: f64,
    #[serde(default = "default_end")]
    pub delta_end: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub policy: Option<ClassifierPolicy>,
}

fn default_start() -> f64 {
    1e-2
}
fn default_end() -> f64 {
    1e-10
}
fn default_points() -> usize {
    17
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { delta_start: default_start(), delta_end: default_end(), points: default_points(), policy: None }
    }
}

impl SweepSpec {
    pub fn deltas(&self) -> Result<Vec<f64>> {
        let ok = |d: f64| d > 0.0 && d < 1.0;
        if !(ok(self.delta_start) && ok(self.delta_end)) || self.delta_end >= self.delta_start && self.points > 1 {
            return Err(CalrError::Validation(format!(
                "sweep needs 1 > delta_start > delta_end > 0, got {} and {}",
                self.delta_start, self.delta_end
            )));
        }
        if self.points == 0 {
            return Err(CalrError::Validation("sweep needs at least one point".into()));
        }
        Ok(log_delta_grid(self.delta_start, self.delta_end, self.points))
    }
}

impl ProfileSpec {
    pub fn profile(&self) -> Result<RadialProfile> {
        match self {
            ProfileSpec::Constant { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(CalrError::Validation(format!("constant profile must be positive, got {value}")));
                }
                Ok(RadialProfile::constant(*value))
            }
            ProfileSpec::Expr { value } => RadialProfile::expression(value),
        }
    }
}

impl SourceSpec {
    pub fn spectrum(&self, d: usize) -> Result<ModeSpectrum> {
        match &self.spectrum {
            SpectrumSpec::Geometric { t, max_mode } => ModeSpectrum::geometric(self.radius, d, *t, *max_mode),
            SpectrumSpec::Explicit { coefficients } => {
                let mut s = ModeSpectrum::new(self.radius, d)?;
                for (l, c) in coefficients.iter().enumerate() {
                    match *c {
                        CoefficientSpec::Degree(g) => {
                            let modes = if d == 2 { modes_of_degree(l, 2) } else { vec![Mode::new(l, 0)] };
                            for m in modes {
                                s.set(m, Complex64::new(g, 0.0))?;
                            }
                        }
                        CoefficientSpec::Mode { degree, order, re, im } => {
                            s.set(Mode::new(degree, order), Complex64::new(re, im))?;
                        }
                    }
                }
                if s.is_empty() {
                    return Err(CalrError::Validation("explicit spectrum has no nonzero coefficient".into()));
                }
                Ok(s)
            }
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CalrError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(CalrError::Validation(format!("dimension must be 2 or 3, got {}", self.dimension)));
        }
        if self.cutoff == 0 {
            return Err(CalrError::Validation("cutoff must be positive".into()));
        }
        let AnnulusSpec { r2, r3 } = self.annulus;
        let r0 = self.source.radius;
        if !(r2 < r0 && r0 < r3) {
            return Err(CalrError::Validation(format!("source radius {r0} must lie in the annulus ({r2}, {r3})")));
        }
        Ok(())
    }

    /// The doubly complementary cloak around the configured annulus.
    pub fn medium(&self) -> Result<LayeredMedium> {
        build_cloak(&self.profile.profile()?, self.annulus.r2, self.annulus.r3, self.omega_radius, self.dimension)
    }

    pub fn spectrum(&self) -> Result<ModeSpectrum> {
        self.source.spectrum(self.dimension)
    }

    /// The reference blow-up configuration: identity annulus `(1, 4)` in 2D,
    /// source on `r₀ = 1.5` with `g_ℓ = t^ℓ`.
    pub fn reference(t: f64) -> Self {
        Config {
            dimension: 2,
            omega_radius: 8.0,
            annulus: AnnulusSpec { r2: 1.0, r3: 4.0 },
            profile: ProfileSpec::Constant { value: 1.0 },
            source: SourceSpec { radius: 1.5, spectrum: SpectrumSpec::Geometric { t, max_mode: 200 } },
            sweep: SweepSpec::default(),
            cutoff: 200,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_schema() {
        let c = Config::from_json(
            r#"{"dimension":2,"omega_radius":8.0,"annulus":{"r2":1.0,"r3":4.0},
               "profile":{"kind":"expr","value":"2 + sin(r)"},
               "source":{"radius":1.5,"spectrum":{"kind":"explicit","coefficients":[0.0,1.0,{"degree":3,"order":-3,"re":0.5}]}},
               "sweep":{"delta_start":1e-2,"delta_end":1e-6,"points":5},"cutoff":32}"#,
        )
        .unwrap();
        let s = c.spectrum().unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.coefficient(Mode::new(3, -3)), Complex64::new(0.5, 0.0));
        assert_eq!(c.sweep.deltas().unwrap().len(), 5);
        let back: Config = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = Config::reference(0.8);
        c.source.radius = 5.0;
        assert!(c.validate().is_err());
        assert!(Config::from_json(r#"{"dimension":2}"#).is_err());
        let s = SweepSpec { delta_start: 1e-6, delta_end: 1e-2, ..SweepSpec::default() };
        assert!(s.deltas().is_err());
    }
}
