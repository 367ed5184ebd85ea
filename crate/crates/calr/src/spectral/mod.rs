//! Per-mode solution of `div(s_δ a ∇u) = f` in radially layered media.
//!
//! The field separates into angular modes; each radial part is a combination
//! of an anchored fundamental pair per layer, and the layer coefficients solve
//! a small dense transmission system (see [`system`]).

pub mod basis;
pub mod field;
pub mod harmonics;
pub mod spectrum;
pub mod system;

pub use basis::RadialBasis;
pub use field::{sobolev_trace_norm, Field, ModeField};
pub use harmonics::{angular_weight, separation_constant, Mode};
pub use spectrum::ModeSpectrum;
pub use system::{
    assemble_mode_system, layer_sign, solve_field, DegreeLayout, ModeSolver, ModeSystem, Side, SolverLayer,
};

use crate::error::Result;
use crate::medium::RadialProfile;

/// Fundamental pair of `(a r^{d-1} u')' = ℓ(ℓ+d−2) a r^{d-3} u` on `[lo, hi]`.
pub fn fundamental_pair(a: &RadialProfile, degree: usize, interval: (f64, f64), d: usize) -> Result<RadialBasis> {
    RadialBasis::new(a, degree, d, interval.0, interval.1)
}
