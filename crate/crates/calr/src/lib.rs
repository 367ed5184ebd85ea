//! Anomalous localized resonance and cloaking in radially layered quasistatic media.
//!
//! The problem is `div(A_δ ∇u_δ) = f` in a ball `Ω ⊂ ℝ^d`, `d ∈ {2, 3}`, with a
//! plasmonic shell carrying the coefficient `−a + iδ`. Every layer is radial,
//! so the field separates into angular modes and each mode reduces to a small
//! transmission system over the layer interfaces. That makes the resonance
//! measurable at very small loss: the dissipated power `E_δ = δ∫|∇u_δ|²` either
//! blows up as `δ → 0` (the source is cloaked) or stays bounded.
//!
//! Modules:
//!
//! - [`medium`]: radial profiles, change-of-variable push-forwards and the
//!   doubly complementary construction.
//! - [`spectral`]: per-degree fundamental pairs, the transmission system and
//!   the assembled [`spectral::Field`].
//! - [`resonance`]: δ sweeps, the blow-up classifier, the far-field
//!   dichotomy, extendability of the source and the critical radius.
//! - [`singularity`]: reflection of the solution through the complementary
//!   maps, removal of the localized singular part and the auxiliary field `W_δ`.
//! - [`analysis_checks`]: three-spheres log-convexity, the plasmon pairs
//!   `(v_ℓ, w_ℓ)`, density of their traces and the rigidity determinants.
//! - [`cloak`]: end-to-end cloaking demonstration.
//! - [`cli`]: JSON configuration, bit-stable CSV/JSON output and the `calr` binary.
//!
//! Examples (`cargo run --release --example <name>`):
//!
//! - `build_cloak`: the medium around an annulus and its complementarity check.
//! - `mode_solve`: one field, its per-mode coefficients and energy split.
//! - `resonance_sweep`: power sweep, verdict and critical radius.
//! - `singularity_removal`: jumps of the glued field and `W_δ` rates.
//! - `three_spheres`: the log-convexity check on random harmonics.
//! - `plasmon_pairs`: plasmon identities, density and rigidity.
//! - `cloak_demo`: a cloaked source next to a visible one.
//!
//! ```
//! use calr::cloak::build_cloak;
//! use calr::medium::RadialProfile;
//! use calr::resonance::{classify, default_delta_grid, run_sweep, VerdictClass};
//! use calr::spectral::ModeSpectrum;
//!
//! let m = build_cloak(&RadialProfile::constant(1.0), 1.0, 4.0, 8.0, 2)?;
//! let src = ModeSpectrum::geometric(1.5, 2, 0.85, 200)?;
//! let sweep = run_sweep(&m, &src, &default_delta_grid(), 200)?;
//! assert_eq!(classify(&sweep.rows)?.class, VerdictClass::BlowUp);
//! # Ok::<(), calr::error::CalrError>(())
//! ```

pub mod analysis_checks;
pub mod cli;
pub mod cloak;
pub mod error;
pub mod medium;
pub mod quadrature;
pub mod resonance;
pub mod singularity;
pub mod spectral;
