//! Reflects a resonant solution, removes its localized singular part and
//! tracks the jumps of the glued field and the auxiliary field `W_δ`.

use calr::cloak::build_cloak;
use calr::medium::RadialProfile;
use calr::resonance::{extendability_test, log_delta_grid, run_sweep};
use calr::singularity::{reflect, remove_singularity, w_delta_sweep};
use calr::spectral::ModeSpectrum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = build_cloak(&RadialProfile::constant(1.0), 1.0, 4.0, 8.0, 2)?;
    let src = ModeSpectrum::geometric(1.5, 2, 0.85, 200)?;
    let deltas = log_delta_grid(1e-3, 1e-9, 4);
    let sweep = run_sweep(&m, &src, &deltas, 200)?;
    println!("delta       [V](r2)     [flux](r2)  [V](r3)     [flux](r3)  glued residual");
    for (f, d) in sweep.fields.iter().zip(&deltas) {
        let Some(u) = f else { continue };
        let part = remove_singularity(&reflect(u, &m)?, u, &m)?;
        let j = part.jumps;
        println!(
            "{d:.3e}  {:.3e}  {:.3e}  {:.3e}  {:.3e}  {:.1e}",
            j.trace_r2, j.flux_r2, j.trace_r3, j.flux_r3, part.glued_residual
        );
    }

    for r0 in [1.5, 2.5] {
        let src = ModeSpectrum::geometric(r0, 2, 0.6, 200)?;
        let ext = extendability_test(&src, &m, 4.0, 200)?;
        let Some(w) = ext.w_coefficients else { continue };
        let s = w_delta_sweep(&w, &log_delta_grid(1e-2, 1e-8, 13))?;
        println!("r0={r0}: slope of ||W|| {:+.4}, slope of ||h|| {:+.4}", s.w_slope, s.h_slope);
    }
    Ok(())
}
