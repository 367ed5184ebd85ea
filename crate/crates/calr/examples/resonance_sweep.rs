//! Sweeps δ for sources on either side of the blow-up threshold.

use calr::cloak::build_cloak;
use calr::medium::RadialProfile;
use calr::resonance::{classify, critical_radius, default_delta_grid, far_field_behaviour, run_sweep};
use calr::spectral::ModeSpectrum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = build_cloak(&RadialProfile::constant(1.0), 1.0, 4.0, 8.0, 2)?;
    let crit = critical_radius(&m)?;
    println!("critical radius {:.4} (exact: {})", crit.value, crit.exact);
    let r0 = 1.5;
    println!("threshold ratio t* = r0 / r_* = {:.4}", r0 / crit.value);
    for t in [0.6, 0.7, 0.8, 0.85, 0.9] {
        let src = ModeSpectrum::geometric(r0, 2, t, 200)?;
        let sweep = run_sweep(&m, &src, &default_delta_grid(), 200)?;
        let v = classify(&sweep.rows)?;
        let ff = far_field_behaviour(&sweep)?;
        println!(
            "t={t:.2}: {:<13} slope {:+.4}  v far-field decay {:>10.3e}  u Cauchy {}",
            format!("{:?}", v.class),
            v.slope,
            ff.v_decay_factor,
            ff.u_cauchy
        );
    }
    Ok(())
}
