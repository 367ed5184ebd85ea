//! Plasmon pairs: transmission identities, density of traces and rigidity.

use calr::analysis_checks::{
    density_residual, plasmon_pairs, rigidity_check_pairs, target_from_degrees, DensityFamily, PlasmonMedium,
};
use calr::cli::verify::random_smooth_target;
use calr::medium::RadialProfile;
use num_complex::Complex64;
use rand::SeedableRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for d in [2, 3] {
        let pairs = plasmon_pairs(&PlasmonMedium::new(RadialProfile::expression("2 + sin(r)")?, 0.5, 1.0, d)?, 64)?;
        let err = pairs.iter().skip(1).map(|p| p.trace_error.max(p.flux_error)).fold(0.0, f64::max);
        println!("{d}D: worst trace/flux identity error {err:.2e}");
        let target = target_from_degrees(d, &random_smooth_target(&mut rng, 96));
        for m in [8, 16, 32, 64] {
            let r = density_residual(&pairs, &target, DensityFamily::Joint, m)?;
            println!("  density residual m={m:>2}: {:.3e}", r.residual / r.target_norm);
        }
        let seeds = vec![Complex64::new(1.0, 0.5); pairs.len()];
        let rig = rigidity_check_pairs(&pairs, &seeds)?;
        println!("  rigidity: {} degenerate degrees, monopole flux {:.2e}", rig.degenerate.len(), rig.monopole_flux);
    }
    Ok(())
}
