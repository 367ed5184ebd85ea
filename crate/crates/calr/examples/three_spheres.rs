//! Three-spheres log-convexity on single modes and random harmonics.

use calr::analysis_checks::three_spheres_check;
use calr::cli::verify::random_harmonic;
use calr::spectral::Mode;
use num_complex::Complex64;
use rand::SeedableRng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let radii = [1.0, 2.0, 4.0];
    for l in [1, 4, 16, 32] {
        let v = [(Mode::planar(l), Complex64::new(0.5, 0.0)), (Mode::planar(-l), Complex64::new(0.5, 0.0))];
        let r = three_spheres_check(&v, radii, 2)?;
        println!("r^{l} cos {l}θ: ratio - 1 = {:+.3e}", r.ratio - 1.0);
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for k in 0..5 {
        let r = three_spheres_check(&random_harmonic(&mut rng, 20), radii, 2)?;
        println!("random harmonic {k}: ratio {:.6} (alpha {:.4})", r.ratio, r.alpha);
    }
    Ok(())
}
