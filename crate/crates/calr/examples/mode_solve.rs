//! Solves one configuration at a single loss and splits the energy by degree.

use calr::cloak::build_cloak;
use calr::medium::RadialProfile;
use calr::resonance::{power, shell_energy};
use calr::spectral::{solve_field, ModeSpectrum};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = build_cloak(&RadialProfile::constant(1.0), 1.0, 4.0, 8.0, 2)?;
    let src = ModeSpectrum::geometric(1.5, 2, 0.85, 60)?;
    let delta = 1e-6;
    let u = solve_field(&m, &src, delta, 60)?;
    println!("delta = {delta:e}, power = {:.6e}, shell energy = {:.6e}", power(&u, &m, delta), shell_energy(&u, &m));
    println!("degree  order  |u(r0)|       shell gradient energy");
    for mf in u.modes().iter().filter(|mf| mf.mode.order >= 0 && mf.mode.degree % 10 == 0) {
        let (val, _) = mf.radial(1.5, calr::spectral::Side::Inner);
        println!("{:>6} {:>6}  {:.6e}  {:.6e}", mf.mode.degree, mf.mode.order, val.norm(), mf.gradient_energy(0.25, 1.0));
    }
    println!("u at (2, 0) = {:.6e}", u.evaluate(&[2.0, 0.0])?);
    Ok(())
}
