//! A cloaked source next to a visible one, in the same medium.

use calr::cloak::{build_cloak, cloak_demo};
use calr::medium::RadialProfile;
use calr::resonance::{default_delta_grid, VerdictClass};
use calr::spectral::ModeSpectrum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = build_cloak(&RadialProfile::constant(1.0), 1.0, 4.0, 8.0, 2)?;
    // g_ℓ = t^ℓ on r = 1.5 extends to 1.5/t; the critical radius is 2
    for (t, label) in [(0.9, "source close to the shell"), (0.5, "source that extends past the critical radius")] {
        let src = ModeSpectrum::geometric(1.5, 2, t, 200)?;
        let rep = cloak_demo(&m, &src, &default_delta_grid(), 200)?;
        let show = |x: Option<f64>| x.map_or("unknown".to_string(), |r| format!("{r:.4}"));
        let cloaked = match (rep.cloaked, rep.verdict.class) {
            (Some(true), _) => "yes",
            (Some(false), _) => "no, the far field does not fade",
            (None, VerdictClass::Bounded) => "no, bounded power leaves the source visible",
            (None, _) => "undecided",
        };
        println!("{label} (t = {t})");
        println!("  extends to {}, critical radius {:.4}", show(rep.max_extension), rep.critical_radius);
        match rep.predicted {
            Some(p) => println!("  predicted {p:?}, observed {:?}", rep.verdict.class),
            None => println!("  no prediction, observed {:?}", rep.verdict.class),
        }
        println!("  far-field decay of v {:.3e}, cloaked: {cloaked}", rep.far_field.v_decay_factor);
        for f in &rep.flags {
            println!("  note: {f}");
        }
    }
    Ok(())
}
