//! Builds the cloak around an annulus and prints its layer table.

use calr::cloak::build_cloak;
use calr::medium::{verify_complementarity, RadialProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = RadialProfile::expression("2 + sin(r)")?;
    for d in [2, 3] {
        let m = build_cloak(&a, 1.0, 4.0, 8.0, d)?;
        let check = verify_complementarity(&m, 256, 1e-10)?;
        println!("{d}D cloak, complementarity error {:.2e}", check.max_error());
        for l in &m.summary(2).layers {
            let s: Vec<String> = l.samples.iter().map(|(r, v)| format!("a({r:.4})={v:.4}")).collect();
            println!("  {:<15} [{:.4}, {:.4}]  plasmonic={:<5}  {}", format!("{:?}", l.role), l.inner, l.outer, l.plasmonic, s.join("  "));
        }
    }
    Ok(())
}
