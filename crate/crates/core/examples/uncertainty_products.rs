//! Heisenberg and Schrodinger-Robertson products in both regimes.
//!
//! The paraxial product is conserved; the exact one grows as the mode
//! phases dephase.

use grin_coherence::{Engine, Numerics, Regime, SourceSpec, WaveguideSpec};

fn main() -> grin_coherence::Result<()> {
    let guide = WaveguideSpec::new(1.5, 7e-3, 0.63)?;
    let engine = Engine::new(SourceSpec::new(10.0, 5.0, 10.0)?, guide, Numerics::default())?;
    let floor = 0.25 / guide.k().powi(2);
    println!("products in units of 1/(4k^2)");
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "z_um", "H exact", "SR exact", "H parax", "SR parax");
    for z in [0.0, 1e3, 1e4, 1e5, 5e5, 1e6, 2e6, 2.5e6] {
        let e = engine.moments_at(z, Regime::Exact)?;
        let p = engine.moments_at(z, Regime::Paraxial)?;
        println!(
            "{z:>10.0} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
            e.heisenberg() / floor,
            e.schrodinger_robertson() / floor,
            p.heisenberg() / floor,
            p.schrodinger_robertson() / floor
        );
    }
    Ok(())
}
