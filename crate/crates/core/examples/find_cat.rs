//! Locate the cat distance from the coherence-radius envelope and compare
//! with the estimate pi n0 / (2 eta).

use grin_coherence::cli::find_cat;
use grin_coherence::config::RunConfig;
use grin_coherence::Engine;

fn main() -> grin_coherence::Result<()> {
    for omega in ["7e-3", "3.5e-3"] {
        let cfg = RunConfig::from_str_with("", &[format!("waveguide.omega={omega}")])?;
        let engine = Engine::new(cfg.source_spec()?, cfg.waveguide_spec()?, cfg.engine_numerics())?;
        let cat = find_cat(&engine, &cfg)?;
        println!(
            "omega = {omega}: z_cat = {:.0} um (estimate {:.0}), r_c = {:.3} um, nu envelope = {:.3}",
            cat.z_cat,
            engine.lengths().z_cat_estimate,
            cat.r_c,
            cat.nu_envelope
        );
    }
    Ok(())
}
