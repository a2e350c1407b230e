//! Coherence radius along the guide: early decoherence, later partial
//! recovery near the cat distance.

use grin_coherence::observables::coherence_radius;
use grin_coherence::{Engine, Numerics, Regime, SourceSpec, WaveguideSpec};

fn main() -> grin_coherence::Result<()> {
    let guide = WaveguideSpec::new(1.5, 7e-3, 0.63)?;
    let engine = Engine::new(SourceSpec::new(10.0, 10.0, 10.0)?, guide, Numerics::default())?;
    let l_osc = engine.lengths().l_osc;
    println!("{} modes, L_osc = {l_osc:.2} um", engine.basis().len());

    // envelope: maximum of r_c over each oscillation period
    let envelope = |z0: f64| {
        (0..20)
            .map(|j| z0 + j as f64 * l_osc / 20.0)
            .map(|z| coherence_radius(&engine.moments_at(z, Regime::Exact).unwrap(), guide.k()))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    for z in [0.0, 10.0 * l_osc, 100.0 * l_osc, 5e5, 1e6, 1.5e6, 2.0e6, 2.138e6, 2.3e6] {
        println!("z = {z:>10.0} um   r_c envelope = {:>7.3} um", envelope(z));
    }
    Ok(())
}
