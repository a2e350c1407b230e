//! Squeezing parameter over the first few oscillation periods.

use grin_coherence::observables::squeezing;
use grin_coherence::{Engine, Numerics, Regime, SourceSpec, WaveguideSpec};

fn main() -> grin_coherence::Result<()> {
    let guide = WaveguideSpec::new(1.5, 7e-3, 0.63)?;
    let engine = Engine::new(SourceSpec::new(10.0, 10.0, 10.0)?, guide, Numerics::default())?;
    let nu: Vec<(f64, f64)> = (0..=3000)
        .map(|i| 2.0 * i as f64)
        .map(|z| (z, squeezing(&engine.moments_at(z, Regime::Exact).unwrap(), guide.omega)))
        .collect();
    let peaks: Vec<f64> = nu.windows(3).filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1).map(|w| w[1].0).collect();
    println!("nu(0) = {:.4}", nu[0].1);
    println!("maxima at {peaks:?} um");
    println!("expected spacing pi n0 / omega = {:.2} um", engine.lengths().l_osc);
    Ok(())
}
