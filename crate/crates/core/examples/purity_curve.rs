//! Purity and von Neumann entropy of a GSM source as r0/a0 varies.
//!
//! Both quantities come from the coherent-mode spectrum and from the
//! eigenvalues of the coherence matrix in the waveguide basis.

use grin_coherence::observables::{entropy_numeric, purity_numeric};
use grin_coherence::source::{decompose, entropy, purity_closed_form};
use grin_coherence::{Engine, Numerics, Regime, SourceSpec, WaveguideSpec};

fn main() -> grin_coherence::Result<()> {
    let guide = WaveguideSpec::new(1.5, 7e-3, 0.63)?;
    let a0 = 10.0;
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "r0/a0", "P", "P (G)", "S", "S (G)");
    for ratio in [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let src = SourceSpec::new(a0, ratio * a0, 0.0)?;
        let dec = decompose(&src, 1e-12)?;
        let engine = Engine::new(src, guide, Numerics::default())?;
        let g = engine.gamma_at(0.0, Regime::Exact);
        println!(
            "{ratio:>8.2} {:>10.6} {:>10.6} {:>10.5} {:>10.5}",
            purity_closed_form(&dec),
            purity_numeric(&g),
            entropy(&dec),
            entropy_numeric(&g)
        );
    }
    Ok(())
}
