//! Two mirror-image sources at +x0 and -x0. Each alone shows fringes in the
//! overlap region; their incoherent sum does not.

use grin_coherence::evolution::{fringe_visibility, mixture_profile};
use grin_coherence::{Engine, Numerics, Regime, SourceSpec, WaveguideSpec};

fn main() -> grin_coherence::Result<()> {
    let guide = WaveguideSpec::new(1.5, 7e-3, 0.63)?;
    let src = SourceSpec::new(10.0, 5.0, 20.0)?;
    let plus = Engine::new(src, guide, Numerics::default())?;
    let minus = Engine::new(src.with_x0(-20.0), guide, Numerics::default())?;
    let z = 2_115_320.0;
    let grid = plus.default_grid(2048);
    let a = plus.profile(z, Regime::Exact, &grid)?;
    let b = minus.profile(z, Regime::Exact, &grid)?;
    let sum = mixture_profile(&[a.clone(), b.clone()], &[0.5, 0.5])?;

    let window = (-10.0, 10.0);
    for (name, p) in [("+x0", &a), ("-x0", &b), ("mixture", &sum)] {
        let v = fringe_visibility(p, window)?;
        println!("{name:>8}: visibility {:.3}, turning points {}, fringes {}", v.value, v.extrema, v.has_fringes);
    }
    Ok(())
}
