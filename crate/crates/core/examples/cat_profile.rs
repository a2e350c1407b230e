//! Intensity at the cat distance, split into the mode-mixture (diagonal)
//! and coherence (cross) parts. Writes cat_profile.csv to the temp dir.

use std::fs::File;
use std::io::BufWriter;

use grin_coherence::engine::symmetric_grid;
use grin_coherence::{Engine, Numerics, Regime, SourceSpec, WaveguideSpec};

fn main() -> grin_coherence::Result<()> {
    let guide = WaveguideSpec::new(1.5, 7e-3, 0.63)?;
    let engine = Engine::new(SourceSpec::new(10.0, 5.0, 20.0)?, guide, Numerics::default())?;
    let grid = symmetric_grid(60.0, 241);
    let p = engine.profile(2_115_000.0, Regime::Exact, &grid)?;

    let path = std::env::temp_dir().join("cat_profile.csv");
    p.write_csv(BufWriter::new(File::create(&path)?), true)?;

    let peak = p.max_total();
    for (i, x) in grid.iter().enumerate().step_by(4) {
        let bar = "#".repeat((60.0 * p.total[i] / peak).round() as usize);
        println!("{x:>8.1} {bar}");
    }
    println!("wrote {}", path.display());
    Ok(())
}
