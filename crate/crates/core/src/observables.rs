//! Scalar diagnostics of the propagating beam.
//!
//! Position and angle operators act on the waveguide modes through ladder
//! operators with `[x, p] = i/k`:
//! `x = (a + a^+) / sqrt(2 k omega)` and `p = i sqrt(omega / (2k)) (a^+ - a)`,
//! so the fundamental mode saturates `sigma_x^2 sigma_p^2 >= 1/(4k^2)` and has
//! squeezing coefficient one.

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::evolution::{Bands, CoherenceMatrix};
use crate::source::entropy;
use crate::waveguide::{ModeBasis, Regime, WaveguideSpec};

/// First and central second-order moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_p: f64,
    /// um^2
    pub sigma_x2: f64,
    /// rad^2
    pub sigma_p2: f64,
    /// Symmetrized covariance, um rad.
    pub sigma_xp: f64,
}

impl Moments {
    /// Heisenberg product `sigma_x^2 sigma_p^2`.
    pub fn heisenberg(&self) -> f64 {
        self.sigma_x2 * self.sigma_p2
    }

    /// Schrodinger-Robertson combination `sigma_x^2 sigma_p^2 - sigma_xp^2`.
    pub fn schrodinger_robertson(&self) -> f64 {
        self.sigma_x2 * self.sigma_p2 - self.sigma_xp * self.sigma_xp
    }
}

/// Moments of the state described by `bands` in the modes of `spec`.
pub fn moments_from_bands(bands: &Bands, spec: &WaveguideSpec) -> Result<Moments> {
    let k = spec.k();
    let xq = 1.0 / (2.0 * k * spec.omega).sqrt();
    let pq = (spec.omega / (2.0 * k)).sqrt();

    let trace: f64 = bands.diag.iter().sum();
    if !(trace > 0.0) {
        return Err(Error::NumericalGuard(format!("coherence matrix trace {trace} is not positive")));
    }
    let number: f64 = bands.diag.iter().enumerate().map(|(m, d)| (2.0 * m as f64 + 1.0) * d).sum();
    let (mut re1, mut im1) = (0.0, 0.0);
    for (m, g) in bands.upper1.iter().enumerate() {
        let s = ((m + 1) as f64).sqrt();
        re1 += s * g.re;
        im1 += s * g.im;
    }
    let (mut re2, mut im2) = (0.0, 0.0);
    for (m, g) in bands.upper2.iter().enumerate() {
        let s = (((m + 1) * (m + 2)) as f64).sqrt();
        re2 += s * g.re;
        im2 += s * g.im;
    }
    let mean_x = 2.0 * xq * re1 / trace;
    let mean_p = -2.0 * pq * im1 / trace;
    let x2 = xq * xq * (number + 2.0 * re2) / trace;
    let p2 = pq * pq * (number - 2.0 * re2) / trace;
    let xp = -2.0 * xq * pq * im2 / trace;
    Ok(Moments {
        mean_x,
        mean_p,
        sigma_x2: x2 - mean_x * mean_x,
        sigma_p2: p2 - mean_p * mean_p,
        sigma_xp: xp - mean_x * mean_p,
    })
}

/// Moments of `G` in `basis`.
pub fn moments(g: &CoherenceMatrix, basis: &ModeBasis) -> Result<Moments> {
    if g.dim() != basis.len() {
        return Err(Error::InvalidParameter { name: "basis", reason: "dimension mismatch".into() });
    }
    moments_from_bands(&Bands::from_matrix(g), &basis.spec)
}

/// Coherence radius from second moments; `f64::INFINITY` in the coherent
/// limit.
pub fn coherence_radius(m: &Moments, k: f64) -> f64 {
    let floor = 1.0 / (4.0 * k * k);
    let excess = m.schrodinger_robertson() - floor;
    if excess <= 1e-12 * floor {
        return f64::INFINITY;
    }
    (2.0 * m.sigma_x2 / (k * k * excess)).sqrt()
}

/// Squeezing coefficient `omega sigma_x / sigma_p`.
pub fn squeezing(m: &Moments, omega: f64) -> f64 {
    omega * (m.sigma_x2 / m.sigma_p2).sqrt()
}

/// Overall degree of coherence `sum |G_mn|^2 / (tr G)^2`.
pub fn purity_numeric(g: &CoherenceMatrix) -> f64 {
    let tr = g.trace();
    g.g.iter().map(|c| c.norm_sqr()).sum::<f64>() / (tr * tr)
}

/// Entropy of the normalized eigenvalue spectrum of `G`; eigenvalues at
/// roundoff level are dropped.
pub fn entropy_numeric(g: &CoherenceMatrix) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(g.g.clone());
    let tr = g.trace();
    let cut = 1e-14 * tr;
    eig.eigenvalues
        .iter()
        .map(|l| l / tr)
        .filter(|&w| w > cut / tr)
        .map(|w| -w * w.ln())
        .sum()
}

/// Every diagnostic at one propagation distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub z: f64,
    pub regime: Regime,
    pub mean_x: f64,
    pub mean_p: f64,
    pub sigma_x2: f64,
    pub sigma_p2: f64,
    pub sigma_xp: f64,
    pub r_c: f64,
    pub nu: f64,
    pub up_h: f64,
    pub up_sr: f64,
    pub purity: f64,
    pub entropy: f64,
}

impl ObservableRecord {
    pub fn from_parts(z: f64, regime: Regime, m: &Moments, spec: &WaveguideSpec, purity: f64, entropy: f64) -> Self {
        ObservableRecord {
            z,
            regime,
            mean_x: m.mean_x,
            mean_p: m.mean_p,
            sigma_x2: m.sigma_x2,
            sigma_p2: m.sigma_p2,
            sigma_xp: m.sigma_xp,
            r_c: coherence_radius(m, spec.k()),
            nu: squeezing(m, spec.omega),
            up_h: m.heisenberg(),
            up_sr: m.schrodinger_robertson(),
            purity,
            entropy,
        }
    }

    pub const CSV_HEADER: &'static str = "z_um,sigma_x2,sigma_p2,sigma_xp,r_c_um,nu,up_h,up_sr,purity,entropy";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.z,
            self.sigma_x2,
            self.sigma_p2,
            self.sigma_xp,
            if self.r_c.is_finite() { format!("{:.12e}", self.r_c) } else { "inf".to_string() },
            self.nu,
            self.up_h,
            self.up_sr,
            self.purity,
            self.entropy
        )
    }
}

/// Builds `G(z)` and derives every observable from it.
pub fn record_at(engine: &Engine, z: f64, regime: Regime) -> Result<ObservableRecord> {
    let g = engine.gamma_at(z, regime);
    let m = moments(&g, engine.basis())?;
    Ok(ObservableRecord::from_parts(z, regime, &m, &engine.guide, purity_numeric(&g), entropy(engine.decomposition())))
}
