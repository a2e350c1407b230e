//! Assembled propagation problem: a decomposed source launched into a
//! waveguide, with the basis sized so the coupling is complete.

use crate::coupling::{mean_mode_number, overlap_matrix_unchecked, CouplingMatrix, DEFAULT_COMP_TOL};
use crate::error::{Error, Result};
use crate::evolution::{intensity_profile, Bands, CoherenceMatrix, IntensityProfile, Propagator};
use crate::hgbasis::{quadrature_for, ModeFamily, QuadratureRule};
use crate::observables::{moments_from_bands, Moments};
use crate::source::{decompose, SourceDecomposition, SourceSpec};
use crate::waveguide::{characteristic_lengths, default_mode_count, m_guided, mean_mode_estimate, CharacteristicLengths, ModeBasis, Regime, WaveguideSpec};

/// Numerical knobs. `None` means "derive from the physical scales".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub tail_tol: f64,
    pub comp_tol: f64,
    /// Fixed waveguide mode count; auto-sized and grown until both the norm
    /// and the mode-number sum of every source mode are within `comp_tol`
    /// when unset.
    pub modes: Option<usize>,
    /// Node-count multiplier for the overlap quadrature.
    pub quad_oversample: f64,
    /// Extra margin (um) on each side of the overlap window.
    pub quad_safety: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { tail_tol: 1e-12, comp_tol: DEFAULT_COMP_TOL, modes: None, quad_oversample: 1.0, quad_safety: 5.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    pub source: SourceSpec,
    pub guide: WaveguideSpec,
    pub numerics: Numerics,
    dec: SourceDecomposition,
    basis: ModeBasis,
    rule: QuadratureRule,
    coupling: CouplingMatrix,
    propagator: Propagator,
}

fn overlap_rule(dec: &SourceDecomposition, basis: &ModeBasis, x0: f64, n: &Numerics) -> Result<QuadratureRule> {
    quadrature_for(
        &[
            ModeFamily { scale: dec.mode_scale(), center: x0, max_order: dec.order },
            ModeFamily { scale: basis.scale, center: 0.0, max_order: basis.len() - 1 },
        ],
        n.quad_oversample,
        n.quad_safety,
    )
}

impl Engine {
    pub fn new(source: SourceSpec, guide: WaveguideSpec, numerics: Numerics) -> Result<Self> {
        source.validate()?;
        guide.validate()?;
        let dec = decompose(&source, numerics.tail_tol)?;
        let limit = m_guided(&guide).map(|c| c + 1).unwrap_or(usize::MAX);
        let mut modes = numerics.modes.unwrap_or_else(|| default_mode_count(&guide, &source, &dec)).min(limit);
        loop {
            let basis = ModeBasis::new(guide, modes)?;
            let rule = overlap_rule(&dec, &basis, source.x0, &numerics)?;
            let coupling = overlap_matrix_unchecked(&dec, &basis, source.x0, &rule)?;
            let (p, worst) = coupling.worst_completeness();
            let (pn, worst_n) = coupling.worst_number_completeness();
            let (p, worst) = if worst_n < worst { (pn, worst_n) } else { (p, worst) };
            if worst >= 1.0 - numerics.comp_tol {
                let propagator = Propagator::new(&coupling, &dec, &basis)?;
                return Ok(Engine { source, guide, numerics, dec, basis, rule, coupling, propagator });
            }
            if numerics.modes.is_some() || modes >= limit {
                return Err(Error::Incomplete { p, achieved: worst, tolerance: numerics.comp_tol });
            }
            modes = (modes + (modes / 4).max(16)).min(limit);
        }
    }

    pub fn decomposition(&self) -> &SourceDecomposition {
        &self.dec
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    /// The overlap quadrature; its window holds every retained mode.
    pub fn quadrature(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn lengths(&self) -> CharacteristicLengths {
        characteristic_lengths(&self.guide)
    }

    pub fn mean_mode_number(&self) -> f64 {
        mean_mode_number(&self.coupling, &self.dec)
    }

    pub fn gamma_at(&self, z: f64, regime: Regime) -> CoherenceMatrix {
        self.propagator.gamma_at(z, regime)
    }

    pub fn bands_at(&self, z: f64, regime: Regime) -> Bands {
        self.propagator.bands_at(z, regime)
    }

    /// Second-order moments in O(M), without forming `G(z)`.
    pub fn moments_at(&self, z: f64, regime: Regime) -> Result<Moments> {
        moments_from_bands(&self.bands_at(z, regime), &self.guide)
    }

    /// Default profile grid: `points` samples over
    /// `+-(|x0| + 6 max(a0, w0 sqrt(m + 1)))`.
    pub fn default_grid(&self, points: usize) -> Vec<f64> {
        let w0 = self.guide.waist();
        let mbar = mean_mode_estimate(&self.guide, &self.source);
        let half = self.source.x0.abs() + 6.0 * self.source.a0.max(w0 * (mbar + 1.0).sqrt());
        symmetric_grid(half, points)
    }

    pub fn profile(&self, z: f64, regime: Regime, grid: &[f64]) -> Result<IntensityProfile> {
        intensity_profile(&self.gamma_at(z, regime), &self.basis, grid)
    }
}

/// `points` equispaced samples on `[-half, half]`, exactly symmetric.
pub fn symmetric_grid(half: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0; points];
    }
    let h = 2.0 * half / (points - 1) as f64;
    let mid = (points - 1) as f64 / 2.0;
    (0..points)
        .map(|i| {
            let j = i as f64 - mid;
            if i as f64 >= mid { h * j } else { -(h * (-j)) }
        })
        .collect()
}
