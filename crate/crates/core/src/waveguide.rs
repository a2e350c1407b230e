//! Parabolic graded-index waveguide: mode shapes, propagation constants
//! and the characteristic lengths of the dynamics.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{ensure_positive, Error, Result};
use crate::hgbasis::hermite_function;
use crate::source::{SourceDecomposition, SourceSpec};

/// Medium with `n^2 = n0^2 - omega^2 x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideSpec {
    pub n0: f64,
    /// Gradient parameter, um^-1.
    pub omega: f64,
    /// Vacuum wavelength, um.
    pub wavelength: f64,
}

/// Which propagation constants drive the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `k n0 sqrt(1 - 2 omega (m + 1/2) / (k n0^2))`.
    Exact,
    /// First-order expansion `k n0 - (omega / n0)(m + 1/2)`; equidistant.
    Paraxial,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Exact => "exact",
            Regime::Paraxial => "paraxial",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" | "nonparaxial" => Ok(Regime::Exact),
            "paraxial" => Ok(Regime::Paraxial),
            other => Err(Error::Config(format!("unknown regime `{other}` (expected exact or paraxial)"))),
        }
    }
}

impl WaveguideSpec {
    pub fn new(n0: f64, omega: f64, wavelength: f64) -> Result<Self> {
        let spec = Self { n0, omega, wavelength };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n0.is_finite() && self.n0 > 1.0) {
            return Err(Error::InvalidParameter { name: "n0", reason: format!("must exceed 1, got {}", self.n0) });
        }
        ensure_positive("omega", self.omega)?;
        ensure_positive("wavelength", self.wavelength)
    }

    /// Vacuum wavenumber, um^-1.
    pub fn k(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Inverse width `sqrt(k omega)` of the waveguide modes.
    pub fn mode_scale(&self) -> f64 {
        (self.k() * self.omega).sqrt()
    }

    /// `2 omega (m + 1/2) / (k n0^2)`, the argument under the square root.
    fn detuning(&self, m: usize) -> f64 {
        2.0 * self.omega * (m as f64 + 0.5) / (self.k() * self.n0 * self.n0)
    }

    /// Fundamental-mode waist `sqrt(2 / (k omega))`.
    pub fn waist(&self) -> f64 {
        (2.0 / (self.k() * self.omega)).sqrt()
    }
}

/// Propagation constant of mode `m` (um^-1).
pub fn beta(spec: &WaveguideSpec, m: usize, regime: Regime) -> Result<f64> {
    match regime {
        Regime::Exact => {
            let u = spec.detuning(m);
            if u >= 1.0 {
                let cutoff = m_guided(spec).unwrap_or(usize::MAX);
                return Err(Error::BeyondCutoff { m, cutoff });
            }
            Ok(spec.k() * spec.n0 * (1.0 - u).sqrt())
        }
        Regime::Paraxial => Ok(spec.k() * spec.n0 - spec.omega / spec.n0 * (m as f64 + 0.5)),
    }
}

/// `beta_m - beta_n` without cancellation between two O(k n0) numbers.
pub fn beta_difference(spec: &WaveguideSpec, m: usize, n: usize, regime: Regime) -> Result<f64> {
    match regime {
        Regime::Exact => {
            let (um, un) = (spec.detuning(m), spec.detuning(n));
            if um >= 1.0 || un >= 1.0 {
                let cutoff = m_guided(spec).unwrap_or(usize::MAX);
                return Err(Error::BeyondCutoff { m: m.max(n), cutoff });
            }
            let kn = spec.k() * spec.n0;
            Ok(kn * (un - um) / ((1.0 - um).sqrt() + (1.0 - un).sqrt()))
        }
        Regime::Paraxial => Ok(-(spec.omega / spec.n0) * (m as f64 - n as f64)),
    }
}

/// Highest guided mode index, or `None` when the cutoff lies beyond any
/// addressable mode count (vanishing gradient).
pub fn m_guided(spec: &WaveguideSpec) -> Option<usize> {
    let bound = spec.k() * spec.n0 * spec.n0 / (2.0 * spec.omega) - 0.5;
    if !bound.is_finite() || bound > 1e15 {
        return None;
    }
    // largest m with m < bound
    let mut m = bound.floor().max(0.0) as usize;
    if m as f64 >= bound && m > 0 {
        m -= 1;
    }
    Some(m)
}

/// Length scales of the modal dynamics (um). The revival and cat
/// distances are leading-order estimates; the numerical finder in
/// [`crate::cli`] locates the cat distance itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicLengths {
    /// Oscillation period of second moments, `pi n0 / omega`.
    pub l_osc: f64,
    /// `pi n0 / eta` with `eta = omega^2 / (k n0^2)`.
    pub z_rev_estimate: f64,
    /// `z_rev_estimate / 2`.
    pub z_cat_estimate: f64,
    /// Fundamental-mode waist.
    pub w0: f64,
}

pub fn characteristic_lengths(spec: &WaveguideSpec) -> CharacteristicLengths {
    let eta = spec.omega * spec.omega / (spec.k() * spec.n0 * spec.n0);
    let z_rev = PI * spec.n0 / eta;
    CharacteristicLengths {
        l_osc: PI * spec.n0 / spec.omega,
        z_rev_estimate: z_rev,
        z_cat_estimate: 0.5 * z_rev,
        w0: spec.waist(),
    }
}

/// Mean waveguide mode index excited by a Gaussian-Schell source, from
/// its second moments: `(k w/2)(a0^2/4 + x0^2) + (1/(2 k w))(1/a0^2 + 2/r0^2) - 1/2`.
pub fn mean_mode_estimate(spec: &WaveguideSpec, source: &SourceSpec) -> f64 {
    let (k, w) = (spec.k(), spec.omega);
    let sx2 = source.a0 * source.a0 / 4.0 + source.x0 * source.x0;
    let sp2 = (1.0 / (source.a0 * source.a0) + 2.0 * source.r0.inv_sq()) / (k * k);
    (0.5 * k * w * sx2 + 0.5 * k / w * sp2 - 0.5).max(0.0)
}

/// Default retained mode count, `m + 10 sqrt(m + 1) + P + 20` capped at the
/// number of guided modes.
pub fn default_mode_count(spec: &WaveguideSpec, source: &SourceSpec, dec: &SourceDecomposition) -> usize {
    let mbar = mean_mode_estimate(spec, source);
    let want = (mbar + 10.0 * (mbar + 1.0).sqrt()).ceil() as usize + dec.order + 20;
    match m_guided(spec) {
        Some(cut) => want.min(cut + 1),
        None => want,
    }
}

/// Retained waveguide modes with their propagation constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    pub spec: WaveguideSpec,
    /// `sqrt(k omega)`, um^-1.
    pub scale: f64,
    pub betas_exact: Vec<f64>,
    pub betas_paraxial: Vec<f64>,
}

impl ModeBasis {
    pub fn new(spec: WaveguideSpec, modes: usize) -> Result<Self> {
        spec.validate()?;
        if modes == 0 {
            return Err(Error::InvalidParameter { name: "modes", reason: "need at least one mode".into() });
        }
        if let Some(cut) = m_guided(&spec) {
            if modes > cut + 1 {
                return Err(Error::BeyondCutoff { m: modes - 1, cutoff: cut });
            }
        }
        let betas_exact = (0..modes).map(|m| beta(&spec, m, Regime::Exact)).collect::<Result<Vec<_>>>()?;
        let betas_paraxial = (0..modes).map(|m| beta(&spec, m, Regime::Paraxial)).collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, scale: spec.mode_scale(), betas_exact, betas_paraxial })
    }

    /// Number of retained modes `M`.
    pub fn len(&self) -> usize {
        self.betas_exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas_exact.is_empty()
    }

    pub fn betas(&self, regime: Regime) -> &[f64] {
        match regime {
            Regime::Exact => &self.betas_exact,
            Regime::Paraxial => &self.betas_paraxial,
        }
    }

    /// `beta_m - beta_ref` for every retained mode, computed without
    /// cancellation.
    pub fn relative_betas(&self, regime: Regime, reference: usize) -> Vec<f64> {
        (0..self.len())
            .map(|m| beta_difference(&self.spec, m, reference, regime).expect("retained modes are guided"))
            .collect()
    }

    /// Fills `out[m] = psi_m(x)` for every retained mode.
    pub fn modes_at(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        crate::hgbasis::hermite_functions(self.scale * x, out);
        let norm = self.scale.sqrt();
        out.iter_mut().for_each(|v| *v *= norm);
    }
}

/// `psi_m(x)`, normalized in `x` and centered on the axis.
pub fn waveguide_mode(basis: &ModeBasis, m: usize, x: f64) -> Result<f64> {
    if m >= basis.len() {
        return Err(Error::ModeOutOfRange { index: m, limit: basis.len() });
    }
    Ok(basis.scale.sqrt() * hermite_function(m, basis.scale * x))
}
