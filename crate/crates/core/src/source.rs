//! Coherent-mode decomposition of a displaced Gaussian-Schell-model source.
//!
//! The cross-spectral density at the input plane is
//! `I0 exp(-(x^2 + x'^2)/a0^2 - (x - x')^2/r0^2)` (centered on the beam).
//! It is diagonal in Hermite-Gauss modes of inverse width `sqrt(2c)` with
//! `c = sqrt(1/a0^4 + 2/(a0^2 r0^2))` and a geometric spectrum
//! `lambda_p ~ xi^p`, `xi = (1/r0^2) / (1/a0^2 + 1/r0^2 + c)`.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::hgbasis::hermite_function;

/// Transverse coherence radius of the source; `Infinite` is the fully
/// coherent beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoherenceRadius {
    Finite(f64),
    Infinite,
}

impl CoherenceRadius {
    pub fn from_f64(r0: f64) -> Self {
        if r0.is_infinite() && r0 > 0.0 {
            CoherenceRadius::Infinite
        } else {
            CoherenceRadius::Finite(r0)
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            CoherenceRadius::Finite(r) => r,
            CoherenceRadius::Infinite => f64::INFINITY,
        }
    }

    /// `1/r0^2`, zero for the coherent beam.
    pub fn inv_sq(self) -> f64 {
        match self {
            CoherenceRadius::Finite(r) => 1.0 / (r * r),
            CoherenceRadius::Infinite => 0.0,
        }
    }
}

impl fmt::Display for CoherenceRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoherenceRadius::Finite(r) => write!(f, "{r}"),
            CoherenceRadius::Infinite => f.write_str("inf"),
        }
    }
}

/// Gaussian-Schell-model source (lengths in um).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub a0: f64,
    pub r0: CoherenceRadius,
    /// Displacement of the beam from the waveguide axis.
    pub x0: f64,
    pub i0: f64,
}

impl SourceSpec {
    pub fn new(a0: f64, r0: f64, x0: f64) -> Result<Self> {
        let spec = Self { a0, r0: CoherenceRadius::from_f64(r0), x0, i0: 1.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("a0", self.a0)?;
        if let CoherenceRadius::Finite(r) = self.r0 {
            ensure_positive("r0", r)?;
        }
        ensure_finite("x0", self.x0)?;
        ensure_positive("I0", self.i0)
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    /// Cross-spectral density at the input plane, in absolute coordinates.
    pub fn coherence(&self, x: f64, xp: f64) -> f64 {
        let (u, v) = (x - self.x0, xp - self.x0);
        let d = u - v;
        self.i0 * (-(u * u + v * v) / (self.a0 * self.a0) - d * d * self.r0.inv_sq()).exp()
    }

    /// Mode parameter `c` (um^-2).
    pub fn mode_parameter(&self) -> f64 {
        let a2 = self.a0 * self.a0;
        (1.0 / (a2 * a2) + 2.0 * self.r0.inv_sq() / a2).sqrt()
    }

    /// Spectral ratio `xi = lambda_{p+1} / lambda_p`.
    pub fn spectral_ratio(&self) -> f64 {
        let b = self.r0.inv_sq();
        if b == 0.0 {
            return 0.0;
        }
        b / (1.0 / (self.a0 * self.a0) + b + self.mode_parameter())
    }

    /// Unnormalized eigenvalue `I0 sqrt(pi) b^p (A + c)^-(p + 1/2)`, with
    /// `A = 1/a0^2 + b` and `b = 1/r0^2`.
    pub fn raw_eigenvalue(&self, p: usize) -> f64 {
        let b = self.r0.inv_sq();
        let denom = 1.0 / (self.a0 * self.a0) + b + self.mode_parameter();
        let ratio = if b == 0.0 { if p == 0 { 1.0 } else { 0.0 } } else { (b / denom).powi(p as i32) };
        self.i0 * PI.sqrt() * ratio / denom.sqrt()
    }
}

/// Spectrum and mode parameter of a decomposed source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDecomposition {
    /// um^-2
    pub c: f64,
    pub xi: f64,
    /// Normalized weights `(1 - xi) xi^p` for `p = 0..=order`.
    pub lambda_bar: Vec<f64>,
    /// Highest retained mode index `P`.
    pub order: usize,
    /// Weight discarded by the truncation, `xi^(P+1)`.
    pub tail: f64,
}

/// Decomposes `spec`, keeping modes until the discarded weight is at most
/// `tail_tol`.
pub fn decompose(spec: &SourceSpec, tail_tol: f64) -> Result<SourceDecomposition> {
    spec.validate()?;
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidParameter { name: "tail_tol", reason: format!("must lie in (0, 1), got {tail_tol}") });
    }
    let c = spec.mode_parameter();
    let xi = spec.spectral_ratio();
    let (order, tail) = if xi == 0.0 {
        (0, 0.0)
    } else {
        let mut kept = (tail_tol.ln() / xi.ln()).ceil().max(1.0) as usize;
        while xi.powi(kept as i32) > tail_tol {
            kept += 1;
        }
        while kept > 1 && xi.powi(kept as i32 - 1) <= tail_tol {
            kept -= 1;
        }
        (kept - 1, xi.powi(kept as i32))
    };
    let lambda_bar = (0..=order).map(|p| (1.0 - xi) * xi.powi(p as i32)).collect();
    Ok(SourceDecomposition { c, xi, lambda_bar, order, tail })
}

impl SourceDecomposition {
    /// Number of retained modes, `P + 1`.
    pub fn len(&self) -> usize {
        self.lambda_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_bar.is_empty()
    }

    /// Inverse width `sqrt(2c)` of the source modes.
    pub fn mode_scale(&self) -> f64 {
        (2.0 * self.c).sqrt()
    }
}

/// `Phi_p(x - x0)`, normalized in `x`.
pub fn source_mode(dec: &SourceDecomposition, p: usize, x: f64, x0: f64) -> Result<f64> {
    if p > dec.order {
        return Err(Error::ModeOutOfRange { index: p, limit: dec.order + 1 });
    }
    let s = dec.mode_scale();
    Ok(s.sqrt() * hermite_function(p, s * (x - x0)))
}

/// Purity of the untruncated geometric spectrum, `(1 - xi)/(1 + xi)`.
pub fn purity_closed_form(dec: &SourceDecomposition) -> f64 {
    (1.0 - dec.xi) / (1.0 + dec.xi)
}

/// `-sum w ln w` over normalized weights, skipping zeros.
pub fn spectrum_entropy(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .map(|w| w / total)
        .filter(|&w| w > 0.0)
        .map(|w| -w * w.ln())
        .sum()
}

/// Entropy of the untruncated geometric spectrum,
/// `-ln(1 - xi) - xi ln(xi) / (1 - xi)`.
pub fn entropy(dec: &SourceDecomposition) -> f64 {
    let xi = dec.xi;
    if xi == 0.0 {
        0.0
    } else {
        -(1.0 - xi).ln() - xi * xi.ln() / (1.0 - xi)
    }
}
