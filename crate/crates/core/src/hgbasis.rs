//! Normalized Hermite-Gauss functions and the quadrature rule used for
//! overlap integrals.
//!
//! The functions are generated by the three-term recurrence on the
//! normalized functions themselves,
//!
//! ```text
//! phi_0(u)     = pi^(-1/4) exp(-u^2/2)
//! phi_{n+1}(u) = sqrt(2/(n+1)) u phi_n(u) - sqrt(n/(n+1)) phi_{n-1}(u)
//! ```
//!
//! so no factorial or raw Hermite polynomial ever appears. The Gaussian
//! factor is applied last, in log space, which keeps orders in the
//! thousands finite far into the tails.

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, Error, Result};

const RESCALE_AT: f64 = 1e100;
const LN_RESCALE: f64 = 230.258_509_299_404_57; // ln(1e100)

/// `pi^(-1/4)`, the peak of the ground-state Hermite function.
pub const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Normalized Hermite function `phi_n(u)` (unit L2 norm in `u`).
pub fn hermite_function(n: usize, u: f64) -> f64 {
    let gauss_log = -0.5 * u * u;
    let mut prev = 0.0;
    let mut cur = PI_POW_NEG_QUARTER;
    let mut log_scale = 0.0;
    for j in 0..n {
        let next = (2.0 / (j + 1) as f64).sqrt() * u * cur - (j as f64 / (j + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            log_scale += LN_RESCALE;
        }
    }
    scaled(cur, log_scale + gauss_log)
}

/// Fills `out[n] = phi_n(u)` for `n = 0..out.len()`.
pub fn hermite_functions(u: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let gauss_log = -0.5 * u * u;
    let mut prev = 0.0;
    let mut cur = PI_POW_NEG_QUARTER;
    let mut log_scale = 0.0;
    out[0] = scaled(cur, gauss_log);
    for j in 0..out.len() - 1 {
        let next = (2.0 / (j + 1) as f64).sqrt() * u * cur - (j as f64 / (j + 1) as f64).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            log_scale += LN_RESCALE;
        }
        out[j + 1] = scaled(cur, log_scale + gauss_log);
    }
}

#[inline]
fn scaled(mantissa: f64, log: f64) -> f64 {
    if mantissa == 0.0 {
        0.0
    } else {
        mantissa * log.exp()
    }
}

/// A Hermite-Gauss function of a physical coordinate,
/// `sqrt(scale) * phi_order(scale * (x - center))`, normalized in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteGauss {
    pub order: usize,
    /// Inverse length, um^-1.
    pub scale: f64,
    /// um.
    pub center: f64,
}

impl HermiteGauss {
    pub fn new(order: usize, scale: f64, center: f64) -> Result<Self> {
        ensure_positive("scale", scale)?;
        ensure_finite("center", center)?;
        Ok(Self { order, scale, center })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.scale.sqrt() * hermite_function(self.order, self.scale * (x - self.center))
    }
}

/// Evaluates `sqrt(s) * phi_n(s * (x - center))`.
pub fn hg_eval(n: usize, s: f64, center: f64, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(HermiteGauss::new(n, s, center)?.eval(x))
}

/// Nodes and weights of a composite rule on a finite window (um).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Composite trapezoid rule on `[x_min, x_max]` with `points` equispaced
/// nodes (odd, at least 3).
///
/// For integrands that are smooth and negligible at the window edges the
/// trapezoid rule converges geometrically in the node spacing, which is
/// the regime all overlap integrals here live in.
pub fn build_quadrature(x_min: f64, x_max: f64, points: usize) -> Result<QuadratureRule> {
    ensure_finite("x_min", x_min)?;
    ensure_finite("x_max", x_max)?;
    if x_min >= x_max {
        return Err(Error::InvalidParameter {
            name: "x_max",
            reason: format!("window [{x_min}, {x_max}] is empty"),
        });
    }
    if points < 3 || points % 2 == 0 {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: format!("need an odd count >= 3, got {points}"),
        });
    }
    let h = (x_max - x_min) / (points - 1) as f64;
    let nodes: Vec<f64> = (0..points).map(|i| x_min + h * i as f64).collect();
    let mut weights = vec![h; points];
    weights[0] = 0.5 * h;
    weights[points - 1] = 0.5 * h;
    Ok(QuadratureRule { nodes, weights })
}

/// Sizing of a quadrature window for integrands built from Hermite-Gauss
/// families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFamily {
    /// Inverse length of the family, um^-1.
    pub scale: f64,
    pub center: f64,
    /// Highest order that appears in the integrand.
    pub max_order: usize,
}

impl ModeFamily {
    /// Classical turning point of the highest order, in um from the center.
    fn turning_point(&self) -> f64 {
        (2.0 * self.max_order as f64 + 1.0).sqrt() / self.scale
    }

    /// Largest local wavenumber of the family, um^-1.
    fn max_wavenumber(&self) -> f64 {
        (2.0 * self.max_order as f64 + 1.0).sqrt() * self.scale
    }
}

/// Beyond the turning point a Hermite function decays like
/// `exp(-t^2/2)` in units of `1/scale`; 12 units leave less than 1e-31.
const TAIL_UNITS: f64 = 12.0;

/// Smallest window that holds every family of `families` down to the tail
/// cutoff, plus `safety` um on each side.
pub fn covering_window(families: &[ModeFamily], safety: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for f in families {
        let reach = f.turning_point() + TAIL_UNITS / f.scale;
        lo = lo.min(f.center - reach);
        hi = hi.max(f.center + reach);
    }
    (lo - safety, hi + safety)
}

/// Trapezoid rule that resolves products of any two functions drawn from
/// `families`. `oversample` multiplies the minimum node count (>= 1).
pub fn quadrature_for(families: &[ModeFamily], oversample: f64, safety: f64) -> Result<QuadratureRule> {
    if families.is_empty() {
        return Err(Error::InvalidParameter { name: "families", reason: "no mode family given".into() });
    }
    ensure_positive("oversample", oversample)?;
    let (lo, hi) = covering_window(families, safety);
    let kmax: f64 = families.iter().map(ModeFamily::max_wavenumber).fold(0.0, f64::max);
    // The product of two functions is band limited to roughly twice the
    // largest wavenumber plus the Gaussian spread of the envelope.
    let band = 2.0 * kmax + 2.0 * TAIL_UNITS * families.iter().map(|f| f.scale).fold(0.0, f64::max);
    let h = PI / band;
    let mut points = ((hi - lo) / h * oversample.max(1.0)).ceil() as usize + 1;
    if points % 2 == 0 {
        points += 1;
    }
    build_quadrature(lo, hi, points.max(3))
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn integrate_samples(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.weights.len());
        samples.iter().zip(&self.weights).map(|(s, w)| s * w).sum()
    }

    /// Errors unless every family fits inside the window with its tails.
    pub fn ensure_covers(&self, families: &[ModeFamily]) -> Result<()> {
        let (lo, hi) = covering_window(families, 0.0);
        if lo < self.x_min() || hi > self.x_max() {
            return Err(Error::WindowTooNarrow {
                x_min: self.x_min(),
                x_max: self.x_max(),
                reason: format!("integrand support needs [{lo:.3}, {hi:.3}]"),
            });
        }
        Ok(())
    }
}
