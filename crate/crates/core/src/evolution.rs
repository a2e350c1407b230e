//! Evolution of the coherence matrix in the waveguide-mode basis and the
//! intensity profiles synthesized from it.
//!
//! `G[m][n](z) = sum_p lambda_p T[p][m] T[p][n] exp(i (beta_m - beta_n) z)`.
//! Diagonal entries are the modal powers and never change; the off-diagonal
//! entries only pick up phases. Intensities split the same way: the
//! `m = n` terms form the smooth "mixture" part, the `m != n` terms the
//! oscillatory "coherence" part.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::source::SourceDecomposition;
use crate::waveguide::{ModeBasis, Regime};

/// Hermitian `M x M` coherence matrix at one propagation distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    pub g: DMatrix<Complex64>,
    /// um
    pub z: f64,
    pub regime: Regime,
}

impl CoherenceMatrix {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|m| self.g[(m, m)].re).sum()
    }

    /// Largest `|G[m][n] - conj(G[n][m])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for k in m..n {
                worst = worst.max((self.g[(m, k)] - self.g[(k, m)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue (real for a Hermitian matrix).
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = nalgebra::SymmetricEigen::new(self.g.clone());
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Errors unless `G` is Hermitian to `herm_tol` and its eigenvalues are
    /// above `-psd_tol * trace`.
    pub fn check_physical(&self, herm_tol: f64, psd_tol: f64) -> Result<()> {
        let tr = self.trace();
        let defect = self.hermiticity_defect();
        if defect > herm_tol * tr.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NumericalGuard(format!("coherence matrix not Hermitian at z={}: defect {defect:e}", self.z)));
        }
        let lo = self.min_eigenvalue();
        if lo < -psd_tol * tr {
            return Err(Error::NumericalGuard(format!("coherence matrix not positive semidefinite at z={}: eigenvalue {lo:e}", self.z)));
        }
        Ok(())
    }
}

/// Coherence matrix at the input plane, `sum_p lambda_p T[p][m] T[p][n]`.
pub fn initial_coherence(coupling: &CouplingMatrix, dec: &SourceDecomposition) -> DMatrix<f64> {
    let nm = coupling.guide_modes();
    let mut g0 = DMatrix::<f64>::zeros(nm, nm);
    for (p, &l) in dec.lambda_bar.iter().enumerate() {
        let row = coupling.row(p);
        for n in 0..nm {
            let ln = l * row[n];
            if ln == 0.0 {
                continue;
            }
            for m in 0..=n {
                g0[(m, n)] += ln * row[m];
            }
        }
    }
    g0.fill_lower_triangle_with_upper_triangle();
    g0
}

/// Index of the retained mode closest to the mean excited mode.
pub fn reference_mode(g0: &DMatrix<f64>) -> usize {
    let n = g0.nrows();
    let tr: f64 = (0..n).map(|m| g0[(m, m)]).sum();
    let mean: f64 = (0..n).map(|m| m as f64 * g0[(m, m)]).sum::<f64>() / tr;
    (mean.round().max(0.0) as usize).min(n - 1)
}

/// Precomputed initial coherence matrix and relative propagation constants;
/// evaluates `G(z)` for any `z` without stepping.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub g0: DMatrix<f64>,
    /// Mode whose propagation constant is factored out as a global phase.
    pub reference: usize,
    rel_exact: Vec<f64>,
    rel_paraxial: Vec<f64>,
}

impl Propagator {
    pub fn new(coupling: &CouplingMatrix, dec: &SourceDecomposition, basis: &ModeBasis) -> Result<Self> {
        if coupling.guide_modes() != basis.len() || coupling.source_modes() != dec.len() {
            return Err(Error::InvalidParameter {
                name: "coupling",
                reason: format!(
                    "{}x{} coupling does not match {} source and {} waveguide modes",
                    coupling.source_modes(),
                    coupling.guide_modes(),
                    dec.len(),
                    basis.len()
                ),
            });
        }
        let g0 = initial_coherence(coupling, dec);
        let reference = reference_mode(&g0);
        Ok(Self {
            rel_exact: basis.relative_betas(Regime::Exact, reference),
            rel_paraxial: basis.relative_betas(Regime::Paraxial, reference),
            g0,
            reference,
        })
    }

    pub fn dim(&self) -> usize {
        self.g0.nrows()
    }

    /// `beta_m - beta_ref` for `regime`.
    pub fn relative_betas(&self, regime: Regime) -> &[f64] {
        match regime {
            Regime::Exact => &self.rel_exact,
            Regime::Paraxial => &self.rel_paraxial,
        }
    }

    /// `exp(i (beta_m - beta_ref) z)` per mode.
    pub fn phases(&self, z: f64, regime: Regime) -> Vec<Complex64> {
        self.relative_betas(regime).iter().map(|b| Complex64::from_polar(1.0, b * z)).collect()
    }

    pub fn gamma_at(&self, z: f64, regime: Regime) -> CoherenceMatrix {
        let u = self.phases(z, regime);
        let n = self.dim();
        let g = DMatrix::from_fn(n, n, |m, k| if m == k { Complex64::new(self.g0[(m, m)], 0.0) } else { u[m] * u[k].conj() * self.g0[(m, k)] });
        CoherenceMatrix { g, z, regime }
    }

    /// Main diagonal and the first two superdiagonals of `G(z)`; all that
    /// second-order moments need.
    pub fn bands_at(&self, z: f64, regime: Regime) -> Bands {
        let u = self.phases(z, regime);
        let n = self.dim();
        let diag = (0..n).map(|m| self.g0[(m, m)]).collect();
        let upper1 = (0..n.saturating_sub(1)).map(|m| u[m] * u[m + 1].conj() * self.g0[(m, m + 1)]).collect();
        let upper2 = (0..n.saturating_sub(2)).map(|m| u[m] * u[m + 2].conj() * self.g0[(m, m + 2)]).collect();
        Bands { diag, upper1, upper2 }
    }
}

/// Banded view of a coherence matrix: `diag[m] = G[m][m]`,
/// `upper1[m] = G[m][m+1]`, `upper2[m] = G[m][m+2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bands {
    pub diag: Vec<f64>,
    pub upper1: Vec<Complex64>,
    pub upper2: Vec<Complex64>,
}

impl Bands {
    pub fn from_matrix(g: &CoherenceMatrix) -> Self {
        let n = g.dim();
        Bands {
            diag: (0..n).map(|m| g.g[(m, m)].re).collect(),
            upper1: (0..n.saturating_sub(1)).map(|m| g.g[(m, m + 1)]).collect(),
            upper2: (0..n.saturating_sub(2)).map(|m| g.g[(m, m + 2)]).collect(),
        }
    }
}

/// `G(z)` straight from the coupling coefficients, with phases referenced
/// to the mean excited mode.
pub fn gamma_at(
    coupling: &CouplingMatrix,
    dec: &SourceDecomposition,
    basis: &ModeBasis,
    z: f64,
    regime: Regime,
) -> Result<CoherenceMatrix> {
    Ok(Propagator::new(coupling, dec, basis)?.gamma_at(z, regime))
}

/// Intensity on a grid, split into the mode-diagonal and cross parts.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    /// um
    pub grid: Vec<f64>,
    pub total: Vec<f64>,
    pub diagonal_part: Vec<f64>,
    pub cross_part: Vec<f64>,
}

impl IntensityProfile {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_total(&self) -> f64 {
        self.total.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Mirror image `x -> -x` (the grid must be symmetric).
    pub fn mirrored(&self) -> Self {
        let rev = |v: &Vec<f64>| v.iter().rev().copied().collect::<Vec<_>>();
        IntensityProfile {
            grid: self.grid.iter().rev().map(|x| -x).collect(),
            total: rev(&self.total),
            diagonal_part: rev(&self.diagonal_part),
            cross_part: rev(&self.cross_part),
        }
    }

    /// Writes the `x_um,I_total,I_diagonal,I_cross` table, or only the first
    /// two columns when `split` is false.
    pub fn write_csv<W: Write>(&self, mut out: W, split: bool) -> Result<()> {
        if split {
            writeln!(out, "x_um,I_total,I_diagonal,I_cross")?;
        } else {
            writeln!(out, "x_um,I_total")?;
        }
        for i in 0..self.len() {
            if split {
                writeln!(out, "{:.6},{:.12e},{:.12e},{:.12e}", self.grid[i], self.total[i], self.diagonal_part[i], self.cross_part[i])?;
            } else {
                writeln!(out, "{:.6},{:.12e}", self.grid[i], self.total[i])?;
            }
        }
        Ok(())
    }
}

/// `I(x) = sum_mn G[m][n] psi_m(x) psi_n(x)` with its diagonal/cross split.
pub fn intensity_profile(g: &CoherenceMatrix, basis: &ModeBasis, grid: &[f64]) -> Result<IntensityProfile> {
    let n = g.dim();
    if n != basis.len() {
        return Err(Error::InvalidParameter { name: "basis", reason: format!("{} modes for a {n}x{n} coherence matrix", basis.len()) });
    }
    let re = g.g.map(|c| c.re);
    let parts: Vec<(f64, f64)> = grid
        .par_iter()
        .map_init(
            || vec![0.0; n],
            |psi, &x| {
                basis.modes_at(x, psi);
                let mut diag = 0.0;
                let mut cross = 0.0;
                for m in 0..n {
                    let pm = psi[m];
                    if pm == 0.0 {
                        continue;
                    }
                    diag += re[(m, m)] * pm * pm;
                    let mut acc = 0.0;
                    for k in m + 1..n {
                        acc += re[(m, k)] * psi[k];
                    }
                    cross += 2.0 * pm * acc;
                }
                (diag, cross)
            },
        )
        .collect();
    Ok(IntensityProfile {
        grid: grid.to_vec(),
        total: parts.iter().map(|(d, c)| d + c).collect(),
        diagonal_part: parts.iter().map(|p| p.0).collect(),
        cross_part: parts.iter().map(|p| p.1).collect(),
    })
}

/// Incoherent (statistical) superposition of profiles on a common grid.
pub fn mixture_profile(profiles: &[IntensityProfile], weights: &[f64]) -> Result<IntensityProfile> {
    let first = profiles.first().ok_or_else(|| Error::GridMismatch("no profiles to mix".into()))?;
    if profiles.len() != weights.len() {
        return Err(Error::InvalidParameter { name: "weights", reason: format!("{} weights for {} profiles", weights.len(), profiles.len()) });
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidParameter { name: "weights", reason: format!("weights must be finite and non-negative, got {w}") });
    }
    for p in &profiles[1..] {
        if p.grid != first.grid {
            return Err(Error::GridMismatch("profiles sampled on different grids".into()));
        }
    }
    let n = first.len();
    let mut out = IntensityProfile { grid: first.grid.clone(), total: vec![0.0; n], diagonal_part: vec![0.0; n], cross_part: vec![0.0; n] };
    for (p, &w) in profiles.iter().zip(weights) {
        for i in 0..n {
            out.total[i] += w * p.total[i];
            out.diagonal_part[i] += w * p.diagonal_part[i];
            out.cross_part[i] += w * p.cross_part[i];
        }
    }
    Ok(out)
}

/// Fringe contrast of a profile over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility {
    /// Mean `(I_max - I_min)/(I_max + I_min)` over adjacent extrema; zero
    /// when no fringes were found.
    pub value: f64,
    /// Number of turning points used.
    pub extrema: usize,
    pub has_fringes: bool,
}

/// Turning points whose excursion is below this fraction of the window
/// maximum are treated as noise or envelope ripple.
pub const DEFAULT_MIN_EXCURSION: f64 = 0.02;

/// Visibility of the fringes of `samples` (total intensity) between
/// `window.0` and `window.1` (um).
pub fn fringe_visibility(profile: &IntensityProfile, window: (f64, f64)) -> Result<Visibility> {
    fringe_visibility_with(&profile.grid, &profile.total, window, DEFAULT_MIN_EXCURSION)
}

/// As [`fringe_visibility`] for an arbitrary sampled curve and excursion
/// threshold.
pub fn fringe_visibility_with(grid: &[f64], samples: &[f64], window: (f64, f64), min_excursion: f64) -> Result<Visibility> {
    let (lo, hi) = window;
    if grid.is_empty() || !(lo < hi) || lo < grid[0] || hi > grid[grid.len() - 1] {
        return Err(Error::GridMismatch(format!("window [{lo}, {hi}] not inside the profile grid")));
    }
    let vals: Vec<f64> = grid.iter().zip(samples).filter(|(x, _)| **x >= lo && **x <= hi).map(|(_, v)| *v).collect();
    let peak = vals.iter().copied().fold(0.0, f64::max);
    let threshold = min_excursion * peak;

    // Zig-zag turning points with hysteresis `threshold`.
    let mut turns: Vec<f64> = Vec::new();
    if let Some(&first) = vals.first() {
        let mut hi_v = first;
        let mut lo_v = first;
        let mut dir = 0i8;
        for &v in &vals[1..] {
            match dir {
                1 => {
                    if v > hi_v {
                        hi_v = v;
                    } else if hi_v - v > threshold {
                        turns.push(hi_v);
                        dir = -1;
                        lo_v = v;
                    }
                }
                -1 => {
                    if v < lo_v {
                        lo_v = v;
                    } else if v - lo_v > threshold {
                        turns.push(lo_v);
                        dir = 1;
                        hi_v = v;
                    }
                }
                _ => {
                    hi_v = hi_v.max(v);
                    lo_v = lo_v.min(v);
                    if v - lo_v > threshold {
                        dir = 1;
                        hi_v = v;
                    } else if hi_v - v > threshold {
                        dir = -1;
                        lo_v = v;
                    }
                }
            }
        }
    }
    if turns.len() < 3 {
        return Ok(Visibility { value: 0.0, extrema: turns.len(), has_fringes: false });
    }
    let contrasts: Vec<f64> = turns
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].max(w[1]), w[0].min(w[1]).max(0.0));
            if a + b > 0.0 { (a - b) / (a + b) } else { 0.0 }
        })
        .collect();
    Ok(Visibility { value: contrasts.iter().sum::<f64>() / contrasts.len() as f64, extrema: turns.len(), has_fringes: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn curve(f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let grid: Vec<f64> = (0..=4000).map(|i| -20.0 + 0.01 * i as f64).collect();
        let vals = grid.iter().map(|&x| f(x)).collect();
        (grid, vals)
    }

    #[test]
    fn ideal_two_beam_interference_has_unit_visibility() {
        // |e^{ikx} + e^{-ikx}|^2 under a broad envelope
        let (g, v) = curve(|x| (-(x / 40.0).powi(2)).exp() * (2.0 * x).cos().powi(2) * 4.0);
        let vis = fringe_visibility_with(&g, &v, (-5.0, 5.0), DEFAULT_MIN_EXCURSION).unwrap();
        assert!(vis.has_fringes);
        assert!(vis.value > 0.999, "{vis:?}");
    }

    #[test]
    fn partial_contrast() {
        let (g, v) = curve(|x| 1.0 + 0.3 * (2.0 * PI * x / 1.5).cos());
        let vis = fringe_visibility_with(&g, &v, (-6.0, 6.0), DEFAULT_MIN_EXCURSION).unwrap();
        assert!((vis.value - 0.3).abs() < 1e-3, "{vis:?}");
    }

    #[test]
    fn smooth_curves_have_no_fringes() {
        let (g, v) = curve(|x| (-(x - 10.0).powi(2) / 20.0).exp() + (-(x + 10.0).powi(2) / 20.0).exp());
        let vis = fringe_visibility_with(&g, &v, (-6.0, 6.0), DEFAULT_MIN_EXCURSION).unwrap();
        assert!(!vis.has_fringes);
        assert_eq!(vis.value, 0.0);
        let (g, v) = curve(|x| (-(x / 5.0).powi(2)).exp());
        assert!(!fringe_visibility_with(&g, &v, (-5.0, 5.0), DEFAULT_MIN_EXCURSION).unwrap().has_fringes);
    }

    #[test]
    fn window_outside_grid_is_an_error() {
        let (g, v) = curve(|x| x);
        assert!(fringe_visibility_with(&g, &v, (-30.0, 0.0), 0.01).is_err());
        assert!(fringe_visibility_with(&g, &v, (1.0, 1.0), 0.01).is_err());
    }

    fn flat(level: f64) -> IntensityProfile {
        IntensityProfile { grid: vec![-1.0, 0.0, 1.0], total: vec![level; 3], diagonal_part: vec![level; 3], cross_part: vec![0.0; 3] }
    }

    #[test]
    fn mixture_weights() {
        let a = flat(1.0);
        let b = flat(3.0);
        assert_eq!(mixture_profile(&[a.clone()], &[1.0]).unwrap(), a);
        let m = mixture_profile(&[a.clone(), b.clone()], &[0.5, 0.5]).unwrap();
        assert_eq!(m.total, vec![2.0; 3]);
        assert_eq!(mixture_profile(&[a.clone(), b.clone()], &[1.0, 0.0]).unwrap(), a);
        assert!(mixture_profile(&[a.clone(), b], &[1.0, -1.0]).is_err());
        let mut shifted = flat(1.0);
        shifted.grid[0] = -2.0;
        assert!(matches!(mixture_profile(&[a, shifted], &[0.5, 0.5]), Err(Error::GridMismatch(_))));
        assert!(mixture_profile(&[], &[]).is_err());
    }
}
