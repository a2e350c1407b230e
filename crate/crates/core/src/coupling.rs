//! Overlap coefficients between displaced source modes and waveguide modes.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hgbasis::{hermite_functions, ModeFamily, QuadratureRule};
use crate::source::SourceDecomposition;
use crate::waveguide::ModeBasis;

/// Default completeness tolerance on `sum_m T[p][m]^2`.
pub const DEFAULT_COMP_TOL: f64 = 1e-13;

/// Real `P x M` matrix `T[p][m] = <psi_m | Phi_p(. - x0)>`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    source_modes: usize,
    guide_modes: usize,
    /// Row-major, rows indexed by source mode.
    entries: Vec<f64>,
    /// `sum_m T[p][m]^2` per source mode.
    pub completeness: Vec<f64>,
    /// `sum_m (2m+1) T[p][m]^2` over its exact value per source mode. More
    /// sensitive to truncation than `completeness`, and it is what second
    /// moments depend on.
    pub number_completeness: Vec<f64>,
    pub x0: f64,
}

impl CouplingMatrix {
    pub fn source_modes(&self) -> usize {
        self.source_modes
    }

    pub fn guide_modes(&self) -> usize {
        self.guide_modes
    }

    pub fn get(&self, p: usize, m: usize) -> f64 {
        self.entries[p * self.guide_modes + m]
    }

    pub fn row(&self, p: usize) -> &[f64] {
        &self.entries[p * self.guide_modes..(p + 1) * self.guide_modes]
    }

    /// Smallest completeness sum over the source modes.
    pub fn worst_completeness(&self) -> (usize, f64) {
        self.completeness
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (p, c)| if c < acc.1 { (p, c) } else { acc })
    }

    /// Smallest number-weighted completeness over the source modes.
    pub fn worst_number_completeness(&self) -> (usize, f64) {
        self.number_completeness
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (p, c)| if c < acc.1 { (p, c) } else { acc })
    }

    /// Errors on the first source mode whose completeness falls short of
    /// `1 - tol`.
    pub fn check_completeness(&self, tol: f64) -> Result<()> {
        for (p, &c) in self.completeness.iter().enumerate() {
            if !(c >= 1.0 - tol) {
                return Err(Error::Incomplete { p, achieved: c, tolerance: tol });
            }
        }
        Ok(())
    }

    /// CSV with one row per source mode and one column per waveguide mode.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "p")?;
        for m in 0..self.guide_modes {
            write!(out, ",m{m}")?;
        }
        writeln!(out)?;
        for p in 0..self.source_modes {
            write!(out, "{p}")?;
            for v in self.row(p) {
                write!(out, ",{v:.17e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Overlap integrals by quadrature, checked against `comp_tol`.
pub fn overlap_matrix(
    dec: &SourceDecomposition,
    basis: &ModeBasis,
    x0: f64,
    rule: &QuadratureRule,
    comp_tol: f64,
) -> Result<CouplingMatrix> {
    let coupling = overlap_matrix_unchecked(dec, basis, x0, rule)?;
    coupling.check_completeness(comp_tol)?;
    Ok(coupling)
}

/// Overlap integrals without the completeness check; used when sizing the
/// waveguide basis.
pub fn overlap_matrix_unchecked(
    dec: &SourceDecomposition,
    basis: &ModeBasis,
    x0: f64,
    rule: &QuadratureRule,
) -> Result<CouplingMatrix> {
    let (np, nm) = (dec.len(), basis.len());
    rule.ensure_covers(&[
        ModeFamily { scale: dec.mode_scale(), center: x0, max_order: dec.order },
        ModeFamily { scale: basis.scale, center: 0.0, max_order: nm - 1 },
    ])?;

    let s_src = dec.mode_scale();
    let (norm_src, norm_wg) = (s_src.sqrt(), basis.scale.sqrt());
    let nodes = rule.len();
    // Weighted source modes, node-major: src[i * np + p] = w_i Phi_p(x_i - x0).
    let mut src = vec![0.0; nodes * np];
    let mut wg = vec![0.0; nodes * nm];
    src.par_chunks_mut(np).zip(wg.par_chunks_mut(nm)).enumerate().for_each(|(i, (s, g))| {
        let x = rule.nodes[i];
        hermite_functions(s_src * (x - x0), s);
        let w = rule.weights[i] * norm_src * norm_wg;
        s.iter_mut().for_each(|v| *v *= w);
        hermite_functions(basis.scale * x, g);
    });

    let parity = x0 == 0.0;
    let mut entries = vec![0.0; np * nm];
    entries.par_chunks_mut(nm).enumerate().for_each(|(p, row)| {
        for i in 0..nodes {
            let a = src[i * np + p];
            if a == 0.0 {
                continue;
            }
            let g = &wg[i * nm..(i + 1) * nm];
            row.iter_mut().zip(g).for_each(|(r, &v)| *r += a * v);
        }
        if parity {
            // both families are centered on the axis: only equal parities couple
            row.iter_mut().enumerate().filter(|(m, _)| (p + m) % 2 == 1).for_each(|(_, r)| *r = 0.0);
        }
    });
    let completeness = entries.chunks(nm).map(|r| r.iter().map(|t| t * t).sum()).collect();
    // <2n+1> of a displaced Hermite-Gauss mode of inverse width s:
    // k w x0^2 + (p + 1/2)(k w / s^2 + s^2 / (k w)), with k w = basis.scale^2
    let kw = basis.scale * basis.scale;
    let spread = kw / (s_src * s_src) + s_src * s_src / kw;
    let number_completeness = entries
        .chunks(nm)
        .enumerate()
        .map(|(p, r)| {
            let got: f64 = r.iter().enumerate().map(|(m, t)| (2 * m + 1) as f64 * t * t).sum();
            got / (kw * x0 * x0 + (p as f64 + 0.5) * spread)
        })
        .collect();
    Ok(CouplingMatrix { source_modes: np, guide_modes: nm, entries, completeness, number_completeness, x0 })
}

/// Mean excited waveguide mode index, `sum_p lambda_p sum_m m T[p][m]^2`.
pub fn mean_mode_number(coupling: &CouplingMatrix, dec: &SourceDecomposition) -> f64 {
    dec.lambda_bar
        .iter()
        .enumerate()
        .map(|(p, l)| l * coupling.row(p).iter().enumerate().map(|(m, t)| m as f64 * t * t).sum::<f64>())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgbasis::quadrature_for;
    use crate::source::{decompose, SourceSpec};
    use crate::waveguide::{ModeBasis, WaveguideSpec};

    fn guide() -> WaveguideSpec {
        WaveguideSpec::new(1.5, 7e-3, 0.63).unwrap()
    }

    fn build(source: &SourceSpec, modes: usize, oversample: f64) -> (SourceDecomposition, ModeBasis, CouplingMatrix) {
        let dec = decompose(source, 1e-12).unwrap();
        let basis = ModeBasis::new(guide(), modes).unwrap();
        let rule = quadrature_for(
            &[
                ModeFamily { scale: dec.mode_scale(), center: source.x0, max_order: dec.order },
                ModeFamily { scale: basis.scale, center: 0.0, max_order: modes - 1 },
            ],
            oversample,
            5.0,
        )
        .unwrap();
        let t = overlap_matrix_unchecked(&dec, &basis, source.x0, &rule).unwrap();
        (dec, basis, t)
    }

    #[test]
    fn matched_fundamental_couples_only_to_itself() {
        let w0 = guide().waist();
        let (dec, _, t) = build(&SourceSpec::new(w0, f64::INFINITY, 0.0).unwrap(), 30, 1.0);
        assert_eq!(dec.len(), 1);
        assert!((t.get(0, 0) - 1.0).abs() < 1e-10);
        for m in 1..30 {
            assert!(t.get(0, m).abs() < 1e-10, "m={m}: {}", t.get(0, m));
        }
        assert!(mean_mode_number(&t, &dec) < 1e-18);
    }

    #[test]
    fn parity_selection_on_axis() {
        let (_, _, t) = build(&SourceSpec::new(7.0, 4.0, 0.0).unwrap(), 150, 1.0);
        for p in 0..t.source_modes() {
            for m in 0..t.guide_modes() {
                if (p + m) % 2 == 1 {
                    assert_eq!(t.get(p, m), 0.0);
                }
            }
        }
    }

    #[test]
    fn displaced_source_is_complete_and_bounded() {
        let (dec, _, t) = build(&SourceSpec::new(10.0, 5.0, 20.0).unwrap(), 180, 1.0);
        t.check_completeness(1e-10).unwrap();
        assert!(t.completeness.iter().all(|&c| c <= 1.0 + 1e-12));
        assert!(t.number_completeness.iter().all(|&c| (c - 1.0).abs() < 1e-8), "{:?}", t.worst_number_completeness());
        assert!((0..t.source_modes()).all(|p| t.row(p).iter().all(|v| v.is_finite() && v.abs() <= 1.0 + 1e-12)));
        let mbar = mean_mode_number(&t, &dec);
        assert!((9.0..=15.0).contains(&mbar), "mean mode number {mbar}");
    }

    #[test]
    fn truncated_basis_reports_offending_mode() {
        let (_, _, t) = build(&SourceSpec::new(10.0, 5.0, 20.0).unwrap(), 40, 1.0);
        match t.check_completeness(1e-10) {
            Err(Error::Incomplete { p, achieved, .. }) => {
                assert!(achieved < 1.0 - 1e-10);
                assert!(p < t.source_modes());
            }
            other => panic!("expected completeness failure, got {other:?}"),
        }
    }

    #[test]
    fn independent_of_quadrature_density() {
        let src = SourceSpec::new(10.0, 5.0, 20.0).unwrap();
        let (_, _, coarse) = build(&src, 150, 1.0);
        let (_, _, fine) = build(&src, 150, 2.0);
        for p in 0..coarse.source_modes() {
            for m in 0..coarse.guide_modes() {
                assert!((coarse.get(p, m) - fine.get(p, m)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn csv_dump_shape() {
        let (_, _, t) = build(&SourceSpec::new(5.35, f64::INFINITY, 0.0).unwrap(), 4, 1.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "p,m0,m1,m2,m3");
        assert_eq!(lines.len(), 2);
    }
}
