//! Run configuration: TOML blocks with `block.key=value` overrides.
//!
//! Every key has a default (the fig5 cat scenario), so a config file only
//! lists what it changes. Files are merged key by key over the defaults;
//! unknown keys and type mismatches are rejected with the offending field
//! named.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::engine::Numerics;
use crate::error::{Error, Result};
use crate::source::SourceSpec;
use crate::waveguide::{Regime, WaveguideSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceBlock {
    pub a0: f64,
    /// `inf` for a fully coherent beam.
    pub r0: f64,
    pub x0: f64,
    #[serde(rename = "I0")]
    pub i0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideBlock {
    pub n0: f64,
    pub omega: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericsBlock {
    pub tail_tol: f64,
    pub comp_tol: f64,
    /// Waveguide modes kept; 0 sizes the basis automatically.
    pub modes: i64,
    pub quad_oversample: f64,
    /// um added on each side of the overlap window.
    pub quad_safety: f64,
    pub grid_points: i64,
    /// Half-width of the profile grid; 0 picks it from the beam scales.
    pub grid_half_width: f64,
    /// Scan threads; 0 uses every core.
    pub workers: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanBlock {
    pub z_min: f64,
    pub z_max: f64,
    pub n_z: i64,
    /// exact, paraxial or both
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileBlock {
    pub z: f64,
    pub split: bool,
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureBlock {
    pub z: f64,
    /// Weights of the `+x0` and `-x0` sources.
    pub weights: Vec<f64>,
    /// Half-width of the central visibility window; 0 means `|x0|/2`.
    pub window: f64,
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindCatBlock {
    /// Search range in units of the revival estimate.
    pub window_min: f64,
    pub window_max: f64,
    pub samples_per_losc: i64,
    /// Envelope peak must exceed the envelope median by this factor.
    pub min_contrast: f64,
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityCurveBlock {
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Log-spaced samples of r0/a0.
    pub n_ratio: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputsBlock {
    pub directory: String,
    pub prefix: String,
    /// Also write the source/waveguide overlap matrix.
    pub coupling_dump: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: SourceBlock,
    pub waveguide: WaveguideBlock,
    pub numerics: NumericsBlock,
    pub scan: ScanBlock,
    pub profile: ProfileBlock,
    pub mixture: MixtureBlock,
    pub find_cat: FindCatBlock,
    pub purity_curve: PurityCurveBlock,
    pub outputs: OutputsBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            source: SourceBlock { a0: 10.0, r0: 5.0, x0: 20.0, i0: 1.0 },
            waveguide: WaveguideBlock { n0: 1.5, omega: 7e-3, lambda: 0.63 },
            numerics: NumericsBlock {
                tail_tol: 1e-12,
                comp_tol: crate::coupling::DEFAULT_COMP_TOL,
                modes: 0,
                quad_oversample: 1.0,
                quad_safety: 5.0,
                grid_points: 2048,
                grid_half_width: 0.0,
                workers: 0,
            },
            scan: ScanBlock { z_min: 0.0, z_max: 6000.0, n_z: 2001, regime: "exact".into() },
            profile: ProfileBlock { z: 2_115_000.0, split: true, regime: "exact".into() },
            mixture: MixtureBlock { z: 2_115_320.0, weights: vec![0.5, 0.5], window: 0.0, regime: "exact".into() },
            find_cat: FindCatBlock {
                window_min: 0.25,
                window_max: 1.25,
                samples_per_losc: 20,
                min_contrast: 1.05,
                regime: "exact".into(),
            },
            purity_curve: PurityCurveBlock { ratio_min: 0.1, ratio_max: 10.0, n_ratio: 41 },
            outputs: OutputsBlock { directory: "out".into(), prefix: "run".into(), coupling_dump: false },
        }
    }
}

/// Which propagation constants a scan uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanRegime {
    One(Regime),
    Both,
}

impl ScanRegime {
    pub fn regimes(self) -> Vec<Regime> {
        match self {
            ScanRegime::One(r) => vec![r],
            ScanRegime::Both => vec![Regime::Exact, Regime::Paraxial],
        }
    }
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{field}` {msg}"))
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(cfg_err(field, format_args!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(field, format_args!("must be finite, got {v}")))
    }
}

fn at_least(field: &str, v: i64, min: i64) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(cfg_err(field, format_args!("must be at least {min}, got {v}")))
    }
}

fn regime(field: &str, s: &str) -> Result<Regime> {
    s.parse().map_err(|_| cfg_err(field, format_args!("must be exact or paraxial, got `{s}`")))
}

fn unit_interval(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(cfg_err(field, format_args!("must lie in (0, 1), got {v}")))
    }
}

impl RunConfig {
    /// Defaults, then the file at `path` (if any), then `overrides` in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_str_with(&text, overrides)
    }

    pub fn from_str_with(text: &str, overrides: &[String]) -> Result<Self> {
        let file: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut merged = Self::default().to_table();
        merge(&mut merged, file, "")?;
        for o in overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{o}` is not of the form key=value")))?;
            set_key(&mut merged, key.trim(), parse_value(value.trim()))?;
        }
        let cfg: RunConfig = Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.source;
        positive("source.a0", s.a0)?;
        if !(s.r0 > 0.0) {
            return Err(cfg_err("source.r0", format_args!("must be positive (or inf), got {}", s.r0)));
        }
        finite("source.x0", s.x0)?;
        positive("source.I0", s.i0)?;
        let w = &self.waveguide;
        if !(w.n0.is_finite() && w.n0 > 1.0) {
            return Err(cfg_err("waveguide.n0", format_args!("must exceed 1, got {}", w.n0)));
        }
        positive("waveguide.omega", w.omega)?;
        positive("waveguide.lambda", w.lambda)?;
        let n = &self.numerics;
        unit_interval("numerics.tail_tol", n.tail_tol)?;
        unit_interval("numerics.comp_tol", n.comp_tol)?;
        at_least("numerics.modes", n.modes, 0)?;
        positive("numerics.quad_oversample", n.quad_oversample)?;
        if !(n.quad_safety.is_finite() && n.quad_safety >= 0.0) {
            return Err(cfg_err("numerics.quad_safety", format_args!("must be non-negative, got {}", n.quad_safety)));
        }
        at_least("numerics.grid_points", n.grid_points, 3)?;
        if !(n.grid_half_width.is_finite() && n.grid_half_width >= 0.0) {
            return Err(cfg_err("numerics.grid_half_width", format_args!("must be non-negative, got {}", n.grid_half_width)));
        }
        at_least("numerics.workers", n.workers, 0)?;
        let sc = &self.scan;
        finite("scan.z_min", sc.z_min)?;
        finite("scan.z_max", sc.z_max)?;
        if sc.z_min > sc.z_max {
            return Err(cfg_err("scan.z_min", format_args!("must not exceed scan.z_max ({} > {})", sc.z_min, sc.z_max)));
        }
        at_least("scan.n_z", sc.n_z, 1)?;
        self.scan_regime()?;
        finite("profile.z", self.profile.z)?;
        regime("profile.regime", &self.profile.regime)?;
        let m = &self.mixture;
        finite("mixture.z", m.z)?;
        if m.weights.len() != 2 || m.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || m.weights.iter().sum::<f64>() <= 0.0 {
            return Err(cfg_err("mixture.weights", format_args!("must be two non-negative numbers, not both zero, got {:?}", m.weights)));
        }
        if !(m.window.is_finite() && m.window >= 0.0) {
            return Err(cfg_err("mixture.window", format_args!("must be non-negative, got {}", m.window)));
        }
        regime("mixture.regime", &m.regime)?;
        let f = &self.find_cat;
        positive("find_cat.window_min", f.window_min)?;
        positive("find_cat.window_max", f.window_max)?;
        if f.window_min >= f.window_max {
            return Err(cfg_err("find_cat.window_min", "must be below find_cat.window_max"));
        }
        at_least("find_cat.samples_per_losc", f.samples_per_losc, 20)?;
        if !(f.min_contrast.is_finite() && f.min_contrast >= 1.0) {
            return Err(cfg_err("find_cat.min_contrast", format_args!("must be at least 1, got {}", f.min_contrast)));
        }
        regime("find_cat.regime", &f.regime)?;
        let p = &self.purity_curve;
        positive("purity_curve.ratio_min", p.ratio_min)?;
        positive("purity_curve.ratio_max", p.ratio_max)?;
        if p.ratio_min > p.ratio_max {
            return Err(cfg_err("purity_curve.ratio_min", "must not exceed purity_curve.ratio_max"));
        }
        at_least("purity_curve.n_ratio", p.n_ratio, 1)?;
        if self.outputs.prefix.is_empty() {
            return Err(cfg_err("outputs.prefix", "must not be empty"));
        }
        Ok(())
    }

    pub fn source_spec(&self) -> Result<SourceSpec> {
        let mut s = SourceSpec::new(self.source.a0, self.source.r0, self.source.x0)?;
        s.i0 = self.source.i0;
        Ok(s)
    }

    pub fn waveguide_spec(&self) -> Result<WaveguideSpec> {
        WaveguideSpec::new(self.waveguide.n0, self.waveguide.omega, self.waveguide.lambda)
    }

    pub fn engine_numerics(&self) -> Numerics {
        let n = &self.numerics;
        Numerics {
            tail_tol: n.tail_tol,
            comp_tol: n.comp_tol,
            modes: (n.modes > 0).then_some(n.modes as usize),
            quad_oversample: n.quad_oversample,
            quad_safety: n.quad_safety,
        }
    }

    pub fn scan_regime(&self) -> Result<ScanRegime> {
        match self.scan.regime.as_str() {
            "both" => Ok(ScanRegime::Both),
            s => regime("scan.regime", s)
                .map(ScanRegime::One)
                .map_err(|_| cfg_err("scan.regime", format_args!("must be exact, paraxial or both, got `{s}`"))),
        }
    }

    pub fn profile_regime(&self) -> Regime {
        self.profile.regime.parse().unwrap_or(Regime::Exact)
    }

    pub fn mixture_regime(&self) -> Regime {
        self.mixture.regime.parse().unwrap_or(Regime::Exact)
    }

    pub fn find_cat_regime(&self) -> Regime {
        self.find_cat.regime.parse().unwrap_or(Regime::Exact)
    }

    /// z samples of the scan, evenly spaced and including both ends.
    pub fn z_samples(&self) -> Vec<f64> {
        let (a, b, n) = (self.scan.z_min, self.scan.z_max, self.scan.n_z as usize);
        if n == 1 {
            return vec![a];
        }
        (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
    }

    pub fn output_path(&self, suffix: &str) -> PathBuf {
        Path::new(&self.outputs.directory).join(format!("{}_{suffix}.csv", self.outputs.prefix))
    }

    pub fn to_table(&self) -> Table {
        match Value::try_from(self) {
            Ok(Value::Table(t)) => t,
            _ => unreachable!("config always serializes to a table"),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Every key as `block.key=value`, space separated, in a form `--set`
    /// accepts back.
    pub fn flat(&self) -> String {
        let mut out = String::new();
        for (block, body) in self.to_table() {
            if let Value::Table(body) = body {
                for (k, v) in body {
                    if !out.is_empty() {
                        out.push(' ');
                    }
                    let _ = write!(out, "{block}.{k}={v}");
                }
            }
        }
        out
    }

    /// Comment line recording the resolved config at the top of each CSV.
    /// The thread count is left out: it never changes the numbers, and
    /// files from different worker counts must compare equal.
    pub fn header_line(&self, command: &str) -> String {
        let mut quiet = self.clone();
        quiet.numerics.workers = 0;
        let flat = quiet.flat().replace("numerics.workers=0 ", "");
        format!("# grin-coherence {command} {flat}")
    }
}

/// `value` as TOML when it parses, otherwise as a bare string.
fn parse_value(value: &str) -> Value {
    format!("v = {value}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()))
}

/// Coerces `new` to the type of `old`, allowing integers where floats are
/// expected.
fn coerce(path: &str, old: &Value, new: Value) -> Result<Value> {
    match (old, new) {
        (Value::Float(_), Value::Integer(i)) => Ok(Value::Float(i as f64)),
        (Value::Array(_), Value::Array(items)) => Ok(Value::Array(
            items.into_iter().map(|v| if let Value::Integer(i) = v { Value::Float(i as f64) } else { v }).collect(),
        )),
        (old, new) if old.type_str() == new.type_str() => Ok(new),
        (old, new) => Err(cfg_err(path, format_args!("expects a {}, got {} `{new}`", old.type_str(), new.type_str()))),
    }
}

fn merge(base: &mut Table, file: Table, prefix: &str) -> Result<()> {
    for (key, value) in file {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        let slot = base.get_mut(&key).ok_or_else(|| Error::Config(format!("unknown key `{path}`")))?;
        match (slot, value) {
            (Value::Table(b), Value::Table(f)) => merge(b, f, &path)?,
            (Value::Table(_), _) => return Err(cfg_err(&path, "must be a table")),
            (slot, v) => *slot = coerce(&path, slot, v)?,
        }
    }
    Ok(())
}

fn set_key(base: &mut Table, key: &str, value: Value) -> Result<()> {
    let (block, field) = key.split_once('.').ok_or_else(|| Error::Config(format!("override key `{key}` must be block.key")))?;
    let slot = base
        .get_mut(block)
        .and_then(Value::as_table_mut)
        .and_then(|t| t.get_mut(field))
        .ok_or_else(|| Error::Config(format!("unknown key `{key}`")))?;
    *slot = coerce(key, slot, value)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let back = RunConfig::from_str_with(&cfg.to_toml_string(), &[]).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn infinite_radius_round_trips() {
        let cfg = RunConfig::from_str_with("[source]\nr0 = inf\n", &[]).unwrap();
        assert!(cfg.source.r0.is_infinite());
        assert!(cfg.to_toml_string().contains("r0 = inf"));
        assert_eq!(RunConfig::from_str_with(&cfg.to_toml_string(), &[]).unwrap(), cfg);
        let set = RunConfig::from_str_with("", &["source.r0=inf".into()]).unwrap();
        assert!(set.source.r0.is_infinite());
    }

    #[test]
    fn overrides_apply_in_order_and_coerce_integers() {
        let cfg = RunConfig::from_str_with(
            "[source]\na0 = 7\n",
            &["source.a0=12".into(), "scan.regime=both".into(), "source.x0 = -3".into()],
        )
        .unwrap();
        assert_eq!(cfg.source.a0, 12.0);
        assert_eq!(cfg.source.x0, -3.0);
        assert_eq!(cfg.scan_regime().unwrap(), ScanRegime::Both);
    }

    #[test]
    fn errors_name_the_field() {
        let cases: &[(&str, &[&str], &str)] = &[
            ("[source]\na0 = -1.0\n", &[], "source.a0"),
            ("", &["scan.n_z=0"], "scan.n_z"),
            ("", &["scan.z_min=10", "scan.z_max=1"], "scan.z_min"),
            ("", &["scan.regime=sideways"], "scan.regime"),
            ("[source]\nfoo = 1.0\n", &[], "source.foo"),
            ("", &["waveguide.omega=fast"], "waveguide.omega"),
            ("", &["mixture.weights=[1.0]"], "mixture.weights"),
            ("", &["nosuch"], "nosuch"),
        ];
        for (text, sets, field) in cases {
            let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
            match RunConfig::from_str_with(text, &sets) {
                Err(e @ Error::Config(_)) => {
                    assert!(e.to_string().contains(field), "{e} should mention {field}");
                    assert_eq!(e.exit_code(), 1);
                }
                other => panic!("{field}: expected config error, got {other:?}"),
            }
        }
    }

    #[test]
    fn flat_form_feeds_back_through_overrides() {
        let cfg = RunConfig::from_str_with("", &["source.r0=inf".into(), "outputs.prefix=\"fig 2\"".into()]).unwrap();
        let flat = cfg.flat();
        assert!(!flat.contains('\n'));
        // values with spaces are quoted, so splitting on `.key=` boundaries is safe
        let mut sets = Vec::new();
        for (block, body) in cfg.to_table() {
            for (k, v) in body.as_table().unwrap() {
                sets.push(format!("{block}.{k}={v}"));
            }
        }
        assert_eq!(RunConfig::from_str_with("", &sets).unwrap(), cfg);
    }

    #[test]
    fn z_samples_hit_both_ends() {
        let cfg = RunConfig::from_str_with("", &["scan.z_min=0".into(), "scan.z_max=1".into(), "scan.n_z=4".into()]).unwrap();
        assert_eq!(cfg.z_samples(), vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let one = RunConfig::from_str_with("", &["scan.n_z=1".into(), "scan.z_min=5".into(), "scan.z_max=9".into()]).unwrap();
        assert_eq!(one.z_samples(), vec![5.0]);
    }
}
