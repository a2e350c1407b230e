//! Scenario drivers behind the `grin-coherence` binary.
//!
//! Each `cmd_*` takes a resolved [`RunConfig`], writes its CSV files under
//! `outputs.directory` and returns what it computed so callers (and tests)
//! can inspect the numbers without reparsing files.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{RunConfig, ScanRegime};
use crate::engine::{symmetric_grid, Engine};
use crate::error::{Error, Result};
use crate::evolution::{fringe_visibility, mixture_profile, IntensityProfile, Visibility};
use crate::observables::{coherence_radius, entropy_numeric, purity_numeric, record_at, squeezing, ObservableRecord};
use crate::source::{decompose, entropy, purity_closed_form, SourceSpec};
use crate::waveguide::Regime;

/// Hermiticity and positivity slack for the z = 0 sanity check.
const HERM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;

fn thread_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.numerics.workers as usize)
        .build()
        .map_err(|e| Error::Config(format!("`numerics.workers`: {e}")))
}

/// Runs `f` on a pool sized by `numerics.workers`.
pub fn with_workers<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    thread_pool(cfg)?.install(f)
}

/// Engine for `source` with the config's medium and numerics; checks the
/// launch matrix and optionally dumps the coupling matrix.
pub fn build_engine(cfg: &RunConfig, source: SourceSpec) -> Result<Engine> {
    let engine = Engine::new(source, cfg.waveguide_spec()?, cfg.engine_numerics())?;
    engine.gamma_at(0.0, Regime::Exact).check_physical(HERM_TOL, PSD_TOL)?;
    if cfg.outputs.coupling_dump {
        let suffix = if source.x0 < 0.0 { "coupling_minus" } else { "coupling" };
        let mut out = create(&cfg.output_path(suffix))?;
        writeln!(out, "{}", cfg.header_line("coupling"))?;
        engine.coupling().write_csv(&mut out)?;
        out.flush()?;
    }
    Ok(engine)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Profile grid: `numerics.grid_half_width` when set, otherwise the
/// engine's beam-scale default.
pub fn profile_grid(cfg: &RunConfig, engine: &Engine) -> Vec<f64> {
    let points = cfg.numerics.grid_points as usize;
    if cfg.numerics.grid_half_width > 0.0 {
        symmetric_grid(cfg.numerics.grid_half_width, points)
    } else {
        engine.default_grid(points)
    }
}

/// Records at every `zs`, in order. Fails on a drifting trace, purity above
/// one or a non-positive width.
pub fn scan_records(engine: &Engine, zs: &[f64], regime: Regime) -> Result<Vec<ObservableRecord>> {
    let trace0 = engine.propagator().g0.trace();
    let k = engine.guide.k();
    let floor = 1.0 / (4.0 * k * k);
    zs.par_iter()
        .map(|&z| {
            let rec = record_at(engine, z, regime)?;
            let trace = engine.bands_at(z, regime).diag.iter().sum::<f64>();
            if (trace - trace0).abs() > 1e-8 * trace0 {
                return Err(Error::NumericalGuard(format!("trace drifted to {trace} from {trace0} at z={z}")));
            }
            if !(rec.sigma_x2 > 0.0 && rec.sigma_p2 > 0.0) || rec.purity > 1.0 + 1e-10 || rec.up_sr < floor * (1.0 - 1e-9) {
                return Err(Error::NumericalGuard(format!("unphysical moments at z={z}: {rec:?}")));
            }
            Ok(rec)
        })
        .collect()
}

pub fn write_scan_csv<W: Write>(mut out: W, cfg: &RunConfig, regime: Regime, records: &[ObservableRecord]) -> Result<()> {
    writeln!(out, "{} regime={regime}", cfg.header_line("scan"))?;
    writeln!(out, "{}", ObservableRecord::CSV_HEADER)?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Observables over the configured z range; `regime = both` writes one file
/// per regime.
pub fn cmd_scan(cfg: &RunConfig) -> Result<Vec<(PathBuf, Vec<ObservableRecord>)>> {
    let regimes = cfg.scan_regime()?;
    with_workers(cfg, || {
        let engine = build_engine(cfg, cfg.source_spec()?)?;
        let zs = cfg.z_samples();
        let mut written = Vec::new();
        for regime in regimes.regimes() {
            let records = scan_records(&engine, &zs, regime)?;
            let path = match regimes {
                ScanRegime::Both => cfg.output_path(&format!("scan_{regime}")),
                ScanRegime::One(_) => cfg.output_path("scan"),
            };
            let mut out = create(&path)?;
            write_scan_csv(&mut out, cfg, regime, &records)?;
            out.flush()?;
            written.push((path, records));
        }
        Ok(written)
    })
}

fn write_profile(cfg: &RunConfig, command: &str, path: &Path, profile: &IntensityProfile, split: bool, note: &str) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{} {note}", cfg.header_line(command))?;
    profile.write_csv(&mut out, split)?;
    out.flush()?;
    Ok(())
}

/// Intensity at `profile.z`.
pub fn cmd_profile(cfg: &RunConfig) -> Result<(PathBuf, IntensityProfile)> {
    with_workers(cfg, || {
        let engine = build_engine(cfg, cfg.source_spec()?)?;
        let grid = profile_grid(cfg, &engine);
        let profile = engine.profile(cfg.profile.z, cfg.profile_regime(), &grid)?;
        let path = cfg.output_path("profile");
        write_profile(cfg, "profile", &path, &profile, cfg.profile.split, &format!("z={}", cfg.profile.z))?;
        Ok((path, profile))
    })
}

/// Two mirror-image sources and their incoherent sum.
#[derive(Debug, Clone)]
pub struct MixtureReport {
    pub plus: IntensityProfile,
    pub minus: IntensityProfile,
    pub sum: IntensityProfile,
    pub window: (f64, f64),
    pub vis_plus: Visibility,
    pub vis_minus: Visibility,
    pub vis_sum: Visibility,
    pub files: Vec<PathBuf>,
}

impl MixtureReport {
    /// Visibility of the sum relative to the `+x0` source alone.
    pub fn ratio(&self) -> f64 {
        if self.vis_plus.value > 0.0 {
            self.vis_sum.value / self.vis_plus.value
        } else {
            f64::NAN
        }
    }
}

/// Central visibility window, `+-mixture.window` or `+-|x0|/2`.
pub fn mixture_window(cfg: &RunConfig) -> (f64, f64) {
    let w = if cfg.mixture.window > 0.0 {
        cfg.mixture.window
    } else if cfg.source.x0 != 0.0 {
        cfg.source.x0.abs() / 2.0
    } else {
        cfg.source.a0
    };
    (-w, w)
}

/// Profiles of the `+x0` and `-x0` sources at `mixture.z`, their weighted
/// incoherent sum and the fringe visibility of each.
pub fn cmd_mixture(cfg: &RunConfig) -> Result<MixtureReport> {
    with_workers(cfg, || {
        let spec = cfg.source_spec()?;
        let x0 = spec.x0.abs();
        let plus_engine = build_engine(cfg, spec.with_x0(x0))?;
        let minus_engine = build_engine(cfg, spec.with_x0(-x0))?;
        let grid = profile_grid(cfg, &plus_engine);
        let (z, regime) = (cfg.mixture.z, cfg.mixture_regime());
        let plus = plus_engine.profile(z, regime, &grid)?;
        let minus = minus_engine.profile(z, regime, &grid)?;
        let total: f64 = cfg.mixture.weights.iter().sum();
        let weights: Vec<f64> = cfg.mixture.weights.iter().map(|w| w / total).collect();
        let sum = mixture_profile(&[plus.clone(), minus.clone()], &weights)?;
        let window = mixture_window(cfg);
        let vis_plus = fringe_visibility(&plus, window)?;
        let vis_minus = fringe_visibility(&minus, window)?;
        let vis_sum = fringe_visibility(&sum, window)?;

        let note = format!("z={z}");
        let files = vec![
            cfg.output_path("mixture_plus"),
            cfg.output_path("mixture_minus"),
            cfg.output_path("mixture_overlay"),
            cfg.output_path("mixture_sum"),
        ];
        write_profile(cfg, "mixture", &files[0], &plus, true, &format!("{note} x0={x0}"))?;
        write_profile(cfg, "mixture", &files[1], &minus, true, &format!("{note} x0={}", -x0))?;
        let mut out = create(&files[2])?;
        writeln!(out, "{} {note}", cfg.header_line("mixture"))?;
        writeln!(out, "x_um,I_plus,I_minus,I_sum")?;
        for i in 0..grid.len() {
            writeln!(out, "{:.6},{:.12e},{:.12e},{:.12e}", grid[i], plus.total[i], minus.total[i], sum.total[i])?;
        }
        out.flush()?;
        write_profile(cfg, "mixture", &files[3], &sum, true, &format!("{note} weights={:?}", cfg.mixture.weights))?;
        Ok(MixtureReport { plus, minus, sum, window, vis_plus, vis_minus, vis_sum, files })
    })
}

/// Outcome of the cat-distance search.
#[derive(Debug, Clone, PartialEq)]
pub struct CatReport {
    pub z_cat: f64,
    pub r_c: f64,
    /// Largest squeezing coefficient within half an oscillation period of
    /// `z_cat`.
    pub nu_envelope: f64,
    pub z_rev_estimate: f64,
    pub l_osc: f64,
    /// Per oscillation period: position of the largest `r_c`, that value
    /// and the largest `nu`.
    pub envelope: Vec<(f64, f64, f64)>,
}

impl CatReport {
    pub fn ratio(&self) -> f64 {
        self.z_cat / self.z_rev_estimate
    }
}

/// Coarse sampling of the `r_c` envelope, then golden-section refinement of
/// `r_c` around the best sample.
pub fn find_cat(engine: &Engine, cfg: &RunConfig) -> Result<CatReport> {
    let f = &cfg.find_cat;
    let regime = cfg.find_cat_regime();
    let lengths = engine.lengths();
    let (z_lo, z_hi) = (f.window_min * lengths.z_rev_estimate, f.window_max * lengths.z_rev_estimate);
    let per = f.samples_per_losc as usize;
    let dz = lengths.l_osc / per as f64;
    let windows = ((z_hi - z_lo) / lengths.l_osc).ceil() as usize;
    let k = engine.guide.k();
    let omega = engine.guide.omega;

    let probe = |z: f64| -> Result<(f64, f64)> {
        let m = engine.moments_at(z, regime)?;
        Ok((coherence_radius(&m, k), squeezing(&m, omega)))
    };
    let samples: Vec<(f64, f64)> = (0..windows * per).into_par_iter().map(|i| probe(z_lo + i as f64 * dz)).collect::<Result<_>>()?;

    let no_cat = |why: String| Error::NoCat(format!("{why}; try a longer find_cat window or a displaced, partially coherent source"));
    if samples.iter().all(|s| !s.0.is_finite()) {
        return Err(no_cat("coherence radius is infinite throughout (coherent, stationary beam)".into()));
    }
    let envelope: Vec<(f64, f64, f64)> = samples
        .chunks(per)
        .enumerate()
        .map(|(w, chunk)| {
            let (j, rc) = chunk.iter().map(|s| s.0).enumerate().fold((0, f64::NEG_INFINITY), |a, (j, r)| if r > a.1 { (j, r) } else { a });
            let nu = chunk.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            (z_lo + (w * per + j) as f64 * dz, rc, nu)
        })
        .collect();
    let best = envelope.iter().copied().fold((0.0, f64::NEG_INFINITY, 0.0), |a, e| if e.1 > a.1 { e } else { a });
    let mut sorted: Vec<f64> = envelope.iter().map(|e| e.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    if !best.1.is_finite() || !(best.1 >= f.min_contrast * median) {
        return Err(no_cat(format!("no recoherence peak: envelope maximum {:.4} um vs median {:.4} um", best.1, median)));
    }

    let z_cat = golden_max(|z| probe(z).map(|p| p.0).unwrap_or(f64::NEG_INFINITY), best.0 - dz, best.0 + dz, 1e-6 * dz);
    let (r_c, _) = probe(z_cat)?;
    let mut nu_envelope = f64::NEG_INFINITY;
    for i in 0..=per {
        nu_envelope = nu_envelope.max(probe(z_cat - 0.5 * lengths.l_osc + i as f64 * dz)?.1);
    }
    Ok(CatReport { z_cat, r_c, nu_envelope, z_rev_estimate: lengths.z_rev_estimate, l_osc: lengths.l_osc, envelope })
}

/// Maximizer of a unimodal `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Locates the cat distance and writes the `r_c` envelope.
pub fn cmd_find_cat(cfg: &RunConfig) -> Result<(PathBuf, CatReport)> {
    with_workers(cfg, || {
        let engine = build_engine(cfg, cfg.source_spec()?)?;
        let report = find_cat(&engine, cfg)?;
        let path = cfg.output_path("find_cat");
        let mut out = create(&path)?;
        writeln!(
            out,
            "{} z_cat={:.6} r_c={:.9e} nu_env={:.9e} z_cat/z_rev={:.9}",
            cfg.header_line("find-cat"),
            report.z_cat,
            report.r_c,
            report.nu_envelope,
            report.ratio()
        )?;
        writeln!(out, "z_um,r_c_envelope_um,nu_envelope")?;
        for (z, rc, nu) in &report.envelope {
            writeln!(out, "{z:.6},{rc:.12e},{nu:.12e}")?;
        }
        out.flush()?;
        Ok((path, report))
    })
}

/// One point of the purity/entropy curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityRow {
    pub ratio: f64,
    pub r0: f64,
    pub purity_closed: f64,
    pub purity_numeric: f64,
    pub entropy_closed: f64,
    pub entropy_numeric: f64,
}

/// Log-spaced `r0/a0` values of the purity sweep.
pub fn purity_ratios(cfg: &RunConfig) -> Vec<f64> {
    let p = &cfg.purity_curve;
    let n = p.n_ratio as usize;
    if n == 1 {
        return vec![p.ratio_min];
    }
    let (lo, hi) = (p.ratio_min.ln(), p.ratio_max.ln());
    (0..n).map(|i| if i == n - 1 { p.ratio_max } else { (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp() }).collect()
}

/// Purity and entropy against `r0/a0` at fixed `a0`: closed forms from the
/// source spectrum and numeric values from the launched coherence matrix.
pub fn purity_curve(cfg: &RunConfig) -> Result<Vec<PurityRow>> {
    let base = cfg.source_spec()?;
    purity_ratios(cfg)
        .into_iter()
        .map(|ratio| {
            let r0 = ratio * base.a0;
            let spec = SourceSpec::new(base.a0, r0, base.x0)?;
            let dec = decompose(&spec, cfg.numerics.tail_tol)?;
            let engine = Engine::new(spec, cfg.waveguide_spec()?, cfg.engine_numerics())?;
            let g = engine.gamma_at(0.0, Regime::Exact);
            Ok(PurityRow {
                ratio,
                r0,
                purity_closed: purity_closed_form(&dec),
                purity_numeric: purity_numeric(&g),
                entropy_closed: entropy(&dec),
                entropy_numeric: entropy_numeric(&g),
            })
        })
        .collect()
}

pub fn cmd_purity_curve(cfg: &RunConfig) -> Result<(PathBuf, Vec<PurityRow>)> {
    with_workers(cfg, || {
        let rows = purity_curve(cfg)?;
        let path = cfg.output_path("purity");
        let mut out = create(&path)?;
        writeln!(out, "{}", cfg.header_line("purity-curve"))?;
        writeln!(out, "r0_over_a0,r0_um,purity_closed,purity_numeric,entropy_closed,entropy_numeric")?;
        for r in &rows {
            writeln!(
                out,
                "{:.9e},{:.9e},{:.15e},{:.15e},{:.15e},{:.15e}",
                r.ratio, r.r0, r.purity_closed, r.purity_numeric, r.entropy_closed, r.entropy_numeric
            )?;
        }
        out.flush()?;
        Ok((path, rows))
    })
}

#[derive(Debug, Parser)]
#[command(name = "grin-coherence", version, about = "Partially coherent light in a parabolic graded-index waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// TOML config; keys not given keep their defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set source.x0=-20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Observables against propagation distance.
    Scan(ConfigArgs),
    /// Intensity profile at one distance.
    Profile(ConfigArgs),
    /// Profiles of two mirror-image sources and their incoherent sum.
    Mixture(ConfigArgs),
    /// Search for the cat distance.
    FindCat(ConfigArgs),
    /// Purity and entropy against r0/a0.
    PurityCurve(ConfigArgs),
}

impl Command {
    pub fn config_args(&self) -> &ConfigArgs {
        match self {
            Command::Scan(a) | Command::Profile(a) | Command::Mixture(a) | Command::FindCat(a) | Command::PurityCurve(a) => a,
        }
    }
}

/// Runs a parsed command; the returned text is the stdout summary.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<String> {
    let mut s = String::new();
    use std::fmt::Write as _;
    match command {
        Command::Scan(_) => {
            for (path, recs) in cmd_scan(cfg)? {
                let _ = writeln!(s, "wrote {} ({} records)", path.display(), recs.len());
            }
        }
        Command::Profile(_) => {
            let (path, p) = cmd_profile(cfg)?;
            let _ = writeln!(s, "wrote {} ({} points, peak {:.6e})", path.display(), p.len(), p.max_total());
        }
        Command::Mixture(_) => {
            let r = cmd_mixture(cfg)?;
            for f in &r.files {
                let _ = writeln!(s, "wrote {}", f.display());
            }
            let _ = writeln!(s, "visibility in [{}, {}] um:", r.window.0, r.window.1);
            for (name, v) in [("+x0", r.vis_plus), ("-x0", r.vis_minus), ("sum", r.vis_sum)] {
                let _ = writeln!(s, "  {name:>4}  {:.6}  ({} turning points{})", v.value, v.extrema, if v.has_fringes { "" } else { ", no fringes" });
            }
            let _ = writeln!(s, "  sum/single ratio {:.6}", r.ratio());
        }
        Command::FindCat(_) => {
            let (path, r) = cmd_find_cat(cfg)?;
            let _ = writeln!(s, "wrote {}", path.display());
            let _ = writeln!(s, "z_cat          {:.3} um", r.z_cat);
            let _ = writeln!(s, "r_c(z_cat)     {:.6} um", r.r_c);
            let _ = writeln!(s, "nu envelope    {:.6}", r.nu_envelope);
            let _ = writeln!(s, "z_rev estimate {:.3} um", r.z_rev_estimate);
            let _ = writeln!(s, "z_cat/z_rev    {:.6}", r.ratio());
        }
        Command::PurityCurve(_) => {
            let (path, rows) = cmd_purity_curve(cfg)?;
            let _ = writeln!(s, "wrote {} ({} ratios)", path.display(), rows.len());
        }
    }
    Ok(s)
}

/// Entry point of the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let a = cli.command.config_args();
    let result = RunConfig::load(a.config.as_deref(), &a.set).and_then(|cfg| execute(&cli.command, &cfg));
    match result {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
