//! Scenario drivers and the binary: files, determinism, exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

use grin_coherence::cli::{cmd_find_cat, cmd_mixture, cmd_profile, cmd_scan, find_cat};
use grin_coherence::config::RunConfig;
use grin_coherence::{Engine, Error, Numerics};
use tempfile::TempDir;

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets")
}

fn config(dir: &Path, sets: &[&str]) -> RunConfig {
    let mut all: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
    all.push(format!("outputs.directory={:?}", dir.display().to_string()));
    RunConfig::from_str_with("", &all).unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_grin-coherence"))
}

#[test]
fn scan_is_deterministic_and_worker_independent() {
    let dir = TempDir::new().unwrap();
    let sets = ["scan.z_min=2114000", "scan.z_max=2116000", "scan.n_z=301"];
    let one = config(dir.path(), &[&sets[..], &["numerics.workers=1"]].concat());
    let many = config(dir.path(), &[&sets[..], &["numerics.workers=4"]].concat());
    let path = cmd_scan(&one).unwrap()[0].0.clone();
    let first = std::fs::read(&path).unwrap();
    cmd_scan(&many).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
    cmd_scan(&one).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn scan_csv_layout() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &["scan.n_z=1", "scan.z_min=0", "scan.z_max=0", "scan.regime=both"]);
    let out = cmd_scan(&cfg).unwrap();
    assert_eq!(out.len(), 2);
    assert!(out[0].0.ends_with("run_scan_exact.csv") && out[1].0.ends_with("run_scan_paraxial.csv"));
    let text = std::fs::read_to_string(&out[0].0).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# grin-coherence scan ") && lines[0].contains("source.a0=10.0"));
    assert!(!lines[0].contains("workers"));
    assert_eq!(lines[1], "z_um,sigma_x2,sigma_p2,sigma_xp,r_c_um,nu,up_h,up_sr,purity,entropy");
    assert_eq!(lines.len(), 3);
    let r = &out[0].1[0];
    assert!((r.r_c / 5.0 - 1.0).abs() < 1e-6);
    assert!((r.purity - 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn profile_and_mixture_files() {
    let dir = TempDir::new().unwrap();
    let cfg = config(dir.path(), &["numerics.grid_points=513", "profile.z=2115320"]);
    let (path, prof) = cmd_profile(&cfg).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().nth(1), Some("x_um,I_total,I_diagonal,I_cross"));
    assert_eq!(text.lines().count(), 2 + 513);

    let single = config(dir.path(), &["numerics.grid_points=513", "mixture.weights=[1, 0]"]);
    let mix = cmd_mixture(&single).unwrap();
    assert_eq!(mix.files.len(), 4);
    assert!(mix.files.iter().all(|f| f.exists()));
    // weights (1, 0) reproduce the +x0 profile
    assert_eq!(mix.sum.total, prof.total);
    let peak = mix.plus.max_total();
    let mirrored = mix.minus.mirrored();
    assert!(mix.plus.total.iter().zip(&mirrored.total).all(|(a, b)| (a - b).abs() <= 1e-10 * peak));
}

#[test]
fn cat_distance_scales_as_inverse_square_of_gradient() {
    let dir = TempDir::new().unwrap();
    let (_, base) = cmd_find_cat(&config(dir.path(), &[])).unwrap();
    let (_, slow) = cmd_find_cat(&config(dir.path(), &["waveguide.omega=0.0035"])).unwrap();
    let ratio = slow.z_cat / base.z_cat;
    assert!((ratio / 4.0 - 1.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn stationary_beam_has_no_cat() {
    let dir = TempDir::new().unwrap();
    let w0 = (2.0f64 / (2.0 * std::f64::consts::PI / 0.63 * 7e-3)).sqrt();
    let cfg = config(dir.path(), &["source.r0=inf", "source.x0=0", &format!("source.a0={w0}")]);
    let engine = Engine::new(cfg.source_spec().unwrap(), cfg.waveguide_spec().unwrap(), Numerics::default()).unwrap();
    match find_cat(&engine, &cfg) {
        Err(e @ Error::NoCat(_)) => assert_eq!(e.exit_code(), 2),
        other => panic!("expected a no-cat diagnostic, got {other:?}"),
    }
}

#[test]
fn presets_load_and_round_trip() {
    for i in 1..=6 {
        let path = presets().join(format!("fig{i}.cfg"));
        let cfg = RunConfig::load(Some(&path), &[]).unwrap();
        let text = cfg.to_toml_string();
        assert_eq!(RunConfig::from_str_with(&text, &[]).unwrap(), cfg);
        // every key written in the preset survives re-serialization unchanged
        let original: toml::Table = std::fs::read_to_string(&path).unwrap().parse().unwrap();
        let written: toml::Table = text.parse().unwrap();
        for (block, body) in original {
            for (k, v) in body.as_table().unwrap() {
                assert_eq!(Some(v), written[&block].get(k), "fig{i}: {block}.{k}");
            }
        }
    }
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out_dir = format!("outputs.directory={:?}", dir.path().display().to_string());
    let ok = bin()
        .args(["scan", "--config"])
        .arg(presets().join("fig3.cfg"))
        .args(["--set", "scan.n_z=3", "--set", &out_dir])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("fig3_scan.csv").exists());

    let bad = bin().args(["profile", "--set", "source.a0=-2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("source.a0"));

    let missing = bin().args(["scan", "--config", "/nonexistent/fig.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let usage = bin().args(["teleport"]).output().unwrap();
    assert_eq!(usage.status.code(), Some(1));

    let guard = bin().args(["scan", "--set", "numerics.modes=30", "--set", "scan.n_z=1", "--set", &out_dir]).output().unwrap();
    assert_eq!(guard.status.code(), Some(2));

    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["scan", "profile", "mixture", "find-cat", "purity-curve"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}
