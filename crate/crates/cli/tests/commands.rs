use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use billiard_cli::commands::{
    cmd_solve_cavity, cmd_spectrum, cmd_sweep, cmd_two_body, cmd_validate_1d, shift_self_test,
};
use billiard_cli::validate::{cmd_validate, Faults};
use billiard_cli::RunConfig;
use billiard_core::scattering::TStore;

fn small(dir: &Path) -> RunConfig {
    let text = format!(
        r#"
output_dir = "{}"
[basis]
m_max = 24
n_max = 10
k_keep = 200
[sweep]
k_min = 1.0
k_max = 5.0
points = 201
[spectrum]
windows = [{{ k_min = 2.0, k_max = 5.0, modes = 2 }}]
[twobody]
states = 2
order = 48
"#,
        dir.display()
    );
    RunConfig::from_toml(&text).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn rectangle_energies_are_analytic_and_cached() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg = RunConfig::from_toml_with(
        &cfg.to_toml(),
        &[
            "geometry={kind=\"rectangle\", height=1.0, length=1.5}".into(),
            "basis.k_keep=20".into(),
            "basis.m_max=10".into(),
            "basis.n_max=6".into(),
        ],
    )
    .unwrap();
    let first = cmd_solve_cavity(&cfg).unwrap();
    assert!(!first.cache_hit);
    let mut exact: Vec<f64> = (0..10)
        .flat_map(|m| (1..=6).map(move |n| (m as f64 * PI / 1.5).powi(2) + (n as f64 * PI).powi(2)))
        .collect();
    exact.sort_by(f64::total_cmp);
    for (row, e) in rows(&first.energies_csv).iter().zip(&exact) {
        let got: f64 = row[1].parse().unwrap();
        assert!((got - e).abs() < 1e-9 * e);
    }
    let text = fs::read_to_string(&first.energies_csv).unwrap();
    let second = cmd_solve_cavity(&cfg).unwrap();
    assert!(second.cache_hit);
    assert_eq!(fs::read_to_string(&second.energies_csv).unwrap(), text);
}

#[test]
fn sweep_outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut ca = small(a.path());
    ca.cache = false;
    let cb = small(b.path());
    let sa = cmd_sweep(&ca).unwrap();
    let sb = cmd_sweep(&cb).unwrap();
    assert_eq!(fs::read(&sa.csv).unwrap(), fs::read(&sb.csv).unwrap());
    assert_eq!(
        fs::read(&sa.t_store).unwrap(),
        fs::read(&sb.t_store).unwrap()
    );
    assert!(!a.path().join("cache").exists());
    assert!(sa.max_unitarity_defect < 1e-3);

    let text = fs::read_to_string(&sa.csv).unwrap();
    assert!(text.starts_with("# billiard "));
    assert!(text.contains(&format!("# config {}", ca.hash())));
    assert!(text.contains("k in pi/w"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "k_over_piw,T,N_open,unitarity_defect,status");
    for row in rows(&sa.csv) {
        if row[4] == "ok" {
            let t: f64 = row[1].parse().unwrap();
            let n: f64 = row[2].parse().unwrap();
            assert!(t >= -1e-12 && t <= n + 1e-12);
        }
    }

    let store = TStore::read(fs::File::open(&sa.t_store).unwrap()).unwrap();
    assert_eq!(store.records.len(), 201);
    let csv_rows = rows(&sa.csv);
    for (r, row) in store.records.iter().zip(&csv_rows) {
        if let Some(t) = &r.t {
            let mut sum = 0.0;
            for i in 0..t.nrows() {
                for j in 0..t.ncols() {
                    sum += t[(i, j)].norm_sqr();
                }
            }
            assert!((sum - row[1].parse::<f64>().unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn straight_guide_sweep_is_a_staircase() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_toml_with(
        "",
        &[
            format!("output_dir={:?}", dir.path().display().to_string()),
            "geometry={kind=\"rectangle\", height=1.0, length=1.0}".into(),
            "basis={m_max=200, n_max=4, k_keep=800, grid=1024}".into(),
            "sweep={k_min=1.05, k_max=3.95, points=30}".into(),
            "spectrum.windows=[]".into(),
            "twobody.states=2".into(),
        ],
    )
    .unwrap();
    let s = cmd_sweep(&cfg).unwrap();
    for row in rows(&s.csv) {
        let k: f64 = row[0].parse().unwrap();
        if row[4] == "ok" {
            let t: f64 = row[1].parse().unwrap();
            assert!((t - k.floor()).abs() < 1e-3, "k={k} T={t}");
        }
    }
}

#[test]
fn spectra_and_shift_test() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let reports = cmd_spectrum(&cfg).unwrap();
    assert_eq!(reports.len(), 1);
    assert!(!reports[0].peaks.is_empty());
    for name in ["power_2-5.csv", "t11_2-5.csv", "peaks_2-5.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let power = rows(&dir.path().join("power_2-5.csv"));
    assert!(power.iter().all(|r| r[1].parse::<f64>().unwrap() >= 0.0));
    let l = shift_self_test(&cfg, 4.2).unwrap();
    assert!((l - 4.2).abs() < 0.01);
}

#[test]
fn barrier_csv_and_validate_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let s = cmd_validate_1d(&cfg).unwrap();
    assert!(s.max_error < 1e-3);
    assert_eq!(rows(&s.csv).len(), 200);

    let good = cmd_validate(&cfg, Faults::default()).unwrap();
    assert!(good.passed(), "{good:?}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validate.json")).unwrap())
            .unwrap();
    assert_eq!(json["status"], "PASS");
    assert!(json["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["tolerance"].is_number()));

    let bad = cmd_validate(&cfg, Faults { flip_r_sign: true }).unwrap();
    assert!(!bad.passed());
    let failed: Vec<&str> = bad
        .checks
        .iter()
        .filter(|c| c.status == "FAIL")
        .map(|c| c.name)
        .collect();
    assert_eq!(failed, ["barrier_amplitude_phase"]);
}

#[test]
fn two_body_energies_sit_above_free_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let (e, path) = cmd_two_body(&cfg).unwrap();
    assert_eq!(e.len(), 4);
    for row in rows(&path) {
        let (e, free): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!(e > free);
    }
}

#[test]
fn binary_honours_flags_and_cache_env() {
    let dir = tempfile::tempdir().unwrap();
    let cache = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    fs::write(&cfg_path, small(&dir.path().join("out")).to_toml()).unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_billiard"))
            .arg("--config")
            .arg(&cfg_path)
            .args(args)
            .env("BILLIARD_CACHE_DIR", cache.path())
            .env("RUST_LOG", "info")
            .output()
            .unwrap()
    };
    let out = run(&["solve-cavity", "--set", "basis.k_keep=50"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(rows(&dir.path().join("out/energies.csv")).len(), 50);
    assert_eq!(fs::read_dir(cache.path()).unwrap().count(), 2);
    let again = run(&["solve-cavity", "--set", "basis.k_keep=50"]);
    assert!(String::from_utf8_lossy(&again.stderr).contains("cache hit"));

    let printed = run(&["sweep", "--points", "11", "--print-config"]);
    let cfg = RunConfig::from_toml(&String::from_utf8_lossy(&printed.stdout)).unwrap();
    assert_eq!(cfg.sweep.points, 11);

    let bad = run(&["sweep", "--set", "sweep.colour=1"]);
    assert_eq!(bad.status.code(), Some(2));
    let failing = run(&["validate", "--inject-sign-error"]);
    assert_eq!(failing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&failing.stdout).contains("\"FAIL\""));
}
