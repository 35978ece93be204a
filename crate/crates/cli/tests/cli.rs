use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bandgap::config::{from_toml_str, from_tree, load_tree};
use bandgap::output::CsvTable;

const STANDARD: &str = "[model]\nalpha = 1.0\nomega_b = 5.0\nomega0 = 100.0\nomega_c = 800.0\ndelta = 30.0\n";
const REDUCED: &str = "[model]\nalpha = 1.0\nomega_b = 2.0\nomega0 = 20.0\nomega_c = 100.0\ndelta = 1.0\n";

fn bandgap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bandgap")).current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn read_json(p: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn missing_alpha_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", &STANDARD.replace("alpha = 1.0\n", ""));
    let o = bandgap(d.path(), &["-c", "c.toml", "polaron"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("model.alpha"), "{err}");
    assert!(!d.path().join("out").exists());
}

#[test]
fn all_problems_reported_together() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", &format!("{STANDARD}[evolution]\nd_b = \"six\"\nchi = 3\n"));
    let o = bandgap(d.path(), &["-c", "c.toml", "--omega-b=-1", "polaron"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["model.omega_b", "evolution.d_b", "evolution.chi: unknown key"] {
        assert!(err.contains(key), "{key} not in {err}");
    }
}

#[test]
fn delta_flag_overrides_file() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", STANDARD);
    let o = bandgap(d.path(), &["-c", "c.toml", "--delta", "15", "polaron"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let echo = from_toml_str(&fs::read_to_string(d.path().join("out/config.toml")).unwrap()).unwrap();
    assert_eq!(echo.model.delta, 15.0);
    let m = read_json(d.path().join("out/manifest.json"));
    assert!(m["config"].as_str().unwrap().contains("delta = 15.0"));
}

#[test]
fn standard_file_round_trips() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", STANDARD);
    let a = from_tree(&load_tree(&d.path().join("c.toml")).unwrap(), true).unwrap();
    let b = from_toml_str(&a.to_toml()).unwrap();
    assert_eq!(a, b);
    // JSON input gives the same structure
    let json = serde_json::json!({"model": {"alpha": 1.0, "omega_b": 5.0, "omega0": 100.0, "omega_c": 800.0, "delta": 30.0}});
    write(d.path(), "c.json", &json.to_string());
    let c = from_tree(&load_tree(&d.path().join("c.json")).unwrap(), true).unwrap();
    assert_eq!(a, c);
}

#[test]
fn polaron_reports_standard_value() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", STANDARD);
    let o = bandgap(d.path(), &["-c", "c.toml", "-o", "run", "polaron"]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(d.path().join("run/polaron.json"));
    let p = v["p_up_relaxed"].as_f64().unwrap();
    assert!((p - 0.026).abs() < 0.010, "{p}");
    let m = read_json(d.path().join("run/manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["command"], "polaron");
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn uncoupled_rwa_is_flat() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", &STANDARD.replace("alpha = 1.0", "alpha = 0.0"));
    let o = bandgap(d.path(), &["-c", "c.toml", "--set", "rwa.t_max=0.2", "rwa", "--method", "chain", "--method", "volterra"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for m in ["chain", "volterra"] {
        let t = CsvTable::read(&d.path().join(format!("out/rwa_{m}.csv"))).unwrap();
        assert_eq!(t.columns, ["t", "re_A", "im_A", "pop"]);
        assert_eq!(t.rows.len(), 301);
        assert!(t.column("pop").unwrap().iter().all(|p| (p - 1.0).abs() < 1e-12));
    }
}

#[test]
fn rwa_summary_compares_methods() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", REDUCED);
    let o = bandgap(
        d.path(),
        &["-c", "c.toml", "--set", "rwa.t_max=1.5", "--set", "rwa.samples=150", "rwa", "--method", "volterra", "--method", "chain"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(d.path().join("out/rwa_summary.json"));
    let dev = s["pairwise"][0]["sup_pop_deviation"].as_f64().unwrap();
    assert!(dev < 0.02, "{dev}");
}

#[test]
fn chain_coeffs_csv() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", STANDARD);
    let o = bandgap(d.path(), &["-c", "c.toml", "--set", "chain.n=210", "chain-coeffs"]);
    assert_eq!(o.status.code(), Some(0));
    let t = CsvTable::read(&d.path().join("out/chain_coeffs.csv")).unwrap();
    assert_eq!(t.columns, ["n", "eps_abs", "t_n"]);
    assert_eq!(t.meta_value("N"), Some("210"));
    let m: usize = t.meta_value("M").unwrap().parse().unwrap();
    assert!((2100..2100 + 16).contains(&m), "{m}");
    let g: f64 = t.meta_value("g").unwrap().parse().unwrap();
    assert!((g * g - 281.774_900_7).abs() < 1e-5);
    assert!((t.rows[200][1] / 405.0 - 1.0).abs() < 1e-3);
    assert!(t.rows[209][2].is_nan());
}

#[test]
fn evolve_rejects_bad_tebd_config() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", REDUCED);
    let o = bandgap(d.path(), &["-c", "c.toml", "--set", "evolution.d_b=2", "--set", "evolution.t_max=0.1", "evolve"]);
    assert_eq!(o.status.code(), Some(2));
    let m = read_json(d.path().join("out/manifest.json"));
    assert_eq!(m["status"], "failed");
    assert!(m["error"].as_str().unwrap().contains("d_b"));
}

#[test]
fn evolve_writes_time_series() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", &format!("{REDUCED}[evolution]\nmode = \"rwa\"\nd_b = 2\nt_max = 0.5\ndt = 0.005\n"));
    let o = bandgap(d.path(), &["-c", "c.toml", "evolve"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let t = CsvTable::read(&d.path().join("out/evolve.csv")).unwrap();
    for c in ["t", "pop", "sx", "sy", "sz", "norm_drift", "max_bond", "discarded", "conserved_charge", "tail_occ"] {
        assert!(t.column(c).is_some(), "{c}");
    }
    assert_eq!(t.rows.len(), 101);
    let q = t.column("conserved_charge").unwrap();
    assert!(q.iter().all(|x| (x - 1.0).abs() < 1e-4));
}

#[test]
fn rerun_from_manifest_is_bit_identical() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "c.toml", REDUCED);
    let args = ["--set", "rwa.t_max=1.0", "--set", "rwa.samples=100", "rwa", "--method", "chain"];
    let mut first = vec!["-c", "c.toml", "-o", "a"];
    first.extend(args);
    assert_eq!(bandgap(d.path(), &first).status.code(), Some(0));
    let m = read_json(d.path().join("a/manifest.json"));
    write(d.path(), "echo.toml", &m["config"].as_str().unwrap().replace("directory = \"a\"", "directory = \"b\""));
    assert_eq!(bandgap(d.path(), &["-c", "echo.toml", "rwa"]).status.code(), Some(0));
    let a = fs::read(d.path().join("a/rwa_chain.csv")).unwrap();
    let b = fs::read(d.path().join("b/rwa_chain.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_resume_computes_only_missing_points() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "c.toml",
        &format!("{REDUCED}[sweep]\ndeltas = [1.0, 4.0]\nmethods = [\"rwa\"]\nt_max_rwa = 5.0\nsamples_rwa = 500\n"),
    );
    assert_eq!(bandgap(d.path(), &["-c", "c.toml", "sweep", "--jobs", "2"]).status.code(), Some(0));
    let full = fs::read(d.path().join("out/summary.csv")).unwrap();
    // interrupted before the second point finished
    fs::remove_file(d.path().join("out/points/delta_4.0/point.json")).unwrap();
    fs::remove_file(d.path().join("out/summary.csv")).unwrap();
    let o = bandgap(d.path(), &["-c", "c.toml", "sweep", "--deltas", "1,4,6", "--jobs", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(d.path().join("out/manifest.json"));
    assert_eq!(m["details"]["computed"], serde_json::json!([4.0, 6.0]));
    assert_eq!(m["details"]["reused"], serde_json::json!([1.0]));
    let t = CsvTable::read(&d.path().join("out/summary.csv")).unwrap();
    assert_eq!(t.columns, ["delta", "stat_pop_rwa", "stat_pop_full", "freq_rwa", "freq_full", "decay_rwa"]);
    assert_eq!(t.column("delta").unwrap(), [1.0, 4.0, 6.0]);
    // the first two rows match the uninterrupted run
    let old = CsvTable::parse(std::str::from_utf8(&full).unwrap()).unwrap();
    for (a, b) in old.rows.iter().zip(&t.rows) {
        assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
    // a changed setting invalidates every point
    let o = bandgap(d.path(), &["-c", "c.toml", "--set", "sweep.samples_rwa=400", "sweep"]);
    assert_eq!(o.status.code(), Some(0));
    let m = read_json(d.path().join("out/manifest.json"));
    assert_eq!(m["details"]["reused"], serde_json::json!([]));
}

#[test]
fn sweep_result_independent_of_jobs() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "c.toml",
        &format!("{REDUCED}[sweep]\ndeltas = [0.5, 1.0, 3.0]\nt_max_rwa = 3.0\nsamples_rwa = 300\n"),
    );
    assert_eq!(bandgap(d.path(), &["-c", "c.toml", "-o", "a", "sweep", "--jobs", "1"]).status.code(), Some(0));
    assert_eq!(bandgap(d.path(), &["-c", "c.toml", "-o", "b", "sweep", "--jobs", "3"]).status.code(), Some(0));
    assert_eq!(fs::read(d.path().join("a/summary.csv")).unwrap(), fs::read(d.path().join("b/summary.csv")).unwrap());
}

fn two_series(dir: &Path) {
    let mut a = CsvTable::new(["t", "pop"]);
    let mut b = CsvTable::new(["t", "pop"]);
    for j in 0..50 {
        let t = j as f64 * 0.1;
        a.push(vec![t, (-t).exp()]);
        b.push(vec![t, 0.5 + 0.5 * (-2.0 * t).exp()]);
    }
    fs::write(dir.join("rwa.csv"), a.to_bytes().unwrap()).unwrap();
    fs::write(dir.join("full.csv"), b.to_bytes().unwrap()).unwrap();
}

#[test]
fn plot_is_deterministic_with_marker_styles() {
    let d = tempfile::tempdir().unwrap();
    two_series(d.path());
    let args = |o: &'static str| {
        vec!["-o", o, "plot", "--series", "rwa.csv:pop:RWA", "--series", "full.csv:pop:full:open", "--alpha-time", "--log-y"]
    };
    assert_eq!(bandgap(d.path(), &args("a")).status.code(), Some(0));
    assert_eq!(bandgap(d.path(), &args("b")).status.code(), Some(0));
    let a = fs::read_to_string(d.path().join("a/plot.svg")).unwrap();
    assert_eq!(a.as_bytes(), fs::read(d.path().join("b/plot.svg")).unwrap());
    assert!(a.starts_with("<?xml") && a.contains("version=\"1.1\""));
    assert!(a.contains(">RWA<") && a.contains(">full<"));
    assert!(a.contains("fill=\"white\""));
}

#[test]
fn plot_errors() {
    let d = tempfile::tempdir().unwrap();
    two_series(d.path());
    write(d.path(), "empty.csv", "");
    write(d.path(), "header_only.csv", "# x: 1\nt,pop\n");
    for s in ["empty.csv:pop", "header_only.csv:pop", "rwa.csv:missing"] {
        let o = bandgap(d.path(), &["plot", "--series", s]);
        assert_eq!(o.status.code(), Some(1), "{s}");
        assert!(!d.path().join("out/plot.svg").exists());
    }
}

#[test]
fn writes_stay_inside_output_directory() {
    let d = tempfile::tempdir().unwrap();
    two_series(d.path());
    let o = bandgap(d.path(), &["-o", "out", "plot", "--series", "rwa.csv:pop", "--name", "../escape.svg"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!d.path().join("escape.svg").exists());
}

#[test]
fn analyze_extracts_frequency() {
    let d = tempfile::tempdir().unwrap();
    let mut t = CsvTable::new(["t", "sx"]);
    for j in 0..=4000 {
        let x = j as f64 * 0.01;
        t.push(vec![x, 0.3 + (-0.05 * x).exp() * (2.5 * x).cos()]);
    }
    fs::write(d.path().join("s.csv"), t.to_bytes().unwrap()).unwrap();
    let o = bandgap(d.path(), &["analyze", "--input", "s.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(d.path().join("out/analysis.json"));
    assert!((v["frequency"].as_f64().unwrap() / 2.5 - 1.0).abs() < 0.01);
    assert!((v["decay_rate"].as_f64().unwrap() / 0.05 - 1.0).abs() < 0.1);
}
