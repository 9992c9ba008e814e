use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clockback::{EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_ORACLE};

fn clockback(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clockback"))
        .args(args)
        .env_remove("CLOCKBACK_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Csv {
    fn read(path: &Path) -> Self {
        let text = fs::read_to_string(path).unwrap();
        assert!(!text.contains('\r'));
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines
            .map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect())
            .collect();
        Self { header, rows }
    }

    fn column(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[i]).collect()
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn curve_skewness(summary: &serde_json::Value) -> Vec<f64> {
    summary["curves"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["skewness"].as_f64().unwrap())
        .collect()
}

#[test]
fn figure3_curves_are_normalized_with_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = clockback(&["figure3", "--out", out]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    for alpha in ["2", "10"] {
        let csv = Csv::read(&dir.path().join(format!("figure3_alpha{alpha}.csv")));
        assert_eq!(csv.header, ["P", "re_chi", "im_chi", "abs2"]);
        let area = trapezoid(&csv.column("P"), &csv.column("abs2"));
        assert!((area - 1.0).abs() < 1e-6, "alpha {alpha}: {area}");
    }
    let summary = json(&o);
    let curves = summary["curves"].as_array().unwrap();
    let mean2 = curves[0]["mean"].as_f64().unwrap();
    assert!((mean2 - 2.0).abs() < 0.05 * 2.0, "{mean2}");
    let skew = curve_skewness(&summary);
    assert!(skew[1] > skew[0]);
    let on_disk: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("figure3_summary.json")).unwrap()).unwrap();
    assert_eq!(on_disk, summary);
}

#[test]
fn figure4_matches_quadrature_and_creates_nested_dirs() {
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("a/b/closed");
    let quad = dir.path().join("quad");
    let o = clockback(&["figure4", "--out", closed.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_OK);
    let skew = curve_skewness(&json(&o));
    assert_eq!(skew.len(), 3);
    assert!(skew[0] < skew[1] && skew[1] < skew[2], "{skew:?}");

    let o = clockback(&["figure4", "--oracle", "--out", quad.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_OK);
    for alpha in ["10", "20", "30"] {
        let name = format!("figure4_alpha{alpha}.csv");
        let a = Csv::read(&closed.join(&name));
        let b = Csv::read(&quad.join(&name));
        assert_eq!(a.column("P"), b.column("P"));
        let (ra, rb) = (a.column("re_chi"), b.column("re_chi"));
        let (ia, ib) = (a.column("im_chi"), b.column("im_chi"));
        let peak = rb.iter().zip(&ib).map(|(r, i)| r.hypot(*i)).fold(0.0, f64::max);
        for n in 0..ra.len() {
            let mag = rb[n].hypot(ib[n]);
            if mag > 1e-8 * peak {
                let diff = (ra[n] - rb[n]).hypot(ia[n] - ib[n]);
                assert!(diff <= 1e-6 * mag, "alpha {alpha}, row {n}: {diff} vs {mag}");
            }
        }
    }
}

#[test]
fn output_is_byte_stable_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&clockback(&["figure3", "--out", a.to_str().unwrap()])), EXIT_OK);
    let o = Command::new(env!("CARGO_BIN_EXE_clockback"))
        .args(["figure3", "--out", b.to_str().unwrap()])
        .env("CLOCKBACK_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), EXIT_OK);
    for name in ["figure3_alpha2.csv", "figure3_alpha10.csv", "figure3_summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn transmission_sweep_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = clockback(&[
        "transmission-sweep",
        "--out",
        out,
        "--sweep.widths=1e-2,1e-4,1e-6,0",
        "--sweep.pointer_coordinates=0,0.5",
        "--sweep.k_points=7",
    ]);
    assert_eq!(code(&o), EXIT_OK);
    let csv = Csv::read(&dir.path().join("transmission_sweep.csv"));
    assert_eq!(
        &csv.header[..8],
        ["k", "V", "X0", "re_T", "im_T", "abs2_T", "abs2_R", "unitarity_defect"]
    );
    assert_eq!(csv.rows.len(), 7 * 4 * 2);
    assert!(csv.column("unitarity_defect").iter().all(|&d| d <= 1e-12));
    let q = csv.column("Q");
    for (row, &qv) in csv.rows.iter().zip(&q) {
        if qv == 0.0 {
            assert_eq!(row[5], 1.0);
        }
    }
    // Delta rows against 1/(1 + iαQ) with α = λjM/k, then the rectangles
    // approaching them as the width shrinks.
    let (lambda, j, m) = (20.0, 1.0, 1.0);
    let rows: Vec<&Vec<f64>> = csv.rows.iter().filter(|r| r[8] == 0.5).collect();
    for i in 0..7 {
        let delta_row = rows[3 * 7 + i];
        let k = delta_row[0];
        let alpha = lambda * j * m / k;
        let d = 1.0 + alpha * alpha * 0.25;
        assert!((delta_row[3] - 1.0 / d).abs() < 1e-14);
        assert!((delta_row[4] + 0.5 * alpha / d).abs() < 1e-14);
        let gaps: Vec<f64> = (0..3)
            .map(|w| {
                let r = rows[w * 7 + i];
                (r[3] - delta_row[3]).hypot(r[4] - delta_row[4])
            })
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 1e-4, "{gaps:?}");
    }
}

#[test]
fn json_calculators() {
    let o = clockback(&["regime-classify"]);
    assert_eq!(code(&o), EXIT_OK);
    assert_eq!(json(&o)["regime"], "WEAK");
    let o = clockback(&["regime-classify", "--barrier.lambda=300"]);
    assert_eq!(code(&o), EXIT_OK);
    assert_eq!(json(&o)["regime"], "STRONG_BACKREACTION");

    let o = clockback(&["clock-quality", "--clock.position_spread=0.5", "--clock.mean_momentum=4"]);
    assert_eq!(code(&o), EXIT_OK);
    let v = json(&o);
    assert_eq!(v["quality"]["quality_ratio"], 2.0);
    assert_eq!(v["quality"]["good_clock"], false);

    let o = clockback(&["purity"]);
    assert_eq!(code(&o), EXIT_OK);
    let v = json(&o);
    let p = v["purity"].as_f64().unwrap();
    assert!(p > 0.5 && p <= 1.0);
    assert_eq!(v["rho"]["re"].as_array().unwrap().len(), 2);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    fs::write(&path, "[clock]\nmass = 2\nmean_momentum = 8\n").unwrap();
    let cfg = path.to_str().unwrap();
    let v = json(&clockback(&["clock-quality", "--config", cfg]));
    assert_eq!(v["mass"], 2.0);
    let v = json(&clockback(&["clock-quality", "--config", cfg, "--clock.mass=3"]));
    assert_eq!(v["mass"], 3.0);

    fs::write(&path, "[clock]\nmomentum = 8\n").unwrap();
    assert_eq!(code(&clockback(&["clock-quality", "--config", cfg])), EXIT_CONFIG);
    let missing = dir.path().join("missing.cfg");
    assert_eq!(code(&clockback(&["clock-quality", "--config", missing.to_str().unwrap()])), EXIT_IO);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&clockback(&["purity", "--system.eigenvalues=1,1"])), EXIT_CONFIG);
    assert_eq!(code(&clockback(&["figure3", "--pointer.resolution=0"])), EXIT_CONFIG);
    assert_eq!(code(&clockback(&["bogus"])), EXIT_CONFIG);
    // Momentum distribution too broad for the post-selection integrals.
    assert_eq!(code(&clockback(&["purity", "--clock.position_spread=0.5", "--clock.mean_momentum=4"])), EXIT_CONFIG);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "").unwrap();
    let o = clockback(&["figure3", "--out", file.to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_IO);

    // Every pointer comparison misses a tolerance below round-off.
    let o = clockback(&["validate", "--tol", "1e-30"]);
    assert_eq!(code(&o), EXIT_ORACLE);
    let report = json(&o);
    assert_eq!(report["passed"], false);
}

#[test]
fn validate_passes_by_default() {
    let o = clockback(&["validate"]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json(&o)["passed"], true);
}

#[test]
fn propagate_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = clockback(&[
        "propagate",
        "--out",
        dir.path().to_str().unwrap(),
        "--snapshots",
        "0,15",
        "--propagate.grid_points=1024",
        "--propagate.half_width=100",
        "--propagate.x0=-30",
        "--propagate.t_total=30",
        "--propagate.sigma_k=0.2",
    ]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let t = v["transmitted"].as_f64().unwrap();
    let s = v["stationary_transmission"].as_f64().unwrap();
    assert!((t - s).abs() < 1e-3, "{t} vs {s}");
    let csv = Csv::read(&dir.path().join("snapshot_t15.csv"));
    assert_eq!(csv.header, ["x", "re_psi", "im_psi", "abs2"]);
    assert_eq!(csv.rows.len(), 1024);
    let x = csv.column("x");
    let dx = x[1] - x[0];
    let norm: f64 = csv.column("abs2").iter().sum::<f64>() * dx;
    assert!((norm - 1.0).abs() < 1e-9);
    assert!(dir.path().join("snapshot_t0.csv").exists());
}

#[test]
fn propagate_default_config_runs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let o = clockback(&["propagate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), EXIT_OK, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let t = v["transmitted"].as_f64().unwrap();
    let s = v["stationary_transmission"].as_f64().unwrap();
    assert!((t - s).abs() < 1e-3, "{t} vs {s}");
}

#[test]
fn help_exits_cleanly() {
    let o = clockback(&["--help"]);
    assert_eq!(code(&o), EXIT_OK);
    let text = String::from_utf8_lossy(&o.stdout);
    for cmd in [
        "figure3",
        "figure4",
        "transmission-sweep",
        "regime-classify",
        "clock-quality",
        "purity",
        "validate",
        "propagate",
    ] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
