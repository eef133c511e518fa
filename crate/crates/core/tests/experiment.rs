use std::fs;
use std::path::Path;
use std::process::Command;

use hitlab::experiment::{replot, run, ExperimentConfig, RunReport, RunStatus};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hitlab"))
}

fn config(text: &str, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(text).unwrap();
    cfg.output = out.to_path_buf();
    cfg
}

fn read_report(dir: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn gasket_run_reports_first_generation_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config("kind = \"gasket\"\n[gasket]\nn_max = 3\n", dir.path())).unwrap();
    assert_eq!(report.status, RunStatus::Ok);
    let row = &report.findings["rows"][0];
    assert_eq!(row["n"], 1);
    assert_eq!(row["subset"], "bottom_side");
    assert_eq!(row["entropy_bits"], 1.0);
    for f in &report.files {
        assert!(dir.path().join(f).is_file(), "{f} listed but missing");
    }
    assert_eq!(read_report(dir.path()), report);
}

#[test]
fn metrics_do_not_depend_on_parallelism() {
    let configs = [
        "kind = \"gasket\"\n[gasket]\nn_max = 4\nsubsets = [{ type = \"bottom_side\" }, { type = \"random_k\", k = 4, draws = 2 }]\n",
        "kind = \"barrier\"\n[barrier]\nreplicates = 500\nhorizon = 2.0\nstep = 0.01\nlil_paths = 50\n",
        "kind = \"fbm-tip\"\n[fbm_tip]\nhurst = [0.4, 0.5]\nreplicates = 1000\nsteps = 256\nhorizon = 10.0\n",
        "kind = \"curve\"\n[curve]\nangle_samples = 2000\ncurve_steps = 1000\nd_max = 8\n",
    ];
    for text in configs {
        let mut metrics = Vec::new();
        for threads in [1, 3, 1] {
            let dir = tempfile::tempdir().unwrap();
            let mut cfg = config(text, dir.path());
            cfg.parallelism = threads;
            let report = run(&cfg).unwrap();
            assert_ne!(report.status, RunStatus::Error, "{:?}", report.error);
            metrics.push(report.metrics_json());
        }
        assert_eq!(metrics[0], metrics[1], "{text}");
        assert_eq!(metrics[0], metrics[2], "{text}");
    }
}

#[test]
fn schema_errors_name_fields() {
    let err = ExperimentConfig::load("kind = \"barrier\"\n[barrier]\nstep = 20.0\nhorizon = 10.0\n").unwrap_err();
    assert_eq!(err.fields(), ["barrier.step"]);
}

#[test]
fn runtime_failure_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("kind = \"curve\"\n[curve]\ncurve_file = \"/nonexistent/curve.csv\"\n", dir.path());
    let report = run(&cfg).unwrap();
    assert_eq!(report.status, RunStatus::Error);
    assert_eq!(report.exit_code(), 2);
    assert!(report.error.as_deref().unwrap().contains("curve.csv"));
    assert_eq!(read_report(dir.path()).status, RunStatus::Error);
}

#[test]
fn few_hits_are_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "kind = \"barrier\"\n[barrier]\nc = 5.0\nhorizon = 1.0\nstep = 0.01\nreplicates = 200\n",
        dir.path(),
    );
    let report = run(&cfg).unwrap();
    assert_eq!(report.status, RunStatus::InsufficientData);
    assert_eq!(report.exit_code(), 3);
}

#[test]
fn curve_files_are_read() {
    let dir = tempfile::tempdir().unwrap();
    let dom = dir.path().join("square.csv");
    fs::write(&dom, "x,y\n0,0\n2,0\n2,2\n0,2\n").unwrap();
    let curve = dir.path().join("ray.csv");
    fs::write(&curve, "0,0\n5,0\n").unwrap();
    let text = format!(
        "kind = \"curve\"\n[curve]\ndomain_file = {:?}\ncurve_file = {:?}\nroot = [1.0, 1.0]\nangle_samples = 4000\nd_max = 6\n",
        dom.display().to_string(),
        curve.display().to_string()
    );
    let report = run(&config(&text, &dir.path().join("out"))).unwrap();
    assert_eq!(report.status, RunStatus::Ok, "{:?}", report.error);
    assert_eq!(report.findings["hit_fraction"], 1.0);
}

#[test]
fn cli_subcommands_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    fs::write(&good, "kind = \"gasket\"\n[gasket]\nn_max = 2\n").unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "kind = \"barrier\"\n[barrier]\nsigma = -1.0\n").unwrap();
    let unknown = dir.path().join("unknown.toml");
    fs::write(&unknown, "kind = \"torus\"\n").unwrap();

    let out = bin().args(["list-kinds"]).output().unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().split_whitespace().collect::<Vec<_>>(), [
        "barrier", "gasket", "fbm-tip", "curve"
    ]);

    let st = bin().args(["validate", "--config"]).arg(&good).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let out = bin().args(["validate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("barrier.sigma"));
    let out = bin().args(["validate", "--config"]).arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fbm-tip"));

    let run_dir = dir.path().join("run");
    let st = bin()
        .args(["run", "--seed", "9", "--parallelism", "2", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&run_dir)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let report = read_report(&run_dir);
    assert_eq!(report.config.seed, 9);
    assert_eq!(report.config.parallelism, 2);

    for f in ["gasket_entropy.svg", "gasket_heat_map.svg"] {
        fs::remove_file(run_dir.join(f)).unwrap();
    }
    let st = bin().args(["plot", "--out"]).arg(&run_dir).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(run_dir.join("gasket_heat_map.svg").is_file());
}

#[test]
fn replot_matches_run_output() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&config(
        "kind = \"fbm-tip\"\n[fbm_tip]\nreplicates = 1000\nsteps = 256\nhorizon = 10.0\n",
        dir.path(),
    ))
    .unwrap();
    let original = fs::read_to_string(dir.path().join("tip_loglog.svg")).unwrap();
    let written = replot(dir.path()).unwrap();
    assert_eq!(written, ["tip_loglog.svg"]);
    assert_eq!(fs::read_to_string(dir.path().join("tip_loglog.svg")).unwrap(), original);
    assert!(report.files.contains(&"tip_points.csv".to_string()));
}
