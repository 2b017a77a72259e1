//! End-to-end tests of the `dmt-sim` binary: exit codes, output files, and
//! the byte-level determinism contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dmt_sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dmt-sim"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.ini");
    fs::write(&path, text).unwrap();
    path
}

const SMALL_SWEEP: &str = "\
[system]
M = 2
N = 4
interferers = 2
xi = 0.5

[sweep]
snr_db = 10, 15, 20
trials = 2000

[rate]
mode = fixed
R = 5

[rng]
seed = 11
";

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let out = run(dmt_sim()
        .arg("sweep")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = fs::read_to_string(dir.path().join("outage.csv")).unwrap();
    assert!(csv.starts_with("# dmt-sim v"), "header echo missing: {csv}");
    assert!(csv.contains("# rng.seed = 11"));
    let mut lines = csv.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "snr_db,target_rate_bits,trials,outages,p_out,ci_low,ci_high,discarded"
    );
    assert_eq!(lines.count(), 3, "one row per grid point");

    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("# rng.seed = 11"));
    assert!(summary.contains("points: 3"));
}

#[test]
fn sweep_is_byte_identical_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let mut outputs = Vec::new();
    for (sub, workers) in [("a", "1"), ("b", "4"), ("c", "1")] {
        let out_dir = dir.path().join(sub);
        let out = run(dmt_sim()
            .arg("sweep")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .arg("--workers")
            .arg(workers));
        assert!(out.status.success());
        outputs.push(fs::read(out_dir.join("outage.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "1 vs 4 workers");
    assert_eq!(outputs[0], outputs[2], "repeated run");
}

#[test]
fn seed_flag_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let mut curves = Vec::new();
    for (sub, seed) in [("s0", "11"), ("s1", "12")] {
        let out_dir = dir.path().join(sub);
        let out = run(dmt_sim()
            .arg("sweep")
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .arg("--seed")
            .arg(seed));
        assert!(out.status.success());
        curves.push(fs::read(out_dir.join("outage.csv")).unwrap());
    }
    assert_ne!(curves[0], curves[1]);
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_SWEEP.replace("N = 4", "N = 1"));
    let out = run(dmt_sim().arg("sweep").arg("--config").arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("N must be >= M"), "{stderr}");
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nM == 2\n");
    let out = run(dmt_sim().arg("sweep").arg("--config").arg(&cfg));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":2"), "{stderr}");
}

#[test]
fn degenerate_window_warns_and_exits_0() {
    // All outage probabilities sit far above the fit window: the sweep still
    // succeeds, the summary records the insufficiency.
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL_SWEEP.replace("p_min", "") + "\n[fit]\np_min = 1e-9\np_max = 1e-7\n";
    let cfg = write_config(dir.path(), &text);
    let out = run(dmt_sim()
        .arg("sweep")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path()));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning"), "{stderr}");
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("InsufficientPoints"), "{summary}");
}

#[test]
fn dmt_surface_tabulates_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nM = 2\nN = 4\n");
    let out = run(dmt_sim()
        .arg("dmt-surface")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .arg("--set")
        .arg("surface.r=0,1,2")
        .arg("--set")
        .arg("surface.xi=0,0.5"));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("dmt_surface.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('r'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    // (r=0, xi=0.5): d_mmse = 1.5, d_p2p = 3, d_ml = 8.
    let row = rows.iter().find(|r| r[0] == 0.0 && r[1] == 0.5).unwrap();
    assert_eq!((row[2], row[3], row[4]), (1.5, 3.0, 8.0));
    // xi = 0 rows: d_mmse equals d_p2p.
    for row in rows.iter().filter(|r| r[1] == 0.0) {
        assert_eq!(row[2], row[3]);
    }
    // Clamp region r/M >= 1 - xi.
    let row = rows.iter().find(|r| r[0] == 2.0 && r[1] == 0.5).unwrap();
    assert_eq!(row[2], 0.0);
}

#[test]
fn verify_passes_on_default_config_and_skips_without_interferers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[system]\nM = 2\nN = 4\ninterferers = 2\nxi = 0.5\n",
    );
    let out = run(dmt_sim()
        .arg("verify")
        .arg("--config")
        .arg(&cfg)
        .arg("--set")
        .arg("verify.realizations=60")
        .arg("--set")
        .arg("verify.tail_samples=20000"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("woodbury_sinr"), "{stdout}");
    assert!(stdout.contains("RESULT: PASS"), "{stdout}");

    let cfg = write_config(dir.path(), "[system]\nM = 2\nN = 4\n");
    let out = run(dmt_sim()
        .arg("verify")
        .arg("--config")
        .arg(&cfg)
        .arg("--set")
        .arg("verify.realizations=60")
        .arg("--set")
        .arg("verify.tail_samples=20000"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(
        stdout
            .lines()
            .any(|l| l.starts_with("interference_reduces_rate") && l.contains("SKIP")),
        "{stdout}"
    );
}

#[test]
fn verify_corrupted_tolerance_exits_1_naming_property() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[system]\nM = 2\nN = 4\ninterferers = 2\nxi = 0.5\n",
    );
    let out = run(dmt_sim()
        .arg("verify")
        .arg("--config")
        .arg(&cfg)
        .arg("--set")
        .arg("verify.woodbury_tol=1e-16")
        .arg("--set")
        .arg("verify.realizations=60")
        .arg("--set")
        .arg("verify.tail_samples=20000"));
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("woodbury_sinr"), "{stdout}");
    assert!(stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn repo_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    for name in ["configs/fig2.ini", "configs/p2p.ini"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(dmt_sim()
            .arg("sweep")
            .arg("--config")
            .arg(root.join(name))
            .arg("--out")
            .arg(dir.path())
            .arg("--set")
            .arg("sweep.trials=100"));
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
