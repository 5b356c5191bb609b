use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gapinn::pde::ProblemKind;
use gapinn::train::{Mode, NetShape, TrainConfig};
use gapinn_harness::config::ExperimentConfig;
use gapinn_harness::store::{sha256_hex, RunDir, Status};

fn gapinn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapinn"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GAPINN_DATA")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small(problem: ProblemKind, mode: Mode, epochs: usize) -> ExperimentConfig {
    let mut exp = ExperimentConfig::preset(problem, mode);
    let run = &mut exp.runs[0];
    run.generator = NetShape { layers: 2, nodes: 8 };
    run.discriminator = NetShape { layers: 1, nodes: 8 };
    run.n_interior = 64;
    run.m_boundary = 16;
    run.test_points = 200;
    run.max_epochs = epochs;
    exp
}

fn write_config(dir: &Path, name: &str, exp: &ExperimentConfig) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, exp.to_toml().unwrap()).unwrap();
    path
}

fn run_dir(dir: &Path, exp: &ExperimentConfig, seed: u64) -> RunDir {
    let cfg = TrainConfig { seed, ..exp.runs[0].clone() };
    RunDir::new(dir.join("results").join(gapinn_harness::config::run_name(&cfg)))
}

#[test]
fn init_writes_presets_and_rejects_unknown_problems() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gapinn(&["init", "poisson", "pinn"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let exp = ExperimentConfig::load(&tmp.path().join("poisson-pinn.toml")).unwrap();
    let run = &exp.runs[0];
    assert_eq!(run.tc, 5e-5);
    assert_eq!(run.generator, NetShape { layers: 4, nodes: 100 });
    assert_eq!((run.n_interior, run.m_boundary, run.j_labeled), (5000, 100, 5));
    assert_eq!((run.lr_g, run.lr_p, run.lr_d), (1e-3, 1e-6, 5e-6));

    let o = gapinn(&["init", "burgers", "gapinn", "-o", "b.toml"], tmp.path());
    assert!(o.status.success());
    let exp = ExperimentConfig::load(&tmp.path().join("b.toml")).unwrap();
    assert_eq!((exp.runs[0].lr_g, exp.runs[0].lr_d), (1e-3, 5e-3));

    let o = gapinn(&["init", "unknown", "pinn"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    for name in ["burgers", "poisson", "helmholtz", "schrodinger", "hd_poisson", "heat"] {
        assert!(msg.contains(name), "{msg}");
    }
    assert_eq!(gapinn(&["init", "poisson", "pinn"], tmp.path()).status.code(), Some(2));
}

#[test]
fn one_epoch_run_writes_a_complete_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = small(ProblemKind::Poisson, Mode::Pinn, 1);
    let cfg = write_config(tmp.path(), "exp.toml", &exp);
    let o = gapinn(&["run", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let run = run_dir(tmp.path(), &exp, 0);
    let record = run.record().unwrap();
    assert_eq!(record.epochs(), 1);
    assert_eq!(record.columns[0], "epoch");
    let summary = run.summary().unwrap().unwrap();
    assert_eq!((summary.status, summary.reason.as_str(), summary.epochs), (Status::Completed, "max_epochs", 1));
    assert!(summary.final_nrmse.is_some());
    assert!(run.file("checkpoint.bin").is_file() && run.file("state.json").is_file());
    assert_eq!(summary.record_sha256, sha256_hex(&fs::read(run.file("record.csv")).unwrap()));
}

#[test]
fn invalid_configs_exit_with_status_two() {
    let tmp = tempfile::tempdir().unwrap();
    let mut exp = small(ProblemKind::Poisson, Mode::Pinn, 1);
    exp.runs[0].lr_p = -1.0;
    let path = write_config(tmp.path(), "bad.toml", &exp);
    let o = gapinn(&["run", path.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("lr_p"));

    fs::write(tmp.path().join("typo.toml"), "schema_version = 1\nrunz = []\n").unwrap();
    assert_eq!(gapinn(&["run", "typo.toml"], tmp.path()).status.code(), Some(2));
    assert!(!tmp.path().join("results").exists());
}

#[test]
fn burgers_without_dataset_needs_the_fallback_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = small(ProblemKind::Burgers, Mode::Pinn, 1);
    let cfg = write_config(tmp.path(), "b.toml", &exp);
    let o = gapinn(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--fallback-reference"), "{}", stderr(&o));
    assert!(!tmp.path().join("results").exists());

    let o = gapinn(&["run", cfg.to_str().unwrap(), "--fallback-reference"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let results = tmp.path().join("results");
    let o = gapinn(&["export", results.to_str().unwrap(), "heatmap"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--fallback-reference"), "{}", stderr(&o));
    let o = gapinn(&["export", results.to_str().unwrap(), "heatmap", "--fallback-reference"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(run_dir(tmp.path(), &exp, 0).file("heatmap.csv")).unwrap();
    // a header of x coordinates, then one row per t on the 256 x 100 solver grid
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.split(',').count() == 257));
}

#[test]
fn dataset_is_found_through_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    fs::create_dir(&data).unwrap();
    let mut set = String::from("# t x u\n");
    for i in 0..20 {
        let x = -1.0 + i as f64 / 10.0;
        set.push_str(&format!("0.5 {x} {}\n", -(std::f64::consts::PI * x).sin() * 0.5));
    }
    fs::write(data.join("burgers.txt"), set).unwrap();
    let exp = small(ProblemKind::Burgers, Mode::Gapinn, 1);
    let cfg = write_config(tmp.path(), "b.toml", &exp);
    let o = Command::new(env!("CARGO_BIN_EXE_gapinn"))
        .args(["run", cfg.to_str().unwrap()])
        .env("GAPINN_DATA", &data)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let snap = run_dir(tmp.path(), &exp, 0).snapshot().unwrap();
    assert_eq!(snap.datasets.burgers.as_deref(), Some(data.join("burgers.txt").as_path()));
}

#[test]
fn divergence_exits_three_and_keeps_the_partial_record() {
    let tmp = tempfile::tempdir().unwrap();
    let mut exp = small(ProblemKind::Poisson, Mode::Pinn, 200);
    exp.runs[0].seed = 3;
    exp.seeds.clear();
    exp.runs[0].lr_p = 1e3;
    let cfg = write_config(tmp.path(), "d.toml", &exp);
    let o = gapinn(&["run", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let run = run_dir(tmp.path(), &exp, 3);
    let record = run.record().unwrap();
    assert!(record.epochs() >= 1 && record.epochs() < 200);
    let summary = run.summary().unwrap().unwrap();
    assert_eq!((summary.status, summary.reason.as_str()), (Status::Aborted, "diverged"));
    assert!(summary.error.is_some());

    let o = gapinn(&["report", "results"], tmp.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("aborted:diverged"));
}

#[test]
fn report_medians_over_seeds_and_rejects_empty_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let mut exp = small(ProblemKind::Heat, Mode::Pinn, 3);
    exp.seeds = vec![0, 1, 2];
    let cfg = write_config(tmp.path(), "h.toml", &exp);
    assert!(gapinn(&["run", cfg.to_str().unwrap()], tmp.path()).status.success());
    let o = gapinn(&["report", "results"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("results/report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "{csv}");
    assert!(lines[0].starts_with("problem,mode,runs,aborted"));
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&cells[..4], ["heat", "pinn", "3", "0"]);
    assert_eq!(cells[6], "3");
    assert!(!cells[7].is_empty());
    // pure function of the directory
    let again = gapinn(&["report", "results"], tmp.path());
    assert_eq!(again.stdout, o.stdout);

    fs::create_dir(tmp.path().join("empty")).unwrap();
    assert_eq!(gapinn(&["report", "empty"], tmp.path()).status.code(), Some(2));
}

#[test]
fn exports_curves_and_analytic_heatmaps() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = small(ProblemKind::Poisson, Mode::Pinn, 4);
    let cfg = write_config(tmp.path(), "p.toml", &exp);
    assert!(gapinn(&["run", cfg.to_str().unwrap()], tmp.path()).status.success());
    let run = run_dir(tmp.path(), &exp, 0);

    let o = gapinn(&["export", "results", "curves"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let curves = fs::read_to_string(run.file("curves.csv")).unwrap();
    let lines: Vec<&str> = curves.lines().collect();
    assert_eq!(lines[0], "epoch,l_pinn");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("4,"));
    let o = gapinn(&["export", "results", "curves", "--columns", "rho_b1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));

    let o = gapinn(&["export", run.path.to_str().unwrap(), "heatmap", "--resolution", "128"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(run.file("heatmap.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 129);
    assert!(rows.iter().all(|r| r.split(',').count() == 129));
    assert!(text.starts_with('#'));
}

#[test]
fn snapshot_reproduces_the_record_and_resume_continues_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = small(ProblemKind::Poisson, Mode::PinnPw, 600);
    let cfg = write_config(tmp.path(), "full.toml", &exp);
    assert!(gapinn(&["run", cfg.to_str().unwrap()], tmp.path()).status.success());
    let run = run_dir(tmp.path(), &exp, 0);
    let summary = run.summary().unwrap().unwrap();
    assert_eq!(summary.epochs, 600);

    // rerunning the stored snapshot gives the same bytes
    let o = gapinn(&["run", "config.toml"], &run.path);
    assert!(o.status.success(), "{}", stderr(&o));
    let rerun = run.path.join("rerun").join("poisson-pinn_pw-seed0").join("record.csv");
    assert_eq!(sha256_hex(&fs::read(rerun).unwrap()), summary.record_sha256);

    // a second run of the same file finds the results and trains nothing
    let o = gapinn(&["run", cfg.to_str().unwrap()], tmp.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("already complete"));

    // stop a 600-epoch run at its epoch-500 checkpoint, then resume it
    let part = tmp.path().join("part");
    fs::create_dir(&part).unwrap();
    let mut short = exp.clone();
    short.runs[0].max_epochs = 500;
    let short_cfg = write_config(&part, "exp.toml", &short);
    assert!(gapinn(&["run", short_cfg.to_str().unwrap()], &part).status.success());
    let cut = run_dir(&part, &exp, 0);
    fs::remove_file(cut.file("summary.json")).unwrap();
    let mut snap = cut.snapshot().unwrap();
    snap.runs[0].max_epochs = 600;
    fs::write(cut.file("config.toml"), snap.to_toml().unwrap()).unwrap();
    let o = gapinn(&["report", "results"], &part);
    assert!(String::from_utf8_lossy(&o.stdout).contains("aborted:interrupted"));

    let resume_cfg = write_config(&part, "exp.toml", &exp);
    let o = gapinn(&["run", resume_cfg.to_str().unwrap()], &part);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("resumed at epoch 500"));
    assert_eq!(cut.summary().unwrap().unwrap().record_sha256, summary.record_sha256);
}
