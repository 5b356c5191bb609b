use std::path::{Path, PathBuf};

use gapinn::train::{ProblemData, TrainConfig, Trainer};

use crate::config::{problem_data, resolve_dataset, run_name, Datasets, ExperimentConfig};
use crate::store::{RecordWriter, RunDir, Status, Summary};
use crate::{Failure, Outcome};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Use the built-in reference solvers when dataset files are missing.
    pub fallback_reference: bool,
    /// Discard earlier results instead of resuming them.
    pub fresh: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    Fresh,
    /// Continued from the state saved at this epoch.
    Resumed(usize),
    /// Already finished with the same config; nothing was trained.
    Done,
}

/// What happened to each run of an experiment.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub summary: Summary,
    pub start: Start,
}

struct Planned {
    cfg: TrainConfig,
    dir: RunDir,
    snapshot: ExperimentConfig,
    data: ProblemData,
}

/// Validates the whole experiment and loads its datasets, then trains every
/// (run, seed) pair in order. Fails with `Diverged` if any run aborted.
pub fn run_experiment(config_path: &Path, opts: &RunOptions, log: &mut dyn FnMut(&str)) -> Outcome<Vec<RunReport>> {
    let exp = ExperimentConfig::load(config_path)?;
    let base = config_path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
    let out_dir = base.join(&exp.output_dir);
    let fallback = opts.fallback_reference || exp.fallback_reference;

    let mut planned = Vec::new();
    for cfg in exp.expand() {
        let dataset = resolve_dataset(cfg.problem, exp.datasets.get(cfg.problem).map(PathBuf::as_path), &base);
        let data = problem_data(cfg.problem, dataset.as_deref(), fallback)?;
        let mut datasets = Datasets::default();
        if let Some(p) = dataset.filter(|p| p.is_file()) {
            datasets.set(cfg.problem, std::path::absolute(&p)?);
        }
        let snapshot = ExperimentConfig {
            schema_version: exp.schema_version,
            output_dir: PathBuf::from("rerun"),
            seeds: Vec::new(),
            fallback_reference: fallback && datasets == Datasets::default(),
            datasets,
            runs: vec![cfg.clone()],
        };
        // builds samplers and networks now so bad settings fail before any training
        Trainer::new(cfg.clone(), &data).map_err(|e| Failure::Usage(format!("{}: {e}", run_name(&cfg))))?;
        planned.push(Planned { dir: RunDir::new(out_dir.join(run_name(&cfg))), cfg, snapshot, data });
    }

    let mut reports = Vec::new();
    for p in planned {
        let name = run_name(&p.cfg);
        let report = run_one(p, opts)?;
        let s = &report.summary;
        let resumed = match report.start {
            Start::Fresh => String::new(),
            Start::Resumed(e) => format!(" (resumed at epoch {e})"),
            Start::Done => " (already complete)".to_string(),
        };
        let nrmse = s.final_nrmse.map_or("-".to_string(), |v| format!("{v:.4e}"));
        log(&format!("{name}: {} after {} epochs, nrmse {nrmse}{resumed}", s.reason, s.epochs));
        reports.push(report);
    }
    let aborted: Vec<_> =
        reports.iter().filter(|r| r.summary.status == Status::Aborted).map(|r| r.dir.display().to_string()).collect();
    if !aborted.is_empty() {
        return Err(Failure::Diverged(format!("diverged: {}", aborted.join(", "))));
    }
    Ok(reports)
}

fn run_one(p: Planned, opts: &RunOptions) -> Outcome<RunReport> {
    let same_config = p.dir.exists() && p.dir.snapshot().ok().as_ref() == Some(&p.snapshot);
    if same_config && !opts.fresh {
        if let Some(summary) = p.dir.summary()? {
            return Ok(RunReport { dir: p.dir.path, summary, start: Start::Done });
        }
    }

    let mut trainer = Trainer::new(p.cfg, &p.data)?;
    let mut start = Start::Fresh;
    if same_config && !opts.fresh {
        if let Some(state) = p.dir.state()? {
            let mut record = p.dir.record()?;
            if record.rows.len() >= state.epoch {
                record.rows.truncate(state.epoch);
                let epoch = state.epoch;
                trainer.restore(state, record.rows)?;
                start = Start::Resumed(epoch);
            }
        }
    }
    if start == Start::Fresh {
        p.dir.start(&p.snapshot)?;
    }

    let header = trainer.record().csv_header();
    let rows = trainer.record().rows.clone();
    let mut writer = RecordWriter::create(&p.dir, &header, &rows)?;
    let record = trainer.run(&mut writer)?;
    writer.flush()?;
    drop(writer);
    let summary = p.dir.finish(&trainer, &record)?;
    Ok(RunReport { dir: p.dir.path, summary, start })
}
