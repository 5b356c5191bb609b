//! Plot-ready CSV files written next to a run's results.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use gapinn::losses::NetModel;
use gapinn::metrics::{curves, error_grid, reference_error_grid, SliceSpec};
use gapinn::network::{BatchEngine, Checkpoint};

use crate::config::problem_data;
use crate::store::{RunDir, CHECKPOINT};
use crate::{usage, Failure, Outcome};

pub const CURVES: &str = "curves.csv";
pub const HEATMAP: &str = "heatmap.csv";

#[derive(Clone, Debug)]
pub enum ExportKind {
    /// Loss columns by record name.
    Curves { columns: Vec<String> },
    /// `resolution` applies to problems with a closed-form solution; reference
    /// problems use the dataset's own grid.
    Heatmap { resolution: usize, fallback_reference: bool },
}

/// `dir` is a run directory or a results directory holding several.
pub fn run_dirs(dir: &Path) -> Outcome<Vec<RunDir>> {
    let single = RunDir::new(dir);
    if single.exists() {
        return Ok(vec![single]);
    }
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", dir.display())))?;
    let mut dirs: Vec<PathBuf> = entries.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    dirs.sort();
    let runs: Vec<RunDir> = dirs.into_iter().map(RunDir::new).filter(RunDir::exists).collect();
    if runs.is_empty() {
        return usage(format!("no runs found in {}", dir.display()));
    }
    Ok(runs)
}

/// Writes the export into every run under `dir`, returning the files.
pub fn export(dir: &Path, kind: &ExportKind) -> Outcome<Vec<PathBuf>> {
    let mut written = Vec::new();
    for run in run_dirs(dir)? {
        written.push(match kind {
            ExportKind::Curves { columns } => export_curves(&run, columns)?,
            ExportKind::Heatmap { resolution, fallback_reference } => {
                export_heatmap(&run, *resolution, *fallback_reference)?
            }
        });
    }
    Ok(written)
}

pub fn export_curves(run: &RunDir, columns: &[String]) -> Outcome<PathBuf> {
    let record = run.record()?;
    let names: Vec<&str> = columns.iter().map(String::as_str).collect();
    let series = curves(&record, &names)?;
    let path = run.file(CURVES);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Failure::Other(e.to_string()))?;
    let csv_err = |e: csv::Error| Failure::Other(e.to_string());
    w.write_record(series.iter().map(|(n, _)| n.as_str())).map_err(csv_err)?;
    for i in 0..series[0].1.len() {
        let row: Vec<String> = series
            .iter()
            .enumerate()
            .map(|(c, (_, v))| match v[i] {
                x if c == 0 => format!("{}", x as u64),
                x if x.is_nan() => String::new(),
                x => format!("{x:e}"),
            })
            .collect();
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn export_heatmap(run: &RunDir, resolution: usize, fallback_reference: bool) -> Outcome<PathBuf> {
    let snap = run.snapshot()?;
    let cfg = run.train_config()?;
    let ckpt_path = run.file(CHECKPOINT);
    if !ckpt_path.is_file() {
        return usage(format!("{} has no checkpoint to evaluate", run.path.display()));
    }
    let ckpt = Checkpoint::load(&ckpt_path)?;
    let problem = cfg.pde();
    let dataset = snap.datasets.get(cfg.problem).cloned();
    let data = problem_data(cfg.problem, dataset.as_deref(), fallback_reference)?;
    let mut engine = BatchEngine::new(&ckpt.spec);
    let mut model = NetModel { engine: &mut engine, params: &ckpt.params.values, output_dim: problem.output_dim() };
    let grid = match &data.reference {
        Some(reference) => reference_error_grid(&mut model, &problem, reference)?,
        None => error_grid(&mut model, &problem, resolution, &SliceSpec::default_for(&problem))?,
    };
    let path = run.file(HEATMAP);
    grid.write_csv(BufWriter::new(File::create(&path)?))?;
    Ok(path)
}
