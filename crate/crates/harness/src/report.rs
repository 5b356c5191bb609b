//! Comparison table over the runs of a results directory.

use std::collections::BTreeMap;
use std::path::Path;

use crate::store::{RunDir, Status};
use crate::{usage, Failure, Outcome};

/// One run as seen by the report.
#[derive(Clone, Debug, PartialEq)]
pub struct RunLine {
    pub name: String,
    pub problem: String,
    pub mode: String,
    pub seed: u64,
    /// `None` while the run has no summary, i.e. it was interrupted.
    pub status: Option<Status>,
    pub reason: String,
    pub epochs: usize,
    pub nrmse: Option<f64>,
}

impl RunLine {
    pub fn completed(&self) -> bool {
        self.status == Some(Status::Completed)
    }
}

/// Per (problem, mode) group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupLine {
    pub problem: String,
    pub mode: String,
    pub runs: Vec<RunLine>,
    pub median_epochs: Option<f64>,
    pub median_nrmse: Option<f64>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Reads every run directory directly under `dir`, in name order.
pub fn collect(dir: &Path) -> Outcome<Vec<RunLine>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", dir.display())))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| RunDir::new(e.path()).exists())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    names.sort();
    let mut lines = Vec::with_capacity(names.len());
    for name in names {
        let run = RunDir::new(dir.join(&name));
        let line = match run.summary()? {
            Some(s) => RunLine {
                name,
                problem: s.problem,
                mode: s.mode,
                seed: s.seed,
                status: Some(s.status),
                reason: s.reason,
                epochs: s.epochs,
                nrmse: s.final_nrmse,
            },
            None => {
                let cfg = run.train_config()?;
                let epochs = run.record().map_or(0, |r| r.epochs());
                RunLine {
                    name,
                    problem: cfg.problem.name().into(),
                    mode: cfg.mode.name().into(),
                    seed: cfg.seed,
                    status: None,
                    reason: "interrupted".into(),
                    epochs,
                    nrmse: None,
                }
            }
        };
        lines.push(line);
    }
    if lines.is_empty() {
        return usage(format!("no runs found in {}", dir.display()));
    }
    Ok(lines)
}

/// Groups runs by (problem, mode). Medians use completed runs only.
pub fn group(lines: Vec<RunLine>) -> Vec<GroupLine> {
    let mut groups: BTreeMap<(String, String), Vec<RunLine>> = BTreeMap::new();
    for l in lines {
        groups.entry((l.problem.clone(), l.mode.clone())).or_default().push(l);
    }
    groups
        .into_iter()
        .map(|((problem, mode), runs)| {
            let done: Vec<&RunLine> = runs.iter().filter(|r| r.completed()).collect();
            let epochs: Vec<f64> = done.iter().map(|r| r.epochs as f64).collect();
            let nrmse: Vec<f64> = done.iter().filter_map(|r| r.nrmse).collect();
            GroupLine { problem, mode, median_epochs: median(&epochs), median_nrmse: median(&nrmse), runs }
        })
        .collect()
}

const HEADER: [&str; 8] = ["problem", "mode", "runs", "aborted", "epochs", "nrmse", "median_epochs", "median_nrmse"];

fn cells(g: &GroupLine) -> [String; 8] {
    let per_run = |f: &dyn Fn(&RunLine) -> String| {
        g.runs.iter().map(|r| if r.completed() { f(r) } else { format!("aborted:{}", r.reason) }).collect::<Vec<_>>().join(" ")
    };
    let opt = |v: Option<f64>, prec: bool| match v {
        Some(x) if prec => format!("{x:.4e}"),
        Some(x) => format!("{x}"),
        None => String::new(),
    };
    [
        g.problem.clone(),
        g.mode.clone(),
        g.runs.len().to_string(),
        g.runs.iter().filter(|r| !r.completed()).count().to_string(),
        per_run(&|r| r.epochs.to_string()),
        per_run(&|r| opt(r.nrmse, true)),
        opt(g.median_epochs, false),
        opt(g.median_nrmse, true),
    ]
}

pub fn to_csv(groups: &[GroupLine]) -> Outcome<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER).map_err(|e| Failure::Other(e.to_string()))?;
    for g in groups {
        w.write_record(cells(g)).map_err(|e| Failure::Other(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Other(e.to_string()))
}

pub fn to_text(groups: &[GroupLine]) -> String {
    let rows: Vec<[String; 8]> = groups.iter().map(cells).collect();
    let mut width = HEADER.map(str::len);
    for r in &rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |r: &[String]| {
        let mut s = String::new();
        for (i, (c, w)) in r.iter().zip(width).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            s.push_str(&format!("{c:<w$}"));
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&HEADER.map(String::from));
    for r in &rows {
        out.push_str(&line(r));
    }
    out
}

/// Builds the table for `dir` and stores it as `report.csv` there.
pub fn report(dir: &Path) -> Outcome<String> {
    let groups = group(collect(dir)?);
    std::fs::write(dir.join("report.csv"), to_csv(&groups)?)?;
    Ok(to_text(&groups))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(seed: u64, status: Option<Status>, epochs: usize, nrmse: f64) -> RunLine {
        RunLine {
            name: format!("poisson-pinn-seed{seed}"),
            problem: "poisson".into(),
            mode: "pinn".into(),
            seed,
            status,
            reason: if status == Some(Status::Completed) { "tc_reached" } else { "diverged" }.into(),
            epochs,
            nrmse: Some(nrmse),
        }
    }

    #[test]
    fn medians_skip_aborted_runs() {
        let c = Some(Status::Completed);
        let g = group(vec![run(0, c, 10, 0.1), run(1, Some(Status::Aborted), 3, 9.0), run(2, c, 30, 0.3)]);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].median_epochs, Some(20.0));
        assert_eq!(g[0].median_nrmse, Some(0.2));
        let text = to_text(&g);
        assert!(text.contains("aborted:diverged"), "{text}");
        let csv = to_csv(&g).unwrap();
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0]), Some(3.0));
        assert_eq!(median(&[5.0, 1.0, 3.0]), Some(3.0));
    }
}
