//! Layout of one run directory.
//!
//! ```text
//! <run>/config.toml     experiment file that reproduces this run
//! <run>/record.csv      one row per epoch, appended as training goes
//! <run>/checkpoint.bin  latest solution network
//! <run>/state.json      optimizer and point-weight state for resuming
//! <run>/summary.json    written once the run has ended
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gapinn::train::{Observer, TerminationReason, TrainConfig, TrainRecord, TrainState, Trainer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::{Failure, Outcome};

pub const SNAPSHOT: &str = "config.toml";
pub const RECORD: &str = "record.csv";
pub const CHECKPOINT: &str = "checkpoint.bin";
pub const STATE: &str = "state.json";
pub const SUMMARY: &str = "summary.json";

/// Epochs between checkpoints.
pub const CHECKPOINT_EVERY: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    Aborted,
}

/// Outcome of a finished or aborted run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    pub mode: String,
    pub seed: u64,
    pub status: Status,
    pub reason: String,
    pub epochs: usize,
    pub final_l_pinn: Option<f64>,
    pub final_nrmse: Option<f64>,
    pub error: Option<String>,
    pub record_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

fn json<T: Serialize>(value: &T) -> Outcome<Vec<u8>> {
    serde_json::to_vec_pretty(value).map_err(|e| Failure::Other(e.to_string()))
}

pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    /// A directory counts as a run once it has a config snapshot.
    pub fn exists(&self) -> bool {
        self.file(SNAPSHOT).is_file()
    }

    pub fn snapshot(&self) -> Outcome<ExperimentConfig> {
        ExperimentConfig::load(&self.file(SNAPSHOT))
    }

    /// The single training config of the snapshot.
    pub fn train_config(&self) -> Outcome<TrainConfig> {
        let snap = self.snapshot()?;
        snap.expand().into_iter().next().ok_or_else(|| Failure::Usage("snapshot lists no runs".into()))
    }

    pub fn summary(&self) -> Outcome<Option<Summary>> {
        let path = self.file(SUMMARY);
        if !path.is_file() {
            return Ok(None);
        }
        let bytes = fs::read(&path)?;
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
    }

    pub fn record(&self) -> Outcome<TrainRecord> {
        let path = self.file(RECORD);
        let text = fs::read_to_string(&path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        Ok(TrainRecord::parse_csv(&text)?)
    }

    pub fn state(&self) -> Outcome<Option<TrainState>> {
        let path = self.file(STATE);
        if !path.is_file() {
            return Ok(None);
        }
        let bytes = fs::read(&path)?;
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
    }

    /// Empties the directory of earlier results and stores `snapshot`.
    pub fn start(&self, snapshot: &ExperimentConfig) -> Outcome<()> {
        fs::create_dir_all(&self.path)?;
        for name in [RECORD, CHECKPOINT, STATE, SUMMARY] {
            let p = self.file(name);
            if p.exists() {
                fs::remove_file(p)?;
            }
        }
        write_atomic(&self.file(SNAPSHOT), snapshot.to_toml()?.as_bytes())?;
        Ok(())
    }

    pub fn save_progress(&self, trainer: &Trainer) -> Outcome<()> {
        write_atomic(&self.file(CHECKPOINT), &trainer.checkpoint()?.to_bytes())?;
        write_atomic(&self.file(STATE), &json(&trainer.state())?)?;
        Ok(())
    }

    pub fn finish(&self, trainer: &Trainer, record: &TrainRecord) -> Outcome<Summary> {
        let diverged = record.reason == Some(TerminationReason::Diverged);
        if !diverged {
            self.save_progress(trainer)?;
        }
        let cfg = trainer.config();
        let summary = Summary {
            problem: cfg.problem.name().to_string(),
            mode: cfg.mode.name().to_string(),
            seed: cfg.seed,
            status: if diverged { Status::Aborted } else { Status::Completed },
            reason: record.reason.map_or("unknown", |r| r.name()).to_string(),
            epochs: record.epochs(),
            final_l_pinn: record.last("l_pinn").filter(|v| v.is_finite()),
            final_nrmse: record.final_nrmse,
            error: record.error.clone(),
            record_sha256: sha256_hex(&fs::read(self.file(RECORD))?),
        };
        write_atomic(&self.file(SUMMARY), &json(&summary)?)?;
        Ok(summary)
    }
}

/// Appends each epoch row to the record file and saves progress on the
/// checkpoint cadence.
pub struct RecordWriter<'a> {
    dir: &'a RunDir,
    out: BufWriter<File>,
}

impl<'a> RecordWriter<'a> {
    /// Rewrites the record file with `header` and `rows`, then appends.
    pub fn create(dir: &'a RunDir, header: &str, rows: &[Vec<f64>]) -> Outcome<Self> {
        let mut out = BufWriter::new(File::create(dir.file(RECORD))?);
        writeln!(out, "{header}")?;
        for r in rows {
            writeln!(out, "{}", TrainRecord::csv_row(r))?;
        }
        out.flush()?;
        Ok(Self { dir, out })
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

impl Observer for RecordWriter<'_> {
    fn epoch_end(&mut self, trainer: &Trainer, row: &[f64]) -> gapinn::Result<()> {
        writeln!(self.out, "{}", TrainRecord::csv_row(row))?;
        self.out.flush()?;
        if trainer.epoch().is_multiple_of(CHECKPOINT_EVERY) {
            self.dir.save_progress(trainer).map_err(|e| match e {
                Failure::Other(m) | Failure::Usage(m) | Failure::Diverged(m) => {
                    gapinn::Error::Io(std::io::Error::other(m))
                }
            })?;
        }
        Ok(())
    }
}
