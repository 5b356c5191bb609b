use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    TcReached,
    PwEpsilon,
    MaxEpochs,
    Diverged,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            TerminationReason::TcReached => "tc_reached",
            TerminationReason::PwEpsilon => "pw_epsilon",
            TerminationReason::MaxEpochs => "max_epochs",
            TerminationReason::Diverged => "diverged",
        }
    }
}

/// Per-epoch losses of one run. Column 0 is the epoch; entries that were not
/// evaluated at an epoch hold NaN and are written as empty CSV fields.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainRecord {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub reason: Option<TerminationReason>,
    pub final_nrmse: Option<f64>,
    pub error: Option<String>,
}

impl TrainRecord {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new(), reason: None, final_nrmse: None, error: None }
    }

    pub fn epochs(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        let c = self.columns.iter().position(|n| n == name)?;
        self.rows.last().map(|r| r[c])
    }

    pub fn csv_header(&self) -> String {
        self.columns.join(",")
    }

    pub fn csv_row(row: &[f64]) -> String {
        let mut out = String::new();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            if i == 0 {
                out.push_str(&format!("{}", *v as u64));
            } else if !v.is_nan() {
                out.push_str(&format!("{v:e}"));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for r in &self.rows {
            writeln!(w, "{}", Self::csv_row(r))?;
        }
        Ok(())
    }

    /// Reads the columns and rows written by [`write_csv`](Self::write_csv).
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, head) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty record".into() })?;
        let columns: Vec<String> = head.split(',').map(str::to_string).collect();
        let mut rec = Self::new(columns);
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| if f.is_empty() { Ok(f64::NAN) } else { f.parse::<f64>() })
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|e| Error::Parse { line: n + 1, msg: e.to_string() })?;
            if row.len() != rec.columns.len() {
                return Err(Error::Parse { line: n + 1, msg: format!("expected {} fields", rec.columns.len()) });
            }
            rec.rows.push(row);
        }
        Ok(rec)
    }
}
