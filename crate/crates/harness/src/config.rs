//! Experiment files: a list of training configs plus seeds, an output
//! directory and dataset locations, stored as TOML.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use gapinn::pde::{load_reference_dataset, ProblemKind};
use gapinn::train::{Mode, ProblemData, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::{usage, Failure, Outcome};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the directory that holds reference datasets.
pub const DATA_ENV: &str = "GAPINN_DATA";

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

/// Where the reference solutions of the gridded problems live.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Datasets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burgers: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schrodinger: Option<PathBuf>,
}

impl Datasets {
    pub fn get(&self, kind: ProblemKind) -> Option<&PathBuf> {
        match kind {
            ProblemKind::Burgers => self.burgers.as_ref(),
            ProblemKind::Schrodinger => self.schrodinger.as_ref(),
            _ => None,
        }
    }

    pub fn set(&mut self, kind: ProblemKind, path: PathBuf) {
        match kind {
            ProblemKind::Burgers => self.burgers = Some(path),
            ProblemKind::Schrodinger => self.schrodinger = Some(path),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Relative paths are taken from the config file's directory.
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Every run is repeated once per seed. Empty means each run keeps its own.
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Use the built-in reference solvers when a dataset file is absent.
    #[serde(default)]
    pub fallback_reference: bool,
    #[serde(default)]
    pub datasets: Datasets,
    pub runs: Vec<TrainConfig>,
}

impl ExperimentConfig {
    /// One preset run with seed 0.
    pub fn preset(problem: ProblemKind, mode: Mode) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            output_dir: default_output(),
            seeds: vec![0],
            fallback_reference: false,
            datasets: Datasets::default(),
            runs: vec![TrainConfig::preset(problem, mode)],
        }
    }

    pub fn parse(text: &str) -> Outcome<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Failure::Usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Outcome<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Outcome<String> {
        toml::to_string(self).map_err(|e| Failure::Other(format!("cannot serialize config: {e}")))
    }

    pub fn validate(&self) -> Outcome<()> {
        if self.schema_version != SCHEMA_VERSION {
            return usage(format!(
                "unsupported schema_version {}, this build reads version {SCHEMA_VERSION}",
                self.schema_version
            ));
        }
        if self.runs.is_empty() {
            return usage("config lists no runs");
        }
        let mut seen = HashSet::new();
        for (i, run) in self.expand().iter().enumerate() {
            run.validate().map_err(|e| Failure::Usage(format!("run {}: {e}", i + 1)))?;
            if !seen.insert(run_name(run)) {
                return usage(format!("run {} repeats {}", i + 1, run_name(run)));
            }
        }
        Ok(())
    }

    /// Every (run, seed) pair in file order.
    pub fn expand(&self) -> Vec<TrainConfig> {
        if self.seeds.is_empty() {
            return self.runs.clone();
        }
        let mut out = Vec::with_capacity(self.runs.len() * self.seeds.len());
        for run in &self.runs {
            for &seed in &self.seeds {
                out.push(TrainConfig { seed, ..run.clone() });
            }
        }
        out
    }
}

/// Directory name of one run.
pub fn run_name(cfg: &TrainConfig) -> String {
    format!("{}-{}-seed{}", cfg.problem.name(), cfg.mode.name(), cfg.seed)
}

pub fn default_dataset_file(kind: ProblemKind) -> Option<&'static str> {
    match kind {
        ProblemKind::Burgers => Some("burgers.txt"),
        ProblemKind::Schrodinger => Some("schrodinger.txt"),
        _ => None,
    }
}

/// Resolves a dataset path: relative paths go under `$GAPINN_DATA` when it is
/// set, else under `base`. Without a configured path the default file name
/// under `$GAPINN_DATA` is used.
pub fn resolve_dataset(kind: ProblemKind, configured: Option<&Path>, base: &Path) -> Option<PathBuf> {
    let root = std::env::var_os(DATA_ENV).map(PathBuf::from);
    match (configured, root) {
        (Some(p), _) if p.is_absolute() => Some(p.to_path_buf()),
        (Some(p), Some(root)) => Some(root.join(p)),
        (Some(p), None) => Some(base.join(p)),
        (None, Some(root)) => default_dataset_file(kind).map(|f| root.join(f)),
        (None, None) => None,
    }
}

/// Loads the exact-solution data a problem needs. Gridded problems read their
/// dataset file, or use the built-in solvers when `fallback` is set.
pub fn problem_data(kind: ProblemKind, dataset: Option<&Path>, fallback: bool) -> Outcome<ProblemData> {
    if kind.has_analytic() {
        return Ok(ProblemData::analytic());
    }
    let p = gapinn::pde::PdeProblem::new(kind);
    if let Some(path) = dataset.filter(|p| p.is_file()) {
        let set = load_reference_dataset(path, p.input_dim(), p.output_dim())?;
        return Ok(ProblemData::with_reference(set));
    }
    if fallback {
        return Ok(ProblemData::fallback(kind)?);
    }
    let looked = match dataset {
        Some(path) => format!("{} does not exist", path.display()),
        None => format!("no dataset path is configured and {DATA_ENV} is not set"),
    };
    usage(format!("{kind} needs a reference dataset: {looked}; point [datasets] or {DATA_ENV} at it, or pass --fallback-reference"))
}

fn doc(key: &str) -> Option<&'static str> {
    Some(match key {
        "schema_version" => "config format version",
        "output_dir" => "run directories are created here, relative to this file",
        "seeds" => "each run is repeated once per seed",
        "fallback_reference" => "use the built-in reference solvers when a dataset file is missing",
        "helmholtz_k" => "wavenumber of the Helmholtz problem",
        "n_interior" => "interior collocation points",
        "m_boundary" => "collocation points per boundary term",
        "j_labeled" => "labeled samples for the adversarial modes",
        "lr_g" => "learning rate of the adversarial generator step",
        "lr_p" => "learning rate of the physics step",
        "lr_d" => "learning rate of the discriminator step",
        "lambda1" => "boundary weight in the physics loss",
        "lambda2" => "labeled-loss weight in the augmented physics loss",
        "lambda_pw" => "boundary weight in the point-weighted physics loss",
        "pw_termination" => "hl_mass stops when the hard-point weight mass drops to pw_epsilon, literal when the easy-point mass does",
        "tc" => "stop once the physics loss is at or below this",
        "max_epochs" => "epoch budget",
        "dgm_batch" => "fresh points per term and epoch in dgm mode",
        "init" => "glorot_uniform or glorot_normal",
        "test_points" => "Latin hypercube test points for problems with a closed-form solution",
        "test_seed" => "seed of the test points, shared by all runs",
        "divergence_limit" => "a physics loss above this aborts the run as diverged",
        "[runs.generator]" => "hidden layers of the solution network",
        "[runs.discriminator]" => "hidden layers of the discriminator",
        "[[runs.pw_boundary]]" => "point weighting magnitude q and threshold e, one entry per boundary term",
        "[runs.pw_interior]" => "point weighting of the interior points",
        "[runs.adam]" => "Adam moment decay rates and denominator offset",
        _ => return None,
    })
}

/// The preset as commented TOML, ready to edit.
pub fn init_text(problem: ProblemKind, mode: Mode) -> Outcome<String> {
    let cfg = ExperimentConfig::preset(problem, mode);
    let body = cfg.to_toml()?;
    let mut out = format!("# {problem} trained in {mode} mode\n");
    let mut documented = HashSet::new();
    for line in body.lines() {
        let key = if line.starts_with('[') { line.trim() } else { line.split(" =").next().unwrap_or("").trim() };
        if let Some(d) = doc(key) {
            if documented.insert(key.to_string()) {
                out.push_str(&format!("# {d}\n"));
            }
        }
        out.push_str(line);
        out.push('\n');
        if key == "pw_termination" {
            out.push_str("# pw_epsilon = 1e-3\n");
        }
        if key == "[datasets]" {
            if let Some(file) = default_dataset_file(problem) {
                out.push_str(&format!("# reference solution, relative to ${DATA_ENV} or to this file\n# {problem} = \"{file}\"\n"));
            }
        }
    }
    Ok(out)
}
