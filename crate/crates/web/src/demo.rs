//! Plain Rust behind the browser bindings, so it can be tested natively.

use gapinn::losses::{classify, pw_update, NetModel, WeightedPointSet};
use gapinn::metrics::{error_grid, SliceSpec};
use gapinn::network::BatchEngine;
use gapinn::pde::ProblemKind;
use gapinn::sampling::{latin_hypercube, PointSet, RegionTag};
use gapinn::train::{Mode, NetShape, ProblemData, Quiet, TerminationReason, TrainConfig, Trainer};

/// A small network trained a few epochs at a time.
pub struct Session {
    trainer: Trainer,
    finished: Option<TerminationReason>,
}

/// Problems that train quickly enough for a page.
pub const PROBLEMS: [ProblemKind; 3] = [ProblemKind::Poisson, ProblemKind::Helmholtz, ProblemKind::Heat];

impl Session {
    pub fn new(problem: &str, mode: &str, seed: u64) -> Result<Self, String> {
        let kind = ProblemKind::from_name(problem).map_err(|e| e.to_string())?;
        if !PROBLEMS.contains(&kind) {
            return Err(format!("{kind} is too large for the demo; try poisson, helmholtz or heat"));
        }
        let mode = Mode::from_name(mode).map_err(|e| e.to_string())?;
        let mut cfg = TrainConfig::preset(kind, mode);
        cfg.generator = NetShape { layers: 2, nodes: 20 };
        cfg.discriminator = NetShape { layers: 1, nodes: 20 };
        cfg.n_interior = 400;
        cfg.m_boundary = 40;
        cfg.dgm_batch = 64;
        cfg.test_points = 1000;
        cfg.lr_p = 1e-2;
        cfg.lr_g = 1e-2;
        cfg.tc = cfg.tc.min(1e-6);
        cfg.max_epochs = 100_000;
        cfg.seed = seed;
        let trainer = Trainer::new(cfg, &ProblemData::analytic()).map_err(|e| e.to_string())?;
        Ok(Self { trainer, finished: None })
    }

    /// Runs up to `epochs` epochs and returns the last physics loss.
    pub fn step(&mut self, epochs: usize) -> Result<f64, String> {
        for _ in 0..epochs {
            if self.finished.is_some() {
                break;
            }
            match self.trainer.step_epoch(&mut Quiet) {
                Ok(reason) => self.finished = reason,
                Err(e) => {
                    self.finished = Some(TerminationReason::Diverged);
                    return Err(e.to_string());
                }
            }
        }
        Ok(self.trainer.record().last("l_pinn").unwrap_or(f64::NAN))
    }

    pub fn epoch(&self) -> usize {
        self.trainer.epoch()
    }

    pub fn finished(&self) -> Option<&'static str> {
        self.finished.map(TerminationReason::name)
    }

    pub fn losses(&self) -> Vec<f64> {
        self.trainer.record().column("l_pinn").unwrap_or_default()
    }

    pub fn nrmse(&mut self) -> Result<f64, String> {
        self.trainer.test_nrmse().map_err(|e| e.to_string())
    }

    /// `|û − u|` on an `r × r` grid over the first two coordinates, rows first.
    pub fn error_grid(&self, r: usize) -> Result<Vec<f64>, String> {
        let problem = self.trainer.problem().clone();
        let spec = self.trainer.config().generator_spec().map_err(|e| e.to_string())?;
        let mut engine = BatchEngine::new(&spec);
        let mut model =
            NetModel { engine: &mut engine, params: self.trainer.generator(), output_dim: problem.output_dim() };
        let grid = error_grid(&mut model, &problem, r, &SliceSpec::default_for(&problem)).map_err(|e| e.to_string())?;
        Ok(grid.values)
    }
}

/// One point-weight update. Returns the new weights followed by the
/// hard-point mass and the step size.
pub fn reweight(weights: &[f64], errors: &[f64], q: f64, e: f64) -> Result<Vec<f64>, String> {
    if weights.len() != errors.len() || weights.is_empty() {
        return Err("weights and errors need the same nonzero length".into());
    }
    let points = PointSet { dim: 1, points: (0..weights.len()).map(|i| i as f64).collect(), tag: RegionTag::Interior };
    let mut set = WeightedPointSet::new(points, q, e);
    set.weights = weights.to_vec();
    let beta = classify(errors, e);
    let (next, report) = pw_update(&set, &beta).map_err(|e| e.to_string())?;
    let mut out = next.weights;
    out.extend([report.rho, report.alpha]);
    Ok(out)
}

/// `n` Latin hypercube points in the unit square, interleaved `x, y`.
pub fn lhs(n: usize, seed: u64) -> Result<Vec<f64>, String> {
    latin_hypercube(n, &[(0.0, 1.0), (0.0, 1.0)], seed).map(|s| s.points).map_err(|e| e.to_string())
}
