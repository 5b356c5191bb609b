//! Training loops for the five modes.
//!
//! Every epoch evaluates the physics loss of the current generator and
//! records it before stepping. A run stops without stepping once that loss
//! is at or below the threshold, so the final parameters are exactly the
//! ones whose loss met it.

mod adversarial;
mod config;
mod record;

use serde::{Deserialize, Serialize};

pub use adversarial::{d_loss, g_loss, GenLoss};
pub use config::{Mode, NetShape, PwParams, TrainConfig};
pub use record::{TerminationReason, TrainRecord};

use crate::error::{arg, Error, Result};
use crate::losses::{classify, physics_loss, pw_update, NetModel, PhysicsLoss, PwStepReport, WeightedPointSet};
use crate::metrics::nrmse;
use crate::network::{init_params, BatchEngine, Checkpoint, MlpSpec, ParamVector};
use crate::optim::AdamState;
use crate::pde::{burgers_cole_hopf, schrodinger_split_step, LabeledSet, PdeProblem, ProblemKind};
use crate::rng::{stream_rng, streams};
use crate::sampling::{
    analytic_test_set, draw_labeled, sample_boundary, sample_boundary_from, sample_interior, sample_interior_from,
    LabelSource,
};

/// Exact-solution data for problems without a closed form.
#[derive(Clone, Debug, Default)]
pub struct ProblemData {
    pub reference: Option<LabeledSet>,
}

impl ProblemData {
    pub fn analytic() -> Self {
        Self::default()
    }

    pub fn with_reference(reference: LabeledSet) -> Self {
        Self { reference: Some(reference) }
    }

    /// The built-in reference solvers on their standard grids.
    pub fn fallback(kind: ProblemKind) -> Result<Self> {
        let reference = match kind {
            ProblemKind::Burgers => Some(burgers_cole_hopf(256, 100, 4096)?),
            ProblemKind::Schrodinger => Some(schrodinger_split_step(256, 201, 40)?),
            _ => None,
        };
        Ok(Self { reference })
    }
}

/// The order of work inside an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Discriminator,
    AdversarialGenerator,
    Physics,
    PointWeights,
}

/// Hooks called while training.
pub trait Observer {
    fn step(&mut self, _epoch: usize, _kind: StepKind) {}

    /// After each recorded epoch, with the trainer in its post-epoch state.
    fn epoch_end(&mut self, _trainer: &Trainer, _row: &[f64]) -> Result<()> {
        Ok(())
    }
}

/// An observer that does nothing.
pub struct Quiet;

impl Observer for Quiet {}

/// Optimizer and weight state sufficient to continue a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    pub epoch: usize,
    pub generator: Vec<f64>,
    pub discriminator: Option<Vec<f64>>,
    pub adam_physics: AdamState,
    pub adam_generator: Option<AdamState>,
    pub adam_discriminator: Option<AdamState>,
    pub interior_weights: Vec<f64>,
    pub boundary_weights: Vec<Vec<f64>>,
}

pub struct Trainer {
    config: TrainConfig,
    problem: PdeProblem,
    gen_spec: MlpSpec,
    gen: Vec<f64>,
    disc: Option<Vec<f64>>,
    adam_p: AdamState,
    adam_g: Option<AdamState>,
    adam_d: Option<AdamState>,
    interior: WeightedPointSet,
    boundary: Vec<WeightedPointSet>,
    labeled: Option<LabeledSet>,
    test: LabeledSet,
    gen_engine: BatchEngine,
    disc_engine: Option<BatchEngine>,
    grad: Vec<f64>,
    record: TrainRecord,
    epoch: usize,
}

impl Trainer {
    pub fn new(config: TrainConfig, data: &ProblemData) -> Result<Self> {
        config.validate()?;
        let problem = config.pde();
        let seed = config.seed;
        let test = match (&data.reference, problem.kind.has_analytic()) {
            (Some(r), _) => {
                if r.input_dim != problem.input_dim() || r.output_dim != problem.output_dim() {
                    return arg(format!("reference data does not have the shape of {}", problem.name()));
                }
                r.clone()
            }
            (None, true) => analytic_test_set(&problem, config.test_points, config.test_seed)?,
            (None, false) => {
                return arg(format!("{} needs a reference dataset or the built-in fallback solver", problem.name()))
            }
        };
        let gen_spec = config.generator_spec()?;
        let gen = init_params(&gen_spec, config.init, seed, streams::GENERATOR_INIT).values;

        let pw_on = config.mode.weighted();
        let weighting = |set, p: Option<PwParams>| {
            let mut w = match (pw_on, p) {
                (true, Some(p)) => WeightedPointSet::new(set, p.q, p.e),
                _ => WeightedPointSet::frozen(set),
            };
            w.epsilon = config.pw_epsilon;
            w.termination = config.pw_termination;
            w
        };
        let interior = weighting(sample_interior(&problem, config.n_interior, seed)?, config.pw_interior);
        let boundary = (0..problem.num_terms())
            .map(|i| Ok(weighting(sample_boundary(&problem, i, config.m_boundary, seed)?, Some(config.pw_boundary[i]))))
            .collect::<Result<Vec<_>>>()?;

        let (disc, labeled, adam_g, adam_d, disc_engine) = if config.mode.adversarial() {
            let spec = config.discriminator_spec()?;
            let params = init_params(&spec, config.init, seed, streams::DISCRIMINATOR_INIT).values;
            let source = match &data.reference {
                Some(r) => LabelSource::Reference(r),
                None => LabelSource::Analytic,
            };
            let labeled = draw_labeled(&problem, source, config.j_labeled, seed)?;
            let adam_d = AdamState::with_config(params.len(), config.lr_d, config.adam);
            let adam_g = AdamState::with_config(gen.len(), config.lr_g, config.adam);
            let engine = BatchEngine::new(&spec);
            (Some(params), Some(labeled), Some(adam_g), Some(adam_d), Some(engine))
        } else {
            (None, None, None, None, None)
        };

        let mut columns = vec!["epoch".to_string(), "l_f".into(), "l_b".into()];
        columns.extend((1..=problem.num_terms()).map(|i| format!("l_b{i}")));
        columns.push("l_pinn".into());
        if config.mode.adversarial() {
            columns.extend(["l_t".into(), "l_d".into(), "l_g".into()]);
        }
        if pw_on {
            if config.pw_interior.is_some() {
                columns.push("rho_f".into());
            }
            columns.extend((1..=problem.num_terms()).map(|i| format!("rho_b{i}")));
        }
        if config.nrmse_every.is_some() {
            columns.push("nrmse".into());
        }

        Ok(Self {
            adam_p: AdamState::with_config(gen.len(), config.lr_p, config.adam),
            grad: vec![0.0; gen.len()],
            gen_engine: BatchEngine::new(&gen_spec),
            record: TrainRecord::new(columns),
            config,
            problem,
            gen_spec,
            gen,
            disc,
            adam_g,
            adam_d,
            interior,
            boundary,
            labeled,
            test,
            disc_engine,
            epoch: 0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn problem(&self) -> &PdeProblem {
        &self.problem
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn record(&self) -> &TrainRecord {
        &self.record
    }

    pub fn generator(&self) -> &[f64] {
        &self.gen
    }

    pub fn discriminator(&self) -> Option<&[f64]> {
        self.disc.as_deref()
    }

    pub fn interior(&self) -> &WeightedPointSet {
        &self.interior
    }

    pub fn boundary(&self) -> &[WeightedPointSet] {
        &self.boundary
    }

    pub fn labeled(&self) -> Option<&LabeledSet> {
        self.labeled.as_ref()
    }

    pub fn test_set(&self) -> &LabeledSet {
        &self.test
    }

    /// Replaces the generator weights, e.g. to start from a trained network.
    pub fn set_generator(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.gen.len() {
            return arg(format!("generator has {} parameters, got {}", self.gen.len(), values.len()));
        }
        self.gen = values;
        Ok(())
    }

    pub fn checkpoint(&self) -> Result<Checkpoint> {
        Ok(Checkpoint {
            spec: self.gen_spec.clone(),
            params: ParamVector::from_values(&self.gen_spec, self.gen.clone())?,
            seed: self.config.seed,
            epoch: self.epoch,
        })
    }

    pub fn state(&self) -> TrainState {
        TrainState {
            epoch: self.epoch,
            generator: self.gen.clone(),
            discriminator: self.disc.clone(),
            adam_physics: self.adam_p.clone(),
            adam_generator: self.adam_g.clone(),
            adam_discriminator: self.adam_d.clone(),
            interior_weights: self.interior.weights.clone(),
            boundary_weights: self.boundary.iter().map(|b| b.weights.clone()).collect(),
        }
    }

    /// Continues from `state`, with `rows` the record rows written so far.
    pub fn restore(&mut self, state: TrainState, rows: Vec<Vec<f64>>) -> Result<()> {
        let shapes_ok = state.generator.len() == self.gen.len()
            && state.discriminator.as_ref().map(Vec::len) == self.disc.as_ref().map(Vec::len)
            && state.interior_weights.len() == self.interior.len()
            && state.boundary_weights.len() == self.boundary.len()
            && state.boundary_weights.iter().zip(&self.boundary).all(|(w, b)| w.len() == b.len())
            && rows.len() == state.epoch
            && rows.iter().all(|r| r.len() == self.record.columns.len());
        if !shapes_ok {
            return Err(Error::State("saved training state does not match this configuration".into()));
        }
        self.epoch = state.epoch;
        self.gen = state.generator;
        self.disc = state.discriminator;
        self.adam_p = state.adam_physics;
        self.adam_g = state.adam_generator;
        self.adam_d = state.adam_discriminator;
        self.interior.weights = state.interior_weights;
        for (b, w) in self.boundary.iter_mut().zip(state.boundary_weights) {
            b.weights = w;
        }
        self.record.rows = rows;
        Ok(())
    }

    fn gen_model(&mut self) -> NetModel<'_> {
        NetModel { engine: &mut self.gen_engine, params: &self.gen, output_dim: self.problem.output_dim() }
    }

    /// Test-set error of the current generator.
    pub fn test_nrmse(&mut self) -> Result<f64> {
        let test = std::mem::replace(&mut self.test, LabeledSet::new(0, 0));
        let out = nrmse(&mut self.gen_model(), &test);
        self.test = test;
        out
    }

    /// Physics loss of the current generator without stepping.
    pub fn physics(&mut self) -> Result<PhysicsLoss> {
        let lambda = self.config.training_lambda();
        let mut model =
            NetModel { engine: &mut self.gen_engine, params: &self.gen, output_dim: self.problem.output_dim() };
        physics_loss(&mut model, &self.problem, &self.interior, &self.boundary, lambda, None)
    }

    fn discriminator_step(&mut self) -> Result<f64> {
        let labeled = self.labeled.as_ref().expect("adversarial mode has labels");
        let disc = self.disc.as_mut().expect("adversarial mode has a discriminator");
        let engine = self.disc_engine.as_mut().expect("adversarial mode has a discriminator");
        let mut g = vec![0.0; disc.len()];
        let l = d_loss(
            &mut NetModel { engine, params: disc, output_dim: 1 },
            &mut NetModel { engine: &mut self.gen_engine, params: &self.gen, output_dim: self.problem.output_dim() },
            labeled,
            Some((&mut g, 1.0)),
        )?;
        finite("discriminator loss", l)?;
        self.adam_d.as_mut().expect("adversarial mode").step(disc, &g)?;
        Ok(l)
    }

    fn adversarial_step(&mut self) -> Result<GenLoss> {
        let labeled = self.labeled.as_ref().expect("adversarial mode has labels");
        let disc = self.disc.as_ref().expect("adversarial mode has a discriminator");
        let engine = self.disc_engine.as_mut().expect("adversarial mode has a discriminator");
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        let l = g_loss(
            &mut NetModel { engine, params: disc, output_dim: 1 },
            &mut NetModel { engine: &mut self.gen_engine, params: &self.gen, output_dim: self.problem.output_dim() },
            labeled,
            Some((&mut self.grad, 1.0)),
        )?;
        finite("generator loss", l.l_g)?;
        self.adam_g.as_mut().expect("adversarial mode").step(&mut self.gen, &self.grad)?;
        Ok(l)
    }

    /// Runs one epoch. Returns the termination reason if the run is over.
    pub fn step_epoch(&mut self, obs: &mut dyn Observer) -> Result<Option<TerminationReason>> {
        let k = self.epoch + 1;
        let mut adv = (f64::NAN, f64::NAN, f64::NAN);
        if self.config.mode.adversarial() {
            obs.step(k, StepKind::Discriminator);
            let l_d = self.discriminator_step()?;
            obs.step(k, StepKind::AdversarialGenerator);
            let g = self.adversarial_step()?;
            adv = (g.l_t, l_d, g.l_g);
        }

        obs.step(k, StepKind::Physics);
        let lambda = self.config.training_lambda();
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        let loss = if self.config.mode == Mode::Dgm {
            let mut rng = stream_rng(self.config.seed, (streams::MINIBATCH << 32) | k as u64);
            let b = self.config.dgm_batch;
            let interior = WeightedPointSet::frozen(sample_interior_from(&mut rng, &self.problem, b));
            let boundary: Vec<_> = (0..self.problem.num_terms())
                .map(|i| WeightedPointSet::frozen(sample_boundary_from(&mut rng, &self.problem, i, b)))
                .collect();
            let mut model =
                NetModel { engine: &mut self.gen_engine, params: &self.gen, output_dim: self.problem.output_dim() };
            physics_loss(&mut model, &self.problem, &interior, &boundary, lambda, Some((&mut self.grad, 1.0)))?
        } else {
            let mut model =
                NetModel { engine: &mut self.gen_engine, params: &self.gen, output_dim: self.problem.output_dim() };
            physics_loss(&mut model, &self.problem, &self.interior, &self.boundary, lambda, Some((&mut self.grad, 1.0)))?
        };
        let l_pinn = loss.l_b.iter().fold(loss.l_f, |acc, m| acc + self.config.lambda1 * m);
        let limit = self.config.divergence_limit;
        bounded("physics loss", l_pinn, limit)?;
        bounded("weighted physics loss", loss.weighted, limit)?;

        let mut row = vec![k as f64, loss.l_f, loss.l_b.iter().sum()];
        row.extend(&loss.l_b);
        row.push(l_pinn);
        if self.config.mode.adversarial() {
            row.extend([adv.0, adv.1, adv.2]);
        }

        let reached = self.config.mode != Mode::Dgm && l_pinn <= self.config.tc;
        if !reached {
            self.adam_p.step(&mut self.gen, &self.grad)?;
        }

        let mut reason = None;
        if self.config.mode.weighted() {
            obs.step(k, StepKind::PointWeights);
            let mut reports: Vec<PwStepReport> = Vec::new();
            if self.config.pw_interior.is_some() {
                let (next, r) = pw_update(&self.interior, &classify(&loss.eq_errors, self.interior.threshold))?;
                if !reached {
                    self.interior = next;
                }
                reports.push(r);
            }
            for (set, errors) in self.boundary.iter_mut().zip(&loss.b_errors) {
                let (next, r) = pw_update(set, &classify(errors, set.threshold))?;
                if !reached {
                    *set = next;
                }
                reports.push(r);
            }
            row.extend(reports.iter().map(|r| r.rho));
            if reports.iter().all(|r| r.terminated) {
                reason = Some(TerminationReason::PwEpsilon);
            }
        }
        if reached {
            reason = Some(TerminationReason::TcReached);
        }

        self.epoch = k;
        if reason.is_none() && k >= self.config.max_epochs {
            reason = Some(TerminationReason::MaxEpochs);
        }
        if let Some(every) = self.config.nrmse_every {
            let due = k.is_multiple_of(every) || reason.is_some();
            row.push(if due { self.test_nrmse()? } else { f64::NAN });
        }
        self.record.rows.push(row);
        let last = self.record.rows.last().cloned().unwrap_or_default();
        obs.epoch_end(self, &last)?;
        Ok(reason)
    }

    /// Trains until a termination condition holds. Numeric failures end the
    /// run with reason `diverged` and keep the rows recorded so far; only
    /// observer errors are returned as `Err`.
    pub fn run(&mut self, obs: &mut dyn Observer) -> Result<TrainRecord> {
        if self.record.reason.is_some() {
            return Ok(self.record.clone());
        }
        loop {
            match self.step_epoch(obs) {
                Ok(None) => continue,
                Ok(Some(reason)) => {
                    self.record.reason = Some(reason);
                    self.record.final_nrmse = Some(self.test_nrmse()?);
                    break;
                }
                Err(Error::Numeric(msg)) => {
                    self.record.reason = Some(TerminationReason::Diverged);
                    self.record.error = Some(msg);
                    break;
                }
                Err(Error::Io(e)) => return Err(Error::Io(e)),
                Err(e) => {
                    self.record.reason = Some(TerminationReason::Diverged);
                    self.record.error = Some(e.to_string());
                    break;
                }
            }
        }
        Ok(self.record.clone())
    }
}

fn finite(what: &str, v: f64) -> Result<()> {
    bounded(what, v, f64::INFINITY)
}

fn bounded(what: &str, v: f64, limit: f64) -> Result<()> {
    if v.is_finite() && v <= limit {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{what} is {v}")))
    }
}

/// Builds a trainer and runs it to termination.
pub fn train(config: TrainConfig, data: &ProblemData) -> Result<TrainRecord> {
    Trainer::new(config, data)?.run(&mut Quiet)
}
