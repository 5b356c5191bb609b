use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};
use crate::losses::PwTermination;
use crate::network::{Activation, InitScheme, MlpSpec};
use crate::optim::AdamConfig;
use crate::pde::{PdeProblem, ProblemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pinn,
    PinnPw,
    Gapinn,
    GapinnPw,
    Dgm,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Pinn, Mode::PinnPw, Mode::Gapinn, Mode::GapinnPw, Mode::Dgm];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Pinn => "pinn",
            Mode::PinnPw => "pinn_pw",
            Mode::Gapinn => "gapinn",
            Mode::GapinnPw => "gapinn_pw",
            Mode::Dgm => "dgm",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name).map_or_else(
            || {
                let valid: Vec<_> = Self::ALL.iter().map(|m| m.name()).collect();
                arg(format!("unknown mode '{name}', expected one of: {}", valid.join(", ")))
            },
            Ok,
        )
    }

    pub fn adversarial(self) -> bool {
        matches!(self, Mode::Gapinn | Mode::GapinnPw)
    }

    pub fn weighted(self) -> bool {
        matches!(self, Mode::PinnPw | Mode::GapinnPw)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Hidden layers of a tanh network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetShape {
    pub layers: usize,
    pub nodes: usize,
}

/// Point-weighting magnitude `q` and easy/hard threshold `e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PwParams {
    pub q: f64,
    pub e: f64,
}

fn one() -> f64 {
    1.0
}

fn divergence_limit() -> f64 {
    1e6
}

fn dgm_batch() -> usize {
    256
}

fn test_points() -> usize {
    10_000
}

/// Everything one training run needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub problem: ProblemKind,
    pub mode: Mode,
    #[serde(default = "one")]
    pub helmholtz_k: f64,
    pub generator: NetShape,
    pub discriminator: NetShape,
    pub n_interior: usize,
    pub m_boundary: usize,
    pub j_labeled: usize,
    pub lr_g: f64,
    pub lr_p: f64,
    pub lr_d: f64,
    /// Boundary weight in the plain physics loss.
    #[serde(default = "one")]
    pub lambda1: f64,
    /// Labeled-loss weight in the augmented physics loss.
    #[serde(default = "one")]
    pub lambda2: f64,
    /// Boundary weight in the point-weighted physics loss.
    #[serde(default = "one")]
    pub lambda_pw: f64,
    /// One entry per boundary term.
    pub pw_boundary: Vec<PwParams>,
    #[serde(default)]
    pub pw_interior: Option<PwParams>,
    #[serde(default)]
    pub pw_epsilon: Option<f64>,
    #[serde(default)]
    pub pw_termination: PwTermination,
    /// Stop once the physics loss is at or below this level.
    pub tc: f64,
    pub max_epochs: usize,
    pub seed: u64,
    #[serde(default = "dgm_batch")]
    pub dgm_batch: usize,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default)]
    pub init: InitScheme,
    #[serde(default = "test_points")]
    pub test_points: usize,
    #[serde(default)]
    pub test_seed: u64,
    /// Evaluate the test error every this many epochs.
    #[serde(default)]
    pub nrmse_every: Option<usize>,
    /// A physics loss above this counts as divergence.
    #[serde(default = "divergence_limit")]
    pub divergence_limit: f64,
}

impl TrainConfig {
    /// Published hyperparameters for `problem`, trained in `mode`.
    pub fn preset(problem: ProblemKind, mode: Mode) -> Self {
        let net = |layers, nodes| NetShape { layers, nodes };
        let pw = |q, e| PwParams { q, e };
        // (q1, e1, q2, e2, tc, n, m, j, lr_g, lr_p, lr_d, gen, disc)
        let (q1, e1, q2, e2, tc, n, m, j, lr_g, lr_p, lr_d, generator, discriminator) = match problem {
            ProblemKind::Burgers => (1e-4, 0.02, 1e-4, 5e-4, 1e-4, 10000, 100, 10, 1e-3, 1e-3, 5e-3, net(7, 20), net(8, 20)),
            ProblemKind::Schrodinger => {
                (5e-3, 5e-4, 5e-3, 1e-4, 1e-3, 20000, 100, 10, 1e-3, 1e-3, 5e-3, net(4, 100), net(3, 100))
            }
            ProblemKind::Helmholtz => {
                (6e-5, 5e-4, 6e-5, 5e-4, 1e-2, 20000, 200, 3, 1e-3, 1e-5, 5e-5, net(4, 100), net(1, 100))
            }
            ProblemKind::Poisson => (5e-5, 5e-6, 5e-5, 5e-6, 5e-5, 5000, 100, 5, 1e-3, 1e-6, 5e-6, net(4, 100), net(1, 100)),
            ProblemKind::HdPoisson => {
                (1e-3, 0.05, 1e-3, 0.05, 2e-3, 10000, 500, 100, 1e-3, 1e-3, 5e-3, net(4, 100), net(1, 100))
            }
            ProblemKind::Heat => (5e-5, 5e-6, 5e-5, 5e-6, 5e-6, 5000, 100, 10, 1e-3, 1e-3, 5e-3, net(4, 100), net(1, 100)),
        };
        let terms = PdeProblem::new(problem).num_terms();
        let pw_boundary = (0..terms).map(|i| if i == 0 { pw(q1, e1) } else { pw(q2, e2) }).collect();
        let pw_interior = (problem == ProblemKind::Poisson).then(|| pw(5e-5, 1e-3));
        let max_epochs = if mode == Mode::Dgm {
            match problem {
                ProblemKind::Burgers => 50_000,
                ProblemKind::Schrodinger => 20_000,
                ProblemKind::Helmholtz => 8_000,
                _ => 6_000,
            }
        } else {
            30_000
        };
        Self {
            problem,
            mode,
            helmholtz_k: 1.0,
            generator,
            discriminator,
            n_interior: n,
            m_boundary: m,
            j_labeled: j,
            lr_g,
            lr_p,
            lr_d,
            lambda1: 1.0,
            lambda2: 1.0,
            lambda_pw: 1.0,
            pw_boundary,
            pw_interior,
            pw_epsilon: None,
            pw_termination: PwTermination::HlMass,
            tc,
            max_epochs,
            seed: 0,
            dgm_batch: 256,
            adam: AdamConfig::default(),
            init: InitScheme::GlorotUniform,
            test_points: 10_000,
            test_seed: 0,
            nrmse_every: None,
            divergence_limit: 1e6,
        }
    }

    pub fn pde(&self) -> PdeProblem {
        PdeProblem::with_wavenumber(self.problem, self.helmholtz_k)
    }

    pub fn generator_spec(&self) -> Result<MlpSpec> {
        let p = self.pde();
        MlpSpec::new(p.input_dim(), self.generator.layers, self.generator.nodes, p.output_dim(), Activation::Linear)
    }

    /// Input is a point followed by a solution value; output is a probability.
    pub fn discriminator_spec(&self) -> Result<MlpSpec> {
        let p = self.pde();
        MlpSpec::new(
            p.input_dim() + p.output_dim(),
            self.discriminator.layers,
            self.discriminator.nodes,
            1,
            Activation::Sigmoid,
        )
    }

    /// Boundary weight used by the loss that drives the generator.
    pub fn training_lambda(&self) -> f64 {
        if self.mode.weighted() {
            self.lambda_pw
        } else {
            self.lambda1
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                arg(format!("{name} must be positive, got {v}"))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                arg(format!("{name} must be nonnegative, got {v}"))
            }
        };
        positive("lr_p", self.lr_p)?;
        positive("lr_g", self.lr_g)?;
        positive("lr_d", self.lr_d)?;
        positive("tc", self.tc)?;
        positive("helmholtz_k", self.helmholtz_k)?;
        if self.divergence_limit.is_nan() || self.divergence_limit <= 0.0 {
            return arg("divergence_limit must be positive");
        }
        nonneg("lambda1", self.lambda1)?;
        nonneg("lambda2", self.lambda2)?;
        nonneg("lambda_pw", self.lambda_pw)?;
        if self.max_epochs == 0 {
            return arg("max_epochs must be at least 1");
        }
        if self.n_interior == 0 || self.m_boundary == 0 || self.dgm_batch == 0 || self.test_points == 0 {
            return arg("point counts must be at least 1");
        }
        if self.mode.adversarial() && self.j_labeled == 0 {
            return arg("adversarial modes need j_labeled >= 1");
        }
        if self.nrmse_every == Some(0) {
            return arg("nrmse_every must be at least 1");
        }
        let terms = self.pde().num_terms();
        if self.pw_boundary.len() != terms {
            return arg(format!("{} has {terms} boundary terms but pw_boundary lists {}", self.problem, self.pw_boundary.len()));
        }
        for p in self.pw_boundary.iter().chain(&self.pw_interior) {
            nonneg("pw q", p.q)?;
            nonneg("pw e", p.e)?;
        }
        if let Some(eps) = self.pw_epsilon {
            if !(0.0..=1.0).contains(&eps) {
                return arg(format!("pw_epsilon must lie in [0, 1], got {eps}"));
            }
        }
        for (name, shape) in [("generator", self.generator), ("discriminator", self.discriminator)] {
            if shape.layers == 0 || shape.nodes == 0 {
                return arg(format!("{name} needs at least one hidden layer of one node"));
            }
        }
        Ok(())
    }
}
