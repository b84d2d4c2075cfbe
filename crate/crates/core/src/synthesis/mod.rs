//! Joint synthesis of a state-feedback gain and the largest tolerable
//! actuator degradation under an H2 or H-infinity performance bound.

pub mod backend;
pub mod build;
pub mod lmi;
pub mod solve;
pub mod validate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{NormKind, StateSpace};

pub use backend::{BackendSettings, ClarabelBackend, ConicBackend, ConicProblem, ConicStatus};
pub use build::{build_h2_lmi, build_hinf_lmi, build_lmi};
pub use lmi::LmiProblem;
pub use solve::{recover_gain, solve, solve_with, OptimalPoint, SolverDiagnostics, SynthesisResult, SynthesisStatus};
pub use validate::{validate, Check, ValidationReport};

/// Environment variable overriding [`SynthesisSpec::solver_tol`].
pub const SOLVER_TOL_ENV: &str = "ACTDEG_SOLVER_TOL";
pub const DEFAULT_SOLVER_TOL: f64 = 1e-7;

/// What the H2 bound `gamma` limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum H2BoundConvention {
    /// `||G||_2^2 <= gamma`, i.e. `tr(Q1) <= gamma`.
    #[default]
    Trace,
    /// `||G||_2 <= gamma`, i.e. `tr(Q1) <= gamma^2`.
    Norm,
}

impl std::str::FromStr for H2BoundConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace" => Ok(Self::Trace),
            "norm" => Ok(Self::Norm),
            other => Err(Error::InvalidInput(format!(
                "unknown H2 bound convention '{other}' (expected trace or norm)"
            ))),
        }
    }
}

fn default_solver_tol() -> f64 {
    DEFAULT_SOLVER_TOL
}
fn default_kappa_floor() -> f64 {
    1e-10
}
fn default_omega_floor() -> f64 {
    1e-6
}
fn default_verify_slack() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub norm: NormKind,
    pub gamma: f64,
    pub lambda_a: f64,
    pub lambda_wc: f64,
    pub lambda_xf: f64,
    /// Diagonal of the disturbance scaling `Wd`.
    pub wd: Vec<f64>,
    /// Strictness margin of the matrix inequalities; `None` means
    /// `1e-8 (1 + ||A||_F)`.
    #[serde(default)]
    pub eps_lmi: Option<f64>,
    /// Allowed constraint residual when validating a solution.
    #[serde(default = "default_solver_tol")]
    pub solver_tol: f64,
    #[serde(default)]
    pub h2_convention: H2BoundConvention,
    #[serde(default = "default_kappa_floor")]
    pub kappa_floor: f64,
    #[serde(default = "default_omega_floor")]
    pub omega_floor: f64,
    /// Relative slack on the verified norm bound.
    #[serde(default = "default_verify_slack")]
    pub verify_slack: f64,
}

impl SynthesisSpec {
    pub fn new(norm: NormKind, gamma: f64, wd: Vec<f64>) -> Self {
        Self {
            norm,
            gamma,
            lambda_a: 1.0,
            lambda_wc: 1.0,
            lambda_xf: 1.0,
            wd,
            eps_lmi: None,
            solver_tol: DEFAULT_SOLVER_TOL,
            h2_convention: H2BoundConvention::Trace,
            kappa_floor: default_kappa_floor(),
            omega_floor: default_omega_floor(),
            verify_slack: default_verify_slack(),
        }
    }

    pub fn with_weights(mut self, lambda_a: f64, lambda_wc: f64, lambda_xf: f64) -> Self {
        self.lambda_a = lambda_a;
        self.lambda_wc = lambda_wc;
        self.lambda_xf = lambda_xf;
        self
    }

    /// Applies `ACTDEG_SOLVER_TOL` when set.
    pub fn with_env_overrides(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(SOLVER_TOL_ENV) {
            let tol: f64 = v.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("{SOLVER_TOL_ENV}='{v}' is not a number"))
            })?;
            self.solver_tol = tol;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn eps_lmi_for(&self, sys: &StateSpace) -> f64 {
        self.eps_lmi.unwrap_or_else(|| 1e-8 * (1.0 + sys.a.norm()))
    }

    /// Bound imposed on `tr(Q1)` in the H2 program.
    pub fn h2_trace_bound(&self) -> f64 {
        match self.h2_convention {
            H2BoundConvention::Trace => self.gamma,
            H2BoundConvention::Norm => self.gamma * self.gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("{name} must be positive, got {v}")))
            }
        };
        positive("gamma", self.gamma)?;
        positive("solver_tol", self.solver_tol)?;
        positive("kappa_floor", self.kappa_floor)?;
        positive("omega_floor", self.omega_floor)?;
        if !(self.verify_slack.is_finite() && self.verify_slack >= 0.0) {
            return Err(Error::InvalidInput("verify_slack must be nonnegative".into()));
        }
        let weights = [self.lambda_a, self.lambda_wc, self.lambda_xf];
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("objective weights must be nonnegative".into()));
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidInput(
                "at least one objective weight must be positive".into(),
            ));
        }
        if self.wd.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput("Wd entries must be positive".into()));
        }
        if let Some(e) = self.eps_lmi {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::InvalidInput(format!("eps_lmi must be nonnegative, got {e}")));
            }
        }
        Ok(())
    }
}
