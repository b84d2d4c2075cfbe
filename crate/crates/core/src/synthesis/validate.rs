//! Independent post-solve checks of a synthesized controller.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::build::build_lmi;
use super::lmi::ConstraintKind;
use super::solve::{SynthesisResult, SynthesisStatus};
use super::{H2BoundConvention, SynthesisSpec};
use crate::lti::{assemble_closed_loop, spectral_abscissa, NormKind, StateSpace, STABILITY_MARGIN};

/// Allowed violation of scalar constraints (trace bounds, floors).
pub const LINEAR_TOL: f64 = 1e-8;
/// Allowed relative mismatch of `diag(omega_c) K` against `V`.
pub const RECOVERY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:>6} {:>14} {:>14}", "check", "result", "value", "limit")?;
        for c in &self.checks {
            let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
            write!(
                f,
                "{:<28} {:>6} {:>14} {:>14}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                num(c.value),
                num(c.limit)
            )?;
            if !c.detail.is_empty() {
                write!(f, "  {}", c.detail)?;
            }
            writeln!(f)?;
        }
        write!(f, "overall: {}", if self.passed { "pass" } else { "FAIL" })
    }
}

fn check(name: impl Into<String>, value: f64, limit: f64, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed: value <= limit,
        value: Some(value),
        limit: Some(limit),
        detail: detail.into(),
    }
}

/// Re-checks a result against the plant and spec it claims to satisfy:
/// closed-loop stability, the norm bound (recomputed from scratch), every
/// program constraint at the reported decision values, and the gain
/// recovery identity. Nothing is taken from the solver's own residuals.
pub fn validate(result: &SynthesisResult, sys: &StateSpace, spec: &SynthesisSpec) -> ValidationReport {
    let mut checks = Vec::new();
    let fail = |name: &str, detail: String| Check {
        name: name.into(),
        passed: false,
        value: None,
        limit: None,
        detail,
    };
    let done = |checks: Vec<Check>| ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    };

    if result.status != SynthesisStatus::Optimal {
        checks.push(fail("status", format!("{:?}", result.status)));
        return done(checks);
    }
    let Some(point) = &result.point else {
        checks.push(fail("status", "no solution point".into()));
        return done(checks);
    };
    if result.norm != spec.norm {
        checks.push(fail(
            "norm_kind",
            format!("result is {}, spec asks for {}", result.norm, spec.norm),
        ));
        return done(checks);
    }

    // recovery identity
    let deg = &point.degradation;
    if point.k.shape() != point.v.shape() || deg.nu() != point.k.nrows() {
        checks.push(fail("recovery_identity", "K, V and omega_c disagree in size".into()));
    } else {
        let mut worst: f64 = 0.0;
        for i in 0..point.k.nrows() {
            for j in 0..point.k.ncols() {
                worst = worst.max((deg.omega_c[i] * point.k[(i, j)] - point.v[(i, j)]).abs());
            }
        }
        let scale = point.v.amax().max(1.0);
        checks.push(check("recovery_identity", worst / scale, RECOVERY_TOL, ""));
    }

    // closed loop
    let wd = DVector::from_vec(spec.wd.clone());
    match assemble_closed_loop(sys, &point.k, deg, &wd) {
        Err(e) => checks.push(fail("closed_loop", e.to_string())),
        Ok(cl) => {
            let abscissa = spectral_abscissa(&cl.acl);
            checks.push(check(
                "closed_loop_hurwitz",
                abscissa,
                -STABILITY_MARGIN,
                "max real part of closed-loop eigenvalues",
            ));
            let norm = match spec.norm {
                NormKind::HInf => crate::lti::hinf_norm_with_feedthrough(
                    &cl.acl,
                    &cl.bcl,
                    &cl.ccl,
                    &cl.dcl,
                    super::solve::HINF_VERIFY_TOL,
                ),
                NormKind::H2 => crate::lti::h2_norm(&cl.acl, &cl.bcl, &cl.ccl),
            };
            match norm {
                Err(e) => checks.push(fail("norm_bound", e.to_string())),
                Ok(r) => {
                    let limit = spec.gamma * (1.0 + spec.verify_slack);
                    let (value, detail) = match (spec.norm, spec.h2_convention) {
                        (NormKind::HInf, _) => (r.value, "||G||_inf"),
                        (NormKind::H2, H2BoundConvention::Trace) => (r.value * r.value, "||G||_2^2"),
                        (NormKind::H2, H2BoundConvention::Norm) => (r.value, "||G||_2"),
                    };
                    checks.push(check("norm_bound", value, limit, detail));
                }
            }
        }
    }

    // program constraints at the reported point
    match build_lmi(sys, spec) {
        Err(e) => checks.push(fail("program", e.to_string())),
        Ok(problem) => match problem.variables.pack(&point.block_values(spec.norm)) {
            Err(e) => checks.push(fail("program", e.to_string())),
            Ok(x) => {
                for c in &problem.constraints {
                    let (limit, detail) = match &c.kind {
                        ConstraintKind::Matrix { .. } => (spec.solver_tol, "eigenvalue residual"),
                        ConstraintKind::Linear { .. } => (LINEAR_TOL, "scalar residual"),
                        // epigraph variables are set to the norms themselves
                        ConstraintKind::SecondOrderCone { .. } => continue,
                    };
                    checks.push(check(format!("lmi:{}", c.name), c.violation(&x), limit, detail));
                }
            }
        },
    }

    done(checks)
}
