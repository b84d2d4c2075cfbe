use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::backend::{BackendSettings, ClarabelBackend, ConicBackend, ConicProblem, ConicSolution, ConicStatus};
use super::lmi::LmiProblem;
use super::SynthesisSpec;
use crate::degradation::DegradationParams;
use crate::error::{Error, Result};
use crate::lti::{assemble_closed_loop, h2_norm, hinf_norm_with_feedthrough, NormKind, NormReport};
use crate::rows;

/// Relative tolerance of the Hamiltonian bisection used for verification.
pub const HINF_VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

/// Decision values at the optimum plus the recovered gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPoint {
    #[serde(with = "rows")]
    pub k: DMatrix<f64>,
    #[serde(with = "rows")]
    pub v: DMatrix<f64>,
    #[serde(with = "rows")]
    pub y: DMatrix<f64>,
    /// Actuator-state Gramian bound (`Q`, or `Q2` in the H2 program).
    #[serde(with = "rows")]
    pub q_xf: DMatrix<f64>,
    /// Output Gramian bound `Q1` (H2 only).
    #[serde(default, with = "rows::option", skip_serializing_if = "Option::is_none")]
    pub q_out: Option<DMatrix<f64>>,
    pub degradation: DegradationParams,
    /// `lambda_a ||kappa_a|| + lambda_wc ||omega_c|| + lambda_xf gamma_xf`.
    pub objective: f64,
}

impl OptimalPoint {
    /// Per-block values keyed by the program's variable names.
    pub fn block_values(&self, kind: NormKind) -> BTreeMap<String, DMatrix<f64>> {
        let mut m = BTreeMap::new();
        let col = |v: &[f64]| DMatrix::from_column_slice(v.len(), 1, v);
        m.insert("Y".to_string(), self.y.clone());
        m.insert("V".to_string(), self.v.clone());
        m.insert("omega_c".to_string(), col(&self.degradation.omega_c));
        m.insert("kappa_a".to_string(), col(&self.degradation.kappa_a));
        m.insert("gamma_xf".to_string(), col(&[self.degradation.gamma_xf]));
        m.insert("t_kappa".to_string(), col(&[norm2(&self.degradation.kappa_a)]));
        m.insert("t_omega".to_string(), col(&[norm2(&self.degradation.omega_c)]));
        match kind {
            NormKind::HInf => {
                m.insert("Q".to_string(), self.q_xf.clone());
            }
            NormKind::H2 => {
                m.insert("Q2".to_string(), self.q_xf.clone());
                if let Some(q1) = &self.q_out {
                    m.insert("Q1".to_string(), q1.clone());
                }
            }
        }
        m
    }
}

/// Evidence that the conic program has no feasible point: a dual vector `z`
/// in the dual cone with `A^T z = 0` and `b^T z < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub b_dot_z: f64,
    /// `||A^T z||_inf / |b^T z|`
    pub relative_residual: f64,
    /// Largest dual-cone violation of `z / |b^T z|`.
    pub cone_violation: f64,
}

impl InfeasibilityCertificate {
    pub fn from_dual(problem: &ConicProblem, z: &[f64]) -> Self {
        let bz: f64 = problem.b.iter().zip(z).map(|(b, z)| b * z).sum();
        let scale = bz.abs().max(f64::MIN_POSITIVE);
        let atz = problem.apply_transpose(z);
        let res = atz.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
        let zn: Vec<f64> = z.iter().map(|v| v / scale).collect();
        Self {
            b_dot_z: bz,
            relative_residual: res,
            cone_violation: problem.cone_violation(&zn),
        }
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        self.b_dot_z < 0.0 && self.relative_residual <= tol && self.cone_violation <= tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub backend: String,
    pub raw_status: String,
    pub iterations: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primal_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_residual: Option<f64>,
    pub solve_time: f64,
    pub n_variables: usize,
    pub n_rows: usize,
    pub eps_lmi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<InfeasibilityCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub status: SynthesisStatus,
    pub norm: NormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<OptimalPoint>,
    /// Norm of the closed loop at the synthesized point, computed
    /// independently of the solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<NormReport>,
    pub diagnostics: SolverDiagnostics,
}

/// Backends report NaN objectives on infeasible problems; JSON cannot carry them.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `K = diag(omega_c)^-1 V`.
pub fn recover_gain(omega_c: &[f64], v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if omega_c.len() != v.nrows() {
        return Err(Error::InvalidInput(format!(
            "omega_c has {} entries, V has {} rows",
            omega_c.len(),
            v.nrows()
        )));
    }
    if let Some(w) = omega_c.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidDegradation(format!("omega_c entry {w} must be positive")));
    }
    let mut k = v.clone();
    for (i, w) in omega_c.iter().enumerate() {
        k.row_mut(i).scale_mut(1.0 / w);
    }
    Ok(k)
}

/// Solves with the default backend; the backend tolerances are tightened
/// below `spec.solver_tol` so that the validated residuals have headroom.
pub fn solve(problem: &LmiProblem, spec: &SynthesisSpec) -> Result<SynthesisResult> {
    let tol = (spec.solver_tol * 1e-2).clamp(1e-12, 1e-8);
    let backend = ClarabelBackend::new(BackendSettings {
        tol_feas: tol,
        tol_gap_abs: tol,
        tol_gap_rel: tol,
        ..BackendSettings::default()
    });
    solve_with(problem, spec, &backend)
}

pub fn solve_with(
    problem: &LmiProblem,
    spec: &SynthesisSpec,
    backend: &dyn ConicBackend,
) -> Result<SynthesisResult> {
    spec.validate()?;
    let conic = problem.to_conic();
    let sol = backend.solve(&conic)?;
    let mut diagnostics = SolverDiagnostics {
        backend: backend.name().to_string(),
        raw_status: sol.raw_status.clone(),
        iterations: sol.iterations,
        primal_objective: finite(sol.primal_objective),
        dual_objective: finite(sol.dual_objective),
        primal_residual: finite(sol.r_prim),
        dual_residual: finite(sol.r_dual),
        solve_time: sol.solve_time,
        n_variables: conic.n,
        n_rows: conic.m(),
        eps_lmi: problem.eps_lmi,
        certificate: None,
        notes: Vec::new(),
    };
    let mut result = SynthesisResult {
        status: SynthesisStatus::NumericalFailure,
        norm: problem.kind,
        point: None,
        verification: None,
        diagnostics: diagnostics.clone(),
    };

    match sol.status {
        ConicStatus::Solved | ConicStatus::AlmostSolved => {
            if sol.status == ConicStatus::AlmostSolved {
                diagnostics.notes.push("backend reached reduced accuracy only".into());
            }
            match extract_point(problem, spec, &sol) {
                Ok(point) => {
                    result.status = SynthesisStatus::Optimal;
                    match verify_point(problem, spec, &point) {
                        Ok(report) => result.verification = Some(report),
                        Err(e) => diagnostics.notes.push(format!("verification failed: {e}")),
                    }
                    result.point = Some(point);
                }
                Err(e) => diagnostics.notes.push(format!("unusable solver point: {e}")),
            }
        }
        ConicStatus::PrimalInfeasible => {
            let cert = InfeasibilityCertificate::from_dual(&conic, &sol.z);
            if cert.b_dot_z < 0.0 {
                result.status = SynthesisStatus::Infeasible;
            } else {
                diagnostics
                    .notes
                    .push("backend reported infeasibility without a usable certificate".into());
            }
            diagnostics.certificate = Some(cert);
        }
        ConicStatus::DualInfeasible => diagnostics
            .notes
            .push("program is unbounded below; objective weights may be inconsistent".into()),
        ConicStatus::MaxIterations | ConicStatus::NumericalError | ConicStatus::Other => {}
    }
    result.diagnostics = diagnostics;
    Ok(result)
}

fn extract_point(problem: &LmiProblem, spec: &SynthesisSpec, sol: &ConicSolution) -> Result<OptimalPoint> {
    let x = &sol.x;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("solver returned non-finite values".into()));
    }
    let value = |name: &str| problem.block(name).map(|b| b.value(x));
    let v = value("V")?;
    let y = value("Y")?;
    let omega_c: Vec<f64> = value("omega_c")?.iter().copied().collect();
    let kappa_a: Vec<f64> = value("kappa_a")?.iter().copied().collect();
    let (q_xf, q_out) = match problem.kind {
        NormKind::HInf => (value("Q")?, None),
        NormKind::H2 => (value("Q2")?, Some(value("Q1")?)),
    };
    // the trace constraint holds up to solver accuracy; raising gamma_xf to
    // tr(Q) keeps the reported bound consistent with Q at no cost in the
    // other constraints
    let gamma_xf = value("gamma_xf")?[(0, 0)].max(q_xf.trace()).max(0.0);
    let degradation = DegradationParams::new(omega_c, kappa_a, gamma_xf)?;
    let k = recover_gain(&degradation.omega_c, &v)?;
    let objective = spec.lambda_a * norm2(&degradation.kappa_a)
        + spec.lambda_wc * norm2(&degradation.omega_c)
        + spec.lambda_xf * degradation.gamma_xf;
    Ok(OptimalPoint {
        k,
        v,
        y,
        q_xf,
        q_out,
        degradation,
        objective,
    })
}

/// Closed-loop norm at `point`, from the Gramian (H2) or Hamiltonian
/// bisection (H-infinity).
pub fn verify_point(problem: &LmiProblem, spec: &SynthesisSpec, point: &OptimalPoint) -> Result<NormReport> {
    let wd = DVector::from_vec(spec.wd.clone());
    let cl = assemble_closed_loop(&problem.plant, &point.k, &point.degradation, &wd)?;
    match problem.kind {
        NormKind::H2 => h2_norm(&cl.acl, &cl.bcl, &cl.ccl),
        NormKind::HInf => hinf_norm_with_feedthrough(&cl.acl, &cl.bcl, &cl.ccl, &cl.dcl, HINF_VERIFY_TOL),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn gain_recovery() {
        let k = recover_gain(&[2.0, 4.0], &dmatrix![2.0, 0.0; 0.0, 8.0]).unwrap();
        assert_eq!(k, dmatrix![1.0, 0.0; 0.0, 2.0]);
        assert!(recover_gain(&[2.0, 0.0], &dmatrix![2.0, 0.0; 0.0, 8.0]).is_err());
        assert!(recover_gain(&[2.0], &dmatrix![2.0, 0.0; 0.0, 8.0]).is_err());
    }
}
