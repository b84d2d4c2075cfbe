//! Conic problem container and solver backends.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    Zero(usize),
    Nonnegative(usize),
    SecondOrder(usize),
    /// Symmetric `n x n` matrix, vectorized as its upper triangle in
    /// column-major order with off-diagonals scaled by `sqrt(2)`.
    PsdTriangle(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero(n) | Cone::Nonnegative(n) | Cone::SecondOrder(n) => n,
            Cone::PsdTriangle(n) => n * (n + 1) / 2,
        }
    }

    /// Distance outside the (self-dual) cone, zero for members.
    pub fn violation(&self, v: &[f64]) -> f64 {
        match *self {
            Cone::Zero(_) => v.iter().fold(0.0, |m: f64, x| m.max(x.abs())),
            Cone::Nonnegative(_) => v.iter().fold(0.0, |m: f64, x| m.max(-x)),
            Cone::SecondOrder(_) => {
                let tail = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
                (tail - v[0]).max(0.0)
            }
            Cone::PsdTriangle(n) => (-smat(v, n).symmetric_eigenvalues().min()).max(0.0),
        }
    }
}

/// Inverse of the triangle vectorization used by [`Cone::PsdTriangle`].
pub fn smat(v: &[f64], n: usize) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut k = 0;
    for col in 0..n {
        for row in 0..=col {
            if row == col {
                m[(row, col)] = v[k];
            } else {
                let x = v[k] / std::f64::consts::SQRT_2;
                m[(row, col)] = x;
                m[(col, row)] = x;
            }
            k += 1;
        }
    }
    m
}

/// `min q^T x  s.t.  A x + s = b, s in K`, with `A` as triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    pub n: usize,
    pub q: Vec<f64>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
}

impl ConicProblem {
    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// `A x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for ((&r, &c), &v) in self.rows.iter().zip(&self.cols).zip(&self.vals) {
            out[r] += v * x[c];
        }
        out
    }

    /// `A^T z`
    pub fn apply_transpose(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for ((&r, &c), &v) in self.rows.iter().zip(&self.cols).zip(&self.vals) {
            out[c] += v * z[r];
        }
        out
    }

    /// `s = b - A x`
    pub fn slack(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
            .iter()
            .zip(&self.b)
            .map(|(ax, b)| b - ax)
            .collect()
    }

    /// Largest cone violation of `v` (a slack or dual vector).
    pub fn cone_violation(&self, v: &[f64]) -> f64 {
        let mut k = 0;
        let mut worst: f64 = 0.0;
        for cone in &self.cones {
            let d = cone.dim();
            worst = worst.max(cone.violation(&v[k..k + d]));
            k += d;
        }
        worst
    }

    pub fn check(&self) -> Result<()> {
        let m: usize = self.cones.iter().map(Cone::dim).sum();
        if m != self.m() || self.q.len() != self.n {
            return Err(Error::Backend(format!(
                "inconsistent conic data: cones cover {m} rows, b has {}",
                self.m()
            )));
        }
        if self.rows.iter().any(|&r| r >= m) || self.cols.iter().any(|&c| c >= self.n) {
            return Err(Error::Backend("constraint matrix index out of range".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConicStatus {
    Solved,
    AlmostSolved,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalError,
    Other,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConicSolution {
    pub status: ConicStatus,
    /// Backend-specific status text.
    pub raw_status: String,
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: u32,
    pub r_prim: f64,
    pub r_dual: f64,
    pub solve_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackendSettings {
    pub tol_feas: f64,
    pub tol_gap_abs: f64,
    pub tol_gap_rel: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for BackendSettings {
    fn default() -> Self {
        Self {
            tol_feas: 1e-9,
            tol_gap_abs: 1e-9,
            tol_gap_rel: 1e-9,
            max_iter: 500,
            verbose: false,
        }
    }
}

pub trait ConicBackend {
    fn name(&self) -> &str;
    fn solve(&self, problem: &ConicProblem) -> Result<ConicSolution>;
}

/// Interior-point backend on Clarabel.
///
/// Chordal decomposition is disabled: on the fault-augmented LMIs it splits
/// the cones into cliques whose merged iterates stall with a numerical error.
#[derive(Debug, Clone, Default)]
pub struct ClarabelBackend {
    pub settings: BackendSettings,
}

impl ClarabelBackend {
    pub fn new(settings: BackendSettings) -> Self {
        Self { settings }
    }
}

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &str {
        "clarabel"
    }

    fn solve(&self, problem: &ConicProblem) -> Result<ConicSolution> {
        problem.check()?;
        let (m, n) = (problem.m(), problem.n);
        let p = CscMatrix::<f64>::zeros((n, n));
        let a = CscMatrix::new_from_triplets(
            m,
            n,
            problem.rows.clone(),
            problem.cols.clone(),
            problem.vals.clone(),
        );
        let cones: Vec<SupportedConeT<f64>> = problem
            .cones
            .iter()
            .map(|c| match *c {
                Cone::Zero(k) => SupportedConeT::ZeroConeT(k),
                Cone::Nonnegative(k) => SupportedConeT::NonnegativeConeT(k),
                Cone::SecondOrder(k) => SupportedConeT::SecondOrderConeT(k),
                Cone::PsdTriangle(k) => SupportedConeT::PSDTriangleConeT(k),
            })
            .collect();
        let s = &self.settings;
        let settings = DefaultSettings {
            max_iter: s.max_iter,
            verbose: s.verbose,
            tol_feas: s.tol_feas,
            tol_gap_abs: s.tol_gap_abs,
            tol_gap_rel: s.tol_gap_rel,
            chordal_decomposition_enable: false,
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&p, &problem.q, &a, &problem.b, &cones, settings)
            .map_err(|e| Error::Backend(format!("clarabel setup failed: {e}")))?;
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved => ConicStatus::Solved,
            SolverStatus::AlmostSolved => ConicStatus::AlmostSolved,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                ConicStatus::PrimalInfeasible
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                ConicStatus::DualInfeasible
            }
            SolverStatus::MaxIterations | SolverStatus::MaxTime => ConicStatus::MaxIterations,
            SolverStatus::NumericalError | SolverStatus::InsufficientProgress => {
                ConicStatus::NumericalError
            }
            _ => ConicStatus::Other,
        };
        Ok(ConicSolution {
            status,
            raw_status: format!("{:?}", sol.status),
            x: sol.x.clone(),
            s: sol.s.clone(),
            z: sol.z.clone(),
            primal_objective: sol.obj_val,
            dual_objective: sol.obj_val_dual,
            iterations: sol.iterations,
            r_prim: sol.r_prim,
            r_dual: sol.r_dual,
            solve_time: sol.solve_time,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smat_inverts_triangle_vectorization() {
        let r2 = std::f64::consts::SQRT_2;
        let m = smat(&[1.0, 2.0 * r2, 3.0, 4.0 * r2, 5.0 * r2, 6.0], 3);
        assert_eq!(m[(0, 1)], 2.0);
        assert_eq!(m[(1, 0)], 2.0);
        assert!((m[(0, 2)] - 4.0).abs() < 1e-15);
        assert!((m[(1, 2)] - 5.0).abs() < 1e-15);
        assert_eq!(m[(2, 2)], 6.0);
    }

    #[test]
    fn clarabel_solves_small_lp_and_sdp() {
        // min x0 + x1  s.t. [[x0, 1], [1, x1]] >= 0  ->  x0 = x1 = 1
        let r2 = std::f64::consts::SQRT_2;
        let p = ConicProblem {
            n: 2,
            q: vec![1.0, 1.0],
            rows: vec![0, 2],
            cols: vec![0, 1],
            vals: vec![-1.0, -1.0],
            b: vec![0.0, r2, 0.0],
            cones: vec![Cone::PsdTriangle(2)],
        };
        let sol = ClarabelBackend::default().solve(&p).unwrap();
        assert_eq!(sol.status, ConicStatus::Solved);
        assert!((sol.x[0] - 1.0).abs() < 1e-6 && (sol.x[1] - 1.0).abs() < 1e-6);
        assert!(p.cone_violation(&p.slack(&sol.x)) < 1e-7);
    }

    #[test]
    fn clarabel_reports_infeasible_lp() {
        // x >= 1 and -x >= 0
        let p = ConicProblem {
            n: 1,
            q: vec![0.0],
            rows: vec![0, 1],
            cols: vec![0, 0],
            vals: vec![-1.0, 1.0],
            b: vec![-1.0, 0.0],
            cones: vec![Cone::Nonnegative(2)],
        };
        let sol = ClarabelBackend::default().solve(&p).unwrap();
        assert_eq!(sol.status, ConicStatus::PrimalInfeasible);
        let bz: f64 = p.b.iter().zip(&sol.z).map(|(b, z)| b * z).sum();
        assert!(bz < 0.0);
    }
}
