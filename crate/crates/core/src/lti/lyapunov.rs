use nalgebra::linalg::Schur;
use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

/// Solves `A X + X A^T + Q = 0` for symmetric `Q`.
///
/// Bartels-Stewart on the complex Schur form `A = U T U^H`: the transformed
/// equation `T Y + Y T^H = -U^H Q U` is triangular and is solved entry by
/// entry from the bottom-right corner. Requires `lambda_i + conj(lambda_j) != 0`
/// for all eigenvalue pairs, which holds whenever `A` is Hurwitz.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || q.shape() != (n, n) {
        return Err(Error::InvalidInput(format!(
            "Lyapunov equation needs square A and matching Q, got {:?} and {:?}",
            a.shape(),
            q.shape()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let ac = a.map(|v| Complex::new(v, 0.0));
    let schur = Schur::try_new(ac, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Schur decomposition did not converge".into()))?;
    let (u, t) = schur.unpack();

    let qc = q.map(|v| Complex::new(v, 0.0));
    let f = -(u.adjoint() * qc * &u);

    let scale = t.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    let mut y = DMatrix::<Complex<f64>>::zeros(n, n);
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            let mut rhs = f[(i, j)];
            for k in (i + 1)..n {
                rhs -= t[(i, k)] * y[(k, j)];
            }
            for k in (j + 1)..n {
                rhs -= y[(i, k)] * t[(j, k)].conj();
            }
            let denom = t[(i, i)] + t[(j, j)].conj();
            if denom.norm() <= 1e3 * f64::EPSILON * scale {
                return Err(Error::Numerical(format!(
                    "Lyapunov operator is singular (eigenvalues {} and {})",
                    t[(i, i)],
                    t[(j, j)]
                )));
            }
            y[(i, j)] = rhs / denom;
        }
    }

    let x = (&u * y * u.adjoint()).map(|v| v.re);
    Ok((&x + x.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn residual(a: &DMatrix<f64>, x: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
        (a * x + x * a.transpose() + q).norm()
    }

    #[test]
    fn first_order_lag_gramian() {
        let x = solve_lyapunov(&dmatrix![-1.0], &dmatrix![1.0]).unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn complex_pole_pair() {
        let a = dmatrix![-0.1, 2.0; -2.0, -0.1];
        let b = dmatrix![1.0; 0.5];
        let q = &b * b.transpose();
        let x = solve_lyapunov(&a, &q).unwrap();
        assert!(residual(&a, &x, &q) <= 1e-12 * q.norm());
        assert_eq!(x, x.transpose());
    }

    #[test]
    fn f16_residual() {
        let sys = crate::f16::plant();
        let q = &sys.bu * sys.bu.transpose();
        let x = solve_lyapunov(&sys.a, &q).unwrap();
        assert!(residual(&sys.a, &x, &q) <= 1e-8 * q.norm());
    }

    #[test]
    fn singular_operator_is_reported() {
        // eigenvalues +-1: lambda_1 + conj(lambda_2) = 0
        let r = solve_lyapunov(&dmatrix![1.0, 0.0; 0.0, -1.0], &DMatrix::identity(2, 2));
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
