//! Continuous-time LTI plants, the fault-augmented closed loop, and the
//! independent norm computations used to verify synthesized designs.

mod lyapunov;
mod norms;

pub use lyapunov::solve_lyapunov;
pub use norms::{
    evaluate_transfer, frequency_response, h2_norm, h2_norm_frequency_integral, hinf_norm,
    hinf_norm_grid, hinf_norm_with_feedthrough, log_grid, NormKind, NormMethod, NormReport,
};

use nalgebra::{Complex, DMatrix, DVector};

use crate::degradation::DegradationParams;
use crate::error::{Error, Result};

/// Eigenvalues must satisfy `Re(lambda) < -STABILITY_MARGIN` to count as stable.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Open-loop plant
///
/// ```text
/// dx/dt = A x + Bu u + Bd d
///     z = Cz x + Dd d
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub bu: DMatrix<f64>,
    pub bd: DMatrix<f64>,
    pub cz: DMatrix<f64>,
    pub dd: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        bu: DMatrix<f64>,
        bd: DMatrix<f64>,
        cz: DMatrix<f64>,
        dd: DMatrix<f64>,
    ) -> Result<Self> {
        let nx = a.nrows();
        if a.ncols() != nx {
            return Err(Error::InvalidInput(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if nx == 0 {
            return Err(Error::InvalidInput("plant has no states".into()));
        }
        if bu.nrows() != nx {
            return Err(Error::InvalidInput(format!("Bu has {} rows, expected {nx}", bu.nrows())));
        }
        if bd.nrows() != nx {
            return Err(Error::InvalidInput(format!("Bd has {} rows, expected {nx}", bd.nrows())));
        }
        if cz.ncols() != nx {
            return Err(Error::InvalidInput(format!(
                "Cz has {} columns, expected {nx}",
                cz.ncols()
            )));
        }
        if dd.shape() != (cz.nrows(), bd.ncols()) {
            return Err(Error::InvalidInput(format!(
                "Dd is {}x{}, expected {}x{}",
                dd.nrows(),
                dd.ncols(),
                cz.nrows(),
                bd.ncols()
            )));
        }
        let all_finite = [&a, &bu, &bd, &cz, &dd]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()));
        if !all_finite {
            return Err(Error::InvalidInput("plant matrices contain non-finite entries".into()));
        }
        Ok(Self { a, bu, bd, cz, dd })
    }

    pub fn nx(&self) -> usize {
        self.a.nrows()
    }

    pub fn nu(&self) -> usize {
        self.bu.ncols()
    }

    pub fn nd(&self) -> usize {
        self.bd.ncols()
    }

    pub fn nz(&self) -> usize {
        self.cz.nrows()
    }

    pub fn is_hurwitz(&self) -> bool {
        spectral_abscissa(&self.a) < -STABILITY_MARGIN
    }
}

/// Eigenvalues of a square matrix (LAPACK `dgeev`).
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix contains non-finite entries".into()));
    }
    let ni = n as i32;
    let mut m = a.as_slice().to_vec();
    let (mut wr, mut wi) = (vec![0.0; n], vec![0.0; n]);
    let (mut vl, mut vr) = ([0.0], [0.0]);
    let lwork = 4 * ni;
    let mut work = vec![0.0; 4 * n];
    let mut info = 0;
    unsafe {
        lapack::dgeev(
            b'N', b'N', ni, &mut m, ni, &mut wr, &mut wi, &mut vl, 1, &mut vr, 1, &mut work,
            lwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Numerical(format!("eigenvalue computation failed (dgeev info {info})")));
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex::new(re, im)).collect())
}

/// Largest real part over the eigenvalues of a square matrix; NaN when the
/// eigenvalues cannot be computed.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    match eigenvalues(a) {
        Ok(l) => l.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max),
        Err(_) => f64::NAN,
    }
}

/// True iff every eigenvalue of `a` has real part below `-STABILITY_MARGIN`.
pub fn is_hurwitz(a: &DMatrix<f64>) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix contains non-finite entries".into()));
    }
    Ok(spectral_abscissa(a) < -STABILITY_MARGIN)
}

/// Plant, first-order actuator filters and state feedback, written in terms
/// of the normalized exogenous inputs `[d_bar; w_bar_a]`:
///
/// ```text
/// Acl = [ A               Bu        ]   Bcl = [ Bd Wd   Bu Wa ]   Ccl = [ Cz  0 ]
///       [ diag(wc) K   -diag(wc)    ]         [ 0       0     ]
/// ```
///
/// with `Wa = diag(1/sqrt(kappa_a))`. State ordering is `[x; x_F]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedClosedLoop {
    pub acl: DMatrix<f64>,
    pub bcl: DMatrix<f64>,
    pub ccl: DMatrix<f64>,
    /// `[Dd Wd, 0]`; zero for every plant the H2 path accepts.
    pub dcl: DMatrix<f64>,
    pub plant: StateSpace,
    pub gain: DMatrix<f64>,
    pub degradation: DegradationParams,
    pub wd: DVector<f64>,
}

impl AugmentedClosedLoop {
    pub fn nx(&self) -> usize {
        self.plant.nx()
    }

    pub fn nu(&self) -> usize {
        self.plant.nu()
    }

    pub fn order(&self) -> usize {
        self.acl.nrows()
    }

    /// Input matrix for the unscaled signals `[d; w_a]`: `[[Bd, Bu], [0, 0]]`.
    pub fn physical_input(&self) -> DMatrix<f64> {
        let (nx, nu, nd) = (self.plant.nx(), self.plant.nu(), self.plant.nd());
        let mut b = DMatrix::zeros(nx + nu, nd + nu);
        b.view_mut((0, 0), (nx, nd)).copy_from(&self.plant.bd);
        b.view_mut((0, nd), (nx, nu)).copy_from(&self.plant.bu);
        b
    }

    pub fn is_hurwitz(&self) -> bool {
        spectral_abscissa(&self.acl) < -STABILITY_MARGIN
    }
}

/// Builds the fault-augmented closed loop for gain `k` (`nu x nx`), actuator
/// degradation `deg` and disturbance scaling `wd` (diagonal entries).
pub fn assemble_closed_loop(
    sys: &StateSpace,
    k: &DMatrix<f64>,
    deg: &DegradationParams,
    wd: &DVector<f64>,
) -> Result<AugmentedClosedLoop> {
    let (nx, nu, nd, nz) = (sys.nx(), sys.nu(), sys.nd(), sys.nz());
    if k.shape() != (nu, nx) {
        return Err(Error::InvalidInput(format!(
            "gain K is {}x{}, expected {nu}x{nx}",
            k.nrows(),
            k.ncols()
        )));
    }
    if deg.nu() != nu {
        return Err(Error::InvalidInput(format!(
            "degradation has {} channels, plant has {nu} inputs",
            deg.nu()
        )));
    }
    deg.validate()?;
    if wd.len() != nd {
        return Err(Error::InvalidInput(format!("Wd has {} entries, expected {nd}", wd.len())));
    }
    if wd.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidInput("Wd entries must be positive".into()));
    }

    let n = nx + nu;
    let mut acl = DMatrix::zeros(n, n);
    acl.view_mut((0, 0), (nx, nx)).copy_from(&sys.a);
    acl.view_mut((0, nx), (nx, nu)).copy_from(&sys.bu);
    for i in 0..nu {
        let wc = deg.omega_c[i];
        for j in 0..nx {
            acl[(nx + i, j)] = wc * k[(i, j)];
        }
        acl[(nx + i, nx + i)] = -wc;
    }

    let wa = deg.noise_scaling();
    let mut bcl = DMatrix::zeros(n, nd + nu);
    for j in 0..nd {
        for i in 0..nx {
            bcl[(i, j)] = sys.bd[(i, j)] * wd[j];
        }
    }
    for j in 0..nu {
        for i in 0..nx {
            bcl[(i, nd + j)] = sys.bu[(i, j)] * wa[j];
        }
    }

    let mut ccl = DMatrix::zeros(nz, n);
    ccl.view_mut((0, 0), (nz, nx)).copy_from(&sys.cz);

    let mut dcl = DMatrix::zeros(nz, nd + nu);
    for j in 0..nd {
        for i in 0..nz {
            dcl[(i, j)] = sys.dd[(i, j)] * wd[j];
        }
    }

    Ok(AugmentedClosedLoop {
        acl,
        bcl,
        ccl,
        dcl,
        plant: sys.clone(),
        gain: k.clone(),
        degradation: deg.clone(),
        wd: wd.clone(),
    })
}
