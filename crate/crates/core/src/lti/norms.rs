use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::lyapunov::solve_lyapunov;
use super::{eigenvalues, STABILITY_MARGIN};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    #[serde(rename = "h2")]
    H2,
    #[serde(rename = "hinf")]
    HInf,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormKind::H2 => write!(f, "h2"),
            NormKind::HInf => write!(f, "hinf"),
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h2" => Ok(NormKind::H2),
            "hinf" | "h-inf" | "hinfinity" => Ok(NormKind::HInf),
            other => Err(Error::InvalidInput(format!("unknown norm kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    LyapunovGramian,
    HamiltonianBisection,
    FrequencyGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
    pub method: NormMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2, "bad log grid ({lo}, {hi}, {n})");
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == n => hi,
            _ => (a + step * i as f64).exp(),
        })
        .collect()
}

fn check_realization(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: Option<&DMatrix<f64>>,
) -> Result<()> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::InvalidInput(format!("A must be square, got {:?}", a.shape())));
    }
    if b.nrows() != n || c.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "inconsistent realization: A {:?}, B {:?}, C {:?}",
            a.shape(),
            b.shape(),
            c.shape()
        )));
    }
    if let Some(d) = d {
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::InvalidInput(format!(
                "D is {:?}, expected {:?}",
                d.shape(),
                (c.nrows(), b.ncols())
            )));
        }
    }
    Ok(())
}

fn require_hurwitz(a: &DMatrix<f64>) -> Result<()> {
    let max_real = eigenvalues(a)?.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if max_real < -STABILITY_MARGIN {
        Ok(())
    } else {
        Err(Error::Unstable { max_real })
    }
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    m.map(|v| Complex::new(v, 0.0))
}

/// `C (sI - A)^{-1} B + D` at an arbitrary complex point `s`.
pub fn evaluate_transfer(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: Option<&DMatrix<f64>>,
    s: Complex<f64>,
) -> Result<DMatrix<Complex<f64>>> {
    check_realization(a, b, c, d)?;
    let n = a.nrows();
    let mut m = -to_complex(a);
    for i in 0..n {
        m[(i, i)] += s;
    }
    let lu = m.lu();
    let u = lu.u();
    let diag_max = u.diagonal().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diag_min = u.diagonal().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if n > 0 && (diag_min.is_nan() || diag_min <= 1e3 * f64::EPSILON * diag_max.max(1.0)) {
        return Err(Error::SingularResolvent { omega: s.im });
    }
    let x = lu
        .solve(&to_complex(b))
        .ok_or(Error::SingularResolvent { omega: s.im })?;
    let mut g = to_complex(c) * x;
    if let Some(d) = d {
        g += to_complex(d);
    }
    Ok(g)
}

/// `G(jw) = C (jwI - A)^{-1} B` at each frequency (rad/s).
pub fn frequency_response(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    omegas: &[f64],
) -> Result<Vec<DMatrix<Complex<f64>>>> {
    check_realization(a, b, c, None)?;
    omegas
        .iter()
        .map(|&w| {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "frequencies must be finite and nonnegative, got {w}"
                )));
            }
            evaluate_transfer(a, b, c, None, Complex::new(0.0, w))
        })
        .collect()
}

fn sigma_max(g: &DMatrix<Complex<f64>>) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    g.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

fn sigma_max_real(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// H2 norm from the controllability gramian: `sqrt(tr(C Wc C^T))` with
/// `A Wc + Wc A^T + B B^T = 0`.
pub fn h2_norm(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<NormReport> {
    check_realization(a, b, c, None)?;
    require_hurwitz(a)?;
    let wc = solve_lyapunov(a, &(b * b.transpose()))?;
    let trace = (c * wc * c.transpose()).trace();
    Ok(NormReport {
        kind: NormKind::H2,
        value: trace.max(0.0).sqrt(),
        method: NormMethod::LyapunovGramian,
        grid: None,
    })
}

/// H2 norm by quadrature of `(1/pi) int_0^inf ||G(jw)||_F^2 dw`.
///
/// Trapezoidal rule in `ln w` over a grid spanning four decades beyond the
/// slowest and fastest poles, plus first-order tail corrections. This is an
/// independent route used to cross-check [`h2_norm`].
pub fn h2_norm_frequency_integral(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    n_points: usize,
) -> Result<NormReport> {
    check_realization(a, b, c, None)?;
    require_hurwitz(a)?;
    let (lo, hi) = pole_band(a)?;
    let grid = log_grid(lo * 1e-4, hi * 1e4, n_points.max(2));
    let f = |w: f64| -> Result<f64> {
        let g = evaluate_transfer(a, b, c, None, Complex::new(0.0, w))?;
        Ok(g.iter().map(|v| v.norm_sqr()).sum())
    };
    let values = grid.iter().map(|&w| f(w)).collect::<Result<Vec<_>>>()?;
    let mut integral = 0.0;
    for i in 1..grid.len() {
        let du = grid[i].ln() - grid[i - 1].ln();
        integral += 0.5 * du * (values[i] * grid[i] + values[i - 1] * grid[i - 1]);
    }
    // f is flat below the slowest pole and decays like 1/w^2 above the fastest
    integral += values[0] * grid[0];
    integral += values[values.len() - 1] * grid[grid.len() - 1];
    Ok(NormReport {
        kind: NormKind::H2,
        value: (integral / std::f64::consts::PI).sqrt(),
        method: NormMethod::FrequencyGrid,
        grid: None,
    })
}

/// Smallest and largest eigenvalue magnitude, clamped away from zero.
fn pole_band(a: &DMatrix<f64>) -> Result<(f64, f64)> {
    let mags: Vec<f64> = eigenvalues(a)?
        .iter()
        .map(|l| l.norm())
        .filter(|m| *m > 0.0)
        .collect();
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(0.0, f64::max);
    if mags.is_empty() {
        Ok((1.0, 1.0))
    } else {
        Ok((lo, hi))
    }
}

/// Peak of `sigma_max(G(jw))` over the supplied frequencies.
pub fn hinf_norm_grid(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    omegas: &[f64],
) -> Result<NormReport> {
    check_realization(a, b, c, None)?;
    require_hurwitz(a)?;
    let peak = frequency_response(a, b, c, omegas)?
        .iter()
        .map(sigma_max)
        .fold(0.0, f64::max);
    Ok(NormReport {
        kind: NormKind::HInf,
        value: peak,
        method: NormMethod::FrequencyGrid,
        grid: Some(omegas.to_vec()),
    })
}

/// H-infinity norm of a strictly proper realization, see
/// [`hinf_norm_with_feedthrough`].
pub fn hinf_norm(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    tol: f64,
) -> Result<NormReport> {
    let d = DMatrix::zeros(c.nrows(), b.ncols());
    hinf_norm_with_feedthrough(a, b, c, &d, tol)
}

/// H-infinity norm by bisection on the Hamiltonian imaginary-axis test.
///
/// For `gamma > sigma_max(D)`, `gamma` is a singular value of `G(jw)` iff
/// `jw` is an eigenvalue of the Hamiltonian built from `(A, B, C, D, gamma)`.
/// Each bisection step classifies `gamma` by looking for imaginary-axis
/// eigenvalues, confirmed by evaluating `sigma_max(G(jw))` at the candidate
/// frequency. The returned value is the final upper bracket, within relative
/// `tol` of the norm.
pub fn hinf_norm_with_feedthrough(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
    tol: f64,
) -> Result<NormReport> {
    check_realization(a, b, c, Some(d))?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    require_hurwitz(a)?;

    let report = |value| NormReport {
        kind: NormKind::HInf,
        value,
        method: NormMethod::HamiltonianBisection,
        grid: None,
    };

    let d_norm = sigma_max_real(d);
    if b.iter().all(|v| *v == 0.0) || c.iter().all(|v| *v == 0.0) {
        return Ok(report(d_norm));
    }

    let sigma_at = |w: f64| -> Result<f64> {
        Ok(sigma_max(&evaluate_transfer(a, b, c, Some(d), Complex::new(0.0, w))?))
    };

    let mut lower = d_norm.max(sigma_at(0.0)?);
    let (lo, hi) = pole_band(a)?;
    let mut coarse = log_grid(lo * 1e-3, hi * 1e3, 64);
    coarse.extend(
        eigenvalues(a)?
            .iter()
            .flat_map(|l| [l.im.abs(), l.norm()])
            .filter(|w| *w > 0.0),
    );
    let mut grid_max = 0.0_f64;
    for &w in &coarse {
        grid_max = grid_max.max(sigma_at(w)?);
    }
    lower = lower.max(grid_max);
    if lower == 0.0 {
        return Ok(report(0.0));
    }

    let mut upper = 2.0 * lower + lower * 1e-12 + f64::MIN_POSITIVE;
    while let Some(found) = axis_crossing(a, b, c, d, upper, &sigma_at)? {
        lower = lower.max(found);
        upper *= 2.0;
        if !upper.is_finite() {
            return Err(Error::Numerical("H-infinity upper bracket diverged".into()));
        }
    }

    for _ in 0..200 {
        if upper - lower <= tol * upper {
            break;
        }
        let mid = 0.5 * (lower + upper);
        match axis_crossing(a, b, c, d, mid, &sigma_at)? {
            Some(found) => lower = mid.max(found),
            None => upper = mid,
        }
    }
    Ok(report(upper))
}

/// Looks for imaginary-axis eigenvalues `jw` of the Hamiltonian at level
/// `gamma`. Returns the largest `sigma_max(G(jw))` seen at the candidate
/// frequencies and their midpoints when it reaches `gamma`, else `None`.
fn axis_crossing(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
    gamma: f64,
    sigma_at: &dyn Fn(f64) -> Result<f64>,
) -> Result<Option<f64>> {
    let n = a.nrows();
    let m = b.ncols();
    let p = c.nrows();
    let r = DMatrix::<f64>::identity(m, m) * (gamma * gamma) - d.transpose() * d;
    let r_inv = r
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("gamma^2 I - D^T D singular at {gamma}")))?;
    let a_bar = a + b * &r_inv * d.transpose() * c;
    let q = c.transpose()
        * (DMatrix::<f64>::identity(p, p) + d * &r_inv * d.transpose())
        * c;
    let g = b * &r_inv * b.transpose();

    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a_bar);
    h.view_mut((0, n), (n, n)).copy_from(&g);
    h.view_mut((n, 0), (n, n)).copy_from(&(-q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a_bar.transpose()));

    let h_scale = h.norm().max(1.0);
    let mut freqs: Vec<f64> = eigenvalues(&h)?
        .iter()
        .filter(|l| l.re.abs() <= 1e-6 * h_scale)
        .map(|l| l.im.abs())
        .collect();
    if freqs.is_empty() {
        return Ok(None);
    }
    freqs.sort_by(f64::total_cmp);
    // sigma_max exceeds gamma strictly between paired crossings, so the
    // midpoints confirm a crossing even when the eigenvalues are inaccurate
    let mids: Vec<f64> = freqs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut best: Option<f64> = None;
    for &w in freqs.iter().chain(&mids) {
        let s = sigma_at(w)?;
        if s >= gamma * (1.0 - 1e-9) {
            best = Some(best.map_or(s, |b: f64| b.max(s)));
        }
    }
    Ok(best)
}
