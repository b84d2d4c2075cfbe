//! Actuator fault model and the per-actuator degradation metrics.
//!
//! Each actuator is a unit-DC-gain first-order lag with cutoff `omega_c[i]`
//! followed by an additive noise `w_a[i] = w_bar_a[i] / sqrt(kappa_a[i])`,
//! where `w_bar_a` is a unit-energy signal. Control magnitude is bounded
//! through `tr(V^T V) <= gamma_xf` with `V = diag(omega_c) K`.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{log_grid, StateSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationParams {
    /// Actuator cutoff frequencies (rad/s).
    pub omega_c: Vec<f64>,
    /// Inverse noise intensities; `Wa = diag(1/sqrt(kappa_a))`.
    pub kappa_a: Vec<f64>,
    /// Upper bound on `tr(V^T V)`.
    pub gamma_xf: f64,
}

impl DegradationParams {
    pub fn new(omega_c: Vec<f64>, kappa_a: Vec<f64>, gamma_xf: f64) -> Result<Self> {
        let p = Self {
            omega_c,
            kappa_a,
            gamma_xf,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_c.len() != self.kappa_a.len() {
            return Err(Error::InvalidDegradation(format!(
                "omega_c has {} entries but kappa_a has {}",
                self.omega_c.len(),
                self.kappa_a.len()
            )));
        }
        if let Some((i, w)) = self
            .omega_c
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidDegradation(format!(
                "omega_c[{i}] = {w} must be positive"
            )));
        }
        if let Some((i, k)) = self
            .kappa_a
            .iter()
            .enumerate()
            .find(|(_, k)| !(k.is_finite() && **k > 0.0))
        {
            return Err(Error::InvalidDegradation(format!(
                "kappa_a[{i}] = {k} must be positive"
            )));
        }
        if !(self.gamma_xf.is_finite() && self.gamma_xf >= 0.0) {
            return Err(Error::InvalidDegradation(format!(
                "gamma_xf = {} must be nonnegative",
                self.gamma_xf
            )));
        }
        Ok(())
    }

    pub fn nu(&self) -> usize {
        self.omega_c.len()
    }

    /// Diagonal of `Wa`: `1/sqrt(kappa_a[i])`.
    pub fn noise_scaling(&self) -> Vec<f64> {
        self.kappa_a.iter().map(|k| 1.0 / k.sqrt()).collect()
    }

    pub fn fault_bounds(&self, channel: usize) -> Option<FaultSignalBounds> {
        self.kappa_a.get(channel).map(|k| FaultSignalBounds {
            gamma_a: 1.0 / k.sqrt(),
            gamma_u: 1.0,
        })
    }
}

/// Signal-level reading of one degraded actuator: the additive noise obeys
/// `||w_a||_2 <= gamma_a` and the lag has DC gain `gamma_u`.
///
/// Neither is an optimization variable. `gamma_a` is the noise scaling of the
/// normalized-signal model and the lag is taken with unit DC gain; magnitude
/// loss is reported through [`actuator_channel_gain`] instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaultSignalBounds {
    pub gamma_a: f64,
    pub gamma_u: f64,
}

/// `x_F' = -diag(wc) x_F + diag(wc) u`, output `x_F`.
pub fn filter_dynamics(deg: &DegradationParams) -> Result<StateSpace> {
    deg.validate()?;
    let nu = deg.nu();
    if nu == 0 {
        return Err(Error::InvalidDegradation("no actuator channels".into()));
    }
    let wc = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(deg.omega_c.clone()));
    StateSpace::new(
        -&wc,
        wc,
        DMatrix::zeros(nu, 0),
        DMatrix::identity(nu, nu),
        DMatrix::zeros(nu, 0),
    )
}

fn check_channel(deg: &DegradationParams, v: &DMatrix<f64>, channel: usize) -> Result<()> {
    deg.validate()?;
    if v.nrows() != deg.nu() {
        return Err(Error::InvalidInput(format!(
            "V has {} rows, expected {}",
            v.nrows(),
            deg.nu()
        )));
    }
    if channel >= deg.nu() {
        return Err(Error::InvalidInput(format!(
            "actuator index {channel} out of range (0..{})",
            deg.nu()
        )));
    }
    Ok(())
}

/// `||x -> x_F_i||_inf` for the filter driven by `V x` (0-based `channel`).
///
/// The map is `row_i(V) / (s + wc_i)`, a first-order lag whose peak is at DC,
/// so the norm is `||row_i(V)||_2 / wc_i = ||row_i(K)||_2`.
pub fn actuator_channel_gain(deg: &DegradationParams, v: &DMatrix<f64>, channel: usize) -> Result<f64> {
    check_channel(deg, v, channel)?;
    Ok(v.row(channel).norm() / deg.omega_c[channel])
}

/// Sampled supremum of `||row_i(V)|| / |jw + wc_i|` over a log grid
/// spanning `[1e-4 min(wc), 1e4 max(wc)]`.
pub fn actuator_channel_gain_grid(
    deg: &DegradationParams,
    v: &DMatrix<f64>,
    channel: usize,
    n_points: usize,
) -> Result<f64> {
    check_channel(deg, v, channel)?;
    let lo = deg.omega_c.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = deg.omega_c.iter().copied().fold(0.0, f64::max);
    let wc = deg.omega_c[channel];
    let row_norm = v.row(channel).norm();
    Ok(log_grid(1e-4 * lo, 1e4 * hi, n_points.max(2))
        .into_iter()
        .map(|w| row_norm / Complex::new(wc, w).norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuatorRow {
    pub label: String,
    /// Minimum cutoff frequency (rad/s).
    pub omega_c: f64,
    /// `||x -> x_F_i||_inf`.
    pub xf_gain: f64,
    /// Maximum noise scaling `1/sqrt(kappa_i)`.
    pub noise_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationReport {
    pub actuators: Vec<ActuatorRow>,
    pub gamma_xf: f64,
    pub objective: f64,
}

pub fn degradation_report(
    deg: &DegradationParams,
    v: &DMatrix<f64>,
    objective: f64,
    labels: Option<&[String]>,
) -> Result<DegradationReport> {
    deg.validate()?;
    if v.nrows() != deg.nu() {
        return Err(Error::InvalidInput(format!(
            "V has {} rows, expected {}",
            v.nrows(),
            deg.nu()
        )));
    }
    if let Some(l) = labels {
        if l.len() != deg.nu() {
            return Err(Error::InvalidInput(format!(
                "{} actuator labels for {} channels",
                l.len(),
                deg.nu()
            )));
        }
    }
    let actuators = (0..deg.nu())
        .map(|i| {
            Ok(ActuatorRow {
                label: labels.map_or_else(|| format!("u{}", i + 1), |l| l[i].clone()),
                omega_c: deg.omega_c[i],
                xf_gain: actuator_channel_gain(deg, v, i)?,
                noise_scale: 1.0 / deg.kappa_a[i].sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DegradationReport {
        actuators,
        gamma_xf: deg.gamma_xf,
        objective,
    })
}
