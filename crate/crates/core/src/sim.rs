//! Discrete-time simulation of the fault-augmented closed loop.
//!
//! Inputs are held constant over each step (zero-order hold), so the state
//! update is exact for piecewise-constant excitation.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::degradation::DegradationParams;
use crate::error::{Error, Result};
use crate::lti::{assemble_closed_loop, AugmentedClosedLoop, StateSpace};

/// States beyond this magnitude are treated as divergence.
const DIVERGENCE_LIMIT: f64 = 1e150;

/// `d(t) = white_noise_gain * n(t) + sinusoid_amplitude * sin(sinusoid_freq * t)`
/// on every disturbance channel, with `n` unit-variance Gaussian samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    pub white_noise_gain: f64,
    pub sinusoid_amplitude: f64,
    /// rad/s
    pub sinusoid_freq: f64,
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self {
            white_noise_gain: 15.0,
            sinusoid_amplitude: 1.0,
            sinusoid_freq: 0.075,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub disturbance: DisturbanceSpec,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            duration: 600.0,
            dt: 0.01,
            seed: 0,
            disturbance: DisturbanceSpec::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "duration must be nonnegative, got {}",
                self.duration
            )));
        }
        Ok(())
    }

    /// Number of samples including `t = 0` and `t = duration`.
    pub fn n_samples(&self) -> usize {
        (self.duration / self.dt).round() as usize + 1
    }
}

/// Sampled excitation: `d` is `N x nd`, `wa` is `N x nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct Excitation {
    pub time: Vec<f64>,
    pub d: DMatrix<f64>,
    pub wa: DMatrix<f64>,
}

impl Excitation {
    /// `[d, wa]` side by side.
    pub fn stacked(&self) -> DMatrix<f64> {
        let n = self.time.len();
        let mut u = DMatrix::zeros(n, self.d.ncols() + self.wa.ncols());
        u.view_mut((0, 0), (n, self.d.ncols())).copy_from(&self.d);
        u.view_mut((0, self.d.ncols()), (n, self.wa.ncols())).copy_from(&self.wa);
        u
    }
}

/// Disturbance and actuator noise for `cfg`. The disturbance draws from
/// stream 0 of a ChaCha8 generator seeded with `cfg.seed`, the actuator noise
/// (`noise_scale[i] * n(t)`) from stream 1, so the two are reproducible
/// independently of each other.
pub fn generate_excitation(cfg: &SimulationConfig, nd: usize, noise_scale: &[f64]) -> Result<Excitation> {
    cfg.validate()?;
    let n = cfg.n_samples();
    let time: Vec<f64> = (0..n).map(|k| k as f64 * cfg.dt).collect();
    let spec = cfg.disturbance;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    let mut d = DMatrix::zeros(n, nd);
    for (k, t) in time.iter().enumerate() {
        let sine = spec.sinusoid_amplitude * (spec.sinusoid_freq * t).sin();
        for j in 0..nd {
            let w: f64 = StandardNormal.sample(&mut rng);
            d[(k, j)] = spec.white_noise_gain * w + sine;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut wa = DMatrix::zeros(n, noise_scale.len());
    for k in 0..n {
        for (i, s) in noise_scale.iter().enumerate() {
            let w: f64 = StandardNormal.sample(&mut rng);
            wa[(k, i)] = s * w;
        }
    }
    Ok(Excitation { time, d, wa })
}

/// Exact zero-order-hold discretization `(e^{A dt}, int_0^dt e^{A s} ds B)`.
pub fn zoh_discretize(a: &DMatrix<f64>, b: &DMatrix<f64>, dt: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "zoh: A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let m = b.ncols();
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * dt));
    aug.view_mut((0, n), (n, m)).copy_from(&(b * dt));
    let e = aug.exp();
    Ok((
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub time: Vec<f64>,
    /// `N x n` state samples.
    pub states: DMatrix<f64>,
    /// `N x nz` performance outputs.
    pub outputs: DMatrix<f64>,
    /// `N x m` inputs as applied.
    pub inputs: DMatrix<f64>,
    pub state_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub input_labels: Vec<String>,
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn header(&self) -> Vec<String> {
        std::iter::once("time".to_string())
            .chain(self.state_labels.iter().cloned())
            .chain(self.output_labels.iter().cloned())
            .chain(self.input_labels.iter().cloned())
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header())?;
        let mut rec: Vec<String> = Vec::new();
        for k in 0..self.len() {
            rec.clear();
            rec.push(self.time[k].to_string());
            for m in [&self.states, &self.outputs, &self.inputs] {
                rec.extend(m.row(k).iter().map(|v| v.to_string()));
            }
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::Numerical(format!("csv flush: {e}")))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Simulates `x' = A x + B u, z = C x + D u` with `u` held over each step.
/// `inputs` is `N x m`; the trajectory has `N` samples at `t = k dt`.
pub fn simulate(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: Option<&DMatrix<f64>>,
    inputs: &DMatrix<f64>,
    x0: &DVector<f64>,
    dt: f64,
) -> Result<Trajectory> {
    let n = a.nrows();
    if c.ncols() != n || x0.len() != n || inputs.ncols() != b.ncols() {
        return Err(Error::InvalidInput("simulate: inconsistent dimensions".into()));
    }
    if let Some(d) = d {
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::InvalidInput("simulate: D has the wrong shape".into()));
        }
    }
    let (ad, bd) = zoh_discretize(a, b, dt)?;
    let steps = inputs.nrows();
    let mut states = DMatrix::zeros(steps, n);
    let mut outputs = DMatrix::zeros(steps, c.nrows());
    let mut x = x0.clone();
    for k in 0..steps {
        let u = inputs.row(k).transpose();
        if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Divergence {
                step: k,
                time: k as f64 * dt,
            });
        }
        states.set_row(k, &x.transpose());
        let mut z = c * &x;
        if let Some(d) = d {
            z += d * &u;
        }
        outputs.set_row(k, &z.transpose());
        x = &ad * &x + &bd * &u;
    }
    Ok(Trajectory {
        time: (0..steps).map(|k| k as f64 * dt).collect(),
        states,
        outputs,
        inputs: inputs.clone(),
        state_labels: numbered("x", n),
        output_labels: numbered("z", c.nrows()),
        input_labels: numbered("u", b.ncols()),
    })
}

/// Closed-loop response to the physical disturbance and actuator noise
/// (`[[Bd, Bu], [0, 0]]` input map), from rest.
pub fn simulate_closed_loop(cl: &AugmentedClosedLoop, cfg: &SimulationConfig) -> Result<Trajectory> {
    run(cl, cfg, &cl.degradation.noise_scaling())
}

/// Reference run without feedback: `K = 0`, unit-bandwidth actuators and no
/// actuator noise, driven by the same disturbance.
pub fn simulate_open_loop(sys: &StateSpace, cfg: &SimulationConfig) -> Result<Trajectory> {
    let nu = sys.nu();
    let deg = DegradationParams::new(vec![1.0; nu], vec![1.0; nu], 0.0)?;
    let k = DMatrix::zeros(nu, sys.nx());
    let cl = assemble_closed_loop(sys, &k, &deg, &DVector::from_element(sys.nd(), 1.0))?;
    run(&cl, cfg, &vec![0.0; nu])
}

fn run(cl: &AugmentedClosedLoop, cfg: &SimulationConfig, noise_scale: &[f64]) -> Result<Trajectory> {
    let (nx, nu, nd) = (cl.nx(), cl.nu(), cl.plant.nd());
    let ex = generate_excitation(cfg, nd, noise_scale)?;
    let nz = cl.ccl.nrows();
    let mut dcl = DMatrix::zeros(nz, nd + nu);
    dcl.view_mut((0, 0), (nz, nd)).copy_from(&cl.plant.dd);
    let x0 = DVector::zeros(cl.order());
    let mut traj = simulate(&cl.acl, &cl.physical_input(), &cl.ccl, Some(&dcl), &ex.stacked(), &x0, cfg.dt)?;
    traj.state_labels = numbered("x", nx);
    traj.state_labels.extend(numbered("xF", nu));
    traj.input_labels = numbered("d", nd);
    traj.input_labels.extend(numbered("wa", nu));
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMetrics {
    /// Per-output RMS after `t_skip`.
    pub rms: Vec<f64>,
    pub peak: Vec<f64>,
    /// `sqrt(sum of per-output mean squares)`.
    pub total_rms: f64,
    /// Largest per-output change in mean between the second and fourth
    /// quarters of the evaluation window; large values flag slow drift.
    pub drift: f64,
    pub t_skip: f64,
    pub samples: usize,
}

pub fn response_metrics(traj: &Trajectory, t_skip: f64) -> Result<ResponseMetrics> {
    let start = traj.time.iter().position(|t| *t >= t_skip).unwrap_or(traj.len());
    let n = traj.len() - start;
    if n == 0 {
        return Err(Error::InvalidInput(format!(
            "no samples after t_skip = {t_skip}"
        )));
    }
    let z = traj.outputs.rows(start, n);
    let mut rms = Vec::new();
    let mut peak = Vec::new();
    let mut drift: f64 = 0.0;
    for col in z.column_iter() {
        let ms = col.iter().map(|v| v * v).sum::<f64>() / n as f64;
        rms.push(ms.sqrt());
        peak.push(col.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        if n >= 4 {
            let q = n / 4;
            let mean = |lo: usize| col.rows(lo, q).mean();
            drift = drift.max((mean(3 * q) - mean(q)).abs());
        }
    }
    Ok(ResponseMetrics {
        total_rms: rms.iter().map(|r| r * r).sum::<f64>().sqrt(),
        rms,
        peak,
        drift,
        t_skip,
        samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn scalar_zoh_is_exact() {
        let (ad, bd) = zoh_discretize(&dmatrix![-2.0], &dmatrix![3.0], 0.1).unwrap();
        let e = (-0.2f64).exp();
        assert!((ad[(0, 0)] - e).abs() < 1e-12);
        assert!((bd[(0, 0)] - 1.5 * (1.0 - e)).abs() < 1e-12);
    }

    #[test]
    fn simulation_is_linear() {
        let a = dmatrix![-1.0, 2.0; -2.0, -1.0];
        let b = dmatrix![1.0; 0.5];
        let c = dmatrix![1.0, -1.0];
        let u1 = DMatrix::from_fn(50, 1, |k, _| (k as f64 * 0.3).sin());
        let u2 = DMatrix::from_fn(50, 1, |k, _| (k % 7) as f64);
        let x0 = DVector::zeros(2);
        let y1 = simulate(&a, &b, &c, None, &u1, &x0, 0.05).unwrap().outputs;
        let y2 = simulate(&a, &b, &c, None, &u2, &x0, 0.05).unwrap().outputs;
        let y = simulate(&a, &b, &c, None, &(&u1 * 2.0 - &u2), &x0, 0.05).unwrap().outputs;
        assert!((y - (y1 * 2.0 - y2)).amax() < 1e-12);
    }

    #[test]
    fn excitation_is_deterministic_and_scaled() {
        let cfg = SimulationConfig {
            duration: 1000.0,
            dt: 0.01,
            seed: 7,
            disturbance: DisturbanceSpec {
                sinusoid_amplitude: 0.0,
                ..Default::default()
            },
        };
        let a = generate_excitation(&cfg, 1, &[0.5]).unwrap();
        let b = generate_excitation(&cfg, 1, &[0.5]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.time.len(), 100_001);
        let var = |m: &DMatrix<f64>| {
            let mean = m.mean();
            m.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m.len() as f64
        };
        let vd = var(&a.d);
        assert!((0.97 * 225.0..=1.03 * 225.0).contains(&vd), "{vd}");
        let vw = var(&a.wa);
        assert!((0.97 * 0.25..=1.03 * 0.25).contains(&vw), "{vw}");
        let c = generate_excitation(&SimulationConfig { seed: 8, ..cfg }, 1, &[0.5]).unwrap();
        assert_ne!(a.d, c.d);
    }

    #[test]
    fn sinusoid_steady_state_amplitude() {
        // G(s) = 1/(s + 1) driven by sin(0.075 t)
        let w = 0.075;
        let dt = 0.01;
        let n = (400.0 / dt) as usize;
        let u = DMatrix::from_fn(n, 1, |k, _| (w * k as f64 * dt).sin());
        let tr = simulate(&dmatrix![-1.0], &dmatrix![1.0], &dmatrix![1.0], None, &u, &DVector::zeros(1), dt).unwrap();
        let tail = tr.outputs.rows(n / 2, n - n / 2);
        let amp = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let want = 1.0 / (1.0 + w * w).sqrt();
        assert!((amp / want - 1.0).abs() < 0.02, "{amp} vs {want}");
    }

    #[test]
    fn unstable_system_diverges() {
        let u = DMatrix::zeros(100_000, 1);
        let err = simulate(&dmatrix![50.0], &dmatrix![1.0], &dmatrix![1.0], None, &u, &DVector::from_element(1, 1.0), 0.1)
            .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn csv_header_and_rows() {
        let sys = crate::f16::plant();
        let cfg = SimulationConfig {
            duration: 1.0,
            ..Default::default()
        };
        let tr = simulate_open_loop(&sys, &cfg).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time,x_1,x_2,x_3,x_4,xF_1,xF_2,xF_3,z_1,z_2,d_1,wa_1,wa_2,wa_3"
        );
        assert_eq!(lines.count(), 101);
        let m = response_metrics(&tr, 0.0).unwrap();
        assert_eq!(m.rms.len(), 2);
    }
}
