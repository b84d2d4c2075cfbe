//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible, 3 numerical failure,
//! 4 verification failure, 5 simulation divergence.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use serde::Serialize;

use crate::degradation::degradation_report;
use crate::error::{Error, Result};
use crate::lti::{assemble_closed_loop, NormKind};
use crate::model::ModelFile;
use crate::report::RunReport;
use crate::sim::{response_metrics, simulate_closed_loop, simulate_open_loop, DisturbanceSpec, ResponseMetrics, SimulationConfig};
use crate::synthesis::{build_lmi, solve, validate, H2BoundConvention, SynthesisSpec, SynthesisStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Ok = 0,
    InputError = 1,
    Infeasible = 2,
    NumericalFailure = 3,
    VerificationFailed = 4,
    Diverged = 5,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::Divergence { .. } => ExitCode::Diverged,
            Error::Numerical(_) | Error::Backend(_) | Error::Unstable { .. } | Error::SingularResolvent { .. } => {
                ExitCode::NumericalFailure
            }
            _ => ExitCode::InputError,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "actdeg", version, about = "State-feedback synthesis with maximal actuator degradation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a gain and degradation bounds for a model file.
    Synth(SynthArgs),
    /// Re-check a report against its model from scratch.
    Verify(VerifyArgs),
    /// Simulate the closed loop of a report (or the open loop) under gust.
    Simulate(SimulateArgs),
    /// Write the bundled F-16 model file.
    ExampleF16(ExampleArgs),
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    pub model: PathBuf,
    #[arg(long, value_parser = parse_norm)]
    pub norm: NormKind,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_wc: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_xf: f64,
    /// Whether the H2 bound limits the squared norm (`trace`) or the norm.
    #[arg(long, default_value = "trace", value_parser = parse_convention)]
    pub h2_convention: H2BoundConvention,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the assembled program in plain text.
    #[arg(long)]
    pub dump_lmi: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    pub model: PathBuf,
    pub report: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    pub model: PathBuf,
    /// Report with the gain; required unless --open-loop.
    pub report: Option<PathBuf>,
    /// Simulate without feedback (K = 0) and without actuator noise.
    #[arg(long)]
    pub open_loop: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 600.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 15.0)]
    pub noise_gain: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sine_amplitude: f64,
    /// rad/s
    #[arg(long, default_value_t = 0.075)]
    pub sine_freq: f64,
    /// Start of the window used for the metrics (s).
    #[arg(long, default_value_t = 0.0)]
    pub t_skip: f64,
    /// Trajectory CSV path; the CSV goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Metrics JSON path.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ExampleArgs {
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_norm(s: &str) -> std::result::Result<NormKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_convention(s: &str) -> std::result::Result<H2BoundConvention, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli).code(),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::InputError.code()
            } else {
                ExitCode::Ok.code()
            }
        }
    }
}

pub fn run(cli: Cli) -> ExitCode {
    let outcome = match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::ExampleF16(a) => cmd_example_f16(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from_error(&e)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn cmd_synth(args: &SynthArgs) -> Result<ExitCode> {
    let t0 = Instant::now();
    let model = ModelFile::load(&args.model)?;
    let sys = model.plant()?;
    let mut spec = SynthesisSpec::new(args.norm, args.gamma, model.wd.clone())
        .with_weights(args.lambda_a, args.lambda_wc, args.lambda_xf);
    spec.h2_convention = args.h2_convention;
    let spec = spec.with_env_overrides()?;

    let problem = build_lmi(&sys, &spec)?;
    if let Some(p) = &args.dump_lmi {
        std::fs::write(p, problem.dump()).map_err(|e| Error::io(p, e))?;
    }
    let t_build = t0.elapsed().as_secs_f64();
    let result = solve(&problem, &spec)?;
    let t_solve = t0.elapsed().as_secs_f64() - t_build;

    let mut report = RunReport::new(&model.name, spec.clone(), result);
    let mut code = match report.status {
        SynthesisStatus::Optimal => ExitCode::Ok,
        SynthesisStatus::Infeasible => ExitCode::Infeasible,
        SynthesisStatus::NumericalFailure => ExitCode::NumericalFailure,
    };
    if let Some(point) = &report.result.point {
        report.degradation = Some(degradation_report(
            &point.degradation,
            &point.v,
            point.objective,
            model.input_labels(),
        )?);
        let validation = validate(&report.result, &sys, &spec);
        if !validation.passed {
            code = ExitCode::VerificationFailed;
        }
        report.validation = Some(validation);
    }
    let total = t0.elapsed().as_secs_f64();
    report.timing = crate::report::Timing {
        build_s: t_build,
        solve_s: t_solve,
        validate_s: total - t_build - t_solve,
        total_s: total,
    };

    let mut text = report.to_json()?;
    text.push('\n');
    write_output(args.out.as_deref(), &text)?;
    eprint!("{}", synth_summary(&report));
    Ok(code)
}

fn synth_summary(r: &RunReport) -> String {
    let mut s = format!(
        "{} synthesis, gamma = {}: {:?} ({} iterations, {:.2} s)\n",
        r.spec.norm, r.spec.gamma, r.status, r.result.diagnostics.iterations, r.timing.total_s
    );
    if let Some(c) = &r.result.diagnostics.certificate {
        s += &format!(
            "infeasibility certificate: b'z = {:.3e}, |A'z|/|b'z| = {:.3e}\n",
            c.b_dot_z, c.relative_residual
        );
    }
    for n in &r.result.diagnostics.notes {
        s += &format!("note: {n}\n");
    }
    if let Some(d) = &r.degradation {
        s += &format!("{:<12} {:>14} {:>14} {:>14}\n", "actuator", "omega_c", "xF gain", "noise scale");
        for a in &d.actuators {
            s += &format!(
                "{:<12} {:>14.6e} {:>14.6e} {:>14.6e}\n",
                a.label, a.omega_c, a.xf_gain, a.noise_scale
            );
        }
        s += &format!("gamma_xF = {:.6e}, objective = {:.6e}\n", d.gamma_xf, d.objective);
    }
    if let Some(v) = &r.result.verification {
        s += &format!("verified {} norm = {:.6e}\n", v.kind, v.value);
    }
    if let Some(v) = &r.validation {
        if !v.passed {
            s += &format!("{v}\n");
        }
    }
    s
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let model = ModelFile::load(&args.model)?;
    let sys = model.plant()?;
    let report = RunReport::load(&args.report)?;
    if report.result.point.is_none() {
        return Err(Error::InvalidInput(format!(
            "report has no gain (status {:?})",
            report.result.status
        )));
    }
    let spec = report.spec.clone().with_env_overrides()?;
    let v = validate(&report.result, &sys, &spec);
    println!("{v}");
    Ok(if v.passed {
        ExitCode::Ok
    } else {
        ExitCode::VerificationFailed
    })
}

#[derive(Debug, Serialize)]
struct SimulationSummary<'a> {
    model: &'a str,
    open_loop: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<String>,
    config: SimulationConfig,
    rows: usize,
    metrics: ResponseMetrics,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode> {
    let model = ModelFile::load(&args.model)?;
    let sys = model.plant()?;
    let cfg = SimulationConfig {
        duration: args.duration,
        dt: args.dt,
        seed: args.seed,
        disturbance: DisturbanceSpec {
            white_noise_gain: args.noise_gain,
            sinusoid_amplitude: args.sine_amplitude,
            sinusoid_freq: args.sine_freq,
        },
    };
    cfg.validate()?;
    let traj = match (&args.report, args.open_loop) {
        (_, true) => simulate_open_loop(&sys, &cfg)?,
        (Some(path), false) => {
            let report = RunReport::load(path)?;
            let point = report.result.point.as_ref().ok_or_else(|| {
                Error::InvalidInput(format!("report {} has no gain", path.display()))
            })?;
            let wd = DVector::from_vec(model.wd.clone());
            let cl = assemble_closed_loop(&sys, &point.k, &point.degradation, &wd)?;
            simulate_closed_loop(&cl, &cfg)?
        }
        (None, false) => {
            return Err(Error::InvalidInput(
                "simulate needs a report or --open-loop".into(),
            ))
        }
    };

    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    match &args.out {
        Some(p) => std::fs::write(p, &buf).map_err(|e| Error::io(p, e))?,
        None => std::io::stdout()
            .lock()
            .write_all(&buf)
            .map_err(|e| Error::io("<stdout>", e))?,
    }

    let metrics = response_metrics(&traj, args.t_skip)?;
    eprintln!(
        "{} samples, z RMS {:?}, total {:.6e}",
        traj.len(),
        metrics.rms,
        metrics.total_rms
    );
    if let Some(p) = &args.metrics {
        let summary = SimulationSummary {
            model: &model.name,
            open_loop: args.open_loop,
            report: args.report.as_ref().map(|p| p.display().to_string()),
            config: cfg,
            rows: traj.len(),
            metrics,
        };
        let mut text = serde_json::to_string_pretty(&summary).map_err(|e| Error::json("metrics", e))?;
        text.push('\n');
        std::fs::write(p, text).map_err(|e| Error::io(p, e))?;
    }
    Ok(ExitCode::Ok)
}

pub fn cmd_example_f16(args: &ExampleArgs) -> Result<ExitCode> {
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let path = args.out.join("f16.json");
    crate::f16::model_file().save(&path)?;
    eprintln!("wrote {}", path.display());
    Ok(ExitCode::Ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes() {
        assert_eq!(ExitCode::from_error(&Error::Divergence { step: 1, time: 0.1 }), ExitCode::Diverged);
        assert_eq!(ExitCode::from_error(&Error::InvalidInput("x".into())), ExitCode::InputError);
        assert_eq!(ExitCode::from_error(&Error::Backend("x".into())), ExitCode::NumericalFailure);
    }

    #[test]
    fn parses_synth_flags() {
        let cli = Cli::try_parse_from([
            "actdeg", "synth", "m.json", "--norm", "hinf", "--gamma", "0.5", "--lambda-wc", "0",
        ])
        .unwrap();
        let Command::Synth(a) = cli.command else { panic!() };
        assert_eq!(a.norm, NormKind::HInf);
        assert_eq!(a.lambda_wc, 0.0);
        assert_eq!(a.h2_convention, H2BoundConvention::Trace);
        assert!(Cli::try_parse_from(["actdeg", "synth", "m.json", "--norm", "h3", "--gamma", "1"]).is_err());
    }
}
