//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use actdeg::f16;
use actdeg::lti::{
    assemble_closed_loop, h2_norm, h2_norm_frequency_integral, hinf_norm, hinf_norm_grid,
    hinf_norm_with_feedthrough, log_grid, NormKind, StateSpace,
};
use actdeg::report::RunReport;
use actdeg::sim::{response_metrics, simulate_closed_loop, SimulationConfig};
use actdeg::synthesis::lmi::{ConstraintKind, Definiteness};
use actdeg::synthesis::{build_lmi, solve, SynthesisResult, SynthesisSpec, SynthesisStatus};
use nalgebra::DVector;
use rand::Rng;

const GAMMA: f64 = 0.5;
const SLACK: f64 = 1e-4;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn synth_cli(dir: &Path, norm: &str, gamma: &str) -> (i32, Option<RunReport>, f64) {
    let model = dir.join("f16.json");
    if !model.exists() {
        f16::model_file().save(&model).unwrap();
    }
    let report = dir.join(format!("{norm}-{gamma}.json"));
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_actdeg"))
        .args(["synth", model.to_str().unwrap(), "--norm", norm, "--gamma", gamma])
        .args(["--out", report.to_str().unwrap()])
        .env_remove("ACTDEG_SOLVER_TOL")
        .output()
        .expect("actdeg runs");
    let elapsed = t0.elapsed().as_secs_f64();
    (out.status.code().unwrap_or(-1), RunReport::load(&report).ok(), elapsed)
}

fn closed_loop_norm(sys: &StateSpace, r: &SynthesisResult, kind: NormKind) -> Option<f64> {
    let p = r.point.as_ref()?;
    let cl = assemble_closed_loop(sys, &p.k, &p.degradation, &DVector::from_element(sys.nd(), f16::WD)).ok()?;
    match kind {
        NormKind::HInf => hinf_norm_with_feedthrough(&cl.acl, &cl.bcl, &cl.ccl, &cl.dcl, 1e-9).ok().map(|n| n.value),
        NormKind::H2 => h2_norm(&cl.acl, &cl.bcl, &cl.ccl).ok().map(|n| n.value),
    }
}

fn certificate(dir: &Path, kind: NormKind) -> Outcome {
    let (code, report, secs) = synth_cli(dir, &kind.to_string(), "0.5");
    let Some(r) = report else {
        return outcome(false, format!("exit {code}, no report"));
    };
    if code != 0 || r.status != SynthesisStatus::Optimal {
        return outcome(false, format!("exit {code}, status {:?}", r.status));
    }
    let Some(norm) = closed_loop_norm(&f16::plant(), &r.result, kind) else {
        return outcome(false, "closed loop could not be evaluated");
    };
    let (value, label) = match kind {
        NormKind::HInf => (norm, "||G||_inf"),
        NormKind::H2 => (norm * norm, "||G||_2^2"),
    };
    let limit = GAMMA * (1.0 + SLACK);
    let mut ok = value <= limit;
    let mut detail = format!("{label} = {value:.6} <= {limit}");
    if kind == NormKind::HInf {
        ok &= secs < 30.0;
        detail += &format!(", {secs:.2} s");
    }
    outcome(ok, detail)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = common::rng(2024);
    let (mut worst_inf, mut worst_h2) = (0.0f64, 0.0f64);
    let n = 24;
    for _ in 0..n {
        let nx = rng.gen_range(1..=6);
        let (m, p) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let a = common::hurwitz(&mut rng, nx);
        let b = common::gaussian(&mut rng, nx, m);
        let c = common::gaussian(&mut rng, p, nx);
        let (lo, hi) = common::band(&a);
        let exact = hinf_norm(&a, &b, &c, 1e-9).unwrap().value;
        let grid = hinf_norm_grid(&a, &b, &c, &log_grid(lo * 10.0, hi / 10.0, 10_000)).unwrap().value;
        worst_inf = worst_inf.max((exact - grid).abs() / exact);
        let lyap = h2_norm(&a, &b, &c).unwrap().value;
        let integral = h2_norm_frequency_integral(&a, &b, &c, 20_000).unwrap().value;
        worst_h2 = worst_h2.max((lyap - integral).abs() / lyap);
    }
    outcome(
        worst_inf <= 1e-3 && worst_h2 <= 5e-3,
        format!("{n} plants, H-inf worst rel {worst_inf:.2e}, H2 worst rel {worst_h2:.2e}"),
    )
}

/// All solves used by the residual and recovery criteria.
fn solves() -> Vec<(String, StateSpace, SynthesisSpec, SynthesisResult)> {
    let mut out = Vec::new();
    let f16_sys = f16::plant();
    for kind in [NormKind::HInf, NormKind::H2] {
        for gamma in [0.3, 0.5, 1.0] {
            let spec = SynthesisSpec::new(kind, gamma, vec![f16::WD]);
            let r = solve(&build_lmi(&f16_sys, &spec).unwrap(), &spec).unwrap();
            out.push((format!("f16 {kind} gamma {gamma}"), f16_sys.clone(), spec, r));
        }
    }
    let mut rng = common::rng(77);
    for case in 0..6 {
        let nx = rng.gen_range(2..=4);
        let sys = common::plant(&mut rng, nx, 2, 1, 2);
        let kind = if case % 2 == 0 { NormKind::HInf } else { NormKind::H2 };
        let ol = hinf_norm(&sys.a, &sys.bd, &sys.cz, 1e-9).unwrap().value;
        let spec = SynthesisSpec::new(kind, 2.0 * ol.max(ol * ol), vec![1.0]);
        let r = solve(&build_lmi(&sys, &spec).unwrap(), &spec).unwrap();
        out.push((format!("random {case} {kind}"), sys, spec, r));
    }
    out
}

fn lmi_residuals(runs: &[(String, StateSpace, SynthesisSpec, SynthesisResult)]) -> Outcome {
    let (mut worst_nsd, mut worst_trace) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut count = 0;
    for (name, sys, spec, r) in runs {
        let Some(p) = &r.point else { continue };
        count += 1;
        let problem = build_lmi(sys, spec).unwrap();
        let x = match problem.variables.pack(&p.block_values(spec.norm)) {
            Ok(x) => x,
            Err(e) => return outcome(false, format!("{name}: {e}")),
        };
        for c in &problem.constraints {
            match &c.kind {
                ConstraintKind::Matrix { sense: Definiteness::NegativeSemidefinite, .. } => {
                    worst_nsd = worst_nsd.max(c.violation(&x));
                }
                ConstraintKind::Linear { .. } if c.name.ends_with("_trace") => {
                    worst_trace = worst_trace.max(c.violation(&x));
                }
                _ => {}
            }
        }
    }
    outcome(
        count > 0 && worst_nsd <= 1e-7 && worst_trace <= 1e-8,
        format!("{count} optima, max eig of <= 0 blocks {worst_nsd:.2e}, worst trace violation {worst_trace:.2e}"),
    )
}

fn recovery(runs: &[(String, StateSpace, SynthesisSpec, SynthesisResult)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (_, _, _, r) in runs {
        let Some(p) = &r.point else { continue };
        count += 1;
        let mut diff = p.v.clone();
        for i in 0..diff.nrows() {
            for j in 0..diff.ncols() {
                diff[(i, j)] -= p.degradation.omega_c[i] * p.k[(i, j)];
            }
        }
        worst = worst.max(diff.amax() / p.v.amax().max(f64::MIN_POSITIVE));
    }
    outcome(count > 0 && worst <= 1e-9, format!("{count} solves, worst relative mismatch {worst:.2e}"))
}

fn trends(hinf: &SynthesisResult, h2: &SynthesisResult) -> Outcome {
    let (Some(pi), Some(p2)) = (&hinf.point, &h2.point) else {
        return outcome(false, "missing solution");
    };
    // inputs are [thrust, elevator, leading-edge flap]
    let ordered = |w: &[f64]| w[1] >= w[2] && w[2] >= w[0];
    let wi = &pi.degradation.omega_c;
    let w2 = &p2.degradation.omega_c;
    let ni = pi.degradation.noise_scaling();
    let n2 = p2.degradation.noise_scaling();
    let noise = ni.iter().zip(&n2).all(|(a, b)| a < b);
    outcome(
        ordered(wi) && ordered(w2) && noise,
        format!(
            "omega_c hinf {:.3e}/{:.3e}/{:.3e}, h2 {:.3e}/{:.3e}/{:.3e} (T/de/lef); noise hinf {:.2e}/{:.2e}/{:.2e} < h2 {:.2e}/{:.2e}/{:.2e}",
            wi[0], wi[1], wi[2], w2[0], w2[1], w2[2], ni[0], ni[1], ni[2], n2[0], n2[1], n2[2]
        ),
    )
}

fn simulation(hinf: &SynthesisResult, h2: &SynthesisResult) -> Outcome {
    let sys = f16::plant();
    let wd = DVector::from_element(1, f16::WD);
    let cl = |r: &SynthesisResult| {
        let p = r.point.as_ref().unwrap();
        assemble_closed_loop(&sys, &p.k, &p.degradation, &wd).unwrap()
    };
    let (cl_inf, cl_2) = (cl(hinf), cl(h2));
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..10 {
        let cfg = SimulationConfig {
            seed,
            ..SimulationConfig::default()
        };
        let rms = |c| -> Result<f64, String> {
            let t = simulate_closed_loop(c, &cfg).map_err(|e| e.to_string())?;
            Ok(response_metrics(&t, 0.0).map_err(|e| e.to_string())?.total_rms)
        };
        match (rms(&cl_2), rms(&cl_inf)) {
            (Ok(a), Ok(b)) => {
                if a < b {
                    wins += 1;
                }
                pairs.push(format!("{a:.3}/{b:.3}"));
            }
            (Err(e), _) | (_, Err(e)) => return outcome(false, format!("seed {seed}: {e}")),
        }
    }
    outcome(wins >= 7, format!("H2 below H-inf z-RMS in {wins}/10 seeds (h2/hinf: {})", pairs.join(" ")))
}

fn infeasibility(dir: &Path) -> Outcome {
    let (code, report, _) = synth_cli(dir, "hinf", "1e-9");
    let Some(r) = report else {
        return outcome(false, format!("exit {code}, no report"));
    };
    let cert = r.result.diagnostics.certificate.as_ref();
    let ok = code == 2 && r.status == SynthesisStatus::Infeasible && cert.is_some_and(|c| c.b_dot_z < 0.0);
    outcome(
        ok,
        format!(
            "exit {code}, status {:?}, b'z = {:?}, |A'z|/|b'z| = {:?}",
            r.status,
            cert.map(|c| c.b_dot_z),
            cert.map(|c| c.relative_residual)
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    results.push(("certificate soundness (H-inf)", certificate(dir.path(), NormKind::HInf)));
    results.push(("certificate soundness (H2)", certificate(dir.path(), NormKind::H2)));
    results.push(("oracle equivalence", oracle_equivalence()));

    let runs = solves();
    results.push(("LMI residuals", lmi_residuals(&runs)));
    results.push(("recovery identity", recovery(&runs)));

    let pick = |kind: NormKind| {
        runs.iter()
            .find(|(name, ..)| name == &format!("f16 {kind} gamma 0.5"))
            .map(|r| r.3.clone())
            .unwrap()
    };
    let (hinf, h2) = (pick(NormKind::HInf), pick(NormKind::H2));
    results.push(("table trends", trends(&hinf, &h2)));
    results.push(("simulation contract", simulation(&hinf, &h2)));
    results.push(("infeasibility detection", infeasibility(dir.path())));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
