mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use actdeg::lti::frequency_response;
use actdeg::model::ModelFile;
use actdeg::report::RunReport;
use rand::Rng;
use tempfile::TempDir;

fn actdeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actdeg"))
        .args(args)
        .env_remove("ACTDEG_SOLVER_TOL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let out = actdeg(&["example-f16", "--out", s(dir.path())]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn model(&self) -> PathBuf {
        self.path("f16.json")
    }

    fn synth(&self, norm: &str, gamma: &str, name: &str) -> (i32, PathBuf) {
        let report = self.path(name);
        let out = actdeg(&["synth", s(&self.model()), "--norm", norm, "--gamma", gamma, "--out", s(&report)]);
        (code(&out), report)
    }
}

#[test]
fn example_model_contents() {
    let f = Fixture::new();
    let text = std::fs::read_to_string(f.model()).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(raw["a"][1][2], -131.646);
    assert_eq!(raw["bu"][3][1], -0.4503);
    assert_eq!(raw["metadata"]["trim"]["vt_ft_s"], 900.0);
    let m = ModelFile::load(&f.model()).unwrap();
    let sys = m.plant().unwrap();
    assert_eq!(sys.cz.row(0).iter().copied().collect::<Vec<_>>(), vec![11.46, 0.0, -11.46, 0.0]);
    assert_eq!(m.wd, vec![0.01]);
    assert!(sys.dd.iter().all(|v| *v == 0.0));
}

#[test]
fn example_to_unwritable_path() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let out = actdeg(&["example-f16", "--out", s(&file.join("sub"))]);
    assert_eq!(code(&out), 1);
}

#[test]
fn synth_exit_codes_and_report() {
    let f = Fixture::new();
    let (c, report) = f.synth("hinf", "0.5", "hinf.json");
    assert_eq!(c, 0);
    let r = RunReport::load(&report).unwrap();
    let deg = r.degradation.as_ref().unwrap();
    let labels: Vec<&str> = deg.actuators.iter().map(|a| a.label.as_str()).collect();
    assert_eq!(labels, ["T", "delta_e", "delta_lef"]);
    for a in &deg.actuators {
        assert!(a.omega_c > 0.0 && a.xf_gain >= 0.0 && a.noise_scale > 0.0);
    }
    assert!(r.validation.as_ref().unwrap().passed);
    assert_eq!(r.tool_version, env!("CARGO_PKG_VERSION"));

    let (c, report) = f.synth("hinf", "1e-9", "infeasible.json");
    assert_eq!(c, 2);
    let r = RunReport::load(&report).unwrap();
    assert!(r.result.diagnostics.certificate.is_some());

    let out = actdeg(&["synth", s(&f.path("missing.json")), "--norm", "hinf", "--gamma", "0.5"]);
    assert_eq!(code(&out), 1);
    let out = actdeg(&["synth", s(&f.model()), "--norm", "h3", "--gamma", "0.5"]);
    assert_eq!(code(&out), 1);
    let out = actdeg(&["synth", s(&f.model()), "--norm", "hinf", "--gamma", "-1"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn dump_lmi_lists_program() {
    let f = Fixture::new();
    let dump = f.path("prog.txt");
    let out = actdeg(&[
        "synth", s(&f.model()), "--norm", "h2", "--gamma", "0.5", "--out", s(&f.path("r.json")), "--dump-lmi", s(&dump),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dump).unwrap();
    for name in ["h2_lmi", "h2_output_gram", "h2_trace", "xf_gram", "Y", "omega_c"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn verify_round_trip_and_tampering() {
    let f = Fixture::new();
    let (c, report) = f.synth("hinf", "0.5", "hinf.json");
    assert_eq!(c, 0);
    let out = actdeg(&["verify", s(&f.model()), s(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));

    let r = RunReport::load(&report).unwrap();

    let mut scaled = r.clone();
    scaled.result.point.as_mut().unwrap().k *= 100.0;
    let p = f.path("scaled.json");
    scaled.save(&p).unwrap();
    assert_eq!(code(&actdeg(&["verify", s(&f.model()), s(&p)])), 4);

    let mut looser = r.clone();
    looser.spec.gamma = 1.0;
    let p = f.path("looser.json");
    looser.save(&p).unwrap();
    assert_eq!(code(&actdeg(&["verify", s(&f.model()), s(&p)])), 0);

    let (c, infeasible) = f.synth("hinf", "1e-9", "inf.json");
    assert_eq!(c, 2);
    assert_eq!(code(&actdeg(&["verify", s(&f.model()), s(&infeasible)])), 1);
}

#[test]
fn solver_tolerance_override() {
    let f = Fixture::new();
    let (_, report) = f.synth("h2", "0.5", "h2.json");
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_actdeg"))
            .args(["verify", s(&f.model()), s(&report)])
            .env("ACTDEG_SOLVER_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1e-6")), 0);
    assert_eq!(code(&run("not-a-number")), 1);
}

#[test]
fn simulate_rows_and_determinism() {
    let f = Fixture::new();
    let (c, report) = f.synth("h2", "0.5", "h2.json");
    assert_eq!(c, 0);
    let a = f.path("a.csv");
    let metrics = f.path("m.json");
    let out = actdeg(&["simulate", s(&f.model()), s(&report), "--seed", "7", "--out", s(&a), "--metrics", s(&metrics)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "time,x_1,x_2,x_3,x_4,xF_1,xF_2,xF_3,z_1,z_2,d_1,wa_1,wa_2,wa_3"
    );
    assert_eq!(lines.count(), 60001);

    let b = f.path("b.csv");
    let out = actdeg(&["simulate", s(&f.model()), s(&report), "--seed", "7", "--out", s(&b)]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(metrics).unwrap()).unwrap();
    assert_eq!(m["rows"], 60001);
    assert!(m["metrics"]["total_rms"].as_f64().unwrap() > 0.0);

    let out = actdeg(&["simulate", s(&f.model())]);
    assert_eq!(code(&out), 1);
}

#[test]
fn open_loop_sinusoid_matches_frequency_response() {
    let f = Fixture::new();
    let csv = f.path("ol.csv");
    let out = actdeg(&[
        "simulate", s(&f.model()), "--open-loop", "--noise-gain", "0", "--duration", "1200", "--out", s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let sys = ModelFile::load(&f.model()).unwrap().plant().unwrap();
    let g = &frequency_response(&sys.a, &sys.bd, &sys.cz, &[0.075]).unwrap()[0];

    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (t, z1, z2) = (col("time"), col("z_1"), col("z_2"));
    let mut peak = [0.0f64; 2];
    for rec in reader.records() {
        let rec = rec.unwrap();
        let time: f64 = rec[t].parse().unwrap();
        if time < 1200.0 - 2.0 * 2.0 * std::f64::consts::PI / 0.075 {
            continue;
        }
        for (k, c) in [z1, z2].into_iter().enumerate() {
            peak[k] = peak[k].max(rec[c].parse::<f64>().unwrap().abs());
        }
    }
    for k in 0..2 {
        let want = g[(k, 0)].norm();
        assert!((peak[k] / want - 1.0).abs() < 0.02, "z_{}: {} vs {want}", k + 1, peak[k]);
    }
}

#[test]
fn divergence_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("unstable.json");
    std::fs::write(
        &model,
        r#"{"schema": "actdeg-model", "version": 1, "nx": 1, "nu": 1, "nd": 1, "nz": 1,
            "a": [[1.0]], "bu": [[1.0]], "bd": [[1.0]], "cz": [[1.0]], "wd": [1.0]}"#,
    )
    .unwrap();
    let out = actdeg(&["simulate", s(&model), "--open-loop", "--out", s(&dir.path().join("t.csv"))]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

/// `verify` accepts whatever `synth` reports as a success.
#[test]
fn verify_accepts_synth_successes_on_random_plants() {
    let mut rng = common::rng(31);
    let dir = tempfile::tempdir().unwrap();
    let mut successes = 0;
    for case in 0..8 {
        let nx = rng.gen_range(1..=4);
        let nu = rng.gen_range(1..=2);
        let sys = common::plant(&mut rng, nx, nu, 1, 1);
        let model = dir.path().join(format!("m{case}.json"));
        ModelFile::from_plant(&format!("random-{case}"), &sys, &[1.0]).save(&model).unwrap();
        let ol = actdeg::lti::hinf_norm(&sys.a, &sys.bd, &sys.cz, 1e-9).unwrap().value;
        let norm = if case % 2 == 0 { "hinf" } else { "h2" };
        let gamma = format!("{}", 2.0 * ol.max(ol * ol));
        let report = dir.path().join(format!("r{case}.json"));
        let out = actdeg(&["synth", s(&model), "--norm", norm, "--gamma", &gamma, "--out", s(&report)]);
        if code(&out) != 0 {
            continue;
        }
        successes += 1;
        let out = actdeg(&["verify", s(&model), s(&report)]);
        assert_eq!(code(&out), 0, "case {case}: {}", String::from_utf8_lossy(&out.stdout));
    }
    assert!(successes >= 6, "only {successes} successful syntheses");
}
