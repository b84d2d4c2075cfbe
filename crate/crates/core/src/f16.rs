//! Bundled F-16 longitudinal model, linearized at 10000 ft and 900 ft/s
//! steady level flight.
//!
//! States `[theta, Vt, alpha, q]`, inputs `[T, delta_e, delta_lef]`, a single
//! gust disturbance on the velocity equation, and performance outputs
//! `Wz [theta - alpha; Vt]` with `Wz = diag(11.46, 0.1)`.

use std::collections::BTreeMap;

use nalgebra::{dmatrix, DMatrix};
use serde_json::json;

use crate::lti::StateSpace;
use crate::model::{Labels, ModelFile, MODEL_SCHEMA, MODEL_VERSION};
use crate::rows::to_rows;

pub const WD: f64 = 0.01;
pub const WZ: [f64; 2] = [11.46, 0.1];

pub fn a() -> DMatrix<f64> {
    dmatrix![
        0.0,      0.0,     0.0,      1.0;
        -32.1699, -0.0358, -131.646, -3.1099;
        0.0,      -0.0002, -1.5333,  0.9281;
        0.0,      0.0003,  -4.6719,  -1.9076
    ]
}

pub fn bu() -> DMatrix<f64> {
    dmatrix![
        0.0,    0.0,     0.0;
        0.0016, 0.0525,  0.1574;
        -0.0,   -0.0031, 0.0008;
        0.0,    -0.4503, -0.0614
    ]
}

pub fn bd() -> DMatrix<f64> {
    dmatrix![0.0; 1.0; 0.0; 0.0]
}

/// Output map before `Wz` scaling: flight-path angle `theta - alpha` and `Vt`.
pub fn cz_physical() -> DMatrix<f64> {
    dmatrix![
        1.0, 0.0, -1.0, 0.0;
        0.0, 1.0, 0.0,  0.0
    ]
}

/// Plant with `Wz` applied to the output map.
pub fn plant() -> StateSpace {
    let mut cz = cz_physical();
    for (i, w) in WZ.iter().enumerate() {
        cz.row_mut(i).scale_mut(*w);
    }
    StateSpace::new(a(), bu(), bd(), cz, DMatrix::zeros(2, 1)).expect("bundled F-16 model is consistent")
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn model_file() -> ModelFile {
    let mut metadata = BTreeMap::new();
    metadata.insert(
        "description".into(),
        json!("F-16 longitudinal dynamics linearized at 10000 ft, 900 ft/s steady level flight; gust disturbance on Vt"),
    );
    metadata.insert(
        "trim".into(),
        json!({
            "altitude_ft": 10000.0,
            "theta_deg": 5.95,
            "vt_ft_s": 900.0,
            "alpha_deg": 5.95,
            "q_deg_s": 7.85,
            "thrust_lb": 10461.84,
            "elevator_deg": -3.82,
            "lef_deg": 12.42
        }),
    );
    metadata.insert("units".into(), json!({"time": "s", "frequency": "rad/s"}));

    ModelFile {
        schema: MODEL_SCHEMA.to_string(),
        version: MODEL_VERSION,
        name: "f16-longitudinal".into(),
        nx: 4,
        nu: 3,
        nd: 1,
        nz: 2,
        a: to_rows(&a()),
        bu: to_rows(&bu()),
        bd: to_rows(&bd()),
        cz: to_rows(&cz_physical()),
        dd: Some(vec![vec![0.0], vec![0.0]]),
        wd: vec![WD],
        wz: Some(WZ.to_vec()),
        wz_applied: false,
        labels: Labels {
            states: strings(&["theta", "Vt", "alpha", "q"]),
            inputs: strings(&["T", "delta_e", "delta_lef"]),
            disturbances: strings(&["gust"]),
            outputs: strings(&["flight_path_angle", "Vt"]),
        },
        metadata,
    }
}
