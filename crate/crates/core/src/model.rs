//! JSON model files.
//!
//! ```json
//! {
//!   "schema": "actdeg-model", "version": 1, "name": "f16-longitudinal",
//!   "nx": 4, "nu": 3, "nd": 1, "nz": 2,
//!   "a": [[...], ...], "bu": [[...]], "bd": [[...]], "cz": [[...]], "dd": [[...]],
//!   "wd": [0.01], "wz": [11.46, 0.1], "wz_applied": false,
//!   "labels": {"states": [...], "inputs": [...], "disturbances": [...], "outputs": [...]},
//!   "metadata": {...}
//! }
//! ```
//!
//! Matrices are row-major nested arrays. `cz` is stored in physical units;
//! when `wz` is present and `wz_applied` is false the loaded plant uses
//! `diag(wz) * cz`. `dd` may be omitted (zero).

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::rows::{from_rows, to_rows, with_shape};

pub const MODEL_SCHEMA: &str = "actdeg-model";
pub const MODEL_VERSION: u32 = 1;

fn model_schema() -> String {
    MODEL_SCHEMA.to_string()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub disturbances: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default = "model_schema")]
    pub schema: String,
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub nx: usize,
    pub nu: usize,
    pub nd: usize,
    pub nz: usize,
    pub a: Vec<Vec<f64>>,
    pub bu: Vec<Vec<f64>>,
    pub bd: Vec<Vec<f64>>,
    pub cz: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dd: Option<Vec<Vec<f64>>>,
    pub wd: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wz: Option<Vec<f64>>,
    #[serde(default)]
    pub wz_applied: bool,
    #[serde(default)]
    pub labels: Labels,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl ModelFile {
    /// Wraps a plant; `cz` is stored as given and no `wz` is attached.
    pub fn from_plant(name: &str, sys: &StateSpace, wd: &[f64]) -> Self {
        Self {
            schema: model_schema(),
            version: MODEL_VERSION,
            name: name.to_string(),
            nx: sys.nx(),
            nu: sys.nu(),
            nd: sys.nd(),
            nz: sys.nz(),
            a: to_rows(&sys.a),
            bu: to_rows(&sys.bu),
            bd: to_rows(&sys.bd),
            cz: to_rows(&sys.cz),
            dd: Some(to_rows(&sys.dd)),
            wd: wd.to_vec(),
            wz: None,
            wz_applied: false,
            labels: Labels::default(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::json("model file", e))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("model file", e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != MODEL_SCHEMA {
            return Err(Error::InvalidInput(format!(
                "unexpected schema '{}', expected '{MODEL_SCHEMA}'",
                self.schema
            )));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported model version {}",
                self.version
            )));
        }
        self.plant()?;
        self.wd_vector()?;
        let check = |name: &str, got: usize, want: usize| {
            if got != 0 && got != want {
                Err(Error::InvalidInput(format!("{got} {name} labels, expected {want}")))
            } else {
                Ok(())
            }
        };
        check("state", self.labels.states.len(), self.nx)?;
        check("input", self.labels.inputs.len(), self.nu)?;
        check("disturbance", self.labels.disturbances.len(), self.nd)?;
        check("output", self.labels.outputs.len(), self.nz)?;
        Ok(())
    }

    /// The plant seen by synthesis: `wz` applied to `cz` unless already baked in.
    pub fn plant(&self) -> Result<StateSpace> {
        let (nx, nu, nd, nz) = (self.nx, self.nu, self.nd, self.nz);
        let a = with_shape(from_rows(&self.a, None)?, nx, nx, "a")?;
        let bu = with_shape(from_rows(&self.bu, None)?, nx, nu, "bu")?;
        let bd = with_shape(from_rows(&self.bd, None)?, nx, nd, "bd")?;
        let mut cz = with_shape(from_rows(&self.cz, None)?, nz, nx, "cz")?;
        let dd = match &self.dd {
            Some(rows) => with_shape(from_rows(rows, None)?, nz, nd, "dd")?,
            None => DMatrix::zeros(nz, nd),
        };
        if let Some(wz) = &self.wz {
            if wz.len() != nz {
                return Err(Error::InvalidInput(format!(
                    "wz has {} entries, expected {nz}",
                    wz.len()
                )));
            }
            if !self.wz_applied {
                for (i, w) in wz.iter().enumerate() {
                    cz.row_mut(i).scale_mut(*w);
                }
            }
        }
        StateSpace::new(a, bu, bd, cz, dd)
    }

    pub fn wd_vector(&self) -> Result<DVector<f64>> {
        if self.wd.len() != self.nd {
            return Err(Error::InvalidInput(format!(
                "wd has {} entries, expected {}",
                self.wd.len(),
                self.nd
            )));
        }
        if self.wd.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidInput("wd entries must be positive".into()));
        }
        Ok(DVector::from_vec(self.wd.clone()))
    }

    pub fn input_labels(&self) -> Option<&[String]> {
        (!self.labels.inputs.is_empty()).then_some(self.labels.inputs.as_slice())
    }
}
