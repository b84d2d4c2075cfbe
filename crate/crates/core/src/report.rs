//! Versioned JSON run reports.
//!
//! ```json
//! {
//!   "schema": "actdeg-report", "version": 1, "tool_version": "0.1.0",
//!   "model": "f16-longitudinal",
//!   "spec": {"norm": "hinf", "gamma": 0.5, "lambda_a": 1.0, ...},
//!   "status": "optimal",
//!   "result": {"status": ..., "point": {"k": [[...]], "v": ..., "degradation": ...},
//!              "verification": {"kind": "hinf", "value": ..., "method": ...},
//!              "diagnostics": {...}},
//!   "degradation": {"actuators": [{"label": "T", "omega_c": ..., "xf_gain": ..., "noise_scale": ...}],
//!                   "gamma_xf": ..., "objective": ...},
//!   "validation": {"passed": true, "checks": [...]},
//!   "timing": {"build_s": ..., "solve_s": ..., "validate_s": ..., "total_s": ...}
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::degradation::DegradationReport;
use crate::error::{Error, Result};
use crate::synthesis::{SynthesisResult, SynthesisSpec, SynthesisStatus, ValidationReport};

pub const REPORT_SCHEMA: &str = "actdeg-report";
pub const REPORT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub build_s: f64,
    pub solve_s: f64,
    pub validate_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub version: u32,
    pub tool_version: String,
    #[serde(default)]
    pub model: String,
    pub spec: SynthesisSpec,
    pub status: SynthesisStatus,
    pub result: SynthesisResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degradation: Option<DegradationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(default)]
    pub timing: Timing,
}

impl RunReport {
    pub fn new(model: &str, spec: SynthesisSpec, result: SynthesisResult) -> Self {
        Self {
            schema: REPORT_SCHEMA.to_string(),
            version: REPORT_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            model: model.to_string(),
            spec,
            status: result.status,
            result,
            degradation: None,
            validation: None,
            timing: Timing::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text).map_err(|e| Error::json("report", e))?;
        r.check_schema()?;
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let r: Self = serde_json::from_str(&text)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        r.check_schema()?;
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("report", e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    fn check_schema(&self) -> Result<()> {
        if self.schema != REPORT_SCHEMA {
            return Err(Error::InvalidInput(format!(
                "unexpected schema '{}', expected '{REPORT_SCHEMA}'",
                self.schema
            )));
        }
        if self.version != REPORT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported report version {}",
                self.version
            )));
        }
        Ok(())
    }
}
