//! The JSON result document. It doubles as the control file read by
//! `simulate`, so it carries the full instance next to the segments.

use serde::{Deserialize, Serialize};
use syncopt::{PiecewiseControl, ProblemInstance, Segment, SingularData, SynthesisResult};

use crate::args::{build_instance, RawParams};
use crate::CliError;

pub const VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub alpha: f64,
    pub beta: f64,
    pub n: u32,
    pub sigma2: f64,
    pub umax: f64,
    pub v: f64,
    pub r0: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlDocument {
    pub version: String,
    pub instance: InstanceDoc,
    pub segments: Vec<Segment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub switch_times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminal_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular: Option<SingularData>,
}

impl InstanceDoc {
    pub fn from_instance(instance: &ProblemInstance) -> Self {
        let p = &instance.params;
        Self {
            alpha: p.alpha,
            beta: p.beta,
            n: p.n_clients,
            sigma2: p.sigma_sq,
            umax: p.u_max,
            v: p.drift,
            r0: instance.r0,
            horizon: instance.horizon,
        }
    }

    pub fn to_instance(&self) -> Result<ProblemInstance, CliError> {
        let params = RawParams {
            alpha: self.alpha,
            beta: self.beta,
            n: i64::from(self.n),
            sigma2: self.sigma2,
            umax: self.umax,
            v: self.v,
        }
        .build()?;
        build_instance(params, self.r0, self.horizon)
    }
}

impl ControlDocument {
    pub fn from_result(result: &SynthesisResult) -> Self {
        Self {
            version: VERSION.to_string(),
            instance: InstanceDoc::from_instance(&result.instance),
            segments: result.control.segments.clone(),
            regime: Some(result.regime.to_string()),
            switch_times: result.switch_times.clone(),
            cost: Some(result.cost),
            terminal_r: Some(result.terminal_r),
            singular: Some(result.singular),
        }
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Parses and validates a document, returning its instance and control.
    pub fn parse(text: &str) -> Result<(ProblemInstance, PiecewiseControl), CliError> {
        let doc: ControlDocument = serde_json::from_str(text)?;
        if doc.version != VERSION {
            return Err(CliError::Usage(format!(
                "unsupported control document version {:?}, expected {VERSION:?}",
                doc.version
            )));
        }
        let instance = doc.instance.to_instance()?;
        let control = PiecewiseControl::new(doc.segments);
        control.validate(&instance)?;
        Ok((instance, control))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use syncopt::ModelParams;

    #[test]
    fn round_trip_is_exact() {
        let params = ModelParams::new(0.3, 1.7, 3, 0.9, 2.5).unwrap().with_drift(1.1).unwrap();
        let instance = ProblemInstance::new(params, 0.1, 2.0 / 3.0).unwrap();
        let result = syncopt::synthesis::synthesize(&instance).unwrap();
        let text = ControlDocument::from_result(&result).to_json().unwrap();
        let (back_instance, back_control) = ControlDocument::parse(&text).unwrap();
        assert_eq!(back_instance, instance);
        assert_eq!(back_control, result.control);
    }

    #[test]
    fn wrong_version_rejected() {
        let text = r#"{"version":"2","instance":{"alpha":1,"beta":1,"n":1,"sigma2":1,"umax":1,"v":1,"r0":0,"horizon":1},"segments":[{"t_start":0,"t_end":1,"u":0}]}"#;
        assert!(ControlDocument::parse(text).unwrap_err().to_string().contains("version"));
        let ok = text.replace("\"2\"", "\"1\"");
        assert!(ControlDocument::parse(&ok).is_ok());
    }
}
