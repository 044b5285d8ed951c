//! Serialized command results. The JSON layout is described by
//! `schema/output.schema.json`.

use duodiv::divergences::{DivergenceValue, Method, Value};
use duodiv::OracleConfig;
use serde::Serialize;

#[derive(Debug, Default, Serialize)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Minimality {
    pub perturbations: usize,
    pub violations: usize,
    pub smallest_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub inputs: Inputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_infinite: Option<bool>,
    pub abs_error_estimate: f64,
    pub infinite: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centroid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centroid_spec: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimality: Option<Minimality>,
    pub version: &'static str,
    pub oracle_config: OracleConfig,
}

impl Report {
    pub fn new(command: &'static str, inputs: Inputs, result: DivergenceValue, cfg: OracleConfig) -> Self {
        Self {
            command,
            inputs,
            value: result.finite(),
            method: result.method,
            oracle_value: None,
            oracle_infinite: None,
            abs_error_estimate: result.abs_error_estimate,
            infinite: result.is_infinite(),
            centroid: None,
            centroid_spec: None,
            minimality: None,
            version: duodiv::VERSION,
            oracle_config: cfg,
        }
    }

    pub fn with_oracle(mut self, oracle: DivergenceValue) -> Self {
        match oracle.value {
            Value::Finite(v) => {
                self.oracle_value = Some(v);
                self.abs_error_estimate = self.abs_error_estimate.max(oracle.abs_error_estimate);
                self.oracle_infinite = Some(false);
            }
            Value::Infinite => self.oracle_infinite = Some(true),
        }
        self
    }

    /// Header plus one row; empty cells for absent fields.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let method = match self.method {
            Method::ClosedForm => "closed_form",
            Method::Oracle => "oracle",
        };
        let p = self.inputs.p.clone().unwrap_or_else(|| self.inputs.points.join(" "));
        format!(
            "command,p,q,alpha,value,method,oracle_value,abs_error_estimate,infinite\n{},\"{}\",\"{}\",{},{},{},{},{:?},{}\n",
            self.command,
            p,
            self.inputs.q.clone().unwrap_or_default(),
            opt(self.inputs.alpha),
            opt(self.value),
            method,
            opt(self.oracle_value),
            self.abs_error_estimate,
            self.infinite
        )
    }
}
