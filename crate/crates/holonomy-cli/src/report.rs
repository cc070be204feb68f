//! Run reports and their JSON/CSV renderings.

use serde::Serialize;

use holonomy_core::io::fmt_f64;
use holonomy_core::npc::Classification;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub id: String,
    pub n: usize,
    pub k: usize,
    pub weights: Vec<f64>,
    pub per_level: Vec<f64>,
    pub weighted: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<Classification>,
    pub steps: usize,
    pub runtime_ms: u128,
}

impl RunReport {
    pub fn csv_header(k: usize, param: Option<&str>) -> String {
        let mut cols: Vec<String> = Vec::new();
        if let Some(p) = param {
            cols.push(p.to_string());
        }
        cols.push("n".into());
        cols.push("k".into());
        for a in 1..=k {
            cols.push(format!("weight_{a}"));
        }
        for a in 1..=k {
            cols.push(format!("phase_{a}"));
        }
        cols.extend(
            ["weighted", "area", "residual", "steps", "runtime_ms"]
                .iter()
                .map(|s| s.to_string()),
        );
        cols.join(",")
    }

    pub fn csv_row(&self, param: Option<f64>) -> String {
        let mut cols: Vec<String> = Vec::new();
        if let Some(p) = param {
            cols.push(fmt_f64(p));
        }
        cols.push(self.n.to_string());
        cols.push(self.k.to_string());
        for w in &self.weights {
            cols.push(fmt_f64(*w));
        }
        for p in &self.per_level {
            cols.push(fmt_f64(*p));
        }
        cols.push(fmt_f64(self.weighted));
        cols.push(self.area.map(fmt_f64).unwrap_or_default());
        cols.push(self.residual.map(fmt_f64).unwrap_or_default());
        cols.push(self.steps.to_string());
        cols.push(self.runtime_ms.to_string());
        cols.join(",")
    }
}
