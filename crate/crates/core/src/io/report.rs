//! Report files: one `# ` line holding a compact JSON provenance object,
//! followed by a CSV table with a header row.
//!
//! Provenance keys are sorted and floats are written in shortest
//! round-trip form, so identical inputs give identical bytes.

use std::io::{BufRead, BufReader, Read, Write};

use serde_json::{json, Map, Value};

use crate::baselines::{MseConfig, MseRow, NoisyDistanceMatrix};
use crate::error::{Error, Result};
use crate::eval::{AuditConfig, AuditReport, KMeansConfig};
use crate::sketch::PublishedBundle;

pub const TOOL_NAME: &str = "dpsketch";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub provenance: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    /// A report whose provenance starts with tool name, version and `command`.
    pub fn new(command: &str, columns: &[&str]) -> Self {
        let mut provenance = Map::new();
        provenance.insert("tool".into(), json!(TOOL_NAME));
        provenance.insert("version".into(), json!(TOOL_VERSION));
        provenance.insert("command".into(), json!(command));
        Self {
            provenance,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: Value) -> Self {
        self.provenance.insert(key.into(), value);
        self
    }

    pub fn push_row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows.push(cells.into_iter().map(|c| c.to_string()).collect());
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let line = serde_json::to_string(&self.provenance)?;
        writeln!(out, "# {line}")?;
        let mut w = csv::WriterBuilder::new().flexible(false).from_writer(&mut out);
        w.write_record(&self.columns)
            .map_err(|e| Error::Format(e.to_string()))?;
        for row in &self.rows {
            if row.len() != self.columns.len() {
                return Err(Error::Format(format!(
                    "report row has {} cells, header has {}",
                    row.len(),
                    self.columns.len()
                )));
            }
            w.write_record(row).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(buf)
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let json_text = first
            .strip_suffix('\n')
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| Error::Format("report must start with a `# {json}` line".into()))?;
        let provenance: Map<String, Value> = serde_json::from_str(json_text)?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
        let mut records = rdr.records();
        let columns: Vec<String> = records
            .next()
            .ok_or_else(|| Error::Format("report has no header row".into()))?
            .map_err(|e| Error::Format(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let rows = records
            .map(|r| {
                r.map(|rec| rec.iter().map(str::to_string).collect())
                    .map_err(|e| Error::Format(e.to_string()))
            })
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Self {
            provenance,
            columns,
            rows,
        })
    }

    /// Cell `column` of row `row`, parsed as `f64`.
    pub fn number(&self, row: usize, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|name| name == column)?;
        self.rows.get(row)?.get(c)?.parse().ok()
    }
}

fn bundle_params(bundle: &PublishedBundle) -> Value {
    json!({
        "d": bundle.d(),
        "k": bundle.k(),
        "epsilon": bundle.budget.epsilon(),
        "delta": bundle.budget.delta(),
        "sigma": bundle.noise.sigma(),
        "matrix_seed": bundle.projection.seed(),
        "noise_scale": bundle.calibration.noise_scale,
        "users": bundle.sketches.len(),
    })
}

/// MSE sweep table.
pub fn mse_report(config: &MseConfig, rows: &[MseRow]) -> Report {
    let mechanisms: Vec<&str> = config.mechanisms.iter().map(|m| m.name()).collect();
    let mut r = Report::new(
        "compare-mse",
        &["mechanism", "h", "trials", "mse", "rmse", "bias", "variance"],
    )
    .param("mechanisms", json!(mechanisms))
    .param("d", json!(config.d))
    .param("k", json!(config.k))
    .param("epsilon", json!(config.budget.epsilon()))
    .param("delta", json!(config.budget.delta()))
    .param("distance_grid", json!(config.distance_grid))
    .param("trials", json!(config.trials))
    .param("seed", json!(config.seed))
    .param("noise_scale", json!(config.noise_scale))
    .param("population", json!(config.population));
    for row in rows {
        r.push_row([
            row.mechanism.name().to_string(),
            row.h.to_string(),
            row.trials.to_string(),
            row.mse.to_string(),
            row.mse.sqrt().to_string(),
            row.bias.to_string(),
            row.variance.to_string(),
        ]);
    }
    r
}

/// One row of a k-means evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun {
    pub seed: u64,
    pub ari: f64,
    pub inertia: f64,
    pub iterations: usize,
}

pub fn kmeans_report(bundle: &PublishedBundle, config: &KMeansConfig, runs: &[KMeansRun]) -> Report {
    let mut r = Report::new("eval-kmeans", &["seed", "ari", "inertia", "iterations"])
        .param("bundle", bundle_params(bundle))
        .param("clusters", json!(config.clusters))
        .param("max_iters", json!(config.max_iters))
        .param("n_init", json!(config.n_init))
        .param("seed", json!(config.seed))
        .param("runs", json!(runs.len()));
    for run in runs {
        r.push_row([
            run.seed.to_string(),
            run.ari.to_string(),
            run.inertia.to_string(),
            run.iterations.to_string(),
        ]);
    }
    if !runs.is_empty() {
        let n = runs.len() as f64;
        let mean_ari = runs.iter().map(|x| x.ari).sum::<f64>() / n;
        let mean_inertia = runs.iter().map(|x| x.inertia).sum::<f64>() / n;
        r.push_row([
            "mean".to_string(),
            mean_ari.to_string(),
            mean_inertia.to_string(),
            String::new(),
        ]);
    }
    r
}

pub fn knn_report(bundle: &PublishedBundle, m: usize, recall: f64) -> Report {
    let mut r = Report::new("eval-knn", &["m", "recall"])
        .param("bundle", bundle_params(bundle))
        .param("m", json!(m));
    r.push_row([m.to_string(), recall.to_string()]);
    r
}

pub fn audit_report(config: &AuditConfig, d: usize, bit: usize, report: &AuditReport) -> Report {
    let mut r = Report::new(
        "audit",
        &[
            "mechanism",
            "epsilon",
            "delta",
            "samples",
            "violations",
            "violation_rate",
            "allowed_rate",
            "analytic_rate",
            "max_loss",
            "sigma",
            "decision",
        ],
    )
    .param("mechanism", json!(config.mechanism.name()))
    .param("d", json!(d))
    .param("k", json!(config.k))
    .param("flipped_bit", json!(bit))
    .param("epsilon", json!(config.budget.epsilon()))
    .param("delta", json!(config.budget.delta()))
    .param("noise_scale", json!(config.noise_scale))
    .param("matrix_peers", json!(config.matrix_peers))
    .param("samples", json!(config.n_samples))
    .param("seed", json!(config.seed));
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    r.push_row([
        report.mechanism.name().to_string(),
        report.epsilon_target.to_string(),
        report.delta_target.to_string(),
        report.n_samples.to_string(),
        report.violations.to_string(),
        report.empirical_violation_rate.to_string(),
        report.allowed_rate.to_string(),
        opt(report.analytic_violation_rate),
        report.max_loss.to_string(),
        opt(report.sigma),
        if report.passed { "pass" } else { "fail" }.to_string(),
    ]);
    r
}

pub fn matrix_report(matrix: &NoisyDistanceMatrix, seed: u64) -> Report {
    let mut columns = vec!["user_id"];
    columns.extend(matrix.user_ids.iter().map(String::as_str));
    let mut r = Report::new("matrix-noise", &columns)
        .param("epsilon", json!(matrix.epsilon))
        .param("laplace_scale", json!(matrix.laplace_scale))
        .param("users", json!(matrix.n()))
        .param("seed", json!(seed));
    for (i, id) in matrix.user_ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend((0..matrix.n()).map(|j| matrix.get(i, j).to_string()));
        r.push_row(row);
    }
    r
}

/// Per-user distances to one or more attribute query vectors.
pub fn query_report(bundle: &PublishedBundle, rows: &[(String, String, f64)]) -> Report {
    let mut r =
        Report::new("query", &["user_id", "query_id", "estimate", "clamped"]).param("bundle", bundle_params(bundle));
    for (user, query, est) in rows {
        r.push_row([user.clone(), query.clone(), est.to_string(), est.max(0.0).to_string()]);
    }
    r
}
