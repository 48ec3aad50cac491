//! Corpus generation, experiment orchestration and machine-readable output.

mod config;
mod corpus;

pub use config::{RunConfig, DESK_SCALES};
pub use corpus::{generate_corpus, symbol, Corpus, CorpusEntry, CorpusSpec, Generator};

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deviation::{self, DeviationError, DeviationReport};
use crate::estimator::{approximate, EstimateReport};
use crate::grids::InputPair;
use crate::sparse::SparseError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad spec: {0}")]
    BadSpec(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Estimator(#[from] SparseError),
    #[error(transparent)]
    Deviation(#[from] DeviationError),
}

/// One corpus entry's result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub index: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub planted: Option<u64>,
    pub relative_error: Option<f64>,
    /// Present only when timing is enabled.
    pub elapsed_ms: Option<f64>,
    pub report: EstimateReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pairs: usize,
    pub dispatched: usize,
    pub median_relative_error: Option<f64>,
    pub mean_relative_error: Option<f64>,
    pub total_queries: u64,
    /// Sum over trials of the dense sparse-edge count.
    pub total_dense_edges: u64,
    pub query_fraction: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub mode: crate::grids::Kind,
    pub seed: u64,
    pub config: String,
    pub summary: Summary,
    pub reports: Vec<PairReport>,
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let k = xs.len();
    Some(if k % 2 == 1 { xs[k / 2] } else { (xs[k / 2 - 1] + xs[k / 2]) / 2.0 })
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs every corpus entry through [`approximate`]; output order follows
/// the corpus regardless of which worker finished first.
pub fn run_experiment(corpus: &Corpus, config: &RunConfig) -> Result<ExperimentReport, BenchError> {
    config.validate()?;
    let start = Instant::now();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<PairReport, SparseError>>>> =
        Mutex::new((0..corpus.entries.len()).map(|_| None).collect());
    let job = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(entry) = corpus.entries.get(i) else { break };
        let t0 = Instant::now();
        let pair = InputPair::new(entry.x.clone(), entry.y.clone());
        let out = approximate(&pair, config.mode, &config.estimator).map(|report| PairReport {
            index: i,
            n_x: entry.x.len(),
            n_y: entry.y.len(),
            planted: entry.planted,
            relative_error: report.relative_error(),
            elapsed_ms: config.timing.then(|| t0.elapsed().as_secs_f64() * 1e3),
            report,
        });
        slots.lock().unwrap()[i] = Some(out);
    };
    let w = workers().min(corpus.entries.len()).max(1);
    if w == 1 {
        job();
    } else {
        std::thread::scope(|sc| {
            for _ in 0..w {
                sc.spawn(job);
            }
        });
    }
    let reports = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every entry is processed"))
        .collect::<Result<Vec<_>, _>>()?;

    let errs: Vec<f64> = reports.iter().filter_map(|r| r.relative_error).collect();
    let total_queries = reports.iter().map(|r| r.report.queries).sum();
    let total_dense: u64 = reports.iter().map(|r| r.report.dense_edges * r.report.trials.len() as u64).sum();
    let summary = Summary {
        pairs: reports.len(),
        dispatched: reports.iter().filter(|r| r.report.dispatched_small).count(),
        mean_relative_error: (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64),
        median_relative_error: median(errs),
        total_queries,
        total_dense_edges: total_dense,
        query_fraction: (total_dense > 0).then(|| total_queries as f64 / total_dense as f64),
        wall_time_ms: config.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        mode: config.mode,
        seed: config.seed(),
        // output paths are left out so the report does not depend on where it goes
        config: RunConfig { output: None, csv: None, ..config.clone() }.to_text(),
        summary,
        reports,
    })
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise") + "\n"
    }

    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| BenchError::Config(format!("csv: {e}"));
        w.write_record([
            "schema_version",
            "index",
            "mode",
            "n_x",
            "n_y",
            "planted",
            "estimate",
            "exact",
            "relative_error",
            "queries",
            "dense_edges",
            "repeats",
            "dispatched_small",
            "elapsed_ms",
        ])
        .map_err(csv_err)?;
        let o = |v: Option<String>| v.unwrap_or_default();
        for r in &self.reports {
            w.write_record([
                SCHEMA_VERSION.to_string(),
                r.index.to_string(),
                r.report.mode.to_string(),
                r.n_x.to_string(),
                r.n_y.to_string(),
                o(r.planted.map(|v| v.to_string())),
                r.report.estimate.to_string(),
                o(r.report.exact.map(|v| v.to_string())),
                o(r.relative_error.map(|v| v.to_string())),
                r.report.queries.to_string(),
                r.report.dense_edges.to_string(),
                r.report.repeats.to_string(),
                r.report.dispatched_small.to_string(),
                o(r.elapsed_ms.map(|v| v.to_string())),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Config(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn write_outputs(&self, json: Option<&Path>, csv: Option<&Path>) -> Result<(), BenchError> {
        let io = |p: &Path, e| BenchError::Io { path: p.display().to_string(), source: e };
        if let Some(p) = json {
            std::fs::write(p, self.to_json()).map_err(|e| io(p, e))?;
        }
        if let Some(p) = csv {
            std::fs::write(p, self.to_csv()?).map_err(|e| io(p, e))?;
        }
        Ok(())
    }
}

/// Deviation report as emitted by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationOutput {
    pub schema_version: u32,
    pub m: usize,
    pub s: usize,
    #[serde(flatten)]
    pub report: DeviationReport,
}

/// Parses one number per line; blank lines and `#` comments are skipped.
pub fn parse_sequence(text: &str) -> Result<Vec<f64>, BenchError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<f64>().map_err(|_| BenchError::BadSpec(format!("not a number: `{l}`"))))
        .collect()
}

/// Tree deviation of `a`, with the scaled total against `b` (all ones if absent).
pub fn deviation_report(a: &[f64], b: Option<&[f64]>, m: usize) -> Result<DeviationOutput, BenchError> {
    let s = deviation::scale_count(a.len(), m)?;
    let mut report = deviation::treemd(a, m, None)?;
    let ones = vec![1.0; a.len()];
    report.scaled_total = Some(deviation::treerd(a, b.unwrap_or(&ones), m, None)?);
    Ok(DeviationOutput { schema_version: SCHEMA_VERSION, m, s, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus() {
        let c = Corpus { entries: vec![], generator: Generator::File, alphabet_size: 0, seed: 0 };
        let r = run_experiment(&c, &RunConfig::default()).unwrap();
        assert_eq!(r.summary.pairs, 0);
        assert!(r.reports.is_empty());
        assert_eq!(r.summary.median_relative_error, None);
    }

    #[test]
    fn identical_pairs_have_zero_error() {
        let spec = CorpusSpec { generator: Generator::PlantedEd, pairs: 4, length: 64, alphabet_size: 4, k: 0, seed: 3 };
        let c = generate_corpus(&spec).unwrap();
        let mut cfg = RunConfig::default();
        cfg.estimator.compute_exact = true;
        let r = run_experiment(&c, &cfg).unwrap();
        assert!(r.reports.iter().all(|p| p.relative_error == Some(0.0)));
        assert!(r.to_csv().unwrap().lines().count() == 5);
    }

    #[test]
    fn appendix_sequence() {
        let a = parse_sequence("1\n2\n2\n4\n2\n4\n4\n8\n").unwrap();
        let out = deviation_report(&a, None, 2).unwrap();
        assert_eq!(out.report.scaled_total, Some(8.0));
        assert_eq!(out.s, 3);
    }
}
