//! Experiment execution and output emission.
//!
//! A run writes three files into the output directory:
//!
//! * the results CSV (`#schema=1` header; one row per checkpoint),
//! * a per-replication finals CSV (rep index, final regret), and
//! * a JSON manifest embedding the resolved spec, sufficient to reproduce
//!   the CSVs byte for byte.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so
//! re-parsing an emitted file recovers the exact bit patterns.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use gauss_ts::bandit::{run_replications_with, ReplicationAggregate};
use gauss_ts::theory;

use crate::config::{ExperimentSpec, ResolvedExperiment};
use crate::error::{HarnessError, Result};

pub const CSV_SCHEMA_LINE: &str = "#schema=1";
pub const RESULTS_HEADER: &str =
    "T,mean_regret,stderr,regret_per_log_t,lower_bound_coefficient,finite_time_bound";
pub const FINALS_HEADER: &str = "rep,final_regret";

/// Everything produced by one experiment run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub spec: ExperimentSpec,
    pub aggregate: ReplicationAggregate,
    /// Total asymptotic lower-bound coefficient, when the environment has a
    /// unique optimal arm.
    pub lower_bound_coefficient: Option<f64>,
    /// Finite-time upper bound per checkpoint, when `bounds.epsilon` is set.
    pub finite_time_bound: Option<Vec<f64>>,
    pub csv_path: PathBuf,
    pub finals_path: PathBuf,
    pub manifest_path: PathBuf,
    pub wall_time_secs: f64,
}

/// JSON manifest: the resolved spec plus provenance. Re-running the embedded
/// spec reproduces the CSVs exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: u32,
    pub name: String,
    pub version: String,
    pub jobs: usize,
    pub wall_time_secs: f64,
    pub outputs: ManifestOutputs,
    pub spec: ExperimentSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestOutputs {
    pub csv: String,
    pub finals: String,
    pub manifest: String,
}

/// Load a spec from a `.toml` experiment file or from the `spec` field of a
/// `.json` manifest.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().and_then(|s| s.to_str()) == Some("json") {
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))?;
        Ok(manifest.spec)
    } else {
        toml::from_str(&text)
            .map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))
    }
}

/// Run one experiment and write its outputs under `out_dir`.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path, jobs: usize) -> Result<RunOutput> {
    let ResolvedExperiment { spec, env, policy } = spec.resolve()?;
    let checkpoints = spec.checkpoints.clone().expect("resolved spec");

    let start = Instant::now();
    let aggregate = run_replications_with(
        &env,
        &policy,
        spec.horizon,
        spec.reps,
        spec.seed,
        &checkpoints,
        jobs,
    )
    .map_err(|e| HarnessError::runtime(e.to_string()))?;
    let wall_time_secs = start.elapsed().as_secs_f64();

    let lower_bound_coefficient = theory::lower_bound_coefficient(&env)
        .ok()
        .map(|r| r.total_log_t_coefficient);
    let finite_time_bound = match spec.bounds.epsilon {
        Some(eps) => Some(
            checkpoints
                .iter()
                .map(|&t| {
                    theory::finite_time_upper_bound(&env, spec.policy.alpha, eps, t)
                        .map_err(|e| HarnessError::runtime(e.to_string()))
                })
                .collect::<Result<Vec<f64>>>()?,
        ),
        None => None,
    };

    fs::create_dir_all(out_dir)
        .map_err(|e| HarnessError::runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let csv_path = out_dir.join(spec.output.csv.as_deref().expect("resolved spec"));
    let finals_path = out_dir.join(spec.output.finals.as_deref().expect("resolved spec"));
    let manifest_path = out_dir.join(spec.output.manifest.as_deref().expect("resolved spec"));

    let csv = render_results_csv(
        &aggregate,
        lower_bound_coefficient,
        finite_time_bound.as_deref(),
    );
    write_file(&csv_path, &csv)?;
    write_file(&finals_path, &render_finals_csv(&aggregate))?;

    let manifest = Manifest {
        schema: 1,
        name: spec.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        jobs,
        wall_time_secs,
        outputs: ManifestOutputs {
            csv: spec.output.csv.clone().expect("resolved spec"),
            finals: spec.output.finals.clone().expect("resolved spec"),
            manifest: spec.output.manifest.clone().expect("resolved spec"),
        },
        spec: spec.clone(),
    };
    let manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| HarnessError::runtime(e.to_string()))?;
    write_file(&manifest_path, &manifest_json)?;

    Ok(RunOutput {
        spec,
        aggregate,
        lower_bound_coefficient,
        finite_time_bound,
        csv_path,
        finals_path,
        manifest_path,
        wall_time_secs,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| HarnessError::runtime(format!("cannot write {}: {e}", path.display())))
}

/// Render the per-checkpoint results CSV. The two bound columns are empty
/// when unavailable (tied optimum, or no epsilon configured).
pub fn render_results_csv(
    agg: &ReplicationAggregate,
    lower_bound_coefficient: Option<f64>,
    finite_time_bound: Option<&[f64]>,
) -> String {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA_LINE);
    out.push('\n');
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for (i, &t) in agg.checkpoints.iter().enumerate() {
        let per_log_t = agg.mean_regret[i] / (t as f64).ln();
        let lower = match lower_bound_coefficient {
            Some(c) => format!("{c}"),
            None => String::new(),
        };
        let bound = match finite_time_bound {
            Some(b) => format!("{}", b[i]),
            None => String::new(),
        };
        writeln!(
            out,
            "{t},{},{},{per_log_t},{lower},{bound}",
            agg.mean_regret[i], agg.stderr[i]
        )
        .expect("writing to String cannot fail");
    }
    out
}

/// Render the per-replication finals CSV (rows in replication order).
pub fn render_finals_csv(agg: &ReplicationAggregate) -> String {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA_LINE);
    out.push('\n');
    out.push_str(FINALS_HEADER);
    out.push('\n');
    for (rep, &fin) in agg.per_rep_final.iter().enumerate() {
        writeln!(out, "{rep},{fin}").expect("writing to String cannot fail");
    }
    out
}

/// A parsed results CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultsRow {
    pub t: u64,
    pub mean_regret: f64,
    pub stderr: f64,
    pub regret_per_log_t: f64,
    pub lower_bound_coefficient: Option<f64>,
    pub finite_time_bound: Option<f64>,
}

/// Parse a results CSV produced by [`render_results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultsRow>> {
    let mut lines = text.lines();
    let schema = lines.next().unwrap_or_default();
    if schema != CSV_SCHEMA_LINE {
        return Err(HarnessError::runtime(format!(
            "unexpected schema line: {schema:?}"
        )));
    }
    let header = lines.next().unwrap_or_default();
    if header != RESULTS_HEADER {
        return Err(HarnessError::runtime(format!(
            "unexpected header: {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(HarnessError::runtime(format!(
                "row {ln}: expected 6 fields, got {}",
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| HarnessError::runtime(format!("row {ln}: {e}")))
        };
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse(s).map(Some)
            }
        };
        rows.push(ResultsRow {
            t: fields[0]
                .parse()
                .map_err(|e| HarnessError::runtime(format!("row {ln}: {e}")))?,
            mean_regret: parse(fields[1])?,
            stderr: parse(fields[2])?,
            regret_per_log_t: parse(fields[3])?,
            lower_bound_coefficient: opt(fields[4])?,
            finite_time_bound: opt(fields[5])?,
        });
    }
    Ok(rows)
}

/// Parse a finals CSV into the per-replication final regrets.
pub fn parse_finals_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_SCHEMA_LINE) {
        return Err(HarnessError::runtime("unexpected schema line".to_string()));
    }
    if lines.next() != Some(FINALS_HEADER) {
        return Err(HarnessError::runtime("unexpected header".to_string()));
    }
    let mut finals = Vec::new();
    for (ln, line) in lines.enumerate() {
        let (rep, fin) = line
            .split_once(',')
            .ok_or_else(|| HarnessError::runtime(format!("row {ln}: missing comma")))?;
        let rep: usize = rep
            .parse()
            .map_err(|e| HarnessError::runtime(format!("row {ln}: {e}")))?;
        if rep != ln {
            return Err(HarnessError::runtime(format!(
                "row {ln}: replication index {rep} out of order"
            )));
        }
        finals.push(
            fin.parse()
                .map_err(|e| HarnessError::runtime(format!("row {ln}: {e}")))?,
        );
    }
    Ok(finals)
}
