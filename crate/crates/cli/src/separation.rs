//! The prior-separation experiment: the two-arm known-arm configuration run
//! for several prior exponents, with fitted regret growth exponents.
//!
//! Conservative priors (`alpha < 0`) keep `Regret(T) / ln T` bounded;
//! non-negative exponents do not, and `alpha > 0` shows outright polynomial
//! growth. The fitted exponent is the least-squares slope of
//! `ln(mean regret)` against `ln T` over the top two decades of checkpoints.

use std::path::Path;

use gauss_ts::bandit::ReplicationAggregate;

use crate::config::known_arm_preset;
use crate::error::{HarnessError, Result};
use crate::runner::{run_experiment, RunOutput};

#[derive(Debug, Clone)]
pub struct SeparationConfig {
    pub alphas: Vec<f64>,
    pub horizon: u64,
    pub reps: u64,
    pub seed: u64,
    /// Known mean of arm 2.
    pub mu2: f64,
    /// True variance of arm 2 (never enters the policy's decisions in this
    /// configuration, only the lower-bound coefficient).
    pub sigma2_2: f64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        Self {
            alphas: vec![-0.5, 0.0, 0.5],
            horizon: 100_000,
            reps: 2000,
            seed: 1,
            mu2: -0.5,
            sigma2_2: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlphaResult {
    pub alpha: f64,
    pub run: RunOutput,
    /// Least-squares slope of ln(mean regret) vs ln T over the top two
    /// decades.
    pub exponent: f64,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub results: Vec<AlphaResult>,
}

/// Fitted growth exponent over checkpoints in `[horizon / 100, horizon]`.
/// Checkpoints with non-positive mean regret are skipped.
pub fn fitted_exponent(agg: &ReplicationAggregate, horizon: u64) -> f64 {
    let lo = horizon / 100;
    let points: Vec<(f64, f64)> = agg
        .checkpoints
        .iter()
        .zip(&agg.mean_regret)
        .filter(|&(&t, &m)| t >= lo && m > 0.0)
        .map(|(&t, &m)| ((t as f64).ln(), m.ln()))
        .collect();
    least_squares_slope(&points)
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    sxy / sxx
}

/// File-name-safe rendering of a prior exponent ("-0.5" -> "m0.5").
pub fn alpha_tag(alpha: f64) -> String {
    if alpha < 0.0 {
        format!("m{}", -alpha)
    } else {
        format!("{alpha}")
    }
}

/// Run the known-arm experiment once per alpha. Every alpha uses the same
/// seed, horizon, and replication count; one results CSV is written per
/// alpha.
pub fn run_separation(
    cfg: &SeparationConfig,
    out_dir: &Path,
    jobs: usize,
) -> Result<SeparationReport> {
    if cfg.alphas.is_empty() {
        return Err(HarnessError::config("alphas must be nonempty"));
    }
    let mut results = Vec::new();
    for &alpha in &cfg.alphas {
        let spec = known_arm_preset(
            format!("separation_alpha_{}", alpha_tag(alpha)),
            alpha,
            cfg.mu2,
            cfg.sigma2_2,
            cfg.horizon,
            cfg.reps,
            cfg.seed,
        );
        let run = run_experiment(&spec, out_dir, jobs)?;
        let exponent = fitted_exponent(&run.aggregate, cfg.horizon);
        results.push(AlphaResult {
            alpha,
            run,
            exponent,
        });
    }
    Ok(SeparationReport { results })
}

/// Render the stdout summary table.
pub fn render_summary(report: &SeparationReport) -> String {
    let mut out = String::new();
    out.push_str("alpha     final_mean_regret  regret_per_log_t  fitted_exponent\n");
    for r in &report.results {
        let agg = &r.run.aggregate;
        let last = agg.checkpoints.len() - 1;
        let per_log_t = agg.mean_regret[last] / (agg.checkpoints[last] as f64).ln();
        out.push_str(&format!(
            "{:<8}  {:<17.4}  {:<16.4}  {:.4}\n",
            r.alpha, agg.mean_regret[last], per_log_t, r.exponent
        ));
    }
    out
}

/// Render the summary as CSV.
pub fn render_summary_csv(report: &SeparationReport) -> String {
    let mut out = String::new();
    out.push_str(crate::runner::CSV_SCHEMA_LINE);
    out.push('\n');
    out.push_str("alpha,final_mean_regret,final_stderr,regret_per_log_t,fitted_exponent\n");
    for r in &report.results {
        let agg = &r.run.aggregate;
        let last = agg.checkpoints.len() - 1;
        let per_log_t = agg.mean_regret[last] / (agg.checkpoints[last] as f64).ln();
        out.push_str(&format!(
            "{},{},{},{per_log_t},{}\n",
            r.alpha, agg.mean_regret[last], agg.stderr[last], r.exponent
        ));
    }
    out
}
