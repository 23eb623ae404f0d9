//! Posterior over an arm's mean under the prior `pi(mu, sigma^2) ~
//! (sigma^2)^(-1-alpha)`.
//!
//! Given `n` observations with sample mean `m` and centered sum of squares
//! `v`, the standardized mean `sqrt(n (n + 2 alpha - 1) / v) (mu - m)` is
//! Student-t distributed with `n + 2 alpha - 1` degrees of freedom. This
//! module exposes exact posterior sampling, the exact upper-tail probability,
//! closed-form envelopes for that tail, and an independent quadrature route
//! used to cross-check the exact one.

use thiserror::Error;

use crate::special_fn;
use crate::stats_core::{
    sample_student_t, student_t_pdf, student_t_sf, RngStream, StatsError, SufficientStats,
};

/// Errors from posterior computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PosteriorError {
    #[error("insufficient data: n={n} pulls, but the prior requires n0={n0}")]
    InsufficientData { n: u64, n0: u64 },
    #[error("degenerate variance: ssq={ssq} is below the threshold {threshold}")]
    DegenerateVariance { ssq: f64, threshold: f64 },
    #[error("tail bounds require mu above the sample mean (mu={mu}, mean={mean})")]
    MeanNotExceeded { mu: f64, mean: f64 },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

type Result<T> = std::result::Result<T, PosteriorError>;

/// Forced initial pulls for a prior exponent `alpha`:
/// `n0 = max(2, 3 - ceil(2 alpha))`. This keeps the posterior proper with at
/// least two degrees of freedom margin.
pub fn derive_n0(alpha: f64) -> u64 {
    assert!(alpha.is_finite(), "alpha must be finite (got {alpha})");
    let c = (2.0 * alpha).ceil() as i64;
    (3 - c).max(2) as u64
}

/// Prior exponent `alpha` together with its derived initialization count.
///
/// `alpha = -1, -1/2, 0, 1/2` correspond to priors uniform in `sigma^2`,
/// uniform in `sigma`, the reference prior, and the Jeffreys prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorAlpha {
    alpha: f64,
    n0: u64,
}

impl PriorAlpha {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            n0: derive_n0(alpha),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    /// Posterior degrees of freedom after `n` pulls: `n + 2 alpha - 1`.
    /// Exceeds 1 whenever `n >= n0`.
    pub fn posterior_dof(&self, n: u64) -> f64 {
        n as f64 + 2.0 * self.alpha - 1.0
    }
}

/// Relative threshold below which `ssq` is treated as degenerate. Rewards
/// are continuous, so a degenerate `ssq` indicates a harness bug and is an
/// error rather than something to clamp.
fn degenerate_threshold(stats: &SufficientStats) -> f64 {
    1e-12 * (stats.n() as f64 * stats.mean() * stats.mean()).max(1.0)
}

fn check_stats(stats: &SufficientStats, prior: &PriorAlpha) -> Result<()> {
    if stats.n() < prior.n0() {
        return Err(PosteriorError::InsufficientData {
            n: stats.n(),
            n0: prior.n0(),
        });
    }
    let threshold = degenerate_threshold(stats);
    if stats.ssq() < threshold {
        return Err(PosteriorError::DegenerateVariance {
            ssq: stats.ssq(),
            threshold,
        });
    }
    Ok(())
}

/// One draw of the arm's mean from its posterior:
/// `m + sqrt(v / (n (n + 2 alpha - 1))) * T` with `T` Student-t distributed
/// with `n + 2 alpha - 1` degrees of freedom.
pub fn sample_posterior_mean(
    rng: &mut RngStream,
    stats: &SufficientStats,
    prior: &PriorAlpha,
) -> Result<f64> {
    check_stats(stats, prior)?;
    let dof = prior.posterior_dof(stats.n());
    let scale = (stats.ssq() / (stats.n() as f64 * dof)).sqrt();
    let t = sample_student_t(rng, dof)?;
    Ok(stats.mean() + scale * t)
}

/// Exact posterior tail probability `P(mu_tilde >= mu)`.
pub fn posterior_tail(stats: &SufficientStats, prior: &PriorAlpha, mu: f64) -> Result<f64> {
    check_stats(stats, prior)?;
    let dof = prior.posterior_dof(stats.n());
    let x0 = (mu - stats.mean()) * (stats.n() as f64 * dof / stats.ssq()).sqrt();
    Ok(student_t_sf(x0, dof)?)
}

/// The same tail as [`posterior_tail`], but via adaptive quadrature of the
/// Student-t density instead of the incomplete beta function. Used as an
/// independent cross-check of the exact route.
pub fn posterior_tail_by_quadrature(
    stats: &SufficientStats,
    prior: &PriorAlpha,
    mu: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_stats(stats, prior)?;
    let dof = prior.posterior_dof(stats.n());
    let x0 = (mu - stats.mean()) * (stats.n() as f64 * dof / stats.ssq()).sqrt();
    let density = |x: f64| student_t_pdf(x, dof).expect("dof > 1 by construction");
    if x0 >= 0.0 {
        Ok(special_fn::integrate_to_inf(density, x0, rel_tol))
    } else {
        Ok(1.0 - special_fn::integrate_to_inf(density, -x0, rel_tol))
    }
}

/// Normalizing constant of the posterior-tail lower envelope:
/// `1 / (2 e^(1/6) sqrt(pi (n/2 + alpha)))`.
pub fn tail_lower_constant(n: u64, alpha: f64) -> f64 {
    let z = n as f64 / 2.0 + alpha;
    assert!(z > 0.0, "n/2 + alpha must be positive (n={n}, alpha={alpha})");
    1.0 / (2.0 * (1.0 / 6.0f64).exp() * (std::f64::consts::PI * z).sqrt())
}

/// Closed-form envelopes for the posterior tail at a point `mu` above the
/// sample mean, valid for `n >= n0`:
///
/// * `lower = a_n_alpha * (1 + n (mu-m)^2 / v)^(-(n-1)/2 - alpha)`
/// * `upper = (sqrt(v) / (mu-m)) * (1 + n (mu-m)^2 / v)^(-n/2 - alpha + 1)`
///
/// `upper` may exceed 1 (the bound is then trivially valid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorTailBounds {
    pub lower: f64,
    pub upper: f64,
    /// The constant in the lower envelope (see [`tail_lower_constant`]).
    pub a_n_alpha: f64,
}

/// Evaluate both tail envelopes. Powers are computed in log space — the
/// `(1 + ...)^(-n/2)` factors underflow in linear space once `n` reaches a
/// few thousand.
pub fn tail_bounds(
    stats: &SufficientStats,
    prior: &PriorAlpha,
    mu: f64,
) -> Result<PosteriorTailBounds> {
    check_stats(stats, prior)?;
    if !(mu > stats.mean()) {
        return Err(PosteriorError::MeanNotExceeded {
            mu,
            mean: stats.mean(),
        });
    }
    let n = stats.n() as f64;
    let alpha = prior.alpha();
    let gap = mu - stats.mean();
    let ln1q = (n * gap * gap / stats.ssq()).ln_1p();

    let a = tail_lower_constant(stats.n(), alpha);
    let lower = (a.ln() - ((n - 1.0) / 2.0 + alpha) * ln1q).exp();
    let upper = (0.5 * stats.ssq().ln() - gap.ln() - (n / 2.0 + alpha - 1.0) * ln1q).exp();
    Ok(PosteriorTailBounds {
        lower,
        upper,
        a_n_alpha: a,
    })
}
