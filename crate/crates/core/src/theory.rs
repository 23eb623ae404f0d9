//! Closed-form regret quantities for the Gaussian bandit.
//!
//! * `d_inf` — the minimal KL divergence from a suboptimal arm to any
//!   distribution whose mean beats the optimum; its reciprocal (weighted by
//!   the gap) is the per-arm coefficient of the asymptotic `log T` regret
//!   lower bound.
//! * Large-deviation bounds for the sample mean and the centered sum of
//!   squares, with their joint rate function.
//! * A finite-time expected-regret upper bound for conservative priors
//!   (`alpha < 0`), and the polynomial-growth diagnostic `C_T` for the
//!   known-arm setting with `alpha >= 0`.

use thiserror::Error;

use crate::bandit::Environment;
use crate::posterior::{derive_n0, tail_lower_constant};
use crate::special_fn::{self, SpecialFnError};

/// Errors from bound evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("{0}")]
    Domain(String),
    #[error("alpha infeasible: the finite-time bound requires alpha < 0 (got alpha={0})")]
    AlphaInfeasible(f64),
    #[error(
        "epsilon infeasible: need 0 < epsilon < {max_epsilon} (half the smallest \
         normalized gap), got epsilon={epsilon}"
    )]
    EpsilonInfeasible { epsilon: f64, max_epsilon: f64 },
    #[error("degenerate environment: the optimal arm is not unique")]
    DegenerateEnvironment,
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

type Result<T> = std::result::Result<T, TheoryError>;

/// `d_inf(delta, sigma2) = (1/2) ln(1 + delta^2 / sigma2)`: the smallest KL
/// divergence from `N(mu, sigma2)` to any normal with mean at least
/// `mu + delta`. Zero exactly when `delta` is zero, and invariant under a
/// common location-scale change of `(delta, sigma)`.
pub fn d_inf(delta: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(TheoryError::Domain(format!(
            "d_inf requires sigma2 > 0 (got {sigma2})"
        )));
    }
    if !(delta >= 0.0) {
        return Err(TheoryError::Domain(format!(
            "d_inf requires delta >= 0 (got {delta})"
        )));
    }
    Ok(0.5 * (delta * delta / sigma2).ln_1p())
}

/// The chi-squared large-deviation rate `h(x) = (x - 1 - ln x) / 2`,
/// nonnegative with its minimum `h(1) = 0`, increasing for `x >= 1`.
pub fn h(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(TheoryError::Domain(format!("h requires x > 0 (got {x})")));
    }
    Ok(0.5 * (x - 1.0 - x.ln()))
}

/// `h(1 + u)` computed directly from `u`, avoiding the cancellation in
/// `x - 1 - ln x` when `u` is small.
fn h1p(u: f64) -> f64 {
    0.5 * (u - u.ln_1p())
}

/// Chernoff bound on the upward deviation of a sample mean:
/// `P(mean_n >= mu + delta) <= exp(-n delta^2 / (2 sigma2))`.
pub fn ldp_mean_bound(n: u64, delta: f64, sigma2: f64) -> Result<f64> {
    if n < 1 {
        return Err(TheoryError::Domain("ldp_mean_bound requires n >= 1".into()));
    }
    if !(delta > 0.0) {
        return Err(TheoryError::Domain(format!(
            "ldp_mean_bound requires delta > 0 (got {delta})"
        )));
    }
    if !(sigma2 > 0.0) {
        return Err(TheoryError::Domain(format!(
            "ldp_mean_bound requires sigma2 > 0 (got {sigma2})"
        )));
    }
    Ok((-(n as f64) * delta * delta / (2.0 * sigma2)).exp())
}

/// Chernoff bound on the centered sum of squares:
/// `P(ssq_n >= n * sigma2_thresh) <= exp(-n h(sigma2_thresh / sigma2))`
/// for thresholds above the true variance.
pub fn ldp_var_bound(n: u64, sigma2_thresh: f64, sigma2: f64) -> Result<f64> {
    if n < 2 {
        return Err(TheoryError::Domain("ldp_var_bound requires n >= 2".into()));
    }
    if !(sigma2 > 0.0) || !(sigma2_thresh > sigma2) {
        return Err(TheoryError::Domain(format!(
            "ldp_var_bound requires sigma2_thresh > sigma2 > 0 \
             (got sigma2_thresh={sigma2_thresh}, sigma2={sigma2})"
        )));
    }
    Ok((-(n as f64) * h(sigma2_thresh / sigma2)?).exp())
}

/// Value of the joint large-deviation rate function; the infeasible region
/// carries a distinguished infinity rather than a floating sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateValue {
    Finite(f64),
    Infinite,
}

impl RateValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            RateValue::Finite(v) => Some(*v),
            RateValue::Infinite => None,
        }
    }
}

/// Joint rate function of `(mean of X, mean of X^2)` for i.i.d.
/// `N(mu, sigma2)` samples:
///
/// `h((z2 - z1^2) / sigma2) + (z1 - mu)^2 / (2 sigma2)` when `z2 > z1^2`,
/// and `+inf` otherwise (an empirical second moment cannot fall below the
/// squared first moment).
pub fn ldp_rate_function(z1: f64, z2: f64, mu: f64, sigma2: f64) -> Result<RateValue> {
    if !(sigma2 > 0.0) {
        return Err(TheoryError::Domain(format!(
            "ldp_rate_function requires sigma2 > 0 (got {sigma2})"
        )));
    }
    if z2 <= z1 * z1 {
        return Ok(RateValue::Infinite);
    }
    let rate = h((z2 - z1 * z1) / sigma2)? + (z1 - mu) * (z1 - mu) / (2.0 * sigma2);
    Ok(RateValue::Finite(rate))
}

/// Per-arm contribution to the asymptotic lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmCoefficient {
    pub arm: usize,
    pub gap: f64,
    pub d_inf: f64,
    /// `gap / d_inf(gap, sigma2)`.
    pub coefficient: f64,
}

/// A finite-time upper bound evaluated at a specific `(epsilon, horizon)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteTimeBound {
    pub epsilon: f64,
    pub horizon: u64,
    pub value: f64,
}

/// The asymptotic regret lower bound, per arm and in total: any uniformly
/// good policy must satisfy
/// `liminf E[Regret(T)] / ln T >= sum_i gap_i / d_inf(gap_i, sigma2_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub per_arm: Vec<ArmCoefficient>,
    pub total_log_t_coefficient: f64,
    pub finite_time_bound: Option<FiniteTimeBound>,
}

/// Evaluate the lower-bound coefficients for an environment with a unique
/// optimal arm.
pub fn lower_bound_coefficient(env: &Environment) -> Result<BoundReport> {
    if env.unique_optimal_arm().is_none() {
        return Err(TheoryError::DegenerateEnvironment);
    }
    let mut per_arm = Vec::new();
    let mut total = 0.0;
    for (i, (&gap, arm)) in env.gaps().iter().zip(env.arms()).enumerate() {
        if gap > 0.0 {
            let d = d_inf(gap, arm.sigma2)?;
            let coefficient = gap / d;
            per_arm.push(ArmCoefficient {
                arm: i,
                gap,
                d_inf: d,
                coefficient,
            });
            total += coefficient;
        }
    }
    Ok(BoundReport {
        per_arm,
        total_log_t_coefficient: total,
        finite_time_bound: None,
    })
}

/// `1 / (1 - e^(-x))` for `x > 0`, computed through `expm1`.
fn geometric_tail(x: f64) -> f64 {
    1.0 / -(-x).exp_m1()
}

/// Finite-time expected-regret upper bound for Thompson sampling with a
/// conservative prior (`alpha < 0`).
///
/// The environment is first normalized so the (unique) optimal arm has mean
/// 0 and variance 1; `epsilon` is interpreted in those normalized units and
/// must satisfy `0 < epsilon < min_gap / 2` there. In normalized units the
/// bound is
///
/// ```text
/// sum over suboptimal arms i of gap_i * (
///       ln T / d_inf(gap_i - 2 eps, sigma2_i + eps)
///     + 2 - 2 alpha
///     + sqrt(sigma2_i + eps) / (gap_i - 2 eps)
///     + 1 / (1 - exp(-eps^2 / (2 sigma2_i)))
///     + 1 / (1 - exp(-h(1 + eps / sigma2_i))) )
/// + max_gap * (
///       1 / (1 - exp(-eps^2 / 8))
///     + 1 / (1 - exp(-h(2)))
///     + B(1/2, -alpha) / (1 - exp(-eps^2 / 2))^2
///     + (2 sqrt(2) / eps) * (1 + eps^2/8)^(1 - alpha)
///                         / (1 - (1 + eps^2/8)^(-1/2)) )
/// ```
///
/// and the returned value is rescaled back to the input environment's reward
/// units. `B(1/2, -alpha)` is finite only for `alpha < 0`, which is exactly
/// the dividing line between the conservative and non-informative priors.
pub fn finite_time_upper_bound(
    env: &Environment,
    alpha: f64,
    epsilon: f64,
    horizon: u64,
) -> Result<f64> {
    if !(alpha < 0.0) {
        return Err(TheoryError::AlphaInfeasible(alpha));
    }
    let best = env
        .unique_optimal_arm()
        .ok_or(TheoryError::DegenerateEnvironment)?;
    if horizon < 1 {
        return Err(TheoryError::Domain(
            "finite_time_upper_bound requires horizon >= 1".into(),
        ));
    }

    // Normalize so the optimal arm is (0, 1).
    let sigma1 = env.arms()[best].sigma2.sqrt();
    let gaps: Vec<f64> = env.gaps().iter().map(|g| g / sigma1).collect();
    let vars: Vec<f64> = env
        .arms()
        .iter()
        .map(|a| a.sigma2 / (sigma1 * sigma1))
        .collect();

    let min_gap = gaps
        .iter()
        .copied()
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let max_epsilon = min_gap / 2.0;
    if !(epsilon > 0.0 && epsilon < max_epsilon) {
        return Err(TheoryError::EpsilonInfeasible {
            epsilon,
            max_epsilon,
        });
    }

    let ln_t = (horizon as f64).ln();
    let eps2 = epsilon * epsilon;

    let mut total = 0.0;
    for (i, (&gap, &var)) in gaps.iter().zip(&vars).enumerate() {
        if i == best {
            continue;
        }
        let main = ln_t / d_inf(gap - 2.0 * epsilon, var + epsilon)?;
        let constant = 2.0 - 2.0 * alpha;
        let ratio = (var + epsilon).sqrt() / (gap - 2.0 * epsilon);
        let mean_dev = geometric_tail(eps2 / (2.0 * var));
        let var_dev = geometric_tail(h1p(epsilon / var));
        total += gap * (main + constant + ratio + mean_dev + var_dev);
    }

    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let beta = special_fn::ln_beta(0.5, -alpha)?.exp();
    let g1 = geometric_tail(eps2 / 8.0);
    let g2 = geometric_tail(h(2.0)?);
    let g3 = {
        let denom = -(-eps2 / 2.0).exp_m1();
        beta / (denom * denom)
    };
    let g4 = {
        let ln_base = (eps2 / 8.0).ln_1p();
        let denom = -(-0.5 * ln_base).exp_m1(); // 1 - (1 + eps^2/8)^(-1/2)
        (2.0 * 2.0f64.sqrt() / epsilon) * ((1.0 - alpha) * ln_base).exp() / denom
    };
    total += max_gap * (g1 + g2 + g3 + g4);

    Ok(sigma1 * total)
}

/// Polynomial-growth diagnostic for the known-arm setting with a
/// non-negative prior exponent:
/// `C_T = (A T / ln 2)^(1 / ((n-1)/2 + alpha)) - 1`, where `A` is the
/// posterior-tail lower-envelope constant for `(n, alpha)`.
///
/// `C_T` grows polynomially in `T`; callers display the raw value, which is
/// negative when `A T / ln 2 < 1`.
pub fn ct_diagnostic(n: u64, alpha: f64, horizon: u64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(TheoryError::Domain(format!(
            "ct_diagnostic requires alpha >= 0 (got {alpha})"
        )));
    }
    if n < derive_n0(alpha) {
        return Err(TheoryError::Domain(format!(
            "ct_diagnostic requires n >= n0 = {} (got n={n})",
            derive_n0(alpha)
        )));
    }
    if horizon < 1 {
        return Err(TheoryError::Domain(
            "ct_diagnostic requires horizon >= 1".into(),
        ));
    }
    let a = tail_lower_constant(n, alpha);
    let exponent = 1.0 / ((n as f64 - 1.0) / 2.0 + alpha);
    Ok((a * horizon as f64 / std::f64::consts::LN_2).powf(exponent) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats_core::{sample_normal, RngStream, SufficientStats};

    fn env(means: &[f64], vars: &[f64]) -> Environment {
        Environment::from_means_and_variances(means, vars).unwrap()
    }

    #[test]
    fn d_inf_values_and_domain() {
        assert_eq!(d_inf(0.0, 2.0).unwrap(), 0.0);
        // delta^2 / sigma2 = 1 gives (ln 2) / 2.
        let got = d_inf(1.5, 2.25).unwrap();
        assert!((got - 0.5 * std::f64::consts::LN_2).abs() < 1e-15);
        assert!((got - 0.34657).abs() < 1e-5);
        assert!(d_inf(1.0, 0.0).is_err());
        assert!(d_inf(-0.5, 1.0).is_err());
    }

    #[test]
    fn h_values_and_domain() {
        assert_eq!(h(1.0).unwrap(), 0.0);
        assert!((h(2.0).unwrap() - (1.0 - std::f64::consts::LN_2) / 2.0).abs() < 1e-15);
        assert!((h(2.0).unwrap() - 0.153426).abs() < 1e-6);
        let e = std::f64::consts::E;
        assert!((h(e).unwrap() - (e - 2.0) / 2.0).abs() < 1e-15);
        assert!((h(e).unwrap() - 0.359141).abs() < 1e-6);
        assert!(h(0.0).is_err());
        assert!(h(-1.0).is_err());
        // Nonnegative, increasing for x >= 1.
        let mut prev = 0.0;
        for i in 1..200 {
            let x = 1.0 + i as f64 * 0.05;
            let v = h(x).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn mean_bound_values() {
        let b = ldp_mean_bound(8, 1.0, 1.0).unwrap();
        assert!((b - (-4.0f64).exp()).abs() < 1e-15);
        assert!((b - 0.018316).abs() < 1e-6);
        // Vacuous as delta -> 0+.
        assert!(ldp_mean_bound(8, 1e-12, 1.0).unwrap() > 0.999999);
        assert!(ldp_mean_bound(0, 1.0, 1.0).is_err());
        assert!(ldp_mean_bound(8, 0.0, 1.0).is_err());
    }

    #[test]
    fn var_bound_values() {
        let b = ldp_var_bound(10, 2.0, 1.0).unwrap();
        assert!((b - (-10.0 * h(2.0).unwrap()).exp()).abs() < 1e-15);
        assert!((b - 0.21561).abs() < 1e-5);
        assert!(ldp_var_bound(10, 1.0 + 1e-12, 1.0).unwrap() > 0.999999);
        assert!(ldp_var_bound(1, 2.0, 1.0).is_err());
        assert!(ldp_var_bound(10, 0.5, 1.0).is_err());
    }

    #[test]
    fn mean_bound_dominates_monte_carlo() {
        // P(mean_8 >= 1) under N(0,1) is ~0.00234, far below e^-4.
        let mut rng = RngStream::new(0x7EE0, 0);
        let trials = 1_000_000usize;
        let mut hits = 0usize;
        for _ in 0..trials {
            let mut s = 0.0;
            for _ in 0..8 {
                s += sample_normal(&mut rng, 0.0, 1.0).unwrap();
            }
            if s / 8.0 >= 1.0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.00234).abs() < 0.0005, "freq={freq}");
        assert!(freq <= ldp_mean_bound(8, 1.0, 1.0).unwrap());
    }

    #[test]
    fn var_bound_dominates_monte_carlo() {
        // P(ssq_10 >= 20) = P(chi2_9 >= 20) ~ 0.01791, below 0.21561.
        let mut rng = RngStream::new(0x7EE1, 0);
        let trials = 1_000_000usize;
        let mut hits = 0usize;
        for _ in 0..trials {
            let mut stats = SufficientStats::empty();
            for _ in 0..10 {
                stats.update(sample_normal(&mut rng, 0.0, 1.0).unwrap());
            }
            if stats.ssq() >= 20.0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.01791).abs() < 0.001, "freq={freq}");
        assert!(freq <= ldp_var_bound(10, 2.0, 1.0).unwrap());
    }

    #[test]
    fn rate_function_values() {
        // Zero exactly at the truth point (mu, mu^2 + sigma2).
        let at_truth = ldp_rate_function(1.5, 1.5 * 1.5 + 2.0, 1.5, 2.0).unwrap();
        assert_eq!(at_truth, RateValue::Finite(0.0));
        let v = ldp_rate_function(0.0, 2.0, 0.0, 1.0).unwrap();
        assert!((v.finite().unwrap() - h(2.0).unwrap()).abs() < 1e-15);
        assert_eq!(
            ldp_rate_function(1.0, 0.5, 0.0, 1.0).unwrap(),
            RateValue::Infinite
        );
        assert!(ldp_rate_function(0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn rate_function_grid_minimum_matches_var_rate() {
        // Over the convex set {z2 - z1^2 >= sigma2_thresh}, the infimum of
        // the rate is h(sigma2_thresh / sigma2), attained at z1 = mu.
        let (mu, sigma2) = (0.7, 1.3);
        for &thresh in &[1.5 * sigma2, 2.0 * sigma2, 3.7 * sigma2] {
            let want = h(thresh / sigma2).unwrap();
            let mut grid_min = f64::INFINITY;
            for i in 0..=80 {
                // Include z1 = mu exactly at i = 40.
                let z1 = mu + (i as f64 - 40.0) * 0.05;
                for j in 0..=60 {
                    // Include the boundary s = thresh exactly at j = 0.
                    let s = thresh + j as f64 * 0.1;
                    let z2 = z1 * z1 + s;
                    if let RateValue::Finite(v) =
                        ldp_rate_function(z1, z2, mu, sigma2).unwrap()
                    {
                        grid_min = grid_min.min(v);
                    }
                }
            }
            assert!(
                (grid_min - want).abs() < 1e-6,
                "thresh={thresh}: grid_min={grid_min}, want={want}"
            );
        }
    }

    #[test]
    fn lower_bound_coefficient_two_arms() {
        let report = lower_bound_coefficient(&env(&[0.0, -1.0], &[1.0, 1.0])).unwrap();
        assert_eq!(report.per_arm.len(), 1);
        let want = 1.0 / (0.5 * std::f64::consts::LN_2);
        assert!((report.total_log_t_coefficient - want).abs() < 1e-12);
        assert!((report.total_log_t_coefficient - 2.8854).abs() < 1e-4);
        assert!(report.finite_time_bound.is_none());

        // Small suboptimal variance drives the coefficient toward zero.
        let tight = lower_bound_coefficient(&env(&[0.0, -1.0], &[1.0, 0.01])).unwrap();
        let want = 1.0 / (0.5 * 101f64.ln());
        assert!((tight.total_log_t_coefficient - want).abs() < 1e-12);
        assert!((tight.total_log_t_coefficient - 0.4334).abs() < 1e-4);
        assert!(tight.total_log_t_coefficient < report.total_log_t_coefficient);

        assert!(matches!(
            lower_bound_coefficient(&env(&[0.0, 0.0], &[1.0, 1.0])),
            Err(TheoryError::DegenerateEnvironment)
        ));
    }

    #[test]
    fn coefficient_scales_linearly_with_common_rescale() {
        // Scaling all means and standard deviations by b scales each gap by
        // b and leaves d_inf unchanged, so coefficients scale by b.
        let b = 3.0;
        let base = lower_bound_coefficient(&env(&[0.0, -1.0, -2.0], &[1.0, 2.0, 0.5])).unwrap();
        let scaled = lower_bound_coefficient(&env(
            &[0.0, -b, -2.0 * b],
            &[b * b, 2.0 * b * b, 0.5 * b * b],
        ))
        .unwrap();
        assert!(
            (scaled.total_log_t_coefficient - b * base.total_log_t_coefficient).abs() < 1e-9
        );
    }

    #[test]
    fn upper_bound_matches_term_by_term_arithmetic() {
        // Independent evaluation with naive 1/(1-exp(-x)) arithmetic, summed
        // term by term, for mu=(0,-1), sigma2=(1,1), alpha=-1/2, eps=0.1,
        // T=1e5. The environment is already normalized here.
        let (alpha, eps, t) = (-0.5f64, 0.1f64, 100_000u64);
        let ln_t = (t as f64).ln();
        let main = ln_t / (0.5 * (1.0f64 + 0.8 * 0.8 / 1.1).ln());
        let constant = 2.0 - 2.0 * alpha;
        let ratio = 1.1f64.sqrt() / 0.8;
        let mean_dev = 1.0 / (1.0 - (-eps * eps / 2.0).exp());
        let h_small = (1.1f64 - 1.0 - 1.1f64.ln()) / 2.0;
        let var_dev = 1.0 / (1.0 - (-h_small).exp());
        let per_arm = main + constant + ratio + mean_dev + var_dev;

        let beta_half = std::f64::consts::PI; // B(1/2, 1/2)
        let g1 = 1.0 / (1.0 - (-eps * eps / 8.0).exp());
        let g2 = 1.0 / (1.0 - (-(2.0f64 - 1.0 - 2.0f64.ln()) / 2.0).exp());
        let g3 = beta_half / (1.0 - (-eps * eps / 2.0).exp()).powi(2);
        let base = 1.0 + eps * eps / 8.0;
        let g4 = (2.0 * 2.0f64.sqrt() / eps) * base.powf(1.0 - alpha)
            / (1.0 - base.powf(-0.5));
        let want = per_arm + (g1 + g2 + g3 + g4);

        let envr = env(&[0.0, -1.0], &[1.0, 1.0]);
        let got = finite_time_upper_bound(&envr, alpha, eps, t).unwrap();
        assert!(
            (got - want).abs() / want < 1e-10,
            "got={got}, want={want}"
        );
        // Frozen from the evaluation above: constants dominate at eps=0.1.
        assert!((got - 173167.0).abs() / 173167.0 < 1e-2, "got={got}");
    }

    #[test]
    fn upper_bound_feasibility_errors() {
        let envr = env(&[0.0, -1.0], &[1.0, 1.0]);
        assert!(matches!(
            finite_time_upper_bound(&envr, 0.0, 0.1, 1000),
            Err(TheoryError::AlphaInfeasible(_))
        ));
        assert!(matches!(
            finite_time_upper_bound(&envr, 0.5, 0.1, 1000),
            Err(TheoryError::AlphaInfeasible(_))
        ));
        assert!(matches!(
            finite_time_upper_bound(&envr, -0.5, 0.5, 1000),
            Err(TheoryError::EpsilonInfeasible { .. })
        ));
        assert!(matches!(
            finite_time_upper_bound(&envr, -0.5, 0.0, 1000),
            Err(TheoryError::EpsilonInfeasible { .. })
        ));
        let tied = env(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(
            finite_time_upper_bound(&tied, -0.5, 0.1, 1000),
            Err(TheoryError::DegenerateEnvironment)
        ));
    }

    #[test]
    fn upper_bound_per_log_t_approaches_inflated_coefficient() {
        // bound / ln T tends to sum gap_i / d_inf(gap_i - 2 eps, var_i + eps)
        // as T grows. At eps = 0.4 the additive constants are moderate, so
        // by T in {1e6, 1e9} the ratio is within 10x of the limit and is
        // shrinking toward it.
        let envr = env(&[0.0, -1.0], &[1.0, 1.0]);
        let (alpha, eps) = (-0.5, 0.4);
        let limit = 1.0 / d_inf(1.0 - 2.0 * eps, 1.0 + eps).unwrap();
        let mut prev_ratio = f64::INFINITY;
        for &t in &[1_000_000u64, 1_000_000_000] {
            let per_log_t =
                finite_time_upper_bound(&envr, alpha, eps, t).unwrap() / (t as f64).ln();
            let ratio = per_log_t / limit;
            assert!(ratio >= 1.0);
            assert!(ratio < 10.0, "T={t}: ratio={ratio}");
            assert!(ratio < prev_ratio);
            prev_ratio = ratio;
        }
        // The dominance over the asymptotic lower bound holds at any horizon
        // and any feasible epsilon.
        for &eps in &[0.05, 0.1, 0.4, 0.49] {
            let small = finite_time_upper_bound(&envr, alpha, eps, 1000).unwrap();
            let coeff = lower_bound_coefficient(&envr)
                .unwrap()
                .total_log_t_coefficient;
            assert!(small >= coeff * (1000f64).ln(), "eps={eps}");
        }
    }

    #[test]
    fn upper_bound_rescales_with_units() {
        // Scaling the whole environment by b scales the bound by b; epsilon
        // is interpreted in normalized units in both cases.
        let b = 2.5;
        let base = finite_time_upper_bound(&env(&[0.0, -1.0], &[1.0, 1.0]), -0.5, 0.1, 10_000)
            .unwrap();
        let scaled = finite_time_upper_bound(
            &env(&[1.0, 1.0 - b], &[b * b, b * b]),
            -0.5,
            0.1,
            10_000,
        )
        .unwrap();
        assert!((scaled - b * base).abs() / (b * base) < 1e-12);
    }

    #[test]
    fn ct_diagnostic_value_and_growth() {
        // Direct evaluation at (n=3, alpha=1/2, T=1e3):
        // A = 1/(2 e^(1/6) sqrt(2 pi)), C = (A * 1e3 / ln 2)^(2/3) - 1.
        let a = 1.0 / (2.0 * (1.0f64 / 6.0).exp() * (2.0 * std::f64::consts::PI).sqrt());
        let want = (a * 1000.0 / std::f64::consts::LN_2).powf(2.0 / 3.0) - 1.0;
        let got = ct_diagnostic(3, 0.5, 1000).unwrap();
        assert!((got - want).abs() < 1e-12, "got={got}, want={want}");

        // Power-law growth: C_{100 T} / C_T ~ 100^(2/(n-1)) for alpha = 0,
        // once C_T has grown past the constant -1 offset.
        for &(n, t) in &[(5u64, 1_000_000u64), (9, 1_000_000), (17, 1_000_000_000_000)] {
            let ratio = ct_diagnostic(n, 0.0, 100 * t).unwrap() / ct_diagnostic(n, 0.0, t).unwrap();
            let want = 100f64.powf(2.0 / (n as f64 - 1.0));
            assert!(
                (ratio / want - 1.0).abs() < 0.05,
                "n={n}: ratio={ratio}, want={want}"
            );
        }

        // Small horizons may produce a negative raw value.
        assert!(ct_diagnostic(30, 0.0, 1).unwrap() < 0.0);
        // Domain errors.
        assert!(ct_diagnostic(2, 0.0, 1000).is_err()); // n0 = 3 for alpha = 0
        assert!(ct_diagnostic(5, -0.5, 1000).is_err());
        assert!(ct_diagnostic(5, 0.0, 0).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn d_inf_location_scale_invariance(
                delta in 0.0f64..10.0,
                sigma2 in 0.01f64..10.0,
                b in 0.01f64..100.0,
            ) {
                let base = d_inf(delta, sigma2).unwrap();
                let scaled = d_inf(delta / b, sigma2 / (b * b)).unwrap();
                prop_assert!((base - scaled).abs() <= 1e-12 * base.max(1.0));
            }

            #[test]
            fn rate_function_nonnegative(
                z1 in -5.0f64..5.0,
                z2 in -5.0f64..30.0,
                mu in -3.0f64..3.0,
                sigma2 in 0.05f64..5.0,
            ) {
                match ldp_rate_function(z1, z2, mu, sigma2).unwrap() {
                    RateValue::Finite(v) => prop_assert!(v >= 0.0),
                    RateValue::Infinite => {}
                }
            }
        }
    }
}
