// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`: the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Thompson sampling for Gaussian bandits with unknown means and variances.
//!
//! The library is organized around the scale-family prior
//! `pi(mu, sigma^2) ~ (sigma^2)^(-1-alpha)`, under which the posterior of an
//! arm's mean is a rescaled Student-t distribution. Modules:
//!
//! * [`special_fn`] — log-gamma, beta, regularized incomplete beta, and the
//!   adaptive quadrature used by the verification suites.
//! * [`stats_core`] — streaming sufficient statistics, seedable RNG streams,
//!   and samplers for the normal / chi-squared / Student-t families.
//! * [`posterior`] — the posterior over an arm's mean: exact sampling, exact
//!   tail probabilities, and closed-form tail envelopes.
//! * [`bandit`] — environments, the Thompson sampling policy (with optional
//!   known arms), episode simulation, and replicated regret aggregation.
//! * [`theory`] — closed-form regret quantities: the asymptotic lower-bound
//!   coefficient, large-deviation bounds, and a finite-time upper bound for
//!   conservative priors (`alpha < 0`).

pub mod bandit;
pub mod posterior;
pub mod special_fn;
pub mod stats_core;
pub mod theory;
