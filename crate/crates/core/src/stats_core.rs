//! Streaming sufficient statistics and sampling primitives.
//!
//! Every random quantity in this crate is drawn through an [`RngStream`]: a
//! ChaCha8 generator addressed by `(seed, stream_id)`. Identical addresses
//! yield bit-identical draw sequences regardless of thread scheduling, which
//! is what makes replicated experiments reproducible under any worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use thiserror::Error;

use crate::special_fn::{self, SpecialFnError};

/// Errors from samplers and distribution functions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("variance must be > 0 (got sigma2={0})")]
    NonPositiveVariance(f64),
    #[error("degrees of freedom must be > 0 (got dof={0})")]
    NonPositiveDof(f64),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
}

type Result<T> = std::result::Result<T, StatsError>;

/// Per-arm sufficient statistics: pull count `n`, sample mean, and the
/// centered sum of squares `ssq = sum (x_m - mean)^2`.
///
/// Updates use Welford's cancellation-free recurrence with the mean updated
/// first, so results are bit-reproducible for a fixed observation order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SufficientStats {
    n: u64,
    mean: f64,
    ssq: f64,
}

impl SufficientStats {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build from raw components. Panics if the components are inconsistent
    /// (`ssq < 0`, or `ssq != 0` with fewer than two observations).
    pub fn from_parts(n: u64, mean: f64, ssq: f64) -> Self {
        assert!(ssq >= 0.0, "ssq must be nonnegative (got {ssq})");
        assert!(
            n >= 2 || ssq == 0.0,
            "ssq must be 0 with fewer than two observations (n={n}, ssq={ssq})"
        );
        Self { n, mean, ssq }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn ssq(&self) -> f64 {
        self.ssq
    }

    /// Fold one observation into the statistics.
    pub fn update(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.ssq += delta * (x - self.mean);
    }

    /// Statistics of the union of two disjoint sample sets.
    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let ssq =
            self.ssq + other.ssq + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Self { n, mean, ssq }
    }
}

/// Number of derivable substream slots per stream (see [`RngStream::substream`]).
pub const SUBSTREAM_SLOTS: u64 = 1 << 16;

/// A seedable, independently addressable random stream.
///
/// Streams with distinct `(seed, stream_id)` addresses are statistically
/// independent; streams with equal addresses produce bit-identical
/// sequences on every run and under any thread schedule. Each stream must be
/// owned by exactly one worker at a time.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A child stream at `(seed, stream_id * SUBSTREAM_SLOTS + slot)`.
    ///
    /// Substreams of distinct parents never collide as long as parent ids
    /// stay below `2^48` and `slot < SUBSTREAM_SLOTS`.
    pub fn substream(&self, slot: u64) -> Self {
        assert!(slot < SUBSTREAM_SLOTS, "substream slot {slot} out of range");
        Self::new(
            self.seed,
            self.stream_id.wrapping_mul(SUBSTREAM_SLOTS) + slot,
        )
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// One draw from `N(mu, sigma2)`.
pub fn sample_normal(rng: &mut RngStream, mu: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(StatsError::NonPositiveVariance(sigma2));
    }
    let z: f64 = StandardNormal.sample(rng);
    Ok(mu + sigma2.sqrt() * z)
}

/// One draw from a chi-squared distribution with real-valued `dof > 0`,
/// i.e. `Gamma(shape = dof/2, scale = 2)`.
///
/// Degrees of freedom are real because posterior degrees of freedom
/// `n + 2 alpha - 1` are not integers in general. The gamma sampler is
/// Marsaglia–Tsang accept/reject (shape >= 1 direct, shape < 1 boosted by
/// `U^(1/shape)`).
pub fn sample_chi2(rng: &mut RngStream, dof: f64) -> Result<f64> {
    if !(dof > 0.0) {
        return Err(StatsError::NonPositiveDof(dof));
    }
    let gamma = Gamma::new(dof / 2.0, 2.0).expect("dof/2 > 0 checked above");
    Ok(gamma.sample(rng))
}

/// One draw from a Student-t distribution with real-valued `dof > 0`,
/// constructed as `Z / sqrt(W / dof)` with `Z` standard normal and
/// `W ~ chi2(dof)` independent. The normal draw is consumed first.
pub fn sample_student_t(rng: &mut RngStream, dof: f64) -> Result<f64> {
    if !(dof > 0.0) {
        return Err(StatsError::NonPositiveDof(dof));
    }
    let z: f64 = StandardNormal.sample(rng);
    let w = sample_chi2(rng, dof)?;
    Ok(z / (w / dof).sqrt())
}

/// Survival function `P(T_dof >= x)` of the Student-t distribution, computed
/// through the regularized incomplete beta function. Absolute error is below
/// `1e-9`.
pub fn student_t_sf(x: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0) {
        return Err(StatsError::NonPositiveDof(dof));
    }
    let u = dof / (dof + x * x);
    let ib = special_fn::regularized_incomplete_beta(dof / 2.0, 0.5, u)?;
    if x >= 0.0 {
        Ok(0.5 * ib)
    } else {
        Ok(1.0 - 0.5 * ib)
    }
}

/// Density of the Student-t distribution with `dof > 0`.
pub fn student_t_pdf(x: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0) {
        return Err(StatsError::NonPositiveDof(dof));
    }
    let ln_norm = special_fn::ln_gamma((dof + 1.0) / 2.0)?
        - special_fn::ln_gamma(dof / 2.0)?
        - 0.5 * (dof * std::f64::consts::PI).ln();
    Ok((ln_norm - (dof + 1.0) / 2.0 * (x * x / dof).ln_1p()).exp())
}

/// Kolmogorov–Smirnov statistic of `samples` against the CDF `cdf`.
/// Sorts the slice in place.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN sample in KS input"));
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let fx = cdf(x);
        d = d.max((i + 1) as f64 / n - fx).max(fx - i as f64 / n);
    }
    d
}
