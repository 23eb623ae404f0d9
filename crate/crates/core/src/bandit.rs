//! K-armed Gaussian environments and the Thompson sampling policy.
//!
//! An episode is driven entirely by [`RngStream`] addresses: replication `r`
//! owns stream `(base_seed, r)`, from which the episode derives one policy
//! substream plus one reward substream per arm. Workers never share
//! generator state, so aggregates are bit-identical for any worker count.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use thiserror::Error;

use crate::posterior::{sample_posterior_mean, PosteriorError, PriorAlpha};
use crate::stats_core::{sample_normal, RngStream, StatsError, SufficientStats};

/// Errors from environment construction and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BanditError {
    #[error("environment needs at least two arms (got {0})")]
    TooFewArms(usize),
    #[error("arm {arm}: mean must be finite (got {mu})")]
    BadArmMean { arm: usize, mu: f64 },
    #[error("arm {arm}: variance must be finite and > 0 (got {sigma2})")]
    BadArmVariance { arm: usize, sigma2: f64 },
    #[error("known-arm map refers to arm {arm}, but the environment has {num_arms} arms")]
    KnownArmOutOfRange { arm: usize, num_arms: usize },
    #[error("known-arm value for arm {0} must be finite")]
    KnownArmNotFinite(usize),
    #[error("at least one arm must remain unknown")]
    AllArmsKnown,
    #[error("horizon {horizon} too small: initialization alone needs {required} rounds")]
    HorizonTooSmall { horizon: u64, required: u64 },
    #[error("reps must be >= 1")]
    NoReplications,
    #[error("checkpoints must be strictly increasing and within [1, horizon]")]
    BadCheckpoints,
    #[error(transparent)]
    Posterior(#[from] PosteriorError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

type Result<T> = std::result::Result<T, BanditError>;

/// True parameters of one arm (environment side).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmParams {
    pub mu: f64,
    pub sigma2: f64,
}

impl ArmParams {
    pub fn new(mu: f64, sigma2: f64) -> Self {
        Self { mu, sigma2 }
    }
}

/// A K-armed Gaussian environment (K >= 2) with precomputed gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    arms: Vec<ArmParams>,
    mu_star: f64,
    gaps: Vec<f64>,
}

impl Environment {
    pub fn new(arms: Vec<ArmParams>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(BanditError::TooFewArms(arms.len()));
        }
        for (i, a) in arms.iter().enumerate() {
            if !a.mu.is_finite() {
                return Err(BanditError::BadArmMean { arm: i, mu: a.mu });
            }
            if !(a.sigma2 > 0.0) || !a.sigma2.is_finite() {
                return Err(BanditError::BadArmVariance {
                    arm: i,
                    sigma2: a.sigma2,
                });
            }
        }
        let mu_star = arms.iter().map(|a| a.mu).fold(f64::NEG_INFINITY, f64::max);
        let gaps = arms.iter().map(|a| mu_star - a.mu).collect();
        Ok(Self {
            arms,
            mu_star,
            gaps,
        })
    }

    /// Convenience constructor from parallel mean/variance lists.
    pub fn from_means_and_variances(means: &[f64], variances: &[f64]) -> Result<Self> {
        assert_eq!(
            means.len(),
            variances.len(),
            "means and variances must have equal length"
        );
        Self::new(
            means
                .iter()
                .zip(variances)
                .map(|(&mu, &sigma2)| ArmParams::new(mu, sigma2))
                .collect(),
        )
    }

    pub fn arms(&self) -> &[ArmParams] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }

    /// Suboptimality gaps `mu_star - mu_i` (at least one of them is zero).
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn max_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the optimal arm if it is unique.
    pub fn unique_optimal_arm(&self) -> Option<usize> {
        let mut best = None;
        for (i, &g) in self.gaps.iter().enumerate() {
            if g == 0.0 {
                if best.is_some() {
                    return None;
                }
                best = Some(i);
            }
        }
        best
    }
}

/// How to resolve exact ties between posterior draws. Ties have probability
/// zero for continuous posteriors but do occur between known arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    LowestIndex,
    #[default]
    UniformRandom,
}

/// Which policy to run.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// Plain Thompson sampling: every arm's mean is drawn from its posterior.
    Thompson(PriorAlpha),
    /// Thompson sampling where some arms' means are known beforehand; their
    /// "draw" is the fixed value (a point-mass posterior) and they receive no
    /// forced initialization pulls.
    ThompsonWithKnownArms(PriorAlpha, BTreeMap<usize, f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub tie_break: TieBreak,
}

impl PolicySpec {
    pub fn thompson(prior: PriorAlpha) -> Self {
        Self {
            kind: PolicyKind::Thompson(prior),
            tie_break: TieBreak::default(),
        }
    }

    pub fn with_known_arms(prior: PriorAlpha, known: BTreeMap<usize, f64>) -> Self {
        Self {
            kind: PolicyKind::ThompsonWithKnownArms(prior, known),
            tie_break: TieBreak::default(),
        }
    }

    pub fn prior(&self) -> &PriorAlpha {
        match &self.kind {
            PolicyKind::Thompson(p) => p,
            PolicyKind::ThompsonWithKnownArms(p, _) => p,
        }
    }

    pub fn known_value(&self, arm: usize) -> Option<f64> {
        match &self.kind {
            PolicyKind::Thompson(_) => None,
            PolicyKind::ThompsonWithKnownArms(_, known) => known.get(&arm).copied(),
        }
    }

    pub fn validate(&self, num_arms: usize) -> Result<()> {
        if let PolicyKind::ThompsonWithKnownArms(_, known) = &self.kind {
            for (&arm, &value) in known {
                if arm >= num_arms {
                    return Err(BanditError::KnownArmOutOfRange { arm, num_arms });
                }
                if !value.is_finite() {
                    return Err(BanditError::KnownArmNotFinite(arm));
                }
            }
            if known.len() >= num_arms {
                return Err(BanditError::AllArmsKnown);
            }
        }
        Ok(())
    }
}

/// Full record of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub horizon: u64,
    /// Arm pulled at each round.
    pub chosen: Vec<u32>,
    /// Cumulative regret after each round; recomputed each round from the
    /// integer pull counts so the final value equals
    /// `sum_i gaps[i] * pulls[i]` exactly.
    pub cum_regret: Vec<f64>,
    /// Final pull counts per arm.
    pub pulls: Vec<u64>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret after round `t` (1-based).
    pub fn regret_at(&self, t: u64) -> f64 {
        self.cum_regret[(t - 1) as usize]
    }
}

/// One Thompson sampling decision: draw each arm's mean (posterior sample,
/// or the fixed value for known arms, consumed in arm-index order) and return
/// an argmax, resolving exact ties per the configured rule.
pub fn step_thompson(
    stats: &[SufficientStats],
    spec: &PolicySpec,
    rng: &mut RngStream,
) -> Result<usize> {
    let mut best = f64::NEG_INFINITY;
    let mut chosen = 0usize;
    let mut ties = 0u32;
    for (i, arm_stats) in stats.iter().enumerate() {
        let draw = match spec.known_value(i) {
            Some(v) => v,
            None => sample_posterior_mean(rng, arm_stats, spec.prior())?,
        };
        if draw > best {
            best = draw;
            chosen = i;
            ties = 1;
        } else if draw == best {
            ties += 1;
            match spec.tie_break {
                TieBreak::LowestIndex => {}
                // Reservoir rule: the k-th tying arm wins with probability
                // 1/k, which is uniform over the tie set overall.
                TieBreak::UniformRandom => {
                    if rng.gen_range(0..ties) == 0 {
                        chosen = i;
                    }
                }
            }
        }
    }
    Ok(chosen)
}

/// Stream slot layout within one episode: slot 0 drives the policy, slot
/// `1 + i` drives arm `i`'s rewards.
const POLICY_SLOT: u64 = 0;

/// Simulate one episode.
///
/// The first `(#unknown arms) * n0` rounds pull the unknown arms round-robin
/// in index order; known arms receive no forced pulls. Every subsequent
/// round is a [`step_thompson`] decision.
pub fn run_episode(
    env: &Environment,
    spec: &PolicySpec,
    horizon: u64,
    rng: RngStream,
) -> Result<RegretTrace> {
    spec.validate(env.num_arms())?;
    let k = env.num_arms();
    let unknown: Vec<usize> = (0..k).filter(|&i| spec.known_value(i).is_none()).collect();
    let init_rounds = unknown.len() as u64 * spec.prior().n0();
    if horizon < init_rounds {
        return Err(BanditError::HorizonTooSmall {
            horizon,
            required: init_rounds,
        });
    }

    let mut policy_rng = rng.substream(POLICY_SLOT);
    let mut reward_rngs: Vec<RngStream> =
        (0..k).map(|i| rng.substream(1 + i as u64)).collect();

    let mut stats = vec![SufficientStats::empty(); k];
    let mut pulls = vec![0u64; k];
    let mut chosen = Vec::with_capacity(horizon as usize);
    let mut cum_regret = Vec::with_capacity(horizon as usize);

    for t in 0..horizon {
        let arm = if t < init_rounds {
            unknown[(t % unknown.len() as u64) as usize]
        } else {
            step_thompson(&stats, spec, &mut policy_rng)?
        };
        let params = env.arms()[arm];
        let reward = sample_normal(&mut reward_rngs[arm], params.mu, params.sigma2)?;
        stats[arm].update(reward);
        pulls[arm] += 1;

        // Exact accounting from integer pull counts, in fixed arm order.
        let mut regret = 0.0;
        for (gap, count) in env.gaps().iter().zip(&pulls) {
            regret += gap * *count as f64;
        }
        chosen.push(arm as u32);
        cum_regret.push(regret);
    }

    Ok(RegretTrace {
        horizon,
        chosen,
        cum_regret,
        pulls,
    })
}

/// Mean and standard-error regret curves over replications, sampled at
/// checkpoints, plus the per-replication final regrets (in replication
/// order).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationAggregate {
    pub checkpoints: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    pub per_rep_final: Vec<f64>,
}

/// Default logarithmic checkpoint grid `floor(10^(k/8))`, clipped to
/// `[2, horizon]` and always ending at the horizon.
pub fn default_checkpoints(horizon: u64) -> Vec<u64> {
    let mut cps = Vec::new();
    let mut k = 0u32;
    loop {
        let v = (10f64.powf(k as f64 / 8.0) + 1e-9).floor() as u64;
        if v > horizon {
            break;
        }
        if v >= 2 && cps.last() != Some(&v) {
            cps.push(v);
        }
        k += 1;
    }
    if cps.last() != Some(&horizon) {
        cps.push(horizon);
    }
    cps
}

/// Run `reps` independent episodes and aggregate them at the default
/// checkpoint grid, using all available parallelism.
pub fn run_replications(
    env: &Environment,
    spec: &PolicySpec,
    horizon: u64,
    reps: u64,
    base_seed: u64,
) -> Result<ReplicationAggregate> {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    run_replications_with(
        env,
        spec,
        horizon,
        reps,
        base_seed,
        &default_checkpoints(horizon),
        jobs,
    )
}

/// As [`run_replications`] with explicit checkpoints and worker count.
///
/// Replication `r` always uses stream `(base_seed, r)`, and the reduction
/// runs in replication order, so the result does not depend on `jobs`.
pub fn run_replications_with(
    env: &Environment,
    spec: &PolicySpec,
    horizon: u64,
    reps: u64,
    base_seed: u64,
    checkpoints: &[u64],
    jobs: usize,
) -> Result<ReplicationAggregate> {
    if reps == 0 {
        return Err(BanditError::NoReplications);
    }
    if checkpoints.is_empty()
        || checkpoints.windows(2).any(|w| w[0] >= w[1])
        || checkpoints[0] < 1
        || *checkpoints.last().unwrap() > horizon
    {
        return Err(BanditError::BadCheckpoints);
    }
    spec.validate(env.num_arms())?;

    let jobs = jobs.max(1).min(reps as usize);
    let next = AtomicU64::new(0);

    // Each worker claims replication indices from a shared counter and keeps
    // (rep, values) pairs; merging sorts by rep, making the reduction order
    // independent of scheduling.
    type RepRow = (u64, Vec<f64>, f64);
    let run_worker = || -> Result<Vec<RepRow>> {
        let mut local = Vec::new();
        loop {
            let r = next.fetch_add(1, Ordering::Relaxed);
            if r >= reps {
                return Ok(local);
            }
            let trace = run_episode(env, spec, horizon, RngStream::new(base_seed, r))?;
            let at_cps = checkpoints.iter().map(|&t| trace.regret_at(t)).collect();
            local.push((r, at_cps, trace.final_regret()));
        }
    };

    let mut rows: Vec<RepRow> = if jobs == 1 {
        run_worker()?
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs).map(|_| scope.spawn(run_worker)).collect();
            let mut all = Vec::with_capacity(reps as usize);
            let mut first_err = None;
            for h in handles {
                match h.join().expect("replication worker panicked") {
                    Ok(mut part) => all.append(&mut part),
                    Err(e) => first_err = Some(e),
                }
            }
            match first_err {
                Some(e) => Err(e),
                None => Ok(all),
            }
        })?
    };
    rows.sort_unstable_by_key(|row| row.0);

    let r = reps as f64;
    let mut mean_regret = Vec::with_capacity(checkpoints.len());
    let mut stderr = Vec::with_capacity(checkpoints.len());
    for ci in 0..checkpoints.len() {
        let mut sum = 0.0;
        for row in &rows {
            sum += row.1[ci];
        }
        let mean = sum / r;
        let mut ss = 0.0;
        for row in &rows {
            let d = row.1[ci] - mean;
            ss += d * d;
        }
        mean_regret.push(mean);
        stderr.push(if reps > 1 {
            (ss / (r * (r - 1.0))).sqrt()
        } else {
            0.0
        });
    }
    let per_rep_final = rows.iter().map(|row| row.2).collect();

    Ok(ReplicationAggregate {
        checkpoints: checkpoints.to_vec(),
        mean_regret,
        stderr,
        per_rep_final,
    })
}
