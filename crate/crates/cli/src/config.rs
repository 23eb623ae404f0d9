//! Experiment configuration: the TOML spec schema, validation, and presets.
//!
//! Specs are fail-closed: unknown keys are rejected. The resolved form (with
//! the checkpoint grid and output names made explicit) is what manifests
//! embed, so a manifest alone is enough to reproduce a run byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use gauss_ts::bandit::{default_checkpoints, Environment, PolicySpec, TieBreak};
use gauss_ts::posterior::PriorAlpha;
use gauss_ts::theory;

use crate::error::{HarnessError, Result};

/// A full experiment description. Arm indices in `policy.known` are 1-based,
/// matching the way arms are numbered in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub horizon: u64,
    pub reps: u64,
    /// Regret-curve sample points. Defaults to the logarithmic grid
    /// `floor(10^(k/8))` clipped to `[2, horizon]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    pub env: EnvSpec,
    pub policy: PolicyConfig,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSpec {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    /// Prior exponent of `(sigma^2)^(-1-alpha)`.
    pub alpha: f64,
    #[serde(default)]
    pub tie_break: TieBreakConfig,
    /// Arms whose mean is known beforehand (point-mass posterior).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub known: Vec<KnownArm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownArm {
    /// 1-based arm index.
    pub arm: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreakConfig {
    LowestIndex,
    #[default]
    UniformRandom,
}

impl From<TieBreakConfig> for TieBreak {
    fn from(t: TieBreakConfig) -> Self {
        match t {
            TieBreakConfig::LowestIndex => TieBreak::LowestIndex,
            TieBreakConfig::UniformRandom => TieBreak::UniformRandom,
        }
    }
}

/// Output file names, resolved relative to the output directory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finals: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    /// When set (requires `alpha < 0`), the results CSV carries the
    /// finite-time upper bound evaluated at this epsilon per checkpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// A validated spec together with its core-layer counterparts.
#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    /// The input spec with defaults made explicit.
    pub spec: ExperimentSpec,
    pub env: Environment,
    pub policy: PolicySpec,
}

impl ExperimentSpec {
    /// Validate and fill in defaults. Error messages name the offending
    /// field.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        if self.name.trim().is_empty() {
            return Err(HarnessError::config("name must be nonempty"));
        }
        if self.reps < 1 {
            return Err(HarnessError::config("reps must be >= 1"));
        }
        if self.env.means.len() != self.env.variances.len() {
            return Err(HarnessError::config(format!(
                "env.means ({}) and env.variances ({}) must have equal length",
                self.env.means.len(),
                self.env.variances.len()
            )));
        }
        if self.env.means.len() < 2 {
            return Err(HarnessError::config("env must have at least 2 arms"));
        }
        for (i, &m) in self.env.means.iter().enumerate() {
            if !m.is_finite() {
                return Err(HarnessError::config(format!("env.means[{i}] must be finite (got {m})")));
            }
        }
        for (i, &v) in self.env.variances.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(HarnessError::config(format!("env.variances[{i}] must be > 0 (got {v})")));
            }
        }
        if !self.policy.alpha.is_finite() {
            return Err(HarnessError::config(format!(
                "policy.alpha must be finite (got {})",
                self.policy.alpha
            )));
        }

        let num_arms = self.env.means.len();
        let mut known: BTreeMap<usize, f64> = BTreeMap::new();
        for (j, k) in self.policy.known.iter().enumerate() {
            if k.arm < 1 || k.arm > num_arms {
                return Err(HarnessError::config(format!(
                    "policy.known[{j}].arm must be in 1..={num_arms} (got {})",
                    k.arm
                )));
            }
            if !k.mean.is_finite() {
                return Err(HarnessError::config(format!(
                    "policy.known[{j}].mean must be finite (got {})",
                    k.mean
                )));
            }
            if known.insert(k.arm - 1, k.mean).is_some() {
                return Err(HarnessError::config(format!(
                    "policy.known lists arm {} more than once",
                    k.arm
                )));
            }
        }
        if known.len() >= num_arms {
            return Err(HarnessError::config("policy.known must leave at least one arm unknown"));
        }

        let env = Environment::from_means_and_variances(&self.env.means, &self.env.variances)
            .map_err(|e| HarnessError::config(format!("env: {e}")))?;

        let prior = PriorAlpha::new(self.policy.alpha);
        let required = (num_arms - known.len()) as u64 * prior.n0();
        if self.horizon < required {
            return Err(HarnessError::config(format!(
                "horizon must be >= {required} to cover initialization \
                 (n0 = {} per unknown arm), got {}",
                prior.n0(),
                self.horizon
            )));
        }

        let checkpoints = match &self.checkpoints {
            Some(cps) => {
                if cps.is_empty() {
                    return Err(HarnessError::config("checkpoints must be nonempty when given"));
                }
                if cps.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(HarnessError::config("checkpoints must be strictly increasing"));
                }
                if cps[0] < 2 {
                    return Err(HarnessError::config(
                        "checkpoints must be >= 2 (regret per log T is undefined at T=1)",
                    ));
                }
                if *cps.last().unwrap() > self.horizon {
                    return Err(HarnessError::config(format!(
                        "checkpoints must be <= horizon ({})",
                        self.horizon
                    )));
                }
                cps.clone()
            }
            None => default_checkpoints(self.horizon),
        };

        if let Some(eps) = self.bounds.epsilon {
            // Evaluate once so infeasible settings fail at config time.
            theory::finite_time_upper_bound(&env, self.policy.alpha, eps, self.horizon)
                .map_err(|e| HarnessError::config(format!("bounds.epsilon: {e}")))?;
        }

        let policy = if known.is_empty() {
            PolicySpec {
                kind: gauss_ts::bandit::PolicyKind::Thompson(prior),
                tie_break: self.policy.tie_break.into(),
            }
        } else {
            PolicySpec {
                kind: gauss_ts::bandit::PolicyKind::ThompsonWithKnownArms(prior, known),
                tie_break: self.policy.tie_break.into(),
            }
        };
        policy
            .validate(num_arms)
            .map_err(|e| HarnessError::config(format!("policy: {e}")))?;

        let mut spec = self.clone();
        spec.checkpoints = Some(checkpoints);
        spec.output.csv = Some(
            spec.output
                .csv
                .unwrap_or_else(|| format!("{}.csv", self.name)),
        );
        spec.output.finals = Some(
            spec.output
                .finals
                .unwrap_or_else(|| format!("{}_finals.csv", self.name)),
        );
        spec.output.manifest = Some(
            spec.output
                .manifest
                .unwrap_or_else(|| format!("{}_manifest.json", self.name)),
        );

        Ok(ResolvedExperiment { spec, env, policy })
    }
}

/// The three-arm demonstration experiment with a conservative prior.
pub fn theorem1_preset(horizon: u64, reps: u64, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        name: "theorem1".into(),
        seed,
        horizon,
        reps,
        checkpoints: None,
        env: EnvSpec {
            means: vec![0.0, -1.0, -2.0],
            variances: vec![1.0, 1.0, 4.0],
        },
        policy: PolicyConfig {
            alpha: -0.5,
            tie_break: TieBreakConfig::default(),
            known: vec![],
        },
        output: OutputSpec::default(),
        bounds: BoundsSpec { epsilon: None },
    }
}

/// The two-arm experiment where arm 2's mean is known beforehand. This is
/// the configuration in which non-negative prior exponents fail: the regret
/// does not depend on arm 2's variance at all, while the asymptotic lower
/// bound does.
pub fn known_arm_preset(
    name: impl Into<String>,
    alpha: f64,
    mu2: f64,
    sigma2_2: f64,
    horizon: u64,
    reps: u64,
    seed: u64,
) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        seed,
        horizon,
        reps,
        checkpoints: None,
        env: EnvSpec {
            means: vec![0.0, mu2],
            variances: vec![1.0, sigma2_2],
        },
        policy: PolicyConfig {
            alpha,
            tie_break: TieBreakConfig::default(),
            known: vec![KnownArm { arm: 2, mean: mu2 }],
        },
        output: OutputSpec::default(),
        bounds: BoundsSpec { epsilon: None },
    }
}
