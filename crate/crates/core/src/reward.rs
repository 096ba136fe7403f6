//! Hierarchical rewards from validation reports, and group-relative advantages.
//!
//! Every category owns a reward interval and the intervals are chained so a
//! more severe category never outscores a less severe one:
//!
//! ```text
//! r1 <= c2.lower < c2.upper <= c3.lower < c3.upper <= c4.lower < c4.upper <= r5
//! ```
//!
//! Within c2 and c3 the reward moves with `t_v / L_ref` (capped at 1); within
//! c4 it moves with the fraction of goal conjuncts satisfied.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::validator::{Category, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const fn new(lower: f64, upper: f64) -> Self {
        Interval { lower, upper }
    }

    /// Monotone in `rho`; returns exactly `lower` at 0 and `upper` at 1.
    pub fn interpolate(&self, rho: f64) -> f64 {
        if rho >= 1.0 {
            return self.upper;
        }
        (self.lower + (self.upper - self.lower) * rho).clamp(self.lower, self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub r1: f64,
    pub c2: Interval,
    pub c3: Interval,
    pub c4: Interval,
    pub r5: f64,
}

/// The reference table. Note that it overlaps c3 and c4 (`-0.3 > -0.4`), so
/// it fails [`RewardConfig::check`]; it is used as-is only when no config is
/// supplied.
impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            r1: -1.0,
            c2: Interval::new(-0.9, -0.6),
            c3: Interval::new(-0.6, -0.3),
            c4: Interval::new(-0.4, -0.1),
            r5: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardConfigError {
    #[error("reward config violates {inequality} ({left} vs {right})")]
    Chain {
        inequality: &'static str,
        left: f64,
        right: f64,
    },
    #[error("malformed reward config: {0}")]
    Malformed(String),
}

impl RewardConfig {
    /// Checks the severity chain, naming the first inequality that fails.
    pub fn check(&self) -> Result<(), RewardConfigError> {
        let links: [(&'static str, f64, f64, bool); 7] = [
            ("r₁ ≤ r₂⁻", self.r1, self.c2.lower, false),
            ("r₂⁻ < r₂⁺", self.c2.lower, self.c2.upper, true),
            ("r₂⁺ ≤ r₃⁻", self.c2.upper, self.c3.lower, false),
            ("r₃⁻ < r₃⁺", self.c3.lower, self.c3.upper, true),
            ("r₃⁺ ≤ r₄⁻", self.c3.upper, self.c4.lower, false),
            ("r₄⁻ < r₄⁺", self.c4.lower, self.c4.upper, true),
            ("r₄⁺ ≤ r₅", self.c4.upper, self.r5, false),
        ];
        for (inequality, left, right, strict) in links {
            let ok = if strict { left < right } else { left <= right };
            if !ok {
                return Err(RewardConfigError::Chain {
                    inequality,
                    left,
                    right,
                });
            }
        }
        Ok(())
    }

    pub fn interval(&self, category: Category) -> Interval {
        match category {
            Category::C1 => Interval::new(self.r1, self.r1),
            Category::C2 => self.c2,
            Category::C3 => self.c3,
            Category::C4 => self.c4,
            Category::C5 => Interval::new(self.r5, self.r5),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Fixed {
    reward: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    c1: Option<Fixed>,
    c2: Option<Interval>,
    c3: Option<Interval>,
    c4: Option<Interval>,
    c5: Option<Fixed>,
}

/// Reads a TOML document with sections `[c1]`/`[c5]` (`reward = ...`) and
/// `[c2]`..`[c4]` (`lower`, `upper`). Missing sections keep their defaults.
/// The merged result must satisfy the severity chain.
pub fn load_reward_config(text: &str) -> Result<RewardConfig, RewardConfigError> {
    let doc: Doc = toml::from_str(text).map_err(|e| RewardConfigError::Malformed(e.to_string()))?;
    let d = RewardConfig::default();
    let config = RewardConfig {
        r1: doc.c1.map_or(d.r1, |f| f.reward),
        c2: doc.c2.unwrap_or(d.c2),
        c3: doc.c3.unwrap_or(d.c3),
        c4: doc.c4.unwrap_or(d.c4),
        r5: doc.c5.map_or(d.r5, |f| f.reward),
    };
    config.check()?;
    Ok(config)
}

/// `None` yields the built-in table unchecked; a supplied document is loaded
/// and checked.
pub fn reward_config_or_default(text: Option<&str>) -> Result<RewardConfig, RewardConfigError> {
    text.map_or(Ok(RewardConfig::default()), load_reward_config)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardResult {
    pub value: f64,
    pub category: Category,
    /// 0 for c1 and c5.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewardError {
    #[error("{0} report has no violation step")]
    MissingViolationStep(Category),
    #[error("task has no goal conjuncts")]
    EmptyGoal,
    #[error("reference length must be at least 1")]
    ZeroReferenceLength,
}

pub fn compute_reward(
    report: &ValidationReport,
    l_ref: usize,
    config: &RewardConfig,
) -> Result<RewardResult, RewardError> {
    if l_ref == 0 {
        return Err(RewardError::ZeroReferenceLength);
    }
    let category = report.category;
    let rho = match category {
        Category::C1 | Category::C5 => 0.0,
        Category::C2 | Category::C3 => {
            let t_v = report
                .t_v
                .ok_or(RewardError::MissingViolationStep(category))?;
            (t_v as f64 / l_ref as f64).min(1.0)
        }
        Category::C4 => {
            if report.n_total == 0 {
                return Err(RewardError::EmptyGoal);
            }
            report.n_sat as f64 / report.n_total as f64
        }
    };
    let value = config.interval(category).interpolate(rho);
    Ok(RewardResult {
        value,
        category,
        rho,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("advantage group is empty")]
pub struct EmptyGroup;

/// `A_i = r_i - mean(r)`.
pub fn group_advantages(rewards: &[f64]) -> Result<Vec<f64>, EmptyGroup> {
    if rewards.is_empty() {
        return Err(EmptyGroup);
    }
    let mean = rewards.iter().sum::<f64>() / rewards.len() as f64;
    Ok(rewards.iter().map(|r| r - mean).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub rewards: Vec<f64>,
    pub advantages: Vec<f64>,
}

impl GroupSample {
    pub fn new(rewards: Vec<f64>) -> Result<Self, EmptyGroup> {
        let advantages = group_advantages(&rewards)?;
        Ok(GroupSample {
            rewards,
            advantages,
        })
    }
}

/// Rewards and advantages for one group of rollouts sharing a prompt.
pub fn reward_batch(
    reports: &[ValidationReport],
    l_ref: usize,
    config: &RewardConfig,
) -> Result<GroupSample, BatchError> {
    let rewards = reports
        .iter()
        .map(|r| compute_reward(r, l_ref, config).map(|x| x.value))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(GroupSample::new(rewards)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BatchError {
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Empty(#[from] EmptyGroup),
}
