//! Difficulty scoring, percentile bucketing and phased, domain-balanced
//! batch sampling.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixtures::DomainTag;

/// Structural size parameters, named as in the difficulty formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeParams {
    /// `n` blocks.
    Blocksworld { n: u32 },
    /// `l` locations, `c` cars.
    Ferry { l: u32, c: u32 },
    /// `n` robots, `r` rooms, `o` objects.
    Grippers { n: u32, r: u32, o: u32 },
    /// `s` spanners, `n` nuts, `l` locations.
    Spanner { s: u32, n: u32, l: u32 },
}

impl SizeParams {
    pub fn domain(&self) -> DomainTag {
        match self {
            SizeParams::Blocksworld { .. } => DomainTag::Blocksworld,
            SizeParams::Ferry { .. } => DomainTag::Ferry,
            SizeParams::Grippers { .. } => DomainTag::Grippers,
            SizeParams::Spanner { .. } => DomainTag::Spanner,
        }
    }

    fn values(&self) -> Vec<(char, u32)> {
        match *self {
            SizeParams::Blocksworld { n } => vec![('n', n)],
            SizeParams::Ferry { l, c } => vec![('l', l), ('c', c)],
            SizeParams::Grippers { n, r, o } => vec![('n', n), ('r', r), ('o', o)],
            SizeParams::Spanner { s, n, l } => vec![('s', s), ('n', n), ('l', l)],
        }
    }

    /// Builds the parameters for `domain` from named values, e.g. `l=3, c=2`.
    pub fn from_named(
        domain: DomainTag,
        values: &BTreeMap<char, u32>,
    ) -> Result<Self, CurriculumError> {
        let get = |k: char| {
            values
                .get(&k)
                .copied()
                .ok_or(CurriculumError::MissingParameter { domain, name: k })
        };
        Ok(match domain {
            DomainTag::Blocksworld => SizeParams::Blocksworld { n: get('n')? },
            DomainTag::Ferry => SizeParams::Ferry {
                l: get('l')?,
                c: get('c')?,
            },
            DomainTag::Grippers => SizeParams::Grippers {
                n: get('n')?,
                r: get('r')?,
                o: get('o')?,
            },
            DomainTag::Spanner => SizeParams::Spanner {
                s: get('s')?,
                n: get('n')?,
                l: get('l')?,
            },
        })
    }
}

impl fmt::Display for SizeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .values()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        write!(f, "{}({})", self.domain(), parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurriculumError {
    #[error("{domain} difficulty needs parameter `{name}`")]
    MissingParameter { domain: DomainTag, name: char },
    #[error("size parameters {params} do not belong to domain {domain}")]
    DomainMismatch {
        domain: DomainTag,
        params: SizeParams,
    },
    #[error("size parameter `{name}` must be positive")]
    NonPositive { name: char },
    #[error("step {step} outside 0..{total}")]
    StepOutOfRange { step: u64, total: u64 },
    #[error("pool has no problems for domain {0}")]
    EmptyDomain(DomainTag),
    #[error("problem `{0}` has no bucket; bucketize the pool first")]
    NotBucketized(String),
    #[error("invalid curriculum config: {0}")]
    InvalidConfig(String),
}

/// blocksworld `n²`, ferry `l·c`, grippers `n·r·o`, spanner `s·n·l`.
pub fn difficulty_score(domain: DomainTag, params: &SizeParams) -> Result<u64, CurriculumError> {
    if params.domain() != domain {
        return Err(CurriculumError::DomainMismatch {
            domain,
            params: *params,
        });
    }
    let values = params.values();
    if let Some((name, _)) = values.iter().find(|(_, v)| *v == 0) {
        return Err(CurriculumError::NonPositive { name: *name });
    }
    let v: Vec<u64> = values.iter().map(|(_, v)| u64::from(*v)).collect();
    Ok(match params {
        SizeParams::Blocksworld { .. } => v[0] * v[0],
        _ => v.iter().product(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Easy,
    Medium,
    Hard,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::Easy, Bucket::Medium, Bucket::Hard];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bucket::Easy => "easy",
            Bucket::Medium => "medium",
            Bucket::Hard => "hard",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemMeta {
    pub id: String,
    pub domain: DomainTag,
    pub size: SizeParams,
    pub difficulty: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bucket: Option<Bucket>,
}

impl ProblemMeta {
    pub fn new(id: impl Into<String>, size: SizeParams) -> Result<Self, CurriculumError> {
        let domain = size.domain();
        Ok(ProblemMeta {
            id: id.into(),
            domain,
            size,
            difficulty: difficulty_score(domain, &size)?,
            bucket: None,
        })
    }
}

/// Nearest-rank percentile of sorted values: the element at rank `ceil(p·N/100)`.
pub fn nearest_rank(sorted: &[u64], percent: u64) -> u64 {
    assert!(!sorted.is_empty(), "percentile of an empty list");
    let n = sorted.len() as u64;
    let rank = (percent * n).div_ceil(100).max(1);
    sorted[(rank - 1) as usize]
}

/// The 40th and 80th nearest-rank percentiles.
pub fn thresholds(values: &[u64]) -> (u64, u64) {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    (nearest_rank(&sorted, 40), nearest_rank(&sorted, 80))
}

pub fn bucket_for(difficulty: u64, (p40, p80): (u64, u64)) -> Bucket {
    if difficulty <= p40 {
        Bucket::Easy
    } else if difficulty <= p80 {
        Bucket::Medium
    } else {
        Bucket::Hard
    }
}

/// Assigns buckets within each domain independently. Values equal to a
/// threshold fall into the lower bucket.
pub fn bucketize(pool: &mut [ProblemMeta]) {
    let mut by_domain: BTreeMap<DomainTag, Vec<u64>> = BTreeMap::new();
    for p in pool.iter() {
        by_domain.entry(p.domain).or_default().push(p.difficulty);
    }
    let cuts: BTreeMap<DomainTag, (u64, u64)> =
        by_domain.iter().map(|(d, v)| (*d, thresholds(v))).collect();
    for p in pool.iter_mut() {
        p.bucket = Some(bucket_for(p.difficulty, cuts[&p.domain]));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Early,
    Mid,
    Late,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Early, Phase::Mid, Phase::Late];
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Early => "early",
            Phase::Mid => "mid",
            Phase::Late => "late",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseTable {
    /// Progress fractions where mid and late begin.
    pub boundaries: [f64; 2],
    /// Easy/medium/hard probabilities per phase.
    pub early: [f64; 3],
    pub mid: [f64; 3],
    pub late: [f64; 3],
}

impl Default for PhaseTable {
    fn default() -> Self {
        PhaseTable {
            boundaries: [0.3, 0.7],
            early: [0.70, 0.25, 0.05],
            mid: [0.40, 0.40, 0.20],
            late: [0.20, 0.40, 0.40],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurriculumConfig {
    pub batch_size: usize,
    pub domains: Vec<DomainTag>,
    pub phases: PhaseTable,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            batch_size: 8,
            domains: DomainTag::ALL.to_vec(),
            phases: PhaseTable::default(),
        }
    }
}

impl CurriculumConfig {
    pub fn check(&self) -> Result<(), CurriculumError> {
        let bad = |m: String| Err(CurriculumError::InvalidConfig(m));
        if self.domains.is_empty() {
            return bad("domain list is empty".into());
        }
        let mut sorted = self.domains.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.domains.len() {
            return bad("domain list has duplicates".into());
        }
        if self.batch_size == 0 || !self.batch_size.is_multiple_of(self.domains.len()) {
            return bad(format!(
                "batch size {} is not a positive multiple of {} domains",
                self.batch_size,
                self.domains.len()
            ));
        }
        let [b1, b2] = self.phases.boundaries;
        if !(0.0 < b1 && b1 <= b2 && b2 < 1.0) {
            return bad(format!(
                "phase boundaries {b1}, {b2} must satisfy 0 < b1 <= b2 < 1"
            ));
        }
        for phase in Phase::ALL {
            let p = self.probabilities(phase);
            if p.iter().any(|x| !(0.0..=1.0).contains(x))
                || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9
            {
                return bad(format!(
                    "{phase} probabilities {p:?} do not form a distribution"
                ));
            }
        }
        Ok(())
    }

    pub fn probabilities(&self, phase: Phase) -> [f64; 3] {
        match phase {
            Phase::Early => self.phases.early,
            Phase::Mid => self.phases.mid,
            Phase::Late => self.phases.late,
        }
    }

    pub fn per_domain(&self) -> usize {
        self.batch_size / self.domains.len()
    }
}

pub fn load_curriculum_config(text: &str) -> Result<CurriculumConfig, CurriculumError> {
    let config: CurriculumConfig =
        toml::from_str(text).map_err(|e| CurriculumError::InvalidConfig(e.to_string()))?;
    config.check()?;
    Ok(config)
}

/// Phase windows are half-open and lower-inclusive.
pub fn phase_of(
    step: u64,
    total_steps: u64,
    config: &CurriculumConfig,
) -> Result<Phase, CurriculumError> {
    if step >= total_steps {
        return Err(CurriculumError::StepOutOfRange {
            step,
            total: total_steps,
        });
    }
    let progress = step as f64 / total_steps as f64;
    let [b1, b2] = config.phases.boundaries;
    Ok(if progress < b1 {
        Phase::Early
    } else if progress < b2 {
        Phase::Mid
    } else {
        Phase::Late
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchItem {
    pub id: String,
    pub domain: DomainTag,
    pub bucket: Bucket,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub step: u64,
    pub phase: Phase,
    pub seed: u64,
    pub items: Vec<BatchItem>,
}

/// Nearest non-empty bucket to `wanted`, preferring the easier one on ties.
fn fallback(wanted: usize, nonempty: [bool; 3]) -> Option<usize> {
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by_key(|&b| (b.abs_diff(wanted), b));
    order.into_iter().find(|&b| nonempty[b])
}

/// A seeded sampling stream; one per training run.
#[derive(Debug, Clone)]
pub struct CurriculumSampler {
    config: CurriculumConfig,
    seed: u64,
    rng: ChaCha8Rng,
}

impl CurriculumSampler {
    pub fn new(config: CurriculumConfig, seed: u64) -> Result<Self, CurriculumError> {
        config.check()?;
        Ok(CurriculumSampler {
            config,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn config(&self) -> &CurriculumConfig {
        &self.config
    }

    /// Draws the bucket for one sample in `phase`.
    pub fn draw_bucket(&mut self, phase: Phase) -> Bucket {
        let p = self.config.probabilities(phase);
        let u: f64 = self.rng.gen();
        let cut = if u < p[0] {
            0
        } else if u < p[0] + p[1] {
            1
        } else {
            2
        };
        Bucket::ALL[cut]
    }

    /// `batch_size / |domains|` problems per domain, in config domain order,
    /// drawn with replacement.
    pub fn sample(
        &mut self,
        pool: &[ProblemMeta],
        step: u64,
        total_steps: u64,
    ) -> Result<Batch, CurriculumError> {
        let phase = phase_of(step, total_steps, &self.config)?;
        if let Some(p) = pool.iter().find(|p| p.bucket.is_none()) {
            return Err(CurriculumError::NotBucketized(p.id.clone()));
        }
        let mut items = Vec::with_capacity(self.config.batch_size);
        for domain in self.config.domains.clone() {
            let mut buckets: [Vec<&ProblemMeta>; 3] = Default::default();
            for p in pool.iter().filter(|p| p.domain == domain) {
                buckets[p.bucket.expect("checked").index()].push(p);
            }
            let nonempty = [
                !buckets[0].is_empty(),
                !buckets[1].is_empty(),
                !buckets[2].is_empty(),
            ];
            for _ in 0..self.config.per_domain() {
                let wanted = self.draw_bucket(phase).index();
                let b = fallback(wanted, nonempty).ok_or(CurriculumError::EmptyDomain(domain))?;
                let pick = buckets[b][self.rng.gen_range(0..buckets[b].len())];
                items.push(BatchItem {
                    id: pick.id.clone(),
                    domain,
                    bucket: Bucket::ALL[b],
                });
            }
        }
        Ok(Batch {
            step,
            phase,
            seed: self.seed,
            items,
        })
    }
}

/// One batch from a fresh stream seeded with `seed`.
pub fn sample_batch(
    pool: &[ProblemMeta],
    step: u64,
    total_steps: u64,
    config: &CurriculumConfig,
    seed: u64,
) -> Result<Batch, CurriculumError> {
    CurriculumSampler::new(config.clone(), seed)?.sample(pool, step, total_steps)
}
