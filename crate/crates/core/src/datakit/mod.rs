//! Instruction/response records for supervised and RL training.

mod json;
mod nl;
mod template;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curriculum::{bucketize, Bucket, ProblemMeta};
use crate::fixtures::DomainTag;
use crate::pddl::{ground_task, parse_domain, parse_plan, parse_problem, DomainDef, ProblemDef};
use crate::probgen::{canonical_signature, read_manifest, GenParams, PoolEntry};
use crate::validator::{validate, Category, LoadError};

pub use json::{
    problem_from_json, problem_from_value, problem_to_json, problem_to_value, JsonError,
};
pub use nl::{constraint as constraint_to_nl, domain_to_nl, phrase, problem_to_nl};
pub use template::{fill_template, Format, REQUIREMENTS};

/// The problem rendered in `format`.
pub fn render_problem(problem: &ProblemDef, format: Format) -> String {
    match format {
        Format::Pddl3 => problem.to_string(),
        Format::Nl => problem_to_nl(problem),
        Format::Json => problem_to_json(problem),
    }
}

/// Only the natural-language format rewrites the domain; the JSON format
/// keeps the PDDL domain as is.
pub fn render_domain(domain: &DomainDef, domain_text: &str, format: Format) -> String {
    match format {
        Format::Nl => domain_to_nl(domain),
        Format::Pddl3 | Format::Json => domain_text.to_string(),
    }
}

/// Builds the instruction from raw texts. The PDDL format embeds both texts
/// unchanged.
pub fn to_instruction(
    domain_text: &str,
    problem_text: &str,
    format: Format,
) -> Result<String, LoadError> {
    if format == Format::Pddl3 {
        return Ok(fill_template(domain_text, problem_text));
    }
    let domain = parse_domain(domain_text).map_err(LoadError::Domain)?;
    let problem = parse_problem(problem_text).map_err(LoadError::Problem)?;
    Ok(fill_template(
        &render_domain(&domain, domain_text, format),
        &render_problem(&problem, format),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub sft: usize,
    pub grpo: usize,
    pub test: usize,
}

impl SplitSpec {
    /// Full-size per-domain counts.
    pub const FULL: SplitSpec = SplitSpec {
        sft: 500,
        grpo: 500,
        test: 50,
    };

    pub fn scaled(&self, factor: f64) -> SplitSpec {
        let s = |n: usize| (n as f64 * factor).round() as usize;
        SplitSpec {
            sft: s(self.sft),
            grpo: s(self.grpo),
            test: s(self.test),
        }
    }

    pub fn total(&self) -> usize {
        self.sft + self.grpo + self.test
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Sft,
    Grpo,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Sft, Split::Grpo, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Sft => "sft",
            Split::Grpo => "grpo",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub problem_id: String,
    pub split: Split,
    pub domain: DomainTag,
    pub format: Format,
    pub instruction: String,
    pub response: String,
    pub l_ref: usize,
    pub difficulty: u64,
    pub bucket: Bucket,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub problem_id: String,
    pub split: Split,
    pub domain: DomainTag,
    pub format: Format,
    pub l_ref: usize,
    pub difficulty: u64,
    pub bucket: Bucket,
    pub seed: u64,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub splits: SplitSpec,
    pub formats: Vec<Format>,
    pub records: Vec<ManifestEntry>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("record {id}: reference plan does not validate ({category}: {message})")]
    Gate {
        id: String,
        category: Category,
        message: String,
    },
    #[error("record {id}: {reason}")]
    RoundTrip { id: String, reason: String },
    #[error("{domain}: split needs {need} problems, pool has {have}")]
    InsufficientPool {
        domain: DomainTag,
        need: usize,
        have: usize,
    },
    #[error("{id}: {reason}")]
    BadEntry { id: String, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Re-validates the reference plan against the problem and against its JSON
/// round trip.
fn gate(domains: &BTreeMap<DomainTag, DomainDef>, entry: &PoolEntry) -> Result<(), DatasetError> {
    let domain = &domains[&entry.params.domain()];
    let bad = |reason: String| DatasetError::BadEntry {
        id: entry.id.clone(),
        reason,
    };
    let task = ground_task(domain, &entry.problem).map_err(|e| bad(e.to_string()))?;
    let report = validate(domain, &task, &entry.plan);
    if report.category != Category::C5 || entry.plan.is_empty() {
        return Err(DatasetError::Gate {
            id: entry.id.clone(),
            category: report.category,
            message: report.message,
        });
    }
    let round_trip = |reason: String| DatasetError::RoundTrip {
        id: entry.id.clone(),
        reason,
    };
    let back = problem_from_json(&problem_to_json(&entry.problem))
        .map_err(|e| round_trip(e.to_string()))?;
    if canonical_signature(&back) != canonical_signature(&entry.problem) {
        return Err(round_trip(
            "JSON round trip changed the canonical signature".into(),
        ));
    }
    let task = ground_task(domain, &back).map_err(|e| round_trip(e.to_string()))?;
    let report = validate(domain, &task, &entry.plan);
    if report.category != Category::C5 {
        return Err(round_trip(format!(
            "plan is {} on the JSON round trip: {}",
            report.category, report.message
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
    pub manifest: DatasetManifest,
}

impl Dataset {
    pub fn count(&self, domain: DomainTag, split: Split, format: Format) -> usize {
        self.records
            .iter()
            .filter(|r| r.domain == domain && r.split == split && r.format == format)
            .count()
    }
}

/// One record per (problem, format), with problems split per domain.
/// Every entry passes the validation gate before anything is produced.
pub fn build_dataset(
    pool: &[PoolEntry],
    formats: &[Format],
    splits: SplitSpec,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    let domains: BTreeMap<DomainTag, DomainDef> = pool
        .iter()
        .map(|e| e.params.domain())
        .map(|d| (d, d.domain()))
        .collect();
    pool.par_iter().try_for_each(|e| gate(&domains, e))?;

    let mut metas: Vec<ProblemMeta> = pool
        .iter()
        .map(|e| ProblemMeta::new(e.id.clone(), e.params.size))
        .collect::<Result<_, _>>()
        .map_err(|e| DatasetError::BadEntry {
            id: "pool".into(),
            reason: e.to_string(),
        })?;
    bucketize(&mut metas);

    let mut assigned: Vec<(Split, usize)> = Vec::new();
    for (k, &domain) in domains.keys().enumerate() {
        let mut members: Vec<usize> = (0..pool.len())
            .filter(|&i| pool[i].params.domain() == domain)
            .collect();
        if members.len() < splits.total() {
            return Err(DatasetError::InsufficientPool {
                domain,
                need: splits.total(),
                have: members.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        members.shuffle(&mut rng);
        let mut it = members.into_iter();
        for (split, n) in [
            (Split::Sft, splits.sft),
            (Split::Grpo, splits.grpo),
            (Split::Test, splits.test),
        ] {
            assigned.extend(it.by_ref().take(n).map(|i| (split, i)));
        }
    }
    assigned.sort_by_key(|&(split, i)| (split, i));

    let records: Vec<DatasetRecord> = assigned
        .par_iter()
        .flat_map_iter(|&(split, i)| {
            let e = &pool[i];
            let meta = &metas[i];
            let domain_def = &domains[&e.params.domain()];
            let domain_text = e.params.domain().domain_text();
            formats.iter().map(move |&format| DatasetRecord {
                id: format!("{}-{}", e.id, format),
                problem_id: e.id.clone(),
                split,
                domain: e.params.domain(),
                format,
                instruction: fill_template(
                    &render_domain(domain_def, domain_text, format),
                    &render_problem(&e.problem, format),
                ),
                response: e.plan.to_text(),
                l_ref: e.l_ref(),
                difficulty: meta.difficulty,
                bucket: meta.bucket.expect("bucketized"),
                seed: e.params.seed,
            })
        })
        .collect();

    let manifest = DatasetManifest {
        seed,
        splits,
        formats: formats.to_vec(),
        records: records
            .iter()
            .map(|r| ManifestEntry {
                id: r.id.clone(),
                problem_id: r.problem_id.clone(),
                split: r.split,
                domain: r.domain,
                format: r.format,
                l_ref: r.l_ref,
                difficulty: r.difficulty,
                bucket: r.bucket,
                seed: r.seed,
                path: record_path(r),
            })
            .collect(),
    };
    Ok(Dataset { records, manifest })
}

fn record_path(r: &DatasetRecord) -> String {
    format!("{}/{}.json", r.split.name(), r.id)
}

pub const DATASET_MANIFEST: &str = "manifest.json";

/// One JSON file per record, then the manifest.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<(), DatasetError> {
    for split in Split::ALL {
        let d = dir.join(split.name());
        fs::create_dir_all(&d).map_err(io_err(&d))?;
    }
    dataset.records.par_iter().try_for_each(|r| {
        let path = dir.join(record_path(r));
        let text = serde_json::to_string_pretty(r).expect("records serialize");
        fs::write(&path, text + "\n").map_err(io_err(&path))
    })?;
    let path = dir.join(DATASET_MANIFEST);
    let text = serde_json::to_string_pretty(&dataset.manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))
}

/// Reads a pool written by [`crate::probgen::write_pool`].
pub fn load_pool(manifest_path: &Path) -> Result<Vec<PoolEntry>, DatasetError> {
    let manifest = read_manifest(manifest_path).map_err(io_err(manifest_path))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    manifest
        .problems
        .into_iter()
        .map(|rec| {
            let bad = |reason: String| DatasetError::BadEntry {
                id: rec.id.clone(),
                reason,
            };
            let read = |rel: &str| {
                let path = base.join(rel);
                fs::read_to_string(&path).map_err(io_err(&path))
            };
            let problem =
                parse_problem(&read(&rec.problem_path)?).map_err(|e| bad(e.to_string()))?;
            let plan = parse_plan(&read(&rec.plan_path)?).map_err(|e| bad(e.to_string()))?;
            let signature = canonical_signature(&problem);
            if signature.digest() != rec.signature {
                return Err(bad(
                    "problem file does not match its recorded signature".into()
                ));
            }
            Ok(PoolEntry {
                id: rec.id,
                params: GenParams::new(rec.params, rec.seed),
                signature,
                difficulty: rec.difficulty,
                problem,
                plan,
            })
        })
        .collect()
}
