//! Seeded problem generation: random instances, constraint injection,
//! feasibility filtering and deduplication up to object renaming.

mod generate;
mod signature;

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curriculum::{difficulty_score, SizeParams};
use crate::fixtures::DomainTag;
use crate::pddl::{ground_task, DomainDef, GroundedTask, Plan, ProblemDef};
use crate::refplan::{solve, SolveOptions};
use crate::validator::{validate, Category};

pub use signature::{canonical_signature, CanonicalSignature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("{size} is outside the supported range {range}")]
    OutOfRange {
        size: SizeParams,
        range: &'static str,
    },
    #[error("{0} has a zero parameter")]
    Degenerate(SizeParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub size: SizeParams,
    pub seed: u64,
    /// Accept sizes outside the standard ranges.
    #[serde(default)]
    pub allow_out_of_range: bool,
}

impl GenParams {
    pub fn new(size: SizeParams, seed: u64) -> Self {
        GenParams {
            size,
            seed,
            allow_out_of_range: false,
        }
    }

    pub fn domain(&self) -> DomainTag {
        self.size.domain()
    }

    pub fn check(&self) -> Result<(), GenError> {
        let (ok, range, degenerate) = match self.size {
            SizeParams::Blocksworld { n } => ((3..=6).contains(&n), "n in 3..=6", n < 2),
            SizeParams::Ferry { l, c } => (
                (3..=4).contains(&l) && (2..=3).contains(&c),
                "l in 3..=4, c in 2..=3",
                l < 2 || c == 0,
            ),
            SizeParams::Grippers { n, r, o } => (
                n == 1 && (3..=4).contains(&r) && o == 3,
                "n = 1, r in 3..=4, o = 3",
                n == 0 || r < 2 || o == 0,
            ),
            SizeParams::Spanner { s, n, l } => (
                (2..=3).contains(&s) && n == 2 && (3..=4).contains(&l),
                "s in 2..=3, n = 2, l in 3..=4",
                s == 0 || n == 0 || l < 2,
            ),
        };
        if degenerate {
            return Err(GenError::Degenerate(self.size));
        }
        if !ok && !self.allow_out_of_range {
            return Err(GenError::OutOfRange {
                size: self.size,
                range,
            });
        }
        Ok(())
    }
}

/// Every size in the standard range for `domain`.
pub fn standard_sizes(domain: DomainTag) -> Vec<SizeParams> {
    match domain {
        DomainTag::Blocksworld => (3..=6).map(|n| SizeParams::Blocksworld { n }).collect(),
        DomainTag::Ferry => (3..=4)
            .flat_map(|l| (2..=3).map(move |c| SizeParams::Ferry { l, c }))
            .collect(),
        DomainTag::Grippers => (3..=4)
            .map(|r| SizeParams::Grippers { n: 1, r, o: 3 })
            .collect(),
        DomainTag::Spanner => (2..=3)
            .flat_map(|s| (3..=4).map(move |l| SizeParams::Spanner { s, n: 2, l }))
            .collect(),
    }
}

/// The smallest standard size for `domain`.
pub fn minimum_size(domain: DomainTag) -> SizeParams {
    standard_sizes(domain)[0]
}

/// A random unconstrained instance; deterministic in `params`.
pub fn generate(params: &GenParams) -> Result<ProblemDef, GenError> {
    params.check()?;
    let mut problem = generate::instance(&params.size, params.seed);
    problem.name = format!("{}-{}", params.domain().name(), params.seed);
    Ok(problem)
}

/// Attaches the domain's constraint templates, instantiated over the
/// problem's own objects. Existing constraints are replaced.
pub fn inject_constraints(mut problem: ProblemDef, domain: DomainTag, seed: u64) -> ProblemDef {
    problem.constraints = generate::constraints_for(&problem, domain, seed);
    problem
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibleProblem {
    pub problem: ProblemDef,
    pub plan: Plan,
}

impl FeasibleProblem {
    pub fn l_ref(&self) -> usize {
        self.plan.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dropped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub kept: Vec<FeasibleProblem>,
    pub dropped: Vec<Dropped>,
}

fn check_feasible(
    domain: &DomainDef,
    problem: &ProblemDef,
    options: SolveOptions,
) -> Result<Plan, String> {
    let task: GroundedTask = ground_task(domain, problem).map_err(|e| e.to_string())?;
    let solution = solve(&task, options).map_err(|e| e.to_string())?;
    if solution.plan.is_empty() {
        return Err("goal already holds in the initial state".into());
    }
    let report = validate(domain, &task, &solution.plan);
    if report.category != Category::C5 {
        return Err(format!(
            "reference plan classified {}: {}",
            report.category, report.message
        ));
    }
    Ok(solution.plan)
}

/// Keeps the problems with a non-empty reference plan that validates c5.
/// Order is preserved; problems run in parallel.
pub fn filter_feasible(
    domain: &DomainDef,
    pool: Vec<ProblemDef>,
    options: SolveOptions,
) -> FilterOutcome {
    let results: Vec<(ProblemDef, Result<Plan, String>)> = pool
        .into_par_iter()
        .map(|p| {
            let r = check_feasible(domain, &p, options);
            (p, r)
        })
        .collect();
    let mut out = FilterOutcome::default();
    for (problem, result) in results {
        match result {
            Ok(plan) => out.kept.push(FeasibleProblem { problem, plan }),
            Err(reason) => {
                log::info!("dropping {}: {reason}", problem.name);
                out.dropped.push(Dropped {
                    name: problem.name,
                    reason,
                });
            }
        }
    }
    out
}

/// One generated, injected, deduplicated and solved problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolEntry {
    pub id: String,
    pub params: GenParams,
    pub signature: CanonicalSignature,
    pub difficulty: u64,
    pub problem: ProblemDef,
    pub plan: Plan,
}

impl PoolEntry {
    pub fn l_ref(&self) -> usize {
        self.plan.len()
    }
}

#[derive(Debug, Clone)]
pub struct PoolRequest {
    pub domain: DomainTag,
    /// Drawn uniformly per attempt.
    pub sizes: Vec<SizeParams>,
    pub count: usize,
    pub seed: u64,
    pub allow_out_of_range: bool,
    pub solve: SolveOptions,
    /// Candidates tried per requested problem before giving up.
    pub attempts_per_problem: usize,
}

impl PoolRequest {
    pub fn new(domain: DomainTag, count: usize, seed: u64) -> Self {
        PoolRequest {
            domain,
            sizes: standard_sizes(domain),
            count,
            seed,
            allow_out_of_range: false,
            solve: SolveOptions::default(),
            attempts_per_problem: 20,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PoolReport {
    pub entries: Vec<PoolEntry>,
    pub attempts: usize,
    pub duplicates: usize,
    pub dropped: Vec<Dropped>,
}

/// Generate, inject, deduplicate and filter until `count` problems are kept
/// or the attempt budget runs out. Deterministic in the request.
pub fn build_pool(request: &PoolRequest) -> Result<PoolReport, GenError> {
    let domain = request.domain.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
    let mut seen: HashSet<CanonicalSignature> = HashSet::new();
    let mut report = PoolReport {
        entries: Vec::new(),
        attempts: 0,
        duplicates: 0,
        dropped: Vec::new(),
    };
    let budget = request.count.saturating_mul(request.attempts_per_problem);

    while report.entries.len() < request.count && report.attempts < budget {
        // Draw a batch of candidates, dedup serially, then solve in parallel.
        let want = (request.count - report.entries.len()).min(budget - report.attempts);
        let mut batch = Vec::new();
        for _ in 0..want {
            report.attempts += 1;
            let size = request.sizes[rng.gen_range(0..request.sizes.len())];
            let params = GenParams {
                size,
                seed: rng.gen(),
                allow_out_of_range: request.allow_out_of_range,
            };
            let problem = inject_constraints(
                generate(&params)?,
                request.domain,
                params.seed ^ 0x9e37_79b9_7f4a_7c15,
            );
            let signature = canonical_signature(&problem);
            if !seen.insert(signature.clone()) {
                report.duplicates += 1;
                continue;
            }
            batch.push((params, signature, problem));
        }
        let solved: Vec<_> = batch
            .into_par_iter()
            .map(|(params, signature, problem)| {
                let plan = check_feasible(&domain, &problem, request.solve);
                (params, signature, problem, plan)
            })
            .collect();
        for (params, signature, mut problem, plan) in solved {
            match plan {
                Ok(plan) if report.entries.len() < request.count => {
                    let id = format!("{}-{:04}", request.domain.name(), report.entries.len());
                    problem.name = id.clone();
                    let difficulty =
                        difficulty_score(request.domain, &params.size).expect("validated size");
                    report.entries.push(PoolEntry {
                        id,
                        params,
                        signature,
                        difficulty,
                        problem,
                        plan,
                    });
                }
                Ok(_) => {}
                Err(reason) => {
                    log::info!("dropping {}: {reason}", problem.name);
                    report.dropped.push(Dropped {
                        name: problem.name,
                        reason,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Manifest line for one pool entry; paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub domain: DomainTag,
    pub params: SizeParams,
    pub seed: u64,
    pub signature: String,
    pub l_ref: usize,
    pub difficulty: u64,
    pub problem_path: String,
    pub plan_path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolManifest {
    pub problems: Vec<ManifestRecord>,
}

pub const POOL_MANIFEST: &str = "pool.json";

/// Writes `problems/<id>.pddl`, `plans/<id>.plan` and the manifest under `dir`.
pub fn write_pool(dir: &Path, entries: &[PoolEntry]) -> io::Result<PoolManifest> {
    fs::create_dir_all(dir.join("problems"))?;
    fs::create_dir_all(dir.join("plans"))?;
    let mut problems = Vec::new();
    for e in entries {
        let problem_path = format!("problems/{}.pddl", e.id);
        let plan_path = format!("plans/{}.plan", e.id);
        fs::write(dir.join(&problem_path), e.problem.to_string())?;
        fs::write(dir.join(&plan_path), e.plan.to_text())?;
        problems.push(ManifestRecord {
            id: e.id.clone(),
            domain: e.params.domain(),
            params: e.params.size,
            seed: e.params.seed,
            signature: e.signature.digest(),
            l_ref: e.l_ref(),
            difficulty: e.difficulty,
            problem_path,
            plan_path,
        });
    }
    let manifest = PoolManifest { problems };
    fs::write(
        dir.join(POOL_MANIFEST),
        serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?,
    )?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> io::Result<PoolManifest> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}
