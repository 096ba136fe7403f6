//! `safeplan`: validate, score, plan, generate and package constrained
//! planning problems.
//!
//! Exit codes: 0 success (or c5), 1 usage or configuration error, 2 input
//! parse error, 3 no plan or too few problems found, 4 dataset gate
//! failure, 11-14 for a c1-c4 validation result.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use safeplan_core::curriculum::{
    bucketize, load_curriculum_config, CurriculumConfig, CurriculumSampler, ProblemMeta, SizeParams,
};
use safeplan_core::datakit::{
    build_dataset, load_pool, problem_from_json, render_problem, write_dataset, DatasetError,
    Format, SplitSpec,
};
use safeplan_core::pddl::{ground_task, parse_domain, parse_problem, ProblemDef};
use safeplan_core::probgen::{build_pool, read_manifest, standard_sizes, write_pool, PoolRequest};
use safeplan_core::refplan::{solve, Budget, Mode, SolveOptions, Strategy};
use safeplan_core::reward::{compute_reward, group_advantages, reward_config_or_default};
use safeplan_core::validator::{validate_text, Category, ValidationReport};
use safeplan_core::DomainTag;

#[derive(Parser)]
#[command(name = "safeplan", version, about = "Constrained planning toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a plan; exits 0 for c5 and 10+k for category ck.
    Validate {
        domain: PathBuf,
        problem: PathBuf,
        /// Plan file, or `-` for stdin.
        plan: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score a validation report.
    Reward {
        /// Report JSON (or `validate` output), or `-` for stdin.
        report: PathBuf,
        #[arg(long = "l-ref")]
        l_ref: usize,
        /// TOML reward table.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Group-relative advantages of whitespace-separated rewards.
    Advantages { rewards: PathBuf },
    /// Generate, constrain, deduplicate and solve a problem pool.
    Gen(GenArgs),
    /// Find a reference plan.
    Plan {
        domain: PathBuf,
        problem: PathBuf,
        /// Ignore trajectory constraints.
        #[arg(long)]
        blind: bool,
        /// Maximum stored search nodes.
        #[arg(long, default_value_t = Budget::default().max_nodes)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Bfs)]
        strategy: StrategyArg,
    },
    /// Render a problem (PDDL or JSON input) in another format.
    Convert {
        problem: PathBuf,
        #[arg(long)]
        to: Format,
    },
    /// Turn a generated pool into split training records.
    BuildDataset {
        pool_manifest: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "pddl3,nl,json")]
        formats: Vec<Format>,
        /// Multiplier on the 500/500/50 per-domain split.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    Curriculum {
        #[command(subcommand)]
        command: CurriculumCommand,
    },
}

#[derive(Subcommand)]
enum CurriculumCommand {
    /// Draw one training batch.
    Sample {
        #[arg(long)]
        pool: PathBuf,
        #[arg(long)]
        step: u64,
        #[arg(long)]
        total: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct GenArgs {
    domain: DomainTag,
    /// Fixed size, e.g. `n=4` or `l=3,c=2`; all standard sizes if omitted.
    #[arg(long)]
    size: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    allow_out_of_range: bool,
    #[arg(long, default_value_t = Budget::default().max_nodes)]
    budget: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Bfs,
    GoalCount,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait Code<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Code<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

fn fail<T>(code: u8, msg: String) -> Result<T, Failure> {
    Err(Failure {
        code,
        error: anyhow::anyhow!(msg),
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .context("reading stdin")
            .code(1)?;
        return Ok(s);
    }
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .code(1)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .code(1)
}

fn load_problem(text: &str, path: &Path) -> Result<ProblemDef, Failure> {
    if text.trim_start().starts_with('{') {
        problem_from_json(text)
            .with_context(|| path.display().to_string())
            .code(2)
    } else {
        parse_problem(text)
            .with_context(|| path.display().to_string())
            .code(2)
    }
}

fn category_exit(category: Category) -> u8 {
    match category {
        Category::C5 => 0,
        c => 10 + c.rank(),
    }
}

/// Accepts raw report JSON or `validate` output (category line, then JSON).
fn parse_report(text: &str) -> Result<ValidationReport, Failure> {
    let start = text
        .find('{')
        .ok_or_else(|| anyhow::anyhow!("no report JSON found"))
        .code(2)?;
    serde_json::from_str(&text[start..])
        .context("parsing report")
        .code(2)
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn parse_size(domain: DomainTag, text: &str) -> Result<SizeParams, Failure> {
    let mut values = BTreeMap::new();
    for part in text.split(',').filter(|p| !p.is_empty()) {
        let parsed = part.split_once('=').and_then(|(k, v)| {
            let mut chars = k.trim().chars();
            match (chars.next(), chars.next(), v.trim().parse::<u32>()) {
                (Some(c), None, Ok(v)) => Some((c, v)),
                _ => None,
            }
        });
        match parsed {
            Some((k, v)) => values.insert(k, v),
            None => return fail(1, format!("bad size component `{part}`; expected e.g. n=4")),
        };
    }
    SizeParams::from_named(domain, &values).code(1)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Validate {
            domain,
            problem,
            plan,
            report,
        } => {
            let domain_def = parse_domain(&read(&domain)?)
                .with_context(|| domain.display().to_string())
                .code(2)?;
            let problem_def = load_problem(&read(&problem)?, &problem)?;
            let task = ground_task(&domain_def, &problem_def).code(2)?;
            let r = validate_text(&domain_def, &task, &read(&plan)?);
            let json = serde_json::to_string_pretty(&r).expect("reports serialize");
            if let Some(path) = report {
                write(&path, &(json.clone() + "\n"))?;
            }
            println!("{}", r.category);
            println!("{json}");
            Ok(category_exit(r.category))
        }
        Command::Reward {
            report,
            l_ref,
            config,
            json,
        } => {
            let r = parse_report(&read(&report)?)?;
            let config_text = config.map(|p| read(&p)).transpose()?;
            let cfg = reward_config_or_default(config_text.as_deref()).code(1)?;
            let result = compute_reward(&r, l_ref, &cfg).code(1)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string(&result).expect("results serialize")
                );
            } else {
                println!("{}", trim_float(result.value));
                println!("rho {}", trim_float(result.rho));
            }
            Ok(0)
        }
        Command::Advantages { rewards } => {
            let text = read(&rewards)?;
            let values = text
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .with_context(|| format!("bad reward `{t}`"))
                })
                .collect::<Result<Vec<_>, _>>()
                .code(2)?;
            for a in group_advantages(&values).code(2)? {
                println!("{}", trim_float(a));
            }
            Ok(0)
        }
        Command::Gen(args) => {
            let sizes = match &args.size {
                Some(s) => vec![parse_size(args.domain, s)?],
                None => standard_sizes(args.domain),
            };
            let mut request = PoolRequest::new(args.domain, args.count, args.seed);
            request.sizes = sizes;
            request.allow_out_of_range = args.allow_out_of_range;
            request.solve.budget.max_nodes = args.budget;
            let report = build_pool(&request).code(1)?;
            write_pool(&args.out, &report.entries)
                .context("writing pool")
                .code(1)?;
            eprintln!(
                "{}: kept {} of {} candidates ({} duplicates, {} dropped)",
                args.domain,
                report.entries.len(),
                report.attempts,
                report.duplicates,
                report.dropped.len()
            );
            if report.entries.len() < args.count {
                return fail(
                    3,
                    format!(
                        "only {} of {} requested problems are feasible",
                        report.entries.len(),
                        args.count
                    ),
                );
            }
            Ok(0)
        }
        Command::Plan {
            domain,
            problem,
            blind,
            budget,
            strategy,
        } => {
            let domain_def = parse_domain(&read(&domain)?)
                .with_context(|| domain.display().to_string())
                .code(2)?;
            let problem_def = load_problem(&read(&problem)?, &problem)?;
            let task = ground_task(&domain_def, &problem_def).code(2)?;
            let options = SolveOptions {
                mode: if blind {
                    Mode::Blind
                } else {
                    Mode::Constrained
                },
                strategy: match strategy {
                    StrategyArg::Bfs => Strategy::BreadthFirst,
                    StrategyArg::GoalCount => Strategy::GoalCount,
                },
                budget: Budget {
                    max_nodes: budget,
                    max_depth: None,
                },
            };
            let solution = solve(&task, options).code(3)?;
            print!("{}", solution.plan.to_text());
            log::info!("{} steps, {} nodes", solution.plan.len(), solution.nodes);
            Ok(0)
        }
        Command::Convert { problem, to } => {
            let p = load_problem(&read(&problem)?, &problem)?;
            print!("{}", render_problem(&p, to));
            Ok(0)
        }
        Command::BuildDataset {
            pool_manifest,
            formats,
            scale,
            seed,
            out,
        } => {
            if !(scale > 0.0 && scale.is_finite()) {
                return fail(1, format!("--scale must be positive, got {scale}"));
            }
            let pool = load_pool(&pool_manifest).code(2)?;
            let splits = SplitSpec::FULL.scaled(scale);
            let dataset = match build_dataset(&pool, &formats, splits, seed) {
                Ok(d) => d,
                Err(e @ (DatasetError::Gate { .. } | DatasetError::RoundTrip { .. })) => {
                    return Err(e).code(4)
                }
                Err(e @ DatasetError::InsufficientPool { .. }) => return Err(e).code(3),
                Err(e) => return Err(e).code(1),
            };
            write_dataset(&out, &dataset).code(1)?;
            eprintln!(
                "wrote {} records to {}",
                dataset.records.len(),
                out.display()
            );
            Ok(0)
        }
        Command::Curriculum {
            command:
                CurriculumCommand::Sample {
                    pool,
                    step,
                    total,
                    config,
                    seed,
                },
        } => {
            let manifest = read_manifest(&pool)
                .with_context(|| pool.display().to_string())
                .code(2)?;
            let cfg = match config {
                Some(p) => load_curriculum_config(&read(&p)?).code(1)?,
                // Without a config, sample only the domains the pool has.
                None => {
                    let mut cfg = CurriculumConfig::default();
                    cfg.domains
                        .retain(|d| manifest.problems.iter().any(|r| r.domain == *d));
                    cfg
                }
            };
            let mut metas: Vec<ProblemMeta> = manifest
                .problems
                .iter()
                .map(|r| ProblemMeta::new(r.id.clone(), r.params))
                .collect::<Result<_, _>>()
                .code(2)?;
            bucketize(&mut metas);
            let mut sampler = CurriculumSampler::new(cfg, seed).code(1)?;
            let batch = sampler.sample(&metas, step, total).code(1)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&batch).expect("batches serialize")
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
