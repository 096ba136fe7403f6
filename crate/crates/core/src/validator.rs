//! Five-category plan classification.
//!
//! | category | meaning |
//! |----------|---------|
//! | c1 | format error: unparseable plan, unknown action, wrong arity, unknown or ill-typed object |
//! | c2 | safety violation: some state breaks a trajectory constraint |
//! | c3 | precondition violation |
//! | c4 | executes cleanly but the goal does not hold at the end |
//! | c5 | valid |
//!
//! Execution order decides between c2 and c3: whichever failure happens
//! first along the plan is reported.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{init_monitors, observe_all, ViolationEvent};
use crate::exec::{apply, check_precondition, goal_satisfaction, State};
use crate::pddl::{
    failed_equality, ground_task, parse_domain, parse_plan, parse_problem, DomainDef, GroundError,
    GroundedTask, ParseError, Plan, PlanStep,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "c1")]
    C1,
    #[serde(rename = "c2")]
    C2,
    #[serde(rename = "c3")]
    C3,
    #[serde(rename = "c4")]
    C4,
    #[serde(rename = "c5")]
    C5,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::C1,
        Category::C2,
        Category::C3,
        Category::C4,
        Category::C5,
    ];

    /// 1 for c1 (most severe) through 5 for c5.
    pub fn rank(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_rank(rank: u8) -> Option<Category> {
        Category::ALL
            .get(usize::from(rank).checked_sub(1)?)
            .copied()
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.rank())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('c')
            .and_then(|r| r.parse().ok())
            .and_then(Category::from_rank)
            .ok_or_else(|| format!("unknown category `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValidationReport {
    pub category: Category,
    /// c3: index of the inapplicable action (= number of actions executed).
    /// c2: index of the violating state, 0 being the initial state.
    pub t_v: Option<usize>,
    /// 0-based index of the action that failed or led into the violating state.
    pub failed_action_index: Option<usize>,
    /// Goal counts at the last state reached.
    pub n_sat: usize,
    pub n_total: usize,
    pub executed_steps: usize,
    pub message: String,
}

impl ValidationReport {
    fn at(
        category: Category,
        state: &State,
        task: &GroundedTask,
        executed_steps: usize,
        message: String,
    ) -> Self {
        let (n_sat, n_total) = goal_satisfaction(state, task);
        ValidationReport {
            category,
            t_v: None,
            failed_action_index: None,
            n_sat,
            n_total,
            executed_steps,
            message,
        }
    }

    fn format_error(task: &GroundedTask, message: String) -> Self {
        ValidationReport::at(
            Category::C1,
            &task.init,
            task,
            0,
            format!("Bad operator in plan: {message}"),
        )
    }

    fn violation(task: &GroundedTask, state: &State, event: &ViolationEvent) -> Self {
        let mut r = ValidationReport::at(
            Category::C2,
            state,
            task,
            event.step,
            format!(
                "Plan failed to execute: constraint {} violated in state {}",
                event.constraint, event.step
            ),
        );
        r.t_v = Some(event.step);
        r.failed_action_index = event.step.checked_sub(1);
        r
    }
}

fn normalize(step: &PlanStep) -> PlanStep {
    PlanStep {
        name: step.name.to_ascii_lowercase(),
        args: step.args.iter().map(|a| a.to_ascii_lowercase()).collect(),
    }
}

/// Schema-level checks that decide c1 for one step.
fn check_step(domain: &DomainDef, task: &GroundedTask, step: &PlanStep) -> Result<(), String> {
    let Some(schema) = domain.action(&step.name) else {
        return Err(format!("no matching action defined for {step}"));
    };
    if schema.params.len() != step.args.len() {
        return Err(format!(
            "{step}: action `{}` takes {} arguments, got {}",
            schema.name,
            schema.params.len(),
            step.args.len()
        ));
    }
    let hierarchy = domain.type_hierarchy();
    for (arg, param) in step.args.iter().zip(&schema.params) {
        let Some(obj) = task.objects.iter().find(|o| o.name == *arg) else {
            return Err(format!("{step}: unknown object `{arg}`"));
        };
        if !hierarchy.is_subtype(&obj.ty, &param.ty) {
            return Err(format!(
                "{step}: `{arg}` is a {}, parameter ?{} expects {}",
                obj.ty, param.name, param.ty
            ));
        }
    }
    Ok(())
}

/// Classifies `plan` against `task`, which must be grounded from `domain`.
pub fn validate(domain: &DomainDef, task: &GroundedTask, plan: &Plan) -> ValidationReport {
    let steps: Vec<PlanStep> = plan.steps.iter().map(normalize).collect();
    for (i, step) in steps.iter().enumerate() {
        if let Err(msg) = check_step(domain, task, step) {
            return ValidationReport::format_error(task, format!("{msg} at plan step {}", i + 1));
        }
    }

    let mut state = task.init.clone();
    let (mut monitors, event) = init_monitors(task, &state);
    if let Some(event) = event {
        return ValidationReport::violation(task, &state, &event);
    }

    for (i, step) in steps.iter().enumerate() {
        let failure = match task.lookup(step) {
            None => {
                let schema = domain.action(&step.name).expect("checked above");
                Some(
                    failed_equality(schema, &step.args)
                        .unwrap_or_else(|| "(instance not grounded)".into()),
                )
            }
            Some(action) => match check_precondition(&state, action) {
                Err(lit) => Some(task.literal_text(lit)),
                Ok(()) => {
                    state = apply(&state, action);
                    None
                }
            },
        };
        if let Some(lit) = failure {
            let mut r = ValidationReport::at(
                Category::C3,
                &state,
                task,
                i,
                format!("Plan failed to execute: unsatisfied precondition {lit} of {step} at plan step {}", i + 1),
            );
            r.t_v = Some(i);
            r.failed_action_index = Some(i);
            return r;
        }
        if let Some(event) = observe_all(task, &mut monitors, &state, i + 1) {
            let mut r = ValidationReport::violation(task, &state, &event);
            r.message.push_str(&format!(" after {step}"));
            return r;
        }
    }

    let (n_sat, n_total) = goal_satisfaction(&state, task);
    let (category, message) = if n_sat == n_total {
        (Category::C5, "Plan valid".to_string())
    } else {
        (
            Category::C4,
            format!("Goal not satisfied: {n_sat} of {n_total} goal conditions hold"),
        )
    };
    ValidationReport::at(category, &state, task, steps.len(), message)
}

/// Parses and classifies raw plan text; unparseable text is c1.
pub fn validate_text(domain: &DomainDef, task: &GroundedTask, plan_text: &str) -> ValidationReport {
    match parse_plan(plan_text) {
        Ok(plan) => validate(domain, task, &plan),
        Err(e) => ValidationReport::format_error(task, e.to_string()),
    }
}

/// Order-preserving; identical to validating each plan in turn.
pub fn classify_batch(
    domain: &DomainDef,
    task: &GroundedTask,
    plans: &[Plan],
) -> Vec<ValidationReport> {
    plans
        .par_iter()
        .map(|p| validate(domain, task, p))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("domain: {0}")]
    Domain(ParseError),
    #[error("problem: {0}")]
    Problem(ParseError),
    #[error(transparent)]
    Ground(#[from] GroundError),
}

pub fn load_task(
    domain_text: &str,
    problem_text: &str,
) -> Result<(DomainDef, GroundedTask), LoadError> {
    let domain = parse_domain(domain_text).map_err(LoadError::Domain)?;
    let problem = parse_problem(problem_text).map_err(LoadError::Problem)?;
    let task = ground_task(&domain, &problem)?;
    Ok((domain, task))
}

/// Text in, report out: the entry point used by scripts and bindings.
pub fn validate_texts(
    domain_text: &str,
    problem_text: &str,
    plan_text: &str,
) -> Result<ValidationReport, LoadError> {
    let (domain, task) = load_task(domain_text, problem_text)?;
    Ok(validate_text(&domain, &task, plan_text))
}
