//! Instantiation of action schemas, goals and trajectory constraints over a
//! problem's objects.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::plan::PlanStep;
use crate::exec::State;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new<S: AsRef<str>>(predicate: &str, args: &[S]) -> Self {
        GroundAtom {
            predicate: predicate.to_string(),
            args: args.iter().map(|a| a.as_ref().to_string()).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroundLiteral {
    pub fluent: usize,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    /// Precondition literals in schema declaration order.
    pub precondition: Vec<GroundLiteral>,
    pub add: Vec<usize>,
    /// Disjoint from `add`.
    pub delete: Vec<usize>,
}

impl GroundAction {
    pub fn step(&self) -> PlanStep {
        PlanStep {
            name: self.name.clone(),
            args: self.args.clone(),
        }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.step())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundFormula {
    /// Atoms that can never become true collapse to `Const(false)`.
    Const(bool),
    Atom(usize),
    Not(Box<GroundFormula>),
    And(Vec<GroundFormula>),
    Imply(Box<GroundFormula>, Box<GroundFormula>),
}

impl GroundFormula {
    pub fn atom(fluent: usize) -> Self {
        GroundFormula::Atom(fluent)
    }

    pub fn not(f: GroundFormula) -> Self {
        GroundFormula::Not(Box::new(f))
    }

    pub fn imply(a: GroundFormula, b: GroundFormula) -> Self {
        GroundFormula::Imply(Box::new(a), Box::new(b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroundConstraintBody {
    Always(GroundFormula),
    AlwaysImply {
        antecedent: GroundFormula,
        consequent: GroundFormula,
    },
    SometimeBefore {
        trigger: GroundFormula,
        requirement: GroundFormula,
    },
    AtMostOnce(GroundFormula),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundConstraint {
    pub body: GroundConstraintBody,
    /// PDDL text of this ground instance.
    pub text: String,
}

impl GroundConstraint {
    pub fn kind(&self) -> ConstraintKind {
        match self.body {
            GroundConstraintBody::Always(_) => ConstraintKind::Always,
            GroundConstraintBody::AlwaysImply { .. } => ConstraintKind::AlwaysImply,
            GroundConstraintBody::SometimeBefore { .. } => ConstraintKind::SometimeBefore,
            GroundConstraintBody::AtMostOnce(_) => ConstraintKind::AtMostOnce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Active(usize),
    Pruned(usize),
}

/// A problem instantiated over its objects. Immutable once built.
#[derive(Debug, Clone)]
pub struct GroundedTask {
    pub domain_name: String,
    pub problem_name: String,
    pub objects: Vec<TypedName>,
    /// Sorted by predicate name, then arguments.
    pub fluents: Vec<GroundAtom>,
    pub actions: Vec<GroundAction>,
    pub init: State,
    /// Deduplicated goal conjuncts; never empty.
    pub goal: Vec<GroundLiteral>,
    pub monitors: Vec<GroundConstraint>,
    fluent_index: HashMap<GroundAtom, usize>,
    action_index: HashMap<PlanStep, Slot>,
    pruned: Vec<GroundAction>,
}

impl GroundedTask {
    pub fn fluent_count(&self) -> usize {
        self.fluents.len()
    }

    pub fn fluent(&self, atom: &GroundAtom) -> Option<usize> {
        self.fluent_index.get(atom).copied()
    }

    /// Looks up a ground action by lower-cased name and arguments, including
    /// instances removed by static pruning.
    pub fn lookup(&self, step: &PlanStep) -> Option<&GroundAction> {
        match self.action_index.get(step)? {
            Slot::Active(i) => Some(&self.actions[*i]),
            Slot::Pruned(i) => Some(&self.pruned[*i]),
        }
    }

    /// Index into `actions` for an unpruned instance.
    pub fn action_id(&self, step: &PlanStep) -> Option<usize> {
        match self.action_index.get(step)? {
            Slot::Active(i) => Some(*i),
            Slot::Pruned(_) => None,
        }
    }

    pub fn pruned_count(&self) -> usize {
        self.pruned.len()
    }

    pub fn literal_text(&self, lit: GroundLiteral) -> String {
        let atom = &self.fluents[lit.fluent];
        if lit.positive {
            atom.to_string()
        } else {
            format!("(not {atom})")
        }
    }

    pub fn formula_text(&self, f: &GroundFormula) -> String {
        match f {
            GroundFormula::Const(b) => b.to_string(),
            GroundFormula::Atom(i) => self.fluents[*i].to_string(),
            GroundFormula::Not(x) => format!("(not {})", self.formula_text(x)),
            GroundFormula::And(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| self.formula_text(x)).collect();
                format!("(and {})", parts.join(" "))
            }
            GroundFormula::Imply(a, b) => {
                format!("(imply {} {})", self.formula_text(a), self.formula_text(b))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroundOptions {
    /// Drop instances whose static preconditions fail in the initial state.
    /// They stay resolvable through [`GroundedTask::lookup`].
    pub prune_static: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("problem is for domain `{problem}` but domain is `{domain}`")]
    DomainMismatch { domain: String, problem: String },
    #[error("type error: {0}")]
    Type(String),
    #[error("goal is empty")]
    EmptyGoal,
}

fn type_error(msg: impl Into<String>) -> GroundError {
    GroundError::Type(msg.into())
}

struct Grounder<'a> {
    domain: &'a DomainDef,
    problem: &'a ProblemDef,
    hierarchy: TypeHierarchy,
    object_types: HashMap<&'a str, &'a str>,
}

impl<'a> Grounder<'a> {
    fn objects_of(&self, ty: &str) -> Vec<&'a str> {
        self.problem
            .objects
            .iter()
            .filter(|o| self.hierarchy.is_subtype(&o.ty, ty))
            .map(|o| o.name.as_str())
            .collect()
    }

    fn check_atom(&self, atom: &GroundAtom) -> Result<(), GroundError> {
        let decl = self
            .domain
            .predicate(&atom.predicate)
            .ok_or_else(|| type_error(format!("undeclared predicate in {atom}")))?;
        if decl.params.len() != atom.args.len() {
            return Err(type_error(format!(
                "{atom}: `{}` takes {} arguments",
                atom.predicate,
                decl.params.len()
            )));
        }
        for (arg, param) in atom.args.iter().zip(&decl.params) {
            let ty = self
                .object_types
                .get(arg.as_str())
                .ok_or_else(|| type_error(format!("unknown object `{arg}`")))?;
            if !self.hierarchy.is_subtype(ty, &param.ty) {
                return Err(type_error(format!(
                    "{atom}: `{arg}` is a {ty}, expected {}",
                    param.ty
                )));
            }
        }
        Ok(())
    }

    fn ground_atom(atom: &Atom, binding: &HashMap<String, String>) -> GroundAtom {
        GroundAtom {
            predicate: atom.predicate.clone(),
            args: atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Object(o) => o.clone(),
                    Term::Var(v) => binding[v].clone(),
                })
                .collect(),
        }
    }

    fn bindings(&self, vars: &[TypedName]) -> Vec<HashMap<String, String>> {
        let domains: Vec<Vec<&str>> = vars.iter().map(|v| self.objects_of(&v.ty)).collect();
        cartesian(&domains)
            .into_iter()
            .map(|tuple| {
                vars.iter()
                    .map(|v| v.name.clone())
                    .zip(tuple.into_iter().map(str::to_string))
                    .collect()
            })
            .collect()
    }
}

/// Cartesian product, last position varying fastest.
fn cartesian<'s>(domains: &[Vec<&'s str>]) -> Vec<Vec<&'s str>> {
    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    for d in domains {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for x in d {
                let mut t = prefix.clone();
                t.push(*x);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn term_value<'b>(t: &'b Term, binding: &'b HashMap<String, String>) -> &'b str {
    match t {
        Term::Object(o) => o,
        Term::Var(v) => &binding[v],
    }
}

/// First equality precondition of `schema` violated by `args`, as PDDL text.
pub fn failed_equality(schema: &ActionSchema, args: &[String]) -> Option<String> {
    let binding: HashMap<String, String> = schema
        .params
        .iter()
        .map(|p| p.name.clone())
        .zip(args.iter().cloned())
        .collect();
    schema.precondition.iter().find_map(|c| match c {
        Condition::Equality {
            left,
            right,
            positive,
        } => {
            let (l, r) = (term_value(left, &binding), term_value(right, &binding));
            if (l == r) != *positive {
                Some(if *positive {
                    format!("(= {l} {r})")
                } else {
                    format!("(not (= {l} {r}))")
                })
            } else {
                None
            }
        }
        Condition::Literal(_) => None,
    })
}

struct RawAction {
    name: String,
    args: Vec<String>,
    precondition: Vec<(GroundAtom, bool)>,
    add: Vec<GroundAtom>,
    delete: Vec<GroundAtom>,
}

pub fn ground_task(domain: &DomainDef, problem: &ProblemDef) -> Result<GroundedTask, GroundError> {
    ground_task_with(domain, problem, GroundOptions::default())
}

pub fn ground_task_with(
    domain: &DomainDef,
    problem: &ProblemDef,
    options: GroundOptions,
) -> Result<GroundedTask, GroundError> {
    if problem.domain_name != domain.name {
        return Err(GroundError::DomainMismatch {
            domain: domain.name.clone(),
            problem: problem.domain_name.clone(),
        });
    }
    let hierarchy = domain.type_hierarchy();
    for o in &problem.objects {
        if !hierarchy.is_known(&o.ty) {
            return Err(type_error(format!(
                "object `{}` has undeclared type `{}`",
                o.name, o.ty
            )));
        }
    }
    let g = Grounder {
        domain,
        problem,
        object_types: problem
            .objects
            .iter()
            .map(|o| (o.name.as_str(), o.ty.as_str()))
            .collect(),
        hierarchy,
    };

    // Every type-compatible predicate instance is a fluent.
    let mut atoms: BTreeSet<GroundAtom> = BTreeSet::new();
    for p in &domain.predicates {
        let domains: Vec<Vec<&str>> = p.params.iter().map(|v| g.objects_of(&v.ty)).collect();
        for tuple in cartesian(&domains) {
            atoms.insert(GroundAtom::new(&p.name, &tuple));
        }
    }

    let mut raw_actions = Vec::new();
    for schema in &domain.actions {
        for binding in g.bindings(&schema.params) {
            let args: Vec<String> = schema
                .params
                .iter()
                .map(|p| binding[&p.name].clone())
                .collect();
            if failed_equality(schema, &args).is_some() {
                continue;
            }
            let precondition = schema
                .precondition
                .iter()
                .filter_map(|c| match c {
                    Condition::Literal(l) => {
                        Some((Grounder::ground_atom(&l.atom, &binding), l.positive))
                    }
                    Condition::Equality { .. } => None,
                })
                .collect::<Vec<_>>();
            let add: Vec<GroundAtom> = schema
                .add
                .iter()
                .map(|a| Grounder::ground_atom(a, &binding))
                .collect();
            let delete: Vec<GroundAtom> = schema
                .delete
                .iter()
                .map(|a| Grounder::ground_atom(a, &binding))
                .collect();
            atoms.extend(precondition.iter().map(|(a, _)| a.clone()));
            atoms.extend(add.iter().cloned());
            atoms.extend(delete.iter().cloned());
            raw_actions.push(RawAction {
                name: schema.name.clone(),
                args,
                precondition,
                add,
                delete,
            });
        }
    }

    for a in &problem.init {
        let ga = Grounder::ground_atom(a, &HashMap::new());
        g.check_atom(&ga)?;
        atoms.insert(ga);
    }

    let fluents: Vec<GroundAtom> = atoms.into_iter().collect();
    let fluent_index: HashMap<GroundAtom, usize> = fluents
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, a)| (a, i))
        .collect();

    let mut init = State::empty(fluents.len());
    for a in &problem.init {
        init.insert(fluent_index[&Grounder::ground_atom(a, &HashMap::new())]);
    }

    let mut goal = Vec::new();
    let mut seen = HashSet::new();
    for lit in &problem.goal {
        let ga = Grounder::ground_atom(&lit.atom, &HashMap::new());
        g.check_atom(&ga)?;
        let fluent = fluent_index[&ga];
        if seen.insert((fluent, lit.positive)) {
            goal.push(GroundLiteral {
                fluent,
                positive: lit.positive,
            });
        }
    }
    if goal.is_empty() {
        return Err(GroundError::EmptyGoal);
    }

    let static_predicates: HashSet<&str> = domain
        .predicates
        .iter()
        .map(|p| p.name.as_str())
        .filter(|p| {
            !domain
                .actions
                .iter()
                .any(|a| a.add.iter().chain(&a.delete).any(|x| x.predicate == *p))
        })
        .collect();

    let mut actions = Vec::new();
    let mut pruned = Vec::new();
    let mut action_index = HashMap::new();
    for raw in raw_actions {
        let mut statically_dead = false;
        let precondition: Vec<GroundLiteral> = raw
            .precondition
            .iter()
            .map(|(a, positive)| {
                let fluent = fluent_index[a];
                if static_predicates.contains(a.predicate.as_str())
                    && init.contains(fluent) != *positive
                {
                    statically_dead = true;
                }
                GroundLiteral {
                    fluent,
                    positive: *positive,
                }
            })
            .collect();
        let add: Vec<usize> = dedup(raw.add.iter().map(|a| fluent_index[a]));
        let delete: Vec<usize> = dedup(
            raw.delete
                .iter()
                .map(|a| fluent_index[a])
                .filter(|f| !add.contains(f)),
        );
        let action = GroundAction {
            name: raw.name,
            args: raw.args,
            precondition,
            add,
            delete,
        };
        let key = action.step();
        if options.prune_static && statically_dead {
            action_index.insert(key, Slot::Pruned(pruned.len()));
            pruned.push(action);
        } else {
            action_index.insert(key, Slot::Active(actions.len()));
            actions.push(action);
        }
    }

    let mut monitors = Vec::new();
    for spec in &problem.constraints {
        ground_constraint(&g, spec, &fluent_index, &mut monitors)?;
    }

    Ok(GroundedTask {
        domain_name: domain.name.clone(),
        problem_name: problem.name.clone(),
        objects: problem.objects.clone(),
        fluents,
        actions,
        init,
        goal,
        monitors,
        fluent_index,
        action_index,
        pruned,
    })
}

fn dedup(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out = Vec::new();
    for x in it {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Expands inner `forall`s into conjunctions over matching objects.
fn expand_forall(g: &Grounder<'_>, f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::Not(x) => Formula::not(expand_forall(g, x)),
        Formula::And(xs) => Formula::And(xs.iter().map(|x| expand_forall(g, x)).collect()),
        Formula::Imply(a, b) => Formula::imply(expand_forall(g, a), expand_forall(g, b)),
        Formula::Forall(vars, body) => Formula::And(
            g.bindings(vars)
                .iter()
                .map(|binding| expand_forall(g, &body.substitute(binding)))
                .collect(),
        ),
    }
}

fn flatten_conjuncts(f: Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(xs) => xs.into_iter().for_each(|x| flatten_conjuncts(x, out)),
        other => out.push(other),
    }
}

fn to_ground(
    g: &Grounder<'_>,
    f: &Formula,
    index: &HashMap<GroundAtom, usize>,
) -> Result<GroundFormula, GroundError> {
    Ok(match f {
        Formula::Atom(a) => {
            let ga = Grounder::ground_atom(a, &HashMap::new());
            match index.get(&ga) {
                Some(i) => GroundFormula::Atom(*i),
                None => {
                    // Undeclared predicates and wrong arity are still errors;
                    // well-formed but type-incompatible atoms can never hold.
                    let decl = g
                        .domain
                        .predicate(&ga.predicate)
                        .ok_or_else(|| type_error(format!("undeclared predicate in {ga}")))?;
                    if decl.params.len() != ga.args.len() {
                        return Err(type_error(format!("{ga}: wrong number of arguments")));
                    }
                    GroundFormula::Const(false)
                }
            }
        }
        Formula::Not(x) => GroundFormula::not(to_ground(g, x, index)?),
        Formula::And(xs) => GroundFormula::And(
            xs.iter()
                .map(|x| to_ground(g, x, index))
                .collect::<Result<_, _>>()?,
        ),
        Formula::Imply(a, b) => {
            GroundFormula::imply(to_ground(g, a, index)?, to_ground(g, b, index)?)
        }
        Formula::Forall(..) => unreachable!("forall expanded before conversion"),
    })
}

fn ground_constraint(
    g: &Grounder<'_>,
    spec: &ConstraintSpec,
    index: &HashMap<GroundAtom, usize>,
    out: &mut Vec<GroundConstraint>,
) -> Result<(), GroundError> {
    for binding in g.bindings(&spec.quantifiers) {
        let sub = |f: &Formula| expand_forall(g, &f.substitute(&binding));
        match &spec.body {
            ConstraintBody::Always(f) => {
                // `always` distributes over conjunction: one monitor per conjunct.
                let mut parts = Vec::new();
                flatten_conjuncts(sub(f), &mut parts);
                for part in parts {
                    out.push(GroundConstraint {
                        text: format!("(always {part})"),
                        body: GroundConstraintBody::Always(to_ground(g, &part, index)?),
                    });
                }
            }
            ConstraintBody::AlwaysImply {
                antecedent,
                consequent,
            } => {
                let (a, c) = (sub(antecedent), sub(consequent));
                out.push(GroundConstraint {
                    text: ConstraintBody::AlwaysImply {
                        antecedent: a.clone(),
                        consequent: c.clone(),
                    }
                    .to_string(),
                    body: GroundConstraintBody::AlwaysImply {
                        antecedent: to_ground(g, &a, index)?,
                        consequent: to_ground(g, &c, index)?,
                    },
                });
            }
            ConstraintBody::SometimeBefore {
                trigger,
                requirement,
            } => {
                let (t, r) = (sub(trigger), sub(requirement));
                out.push(GroundConstraint {
                    text: ConstraintBody::SometimeBefore {
                        trigger: t.clone(),
                        requirement: r.clone(),
                    }
                    .to_string(),
                    body: GroundConstraintBody::SometimeBefore {
                        trigger: to_ground(g, &t, index)?,
                        requirement: to_ground(g, &r, index)?,
                    },
                });
            }
            ConstraintBody::AtMostOnce(f) => {
                let f = sub(f);
                out.push(GroundConstraint {
                    text: ConstraintBody::AtMostOnce(f.clone()).to_string(),
                    body: GroundConstraintBody::AtMostOnce(to_ground(g, &f, index)?),
                });
            }
        }
    }
    Ok(())
}
