use std::collections::HashMap;
use std::fmt::{self, Write as _};

/// Name of the implicit root type.
pub const ROOT_TYPE: &str = "object";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Variable name without the leading `?`.
    Var(String),
    Object(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Object(o) => f.write_str(o),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// Ground atom over object names.
    pub fn ground<S: AsRef<str>>(predicate: &str, args: &[S]) -> Self {
        Atom {
            predicate: predicate.to_string(),
            args: args
                .iter()
                .map(|a| Term::Object(a.as_ref().to_string()))
                .collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Object(_)))
    }

    /// Object names of a ground atom; variables are rendered with `?`.
    pub fn arg_names(&self) -> Vec<String> {
        self.args
            .iter()
            .map(|t| match t {
                Term::Object(o) => o.clone(),
                Term::Var(v) => format!("?{v}"),
            })
            .collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_char(')')
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            positive: true,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            positive: false,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

/// Formulas allowed in goals and trajectory constraints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    /// Quantified variables are stored without `?`.
    Forall(Vec<TypedName>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn imply(a: Formula, b: Formula) -> Formula {
        Formula::Imply(Box::new(a), Box::new(b))
    }

    /// Replaces variables by objects according to `binding`.
    pub fn substitute(&self, binding: &HashMap<String, String>) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(substitute_atom(a, binding)),
            Formula::Not(f) => Formula::not(f.substitute(binding)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(binding)).collect()),
            Formula::Imply(a, b) => Formula::imply(a.substitute(binding), b.substitute(binding)),
            Formula::Forall(vars, body) => {
                let mut inner = binding.clone();
                for v in vars {
                    inner.remove(&v.name);
                }
                Formula::Forall(vars.clone(), Box::new(body.substitute(&inner)))
            }
        }
    }

    /// Calls `f` on every atom, in left-to-right order.
    pub fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Not(x) => x.visit_atoms(f),
            Formula::And(xs) => xs.iter().for_each(|x| x.visit_atoms(f)),
            Formula::Imply(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Formula::Forall(_, body) => body.visit_atoms(f),
        }
    }
}

pub(crate) fn substitute_atom(atom: &Atom, binding: &HashMap<String, String>) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => binding
                    .get(v)
                    .map_or_else(|| t.clone(), |o| Term::Object(o.clone())),
                Term::Object(_) => t.clone(),
            })
            .collect(),
    }
}

fn write_typed_vars(f: &mut fmt::Formatter<'_>, vars: &[TypedName]) -> fmt::Result {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            f.write_char(' ')?;
        }
        write!(f, "?{} - {}", v.name, v.ty)?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "(not {x})"),
            Formula::And(xs) => {
                f.write_str("(and")?;
                for x in xs {
                    write!(f, " {x}")?;
                }
                f.write_char(')')
            }
            Formula::Imply(a, b) => write!(f, "(imply {a} {b})"),
            Formula::Forall(vars, body) => {
                f.write_str("(forall (")?;
                write_typed_vars(f, vars)?;
                write!(f, ") {body})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintKind {
    Always,
    SometimeBefore,
    AtMostOnce,
    AlwaysImply,
}

impl ConstraintKind {
    pub fn pddl_name(self) -> &'static str {
        match self {
            ConstraintKind::Always | ConstraintKind::AlwaysImply => "always",
            ConstraintKind::SometimeBefore => "sometime-before",
            ConstraintKind::AtMostOnce => "at-most-once",
        }
    }

    /// Key used in the JSON rendering.
    pub fn key(self) -> &'static str {
        match self {
            ConstraintKind::Always => "always",
            ConstraintKind::SometimeBefore => "sometime_before",
            ConstraintKind::AtMostOnce => "at_most_once",
            ConstraintKind::AlwaysImply => "always_imply",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstraintBody {
    Always(Formula),
    /// `(always (imply antecedent consequent))`.
    AlwaysImply {
        antecedent: Formula,
        consequent: Formula,
    },
    /// `(sometime-before trigger requirement)`: whenever `trigger` holds,
    /// `requirement` must have held in a strictly earlier state.
    SometimeBefore {
        trigger: Formula,
        requirement: Formula,
    },
    AtMostOnce(Formula),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintSpec {
    /// Outer `forall` bindings; empty for unquantified constraints.
    pub quantifiers: Vec<TypedName>,
    pub body: ConstraintBody,
}

impl ConstraintSpec {
    pub fn new(body: ConstraintBody) -> Self {
        ConstraintSpec {
            quantifiers: Vec::new(),
            body,
        }
    }

    pub fn kind(&self) -> ConstraintKind {
        match self.body {
            ConstraintBody::Always(_) => ConstraintKind::Always,
            ConstraintBody::AlwaysImply { .. } => ConstraintKind::AlwaysImply,
            ConstraintBody::SometimeBefore { .. } => ConstraintKind::SometimeBefore,
            ConstraintBody::AtMostOnce(_) => ConstraintKind::AtMostOnce,
        }
    }

    pub fn bodies(&self) -> Vec<&Formula> {
        match &self.body {
            ConstraintBody::Always(f) | ConstraintBody::AtMostOnce(f) => vec![f],
            ConstraintBody::AlwaysImply {
                antecedent,
                consequent,
            } => vec![antecedent, consequent],
            ConstraintBody::SometimeBefore {
                trigger,
                requirement,
            } => vec![trigger, requirement],
        }
    }
}

impl fmt::Display for ConstraintBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintBody::Always(x) => write!(f, "(always {x})"),
            ConstraintBody::AlwaysImply {
                antecedent,
                consequent,
            } => {
                write!(f, "(always (imply {antecedent} {consequent}))")
            }
            ConstraintBody::SometimeBefore {
                trigger,
                requirement,
            } => {
                write!(f, "(sometime-before {trigger} {requirement})")
            }
            ConstraintBody::AtMostOnce(x) => write!(f, "(at-most-once {x})"),
        }
    }
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.quantifiers.is_empty() {
            write!(f, "{}", self.body)
        } else {
            f.write_str("(forall (")?;
            write_typed_vars(f, &self.quantifiers)?;
            write!(f, ") {})", self.body)
        }
    }
}

/// `(:types ...)` entry. `parent == None` places the type directly under the
/// implicit root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

/// Precondition item of an action schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Literal(Literal),
    /// `(= a b)` or `(not (= a b))`, evaluated at grounding time.
    Equality {
        left: Term,
        right: Term,
        positive: bool,
    },
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Literal(l) => write!(f, "{l}"),
            Condition::Equality {
                left,
                right,
                positive: true,
            } => write!(f, "(= {left} {right})"),
            Condition::Equality {
                left,
                right,
                positive: false,
            } => {
                write!(f, "(not (= {left} {right}))")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    /// Conjunction in declaration order.
    pub precondition: Vec<Condition>,
    pub add: Vec<Atom>,
    pub delete: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainDef {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDecl>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

impl DomainDef {
    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn type_hierarchy(&self) -> TypeHierarchy {
        TypeHierarchy::new(&self.types)
    }
}

/// Subtype relation induced by a domain's `(:types ...)` block.
#[derive(Debug, Clone, Default)]
pub struct TypeHierarchy {
    parents: HashMap<String, Option<String>>,
    root_declared: bool,
}

impl TypeHierarchy {
    pub fn new(decls: &[TypeDecl]) -> Self {
        let mut parents = HashMap::new();
        let mut root_declared = false;
        for d in decls {
            if d.name == ROOT_TYPE {
                root_declared = true;
            }
            parents.insert(d.name.clone(), d.parent.clone());
        }
        // Undeclared parents hang directly under the root.
        for d in decls {
            if let Some(p) = &d.parent {
                if p != ROOT_TYPE || root_declared {
                    parents.entry(p.clone()).or_insert(None);
                }
            }
        }
        TypeHierarchy {
            parents,
            root_declared,
        }
    }

    pub fn is_known(&self, ty: &str) -> bool {
        self.parents.contains_key(ty) || ty == ROOT_TYPE
    }

    /// True when `ty` equals `ancestor` or descends from it. When `object` is
    /// not declared explicitly it names the root and contains every type; an
    /// explicit `object` declaration makes it an ordinary type.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ty == ancestor {
            return true;
        }
        if ancestor == ROOT_TYPE && !self.root_declared {
            return true;
        }
        let mut cur = ty;
        let mut guard = 0;
        while let Some(Some(p)) = self.parents.get(cur) {
            if p == ancestor {
                return true;
            }
            cur = p;
            guard += 1;
            if guard > self.parents.len() {
                break;
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDef {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    /// Goal conjuncts after flattening nested `and`s.
    pub goal: Vec<Literal>,
    pub constraints: Vec<ConstraintSpec>,
}

impl ProblemDef {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects
            .iter()
            .find(|o| o.name == name)
            .map(|o| o.ty.as_str())
    }

    /// Objects grouped by type, in first-declaration order.
    pub fn objects_by_type(&self) -> Vec<(String, Vec<String>)> {
        let mut groups: Vec<(String, Vec<String>)> = Vec::new();
        for o in &self.objects {
            match groups.iter_mut().find(|(t, _)| *t == o.ty) {
                Some((_, names)) => names.push(o.name.clone()),
                None => groups.push((o.ty.clone(), vec![o.name.clone()])),
            }
        }
        groups
    }
}

fn typed_list(items: &[TypedName], var: bool) -> String {
    let prefix = if var { "?" } else { "" };
    let mut groups: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let ty = &items[i].ty;
        let mut names = Vec::new();
        while i < items.len() && items[i].ty == *ty {
            names.push(format!("{prefix}{}", items[i].name));
            i += 1;
        }
        groups.push(format!("{} - {ty}", names.join(" ")));
    }
    groups.join(" ")
}

impl fmt::Display for DomainDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            f.write_str("  (:types")?;
            for t in &self.types {
                match &t.parent {
                    Some(p) => write!(f, " {} - {}", t.name, p)?,
                    None => write!(f, " {}", t.name)?,
                }
            }
            writeln!(f, ")")?;
        }
        f.write_str("  (:predicates")?;
        for p in &self.predicates {
            if p.params.is_empty() {
                write!(f, "\n    ({})", p.name)?;
            } else {
                write!(f, "\n    ({} {})", p.name, typed_list(&p.params, true))?;
            }
        }
        writeln!(f, ")")?;
        for a in &self.actions {
            let params = format!("({})", typed_list(&a.params, true));
            writeln!(f, "  (:action {}", a.name)?;
            writeln!(f, "    :parameters {params}")?;
            f.write_str("    :precondition (and")?;
            for c in &a.precondition {
                write!(f, " {c}")?;
            }
            writeln!(f, ")")?;
            f.write_str("    :effect (and")?;
            for d in &a.delete {
                write!(f, " (not {d})")?;
            }
            for ad in &a.add {
                write!(f, " {ad}")?;
            }
            writeln!(f, "))")?;
        }
        writeln!(f, ")")
    }
}

impl fmt::Display for ProblemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain_name)?;
        f.write_str("  (:objects")?;
        for (ty, names) in self.objects_by_type_runs() {
            write!(f, "\n    {} - {}", names.join(" "), ty)?;
        }
        writeln!(f, ")")?;
        f.write_str("  (:init")?;
        for a in &self.init {
            write!(f, "\n    {a}")?;
        }
        writeln!(f, ")")?;
        f.write_str("  (:goal (and")?;
        for g in &self.goal {
            write!(f, "\n    {g}")?;
        }
        f.write_str("))")?;
        if !self.constraints.is_empty() {
            f.write_str("\n  (:constraints (and")?;
            for c in &self.constraints {
                write!(f, "\n    {c}")?;
            }
            f.write_str("))")?;
        }
        writeln!(f, ")")
    }
}

impl ProblemDef {
    /// Consecutive runs of equally-typed objects; preserves declaration order.
    fn objects_by_type_runs(&self) -> Vec<(&str, Vec<&str>)> {
        let mut runs: Vec<(&str, Vec<&str>)> = Vec::new();
        for o in &self.objects {
            match runs.last_mut() {
                Some((ty, names)) if *ty == o.ty => names.push(&o.name),
                _ => runs.push((&o.ty, vec![&o.name])),
            }
        }
        runs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_object_type_is_not_root() {
        let h = TypeHierarchy::new(&[
            TypeDecl {
                name: "room".into(),
                parent: None,
            },
            TypeDecl {
                name: "object".into(),
                parent: None,
            },
        ]);
        assert!(!h.is_subtype("room", "object"));
        assert!(h.is_subtype("object", "object"));
    }

    #[test]
    fn implicit_root_contains_everything() {
        let h = TypeHierarchy::new(&[
            TypeDecl {
                name: "locatable".into(),
                parent: Some("object".into()),
            },
            TypeDecl {
                name: "man".into(),
                parent: Some("locatable".into()),
            },
        ]);
        assert!(h.is_subtype("man", "locatable"));
        assert!(h.is_subtype("man", "object"));
        assert!(!h.is_subtype("locatable", "man"));
    }
}
