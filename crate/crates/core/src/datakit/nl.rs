//! Template-based English rendering of domains and problems.
//!
//! Each fixture predicate has a phrase; anything else falls back to
//! `pred(args) holds`. New domains plug in through [`phrase`].

use crate::pddl::{
    ActionSchema, Atom, Condition, ConstraintBody, ConstraintSpec, DomainDef, Formula, ProblemDef,
    TypedName,
};

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Lower-case phrase for one atom.
pub fn phrase(domain: &str, atom: &Atom) -> String {
    let a: Vec<String> = atom.args.iter().map(|t| t.to_string()).collect();
    let p = atom.predicate.as_str();
    let known = match (domain, p, a.as_slice()) {
        ("blocksworld", "on", [x, y]) => Some(format!("block {x} is on block {y}")),
        ("blocksworld", "on-table", [x]) => Some(format!("block {x} is on the table")),
        ("blocksworld", "clear", [x]) => Some(format!("block {x} is clear")),
        ("blocksworld", "handempty", []) => Some("the hand is empty".into()),
        ("blocksworld", "holding", [x]) => Some(format!("the hand is holding block {x}")),
        ("ferry", "at-ferry", [l]) => Some(format!("the ferry is at location {l}")),
        ("ferry", "at", [c, l]) => Some(format!("car {c} is at location {l}")),
        ("ferry", "empty-ferry", []) => Some("the ferry is empty".into()),
        ("ferry", "on", [c]) => Some(format!("car {c} is on the ferry")),
        ("gripper-strips", "at-robby", [r, x]) => Some(format!("robot {r} is in room {x}")),
        ("gripper-strips", "at", [o, x]) => Some(format!("object {o} is in room {x}")),
        ("gripper-strips", "free", [r, g]) => Some(format!("gripper {g} of robot {r} is free")),
        ("gripper-strips", "carry", [r, o, g]) => {
            Some(format!("robot {r} is carrying object {o} with gripper {g}"))
        }
        ("spanner", "at", [m, l]) => Some(format!("{m} is at location {l}")),
        ("spanner", "carrying", [m, s]) => Some(format!("man {m} is carrying spanner {s}")),
        ("spanner", "useable", [s]) => Some(format!("spanner {s} is usable")),
        ("spanner", "link", [x, y]) => Some(format!("location {x} is linked to location {y}")),
        ("spanner", "tightened", [n]) => Some(format!("nut {n} is tightened")),
        ("spanner", "loose", [n]) => Some(format!("nut {n} is loose")),
        _ => None,
    };
    known.unwrap_or_else(|| format!("{p}({}) holds", a.join(", ")))
}

fn vars(vs: &[TypedName]) -> String {
    vs.iter()
        .map(|v| format!("{} ?{}", v.ty, v.name))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn formula(domain: &str, f: &Formula) -> String {
    match f {
        Formula::Atom(a) => phrase(domain, a),
        Formula::Not(x) => match x.as_ref() {
            Formula::Atom(a) => format!("it is not the case that {}", phrase(domain, a)),
            other => format!("it is not the case that ({})", formula(domain, other)),
        },
        Formula::And(xs) => xs
            .iter()
            .map(|x| formula(domain, x))
            .collect::<Vec<_>>()
            .join(" and "),
        Formula::Imply(a, b) => format!("if {}, then {}", formula(domain, a), formula(domain, b)),
        Formula::Forall(vs, body) => format!("for every {}, {}", vars(vs), formula(domain, body)),
    }
}

pub fn constraint(domain: &str, c: &ConstraintSpec) -> String {
    let q = |f: &Formula| format!("'{}'", formula(domain, f));
    let sentence = match &c.body {
        ConstraintBody::Always(f) => format!("The following must hold in every state: {}.", q(f)),
        ConstraintBody::AlwaysImply {
            antecedent,
            consequent,
        } => {
            format!(
                "In every state, if {} holds, then {} must also hold.",
                q(antecedent),
                q(consequent)
            )
        }
        ConstraintBody::SometimeBefore {
            trigger,
            requirement,
        } => {
            format!(
                "Before {} becomes true, {} must be true at some point.",
                q(trigger),
                q(requirement)
            )
        }
        ConstraintBody::AtMostOnce(f) => {
            format!("{} may become true at most once.", capitalize(&q(f)))
        }
    };
    if c.quantifiers.is_empty() {
        sentence
    } else {
        format!("For every {}: {sentence}", vars(&c.quantifiers))
    }
}

fn bullet(out: &mut String, line: &str) {
    out.push_str("- ");
    out.push_str(line);
    out.push('\n');
}

/// Sections for objects, initial state, goal and (if any) constraints.
pub fn problem_to_nl(problem: &ProblemDef) -> String {
    let d = problem.domain_name.as_str();
    let mut out = format!("Problem {} in domain {}.\n\nObjects:\n", problem.name, d);
    for (ty, names) in problem.objects_by_type() {
        bullet(&mut out, &format!("{ty}: {}", names.join(", ")));
    }
    out.push_str("\nInitial state:\n");
    for a in &problem.init {
        bullet(&mut out, &format!("{}.", capitalize(&phrase(d, a))));
    }
    out.push_str("\nGoal:\n");
    for g in &problem.goal {
        let text = if g.positive {
            phrase(d, &g.atom)
        } else {
            format!("it is not the case that {}", phrase(d, &g.atom))
        };
        bullet(&mut out, &format!("{}.", capitalize(&text)));
    }
    if !problem.constraints.is_empty() {
        out.push_str("\nConstraints:\n");
        for c in &problem.constraints {
            bullet(&mut out, &constraint(d, c));
        }
    }
    out
}

fn condition(domain: &str, c: &Condition) -> String {
    match c {
        Condition::Literal(l) if l.positive => phrase(domain, &l.atom),
        Condition::Literal(l) => format!("it is not the case that {}", phrase(domain, &l.atom)),
        Condition::Equality {
            left,
            right,
            positive: true,
        } => format!("{left} is the same as {right}"),
        Condition::Equality {
            left,
            right,
            positive: false,
        } => format!("{left} is different from {right}"),
    }
}

fn action(domain: &str, a: &ActionSchema) -> String {
    let list = |items: Vec<String>| {
        if items.is_empty() {
            "nothing".to_string()
        } else {
            items.join("; ")
        }
    };
    let pre = list(
        a.precondition
            .iter()
            .map(|c| condition(domain, c))
            .collect(),
    );
    let mut effects: Vec<String> = a.add.iter().map(|x| phrase(domain, x)).collect();
    effects.extend(
        a.delete
            .iter()
            .map(|x| format!("it is no longer the case that {}", phrase(domain, x))),
    );
    format!(
        "Action {}({}). Requires: {pre}. Effects: {}.",
        a.name,
        vars(&a.params),
        list(effects)
    )
}

pub fn domain_to_nl(domain: &DomainDef) -> String {
    let d = domain.name.as_str();
    let mut out = format!("Domain {d}.\n");
    if !domain.types.is_empty() {
        out.push_str("\nTypes:\n");
        for t in &domain.types {
            match &t.parent {
                Some(p) => bullet(&mut out, &format!("{} (a kind of {p})", t.name)),
                None => bullet(&mut out, &t.name),
            }
        }
    }
    out.push_str("\nActions:\n");
    for a in &domain.actions {
        bullet(&mut out, &action(d, a));
    }
    out
}
