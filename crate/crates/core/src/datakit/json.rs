//! Structured JSON rendering of problems, and its inverse.
//!
//! ```json
//! {"pred": "on", "args": ["b3", "b2"]}
//! ```
//!
//! Constraints are grouped under their kind (`always`, `always_imply`,
//! `sometime_before`, `at_most_once`). Keys are emitted in sorted order.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::pddl::{
    Atom, ConstraintBody, ConstraintKind, ConstraintSpec, Formula, Literal, ProblemDef, Term,
    TypedName,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("problem JSON: {0}")]
pub struct JsonError(String);

fn err<T>(msg: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError(msg.into()))
}

fn atom_value(a: &Atom) -> Value {
    json!({ "pred": a.predicate, "args": a.args.iter().map(|t| t.to_string()).collect::<Vec<_>>() })
}

fn typed_value(vs: &[TypedName]) -> Value {
    Value::Array(
        vs.iter()
            .map(|v| json!({ "name": v.name, "type": v.ty }))
            .collect(),
    )
}

fn formula_value(f: &Formula) -> Value {
    match f {
        Formula::Atom(a) => atom_value(a),
        Formula::Not(x) => json!({ "not": formula_value(x) }),
        Formula::And(xs) => json!({ "and": xs.iter().map(formula_value).collect::<Vec<_>>() }),
        Formula::Imply(a, b) => json!({ "imply": [formula_value(a), formula_value(b)] }),
        Formula::Forall(vs, body) => {
            json!({ "forall": { "vars": typed_value(vs), "body": formula_value(body) } })
        }
    }
}

fn literal_value(l: &Literal) -> Value {
    if l.positive {
        atom_value(&l.atom)
    } else {
        json!({ "not": atom_value(&l.atom) })
    }
}

fn constraint_value(c: &ConstraintSpec) -> Value {
    let mut v = match &c.body {
        ConstraintBody::Always(f) | ConstraintBody::AtMostOnce(f) => {
            json!({ "formula": formula_value(f) })
        }
        ConstraintBody::AlwaysImply {
            antecedent,
            consequent,
        } => {
            json!({ "antecedent": formula_value(antecedent), "consequent": formula_value(consequent) })
        }
        ConstraintBody::SometimeBefore {
            trigger,
            requirement,
        } => {
            json!({ "trigger": formula_value(trigger), "requirement": formula_value(requirement) })
        }
    };
    if !c.quantifiers.is_empty() {
        v["forall"] = typed_value(&c.quantifiers);
    }
    v
}

pub fn problem_to_value(problem: &ProblemDef) -> Value {
    let mut constraints = Map::new();
    for c in &problem.constraints {
        let slot = constraints
            .entry(c.kind().key())
            .or_insert_with(|| Value::Array(Vec::new()));
        slot.as_array_mut()
            .expect("array")
            .push(constraint_value(c));
    }
    json!({
        "name": problem.name,
        "domain": problem.domain_name,
        "objects": typed_value(&problem.objects),
        "init": problem.init.iter().map(atom_value).collect::<Vec<_>>(),
        "goal": problem.goal.iter().map(literal_value).collect::<Vec<_>>(),
        "constraints": constraints,
    })
}

pub fn problem_to_json(problem: &ProblemDef) -> String {
    let mut text =
        serde_json::to_string_pretty(&problem_to_value(problem)).expect("JSON values serialize");
    text.push('\n');
    text
}

fn field<'v>(v: &'v Value, key: &str) -> Result<&'v Value, JsonError> {
    v.get(key)
        .ok_or_else(|| JsonError(format!("missing `{key}` in {v}")))
}

fn string(v: &Value) -> Result<String, JsonError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| JsonError(format!("expected a string, got {v}")))
}

fn array(v: &Value) -> Result<&Vec<Value>, JsonError> {
    v.as_array()
        .ok_or_else(|| JsonError(format!("expected an array, got {v}")))
}

fn parse_typed(v: &Value) -> Result<Vec<TypedName>, JsonError> {
    array(v)?
        .iter()
        .map(|o| {
            Ok(TypedName::new(
                string(field(o, "name")?)?,
                string(field(o, "type")?)?,
            ))
        })
        .collect()
}

fn parse_atom(v: &Value) -> Result<Atom, JsonError> {
    let args = array(field(v, "args")?)?
        .iter()
        .map(|a| {
            let s = string(a)?;
            Ok(match s.strip_prefix('?') {
                Some(var) => Term::Var(var.to_string()),
                None => Term::Object(s),
            })
        })
        .collect::<Result<_, JsonError>>()?;
    Ok(Atom::new(string(field(v, "pred")?)?, args))
}

fn parse_formula(v: &Value) -> Result<Formula, JsonError> {
    if v.get("pred").is_some() {
        return Ok(Formula::Atom(parse_atom(v)?));
    }
    if let Some(x) = v.get("not") {
        return Ok(Formula::not(parse_formula(x)?));
    }
    if let Some(xs) = v.get("and") {
        return Ok(Formula::And(
            array(xs)?
                .iter()
                .map(parse_formula)
                .collect::<Result<_, _>>()?,
        ));
    }
    if let Some(pair) = v.get("imply") {
        let [a, b] = array(pair)?.as_slice() else {
            return err("`imply` takes two formulas");
        };
        return Ok(Formula::imply(parse_formula(a)?, parse_formula(b)?));
    }
    if let Some(q) = v.get("forall") {
        return Ok(Formula::Forall(
            parse_typed(field(q, "vars")?)?,
            Box::new(parse_formula(field(q, "body")?)?),
        ));
    }
    err(format!("unrecognized formula {v}"))
}

fn parse_literal(v: &Value) -> Result<Literal, JsonError> {
    match v.get("not") {
        Some(inner) => Ok(Literal::neg(parse_atom(inner)?)),
        None => Ok(Literal::pos(parse_atom(v)?)),
    }
}

const KINDS: [ConstraintKind; 4] = [
    ConstraintKind::Always,
    ConstraintKind::AlwaysImply,
    ConstraintKind::SometimeBefore,
    ConstraintKind::AtMostOnce,
];

fn parse_constraint(kind: ConstraintKind, v: &Value) -> Result<ConstraintSpec, JsonError> {
    let f = |key: &str| parse_formula(field(v, key)?);
    let body = match kind {
        ConstraintKind::Always => ConstraintBody::Always(f("formula")?),
        ConstraintKind::AtMostOnce => ConstraintBody::AtMostOnce(f("formula")?),
        ConstraintKind::AlwaysImply => ConstraintBody::AlwaysImply {
            antecedent: f("antecedent")?,
            consequent: f("consequent")?,
        },
        ConstraintKind::SometimeBefore => ConstraintBody::SometimeBefore {
            trigger: f("trigger")?,
            requirement: f("requirement")?,
        },
    };
    let quantifiers = match v.get("forall") {
        Some(q) => parse_typed(q)?,
        None => Vec::new(),
    };
    Ok(ConstraintSpec { quantifiers, body })
}

pub fn problem_from_value(v: &Value) -> Result<ProblemDef, JsonError> {
    let mut constraints = Vec::new();
    if let Some(groups) = v.get("constraints") {
        let groups = groups
            .as_object()
            .ok_or_else(|| JsonError("`constraints` must be an object".into()))?;
        for key in groups.keys() {
            if !KINDS.iter().any(|k| k.key() == key) {
                return err(format!("unknown constraint kind `{key}`"));
            }
        }
        for kind in KINDS {
            if let Some(list) = groups.get(kind.key()) {
                for c in array(list)? {
                    constraints.push(parse_constraint(kind, c)?);
                }
            }
        }
    }
    Ok(ProblemDef {
        name: string(field(v, "name")?)?,
        domain_name: string(field(v, "domain")?)?,
        objects: parse_typed(field(v, "objects")?)?,
        init: array(field(v, "init")?)?
            .iter()
            .map(parse_atom)
            .collect::<Result<_, _>>()?,
        goal: array(field(v, "goal")?)?
            .iter()
            .map(parse_literal)
            .collect::<Result<_, _>>()?,
        constraints,
    })
}

pub fn problem_from_json(text: &str) -> Result<ProblemDef, JsonError> {
    let v: Value = serde_json::from_str(text).map_err(|e| JsonError(e.to_string()))?;
    problem_from_value(&v)
}
