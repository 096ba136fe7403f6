use std::collections::HashSet;

use super::ast::*;
use super::error::{ParseError, ParseErrorKind};
use super::sexpr::{read_one, Pos, SExpr};

const SUPPORTED_REQUIREMENTS: &[&str] = &[
    ":strips",
    ":typing",
    ":negative-preconditions",
    ":equality",
    ":constraints",
];

const DOMAIN_UNSUPPORTED_SECTIONS: &[&str] = &[
    ":durative-action",
    ":functions",
    ":derived",
    ":constants",
    ":constraints",
];

type PResult<T> = Result<T, ParseError>;

fn expect_list<'a>(e: &'a SExpr, what: &str) -> PResult<&'a [SExpr]> {
    e.as_list()
        .ok_or_else(|| ParseError::syntax(e.pos(), format!("expected {what}, found `{}`", e.raw())))
}

fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> PResult<&'a str> {
    e.as_symbol()
        .ok_or_else(|| ParseError::syntax(e.pos(), format!("expected {what}, found a list")))
}

fn expect_keyword(e: &SExpr, kw: &str) -> PResult<()> {
    match e.as_symbol() {
        Some(s) if s == kw => Ok(()),
        _ => Err(ParseError::syntax(
            e.pos(),
            format!("expected `{kw}`, found `{}`", e.raw()),
        )),
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with('?')
        && !s.starts_with(':')
        && s.chars()
            .all(|c| c.is_alphanumeric() || c == '-' || c == '_')
}

fn identifier(e: &SExpr, what: &str) -> PResult<String> {
    let s = expect_symbol(e, what)?;
    if is_identifier(s) {
        Ok(s.to_string())
    } else {
        Err(ParseError::syntax(
            e.pos(),
            format!("expected {what}, found `{}`", e.raw()),
        ))
    }
}

/// Parses a typed list such as `?x ?y - block ?z` or `b1 b2 - block`.
/// Untyped entries get `object`.
fn typed_list(items: &[SExpr], vars: bool) -> PResult<Vec<(TypedName, Pos)>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        let sym = expect_symbol(item, "name")?;
        if sym == "-" {
            let ty_expr = items
                .get(i + 1)
                .ok_or_else(|| ParseError::syntax(item.pos(), "missing type after `-`"))?;
            if ty_expr.head() == Some("either") {
                return Err(ParseError::unsupported(ty_expr.pos(), "either types"));
            }
            let ty = identifier(ty_expr, "type name")?;
            if pending.is_empty() {
                return Err(ParseError::syntax(
                    item.pos(),
                    "type annotation without names",
                ));
            }
            out.extend(
                pending
                    .drain(..)
                    .map(|(n, p)| (TypedName::new(n, ty.clone()), p)),
            );
            i += 2;
            continue;
        }
        let name = if vars {
            match sym.strip_prefix('?') {
                Some(v) if is_identifier(v) => v.to_string(),
                _ => {
                    return Err(ParseError::syntax(
                        item.pos(),
                        format!("expected variable, found `{}`", item.raw()),
                    ))
                }
            }
        } else {
            identifier(item, "name")?
        };
        pending.push((name, item.pos()));
        i += 1;
    }
    out.extend(
        pending
            .into_iter()
            .map(|(n, p)| (TypedName::new(n, ROOT_TYPE), p)),
    );
    Ok(out)
}

fn term(e: &SExpr) -> PResult<Term> {
    let s = expect_symbol(e, "term")?;
    if let Some(v) = s.strip_prefix('?') {
        if is_identifier(v) {
            return Ok(Term::Var(v.to_string()));
        }
    } else if is_identifier(s) {
        return Ok(Term::Object(s.to_string()));
    }
    Err(ParseError::syntax(
        e.pos(),
        format!("invalid term `{}`", e.raw()),
    ))
}

fn atom(e: &SExpr) -> PResult<Atom> {
    let items = expect_list(e, "atom")?;
    let head = items
        .first()
        .ok_or_else(|| ParseError::syntax(e.pos(), "empty atom"))?;
    let predicate = identifier(head, "predicate name")?;
    let args = items[1..].iter().map(term).collect::<PResult<Vec<_>>>()?;
    Ok(Atom { predicate, args })
}

fn reject_unsupported_head(e: &SExpr) -> PResult<()> {
    match e.head() {
        Some(h @ ("or" | "exists" | "when" | "increase" | "decrease" | "assign" | "either")) => {
            Err(ParseError::unsupported(
                e.pos(),
                format!("`{h}` expressions"),
            ))
        }
        Some(h @ ("<" | ">" | "<=" | ">=")) => Err(ParseError::unsupported(
            e.pos(),
            format!("numeric comparison `{h}`"),
        )),
        Some("preference") => Err(ParseError::unsupported(e.pos(), "preferences")),
        _ => Ok(()),
    }
}

/// Goal / constraint formula. Equality is not allowed here.
fn formula(e: &SExpr) -> PResult<Formula> {
    reject_unsupported_head(e)?;
    let items = expect_list(e, "formula")?;
    match e.head() {
        Some("and") => Ok(Formula::And(
            items[1..].iter().map(formula).collect::<PResult<_>>()?,
        )),
        Some("not") => {
            if items.len() != 2 {
                return Err(ParseError::syntax(e.pos(), "`not` takes one argument"));
            }
            Ok(Formula::not(formula(&items[1])?))
        }
        Some("imply") => {
            if items.len() != 3 {
                return Err(ParseError::syntax(e.pos(), "`imply` takes two arguments"));
            }
            Ok(Formula::imply(formula(&items[1])?, formula(&items[2])?))
        }
        Some("forall") => {
            if items.len() != 3 {
                return Err(ParseError::syntax(
                    e.pos(),
                    "`forall` takes a variable list and a body",
                ));
            }
            let vars = typed_list(expect_list(&items[1], "variable list")?, true)?
                .into_iter()
                .map(|(v, _)| v)
                .collect();
            Ok(Formula::Forall(vars, Box::new(formula(&items[2])?)))
        }
        Some("=") => Err(ParseError::unsupported(
            e.pos(),
            "equality outside action preconditions",
        )),
        _ => Ok(Formula::Atom(atom(e)?)),
    }
}

fn literal(e: &SExpr) -> PResult<Literal> {
    reject_unsupported_head(e)?;
    if e.head() == Some("not") {
        let items = expect_list(e, "literal")?;
        if items.len() != 2 {
            return Err(ParseError::syntax(e.pos(), "`not` takes one argument"));
        }
        Ok(Literal::neg(atom(&items[1])?))
    } else if matches!(e.head(), Some("and" | "imply" | "forall")) {
        Err(ParseError::unsupported(
            e.pos(),
            format!("`{}` where a literal is required", e.head().unwrap()),
        ))
    } else {
        Ok(Literal::pos(atom(e)?))
    }
}

/// Flattens nested `and`s, calling `leaf` on every non-`and` node.
fn flatten_and<T>(
    e: &SExpr,
    leaf: &mut impl FnMut(&SExpr) -> PResult<T>,
    out: &mut Vec<T>,
) -> PResult<()> {
    if e.head() == Some("and") {
        for item in &e.as_list().unwrap()[1..] {
            flatten_and(item, leaf, out)?;
        }
        Ok(())
    } else {
        out.push(leaf(e)?);
        Ok(())
    }
}

fn condition(e: &SExpr) -> PResult<Condition> {
    let eq = |e: &SExpr, positive: bool| -> PResult<Condition> {
        let items = e.as_list().unwrap();
        if items.len() != 3 {
            return Err(ParseError::syntax(e.pos(), "`=` takes two arguments"));
        }
        Ok(Condition::Equality {
            left: term(&items[1])?,
            right: term(&items[2])?,
            positive,
        })
    };
    if e.head() == Some("=") {
        return eq(e, true);
    }
    if e.head() == Some("not") {
        if let Some(inner) = e.as_list().and_then(|l| l.get(1)) {
            if inner.head() == Some("=") {
                return eq(inner, false);
            }
        }
    }
    Ok(Condition::Literal(literal(e)?))
}

fn split_sections(items: &[SExpr]) -> PResult<Vec<(&str, &SExpr, &[SExpr])>> {
    items
        .iter()
        .map(|sec| {
            let list = expect_list(sec, "section")?;
            let key = list
                .first()
                .and_then(SExpr::as_symbol)
                .filter(|k| k.starts_with(':'))
                .ok_or_else(|| {
                    ParseError::syntax(sec.pos(), "expected a `(:keyword ...)` section")
                })?;
            Ok((key, sec, &list[1..]))
        })
        .collect()
}

fn define_header<'a>(e: &'a SExpr, kind: &str) -> PResult<(String, &'a [SExpr])> {
    let items = expect_list(e, "`(define ...)`")?;
    match items.first() {
        Some(first) => expect_keyword(first, "define")?,
        None => return Err(ParseError::syntax(e.pos(), "expected `define`")),
    }
    let header = items
        .get(1)
        .ok_or_else(|| ParseError::syntax(e.pos(), format!("missing `({kind} <name>)`")))?;
    let h = expect_list(header, "header")?;
    if h.len() != 2 {
        return Err(ParseError::syntax(
            header.pos(),
            format!("expected `({kind} <name>)`"),
        ));
    }
    expect_keyword(&h[0], kind)?;
    Ok((identifier(&h[1], "name")?, &items[2..]))
}

/// Parses a domain file in the supported STRIPS/typing subset.
pub fn parse_domain(text: &str) -> Result<DomainDef, ParseError> {
    let top = read_one(text)?;
    let (name, rest) = define_header(&top, "domain")?;
    let mut domain = DomainDef {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut action_exprs = Vec::new();
    for (key, sec, body) in split_sections(rest)? {
        match key {
            ":requirements" => {
                for r in body {
                    let req = expect_symbol(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&req) {
                        return Err(ParseError::unsupported(
                            r.pos(),
                            format!("requirement `{req}`"),
                        ));
                    }
                    domain.requirements.push(req.to_string());
                }
            }
            ":types" => {
                let mut seen = HashSet::new();
                for (decl, pos) in type_decls(body)? {
                    if !seen.insert(decl.name.clone()) {
                        return Err(ParseError::new(
                            pos,
                            ParseErrorKind::Duplicate {
                                what: "type",
                                name: decl.name,
                            },
                        ));
                    }
                    domain.types.push(decl);
                }
            }
            ":predicates" => {
                for p in body {
                    let items = expect_list(p, "predicate declaration")?;
                    let name = identifier(
                        items
                            .first()
                            .ok_or_else(|| ParseError::syntax(p.pos(), "empty predicate"))?,
                        "predicate name",
                    )?;
                    if domain.predicate(&name).is_some() {
                        return Err(ParseError::new(
                            p.pos(),
                            ParseErrorKind::Duplicate {
                                what: "predicate",
                                name,
                            },
                        ));
                    }
                    let params = typed_list(&items[1..], true)?
                        .into_iter()
                        .map(|(v, _)| v)
                        .collect();
                    domain.predicates.push(PredicateDecl { name, params });
                }
            }
            ":action" => action_exprs.push(sec),
            k if DOMAIN_UNSUPPORTED_SECTIONS.contains(&k) => {
                return Err(ParseError::unsupported(sec.pos(), format!("`{k}` section")));
            }
            k => {
                return Err(ParseError::syntax(
                    sec.pos(),
                    format!("unknown domain section `{k}`"),
                ))
            }
        }
    }
    let hierarchy = domain.type_hierarchy();
    for sec in action_exprs {
        let action = parse_action(sec, &domain, &hierarchy)?;
        if domain.action(&action.name).is_some() {
            return Err(ParseError::new(
                sec.pos(),
                ParseErrorKind::Duplicate {
                    what: "action",
                    name: action.name,
                },
            ));
        }
        domain.actions.push(action);
    }
    for p in &domain.predicates {
        for v in &p.params {
            check_type(&hierarchy, &v.ty, top.pos())?;
        }
    }
    Ok(domain)
}

fn type_decls(body: &[SExpr]) -> PResult<Vec<(TypeDecl, Pos)>> {
    let mut out = Vec::new();
    let mut pending: Vec<(String, Pos)> = Vec::new();
    let mut i = 0;
    while i < body.len() {
        let sym = expect_symbol(&body[i], "type name")?;
        if sym == "-" {
            let parent = identifier(
                body.get(i + 1)
                    .ok_or_else(|| ParseError::syntax(body[i].pos(), "missing type after `-`"))?,
                "type name",
            )?;
            if pending.is_empty() {
                return Err(ParseError::syntax(
                    body[i].pos(),
                    "type annotation without names",
                ));
            }
            out.extend(pending.drain(..).map(|(name, pos)| {
                (
                    TypeDecl {
                        name,
                        parent: Some(parent.clone()),
                    },
                    pos,
                )
            }));
            i += 2;
        } else {
            pending.push((identifier(&body[i], "type name")?, body[i].pos()));
            i += 1;
        }
    }
    out.extend(
        pending
            .into_iter()
            .map(|(name, pos)| (TypeDecl { name, parent: None }, pos)),
    );
    Ok(out)
}

fn check_type(h: &TypeHierarchy, ty: &str, pos: Pos) -> PResult<()> {
    if h.is_known(ty) {
        Ok(())
    } else {
        Err(ParseError::new(
            pos,
            ParseErrorKind::Undeclared {
                what: "type",
                name: ty.to_string(),
            },
        ))
    }
}

fn parse_action(
    sec: &SExpr,
    domain: &DomainDef,
    hierarchy: &TypeHierarchy,
) -> PResult<ActionSchema> {
    let items = sec.as_list().unwrap();
    let name = identifier(
        items
            .get(1)
            .ok_or_else(|| ParseError::syntax(sec.pos(), "missing action name"))?,
        "action name",
    )?;
    let mut params: Vec<TypedName> = Vec::new();
    let mut precondition = Vec::new();
    let mut add = Vec::new();
    let mut delete = Vec::new();
    let mut i = 2;
    while i < items.len() {
        let key = expect_symbol(&items[i], "action keyword")?;
        let value = items.get(i + 1).ok_or_else(|| {
            ParseError::syntax(items[i].pos(), format!("missing value for `{key}`"))
        })?;
        match key {
            ":parameters" => {
                let mut seen = HashSet::new();
                for (p, pos) in typed_list(expect_list(value, "parameter list")?, true)? {
                    check_type(hierarchy, &p.ty, pos)?;
                    if !seen.insert(p.name.clone()) {
                        return Err(ParseError::new(
                            pos,
                            ParseErrorKind::Duplicate {
                                what: "parameter",
                                name: p.name,
                            },
                        ));
                    }
                    params.push(p);
                }
            }
            ":precondition" => {
                if value.as_list().is_some_and(|l| l.is_empty()) {
                    // `()` is an empty precondition.
                } else {
                    flatten_and(value, &mut condition, &mut precondition)?;
                }
            }
            ":effect" => {
                let mut lits = Vec::new();
                flatten_and(
                    value,
                    &mut |e: &SExpr| {
                        if matches!(e.head(), Some("forall" | "when")) {
                            return Err(ParseError::unsupported(
                                e.pos(),
                                "conditional or quantified effects",
                            ));
                        }
                        literal(e)
                    },
                    &mut lits,
                )?;
                for l in lits {
                    if l.positive {
                        add.push(l.atom);
                    } else {
                        delete.push(l.atom);
                    }
                }
            }
            k => {
                return Err(ParseError::syntax(
                    items[i].pos(),
                    format!("unknown action keyword `{k}`"),
                ))
            }
        }
        i += 2;
    }
    let bound: HashSet<&str> = params.iter().map(|p| p.name.as_str()).collect();
    let check_term = |t: &Term, pos: Pos| -> PResult<()> {
        match t {
            Term::Var(v) if !bound.contains(v.as_str()) => Err(ParseError::new(
                pos,
                ParseErrorKind::UnboundVariable(v.clone()),
            )),
            Term::Object(o) => Err(ParseError::unsupported(
                pos,
                format!("constant `{o}` in action body"),
            )),
            _ => Ok(()),
        }
    };
    let check_atom = |a: &Atom| -> PResult<()> {
        let decl = domain.predicate(&a.predicate).ok_or_else(|| {
            ParseError::new(
                sec.pos(),
                ParseErrorKind::Undeclared {
                    what: "predicate",
                    name: a.predicate.clone(),
                },
            )
        })?;
        if decl.params.len() != a.args.len() {
            return Err(ParseError::new(
                sec.pos(),
                ParseErrorKind::Arity {
                    name: a.predicate.clone(),
                    expected: decl.params.len(),
                    found: a.args.len(),
                },
            ));
        }
        a.args.iter().try_for_each(|t| check_term(t, sec.pos()))
    };
    for c in &precondition {
        match c {
            Condition::Literal(l) => check_atom(&l.atom)?,
            Condition::Equality { left, right, .. } => {
                check_term(left, sec.pos())?;
                check_term(right, sec.pos())?;
            }
        }
    }
    add.iter().chain(delete.iter()).try_for_each(check_atom)?;
    Ok(ActionSchema {
        name,
        params,
        precondition,
        add,
        delete,
    })
}

/// Parses a problem file, including its `:constraints` block.
pub fn parse_problem(text: &str) -> Result<ProblemDef, ParseError> {
    let top = read_one(text)?;
    let (name, rest) = define_header(&top, "problem")?;
    let mut problem = ProblemDef {
        name,
        domain_name: String::new(),
        objects: Vec::new(),
        init: Vec::new(),
        goal: Vec::new(),
        constraints: Vec::new(),
    };
    let mut have_goal = false;
    for (key, sec, body) in split_sections(rest)? {
        match key {
            ":domain" => {
                let d = body
                    .first()
                    .ok_or_else(|| ParseError::syntax(sec.pos(), "missing domain name"))?;
                problem.domain_name = identifier(d, "domain name")?;
            }
            ":requirements" => {
                for r in body {
                    let req = expect_symbol(r, "requirement")?;
                    if !SUPPORTED_REQUIREMENTS.contains(&req) {
                        return Err(ParseError::unsupported(
                            r.pos(),
                            format!("requirement `{req}`"),
                        ));
                    }
                }
            }
            ":objects" => {
                for (o, pos) in typed_list(body, false)? {
                    if problem.object_type(&o.name).is_some() {
                        return Err(ParseError::new(
                            pos,
                            ParseErrorKind::Duplicate {
                                what: "object",
                                name: o.name,
                            },
                        ));
                    }
                    problem.objects.push(o);
                }
            }
            ":init" => {
                for a in body {
                    if a.head() == Some("not") {
                        return Err(ParseError::syntax(
                            a.pos(),
                            "negative literals are not allowed in `:init`",
                        ));
                    }
                    if a.head() == Some("=") {
                        return Err(ParseError::unsupported(a.pos(), "numeric fluents"));
                    }
                    let at = atom(a)?;
                    if !at.is_ground() {
                        return Err(ParseError::syntax(a.pos(), "`:init` atoms must be ground"));
                    }
                    problem.init.push(at);
                }
            }
            ":goal" => {
                let g = body
                    .first()
                    .ok_or_else(|| ParseError::syntax(sec.pos(), "missing goal"))?;
                flatten_and(g, &mut literal, &mut problem.goal)?;
                have_goal = true;
            }
            ":constraints" => {
                for c in body {
                    parse_constraints(c, &mut Vec::new(), &mut problem.constraints)?;
                }
            }
            ":metric" => return Err(ParseError::unsupported(sec.pos(), "`:metric`")),
            k => {
                return Err(ParseError::syntax(
                    sec.pos(),
                    format!("unknown problem section `{k}`"),
                ))
            }
        }
    }
    if problem.domain_name.is_empty() {
        return Err(ParseError::syntax(top.pos(), "missing `(:domain ...)`"));
    }
    if !have_goal {
        return Err(ParseError::syntax(top.pos(), "missing `(:goal ...)`"));
    }
    check_problem_terms(&problem, top.pos())?;
    Ok(problem)
}

fn parse_constraints(
    e: &SExpr,
    quantifiers: &mut Vec<TypedName>,
    out: &mut Vec<ConstraintSpec>,
) -> PResult<()> {
    let items = expect_list(e, "constraint")?;
    let head = e
        .head()
        .ok_or_else(|| ParseError::syntax(e.pos(), "expected a constraint"))?;
    let arity = |n: usize| -> PResult<()> {
        if items.len() == n + 1 {
            Ok(())
        } else {
            Err(ParseError::syntax(
                e.pos(),
                format!("`{head}` takes {n} argument(s)"),
            ))
        }
    };
    let body = match head {
        "and" => {
            for item in &items[1..] {
                parse_constraints(item, quantifiers, out)?;
            }
            return Ok(());
        }
        "forall" => {
            arity(2)?;
            let vars: Vec<TypedName> = typed_list(expect_list(&items[1], "variable list")?, true)?
                .into_iter()
                .map(|(v, _)| v)
                .collect();
            let depth = quantifiers.len();
            quantifiers.extend(vars);
            let r = parse_constraints(&items[2], quantifiers, out);
            quantifiers.truncate(depth);
            return r;
        }
        "always" => {
            arity(1)?;
            match formula(&items[1])? {
                Formula::Imply(a, b) => ConstraintBody::AlwaysImply {
                    antecedent: *a,
                    consequent: *b,
                },
                f => ConstraintBody::Always(f),
            }
        }
        "sometime-before" => {
            arity(2)?;
            ConstraintBody::SometimeBefore {
                trigger: formula(&items[1])?,
                requirement: formula(&items[2])?,
            }
        }
        "at-most-once" => {
            arity(1)?;
            ConstraintBody::AtMostOnce(formula(&items[1])?)
        }
        "preference" => return Err(ParseError::unsupported(e.pos(), "preferences")),
        other => {
            return Err(ParseError::new(
                e.pos(),
                ParseErrorKind::UnknownConstraintKind(other.to_string()),
            ))
        }
    };
    let spec = ConstraintSpec {
        quantifiers: quantifiers.clone(),
        body,
    };
    check_bound(&spec, e.pos())?;
    out.push(spec);
    Ok(())
}

fn check_bound(spec: &ConstraintSpec, pos: Pos) -> PResult<()> {
    fn walk(f: &Formula, bound: &mut Vec<String>, pos: Pos) -> PResult<()> {
        match f {
            Formula::Atom(a) => {
                for t in &a.args {
                    if let Term::Var(v) = t {
                        if !bound.contains(v) {
                            return Err(ParseError::new(
                                pos,
                                ParseErrorKind::UnboundVariable(v.clone()),
                            ));
                        }
                    }
                }
                Ok(())
            }
            Formula::Not(x) => walk(x, bound, pos),
            Formula::And(xs) => xs.iter().try_for_each(|x| walk(x, bound, pos)),
            Formula::Imply(a, b) => {
                walk(a, bound, pos)?;
                walk(b, bound, pos)
            }
            Formula::Forall(vars, body) => {
                let depth = bound.len();
                bound.extend(vars.iter().map(|v| v.name.clone()));
                let r = walk(body, bound, pos);
                bound.truncate(depth);
                r
            }
        }
    }
    let mut bound: Vec<String> = spec.quantifiers.iter().map(|v| v.name.clone()).collect();
    spec.bodies()
        .into_iter()
        .try_for_each(|f| walk(f, &mut bound, pos))
}

fn check_problem_terms(problem: &ProblemDef, pos: Pos) -> PResult<()> {
    let check_atom = |a: &Atom| -> PResult<()> {
        for t in &a.args {
            match t {
                Term::Object(o) if problem.object_type(o).is_none() => {
                    return Err(ParseError::new(
                        pos,
                        ParseErrorKind::Undeclared {
                            what: "object",
                            name: o.clone(),
                        },
                    ))
                }
                Term::Var(v) => {
                    return Err(ParseError::new(
                        pos,
                        ParseErrorKind::UnboundVariable(v.clone()),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    };
    problem.init.iter().try_for_each(check_atom)?;
    problem.goal.iter().try_for_each(|l| check_atom(&l.atom))?;
    for c in &problem.constraints {
        for f in c.bodies() {
            let mut err = None;
            f.visit_atoms(&mut |a| {
                if err.is_none() {
                    for t in &a.args {
                        if let Term::Object(o) = t {
                            if problem.object_type(o).is_none() {
                                err = Some(ParseError::new(
                                    pos,
                                    ParseErrorKind::Undeclared {
                                        what: "object",
                                        name: o.clone(),
                                    },
                                ));
                            }
                        }
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
    }
    Ok(())
}
