//! Canonical fingerprints up to consistent object renaming.
//!
//! Objects are first partitioned by type, then the partition is refined by
//! how each object occurs in init, goal and constraint literals. The
//! signature is the lexicographically least serialization over all
//! renamings compatible with the refined partition, so problems that differ
//! only by a type-preserving renaming collide.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::{Atom, ConstraintBody, ConstraintSpec, Formula, ProblemDef, Term};

/// Renamings tried before falling back to a name-ordered tie break.
const PERMUTATION_CAP: usize = 40_320;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalSignature(String);

impl CanonicalSignature {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// 64-bit FNV-1a of the canonical text, as 16 hex digits.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.0.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

impl fmt::Display for CanonicalSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A literal with its objects pulled out: `template` holds `$k` placeholders.
struct Fact {
    template: String,
    objects: Vec<usize>,
}

struct Extractor<'a> {
    index: &'a HashMap<&'a str, usize>,
    objects: Vec<usize>,
    vars: Vec<(String, String)>,
}

impl Extractor<'_> {
    fn term(&mut self, t: &Term, out: &mut String) {
        match t {
            Term::Var(v) => match self.vars.iter().rev().find(|(name, _)| name == v) {
                Some((_, canon)) => out.push_str(canon),
                None => out.push_str(&format!("?{v}")),
            },
            Term::Object(o) => match self.index.get(o.as_str()) {
                Some(&i) => {
                    out.push_str(&format!("${}", self.objects.len()));
                    self.objects.push(i);
                }
                None => out.push_str(o),
            },
        }
    }

    fn atom(&mut self, a: &Atom, out: &mut String) {
        out.push('(');
        out.push_str(&a.predicate);
        for t in &a.args {
            out.push(' ');
            self.term(t, out);
        }
        out.push(')');
    }

    fn bind(&mut self, vars: &[crate::pddl::TypedName], out: &mut String) {
        out.push('(');
        for (i, v) in vars.iter().enumerate() {
            let canon = format!("?v{}", self.vars.len());
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("{canon} - {}", v.ty));
            self.vars.push((v.name.clone(), canon));
        }
        out.push(')');
    }

    fn formula(&mut self, f: &Formula, out: &mut String) {
        match f {
            Formula::Atom(a) => self.atom(a, out),
            Formula::Not(x) => {
                out.push_str("(not ");
                self.formula(x, out);
                out.push(')');
            }
            Formula::And(xs) => {
                out.push_str("(and");
                for x in xs {
                    out.push(' ');
                    self.formula(x, out);
                }
                out.push(')');
            }
            Formula::Imply(a, b) => {
                out.push_str("(imply ");
                self.formula(a, out);
                out.push(' ');
                self.formula(b, out);
                out.push(')');
            }
            Formula::Forall(vars, body) => {
                let depth = self.vars.len();
                out.push_str("(forall ");
                self.bind(vars, out);
                out.push(' ');
                self.formula(body, out);
                out.push(')');
                self.vars.truncate(depth);
            }
        }
    }

    fn constraint(&mut self, c: &ConstraintSpec, out: &mut String) {
        if !c.quantifiers.is_empty() {
            out.push_str("(forall ");
            self.bind(&c.quantifiers, out);
            out.push(' ');
        }
        let (head, parts): (&str, Vec<&Formula>) = match &c.body {
            ConstraintBody::Always(f) => ("always", vec![f]),
            ConstraintBody::AlwaysImply {
                antecedent,
                consequent,
            } => ("always-imply", vec![antecedent, consequent]),
            ConstraintBody::SometimeBefore {
                trigger,
                requirement,
            } => ("sometime-before", vec![trigger, requirement]),
            ConstraintBody::AtMostOnce(f) => ("at-most-once", vec![f]),
        };
        out.push('(');
        out.push_str(head);
        for p in parts {
            out.push(' ');
            self.formula(p, out);
        }
        out.push(')');
        if !c.quantifiers.is_empty() {
            out.push(')');
        }
    }
}

fn facts(problem: &ProblemDef, index: &HashMap<&str, usize>) -> Vec<Fact> {
    let mut out = Vec::new();
    let mut emit = |prefix: &str, f: &mut dyn FnMut(&mut Extractor, &mut String)| {
        let mut ex = Extractor {
            index,
            objects: Vec::new(),
            vars: Vec::new(),
        };
        let mut template = prefix.to_string();
        f(&mut ex, &mut template);
        out.push(Fact {
            template,
            objects: ex.objects,
        });
    };
    for a in &problem.init {
        emit("init ", &mut |ex, s| ex.atom(a, s));
    }
    for l in &problem.goal {
        emit(
            if l.positive { "goal " } else { "goal-not " },
            &mut |ex, s| ex.atom(&l.atom, s),
        );
    }
    for c in &problem.constraints {
        emit("constraint ", &mut |ex, s| ex.constraint(c, s));
    }
    out
}

/// Replaces arbitrary sortable keys by their rank.
fn rank<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).unwrap())
        .collect()
}

/// (template, argument position, colours of all arguments).
type Occurrence = (usize, usize, Vec<usize>);

fn refine(types: &[&str], facts: &[Fact], templates: &[usize]) -> Vec<usize> {
    let mut colors = rank(types);
    loop {
        let mut occurrences: Vec<Vec<Occurrence>> = vec![Vec::new(); types.len()];
        for (fact, &t) in facts.iter().zip(templates) {
            let arg_colors: Vec<usize> = fact.objects.iter().map(|&o| colors[o]).collect();
            for (pos, &o) in fact.objects.iter().enumerate() {
                occurrences[o].push((t, pos, arg_colors.clone()));
            }
        }
        let keys: Vec<(usize, Vec<Occurrence>)> = occurrences
            .into_iter()
            .enumerate()
            .map(|(o, mut occ)| {
                occ.sort();
                (colors[o], occ)
            })
            .collect();
        let next = rank(&keys);
        let count = |c: &[usize]| c.iter().max().map_or(0, |m| m + 1);
        if count(&next) == count(&colors) {
            return next;
        }
        colors = next;
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).unwrap();
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

type Encoding = Vec<(usize, Vec<usize>)>;

fn encode(facts: &[Fact], templates: &[usize], names: &[usize]) -> Encoding {
    let mut enc: Encoding = facts
        .iter()
        .zip(templates)
        .map(|(f, &t)| (t, f.objects.iter().map(|&o| names[o]).collect()))
        .collect();
    enc.sort();
    enc
}

pub fn canonical_signature(problem: &ProblemDef) -> CanonicalSignature {
    let index: HashMap<&str, usize> = problem
        .objects
        .iter()
        .enumerate()
        .map(|(i, o)| (o.name.as_str(), i))
        .collect();
    let types: Vec<&str> = problem.objects.iter().map(|o| o.ty.as_str()).collect();
    let facts = facts(problem, &index);
    let template_text: Vec<&str> = facts.iter().map(|f| f.template.as_str()).collect();
    let templates = rank(&template_text);
    let colors = refine(&types, &facts, &templates);

    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (o, &c) in colors.iter().enumerate() {
        classes.entry(c).or_default().push(o);
    }
    let mut classes: Vec<Vec<usize>> = classes.into_values().collect();
    for class in &mut classes {
        class.sort_by(|&a, &b| problem.objects[a].name.cmp(&problem.objects[b].name));
    }
    let total = classes
        .iter()
        .try_fold(1usize, |acc, c| {
            (1..=c.len()).try_fold(acc, |a, k| a.checked_mul(k))
        })
        .unwrap_or(usize::MAX);

    // perms[k] is the current arrangement of class k.
    let mut perms: Vec<Vec<usize>> = classes.iter().map(|c| (0..c.len()).collect()).collect();
    let offsets: Vec<usize> = classes
        .iter()
        .scan(0, |acc, c| Some(std::mem::replace(acc, *acc + c.len())))
        .collect();
    let mut names = vec![0; problem.objects.len()];
    let assign = |perms: &[Vec<usize>], names: &mut [usize]| {
        for ((class, perm), off) in classes.iter().zip(perms).zip(&offsets) {
            for (slot, &member) in perm.iter().enumerate() {
                names[class[member]] = off + slot;
            }
        }
    };
    assign(&perms, &mut names);
    let mut best = (encode(&facts, &templates, &names), names.clone());
    if total <= PERMUTATION_CAP {
        'outer: loop {
            let mut k = 0;
            while !next_permutation(&mut perms[k]) {
                perms[k].sort_unstable();
                k += 1;
                if k == perms.len() {
                    break 'outer;
                }
            }
            assign(&perms, &mut names);
            let enc = encode(&facts, &templates, &names);
            if enc < best.0 {
                best = (enc, names.clone());
            }
        }
    } else {
        log::debug!(
            "signature of {}: {total} tied renamings, using name order",
            problem.name
        );
    }

    let (_, names) = best;
    let mut objects: Vec<(usize, &str)> = names.iter().zip(&types).map(|(&n, &t)| (n, t)).collect();
    objects.sort();
    let mut text = format!("domain {}\nobjects", problem.domain_name);
    for (n, t) in objects {
        text.push_str(&format!(" o{n}:{t}"));
    }
    let mut lines: Vec<String> = facts
        .iter()
        .map(|f| {
            let mut s = f.template.clone();
            for (k, &o) in f.objects.iter().enumerate().rev() {
                s = s.replace(&format!("${k}"), &format!("o{}", names[o]));
            }
            s
        })
        .collect();
    lines.sort();
    for l in lines {
        text.push('\n');
        text.push_str(&l);
    }
    CanonicalSignature(text)
}
