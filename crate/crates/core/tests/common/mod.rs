//! Independent whole-trace oracles used by several test targets.
#![allow(dead_code)]

use std::collections::HashSet;

use safeplan_core::pddl::*;

/// A state as a plain set of fluent indices, kept separate from the
/// library's bitset so the oracle shares no evaluation code with it.
pub type RawState = HashSet<usize>;

pub fn eval(f: &GroundFormula, s: &RawState) -> bool {
    match f {
        GroundFormula::Const(b) => *b,
        GroundFormula::Atom(i) => s.contains(i),
        GroundFormula::Not(x) => !eval(x, s),
        GroundFormula::And(xs) => xs.iter().all(|x| eval(x, s)),
        GroundFormula::Imply(a, b) => !eval(a, s) || eval(b, s),
    }
}

/// Earliest state index at which the quantified definition of `c` fails.
pub fn violation_step(c: &GroundConstraintBody, trace: &[RawState]) -> Option<usize> {
    (0..trace.len()).find(|&i| {
        let s = &trace[i];
        match c {
            GroundConstraintBody::Always(f) => !eval(f, s),
            GroundConstraintBody::AlwaysImply {
                antecedent,
                consequent,
            } => eval(antecedent, s) && !eval(consequent, s),
            // ∀i: φ(S_i) → ∃j < i: ψ(S_j)
            GroundConstraintBody::SometimeBefore {
                trigger,
                requirement,
            } => eval(trigger, s) && !(0..i).any(|j| eval(requirement, &trace[j])),
            // Prefix ending at i has two disjoint true-intervals: some j < k < i
            // with φ(S_j), ¬φ(S_k), and φ(S_i).
            GroundConstraintBody::AtMostOnce(f) => {
                eval(f, s)
                    && (0..i).any(|j| eval(f, &trace[j]) && (j + 1..i).any(|k| !eval(f, &trace[k])))
            }
        }
    })
}

/// `(monitor, step)` of the earliest violation, ties to the lowest monitor.
pub fn oracle_first_violation(task: &GroundedTask, trace: &[RawState]) -> Option<(usize, usize)> {
    task.monitors
        .iter()
        .enumerate()
        .filter_map(|(m, c)| violation_step(&c.body, trace).map(|t| (m, t)))
        .min_by_key(|&(m, t)| (t, m))
}

pub fn raw_init(task: &GroundedTask) -> RawState {
    task.init.true_fluents().collect()
}

/// Returns `None` if some precondition fails.
pub fn raw_apply(s: &RawState, a: &GroundAction) -> Option<RawState> {
    if !a
        .precondition
        .iter()
        .all(|l| s.contains(&l.fluent) == l.positive)
    {
        return None;
    }
    let mut next = s.clone();
    for d in &a.delete {
        next.remove(d);
    }
    next.extend(a.add.iter().copied());
    Some(next)
}

pub fn raw_goal(task: &GroundedTask, s: &RawState) -> bool {
    task.goal
        .iter()
        .all(|l| s.contains(&l.fluent) == l.positive)
}

/// Every executable action-index sequence of length `0..=depth`, each with its trace.
pub fn executable_sequences(task: &GroundedTask, depth: usize) -> Vec<(Vec<usize>, Vec<RawState>)> {
    let mut out = Vec::new();
    let mut stack = vec![(Vec::new(), vec![raw_init(task)])];
    while let Some((seq, trace)) = stack.pop() {
        if seq.len() < depth {
            for (i, a) in task.actions.iter().enumerate() {
                if let Some(next) = raw_apply(trace.last().unwrap(), a) {
                    let mut s2 = seq.clone();
                    s2.push(i);
                    let mut t2 = trace.clone();
                    t2.push(next);
                    stack.push((s2, t2));
                }
            }
        }
        out.push((seq, trace));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// A 3-block task carrying all four constraint kinds, each violable within
/// four steps. The goal needs exactly four steps.
pub const THREE_BLOCK_ALL_KINDS: &str = "
(define (problem three-block-all-kinds)
  (:domain blocksworld)
  (:objects b1 b2 b3 - block)
  (:init (on-table b1) (on-table b2) (on-table b3) (clear b1) (clear b2) (clear b3) (handempty))
  (:goal (and (on b1 b2) (on b2 b3)))
  (:constraints
    (and
      (sometime-before (on b1 b2) (on b2 b3))
      (at-most-once (holding b3))
      (always (imply (on b3 b1) (on b1 b2)))
      (always (not (on b2 b1))))))
";

pub fn plan_of(task: &GroundedTask, seq: &[usize]) -> Plan {
    Plan::from_steps(seq.iter().map(|&i| task.actions[i].step()).collect())
}

/// Category rank (1..=5) and t_v from first principles: run the raw
/// semantics until an action is inapplicable, check the quantified
/// constraint definitions over the states reached, then the goal.
pub fn oracle_classify(task: &GroundedTask, seq: &[usize]) -> (u8, Option<usize>) {
    let mut trace = vec![raw_init(task)];
    let mut blocked = None;
    for (k, &i) in seq.iter().enumerate() {
        match raw_apply(trace.last().unwrap(), &task.actions[i]) {
            Some(next) => trace.push(next),
            None => {
                blocked = Some(k);
                break;
            }
        }
    }
    if let Some((_, t)) = oracle_first_violation(task, &trace) {
        return (2, Some(t));
    }
    if let Some(k) = blocked {
        return (3, Some(k));
    }
    if raw_goal(task, trace.last().unwrap()) {
        (5, None)
    } else {
        (4, None)
    }
}

/// All index sequences of length exactly `len` over `n` actions.
pub fn all_sequences(n: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n.pow(len as u32)).map(move |mut code| {
        let mut seq = vec![0; len];
        for slot in seq.iter_mut().rev() {
            *slot = code % n;
            code /= n;
        }
        seq
    })
}
