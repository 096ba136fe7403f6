//! STRIPS state-transition semantics over a grounded task.

use std::fmt;

use fixedbitset::FixedBitSet;

use crate::pddl::{GroundAction, GroundFormula, GroundLiteral, GroundedTask};

/// The set of true fluents, one bit per fluent index.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State {
    bits: FixedBitSet,
}

impl State {
    pub fn empty(width: usize) -> Self {
        State {
            bits: FixedBitSet::with_capacity(width),
        }
    }

    pub fn from_fluents(width: usize, fluents: impl IntoIterator<Item = usize>) -> Self {
        let mut s = State::empty(width);
        for f in fluents {
            s.insert(f);
        }
        s
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, fluent: usize) -> bool {
        assert!(
            fluent < self.bits.len(),
            "fluent {fluent} outside state of width {}",
            self.bits.len()
        );
        self.bits.contains(fluent)
    }

    pub fn insert(&mut self, fluent: usize) {
        self.bits.insert(fluent);
    }

    pub fn remove(&mut self, fluent: usize) {
        self.bits.set(fluent, false);
    }

    pub fn true_fluents(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.bits.ones()).finish()
    }
}

pub fn literal_holds(state: &State, lit: GroundLiteral) -> bool {
    state.contains(lit.fluent) == lit.positive
}

/// Evaluates a ground formula. Panics on a fluent index outside the state,
/// which can only come from a grounding bug.
pub fn holds(state: &State, formula: &GroundFormula) -> bool {
    match formula {
        GroundFormula::Const(b) => *b,
        GroundFormula::Atom(i) => state.contains(*i),
        GroundFormula::Not(f) => !holds(state, f),
        GroundFormula::And(fs) => fs.iter().all(|f| holds(state, f)),
        GroundFormula::Imply(a, b) => !holds(state, a) || holds(state, b),
    }
}

/// The first unsatisfied precondition literal, in declaration order.
pub fn check_precondition(state: &State, action: &GroundAction) -> Result<(), GroundLiteral> {
    match action
        .precondition
        .iter()
        .find(|l| !literal_holds(state, **l))
    {
        Some(l) => Err(*l),
        None => Ok(()),
    }
}

/// `(state \ delete) ∪ add`. Does not check the precondition.
pub fn apply(state: &State, action: &GroundAction) -> State {
    let mut next = state.clone();
    for &f in &action.delete {
        next.remove(f);
    }
    for &f in &action.add {
        next.insert(f);
    }
    next
}

/// `(n_sat, n_total)` over the task's goal conjuncts.
pub fn goal_satisfaction(state: &State, task: &GroundedTask) -> (usize, usize) {
    let sat = task
        .goal
        .iter()
        .filter(|l| literal_holds(state, **l))
        .count();
    (sat, task.goal.len())
}

pub fn goal_reached(state: &State, task: &GroundedTask) -> bool {
    task.goal.iter().all(|l| literal_holds(state, *l))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    /// `states.len() == applied.len() + 1`.
    pub states: Vec<State>,
    pub applied: Vec<GroundAction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionFailure {
    /// 0-based index of the inapplicable action.
    pub step: usize,
    pub literal: GroundLiteral,
    /// Trajectory up to the state before the failing action.
    pub prefix: Trajectory,
}

impl Trajectory {
    pub fn new(init: State) -> Self {
        Trajectory {
            states: vec![init],
            applied: Vec::new(),
        }
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("trajectory has an initial state")
    }

    pub fn len(&self) -> usize {
        self.applied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.applied.is_empty()
    }

    pub fn push(&mut self, action: GroundAction) -> Result<(), GroundLiteral> {
        check_precondition(self.last(), &action)?;
        let next = apply(self.last(), &action);
        self.states.push(next);
        self.applied.push(action);
        Ok(())
    }

    /// Executes `actions` from the task's initial state, stopping at the first
    /// inapplicable one.
    pub fn execute(
        task: &GroundedTask,
        actions: &[GroundAction],
    ) -> Result<Trajectory, ExecutionFailure> {
        let mut t = Trajectory::new(task.init.clone());
        for (step, a) in actions.iter().enumerate() {
            if let Err(literal) = t.push(a.clone()) {
                return Err(ExecutionFailure {
                    step,
                    literal,
                    prefix: t,
                });
            }
        }
        Ok(t)
    }
}
