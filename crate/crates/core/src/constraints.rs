//! Incremental monitors for the supported trajectory constraints.
//!
//! Each ground constraint is a small automaton fed one state at a time,
//! starting with the initial state. All four kinds are safety properties: a
//! violation, once reported, persists on every extension of the trajectory.

use std::fmt;

use crate::exec::{holds, State, Trajectory};
use crate::pddl::{ConstraintKind, GroundConstraint, GroundConstraintBody, GroundedTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Active,
    Violated,
}

/// Progress through the true-intervals of an at-most-once formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interval {
    Never,
    Inside,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aux {
    Stateless,
    /// sometime-before: whether the requirement held in some earlier state.
    SeenRequirement(bool),
    AtMostOnce(Interval),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonitorState {
    pub kind: ConstraintKind,
    pub status: Status,
    pub aux: Aux,
}

impl MonitorState {
    pub fn fresh(constraint: &GroundConstraint) -> Self {
        let aux = match constraint.body {
            GroundConstraintBody::Always(_) | GroundConstraintBody::AlwaysImply { .. } => {
                Aux::Stateless
            }
            GroundConstraintBody::SometimeBefore { .. } => Aux::SeenRequirement(false),
            GroundConstraintBody::AtMostOnce(_) => Aux::AtMostOnce(Interval::Never),
        };
        MonitorState {
            kind: constraint.kind(),
            status: Status::Active,
            aux,
        }
    }

    pub fn is_violated(&self) -> bool {
        self.status == Status::Violated
    }

    /// Advances the automaton by one state.
    ///
    /// # Panics
    /// If the monitor is already violated.
    pub fn observe(&self, constraint: &GroundConstraint, state: &State) -> MonitorState {
        assert!(!self.is_violated(), "observe called on a violated monitor");
        let violated = MonitorState {
            status: Status::Violated,
            ..*self
        };
        match (&constraint.body, self.aux) {
            (GroundConstraintBody::Always(f), _) => {
                if holds(state, f) {
                    *self
                } else {
                    violated
                }
            }
            (
                GroundConstraintBody::AlwaysImply {
                    antecedent,
                    consequent,
                },
                _,
            ) => {
                if holds(state, antecedent) && !holds(state, consequent) {
                    violated
                } else {
                    *self
                }
            }
            (
                GroundConstraintBody::SometimeBefore {
                    trigger,
                    requirement,
                },
                Aux::SeenRequirement(seen),
            ) => {
                // Strict past: the requirement holding in this same state does not count.
                if holds(state, trigger) && !seen {
                    violated
                } else {
                    MonitorState {
                        aux: Aux::SeenRequirement(seen || holds(state, requirement)),
                        ..*self
                    }
                }
            }
            (GroundConstraintBody::AtMostOnce(f), Aux::AtMostOnce(phase)) => {
                let now = holds(state, f);
                let next = match (phase, now) {
                    (Interval::Never, true) => Interval::Inside,
                    (Interval::Inside, false) => Interval::Closed,
                    (Interval::Closed, true) => return violated,
                    (p, _) => p,
                };
                MonitorState {
                    aux: Aux::AtMostOnce(next),
                    ..*self
                }
            }
            (body, aux) => unreachable!("monitor aux {aux:?} does not match constraint {body:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationEvent {
    pub monitor: usize,
    /// 0 for the initial state, `i` for the state after action `i`.
    pub step: usize,
    pub constraint: String,
}

impl fmt::Display for ViolationEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "constraint {} violated at step {}",
            self.constraint, self.step
        )
    }
}

/// Feeds `state` to every active monitor and reports the lowest-index new
/// violation, if any.
pub fn observe_all(
    task: &GroundedTask,
    monitors: &mut [MonitorState],
    state: &State,
    step: usize,
) -> Option<ViolationEvent> {
    let mut event = None;
    for (i, (m, c)) in monitors.iter_mut().zip(&task.monitors).enumerate() {
        if m.is_violated() {
            continue;
        }
        *m = m.observe(c, state);
        if m.is_violated() && event.is_none() {
            event = Some(ViolationEvent {
                monitor: i,
                step,
                constraint: c.text.clone(),
            });
        }
    }
    event
}

/// One monitor per ground constraint, with `s0` already observed.
pub fn init_monitors(
    task: &GroundedTask,
    s0: &State,
) -> (Vec<MonitorState>, Option<ViolationEvent>) {
    let mut monitors: Vec<MonitorState> = task.monitors.iter().map(MonitorState::fresh).collect();
    let event = observe_all(task, &mut monitors, s0, 0);
    (monitors, event)
}

/// The earliest violation along a trajectory; ties go to the lowest monitor index.
pub fn first_violation(trajectory: &Trajectory, task: &GroundedTask) -> Option<ViolationEvent> {
    let (mut monitors, event) = init_monitors(task, &trajectory.states[0]);
    if event.is_some() {
        return event;
    }
    trajectory
        .states
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, s)| observe_all(task, &mut monitors, s, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{GroundConstraintBody as B, GroundFormula};

    fn c(body: B) -> GroundConstraint {
        GroundConstraint {
            body,
            text: String::new(),
        }
    }

    fn run(con: &GroundConstraint, trace: &[&[usize]]) -> Option<usize> {
        let mut m = MonitorState::fresh(con);
        for (i, s) in trace.iter().enumerate() {
            m = m.observe(con, &State::from_fluents(2, s.iter().copied()));
            if m.is_violated() {
                return Some(i);
            }
        }
        None
    }

    #[test]
    fn sometime_before_is_strict() {
        let con = c(B::SometimeBefore {
            trigger: GroundFormula::Atom(0),
            requirement: GroundFormula::Atom(1),
        });
        assert_eq!(run(&con, &[&[0]]), Some(0));
        assert_eq!(run(&con, &[&[], &[0, 1]]), Some(1));
        assert_eq!(run(&con, &[&[1], &[0]]), None);
        assert_eq!(run(&con, &[&[1], &[], &[0]]), None);
    }

    #[test]
    fn at_most_once_intervals() {
        let con = c(B::AtMostOnce(GroundFormula::Atom(0)));
        assert_eq!(run(&con, &[&[0], &[0], &[0]]), None);
        assert_eq!(run(&con, &[&[], &[0], &[], &[]]), None);
        assert_eq!(run(&con, &[&[0], &[], &[0]]), Some(2));
    }

    #[test]
    fn always_and_always_imply() {
        let always = c(B::Always(GroundFormula::not(GroundFormula::Atom(0))));
        assert_eq!(run(&always, &[&[1], &[0]]), Some(1));
        let imply = c(B::AlwaysImply {
            antecedent: GroundFormula::Atom(0),
            consequent: GroundFormula::Atom(1),
        });
        assert_eq!(run(&imply, &[&[], &[0, 1], &[1]]), None);
        assert_eq!(run(&imply, &[&[], &[0]]), Some(1));
    }

    #[test]
    #[should_panic(expected = "violated monitor")]
    fn observing_after_violation_panics() {
        let con = c(B::Always(GroundFormula::Const(false)));
        let m = MonitorState::fresh(&con).observe(&con, &State::empty(1));
        m.observe(&con, &State::empty(1));
    }
}
