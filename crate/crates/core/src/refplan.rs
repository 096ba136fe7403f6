//! Forward search for reference plans.
//!
//! Search nodes pair a world state with the monitor automata, so
//! sometime-before and at-most-once are tracked exactly. Successors that
//! violate a constraint are discarded; this is complete because every
//! supported constraint is prefix-closed.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use thiserror::Error;

use crate::constraints::{init_monitors, observe_all, MonitorState};
use crate::exec::{apply, check_precondition, goal_satisfaction, State};
use crate::pddl::{GroundedTask, Plan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Constrained,
    /// Ignores trajectory constraints entirely.
    Blind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Shortest safe plan.
    #[default]
    BreadthFirst,
    /// Greedy on the number of unsatisfied goal conjuncts, then depth.
    GoalCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Distinct search nodes that may be stored.
    pub max_nodes: usize,
    pub max_depth: Option<usize>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 500_000,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveOptions {
    pub mode: Mode,
    pub strategy: Strategy,
    pub budget: Budget,
}

impl SolveOptions {
    pub fn blind() -> Self {
        SolveOptions {
            mode: Mode::Blind,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("search budget exhausted after {nodes} nodes")]
    BudgetExhausted { nodes: usize },
    #[error("no plan exists: search space closed after {nodes} nodes")]
    Infeasible { nodes: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub plan: Plan,
    pub nodes: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Key {
    state: State,
    monitors: Vec<MonitorState>,
}

struct Node {
    parent: Option<(usize, usize)>,
    depth: usize,
}

struct Search<'t> {
    task: &'t GroundedTask,
    mode: Mode,
    keys: Vec<Key>,
    nodes: Vec<Node>,
    seen: HashMap<Key, usize>,
}

impl<'t> Search<'t> {
    fn plan_to(&self, mut id: usize) -> Plan {
        let mut steps = Vec::new();
        while let Some((parent, action)) = self.nodes[id].parent {
            steps.push(self.task.actions[action].step());
            id = parent;
        }
        steps.reverse();
        Plan::from_steps(steps)
    }

    fn goal(&self, state: &State) -> bool {
        let (sat, total) = goal_satisfaction(state, self.task);
        sat == total
    }

    /// Unseen, non-violating successors of `id`, in action order.
    fn successors(&mut self, id: usize) -> Vec<usize> {
        let depth = self.nodes[id].depth + 1;
        let mut out = Vec::new();
        for (a, action) in self.task.actions.iter().enumerate() {
            let key = &self.keys[id];
            if check_precondition(&key.state, action).is_err() {
                continue;
            }
            let state = apply(&key.state, action);
            let mut monitors = key.monitors.clone();
            if self.mode == Mode::Constrained
                && observe_all(self.task, &mut monitors, &state, depth).is_some()
            {
                continue;
            }
            let next = Key { state, monitors };
            if let Entry::Vacant(slot) = self.seen.entry(next.clone()) {
                slot.insert(self.nodes.len());
                out.push(self.nodes.len());
                self.keys.push(next);
                self.nodes.push(Node {
                    parent: Some((id, a)),
                    depth,
                });
            }
        }
        out
    }
}

pub fn solve(task: &GroundedTask, options: SolveOptions) -> Result<Solution, SolveError> {
    let monitors = match options.mode {
        Mode::Blind => Vec::new(),
        Mode::Constrained => {
            let (m, event) = init_monitors(task, &task.init);
            if event.is_some() {
                return Err(SolveError::Infeasible { nodes: 0 });
            }
            m
        }
    };
    let root = Key {
        state: task.init.clone(),
        monitors,
    };
    let mut search = Search {
        task,
        mode: options.mode,
        keys: vec![root.clone()],
        nodes: vec![Node {
            parent: None,
            depth: 0,
        }],
        seen: HashMap::from([(root, 0)]),
    };
    if search.goal(&task.init) {
        return Ok(Solution {
            plan: Plan::from_steps(Vec::new()),
            nodes: 1,
        });
    }

    let unsatisfied = |s: &State| {
        let (sat, total) = goal_satisfaction(s, task);
        total - sat
    };
    let mut fifo = VecDeque::from([0usize]);
    let mut heap = BinaryHeap::from([Reverse((unsatisfied(&task.init), 0usize, 0usize))]);
    let mut truncated = false;

    loop {
        let id = match options.strategy {
            Strategy::BreadthFirst => fifo.pop_front(),
            Strategy::GoalCount => heap.pop().map(|Reverse((_, _, id))| id),
        };
        let Some(id) = id else {
            let nodes = search.nodes.len();
            return Err(if truncated {
                SolveError::BudgetExhausted { nodes }
            } else {
                SolveError::Infeasible { nodes }
            });
        };
        if options
            .budget
            .max_depth
            .is_some_and(|d| search.nodes[id].depth >= d)
        {
            truncated = true;
            continue;
        }
        for child in search.successors(id) {
            if search.goal(&search.keys[child].state) {
                return Ok(Solution {
                    plan: search.plan_to(child),
                    nodes: search.nodes.len(),
                });
            }
            match options.strategy {
                Strategy::BreadthFirst => fifo.push_back(child),
                Strategy::GoalCount => {
                    let h = unsatisfied(&search.keys[child].state);
                    heap.push(Reverse((h, search.nodes[child].depth, child)));
                }
            }
        }
        if search.nodes.len() > options.budget.max_nodes {
            return Err(SolveError::BudgetExhausted {
                nodes: search.nodes.len(),
            });
        }
    }
}
