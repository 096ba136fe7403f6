//! The supported PDDL subset: STRIPS with typing, negative preconditions,
//! static equality and four PDDL3 trajectory-constraint patterns.

mod ast;
mod error;
mod ground;
mod parse;
mod plan;
pub mod sexpr;

pub use ast::*;
pub use error::{ParseError, ParseErrorKind};
pub use ground::{
    failed_equality, ground_task, ground_task_with, GroundAction, GroundAtom, GroundConstraint,
    GroundConstraintBody, GroundError, GroundFormula, GroundLiteral, GroundOptions, GroundedTask,
};
pub use parse::{parse_domain, parse_problem};
pub use plan::{parse_plan, Plan, PlanParseError, PlanStep};
pub use sexpr::Pos;
