use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One `(name arg ...)` line of a plan. Tokens are kept verbatim; name
/// resolution happens during validation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlanStep {
    pub name: String,
    pub args: Vec<String>,
}

impl PlanStep {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        args: impl IntoIterator<Item = S>,
    ) -> Self {
        PlanStep {
            name: name.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub source_text: String,
}

impl Plan {
    pub fn from_steps(steps: Vec<PlanStep>) -> Self {
        let mut plan = Plan {
            steps,
            source_text: String::new(),
        };
        plan.source_text = plan.to_text();
        plan
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Instruction-template line format, one step per line.
    pub fn to_text(&self) -> String {
        self.steps.iter().map(|s| format!("{s}\n")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: cannot parse plan step `{text}`")]
pub struct PlanParseError {
    /// 1-based line number.
    pub line: usize,
    pub text: String,
}

/// Parses one step per line. Blank lines are skipped; anything else that is
/// not exactly one parenthesised step is rejected.
pub fn parse_plan(text: &str) -> Result<Plan, PlanParseError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fail = || PlanParseError {
            line: i + 1,
            text: raw.to_string(),
        };
        let inner = line
            .strip_prefix('(')
            .and_then(|l| l.strip_suffix(')'))
            .ok_or_else(fail)?;
        if inner.contains(['(', ')', ';']) {
            return Err(fail());
        }
        let mut tokens = inner.split_whitespace();
        let name = tokens.next().ok_or_else(fail)?;
        steps.push(PlanStep::new(name, tokens));
    }
    Ok(Plan {
        steps,
        source_text: text.to_string(),
    })
}
