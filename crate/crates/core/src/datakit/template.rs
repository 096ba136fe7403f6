//! The fixed instruction template.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

const PREAMBLE: &str =
    "You are a planning expert. Your task is to generate a valid plan for the given domain and problem.";

/// The output-requirement block, verbatim.
pub const REQUIREMENTS: &str = "Output Requirements:
- Return ONLY the plan steps, one per line.
- Each line must follow the format: (<ACTION_NAME> <param1> <param2> ...).
- Use only objects defined in the PROBLEM.
- Do NOT include any explanations, comments, or headers.
- Do NOT output anything except the plan lines.
- The output must NOT contain natural language sentences.
- If the PROBLEM includes constraints, the plan must satisfy all of them; otherwise, solve as a standard goal-directed task.
- Ensure that all action preconditions hold and no constraints or invariants are violated at any step.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Pddl3,
    Nl,
    Json,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Pddl3, Format::Nl, Format::Json];

    pub fn name(self) -> &'static str {
        match self {
            Format::Pddl3 => "pddl3",
            Format::Nl => "nl",
            Format::Json => "json",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pddl3" | "pddl" => Ok(Format::Pddl3),
            "nl" => Ok(Format::Nl),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format `{s}` (expected pddl3, nl or json)")),
        }
    }
}

/// Fills the template with already-rendered domain and problem text.
pub fn fill_template(domain_content: &str, problem_content: &str) -> String {
    format!(
        "{PREAMBLE}\n\nDOMAIN:\n{}\n\nPROBLEM:\n{}\n\n{REQUIREMENTS}\n\nPlan:\n",
        domain_content.trim_end(),
        problem_content.trim_end()
    )
}
