//! The four bundled domains and the hand-written example problems.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const BLOCKSWORLD_DOMAIN: &str = include_str!("../fixtures/domains/blocksworld.pddl");
pub const FERRY_DOMAIN: &str = include_str!("../fixtures/domains/ferry.pddl");
pub const GRIPPERS_DOMAIN: &str = include_str!("../fixtures/domains/grippers.pddl");
pub const SPANNER_DOMAIN: &str = include_str!("../fixtures/domains/spanner.pddl");

pub const BLOCKSWORLD_EXAMPLE: &str = include_str!("../fixtures/problems/blocksworld-example.pddl");
pub const BLOCKSWORLD_SMALL: &str = include_str!("../fixtures/problems/blocksworld-small.pddl");
pub const FERRY_EXAMPLE: &str = include_str!("../fixtures/problems/ferry-example.pddl");
pub const GRIPPERS_EXAMPLE: &str = include_str!("../fixtures/problems/grippers-example.pddl");
pub const SPANNER_EXAMPLE: &str = include_str!("../fixtures/problems/spanner-example.pddl");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Blocksworld,
    Ferry,
    Grippers,
    Spanner,
}

impl DomainTag {
    pub const ALL: [DomainTag; 4] = [
        DomainTag::Blocksworld,
        DomainTag::Ferry,
        DomainTag::Grippers,
        DomainTag::Spanner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainTag::Blocksworld => "blocksworld",
            DomainTag::Ferry => "ferry",
            DomainTag::Grippers => "grippers",
            DomainTag::Spanner => "spanner",
        }
    }

    pub fn domain_text(self) -> &'static str {
        match self {
            DomainTag::Blocksworld => BLOCKSWORLD_DOMAIN,
            DomainTag::Ferry => FERRY_DOMAIN,
            DomainTag::Grippers => GRIPPERS_DOMAIN,
            DomainTag::Spanner => SPANNER_DOMAIN,
        }
    }

    /// The constrained example problem shipped for this domain.
    pub fn example_problem(self) -> &'static str {
        match self {
            DomainTag::Blocksworld => BLOCKSWORLD_EXAMPLE,
            DomainTag::Ferry => FERRY_EXAMPLE,
            DomainTag::Grippers => GRIPPERS_EXAMPLE,
            DomainTag::Spanner => SPANNER_EXAMPLE,
        }
    }

    pub fn domain(self) -> crate::pddl::DomainDef {
        crate::pddl::parse_domain(self.domain_text()).expect("bundled domain parses")
    }

    /// Maps a PDDL `(domain ...)` name back to its tag.
    pub fn from_domain_name(name: &str) -> Option<DomainTag> {
        DomainTag::ALL.into_iter().find(|t| t.domain().name == name)
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DomainTag::ALL
            .into_iter()
            .find(|t| t.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                format!("unknown domain `{s}` (expected blocksworld, ferry, grippers or spanner)")
            })
    }
}
