//! Bornological group actions and coarse structures over finite sets and
//! integer lattices.
//!
//! The crate represents bornologies, coarse structures and group actions by
//! finitely describable data (boxes, exhaustion chains, entourage
//! descriptors), decides properness of actions exactly where the box calculus
//! allows it, builds the coarse structure associated with a proper action and
//! checks the characterization theorems relating them. Every symbolic
//! primitive has a brute-force counterpart in [`oracle`] for cross-checking.

pub mod actions;
pub mod associated;
pub mod bornology;
pub mod cli;
pub mod coarse;
pub mod error;
pub mod instance;
pub mod lattice;
pub mod oracle;
pub mod report;
pub mod sets;

pub use error::{Error, Result};

/// Search limits shared by every check that may need to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Radius of the ℓ∞ window used for witness searches and oracles.
    pub window: i64,
    /// Largest chain index inspected.
    pub max_index: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { window: 64, max_index: 8 }
    }
}

impl Budget {
    pub fn new(window: i64, max_index: u32) -> Self {
        Budget { window, max_index }
    }
}

/// Three-valued truth used by membership and containment queries that may
/// run out of budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    Yes,
    No,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::Yes
        } else {
            Truth::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Truth::Yes
    }

    pub fn is_no(self) -> bool {
        self == Truth::No
    }

    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::No, _) | (_, Truth::No) => Truth::No,
            (Truth::Yes, Truth::Yes) => Truth::Yes,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::Yes, _) | (_, Truth::Yes) => Truth::Yes,
            (Truth::No, Truth::No) => Truth::No,
            _ => Truth::Unknown,
        }
    }
}
