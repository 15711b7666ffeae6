//! Deterministic components of the panel model.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Deterministic terms removed from each unit before testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeterministicCase {
    /// No deterministic terms.
    None,
    /// Unit-specific intercepts.
    Intercept,
    /// Unit-specific intercepts and linear trends.
    InterceptTrend,
}

impl DeterministicCase {
    /// All three cases in increasing order of deterministic content.
    pub const ALL: [DeterministicCase; 3] = [
        DeterministicCase::None,
        DeterministicCase::Intercept,
        DeterministicCase::InterceptTrend,
    ];

    /// Index of the Fredholm determinant that carries this case's m.g.f.
    pub fn model_index(self) -> usize {
        match self {
            DeterministicCase::None => 1,
            DeterministicCase::Intercept => 2,
            DeterministicCase::InterceptTrend => 4,
        }
    }

    /// Stable lowercase name used on the command line and in output files.
    pub fn name(self) -> &'static str {
        match self {
            DeterministicCase::None => "none",
            DeterministicCase::Intercept => "intercept",
            DeterministicCase::InterceptTrend => "intercept-trend",
        }
    }
}

impl fmt::Display for DeterministicCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DeterministicCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(DeterministicCase::None),
            "intercept" | "mu" => Ok(DeterministicCase::Intercept),
            "intercept-trend" | "trend" | "tau" => Ok(DeterministicCase::InterceptTrend),
            other => Err(Error::InvalidInput(format!("unknown deterministic case '{other}'"))),
        }
    }
}
