//! Error and terminal-state types shared across the crate.

use thiserror::Error;

use crate::word::Word;

/// Invalid run configuration or malformed serialized input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("word width {0} outside 2..=32")]
    Width(u32),
    #[error("malformed hex word {0:?}")]
    Hex(String),
    #[error("malformed table key {0:?}")]
    Key(String),
    #[error("script error: {0}")]
    Script(String),
    #[error("{0}")]
    Other(String),
}

/// A hard fault inside a simulated system. Unlike a simulator abort, a fault
/// means an assumption of the experiment was violated.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Fault {
    /// A partial round table was read at an entry marked unused.
    #[error("read of unused entry h({round}, {x})")]
    Bottom { round: u8, x: Word },
    /// An explicit table without a fallback was read at a missing key.
    #[error("missing randomness entry for round {round} at {x}")]
    MissingF { round: u8, x: Word },
    #[error("missing permutation randomness entry")]
    MissingP,
    /// `forceVal` overwrote a value while running in fault-fast mode.
    #[error("overwrite of G_{round}({x}): {old} -> {new}")]
    Overwrite {
        round: u8,
        x: Word,
        old: Word,
        new: Word,
    },
    /// The simulator exceeded its cap on backend calls.
    #[error("simulator made {calls} backend calls, over its cap")]
    WorkCap { calls: u64 },
}

/// Where a six-round simulator run stopped.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbortLocation {
    /// An adapt slot `F_round(x)` was already defined.
    #[error("adapt collision at F{round}({x})")]
    AdaptCollision { round: u8, x: Word },
    #[error("history of F{round} exceeded the cap")]
    HistoryCap { round: u8 },
    #[error("permutation query budget exhausted")]
    Budget,
}

/// Why a distinguisher's interaction ended early.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Halt {
    #[error("simulator abort: {0}")]
    Abort(AbortLocation),
    #[error("fault: {0}")]
    Fault(Fault),
}

impl From<Fault> for Halt {
    fn from(f: Fault) -> Halt {
        Halt::Fault(f)
    }
}

impl From<AbortLocation> for Halt {
    fn from(a: AbortLocation) -> Halt {
        Halt::Abort(a)
    }
}
