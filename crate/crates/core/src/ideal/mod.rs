//! Lazy-sampled ideal primitives: the random permutation with a `Check`
//! procedure, the two-sided random function, and the Feistel construction,
//! all behind one [`Backend`] interface so the simulators can be wired to any
//! of them.

mod psi;
mod tables;
mod tsrf;
mod urp;

use std::collections::HashMap;

pub use psi::{feistel_forward, Psi};
pub use tables::{
    f_canonical, p_canonical, randomness_from_json, randomness_to_json, Dir, PartialH, RandTableF,
    RandTableP, RoundSource, SharedH,
};
pub use tsrf::Tsrf;
pub use urp::Urp;

use crate::error::Fault;
use crate::transcript::Transcript;
use crate::word::Pair;

/// Directional permutation table: `down` maps `(x0, x1)` to `(x14, x15)`,
/// `up` maps back. The two halves need not agree for a two-sided random
/// function.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PermTable {
    pub down: HashMap<Pair, Pair>,
    pub up: HashMap<Pair, Pair>,
}

impl PermTable {
    pub fn get(&self, dir: Dir, key: Pair) -> Option<Pair> {
        match dir {
            Dir::Down => self.down.get(&key).copied(),
            Dir::Up => self.up.get(&key).copied(),
        }
    }

    /// Writes an entry and returns the value it replaced.
    pub fn set(&mut self, dir: Dir, key: Pair, value: Pair) -> Option<Pair> {
        match dir {
            Dir::Down => self.down.insert(key, value),
            Dir::Up => self.up.insert(key, value),
        }
    }

    pub fn contains(&self, dir: Dir, key: Pair) -> bool {
        match dir {
            Dir::Down => self.down.contains_key(&key),
            Dir::Up => self.up.contains_key(&key),
        }
    }

    /// Table-only check shared by the two-sided random function and the
    /// Feistel construction.
    pub fn check(&self, input: Pair, output: Pair) -> bool {
        if let Some(&o) = self.down.get(&input) {
            return o == output;
        }
        if let Some(&i) = self.up.get(&output) {
            return i == input;
        }
        false
    }

    /// Number of `down` entries.
    pub fn len(&self) -> usize {
        self.down.len()
    }

    pub fn is_empty(&self) -> bool {
        self.down.is_empty() && self.up.is_empty()
    }
}

/// A permutation-like system exposing `P`, `P^-1` and `Check`.
pub trait Backend {
    fn forward(&mut self, input: Pair, log: &mut Transcript) -> Result<Pair, Fault>;
    fn backward(&mut self, output: Pair, log: &mut Transcript) -> Result<Pair, Fault>;
    fn check(&mut self, input: Pair, output: Pair, log: &mut Transcript) -> Result<bool, Fault>;
    fn table(&self) -> &PermTable;
    /// Number of reads of an explicit permutation table (zero if none).
    fn p_reads(&self) -> usize {
        0
    }
}
