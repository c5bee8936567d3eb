//! Invariants of 14-round simulator runs, checked from the transcript alone.

use std::collections::HashMap;

use serde::Serialize;

use crate::ideal::{feistel_forward, Dir};
use crate::transcript::{Event, Party, Transcript};
use crate::word::{Pair, Word};

/// Which invariants to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    /// Efficiency bounds and absence of overwrites.
    Basic,
    /// Adds the Feistel consistency of every distinguisher permutation query;
    /// meaningful for chain-completing distinguishers.
    Consistency,
    /// Adds adapt count = permutation-table reads; needs a two-sided random
    /// function backend, whose reads appear in the transcript.
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantResult {
    pub name: &'static str,
    pub pass: bool,
    /// Why it failed, or empty.
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub results: Vec<InvariantResult>,
}

impl InvariantReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.results
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name)
            .collect()
    }
}

pub const EFFICIENCY: &str = "efficiency";
pub const NO_OVERWRITE: &str = "no_overwrite";
pub const CONSISTENCY: &str = "consistency";
pub const ADAPT_COUNT: &str = "adapt_count";

fn result(name: &'static str, witnesses: Vec<String>) -> InvariantResult {
    InvariantResult {
        name,
        pass: witnesses.is_empty(),
        witnesses,
    }
}

/// Checks a complete transcript of a 14-round simulator run.
pub fn assert_invariants(log: &Transcript, level: Level) -> InvariantReport {
    let ev = log.events();
    let w = log.width();
    let mut g: Vec<HashMap<Word, Word>> = vec![HashMap::new(); 15];
    let mut q = 0u64;
    let (mut p_calls, mut pinv_calls, mut checks, mut outer, mut adapts, mut reads) =
        (0u64, 0u64, 0u64, 0u64, 0u64, 0u64);
    let mut dist_p: Vec<(Pair, Pair)> = Vec::new();
    let mut overwrites = Vec::new();
    for (i, e) in ev.iter().enumerate() {
        match e {
            Event::FQuery { .. } | Event::Fault { .. } => q += 1,
            Event::PQuery {
                by,
                dir,
                input,
                output,
            } => {
                match dir {
                    Dir::Down => p_calls += 1,
                    Dir::Up => pinv_calls += 1,
                }
                if *by == Party::Dist {
                    q += 1;
                    dist_p.push(match dir {
                        Dir::Down => (*input, *output),
                        Dir::Up => (*output, *input),
                    });
                }
            }
            Event::Check { .. } => checks += 1,
            Event::Sample { round, x, y } | Event::ForceVal { round, x, y } => {
                g[*round as usize].insert(*x, *y);
            }
            Event::Overwrite { round, x, old, new } => overwrites.push(format!(
                "event {i}: forceVal({}, {}, {round}) over {}",
                w.hex(*x),
                w.hex(*new),
                w.hex(*old)
            )),
            Event::Dequeue {
                k, skipped: false, ..
            } => {
                adapts += 1;
                if *k == 1 {
                    outer += 1;
                }
            }
            Event::PRead { .. } => reads += 1,
            _ => {}
        }
    }

    let mut eff = Vec::new();
    let q2 = 6 * q * q;
    for (i, t) in g.iter().enumerate().skip(1) {
        if t.len() as u64 > q2 {
            eff.push(format!("|G_{i}| = {} > 6q^2 = {q2}", t.len()));
        }
    }
    if p_calls > q2 {
        eff.push(format!("P calls {p_calls} > 6q^2 = {q2}"));
    }
    if pinv_calls > q2 {
        eff.push(format!("P^-1 calls {pinv_calls} > 6q^2 = {q2}"));
    }
    let cb = 1296u128 * (q as u128).pow(8);
    if checks as u128 > cb {
        eff.push(format!("Check calls {checks} > 1296q^8 = {cb}"));
    }
    if outer > q {
        eff.push(format!("outer completions {outer} > q = {q}"));
    }
    let mut results = vec![result(EFFICIENCY, eff), result(NO_OVERWRITE, overwrites)];

    if level >= Level::Consistency {
        let mut bad = Vec::new();
        for (input, output) in dist_p {
            let got = feistel_forward(14, input, |i, x| g[i as usize].get(&x).copied().ok_or(()));
            match got {
                Ok(o) if o == output => {}
                Ok(o) => bad.push(format!(
                    "P({}, {}) = ({}, {}) but the tables give ({}, {})",
                    w.hex(input.0),
                    w.hex(input.1),
                    w.hex(output.0),
                    w.hex(output.1),
                    w.hex(o.0),
                    w.hex(o.1)
                )),
                Err(()) => bad.push(format!(
                    "P({}, {}) not evaluable through G",
                    w.hex(input.0),
                    w.hex(input.1)
                )),
            }
        }
        results.push(result(CONSISTENCY, bad));
    }
    if level >= Level::Full {
        let bad = if adapts == reads {
            vec![]
        } else {
            vec![format!("{adapts} adapt calls, {reads} p reads")]
        };
        results.push(result(ADAPT_COUNT, bad));
    }
    InvariantReport { results }
}
