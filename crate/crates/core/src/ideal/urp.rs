//! Uniform random permutation over pairs of words, sampled lazily.

use std::collections::HashSet;

use super::{p_canonical, Backend, Dir, PermTable};
use crate::error::Fault;
use crate::seed::keyed;
use crate::transcript::Transcript;
use crate::word::{Pair, Width};

/// Lazily sampled permutation on `2n`-bit values.
///
/// A fresh entry is drawn uniformly and redrawn while it collides with an
/// output already in use, which gives the uniform distribution over unused
/// outputs. The first draw for a key equals the canonical `p` entry under the
/// same seed, so a permutation and a two-sided random function with equal
/// seeds answer identically until the first collision.
#[derive(Clone, Debug)]
pub struct Urp {
    width: Width,
    seed: u64,
    table: PermTable,
    fresh: Vec<(Dir, Pair, Pair)>,
    resamples: u64,
    check_made: HashSet<Pair>,
    coupling_intact: bool,
}

impl Urp {
    pub fn new(width: Width, seed: u64) -> Self {
        Urp {
            width,
            seed,
            table: PermTable::default(),
            fresh: Vec::new(),
            resamples: 0,
            check_made: HashSet::new(),
            coupling_intact: true,
        }
    }

    pub fn width(&self) -> Width {
        self.width
    }

    fn candidate(&self, dir: Dir, key: Pair, attempt: u64) -> Pair {
        if attempt == 0 {
            return p_canonical(self.width, self.seed, dir, key);
        }
        let raw = keyed(
            self.seed,
            &[0xc0 + dir as u64, self.width.join(key), attempt],
        );
        let two_n = 2 * self.width.bits();
        let packed = if two_n == 64 {
            raw
        } else {
            raw & ((1u64 << two_n) - 1)
        };
        self.width.split(packed)
    }

    fn sample(&mut self, dir: Dir, key: Pair) -> Pair {
        let mut attempt = 0;
        loop {
            let cand = self.candidate(dir, key, attempt);
            if !self.table.contains(dir.flip(), cand) {
                if attempt > 0 {
                    self.resamples += attempt;
                    self.coupling_intact = false;
                }
                self.table.set(dir, key, cand);
                self.table.set(dir.flip(), cand, key);
                self.fresh.push((dir, key, cand));
                return cand;
            }
            attempt += 1;
        }
    }

    pub fn forward_query(&mut self, input: Pair) -> Pair {
        self.check_made.remove(&input);
        match self.table.down.get(&input) {
            Some(&o) => o,
            None => self.sample(Dir::Down, input),
        }
    }

    pub fn backward_query(&mut self, output: Pair) -> Pair {
        match self.table.up.get(&output) {
            Some(&i) => {
                if self.check_made.contains(&i) {
                    self.coupling_intact = false;
                }
                i
            }
            None => self.sample(Dir::Up, output),
        }
    }

    /// `URP(x0, x1) == (x14, x15)`; may sample the forward entry.
    pub fn check_query(&mut self, input: Pair, output: Pair) -> bool {
        if self.table.down.contains_key(&input) {
            return self.table.down[&input] == output;
        }
        let o = self.sample(Dir::Down, input);
        self.check_made.insert(input);
        if o == output {
            self.coupling_intact = false;
        }
        o == output
    }

    /// Fresh entries in sampling order as `(direction, query, answer)`.
    pub fn fresh_answers(&self) -> &[(Dir, Pair, Pair)] {
        &self.fresh
    }

    /// Total number of redraws caused by collisions.
    pub fn resamples(&self) -> u64 {
        self.resamples
    }

    /// False once this permutation has answered something a two-sided random
    /// function with the same seed would have answered differently (a
    /// collision redraw, a `Check` that sampled a match, or an inverse query
    /// landing on an entry only `Check` created).
    pub fn coupling_intact(&self) -> bool {
        self.coupling_intact
    }

    pub fn table(&self) -> &PermTable {
        &self.table
    }
}

impl Backend for Urp {
    fn forward(&mut self, input: Pair, _log: &mut Transcript) -> Result<Pair, Fault> {
        Ok(self.forward_query(input))
    }

    fn backward(&mut self, output: Pair, _log: &mut Transcript) -> Result<Pair, Fault> {
        Ok(self.backward_query(output))
    }

    fn check(&mut self, input: Pair, output: Pair, _log: &mut Transcript) -> Result<bool, Fault> {
        Ok(self.check_query(input, output))
    }

    fn table(&self) -> &PermTable {
        &self.table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Word;

    #[test]
    fn memoized_and_inverse() {
        let w = Width::new(8).unwrap();
        let mut u = Urp::new(w, 3);
        let a = (Word(1), Word(2));
        let c = u.forward_query(a);
        assert_eq!(u.forward_query(a), c);
        assert_eq!(u.backward_query(c), a);
        let d = (Word(9), Word(9));
        let b = u.backward_query(d);
        assert_eq!(u.forward_query(b), d);
    }

    #[test]
    fn check_after_forward() {
        let w = Width::new(8).unwrap();
        let mut u = Urp::new(w, 4);
        let a = (Word(1), Word(2));
        let c = u.forward_query(a);
        assert!(u.check_query(a, c));
        assert!(!u.check_query(a, (c.0, c.1 ^ Word(1))));
    }
}
