//! The Feistel construction over a round-function source.

use std::collections::HashMap;

use super::{Backend, PermTable, RoundSource};
use crate::error::Fault;
use crate::transcript::Transcript;
use crate::word::{Pair, Word};

/// Evaluates `rounds` Feistel rounds forward from `(x0, x1)` with
/// `x_i = x_{i-2} ^ f(i-1, x_{i-1})`, returning `(x_r, x_{r+1})`.
pub fn feistel_forward<E>(
    rounds: u8,
    input: Pair,
    mut f: impl FnMut(u8, Word) -> Result<Word, E>,
) -> Result<Pair, E> {
    let (mut a, mut b) = input;
    for i in 1..=rounds {
        let c = a ^ f(i, b)?;
        a = b;
        b = c;
    }
    Ok((a, b))
}

/// Feistel construction with memoized round functions drawn from `src`.
/// Both directional entries are recorded on every evaluation; `Check`
/// consults only those entries.
#[derive(Clone, Debug)]
pub struct Psi<S> {
    rounds: u8,
    src: S,
    h: HashMap<(u8, Word), Word>,
    table: PermTable,
}

impl<S: RoundSource> Psi<S> {
    pub fn new(rounds: u8, src: S) -> Self {
        Psi {
            rounds,
            src,
            h: HashMap::new(),
            table: PermTable::default(),
        }
    }

    pub fn rounds(&self) -> u8 {
        self.rounds
    }

    /// Round function `i` at `x`, memoized.
    pub fn round(&mut self, i: u8, x: Word) -> Result<Word, Fault> {
        if let Some(&y) = self.h.get(&(i, x)) {
            return Ok(y);
        }
        let y = self.src.round_value(i, x)?;
        self.h.insert((i, x), y);
        Ok(y)
    }

    pub fn forward_eval(&mut self, input: Pair) -> Result<Pair, Fault> {
        let rounds = self.rounds;
        let out = feistel_forward(rounds, input, |i, x| self.round(i, x))?;
        self.table.down.insert(input, out);
        self.table.up.insert(out, input);
        Ok(out)
    }

    pub fn backward_eval(&mut self, output: Pair) -> Result<Pair, Fault> {
        // Walking down from (x_r, x_{r+1}): x_i = x_{i+2} ^ f(i+1, x_{i+1}).
        let (mut hi, mut lo) = (output.1, output.0);
        for i in (1..=self.rounds).rev() {
            let prev = hi ^ self.round(i, lo)?;
            hi = lo;
            lo = prev;
        }
        let input = (lo, hi);
        self.table.down.insert(input, output);
        self.table.up.insert(output, input);
        Ok(input)
    }

    pub fn source(&self) -> &S {
        &self.src
    }
}

impl<S: RoundSource> Backend for Psi<S> {
    fn forward(&mut self, input: Pair, _log: &mut Transcript) -> Result<Pair, Fault> {
        self.forward_eval(input)
    }

    fn backward(&mut self, output: Pair, _log: &mut Transcript) -> Result<Pair, Fault> {
        self.backward_eval(output)
    }

    fn check(&mut self, input: Pair, output: Pair, _log: &mut Transcript) -> Result<bool, Fault> {
        Ok(self.table.check(input, output))
    }

    fn table(&self) -> &PermTable {
        &self.table
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::RandTableF;
    use crate::word::Width;

    #[test]
    fn zero_functions_are_identity() {
        let w = Width::new(8).unwrap();
        let mut p = Psi::new(14, RandTableF::zero(w));
        let a = (Word(3), Word(7));
        assert_eq!(p.forward_eval(a).unwrap(), a);
    }

    #[test]
    fn inverse_roundtrip() {
        let w = Width::new(8).unwrap();
        for rounds in [6u8, 14] {
            let mut p = Psi::new(rounds, RandTableF::seeded(w, 5));
            for x in 0..40u64 {
                let a = (Word(x), Word((x * 37) & 0xff));
                let o = p.forward_eval(a).unwrap();
                assert_eq!(p.backward_eval(o).unwrap(), a);
            }
        }
    }
}
