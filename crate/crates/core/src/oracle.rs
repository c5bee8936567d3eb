//! The interface a distinguisher talks to.

use crate::error::Halt;
use crate::ideal::Dir;
use crate::ideal::{Backend, Psi, RoundSource};
use crate::transcript::{Event, Party, Transcript};
use crate::word::{Pair, Width, Word};

/// Round-function and permutation queries as seen by a distinguisher.
/// `Err` ends the interaction; the distinguisher then outputs 0.
pub trait Oracle {
    fn f(&mut self, round: u8, x: Word) -> Result<Word, Halt>;
    fn p(&mut self, input: Pair) -> Result<Pair, Halt>;
    fn pinv(&mut self, output: Pair) -> Result<Pair, Halt>;
    /// Number of rounds the oracle expects queries for.
    fn rounds(&self) -> u8;
    fn width(&self) -> Width;
    /// Distinguisher queries answered so far.
    fn queries(&self) -> u64;
}

/// The real world: a Feistel construction whose round functions the
/// distinguisher reads directly.
pub struct Direct<S> {
    psi: Psi<S>,
    log: Transcript,
    queries: u64,
}

impl<S: RoundSource> Direct<S> {
    pub fn new(psi: Psi<S>, log: Transcript) -> Self {
        Direct {
            psi,
            log,
            queries: 0,
        }
    }

    pub fn transcript(&self) -> &Transcript {
        &self.log
    }

    pub fn into_parts(self) -> (Psi<S>, Transcript) {
        (self.psi, self.log)
    }
}

impl<S: RoundSource> Oracle for Direct<S> {
    fn f(&mut self, round: u8, x: Word) -> Result<Word, Halt> {
        self.queries += 1;
        let y = self.psi.round(round, x)?;
        self.log.push(Event::FQuery { round, x, y });
        Ok(y)
    }

    fn p(&mut self, input: Pair) -> Result<Pair, Halt> {
        self.queries += 1;
        let output = self.psi.forward(input, &mut self.log)?;
        self.log.push(Event::PQuery {
            by: Party::Dist,
            dir: Dir::Down,
            input,
            output,
        });
        Ok(output)
    }

    fn pinv(&mut self, output: Pair) -> Result<Pair, Halt> {
        self.queries += 1;
        let input = self.psi.backward(output, &mut self.log)?;
        self.log.push(Event::PQuery {
            by: Party::Dist,
            dir: Dir::Up,
            input: output,
            output: input,
        });
        Ok(input)
    }

    fn rounds(&self) -> u8 {
        self.psi.rounds()
    }

    fn width(&self) -> Width {
        self.log.width()
    }

    fn queries(&self) -> u64 {
        self.queries
    }
}
