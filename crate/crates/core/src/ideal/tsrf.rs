//! Two-sided random function with explicit randomness `p`.

use super::{Backend, Dir, PermTable, RandTableP};
use crate::error::Fault;
use crate::transcript::{Event, Transcript};
use crate::word::Pair;

/// Answers fresh forward and backward queries from `p`, installing both
/// directional entries. The entry in the opposite direction may be
/// overwritten, leaving the displaced entry dangling.
#[derive(Clone, Debug)]
pub struct Tsrf {
    p: RandTableP,
    table: PermTable,
    reads: usize,
    overwrites: usize,
}

impl Tsrf {
    pub fn new(p: RandTableP) -> Self {
        Tsrf {
            p,
            table: PermTable::default(),
            reads: 0,
            overwrites: 0,
        }
    }

    fn read(&mut self, dir: Dir, key: Pair, log: &mut Transcript) -> Result<Pair, Fault> {
        let value = self.p.draw(dir, key)?;
        self.reads += 1;
        self.table.set(dir, key, value);
        let displaced = self
            .table
            .set(dir.flip(), value, key)
            .filter(|&old| old != key);
        if displaced.is_some() {
            self.overwrites += 1;
        }
        log.push(Event::PRead {
            dir,
            input: key,
            output: value,
            displaced,
        });
        Ok(value)
    }

    /// Number of installs that replaced an entry pointing elsewhere.
    pub fn overwrites(&self) -> usize {
        self.overwrites
    }

    pub fn randomness(&self) -> &RandTableP {
        &self.p
    }
}

impl Backend for Tsrf {
    fn forward(&mut self, input: Pair, log: &mut Transcript) -> Result<Pair, Fault> {
        match self.table.down.get(&input) {
            Some(&o) => Ok(o),
            None => self.read(Dir::Down, input, log),
        }
    }

    fn backward(&mut self, output: Pair, log: &mut Transcript) -> Result<Pair, Fault> {
        match self.table.up.get(&output) {
            Some(&i) => Ok(i),
            None => self.read(Dir::Up, output, log),
        }
    }

    fn check(&mut self, input: Pair, output: Pair, _log: &mut Transcript) -> Result<bool, Fault> {
        Ok(self.table.check(input, output))
    }

    fn table(&self) -> &PermTable {
        &self.table
    }

    fn p_reads(&self) -> usize {
        self.reads
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{Width, Word};

    fn pair(a: u64, b: u64) -> Pair {
        (Word(a), Word(b))
    }

    #[test]
    fn overwrite_redirects_inverse() {
        let w = Width::new(8).unwrap();
        // p(down, a') = (c, d) first, then p(down, a) = (c, d) as well.
        let p = RandTableP::explicit(
            w,
            [
                ((Dir::Down, pair(1, 1)), pair(5, 5)),
                ((Dir::Down, pair(2, 2)), pair(5, 5)),
            ],
        );
        let mut t = Tsrf::new(p);
        let mut log = Transcript::new(w, true);
        assert_eq!(t.forward(pair(1, 1), &mut log).unwrap(), pair(5, 5));
        assert_eq!(t.backward(pair(5, 5), &mut log).unwrap(), pair(1, 1));
        assert_eq!(t.forward(pair(2, 2), &mut log).unwrap(), pair(5, 5));
        assert_eq!(t.backward(pair(5, 5), &mut log).unwrap(), pair(2, 2));
        assert_eq!(t.overwrites(), 1);
        // The displaced forward entry still dangles.
        assert_eq!(t.forward(pair(1, 1), &mut log).unwrap(), pair(5, 5));
        assert_eq!(t.p_reads(), 2);
    }

    #[test]
    fn check_is_table_only() {
        let w = Width::new(8).unwrap();
        let mut t = Tsrf::new(RandTableP::seeded(w, 1));
        let mut log = Transcript::new(w, true);
        assert!(!t.check(pair(1, 2), pair(3, 4), &mut log).unwrap());
        assert!(t.table().is_empty());
        let o = t.forward(pair(1, 2), &mut log).unwrap();
        let before = t.table().clone();
        assert!(t.check(pair(1, 2), o, &mut log).unwrap());
        assert!(!t.check(pair(1, 3), o, &mut log).unwrap());
        assert_eq!(&before, t.table());
    }
}
