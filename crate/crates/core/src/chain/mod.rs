//! Partial chains over the 14-round tables.
//!
//! A partial chain `(x_k, x_{k+1}, k)` with `k` in 0..=14 names a position in
//! a Feistel evaluation. `next`/`prev` step through the round tables and wrap
//! through the permutation table between positions 14 and 0.

mod monitor;
mod tau;

use std::collections::{HashMap, HashSet, VecDeque};

pub use monitor::{monitor, BadEvent, BadKind, MonitorConfig, MonitorReport, Replay};
pub use tau::{replay_with_h, tau, TauRun};

use crate::ideal::{Backend, Dir, PermTable, RoundSource};
use crate::sim14::Sim14;
use crate::transcript::Sign;
use crate::word::{Pair, Word};

/// `(x_k, x_{k+1}, k)`.
pub type Chain = (Word, Word, u8);

/// Read access to round tables `G_1..G_14` and the permutation table.
pub trait Tables {
    fn g(&self, k: u8, x: Word) -> Option<Word>;
    fn p(&self, dir: Dir, key: Pair) -> Option<Pair>;
    /// Number of permutation-table entries, used for search caps.
    fn p_size(&self) -> usize;
}

impl<B: Backend, R: RoundSource> Tables for Sim14<B, R> {
    fn g(&self, k: u8, x: Word) -> Option<Word> {
        self.get(k, x)
    }
    fn p(&self, dir: Dir, key: Pair) -> Option<Pair> {
        self.perm_table().get(dir, key)
    }
    fn p_size(&self) -> usize {
        let t = self.perm_table();
        t.down.len() + t.up.len()
    }
}

/// Owned copy of the tables of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Snapshot {
    pub g: Vec<HashMap<Word, Word>>,
    pub p: PermTable,
}

impl Snapshot {
    pub fn new() -> Self {
        Snapshot {
            g: vec![HashMap::new(); 15],
            p: PermTable::default(),
        }
    }

    pub fn of<B: Backend, R: RoundSource>(sim: &Sim14<B, R>) -> Self {
        let mut s = Snapshot::new();
        for i in 1..=14u8 {
            s.g[i as usize] = sim.table(i).iter().map(|(&a, &b)| (a, b)).collect();
        }
        s.p = sim.perm_table().clone();
        s
    }

    /// Every table-defined chain.
    pub fn table_defined_chains(&self) -> Vec<Chain> {
        let mut out = Vec::new();
        for k in 1..=13u8 {
            for &a in self.g[k as usize].keys() {
                for &b in self.g[k as usize + 1].keys() {
                    out.push((a, b, k));
                }
            }
        }
        for &(a, b) in self.p.down.keys() {
            if table_defined(self, (a, b, 0)) {
                out.push((a, b, 0));
            }
        }
        for &(a, b) in self.p.up.keys() {
            if table_defined(self, (a, b, 14)) {
                out.push((a, b, 14));
            }
        }
        out.sort();
        out
    }
}

impl Tables for Snapshot {
    fn g(&self, k: u8, x: Word) -> Option<Word> {
        self.g[k as usize].get(&x).copied()
    }
    fn p(&self, dir: Dir, key: Pair) -> Option<Pair> {
        self.p.get(dir, key)
    }
    fn p_size(&self) -> usize {
        self.p.down.len() + self.p.up.len()
    }
}

/// One step forward; `None` for the undefined chain.
pub fn next<T: Tables + ?Sized>(t: &T, c: Chain) -> Option<Chain> {
    let (a, b, k) = c;
    if k < 14 {
        let y = t.g(k + 1, b)?;
        Some((b, a ^ y, k + 1))
    } else {
        let (x0, x1) = t.p(Dir::Up, (a, b))?;
        Some((x0, x1, 0))
    }
}

/// One step backward; `None` for the undefined chain.
pub fn prev<T: Tables + ?Sized>(t: &T, c: Chain) -> Option<Chain> {
    let (a, b, k) = c;
    if k > 0 {
        let y = t.g(k, a)?;
        Some((b ^ y, a, k - 1))
    } else {
        let (x14, x15) = t.p(Dir::Down, (a, b))?;
        Some((x14, x15, 14))
    }
}

/// Both neighbours are defined.
pub fn table_defined<T: Tables + ?Sized>(t: &T, c: Chain) -> bool {
    next(t, c).is_some() && prev(t, c).is_some()
}

/// Search cap for walks and equivalence searches.
pub fn cycle_cap(p_size: usize) -> usize {
    15 * (p_size + 1) + 15
}

/// A bounded search gave up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleWarning {
    pub from: Chain,
}

/// Values `val^sigma_0..val^sigma_15` of a chain, `None` where undefined.
pub type ValRow = [Option<Word>; 16];

/// All sixteen values of `c` in direction `sign`, from one walk that records
/// the first chain covering each position.
pub fn val_row<T: Tables + ?Sized>(t: &T, sign: Sign, c: Chain) -> ValRow {
    let mut row = [None; 16];
    let mut cur = Some(c);
    let mut filled = 0;
    let cap = 15;
    let mut steps = 0;
    while let Some((a, b, k)) = cur {
        for (i, v) in [(k as usize, a), (k as usize + 1, b)] {
            if row[i].is_none() {
                row[i] = Some(v);
                filled += 1;
            }
        }
        if filled == 16 || steps == cap {
            break;
        }
        cur = match sign {
            Sign::Plus => next(t, (a, b, k)),
            Sign::Minus => prev(t, (a, b, k)),
        };
        steps += 1;
    }
    row
}

fn walk_to<T: Tables + ?Sized>(
    t: &T,
    i: u8,
    c: Chain,
    step: impl Fn(&T, Chain) -> Option<Chain>,
) -> Option<Word> {
    assert!(i <= 15, "value index {i} out of range");
    let cap = cycle_cap(t.p_size());
    let mut cur = c;
    for _ in 0..=cap {
        let (a, b, k) = cur;
        if k == i {
            return Some(a);
        }
        if i >= 1 && k == i - 1 {
            return Some(b);
        }
        cur = step(t, cur)?;
    }
    None
}

/// `val^+_i(C)`: walk forward until position `i-1` or `i`.
pub fn val_plus<T: Tables + ?Sized>(t: &T, i: u8, c: Chain) -> Option<Word> {
    walk_to(t, i, c, |t, c| next(t, c))
}

/// `val^-_i(C)`: walk backward until position `i-1` or `i`.
pub fn val_minus<T: Tables + ?Sized>(t: &T, i: u8, c: Chain) -> Option<Word> {
    walk_to(t, i, c, |t, c| prev(t, c))
}

/// `val_i(C)`: the forward value if defined, else the backward value.
pub fn val<T: Tables + ?Sized>(t: &T, i: u8, c: Chain) -> Option<Word> {
    val_plus(t, i, c).or_else(|| val_minus(t, i, c))
}

/// Every chain reachable from `c` by `next`/`prev` steps, or a warning if
/// the search exceeds the cap.
pub fn reachable<T: Tables + ?Sized>(t: &T, c: Chain) -> Result<HashSet<Chain>, CycleWarning> {
    let cap = cycle_cap(t.p_size());
    let mut seen = HashSet::from([c]);
    let mut todo = VecDeque::from([c]);
    while let Some(cur) = todo.pop_front() {
        for n in [next(t, cur), prev(t, cur)].into_iter().flatten() {
            if seen.insert(n) {
                if seen.len() > cap {
                    return Err(CycleWarning { from: c });
                }
                todo.push_back(n);
            }
        }
    }
    Ok(seen)
}

/// `D` can be obtained from `C` by finitely many `next`/`prev` steps. A
/// search that hits the cap counts as not equivalent.
pub fn equivalent<T: Tables + ?Sized>(t: &T, c: Chain, d: Chain) -> bool {
    c == d || reachable(t, c).map(|s| s.contains(&d)).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap() -> Snapshot {
        let mut s = Snapshot::new();
        s.g[1].insert(Word(1), Word(3));
        s.g[2].insert(Word(2), Word(5));
        s
    }

    #[test]
    fn steps_and_guards() {
        let s = snap();
        assert_eq!(next(&s, (Word(0), Word(1), 0)), Some((Word(1), Word(3), 1)));
        assert_eq!(next(&s, (Word(0), Word(9), 0)), None);
        assert_eq!(prev(&s, (Word(1), Word(3), 1)), Some((Word(0), Word(1), 0)));
        assert_eq!(prev(&s, (Word(0), Word(1), 0)), None);
        assert_eq!(
            next(&s, (Word(1), Word(2), 1)),
            Some((Word(2), Word(1) ^ Word(5), 2))
        );
    }

    #[test]
    fn wraps_through_permutation() {
        let mut s = snap();
        s.p.up.insert((Word(7), Word(8)), (Word(4), Word(6)));
        s.p.down.insert((Word(4), Word(6)), (Word(7), Word(8)));
        assert_eq!(
            next(&s, (Word(7), Word(8), 14)),
            Some((Word(4), Word(6), 0))
        );
        assert_eq!(
            prev(&s, (Word(4), Word(6), 0)),
            Some((Word(7), Word(8), 14))
        );
    }

    #[test]
    fn values() {
        let s = snap();
        let c = (Word(1), Word(2), 1);
        assert_eq!(val_plus(&s, 1, c), Some(Word(1)));
        assert_eq!(val_plus(&s, 2, c), Some(Word(2)));
        assert_eq!(val_plus(&s, 3, c), Some(Word(1) ^ Word(5)));
        assert_eq!(val_plus(&s, 4, c), None);
        assert_eq!(val_minus(&s, 0, c), Some(Word(2) ^ Word(3)));
        assert_eq!(val(&s, 0, c), Some(Word(2) ^ Word(3)));
        let row = val_row(&s, Sign::Plus, c);
        for i in 0..16u8 {
            assert_eq!(row[i as usize], val_plus(&s, i, c), "index {i}");
        }
        let row = val_row(&s, Sign::Minus, c);
        for i in 0..16u8 {
            assert_eq!(row[i as usize], val_minus(&s, i, c), "index {i}");
        }
    }

    #[test]
    fn equivalence_basics() {
        let s = snap();
        let c = (Word(1), Word(2), 1);
        assert!(equivalent(&s, c, c));
        let n = next(&s, c).unwrap();
        assert!(equivalent(&s, c, n));
        assert!(equivalent(&s, n, c));
        assert!(!equivalent(&s, c, (Word(9), Word(9), 4)));
    }
}
