//! Bad-event monitor over a 14-round simulator transcript.
//!
//! The monitor replays the table mutations recorded in a transcript (samples,
//! forced values, permutation-table reads) and evaluates the three bad events
//! at the moments they are defined for:
//!
//! * `BadP` right after a read of `p`, before its entries are installed;
//! * `BadlyHit` right after a sample `G_k(x) := f(k, x)`;
//! * `BadlyCollide` right after a sample, over chains table-defined after it.
//!
//! Values `val^+`/`val^-` of every table-defined chain are kept in an index
//! keyed by `(position, value)`. A mutation at `G_k(x)` only changes the walks
//! of chains that step through `(., x, k-1)` forwards or `(x, ., k)`
//! backwards, so only those chains (found by walking the inverse step
//! relations from these junctions) are re-evaluated.

use std::collections::{HashMap, HashSet};

use serde_json::{json, Value};

use super::{
    next, prev, reachable, table_defined, val_row, Chain, CycleWarning, Snapshot, Tables, ValRow,
};
use crate::ideal::Dir;
use crate::transcript::{Event, Sign, Transcript};
use crate::word::{Pair, Width, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BadKind {
    BadP,
    BadlyHit,
    BadlyCollide,
}

impl BadKind {
    pub fn name(self) -> &'static str {
        match self {
            BadKind::BadP => "BadP",
            BadKind::BadlyHit => "BadlyHit",
            BadKind::BadlyCollide => "BadlyCollide",
        }
    }
}

/// A bad event with the transcript index of the triggering mutation and the
/// chains or values that witness it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadEvent {
    pub kind: BadKind,
    pub location: usize,
    pub chains: Vec<Chain>,
    /// For collisions: `(position, sign of first chain, sign of second)`.
    pub collision: Option<(u8, Sign, Sign)>,
    pub note: &'static str,
}

impl BadEvent {
    pub fn to_json(&self, w: Width) -> Value {
        json!({
            "kind": self.kind.name(),
            "location": self.location,
            "note": self.note,
            "chains": self.chains.iter().map(|&(a, b, k)| json!([w.hex(a), w.hex(b), k])).collect::<Vec<_>>(),
            "collision": self.collision.map(|(l, s, r)| json!({"l": l, "sigma": s.symbol(), "rho": r.symbol()})),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MonitorConfig {
    /// Evaluate `BadlyCollide` (the expensive check).
    pub collide: bool,
    /// Check that each sample changes at most one value per chain and direction.
    pub single_value: bool,
    /// Stop at the first bad event.
    pub stop_early: bool,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        MonitorConfig {
            collide: true,
            single_value: true,
            stop_early: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct MonitorReport {
    pub bad: Vec<BadEvent>,
    pub cycle_warnings: Vec<CycleWarning>,
    /// Samples after which some chain gained more than one value in a
    /// direction, or changed a defined value: `(location, chain)`.
    pub single_value_violations: Vec<(usize, Chain)>,
    pub samples: usize,
    pub p_reads: usize,
    pub forced: usize,
}

impl MonitorReport {
    pub fn good(&self) -> bool {
        self.bad.is_empty()
    }

    pub fn count(&self, kind: BadKind) -> usize {
        self.bad.iter().filter(|e| e.kind == kind).count()
    }

    pub fn to_json(&self, w: Width) -> Value {
        json!({
            "good": self.good(),
            "bad": self.bad.iter().map(|e| e.to_json(w)).collect::<Vec<_>>(),
            "cycle_warnings": self.cycle_warnings.len(),
            "single_value_violations": self.single_value_violations.len(),
        })
    }
}

/// The replay state hiding one round entry: the tables just before a sample.
struct Masked<'a> {
    s: &'a Snapshot,
    hide: (u8, Word),
}

impl Tables for Masked<'_> {
    fn g(&self, k: u8, x: Word) -> Option<Word> {
        if (k, x) == self.hide {
            None
        } else {
            self.s.g(k, x)
        }
    }
    fn p(&self, dir: Dir, key: Pair) -> Option<Pair> {
        self.s.p(dir, key)
    }
    fn p_size(&self) -> usize {
        self.s.p_size()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Vals {
    plus: ValRow,
    minus: ValRow,
}

impl Vals {
    fn of<T: Tables + ?Sized>(t: &T, c: Chain) -> Self {
        Vals {
            plus: val_row(t, Sign::Plus, c),
            minus: val_row(t, Sign::Minus, c),
        }
    }
    fn row(&self, s: Sign) -> &ValRow {
        match s {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }
}

/// Incremental replay of a transcript's table mutations.
pub struct Replay {
    state: Snapshot,
    vals: HashMap<Chain, Vals>,
    index: HashMap<(u8, Word), HashSet<(Chain, Sign)>>,
}

impl Default for Replay {
    fn default() -> Self {
        Self::new()
    }
}

/// Chains `D` with `next(D) = c`.
fn next_preimages<T: Tables + ?Sized>(t: &T, p: &crate::ideal::PermTable, c: Chain) -> Vec<Chain> {
    let (a, b, j) = c;
    if j >= 1 {
        t.g(j, a)
            .map(|y| vec![(b ^ y, a, j - 1)])
            .unwrap_or_default()
    } else {
        p.up.iter()
            .filter(|(_, &v)| v == (a, b))
            .map(|(&(x14, x15), _)| (x14, x15, 14))
            .collect()
    }
}

/// Chains `D` with `prev(D) = c`.
fn prev_preimages<T: Tables + ?Sized>(t: &T, p: &crate::ideal::PermTable, c: Chain) -> Vec<Chain> {
    let (a, b, j) = c;
    if j <= 13 {
        t.g(j + 1, b)
            .map(|y| vec![(b, a ^ y, j + 1)])
            .unwrap_or_default()
    } else {
        p.down
            .iter()
            .filter(|(_, &v)| v == (a, b))
            .map(|(&(x0, x1), _)| (x0, x1, 0))
            .collect()
    }
}

/// Junctions touched by a change of `G_k(x)`: chains whose `next` uses the
/// entry, and chains whose `prev` uses it.
fn round_junctions(s: &Snapshot, k: u8, x: Word) -> (Vec<Chain>, Vec<Chain>) {
    let fwd = if k >= 2 {
        s.g[k as usize - 1].keys().map(|&a| (a, x, k - 1)).collect()
    } else {
        let mut v: Vec<Chain> =
            s.p.down
                .keys()
                .filter(|p| p.1 == x)
                .map(|&(a, _)| (a, x, 0))
                .collect();
        v.extend(
            s.p.up
                .values()
                .filter(|p| p.1 == x)
                .map(|&(a, _)| (a, x, 0)),
        );
        v
    };
    let bwd = if k <= 13 {
        s.g[k as usize + 1].keys().map(|&b| (x, b, k)).collect()
    } else {
        let mut v: Vec<Chain> =
            s.p.up
                .keys()
                .filter(|p| p.0 == x)
                .map(|&(_, b)| (x, b, 14))
                .collect();
        v.extend(
            s.p.down
                .values()
                .filter(|p| p.0 == x)
                .map(|&(_, b)| (x, b, 14)),
        );
        v
    };
    (fwd, bwd)
}

impl Replay {
    pub fn new() -> Self {
        Replay {
            state: Snapshot::new(),
            vals: HashMap::new(),
            index: HashMap::new(),
        }
    }

    pub fn state(&self) -> &Snapshot {
        &self.state
    }

    /// Chains whose forward walk passes a `fwd` junction or whose backward
    /// walk passes a `bwd` junction, within the walk length of a value row.
    fn closure(&self, fwd: &[Chain], bwd: &[Chain]) -> HashSet<Chain> {
        let mut out: HashSet<Chain> = HashSet::new();
        for (starts, forward) in [(fwd, true), (bwd, false)] {
            let mut frontier: Vec<Chain> = starts.to_vec();
            let mut seen: HashSet<Chain> = starts.iter().copied().collect();
            for _ in 0..15 {
                let mut nextf = Vec::new();
                for &c in &frontier {
                    let pre = if forward {
                        next_preimages(&self.state, &self.state.p, c)
                    } else {
                        prev_preimages(&self.state, &self.state.p, c)
                    };
                    for d in pre {
                        if seen.insert(d) {
                            nextf.push(d);
                        }
                    }
                }
                if nextf.is_empty() {
                    break;
                }
                frontier = nextf;
            }
            out.extend(seen);
        }
        out
    }

    fn unindex(&mut self, c: Chain) {
        if let Some(v) = self.vals.remove(&c) {
            for s in [Sign::Plus, Sign::Minus] {
                for (l, w) in v.row(s).iter().enumerate() {
                    if let Some(w) = w {
                        if let Some(set) = self.index.get_mut(&(l as u8, *w)) {
                            set.remove(&(c, s));
                            if set.is_empty() {
                                self.index.remove(&(l as u8, *w));
                            }
                        }
                    }
                }
            }
        }
    }

    fn reindex(&mut self, affected: &HashSet<Chain>) {
        for &c in affected {
            self.unindex(c);
        }
        for &c in affected {
            if table_defined(&self.state, c) {
                let v = Vals::of(&self.state, c);
                for s in [Sign::Plus, Sign::Minus] {
                    for (l, w) in v.row(s).iter().enumerate() {
                        if let Some(w) = w {
                            self.index.entry((l as u8, *w)).or_default().insert((c, s));
                        }
                    }
                }
                self.vals.insert(c, v);
            }
        }
    }

    /// Applies `G_k(x) := y` and returns the chains whose walks may have
    /// changed.
    pub fn set_round(&mut self, k: u8, x: Word, y: Word) -> HashSet<Chain> {
        let old = self.state.g[k as usize].get(&x).copied();
        let mut affected = HashSet::new();
        if old.is_some() {
            if old == Some(y) {
                return affected;
            }
            let (f, b) = round_junctions(&self.state, k, x);
            affected = self.closure(&f, &b);
        }
        self.state.g[k as usize].insert(x, y);
        let (f, b) = round_junctions(&self.state, k, x);
        affected.extend(self.closure(&f, &b));
        self.reindex(&affected);
        affected
    }

    /// Installs a permutation-table read: `dir` entry `input -> output` and
    /// the opposite entry `output -> input`.
    pub fn install_p(&mut self, dir: Dir, input: Pair, output: Pair) -> HashSet<Chain> {
        let (down_key, up_key) = match dir {
            Dir::Down => (input, output),
            Dir::Up => (output, input),
        };
        // Only `next` of the up key and `prev` of the down key change; an
        // entry displaced in the opposite table keeps its own step.
        let fwd = [(up_key.0, up_key.1, 14)];
        let bwd = [(down_key.0, down_key.1, 0)];
        let mut affected = self.closure(&fwd, &bwd);
        self.state.p.set(dir, input, output);
        self.state.p.set(dir.flip(), output, input);
        affected.extend(self.closure(&fwd, &bwd));
        self.reindex(&affected);
        affected
    }

    /// Indexed values of a table-defined chain.
    pub fn values(&self, c: Chain, s: Sign) -> Option<ValRow> {
        self.vals.get(&c).map(|v| *v.row(s))
    }

    /// Table-defined chains whose `val^s_l` is `v`.
    pub fn lookup(&self, l: u8, v: Word) -> impl Iterator<Item = &(Chain, Sign)> {
        self.index.get(&(l, v)).into_iter().flatten()
    }
}

/// Replays `log` and reports bad events. The transcript must be recorded
/// against a two-sided random function so that `p` reads are logged.
pub fn monitor(log: &Transcript, cfg: MonitorConfig) -> MonitorReport {
    let mut rep = MonitorReport::default();
    let mut r = Replay::new();
    for (loc, ev) in log.events().iter().enumerate() {
        if cfg.stop_early && !rep.bad.is_empty() {
            break;
        }
        match *ev {
            Event::Sample { round, x, y } => {
                rep.samples += 1;
                let affected = r.set_round(round, x, y);
                badly_hit(&r, &mut rep, loc, round, x);
                if cfg.collide || cfg.single_value {
                    sample_checks(&r, &mut rep, loc, round, x, &affected, cfg);
                }
            }
            Event::ForceVal { round, x, y } => {
                rep.forced += 1;
                r.set_round(round, x, y);
            }
            Event::PRead {
                dir, input, output, ..
            } => {
                rep.p_reads += 1;
                let s = &r.state;
                let hit = match dir {
                    Dir::Down => s.p.contains(Dir::Up, output) || s.g[14].contains_key(&output.0),
                    Dir::Up => s.p.contains(Dir::Down, output) || s.g[1].contains_key(&output.1),
                };
                if hit {
                    let (k_in, k_out) = match dir {
                        Dir::Down => (0, 14),
                        Dir::Up => (14, 0),
                    };
                    rep.bad.push(BadEvent {
                        kind: BadKind::BadP,
                        location: loc,
                        chains: vec![(input.0, input.1, k_in), (output.0, output.1, k_out)],
                        collision: None,
                        note: match dir {
                            Dir::Down => "forward read hit an inverse entry or G14",
                            Dir::Up => "inverse read hit a forward entry or G1",
                        },
                    });
                }
                r.install_p(dir, input, output);
            }
            _ => {}
        }
    }
    rep
}

fn badly_hit(r: &Replay, rep: &mut MonitorReport, loc: usize, k: u8, x: Word) {
    let s = &r.state;
    // Chains (x, b, k) extendable twice backwards.
    let starts: Vec<Chain> = if k <= 13 {
        s.g[k as usize + 1].keys().map(|&b| (x, b, k)).collect()
    } else {
        s.p.up
            .keys()
            .filter(|p| p.0 == x)
            .map(|&(_, b)| (x, b, 14))
            .collect()
    };
    for c in starts {
        if table_defined(s, c) && prev(s, c).and_then(|d| prev(s, d)).is_some() {
            rep.bad.push(BadEvent {
                kind: BadKind::BadlyHit,
                location: loc,
                chains: vec![c],
                collision: None,
                note: "new chain extends two steps backward",
            });
        }
    }
    // Chains (a, x, k-1) extendable twice forwards.
    let ends: Vec<Chain> = if k >= 2 {
        s.g[k as usize - 1].keys().map(|&a| (a, x, k - 1)).collect()
    } else {
        s.p.down
            .keys()
            .filter(|p| p.1 == x)
            .map(|&(a, _)| (a, x, 0))
            .collect()
    };
    for c in ends {
        if table_defined(s, c) && next(s, c).and_then(|d| next(s, d)).is_some() {
            rep.bad.push(BadEvent {
                kind: BadKind::BadlyHit,
                location: loc,
                chains: vec![c],
                collision: None,
                note: "new chain extends two steps forward",
            });
        }
    }
}

fn sample_checks(
    r: &Replay,
    rep: &mut MonitorReport,
    loc: usize,
    k: u8,
    x: Word,
    affected: &HashSet<Chain>,
    cfg: MonitorConfig,
) {
    let before = Masked {
        s: &r.state,
        hide: (k, x),
    };
    let mut defined: Vec<Chain> = affected
        .iter()
        .copied()
        .filter(|&c| r.vals.contains_key(&c))
        .collect();
    defined.sort();
    let mut reach: HashMap<Chain, Option<HashSet<Chain>>> = HashMap::new();
    let mut seen_pairs: HashSet<(Chain, Chain, u8)> = HashSet::new();
    for c in defined {
        let after = r.vals[&c];
        let old = Vals::of(&before, c);
        if cfg.single_value {
            for s in [Sign::Plus, Sign::Minus] {
                let (a, b) = (old.row(s), after.row(s));
                let changed = (0..16).filter(|&i| a[i] != b[i]).count();
                let bad_change = (0..16).any(|i| a[i].is_some() && a[i] != b[i]);
                if changed > 1 || bad_change {
                    rep.single_value_violations.push((loc, c));
                    break;
                }
            }
        }
        if !cfg.collide {
            continue;
        }
        for sigma in [Sign::Plus, Sign::Minus] {
            for l in 0..16u8 {
                let li = l as usize;
                let (None, Some(v)) = (old.row(sigma)[li], after.row(sigma)[li]) else {
                    continue;
                };
                for &(d, rho) in r.lookup(l, v) {
                    if d == c {
                        continue;
                    }
                    let key = if c < d { (c, d, l) } else { (d, c, l) };
                    if seen_pairs.contains(&key) {
                        continue;
                    }
                    if equivalent_cached(&before, &mut reach, rep, c, d) {
                        continue;
                    }
                    seen_pairs.insert(key);
                    rep.bad.push(BadEvent {
                        kind: BadKind::BadlyCollide,
                        location: loc,
                        chains: vec![c, d],
                        collision: Some((l, sigma, rho)),
                        note: "values of non-equivalent chains collide",
                    });
                }
            }
        }
    }
}

/// Equivalence in either direction; a capped search counts as not
/// equivalent and is recorded as a warning.
fn equivalent_cached<T: Tables>(
    t: &T,
    cache: &mut HashMap<Chain, Option<HashSet<Chain>>>,
    rep: &mut MonitorReport,
    c: Chain,
    d: Chain,
) -> bool {
    for (a, b) in [(c, d), (d, c)] {
        let set = cache.entry(a).or_insert_with(|| match reachable(t, a) {
            Ok(s) => Some(s),
            Err(w) => {
                rep.cycle_warnings.push(w);
                None
            }
        });
        if set.as_ref().is_some_and(|s| s.contains(&b)) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> Width {
        Width::new(8).unwrap()
    }

    #[test]
    fn empty_transcript_is_good() {
        let t = Transcript::new(w(), true);
        let rep = monitor(&t, MonitorConfig::default());
        assert!(rep.good());
    }

    #[test]
    fn badly_hit_two_steps_backward() {
        // G1 = {a}, then sampling G2(x2) with value y such that
        // (x2, x3, 2) steps back to (x1, x2, 1) and on through G1.
        let mut t = Transcript::new(w(), true);
        let x1 = Word(0x11);
        let x2 = Word(0x22);
        let x3 = Word(0x33);
        t.push(Event::Sample {
            round: 1,
            x: x1,
            y: Word(0x01),
        });
        t.push(Event::Sample {
            round: 3,
            x: x3,
            y: Word(0x02),
        });
        // prev((x2, x3, 2)) = (x3 ^ G2(x2), x2, 1); pick G2(x2) = x3 ^ x1.
        t.push(Event::Sample {
            round: 2,
            x: x2,
            y: x3 ^ x1,
        });
        let rep = monitor(&t, MonitorConfig::default());
        // (x2, x3, 2) reaches G1 two steps back, and (x1, x2, 1) reaches G3
        // two steps forward: both clauses fire.
        assert_eq!(rep.count(BadKind::BadlyHit), 2);
        assert_eq!(rep.bad[0].chains, vec![(x2, x3, 2)]);
        assert_eq!(rep.bad[1].chains, vec![(x1, x2, 1)]);
        assert!(rep.bad.iter().all(|e| e.location == 2));
    }

    #[test]
    fn badp_on_g14_hit() {
        let mut t = Transcript::new(w(), true);
        t.push(Event::Sample {
            round: 14,
            x: Word(5),
            y: Word(1),
        });
        t.push(Event::PRead {
            dir: Dir::Down,
            input: (Word(1), Word(2)),
            output: (Word(5), Word(6)),
            displaced: None,
        });
        let rep = monitor(&t, MonitorConfig::default());
        assert_eq!(rep.count(BadKind::BadP), 1);
    }

    #[test]
    fn incremental_values_match_recomputation() {
        use crate::ideal::{RandTableF, RandTableP, Tsrf};
        use crate::sim14::Sim14;
        let w = Width::new(4).unwrap();
        let mut sim = Sim14::new(
            w,
            Tsrf::new(RandTableP::seeded(w, 3)),
            RandTableF::seeded(w, 4),
            Transcript::new(w, true),
        );
        for (i, x) in [
            (1u8, 1u64),
            (2, 3),
            (13, 4),
            (14, 5),
            (7, 1),
            (8, 2),
            (3, 3),
        ] {
            sim.f_query(i, Word(x)).unwrap();
        }
        sim.query_p((Word(1), Word(2))).unwrap();
        let mut r = Replay::new();
        for ev in sim.transcript().events() {
            match *ev {
                Event::Sample { round, x, y } | Event::ForceVal { round, x, y } => {
                    r.set_round(round, x, y);
                }
                Event::PRead {
                    dir, input, output, ..
                } => {
                    r.install_p(dir, input, output);
                }
                _ => {}
            }
        }
        let snap = Snapshot::of(&sim);
        assert_eq!(r.state().g, snap.g);
        let chains = snap.table_defined_chains();
        assert_eq!(chains.len(), r.vals.len());
        for c in chains {
            for s in [Sign::Plus, Sign::Minus] {
                assert_eq!(r.values(c, s), Some(val_row(&snap, s, c)), "{c:?} {s:?}");
            }
        }
    }
}
