//! The six-round simulator with 3-chain detection.
//!
//! Round inputs use the letters of the six-round setting: `L, R` enter the
//! network, `X, Y, Z, A, S` are the inputs of rounds 2..6 and `T` leaves it,
//! so `X = L ^ F1(R)`, ..., `T = A ^ F6(S)` and the permutation maps `L||R`
//! to `S||T`. Position `i` in a completion holds the input of round `i`,
//! with `L` at position 0 and `T` at position 7.

use indexmap::{IndexMap, IndexSet};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{AbortLocation, Halt};
use crate::ideal::{Dir, RandTableF, Urp};
use crate::oracle::Oracle;
use crate::transcript::{Completion, Event, Party, Sign, Transcript};
use crate::word::{Pair, Width, Word};

/// A detected chain member `(y, z, virtual)`.
pub type Member = (Word, Word, bool);

/// Completed tuple `(R, X, Y, Z, A, S)`, i.e. the inputs of rounds 1..6.
pub type Tuple = [Word; 6];

#[derive(Clone, Copy, Debug)]
pub struct Sim6Config {
    /// Abort once some history holds more than this many entries.
    pub hmax: usize,
    /// Abort once the simulator has made more permutation queries than this.
    pub budget: u64,
    /// Skip triples that lie in an already completed tuple.
    pub guard: bool,
    /// Iterate chain sets and new values in a seeded random order.
    pub order_seed: Option<u64>,
}

impl Sim6Config {
    /// Defaults for a distinguisher making `q` queries.
    pub fn for_queries(q: usize) -> Self {
        Sim6Config {
            hmax: 1000 * q.max(1),
            budget: 1 << 20,
            guard: true,
            order_seed: None,
        }
    }
}

/// Row of the completion table for a detected chain `(x, y, z)` found from a
/// query to round `k` in direction `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Row {
    pub pos_y: usize,
    pub pos_z: usize,
    /// Round sampled in addition before the permutation call.
    pub extra: u8,
    /// `true`: evaluate the permutation forward from `L||R`;
    /// `false`: backward from `S||T`.
    pub forward: bool,
    /// Adapted rounds are `j` and `j + 1`.
    pub adapt: u8,
}

/// The completion table.
pub fn row(sign: Sign, k: u8) -> Option<Row> {
    let r = |pos_y, pos_z, extra, forward, adapt| {
        Some(Row {
            pos_y,
            pos_z,
            extra,
            forward,
            adapt,
        })
    };
    match (k, sign) {
        (1, Sign::Minus) => r(6, 5, 4, false, 2),
        (2, Sign::Plus) => r(3, 4, 1, true, 5),
        (2, Sign::Minus) => r(1, 6, 3, true, 4),
        (3, Sign::Plus) => r(4, 5, 6, false, 1),
        (4, Sign::Minus) => r(3, 2, 1, true, 5),
        (5, Sign::Plus) => r(6, 1, 4, false, 2),
        (5, Sign::Minus) => r(4, 3, 6, false, 1),
        (6, Sign::Plus) => r(1, 2, 3, true, 4),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sim6Counters {
    /// Distinguisher queries of every kind.
    pub queries: u64,
    pub dist_perm_queries: u64,
    pub sim_perm_queries: u64,
    pub samples: u64,
    pub completions: u64,
    pub chain_queries: u64,
    pub xor_query_hits: u64,
}

type Flow<T> = Result<T, AbortLocation>;

/// The six-round simulator and the permutation it answers for.
pub struct Sim6 {
    width: Width,
    cfg: Sim6Config,
    f: Vec<IndexMap<Word, Word>>,
    rand: RandTableF,
    urp: Urp,
    tuples: Vec<Tuple>,
    log: Transcript,
    counters: Sim6Counters,
    aborted: Option<AbortLocation>,
    order: Option<ChaCha8Rng>,
}

impl Sim6 {
    pub fn new(width: Width, rand: RandTableF, urp: Urp, cfg: Sim6Config, log: Transcript) -> Self {
        Sim6 {
            width,
            cfg,
            f: vec![IndexMap::new(); 7],
            rand,
            urp,
            tuples: Vec::new(),
            log,
            counters: Sim6Counters::default(),
            aborted: None,
            order: cfg.order_seed.map(ChaCha8Rng::seed_from_u64),
        }
    }

    pub fn width(&self) -> Width {
        self.width
    }

    pub fn history(&self, k: u8) -> &IndexMap<Word, Word> {
        &self.f[k as usize]
    }

    pub fn get(&self, k: u8, x: Word) -> Option<Word> {
        self.f[k as usize].get(&x).copied()
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn urp(&self) -> &Urp {
        &self.urp
    }

    pub fn counters(&self) -> Sim6Counters {
        self.counters
    }

    pub fn transcript(&self) -> &Transcript {
        &self.log
    }

    pub fn aborted(&self) -> Option<&AbortLocation> {
        self.aborted.as_ref()
    }

    /// Public round query.
    pub fn query(&mut self, x: Word, k: u8) -> Result<Word, AbortLocation> {
        assert!((1..=6).contains(&k), "round index {k} out of range");
        if let Some(a) = &self.aborted {
            return Err(a.clone());
        }
        self.counters.queries += 1;
        let r = self.query_inner(x, k);
        match r {
            Ok(y) => {
                self.log.push(Event::FQuery { round: k, x, y });
                Ok(y)
            }
            Err(a) => {
                self.log.push(Event::Abort {
                    location: a.clone(),
                });
                self.aborted = Some(a.clone());
                Err(a)
            }
        }
    }

    fn query_inner(&mut self, x: Word, k: u8) -> Flow<Word> {
        if let Some(y) = self.get(k, x) {
            return Ok(y);
        }
        self.sample(k, x)?;
        self.chain_query(x, k)?;
        Ok(self.f[k as usize][&x])
    }

    /// Distinguisher permutation query, answered by the shared permutation.
    pub fn perm(&mut self, input: Pair) -> Pair {
        self.counters.queries += 1;
        self.counters.dist_perm_queries += 1;
        let out = self.urp.forward_query(input);
        self.log.push(Event::PQuery {
            by: Party::Dist,
            dir: Dir::Down,
            input,
            output: out,
        });
        out
    }

    /// Distinguisher inverse permutation query.
    pub fn perm_inv(&mut self, output: Pair) -> Pair {
        self.counters.queries += 1;
        self.counters.dist_perm_queries += 1;
        let inp = self.urp.backward_query(output);
        self.log.push(Event::PQuery {
            by: Party::Dist,
            dir: Dir::Up,
            input: output,
            output: inp,
        });
        inp
    }

    fn spend(&mut self) -> Flow<()> {
        self.counters.sim_perm_queries += 1;
        if self.counters.sim_perm_queries > self.cfg.budget {
            return Err(AbortLocation::Budget);
        }
        Ok(())
    }

    fn fwd(&mut self, l: Word, r: Word) -> Flow<Pair> {
        self.spend()?;
        let out = self.urp.forward_query((l, r));
        self.log.push(Event::PQuery {
            by: Party::Sim,
            dir: Dir::Down,
            input: (l, r),
            output: out,
        });
        Ok(out)
    }

    fn bwd(&mut self, s: Word, t: Word) -> Flow<Pair> {
        self.spend()?;
        let inp = self.urp.backward_query((s, t));
        self.log.push(Event::PQuery {
            by: Party::Sim,
            dir: Dir::Up,
            input: (s, t),
            output: inp,
        });
        Ok(inp)
    }

    fn set(&mut self, k: u8, x: Word, y: Word) -> Flow<()> {
        self.f[k as usize].insert(x, y);
        if self.f[k as usize].len() > self.cfg.hmax {
            return Err(AbortLocation::HistoryCap { round: k });
        }
        Ok(())
    }

    fn sample(&mut self, k: u8, x: Word) -> Flow<Word> {
        let y = self
            .rand
            .draw(k, x)
            .expect("seeded round table never faults");
        self.counters.samples += 1;
        self.log.push(Event::Sample { round: k, x, y });
        self.set(k, x, y)?;
        Ok(y)
    }

    fn keys(&self, k: u8) -> Vec<Word> {
        self.f[k as usize].keys().copied().collect()
    }

    fn val(&self, k: u8, x: Word) -> Word {
        self.f[k as usize][&x]
    }

    fn has(&self, k: u8, x: Word) -> bool {
        self.f[k as usize].contains_key(&x)
    }

    fn shuffle<T>(&mut self, v: &mut [T]) {
        if let Some(rng) = self.order.as_mut() {
            v.shuffle(rng);
        }
    }

    /// `F6*(x)`: `F6` plus the `S` values reached from `F1 x (F2 \ {x})`.
    fn f6_star(&mut self, x: Word) -> Flow<IndexSet<Word>> {
        let mut out: IndexSet<Word> = self.keys(6).into_iter().collect();
        for r in self.keys(1) {
            for x2 in self.keys(2) {
                if x2 == x {
                    continue;
                }
                let l = x2 ^ self.val(1, r);
                out.insert(self.fwd(l, r)?.0);
            }
        }
        Ok(out)
    }

    /// `F1*(x)`: `F1` plus the `R` values reached from `F6 x (F5 \ {x})`.
    fn f1_star(&mut self, x: Word) -> Flow<IndexSet<Word>> {
        let mut out: IndexSet<Word> = self.keys(1).into_iter().collect();
        for s in self.keys(6) {
            for a in self.keys(5) {
                if a == x {
                    continue;
                }
                let t = a ^ self.val(6, s);
                out.insert(self.bwd(s, t)?.1);
            }
        }
        Ok(out)
    }

    /// The chain set for a query `x` to round `k` in direction `sign`.
    pub fn chain_set(&mut self, sign: Sign, x: Word, k: u8) -> Result<Vec<Member>, AbortLocation> {
        let mut out = Vec::new();
        match (k, sign) {
            (1, Sign::Minus) => {
                for s in self.keys(6) {
                    for a in self.keys(5) {
                        let t = a ^ self.val(6, s);
                        if self.bwd(s, t)?.1 == x {
                            out.push((s, a, false));
                        }
                    }
                }
            }
            (2, Sign::Plus) => {
                for y in self.keys(3) {
                    for z in self.keys(4) {
                        if self.val(3, y) ^ z == x {
                            out.push((y, z, false));
                        }
                    }
                }
            }
            (2, Sign::Minus) => {
                let star = self.f6_star(x)?;
                for r in self.keys(1) {
                    let l = x ^ self.val(1, r);
                    let s = self.fwd(l, r)?.0;
                    if self.has(6, s) {
                        out.push((r, s, false));
                    } else if star.contains(&s) {
                        out.push((r, s, true));
                    }
                }
            }
            (3, Sign::Plus) => {
                for z in self.keys(4) {
                    for a in self.keys(5) {
                        if self.val(4, z) ^ a == x {
                            out.push((z, a, false));
                        }
                    }
                }
            }
            (4, Sign::Minus) => {
                for y in self.keys(3) {
                    for x2 in self.keys(2) {
                        if self.val(3, y) ^ x2 == x {
                            out.push((y, x2, false));
                        }
                    }
                }
            }
            (5, Sign::Plus) => {
                let star = self.f1_star(x)?;
                for s in self.keys(6) {
                    let t = x ^ self.val(6, s);
                    let r = self.bwd(s, t)?.1;
                    if self.has(1, r) {
                        out.push((s, r, false));
                    } else if star.contains(&r) {
                        out.push((s, r, true));
                    }
                }
            }
            (5, Sign::Minus) => {
                for z in self.keys(4) {
                    for y in self.keys(3) {
                        if self.val(4, z) ^ y == x {
                            out.push((z, y, false));
                        }
                    }
                }
            }
            (6, Sign::Plus) => {
                for r in self.keys(1) {
                    for x2 in self.keys(2) {
                        let l = x2 ^ self.val(1, r);
                        if self.fwd(l, r)?.0 == x {
                            out.push((r, x2, false));
                        }
                    }
                }
            }
            _ => {}
        }
        self.shuffle(&mut out);
        self.log.push_with(|| Event::Chains {
            sign,
            k,
            x,
            members: out.clone(),
        });
        Ok(out)
    }

    /// Handles a freshly defined `F_k(x)`: extra queries, chain completion,
    /// then recursion over everything the completions defined.
    pub fn chain_query(&mut self, x: Word, k: u8) -> Flow<()> {
        self.counters.chain_queries += 1;
        self.log.push(Event::ChainQuery { x, k });
        if [1, 2, 5, 6].contains(&k) {
            self.xor_query_1(x, k)?;
        }
        if [1, 3, 4, 6].contains(&k) {
            self.xor_query_2(x, k)?;
        }
        if [3, 4].contains(&k) {
            self.xor_query_3(x, k)?;
        }
        let mut u: IndexSet<(Word, u8)> = IndexSet::new();
        if [2, 3, 5, 6].contains(&k) {
            for (y, z, virt) in self.chain_set(Sign::Plus, x, k)? {
                u.extend(self.complete_chain(Sign::Plus, x, y, z, k, virt)?);
            }
        }
        if [1, 2, 4, 5].contains(&k) {
            for (y, z, virt) in self.chain_set(Sign::Minus, x, k)? {
                u.extend(self.complete_chain(Sign::Minus, x, y, z, k, virt)?);
            }
        }
        let mut u: Vec<(Word, u8)> = u.into_iter().collect();
        self.shuffle(&mut u);
        for (x2, k2) in u {
            self.chain_query(x2, k2)?;
        }
        Ok(())
    }

    /// Whether `(x, y, z)` at positions `(k, pos_y, pos_z)` lies in a
    /// completed tuple.
    pub fn in_completed(
        &self,
        k: u8,
        x: Word,
        pos_y: usize,
        y: Word,
        pos_z: usize,
        z: Word,
    ) -> bool {
        let k = k as usize;
        self.tuples
            .iter()
            .any(|t| t[k - 1] == x && t[pos_y - 1] == y && t[pos_z - 1] == z)
    }

    /// Completes the chain `(x, y, z)` consistently with the permutation and
    /// returns the newly defined `(value, round)` pairs.
    pub fn complete_chain(
        &mut self,
        sign: Sign,
        x: Word,
        y: Word,
        z: Word,
        k: u8,
        _virtual_member: bool,
    ) -> Flow<Vec<(Word, u8)>> {
        let row = row(sign, k).expect("completion requested for a direction without chains");
        if self.cfg.guard && self.in_completed(k, x, row.pos_y, y, row.pos_z, z) {
            self.log.push(Event::CompleteChain {
                sign,
                k,
                x,
                y,
                z,
                outcome: Completion::Skipped,
            });
            return Ok(Vec::new());
        }
        let mut u: Vec<(Word, u8)> = Vec::new();
        if (sign, k) == (Sign::Minus, 2) && !self.has(6, z) {
            self.sample(6, z)?;
            u.push((z, 6));
        }
        if (sign, k) == (Sign::Plus, 5) && !self.has(1, z) {
            self.sample(1, z)?;
            u.push((z, 1));
        }
        let mut xs: [Option<Word>; 8] = [None; 8];
        xs[k as usize] = Some(x);
        xs[row.pos_y] = Some(y);
        xs[row.pos_z] = Some(z);
        let j = row.adapt as usize;
        self.propagate(&mut xs, j);
        let i = row.extra as usize;
        let xi = xs[i].expect("extra round input is determined by the chain");
        if !self.has(i as u8, xi) {
            self.sample(i as u8, xi)?;
            u.push((xi, i as u8));
        }
        self.propagate(&mut xs, j);
        if row.forward {
            let (l, r) = (xs[0].expect("L known"), xs[1].expect("R known"));
            let (s, t) = self.fwd(l, r)?;
            xs[6] = Some(s);
            xs[7] = Some(t);
        } else {
            let (s, t) = (xs[6].expect("S known"), xs[7].expect("T known"));
            let (l, r) = self.bwd(s, t)?;
            xs[0] = Some(l);
            xs[1] = Some(r);
        }
        self.propagate(&mut xs, j);
        let v: [Word; 8] = xs.map(|w| w.expect("all positions known after the permutation call"));
        let (xj, xj1) = (v[j], v[j + 1]);
        if self.has(j as u8, xj) || self.has(j as u8 + 1, xj1) {
            let round = if self.has(j as u8, xj) {
                j as u8
            } else {
                j as u8 + 1
            };
            let at = if round == j as u8 { xj } else { xj1 };
            self.log.push(Event::CompleteChain {
                sign,
                k,
                x,
                y,
                z,
                outcome: Completion::Aborted,
            });
            return Err(AbortLocation::AdaptCollision { round, x: at });
        }
        let yj = v[j - 1] ^ v[j + 1];
        let yj1 = v[j] ^ v[j + 2];
        self.log.push(Event::ForceVal {
            round: j as u8,
            x: xj,
            y: yj,
        });
        self.set(j as u8, xj, yj)?;
        self.log.push(Event::ForceVal {
            round: j as u8 + 1,
            x: xj1,
            y: yj1,
        });
        self.set(j as u8 + 1, xj1, yj1)?;
        u.push((xj, j as u8));
        u.push((xj1, j as u8 + 1));
        let tuple: Tuple = [v[1], v[2], v[3], v[4], v[5], v[6]];
        self.tuples.push(tuple);
        self.counters.completions += 1;
        self.log.push(Event::CompleteChain {
            sign,
            k,
            x,
            y,
            z,
            outcome: Completion::Done(tuple),
        });
        Ok(u)
    }

    /// Fills positions reachable through defined rounds other than the
    /// adapted pair `j, j+1`.
    fn propagate(&self, xs: &mut [Option<Word>; 8], j: usize) {
        loop {
            let mut changed = false;
            for i in 1..=6usize {
                if i == j || i == j + 1 {
                    continue;
                }
                let Some(xi) = xs[i] else { continue };
                let Some(fi) = self.get(i as u8, xi) else {
                    continue;
                };
                match (xs[i - 1], xs[i + 1]) {
                    (Some(a), None) => {
                        xs[i + 1] = Some(a ^ fi);
                        changed = true;
                    }
                    (None, Some(b)) => {
                        xs[i - 1] = Some(b ^ fi);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn xor_hit(&mut self, which: u8, x: Word, k: u8, target: Word, round: u8) -> Flow<()> {
        self.counters.xor_query_hits += 1;
        self.log.push(Event::XorQuery {
            which,
            x,
            k,
            hits: vec![target],
        });
        self.sample(round, target)?;
        self.chain_query(target, round)
    }

    /// Extra `F5`/`F2` queries that keep later 3-chains away from values
    /// already defined.
    pub fn xor_query_1(&mut self, x: Word, k: u8) -> Flow<()> {
        if k == 5 || k == 1 {
            let mut cands: IndexSet<Word> = IndexSet::new();
            let f1 = self.keys(1);
            if k == 5 {
                for &r1 in &f1 {
                    for &r2 in &f1 {
                        if r1 != r2 && !self.has(5, x ^ r1 ^ r2) {
                            cands.insert(x ^ r1 ^ r2);
                        }
                    }
                }
            } else {
                for a in self.keys(5) {
                    for &r2 in &f1 {
                        if !self.has(5, a ^ x ^ r2) {
                            cands.insert(a ^ x ^ r2);
                        }
                    }
                }
            }
            for a2 in cands {
                if self.has(5, a2) {
                    continue;
                }
                let mut hit = false;
                'search: for s in self.keys(6) {
                    let t = self.val(6, s) ^ a2;
                    let r = self.bwd(s, t)?.1;
                    if self.has(1, r) {
                        hit = true;
                        break 'search;
                    }
                }
                if hit {
                    self.xor_hit(1, x, k, a2, 5)?;
                }
            }
        }
        if k == 2 || k == 6 {
            let mut cands: IndexSet<Word> = IndexSet::new();
            let f6 = self.keys(6);
            if k == 2 {
                for &s1 in &f6 {
                    for &s2 in &f6 {
                        if s1 != s2 && !self.has(2, x ^ s1 ^ s2) {
                            cands.insert(x ^ s1 ^ s2);
                        }
                    }
                }
            } else {
                for x2 in self.keys(2) {
                    for &s2 in &f6 {
                        if !self.has(2, x2 ^ x ^ s2) {
                            cands.insert(x2 ^ x ^ s2);
                        }
                    }
                }
            }
            for x2 in cands {
                if self.has(2, x2) {
                    continue;
                }
                let mut hit = false;
                'search: for r in self.keys(1) {
                    let l = self.val(1, r) ^ x2;
                    let s = self.fwd(l, r)?.0;
                    if self.has(6, s) {
                        hit = true;
                        break 'search;
                    }
                }
                if hit {
                    self.xor_hit(1, x, k, x2, 2)?;
                }
            }
        }
        Ok(())
    }

    /// Extra `F1`/`F6` queries for chains that end just outside the history.
    pub fn xor_query_2(&mut self, x: Word, k: u8) -> Flow<()> {
        // (L, R, Z) over A in F5, S in F6 with R outside F1.
        let mut m1: Vec<(Word, Word, Word)> = Vec::new();
        for a in self.keys(5) {
            for s in self.keys(6) {
                let (l, r) = self.bwd(s, a ^ self.val(6, s))?;
                if !self.has(1, r) {
                    m1.push((l, r, self.val(5, a) ^ s));
                }
            }
        }
        for (l, r, z) in m1 {
            if self.has(1, r) {
                continue;
            }
            let mut fire = false;
            if k == 6 {
                for z2 in self.keys(4) {
                    if z2 != z && self.fwd(l ^ z ^ z2, r)?.0 == x {
                        fire = true;
                        break;
                    }
                }
            } else if k == 3 {
                let s2 = self.fwd(l ^ x ^ z, r)?.0;
                fire = self.has(6, s2);
            }
            if fire {
                self.xor_hit(2, x, k, r, 1)?;
            }
        }
        // (S, T, Y) over R in F1, X in F2 with S outside F6.
        let mut m2: Vec<(Word, Word, Word)> = Vec::new();
        for r in self.keys(1) {
            for x2 in self.keys(2) {
                let (s, t) = self.fwd(x2 ^ self.val(1, r), r)?;
                if !self.has(6, s) {
                    m2.push((s, t, self.val(2, x2) ^ r));
                }
            }
        }
        for (s, t, y) in m2 {
            if self.has(6, s) {
                continue;
            }
            let mut fire = false;
            if k == 1 {
                for y2 in self.keys(3) {
                    if y2 != y && self.bwd(s, t ^ y ^ y2)?.1 == x {
                        fire = true;
                        break;
                    }
                }
            } else if k == 4 {
                let r2 = self.bwd(s, t ^ x ^ y)?.1;
                fire = self.has(1, r2);
            }
            if fire {
                self.xor_hit(2, x, k, s, 6)?;
            }
        }
        Ok(())
    }

    /// Extra `F3`/`F4` queries where two chains meet at an undefined middle
    /// value.
    pub fn xor_query_3(&mut self, x: Word, k: u8) -> Flow<()> {
        // For each undefined Y: the R values of chains (Z, A, S) with
        // A = F4(Z) ^ Y and Z = F5(A) ^ S.
        let mut by_y: IndexMap<Word, Vec<Word>> = IndexMap::new();
        for s in self.keys(6) {
            for a in self.keys(5) {
                let z = self.val(5, a) ^ s;
                if !self.has(4, z) {
                    continue;
                }
                let y = self.val(4, z) ^ a;
                if self.has(3, y) {
                    continue;
                }
                let r = self.bwd(s, a ^ self.val(6, s))?.1;
                by_y.entry(y).or_default().push(r);
            }
        }
        let mut by_z: IndexMap<Word, Vec<Word>> = IndexMap::new();
        for r in self.keys(1) {
            for x2 in self.keys(2) {
                let y = self.val(2, x2) ^ r;
                if !self.has(3, y) {
                    continue;
                }
                let z = self.val(3, y) ^ x2;
                if self.has(4, z) {
                    continue;
                }
                let s = self.fwd(self.val(1, r) ^ x2, r)?.0;
                by_z.entry(z).or_default().push(s);
            }
        }
        if k == 3 {
            let hits: Vec<Word> = by_y
                .iter()
                .filter(|(&y, rs)| rs.iter().any(|&r1| rs.iter().any(|&r2| y == x ^ r1 ^ r2)))
                .map(|(&y, _)| y)
                .collect();
            for y in hits {
                if !self.has(3, y) {
                    self.xor_hit(3, x, k, y, 3)?;
                }
            }
        }
        if k == 4 {
            let hits: Vec<Word> = by_z
                .iter()
                .filter(|(&z, ss)| ss.iter().any(|&s1| ss.iter().any(|&s2| z == x ^ s1 ^ s2)))
                .map(|(&z, _)| z)
                .collect();
            for z in hits {
                if !self.has(4, z) {
                    self.xor_hit(3, x, k, z, 4)?;
                }
            }
        }
        Ok(())
    }
}

impl Oracle for Sim6 {
    fn f(&mut self, round: u8, x: Word) -> Result<Word, Halt> {
        Ok(self.query(x, round)?)
    }

    fn p(&mut self, input: Pair) -> Result<Pair, Halt> {
        if let Some(a) = &self.aborted {
            return Err(a.clone().into());
        }
        Ok(self.perm(input))
    }

    fn pinv(&mut self, output: Pair) -> Result<Pair, Halt> {
        if let Some(a) = &self.aborted {
            return Err(a.clone().into());
        }
        Ok(self.perm_inv(output))
    }

    fn rounds(&self) -> u8 {
        6
    }

    fn width(&self) -> Width {
        self.width
    }

    fn queries(&self) -> u64 {
        self.counters.queries
    }
}
