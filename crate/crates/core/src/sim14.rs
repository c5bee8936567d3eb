//! The 14-round simulator.
//!
//! Round values are sampled lazily into tables `G_1..G_14`. Sampling at the
//! detect rounds 2, 13 (outer chains, confirmed through `Check`) and 7, 8
//! (inner chains) enqueues chains; the public query drains the queue,
//! completing each chain by evaluating towards rounds `l-2, l-1` and
//! `l+2, l+3` and forcing rounds `l, l+1` for `l` in {4, 10}.

use std::collections::{HashSet, VecDeque};

use indexmap::IndexMap;

use crate::error::{Fault, Halt};
use crate::ideal::{Backend, Dir, PermTable, RoundSource};
use crate::oracle::Oracle;
use crate::transcript::{Event, Party, Transcript};
use crate::word::{Pair, Width, Word};

/// Rounds whose fresh values trigger chain detection.
pub const DETECT_ROUNDS: [u8; 4] = [2, 7, 8, 13];

/// What `forceVal` does when the target entry already holds another value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OverwritePolicy {
    /// Overwrite and record the event.
    #[default]
    LogAndContinue,
    /// Stop the run with [`Fault::Overwrite`].
    FaultFast,
}

/// A queued chain `(x_k, x_{k+1}, k, l)`.
pub type QueuedChain = (Word, Word, u8, u8);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    /// Distinguisher queries (round function and permutation).
    pub queries: u64,
    /// Backend forward calls, by anyone.
    pub p_calls: u64,
    /// Backend inverse calls, by anyone.
    pub pinv_calls: u64,
    pub check_calls: u64,
    pub adapt_calls: u64,
    /// Dequeued `(x1, x2, 1, l)` chains that were not yet completed.
    pub outer_completions: u64,
    pub overwrites: u64,
    pub samples: u64,
    pub enqueued: u64,
    pub dequeued: u64,
}

/// The simulator wired to a backend `B` and randomness `R`.
pub struct Sim14<B, R> {
    width: Width,
    g: Vec<IndexMap<Word, Word>>,
    queue: VecDeque<QueuedChain>,
    completed: HashSet<(Word, Word, u8)>,
    backend: B,
    rand: R,
    policy: OverwritePolicy,
    log: Transcript,
    counters: Counters,
    first_forced: IndexMap<(u8, Word), Word>,
    work_cap: Option<u64>,
}

impl<B: Backend, R: RoundSource> Sim14<B, R> {
    pub fn new(width: Width, backend: B, rand: R, log: Transcript) -> Self {
        Sim14 {
            width,
            g: vec![IndexMap::new(); 15],
            queue: VecDeque::new(),
            completed: HashSet::new(),
            backend,
            rand,
            policy: OverwritePolicy::default(),
            log,
            counters: Counters::default(),
            first_forced: IndexMap::new(),
            work_cap: None,
        }
    }

    /// Faults once simulator-initiated backend calls (`P`, `P^-1`, `Check`)
    /// exceed `cap`. Only executions that already overwrote values come
    /// near a sensible cap; at small widths they can otherwise run until
    /// the permutation table covers the whole domain.
    pub fn with_work_cap(mut self, cap: u64) -> Self {
        self.work_cap = Some(cap);
        self
    }

    fn charge(&self) -> Result<(), Fault> {
        let c = &self.counters;
        let calls = c.p_calls + c.pinv_calls + c.check_calls;
        match self.work_cap {
            Some(cap) if calls > cap => Err(Fault::WorkCap { calls }),
            _ => Ok(()),
        }
    }

    pub fn with_policy(mut self, policy: OverwritePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn width(&self) -> Width {
        self.width
    }

    /// Table `G_i` in insertion order.
    pub fn table(&self, i: u8) -> &IndexMap<Word, Word> {
        &self.g[i as usize]
    }

    pub fn get(&self, i: u8, x: Word) -> Option<Word> {
        self.g[i as usize].get(&x).copied()
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn randomness(&self) -> &R {
        &self.rand
    }

    pub fn perm_table(&self) -> &PermTable {
        self.backend.table()
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn transcript(&self) -> &Transcript {
        &self.log
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    pub fn completed_chains(&self) -> &HashSet<(Word, Word, u8)> {
        &self.completed
    }

    /// First value forced at each key, in forcing order.
    pub fn first_forced(&self) -> &IndexMap<(u8, Word), Word> {
        &self.first_forced
    }

    pub fn into_parts(self) -> (B, R, Transcript) {
        (self.backend, self.rand, self.log)
    }

    /// Public round-function query: defines `G_i(x)`, then drains the queue.
    pub fn f_query(&mut self, i: u8, x: Word) -> Result<Word, Fault> {
        assert!((1..=14).contains(&i), "round index {i} out of range");
        self.counters.queries += 1;
        let r = self.f_query_inner(i, x);
        if let Err(fault) = &r {
            self.log.push(Event::Fault {
                fault: fault.clone(),
            });
        }
        r
    }

    fn f_query_inner(&mut self, i: u8, x: Word) -> Result<Word, Fault> {
        self.f_inner(i, x)?;
        while let Some((a, b, k, l)) = self.queue.pop_front() {
            self.counters.dequeued += 1;
            let skipped = self.completed.contains(&(a, b, k));
            self.log.push(Event::Dequeue {
                a,
                b,
                k,
                l,
                skipped,
            });
            if skipped {
                continue;
            }
            if k == 1 {
                self.counters.outer_completions += 1;
            }
            let (xa, xb) = self.eval_fwd(a, b, k, l - 2)?;
            let (xc, xd) = self.eval_bwd(a, b, k, l + 2)?;
            self.adapt(xa, xb, xc, xd, l)?;
            let (x1, x2) = self.eval_bwd(a, b, k, 1)?;
            let (x7, x8) = self.eval_fwd(x1, x2, 1, 7)?;
            self.completed.insert((x1, x2, 1));
            self.completed.insert((x7, x8, 7));
        }
        let y = self.g[i as usize][&x];
        self.log.push(Event::FQuery { round: i, x, y });
        Ok(y)
    }

    /// Distinguisher forward permutation query.
    pub fn query_p(&mut self, input: Pair) -> Result<Pair, Fault> {
        self.counters.queries += 1;
        self.counters.p_calls += 1;
        let output = self.backend.forward(input, &mut self.log)?;
        self.log.push(Event::PQuery {
            by: Party::Dist,
            dir: Dir::Down,
            input,
            output,
        });
        Ok(output)
    }

    /// Distinguisher inverse permutation query.
    pub fn query_pinv(&mut self, output: Pair) -> Result<Pair, Fault> {
        self.counters.queries += 1;
        self.counters.pinv_calls += 1;
        let input = self.backend.backward(output, &mut self.log)?;
        self.log.push(Event::PQuery {
            by: Party::Dist,
            dir: Dir::Up,
            input: output,
            output: input,
        });
        Ok(input)
    }

    /// Defines `G_i(x)` if absent and runs detection; never drains the queue.
    pub fn f_inner(&mut self, i: u8, x: Word) -> Result<Word, Fault> {
        if let Some(&y) = self.g[i as usize].get(&x) {
            return Ok(y);
        }
        let y = self.sample(i, x)?;
        if DETECT_ROUNDS.contains(&i) {
            self.enq_new_chains(i, x)?;
        }
        Ok(y)
    }

    fn sample(&mut self, i: u8, x: Word) -> Result<Word, Fault> {
        let y = self.width.word(self.rand.round_value(i, x)?.0);
        self.g[i as usize].insert(x, y);
        self.counters.samples += 1;
        self.log.push(Event::Sample { round: i, x, y });
        Ok(y)
    }

    fn enqueue(&mut self, a: Word, b: Word, k: u8, l: u8) {
        self.counters.enqueued += 1;
        self.queue.push_back((a, b, k, l));
        self.log.push(Event::Enqueue { a, b, k, l });
    }

    fn check(&mut self, input: Pair, output: Pair) -> Result<bool, Fault> {
        self.counters.check_calls += 1;
        self.charge()?;
        let result = self.backend.check(input, output, &mut self.log)?;
        self.log.push(Event::Check {
            input,
            output,
            result,
        });
        Ok(result)
    }

    /// Detection after a fresh value at a detect round `i`.
    pub fn enq_new_chains(&mut self, i: u8, x: Word) -> Result<(), Fault> {
        match i {
            2 | 13 => {
                let (x2s, x13s): (Vec<Word>, Vec<Word>) = if i == 2 {
                    (vec![x], self.g[13].keys().copied().collect())
                } else {
                    (self.g[2].keys().copied().collect(), vec![x])
                };
                let l = if i == 2 { 4 } else { 10 };
                let g1: Vec<(Word, Word)> = self.g[1].iter().map(|(&a, &b)| (a, b)).collect();
                let g14: Vec<(Word, Word)> = self.g[14].iter().map(|(&a, &b)| (a, b)).collect();
                for &(x1, g1x1) in &g1 {
                    for &x2 in &x2s {
                        for &x13 in &x13s {
                            for &(x14, g14x14) in &g14 {
                                if self.check((x2 ^ g1x1, x1), (x14, x13 ^ g14x14))? {
                                    self.enqueue(x1, x2, 1, l);
                                }
                            }
                        }
                    }
                }
            }
            7 => {
                let partners: Vec<Word> = self.g[8].keys().copied().collect();
                for x8 in partners {
                    self.enqueue(x, x8, 7, 4);
                }
            }
            8 => {
                let partners: Vec<Word> = self.g[7].keys().copied().collect();
                for x7 in partners {
                    self.enqueue(x7, x, 7, 10);
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Evaluates forward from position `k` to position `l`, wrapping through
    /// the inverse permutation at position 14.
    pub fn eval_fwd(&mut self, a: Word, b: Word, mut k: u8, l: u8) -> Result<Pair, Fault> {
        let (mut xk, mut xk1) = (a, b);
        while k != l {
            if k == 14 {
                self.counters.pinv_calls += 1;
                self.charge()?;
                let (x0, x1) = self.backend.backward((xk, xk1), &mut self.log)?;
                self.log.push(Event::PQuery {
                    by: Party::Sim,
                    dir: Dir::Up,
                    input: (xk, xk1),
                    output: (x0, x1),
                });
                xk = x0;
                xk1 = x1;
                k = 0;
            } else {
                let next = xk ^ self.f_inner(k + 1, xk1)?;
                xk = xk1;
                xk1 = next;
                k += 1;
            }
        }
        Ok((xk, xk1))
    }

    /// Evaluates backward from position `k` to position `l`, wrapping through
    /// the permutation at position 0.
    pub fn eval_bwd(&mut self, a: Word, b: Word, mut k: u8, l: u8) -> Result<Pair, Fault> {
        let (mut xk, mut xk1) = (a, b);
        while k != l {
            if k == 0 {
                self.counters.p_calls += 1;
                self.charge()?;
                let out = self.backend.forward((xk, xk1), &mut self.log)?;
                self.log.push(Event::PQuery {
                    by: Party::Sim,
                    dir: Dir::Down,
                    input: (xk, xk1),
                    output: out,
                });
                (xk, xk1) = out;
                k = 14;
            } else {
                let prev = xk1 ^ self.f_inner(k, xk)?;
                xk1 = xk;
                xk = prev;
                k -= 1;
            }
        }
        Ok((xk, xk1))
    }

    /// Sets rounds `l` and `l+1` so the chain through
    /// `(x_{l-2}, x_{l-1})` and `(x_{l+2}, x_{l+3})` is consistent.
    pub fn adapt(
        &mut self,
        xlm2: Word,
        xlm1: Word,
        xlp2: Word,
        xlp3: Word,
        l: u8,
    ) -> Result<(), Fault> {
        self.counters.adapt_calls += 1;
        if !self.g[(l - 1) as usize].contains_key(&xlm1) {
            self.sample(l - 1, xlm1)?;
        }
        let xl = xlm2 ^ self.g[(l - 1) as usize][&xlm1];
        if !self.g[(l + 2) as usize].contains_key(&xlp2) {
            self.sample(l + 2, xlp2)?;
        }
        let xlp1 = xlp3 ^ self.g[(l + 2) as usize][&xlp2];
        self.force_val(xl, xlp1 ^ xlm1, l)?;
        self.force_val(xlp1, xl ^ xlp2, l + 1)
    }

    /// Writes `G_l(x) := y`, recording an overwrite if `x` held another value.
    pub fn force_val(&mut self, x: Word, y: Word, l: u8) -> Result<(), Fault> {
        self.first_forced.entry((l, x)).or_insert(y);
        self.log.push(Event::ForceVal { round: l, x, y });
        if let Some(&old) = self.g[l as usize].get(&x) {
            if old != y {
                self.counters.overwrites += 1;
                self.log.push(Event::Overwrite {
                    round: l,
                    x,
                    old,
                    new: y,
                });
                if self.policy == OverwritePolicy::FaultFast {
                    return Err(Fault::Overwrite {
                        round: l,
                        x,
                        old,
                        new: y,
                    });
                }
            }
        }
        self.g[l as usize].insert(x, y);
        Ok(())
    }

    /// Largest table size over `G_1..G_14`.
    pub fn max_table(&self) -> usize {
        self.g[1..].iter().map(IndexMap::len).max().unwrap_or(0)
    }

    /// Evaluates the 14 rounds through the current tables, `None` if an
    /// entry is missing.
    pub fn evaluate(&self, input: Pair) -> Option<Pair> {
        crate::ideal::feistel_forward(14, input, |i, x| self.get(i, x).ok_or(())).ok()
    }

    /// Efficiency bounds for a run with `q` distinguisher queries; returns a
    /// description of each violated bound.
    pub fn efficiency_violations(&self, q: u64) -> Vec<String> {
        let mut out = Vec::new();
        let q2 = 6 * q * q;
        for i in 1..=14u8 {
            let n = self.g[i as usize].len() as u64;
            if n > q2 {
                out.push(format!("|G_{i}| = {n} > 6q^2 = {q2}"));
            }
        }
        let c = self.counters;
        if c.p_calls > q2 {
            out.push(format!("P calls {} > 6q^2 = {q2}", c.p_calls));
        }
        if c.pinv_calls > q2 {
            out.push(format!("P^-1 calls {} > 6q^2 = {q2}", c.pinv_calls));
        }
        let check_bound = 1296u128 * (q as u128).pow(8);
        if c.check_calls as u128 > check_bound {
            out.push(format!(
                "Check calls {} > 1296q^8 = {check_bound}",
                c.check_calls
            ));
        }
        if c.outer_completions > q {
            out.push(format!(
                "outer completions {} > q = {q}",
                c.outer_completions
            ));
        }
        out
    }
}

impl<B: Backend, R: RoundSource> Oracle for Sim14<B, R> {
    fn f(&mut self, round: u8, x: Word) -> Result<Word, Halt> {
        Ok(self.f_query(round, x)?)
    }

    fn p(&mut self, input: Pair) -> Result<Pair, Halt> {
        Ok(self.query_p(input)?)
    }

    fn pinv(&mut self, output: Pair) -> Result<Pair, Halt> {
        Ok(self.query_pinv(output)?)
    }

    fn rounds(&self) -> u8 {
        14
    }

    fn width(&self) -> Width {
        self.width
    }

    fn queries(&self) -> u64 {
        self.counters.queries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::{RandTableF, RandTableP, Tsrf};

    fn sim(width: Width, fseed: u64, pseed: u64) -> Sim14<Tsrf, RandTableF> {
        Sim14::new(
            width,
            Tsrf::new(RandTableP::seeded(width, pseed)),
            RandTableF::seeded(width, fseed),
            Transcript::new(width, true),
        )
    }

    #[test]
    fn non_detect_round_leaves_queue_empty() {
        let w = Width::new(8).unwrap();
        let mut s = sim(w, 1, 2);
        let y = s.f_query(1, Word(5)).unwrap();
        assert_eq!(y, crate::ideal::f_canonical(w, 1, 1, Word(5)));
        assert_eq!(s.counters().enqueued, 0);
    }

    #[test]
    fn inner_detection_completes_before_return() {
        let w = Width::new(8).unwrap();
        let mut s = sim(w, 3, 4);
        s.f_query(8, Word(0x22)).unwrap();
        s.f_query(7, Word(0x11)).unwrap();
        assert_eq!(s.queue_len(), 0);
        // Completing the inner chain defines its round-2 value, which detects
        // the same chain again from the outside; that copy is skipped.
        assert_eq!(s.counters().enqueued, 2);
        assert_eq!(s.counters().adapt_calls, 1);
        assert!(s.transcript().events().iter().any(|e| matches!(
            e,
            Event::Dequeue {
                k: 1,
                skipped: true,
                ..
            }
        )));
        let ev = s.transcript().events();
        assert!(ev.contains(&Event::Enqueue {
            a: Word(0x11),
            b: Word(0x22),
            k: 7,
            l: 4
        }));
    }

    #[test]
    fn force_val_policies() {
        let w = Width::new(8).unwrap();
        let mut s = sim(w, 1, 1);
        s.force_val(Word(1), Word(2), 4).unwrap();
        s.force_val(Word(1), Word(2), 4).unwrap();
        assert_eq!(s.counters().overwrites, 0);
        s.force_val(Word(1), Word(3), 4).unwrap();
        assert_eq!(s.counters().overwrites, 1);
        let mut s = sim(w, 1, 1).with_policy(OverwritePolicy::FaultFast);
        s.force_val(Word(1), Word(2), 4).unwrap();
        assert!(matches!(
            s.force_val(Word(1), Word(3), 4),
            Err(Fault::Overwrite { .. })
        ));
    }
}
