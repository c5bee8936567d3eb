//! Bad-event diagnostics for the short attack.
//!
//! The permutation's fresh answers stand in for the list of pre-drawn
//! answers `L`: `L1` and `L2` collect their first and second halves. Each
//! check is evaluated on the simulator histories at the point of the attack
//! where the event is defined, rebuilt from the transcript. These are
//! attribution aids for the rare runs that do not abort; nothing gates on
//! them.

use std::collections::{HashMap, HashSet};

use crate::sim6::Sim6;
use crate::transcript::{Completion, Event};
use crate::word::Word;

use super::script::ScriptRun;

/// Which bad event a flag belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AttackBad {
    Urp,
    Bad1,
    Bad2,
    Bad3,
}

/// One triggered clause with a human-readable witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BadFlag {
    pub event: AttackBad,
    pub clause: &'static str,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BadReport {
    pub flags: Vec<BadFlag>,
    /// Events that could not be evaluated because the run stopped before
    /// the values they refer to existed.
    pub skipped: Vec<AttackBad>,
}

impl BadReport {
    pub fn any(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn has(&self, e: AttackBad) -> bool {
        self.flags.iter().any(|f| f.event == e)
    }
}

type Histories = Vec<HashMap<Word, Word>>;

/// Round histories after replaying the first `upto` events.
pub fn histories_at(events: &[Event], upto: usize) -> Histories {
    let mut h = vec![HashMap::new(); 7];
    for e in &events[..upto.min(events.len())] {
        if let Event::Sample { round, x, y } | Event::ForceVal { round, x, y } = e {
            h[*round as usize].insert(*x, *y);
        }
    }
    h
}

/// Evaluates the bad events of the short attack on a finished run.
pub fn attack6_bad_events(sim: &Sim6, run: &ScriptRun) -> BadReport {
    let mut rep = BadReport::default();
    let mut flag = |event, clause, witness: String| {
        rep.flags.push(BadFlag {
            event,
            clause,
            witness,
        })
    };
    let v = |n: &str| run.env.get(n).copied();
    let events = sim.transcript().events();

    let values: Vec<(Word, Word)> = sim
        .urp()
        .fresh_answers()
        .iter()
        .map(|&(_, _, a)| a)
        .collect();
    let l1: HashSet<Word> = values.iter().map(|p| p.0).collect();
    let l2: HashSet<Word> = values.iter().map(|p| p.1).collect();

    let rs = [v("R1"), v("R2"), v("R3")];
    let Some(r) = rs.iter().copied().collect::<Option<Vec<Word>>>() else {
        rep.skipped.extend([
            AttackBad::Urp,
            AttackBad::Bad1,
            AttackBad::Bad2,
            AttackBad::Bad3,
        ]);
        return rep;
    };

    // Bad_URP.
    if l1.len() < values.len() {
        flag(AttackBad::Urp, "i", "first halves collide".into());
    }
    if l2.len() < values.len() {
        flag(AttackBad::Urp, "i", "second halves collide".into());
    }
    for (i, ri) in r.iter().enumerate() {
        if l2.contains(ri) {
            flag(AttackBad::Urp, "ii", format!("R{} = {ri:x} in L2", i + 1));
        }
    }
    let d = r[0] ^ r[1];
    let seconds: Vec<Word> = values.iter().map(|p| p.1).collect();
    'outer: for (i, a) in seconds.iter().enumerate() {
        for b in &seconds[i + 1..] {
            if *a ^ *b == d {
                flag(AttackBad::Urp, "iii", format!("{a:x} ^ {b:x} = R1 ^ R2"));
                break 'outer;
            }
        }
    }

    // Bad_1, on the histories before the final query.
    let (Some(abar), Some(a), Some(s)) = (
        v("Abar"),
        [v("A1"), v("A2"), v("A3")]
            .into_iter()
            .collect::<Option<Vec<Word>>>(),
        [v("S1"), v("S2"), v("S3")]
            .into_iter()
            .collect::<Option<Vec<Word>>>(),
    ) else {
        rep.skipped
            .extend([AttackBad::Bad1, AttackBad::Bad2, AttackBad::Bad3]);
        return rep;
    };
    let before_final = events
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!(e, Event::FQuery { .. }))
        .nth(5)
        .map(|(i, _)| i + 1);
    let h = histories_at(events, before_final.unwrap_or(events.len()));
    let f6 = |x: Word| h[6].get(&x).copied();
    for i in 0..3 {
        for j in i + 1..3 {
            if r[i] == r[j] {
                flag(AttackBad::Bad1, "i", format!("R{} = R{}", i + 1, j + 1));
            }
        }
    }
    let known: HashSet<(Word, Word)> = (0..3).map(|i| (a[i], s[i])).collect();
    let mut a_side: Vec<Word> = h[5].keys().copied().collect();
    a_side.push(abar);
    for &aa in &a_side {
        for (&ss, &fs) in &h[6] {
            if !known.contains(&(aa, ss)) && l2.contains(&(aa ^ fs)) {
                flag(AttackBad::Bad1, "ii", format!("A = {aa:x}, S = {ss:x}"));
            }
        }
    }
    for (i, j) in [(0, 2), (1, 2)] {
        let a1 = abar ^ r[i] ^ r[j];
        if h[5].contains_key(&a1) {
            continue;
        }
        for (k, sk) in s.iter().enumerate() {
            if f6(*sk).is_some_and(|y| l2.contains(&(y ^ a1))) {
                flag(
                    AttackBad::Bad1,
                    "iii",
                    format!("i={}, j={}, k={}", i + 1, j + 1, k + 1),
                );
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            for l in 0..3 {
                let a2 = a[l] ^ r[i] ^ r[j];
                if h[5].contains_key(&a2) {
                    continue;
                }
                for (k, sk) in s.iter().enumerate() {
                    // A'' = A_k gives F6(S_k) ^ A_k = T_k, a member of L2 by construction.
                    if a2 == a[k] {
                        continue;
                    }
                    if f6(*sk).is_some_and(|y| l2.contains(&(y ^ a2))) {
                        flag(
                            AttackBad::Bad1,
                            "iv",
                            format!("i={}, j={}, k={}, l={}", i + 1, j + 1, k + 1, l + 1),
                        );
                    }
                }
            }
        }
    }
    // Index 3 stands for Abar.
    let a_ext = [a[0], a[1], a[2], abar];
    for i in 0..3 {
        for j in 0..3 {
            for (t, &at) in a_ext.iter().enumerate() {
                let excluded = (i == j && t == i)
                    || (i == 0 && j == 1 && t == 2)
                    || (i == 1 && j == 0 && t == 3);
                if !excluded && r[i] ^ r[j] ^ a[j] ^ at == Word::ZERO {
                    flag(
                        AttackBad::Bad1,
                        "v",
                        format!("i={}, j={}, A#{}", i + 1, j + 1, t + 1),
                    );
                }
            }
        }
    }

    // Bad_2, on the first completed tuple.
    let final_h = histories_at(events, events.len());
    let first = sim.tuples().iter().find(|t| t[0] == r[0] && t[4] == a[0]);
    match (first, final_h[5].get(&abar)) {
        (Some(t), Some(&fa)) => {
            let (y1, z1) = (t[2], t[3]);
            if y1 == z1 {
                flag(AttackBad::Bad2, "i", format!("Y1 = Z1 = {y1:x}"));
            }
            for (n, rr) in [(2, r[1]), (3, r[2])] {
                if y1 == z1 ^ r[0] ^ rr {
                    flag(AttackBad::Bad2, "ii", format!("Y1 = Z1 ^ R1 ^ R{n}"));
                }
            }
            if l1.contains(&(z1 ^ fa)) {
                flag(
                    AttackBad::Bad2,
                    "iii",
                    format!("Z1 ^ F5(Abar) = {:x} in L1", z1 ^ fa),
                );
            }
            if z1 ^ fa == s[0] {
                flag(AttackBad::Bad2, "iv", "Z1 ^ F5(Abar) = S1".into());
            }
        }
        _ => rep.skipped.push(AttackBad::Bad2),
    }

    // Bad_3, after the first three completions.
    let mut done = events.iter().enumerate().filter(|(_, e)| {
        matches!(
            e,
            Event::CompleteChain {
                outcome: Completion::Done(_),
                ..
            }
        )
    });
    match done.nth(2) {
        Some((idx, _)) => {
            let h = histories_at(events, idx + 1);
            let firsts: HashSet<(Word, Word)> =
                sim.tuples().iter().take(3).map(|t| (t[3], t[4])).collect();
            if let Some(x) = h[3].keys().find(|x| h[4].contains_key(x)) {
                flag(AttackBad::Bad3, "i", format!("{x:x} in F3 and F4"));
            }
            for &z in h[4].keys() {
                for (&aa, &fa) in &h[5] {
                    if !firsts.contains(&(z, aa)) && l1.contains(&(z ^ fa)) {
                        flag(AttackBad::Bad3, "ii", format!("Z = {z:x}, A = {aa:x}"));
                    }
                }
            }
        }
        None => rep.skipped.push(AttackBad::Bad3),
    }
    rep
}
