//! The two attacks on the six-round simulator.
//!
//! Binding names follow the letters of the six-round setting: `R_i`, `L_i`
//! enter chain `i`, `X, Y_i, Z_i, A_i, S_i` are its inner round inputs and
//! `T_i` leaves it. `Abar` is the value whose round-5 query triggers the
//! abort in the short attack.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::script::{Builder, Equation, Expr, Predicate, Script, ScriptRun};
use crate::error::{AbortLocation, Halt};
use crate::oracle::Oracle;
use crate::seed::{substream, Stream};
use crate::word::{Width, Word};

/// Query budget of the short attack: `(F queries, permutation queries)`.
pub const ATTACK6_QUERIES: (usize, usize) = (7, 3);
/// Query budget of the stronger attack.
pub const STRONG_QUERIES: (usize, usize) = (37, 8);

/// How an attack run ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Aborted {
        step: usize,
        location: AbortLocation,
    },
    /// A fault in the system under attack (never expected).
    Faulted {
        step: usize,
        message: String,
    },
    Completed {
        output: bool,
    },
}

impl Outcome {
    pub fn of(run: &ScriptRun) -> Outcome {
        match &run.halted {
            Some((step, Halt::Abort(a))) => Outcome::Aborted {
                step: *step,
                location: a.clone(),
            },
            Some((step, Halt::Fault(f))) => Outcome::Faulted {
                step: *step,
                message: f.to_string(),
            },
            None => Outcome::Completed { output: run.output },
        }
    }

    pub fn is_abort(&self) -> bool {
        matches!(self, Outcome::Aborted { .. })
    }
}

/// Uniform `X`, `R_2`, `R_3` with `R_2 != R_3`.
fn start_values(width: Width, seed: u64) -> (Word, Word, Word) {
    let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, Stream::Script));
    let mut draw = || width.word(rng.gen::<u64>());
    let x = draw();
    let r2 = draw();
    let mut r3 = draw();
    while r3 == r2 {
        r3 = draw();
    }
    (x, r2, r3)
}

fn a(n: &str) -> Expr {
    Expr::var(n)
}

/// `L := F1(R) ^ X`, then `S || T := P(L || R)`, then `A := F6(S) ^ T`.
fn prepared_chain(b: &mut Builder, i: u8) {
    let (r, l, s, t, x) = (
        format!("R{i}"),
        format!("L{i}"),
        format!("S{i}"),
        format!("T{i}"),
        "X",
    );
    b.f(1, &r);
    b.let_(
        &l,
        Expr::Xor {
            of: vec![Expr::answer(1, a(&r)), a(x)],
        },
    );
    b.p(&l, &r, [&s, &t]);
}

fn a_value(b: &mut Builder, i: u8) {
    let (s, t) = (format!("S{i}"), format!("T{i}"));
    b.f(6, &s);
    b.let_(
        &format!("A{i}"),
        Expr::Xor {
            of: vec![Expr::answer(6, a(&s)), a(&t)],
        },
    );
}

/// The short attack: three permutation queries and seven round queries,
/// ending with the round-5 query of `Abar = A_1 ^ R_1 ^ R_2`.
pub fn attack6_script(width: Width, seed: u64) -> Script {
    let (x, r2, r3) = start_values(width, seed);
    let mut b = Builder::new(width, 6);
    b.lit("X", x).lit("R2", r2).lit("R3", r3);
    // L2, L3 are computed before either permutation query is made.
    b.f(1, "R2").let_(
        "L2",
        Expr::Xor {
            of: vec![Expr::answer(1, a("R2")), a("X")],
        },
    );
    b.f(1, "R3").let_(
        "L3",
        Expr::Xor {
            of: vec![Expr::answer(1, a("R3")), a("X")],
        },
    );
    b.p("L2", "R2", ["S2", "T2"]).p("L3", "R3", ["S3", "T3"]);
    a_value(&mut b, 2);
    a_value(&mut b, 3);
    b.let_("R1", Expr::xor_of(&["R2", "A2", "A3"]));
    prepared_chain(&mut b, 1);
    a_value(&mut b, 1);
    b.let_("Abar", Expr::xor_of(&["A1", "R1", "R2"]));
    b.f(5, "Abar");
    b.finish(Predicate::Always)
}

/// Runs the short attack against any six-round oracle.
pub fn attack6(o: &mut dyn Oracle, seed: u64) -> (Outcome, ScriptRun) {
    let script = attack6_script(o.width(), seed);
    let run = script.run(o).expect("attack script is well formed");
    (Outcome::of(&run), run)
}

/// The stronger attack: chain preparation (steps 1-13), computation of
/// chain values (steps 14-30), then the consistency check as predicate.
pub fn strong_attack_script(width: Width, seed: u64) -> Script {
    let (x, r2, r3) = start_values(width, seed);
    let mut b = Builder::new(width, 6);
    let ans = |k: u8, n: &str| Expr::answer(k, a(n));
    let xor2 = |p: Expr, q: &str| Expr::Xor { of: vec![p, a(q)] };

    // Chain preparation.
    b.lit("X", x);
    for i in 1..=4 {
        b.let_(&format!("X{i}"), a("X"));
    }
    b.lit("R2", r2).lit("R3", r3);
    b.f(1, "R2").f(1, "R3");
    for i in [2, 3] {
        let (l, r, s) = (format!("L{i}"), format!("R{i}"), format!("S{i}"));
        b.let_(&l, xor2(ans(1, &r), "X"));
        b.p(&l, &r, [&s, &format!("T{i}")]);
        b.f(6, &s);
    }
    b.let_("A2", xor2(ans(6, "S2"), "T2"))
        .let_("A3", xor2(ans(6, "S3"), "T3"));
    b.let_("R1", Expr::xor_of(&["R2", "A2", "A3"]));
    prepared_chain(&mut b, 1);
    a_value(&mut b, 1);
    b.let_("A5", Expr::xor_of(&["A1", "R1", "R2"]));
    b.let_("R4", Expr::xor_of(&["R3", "A3", "A5"]));
    prepared_chain(&mut b, 4);
    a_value(&mut b, 4);
    b.let_("A8", Expr::xor_of(&["A4", "R4", "R3"]));
    b.f(5, "A8");

    // Computation of chain values.
    b.f(2, "X");
    for i in 1..=4 {
        b.f(5, &format!("A{i}"));
    }
    for i in 1..=4 {
        b.let_(
            &format!("Z{i}"),
            xor2(ans(5, &format!("A{i}")), &format!("S{i}")),
        );
        b.f(4, &format!("Z{i}"));
    }
    for i in 1..=4 {
        b.let_(&format!("Y{i}"), xor2(ans(2, "X"), &format!("R{i}")));
        b.f(3, &format!("Y{i}"));
    }
    for (dst, src) in [("Y6", "Y1"), ("Y5", "Y2"), ("Y8", "Y3"), ("Y7", "Y4")] {
        b.let_(dst, a(src));
    }
    for (dst, src) in [("Z5", "Z1"), ("Z6", "Z2"), ("Z7", "Z3"), ("Z8", "Z4")] {
        b.let_(dst, a(src));
    }
    b.let_("A6", xor2(ans(4, "Z6"), "Y6"));
    b.f(5, "A6");
    let lower_half = |b: &mut Builder, i: u8, j: u8| {
        for k in [i, j] {
            b.let_(
                &format!("X{k}"),
                xor2(ans(3, &format!("Y{k}")), &format!("Z{k}")),
            );
            b.f(2, &format!("X{k}"));
        }
        for k in [i, j] {
            b.let_(
                &format!("R{k}"),
                xor2(ans(2, &format!("X{k}")), &format!("Y{k}")),
            );
            b.f(1, &format!("R{k}"));
        }
        for k in [i, j] {
            let (l, r) = (format!("L{k}"), format!("R{k}"));
            b.let_(&l, xor2(ans(1, &r), &format!("X{k}")));
            b.p(&l, &r, [&format!("S{k}"), &format!("T{k}")]);
            b.f(6, &format!("S{k}"));
        }
    };
    lower_half(&mut b, 5, 6);
    b.f(5, "A5");
    lower_half(&mut b, 7, 8);
    b.let_("A7", xor2(ans(4, "Z7"), "Y7"));
    b.f(5, "A7");

    b.finish(Predicate::AllEqual {
        equations: consistency_equations(),
    })
}

/// Chain equalities for chains 1..8 and the four cross-chain equalities.
pub fn consistency_equations() -> Vec<Equation> {
    let eq = |label: String, lhs: Expr, rhs: Expr| Equation { label, lhs, rhs };
    let mut out = Vec::new();
    for i in 1..=8 {
        let n = |s: &str| format!("{s}{i}");
        // (round, input, the two values whose XOR the answer must be)
        let rows = [
            (1, n("R"), [n("L"), n("X")]),
            (2, n("X"), [n("R"), n("Y")]),
            (3, n("Y"), [n("X"), n("Z")]),
            (4, n("Z"), [n("Y"), n("A")]),
            (5, n("A"), [n("Z"), n("S")]),
            (6, n("S"), [n("A"), n("T")]),
        ];
        for (k, input, [p, q]) in rows {
            out.push(eq(
                format!("F{k}({input}) = {p} ^ {q}"),
                Expr::answer(k, a(&input)),
                Expr::xor_of(&[&p, &q]),
            ));
        }
    }
    for (p, q) in [("X5", "X6"), ("X7", "X8"), ("A7", "A5"), ("A6", "A3")] {
        out.push(eq(format!("{p} = {q}"), a(p), a(q)));
    }
    out
}

/// Runs the stronger attack; the run's `equations` field holds the
/// consistency report when it completes.
pub fn strong_attack6(o: &mut dyn Oracle, seed: u64) -> (Outcome, ScriptRun) {
    let script = strong_attack_script(o.width(), seed);
    let run = script.run(o).expect("attack script is well formed");
    (Outcome::of(&run), run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_budgets() {
        let w = Width::new(16).unwrap();
        let s = attack6_script(w, 1);
        s.validate().unwrap();
        assert_eq!((s.f_query_count(), s.p_query_count()), ATTACK6_QUERIES);
        let s = strong_attack_script(w, 1);
        s.validate().unwrap();
        assert_eq!((s.f_query_count(), s.p_query_count()), STRONG_QUERIES);
        assert_eq!(consistency_equations().len(), 8 * 6 + 4);
    }

    #[test]
    fn start_values_distinct() {
        let w = Width::new(2).unwrap();
        for seed in 0..200 {
            let (_, r2, r3) = start_values(w, seed);
            assert_ne!(r2, r3);
        }
    }
}
