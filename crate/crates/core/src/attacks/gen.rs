//! Script transformers and generators for the harness.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::script::{Expr, Predicate, Script, Step};
use crate::seed::{substream, Stream};
use crate::word::{Width, Word};

/// Appends, after the inner script, round queries that evaluate the Feistel
/// construction on every permutation query the inner script made. The trace
/// of query `j` binds `cc{j}_x{i}` for the round inputs and `cc{j}_f{i}` for
/// the answers.
pub fn complete_all_chains(inner: &Script) -> Script {
    let mut steps = inner.steps.clone();
    for (j, s) in inner.steps.iter().enumerate() {
        let (x0, x1) = match s {
            Step::P { left, right, .. } => (left.clone(), right.clone()),
            Step::PInv { bind, .. } => (Expr::var(&bind[0]), Expr::var(&bind[1])),
            _ => continue,
        };
        let x = |i: u8| format!("cc{j}_x{i}");
        steps.push(Step::Let {
            name: x(0),
            value: x0,
        });
        steps.push(Step::Let {
            name: x(1),
            value: x1,
        });
        for i in 1..=inner.rounds {
            let f = format!("cc{j}_f{i}");
            steps.push(Step::F {
                round: i,
                x: Expr::var(x(i)),
                bind: Some(f.clone()),
            });
            steps.push(Step::Let {
                name: x(i + 1),
                value: Expr::xor_of(&[&x(i - 1), &f]),
            });
        }
    }
    Script {
        steps,
        ..inner.clone()
    }
}

/// A random script with `q` queries, deterministic in `seed`.
///
/// Queries mix fresh round queries, round queries on earlier answers,
/// Feistel-style threading (`a ^ F_i(b)` for earlier words `a, b`), forward
/// and inverse permutation queries on fresh or earlier words, and exact
/// repeats of earlier queries. The output bit is the low bit of the XOR of
/// one or two random earlier words.
pub fn random_distinguisher(width: Width, rounds: u8, q: usize, seed: u64) -> Script {
    assert!(q >= 1, "a script needs at least one query");
    let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, Stream::Script));
    let mut steps: Vec<Step> = Vec::new();
    let mut pool: Vec<String> = Vec::new();
    let mut queries: Vec<usize> = Vec::new();
    let mut next = 0usize;
    let mut fresh = |prefix: &str| {
        next += 1;
        format!("{prefix}{next}")
    };
    let lit = |rng: &mut ChaCha8Rng| Expr::lit(width, Word(rng.gen::<u64>() & width.mask()));

    for _ in 0..q {
        let choice = if pool.is_empty() {
            rng.gen_range(0..2) * 2
        } else {
            rng.gen_range(0..7)
        };
        let pick = |rng: &mut ChaCha8Rng, pool: &[String]| Expr::var(pool.choose(rng).unwrap());
        let step = match choice {
            0 => {
                let b = fresh("v");
                pool.push(b.clone());
                Step::F {
                    round: rng.gen_range(1..=rounds),
                    x: lit(&mut rng),
                    bind: Some(b),
                }
            }
            1 => {
                let b = fresh("v");
                let x = pick(&mut rng, &pool);
                pool.push(b.clone());
                Step::F {
                    round: rng.gen_range(1..=rounds),
                    x,
                    bind: Some(b),
                }
            }
            2..=4 => {
                let (left, right) = if choice == 2 {
                    (lit(&mut rng), lit(&mut rng))
                } else {
                    (
                        pick(&mut rng, &pool),
                        if rng.gen() {
                            pick(&mut rng, &pool)
                        } else {
                            lit(&mut rng)
                        },
                    )
                };
                let bind = [fresh("v"), fresh("v")];
                pool.extend(bind.iter().cloned());
                if choice == 4 || (choice == 2 && rng.gen_bool(0.3)) {
                    Step::PInv { left, right, bind }
                } else {
                    Step::P { left, right, bind }
                }
            }
            5 => {
                // Thread one Feistel round: query F_i(b), then bind a ^ F_i(b).
                let x = pick(&mut rng, &pool);
                let a = pick(&mut rng, &pool);
                let f = fresh("v");
                let t = fresh("t");
                steps.push(Step::F {
                    round: rng.gen_range(1..=rounds),
                    x,
                    bind: Some(f.clone()),
                });
                queries.push(steps.len() - 1);
                steps.push(Step::Let {
                    name: t.clone(),
                    value: Expr::Xor {
                        of: vec![a, Expr::var(&f)],
                    },
                });
                pool.push(f);
                pool.push(t);
                continue;
            }
            _ => {
                if queries.is_empty() {
                    let b = fresh("v");
                    pool.push(b.clone());
                    Step::F {
                        round: rng.gen_range(1..=rounds),
                        x: lit(&mut rng),
                        bind: Some(b),
                    }
                } else {
                    let mut s = steps[*queries.choose(&mut rng).unwrap()].clone();
                    match &mut s {
                        Step::F { bind, .. } => {
                            let b = fresh("v");
                            pool.push(b.clone());
                            *bind = Some(b);
                        }
                        Step::P { bind, .. } | Step::PInv { bind, .. } => {
                            *bind = [fresh("v"), fresh("v")];
                            pool.extend(bind.iter().cloned());
                        }
                        Step::Let { .. } => unreachable!("only query steps are recorded"),
                    }
                    s
                }
            }
        };
        steps.push(step);
        queries.push(steps.len() - 1);
    }
    let k = rng.gen_range(1..=2.min(pool.len()));
    let names: Vec<&str> = pool
        .choose_multiple(&mut rng, k)
        .map(String::as_str)
        .collect();
    let predicate = Predicate::LowBit {
        of: Expr::xor_of(&names),
    };
    Script {
        width,
        rounds,
        steps,
        predicate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_scripts_are_valid_and_sized() {
        let w = Width::new(8).unwrap();
        for seed in 0..300 {
            for q in 1..=8 {
                let s = random_distinguisher(w, 14, q, seed);
                s.validate().unwrap();
                assert_eq!(s.query_count(), q);
            }
        }
    }

    #[test]
    fn wrapper_traces_every_permutation_query() {
        let w = Width::new(8).unwrap();
        for seed in 0..100 {
            let s = random_distinguisher(w, 14, 5, seed);
            let c = complete_all_chains(&s);
            c.validate().unwrap();
            assert_eq!(
                c.f_query_count(),
                s.f_query_count() + 14 * s.p_query_count()
            );
            assert_eq!(c.p_query_count(), s.p_query_count());
        }
    }
}
