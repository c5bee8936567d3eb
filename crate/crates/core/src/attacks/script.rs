//! A small straight-line language for distinguishers.
//!
//! A script is a list of steps that bind names to words: round-function
//! queries, permutation queries in either direction, and XOR bindings. A
//! final predicate turns the bindings into the output bit. Scripts are plain
//! values and serialize to JSON with hex-encoded literals.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, Halt};
use crate::oracle::Oracle;
use crate::word::{HexWord, Width, Word};

/// A word-valued expression over earlier bindings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Lit {
        v: HexWord,
    },
    Var {
        name: String,
    },
    Xor {
        of: Vec<Expr>,
    },
    /// The answer of an earlier round query `F_round(x)`. Reads the record
    /// of past answers and issues no query.
    Answer {
        round: u8,
        x: Box<Expr>,
    },
}

impl Expr {
    pub fn lit(width: Width, w: Word) -> Expr {
        Expr::Lit {
            v: HexWord::new(width, w),
        }
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var { name: name.into() }
    }

    /// XOR of the named bindings.
    pub fn xor_of(names: &[&str]) -> Expr {
        Expr::Xor {
            of: names.iter().map(|n| Expr::var(*n)).collect(),
        }
    }

    pub fn answer(round: u8, x: Expr) -> Expr {
        Expr::Answer {
            round,
            x: Box::new(x),
        }
    }

    fn eval(&self, env: &Env) -> Result<Word, ConfigError> {
        match self {
            Expr::Lit { v } => Ok(v.word),
            Expr::Var { name } => env
                .vars
                .get(name)
                .copied()
                .ok_or_else(|| ConfigError::Script(format!("unbound name {name:?}"))),
            Expr::Xor { of } => of
                .iter()
                .try_fold(Word::ZERO, |acc, e| Ok(acc ^ e.eval(env)?)),
            Expr::Answer { round, x } => {
                let x = x.eval(env)?;
                env.answers.get(&(*round, x)).copied().ok_or_else(|| {
                    ConfigError::Script(format!("F{round}({x:x}) was never queried"))
                })
            }
        }
    }

    fn names<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Lit { .. } => {}
            Expr::Var { name } => out.push(name),
            Expr::Xor { of } => of.iter().for_each(|e| e.names(out)),
            Expr::Answer { x, .. } => x.names(out),
        }
    }

    fn max_literal(&self) -> u64 {
        match self {
            Expr::Lit { v } => v.word.0,
            Expr::Var { .. } => 0,
            Expr::Xor { of } => of.iter().map(Expr::max_literal).max().unwrap_or(0),
            Expr::Answer { x, .. } => x.max_literal(),
        }
    }

    fn answer_rounds(&self, out: &mut Vec<u8>) {
        match self {
            Expr::Answer { round, x } => {
                out.push(*round);
                x.answer_rounds(out);
            }
            Expr::Xor { of } => of.iter().for_each(|e| e.answer_rounds(out)),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    /// Round-function query; the answer is bound to `bind` if given.
    F {
        round: u8,
        x: Expr,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bind: Option<String>,
    },
    /// Forward permutation query on `left || right`.
    P {
        left: Expr,
        right: Expr,
        bind: [String; 2],
    },
    /// Inverse permutation query on `left || right`.
    PInv {
        left: Expr,
        right: Expr,
        bind: [String; 2],
    },
    Let {
        name: String,
        value: Expr,
    },
}

impl Step {
    fn inputs(&self) -> Vec<&Expr> {
        match self {
            Step::F { x, .. } => vec![x],
            Step::P { left, right, .. } | Step::PInv { left, right, .. } => vec![left, right],
            Step::Let { value, .. } => vec![value],
        }
    }

    fn binds(&self) -> Vec<&str> {
        match self {
            Step::F { bind, .. } => bind.iter().map(String::as_str).collect(),
            Step::P { bind, .. } | Step::PInv { bind, .. } => {
                bind.iter().map(String::as_str).collect()
            }
            Step::Let { name, .. } => vec![name],
        }
    }

    pub fn is_query(&self) -> bool {
        !matches!(self, Step::Let { .. })
    }
}

/// A named equality checked by the final predicate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    pub label: String,
    pub lhs: Expr,
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    /// Outputs 1 whenever the run reaches the end.
    Always,
    /// Outputs 1 iff every equation holds.
    AllEqual { equations: Vec<Equation> },
    /// Outputs the least significant bit of the expression.
    LowBit { of: Expr },
}

impl Predicate {
    fn exprs(&self) -> Vec<&Expr> {
        match self {
            Predicate::Always => vec![],
            Predicate::AllEqual { equations } => {
                equations.iter().flat_map(|e| [&e.lhs, &e.rhs]).collect()
            }
            Predicate::LowBit { of } => vec![of],
        }
    }
}

/// A distinguisher as a straight-line program.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub width: Width,
    /// Round count of the construction the script targets.
    pub rounds: u8,
    pub steps: Vec<Step>,
    pub predicate: Predicate,
}

#[derive(Default)]
struct Env {
    vars: IndexMap<String, Word>,
    answers: HashMap<(u8, Word), Word>,
}

/// Outcome of executing a script against an oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptRun {
    /// The output bit; 0 when the run halted.
    pub output: bool,
    /// Index of the step at which the oracle ended the interaction.
    pub halted: Option<(usize, Halt)>,
    /// Every binding, in binding order.
    pub env: IndexMap<String, Word>,
    /// Answers of all round queries issued, keyed by `(round, x)`.
    pub answers: HashMap<(u8, Word), Word>,
    pub f_queries: u64,
    pub p_queries: u64,
    /// Per-equation results for an equality predicate; empty otherwise or
    /// after a halt.
    pub equations: Vec<(String, bool)>,
}

impl ScriptRun {
    pub fn aborted(&self) -> bool {
        matches!(self.halted, Some((_, Halt::Abort(_))))
    }

    pub fn get(&self, name: &str) -> Word {
        self.env[name]
    }
}

impl Script {
    /// Number of query steps.
    pub fn query_count(&self) -> usize {
        self.steps.iter().filter(|s| s.is_query()).count()
    }

    pub fn f_query_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::F { .. }))
            .count()
    }

    pub fn p_query_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::P { .. } | Step::PInv { .. }))
            .count()
    }

    /// Static checks: every name is bound once and before use, rounds are in
    /// range, and literals fit the width.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError::Script(m));
        if self.rounds == 0 {
            return err("zero rounds".into());
        }
        let mut bound: HashSet<&str> = HashSet::new();
        let check_expr = |e: &Expr, bound: &HashSet<&str>, at: &str| -> Result<(), ConfigError> {
            let mut names = Vec::new();
            e.names(&mut names);
            if let Some(n) = names.iter().find(|n| !bound.contains(**n)) {
                return Err(ConfigError::Script(format!(
                    "{at}: {n:?} used before it is bound"
                )));
            }
            if e.max_literal() > self.width.mask() {
                return Err(ConfigError::Script(format!(
                    "{at}: literal wider than {} bits",
                    self.width
                )));
            }
            let mut rounds = Vec::new();
            e.answer_rounds(&mut rounds);
            if let Some(r) = rounds.iter().find(|r| **r == 0 || **r > self.rounds) {
                return Err(ConfigError::Script(format!("{at}: round {r} out of range")));
            }
            Ok(())
        };
        for (i, s) in self.steps.iter().enumerate() {
            let at = format!("step {i}");
            for e in s.inputs() {
                check_expr(e, &bound, &at)?;
            }
            if let Step::F { round, .. } = s {
                if *round == 0 || *round > self.rounds {
                    return err(format!("{at}: round {round} out of range"));
                }
            }
            for b in s.binds() {
                if !bound.insert(b) {
                    return err(format!("{at}: {b:?} bound twice"));
                }
            }
        }
        for e in self.predicate.exprs() {
            check_expr(e, &bound, "predicate")?;
        }
        Ok(())
    }

    /// Runs the script. A halt from the oracle ends the run with output 0;
    /// an `Err` means the script itself is malformed.
    pub fn run(&self, o: &mut dyn Oracle) -> Result<ScriptRun, ConfigError> {
        self.validate()?;
        if o.rounds() != self.rounds {
            return Err(ConfigError::Script(format!(
                "script targets {} rounds, oracle has {}",
                self.rounds,
                o.rounds()
            )));
        }
        let mut env = Env::default();
        let mut f_queries = 0;
        let mut p_queries = 0;
        let mut halted = None;
        for (i, s) in self.steps.iter().enumerate() {
            let r = match s {
                Step::Let { name, value } => {
                    let v = value.eval(&env)?;
                    env.vars.insert(name.clone(), v);
                    Ok(())
                }
                Step::F { round, x, bind } => {
                    let x = x.eval(&env)?;
                    f_queries += 1;
                    o.f(*round, x).map(|y| {
                        env.answers.insert((*round, x), y);
                        if let Some(b) = bind {
                            env.vars.insert(b.clone(), y);
                        }
                    })
                }
                Step::P { left, right, bind } | Step::PInv { left, right, bind } => {
                    let input = (left.eval(&env)?, right.eval(&env)?);
                    p_queries += 1;
                    let r = if matches!(s, Step::P { .. }) {
                        o.p(input)
                    } else {
                        o.pinv(input)
                    };
                    r.map(|(a, b)| {
                        env.vars.insert(bind[0].clone(), a);
                        env.vars.insert(bind[1].clone(), b);
                    })
                }
            };
            if let Err(h) = r {
                halted = Some((i, h));
                break;
            }
        }
        let (output, equations) = if halted.is_some() {
            (false, Vec::new())
        } else {
            match &self.predicate {
                Predicate::Always => (true, Vec::new()),
                Predicate::LowBit { of } => (of.eval(&env)?.0 & 1 == 1, Vec::new()),
                Predicate::AllEqual { equations } => {
                    let mut res = Vec::with_capacity(equations.len());
                    for e in equations {
                        res.push((e.label.clone(), e.lhs.eval(&env)? == e.rhs.eval(&env)?));
                    }
                    (res.iter().all(|r| r.1), res)
                }
            }
        };
        Ok(ScriptRun {
            output,
            halted,
            env: env.vars,
            answers: env.answers,
            f_queries,
            p_queries,
            equations,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scripts always serialize")
    }

    pub fn from_json(s: &str) -> Result<Script, ConfigError> {
        let script: Script =
            serde_json::from_str(s).map_err(|e| ConfigError::Script(e.to_string()))?;
        script.validate()?;
        Ok(script)
    }
}

/// Incremental script construction with short helpers.
pub struct Builder {
    width: Width,
    rounds: u8,
    steps: Vec<Step>,
}

impl Builder {
    pub fn new(width: Width, rounds: u8) -> Self {
        Builder {
            width,
            rounds,
            steps: Vec::new(),
        }
    }

    pub fn lit(&mut self, name: &str, w: Word) -> &mut Self {
        let value = Expr::lit(self.width, w);
        self.let_(name, value)
    }

    pub fn let_(&mut self, name: &str, value: Expr) -> &mut Self {
        self.steps.push(Step::Let {
            name: name.into(),
            value,
        });
        self
    }

    /// `F_round(name)`, answer unbound.
    pub fn f(&mut self, round: u8, name: &str) -> &mut Self {
        self.steps.push(Step::F {
            round,
            x: Expr::var(name),
            bind: None,
        });
        self
    }

    pub fn f_bind(&mut self, round: u8, x: Expr, bind: &str) -> &mut Self {
        self.steps.push(Step::F {
            round,
            x,
            bind: Some(bind.into()),
        });
        self
    }

    pub fn p(&mut self, left: &str, right: &str, out: [&str; 2]) -> &mut Self {
        self.steps.push(Step::P {
            left: Expr::var(left),
            right: Expr::var(right),
            bind: out.map(String::from),
        });
        self
    }

    pub fn push(&mut self, s: Step) -> &mut Self {
        self.steps.push(s);
        self
    }

    pub fn finish(self, predicate: Predicate) -> Script {
        Script {
            width: self.width,
            rounds: self.rounds,
            steps: self.steps,
            predicate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_forward_references() {
        let w = Width::new(8).unwrap();
        let mut b = Builder::new(w, 6);
        b.f(1, "x").lit("x", Word(1));
        assert!(b.finish(Predicate::Always).validate().is_err());

        let mut b = Builder::new(w, 6);
        b.lit("x", Word(1)).f(7, "x");
        assert!(b.finish(Predicate::Always).validate().is_err());

        let mut b = Builder::new(w, 6);
        b.lit("x", Word(1)).lit("x", Word(2));
        assert!(b.finish(Predicate::Always).validate().is_err());

        let mut b = Builder::new(w, 6);
        b.lit("x", Word(0x100));
        assert!(b.finish(Predicate::Always).validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = Width::new(12).unwrap();
        let mut b = Builder::new(w, 6);
        b.lit("x", Word(0xab)).f_bind(2, Expr::var("x"), "y");
        b.p("x", "y", ["s", "t"]);
        let s = b.finish(Predicate::AllEqual {
            equations: vec![Equation {
                label: "e".into(),
                lhs: Expr::answer(2, Expr::var("x")),
                rhs: Expr::xor_of(&["y"]),
            }],
        });
        let j = s.to_json();
        assert!(j.contains("\"0ab\""));
        assert_eq!(Script::from_json(&j).unwrap(), s);
    }
}
