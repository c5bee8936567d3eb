//! Distinguishers as scripts: the two attacks on the six-round simulator,
//! the chain-completing wrapper and random scripts for the harness.

mod bad;
mod gen;
mod script;
mod six;

pub use bad::{attack6_bad_events, histories_at, AttackBad, BadFlag, BadReport};
pub use gen::{complete_all_chains, random_distinguisher};
pub use script::{Builder, Equation, Expr, Predicate, Script, ScriptRun, Step};
pub use six::{
    attack6, attack6_script, consistency_equations, strong_attack6, strong_attack_script, Outcome,
    ATTACK6_QUERIES, STRONG_QUERIES,
};
