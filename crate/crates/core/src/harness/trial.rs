//! Scenario wiring and single trials.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::attacks::{complete_all_chains, Script, ScriptRun};
use crate::chain::{monitor, MonitorConfig};
use crate::error::{ConfigError, Halt};
use crate::ideal::{Psi, RandTableF, RandTableP, Tsrf, Urp};
use crate::oracle::{Direct, Oracle};
use crate::seed::{substream, Stream};
use crate::sim14::{OverwritePolicy, Sim14};
use crate::sim6::{Sim6, Sim6Config};
use crate::transcript::Transcript;
use crate::word::{Width, Word};

use super::invariants::{assert_invariants, InvariantReport, Level};

/// The four systems a distinguisher may face.
///
/// * `S1`: random permutation and the simulator querying it.
/// * `S2`: two-sided random function on table `p` and the simulator with
///   round randomness `f`.
/// * `S3`: the Feistel construction on round table `h` and the simulator
///   with the same `h` as round randomness.
/// * `S4`: the Feistel construction on `h`, with round queries answered by
///   `h` directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    S1,
    S2,
    S3,
    S4,
}

/// Which simulator sits on the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    Sim14,
    Sim6,
}

impl SimKind {
    pub fn rounds(self) -> u8 {
        match self {
            SimKind::Sim14 => 14,
            SimKind::Sim6 => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub id: ScenarioId,
    pub sim: SimKind,
}

impl Scenario {
    pub fn new(id: ScenarioId, sim: SimKind) -> Result<Scenario, ConfigError> {
        if sim == SimKind::Sim6 && matches!(id, ScenarioId::S2 | ScenarioId::S3) {
            return Err(ConfigError::Other(format!(
                "{id:?} is defined for the 14-round simulator only"
            )));
        }
        Ok(Scenario { id, sim })
    }

    pub fn rounds(self) -> u8 {
        self.sim.rounds()
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sim = match self.sim {
            SimKind::Sim14 => "sim14",
            SimKind::Sim6 => "sim6",
        };
        write!(f, "{:?}/{sim}", self.id)
    }
}

impl FromStr for ScenarioId {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(ScenarioId::S1),
            "S2" => Ok(ScenarioId::S2),
            "S3" => Ok(ScenarioId::S3),
            "S4" => Ok(ScenarioId::S4),
            _ => Err(ConfigError::Other(format!("unknown scenario {s:?}"))),
        }
    }
}

/// Per-trial switches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOptions {
    /// Keep the event log (forced on by `monitor` and `invariants`).
    pub record: bool,
    /// Run the bad-event monitor (S2 only).
    pub monitor: bool,
    /// Check transcript invariants at this level (14-round runs only).
    pub invariants: Option<InvariantLevel>,
    /// Wrap the script so it completes all chains.
    pub complete_chains: bool,
    /// Stop at the first overwrite instead of logging it.
    pub fault_fast: bool,
    /// After the run, force a conflicting value into an existing round
    /// entry (fault injection for the invariant runner).
    pub inject_overwrite: bool,
    /// Six-round simulator: skip the completed-tuple guard.
    pub guard_disabled: bool,
    /// Six-round simulator: iterate chain sets in seeded random order.
    pub random_order: bool,
    /// 14-round simulator: lift the cap of [`WORK_CAP`] backend calls.
    pub uncapped: bool,
}

/// Backend calls after which a 14-round simulator run faults. Far above
/// the efficiency bounds for the query counts the harness uses; reached only
/// by executions that overwrote values at small widths.
pub const WORK_CAP: u64 = 1 << 24;

/// Serializable mirror of [`Level`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvariantLevel {
    Basic,
    Consistency,
    Full,
}

impl From<InvariantLevel> for Level {
    fn from(l: InvariantLevel) -> Level {
        match l {
            InvariantLevel::Basic => Level::Basic,
            InvariantLevel::Consistency => Level::Consistency,
            InvariantLevel::Full => Level::Full,
        }
    }
}

/// One row of batch output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub scenario: String,
    pub output: bool,
    /// Distinguisher queries, split by kind.
    pub f_queries: u64,
    pub p_queries: u64,
    /// Simulator permutation queries, both directions.
    pub sim_p_queries: u64,
    pub check_calls: u64,
    pub max_table: usize,
    pub perm_entries: usize,
    /// Bad events found by the monitor, if it ran.
    pub bad_events: Option<usize>,
    pub overwrites: u64,
    pub aborted: bool,
    pub fault: Option<String>,
    /// Names of failed invariants, `;`-joined; empty when all pass or none ran.
    pub invariant_failures: String,
    pub wall_us: u64,
}

impl TrialSummary {
    /// Monitored run with no bad event.
    pub fn good(&self) -> Option<bool> {
        self.bad_events.map(|n| n == 0)
    }

    /// The summary without wall time, for determinism comparisons.
    pub fn stable(&self) -> TrialSummary {
        TrialSummary {
            wall_us: 0,
            ..self.clone()
        }
    }
}

/// Everything a trial produced.
pub struct Trial {
    pub summary: TrialSummary,
    pub run: ScriptRun,
    pub transcript: Transcript,
    pub invariants: Option<InvariantReport>,
}

/// Randomness of one trial: round table `f` (also `h`), permutation table
/// `p`, and the permutation seed (equal to `p`'s, which couples S1 and S2).
pub fn trial_randomness(width: Width, seed: u64) -> (RandTableF, RandTableP, u64) {
    let fs = substream(seed, Stream::RoundFunctions);
    let ps = substream(seed, Stream::Permutation);
    (
        RandTableF::seeded(width, fs),
        RandTableP::seeded(width, ps),
        ps,
    )
}

fn sim14_summary<B: crate::ideal::Backend, R: crate::ideal::RoundSource>(
    s: &Sim14<B, R>,
    sum: &mut TrialSummary,
) {
    let c = s.counters();
    sum.sim_p_queries = (c.p_calls + c.pinv_calls).saturating_sub(sum.p_queries);
    sum.check_calls = c.check_calls;
    sum.max_table = s.max_table();
    sum.perm_entries = s.perm_table().down.len();
    sum.overwrites = c.overwrites;
}

/// Overwrites one round entry, creating it first if every table is empty.
fn inject<B: crate::ideal::Backend, R: crate::ideal::RoundSource>(s: &mut Sim14<B, R>) {
    let entry = (1..=14u8).find_map(|i| s.table(i).iter().next().map(|(&x, &y)| (i, x, y)));
    let (i, x, y) = entry.unwrap_or((1, Word::ZERO, Word::ZERO));
    if entry.is_none() {
        let _ = s.force_val(x, y, i);
    }
    let _ = s.force_val(x, y ^ Word(1), i);
}

/// Runs `script` in `scenario` with the randomness derived from `seed`.
/// Deterministic in `(scenario, script, seed, opts)` up to wall time.
pub fn run_trial(
    scenario: Scenario,
    script: &Script,
    seed: u64,
    opts: TrialOptions,
) -> Result<Trial, ConfigError> {
    let width = script.width;
    if script.rounds != scenario.rounds() {
        return Err(ConfigError::Script(format!(
            "script targets {} rounds, scenario {scenario} has {}",
            script.rounds,
            scenario.rounds()
        )));
    }
    let wrapped;
    let script = if opts.complete_chains {
        wrapped = complete_all_chains(script);
        &wrapped
    } else {
        script
    };
    let record = opts.record || opts.monitor || opts.invariants.is_some();
    let log = Transcript::new(width, record);
    let (f, p, pseed) = trial_randomness(width, seed);
    let policy = if opts.fault_fast {
        OverwritePolicy::FaultFast
    } else {
        OverwritePolicy::LogAndContinue
    };
    let cap = if opts.uncapped { u64::MAX } else { WORK_CAP };
    let start = Instant::now();
    let mut sum = TrialSummary {
        seed,
        scenario: scenario.to_string(),
        output: false,
        f_queries: 0,
        p_queries: 0,
        sim_p_queries: 0,
        check_calls: 0,
        max_table: 0,
        perm_entries: 0,
        bad_events: None,
        overwrites: 0,
        aborted: false,
        fault: None,
        invariant_failures: String::new(),
        wall_us: 0,
    };

    let exec = |o: &mut dyn Oracle| script.run(o);
    let (run, transcript) = match (scenario.sim, scenario.id) {
        (SimKind::Sim14, ScenarioId::S1) => {
            let mut s = Sim14::new(width, Urp::new(width, pseed), f, log)
                .with_policy(policy)
                .with_work_cap(cap);
            let run = exec(&mut s)?;
            sum.p_queries = run.p_queries;
            if opts.inject_overwrite {
                inject(&mut s);
            }
            sim14_summary(&s, &mut sum);
            (run, s.into_parts().2)
        }
        (SimKind::Sim14, ScenarioId::S2) => {
            let mut s = Sim14::new(width, Tsrf::new(p), f, log)
                .with_policy(policy)
                .with_work_cap(cap);
            let run = exec(&mut s)?;
            sum.p_queries = run.p_queries;
            if opts.inject_overwrite {
                inject(&mut s);
            }
            sim14_summary(&s, &mut sum);
            (run, s.into_parts().2)
        }
        (SimKind::Sim14, ScenarioId::S3) => {
            let mut s = Sim14::new(width, Psi::new(14, f.clone()), f, log)
                .with_policy(policy)
                .with_work_cap(cap);
            let run = exec(&mut s)?;
            sum.p_queries = run.p_queries;
            if opts.inject_overwrite {
                inject(&mut s);
            }
            sim14_summary(&s, &mut sum);
            (run, s.into_parts().2)
        }
        (sim, ScenarioId::S4) => {
            let mut d = Direct::new(Psi::new(sim.rounds(), f), log);
            let run = exec(&mut d)?;
            sum.p_queries = run.p_queries;
            (run, d.into_parts().1)
        }
        (SimKind::Sim6, ScenarioId::S1) => {
            let mut cfg = Sim6Config::for_queries(script.query_count());
            cfg.guard = !opts.guard_disabled;
            cfg.order_seed = opts.random_order.then(|| substream(seed, Stream::Order));
            let mut s = Sim6::new(width, f, Urp::new(width, pseed), cfg, log);
            let run = exec(&mut s)?;
            let c = s.counters();
            sum.p_queries = run.p_queries;
            sum.sim_p_queries = c.sim_perm_queries;
            sum.max_table = (1..=6).map(|k| s.history(k).len()).max().unwrap_or(0);
            sum.perm_entries = s.urp().table().down.len();
            let t = s.transcript().clone();
            (run, t)
        }
        (SimKind::Sim6, _) => unreachable!("rejected by Scenario::new"),
    };
    sum.wall_us = start.elapsed().as_micros() as u64;
    sum.output = run.output;
    sum.f_queries = run.f_queries;
    match &run.halted {
        Some((_, Halt::Abort(_))) => sum.aborted = true,
        Some((_, Halt::Fault(fault))) => sum.fault = Some(fault.to_string()),
        None => {}
    }
    if opts.monitor && scenario.id == ScenarioId::S2 {
        let rep = monitor(&transcript, MonitorConfig::default());
        sum.bad_events = Some(rep.bad.len());
    }
    let invariants = match opts.invariants {
        Some(level) if scenario.sim == SimKind::Sim14 && scenario.id != ScenarioId::S4 => {
            let rep = assert_invariants(&transcript, level.into());
            sum.invariant_failures = rep.failures().join(";");
            Some(rep)
        }
        _ => None,
    };
    Ok(Trial {
        summary: sum,
        run,
        transcript,
        invariants,
    })
}
