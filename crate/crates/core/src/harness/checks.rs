//! Paired-seed comparisons between scenarios and the birthday distinguisher.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attacks::{complete_all_chains, Script};
use crate::chain::{monitor, replay_with_h, tau, MonitorConfig};
use crate::error::ConfigError;
use crate::ideal::{Backend, Tsrf, Urp};
use crate::oracle::Oracle;
use crate::seed::{substream, Stream};
use crate::sim14::Sim14;
use crate::transcript::Transcript;
use crate::word::{Pair, Width};

use super::trial::{trial_randomness, WORK_CAP};

/// Result of running a script against `S2(f, p)` and `S3(tau(f, p))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TauCheck {
    pub seed: u64,
    /// No bad event in the `S2` run.
    pub good: bool,
    /// `S2` and `S3` transcripts agree once backend-internal reads are dropped.
    pub identical: bool,
    pub h_len: usize,
    pub f_reads: usize,
    pub p_reads: usize,
    /// Events in the compared transcripts, and the first line where they
    /// differ if they do.
    pub events: usize,
    pub first_difference: Option<usize>,
}

impl TauCheck {
    /// `|h| = #f-reads + 2 * #p-reads`.
    pub fn size_matches(&self) -> bool {
        self.h_len == self.f_reads + 2 * self.p_reads
    }

    pub fn pass(&self) -> bool {
        self.identical && self.size_matches()
    }
}

fn run_script(script: &Script, o: &mut dyn Oracle) {
    // Both sides run the same validated script; a round-count mismatch was
    // rejected before the run.
    let _ = script.run(o);
}

/// Runs `script`, wrapped to complete all its chains, in `S2` with the
/// randomness of `seed`, maps the run through `tau`, replays in `S3` and
/// compares. Without the wrapper a permutation answer need not be
/// reproducible from `h`, since the simulator never adapted its chain.
pub fn tau_check(script: &Script, seed: u64) -> Result<TauCheck, ConfigError> {
    if script.rounds != 14 {
        return Err(ConfigError::Script(format!(
            "tau check needs a 14-round script, got {}",
            script.rounds
        )));
    }
    let script = &complete_all_chains(script);
    let width = script.width;
    let (f, p, _) = trial_randomness(width, seed);
    let run = tau(f, p, |o| run_script(script, o));
    let good = monitor(run.sim.transcript(), MonitorConfig::default()).good();
    let replayed = replay_with_h(width, &run.h, |o| run_script(script, o));
    let a = run.sim.transcript().behaviour_jsonl();
    let b = replayed.transcript().behaviour_jsonl();
    let first_difference = a
        .lines()
        .zip(b.lines())
        .position(|(x, y)| x != y)
        .or_else(|| {
            let (na, nb) = (a.lines().count(), b.lines().count());
            (na != nb).then_some(na.min(nb))
        });
    Ok(TauCheck {
        seed,
        good,
        identical: a == b,
        h_len: run.h.len(),
        f_reads: run.sim.randomness().drawn().len(),
        p_reads: run.sim.backend().p_reads(),
        events: a.lines().count(),
        first_difference,
    })
}

/// Result of running a script against `S1` and `S2` on coupled randomness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CouplingCheck {
    pub seed: u64,
    pub output_s1: bool,
    pub output_s2: bool,
    /// The permutation never redrew an entry and no check diverged.
    pub coupling_intact: bool,
    pub tsrf_overwrites: usize,
}

impl CouplingCheck {
    /// No event separating the two backends occurred.
    pub fn clean(&self) -> bool {
        self.coupling_intact && self.tsrf_overwrites == 0
    }
}

/// Runs `script` in `S1` (permutation) and `S2` (two-sided random function)
/// with the same seed; the backends share their first draws.
pub fn coupling_check(script: &Script, seed: u64) -> Result<CouplingCheck, ConfigError> {
    let width = script.width;
    let (f, p, pseed) = trial_randomness(width, seed);
    let mut s1 = Sim14::new(
        width,
        Urp::new(width, pseed),
        f.clone(),
        Transcript::new(width, false),
    )
    .with_work_cap(WORK_CAP);
    let out1 = script.run(&mut s1)?.output;
    let mut s2 =
        Sim14::new(width, Tsrf::new(p), f, Transcript::new(width, false)).with_work_cap(WORK_CAP);
    let out2 = script.run(&mut s2)?.output;
    Ok(CouplingCheck {
        seed,
        output_s1: out1,
        output_s2: out2,
        coupling_intact: s1.backend().coupling_intact(),
        tsrf_overwrites: s2.backend().overwrites(),
    })
}

/// Distinguisher for a permutation against a two-sided random function.
///
/// Makes `q` queries to `backend`: the first three quarters alternate
/// forward queries on random inputs and backward queries on random outputs,
/// the rest check earlier observed pairs. Outputs 1 when the observed
/// relation is not a partial bijection (two inputs share an output, or one
/// input gets two outputs) or a check of an observed pair fails. A
/// permutation never triggers either; a two-sided random function does on
/// collisions and overwrites.
pub fn birthday_distinguisher<B: Backend>(
    backend: &mut B,
    width: Width,
    q: usize,
    seed: u64,
) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, Stream::Birthday));
    let mut log = Transcript::new(width, false);
    let mut fwd: HashMap<Pair, Pair> = HashMap::new();
    let mut bwd: HashMap<Pair, Pair> = HashMap::new();
    let mut seen: Vec<(Pair, Pair)> = Vec::new();
    let probes = q - q / 4;
    let random_pair = |rng: &mut ChaCha8Rng| (width.word(rng.gen()), width.word(rng.gen()));
    for t in 0..probes {
        let (x, y) = if t % 2 == 0 {
            let x = random_pair(&mut rng);
            match backend.forward(x, &mut log) {
                Ok(y) => (x, y),
                Err(_) => return true,
            }
        } else {
            let y = random_pair(&mut rng);
            match backend.backward(y, &mut log) {
                Ok(x) => (x, y),
                Err(_) => return true,
            }
        };
        if fwd.get(&x).is_some_and(|&old| old != y) || bwd.get(&y).is_some_and(|&old| old != x) {
            return true;
        }
        fwd.insert(x, y);
        bwd.insert(y, x);
        seen.push((x, y));
    }
    for (x, y) in seen.into_iter().take(q - probes) {
        if !backend.check(x, y, &mut log).unwrap_or(false) {
            return true;
        }
    }
    false
}
