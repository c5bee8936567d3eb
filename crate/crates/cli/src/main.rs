//! `feistel-indiff`: batch experiments with JSON on stdout.
//!
//! Exit codes: 0 when every threshold holds, 1 when one fails, 2 on a
//! configuration error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use feistel_indiff::attacks::{attack6_script, random_distinguisher, strong_attack_script, Script};
use feistel_indiff::harness::{
    birthday_distinguisher, estimate_advantage, replay, run_batch, run_trial, tau_check,
    InvariantLevel, Record, Scenario, ScenarioId, Side, SimKind, TrialOptions, TrialSummary,
    ADAPT_COUNT, CONSISTENCY, EFFICIENCY, NO_OVERWRITE, SCHEMA,
};
use feistel_indiff::ideal::{RandTableP, Tsrf, Urp};
use feistel_indiff::seed::{substream, Stream};
use feistel_indiff::{ConfigError, Width};

#[derive(Parser)]
#[command(
    name = "feistel-indiff",
    version,
    about = "Feistel indifferentiability experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Word width in bits.
    #[arg(long, default_value_t = 16)]
    n: u32,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Base seed of the batch.
    #[arg(long, env = "FEISTEL_INDIFF_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write one row per trial to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sim {
    Sim14,
    Sim6,
}

impl From<Sim> for SimKind {
    fn from(s: Sim) -> SimKind {
        match s {
            Sim::Sim14 => SimKind::Sim14,
            Sim::Sim6 => SimKind::Sim6,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Basic,
    Consistency,
    Full,
}

impl From<LevelArg> for InvariantLevel {
    fn from(l: LevelArg) -> InvariantLevel {
        match l {
            LevelArg::Basic => InvariantLevel::Basic,
            LevelArg::Consistency => InvariantLevel::Consistency,
            LevelArg::Full => InvariantLevel::Full,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Abort rate of the short attack on the six-round simulator.
    Attack6 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.97)]
        min_abort_rate: f64,
        /// Skip the completed-tuple guard.
        #[arg(long)]
        guard_disabled: bool,
        /// Iterate chain sets in seeded random order.
        #[arg(long)]
        random_order: bool,
    },
    /// Abort rate of the stronger attack, plus its output in the real world.
    Attack6Strong {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.97)]
        min_abort_rate: f64,
        #[arg(long)]
        guard_disabled: bool,
        #[arg(long)]
        random_order: bool,
    },
    /// Advantage of random (or given) scripts between two scenarios.
    IndiffMc {
        #[command(flatten)]
        common: Common,
        /// Distinguisher query budget.
        #[arg(long, default_value_t = 4)]
        q: usize,
        #[arg(long, default_value = "S1")]
        scenario_a: String,
        #[arg(long, default_value = "S4")]
        scenario_b: String,
        #[arg(long, value_enum, default_value = "sim14")]
        sim: Sim,
        /// JSON-lines file of scripts, used round-robin by trial seed.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        complete_chains: bool,
        #[arg(long, default_value_t = 0.05)]
        max_advantage: f64,
    },
    /// Batch invariant checks on the 14-round simulator.
    Invariants {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        q: usize,
        #[arg(long, default_value = "S2")]
        scenario: String,
        #[arg(long, value_enum, default_value = "basic")]
        level: LevelArg,
        /// Run the bad-event monitor; overwrite and consistency failures
        /// then count only in good runs.
        #[arg(long)]
        monitor: bool,
        #[arg(long)]
        complete_chains: bool,
        #[arg(long)]
        fault_fast: bool,
        /// Force one conflicting round value after each run.
        #[arg(long)]
        inject_overwrite: bool,
        /// Minimum fraction of monitored-good runs.
        #[arg(long, default_value_t = 0.99)]
        min_good: f64,
    },
    /// Compares S2(f, p) with S3(tau(f, p)) on monitored-good seeds.
    TauCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        q: usize,
        /// Stop after this many good seeds (`--trials` caps the seeds tried).
        #[arg(long, default_value_t = 200)]
        good: usize,
    },
    /// Birthday distinguisher between a permutation and a two-sided random
    /// function.
    UrpVsTsrf {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        q: usize,
    },
    /// Stores one trial as a replayable record.
    Record {
        #[arg(long, default_value_t = 12)]
        n: u32,
        #[arg(long, default_value_t = 6)]
        q: usize,
        #[arg(long, env = "FEISTEL_INDIFF_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "S2")]
        scenario: String,
        #[arg(long, value_enum, default_value = "sim14")]
        sim: Sim,
        /// Script JSON file; a random script is generated otherwise.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long)]
        complete_chains: bool,
        #[arg(long)]
        monitor: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reruns a stored record and compares its transcript byte for byte.
    Replay { path: PathBuf },
}

/// A failure to configure, as opposed to a failed threshold.
struct Config(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Config {
    fn from(e: E) -> Self {
        Config(e.into())
    }
}

type Outcome = Result<(Value, bool), Config>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok((out, pass)) => {
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd) -> Outcome {
    let jobs = match &cmd {
        Cmd::Attack6 { common, .. }
        | Cmd::Attack6Strong { common, .. }
        | Cmd::IndiffMc { common, .. }
        | Cmd::Invariants { common, .. }
        | Cmd::TauCheck { common, .. }
        | Cmd::UrpVsTsrf { common, .. } => common.jobs,
        _ => None,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(anyhow::anyhow!("--jobs must be at least 1").into());
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build()?;
    pool.install(|| run(cmd))
}

fn width(n: u32) -> Result<Width, ConfigError> {
    Width::new(n)
}

fn scenario(id: &str, sim: SimKind) -> Result<Scenario, ConfigError> {
    Scenario::new(id.parse()?, sim)
}

fn write_csv(path: &Option<PathBuf>, rows: &[TrialSummary]) -> Result<(), Config> {
    if let Some(p) = path {
        let mut w =
            csv::Writer::from_path(p).with_context(|| format!("opening {}", p.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn header(command: &str, c: &Common) -> Value {
    json!({ "schema": SCHEMA, "command": command, "n": c.n, "trials": c.trials, "seed": c.seed })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Attack6 {
            common,
            min_abort_rate,
            guard_disabled,
            random_order,
        } => attack(common, false, min_abort_rate, guard_disabled, random_order),
        Cmd::Attack6Strong {
            common,
            min_abort_rate,
            guard_disabled,
            random_order,
        } => attack(common, true, min_abort_rate, guard_disabled, random_order),
        Cmd::IndiffMc {
            common,
            q,
            scenario_a,
            scenario_b,
            sim,
            corpus,
            complete_chains,
            max_advantage,
        } => indiff_mc(
            common,
            q,
            &scenario_a,
            &scenario_b,
            sim.into(),
            corpus,
            complete_chains,
            max_advantage,
        ),
        Cmd::Invariants {
            common,
            q,
            scenario: sc,
            level,
            monitor,
            complete_chains,
            fault_fast,
            inject_overwrite,
            min_good,
        } => {
            let opts = TrialOptions {
                monitor,
                invariants: Some(level.into()),
                complete_chains,
                fault_fast,
                inject_overwrite,
                ..Default::default()
            };
            invariants(common, q, &sc, opts, min_good)
        }
        Cmd::TauCheck { common, q, good } => tau(common, q, good),
        Cmd::UrpVsTsrf { common, q } => urp_vs_tsrf(common, q),
        Cmd::Record {
            n,
            q,
            seed,
            scenario: sc,
            sim,
            script,
            complete_chains,
            monitor,
            out,
        } => {
            let w = width(n)?;
            let sc = scenario(&sc, sim.into())?;
            let script = match script {
                Some(p) => Script::from_json(&read(&p)?)?,
                None => random_distinguisher(w, sc.rounds(), q.max(1), seed),
            };
            let opts = TrialOptions {
                complete_chains,
                monitor,
                ..Default::default()
            };
            let rec = Record::capture(sc, &script, seed, opts)?;
            fs::write(&out, rec.to_text()).with_context(|| format!("writing {}", out.display()))?;
            let events = rec.events.lines().count();
            Ok((
                json!({ "schema": SCHEMA, "command": "record", "path": out, "events": events }),
                true,
            ))
        }
        Cmd::Replay { path } => {
            let rec = Record::parse(&read(&path)?)?;
            let r = replay(&rec)?;
            let pass = r.identical;
            Ok((
                json!({ "schema": SCHEMA, "command": "replay", "replay": r }),
                pass,
            ))
        }
    }
}

fn read(p: &Path) -> Result<String, Config> {
    Ok(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
}

fn check_trials(c: &Common, min: usize) -> Result<(), Config> {
    if c.trials < min {
        return Err(anyhow::anyhow!("--trials must be at least {min}").into());
    }
    Ok(())
}

fn attack(
    c: Common,
    strong: bool,
    min_rate: f64,
    guard_disabled: bool,
    random_order: bool,
) -> Outcome {
    let w = width(c.n)?;
    check_trials(&c, 1)?;
    let sim = Scenario::new(ScenarioId::S1, SimKind::Sim6)?;
    let real = Scenario::new(ScenarioId::S4, SimKind::Sim6)?;
    let opts = TrialOptions {
        guard_disabled,
        random_order,
        ..Default::default()
    };
    let script = |seed| {
        if strong {
            strong_attack_script(w, seed)
        } else {
            attack6_script(w, seed)
        }
    };
    let rows = run_batch(c.trials, c.seed, |_, seed| {
        run_trial(sim, &script(seed), seed, opts).map(|t| t.summary)
    });
    let rows: Vec<TrialSummary> = rows.into_iter().collect::<Result<_, _>>()?;
    write_csv(&c.csv, &rows)?;
    let aborts = rows.iter().filter(|r| r.aborted).count();
    let rate = aborts as f64 / c.trials as f64;
    let mut pass = rate >= min_rate;
    let mut out = merge(
        header(if strong { "attack6-strong" } else { "attack6" }, &c),
        json!({
            "aborts": aborts,
            "abort_rate": rate,
            "min_abort_rate": min_rate,
            "faults": rows.iter().filter(|r| r.fault.is_some()).count(),
            "mean_sim_p_queries": rows.iter().map(|r| r.sim_p_queries as f64).sum::<f64>() / c.trials as f64,
        }),
    );
    if strong {
        let ones: usize = run_batch(c.trials, c.seed, |_, seed| {
            run_trial(real, &script(seed), seed, TrialOptions::default()).map(|t| t.summary.output)
        })
        .into_iter()
        .collect::<Result<Vec<bool>, _>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
        pass &= ones == c.trials;
        out = merge(out, json!({ "real_world_ones": ones }));
    }
    Ok((merge(out, json!({ "pass": pass })), pass))
}

fn load_corpus(path: &Path, w: Width, rounds: u8) -> Result<Vec<Script>, Config> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
    {
        let s = Script::from_json(line).with_context(|| format!("corpus line {}", i + 1))?;
        if s.width != w || s.rounds != rounds {
            return Err(anyhow::anyhow!(
                "corpus line {}: script is for n={} r={}",
                i + 1,
                s.width.bits(),
                s.rounds
            )
            .into());
        }
        out.push(s);
    }
    if out.is_empty() {
        return Err(anyhow::anyhow!("corpus {} is empty", path.display()).into());
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn indiff_mc(
    c: Common,
    q: usize,
    a: &str,
    b: &str,
    sim: SimKind,
    corpus: Option<PathBuf>,
    complete_chains: bool,
    max_adv: f64,
) -> Outcome {
    let w = width(c.n)?;
    check_trials(&c, 100)?;
    if q == 0 {
        return Err(anyhow::anyhow!("--q must be at least 1").into());
    }
    let (sa, sb) = (scenario(a, sim)?, scenario(b, sim)?);
    let corpus = corpus
        .map(|p| load_corpus(&p, w, sim.rounds()))
        .transpose()?;
    let script = |seed: u64| match &corpus {
        Some(list) => list[(seed % list.len() as u64) as usize].clone(),
        None => random_distinguisher(w, sim.rounds(), 1 + (seed % q as u64) as usize, seed),
    };
    let opts = TrialOptions {
        complete_chains,
        ..Default::default()
    };
    let est = estimate_advantage(c.trials, c.seed, |side, seed| {
        let s = if side == Side::A { sa } else { sb };
        run_trial(s, &script(seed), seed, opts)
            .map(|t| t.summary.output)
            .unwrap_or(false)
    })?;
    if c.csv.is_some() {
        let rows = run_batch(c.trials, substream(c.seed, Stream::SideA), |_, seed| {
            run_trial(sa, &script(seed), seed, opts).map(|t| t.summary)
        });
        write_csv(&c.csv, &rows.into_iter().collect::<Result<Vec<_>, _>>()?)?;
    }
    let pass = est.estimate <= max_adv;
    let out = merge(
        header("indiff-mc", &c),
        json!({
            "q": q,
            "scenario_a": sa.to_string(),
            "scenario_b": sb.to_string(),
            "estimate": est,
            "max_advantage": max_adv,
            "pass": pass,
        }),
    );
    Ok((out, pass))
}

fn invariants(c: Common, q: usize, sc: &str, opts: TrialOptions, min_good: f64) -> Outcome {
    let w = width(c.n)?;
    check_trials(&c, 1)?;
    if q == 0 {
        return Err(anyhow::anyhow!("--q must be at least 1").into());
    }
    if opts.monitor && c.n > 16 {
        return Err(anyhow::anyhow!("the monitor supports n <= 16").into());
    }
    let sc = scenario(sc, SimKind::Sim14)?;
    if sc.id == ScenarioId::S4 {
        return Err(anyhow::anyhow!("S4 has no simulator to check").into());
    }
    if opts.monitor && sc.id != ScenarioId::S2 {
        return Err(anyhow::anyhow!("the monitor needs scenario S2").into());
    }
    let trials = run_batch(c.trials, c.seed, |i, seed| {
        let script = random_distinguisher(w, 14, 1 + i % q, seed);
        run_trial(sc, &script, seed, opts)
            .map(|t| (t.summary, t.invariants.expect("invariants requested")))
    });
    let trials: Vec<_> = trials.into_iter().collect::<Result<_, _>>()?;
    let rows: Vec<TrialSummary> = trials.iter().map(|(s, _)| s.clone()).collect();
    write_csv(&c.csv, &rows)?;
    let good = trials
        .iter()
        .filter(|(s, _)| s.good() != Some(false))
        .count();
    let mut tally = serde_json::Map::new();
    let mut pass = true;
    for name in [EFFICIENCY, NO_OVERWRITE, CONSISTENCY, ADAPT_COUNT] {
        // Efficiency is unconditional; the rest hold in good runs.
        let counted: Vec<_> = trials
            .iter()
            .filter(|(s, _)| name == EFFICIENCY || s.good() != Some(false))
            .filter_map(|(_, r)| r.get(name))
            .collect();
        if counted.is_empty() && trials.iter().all(|(_, r)| r.get(name).is_none()) {
            continue;
        }
        let failed: Vec<_> = counted.iter().filter(|r| !r.pass).collect();
        pass &= failed.is_empty();
        tally.insert(
            name.into(),
            json!({
                "checked": counted.len(),
                "failed": failed.len(),
                "first_witness": failed.first().and_then(|r| r.witnesses.first()),
            }),
        );
    }
    let good_fraction = good as f64 / c.trials as f64;
    if opts.monitor {
        pass &= good_fraction >= min_good;
    }
    let out = merge(
        header("invariants", &c),
        json!({
            "q": q,
            "scenario": sc.to_string(),
            "monitored": opts.monitor,
            "good": opts.monitor.then_some(good),
            "good_fraction": opts.monitor.then_some(good_fraction),
            "min_good": opts.monitor.then_some(min_good),
            "invariants": tally,
            "pass": pass,
        }),
    );
    Ok((out, pass))
}

fn tau(c: Common, q: usize, want: usize) -> Outcome {
    let w = width(c.n)?;
    check_trials(&c, 1)?;
    if q == 0 {
        return Err(anyhow::anyhow!("--q must be at least 1").into());
    }
    if c.n > 16 {
        return Err(anyhow::anyhow!("the monitor supports n <= 16").into());
    }
    let checks = run_batch(c.trials, c.seed, |i, seed| {
        tau_check(&random_distinguisher(w, 14, 1 + i % q, seed), seed)
    });
    let checks: Vec<_> = checks.into_iter().collect::<Result<_, _>>()?;
    let good: Vec<_> = checks.iter().filter(|t| t.good).take(want).collect();
    let seeds_tried = checks
        .iter()
        .filter(|t| t.good)
        .nth(want.saturating_sub(1))
        .map_or(checks.len(), |t| {
            checks
                .iter()
                .position(|u| u.seed == t.seed)
                .map_or(checks.len(), |p| p + 1)
        });
    let failed: Vec<_> = good.iter().filter(|t| !t.pass()).map(|t| t.seed).collect();
    let pass = good.len() == want && failed.is_empty();
    let out = merge(
        header("tau-check", &c),
        json!({
            "q": q,
            "wanted_good": want,
            "good": good.len(),
            "seeds_tried": seeds_tried,
            "identical": good.iter().filter(|t| t.identical).count(),
            "size_matches": good.iter().filter(|t| t.size_matches()).count(),
            "failed_seeds": failed,
            "pass": pass,
        }),
    );
    Ok((out, pass))
}

fn urp_vs_tsrf(c: Common, q: usize) -> Outcome {
    let w = width(c.n)?;
    check_trials(&c, 100)?;
    if q < 2 {
        return Err(anyhow::anyhow!("--q must be at least 2").into());
    }
    let est = estimate_advantage(c.trials, c.seed, |side, seed| {
        let ps = substream(seed, Stream::Permutation);
        match side {
            Side::A => birthday_distinguisher(&mut Urp::new(w, ps), w, q, seed),
            Side::B => {
                birthday_distinguisher(&mut Tsrf::new(RandTableP::seeded(w, ps)), w, q, seed)
            }
        }
    })?;
    let bound = 6.0 * (q * q) as f64 / 2f64.powi(2 * c.n as i32);
    let limit = bound + 3.0 * est.stderr;
    let pass = est.estimate <= limit;
    let out = merge(
        header("urp-vs-tsrf", &c),
        json!({ "q": q, "estimate": est, "bound": bound, "limit": limit, "pass": pass }),
    );
    Ok((out, pass))
}
