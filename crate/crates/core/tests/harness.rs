use feistel_indiff::attacks::{random_distinguisher, strong_attack_script, Builder, Predicate};
use feistel_indiff::harness::*;
use feistel_indiff::ideal::{RandTableP, Tsrf, Urp};
use feistel_indiff::seed::{substream, trial_seed, Stream};
use feistel_indiff::transcript::Transcript;
use feistel_indiff::Width;

fn w(n: u32) -> Width {
    Width::new(n).unwrap()
}

fn sc(id: ScenarioId) -> Scenario {
    Scenario::new(id, SimKind::Sim14).unwrap()
}

#[test]
fn empty_transcript_passes_every_invariant() {
    let rep = assert_invariants(&Transcript::new(w(8), true), Level::Full);
    assert_eq!(rep.results.len(), 4);
    assert!(rep.all_pass());
}

#[test]
fn injected_overwrite_fails_with_witness() {
    let script = random_distinguisher(w(8), 14, 4, 3);
    let opts = TrialOptions {
        inject_overwrite: true,
        invariants: Some(InvariantLevel::Basic),
        ..Default::default()
    };
    let t = run_trial(sc(ScenarioId::S2), &script, 3, opts).unwrap();
    let r = t.invariants.unwrap();
    let nw = r.get(NO_OVERWRITE).unwrap();
    assert!(!nw.pass);
    assert_eq!(nw.witnesses.len(), 1);
    assert!(nw.witnesses[0].contains("forceVal"), "{}", nw.witnesses[0]);
    assert_eq!(t.summary.overwrites, 1);
    assert_eq!(t.summary.invariant_failures, NO_OVERWRITE);
}

#[test]
fn sim6_rejects_scenarios_without_a_six_round_counterpart() {
    assert!(Scenario::new(ScenarioId::S2, SimKind::Sim6).is_err());
    assert!(Scenario::new(ScenarioId::S3, SimKind::Sim6).is_err());
    assert!(Scenario::new(ScenarioId::S1, SimKind::Sim6).is_ok());
}

#[test]
fn round_count_mismatch_is_a_config_error() {
    let script = random_distinguisher(w(8), 6, 3, 1);
    assert!(run_trial(sc(ScenarioId::S1), &script, 1, TrialOptions::default()).is_err());
}

#[test]
fn real_world_never_aborts() {
    for seed in 0..50 {
        let script = random_distinguisher(w(8), 14, 6, seed);
        let t = run_trial(sc(ScenarioId::S4), &script, seed, TrialOptions::default()).unwrap();
        assert!(!t.summary.aborted);
        assert_eq!(t.summary.fault, None);
        let s6 = Scenario::new(ScenarioId::S4, SimKind::Sim6).unwrap();
        let t = run_trial(
            s6,
            &strong_attack_script(w(8), seed),
            seed,
            TrialOptions::default(),
        )
        .unwrap();
        assert!(!t.summary.aborted);
    }
}

#[test]
fn trials_are_deterministic() {
    for id in [
        ScenarioId::S1,
        ScenarioId::S2,
        ScenarioId::S3,
        ScenarioId::S4,
    ] {
        for seed in 0..10 {
            let script = random_distinguisher(w(10), 14, 5, seed);
            let opts = TrialOptions {
                record: true,
                complete_chains: true,
                ..Default::default()
            };
            let a = run_trial(sc(id), &script, seed, opts).unwrap();
            let b = run_trial(sc(id), &script, seed, opts).unwrap();
            assert_eq!(a.summary.stable(), b.summary.stable());
            assert_eq!(a.transcript.to_jsonl(), b.transcript.to_jsonl());
            assert!(!a.transcript.is_empty());
        }
    }
}

#[test]
fn summary_counts_match_the_transcript() {
    for seed in 0..20 {
        let script = random_distinguisher(w(12), 14, 6, seed);
        let opts = TrialOptions {
            record: true,
            ..Default::default()
        };
        let t = run_trial(sc(ScenarioId::S2), &script, seed, opts).unwrap();
        let fq = t
            .transcript
            .events()
            .iter()
            .filter(|e| matches!(e, feistel_indiff::transcript::Event::FQuery { .. }))
            .count();
        // Round-function queries are logged on success only.
        assert!(fq as u64 <= t.summary.f_queries);
        assert_eq!(
            t.summary.f_queries + t.summary.p_queries,
            script.query_count() as u64
        );
    }
}

#[test]
fn coupled_backends_agree_when_no_separating_event_occurs() {
    let mut clean = 0;
    for seed in 0..300 {
        let q = 1 + (seed as usize % 16);
        let script = random_distinguisher(w(8), 14, q, seed);
        let c = coupling_check(&script, seed).unwrap();
        if c.clean() {
            clean += 1;
            assert_eq!(c.output_s1, c.output_s2, "seed {seed}");
        }
    }
    println!("clean coupled runs: {clean}/300");
    assert!(clean >= 150);
}

#[test]
fn tau_round_trip_on_good_seeds() {
    let mut good = 0;
    for seed in 0..60 {
        let script = random_distinguisher(w(16), 14, 1 + seed as usize % 4, seed);
        let c = tau_check(&script, seed).unwrap();
        if c.good {
            good += 1;
            assert!(
                c.identical,
                "seed {seed}: first difference at {:?}",
                c.first_difference
            );
            assert!(c.size_matches(), "seed {seed}: {c:?}");
        }
    }
    assert!(good >= 55);
}

#[test]
fn same_scenario_both_sides_is_within_noise() {
    let est = estimate_advantage(400, 11, |_, seed| {
        let script = random_distinguisher(w(8), 14, 3, seed);
        run_trial(sc(ScenarioId::S4), &script, seed, TrialOptions::default())
            .unwrap()
            .summary
            .output
    })
    .unwrap();
    assert!(est.estimate <= 3.0 * est.stderr, "{est:?}");
}

#[test]
fn too_few_trials_is_a_config_error() {
    assert!(estimate_advantage(99, 0, |_, _| true).is_err());
}

#[test]
fn estimator_matches_binomial_on_a_coin_flip_null() {
    // Both sides are fair coins keyed by the trial seed; the standardized
    // estimate should look like |N(0, 1)|.
    let batches = 300;
    let mut beyond2 = 0;
    let mut sum_pa = 0.0;
    for b in 0..batches {
        let est = estimate_advantage(200, trial_seed(99, b), |_, seed| seed & 1 == 1).unwrap();
        sum_pa += est.p_a;
        if est.estimate > 2.0 * est.stderr {
            beyond2 += 1;
        }
    }
    let mean = sum_pa / batches as f64;
    assert!((mean - 0.5).abs() < 0.01, "mean p_a {mean}");
    // P(|Z| > 2) is about 4.6%.
    assert!(beyond2 <= 30, "{beyond2} of {batches} beyond 2 sigma");
}

#[test]
fn estimator_seeds_are_disjoint_between_sides() {
    use std::collections::HashSet;
    use std::sync::Mutex;
    let seen = Mutex::new((HashSet::new(), HashSet::new()));
    estimate_advantage(500, 5, |side, seed| {
        let mut s = seen.lock().unwrap();
        match side {
            Side::A => s.0.insert(seed),
            Side::B => s.1.insert(seed),
        };
        true
    })
    .unwrap();
    let (a, b) = seen.into_inner().unwrap();
    assert_eq!(a.len(), 500);
    assert_eq!(b.len(), 500);
    assert!(a.is_disjoint(&b));
}

#[test]
fn strong_attack_separates_simulated_and_real_worlds() {
    let width = w(16);
    let sim6 = Scenario::new(ScenarioId::S1, SimKind::Sim6).unwrap();
    let real = Scenario::new(ScenarioId::S4, SimKind::Sim6).unwrap();
    let est = estimate_advantage(200, 21, |side, seed| {
        let script = strong_attack_script(width, seed);
        let s = if side == Side::A { sim6 } else { real };
        run_trial(s, &script, seed, TrialOptions::default())
            .unwrap()
            .summary
            .output
    })
    .unwrap();
    assert!(est.estimate >= 0.9, "{est:?}");
}

#[test]
fn birthday_distinguisher_never_fires_on_a_permutation() {
    let width = w(4);
    for seed in 0..2000 {
        let mut urp = Urp::new(width, substream(seed, Stream::Permutation));
        assert!(!birthday_distinguisher(&mut urp, width, 16, seed));
    }
}

#[test]
fn birthday_distinguisher_fires_on_two_sided_random_function_at_tiny_width() {
    // At n = 2 the domain has 16 points, so collisions are frequent.
    let width = w(2);
    let hits = (0..500u64)
        .filter(|&seed| {
            let mut t = Tsrf::new(RandTableP::seeded(
                width,
                substream(seed, Stream::Permutation),
            ));
            birthday_distinguisher(&mut t, width, 16, seed)
        })
        .count();
    assert!(hits > 250, "{hits}/500");
}

#[test]
fn record_replays_byte_identically() {
    for (i, id) in [
        ScenarioId::S1,
        ScenarioId::S2,
        ScenarioId::S3,
        ScenarioId::S4,
    ]
    .into_iter()
    .enumerate()
    {
        let seed = 40 + i as u64;
        let script = random_distinguisher(w(12), 14, 6, seed);
        let opts = TrialOptions {
            complete_chains: true,
            monitor: id == ScenarioId::S2,
            ..Default::default()
        };
        let rec = Record::capture(sc(id), &script, seed, opts).unwrap();
        let text = rec.to_text();
        let parsed = Record::parse(&text).unwrap();
        assert_eq!(parsed, rec);
        let r = replay(&parsed).unwrap();
        assert!(r.identical, "{id:?}: {:?}", r.first_difference);
        assert_eq!(r.summary, replay(&parsed).unwrap().summary);
    }
}

#[test]
fn tampered_record_is_reported() {
    let script = random_distinguisher(w(8), 14, 4, 2);
    let rec = Record::capture(sc(ScenarioId::S2), &script, 2, TrialOptions::default()).unwrap();
    let mut lines: Vec<String> = rec.events.lines().map(String::from).collect();
    lines[1] = lines[1].replacen("\"", "\" ", 1);
    let tampered = Record {
        events: lines.join("\n") + "\n",
        ..rec.clone()
    };
    let r = replay(&tampered).unwrap();
    assert!(!r.identical);
    assert_eq!(r.first_difference, Some(2));
    let truncated = Record {
        events: rec
            .events
            .lines()
            .take(3)
            .map(|l| format!("{l}\n"))
            .collect(),
        ..rec
    };
    assert_eq!(replay(&truncated).unwrap().first_difference, Some(4));
}

#[test]
fn record_with_wrong_schema_is_rejected() {
    let script = Builder::new(w(4), 14).finish(Predicate::Always);
    let rec = Record::capture(sc(ScenarioId::S4), &script, 0, TrialOptions::default()).unwrap();
    let text = rec
        .to_text()
        .replacen("\"schema\":\"1\"", "\"schema\":\"2\"", 1);
    assert!(Record::parse(&text).is_err());
    assert!(Record::parse("not json").is_err());
}

#[test]
fn batches_are_ordered_and_reproducible() {
    let a = run_batch(64, 7, |i, seed| (i, seed));
    let b = run_batch(64, 7, |i, seed| (i, seed));
    assert_eq!(a, b);
    assert!(a
        .iter()
        .enumerate()
        .all(|(i, &(j, s))| i == j && s == trial_seed(7, i as u64)));
}
