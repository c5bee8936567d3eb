use feistel_indiff::attacks::*;
use feistel_indiff::ideal::{Psi, RandTableF, Urp};
use feistel_indiff::oracle::{Direct, Oracle};
use feistel_indiff::seed::{substream, Stream};
use feistel_indiff::sim6::{Sim6, Sim6Config};
use feistel_indiff::transcript::Transcript;
use feistel_indiff::Width;

fn w16() -> Width {
    Width::new(16).unwrap()
}

fn sim6(w: Width, seed: u64, cfg: Sim6Config) -> Sim6 {
    Sim6::new(
        w,
        RandTableF::seeded(w, substream(seed, Stream::RoundFunctions)),
        Urp::new(w, substream(seed, Stream::Permutation)),
        cfg,
        Transcript::new(w, true),
    )
}

fn real6(w: Width, seed: u64) -> Direct<RandTableF> {
    Direct::new(
        Psi::new(
            6,
            RandTableF::seeded(w, substream(seed, Stream::RoundFunctions)),
        ),
        Transcript::new(w, true),
    )
}

#[test]
fn short_attack_abort_rate() {
    let mut aborts = 0;
    for seed in 0..200 {
        let mut s = sim6(w16(), seed, Sim6Config::for_queries(10));
        let (o, _) = attack6(&mut s, seed);
        aborts += o.is_abort() as u32;
    }
    println!("short attack aborts: {aborts}/200");
    assert!(aborts >= 194);
}

#[test]
fn strong_attack_abort_rate() {
    let mut aborts = 0;
    for seed in 0..200 {
        let mut s = sim6(w16(), seed, Sim6Config::for_queries(45));
        let (o, _) = strong_attack6(&mut s, seed);
        aborts += o.is_abort() as u32;
    }
    println!("strong attack aborts: {aborts}/200");
    assert!(aborts >= 194);
}

#[test]
fn strong_attack_real_world_outputs_one() {
    for seed in 0..200 {
        let mut d = real6(w16(), seed);
        let (o, run) = strong_attack6(&mut d, seed);
        let failed: Vec<_> = run.equations.iter().filter(|e| !e.1).collect();
        assert_eq!(
            o,
            Outcome::Completed { output: true },
            "seed {seed}: {failed:?}"
        );
        assert_eq!(d.queries(), 45);
    }
}
