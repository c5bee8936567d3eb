//! The map from a randomness pair `(f, p)` to a partial round table `h`.
//!
//! Run the simulator with explicit randomness against the two-sided random
//! function; `h(i, x)` is `f(i, x)` where the run read it, otherwise the first
//! value forced at `(i, x)`, otherwise unused.

use std::rc::Rc;

use crate::ideal::{PartialH, Psi, RandTableF, RandTableP, SharedH, Tsrf};
use crate::oracle::Oracle;
use crate::sim14::Sim14;
use crate::transcript::Transcript;
use crate::word::Width;

/// The simulator run behind `tau` and its image.
pub struct TauRun {
    pub sim: Sim14<Tsrf, RandTableF>,
    pub h: PartialH,
}

impl TauRun {
    /// Extracts the partial table from a finished run.
    pub fn image(sim: &Sim14<Tsrf, RandTableF>) -> PartialH {
        let mut h = PartialH::new();
        for (&(i, x), &y) in sim.randomness().drawn() {
            h.define(i, x, y);
        }
        for (&(i, x), &y) in sim.first_forced() {
            h.define(i, x, y);
        }
        h
    }
}

/// Runs `dist` against the simulator with explicit `(f, p)` and returns the
/// run together with `h = tau(f, p)`.
pub fn tau(f: RandTableF, p: RandTableP, dist: impl FnOnce(&mut dyn Oracle)) -> TauRun {
    let width = f.width();
    let mut sim = Sim14::new(width, Tsrf::new(p), f, Transcript::new(width, true));
    dist(&mut sim);
    let h = TauRun::image(&sim);
    TauRun { sim, h }
}

/// Runs `dist` against the simulator and the 14-round Feistel construction,
/// both reading round values from the partial table `h`.
pub fn replay_with_h(
    width: Width,
    h: &PartialH,
    dist: impl FnOnce(&mut dyn Oracle),
) -> Sim14<Psi<SharedH>, SharedH> {
    let shared = SharedH(Rc::new(h.clone()));
    let mut sim = Sim14::new(
        width,
        Psi::new(14, shared.clone()),
        shared,
        Transcript::new(width, true),
    );
    dist(&mut sim);
    sim
}
