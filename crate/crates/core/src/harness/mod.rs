//! Scenarios, trials, paired checks and Monte-Carlo advantage estimation.

mod checks;
mod estimate;
mod invariants;
mod record;
mod trial;

pub use checks::{birthday_distinguisher, coupling_check, tau_check, CouplingCheck, TauCheck};
pub use estimate::{estimate_advantage, run_batch, Estimate, Side};
pub use invariants::{
    assert_invariants, InvariantReport, InvariantResult, Level, ADAPT_COUNT, CONSISTENCY,
    EFFICIENCY, NO_OVERWRITE,
};
pub use record::{replay, Record, RecordHeader, Replay, SCHEMA};
pub use trial::{
    run_trial, trial_randomness, InvariantLevel, Scenario, ScenarioId, SimKind, Trial,
    TrialOptions, TrialSummary, WORK_CAP,
};
