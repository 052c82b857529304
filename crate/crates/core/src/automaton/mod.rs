//! The field-conditioned flip automaton.
//!
//! Each phase applies NOT to every spin of one species whose neighbor field
//! (up neighbors minus down neighbors) lies in the phase's field set. Phases
//! alternate B, A, B, ... so that a `+1` apex grows a fully polarized pyramid
//! one layer per phase, while a `−1` apex leaves the lattice untouched.

mod ideal;
mod kernel;
mod rules;
mod state;
mod trace;

pub use ideal::{
    layers_up_count, predicted_flip_count, run_ideal, run_phases, IdealRun, RunOptions,
    MAX_PREDICTED_STAGES,
};
pub use kernel::{Automaton, Gate, PerfectGate, PhaseStats, StateGuard};
pub use rules::{BoundaryMode, FieldSet, PulsePhase, ScanMode};
pub use state::{Spin, SpinState};
pub use trace::{PhaseRecord, RunTrace};
