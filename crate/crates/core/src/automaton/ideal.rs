use serde::{Deserialize, Serialize};

use super::kernel::{Automaton, Gate, PerfectGate};
use super::rules::{BoundaryMode, FieldSet, PulsePhase, ScanMode};
use super::state::{Spin, SpinState};
use super::trace::RunTrace;
use crate::lattice::PyramidLattice;
use crate::{Error, Result};

/// Largest stage count accepted by [`predicted_flip_count`].
pub const MAX_PREDICTED_STAGES: u64 = 2_000_000;

/// Rule and scan settings shared by ideal and noisy runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub fields: FieldSet,
    pub boundary: BoundaryMode,
    pub scan: ScanMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            fields: FieldSet::standard(),
            boundary: BoundaryMode::Embedded,
            scan: ScanMode::Restricted,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IdealRun {
    pub trace: RunTrace,
    pub state: SpinState,
}

/// `(n+1)·n·(n−1)/6`: up spins after `n` stages as counted in the original
/// analysis. This equals the first `n − 1` layers; see [`layers_up_count`]
/// for the first `n`.
pub fn predicted_flip_count(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("stage count must be at least 1".into()));
    }
    if n > MAX_PREDICTED_STAGES {
        return Err(Error::Domain(format!(
            "stage count {n} exceeds the overflow guard of {MAX_PREDICTED_STAGES}"
        )));
    }
    Ok((n + 1) * n * (n - 1) / 6)
}

/// Sites in the first `n` layers, `n(n+1)(n+2)/6`.
pub fn layers_up_count(n: u64) -> u64 {
    crate::lattice::tetrahedral(n)
}

/// Drives `automaton` through phases `first..first + count` (one-based
/// numbering, B on odd phases), appending to `trace`.
pub fn run_phases<G: Gate>(
    automaton: &mut Automaton<'_>,
    fields: FieldSet,
    first: u64,
    count: u64,
    trace: &mut RunTrace,
    mut gate_for: impl FnMut(u64) -> G,
) {
    for k in first..first + count {
        let phase = PulsePhase::new(PulsePhase::species_for(k), fields);
        let mut gate = gate_for(k);
        let stats = automaton.run_phase_with(&phase, &mut gate);
        trace.push(k, phase.species, stats.flips, automaton.up_count());
    }
}

/// Noiseless run from the all-down state with the apex set to `seed`.
pub fn run_ideal(
    lattice: &PyramidLattice,
    seed: Spin,
    phases: u64,
    options: &RunOptions,
) -> IdealRun {
    let mut a = Automaton::new(lattice, options.boundary, options.scan);
    a.seed_apex(seed);
    let mut trace = RunTrace::new(lattice.site_count(), options.fields.len() as u64);
    run_phases(&mut a, options.fields, 1, phases, &mut trace, |_| PerfectGate);
    IdealRun {
        trace,
        state: a.into_state(),
    }
}
