use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{class_histogram, ClassCounts};
use super::diffusion::{check_probability, diffuse, randomize_initial, Diffuser};
use super::rng::{stream_rng, NoisyGate, Stream};
use crate::automaton::{
    run_ideal, run_phases, Automaton, BoundaryMode, FieldSet, RunOptions, RunTrace, ScanMode, Spin,
    SpinState,
};
use crate::lattice::{LatticeGeometry, PyramidLattice, DEFAULT_STATE_BUDGET_BYTES};
use crate::{Error, Result};

/// How a quoted polarization maps to the initial flip probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationConvention {
    /// Polarization is the down-population fraction: `eps0 = 1 − P`.
    #[default]
    Population,
    /// Polarization is `(N↓ − N↑)/N`: `eps0 = (1 − P)/2`.
    Magnetization,
}

impl PolarizationConvention {
    pub fn eps0(self, polarization: f64) -> f64 {
        match self {
            PolarizationConvention::Population => 1.0 - polarization,
            PolarizationConvention::Magnetization => (1.0 - polarization) / 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    /// Initial flip probability per spin.
    pub eps0: f64,
    /// Per-spin probability that a pulse fails to flip a targeted spin.
    pub eps1: f64,
    /// Per-spin probability that a pulse flips an untargeted spin of the
    /// pulsed species. Zero reproduces the omission-only model.
    #[serde(default)]
    pub spurious: f64,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn noiseless(rng_seed: u64) -> Self {
        NoiseModel {
            eps0: 0.0,
            eps1: 0.0,
            spurious: 0.0,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("eps0", self.eps0)?;
        check_probability("eps1", self.eps1)?;
        check_probability("spurious", self.spurious)
    }
}

/// Which apex value(s) a trial runs with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedChoice {
    #[default]
    Up,
    Down,
    /// Paired `+1`/`−1` trials sharing every random stream.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffusionConfig {
    pub steps: u64,
    #[serde(default = "default_exchange")]
    pub exchange_probability: f64,
    /// Geometry whose shortest same-species shell defines the exchange pairs.
    #[serde(default = "default_diffusion_geometry")]
    pub geometry: String,
}

fn default_exchange() -> f64 {
    0.5
}

fn default_diffusion_geometry() -> String {
    "rhombo60".into()
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            steps: 0,
            exchange_probability: default_exchange(),
            geometry: default_diffusion_geometry(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub layers: u64,
    pub phases: u64,
    pub seed_value: SeedChoice,
    pub noise: NoiseModel,
    /// Adds field `+1` to both species' pulse sets.
    pub plus_one_rule: bool,
    pub diffusion: DiffusionConfig,
    pub trials: u64,
    pub boundary: BoundaryMode,
    pub scan: ScanMode,
    pub memory_budget_bytes: u64,
}

impl ExperimentConfig {
    /// Noiseless single-trial config running `layers − 2` phases.
    pub fn new(layers: u64) -> Self {
        ExperimentConfig {
            layers,
            phases: layers.saturating_sub(2),
            seed_value: SeedChoice::Up,
            noise: NoiseModel::noiseless(0),
            plus_one_rule: false,
            diffusion: DiffusionConfig::default(),
            trials: 1,
            boundary: BoundaryMode::Embedded,
            scan: ScanMode::Restricted,
            memory_budget_bytes: DEFAULT_STATE_BUDGET_BYTES,
        }
    }

    pub fn fields(&self) -> FieldSet {
        if self.plus_one_rule {
            FieldSet::with_plus_one()
        } else {
            FieldSet::standard()
        }
    }

    pub fn rule_label(&self) -> &'static str {
        if self.plus_one_rule {
            "plus-one"
        } else {
            "standard"
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            fields: self.fields(),
            boundary: self.boundary,
            scan: self.scan,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.layers == 0 {
            return Err(Error::config("layers", "must be at least 1"));
        }
        if self.phases + 1 > self.layers {
            return Err(Error::config(
                "phases",
                format!("{} exceeds layers − 1 = {}", self.phases, self.layers - 1),
            ));
        }
        self.noise
            .validate()
            .map_err(|e| Error::config("noise", e.to_string()))?;
        check_probability("exchange_probability", self.diffusion.exchange_probability)
            .map_err(|e| Error::config("diffusion.exchange_probability", e.to_string()))?;
        LatticeGeometry::parse(&self.diffusion.geometry)
            .map_err(|e| Error::config("diffusion.geometry", e.to_string()))?;
        Ok(())
    }

    pub fn build_lattice(&self) -> Result<PyramidLattice> {
        PyramidLattice::with_budget(self.layers, self.memory_budget_bytes)
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: Spin,
    pub state: SpinState,
    pub trace: RunTrace,
}

/// One trial: all-down, initial noise, apex seed, diffusion, noisy phases.
///
/// Every random draw comes from a stream keyed by `(rng_seed, trial_index,
/// stream, phase-or-sweep)`, so the result depends only on the config and the
/// trial index, and `+1`/`−1` runs of the same index share their noise.
pub fn run_trial(
    config: &ExperimentConfig,
    lattice: &PyramidLattice,
    trial_index: u64,
    seed: Spin,
) -> Result<TrialOutcome> {
    if lattice.layers() != config.layers {
        return Err(Error::Domain("lattice does not match the config".into()));
    }
    let noise = config.noise;
    let mut a = Automaton::new(lattice, config.boundary, config.scan);
    {
        let mut st = a.state_mut();
        randomize_initial(
            &mut st,
            noise.eps0,
            stream_rng(noise.rng_seed, trial_index, Stream::InitialPolarization, 0),
        )?;
        st.set(0, seed);
        if config.diffusion.steps > 0 {
            let geometry = LatticeGeometry::parse(&config.diffusion.geometry)?;
            let diffuser = Diffuser::new(&geometry, config.diffusion.exchange_probability)?;
            diffuse(&diffuser, lattice, &mut st, config.diffusion.steps, |sweep| {
                stream_rng(noise.rng_seed, trial_index, Stream::Diffusion, sweep)
            });
        }
    }
    let fields = config.fields();
    let mut trace = RunTrace::new(lattice.site_count(), fields.len() as u64);
    run_phases(&mut a, fields, 1, config.phases, &mut trace, |phase| {
        NoisyGate::for_phase(noise.rng_seed, trial_index, phase, noise.eps1, noise.spurious)
    });
    Ok(TrialOutcome {
        seed,
        state: a.into_state(),
        trace,
    })
}

/// Per-trial observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: u64,
    pub up_count: u64,
    /// Sites agreeing with the noiseless final state of the same seed.
    pub correct: u64,
    /// Up count of the paired `−1` trial, when seeds are paired.
    pub baseline_up_count: Option<u64>,
    pub layer_up: Vec<u64>,
    pub errors: ClassCounts,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCounts {
    pub corner: f64,
    pub edge: f64,
    pub face: f64,
    pub interior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub site_count: u64,
    /// Up count of the noiseless run of the signal seed.
    pub ideal_up_count: u64,
    pub trials: Vec<TrialSummary>,
    /// Mean final up count (the signal).
    pub mean_signal: f64,
    pub std_err: f64,
    pub mean_correct: f64,
    /// Mean of `up(+1) − up(−1)` over paired trials.
    pub contrast: Option<f64>,
    pub contrast_std_err: Option<f64>,
    pub layer_profile: Vec<f64>,
    /// Mean count of sites differing from the noiseless final state.
    pub error_locations: MeanCounts,
}

/// Mean and standard error (`sample sd / √R`, 0 for a single value).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn layer_counts(lattice: &PyramidLattice, state: &SpinState) -> Vec<u64> {
    (1..=lattice.layers())
        .map(|l| state.count_up_range(lattice.layer_range(l)))
        .collect()
}

/// Runs every trial (in parallel on the current rayon pool) and aggregates in
/// trial order, so the result is independent of the thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let lattice = config.build_lattice()?;
    let signal_seed = match config.seed_value {
        SeedChoice::Down => Spin::Down,
        _ => Spin::Up,
    };
    let ideal = run_ideal(&lattice, signal_seed, config.phases, &config.run_options());

    let summaries: Vec<TrialSummary> = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<TrialSummary> {
            let out = run_trial(config, &lattice, t, signal_seed)?;
            let baseline_up_count = if config.seed_value == SeedChoice::Both {
                Some(run_trial(config, &lattice, t, Spin::Down)?.state.count_up())
            } else {
                None
            };
            let diff = out.state.difference(&ideal.state);
            let wrong = diff.count_up();
            Ok(TrialSummary {
                trial: t,
                up_count: out.state.count_up(),
                correct: lattice.site_count() - wrong,
                baseline_up_count,
                layer_up: layer_counts(&lattice, &out.state),
                errors: class_histogram(&lattice, &diff),
            })
        })
        .collect::<Result<_>>()?;

    let signal: Vec<f64> = summaries.iter().map(|s| s.up_count as f64).collect();
    let (mean_signal, std_err) = mean_and_stderr(&signal);
    let correct: Vec<f64> = summaries.iter().map(|s| s.correct as f64).collect();
    let (mean_correct, _) = mean_and_stderr(&correct);
    let (contrast, contrast_std_err) = if config.seed_value == SeedChoice::Both {
        let c: Vec<f64> = summaries
            .iter()
            .map(|s| s.up_count as f64 - s.baseline_up_count.unwrap_or(0) as f64)
            .collect();
        let (m, e) = mean_and_stderr(&c);
        (Some(m), Some(e))
    } else {
        (None, None)
    };
    let r = summaries.len() as f64;
    let layer_profile = (0..lattice.layers() as usize)
        .map(|l| summaries.iter().map(|s| s.layer_up[l] as f64).sum::<f64>() / r)
        .collect();
    let mean_of = |f: fn(&ClassCounts) -> u64| summaries.iter().map(|s| f(&s.errors) as f64).sum::<f64>() / r;
    let error_locations = MeanCounts {
        corner: mean_of(|c| c.corner),
        edge: mean_of(|c| c.edge),
        face: mean_of(|c| c.face),
        interior: mean_of(|c| c.interior),
    };

    Ok(ExperimentResult {
        config: config.clone(),
        site_count: lattice.site_count(),
        ideal_up_count: ideal.state.count_up(),
        trials: summaries,
        mean_signal,
        std_err,
        mean_correct,
        contrast,
        contrast_std_err,
        layer_profile,
        error_locations,
    })
}
