//! Non-coherent Monte Carlo of the automaton under imperfect conditions.
//!
//! The error model acts on populations only: an initial flip with probability
//! `eps0` per spin, and pulses that skip each targeted spin with probability
//! `eps1`. An optional classical exchange step models homonuclear spin
//! diffusion before the pulses start.

mod classify;
mod diffusion;
mod experiment;
mod rng;

pub use classify::{class_histogram, classify_site, planted_error, ClassCounts, PlantedError, SiteClass};
pub use diffusion::{diffuse, randomize_initial, single_excitation, Diffuser};
pub use experiment::{
    mean_and_stderr, run_experiment, run_trial, DiffusionConfig, ExperimentConfig,
    ExperimentResult, MeanCounts, NoiseModel, PolarizationConvention, SeedChoice, TrialOutcome,
    TrialSummary,
};
pub use rng::{stream_key, stream_rng, BernoulliSkipper, NoisyGate, Stream};
