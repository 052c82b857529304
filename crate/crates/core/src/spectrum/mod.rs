//! Secular frequency-shift spectra of a probed spin.
//!
//! Under the secular part of the dipolar Hamiltonian the probe's resonance is
//! shifted by `Σ_j 2·d_j·s_j` for partner states `s_j = ±1`. A stick spectrum
//! is the distribution of that shift over partner configurations; each stick
//! also carries the probe's nearest-neighbor field, which is what the pulses
//! are meant to address.

mod broaden;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use broaden::{addressability_metric, broaden, trapezoid, BroadenedCurve, FrequencyGrid};

use crate::lattice::{
    coupling_table, CouplingModel, CouplingTable, CrystalContext, LatticeGeometry, Site,
    TableOptions, TableWarning,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub model: CouplingModel,
    pub suppress_homonuclear: bool,
    pub cutoff: f64,
    pub floor_hz: f64,
    /// Probability that a partner spin is up.
    pub up_probability: f64,
    /// Largest partner count enumerated exhaustively.
    pub exhaustive_threshold: usize,
    /// Sampling used above the threshold; `None` makes that a capacity error.
    pub monte_carlo: Option<MonteCarloConfig>,
    /// Gaussian standard deviation, Hz.
    pub broadening_hz: f64,
    pub grid_points: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            model: CouplingModel::FullDipolar,
            suppress_homonuclear: false,
            cutoff: 2.5,
            floor_hz: 1e-9,
            up_probability: 0.5,
            exhaustive_threshold: 20,
            monte_carlo: Some(MonteCarloConfig {
                samples: 200_000,
                seed: 0,
            }),
            broadening_hz: 50.0,
            grid_points: 4096,
        }
    }
}

impl SpectrumConfig {
    pub fn ideal() -> Self {
        SpectrumConfig {
            model: CouplingModel::IdealNn,
            ..Default::default()
        }
    }

    fn table_options(&self) -> TableOptions {
        TableOptions {
            model: self.model,
            cutoff: self.cutoff,
            floor_hz: self.floor_hz,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.up_probability) {
            return Err(Error::Domain(format!(
                "up_probability must lie in [0, 1], got {}",
                self.up_probability
            )));
        }
        if !(self.broadening_hz > 0.0) {
            return Err(Error::Domain("broadening width must be positive".into()));
        }
        if self.grid_points < 3 {
            return Err(Error::Domain("grid needs at least 3 points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stick {
    pub frequency: f64,
    pub weight: f64,
}

/// A stick together with the probe's nearest-neighbor field in the
/// configurations it aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledStick {
    pub field: i32,
    pub frequency: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    Exhaustive { configurations: u64 },
    MonteCarlo { samples: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickSpectrum {
    pub partner_count: usize,
    pub sampling: Sampling,
    /// Merged over fields, sorted by frequency; weights sum to 1.
    pub sticks: Vec<Stick>,
    /// Merged per field, sorted by (field, frequency).
    pub labeled: Vec<LabeledStick>,
    pub curve: BroadenedCurve,
    pub table_warning: Option<TableWarning>,
}

impl StickSpectrum {
    pub fn total_weight(&self) -> f64 {
        self.sticks.iter().map(|s| s.weight).sum()
    }

    pub fn max_abs_frequency(&self) -> f64 {
        self.sticks.iter().map(|s| s.frequency.abs()).fold(0.0, f64::max)
    }

    /// Probability of each nearest-neighbor field.
    pub fn field_weights(&self) -> BTreeMap<i32, f64> {
        let mut m = BTreeMap::new();
        for s in &self.labeled {
            *m.entry(s.field).or_insert(0.0) += s.weight;
        }
        m
    }

    /// Weighted mean frequency of each field's sticks.
    pub fn cluster_centers(&self) -> BTreeMap<i32, f64> {
        let mut acc: BTreeMap<i32, (f64, f64)> = BTreeMap::new();
        for s in &self.labeled {
            let e = acc.entry(s.field).or_insert((0.0, 0.0));
            e.0 += s.weight * s.frequency;
            e.1 += s.weight;
        }
        acc.into_iter()
            .filter(|(_, (_, w))| *w > 0.0)
            .map(|(f, (m, w))| (f, m / w))
            .collect()
    }

    /// Sticks whose field satisfies `pred`, with their absolute weights.
    pub fn sticks_where(&self, pred: impl Fn(i32) -> bool) -> Vec<Stick> {
        self.labeled
            .iter()
            .filter(|s| pred(s.field))
            .map(|s| Stick {
                frequency: s.frequency,
                weight: s.weight,
            })
            .collect()
    }
}

/// Tolerance under which two stick frequencies are merged.
pub fn merge_tolerance(table: &CouplingTable) -> f64 {
    (1e-6 * table.max_abs_coupling()).max(1e-9)
}

fn merge_sorted(sticks: &mut Vec<LabeledStick>, tol: f64) {
    sticks.sort_by(|a, b| a.field.cmp(&b.field).then(a.frequency.total_cmp(&b.frequency)));
    let mut out: Vec<LabeledStick> = Vec::with_capacity(sticks.len());
    let mut anchor = f64::NAN;
    let mut moment = 0.0;
    for s in sticks.iter() {
        match out.last_mut() {
            Some(last) if last.field == s.field && s.frequency - anchor <= tol => {
                last.weight += s.weight;
                moment += s.weight * s.frequency;
                last.frequency = if last.weight > 0.0 { moment / last.weight } else { anchor };
            }
            _ => {
                out.push(*s);
                anchor = s.frequency;
                moment = s.weight * s.frequency;
            }
        }
    }
    *sticks = out;
}

fn merge_fields(labeled: &[LabeledStick], tol: f64) -> Vec<Stick> {
    let mut all: Vec<LabeledStick> = labeled.iter().map(|s| LabeledStick { field: 0, ..*s }).collect();
    merge_sorted(&mut all, tol);
    all.into_iter()
        .map(|s| Stick {
            frequency: s.frequency,
            weight: s.weight,
        })
        .collect()
}

/// Labeled, merged sticks for an explicit coupling table.
pub fn sticks_from_table(table: &CouplingTable, config: &SpectrumConfig) -> Result<(Vec<LabeledStick>, Sampling)> {
    config.validate()?;
    let couplings: Vec<f64> = table.entries.iter().map(|e| 2.0 * e.coupling_hz).collect();
    let nearest: Vec<bool> = table.entries.iter().map(|e| e.nearest && e.homonuclear == 0).collect();
    let n = couplings.len();
    let p = config.up_probability;
    let tol = merge_tolerance(table);

    let (mut sticks, sampling) = if n <= config.exhaustive_threshold && n < 63 {
        let total = 1u64 << n;
        let mut sticks = Vec::with_capacity(total as usize);
        for mask in 0..total {
            let mut freq = 0.0;
            let mut field = 0;
            let mut weight = 1.0;
            for j in 0..n {
                let up = (mask >> j) & 1 == 1;
                let s = if up { 1.0 } else { -1.0 };
                freq += couplings[j] * s;
                if nearest[j] {
                    field += if up { 1 } else { -1 };
                }
                weight *= if up { p } else { 1.0 - p };
            }
            if weight > 0.0 {
                sticks.push(LabeledStick { field, frequency: freq, weight });
            }
        }
        (sticks, Sampling::Exhaustive { configurations: total })
    } else if let Some(mc) = config.monte_carlo {
        if mc.samples == 0 {
            return Err(Error::Domain("Monte Carlo needs at least one sample".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
        let w = 1.0 / mc.samples as f64;
        let mut sticks = Vec::with_capacity(mc.samples as usize);
        for _ in 0..mc.samples {
            let mut freq = 0.0;
            let mut field = 0;
            for j in 0..n {
                let up = rng.random_bool(p);
                freq += if up { couplings[j] } else { -couplings[j] };
                if nearest[j] {
                    field += if up { 1 } else { -1 };
                }
            }
            sticks.push(LabeledStick { field, frequency: freq, weight: w });
        }
        (sticks, Sampling::MonteCarlo { samples: mc.samples })
    } else {
        return Err(Error::Capacity(format!(
            "{n} partners exceed the exhaustive threshold of {} and Monte Carlo is disabled",
            config.exhaustive_threshold
        )));
    };
    merge_sorted(&mut sticks, tol);
    Ok((sticks, sampling))
}

/// Stick spectrum of `probe` and its broadened curve on the default grid.
pub fn stick_spectrum(
    probe: Site,
    geometry: &LatticeGeometry,
    context: CrystalContext<'_>,
    config: &SpectrumConfig,
) -> Result<StickSpectrum> {
    let mut table = coupling_table(geometry, context, probe, &config.table_options())?;
    if config.suppress_homonuclear {
        table = table.without_homonuclear();
    }
    spectrum_from_table(&table, config, None)
}

/// Spectrum for an explicit table, optionally on a given grid.
pub fn spectrum_from_table(
    table: &CouplingTable,
    config: &SpectrumConfig,
    grid: Option<&FrequencyGrid>,
) -> Result<StickSpectrum> {
    let (labeled, sampling) = sticks_from_table(table, config)?;
    let sticks = merge_fields(&labeled, merge_tolerance(table));
    let fmax = sticks.iter().map(|s| s.frequency.abs()).fold(0.0, f64::max);
    let grid = match grid {
        Some(g) => g.clone(),
        None => FrequencyGrid::around(fmax, config.broadening_hz, config.grid_points),
    };
    let curve = broaden(&sticks, &grid, config.broadening_hz)?;
    Ok(StickSpectrum {
        partner_count: table.len(),
        sampling,
        sticks,
        labeled,
        curve,
        table_warning: table.warning,
    })
}

/// One model's spectrum and addressability in a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub label: String,
    pub model: CouplingModel,
    pub suppress_homonuclear: bool,
    pub spectrum: StickSpectrum,
    /// Overlap between each field's peak and all other peaks.
    pub field_overlaps: BTreeMap<i32, f64>,
    /// Worst (largest) field overlap.
    pub score: f64,
    pub cluster_centers: BTreeMap<i32, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub probe: Site,
    pub grid: FrequencyGrid,
    pub models: Vec<ModelReport>,
}

impl ModelComparison {
    pub fn model(&self, label: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.label == label)
    }
}

/// Fields carrying less probability than this are left out of the score.
const MIN_FIELD_WEIGHT: f64 = 1e-6;

/// Overlap of each field's normalized peak with the normalized remainder.
pub fn field_overlaps(spectrum: &StickSpectrum, grid: &FrequencyGrid, width: f64) -> Result<BTreeMap<i32, f64>> {
    let weights = spectrum.field_weights();
    let mut out = BTreeMap::new();
    if weights.len() < 2 {
        return Ok(out);
    }
    for (&field, &w) in &weights {
        if w < MIN_FIELD_WEIGHT || 1.0 - w < MIN_FIELD_WEIGHT {
            continue;
        }
        let on = broaden(&spectrum.sticks_where(|f| f == field), grid, width)?;
        let off = broaden(&spectrum.sticks_where(|f| f != field), grid, width)?;
        out.insert(field, addressability_metric(&on, &off)?);
    }
    Ok(out)
}

/// Ideal nearest-neighbor, full dipolar, and homonuclear-suppressed dipolar
/// spectra of `probe` on one grid, with their addressability scores.
pub fn compare_models(
    probe: Site,
    geometry: &LatticeGeometry,
    context: CrystalContext<'_>,
    base: &SpectrumConfig,
) -> Result<ModelComparison> {
    let variants = [
        ("ideal-nn", CouplingModel::IdealNn, false),
        ("full-dipolar", CouplingModel::FullDipolar, false),
        ("suppressed", CouplingModel::FullDipolar, true),
    ];
    let mut tables = Vec::new();
    let mut spectra = Vec::new();
    for (_, model, suppress) in variants {
        let cfg = SpectrumConfig {
            model,
            suppress_homonuclear: suppress,
            ..*base
        };
        let mut t = coupling_table(geometry, context, probe, &cfg.table_options())?;
        if suppress {
            t = t.without_homonuclear();
        }
        let s = spectrum_from_table(&t, &cfg, None)?;
        tables.push(t);
        spectra.push(s);
    }
    let fmax = spectra.iter().map(StickSpectrum::max_abs_frequency).fold(0.0, f64::max);
    let grid = FrequencyGrid::around(fmax, base.broadening_hz, base.grid_points);

    let mut models = Vec::new();
    for ((label, model, suppress), mut spectrum) in variants.into_iter().zip(spectra) {
        spectrum.curve = broaden(&spectrum.sticks, &grid, base.broadening_hz)?;
        let field_overlaps = field_overlaps(&spectrum, &grid, base.broadening_hz)?;
        let score = field_overlaps.values().copied().fold(0.0, f64::max);
        models.push(ModelReport {
            label: label.to_string(),
            model,
            suppress_homonuclear: suppress,
            cluster_centers: spectrum.cluster_centers(),
            spectrum,
            field_overlaps,
            score,
        });
    }
    Ok(ModelComparison { probe, grid, models })
}
