use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::{load_sweep, ResolvedSweep};
use super::output::{
    curve_points, write_csv_file, write_json, McBundle, McRow, RunManifest, SticksFile,
};
use crate::automaton::{run_ideal, BoundaryMode, FieldSet, RunOptions, ScanMode, Spin};
use crate::lattice::{CouplingModel, CrystalContext, LatticeGeometry, PyramidLattice, Site};
use crate::noise_mc::run_experiment;
use crate::spectrum::{
    compare_models, field_overlaps, stick_spectrum, FrequencyGrid, ModelComparison, ModelReport,
    MonteCarloConfig, SpectrumConfig,
};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "spinamp", version, about = "Pyramid spin-amplification simulator")]
pub struct Cli {
    /// Base RNG seed; overrides the seed in a Monte Carlo config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Re-evaluate every layer in every phase instead of the wavefront scan.
    #[arg(long, global = true)]
    pub verify: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Noiseless run from a single seeded apex.
    Ideal(IdealArgs),
    /// Monte Carlo sweep described by a JSON config.
    Mc(McArgs),
    /// Stick spectra of a probed spin.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args)]
pub struct IdealArgs {
    #[arg(short = 'L', long)]
    pub layers: u64,
    /// Phase count; defaults to `L − 2`.
    #[arg(long)]
    pub phases: Option<u64>,
    /// Apex value: `+1`/`up` or `-1`/`down`.
    #[arg(long, default_value = "+1", allow_hyphen_values = true, value_parser = parse_spin)]
    pub seed_value: Spin,
    #[arg(long, default_value = "embedded", value_parser = parse_boundary)]
    pub boundary: BoundaryMode,
    /// Also flip sites with field +1.
    #[arg(long)]
    pub plus_one: bool,
    /// Trace path; defaults to `<out-dir>/ideal_trace.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// `layer2`, `bulk`, or a pyramid site `x,y,z`.
    #[arg(long, default_value = "layer2")]
    pub probe: String,
    /// `cubic`, `rhombo60`, or three angles in radians `a,b,g`.
    #[arg(long, default_value = "rhombo60")]
    pub geometry: String,
    /// `all` (three-way comparison), `ideal-nn`, `full-nn`, or `full-dipolar`.
    #[arg(long, default_value = "all")]
    pub model: String,
    /// Drop homonuclear partners (single-model runs).
    #[arg(long)]
    pub suppress: bool,
    /// Pyramid size used for surface probes.
    #[arg(long, default_value_t = 8)]
    pub layers: u64,
    #[arg(long, default_value_t = 2.5)]
    pub cutoff: f64,
    /// Gaussian broadening standard deviation in Hz.
    #[arg(long, default_value_t = 50.0)]
    pub width: f64,
    #[arg(long, default_value_t = 200_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 4096)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 0.5)]
    pub up_probability: f64,
}

fn parse_spin(s: &str) -> std::result::Result<Spin, String> {
    match s.trim() {
        "+1" | "1" | "up" => Ok(Spin::Up),
        "-1" | "down" => Ok(Spin::Down),
        other => Err(format!("expected +1 or -1, got `{other}`")),
    }
}

fn parse_boundary(s: &str) -> std::result::Result<BoundaryMode, String> {
    BoundaryMode::parse(s).map_err(|e| e.to_string())
}

/// Paths written by a command, manifest last.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn execute(cli: &Cli) -> Result<CommandOutput> {
    if cli.threads == Some(0) {
        return Err(Error::Domain("--threads must be at least 1".into()));
    }
    let pool = match cli.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Domain(format!("cannot start thread pool: {e}")))?,
        ),
        None => None,
    };
    let run = || match &cli.command {
        Command::Ideal(a) => cmd_ideal(cli, a),
        Command::Mc(a) => cmd_mc(cli, a),
        Command::Spectrum(a) => cmd_spectrum(cli, a),
    };
    match pool {
        Some(p) => p.install(run),
        None => run(),
    }
}

fn scan_mode(cli: &Cli) -> ScanMode {
    if cli.verify {
        ScanMode::Full
    } else {
        ScanMode::Restricted
    }
}

#[derive(Serialize)]
struct IdealEcho {
    layers: u64,
    phases: u64,
    seed_value: i32,
    boundary: BoundaryMode,
    fields: FieldSet,
    scan: ScanMode,
    site_count: u64,
}

pub fn cmd_ideal(cli: &Cli, args: &IdealArgs) -> Result<CommandOutput> {
    if args.layers == 0 {
        return Err(Error::Domain("layers must be at least 1".into()));
    }
    let phases = args.phases.unwrap_or(args.layers.saturating_sub(2));
    if phases > args.layers - 1 {
        return Err(Error::Domain(format!(
            "phases = {phases} exceeds layers − 1 = {}",
            args.layers - 1
        )));
    }
    let lattice = PyramidLattice::new(args.layers)?;
    let options = RunOptions {
        fields: if args.plus_one {
            FieldSet::with_plus_one()
        } else {
            FieldSet::standard()
        },
        boundary: args.boundary,
        scan: scan_mode(cli),
    };
    let echo = IdealEcho {
        layers: args.layers,
        phases,
        seed_value: args.seed_value.value(),
        boundary: args.boundary,
        fields: options.fields,
        scan: options.scan,
        site_count: lattice.site_count(),
    };
    let mut manifest = RunManifest::new("ideal", &echo, cli.seed.into_iter().collect(), cli.threads)?;
    let run = run_ideal(&lattice, args.seed_value, phases, &options);

    let trace_path = args.out.clone().unwrap_or_else(|| cli.out_dir.join("ideal_trace.csv"));
    let mut f = super::output::create_file(&trace_path)?;
    run.trace.write_csv(&mut f)?;
    std::io::Write::flush(&mut f).map_err(|e| Error::io(&trace_path, e))?;
    manifest.record(trace_path.clone());
    let manifest_path = manifest.finish(&cli.out_dir.join("ideal_manifest.json"))?;
    Ok(CommandOutput {
        files: vec![trace_path, manifest_path],
        summary: format!(
            "final up count {} of {} sites after {phases} phases",
            run.trace.final_up_count().unwrap_or(u64::from(args.seed_value == Spin::Up)),
            lattice.site_count()
        ),
    })
}

pub fn cmd_mc(cli: &Cli, args: &McArgs) -> Result<CommandOutput> {
    let mut file = load_sweep(&args.config)?;
    if let Some(seed) = cli.seed {
        file.rng_seed = seed;
    }
    let sweep: ResolvedSweep = file.resolve(scan_mode(cli))?;
    let mut manifest = RunManifest::new("mc", &sweep, vec![file.rng_seed], cli.threads)?;

    let mut results = Vec::with_capacity(sweep.points.len());
    for p in &sweep.points {
        results.push(run_experiment(&p.config)?);
    }
    let rows: Vec<McRow> = results.iter().map(McRow::from_result).collect();
    let csv_path = cli.out_dir.join("mc_results.csv");
    let json_path = cli.out_dir.join("mc_results.json");
    write_csv_file(&csv_path, &rows)?;
    write_json(
        &json_path,
        &McBundle {
            schema_version: sweep.schema_version,
            results,
        },
    )?;
    manifest.record(csv_path.clone());
    manifest.record(json_path.clone());
    let manifest_path = manifest.finish(&cli.out_dir.join("mc_manifest.json"))?;
    Ok(CommandOutput {
        files: vec![csv_path, json_path, manifest_path],
        summary: format!("{} configurations", rows.len()),
    })
}

enum Probe {
    Bulk,
    Pyramid(Site),
}

fn parse_probe(s: &str) -> Result<Probe> {
    match s.trim() {
        "layer2" => Ok(Probe::Pyramid(Site::new(1, 0, 0))),
        "bulk" => Ok(Probe::Bulk),
        other => {
            let parts: Vec<u32> = other
                .split(',')
                .map(|p| p.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Domain(format!("unknown probe `{s}`")))?;
            match parts[..] {
                [x, y, z] => Ok(Probe::Pyramid(Site::new(x, y, z))),
                _ => Err(Error::Domain(format!("unknown probe `{s}`"))),
            }
        }
    }
}

#[derive(Serialize)]
struct SpectrumEcho<'a> {
    probe: &'a str,
    probe_site: Site,
    context: &'a str,
    layers: Option<u64>,
    geometry: &'a str,
    angles: [f64; 3],
    model: &'a str,
    suppress: bool,
    config: SpectrumConfig,
}

#[derive(Serialize)]
struct SpectrumSummary {
    probe: Site,
    grid: FrequencyGrid,
    models: Vec<ModelSummary>,
}

#[derive(Serialize)]
struct ModelSummary {
    label: String,
    score: f64,
    stick_count: usize,
    partner_count: usize,
    sticks: PathBuf,
    curve: PathBuf,
}

pub fn cmd_spectrum(cli: &Cli, args: &SpectrumArgs) -> Result<CommandOutput> {
    let geometry = LatticeGeometry::parse(&args.geometry)?;
    let probe = parse_probe(&args.probe)?;
    let single = match args.model.as_str() {
        "all" => None,
        m => Some(CouplingModel::parse(m)?),
    };
    let base = SpectrumConfig {
        model: single.unwrap_or(CouplingModel::FullDipolar),
        suppress_homonuclear: args.suppress,
        cutoff: args.cutoff,
        up_probability: args.up_probability,
        monte_carlo: Some(MonteCarloConfig {
            samples: args.samples,
            seed: cli.seed.unwrap_or(0),
        }),
        broadening_hz: args.width,
        grid_points: args.grid_points,
        ..Default::default()
    };
    let lattice;
    let (site, context, layers) = match probe {
        Probe::Bulk => (Site::new(1, 0, 0), CrystalContext::Bulk, None),
        Probe::Pyramid(s) => {
            lattice = PyramidLattice::new(args.layers)?;
            (s, CrystalContext::Pyramid(&lattice), Some(args.layers))
        }
    };
    let echo = SpectrumEcho {
        probe: &args.probe,
        probe_site: site,
        context: if layers.is_some() { "pyramid" } else { "bulk" },
        layers,
        geometry: &args.geometry,
        angles: geometry.angles(),
        model: &args.model,
        suppress: args.suppress,
        config: base,
    };
    let mut manifest = RunManifest::new("spectrum", &echo, cli.seed.into_iter().collect(), cli.threads)?;

    let comparison = match single {
        None => compare_models(site, &geometry, context, &base)?,
        Some(model) => single_model(site, &geometry, context, &base, model)?,
    };

    let mut files = Vec::new();
    let mut models = Vec::new();
    for m in &comparison.models {
        let sticks = cli.out_dir.join(format!("spectrum_{}_sticks.json", m.label));
        let curve = cli.out_dir.join(format!("spectrum_{}_curve.csv", m.label));
        write_json(&sticks, &SticksFile::from_report(m))?;
        write_csv_file(&curve, &curve_points(&m.spectrum.curve))?;
        manifest.record(sticks.clone());
        manifest.record(curve.clone());
        files.push(sticks.clone());
        files.push(curve.clone());
        models.push(ModelSummary {
            label: m.label.clone(),
            score: m.score,
            stick_count: m.spectrum.sticks.len(),
            partner_count: m.spectrum.partner_count,
            sticks,
            curve,
        });
    }
    let summary_text = models
        .iter()
        .map(|m| format!("{}: {} sticks, score {:.4}", m.label, m.stick_count, m.score))
        .collect::<Vec<_>>()
        .join("; ");
    let summary_path = cli.out_dir.join("spectrum_summary.json");
    write_json(
        &summary_path,
        &SpectrumSummary {
            probe: site,
            grid: comparison.grid.clone(),
            models,
        },
    )?;
    manifest.record(summary_path.clone());
    files.push(summary_path);
    files.push(manifest.finish(&cli.out_dir.join("spectrum_manifest.json"))?);
    Ok(CommandOutput {
        files,
        summary: summary_text,
    })
}

fn single_model(
    site: Site,
    geometry: &LatticeGeometry,
    context: CrystalContext<'_>,
    config: &SpectrumConfig,
    model: CouplingModel,
) -> Result<ModelComparison> {
    let spectrum = stick_spectrum(site, geometry, context, config)?;
    let grid = spectrum.curve.grid.clone();
    let overlaps = field_overlaps(&spectrum, &grid, config.broadening_hz)?;
    let label = if config.suppress_homonuclear {
        format!("{}-suppressed", model.name())
    } else {
        model.name().to_string()
    };
    Ok(ModelComparison {
        probe: site,
        grid,
        models: vec![ModelReport {
            label,
            model,
            suppress_homonuclear: config.suppress_homonuclear,
            score: overlaps.values().copied().fold(0.0, f64::max),
            field_overlaps: overlaps,
            cluster_centers: spectrum.cluster_centers(),
            spectrum,
        }],
    })
}

pub(crate) fn display_path(p: &Path) -> String {
    p.display().to_string()
}
