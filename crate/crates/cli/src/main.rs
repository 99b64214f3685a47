//! `q3p` — batch driver for the density → register → Ising → emulated
//! quantum placement pipeline.
//!
//! Every subcommand writes its declared artifacts plus a `RunManifest` JSON
//! recording the resolved parameters, so a run can be replayed exactly.
//! Stochastic subcommands (`qae`, `vqa`, `landscape`) require `--seed`, and
//! their outputs are byte-identical across reruns and thread counts.
//!
//! Exit codes: 0 success, 1 domain error (bad inputs, physics preconditions,
//! I/O), 2 usage error (unknown flags, missing required arguments). The
//! `Q3P_LOG` environment variable sets the log level (`error`, `warn`,
//! `info`, `debug`; default `warn`).

mod artifacts;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use q3p_core::emulator::{self, NoiseModel};
use q3p_core::field::{
    load_grid, save_grid, slice_volume, synthesize_mixture, GaussianComponent, GridFormat,
    GridSpec, SlicePlane,
};
use q3p_core::ising::{compile_problem, exact_solve, Bitstring, Placement, PlacementProblem};
use q3p_core::pulse::{DEFAULT_DELTA_MAX, DEFAULT_DURATION, DEFAULT_OMEGA_MAX};
use q3p_core::qae::{run_qae, AdiabaticSchedule};
use q3p_core::register::{build_register, fit_to_traps, Register};
use q3p_core::vqa::{run_vqa, Minimizer, OptimizerConfig};

use artifacts::{
    manifest_path_for, manifest_path_for_prefix, read_histogram_csv, read_json,
    read_landscape_csv, write_histogram_csv, write_json, write_landscape_csv, RunManifest,
};

#[derive(Parser)]
#[command(
    name = "q3p",
    version,
    about = "Convert a scalar density into a constrained Ising problem and solve it on an emulated neutral-atom machine"
)]
struct Cli {
    /// Cap the internal thread pool (default: one thread per logical core).
    /// Results never depend on this; it only trades latency for cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a density grid from a Gaussian mixture spec.
    Synth(SynthArgs),
    /// Cut parallel 2D slices out of a 3D density volume.
    Slice(SliceArgs),
    /// Place qubit sites over the high-density regions of a 2D slice.
    Register(RegisterArgs),
    /// Compile a 2D density + register into a placement problem.
    Compile(CompileArgs),
    /// Solve a placement problem exactly (classical branch and bound).
    Exact(ExactArgs),
    /// Solve via the adiabatic algorithm on the emulated machine.
    Qae(QaeArgs),
    /// Solve via Bayesian-optimized variational pulses on the emulated machine.
    Vqa(VqaArgs),
    /// Scan excited-state population over detuning × duration.
    Landscape(LandscapeArgs),
    /// Render a histogram CSV or landscape CSV as an SVG figure.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GridFormatArg {
    Dx,
    JsonGrid,
}

impl From<GridFormatArg> for GridFormat {
    fn from(v: GridFormatArg) -> Self {
        match v {
            GridFormatArg::Dx => GridFormat::Dx,
            GridFormatArg::JsonGrid => GridFormat::JsonGrid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AmplitudeRule {
    /// Every site gets amplitude 1.
    Uniform,
    /// Amplitudes proportional to the local density, scaled so the largest is 1.
    Density,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MinimizerArg {
    Dummy,
    Gp,
}

impl From<MinimizerArg> for Minimizer {
    fn from(v: MinimizerArg) -> Self {
        match v {
            MinimizerArg::Dummy => Minimizer::Dummy,
            MinimizerArg::Gp => Minimizer::Gp,
        }
    }
}

/// Named optimizer configurations; explicit flags override preset values.
#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Preset {
    /// 50 cycles × 200 shots, 9 control points per channel, GP surrogate.
    Fast,
    /// 200 cycles × 200 shots, 9 control points per channel, GP surrogate.
    Deep,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 2; --help/--version exit 0.
            let code = u8::from(e.use_stderr()) * 2;
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("Q3P_LOG", "warn"))
        .format_timestamp(None)
        .try_init();

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: configuring {threads} threads: {e}");
            return ExitCode::from(1);
        }
    }

    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth(args) => cmd_synth(args),
        Command::Slice(args) => cmd_slice(args),
        Command::Register(args) => cmd_register(args),
        Command::Compile(args) => cmd_compile(args),
        Command::Exact(args) => cmd_exact(args),
        Command::Qae(args) => cmd_qae(args),
        Command::Vqa(args) => cmd_vqa(args),
        Command::Landscape(args) => cmd_landscape(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

/// Resolve the `--noise` flag: nothing → noiseless, `hardware` → the
/// calibrated defaults, inline JSON (starts with `{`) → parsed directly,
/// anything else → path to a JSON file. The run's `--seed` always overrides
/// the seed field so one flag controls all randomness.
fn parse_noise(spec: Option<&str>, seed: u64) -> Result<(NoiseModel, Option<PathBuf>)> {
    let (model, input) = match spec {
        None => (NoiseModel::noiseless(), None),
        Some("hardware") => (NoiseModel::hardware(), None),
        Some(s) if s.trim_start().starts_with('{') => (
            serde_json::from_str(s).context("parsing inline --noise JSON")?,
            None,
        ),
        Some(path) => {
            let path = PathBuf::from(path);
            let model: NoiseModel = read_json(&path, "noise model")?;
            (model, Some(path))
        }
    };
    Ok((model.with_seed(seed), input))
}

fn write_svg(content: &str, path: &Path) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// synth

/// Input schema for `synth --components`.
#[derive(Deserialize)]
struct SynthSpec {
    grid: GridSpec,
    components: Vec<GaussianComponent>,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    /// Mixture spec JSON: {"grid": {"shape", "spacing", "origin"},
    /// "components": [{"center", "variance", "amplitude"?}]}.
    #[arg(long)]
    components: PathBuf,
    /// Normalize the result to unit integral before writing.
    #[arg(long)]
    normalize: bool,
    /// Output density (json-grid).
    #[arg(long)]
    out: PathBuf,
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let spec: SynthSpec = read_json(&args.components, "mixture spec")?;
    let mut field = synthesize_mixture(&spec.components, &spec.grid)?;
    if args.normalize {
        field = field.normalize()?;
    }
    save_grid(&field, &args.out, GridFormat::JsonGrid)?;
    log::info!("wrote {}", args.out.display());

    let mut manifest = RunManifest::new("synth", None, serde_json::to_value(&args)?);
    manifest.input(&args.components);
    manifest.output(&args.out);
    manifest.write(&manifest_path_for(&args.out))
}

// ---------------------------------------------------------------------------
// slice

#[derive(Args, Serialize)]
struct SliceArgs {
    /// 3D density volume.
    #[arg(long)]
    density: PathBuf,
    /// Volume file format; default inferred from the extension (.dx → dx).
    #[arg(long, value_enum)]
    grid_format: Option<GridFormatArg>,
    /// Slice geometry JSON: {"origin", "ax1", "ax2", "shape", "spacing"}.
    #[arg(long)]
    plane: PathBuf,
    /// Number of parallel slices.
    #[arg(long, default_value_t = 1)]
    slices: usize,
    /// Separation between consecutive slices along the plane normal.
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    /// Slice k is written to <out-prefix>_<k>.json.
    #[arg(long)]
    out_prefix: String,
}

fn infer_format(path: &Path, explicit: Option<GridFormatArg>) -> GridFormat {
    match explicit {
        Some(f) => f.into(),
        None if path.extension().is_some_and(|e| e == "dx") => GridFormat::Dx,
        None => GridFormat::JsonGrid,
    }
}

fn cmd_slice(args: SliceArgs) -> Result<()> {
    let field = load_grid(&args.density, infer_format(&args.density, args.grid_format))?;
    let plane: SlicePlane = read_json(&args.plane, "slice plane")?;
    let slices = slice_volume(&field, &plane, args.slices, args.spacing)?;

    let mut manifest = RunManifest::new("slice", None, serde_json::to_value(&args)?);
    manifest.input(&args.density);
    manifest.input(&args.plane);
    for (k, slice) in slices.iter().enumerate() {
        let path = PathBuf::from(format!("{}_{k}.json", args.out_prefix));
        save_grid(slice, &path, GridFormat::JsonGrid)?;
        log::info!("wrote {}", path.display());
        manifest.output(&path);
    }
    manifest.write(&manifest_path_for_prefix(&args.out_prefix))
}

// ---------------------------------------------------------------------------
// register

#[derive(Args, Serialize)]
struct RegisterArgs {
    /// 2D density slice (json-grid).
    #[arg(long)]
    density: PathBuf,
    /// Keep candidate traps where density ≥ threshold · max(density).
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Physical distance between neighboring kept traps, µm.
    #[arg(long, default_value_t = 5.0)]
    spacing: f64,
    /// Candidate-lattice pitch in the density grid's own length units.
    #[arg(long, default_value_t = 1.0)]
    pitch: f64,
    /// Optional physical trap layout JSON ([[x, y], …], µm) to fit onto.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Output register JSON.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_register(args: RegisterArgs) -> Result<()> {
    let field = load_grid(&args.density, GridFormat::JsonGrid)?;
    let mut register = build_register(&field, args.threshold, args.spacing, args.pitch)?;
    if let Some(layout_path) = &args.layout {
        let layout: Vec<[f64; 2]> = read_json(layout_path, "trap layout")?;
        register = fit_to_traps(&register, &layout)?;
    }
    write_json(&register, &args.out)?;

    let mut manifest = RunManifest::new("register", None, serde_json::to_value(&args)?);
    manifest.input(&args.density);
    if let Some(layout_path) = &args.layout {
        manifest.input(layout_path);
    }
    manifest.output(&args.out);
    manifest.write(&manifest_path_for(&args.out))
}

// ---------------------------------------------------------------------------
// compile

#[derive(Args, Serialize)]
struct CompileArgs {
    /// 2D density slice (json-grid). Normalized (clamped at 0, scaled to
    /// unit integral) before compilation.
    #[arg(long)]
    density: PathBuf,
    /// Register JSON from `q3p register`.
    #[arg(long)]
    register: PathBuf,
    /// Shared Gaussian variance σ², in squared grid length units.
    #[arg(long, default_value_t = 5.0)]
    variance: f64,
    /// Per-site amplitude rule.
    #[arg(long, value_enum, default_value_t = AmplitudeRule::Uniform)]
    amplitudes: AmplitudeRule,
    /// Exclusion radius in grid length units; default maps the register's
    /// blockade radius back through its grid frame.
    #[arg(long)]
    exclusion: Option<f64>,
    /// Output placement-problem JSON.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_compile(args: CompileArgs) -> Result<()> {
    let field = load_grid(&args.density, GridFormat::JsonGrid)?
        .normalize()
        .context("normalizing the density")?;
    let register: Register = read_json(&args.register, "register")?;
    let sites = register.sites_in_grid_coords();

    let amplitudes: Option<Vec<f64>> = match args.amplitudes {
        AmplitudeRule::Uniform => None,
        AmplitudeRule::Density => {
            let local: Vec<f64> = sites.iter().map(|s| field.interpolate(s)).collect();
            let peak = local.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(peak > 0.0) {
                bail!("density vanishes at every register site; cannot scale amplitudes");
            }
            Some(local.iter().map(|v| (v / peak).max(0.0)).collect())
        }
    };
    let exclusion = args
        .exclusion
        .unwrap_or_else(|| register.blockade_radius() / register.grid_frame().scale);

    let problem = compile_problem(&field, &sites, args.variance, amplitudes.as_deref(), exclusion)?;
    if let Some(warning) = problem.truncation_warning() {
        log::warn!("{warning}");
    }
    write_json(&problem, &args.out)?;

    let mut manifest = RunManifest::new(
        "compile",
        None,
        json!({
            "density": args.density,
            "register": args.register,
            "variance": args.variance,
            "amplitudes": args.amplitudes,
            "exclusion": exclusion,
            "out": args.out,
        }),
    );
    manifest.input(&args.density);
    manifest.input(&args.register);
    manifest.output(&args.out);
    manifest.write(&manifest_path_for(&args.out))
}

// ---------------------------------------------------------------------------
// exact

#[derive(Args, Serialize)]
struct ExactArgs {
    /// Placement-problem JSON.
    #[arg(long)]
    problem: PathBuf,
    /// Ignore the minimum-distance exclusion constraint.
    #[arg(long)]
    no_exclusion: bool,
    /// Output placement JSON.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_exact(args: ExactArgs) -> Result<()> {
    let problem: PlacementProblem = read_json(&args.problem, "placement problem")?;
    let placement = exact_solve(&problem, !args.no_exclusion);
    write_json(&placement, &args.out)?;

    let mut manifest = RunManifest::new("exact", None, serde_json::to_value(&args)?);
    manifest.input(&args.problem);
    manifest.output(&args.out);
    manifest.write(&manifest_path_for(&args.out))
}

// ---------------------------------------------------------------------------
// qae

#[derive(Args, Serialize)]
struct QaeArgs {
    /// Placement-problem JSON.
    #[arg(long)]
    problem: PathBuf,
    /// Register JSON.
    #[arg(long)]
    register: PathBuf,
    /// Master seed for sampling and noise draws.
    #[arg(long)]
    seed: u64,
    /// Measurement shots.
    #[arg(long, default_value_t = 1000)]
    shots: u64,
    /// Noise model: `hardware`, inline JSON, or a JSON file path.
    #[arg(long)]
    noise: Option<String>,
    /// Pulse duration T, seconds.
    #[arg(long, default_value_t = DEFAULT_DURATION)]
    duration: f64,
    /// Peak Rabi frequency, rad/s.
    #[arg(long, default_value_t = DEFAULT_OMEGA_MAX)]
    omega_max: f64,
    /// Initial uniform negative detuning magnitude, rad/s (default: --delta-max).
    #[arg(long)]
    c: Option<f64>,
    /// Final per-site detuning magnitude cap, rad/s.
    #[arg(long, default_value_t = DEFAULT_DELTA_MAX)]
    delta_max: f64,
    /// Histogram artifact format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also render the histogram as <out-prefix>.svg.
    #[arg(long)]
    svg: bool,
    /// Artifacts are written to <out-prefix>.{hist.csv|hist.json,winner.json,svg,manifest.json}.
    #[arg(long)]
    out_prefix: String,
}

fn write_histogram_artifact(
    histogram: &q3p_core::SampleHistogram,
    format: Format,
    prefix: &str,
    manifest: &mut RunManifest,
) -> Result<PathBuf> {
    let path = match format {
        Format::Csv => {
            let path = PathBuf::from(format!("{prefix}.hist.csv"));
            write_histogram_csv(histogram, &path)?;
            path
        }
        Format::Json => {
            let path = PathBuf::from(format!("{prefix}.hist.json"));
            write_json(histogram, &path)?;
            path
        }
    };
    manifest.output(&path);
    Ok(path)
}

fn cmd_qae(args: QaeArgs) -> Result<()> {
    let problem: PlacementProblem = read_json(&args.problem, "placement problem")?;
    let register: Register = read_json(&args.register, "register")?;
    let (noise, noise_input) = parse_noise(args.noise.as_deref(), args.seed)?;

    let schedule = AdiabaticSchedule {
        duration: args.duration,
        omega_max: args.omega_max,
        c: args.c.unwrap_or(args.delta_max),
        delta_max: args.delta_max,
        // Recomputed from the problem inside run_qae; placeholder keeps the
        // schedule well-formed.
        final_deltas: vec![0.0; problem.len()],
    };
    let outcome = run_qae(&problem, &register, &schedule, args.shots, &noise)?;

    let mut manifest = RunManifest::new(
        "qae",
        Some(args.seed),
        json!({
            "problem": args.problem,
            "register": args.register,
            "shots": args.shots,
            "noise": noise,
            "duration": schedule.duration,
            "omega_max": schedule.omega_max,
            "c": schedule.c,
            "delta_max": schedule.delta_max,
            "format": args.format,
            "svg": args.svg,
            "out_prefix": args.out_prefix,
        }),
    );
    manifest.input(&args.problem);
    manifest.input(&args.register);
    if let Some(p) = &noise_input {
        manifest.input(p);
    }

    write_histogram_artifact(&outcome.histogram, args.format, &args.out_prefix, &mut manifest)?;
    let winner_path = PathBuf::from(format!("{}.winner.json", args.out_prefix));
    write_json(&outcome.placement, &winner_path)?;
    manifest.output(&winner_path);

    if args.svg {
        let entries: Vec<(String, u64)> = outcome
            .histogram
            .sorted_entries()
            .into_iter()
            .map(|(b, c)| (b.to_string(), c))
            .collect();
        let winner = outcome.placement.bitstring.to_string();
        let chart = svg::bar_chart(&entries, Some(&winner), "adiabatic sampling histogram");
        let svg_path = PathBuf::from(format!("{}.svg", args.out_prefix));
        write_svg(&chart, &svg_path)?;
        manifest.output(&svg_path);
    }
    manifest.write(&manifest_path_for_prefix(&args.out_prefix))
}

// ---------------------------------------------------------------------------
// vqa

#[derive(Args, Serialize)]
struct VqaArgs {
    /// Placement-problem JSON.
    #[arg(long)]
    problem: PathBuf,
    /// Register JSON.
    #[arg(long)]
    register: PathBuf,
    /// Master seed for proposals, sampling, and noise draws.
    #[arg(long)]
    seed: u64,
    /// Named configuration; explicit flags below override its values.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Measurement shots per optimization cycle (0 = exact expectations).
    #[arg(long)]
    shots: Option<u64>,
    /// Noise model: `hardware`, inline JSON, or a JSON file path.
    #[arg(long)]
    noise: Option<String>,
    /// Control points per channel (m).
    #[arg(long)]
    control_points: Option<usize>,
    /// Total optimization cycles.
    #[arg(long)]
    cycles: Option<usize>,
    /// Random warmup cycles.
    #[arg(long)]
    warmup: Option<usize>,
    /// Proposal strategy after warmup.
    #[arg(long, value_enum)]
    minimizer: Option<MinimizerArg>,
    /// Pulse duration T, seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Rabi control-point ceiling, rad/s.
    #[arg(long)]
    omega_max: Option<f64>,
    /// Detuning control-point magnitude cap, rad/s.
    #[arg(long)]
    delta_max: Option<f64>,
    /// Histogram artifact format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also render the final histogram as <out-prefix>.svg.
    #[arg(long)]
    svg: bool,
    /// Artifacts: <out-prefix>.{trace.jsonl,hist.*,winner.json,svg,manifest.json}.
    #[arg(long)]
    out_prefix: String,
}

/// The compact result summary written next to the full trace.
#[derive(Serialize)]
struct VqaSummary<'a> {
    placement: &'a Placement,
    /// Most-sampled bitstring of the final histogram — reported alongside
    /// the minimal-cost placement because the two rules can disagree.
    modal: String,
    best_cost: f64,
    /// Physical best parameters: m Rabi points then m detuning points.
    best_params: &'a [f64],
}

fn resolve_vqa_config(args: &VqaArgs) -> OptimizerConfig {
    let mut config = OptimizerConfig::default();
    match args.preset {
        Some(Preset::Fast) => {
            config.control_points = 9;
            config.cycles = 50;
            config.warmup_cycles = 10;
            config.shots_per_cycle = 200;
            config.minimizer = Minimizer::Gp;
        }
        Some(Preset::Deep) => {
            config.control_points = 9;
            config.cycles = 200;
            config.warmup_cycles = 20;
            config.shots_per_cycle = 200;
            config.minimizer = Minimizer::Gp;
        }
        None => {}
    }
    if let Some(m) = args.control_points {
        config.control_points = m;
    }
    if let Some(n) = args.cycles {
        config.cycles = n;
    }
    if let Some(n) = args.warmup {
        config.warmup_cycles = n;
    }
    if let Some(s) = args.shots {
        config.shots_per_cycle = s;
    }
    if let Some(m) = args.minimizer {
        config.minimizer = m.into();
    }
    if let Some(t) = args.duration {
        config.duration = t;
    }
    if let Some(w) = args.omega_max {
        config.bounds.omega_max = w;
    }
    if let Some(d) = args.delta_max {
        config.bounds.delta_max = d;
    }
    config.seed = args.seed;
    config
}

fn cmd_vqa(args: VqaArgs) -> Result<()> {
    let problem: PlacementProblem = read_json(&args.problem, "placement problem")?;
    let register: Register = read_json(&args.register, "register")?;
    let (noise, noise_input) = parse_noise(args.noise.as_deref(), args.seed)?;
    let config = resolve_vqa_config(&args);

    let outcome = run_vqa(&problem, &register, &config, &noise)?;

    let mut manifest = RunManifest::new(
        "vqa",
        Some(args.seed),
        json!({
            "problem": args.problem,
            "register": args.register,
            "noise": noise,
            "config": config,
            "format": args.format,
            "svg": args.svg,
            "out_prefix": args.out_prefix,
        }),
    );
    manifest.input(&args.problem);
    manifest.input(&args.register);
    if let Some(p) = &noise_input {
        manifest.input(p);
    }

    // One CycleRecord per line, in evaluation order.
    let trace_path = PathBuf::from(format!("{}.trace.jsonl", args.out_prefix));
    let mut trace_text = String::new();
    for record in &outcome.trace {
        let _ = writeln!(trace_text, "{}", serde_json::to_string(record)?);
    }
    fs::write(&trace_path, trace_text)
        .with_context(|| format!("writing {}", trace_path.display()))?;
    log::info!("wrote {}", trace_path.display());
    manifest.output(&trace_path);

    write_histogram_artifact(&outcome.histogram, args.format, &args.out_prefix, &mut manifest)?;

    let winner_path = PathBuf::from(format!("{}.winner.json", args.out_prefix));
    write_json(
        &VqaSummary {
            placement: &outcome.placement,
            modal: outcome.modal.to_string(),
            best_cost: outcome.best_cost,
            best_params: &outcome.best_params,
        },
        &winner_path,
    )?;
    manifest.output(&winner_path);

    if args.svg {
        let entries: Vec<(String, u64)> = outcome
            .histogram
            .sorted_entries()
            .into_iter()
            .map(|(b, c)| (b.to_string(), c))
            .collect();
        let winner = outcome.placement.bitstring.to_string();
        let chart = svg::bar_chart(&entries, Some(&winner), "variational sampling histogram");
        let svg_path = PathBuf::from(format!("{}.svg", args.out_prefix));
        write_svg(&chart, &svg_path)?;
        manifest.output(&svg_path);
    }
    manifest.write(&manifest_path_for_prefix(&args.out_prefix))
}

// ---------------------------------------------------------------------------
// landscape

#[derive(Args, Serialize)]
struct LandscapeArgs {
    /// Register JSON.
    #[arg(long)]
    register: PathBuf,
    /// Target bitstring whose population is scanned (e.g. 0110).
    #[arg(long)]
    target: String,
    /// Constant Rabi frequency, rad/s.
    #[arg(long, default_value_t = DEFAULT_OMEGA_MAX)]
    omega: f64,
    /// Lowest scanned detuning, rad/s.
    #[arg(long, default_value_t = -DEFAULT_DELTA_MAX)]
    delta_min: f64,
    /// Highest scanned detuning, rad/s.
    #[arg(long, default_value_t = DEFAULT_DELTA_MAX)]
    delta_max: f64,
    /// Shortest scanned duration, seconds.
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    /// Longest scanned duration, seconds.
    #[arg(long, default_value_t = 1e-6)]
    t_max: f64,
    /// Detuning samples (matrix rows).
    #[arg(long, default_value_t = 8)]
    rows: usize,
    /// Duration samples (matrix columns).
    #[arg(long, default_value_t = 8)]
    cols: usize,
    /// Shots per grid cell (0 = exact projector expectations).
    #[arg(long, default_value_t = 500)]
    shots: u64,
    /// Master seed; each cell derives its own stream.
    #[arg(long)]
    seed: u64,
    /// Noise model: `hardware`, inline JSON, or a JSON file path.
    #[arg(long)]
    noise: Option<String>,
    /// Output CSV (two axis header rows, then the population matrix).
    #[arg(long)]
    out: PathBuf,
}

fn cmd_landscape(args: LandscapeArgs) -> Result<()> {
    let register: Register = read_json(&args.register, "register")?;
    let target: Bitstring = args
        .target
        .parse()
        .with_context(|| format!("parsing --target '{}'", args.target))?;
    let (noise, noise_input) = parse_noise(args.noise.as_deref(), args.seed)?;

    let scan = emulator::landscape_scan(
        &register,
        &target,
        args.omega,
        (args.delta_min, args.delta_max),
        (args.t_min, args.t_max),
        (args.rows, args.cols),
        args.shots,
        &noise,
    )?;
    write_landscape_csv(&scan, &args.out)?;

    let mut manifest = RunManifest::new(
        "landscape",
        Some(args.seed),
        json!({
            "register": args.register,
            "target": args.target,
            "omega": args.omega,
            "delta_min": args.delta_min,
            "delta_max": args.delta_max,
            "t_min": args.t_min,
            "t_max": args.t_max,
            "rows": args.rows,
            "cols": args.cols,
            "shots": args.shots,
            "noise": noise,
            "out": args.out,
        }),
    );
    manifest.input(&args.register);
    if let Some(p) = &noise_input {
        manifest.input(p);
    }
    manifest.output(&args.out);
    manifest.write(&manifest_path_for(&args.out))
}

// ---------------------------------------------------------------------------
// plot

#[derive(Args, Serialize)]
#[command(group(
    ArgGroup::new("source").required(true).args(["hist", "landscape"])
))]
struct PlotArgs {
    /// Histogram CSV (`bitstring,count`) to draw as a bar chart.
    #[arg(long)]
    hist: Option<PathBuf>,
    /// Winner bitstring to highlight in the bar chart.
    #[arg(long, requires = "hist")]
    winner: Option<String>,
    /// Landscape CSV to draw as a heat map.
    #[arg(long)]
    landscape: Option<PathBuf>,
    /// Output SVG.
    #[arg(long)]
    out: PathBuf,
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let mut manifest = RunManifest::new("plot", None, serde_json::to_value(&args)?);
    let content = if let Some(hist_path) = &args.hist {
        let entries = read_histogram_csv(hist_path)?;
        manifest.input(hist_path);
        svg::bar_chart(&entries, args.winner.as_deref(), "sampling histogram")
    } else {
        let path = args.landscape.as_ref().expect("clap group guarantees one source");
        let data = read_landscape_csv(path)?;
        manifest.input(path);
        svg::heatmap(
            &data.deltas,
            &data.durations,
            &data.values,
            "target-population landscape",
        )
    };
    write_svg(&content, &args.out)?;
    manifest.output(&args.out);
    manifest.write(&manifest_path_for(&args.out))
}
