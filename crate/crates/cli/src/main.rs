//! `hypex`: simulate, estimate and predict extremal indices from config files.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypex_core::config::ExperimentConfig;
use hypex_core::diagnostics::{aq_ratio, short_return_sum, DiagnosticsOptions, ReturnSumReport};
use hypex_core::evt::{block_maxima, fit_gev, EIEstimate, Estimator, QConvention};
use hypex_core::experiment::run_experiment;
use hypex_core::rng::{stream, stream_index};
use hypex_core::systems::trajectory_io::write_trajectory;
use hypex_core::systems::{orbit, realization_series};
use hypex_core::theory::predict_for;
use hypex_core::{recipes, Error, Result};
use serde_json::json;

const WORKERS_ENV: &str = "HYPEX_WORKERS";

#[derive(Parser)]
#[command(name = "hypex", version, about = "Extreme value statistics for hyperbolic systems")]
struct Cli {
    /// Repeat for more log output on stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the observable series of one realization.
    Simulate(SimulateArgs),
    /// Estimate the extremal index from a series file or a config.
    Ei(EiArgs),
    /// Fit a GEV to block maxima.
    Gev(GevArgs),
    /// Closed-form extremal index prediction.
    Theta(ThetaArgs),
    /// Monte-Carlo return diagnostics.
    Diagnose(DiagnoseArgs),
    /// Run a checked-in figure recipe.
    Replicate(ReplicateArgs),
}

#[derive(Args)]
struct RealizationArgs {
    #[arg(long)]
    config: PathBuf,
    /// Sweep point, in sweep order.
    #[arg(long, default_value_t = 0)]
    point: usize,
    #[arg(long, default_value_t = 0)]
    realization: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    r: RealizationArgs,
    /// Series CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the raw orbit in the binary trajectory format.
    #[arg(long)]
    trajectory: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Suveges,
    Blocks,
    Runs,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    /// One-column CSV, `-` for stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EiArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 0.98, conflicts_with = "config")]
    quantile: f64,
    #[arg(long, value_enum, default_value_t = Method::Suveges, conflicts_with = "config")]
    method: Method,
    /// Süveges gap K.
    #[arg(long, default_value_t = 1, conflicts_with = "config")]
    gap: usize,
    /// Use the quantile level instead of the exceedance probability as q.
    #[arg(long, conflicts_with = "config")]
    q_is_level: bool,
    #[arg(long, default_value_t = 100, conflicts_with = "config")]
    block_len: usize,
    #[arg(long, default_value_t = 10, conflicts_with = "config")]
    run_gap: usize,
    /// CSV output; with --config a JSON summary is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GevArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    block_len: usize,
}

#[derive(Args)]
struct ThetaArgs {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// mu(A_n^(q)) / mu(U_n).
    Aq,
    /// Short-return sums n * sum_j mu(E ∩ T^-j E).
    Returns,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Aq)]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Threshold scale: U_n has measure about tau / n.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    j_max: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 1_000_000)]
    calibration_len: usize,
    /// CSV (j, estimate, stderr) for the returns mode; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplicateArgs {
    /// Figure id, see --list.
    #[arg(required_unless_present = "list")]
    figure_id: Option<String>,
    #[arg(long)]
    list: bool,
    /// Write <id>.csv and <id>.json here instead of the CSV to stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match try_main(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn try_main(cli: Cli) -> Result<ExitCode> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
        hypex_core::parallel::configure_workers(n)?;
    }
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Ei(a) => ei(a),
        Command::Gev(a) => gev(a),
        Command::Theta(a) => theta(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Replicate(a) => replicate(a),
    }
}

fn load(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_path(path).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("cannot read config {}: {io}", path.display())),
        other => other,
    })
}

fn point_config(cfg: &ExperimentConfig, point: usize) -> Result<ExperimentConfig> {
    let mut pts = cfg.sweep_points()?;
    if point >= pts.len() {
        return Err(Error::Config(format!("sweep point {point} out of range, config has {}", pts.len())));
    }
    Ok(pts.swap_remove(point).1)
}

/// The series `run_experiment` sees for one realization.
fn realization(r: &RealizationArgs) -> Result<(ExperimentConfig, Vec<f64>)> {
    let cfg = load(&r.config)?;
    let pc = point_config(&cfg, r.point)?;
    let c = pc.compile()?;
    let mut rng = stream(cfg.seed, stream_index(r.point, r.realization));
    let s = realization_series(&c.system, &c.observable, pc.n, pc.burn_in, &mut rng)?;
    Ok((pc, s))
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let (pc, series) = realization(&a.r)?;
    io::with_output(a.out.as_deref(), |w| io::write_series(w, &series))?;
    if let Some(path) = &a.trajectory {
        let c = pc.compile()?;
        let mut rng = stream(pc.seed, stream_index(a.r.point, a.r.realization));
        let mut x = c.system.sample_invariant(&mut rng);
        for _ in 0..pc.burn_in {
            c.system.step(&mut x, &mut rng)?;
        }
        let t = orbit(&c.system, x, pc.n, &mut rng)?;
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write_trajectory(&mut f, &t)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn estimate_row(e: &EIEstimate, level: f64) -> String {
    format!("{},{},{},{},{}", e.method.as_str(), e.threshold, level, e.theta_hat, e.n_exceedances)
}

fn ei(a: EiArgs) -> Result<ExitCode> {
    if let Some(cfg) = &a.source.config {
        let res = run_experiment(&load(cfg)?)?;
        match &a.out {
            Some(p) => {
                res.write_files(p)?;
                println!("{}", res.summary_json());
            }
            None => io::with_output(None, |w| res.write_csv(w))?,
        }
        return Ok(ExitCode::SUCCESS);
    }
    let series = io::read_series(a.source.input.as_deref().expect("clap enforces a source"))?;
    let est = match a.method {
        Method::Suveges => Estimator::Suveges {
            gap: a.gap,
            q_convention: if a.q_is_level { QConvention::QuantileLevel } else { QConvention::ExceedProb },
        },
        Method::Blocks => Estimator::Blocks { block_len: a.block_len },
        Method::Runs => Estimator::Runs { run_gap: a.run_gap },
    };
    est.validate()?;
    let e = est.estimate_at_level(&series, a.quantile)?;
    io::with_output(a.out.as_deref(), |w| {
        writeln!(w, "method,threshold,quantile_level,theta_hat,n_exceedances")?;
        writeln!(w, "{}", estimate_row(&e, a.quantile))?;
        Ok(())
    })?;
    Ok(ExitCode::SUCCESS)
}

fn gev(a: GevArgs) -> Result<ExitCode> {
    let series = match (&a.source.input, &a.source.config) {
        (Some(p), _) => io::read_series(p)?,
        (None, Some(c)) => {
            realization(&RealizationArgs { config: c.clone(), point: 0, realization: 0 })?.1
        }
        _ => unreachable!("clap enforces a source"),
    };
    let maxima = block_maxima(&series, a.block_len)?;
    let fit = fit_gev(&maxima)?;
    let out = json!({
        "location": fit.location,
        "scale": fit.scale,
        "shape": fit.shape,
        "block_len": a.block_len,
        "n_maxima": maxima.len(),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(ExitCode::SUCCESS)
}

fn theta(a: ThetaArgs) -> Result<ExitCode> {
    let cfg = load(&a.config)?;
    let mut out = Vec::new();
    let mut inconclusive = false;
    for (label, pc) in cfg.sweep_points()? {
        let c = pc.compile()?;
        let p = predict_for(&c.system, &c.observable, &pc.theory.options())?;
        inconclusive |= p.inconclusive;
        out.push(json!({
            "label": label,
            "value": p.value,
            "lo": p.lo,
            "hi": p.hi,
            "case_label": p.case_label,
            "inconclusive": p.inconclusive,
            "detail": p.detail,
            "inputs": {"system": pc.system, "observable": pc.observable, "theory": pc.theory},
        }));
    }
    let doc = if out.len() == 1 { out.pop().expect("one point") } else { json!(out) };
    println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    if inconclusive {
        eprintln!("error: prediction is inconclusive: periodic-point search exhausted without a hit");
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

fn returns_csv(w: &mut dyn std::io::Write, r: &ReturnSumReport) -> Result<()> {
    writeln!(w, "j,estimate,stderr")?;
    for e in &r.per_j_estimates {
        writeln!(w, "{},{},{}", e.j, e.estimate, e.stderr)?;
    }
    Ok(())
}

fn diagnose(a: DiagnoseArgs) -> Result<ExitCode> {
    let cfg = load(&a.config)?;
    if !cfg.sweep.is_empty() {
        return Err(Error::Config("diagnose takes a config without [[sweep]]".into()));
    }
    let c = cfg.compile()?;
    let opts = DiagnosticsOptions {
        tau: a.tau,
        calibration_len: a.calibration_len,
        burn_in: cfg.burn_in,
        ..Default::default()
    };
    match a.mode {
        Mode::Aq => {
            let r = aq_ratio(&c.system, &c.observable, a.q, a.n, a.samples, cfg.seed, &opts)?;
            println!("{}", serde_json::to_string_pretty(&r).expect("json"));
        }
        Mode::Returns => {
            let r = short_return_sum(&c.system, &c.observable, a.n, a.j_max, a.samples, cfg.seed, a.q, &opts)?;
            match &a.out {
                Some(p) => {
                    io::with_output(Some(p), |w| returns_csv(w, &r))?;
                    let summary = serde_json::to_string_pretty(&r).expect("json");
                    std::fs::write(p.with_extension("json"), summary.clone() + "\n")?;
                    println!("{summary}");
                }
                None => io::with_output(None, |w| returns_csv(w, &r))?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn replicate(a: ReplicateArgs) -> Result<ExitCode> {
    if a.list {
        for n in recipes::names() {
            println!("{n}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let id = a.figure_id.as_deref().expect("clap requires an id");
    let cfg = recipes::recipe(id)?;
    let res = run_experiment(&cfg)?;
    match &a.out_dir {
        Some(dir) => {
            let csv = dir.join(format!("{id}.csv"));
            res.write_files(&csv)?;
            println!("{}", res.summary_json());
        }
        None => io::with_output(None, |w| res.write_csv(w))?,
    }
    Ok(ExitCode::SUCCESS)
}
