//! `ringfill` batch front end.
//!
//! Exit status: 0 on success, 2 on usage errors (bad flags or solver
//! settings), 1 on runtime failures (I/O, shape mismatches, divergence).

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use ringfill::experiment::{self, Algorithm, SweepSpec};
use ringfill::io::{self, format_f64};
use ringfill::metrics::{psnr, rse};
use ringfill::tensor::{project, Selection};
use ringfill::{DenseTensor, Execution, ObservationMask, SeededRng, SolverConfig, XInit};

#[derive(Parser)]
#[command(name = "ringfill", version, about = "Tensor-ring completion of incomplete N-way arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Complete a tensor file given an observation mask.
    Complete(CompleteArgs),
    /// Rank sweep on synthetic tensor-ring data; writes one CSV row per run.
    Synth(SynthArgs),
    /// Inpaint a randomly masked PPM image.
    Image(ImageArgs),
    /// Compare two tensor files.
    Eval(EvalArgs),
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Weight of the data-fit term.
    #[arg(long, default_value_t = 5.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    mu0: f64,
    #[arg(long = "mu-max", default_value_t = 100.0)]
    mu_max: f64,
    #[arg(long, default_value_t = 1.01)]
    rho: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration cap (sweep cap for trals).
    #[arg(long = "k-max", default_value_t = 300)]
    k_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fill for unobserved entries of the first iterate: zero | mean.
    #[arg(long = "x-init", default_value = "zero", value_parser = parse_x_init)]
    x_init: XInit,
}

impl SolverArgs {
    fn config(&self, ranks: Vec<usize>) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda,
            mu0: self.mu0,
            mu_max: self.mu_max,
            rho: self.rho,
            tol: self.tol,
            k_max: self.k_max,
            seed: self.seed,
            x_init: self.x_init,
            ..SolverConfig::new(ranks)
        }
    }
}

#[derive(Args)]
struct CompleteArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// TR-ranks: one value per mode, or a single value for all modes.
    #[arg(long, value_parser = parse_list)]
    ranks: List,
    #[arg(long, default_value = "trlrf", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-iteration trace as CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Comma-separated extents, e.g. 20,20,20,20.
    #[arg(long, value_parser = parse_list)]
    shape: List,
    #[arg(long = "true-rank")]
    true_rank: usize,
    /// Standard deviation of the generating cores.
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    missing: f64,
    /// Solver ranks: list `4,6,8` or inclusive range `2:12`.
    #[arg(long, value_parser = parse_rank_set)]
    ranks: List,
    #[arg(long, default_value = "trlrf,trals", value_parser = parse_algorithms)]
    algorithms: Algorithms,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct ImageArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    missing: f64,
    #[arg(long, value_parser = parse_list)]
    ranks: List,
    #[arg(long, default_value = "trlrf", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "mask-out")]
    mask_out: Option<PathBuf>,
    /// CSV with RSE and PSNR against the input image.
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long)]
    history: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    est: PathBuf,
    /// Also report PSNR (0..255 scale).
    #[arg(long)]
    psnr: bool,
}

/// Comma-separated values as one argument.
#[derive(Clone, Debug)]
struct List(Vec<usize>);

#[derive(Clone, Debug)]
struct Algorithms(Vec<Algorithm>);

fn parse_list(s: &str) -> Result<List, String> {
    let values = s
        .split(',')
        .map(|t| {
            let v = t
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("{t:?} is not a positive integer"))?;
            if v == 0 {
                return Err("values must be >= 1".to_string());
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(List(values))
}

fn parse_rank_set(s: &str) -> Result<List, String> {
    match s.split_once(':') {
        Some((lo, hi)) => {
            let lo: usize = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
            let hi: usize = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
            if lo == 0 || hi < lo {
                return Err(format!("empty or invalid range {s}"));
            }
            Ok(List((lo..=hi).collect()))
        }
        None => parse_list(s),
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: ringfill::Error| e.to_string())
}

fn parse_algorithms(s: &str) -> Result<Algorithms, String> {
    s.split(',').map(parse_algorithm).collect::<Result<_, _>>().map(Algorithms)
}

fn parse_x_init(s: &str) -> Result<XInit, String> {
    match s {
        "zero" => Ok(XInit::Zero),
        "mean" | "observed_mean" => Ok(XInit::ObservedMean),
        other => Err(format!("unknown x-init {other:?}; use zero or mean")),
    }
}

/// Bad arguments discovered after parsing; reported with exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

/// Expands a single rank to every mode and checks the solver settings.
fn solver_config(args: &SolverArgs, ranks: &[usize], order: usize) -> anyhow::Result<SolverConfig> {
    let ranks = match ranks.len() {
        1 => vec![ranks[0]; order],
        n if n == order => ranks.to_vec(),
        n => return Err(usage(format!("--ranks has {n} values but the tensor has {order} modes"))),
    };
    let config = args.config(ranks);
    config.validate().map_err(|e| usage(e.to_string()))?;
    Ok(config)
}

fn emit(key: &str, value: impl Display) {
    println!("{key}={value}");
}

fn cmd_complete(args: CompleteArgs) -> anyhow::Result<()> {
    args.solver.config(vec![1; 3]).validate().map_err(|e| usage(e.to_string()))?;
    let tensor = io::read_tensor(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let mask = io::read_mask(&args.mask).with_context(|| format!("reading {}", args.mask.display()))?;
    if tensor.shape() != mask.shape() {
        bail!(
            "mask shape {:?} does not match tensor shape {:?}",
            mask.shape(),
            tensor.shape()
        );
    }
    let config = solver_config(&args.solver, &args.ranks.0, tensor.order())?;
    let observed = project(&tensor, &mask, Selection::Observed)?;

    let start = Instant::now();
    let result = experiment::complete(args.algorithm, &observed, &mask, &config)?;
    let seconds = start.elapsed().as_secs_f64();

    if let Some(path) = &args.output {
        io::write_tensor(&result.estimate, path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.history {
        io::write_history_csv(&result, path).with_context(|| format!("writing {}", path.display()))?;
    }
    // fit of the factor model itself on the observed entries
    let model = project(&result.factors.full_contract(), &mask, Selection::Observed)?;
    let fit = if observed.frobenius_norm() > 0.0 {
        rse(&observed, &model)?
    } else {
        0.0
    };
    emit("algorithm", args.algorithm);
    emit("rse_observed", format_f64(fit));
    emit("iterations", result.iterations);
    emit("converged", result.converged);
    emit("wall_time_seconds", format_f64(seconds));
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<()> {
    let shape = args.shape.0;
    if shape.len() < 3 {
        return Err(usage("--shape needs at least 3 extents"));
    }
    if !(0.0..1.0).contains(&args.missing) {
        return Err(usage(format!("--missing must lie in [0, 1), got {}", args.missing)));
    }
    if args.repeats == 0 {
        return Err(usage("--repeats must be >= 1"));
    }
    let mut solver = solver_config(&args.solver, &[args.true_rank], shape.len())?;
    solver.execution = Execution::Sequential;
    let spec = SweepSpec {
        sigma: args.sigma,
        missing_rate: args.missing,
        ranks: args.ranks.0,
        algorithms: args.algorithms.0.clone(),
        repeats: args.repeats,
        seed: args.solver.seed,
        solver,
        ..SweepSpec::new(shape, args.true_rank)
    };
    let rows = experiment::run_sweep(&spec)?;
    std::fs::write(&args.out, experiment::sweep_csv(&rows))
        .with_context(|| format!("writing {}", args.out.display()))?;
    emit("rows", rows.len());
    for algorithm in &args.algorithms.0 {
        let medians = experiment::median_rse(&rows, *algorithm);
        if let Some((rank, value)) = medians.iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
            emit(&format!("{algorithm}_best_rank"), rank);
            emit(&format!("{algorithm}_best_median_rse"), format_f64(*value));
        }
    }
    Ok(())
}

fn cmd_image(args: ImageArgs) -> anyhow::Result<()> {
    if !(0.0..1.0).contains(&args.missing) {
        return Err(usage(format!("--missing must lie in [0, 1), got {}", args.missing)));
    }
    let config = solver_config(&args.solver, &args.ranks.0, 3)?;
    let image = io::read_ppm(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let mut rng = SeededRng::derive(args.solver.seed, &[0x1a6e]);
    let mask = ObservationMask::sample(image.shape().to_vec(), args.missing, &mut rng)?;
    if mask.observed_count() == 0 {
        bail!("missing rate {} leaves no observed pixels", args.missing);
    }
    let observed = project(&image, &mask, Selection::Observed)?;

    let start = Instant::now();
    let result = experiment::complete(args.algorithm, &observed, &mask, &config)?;
    let seconds = start.elapsed().as_secs_f64();

    io::write_ppm(&result.estimate, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.mask_out {
        io::write_mask(&mask, path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.history {
        io::write_history_csv(&result, path).with_context(|| format!("writing {}", path.display()))?;
    }
    // score what was written: pixels after clamping and rounding
    let written = DenseTensor::new(
        result.estimate.shape().to_vec(),
        result.estimate.data().iter().map(|&v| io::to_pixel(v) as f64).collect(),
    )?;
    let rse_value = rse(&image, &written)?;
    let psnr_value = psnr(&image, &written)?;
    let baseline = psnr(&image, &observed)?;
    if let Some(path) = &args.metrics {
        let csv = format!(
            "rse,psnr,iterations,wall_time_seconds\n{},{},{},{}\n",
            format_f64(rse_value),
            format_f64(psnr_value),
            result.iterations,
            format_f64(seconds)
        );
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    emit("rse", format_f64(rse_value));
    emit("psnr", format_f64(psnr_value));
    emit("psnr_zero_filled", format_f64(baseline));
    emit("iterations", result.iterations);
    emit("wall_time_seconds", format_f64(seconds));
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<()> {
    let reference = io::read_tensor(&args.reference)
        .with_context(|| format!("reading {}", args.reference.display()))?;
    let estimate = io::read_tensor(&args.est).with_context(|| format!("reading {}", args.est.display()))?;
    if reference.shape() != estimate.shape() {
        bail!(
            "shape mismatch: reference {:?}, estimate {:?}",
            reference.shape(),
            estimate.shape()
        );
    }
    emit("rse", format_f64(rse(&reference, &estimate)?));
    if args.psnr {
        emit("psnr", format_f64(psnr(&reference, &estimate)?));
    }
    Ok(())
}

fn thread_cap() -> anyhow::Result<usize> {
    match std::env::var("RINGFILL_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("RINGFILL_THREADS must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    ringfill::par::configure_threads(thread_cap()?);
    match cli.command {
        Command::Complete(args) => cmd_complete(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Image(args) => cmd_image(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
