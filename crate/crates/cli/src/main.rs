//! Command-line front end: generate instances, solve them, analyse Gram
//! matrices and run Monte Carlo experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use mimo_cs::analysis::{check_conditions, exact_rip_constant, gram_closed_form, tail_probe_opnorm, DEFAULT_RIP_CAP};
use mimo_cs::experiments::{emit_csv, run_experiment, ExperimentFile, ExperimentSpec, ThresholdRule};
use mimo_cs::io::{self, Instance};
use mimo_cs::solvers::{
    basis_pursuit_denoise, debias, declare_success, lasso, default_lambda, SolverOptions, SolverResult, StepRule,
};
use mimo_cs::support::{balancedness, threshold_amplitude, EtaRule};
use mimo_cs::{DopplerMode, Error, RadarConfig, SignalFamily};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "mimo-cs", version, about = "Sparse recovery for co-located MIMO radar")]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file with experiment settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random instance bundle.
    Generate(GenerateArgs),
    /// Recover the scene of an instance bundle.
    Solve(SolveArgs),
    /// Gram matrix, balancedness and recovery conditions of an instance.
    Analyze(AnalyzeArgs),
    /// Exact restricted isometry constant by enumeration.
    Rip(RipArgs),
    /// Empirical tail of the Gram deviation.
    Tailprobe(TailArgs),
    /// Success rate against sparsity for several balancedness rules.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug, Clone)]
struct Dims {
    /// Number of transmitters.
    #[arg(long)]
    nt: Option<usize>,
    /// Number of receivers.
    #[arg(long)]
    nr: Option<usize>,
    /// Samples per probing signal.
    #[arg(long)]
    ntime: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long, value_enum)]
    family: Option<Family>,
}

impl Dims {
    fn config(&self) -> mimo_cs::Result<RadarConfig> {
        RadarConfig::new(
            self.nt.unwrap_or(8),
            self.nr.unwrap_or(8),
            self.ntime.unwrap_or(64),
            self.mode.unwrap_or(Mode::DopplerFree).into(),
        )
    }

    fn family(&self) -> SignalFamily {
        self.family.unwrap_or(Family::Gaussian).into()
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Mode {
    Full,
    DopplerFree,
}

impl From<Mode> for DopplerMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Full => DopplerMode::Full,
            Mode::DopplerFree => DopplerMode::DopplerFree,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    Gaussian,
    Rademacher,
    Steinhaus,
}

impl From<Family> for SignalFamily {
    fn from(f: Family) -> Self {
        match f {
            Family::Gaussian => SignalFamily::ComplexGaussian,
            Family::Rademacher => SignalFamily::Rademacher,
            Family::Steinhaus => SignalFamily::Steinhaus,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    dims: Dims,
    /// Number of targets.
    #[arg(long)]
    s: usize,
    /// Balancedness: a divisor of N_R or `free`.
    #[arg(long, default_value = "1")]
    eta: String,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Target magnitude; defaults to the recovery threshold for sigma (1 when sigma = 0).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Store raw signal samples instead of only their seed.
    #[arg(long)]
    materialize: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum SolverKind {
    Lasso,
    Bpdn,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Instance bundle directory.
    #[arg(long, default_value = ".")]
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "lasso")]
    solver: SolverKind,
    /// LASSO weight; defaults to 2σ√(2 N_T N_R N_t ln N). Zero switches to BPDN with rho = 0.
    #[arg(long)]
    lambda: Option<f64>,
    /// BPDN residual bound.
    #[arg(long, default_value_t = 0.0)]
    rho: f64,
    #[arg(long, default_value_t = 5000)]
    max_iterations: usize,
    /// Always backtrack instead of using a power-iteration step.
    #[arg(long)]
    backtracking: bool,
    /// Success threshold on the sup-norm error; defaults to half the amplitude.
    #[arg(long)]
    threshold: Option<f64>,
    /// Refit by least squares on the recovered support.
    #[arg(long)]
    debias: bool,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long, default_value = ".")]
    instance: PathBuf,
}

#[derive(Args, Debug)]
struct RipArgs {
    #[command(flatten)]
    dims: Dims,
    #[arg(long)]
    s: usize,
    /// Maximum number of supports to enumerate.
    #[arg(long, default_value_t = DEFAULT_RIP_CAP)]
    cap: u128,
}

#[derive(Args, Debug)]
struct TailArgs {
    #[command(flatten)]
    dims: Dims,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value = "1")]
    eta: String,
    #[arg(long, default_value_t = 200)]
    trials: usize,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    dims: Dims,
    #[arg(long)]
    sigma: Option<f64>,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',')]
    sparsity: Option<Vec<usize>>,
    /// Comma-separated divisors of N_R and/or `free`.
    #[arg(long, value_delimiter = ',')]
    eta: Option<Vec<String>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Fixed success threshold instead of half the amplitude.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } | Error::Parse { .. } => EXIT_IO,
            Error::Singular { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match &cli.command {
        Command::Generate(a) => generate(&cli, a),
        Command::Solve(a) => solve(&cli, a),
        Command::Analyze(a) => analyze(&cli, a),
        Command::Rip(a) => rip(&cli, a),
        Command::Tailprobe(a) => tailprobe(&cli, a),
        Command::Experiment(a) => experiment(&cli, a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn out_dir(cli: &Cli) -> Result<&Path, Failure> {
    std::fs::create_dir_all(&cli.out).map_err(|e| Failure::from(Error::Io { path: cli.out.clone(), source: e }))?;
    Ok(&cli.out)
}

fn parse_eta(text: &str) -> Result<EtaRule, Failure> {
    text.parse::<EtaRule>().map_err(Failure::from)
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Outcome {
    let cfg = a.dims.config()?;
    let eta = parse_eta(&a.eta)?;
    eta.check(&cfg, a.s)?;
    if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
        return Err(usage("--sigma must be non-negative"));
    }
    let amplitude = match a.amplitude {
        Some(v) => v,
        None if a.sigma > 0.0 => threshold_amplitude(&cfg, a.sigma),
        None => 1.0,
    };
    let seed = cli.seed.unwrap_or(0);
    let inst = Instance::generate(cfg, a.dims.family(), a.s, eta, a.sigma, amplitude, seed)?;
    let dir = out_dir(cli)?;
    inst.write(dir, a.materialize)?;
    println!("wrote instance to {} (N = {}, m = {}, s = {})", dir.display(), cfg.grid_size(), cfg.n_measurements(), a.s);
    Ok(())
}

fn solve(cli: &Cli, a: &SolveArgs) -> Outcome {
    if !a.instance.join(io::CONFIG_FILE).exists() {
        return Err(usage(format!("no instance bundle in {}", a.instance.display())));
    }
    let inst = Instance::read(&a.instance)?;
    let op = inst.operator()?;
    let opts = SolverOptions {
        max_iterations: a.max_iterations,
        step_rule: if a.backtracking { StepRule::Backtracking } else { StepRule::PowerIterationLipschitz },
        seed: cli.seed.unwrap_or(0),
        ..SolverOptions::default()
    };
    let sigma = inst.meta.sigma;
    let lambda = a.lambda.unwrap_or_else(|| default_lambda(&inst.cfg, sigma));
    let y = &inst.measurements;
    let (result, used): (SolverResult, &str) = if a.solver == SolverKind::Bpdn || lambda == 0.0 {
        (basis_pursuit_denoise(&op, y, a.rho, &opts)?, "bpdn")
    } else {
        (lasso(&op, y, lambda, &opts)?, "lasso")
    };
    let threshold = a.threshold.unwrap_or(0.5 * inst.meta.amplitude);
    let truth = inst.scene.to_dense(&inst.cfg);
    let verdict = declare_success(&truth, &result.x_hat, threshold)?;
    let conditions = check_conditions(&op, &inst.scene, &inst.noise, sigma)?;

    let mut report = vec![
        ("solver".to_string(), used.to_string()),
        ("lambda".into(), format!("{:e}", result.lambda)),
        ("rho".into(), format!("{:e}", a.rho)),
        ("iterations".into(), result.iterations.to_string()),
        ("converged".into(), result.converged.to_string()),
        ("final_objective".into(), format!("{:e}", result.final_objective)),
        ("residual_norm".into(), format!("{:e}", result.residual_norm)),
        ("kkt_off_support".into(), format!("{:e}", result.kkt.off_support)),
        ("kkt_on_support".into(), format!("{:e}", result.kkt.on_support)),
        ("support".into(), join(&result.support)),
        ("threshold".into(), format!("{threshold:e}")),
        ("success".into(), verdict.success.to_string()),
        ("support_exact".into(), verdict.support_exact.to_string()),
        ("linf_error".into(), format!("{:e}", verdict.linf_error)),
    ];
    let rel = relative_error(&truth, &result.x_hat);
    report.push(("relative_l2_error".into(), format!("{rel:e}")));
    if a.debias {
        let recovered = mimo_cs::solvers::hard_threshold(&result.x_hat, threshold);
        let set = mimo_cs::support::SupportSet::from_linear(&inst.cfg, recovered)?;
        if set.is_empty() {
            report.push(("debias".into(), "skipped: empty support".into()));
        } else {
            let fit = debias(&op, y, &set)?;
            let err: f64 = set
                .linear()
                .iter()
                .zip(&fit.coefficients)
                .map(|(&k, z)| (z - truth[k]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            report.push(("debias_support".into(), join(set.linear())));
            report.push(("debias_coefficients".into(), fit.coefficients.iter().map(|c| format!("{},{}", c.re, c.im)).collect::<Vec<_>>().join(";")));
            report.push(("debias_error".into(), format!("{err:e}")));
            report.push(("debias_condition".into(), format!("{:e}", fit.condition)));
        }
    }
    report.extend(conditions.key_values().into_iter().map(|(k, v)| (format!("conditions_{k}"), v)));
    let dir = out_dir(cli)?;
    io::write_text(&dir.join(io::RESULT_FILE), &io::key_values_to_text(&report))?;
    io::write_complex(&dir.join("estimate.txt"), &result.x_hat)?;
    println!(
        "{used}: converged={} iterations={} success={} support_exact={} linf_error={:.3e}",
        result.converged, result.iterations, verdict.success, verdict.support_exact, verdict.linf_error
    );
    if result.converged {
        Ok(())
    } else {
        Err(Failure { code: EXIT_NUMERICAL, message: "solver did not reach its optimality certificate".into() })
    }
}

fn relative_error(truth: &[mimo_cs::C64], est: &[mimo_cs::C64]) -> f64 {
    let diff: Vec<_> = truth.iter().zip(est).map(|(a, b)| a - b).collect();
    mimo_cs::norm2(&diff) / mimo_cs::norm2(truth).max(f64::MIN_POSITIVE)
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> Outcome {
    if !a.instance.join(io::CONFIG_FILE).exists() {
        return Err(usage(format!("no instance bundle in {}", a.instance.display())));
    }
    let inst = Instance::read(&a.instance)?;
    let op = inst.operator()?;
    let support = &inst.scene.support;
    let gram = gram_closed_form(&inst.cfg, &inst.signals, support)?;
    let bal = balancedness(&inst.cfg, support)?;
    let conditions = check_conditions(&op, &inst.scene, &inst.noise, inst.meta.sigma)?;
    let mut report = vec![
        ("sparsity".to_string(), support.len().to_string()),
        ("eta".into(), bal.eta.to_string()),
        ("class_sizes".into(), join(&bal.class_sizes)),
        ("deviation".into(), format!("{:e}", gram.deviation)),
        ("block_deviations".into(), gram.block_deviations.iter().map(|d| format!("{d:e}")).collect::<Vec<_>>().join(",")),
        ("coherence_within".into(), format!("{:e}", gram.coherence_within)),
    ];
    report.extend(conditions.key_values());
    report.push(("all_conditions_hold".into(), conditions.all_hold().to_string()));
    let dir = out_dir(cli)?;
    io::write_text(&dir.join("analysis.txt"), &io::key_values_to_text(&report))?;
    print!("{}", io::key_values_to_text(&report));
    Ok(())
}

fn rip(cli: &Cli, a: &RipArgs) -> Outcome {
    let cfg = a.dims.config()?;
    let seed = cli.seed.unwrap_or(0);
    let sig = mimo_cs::generate_signals(&cfg, a.dims.family(), seed);
    let op = mimo_cs::RadarOperator::new(cfg, sig)?;
    let delta = exact_rip_constant(&op, a.s, a.cap)?;
    let report = vec![("s".to_string(), a.s.to_string()), ("delta".into(), format!("{delta:e}"))];
    let dir = out_dir(cli)?;
    io::write_text(&dir.join("rip.txt"), &io::key_values_to_text(&report))?;
    println!("delta_{} = {delta:.6e}", a.s);
    Ok(())
}

fn tailprobe(cli: &Cli, a: &TailArgs) -> Outcome {
    let cfg = a.dims.config()?;
    let eta = parse_eta(&a.eta)?;
    let probe = tail_probe_opnorm(&cfg, a.dims.family(), a.s, eta, a.trials, cli.seed.unwrap_or(0))?;
    let dir = out_dir(cli)?;
    io::write_text(&dir.join("tail.csv"), &probe.to_csv())?;
    println!("median deviation {:.6e} over {} trials", probe.median, a.trials);
    Ok(())
}

fn experiment(cli: &Cli, a: &ExperimentArgs) -> Outcome {
    let mut spec = ExperimentSpec::default_scan();
    if let Some(path) = &cli.config {
        spec = ExperimentFile::read(path)?.apply(spec)?;
    }
    let d = &a.dims;
    if d.nt.is_some() || d.nr.is_some() || d.ntime.is_some() || d.mode.is_some() {
        let c = spec.cfg;
        spec.cfg = RadarConfig::new(
            d.nt.unwrap_or(c.n_transmit),
            d.nr.unwrap_or(c.n_receive),
            d.ntime.unwrap_or(c.n_samples),
            d.mode.map_or(c.doppler_mode, Into::into),
        )?;
    }
    if let Some(f) = d.family {
        spec.family = f.into();
    }
    if let Some(v) = a.sigma {
        spec.sigma = v;
    }
    if let Some(v) = &a.sparsity {
        spec.sparsity_grid = v.clone();
    }
    if let Some(v) = &a.eta {
        spec.eta_list = v.iter().map(|e| parse_eta(e)).collect::<Result<_, _>>()?;
    }
    if let Some(v) = a.trials {
        spec.trials = v;
    }
    if a.amplitude.is_some() {
        spec.amplitude = a.amplitude;
    }
    if a.lambda.is_some() {
        spec.lambda = a.lambda;
    }
    if let Some(t) = a.threshold {
        spec.threshold = ThresholdRule::Fixed(t);
    }
    if let Some(v) = a.max_iterations {
        spec.solver.max_iterations = v;
    }
    if let Some(s) = cli.seed {
        spec.master_seed = s;
    }
    // Reject infeasible grids before any trial runs.
    spec.validate()?;
    info!("running {} grid points x {} trials", spec.sparsity_grid.len() * spec.eta_list.len(), spec.trials);
    let result = run_experiment(&spec)?;
    let dir = out_dir(cli)?;
    emit_csv(&result, &dir.join(io::CURVES_FILE))?;
    println!("{:>6} {:>6} {:>8} {:>8} {:>10}", "s", "eta", "rate", "iters", "time[s]");
    for r in &result.rows {
        println!(
            "{:>6} {:>6} {:>8.3} {:>8.1} {:>10.2}",
            r.s, r.eta.to_string(), r.success_rate, r.mean_iterations, r.wall_time
        );
    }
    Ok(())
}
