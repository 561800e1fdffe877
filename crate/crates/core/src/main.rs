use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use doorway_rmt::analytic::Family;
use doorway_rmt::ensembles::{a_factor, BackgroundKind, Beta, ChaoticSampler, EnsembleSpec, InteractionKind};
use doorway_rmt::experiment::{
    self, ExperimentConfig, RouteSelection, DEFAULT_BINS, DEFAULT_LAMBDAS, DEFAULT_SEED,
};
use doorway_rmt::verify::{verify, Level, VerifyOptions};
use doorway_rmt::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Doorway-state overlap distributions: Monte Carlo runs, closed-form
/// curves and self-verification.
#[derive(Parser, Debug)]
#[command(name = "doorway-rmt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample overlaps and compare them with the closed forms.
    Simulate(SimulateArgs),
    /// Tabulate the closed-form density and CDF of one family.
    Analytic(AnalyticArgs),
    /// Tabulate all four families at every coupling.
    Compare(CompareArgs),
    /// Print the first-moment factors of the interaction laws.
    Afactors,
    /// Check the closed forms against numerical oracles.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// JSON experiment configuration; a built-in default is used otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). DOORWAY_RMT_THREADS takes precedence.
    #[arg(long)]
    workers: Option<usize>,
    /// Also write the raw samples of every run.
    #[arg(long)]
    emit_samples: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    RegularBeta1,
    RegularBeta2,
    Goe,
    Gue,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::RegularBeta1 => Family::RegularBeta1,
            FamilyArg::RegularBeta2 => Family::RegularBeta2,
            FamilyArg::Goe => Family::Goe,
            FamilyArg::Gue => Family::Gue,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InteractionArg {
    Gaussian,
    Uniform,
    Semicircle,
}

impl From<InteractionArg> for InteractionKind {
    fn from(k: InteractionArg) -> InteractionKind {
        match k {
            InteractionArg::Gaussian => InteractionKind::Gaussian,
            InteractionArg::Uniform => InteractionKind::Uniform,
            InteractionArg::Semicircle => InteractionKind::Semicircle,
        }
    }
}

#[derive(Args, Debug)]
struct AnalyticArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Couplings, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDAS)]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    /// Interaction law fixing the a-factor of regular families.
    #[arg(long, value_enum, default_value = "gaussian")]
    interaction: InteractionArg,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDAS)]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    #[arg(long, value_enum, default_value = "gaussian")]
    interaction: InteractionArg,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "fast")]
    level: LevelArg,
    /// Scale the GOE density in the normalization check.
    #[arg(long, hide = true, default_value_t = 1.0)]
    perturb_goe: f64,
}

fn default_config() -> ExperimentConfig {
    ExperimentConfig {
        spec: EnsembleSpec {
            background_kind: BackgroundKind::Regular,
            n_levels: 1000,
            w: 1.0,
            interaction_kind: InteractionKind::Gaussian,
            beta: Beta::Real,
            v: 0.0,
            seed: DEFAULT_SEED,
            chaotic_sampler: ChaoticSampler::Tridiagonal,
        },
        lambdas: DEFAULT_LAMBDAS.to_vec(),
        n_samples: 100_000,
        route: RouteSelection::Both,
        output_path: PathBuf::from("doorway-out"),
        n_bins: DEFAULT_BINS,
        workers: 0,
        emit_samples: false,
    }
}

fn env_threads() -> Result<Option<usize>, Error> {
    match std::env::var("DOORWAY_RMT_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidConfig(format!("DOORWAY_RMT_THREADS={s:?} is not a count"))),
        Err(_) => Ok(None),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => default_config(),
    };
    if let Some(seed) = args.seed {
        config.spec.seed = seed;
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    if let Some(w) = env_threads()? {
        config.workers = w;
    }
    if let Some(out) = args.out {
        config.output_path = out;
    }
    config.emit_samples |= args.emit_samples;
    config.validate()?;
    println!("seed: {}", config.spec.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let report = pool.install(|| experiment::run(&config))?;
    for r in &report.records {
        println!(
            "lambda {:<6} {:<12} KS {:.5}  resampled {}  ties {}",
            r.lambda,
            serde_json::to_value(r.route)?.as_str().unwrap_or_default(),
            r.ks_to_analytic,
            r.n_resampled,
            r.n_ties
        );
    }
    println!("wrote {}", config.output_path.display());
    Ok(())
}

fn analytic(args: AnalyticArgs) -> Result<(), Error> {
    let family = Family::from(args.family);
    let a = match family {
        Family::RegularBeta1 => Some(a_factor(args.interaction.into(), Beta::Real)),
        Family::RegularBeta2 => Some(a_factor(args.interaction.into(), Beta::Complex)),
        _ => None,
    };
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", args.out.display())))?;
    for table in experiment::tabulate_analytic(family, &args.lambdas, args.grid, a)? {
        let path = args
            .out
            .join(format!("{}_lambda{}_curve.csv", family.name(), table.lambda));
        std::fs::write(&path, table.to_csv())
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), Error> {
    for path in experiment::compare(&args.lambdas, args.grid, args.interaction.into(), &args.out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Analytic(args) => analytic(args),
        Command::Compare(args) => compare(args),
        Command::Afactors => {
            print!("{}", experiment::a_factor_table());
            Ok(())
        }
        Command::Verify(args) => {
            let level = match args.level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let report = verify(VerifyOptions {
                level,
                goe_scale: args.perturb_goe,
            });
            println!("{report}");
            return if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
