use clap::{Args, Parser, Subcommand};
use ergolab::runner::{load_config, run, ExperimentKind, RunFailure};
use ergolab::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Experiments with moving ergodic averages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cone cross-section ratios of a window scheme.
    ConeCheck(RunArgs),
    /// Exceedance probabilities of moving averages on a system.
    Scan(RunArgs),
    /// Exceedance probabilities of IID averages.
    IidLab(RunArgs),
    /// Coboundary averages against their telescoped form.
    Coboundary(RunArgs),
    /// Builds a bad function and the scheme along which its averages fail.
    Badfun(RunArgs),
    /// Greedy covering of a cycle by translates of random sets.
    Cover(RunArgs),
    /// Convergence-rate identities and inequalities on a cycle.
    Rates(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output path prefix; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::ConeCheck(a) => (ExperimentKind::ConeCheck, a),
            Command::Scan(a) => (ExperimentKind::Scan, a),
            Command::IidLab(a) => (ExperimentKind::IidLab, a),
            Command::Coboundary(a) => (ExperimentKind::Coboundary, a),
            Command::Badfun(a) => (ExperimentKind::Badfun, a),
            Command::Cover(a) => (ExperimentKind::Cover, a),
            Command::Rates(a) => (ExperimentKind::Rates, a),
        }
    }
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<String, RunFailure> {
    let mut config = load_config(&args.config)?;
    if config.kind != kind {
        return Err(RunFailure::Failed(Error::Config(format!(
            "config is a `{}` experiment, not `{}`",
            config.kind.as_str(),
            kind.as_str()
        ))));
    }
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    let prefix = args
        .out
        .or_else(|| config.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(kind.as_str()));
    let threads = args.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| RunFailure::Failed(Error::Config(format!("thread pool: {e}"))))?;
    let manifest = pool.install(|| run(&config, &prefix))?;
    Ok(serde_json::to_string_pretty(&manifest).expect("manifest serializes"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match execute(kind, args) {
        Ok(manifest) => {
            println!("{manifest}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", failure.record());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
