use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use accjoint::simstudy::Version;
use accjoint::workbench::{self, CliError, FitArgs};

#[derive(Parser)]
#[command(name = "accjoint", version, about = "Joint hierarchical LBA fitting across tasks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum VersionArg {
    Matched,
    ZeroBetween,
    UniformR,
}

impl From<VersionArg> for Version {
    fn from(v: VersionArg) -> Self {
        match v {
            VersionArg::Matched => Version::Matched,
            VersionArg::ZeroBetween => Version::ZeroBetween,
            VersionArg::UniformR => Version::UniformR,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the joint model and write the chain plus summaries.
    Fit {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Generate a synthetic dataset from a study design.
    Simulate {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        version: Option<VersionArg>,
    },
    /// Simulate, refit and score covariance recovery for one regime.
    Recover {
        #[arg(long)]
        design: PathBuf,
        #[arg(long, value_enum, default_value = "matched")]
        version: VersionArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summary tables (and optionally a heatmap) from a stored chain.
    Summarize {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        heatmap: bool,
    },
    /// Posterior predictive datasets from a stored chain.
    Predict {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        draws: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cmd: Cmd) -> Result<String, CliError> {
    Ok(match cmd {
        Cmd::Fit {
            data,
            model,
            config,
            out,
            seed,
            workers,
        } => {
            let chain = workbench::cmd_fit(&FitArgs {
                data,
                model,
                config,
                out,
                seed,
                workers,
            })?;
            format!(
                "stored {} draws for {} subjects ({} degenerate updates)",
                chain.draws.len(),
                chain.n_subjects(),
                chain.meta.degenerate_updates
            )
        }
        Cmd::Simulate { design, out, version } => {
            let n = workbench::cmd_simulate(&design, &out, version.map(Into::into))?;
            format!("wrote {n} trials to {}", out.display())
        }
        Cmd::Recover { design, version, out } => {
            let t = workbench::cmd_recover(&design, version.into(), &out)?;
            serde_json::to_string(&t).expect("tally serializes")
        }
        Cmd::Summarize { chain, out, heatmap } => {
            workbench::cmd_summarize(&chain, &out, heatmap)?;
            format!("wrote summaries to {}", out.display())
        }
        Cmd::Predict { chain, draws, out, seed } => {
            let n = workbench::cmd_predict(&chain, draws, &out, seed)?;
            format!("wrote {n} predictive datasets to {}", out.display())
        }
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
