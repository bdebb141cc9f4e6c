use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use empower_cli::{config_base, load_config, run, verify, CliError, Overrides, Progress};

#[derive(Parser)]
#[command(name = "empower", version, about = "Run empowerment experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (overrides `workers`; 1 runs sequentially).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress progress messages.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts and manifest.
    Run { config: PathBuf },
    /// Validate a config and print the resolved parameters without running.
    Verify { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        output_dir: cli.out,
        workers: cli.workers,
        seed: cli.seed,
    };
    let progress = Progress { quiet: cli.quiet };
    let result = match &cli.command {
        Command::Run { config } => load_config(config).and_then(|c| {
            let c = overrides.apply(&c);
            run(&c, &config_base(config), progress)?;
            println!("{}", c.output_dir.join(empower_cli::MANIFEST_NAME).display());
            Ok(())
        }),
        Command::Verify { config } => load_config(config).and_then(|c| {
            let c = overrides.apply(&c);
            let (resolved, advisories) = verify(&c, &config_base(config))?;
            println!("{resolved}");
            for a in advisories {
                eprintln!("advisory: {a}");
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}
