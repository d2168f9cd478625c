mod args;
mod commands;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Bad flags or unusable input; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<amco::Error>() {
        Some(
            amco::Error::InvalidArgument(_)
            | amco::Error::Io { .. }
            | amco::Error::Parse { .. }
            | amco::Error::DimensionMismatch { .. }
            | amco::Error::OutOfRange { .. },
        ) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()?;
    }
    match &cli.command {
        Command::Knn(a) => commands::knn(a).map(drop),
        Command::Kmeans(a) => commands::kmeans(a).map(drop),
        Command::Medoid(a) => commands::medoid(a).map(drop),
        Command::Hier(a) => commands::hier(a).map(drop),
        Command::Mmi(a) => commands::mmi(a).map(drop),
        Command::Gaincurve(a) => commands::gaincurve(a).map(drop),
        Command::Gen(a) => commands::gen(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
