use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use extcalc_cli::config::{parse_config_file, Cli, ConfigError, RunConfig, THREADS_ENV};
use extcalc_cli::run::{run, RunError};

fn execute(cli: &Cli) -> Result<(), RunError> {
    let file_text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    let file = parse_config_file(&file_text)?;
    let cfg = RunConfig::resolve(cli, file, std::env::var(THREADS_ENV).ok())?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| RunError::Config(ConfigError::Invalid(format!("thread pool: {e}"))))?;
    let mut out: Box<dyn Write + Send> = match &cfg.output {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    pool.install(|| run(&cfg, &mut *out))?;
    out.flush().map_err(RunError::Output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
