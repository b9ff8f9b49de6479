use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use toysht_cli::acceptance::{default_suite, DEFAULT_SEED};
use toysht_cli::{load_config, run_suite, to_csv, to_json, CheckSpec, CliError, RunOptions, CHECKS};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Runs toy-shtuka verification checks and writes a report document.
///
/// With neither --config nor --check the acceptance suite is run.
#[derive(Debug, Parser)]
#[command(name = "toysht", version)]
struct Args {
    /// TOML suite with `[[check]]` tables.
    #[arg(long, conflicts_with = "check")]
    config: Option<PathBuf>,
    /// Run a single named check.
    #[arg(long)]
    check: Option<String>,
    /// Parameter for --check, as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "check")]
    params: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Write the report document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Report elapsed_ms as 0 so output is reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// List check names and exit.
    #[arg(long)]
    list: bool,
}

fn specs(args: &Args) -> Result<Vec<CheckSpec>, CliError> {
    if let Some(path) = &args.config {
        return load_config(path, args.seed);
    }
    let Some(name) = &args.check else {
        return Ok(default_suite(args.seed));
    };
    let mut spec = CheckSpec::new(name, args.seed);
    for p in &args.params {
        spec.params.insert_assignment(p)?;
    }
    Ok(vec![spec])
}

fn run(args: &Args) -> Result<i32, CliError> {
    let specs = specs(args)?;
    let opts = RunOptions { jobs: args.jobs, no_timing: args.no_timing };
    let (reports, code) = run_suite(&specs, opts)?;
    let doc = match args.format {
        Format::Json => to_json(&reports)? + "\n",
        Format::Csv => to_csv(&reports)?,
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, doc).map_err(|source| CliError::Io { path: path.display().to_string(), source })?
        }
        None => print!("{doc}"),
    }
    Ok(code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        CHECKS.iter().for_each(|c| println!("{c}"));
        return ExitCode::SUCCESS;
    }
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
