use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use spinjump::cli::{self, Mode, RunError, ScenarioConfig};

#[derive(Parser, Debug)]
#[command(
    name = "spinjump",
    version,
    about = "Radical-pair master equations and quantum-jump ensembles"
)]
struct Args {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,

    /// Override the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario file.
    Run { config: PathBuf },
    /// Run a scenario under several theories or schemes.
    Compare {
        config: PathBuf,
        /// Comma-separated model names, e.g. haberkorn,jones_hore,kominis_revised.
        #[arg(long, value_delimiter = ',', required = true)]
        theories: Vec<String>,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ScenarioConfig, RunError> {
    let bytes = std::fs::read(path).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    let mut config = cli::parse_config(&bytes).map_err(RunError::Validation)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(config)
}

fn parse_modes(names: &[String]) -> Result<Vec<Mode>, RunError> {
    let mut errs = Vec::new();
    let mut modes = Vec::new();
    for name in names {
        match Mode::parse_any(name.trim()) {
            Some(m) => modes.push(m),
            None => errs.push(cli::ConfigError {
                line: None,
                message: format!("unknown theory or scheme `{name}`"),
            }),
        }
    }
    if errs.is_empty() {
        Ok(modes)
    } else {
        Err(RunError::Validation(cli::ConfigErrors(errs)))
    }
}

fn execute(args: &Args) -> Result<(), RunError> {
    match &args.command {
        Command::Run { config } => {
            let config = load(config, args.seed)?;
            let report = cli::run_scenario(&config, &args.output_dir)?;
            let y = report.output.yields;
            info!(
                "wrote {} and {}",
                report.csv_path.display(),
                report.json_path.display()
            );
            if !args.quiet {
                println!(
                    "{}: Y_S = {:.6}, Y_T = {:.6}, survival = {:.6}, final p_T = {:.6}",
                    config.mode.name(),
                    y.singlet_yield,
                    y.triplet_yield,
                    y.survival,
                    report.output.final_row().p_t
                );
            }
        }
        Command::Compare { config, theories } => {
            let config = load(config, args.seed)?;
            let modes = parse_modes(theories)?;
            let report = cli::compare(&config, &modes, &args.output_dir)?;
            info!(
                "wrote {} and {}",
                report.csv_path.display(),
                report.json_path.display()
            );
            if !args.quiet {
                print!("{}", report.table());
            }
        }
        Command::Selftest => {
            let checks = cli::selftest()?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            for c in &checks {
                if !args.quiet || !c.passed {
                    println!(
                        "{} {} ({})",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.detail
                    );
                }
            }
            if failed > 0 {
                return Err(RunError::Numerical(spinjump::Error::Precondition(format!(
                    "{failed} self-test check(s) failed"
                ))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
