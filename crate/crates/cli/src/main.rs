use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use glspiral::Exec;
use glspiral_cli::commands::output_dir;
use glspiral_cli::{run, CliError, Command, Context, RunConfig};

/// Spiral waves on surfaces of revolution and their stabilisation by
/// delayed spatio-temporal feedback.
#[derive(Parser, Debug)]
#[command(name = "glspiral", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: `[output] directory` of the configuration).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Seed for random perturbations.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 1 runs every loop sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Solve for the profile and write it.
    Profile,
    /// Linearised spectrum per Fourier mode.
    Spectrum,
    /// Stability verdict for the configured control.
    Verdict,
    /// Threshold gain and delay bounds.
    Thresholds,
    /// Stability map over the `[sweep]` grid.
    Sweep,
    /// Time integration from a perturbed profile.
    Simulate {
        /// Run without feedback.
        #[arg(long)]
        free: bool,
    },
    /// Draw the isophase curves as SVG.
    Render {
        /// Render a profile written by `profile` instead of solving.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<Vec<String>, CliError> {
    let path = cli.config.ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let config_text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let config = RunConfig::from_str(&config_text, path.parent().unwrap_or(&PathBuf::new()))?;
    let mut exec = Exec::Parallel;
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        if k == 1 {
            exec = Exec::Sequential;
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let (command, profile_file) = match cli.command {
        Sub::Profile => (Command::Profile, None),
        Sub::Spectrum => (Command::Spectrum, None),
        Sub::Verdict => (Command::Verdict, None),
        Sub::Thresholds => (Command::Thresholds, None),
        Sub::Sweep => (Command::Sweep, None),
        Sub::Simulate { free } => (Command::Simulate { free }, None),
        Sub::Render { profile } => (Command::Render, profile),
    };
    let ctx = Context {
        out_dir: output_dir(&config, cli.out.as_deref()),
        config,
        config_text,
        seed: cli.seed,
        profile_file,
        exec,
    };
    let outcome = run(&ctx, command)?;
    let mut lines = outcome.lines;
    lines.extend(outcome.files.iter().map(|f| format!("wrote {}", f.display())));
    Ok(lines)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
