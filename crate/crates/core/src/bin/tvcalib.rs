use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tvcalib::config::Command;
use tvcalib::run::{self, EXIT_ACCEPTANCE, EXIT_OK, EXIT_USAGE};

/// Anisotropic TV solver and calibration diagnostics.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Run configuration (TOML). Optional for `selftest`.
    config: Option<PathBuf>,
    /// Overrides the command named in the config.
    #[arg(long, value_enum)]
    command: Option<CommandArg>,
    /// Overrides `[output].dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CommandArg {
    Solve,
    Verify,
    Levelset,
    Blowup,
    Counterexample,
    Selftest,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Solve => Command::Solve,
            CommandArg::Verify => Command::Verify,
            CommandArg::Levelset => Command::Levelset,
            CommandArg::Blowup => Command::Blowup,
            CommandArg::Counterexample => Command::Counterexample,
            CommandArg::Selftest => Command::Selftest,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    let command = cli.command.map(Command::from);
    let outcome = match (&cli.config, command) {
        (Some(path), _) => run::run(path, cli.out.as_deref(), command),
        (None, Some(Command::Selftest)) => {
            run::run_text("command = \"selftest\"\n", cli.out.as_deref(), None)
        }
        (None, _) => {
            eprintln!("error: a config file is required unless --command selftest is given");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match outcome {
        Ok(o) => {
            if let Some(checks) = o.report["checks"].as_array() {
                for c in checks {
                    let tag = if c["passed"].as_bool() == Some(true) {
                        "PASS"
                    } else {
                        "FAIL"
                    };
                    println!(
                        "{tag} {} = {} (bound {})",
                        c["name"].as_str().unwrap_or("?"),
                        c["value"],
                        c["bound"]
                    );
                }
            }
            ExitCode::from(if o.passed { EXIT_OK } else { EXIT_ACCEPTANCE } as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(run::exit_code(&e) as u8)
        }
    }
}
