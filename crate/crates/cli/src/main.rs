use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rotor_core::lattice::{parse_program, RotorProgram};
use rotor_core::pipeline::{run, DiffPair, Emit, Model, RunConfig, MANIFEST_FILE};
use rotor_core::Error;

/// Rotor-router simulations on the square lattice.
#[derive(Debug, Parser)]
#[command(name = "rotor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sequential rotor walk: ants launched one at a time from the origin.
    Walk {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        program: ProgramArg,
    },
    /// Integer two-direction scheme.
    Rr2 {
        #[command(flatten)]
        common: Common,
    },
    /// Fractional two-direction split that keeps one ant per site.
    #[command(name = "rr2-sym")]
    Rr2Sym {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exact: ExactArg,
    },
    /// Closed-form binomial field, values below one truncated.
    #[command(name = "rr2-binomial")]
    Rr2Binomial {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exact: ExactArg,
        /// Last row to compute [default: depth of the integer scheme]
        #[arg(long)]
        rows: Option<usize>,
    },
    /// Sweep algorithm: columns outward from the origin, one fire per site.
    #[command(name = "rr4-abelian")]
    Rr4Abelian {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        program: ProgramArg,
        /// Maximum number of sweeps [default: until settled]
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        sweeps: Option<u64>,
    },
    /// Fractional four-direction split that keeps one ant per site.
    #[command(name = "rr4-sym")]
    Rr4Sym {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exact: ExactArg,
        /// Number of sweeps
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        sweeps: u64,
    },
    /// Pointwise difference between an integer model and its fractional twin.
    Diff {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        program: ProgramArg,
        #[command(flatten)]
        exact: ExactArg,
        /// Model pair to compare
        #[arg(long, value_enum, default_value_t = PairArg::Rr2)]
        models: PairArg,
        /// Number of sweeps (required for rr4)
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_if_eq("models", "rr4"))]
        sweeps: Option<u64>,
    },
    /// Invariant suites for every ant count up to --ants; exits 2 on failure.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        program: ProgramArg,
        /// Sweep budget per settlement run [default: unlimited]
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        sweeps: Option<u64>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Number of ants, at least 1
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    ants: u64,
    /// Output directory, created if missing
    #[arg(long)]
    out: PathBuf,
    /// Outputs to write: any of pgm, ppm, csv, manifest (the manifest is always written)
    #[arg(long, default_value = "pgm,ppm,csv,manifest", value_parser = parse_emit)]
    emit: Emit,
}

#[derive(Debug, Args)]
struct ProgramArg {
    /// Rotor program: RR4, RR48EW, RR811NWE or a comma list such as N,W,S,E
    #[arg(long, default_value = "RR4", value_parser = parse_program_arg)]
    program: RotorProgram,
}

#[derive(Debug, Args)]
struct ExactArg {
    /// Exact dyadic arithmetic instead of f64
    #[arg(long)]
    exact: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PairArg {
    Rr2,
    Rr4,
}

fn parse_emit(text: &str) -> Result<Emit, String> {
    Emit::parse(text).map_err(|e| e.to_string())
}

fn parse_program_arg(text: &str) -> Result<RotorProgram, String> {
    parse_program(text).map_err(|e| e.to_string())
}

fn config(command: Command) -> RunConfig {
    let base = |model: Model, common: Common| {
        let mut c = RunConfig::new(model, common.ants, common.out);
        c.emit = common.emit;
        c
    };
    match command {
        Command::Walk { common, program } => RunConfig {
            program: program.program,
            ..base(Model::Walk, common)
        },
        Command::Rr2 { common } => base(Model::Rr2, common),
        Command::Rr2Sym { common, exact } => RunConfig {
            exact: exact.exact,
            ..base(Model::Rr2Sym, common)
        },
        Command::Rr2Binomial {
            common,
            exact,
            rows,
        } => RunConfig {
            exact: exact.exact,
            rows,
            ..base(Model::Rr2Binomial, common)
        },
        Command::Rr4Abelian {
            common,
            program,
            sweeps,
        } => RunConfig {
            program: program.program,
            sweeps,
            ..base(Model::Rr4Abelian, common)
        },
        Command::Rr4Sym {
            common,
            exact,
            sweeps,
        } => RunConfig {
            exact: exact.exact,
            sweeps: Some(sweeps),
            ..base(Model::Rr4Sym, common)
        },
        Command::Diff {
            common,
            program,
            exact,
            models,
            sweeps,
        } => RunConfig {
            program: program.program,
            exact: exact.exact,
            sweeps,
            pair: match models {
                PairArg::Rr2 => DiffPair::Rr2,
                PairArg::Rr4 => DiffPair::Rr4,
            },
            ..base(Model::Diff, common)
        },
        Command::Verify {
            common,
            program,
            sweeps,
        } => RunConfig {
            program: program.program,
            sweeps,
            ..base(Model::Verify, common)
        },
    }
}

/// Usage line of the named subcommand, or of the whole tool.
fn usage_for(sub: Option<String>) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let usage = match sub
        .as_deref()
        .and_then(|name| cmd.find_subcommand_mut(name))
    {
        Some(sub) => sub.render_usage(),
        None => cmd.render_usage(),
    };
    usage.to_string()
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        Error::StepCapExceeded { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", usage_for(std::env::args().nth(1)));
            }
            return ExitCode::from(1);
        }
    };
    let config = config(cli.command);
    match run(&config) {
        Ok(outcome) => {
            let mut text = String::new();
            for (key, value) in &outcome.manifest.metrics {
                text.push_str(&format!("{key}: {value}\n"));
            }
            text.push_str(&format!(
                "manifest: {}\n",
                config.out.join(MANIFEST_FILE).display()
            ));
            // a closed pipe (e.g. `| head`) is not an error
            let _ = std::io::stdout().write_all(text.as_bytes());
            if outcome.verified {
                ExitCode::SUCCESS
            } else {
                eprintln!("rotor: verification failed");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("rotor: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
