//! `fbl`: validate and analyze Fell bundles over finite inverse semigroups.
//!
//! Exit codes: 0 success, 1 validation or property failure, 2 input error.

mod commands;
mod render;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Outcome, Settings};

#[derive(Parser, Debug)]
#[command(name = "fbl", version, about = "Fell bundles over finite inverse semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Rank tolerance; overrides the file and the built-in default.
    #[arg(long, global = true, env = "FBL_TOL")]
    tol: Option<f64>,
    /// Seed for every sampled check; defaults to the file's seed, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the JSON report instead of the table.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the semigroup and every bundle axiom.
    Validate {
        /// Bundle file, or the name of a built-in bundle.
        input: String,
        /// Random samples per fiber for the norm and positivity checks.
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
    /// Summarize the base semigroup and the fibers.
    Info { input: String },
    /// Build the regular representation and print section operators.
    Regrep {
        input: String,
        /// JSON array of `{"label": .., "coeffs": {..}}` objects.
        #[arg(long)]
        sections: Option<String>,
    },
    /// Norms of sections in every available completion.
    Norms {
        input: String,
        #[arg(long)]
        sections: Option<String>,
    },
    /// Full analysis: representation, expectation, ideals, quotients.
    Analyze {
        input: String,
        #[arg(long)]
        sections: Option<String>,
        /// Also compute norms through states on the diagonal.
        #[arg(long)]
        oracle: bool,
        /// Group for the grading search: `z<n>` or a group file.
        #[arg(long)]
        grading_group: Option<String>,
    },
    /// Search for an idempotent pure grading onto a finite group.
    Grading {
        input: String,
        #[arg(long)]
        grading_group: Option<String>,
    },
    /// List the filters of the idempotent semilattice.
    Filters {
        /// Semigroup file, bundle file, or built-in name.
        input: String,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let settings = Settings {
        tol: cli.global.tol,
        seed: cli.global.seed,
    };
    match cli.command {
        Command::Validate { input, samples } => commands::validate(&input, &settings, samples),
        Command::Info { input } => commands::info(&input, &settings),
        Command::Regrep { input, sections } => commands::regrep(&input, &settings, sections.as_deref()),
        Command::Norms { input, sections } => commands::norms(&input, &settings, sections.as_deref()),
        Command::Analyze {
            input,
            sections,
            oracle,
            grading_group,
        } => commands::analyze(&input, &settings, sections.as_deref(), oracle, grading_group.as_deref()),
        Command::Grading { input, grading_group } => commands::grading(&input, &settings, grading_group.as_deref()),
        Command::Filters { input } => commands::filters(&input, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.global.json;
    match run(cli) {
        Ok(outcome) => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.report).expect("reports serialize")
                );
            } else {
                print!("{}", outcome.text);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
