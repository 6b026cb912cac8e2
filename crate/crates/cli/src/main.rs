//! `qiit`: check signatures, derive eliminators, build term models and
//! test finite algebras against them.
//!
//! Exit codes: 0 success, 1 validation or property failure, 2 resource
//! budget exhausted, 3 I/O error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "qiit", version, about = "Quotient inductive-inductive signatures, models and algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    #[default]
    Text,
    /// JSON.
    #[value(alias = "json")]
    Structured,
}

#[derive(clap::Args, Clone, Debug)]
pub struct ModelArgs {
    /// Maximum constructor nesting; nullary constructors have depth 0.
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Maximum number of interned terms.
    #[arg(long, env = "QIIT_BUDGET", default_value_t = qiit::model::DEFAULT_BUDGET,
          value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    pub budget: usize,
    /// Shuffles internal enumeration order; results do not depend on it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for term generation.
    #[arg(long, value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    pub threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate signature files.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print the sort ladder and constructor semantics.
    Elaborate {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: OutFormat,
    },
    /// Derive the elimination principle.
    Elim {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: OutFormat,
    },
    /// Build the depth-bounded term model.
    Model {
        path: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t)]
        format: OutFormat,
        /// Write the model dump (`.qmodel`) to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// List every class with its members.
        #[arg(long)]
        classes: bool,
    },
    /// Fold a model dump into a finite algebra and check the result.
    Fold {
        model: PathBuf,
        algebra: PathBuf,
        /// Also count all homomorphisms from the model into the algebra.
        #[arg(long)]
        unique: bool,
        /// Step budget for the homomorphism search.
        #[arg(long, default_value_t = qiit::props::PROPS_HOM_BUDGET)]
        hom_budget: usize,
        #[arg(long, value_enum, default_value_t)]
        format: OutFormat,
    },
    /// Compute sections of fibred algebras over a model dump.
    Section {
        model: PathBuf,
        /// A fibred algebra document (`.qfib`); without it the built-in
        /// motives for the signature are used.
        #[arg(long)]
        fibred: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: OutFormat,
    },
    /// Compute the limit of a finite diagram of families.
    Limit {
        diagram: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: OutFormat,
    },
    /// Run the built-in property suite.
    Props {
        path: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t)]
        format: OutFormat,
    },
}

/// Outcome of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Failed = 1,
    Budget = 2,
}

fn main() -> ExitCode {
    // Usage errors exit 1 so that 2 stays reserved for budget exhaustion.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Check { paths } => commands::check(&paths),
        Command::Elaborate { path, format } => commands::elaborate(&path, format),
        Command::Elim { path, format } => commands::elim(&path, format),
        Command::Model { path, model, format, out, classes } => {
            commands::model(&path, &model, format, out.as_deref(), classes)
        }
        Command::Fold { model, algebra, unique, hom_budget, format } => {
            commands::fold(&model, &algebra, unique, hom_budget, format)
        }
        Command::Section { model, fibred, format } => commands::section(&model, fibred.as_deref(), format),
        Command::Limit { diagram, format } => commands::limit(&diagram, format),
        Command::Props { path, model, format } => commands::props(&path, &model, format),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            let io = err.chain().any(|e| e.is::<std::io::Error>());
            ExitCode::from(if io { 3 } else { 1 })
        }
    }
}
