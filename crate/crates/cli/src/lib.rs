//! The `eaa` command line and the local deliberation server.

mod commands;
mod workspace;
pub mod serve;

pub use workspace::{Workspace, WorkspaceError};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

/// Process exit status: findings at error severity map to 1, usage and I/O
/// failures to 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Clean,
    Findings,
    Failure,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Clean => 0,
            ExitStatus::Findings => 1,
            ExitStatus::Failure => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "eaa", version, about = "Ethical assurance arguments: check, instantiate, analyse and deliberate")]
pub struct Cli {
    /// Print findings as canonical JSON diagnostics.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a case and run every structural, inventory, transparency and instantiation check.
    Check { file: PathBuf },
    /// Expand a pattern with stakeholder and matrix bindings.
    Instantiate {
        /// Pattern file, or `builtin` for the bundled principles pattern.
        pattern: String,
        /// Binding document (JSON) or a sidecar stem such as `fixtures/robotaxi`.
        bindings: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Matrix consistency and summary distillation.
    Matrices {
        #[command(subcommand)]
        action: MatricesAction,
    },
    /// Justice matrix and role-combination flags.
    Justice {
        file: PathBuf,
        /// Use these annotations instead of the case's own.
        #[arg(long)]
        annotations: Option<PathBuf>,
    },
    /// Diagram, report or CSV output.
    Render {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        /// Output file; for CSV the stem the three matrix files are named after.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        no_matrices: bool,
        #[arg(long)]
        no_flags: bool,
    },
    /// Deliberation session stored next to the case.
    Session {
        file: PathBuf,
        #[command(subcommand)]
        action: SessionAction,
    },
    /// Serve the case over a local JSON API.
    Serve {
        file: PathBuf,
        #[arg(long, default_value_t = serve::DEFAULT_PORT)]
        port: u16,
    },
}

#[derive(Debug, Subcommand)]
pub enum MatricesAction {
    Check { file: PathBuf },
    /// Print the hull summary of every stakeholder's rows.
    Propose {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SessionAction {
    /// Start a session on the case's current matrices and annotations.
    Open {
        #[arg(long, default_value = "session-1")]
        id: String,
        /// `id:role[:name]` with role one of stakeholder-representative,
        /// team-member, independent-ethicist. Repeat for each party.
        #[arg(long = "party", required = true)]
        parties: Vec<String>,
        /// Replace an existing session.
        #[arg(long)]
        force: bool,
    },
    /// Append one event. The event is JSON, or `@path` to read it from a file.
    Submit {
        #[arg(long)]
        author: String,
        #[arg(long)]
        event: String,
        /// RFC 3339 timestamp; defaults to now.
        #[arg(long)]
        ts: Option<String>,
    },
    Status,
    Export {
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Html,
    Csv,
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let clean = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let text = e.render().to_string();
            if clean {
                let _ = write!(out, "{text}");
                return ExitStatus::Clean;
            }
            let _ = write!(err, "{text}");
            return ExitStatus::Failure;
        }
    };
    commands::dispatch(cli, out, err)
}
