use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mixdialog::commands::{self, EXIT_INPUT, EXIT_OK};
use mixdialog::{hasse, repl, service};
use mixdialog_core::peval::Action;
use mixdialog_core::stager::{compile_stager, start_session};
use mixdialog_core::{parse_domains, parse_spec, DialogType};

#[derive(Parser)]
#[command(
    name = "dlg",
    version,
    about = "Specify, enumerate, mine and stage mixed-initiative dialogs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every episode of a specification
    Enumerate {
        spec: PathBuf,
        /// Print a parseable episodes file instead of a listing
        #[arg(long)]
        episodes: bool,
    },
    /// Compress an episodes file into a specification
    Mine { episodes: PathBuf },
    /// Compare a specification against an episodes file (exit 1 on difference)
    Check { spec: PathBuf, episodes: PathBuf },
    /// Episode counts per dialog type and dialog-space sizes
    Count {
        q: usize,
        #[arg(long = "type", value_parser = parse_type)]
        kind: Option<DialogType>,
    },
    /// Normalize a specification or compute its residual after a history
    Rewrite {
        spec: PathBuf,
        /// Print each rule application
        #[arg(long)]
        trace: bool,
        /// Reduce to I and C expressions
        #[arg(long)]
        primitives: bool,
        /// Answered utterances, written like episode items, e.g. `d (a b)`
        #[arg(long)]
        after: Option<String>,
    },
    /// Run a dialog interactively on the terminal
    Run {
        spec: PathBuf,
        domains: PathBuf,
        #[arg(long, default_value = "complete")]
        action: String,
    },
    /// Print the Hasse diagram of a specification as DOT
    Hasse { spec: PathBuf },
    /// Serve the HTTP session API
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory for session event logs
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

fn parse_type(s: &str) -> Result<DialogType, String> {
    DialogType::from_tag(s).ok_or_else(|| format!("unknown dialog type `{s}`"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn dispatch(cmd: Command) -> Result<u8> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match cmd {
        Command::Enumerate { spec, episodes } => {
            commands::enumerate(&read(&spec)?, episodes, &mut out)
        }
        Command::Mine { episodes } => commands::mine_cmd(&read(&episodes)?, &mut out),
        Command::Check { spec, episodes } => {
            commands::check(&read(&spec)?, &read(&episodes)?, &mut out)
        }
        Command::Count { q, kind } => commands::count(q, kind, &mut out),
        Command::Rewrite {
            spec,
            trace,
            primitives,
            after,
        } => commands::rewrite(&read(&spec)?, trace, primitives, after.as_deref(), &mut out),
        Command::Hasse { spec } => {
            let u = parse_spec(&read(&spec)?)?;
            out.write_all(hasse::to_dot(&u)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Run {
            spec,
            domains,
            action,
        } => {
            let u = parse_spec(&read(&spec)?).context("spec")?;
            let d = parse_domains(&read(&domains)?).context("domains")?;
            let plan = compile_stager(&u, &d, Action::new(&action))?;
            repl::run(start_session(Arc::new(plan)), io::stdin().lock(), &mut out)?;
            Ok(EXIT_OK)
        }
        Command::Serve { port, host, state } => {
            drop(out);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(service::serve(SocketAddr::new(host, port), state))?;
            Ok(EXIT_OK)
        }
    }?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
