//! The `ore` command: validate, convert, serve, discover and fetch
//! Resource Maps.
//!
//! Exit status is 0 on success, 1 when the input is at fault (an invalid
//! map, a partial harvest) and 2 when the environment is (unreadable
//! files, unparseable documents, network failures, bad flags).

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use ore_core::WireFormat;
use ore_http::Client;

pub mod config;
pub mod convert;
pub mod discover;
pub mod fetch;
pub mod input;
pub mod serve;
pub mod validate;

use config::{Config, TIMEOUT_ENV};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_ENV: u8 = 2;

/// A command that could not finish, with the exit status to report.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub fn env_failure(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_ENV,
        error: error.into(),
    }
}

pub fn domain_failure(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_DOMAIN,
        error: error.into(),
    }
}

pub type CmdResult = Result<u8, Failure>;

#[derive(Debug, Parser)]
#[command(
    name = "ore",
    version,
    about = "Validate, convert, serve, discover and archive OAI-ORE Resource Maps"
)]
pub struct Cli {
    /// Settings file (key = value lines, see README)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a Resource Map against the model constraints
    Validate(validate::Args),
    /// Rewrite a Resource Map in the other wire format
    Convert(convert::Args),
    /// Publish a directory of Resource Maps and files over HTTP
    Serve(serve::Args),
    /// List the Resource Maps a Web resource points to
    Discover(discover::Args),
    /// Download an aggregation and its constituents into a directory
    Fetch(fetch::Args),
}

/// `--format` / `--from` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// Decide from the document's root element
    Auto,
    Rdfxml,
    Atom,
}

impl FormatArg {
    pub fn fixed(self) -> Option<WireFormat> {
        match self {
            FormatArg::Auto => None,
            FormatArg::Rdfxml => Some(WireFormat::RdfXml),
            FormatArg::Atom => Some(WireFormat::Atom),
        }
    }
}

/// `--to` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WireArg {
    Rdfxml,
    Atom,
}

impl From<WireArg> for WireFormat {
    fn from(a: WireArg) -> WireFormat {
        match a {
            WireArg::Rdfxml => WireFormat::RdfXml,
            WireArg::Atom => WireFormat::Atom,
        }
    }
}

/// Settings shared by every command once the file and environment are read.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: Config,
    pub timeout: std::time::Duration,
}

impl Context {
    pub fn from_parts(config: Config, env_timeout: Option<&str>) -> Result<Context, Failure> {
        let timeout = config.timeout(env_timeout).map_err(env_failure)?;
        Ok(Context { config, timeout })
    }

    pub fn client(&self) -> Client {
        let client = Client::with_timeout(self.timeout);
        match self.config.max_redirects {
            Some(limit) => client.max_redirects(limit),
            None => client,
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_ENV;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let result = load_context(&cli).and_then(|ctx| dispatch(cli.command, &ctx, out, err));
    let _ = out.flush();
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {failure}");
            failure.code
        }
    }
}

fn load_context(cli: &Cli) -> Result<Context, Failure> {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(env_failure)?,
        None => Config::default(),
    };
    let env_timeout = std::env::var(TIMEOUT_ENV).ok();
    Context::from_parts(config, env_timeout.as_deref())
}

fn dispatch(command: Command, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match command {
        Command::Validate(a) => validate::run(&a, ctx, out, err),
        Command::Convert(a) => convert::run(&a, ctx, out, err),
        Command::Serve(a) => serve::run(&a, ctx, out, err),
        Command::Discover(a) => discover::run(&a, ctx, out, err),
        Command::Fetch(a) => fetch::run(&a, ctx, out, err),
    }
}

/// Maps an I/O error on the output streams to an environment failure.
pub(crate) fn io(e: std::io::Error) -> Failure {
    env_failure(anyhow::Error::new(e).context("cannot write output"))
}
