use std::io::Write;

use ore_core::model::{Severity, ValidationReport, Violation};
use ore_core::{Iri, WireFormat};
use serde::Serialize;

use crate::input::{detect_format, load, read_rem, ReadError, Source};
use crate::{io, CmdResult, Context, FormatArg, EXIT_DOMAIN, EXIT_OK};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// File path or http(s) URL
    pub input: String,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: FormatArg,
    /// Name of the Resource Map, when the document does not make it clear
    #[arg(long, value_name = "IRI")]
    pub rem_uri: Option<Iri>,
    /// Resolve relative references against this instead of the file's own URL
    #[arg(long, value_name = "IRI")]
    pub base: Option<Iri>,
    /// Print the report as JSON
    #[arg(long)]
    pub json: bool,
}

/// `validate --json` output.
#[derive(Debug, Serialize)]
pub struct JsonReport<'a> {
    pub schema: u32,
    pub input: &'a str,
    pub format: WireFormat,
    pub rem_uri: &'a Iri,
    pub valid: bool,
    pub violations: &'a [Violation],
}

pub fn run(args: &Args, ctx: &Context, out: &mut dyn Write, _err: &mut dyn Write) -> CmdResult {
    let mut doc = load(&Source::parse(&args.input)?, ctx)?;
    if let Some(base) = &args.base {
        doc.base = base.clone();
    }
    let format = detect_format(args.format, &doc)?;
    let (rem_uri, report) = match read_rem(&doc, format, args.rem_uri.as_ref()) {
        Ok(rem) => {
            let report = rem.validate();
            (rem.uri().clone(), report)
        }
        Err(ReadError::Invalid { rem_uri, report }) => (rem_uri, report),
        Err(ReadError::Syntax(f)) => return Err(f),
    };
    if args.json {
        let json = JsonReport {
            schema: 1,
            input: &doc.label,
            format,
            rem_uri: &rem_uri,
            valid: report.is_valid(),
            violations: &report.violations,
        };
        serde_json::to_writer_pretty(&mut *out, &json).map_err(|e| io(e.into()))?;
        writeln!(out).map_err(io)?;
    } else {
        write_text(out, &doc.label, format, &rem_uri, &report).map_err(io)?;
    }
    Ok(if report.is_valid() { EXIT_OK } else { EXIT_DOMAIN })
}

fn write_text(
    out: &mut dyn Write,
    label: &str,
    format: WireFormat,
    rem_uri: &Iri,
    report: &ValidationReport,
) -> std::io::Result<()> {
    let errors = report.errors().count();
    let warnings = report
        .violations
        .iter()
        .filter(|v| v.severity == Severity::Warning)
        .count();
    let verdict = if errors == 0 { "valid" } else { "INVALID" };
    writeln!(
        out,
        "{label}: {verdict} ({} resource map {rem_uri}; {errors} error(s), {warnings} warning(s))",
        format.extension()
    )?;
    write!(out, "{report}")
}
