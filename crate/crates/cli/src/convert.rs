use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Context as _};
use ore_core::serialization::{serialize_atom, serialize_rdfxml, LossReport};
use ore_core::{Iri, WireFormat};

use crate::input::{detect_format, load, read_rem, Source};
use crate::{domain_failure, env_failure, io, CmdResult, Context, FormatArg, WireArg, EXIT_OK};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// File path or http(s) URL
    pub input: String,
    #[arg(long, value_enum, default_value = "auto")]
    pub from: FormatArg,
    #[arg(long, value_enum)]
    pub to: WireArg,
    /// Write the document here instead of standard output
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// List every statement the target format cannot carry
    #[arg(short, long)]
    pub verbose: bool,
    /// Resolve relative references against this instead of the file's own URL
    #[arg(long, value_name = "IRI")]
    pub base: Option<Iri>,
    #[arg(long, value_name = "IRI")]
    pub rem_uri: Option<Iri>,
}

/// The document goes to `--output` or `out`; the loss summary to `err`.
pub fn run(args: &Args, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let mut doc = load(&Source::parse(&args.input)?, ctx)?;
    if let Some(base) = &args.base {
        doc.base = base.clone();
    }
    let from = detect_format(args.from, &doc)?;
    let rem = read_rem(&doc, from, args.rem_uri.as_ref())?;
    let report = rem.validate();
    if !report.is_valid() {
        return Err(domain_failure(anyhow!(
            "{}: resource map {} is invalid:\n{report}",
            doc.label,
            rem.uri()
        )));
    }
    let (bytes, loss) = match WireFormat::from(args.to) {
        WireFormat::RdfXml => {
            let bytes = serialize_rdfxml(rem.graph()).map_err(|e| domain_failure(anyhow!("{}: {e}", doc.label)))?;
            (bytes, LossReport::default())
        }
        WireFormat::Atom => {
            let o = serialize_atom(&rem).map_err(|e| domain_failure(anyhow!("{}: {e}", doc.label)))?;
            (o.document, o.loss)
        }
    };
    match &args.output {
        Some(path) => std::fs::write(path, &bytes)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(env_failure)?,
        None => out.write_all(&bytes).map_err(io)?,
    }
    let n = loss.dropped.len();
    writeln!(err, "{n} {} dropped", if n == 1 { "statement" } else { "statements" }).map_err(io)?;
    if args.verbose {
        for t in &loss.dropped {
            writeln!(err, "  {t}").map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}
