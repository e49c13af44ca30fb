use std::io::Write;

use anyhow::anyhow;
use ore_core::discovery::DiscoveryHit;
use ore_core::Iri;
use serde::Serialize;

use crate::{env_failure, io, CmdResult, Context, EXIT_OK};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// The Web resource to inspect
    pub url: Iri,
    /// Read the body as a batch list whatever its Content-Type
    #[arg(long)]
    pub batch: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
pub struct JsonHits<'a> {
    pub schema: u32,
    pub resource: &'a Iri,
    pub hits: Vec<JsonHit<'a>>,
    pub warnings: &'a [String],
}

#[derive(Debug, Serialize)]
pub struct JsonHit<'a> {
    pub rem_uri: &'a Iri,
    pub mechanism: &'static str,
    pub media_type: Option<&'a str>,
}

impl<'a> From<&'a DiscoveryHit> for JsonHit<'a> {
    fn from(h: &'a DiscoveryHit) -> Self {
        JsonHit {
            rem_uri: &h.rem_uri,
            mechanism: h.mechanism.label(),
            media_type: h.media_type.as_deref(),
        }
    }
}

/// One `mechanism<TAB>rem-uri<TAB>media-type` line per hit; `-` for an
/// unknown media type.
pub fn run(args: &Args, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let found = ore_http::discover(&ctx.client(), &args.url, args.batch)
        .map_err(|e| env_failure(anyhow!("{}: {e}", args.url)))?;
    for w in &found.warnings {
        writeln!(err, "warning: {w}").map_err(io)?;
    }
    if args.json {
        let json = JsonHits {
            schema: 1,
            resource: &args.url,
            hits: found.hits.iter().map(JsonHit::from).collect(),
            warnings: &found.warnings,
        };
        serde_json::to_writer_pretty(&mut *out, &json).map_err(|e| io(e.into()))?;
        writeln!(out).map_err(io)?;
    } else {
        for h in &found.hits {
            writeln!(
                out,
                "{}\t{}\t{}",
                h.mechanism.label(),
                h.rem_uri,
                h.media_type.as_deref().unwrap_or("-")
            )
            .map_err(io)?;
        }
        if found.hits.is_empty() {
            writeln!(err, "no resource maps found for {}", args.url).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}
