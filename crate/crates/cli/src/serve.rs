use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context as _};
use ore_core::{Iri, ResourceMap, WireFormat};
use ore_http::server::DEFAULT_WORKERS;
use ore_http::{PublishError, PublishScenario, Server, ServerHandle, Store, StoreConfig};
use percent_encoding::{utf8_percent_encode, AsciiSet, CONTROLS};

use crate::input::{read_rem, Document, ReadError};
use crate::{domain_failure, env_failure, io, CmdResult, Context, Failure, EXIT_OK};

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Args {
    /// Directory holding `.rdf` and `.atom` Resource Maps and any other files
    pub root: PathBuf,
    /// How Aggregation URIs lead to their map: `303` or `hash`
    #[arg(long)]
    pub scenario: Option<PublishScenario>,
    /// Address to listen on [default: 127.0.0.1:8080]
    #[arg(long)]
    pub bind: Option<String>,
    /// URI prefix that files are published under [default: http://<bound address>/]
    #[arg(long)]
    pub authority: Option<String>,
    /// Rewrite IRIs starting with OLD to start with NEW (the authority if omitted); repeatable
    #[arg(long, value_name = "OLD[=NEW]")]
    pub rebase: Vec<String>,
    /// Skip maps that fail to load instead of refusing to start
    #[arg(long)]
    pub lenient: bool,
    /// Format for requests that state no usable preference [default: atom]
    #[arg(long, value_enum)]
    pub default_format: Option<crate::WireArg>,
    /// Offer Atom even for maps it cannot fully represent
    #[arg(long)]
    pub allow_lossy_atom: bool,
    /// Request-handling threads [default: 4]
    #[arg(long)]
    pub workers: Option<usize>,
}

/// A bound server with its store filled, not yet accepting requests.
pub struct Prepared {
    pub server: Server,
    pub store: Arc<Store>,
    pub authority: String,
    pub scenario: PublishScenario,
    pub workers: usize,
    /// Published maps: file and Resource Map URI.
    pub maps: Vec<(PathBuf, Iri)>,
    pub resources: usize,
    /// Files left out under `--lenient`, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

impl Prepared {
    pub fn start(self) -> ServerHandle {
        self.server.run(self.store, self.workers)
    }
}

/// `OLD[=NEW]`. The split is at the last `=` followed by a scheme, so
/// query strings in OLD survive.
fn parse_rebase(rule: &str, authority: &str) -> (String, String) {
    let split = rule
        .match_indices('=')
        .map(|(i, _)| i)
        .rev()
        .find(|&i| rule[i + 1..].contains("://"));
    match split {
        Some(i) => (rule[..i].to_owned(), rule[i + 1..].to_owned()),
        None => (rule.to_owned(), authority.to_owned()),
    }
}

// Path characters that cannot appear raw in an IRI path segment.
const SEGMENT: &AsciiSet = &CONTROLS
    .add(b' ')
    .add(b'"')
    .add(b'#')
    .add(b'%')
    .add(b'<')
    .add(b'>')
    .add(b'?')
    .add(b'[')
    .add(b']')
    .add(b'\\')
    .add(b'^')
    .add(b'`')
    .add(b'{')
    .add(b'|')
    .add(b'}');

/// The URI a file under `root` is published at.
pub fn file_uri(authority: &str, relative: &Path) -> Option<Iri> {
    let mut uri = authority.to_owned();
    let mut first = true;
    for part in relative.components() {
        let std::path::Component::Normal(seg) = part else {
            return None;
        };
        if !first {
            uri.push('/');
        }
        first = false;
        uri.extend(utf8_percent_encode(seg.to_str()?, SEGMENT));
    }
    Iri::new(uri).ok()
}

fn with_trailing_slash(mut s: String) -> String {
    if !s.ends_with('/') {
        s.push('/');
    }
    s
}

/// Binds, loads every file under the root and publishes it.
pub fn prepare(args: &Args, ctx: &Context, err: &mut dyn Write) -> Result<Prepared, Failure> {
    let cfg = &ctx.config.serve;
    let bind = args
        .bind
        .clone()
        .or_else(|| cfg.bind.clone())
        .unwrap_or_else(|| DEFAULT_BIND.into());
    let scenario = args.scenario.or(cfg.scenario).unwrap_or(PublishScenario::SeeOther);
    let lenient = args.lenient || cfg.lenient.unwrap_or(false);
    let workers = args.workers.or(cfg.workers).unwrap_or(DEFAULT_WORKERS).max(1);
    if !args.root.is_dir() {
        return Err(env_failure(anyhow!("{} is not a directory", args.root.display())));
    }

    let server = Server::bind(bind.as_str())
        .with_context(|| format!("cannot listen on {bind}"))
        .map_err(env_failure)?;
    let authority = with_trailing_slash(
        args.authority
            .clone()
            .or_else(|| cfg.authority.clone())
            .unwrap_or_else(|| server.authority()),
    );
    let rebase: Vec<(String, String)> = cfg
        .rebase
        .iter()
        .chain(&args.rebase)
        .map(|rule| parse_rebase(rule, &authority))
        .collect();

    let mut config = StoreConfig::new(authority.clone());
    if let Some(f) = args.default_format.map(WireFormat::from).or(cfg.default_format) {
        config.default_format = f;
    }
    config.allow_lossy_atom = args.allow_lossy_atom || cfg.allow_lossy_atom.unwrap_or(false);
    let store = Arc::new(Store::new(config));

    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(&args.root).sort_by_file_name() {
        let entry = entry.context("cannot list the root directory").map_err(env_failure)?;
        let hidden = entry.depth() > 0 && entry.file_name().to_string_lossy().starts_with('.');
        if entry.file_type().is_file() && !hidden {
            files.push(entry.into_path());
        }
    }

    let mut prepared = Prepared {
        server,
        store: store.clone(),
        authority: authority.clone(),
        scenario,
        workers,
        maps: Vec::new(),
        resources: 0,
        skipped: Vec::new(),
    };
    let mut statics = Vec::new();
    for path in files {
        let relative = path.strip_prefix(&args.root).expect("walked from root").to_path_buf();
        let Some(uri) = file_uri(&authority, &relative) else {
            skip(
                &mut prepared,
                lenient,
                err,
                &path,
                domain_failure(anyhow!("file name cannot be a URI")),
            )?;
            continue;
        };
        match WireFormat::from_path(&path) {
            Some(format) => match load_map(&path, &uri, format, &rebase) {
                Ok(rem) => {
                    let rem_uri = rem.uri().clone();
                    match store.publish(rem, scenario) {
                        Ok(_) => prepared.maps.push((path, rem_uri)),
                        Err(e) => {
                            let f = publish_failure(e);
                            skip(&mut prepared, lenient, err, &path, f)?;
                        }
                    }
                }
                Err(f) => skip(&mut prepared, lenient, err, &path, f)?,
            },
            None => statics.push((path, uri)),
        }
    }
    // after the maps, so a file cannot shadow a Resource Map URI
    for (path, uri) in statics {
        let body = std::fs::read(&path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(env_failure)?;
        let media_type = mime_guess::from_path(&path).first_or_octet_stream();
        match store.put_resource(&uri, media_type.essence_str(), body) {
            Ok(()) => prepared.resources += 1,
            Err(e) => skip(&mut prepared, lenient, err, &path, publish_failure(e))?,
        }
    }
    Ok(prepared)
}

fn load_map(path: &Path, uri: &Iri, format: WireFormat, rebase: &[(String, String)]) -> Result<ResourceMap, Failure> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(env_failure)?;
    let doc = Document {
        label: path.display().to_string(),
        bytes,
        base: uri.clone(),
        media_type: None,
        path: Some(path.to_path_buf()),
    };
    let rem = read_rem(&doc, format, None).map_err(|e| match e {
        ReadError::Invalid { .. } => Failure::from(e),
        ReadError::Syntax(f) => f,
    })?;
    let (mut rem_uri, mut graph) = rem.into_parts();
    for (old, new) in rebase {
        graph = graph.rebase(old, new);
        if let Some(rest) = rem_uri.as_str().strip_prefix(old.as_str()) {
            rem_uri = Iri::new(format!("{new}{rest}"))
                .map_err(|e| domain_failure(anyhow!("rebased resource map URI: {e}")))?;
        }
    }
    Ok(ResourceMap::new(rem_uri, graph))
}

fn publish_failure(e: PublishError) -> Failure {
    match e {
        PublishError::Serialize { .. } => env_failure(e),
        _ => domain_failure(e),
    }
}

fn skip(prepared: &mut Prepared, lenient: bool, err: &mut dyn Write, path: &Path, f: Failure) -> Result<(), Failure> {
    if !lenient {
        return Err(Failure {
            code: f.code,
            error: f.error.context(format!("cannot publish {}", path.display())),
        });
    }
    writeln!(err, "skipping {}: {f}", path.display()).map_err(io)?;
    prepared.skipped.push((path.to_path_buf(), f.to_string()));
    Ok(())
}

/// Prints the `listening on` line once the store is ready, then serves
/// until the process is stopped.
pub fn run(args: &Args, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let prepared = prepare(args, ctx, err)?;
    writeln!(
        out,
        "listening on {} ({} resource maps, {} files, scenario {})",
        prepared.authority,
        prepared.maps.len(),
        prepared.resources,
        prepared.scenario
    )
    .map_err(io)?;
    for (path, uri) in &prepared.maps {
        writeln!(out, "  {uri} <- {}", path.display()).map_err(io)?;
    }
    out.flush().map_err(io)?;
    prepared.start().join();
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rebase_specs() {
        let auth = "http://127.0.0.1:1/";
        assert_eq!(
            parse_rebase("http://example.org/", auth),
            ("http://example.org/".into(), auth.into())
        );
        assert_eq!(
            parse_rebase("http://example.org/=http://n.net/x/", auth),
            ("http://example.org/".into(), "http://n.net/x/".into())
        );
        assert_eq!(
            parse_rebase("http://e.org/?a=b=http://n.net/", auth),
            ("http://e.org/?a=b".into(), "http://n.net/".into())
        );
    }

    #[test]
    fn file_uris() {
        let auth = "http://h/";
        assert_eq!(
            file_uri(auth, Path::new("a/b c.txt")).unwrap().as_str(),
            "http://h/a/b%20c.txt"
        );
        assert_eq!(
            file_uri(auth, Path::new("caf\u{e9}#1.pdf")).unwrap().as_str(),
            "http://h/caf%C3%A9%231.pdf"
        );
        assert!(file_uri(auth, Path::new("../x")).is_none());
    }
}
