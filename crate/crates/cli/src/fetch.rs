//! Archiving an aggregation: the Resource Map, every constituent's bytes
//! and a `manifest.json`.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context as _};
use chrono::{DateTime, SubsecRound, Utc};
use ore_core::{Iri, ResourceMap, WireFormat};
use ore_http::{read_resource_map, Client, ClientError, Fetched};
use serde::{Deserialize, Serialize};

use crate::{domain_failure, env_failure, io, CmdResult, Context, Failure, EXIT_DOMAIN, EXIT_OK};

pub const MANIFEST: &str = "manifest.json";
pub const DEFAULT_MAX_DEPTH: usize = 3;
pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Aggregation URI or Resource Map URI
    pub uri: Iri,
    /// Directory to write into; created if missing
    pub out_dir: PathBuf,
    /// Also harvest constituents that are themselves aggregations
    #[arg(long)]
    pub transitive: bool,
    /// Nesting limit for --transitive [default: 3]
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Milliseconds between consecutive requests [default: 0]
    #[arg(long, value_name = "MS")]
    pub delay: Option<u64>,
    /// Parallel downloads [default: 4]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Format to ask for first [default: rdfxml]
    #[arg(long, value_enum)]
    pub format: Option<crate::WireArg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchManifest {
    pub schema: u32,
    pub aggregation_uri: String,
    pub rem_uri: String,
    /// The Resource Map as received, relative to the manifest.
    pub rem_path: String,
    pub rem_media_type: String,
    pub retrieved_at: DateTime<Utc>,
    /// In boundary order.
    pub constituents: Vec<Constituent>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constituent {
    pub uri: String,
    pub local_path: Option<String>,
    pub media_type: Option<String>,
    pub byte_length: Option<u64>,
    #[serde(flatten)]
    pub outcome: Outcome,
    /// Directory holding the nested archive when the constituent is itself
    /// an aggregation harvested with `--transitive`.
    pub nested: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Failed { http_status: Option<u16>, cause: String },
}

impl FetchManifest {
    pub fn read(dir: &Path) -> anyhow::Result<FetchManifest> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read(&path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_slice(&text).with_context(|| format!("{} is not a manifest", path.display()))
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join(MANIFEST);
        let mut text = serde_json::to_vec_pretty(self)?;
        text.push(b'\n');
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn all_ok(&self) -> bool {
        self.constituents.iter().all(|c| c.outcome == Outcome::Ok)
    }
}

/// `res-<k>-<name>`, where `name` is the last path segment of `uri`,
/// percent-decoded and stripped of anything that could leave the directory.
pub fn local_name(k: usize, uri: &str) -> String {
    let no_fragment = uri.split('#').next().unwrap_or_default();
    let path = no_fragment.split('?').next().unwrap_or_default();
    let after_scheme = path.find("://").map_or(path, |i| &path[i + 3..]);
    let segment = after_scheme
        .split_once('/')
        .map_or("", |(_, p)| p)
        .rsplit('/')
        .find(|s| !s.is_empty())
        .unwrap_or("");
    let decoded = percent_encoding::percent_decode_str(segment).decode_utf8_lossy();
    let mut name: String = decoded
        .chars()
        .map(|c| {
            if c.is_control() || matches!(c, '/' | '\\' | ':' | '*' | '?' | '"' | '<' | '>' | '|') {
                '_'
            } else {
                c
            }
        })
        .collect();
    name = name.trim_start_matches(['.', ' ']).trim_end().to_owned();
    if let Some((cut, _)) = name.char_indices().nth(80) {
        name.truncate(cut);
    }
    if name.is_empty() {
        name.push_str("resource");
    }
    format!("res-{k}-{name}")
}

/// Spaces requests `delay` apart across all workers.
struct Pacer {
    delay: Duration,
    next: Mutex<Option<Instant>>,
}

impl Pacer {
    fn wait(&self) {
        if self.delay.is_zero() {
            return;
        }
        let mut next = self.next.lock().expect("pacer lock");
        if let Some(at) = *next {
            let now = Instant::now();
            if at > now {
                std::thread::sleep(at - now);
            }
        }
        *next = Some(Instant::now() + self.delay);
    }
}

struct Harvest<'a> {
    client: &'a Client,
    workers: usize,
    transitive: bool,
    max_depth: usize,
    pacer: Pacer,
    visited: HashSet<Iri>,
    err: &'a mut dyn Write,
}

/// What one archive directory produced.
pub struct Archived {
    pub manifest: FetchManifest,
    /// Every constituent here and in nested archives was retrieved.
    pub complete: bool,
}

fn failed(e: &ClientError) -> Outcome {
    Outcome::Failed {
        http_status: e.status(),
        cause: e.to_string(),
    }
}

/// Fetches `uris` with up to `workers` threads; results come back in input order.
fn download(client: &Client, pacer: &Pacer, workers: usize, uris: &[Iri]) -> Vec<Result<Fetched, ClientError>> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    let mut slots: Vec<Option<Result<Fetched, ClientError>>> = (0..uris.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(uris.len()).max(1) {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(uri) = uris.get(k) else { break };
                pacer.wait();
                if tx.send((k, client.get(uri, None))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (k, result) in rx {
            slots[k] = Some(result);
        }
    });
    slots.into_iter().map(|s| s.expect("every index is fetched")).collect()
}

impl Harvest<'_> {
    fn archive(
        &mut self,
        rem: &ResourceMap,
        format: WireFormat,
        body: &[u8],
        dir: &Path,
        depth: usize,
    ) -> Result<Archived, Failure> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .map_err(env_failure)?;
        let rem_path = format!("resourcemap.{}", format.extension());
        write_file(&dir.join(&rem_path), body)?;
        let aggregation = rem.aggregation_uri().map_err(domain_failure)?.clone();
        let boundary = rem.boundary().map_err(domain_failure)?;
        let retrieved_at = Utc::now().trunc_subsecs(0);

        let results = download(self.client, &self.pacer, self.workers, &boundary.resources);
        let mut complete = true;
        let mut constituents = Vec::with_capacity(results.len());
        for (k, (uri, result)) in boundary.resources.iter().zip(results).enumerate() {
            let mut entry = Constituent {
                uri: uri.to_string(),
                local_path: None,
                media_type: None,
                byte_length: None,
                outcome: Outcome::Ok,
                nested: None,
            };
            match result {
                Ok(fetched) => {
                    let name = local_name(k, uri.as_str());
                    write_file(&dir.join(&name), &fetched.response.body)?;
                    entry.local_path = Some(name);
                    entry.media_type = Some(
                        fetched
                            .response
                            .header("content-type")
                            .unwrap_or("application/octet-stream")
                            .to_owned(),
                    );
                    entry.byte_length = Some(fetched.response.body.len() as u64);
                    if self.transitive && depth < self.max_depth {
                        if let Ok((nested, nested_format)) = read_resource_map(&fetched) {
                            let agg = nested.aggregation_uri().map_err(domain_failure)?.clone();
                            if self.visited.insert(agg) {
                                let sub = format!("sub-{k}");
                                let inner = self.archive(
                                    &nested,
                                    nested_format,
                                    &fetched.response.body,
                                    &dir.join(&sub),
                                    depth + 1,
                                )?;
                                complete &= inner.complete;
                                entry.nested = Some(sub);
                            }
                        }
                    }
                }
                Err(e) => {
                    writeln!(self.err, "failed: {uri}: {e}").map_err(io)?;
                    entry.outcome = failed(&e);
                    complete = false;
                }
            }
            constituents.push(entry);
        }
        let manifest = FetchManifest {
            schema: 1,
            aggregation_uri: aggregation.to_string(),
            rem_uri: rem.uri().to_string(),
            rem_path,
            rem_media_type: format.media_type().to_owned(),
            retrieved_at,
            constituents,
        };
        manifest.write(dir).map_err(env_failure)?;
        Ok(Archived { manifest, complete })
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(env_failure)
}

/// Dereferences `args.uri` and archives it into `args.out_dir`.
pub fn harvest(args: &Args, ctx: &Context, err: &mut dyn Write) -> Result<Archived, Failure> {
    let cfg = &ctx.config.fetch;
    let client = ctx.client();
    let preferred = args
        .format
        .map(WireFormat::from)
        .or(cfg.format)
        .unwrap_or(WireFormat::RdfXml);
    let root = client
        .dereference_aggregation(&args.uri, preferred)
        .map_err(|e| match e {
            ClientError::Invalid { .. } => domain_failure(anyhow!("{}: {e}", args.uri)),
            e => env_failure(anyhow!("{}: {e}", args.uri)),
        })?;
    for w in &root.warnings {
        writeln!(err, "warning: {w}").map_err(io)?;
    }
    let mut h = Harvest {
        client: &client,
        workers: args.workers.or(cfg.workers).unwrap_or(DEFAULT_WORKERS).max(1),
        transitive: args.transitive,
        max_depth: args.max_depth.or(cfg.max_depth).unwrap_or(DEFAULT_MAX_DEPTH),
        pacer: Pacer {
            delay: Duration::from_millis(args.delay.or(cfg.delay_ms).unwrap_or(0)),
            next: Mutex::new(None),
        },
        visited: HashSet::new(),
        err,
    };
    h.visited
        .insert(root.rem.aggregation_uri().map_err(domain_failure)?.clone());
    h.archive(&root.rem, root.format, &root.fetched.response.body, &args.out_dir, 0)
}

pub fn run(args: &Args, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let archived = harvest(args, ctx, err)?;
    let m = &archived.manifest;
    let ok = m.constituents.iter().filter(|c| c.outcome == Outcome::Ok).count();
    writeln!(
        out,
        "{}: {ok} of {} constituents saved in {}",
        m.aggregation_uri,
        m.constituents.len(),
        args.out_dir.display()
    )
    .map_err(io)?;
    Ok(if archived.complete { EXIT_OK } else { EXIT_DOMAIN })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_names_stay_inside() {
        assert_eq!(local_name(0, "http://h/a/paper.pdf"), "res-0-paper.pdf");
        assert_eq!(local_name(3, "http://h/a/b/?q=1#f"), "res-3-b");
        assert_eq!(local_name(1, "http://h/"), "res-1-resource");
        assert_eq!(local_name(1, "http://h"), "res-1-resource");
        assert_eq!(
            local_name(2, "http://h/x/..%2F..%2Fetc%2Fpasswd"),
            "res-2-_.._etc_passwd"
        );
        assert_eq!(local_name(2, "http://h/x/.."), "res-2-resource");
        assert_eq!(
            local_name(4, "http://h/caf%C3%A9%20menu.txt"),
            "res-4-caf\u{e9} menu.txt"
        );
        assert_eq!(local_name(5, "urn:isbn:123"), "res-5-resource");
        let long = format!("http://h/{}", "x".repeat(300));
        assert_eq!(local_name(6, &long).len(), "res-6-".len() + 80);
    }

    #[test]
    fn manifest_json_round_trip() {
        let m = FetchManifest {
            schema: 1,
            aggregation_uri: "http://h/agg".into(),
            rem_uri: "http://h/rem".into(),
            rem_path: "resourcemap.rdf".into(),
            rem_media_type: "application/rdf+xml".into(),
            retrieved_at: "2026-01-02T03:04:05Z".parse().unwrap(),
            constituents: vec![
                Constituent {
                    uri: "http://h/a".into(),
                    local_path: Some("res-0-a".into()),
                    media_type: Some("text/plain".into()),
                    byte_length: Some(3),
                    outcome: Outcome::Ok,
                    nested: None,
                },
                Constituent {
                    uri: "http://h/b".into(),
                    local_path: None,
                    media_type: None,
                    byte_length: None,
                    outcome: Outcome::Failed {
                        http_status: Some(404),
                        cause: "HTTP 404".into(),
                    },
                    nested: None,
                },
            ],
        };
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains(r#""schema":1"#));
        assert!(
            text.contains(r#""status":"ok""#) && text.contains(r#""status":"failed","http_status":404"#),
            "{text}"
        );
        assert_eq!(serde_json::from_str::<FetchManifest>(&text).unwrap(), m);
        assert!(!m.all_ok());
    }
}
