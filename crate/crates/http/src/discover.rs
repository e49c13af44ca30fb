//! Finds the Resource Maps a Web resource points to.

use std::collections::HashSet;

use ore_core::discovery::{decode_link_header, extract_html_links, parse_batch, BatchFormat, DiscoveryHit, Mechanism};
use ore_core::{Iri, WireFormat};

use crate::client::{Client, ClientError, Fetched, Method};

const HTML_TYPES: [&str; 2] = ["text/html", "application/xhtml+xml"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Discovery {
    /// Response-header hits, then embedded links, then batch entries;
    /// one hit per Resource Map URI.
    pub hits: Vec<DiscoveryHit>,
    pub warnings: Vec<String>,
}

fn batch_format(media_type: Option<&str>, body: &[u8], forced: bool) -> Option<BatchFormat> {
    match media_type {
        Some("text/uri-list") => Some(BatchFormat::PlainText),
        // an Atom entry is a single map, only a feed is a list
        Some(mt) if mt == WireFormat::Atom.media_type() && body_root_is_feed(body) => Some(BatchFormat::AtomFeed),
        _ if forced => Some(BatchFormat::sniff(body)),
        _ => None,
    }
}

fn body_root_is_feed(body: &[u8]) -> bool {
    let text = String::from_utf8_lossy(&body[..body.len().min(4096)]);
    text.split('<')
        .skip(1)
        .find(|t| !t.starts_with('?') && !t.starts_with('!'))
        .is_some_and(|t| {
            let name: String = t
                .chars()
                .take_while(|c| !c.is_whitespace() && *c != '>' && *c != '/')
                .collect();
            name.rsplit(':').next() == Some("feed")
        })
}

/// HEAD (falling back to GET) for `Link` headers, then the body for HTML
/// links or batch lists.
pub fn discover(client: &Client, resource: &Iri, force_batch: bool) -> Result<Discovery, ClientError> {
    let mut out = Discovery::default();
    let head = match client.fetch(Method::Head, resource, None) {
        Ok(f) if f.response.status == 200 => Some(f),
        Ok(f) => {
            out.warnings.push(format!(
                "HEAD {} answered {}; retrying with GET",
                f.url, f.response.status
            ));
            None
        }
        Err(e) => {
            out.warnings.push(format!("HEAD failed ({e}); retrying with GET"));
            None
        }
    };
    let mut get: Option<Fetched> = None;
    let first = match head {
        Some(f) => f,
        None => {
            let f = client.get(resource, None)?;
            get = Some(f.clone());
            f
        }
    };

    let base = first.url.clone();
    let mut hits = Vec::new();
    for value in first.response.headers_named("link") {
        let decoded = decode_link_header(value, &base);
        hits.extend(decoded.hits);
        out.warnings.extend(decoded.warnings);
    }

    let media_type = first.response.media_type();
    let is_html = media_type.as_deref().is_some_and(|mt| HTML_TYPES.contains(&mt));
    let maybe_batch = force_batch
        || media_type.as_deref() == Some("text/uri-list")
        || media_type.as_deref() == Some(WireFormat::Atom.media_type());
    if is_html || maybe_batch {
        let body = match get {
            Some(f) => f,
            None => client.get(resource, None)?,
        };
        let base = body.url.clone();
        let bytes = &body.response.body;
        if is_html {
            hits.extend(extract_html_links(bytes, &base));
        }
        if let Some(format) = batch_format(body.response.media_type().as_deref(), bytes, force_batch) {
            match parse_batch(bytes, &base, format) {
                Ok(parsed) => {
                    out.warnings.extend(
                        parsed
                            .errors
                            .iter()
                            .map(|e| format!("line {}: not an IRI: {}", e.line, e.content)),
                    );
                    hits.extend(parsed.list.rem_uris.into_iter().map(|rem_uri| DiscoveryHit {
                        resource: base.clone(),
                        rem_uri,
                        mechanism: Mechanism::Batch,
                        media_type: None,
                    }));
                }
                Err(e) => out.warnings.push(format!("batch list at {base}: {e}")),
            }
        }
    }

    for hit in &mut hits {
        hit.resource = resource.clone();
    }
    // stable: within a mechanism, document order is kept
    hits.sort_by_key(|h| mechanism_rank(h.mechanism));
    let mut seen = HashSet::new();
    out.hits = hits.into_iter().filter(|h| seen.insert(h.rem_uri.clone())).collect();
    Ok(out)
}

fn mechanism_rank(m: Mechanism) -> u8 {
    match m {
        Mechanism::ResponseEmbedding => 0,
        Mechanism::ResourceEmbedding => 1,
        Mechanism::Batch => 2,
    }
}
