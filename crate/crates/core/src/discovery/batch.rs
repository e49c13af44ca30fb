use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::rdf::Iri;
use crate::serialization::{entry_self_links, xml::escape_attr, xml::escape_text, AtomError, WireFormat};
use crate::vocab::atom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BatchFormat {
    /// One absolute IRI per line, `\n`-terminated.
    PlainText,
    /// One Atom entry per Resource Map, identified by its `rel="self"` link.
    AtomFeed,
}

impl BatchFormat {
    pub fn media_type(self) -> &'static str {
        match self {
            BatchFormat::PlainText => "text/uri-list",
            BatchFormat::AtomFeed => WireFormat::Atom.media_type(),
        }
    }

    /// Guesses the format from content: anything starting with `<` is a feed.
    pub fn sniff(document: &[u8]) -> BatchFormat {
        let document = document.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(document);
        if document.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'<') {
            BatchFormat::AtomFeed
        } else {
            BatchFormat::PlainText
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchList {
    pub rem_uris: Vec<Iri>,
    pub format: BatchFormat,
}

/// A line of a plain-text list that is not an IRI reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineError {
    pub line: usize,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchParse {
    pub list: BatchList,
    pub errors: Vec<LineError>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BatchError {
    #[error("batch list is not UTF-8")]
    Encoding,
    #[error("malformed batch feed: {0}")]
    Feed(#[from] AtomError),
}

pub fn emit_batch(entries: &[Iri], format: BatchFormat) -> Vec<u8> {
    let mut out = String::new();
    match format {
        BatchFormat::PlainText => {
            for uri in entries {
                out.push_str(uri.as_str());
                out.push('\n');
            }
        }
        BatchFormat::AtomFeed => {
            out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<feed xmlns=\"");
            out.push_str(atom::NS);
            out.push_str("\">\n  <title>Resource Maps</title>\n");
            for uri in entries {
                out.push_str("  <entry>\n    <id>");
                escape_text(uri.as_str(), &mut out);
                out.push_str("</id>\n    <title>");
                escape_text(uri.as_str(), &mut out);
                out.push_str("</title>\n    <link rel=\"self\" type=\"");
                out.push_str(WireFormat::Atom.media_type());
                out.push_str("\" href=\"");
                escape_attr(uri.as_str(), &mut out);
                out.push_str("\"/>\n  </entry>\n");
            }
            out.push_str("</feed>\n");
        }
    }
    out.into_bytes()
}

/// Reads a batch list. Relative references resolve against `base`;
/// duplicates are dropped keeping the first occurrence.
pub fn parse_batch(document: &[u8], base: &Iri, format: BatchFormat) -> Result<BatchParse, BatchError> {
    let mut seen = HashSet::new();
    let mut rem_uris = Vec::new();
    let mut errors = Vec::new();
    let mut keep = |iri: Iri, rem_uris: &mut Vec<Iri>| {
        if seen.insert(iri.clone()) {
            rem_uris.push(iri);
        }
    };
    match format {
        BatchFormat::PlainText => {
            let text = std::str::from_utf8(document).map_err(|_| BatchError::Encoding)?;
            let text = text.strip_prefix('\u{FEFF}').unwrap_or(text);
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                match base.resolve(line) {
                    Ok(iri) => keep(iri, &mut rem_uris),
                    Err(_) => errors.push(LineError {
                        line: i + 1,
                        content: raw.to_owned(),
                    }),
                }
            }
        }
        BatchFormat::AtomFeed => {
            for href in entry_self_links(document)? {
                match base.resolve(&href) {
                    Ok(iri) => keep(iri, &mut rem_uris),
                    Err(_) => errors.push(LineError { line: 0, content: href }),
                }
            }
        }
    }
    Ok(BatchParse {
        list: BatchList { rem_uris, format },
        errors,
    })
}
