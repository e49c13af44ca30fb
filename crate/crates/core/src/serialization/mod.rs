//! Wire formats for Resource Maps.

mod atom;
mod rdfxml;
pub(crate) mod xml;

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::rdf::Triple;

pub(crate) use atom::entry_self_links;
pub use atom::{parse_atom, serialize_atom, AtomError, AtomOutput};
pub use rdfxml::{parse_rdfxml, serialize_rdfxml, RdfXmlError, SerializeError};
pub use xml::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WireFormat {
    RdfXml,
    Atom,
}

impl WireFormat {
    pub const ALL: [WireFormat; 2] = [WireFormat::RdfXml, WireFormat::Atom];

    pub fn media_type(self) -> &'static str {
        match self {
            WireFormat::RdfXml => "application/rdf+xml",
            WireFormat::Atom => "application/atom+xml",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            WireFormat::RdfXml => "rdf",
            WireFormat::Atom => "atom",
        }
    }

    /// Matches a `Content-Type` value, ignoring parameters and case.
    pub fn from_media_type(value: &str) -> Option<WireFormat> {
        let essence = value.split(';').next().unwrap_or("").trim();
        WireFormat::ALL
            .into_iter()
            .find(|f| f.media_type().eq_ignore_ascii_case(essence))
    }

    pub fn from_extension(ext: &str) -> Option<WireFormat> {
        WireFormat::ALL
            .into_iter()
            .find(|f| f.extension().eq_ignore_ascii_case(ext))
    }

    pub fn from_path(path: &Path) -> Option<WireFormat> {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(WireFormat::from_extension)
    }

    /// Guesses the format from the document's root element.
    pub fn sniff(document: &[u8]) -> Option<WireFormat> {
        let text = String::from_utf8_lossy(&document[..document.len().min(4096)]);
        let mut rest = text.as_ref();
        loop {
            let start = rest.find('<')?;
            rest = &rest[start + 1..];
            if rest.starts_with('?') || rest.starts_with('!') {
                continue;
            }
            let name: String = rest
                .chars()
                .take_while(|c| !c.is_whitespace() && *c != '>' && *c != '/')
                .collect();
            let local = name.rsplit(':').next().unwrap_or("");
            return match local {
                "RDF" => Some(WireFormat::RdfXml),
                "entry" | "feed" => Some(WireFormat::Atom),
                _ => None,
            };
        }
    }
}

impl fmt::Display for WireFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WireFormat::RdfXml => "rdfxml",
            WireFormat::Atom => "atom",
        })
    }
}

impl std::str::FromStr for WireFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rdfxml" | "rdf" | "rdf+xml" | "application/rdf+xml" => Ok(WireFormat::RdfXml),
            "atom" | "application/atom+xml" => Ok(WireFormat::Atom),
            other => Err(format!("unknown format {other:?} (expected rdfxml or atom)")),
        }
    }
}

/// Statements a serialization could not represent. Always empty for RDF/XML.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LossReport {
    pub dropped: Vec<Triple>,
}

impl LossReport {
    pub fn is_lossless(&self) -> bool {
        self.dropped.is_empty()
    }
}
