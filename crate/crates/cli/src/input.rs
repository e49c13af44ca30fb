//! Reading a Resource Map document from a file or URL.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use ore_core::model::ValidationReport;
use ore_core::serialization::{parse_atom, parse_rdfxml, AtomError};
use ore_core::vocab::ore;
use ore_core::{Graph, Iri, ResourceMap, Term, WireFormat};

use crate::{env_failure, Context, Failure, FormatArg};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    Url(Iri),
}

impl Source {
    /// `http://` and `https://` arguments are URLs, anything else a path.
    pub fn parse(arg: &str) -> Result<Source, Failure> {
        let lower = arg.to_ascii_lowercase();
        if lower.starts_with("http://") || lower.starts_with("https://") {
            Iri::new(arg)
                .map(Source::Url)
                .map_err(|e| env_failure(anyhow!("{arg:?} is not a valid URL: {e}")))
        } else {
            Ok(Source::File(PathBuf::from(arg)))
        }
    }
}

#[derive(Debug, Clone)]
pub struct Document {
    /// How to name the input in messages.
    pub label: String,
    pub bytes: Vec<u8>,
    /// Relative references resolve against this.
    pub base: Iri,
    /// The `Content-Type` of a fetched document.
    pub media_type: Option<String>,
    pub path: Option<PathBuf>,
}

pub fn file_iri(path: &Path) -> Result<Iri, Failure> {
    let absolute = std::fs::canonicalize(path)
        .or_else(|_| std::path::absolute(path))
        .with_context(|| format!("cannot resolve {}", path.display()))
        .map_err(env_failure)?;
    let url = url::Url::from_file_path(&absolute)
        .map_err(|()| env_failure(anyhow!("{} has no file URL", absolute.display())))?;
    Iri::new(url.as_str()).map_err(|e| env_failure(anyhow!("file URL {url}: {e}")))
}

pub fn load(source: &Source, ctx: &Context) -> Result<Document, Failure> {
    match source {
        Source::File(path) => {
            let bytes = std::fs::read(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .map_err(env_failure)?;
            Ok(Document {
                label: path.display().to_string(),
                bytes,
                base: file_iri(path)?,
                media_type: None,
                path: Some(path.clone()),
            })
        }
        Source::Url(url) => {
            let accept = format!(
                "{}, {};q=0.9",
                WireFormat::RdfXml.media_type(),
                WireFormat::Atom.media_type()
            );
            let fetched = ctx.client().get(url, Some(&accept)).map_err(env_failure)?;
            Ok(Document {
                label: url.to_string(),
                media_type: fetched.response.media_type(),
                bytes: fetched.response.body,
                base: fetched.url,
                path: None,
            })
        }
    }
}

/// Picks the wire format: an explicit choice, else the root element, else
/// the response `Content-Type` or file extension.
pub fn detect_format(choice: FormatArg, doc: &Document) -> Result<WireFormat, Failure> {
    if let Some(f) = choice.fixed() {
        return Ok(f);
    }
    WireFormat::sniff(&doc.bytes)
        .or_else(|| doc.media_type.as_deref().and_then(WireFormat::from_media_type))
        .or_else(|| doc.path.as_deref().and_then(WireFormat::from_path))
        .ok_or_else(|| {
            env_failure(anyhow!(
                "{}: cannot tell whether this is RDF/XML or Atom; pass --format",
                doc.label
            ))
        })
}

/// The one IRI that is the subject of `ore:describes`, if there is exactly one.
pub fn infer_rem_uri(graph: &Graph) -> Option<Iri> {
    let describes = Term::Iri(Iri::from_static(ore::DESCRIBES));
    let mut subjects = graph
        .query(None, Some(&describes), None)
        .filter_map(|t| t.subject().as_iri());
    let first = subjects.next()?;
    subjects.all(|s| s == first).then(|| first.clone())
}

/// Why a document did not yield a Resource Map.
#[derive(Debug)]
pub enum ReadError {
    /// Not a well-formed document in the chosen format.
    Syntax(Failure),
    /// Parsed, but the Atom mapping already found it invalid.
    Invalid { rem_uri: Iri, report: ValidationReport },
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Failure {
        match e {
            ReadError::Syntax(f) => f,
            ReadError::Invalid { rem_uri, report } => {
                crate::domain_failure(anyhow!("resource map {rem_uri} is invalid:\n{report}"))
            }
        }
    }
}

/// Parses `doc`. For RDF/XML the map is named by `rem_uri`, else the unique
/// `ore:describes` subject, else the document's own URI.
pub fn read_rem(doc: &Document, format: WireFormat, rem_uri: Option<&Iri>) -> Result<ResourceMap, ReadError> {
    match format {
        WireFormat::RdfXml => {
            let graph = parse_rdfxml(&doc.bytes, &doc.base)
                .map_err(|e| ReadError::Syntax(env_failure(anyhow!("{}: {e}", doc.label))))?;
            let uri = rem_uri
                .cloned()
                .or_else(|| infer_rem_uri(&graph))
                .unwrap_or_else(|| doc.base.clone());
            Ok(ResourceMap::new(uri, graph))
        }
        WireFormat::Atom => match parse_atom(&doc.bytes) {
            Ok(rem) => Ok(match rem_uri {
                Some(uri) => ResourceMap::new(uri.clone(), rem.into_parts().1),
                None => rem,
            }),
            Err(AtomError::Invalid { rem_uri, report }) => Err(ReadError::Invalid { rem_uri, report }),
            Err(e) => Err(ReadError::Syntax(env_failure(anyhow!("{}: {e}", doc.label)))),
        },
    }
}
