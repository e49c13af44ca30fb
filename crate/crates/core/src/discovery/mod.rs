//! Resource Map discovery: batch lists, links embedded in HTML, and `Link`
//! response headers.

mod batch;
mod html;
mod link_header;

use serde::Serialize;

use crate::rdf::Iri;

pub use batch::{emit_batch, parse_batch, BatchError, BatchFormat, BatchList, BatchParse, LineError};
pub use html::{embed_html_link, extract_html_links, HtmlError};
pub use link_header::{decode_link_header, encode_link_header, LinkDecode};

/// The `rel` token identifying a Resource Map link.
pub const REL_RESOURCEMAP: &str = "resourcemap";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Mechanism {
    Batch,
    ResourceEmbedding,
    ResponseEmbedding,
}

impl Mechanism {
    pub fn label(self) -> &'static str {
        match self {
            Mechanism::Batch => "batch",
            Mechanism::ResourceEmbedding => "resource-embedding",
            Mechanism::ResponseEmbedding => "response-embedding",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct DiscoveryHit {
    /// Where discovery started.
    pub resource: Iri,
    pub rem_uri: Iri,
    pub mechanism: Mechanism,
    pub media_type: Option<String>,
}
