//! OAI-ORE Resource Maps: an RDF graph core, the Aggregation model and its
//! validator, RDF/XML and Atom codecs, and discovery helpers.

pub mod discovery;
pub mod model;
pub mod rdf;
pub mod serialization;
pub mod vocab;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use model::{validate, ResourceMap, ResourceMapBuilder, ValidationReport, ViolationCode};
pub use rdf::{graph_isomorphic, Graph, Iri, Term, Triple};
pub use serialization::WireFormat;
