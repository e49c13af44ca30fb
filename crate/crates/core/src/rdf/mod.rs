//! Minimal RDF statement model: terms, triples and graphs as sets.

mod graph;
mod iso;
mod term;

pub use graph::Graph;
pub use iso::{graph_isomorphic, isomorphic_with_limit, CapacityError, DEFAULT_MAX_BLANK_NODES};
pub use term::{BlankNode, Iri, Literal, Term, TermError, Triple};
