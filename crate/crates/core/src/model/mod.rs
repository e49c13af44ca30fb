//! Resource Maps, Aggregations, and the aggregation-graph constraints.

mod resource_map;
mod validate;
mod w3cdtf;

pub use resource_map::{format_timestamp, Aggregation, Boundary, ModelError, ResourceMap, ResourceMapBuilder};
pub use validate::{validate, Severity, ValidationReport, Violation, ViolationCode};
pub use w3cdtf::is_w3cdtf;
