use std::fmt;

use serde::Serialize;

use super::w3cdtf::is_w3cdtf;
use crate::rdf::{Graph, Iri, Term};
use crate::vocab::{dcterms, ore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    MissingDescribes,
    MultipleDescribes,
    EmptyAggregation,
    IdentityCollision,
    MissingCreator,
    MissingModified,
    MalformedModified,
    NonIriAggregated,
    SelfAggregation,
    BlankAggregation,
}

impl ViolationCode {
    pub const ALL: [ViolationCode; 10] = [
        ViolationCode::MissingDescribes,
        ViolationCode::MultipleDescribes,
        ViolationCode::EmptyAggregation,
        ViolationCode::IdentityCollision,
        ViolationCode::MissingCreator,
        ViolationCode::MissingModified,
        ViolationCode::MalformedModified,
        ViolationCode::NonIriAggregated,
        ViolationCode::SelfAggregation,
        ViolationCode::BlankAggregation,
    ];

    pub fn severity(self) -> Severity {
        match self {
            ViolationCode::SelfAggregation => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::MissingDescribes => "MISSING_DESCRIBES",
            ViolationCode::MultipleDescribes => "MULTIPLE_DESCRIBES",
            ViolationCode::EmptyAggregation => "EMPTY_AGGREGATION",
            ViolationCode::IdentityCollision => "IDENTITY_COLLISION",
            ViolationCode::MissingCreator => "MISSING_CREATOR",
            ViolationCode::MissingModified => "MISSING_MODIFIED",
            ViolationCode::MalformedModified => "MALFORMED_MODIFIED",
            ViolationCode::NonIriAggregated => "NON_IRI_AGGREGATED",
            ViolationCode::SelfAggregation => "SELF_AGGREGATION",
            ViolationCode::BlankAggregation => "BLANK_AGGREGATION",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ViolationCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ViolationCode::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown violation code {s}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub severity: Severity,
    pub subject: Option<Term>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.severity == Severity::Warning)
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    /// Distinct codes present, sorted.
    pub fn codes(&self) -> Vec<ViolationCode> {
        let mut codes: Vec<_> = self.violations.iter().map(|v| v.code).collect();
        codes.sort();
        codes.dedup();
        codes
    }

    fn push(&mut self, code: ViolationCode, subject: Option<&Term>, message: impl Into<String>) {
        self.violations.push(Violation {
            code,
            severity: code.severity(),
            subject: subject.cloned(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            let level = match v.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            write!(f, "{level}[{}]: {}", v.code, v.message)?;
            if let Some(subject) = &v.subject {
                write!(f, " ({subject})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Checks `graph` against the aggregation-graph constraints for the Resource
/// Map `rem_uri`. Never fails; every problem becomes a report entry.
pub fn validate(graph: &Graph, rem_uri: &Iri) -> ValidationReport {
    use ViolationCode::*;

    let mut report = ValidationReport::default();
    let rem = Term::Iri(rem_uri.clone());
    let describes = Term::Iri(Iri::from_static(ore::DESCRIBES));
    let aggregates = Term::Iri(Iri::from_static(ore::AGGREGATES));
    let creator = Term::Iri(Iri::from_static(dcterms::CREATOR));
    let modified = Term::Iri(Iri::from_static(dcterms::MODIFIED));

    let described: Vec<&Term> = graph.objects(&rem, &describes).collect();
    let described_iris: Vec<&Iri> = described.iter().filter_map(|t| t.as_iri()).collect();
    for non_iri in described.iter().filter(|t| t.as_iri().is_none()) {
        report.push(
            MissingDescribes,
            Some(non_iri),
            format!("ore:describes object of {rem_uri} is not an IRI"),
        );
    }
    match described.len() {
        0 => report.push(
            MissingDescribes,
            Some(&rem),
            format!("{rem_uri} has no ore:describes statement"),
        ),
        1 => {}
        n => report.push(
            MultipleDescribes,
            Some(&rem),
            format!("{rem_uri} has {n} ore:describes statements; exactly one is required"),
        ),
    }

    for agg in &described_iris {
        let agg_term = Term::Iri((*agg).clone());
        if *agg == rem_uri {
            report.push(
                IdentityCollision,
                Some(&agg_term),
                "the Aggregation URI must be distinct from the Resource Map URI",
            );
        }
        let constituents: Vec<&Term> = graph.objects(&agg_term, &aggregates).collect();
        if constituents.is_empty() {
            report.push(
                EmptyAggregation,
                Some(&agg_term),
                format!("{agg} aggregates no resources"),
            );
        }
        for c in constituents {
            match c {
                Term::Iri(iri) if iri == *agg => {
                    report.push(SelfAggregation, Some(c), format!("{agg} aggregates itself"));
                }
                Term::Iri(_) => {}
                Term::BlankNode(_) => report.push(
                    BlankAggregation,
                    Some(c),
                    "aggregated resources must be independently addressable, found a blank node",
                ),
                Term::Literal(_) => report.push(NonIriAggregated, Some(c), "aggregated resource is a literal"),
            }
        }
    }

    if graph.objects(&rem, &creator).next().is_none() {
        report.push(MissingCreator, Some(&rem), format!("{rem_uri} has no dcterms:creator"));
    }

    let stamps: Vec<&Term> = graph.objects(&rem, &modified).collect();
    match stamps.as_slice() {
        [] => report.push(
            MissingModified,
            Some(&rem),
            format!("{rem_uri} has no dcterms:modified"),
        ),
        [Term::Literal(l)] if is_w3cdtf(l.lexical()) => {}
        [other] => report.push(
            MalformedModified,
            Some(other),
            "dcterms:modified must be a W3CDTF timestamp literal",
        ),
        many => report.push(
            MalformedModified,
            Some(&rem),
            format!("{} dcterms:modified statements; exactly one is required", many.len()),
        ),
    }
    report
}
