use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use super::validate::{validate, ValidationReport};
use crate::rdf::{Graph, Iri, Literal, Term, Triple};
use crate::vocab::{dcterms, ore, xsd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("Aggregation URI {0} collides with the Resource Map URI")]
    IdentityCollision(Iri),
    #[error("an aggregation must aggregate at least one resource")]
    EmptyAggregation,
    #[error("Resource Map {0} has no ore:describes statement with an IRI object")]
    MissingDescribes(Iri),
    #[error("Resource Map {rem} has {count} ore:describes statements")]
    MultipleDescribes { rem: Iri, count: usize },
    #[error("resource map does not validate:\n{0}")]
    Invalid(ValidationReport),
}

/// A Resource Map: a URI naming a set of RDF statements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResourceMap {
    uri: Iri,
    graph: Graph,
}

/// The enumerated constituents of an aggregation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    pub resources: Vec<Iri>,
    /// `ore:aggregates` objects that are not IRIs and were left out.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Aggregation {
    pub uri: Iri,
    pub aggregated: Vec<Iri>,
}

impl Aggregation {
    pub fn is_self_aggregating(&self) -> bool {
        self.aggregated.contains(&self.uri)
    }
}

fn describes() -> Term {
    Term::Iri(Iri::from_static(ore::DESCRIBES))
}

fn aggregates() -> Term {
    Term::Iri(Iri::from_static(ore::AGGREGATES))
}

impl ResourceMap {
    /// Pairs a URI with a graph. No validation happens here; see [`ResourceMap::validate`].
    pub fn new(uri: Iri, graph: Graph) -> Self {
        ResourceMap { uri, graph }
    }

    pub fn uri(&self) -> &Iri {
        &self.uri
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_parts(self) -> (Iri, Graph) {
        (self.uri, self.graph)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.graph, &self.uri)
    }

    /// The unique IRI object of `(uri, ore:describes, ·)`.
    pub fn aggregation_uri(&self) -> Result<&Iri, ModelError> {
        let subject = Term::Iri(self.uri.clone());
        let objects: Vec<&Term> = self.graph.objects(&subject, &describes()).collect();
        match objects.as_slice() {
            [Term::Iri(a)] => Ok(a),
            [] | [_] => Err(ModelError::MissingDescribes(self.uri.clone())),
            many => Err(ModelError::MultipleDescribes {
                rem: self.uri.clone(),
                count: many.len(),
            }),
        }
    }

    /// Objects of the aggregation's `ore:aggregates` statements, deduplicated
    /// and in graph order. Nothing but `ore:aggregates` defines constituency.
    pub fn boundary(&self) -> Result<Boundary, ModelError> {
        let agg = Term::Iri(self.aggregation_uri()?.clone());
        let mut resources = Vec::new();
        let mut skipped = 0;
        // graph order already sorts and deduplicates objects for a fixed subject/predicate
        for object in self.graph.objects(&agg, &aggregates()) {
            match object {
                Term::Iri(iri) => resources.push(iri.clone()),
                _ => skipped += 1,
            }
        }
        Ok(Boundary { resources, skipped })
    }

    pub fn described_aggregation(&self) -> Result<Aggregation, ModelError> {
        let uri = self.aggregation_uri()?.clone();
        let aggregated = self.boundary()?.resources;
        Ok(Aggregation { uri, aggregated })
    }

    /// The mandatory statements: describes, aggregates, creator and modified.
    pub fn aggregation_graph(&self) -> Graph {
        let rem = Term::Iri(self.uri.clone());
        let mut out = Graph::new();
        for p in [ore::DESCRIBES, dcterms::CREATOR, dcterms::MODIFIED] {
            let p = Term::Iri(Iri::from_static(p));
            out.extend(self.graph.query(Some(&rem), Some(&p), None).cloned());
        }
        let aggs = aggregates();
        for agg in self.graph.objects(&rem, &describes()).filter(|t| t.as_iri().is_some()) {
            out.extend(self.graph.query(Some(agg), Some(&aggs), None).cloned());
        }
        out
    }

    pub fn creators(&self) -> impl Iterator<Item = &Term> {
        let rem = Term::Iri(self.uri.clone());
        let p = Term::Iri(Iri::from_static(dcterms::CREATOR));
        self.graph
            .iter()
            .filter(move |t| t.subject() == &rem && t.predicate() == &p)
            .map(Triple::object)
    }
}

/// Formats a timestamp the way dcterms:modified literals are written.
pub fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Assembles a Resource Map whose graph is the aggregation graph plus any
/// extra statements.
#[derive(Debug, Clone)]
pub struct ResourceMapBuilder {
    rem: Iri,
    aggregation: Iri,
    aggregated: Vec<Iri>,
    creators: Vec<Term>,
    modified: DateTime<Utc>,
    extra: Graph,
}

impl ResourceMapBuilder {
    pub fn new(rem: Iri, aggregation: Iri, modified: DateTime<Utc>) -> Self {
        ResourceMapBuilder {
            rem,
            aggregation,
            aggregated: Vec::new(),
            creators: Vec::new(),
            modified,
            extra: Graph::new(),
        }
    }

    pub fn aggregate(mut self, resource: Iri) -> Self {
        self.aggregated.push(resource);
        self
    }

    pub fn aggregates(mut self, resources: impl IntoIterator<Item = Iri>) -> Self {
        self.aggregated.extend(resources);
        self
    }

    pub fn creator(mut self, creator: impl Into<Term>) -> Self {
        self.creators.push(creator.into());
        self
    }

    pub fn extra(mut self, graph: Graph) -> Self {
        self.extra.extend(graph);
        self
    }

    pub fn build(self) -> Result<ResourceMap, ModelError> {
        if self.rem == self.aggregation {
            return Err(ModelError::IdentityCollision(self.aggregation));
        }
        if self.aggregated.is_empty() {
            return Err(ModelError::EmptyAggregation);
        }
        let rem = Term::Iri(self.rem.clone());
        let agg = Term::Iri(self.aggregation.clone());
        let mut graph = self.extra;
        graph.insert(Triple::from_valid(
            rem.clone(),
            Iri::from_static(ore::DESCRIBES),
            agg.clone(),
        ));
        for r in self.aggregated {
            graph.insert(Triple::from_valid(
                agg.clone(),
                Iri::from_static(ore::AGGREGATES),
                Term::Iri(r),
            ));
        }
        for c in self.creators {
            graph.insert(Triple::from_valid(rem.clone(), Iri::from_static(dcterms::CREATOR), c));
        }
        let stamp = Literal::typed(format_timestamp(&self.modified), Iri::from_static(xsd::DATE_TIME))
            .expect("xsd:dateTime is not rdf:langString");
        graph.insert(Triple::from_valid(
            rem,
            Iri::from_static(dcterms::MODIFIED),
            Term::Literal(stamp),
        ));

        let map = ResourceMap::new(self.rem, graph);
        let report = map.validate();
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        Ok(map)
    }
}
