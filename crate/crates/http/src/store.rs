//! The publisher's registry of Resource Maps and the request handler that
//! answers from it.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, RwLock};

use ore_core::discovery::encode_link_header;
use ore_core::model::{ModelError, ValidationReport};
use ore_core::serialization::{serialize_atom, serialize_rdfxml, LossReport};
use ore_core::{Iri, ResourceMap, WireFormat};
use thiserror::Error;

use crate::negotiate::negotiate_with_default;
use crate::uri::to_uri;

/// Fragment used for Aggregation URIs in the hash scenario.
pub const HASH_FRAGMENT: &str = "aggregation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PublishScenario {
    /// The Aggregation URI answers 303 with the Resource Map URI as `Location`.
    SeeOther,
    /// The Aggregation URI is the Resource Map URI plus a fragment.
    HashUri,
}

impl fmt::Display for PublishScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PublishScenario::SeeOther => "303",
            PublishScenario::HashUri => "hash",
        })
    }
}

impl FromStr for PublishScenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "303" | "see-other" | "seeother" => Ok(PublishScenario::SeeOther),
            "hash" | "hash-uri" | "hashuri" => Ok(PublishScenario::HashUri),
            other => Err(format!("unknown scenario {other:?} (expected 303 or hash)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum PublishError {
    #[error("resource map {rem} does not validate:\n{report}")]
    Invalid { rem: Iri, report: ValidationReport },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0} is outside the served authority {1}")]
    OutsideAuthority(Iri, String),
    #[error("aggregation {aggregation} does not fit the {scenario} scenario for {rem}: {reason}")]
    Scenario {
        rem: Iri,
        aggregation: Iri,
        scenario: PublishScenario,
        reason: &'static str,
    },
    #[error("{0} is already published")]
    Conflict(Iri),
    #[error("resource map {rem} cannot be serialized: {message}")]
    Serialize { rem: Iri, message: String },
}

#[derive(Debug, Clone)]
pub struct StoreConfig {
    /// Every published URI must start with this prefix, e.g. `http://127.0.0.1:8080/`.
    pub authority: String,
    /// Format for requests without a usable preference.
    pub default_format: WireFormat,
    /// Serve Atom even when it would drop statements.
    pub allow_lossy_atom: bool,
}

impl StoreConfig {
    pub fn new(authority: impl Into<String>) -> Self {
        StoreConfig {
            authority: authority.into(),
            default_format: crate::DEFAULT_FORMAT,
            allow_lossy_atom: false,
        }
    }
}

/// A Resource Map as registered with the store, with its bodies rendered.
#[derive(Debug, Clone)]
pub struct PublishedEntry {
    pub rem: ResourceMap,
    pub scenario: PublishScenario,
    pub aggregation_uri: Iri,
    pub rem_uri: Iri,
    pub available_formats: Vec<WireFormat>,
    /// What the Atom rendering leaves out; empty when Atom is lossless.
    pub atom_loss: LossReport,
    bodies: Vec<(WireFormat, Arc<Vec<u8>>)>,
}

impl PublishedEntry {
    pub fn body(&self, format: WireFormat) -> Option<&[u8]> {
        self.bodies
            .iter()
            .find(|(f, _)| *f == format)
            .map(|(_, b)| b.as_slice())
    }

    fn preferred_format(&self, default: WireFormat) -> WireFormat {
        if self.available_formats.contains(&default) {
            default
        } else {
            self.available_formats[0]
        }
    }
}

#[derive(Debug, Clone)]
struct StaticResource {
    media_type: String,
    body: Arc<Vec<u8>>,
}

/// An immutable view of the store. Requests are answered from one snapshot.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    default_format: Option<WireFormat>,
    maps: HashMap<String, Arc<PublishedEntry>>,
    redirects: HashMap<String, Iri>,
    resources: HashMap<String, StaticResource>,
    /// constituent URI -> ReM URIs whose boundary lists it, in publish order
    containing: HashMap<String, Vec<Iri>>,
}

impl Snapshot {
    pub fn entry(&self, rem_uri: &str) -> Option<&PublishedEntry> {
        self.maps.get(&to_uri(rem_uri)).map(Arc::as_ref)
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    fn is_taken(&self, uri: &str) -> bool {
        self.maps.contains_key(uri) || self.redirects.contains_key(uri) || self.resources.contains_key(uri)
    }
}

/// Registry with single-writer, many-reader snapshot semantics: a reader
/// sees the state before or after a publish, never a partial entry.
#[derive(Debug)]
pub struct Store {
    config: StoreConfig,
    current: RwLock<Arc<Snapshot>>,
    writer: Mutex<()>,
}

impl Store {
    pub fn new(config: StoreConfig) -> Self {
        let snapshot = Snapshot {
            default_format: Some(config.default_format),
            ..Snapshot::default()
        };
        Store {
            config,
            current: RwLock::new(Arc::new(snapshot)),
            writer: Mutex::new(()),
        }
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    /// Scheme and authority of the served prefix, without a trailing slash.
    pub fn origin(&self) -> &str {
        origin_of(&self.config.authority)
    }

    pub fn snapshot(&self) -> Arc<Snapshot> {
        Arc::clone(&self.current.read().unwrap_or_else(|e| e.into_inner()))
    }

    fn update<T>(&self, change: impl FnOnce(&mut Snapshot) -> Result<T, PublishError>) -> Result<T, PublishError> {
        let _writer = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = (*self.snapshot()).clone();
        let out = change(&mut next)?;
        *self.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(next);
        Ok(out)
    }

    fn check_authority(&self, uri: &Iri) -> Result<(), PublishError> {
        if uri.as_str().starts_with(&self.config.authority) {
            Ok(())
        } else {
            Err(PublishError::OutsideAuthority(
                uri.clone(),
                self.config.authority.clone(),
            ))
        }
    }

    pub fn publish(&self, rem: ResourceMap, scenario: PublishScenario) -> Result<Arc<PublishedEntry>, PublishError> {
        let report = rem.validate();
        if !report.is_valid() {
            return Err(PublishError::Invalid {
                rem: rem.uri().clone(),
                report,
            });
        }
        let rem_uri = rem.uri().clone();
        let aggregation_uri = rem.aggregation_uri()?.clone();
        self.check_authority(&rem_uri)?;
        self.check_authority(&aggregation_uri)?;
        let scenario_error = |reason| PublishError::Scenario {
            rem: rem_uri.clone(),
            aggregation: aggregation_uri.clone(),
            scenario,
            reason,
        };
        if rem_uri.fragment().is_some() {
            return Err(scenario_error("a resource map URI cannot carry a fragment"));
        }
        match scenario {
            PublishScenario::SeeOther => {
                if aggregation_uri.fragment().is_some() {
                    return Err(scenario_error("a redirecting aggregation URI cannot carry a fragment"));
                }
            }
            PublishScenario::HashUri => {
                if aggregation_uri.fragment().is_none_or(str::is_empty) || aggregation_uri.without_fragment() != rem_uri
                {
                    return Err(scenario_error(
                        "the aggregation URI must be the resource map URI plus a fragment",
                    ));
                }
            }
        }

        let serialize_err = |message: String| PublishError::Serialize {
            rem: rem_uri.clone(),
            message,
        };
        let rdf = serialize_rdfxml(rem.graph()).map_err(|e| serialize_err(e.to_string()))?;
        let atom = serialize_atom(&rem).map_err(|e| serialize_err(e.to_string()))?;
        let mut bodies = vec![(WireFormat::RdfXml, Arc::new(rdf))];
        if atom.loss.is_lossless() || self.config.allow_lossy_atom {
            bodies.push((WireFormat::Atom, Arc::new(atom.document)));
        }
        let boundary = rem.boundary()?.resources;
        let entry = Arc::new(PublishedEntry {
            available_formats: bodies.iter().map(|(f, _)| *f).collect(),
            bodies,
            atom_loss: atom.loss,
            rem,
            scenario,
            aggregation_uri: aggregation_uri.clone(),
            rem_uri: rem_uri.clone(),
        });

        self.update(|snap| {
            let rem_key = to_uri(rem_uri.as_str());
            if snap.is_taken(&rem_key) {
                return Err(PublishError::Conflict(rem_uri.clone()));
            }
            if scenario == PublishScenario::SeeOther {
                let agg_key = to_uri(aggregation_uri.as_str());
                if snap.is_taken(&agg_key) || agg_key == rem_key {
                    return Err(PublishError::Conflict(aggregation_uri.clone()));
                }
                snap.redirects.insert(agg_key, rem_uri.clone());
            }
            for r in boundary {
                snap.containing
                    .entry(to_uri(r.as_str()))
                    .or_default()
                    .push(rem_uri.clone());
            }
            snap.maps.insert(rem_key, Arc::clone(&entry));
            Ok(Arc::clone(&entry))
        })
    }

    /// Registers a plain resource served verbatim. Resources aggregated by a
    /// published map answer with a `resourcemap` `Link` header.
    pub fn put_resource(&self, uri: &Iri, media_type: &str, body: Vec<u8>) -> Result<(), PublishError> {
        self.check_authority(uri)?;
        self.update(|snap| {
            let key = to_uri(uri.as_str());
            if snap.maps.contains_key(&key) || snap.redirects.contains_key(&key) {
                return Err(PublishError::Conflict(uri.clone()));
            }
            snap.resources.insert(
                key,
                StaticResource {
                    media_type: media_type.to_owned(),
                    body: Arc::new(body),
                },
            );
            Ok(())
        })
    }
}

fn origin_of(authority: &str) -> &str {
    let after_scheme = authority.find("://").map_or(0, |i| i + 3);
    match authority[after_scheme..].find('/') {
        Some(i) => &authority[..after_scheme + i],
        None => authority.trim_end_matches('/'),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl Response {
    fn new(status: u16) -> Self {
        Response {
            status,
            headers: Vec::new(),
            body: Vec::new(),
        }
    }

    fn header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.push((name.to_owned(), value.into()));
        self
    }

    fn text(self, body: String) -> Self {
        let mut out = self.header("Content-Type", "text/plain; charset=utf-8");
        out.body = body.into_bytes();
        out
    }

    pub fn header_value(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

/// Answers a GET (or HEAD) for the absolute `target` URI.
pub fn handle_get(snapshot: &Snapshot, target: &str, accept: Option<&str>) -> Response {
    let target = to_uri(target);
    let target = target.as_str();
    let default = snapshot.default_format.unwrap_or(crate::DEFAULT_FORMAT);
    if let Some(rem_uri) = snapshot.redirects.get(target) {
        return Response::new(303).header("Location", to_uri(rem_uri.as_str()));
    }
    if let Some(entry) = snapshot.maps.get(target) {
        let Some(format) = negotiate_with_default(accept.unwrap_or(""), &entry.available_formats, default) else {
            let types: Vec<&str> = entry.available_formats.iter().map(|f| f.media_type()).collect();
            return Response::new(406)
                .header("Vary", "Accept")
                .text(format!("Not Acceptable. Available types:\n{}\n", types.join("\n")));
        };
        let mut out = Response::new(200)
            .header("Content-Type", format.media_type())
            .header(
                "Link",
                format!("<{}>; rel=\"describes\"", to_uri(entry.aggregation_uri.as_str())),
            )
            .header("Vary", "Accept");
        out.body = entry.body(format).expect("available formats have bodies").to_vec();
        return out;
    }
    if let Some(resource) = snapshot.resources.get(target) {
        let mut out = Response::new(200).header("Content-Type", resource.media_type.as_str());
        if let Some(rems) = snapshot.containing.get(target) {
            let links: Vec<(Iri, String)> = rems
                .iter()
                .filter_map(|r| snapshot.maps.get(&to_uri(r.as_str())))
                .map(|e| {
                    let uri = Iri::new(to_uri(e.rem_uri.as_str())).expect("ASCII form of a valid IRI");
                    (uri, e.preferred_format(default).media_type().to_owned())
                })
                .collect();
            out = out.header("Link", encode_link_header(&links));
        }
        out.body = resource.body.to_vec();
        return out;
    }
    Response::new(404).text(format!("Not Found: {target}\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ore_core::model::ResourceMapBuilder;
    use ore_core::serialization::parse_rdfxml;
    use ore_core::{graph_isomorphic, Term};

    const AUTH: &str = "http://127.0.0.1:8080/";

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    fn map(rem: &str, agg: &str) -> ResourceMap {
        ResourceMapBuilder::new(iri(rem), iri(agg), "2008-09-01T00:00:00Z".parse().unwrap())
            .aggregate(iri("http://127.0.0.1:8080/res/1"))
            .creator(Term::string("x"))
            .build()
            .unwrap()
    }

    fn store() -> Store {
        Store::new(StoreConfig::new(AUTH))
    }

    #[test]
    fn see_other_redirects_and_serves() {
        let s = store();
        s.publish(
            map("http://127.0.0.1:8080/rem/1", "http://127.0.0.1:8080/agg/1"),
            PublishScenario::SeeOther,
        )
        .unwrap();
        let snap = s.snapshot();
        for accept in [None, Some("text/html"), Some("application/rdf+xml")] {
            let r = handle_get(&snap, "http://127.0.0.1:8080/agg/1", accept);
            assert_eq!(r.status, 303);
            assert_eq!(r.header_value("Location"), Some("http://127.0.0.1:8080/rem/1"));
        }
        let r = handle_get(&snap, "http://127.0.0.1:8080/rem/1", Some("application/rdf+xml"));
        assert_eq!(r.status, 200);
        assert_eq!(r.header_value("content-type"), Some("application/rdf+xml"));
        assert_eq!(
            r.header_value("Link"),
            Some("<http://127.0.0.1:8080/agg/1>; rel=\"describes\"")
        );
        let g = parse_rdfxml(&r.body, &iri("http://127.0.0.1:8080/rem/1")).unwrap();
        assert!(graph_isomorphic(&g, snap.entry("http://127.0.0.1:8080/rem/1").unwrap().rem.graph()).unwrap());

        let r = handle_get(&snap, "http://127.0.0.1:8080/rem/1", None);
        assert_eq!(r.header_value("Content-Type"), Some("application/atom+xml"));
        let r = handle_get(&snap, "http://127.0.0.1:8080/rem/1", Some("text/html"));
        assert_eq!(r.status, 406);
        assert!(String::from_utf8(r.body).unwrap().contains("application/rdf+xml"));
        assert_eq!(handle_get(&snap, "http://127.0.0.1:8080/nothing", None).status, 404);
    }

    #[test]
    fn hash_scenario_serves_the_stem() {
        let s = store();
        s.publish(
            map("http://127.0.0.1:8080/rem/2", "http://127.0.0.1:8080/rem/2#aggregation"),
            PublishScenario::HashUri,
        )
        .unwrap();
        let r = handle_get(
            &s.snapshot(),
            "http://127.0.0.1:8080/rem/2",
            Some("application/rdf+xml"),
        );
        assert_eq!(r.status, 200);
        assert_eq!(r.header_value("Content-Type"), Some("application/rdf+xml"));
    }

    #[test]
    fn refusals() {
        let s = store();
        assert!(matches!(
            s.publish(
                map("http://elsewhere.org/rem", "http://127.0.0.1:8080/agg"),
                PublishScenario::SeeOther
            ),
            Err(PublishError::OutsideAuthority(..))
        ));
        assert!(matches!(
            s.publish(
                map("http://127.0.0.1:8080/rem/3", "http://127.0.0.1:8080/other#aggregation"),
                PublishScenario::HashUri
            ),
            Err(PublishError::Scenario { .. })
        ));
        assert!(matches!(
            s.publish(
                map("http://127.0.0.1:8080/rem/3", "http://127.0.0.1:8080/rem/3#aggregation"),
                PublishScenario::SeeOther
            ),
            Err(PublishError::Scenario { .. })
        ));
        s.publish(
            map("http://127.0.0.1:8080/rem/3", "http://127.0.0.1:8080/agg/3"),
            PublishScenario::SeeOther,
        )
        .unwrap();
        assert!(matches!(
            s.publish(
                map("http://127.0.0.1:8080/rem/3", "http://127.0.0.1:8080/agg/4"),
                PublishScenario::SeeOther
            ),
            Err(PublishError::Conflict(_))
        ));
        assert_eq!(s.snapshot().len(), 1);
    }

    #[test]
    fn lossy_maps_are_rdfxml_only_unless_allowed() {
        let mut m = map("http://127.0.0.1:8080/rem/4", "http://127.0.0.1:8080/agg/4");
        let (uri, mut g) = m.clone().into_parts();
        g.insert(
            ore_core::Triple::new(
                iri("http://127.0.0.1:8080/res/1"),
                iri("http://purl.org/dc/elements/1.1/title"),
                Term::string("t"),
            )
            .unwrap(),
        );
        m = ResourceMap::new(uri, g);
        let s = store();
        let e = s.publish(m.clone(), PublishScenario::SeeOther).unwrap();
        assert_eq!(e.available_formats, vec![WireFormat::RdfXml]);
        assert_eq!(e.atom_loss.dropped.len(), 1);
        let r = handle_get(&s.snapshot(), "http://127.0.0.1:8080/rem/4", None);
        assert_eq!(r.header_value("Content-Type"), Some("application/rdf+xml"));

        let lenient = Store::new(StoreConfig {
            allow_lossy_atom: true,
            ..StoreConfig::new(AUTH)
        });
        let e = lenient.publish(m, PublishScenario::SeeOther).unwrap();
        assert_eq!(e.available_formats, vec![WireFormat::RdfXml, WireFormat::Atom]);
    }

    #[test]
    fn aggregated_resources_link_to_their_maps() {
        let s = store();
        s.publish(
            map("http://127.0.0.1:8080/rem/5", "http://127.0.0.1:8080/agg/5"),
            PublishScenario::SeeOther,
        )
        .unwrap();
        s.put_resource(&iri("http://127.0.0.1:8080/res/1"), "text/plain", b"one".to_vec())
            .unwrap();
        s.put_resource(&iri("http://127.0.0.1:8080/res/2"), "text/plain", b"two".to_vec())
            .unwrap();
        let snap = s.snapshot();
        let r = handle_get(&snap, "http://127.0.0.1:8080/res/1", None);
        assert_eq!(r.body, b"one");
        assert_eq!(
            r.header_value("Link"),
            Some("<http://127.0.0.1:8080/rem/5>; rel=\"resourcemap\"; type=\"application/atom+xml\"")
        );
        assert_eq!(
            handle_get(&snap, "http://127.0.0.1:8080/res/2", None).header_value("Link"),
            None
        );
    }

    #[test]
    fn snapshots_are_isolated_from_later_publishes() {
        let s = store();
        let before = s.snapshot();
        s.publish(
            map("http://127.0.0.1:8080/rem/6", "http://127.0.0.1:8080/agg/6"),
            PublishScenario::SeeOther,
        )
        .unwrap();
        assert_eq!(handle_get(&before, "http://127.0.0.1:8080/agg/6", None).status, 404);
        assert_eq!(
            handle_get(&s.snapshot(), "http://127.0.0.1:8080/agg/6", None).status,
            303
        );
    }

    #[test]
    fn origin_extraction() {
        assert_eq!(origin_of("http://127.0.0.1:8080/"), "http://127.0.0.1:8080");
        assert_eq!(origin_of("http://example.org/base/"), "http://example.org");
        assert_eq!(origin_of("http://example.org"), "http://example.org");
    }
}
