//! RDF/XML codec for a fixed profile.
//!
//! Supported: an `rdf:RDF` root (optionally carrying `xml:base`) containing
//! `rdf:Description` node elements identified by `rdf:about`, `rdf:nodeID`
//! or nothing (fresh blank node). Each property element carries exactly one
//! of `rdf:resource`, `rdf:nodeID`, or literal text with optional
//! `rdf:datatype` or `xml:lang`.
//!
//! Everything else (typed node elements, `rdf:parseType`, containers,
//! collections, `rdf:ID` reification, nested node elements, property
//! attributes, `xml:base` below the root) is rejected with
//! [`RdfXmlError::Unsupported`]. The serializer only ever writes this
//! profile, so parsing its output yields an isomorphic graph.

use std::collections::HashMap;

use quick_xml::events::{BytesStart, Event};
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;
use thiserror::Error;

use super::xml::{escape_attr, escape_text, is_name_char, is_name_start_char, is_xml_char, Position};
use crate::rdf::{BlankNode, Graph, Iri, Literal, Term, TermError, Triple};
use crate::vocab::{dcterms, ore, rdf, xsd, XML_NS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdfXmlError {
    #[error("document is not UTF-8 ({position})")]
    Encoding { position: Position },
    #[error("XML syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },
    #[error("unsupported RDF/XML construct at {position}: {construct}")]
    Unsupported { position: Position, construct: String },
    #[error("invalid term at {position}: {source}")]
    Term { position: Position, source: TermError },
}

impl RdfXmlError {
    pub fn position(&self) -> Position {
        match self {
            RdfXmlError::Encoding { position }
            | RdfXmlError::Syntax { position, .. }
            | RdfXmlError::Unsupported { position, .. }
            | RdfXmlError::Term { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("predicate {0} has no XML-name suffix and cannot be an RDF/XML property element")]
    UnsplittablePredicate(Iri),
    #[error("predicate {0} is reserved RDF/XML syntax")]
    ReservedPredicate(Iri),
    #[error("literal contains U+{0:04X}, which XML 1.0 cannot represent")]
    UnrepresentableChar(u32),
}

// ---------------------------------------------------------------------------
// parsing

enum State {
    Prolog,
    InRdf,
    InNode(Term),
    InProperty(PendingProperty),
    Done,
}

struct PendingProperty {
    subject: Term,
    predicate: Iri,
    object: Option<Term>,
    datatype: Option<Iri>,
    language: Option<String>,
    text: String,
}

/// Parses an RDF/XML document. Relative references resolve against `base`
/// (or the root's `xml:base`); blank nodes are minted per document.
pub fn parse_rdfxml(document: &[u8], base: &Iri) -> Result<Graph, RdfXmlError> {
    let text = std::str::from_utf8(document).map_err(|e| RdfXmlError::Encoding {
        position: Position::of_utf8_error(document, &e),
    })?;
    let mut reader = NsReader::from_str(text);
    reader.config_mut().trim_text(false);
    let mut parser = Parser {
        text,
        base: base.clone(),
        node_ids: HashMap::new(),
        next_blank: 0,
        graph: Graph::new(),
        offset: 0,
    };
    let mut state = State::Prolog;
    loop {
        parser.offset = reader.buffer_position() as usize;
        let (ns, event) = match reader.read_resolved_event() {
            Ok((ns, event)) => (owned_ns(ns), event),
            Err(e) => {
                return Err(RdfXmlError::Syntax {
                    position: Position::at(text, reader.error_position() as usize),
                    message: e.to_string(),
                })
            }
        };
        state = match (state, event) {
            (_, Event::DocType(_)) => return Err(parser.unsupported("DOCTYPE declaration")),
            (state, Event::Decl(_) | Event::Comment(_) | Event::PI(_)) => state,
            (State::Prolog, Event::Start(e)) => {
                parser.root(&reader, ns, &e)?;
                State::InRdf
            }
            (State::Prolog, Event::Empty(e)) => {
                parser.root(&reader, ns, &e)?;
                State::Done
            }
            (State::InRdf, Event::Start(e)) => State::InNode(parser.node(&reader, ns, &e)?),
            (State::InRdf, Event::Empty(e)) => {
                parser.node(&reader, ns, &e)?;
                State::InRdf
            }
            (State::InNode(subject), Event::Start(e)) => {
                let pending = parser.property(&reader, ns, &e, subject)?;
                State::InProperty(pending)
            }
            (State::InNode(subject), Event::Empty(e)) => {
                let pending = parser.property(&reader, ns, &e, subject.clone())?;
                parser.finish_property(pending)?;
                State::InNode(subject)
            }
            (State::InProperty(_), Event::Start(_) | Event::Empty(_)) => {
                return Err(parser.unsupported("nested node element inside a property element"))
            }
            (State::Done, Event::Start(_) | Event::Empty(_)) => {
                return Err(parser.syntax("content after the rdf:RDF element"))
            }
            (State::InProperty(mut pending), Event::Text(t)) => {
                let s = t.unescape().map_err(|e| parser.syntax(e.to_string()))?;
                pending.text.push_str(&s);
                State::InProperty(pending)
            }
            (State::InProperty(mut pending), Event::CData(t)) => {
                let s = std::str::from_utf8(&t).map_err(|e| parser.syntax(e.to_string()))?;
                pending.text.push_str(s);
                State::InProperty(pending)
            }
            (state, Event::Text(t)) => {
                let s = t.unescape().map_err(|e| parser.syntax(e.to_string()))?;
                if !s.chars().all(char::is_whitespace) {
                    return Err(parser.syntax("unexpected character data"));
                }
                state
            }
            (state, Event::CData(t)) => {
                if !t.iter().all(u8::is_ascii_whitespace) {
                    return Err(parser.syntax("unexpected CDATA section"));
                }
                state
            }
            (State::InProperty(pending), Event::End(_)) => {
                let subject = pending.subject.clone();
                parser.finish_property(pending)?;
                State::InNode(subject)
            }
            (State::InNode(_), Event::End(_)) => State::InRdf,
            (State::InRdf, Event::End(_)) => State::Done,
            (State::Done, Event::Eof) => return Ok(parser.graph),
            (State::Prolog, Event::Eof) => return Err(parser.syntax("no rdf:RDF root element")),
            (_, Event::Eof) => return Err(parser.syntax("unexpected end of document")),
            (_, Event::End(_)) => return Err(parser.syntax("unbalanced end tag")),
        };
    }
}

fn owned_ns(ns: ResolveResult<'_>) -> Result<Option<String>, String> {
    match ns {
        ResolveResult::Bound(ns) => Ok(Some(String::from_utf8_lossy(ns.as_ref()).into_owned())),
        ResolveResult::Unbound => Ok(None),
        ResolveResult::Unknown(prefix) => Err(String::from_utf8_lossy(&prefix).into_owned()),
    }
}

/// An attribute with its namespace resolved.
struct Attr {
    ns: Option<String>,
    local: String,
    value: String,
}

impl Attr {
    fn is(&self, ns: &str, local: &str) -> bool {
        self.ns.as_deref() == Some(ns) && self.local == local
    }

    fn qualified(&self) -> String {
        match &self.ns {
            Some(ns) if ns == rdf::NS => format!("rdf:{}", self.local),
            Some(ns) if ns == XML_NS => format!("xml:{}", self.local),
            Some(ns) => format!("{ns}{}", self.local),
            None => self.local.clone(),
        }
    }
}

struct Parser<'t> {
    text: &'t str,
    base: Iri,
    node_ids: HashMap<String, BlankNode>,
    next_blank: usize,
    graph: Graph,
    offset: usize,
}

impl Parser<'_> {
    fn position(&self) -> Position {
        Position::at(self.text, self.offset)
    }

    fn syntax(&self, message: impl Into<String>) -> RdfXmlError {
        RdfXmlError::Syntax {
            position: self.position(),
            message: message.into(),
        }
    }

    fn unsupported(&self, construct: impl Into<String>) -> RdfXmlError {
        RdfXmlError::Unsupported {
            position: self.position(),
            construct: construct.into(),
        }
    }

    fn term_error(&self, source: TermError) -> RdfXmlError {
        RdfXmlError::Term {
            position: self.position(),
            source,
        }
    }

    fn element_ns(&self, ns: Result<Option<String>, String>) -> Result<Option<String>, RdfXmlError> {
        ns.map_err(|prefix| self.syntax(format!("unknown namespace prefix {prefix:?}")))
    }

    fn attributes(&self, reader: &NsReader<&[u8]>, e: &BytesStart<'_>) -> Result<Vec<Attr>, RdfXmlError> {
        let mut out = Vec::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| self.syntax(err.to_string()))?;
            if attr.key.as_namespace_binding().is_some() {
                continue;
            }
            let (ns, local) = reader.resolve_attribute(attr.key);
            let ns = self.element_ns(owned_ns(ns))?;
            let local = String::from_utf8_lossy(local.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|err| self.syntax(err.to_string()))?
                .into_owned();
            out.push(Attr { ns, local, value });
        }
        Ok(out)
    }

    fn resolve(&self, reference: &str) -> Result<Iri, RdfXmlError> {
        self.base.resolve(reference).map_err(|e| self.term_error(e))
    }

    fn blank_for(&mut self, node_id: &str) -> Result<BlankNode, RdfXmlError> {
        if node_id.is_empty() || !node_id.starts_with(is_name_start_char) || !node_id.chars().all(is_name_char) {
            return Err(self.syntax(format!("rdf:nodeID {node_id:?} is not an XML name")));
        }
        if let Some(b) = self.node_ids.get(node_id) {
            return Ok(b.clone());
        }
        let fresh = self.fresh_blank();
        self.node_ids.insert(node_id.to_owned(), fresh.clone());
        Ok(fresh)
    }

    fn fresh_blank(&mut self) -> BlankNode {
        let b = BlankNode::new(format!("b{}", self.next_blank)).expect("generated label is valid");
        self.next_blank += 1;
        b
    }

    fn root(
        &mut self,
        reader: &NsReader<&[u8]>,
        ns: Result<Option<String>, String>,
        e: &BytesStart<'_>,
    ) -> Result<(), RdfXmlError> {
        let ns = self.element_ns(ns)?;
        if ns.as_deref() != Some(rdf::NS) || e.local_name().as_ref() != b"RDF" {
            return Err(self.unsupported(format!(
                "root element <{}> (expected rdf:RDF)",
                String::from_utf8_lossy(e.name().as_ref())
            )));
        }
        for attr in self.attributes(reader, e)? {
            if attr.is(XML_NS, "base") {
                self.base = self.resolve(&attr.value)?;
            } else {
                return Err(self.unsupported(format!("attribute {} on rdf:RDF", attr.qualified())));
            }
        }
        Ok(())
    }

    fn node(
        &mut self,
        reader: &NsReader<&[u8]>,
        ns: Result<Option<String>, String>,
        e: &BytesStart<'_>,
    ) -> Result<Term, RdfXmlError> {
        let ns = self.element_ns(ns)?;
        let local = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
        if ns.as_deref() != Some(rdf::NS) || local != "Description" {
            return Err(self.unsupported(format!(
                "typed node element <{}>",
                String::from_utf8_lossy(e.name().as_ref())
            )));
        }
        let mut subject = None;
        for attr in self.attributes(reader, e)? {
            let term = if attr.is(rdf::NS, "about") {
                Term::Iri(self.resolve(&attr.value)?)
            } else if attr.is(rdf::NS, "nodeID") {
                Term::BlankNode(self.blank_for(&attr.value)?)
            } else if attr.is(rdf::NS, "ID") {
                return Err(self.unsupported("rdf:ID"));
            } else if attr.is(XML_NS, "base") {
                return Err(self.unsupported("xml:base below the root element"));
            } else if attr.is(XML_NS, "lang") {
                return Err(self.unsupported("xml:lang on a node element"));
            } else {
                return Err(self.unsupported(format!("property attribute {}", attr.qualified())));
            };
            if subject.replace(term).is_some() {
                return Err(self.syntax("rdf:Description has both rdf:about and rdf:nodeID"));
            }
        }
        Ok(subject.unwrap_or_else(|| Term::BlankNode(self.fresh_blank())))
    }

    fn property(
        &mut self,
        reader: &NsReader<&[u8]>,
        ns: Result<Option<String>, String>,
        e: &BytesStart<'_>,
        subject: Term,
    ) -> Result<PendingProperty, RdfXmlError> {
        let ns = self
            .element_ns(ns)?
            .ok_or_else(|| self.syntax("property element without a namespace"))?;
        let local = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
        if ns == rdf::NS {
            if local == "li" || is_membership_local(&local) {
                return Err(self.unsupported(format!("container membership property rdf:{local}")));
            }
            if RDF_SYNTAX_NAMES.contains(&local.as_str()) {
                return Err(self.syntax(format!("rdf:{local} is not allowed as a property element")));
            }
        }
        let predicate = Iri::new(format!("{ns}{local}")).map_err(|e| self.term_error(e))?;
        let mut pending = PendingProperty {
            subject,
            predicate,
            object: None,
            datatype: None,
            language: None,
            text: String::new(),
        };
        for attr in self.attributes(reader, e)? {
            if attr.is(rdf::NS, "resource") || attr.is(rdf::NS, "nodeID") {
                let object = if attr.local == "resource" {
                    Term::Iri(self.resolve(&attr.value)?)
                } else {
                    Term::BlankNode(self.blank_for(&attr.value)?)
                };
                if pending.object.replace(object).is_some() {
                    return Err(self.syntax("property element has both rdf:resource and rdf:nodeID"));
                }
            } else if attr.is(rdf::NS, "datatype") {
                pending.datatype = Some(self.resolve(&attr.value)?);
            } else if attr.is(XML_NS, "lang") {
                pending.language = Some(attr.value);
            } else if attr.is(rdf::NS, "parseType") {
                return Err(self.unsupported(format!("rdf:parseType=\"{}\"", attr.value)));
            } else if attr.is(rdf::NS, "ID") {
                return Err(self.unsupported("rdf:ID (reification)"));
            } else if attr.is(XML_NS, "base") {
                return Err(self.unsupported("xml:base below the root element"));
            } else {
                return Err(self.unsupported(format!("property attribute {}", attr.qualified())));
            }
        }
        if pending.object.is_some() && (pending.datatype.is_some() || pending.language.is_some()) {
            return Err(self.unsupported("rdf:datatype or xml:lang on a resource-valued property"));
        }
        if pending.datatype.is_some() && pending.language.is_some() {
            return Err(self.unsupported("rdf:datatype together with xml:lang"));
        }
        Ok(pending)
    }

    fn finish_property(&mut self, p: PendingProperty) -> Result<(), RdfXmlError> {
        let object = match p.object {
            Some(object) => {
                if !p.text.chars().all(char::is_whitespace) {
                    return Err(self.syntax("resource-valued property element has text content"));
                }
                object
            }
            None => {
                let literal = match (p.datatype, p.language) {
                    (Some(dt), _) => Literal::typed(p.text, dt),
                    (None, Some(lang)) => Literal::lang(p.text, lang),
                    (None, None) => Ok(Literal::string(p.text)),
                };
                Term::Literal(literal.map_err(|e| self.term_error(e))?)
            }
        };
        self.graph.insert(Triple::from_valid(p.subject, p.predicate, object));
        Ok(())
    }
}

/// `rdf:` local names that are RDF/XML syntax rather than properties.
const RDF_SYNTAX_NAMES: &[&str] = &[
    "RDF",
    "Description",
    "ID",
    "about",
    "parseType",
    "resource",
    "nodeID",
    "datatype",
    "aboutEach",
    "aboutEachPrefix",
    "bagID",
];

fn is_membership_local(local: &str) -> bool {
    local
        .strip_prefix('_')
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

// ---------------------------------------------------------------------------
// serializing

const FIXED_PREFIXES: &[(&str, &str)] = &[("rdf", rdf::NS), ("ore", ore::NS), ("dcterms", dcterms::NS)];

const KNOWN_PREFIXES: &[(&str, &str)] = &[
    ("dc", "http://purl.org/dc/elements/1.1/"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("foaf", "http://xmlns.com/foaf/0.1/"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
];

/// Splits a predicate IRI into namespace and an XML NCName local part.
fn split_predicate(iri: &Iri) -> Result<(&str, &str), SerializeError> {
    let s = iri.as_str();
    let tail_start = s
        .char_indices()
        .rev()
        .take_while(|(_, c)| is_name_char(*c))
        .last()
        .map_or(s.len(), |(i, _)| i);
    let local_start = s[tail_start..]
        .char_indices()
        .find(|(_, c)| is_name_start_char(*c))
        .map(|(i, _)| tail_start + i)
        .ok_or_else(|| SerializeError::UnsplittablePredicate(iri.clone()))?;
    let (ns, local) = s.split_at(local_start);
    if ns.is_empty() {
        return Err(SerializeError::UnsplittablePredicate(iri.clone()));
    }
    if ns == rdf::NS && (local == "li" || is_membership_local(local) || RDF_SYNTAX_NAMES.contains(&local)) {
        return Err(SerializeError::ReservedPredicate(iri.clone()));
    }
    Ok((ns, local))
}

fn check_chars(s: &str) -> Result<(), SerializeError> {
    match s.chars().find(|c| !is_xml_char(*c)) {
        Some(c) => Err(SerializeError::UnrepresentableChar(c as u32)),
        None => Ok(()),
    }
}

/// Writes `graph` as RDF/XML. Output is deterministic: one `rdf:Description`
/// per subject in graph order, fixed prefixes first, then generated ones in
/// order of first use.
pub fn serialize_rdfxml(graph: &Graph) -> Result<Vec<u8>, SerializeError> {
    let mut prefixes: Vec<(String, String)> = FIXED_PREFIXES
        .iter()
        .map(|(p, ns)| (p.to_string(), ns.to_string()))
        .collect();
    let mut generated = 0;
    let mut qnames = Vec::with_capacity(graph.len());
    for t in graph {
        let (ns, local) = split_predicate(t.predicate_iri())?;
        let prefix = match prefixes.iter().find(|(_, n)| n == ns) {
            Some((p, _)) => p.clone(),
            None => {
                let p = match KNOWN_PREFIXES.iter().find(|(_, n)| *n == ns) {
                    Some((p, _)) => p.to_string(),
                    None => {
                        generated += 1;
                        format!("ns{}", generated - 1)
                    }
                };
                prefixes.push((p.clone(), ns.to_owned()));
                p
            }
        };
        if let Term::Literal(l) = t.object() {
            check_chars(l.lexical())?;
        }
        qnames.push(format!("{prefix}:{local}"));
    }

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<rdf:RDF");
    for (p, ns) in &prefixes {
        out.push_str(&format!(" xmlns:{p}=\""));
        escape_attr(ns, &mut out);
        out.push('"');
    }
    if graph.is_empty() {
        out.push_str("/>\n");
        return Ok(out.into_bytes());
    }
    out.push_str(">\n");

    let mut current: Option<&Term> = None;
    for (t, qname) in graph.iter().zip(&qnames) {
        if current != Some(t.subject()) {
            if current.is_some() {
                out.push_str("  </rdf:Description>\n");
            }
            out.push_str("  <rdf:Description ");
            node_ref_attr(t.subject(), "about", &mut out);
            out.push_str(">\n");
            current = Some(t.subject());
        }
        out.push_str("    <");
        out.push_str(qname);
        match t.object() {
            Term::Literal(l) => {
                if let Some(lang) = l.language() {
                    out.push_str(" xml:lang=\"");
                    escape_attr(lang, &mut out);
                    out.push('"');
                } else if l.datatype().as_str() != xsd::STRING {
                    out.push_str(" rdf:datatype=\"");
                    escape_attr(l.datatype().as_str(), &mut out);
                    out.push('"');
                }
                out.push('>');
                escape_text(l.lexical(), &mut out);
                out.push_str("</");
                out.push_str(qname);
                out.push_str(">\n");
            }
            object => {
                out.push(' ');
                node_ref_attr(object, "resource", &mut out);
                out.push_str("/>\n");
            }
        }
    }
    out.push_str("  </rdf:Description>\n</rdf:RDF>\n");
    Ok(out.into_bytes())
}

fn node_ref_attr(term: &Term, iri_attr: &str, out: &mut String) {
    match term {
        Term::Iri(iri) => {
            out.push_str(&format!("rdf:{iri_attr}=\""));
            escape_attr(iri.as_str(), out);
        }
        Term::BlankNode(b) => {
            out.push_str("rdf:nodeID=\"");
            out.push_str(b.label());
        }
        Term::Literal(_) => unreachable!("literals are written as element content"),
    }
    out.push('"');
}
