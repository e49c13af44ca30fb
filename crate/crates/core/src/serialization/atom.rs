//! Atom entry codec for Resource Maps.
//!
//! | statement                          | Atom                                      |
//! |------------------------------------|-------------------------------------------|
//! | `(R, ore:describes, A)`            | `atom:id` = A, `atom:link rel="self"` = R |
//! | `(A, ore:aggregates, r)`           | `atom:link rel="…/ore/terms/aggregates"`  |
//! | `(R, dcterms:creator, "name")`     | `atom:author/atom:name`                   |
//! | `(R, dcterms:modified, m)`         | `atom:updated`                            |
//!
//! `atom:title` repeats the Aggregation URI. Anything else in the graph is
//! not representable and is returned in the [`LossReport`].

use quick_xml::events::{BytesStart, Event};
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;
use thiserror::Error;

use super::xml::{escape_attr, escape_text, Position};
use super::{LossReport, WireFormat};
use crate::model::{ModelError, ResourceMap, ValidationReport};
use crate::rdf::{Graph, Iri, Literal, Term, Triple};
use crate::vocab::{atom, dcterms, ore, xsd};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AtomError {
    #[error("document is not UTF-8 ({position})")]
    Encoding { position: Position },
    #[error("XML syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },
    #[error("root element <{0}> is not an Atom entry or feed")]
    NotAtom(String),
    #[error("feed contains {0} entries; a Resource Map feed must hold exactly one")]
    EntryCount(usize),
    #[error("entry has no {0}")]
    MissingElement(&'static str),
    #[error("{element} value {value:?} is not an absolute IRI")]
    InvalidIri { element: &'static str, value: String },
    #[error("reconstructed resource map {rem_uri} does not validate:\n{report}")]
    Invalid { rem_uri: Iri, report: ValidationReport },
    #[error("resource map cannot be written as Atom: {0}")]
    Model(#[from] ModelError),
}

/// Serialized entry plus the statements it could not carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomOutput {
    pub document: Vec<u8>,
    pub loss: LossReport,
}

pub fn serialize_atom(rem: &ResourceMap) -> Result<AtomOutput, AtomError> {
    let graph = rem.graph();
    let rem_term = Term::Iri(rem.uri().clone());
    let agg = rem.aggregation_uri()?.clone();
    let agg_term = Term::Iri(agg.clone());
    let describes = Term::Iri(Iri::from_static(ore::DESCRIBES));
    let aggregates = Term::Iri(Iri::from_static(ore::AGGREGATES));
    let creator = Term::Iri(Iri::from_static(dcterms::CREATOR));
    let modified = Term::Iri(Iri::from_static(dcterms::MODIFIED));

    let mut mapped = Graph::new();
    mapped.insert(Triple::from_valid(
        rem_term.clone(),
        Iri::from_static(ore::DESCRIBES),
        agg_term.clone(),
    ));

    let mut constituents = Vec::new();
    for t in graph.query(Some(&agg_term), Some(&aggregates), None) {
        if let Term::Iri(r) = t.object() {
            constituents.push(r);
            mapped.insert(t.clone());
        }
    }
    let mut authors = Vec::new();
    for t in graph.query(Some(&rem_term), Some(&creator), None) {
        if let Term::Literal(l) = t.object() {
            if l.is_plain() {
                authors.push(l.lexical());
                mapped.insert(t.clone());
            }
        }
    }
    let stamps: Vec<&Triple> = graph.query(Some(&rem_term), Some(&modified), None).collect();
    let updated = match stamps.as_slice() {
        [t] => match t.object() {
            Term::Literal(l) => {
                if l.language().is_none() && l.datatype().as_str() == xsd::DATE_TIME {
                    mapped.insert((*t).clone());
                }
                l.lexical()
            }
            _ => return Err(AtomError::MissingElement("literal dcterms:modified")),
        },
        _ => return Err(AtomError::MissingElement("single dcterms:modified")),
    };
    debug_assert_eq!(graph.query(Some(&rem_term), Some(&describes), None).count(), 1);

    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<entry xmlns=\"");
    out.push_str(atom::NS);
    out.push_str("\">\n");
    text_element("id", agg.as_str(), &mut out);
    text_element("title", agg.as_str(), &mut out);
    text_element("updated", updated, &mut out);
    for name in authors {
        out.push_str("  <author>\n  ");
        text_element("name", name, &mut out);
        out.push_str("  </author>\n");
    }
    link("self", Some(WireFormat::Atom.media_type()), rem.uri(), &mut out);
    for r in constituents {
        link(ore::AGGREGATES, None, r, &mut out);
    }
    out.push_str("</entry>\n");

    Ok(AtomOutput {
        document: out.into_bytes(),
        loss: LossReport {
            dropped: graph.difference(&mapped).into_iter().collect(),
        },
    })
}

fn text_element(name: &str, value: &str, out: &mut String) {
    out.push_str("  <");
    out.push_str(name);
    out.push('>');
    escape_text(value, out);
    out.push_str("</");
    out.push_str(name);
    out.push_str(">\n");
}

fn link(rel: &str, media_type: Option<&str>, href: &Iri, out: &mut String) {
    out.push_str("  <link rel=\"");
    escape_attr(rel, out);
    out.push('"');
    if let Some(mt) = media_type {
        out.push_str(" type=\"");
        escape_attr(mt, out);
        out.push('"');
    }
    out.push_str(" href=\"");
    escape_attr(href.as_str(), out);
    out.push_str("\"/>\n");
}

/// The pieces of one Atom entry that matter to the mapping.
#[derive(Debug, Default)]
struct EntryFields {
    id: Option<String>,
    updated: Option<String>,
    authors: Vec<String>,
    /// `(rel, href)`; rel defaults to `alternate`.
    links: Vec<(String, String)>,
}

pub fn parse_atom(document: &[u8]) -> Result<ResourceMap, AtomError> {
    let entries = read_entries(document, false)?;
    let fields = match entries.len() {
        1 => entries.into_iter().next().expect("one entry"),
        n => return Err(AtomError::EntryCount(n)),
    };
    map_entry(fields)
}

fn map_entry(fields: EntryFields) -> Result<ResourceMap, AtomError> {
    let iri = |element: &'static str, value: &str| {
        Iri::new(value.trim()).map_err(|_| AtomError::InvalidIri {
            element,
            value: value.to_owned(),
        })
    };
    let self_href = fields
        .links
        .iter()
        .find(|(rel, _)| rel == "self")
        .map(|(_, href)| href)
        .ok_or(AtomError::MissingElement("link rel=\"self\""))?;
    let rem_uri = iri("self link", self_href)?;
    let agg = iri("id", fields.id.as_deref().ok_or(AtomError::MissingElement("id"))?)?;
    let updated = fields.updated.ok_or(AtomError::MissingElement("updated"))?;
    let constituents: Vec<&String> = fields
        .links
        .iter()
        .filter(|(rel, _)| rel == ore::AGGREGATES)
        .map(|(_, href)| href)
        .collect();
    if constituents.is_empty() {
        return Err(AtomError::MissingElement("aggregates link"));
    }
    if fields.authors.is_empty() {
        return Err(AtomError::MissingElement("author"));
    }

    let rem = Term::Iri(rem_uri.clone());
    let agg_term = Term::Iri(agg);
    let mut graph = Graph::new();
    graph.insert(Triple::from_valid(
        rem.clone(),
        Iri::from_static(ore::DESCRIBES),
        agg_term.clone(),
    ));
    for href in constituents {
        let r = iri("aggregates link", href)?;
        graph.insert(Triple::from_valid(
            agg_term.clone(),
            Iri::from_static(ore::AGGREGATES),
            Term::Iri(r),
        ));
    }
    for name in fields.authors {
        graph.insert(Triple::from_valid(
            rem.clone(),
            Iri::from_static(dcterms::CREATOR),
            Term::string(name),
        ));
    }
    let stamp = Literal::typed(updated.trim(), Iri::from_static(xsd::DATE_TIME)).expect("not rdf:langString");
    graph.insert(Triple::from_valid(
        rem,
        Iri::from_static(dcterms::MODIFIED),
        Term::Literal(stamp),
    ));

    let map = ResourceMap::new(rem_uri, graph);
    let report = map.validate();
    if !report.is_valid() {
        return Err(AtomError::Invalid {
            rem_uri: map.uri().clone(),
            report,
        });
    }
    Ok(map)
}

/// Self-link hrefs of every entry in an Atom feed (or lone entry), in
/// document order. Entries without a self link contribute nothing.
pub(crate) fn entry_self_links(document: &[u8]) -> Result<Vec<String>, AtomError> {
    Ok(read_entries(document, true)?
        .into_iter()
        .filter_map(|e| e.links.into_iter().find(|(rel, _)| rel == "self").map(|(_, href)| href))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Id,
    Updated,
    AuthorName,
}

/// Streams the document and collects mapped fields per entry.
fn read_entries(document: &[u8], allow_many: bool) -> Result<Vec<EntryFields>, AtomError> {
    let text = std::str::from_utf8(document).map_err(|e| AtomError::Encoding {
        position: Position::of_utf8_error(document, &e),
    })?;
    let mut reader = NsReader::from_str(text);
    reader.config_mut().trim_text(false);

    let mut entries = Vec::new();
    // atom local names of open elements; non-Atom elements are recorded as ""
    let mut stack: Vec<String> = Vec::new();
    let mut current: Option<EntryFields> = None;
    let mut capture: Option<(Field, String)> = None;
    let mut saw_root = false;

    loop {
        let (ns, event) = match reader.read_resolved_event() {
            Ok(pair) => pair,
            Err(e) => {
                return Err(AtomError::Syntax {
                    position: Position::at(text, reader.error_position() as usize),
                    message: e.to_string(),
                })
            }
        };
        let in_atom = matches!(ns, ResolveResult::Bound(n) if n.as_ref() == atom::NS.as_bytes());
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                let local = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
                let name = if in_atom { local.clone() } else { String::new() };
                if !saw_root {
                    saw_root = true;
                    if name != "entry" && name != "feed" {
                        return Err(AtomError::NotAtom(
                            String::from_utf8_lossy(e.name().as_ref()).into_owned(),
                        ));
                    }
                }
                let parent = stack.last().map(String::as_str);
                let in_entry_directly = current.is_some() && parent == Some("entry");
                match name.as_str() {
                    "entry" if current.is_none() && matches!(parent, None | Some("feed")) => {
                        if !allow_many && !entries.is_empty() {
                            return Err(AtomError::EntryCount(entries.len() + 1));
                        }
                        current = Some(EntryFields::default());
                        if empty {
                            entries.push(current.take().expect("just set"));
                        }
                    }
                    "id" if in_entry_directly => capture = Some((Field::Id, String::new())),
                    "updated" if in_entry_directly => capture = Some((Field::Updated, String::new())),
                    "name" if current.is_some() && parent == Some("author") => {
                        capture = Some((Field::AuthorName, String::new()))
                    }
                    "link" if in_entry_directly => {
                        let (rel, href) = link_attrs(e, text, &reader)?;
                        if let (Some(entry), Some(href)) = (current.as_mut(), href) {
                            entry.links.push((rel.unwrap_or_else(|| "alternate".into()), href));
                        }
                    }
                    _ => {}
                }
                if empty {
                    if capture.is_some() {
                        finish_capture(current.as_mut(), capture.take());
                    }
                } else {
                    stack.push(name);
                }
            }
            Event::Text(t) => {
                if let Some((_, buf)) = capture.as_mut() {
                    let s = t.unescape().map_err(|e| AtomError::Syntax {
                        position: Position::at(text, reader.buffer_position() as usize),
                        message: e.to_string(),
                    })?;
                    buf.push_str(&s);
                }
            }
            Event::CData(t) => {
                if let Some((_, buf)) = capture.as_mut() {
                    buf.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::End(_) => {
                let name = stack.pop().unwrap_or_default();
                if capture.is_some() && matches!(name.as_str(), "id" | "updated" | "name") {
                    finish_capture(current.as_mut(), capture.take());
                }
                if name == "entry" && matches!(stack.last().map(String::as_str), None | Some("feed")) {
                    if let Some(entry) = current.take() {
                        entries.push(entry);
                    }
                }
            }
            Event::Eof => {
                if !saw_root {
                    return Err(AtomError::Syntax {
                        position: Position::at(text, text.len()),
                        message: "empty document".into(),
                    });
                }
                if !stack.is_empty() {
                    return Err(AtomError::Syntax {
                        position: Position::at(text, text.len()),
                        message: "unexpected end of document".into(),
                    });
                }
                return Ok(entries);
            }
            _ => {}
        }
    }
}

fn finish_capture(entry: Option<&mut EntryFields>, capture: Option<(Field, String)>) {
    let (Some(entry), Some((field, value))) = (entry, capture) else {
        return;
    };
    match field {
        Field::Id => {
            entry.id.get_or_insert(value);
        }
        Field::Updated => {
            entry.updated.get_or_insert(value);
        }
        Field::AuthorName => entry.authors.push(value),
    }
}

fn link_attrs(
    e: &BytesStart<'_>,
    text: &str,
    reader: &NsReader<&[u8]>,
) -> Result<(Option<String>, Option<String>), AtomError> {
    let mut rel = None;
    let mut href = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| AtomError::Syntax {
            position: Position::at(text, reader.buffer_position() as usize),
            message: err.to_string(),
        })?;
        let value = attr
            .unescape_value()
            .map_err(|err| AtomError::Syntax {
                position: Position::at(text, reader.buffer_position() as usize),
                message: err.to_string(),
            })?
            .into_owned();
        match attr.key.as_ref() {
            b"rel" => rel = Some(value.trim().to_owned()),
            b"href" => href = Some(value.trim().to_owned()),
            _ => {}
        }
    }
    Ok((rel, href))
}
