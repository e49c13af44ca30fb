//! Random graphs and Resource Maps for property tests and demos.
//!
//! Everything generated stays inside what the codecs promise to carry:
//! predicates split into a namespace and an XML local name, literals hold
//! only XML 1.0 characters, and a graph never has more than
//! [`MAX_BLANKS`] blank nodes.

use chrono::{DateTime, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{ResourceMap, ResourceMapBuilder};
use crate::rdf::{BlankNode, Graph, Iri, Literal, Term, Triple};

pub const MAX_BLANKS: usize = 8;

const HOSTS: &[&str] = &["http://example.org/", "http://x.org/a/", "https://data.test/", "urn:x:"];
const SEGMENTS: &[&str] = &["doc", "img", "paper", "v1", "p%20q", "caf\u{e9}", "a-b_c", "x.y", "0"];
const NAMESPACES: &[&str] = &[
    "http://purl.org/dc/elements/1.1/",
    "http://www.w3.org/2000/01/rdf-schema#",
    "http://xmlns.com/foaf/0.1/",
    "http://www.w3.org/2002/07/owl#",
    "http://purl.org/dc/terms/",
    "http://example.org/vocab#",
    "http://example.com/terms/",
    "urn:p:",
];
const LOCALS: &[&str] = &[
    "title",
    "seeAlso",
    "name",
    "sameAs",
    "isPartOf",
    "p",
    "rel_2",
    "x-y",
    "\u{e9}t\u{e9}",
];
const DATATYPES: &[&str] = &[
    "http://www.w3.org/2001/XMLSchema#integer",
    "http://www.w3.org/2001/XMLSchema#date",
    "http://www.w3.org/2001/XMLSchema#string",
    "http://example.org/dt#custom",
];
const LANGS: &[&str] = &["en", "fr", "de-CH", "x-private"];
const TEXT: &[&str] = &[
    "a",
    "Hello",
    " ",
    "<tag>",
    "&amp;",
    "\"q\"",
    "'",
    "\u{e9}",
    "\u{4e2d}",
    "\u{1f600}",
    "\t",
    "\n",
    "\r",
    "]]>",
    "x y",
];

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items.choose(rng).expect("non-empty table")
}

pub fn random_iri<R: Rng + ?Sized>(rng: &mut R) -> Iri {
    let mut s = pick(rng, HOSTS).to_owned();
    for i in 0..rng.gen_range(1..=3) {
        if i > 0 {
            s.push('/');
        }
        s.push_str(pick(rng, SEGMENTS));
    }
    match rng.gen_range(0..8) {
        0 => s.push_str("?a=1&b=2"),
        1 => s.push_str("#frag"),
        _ => {}
    }
    Iri::new(s).expect("generated IRIs are absolute")
}

pub fn random_predicate<R: Rng + ?Sized>(rng: &mut R) -> Iri {
    loop {
        let p = Iri::new(format!("{}{}", pick(rng, NAMESPACES), pick(rng, LOCALS))).expect("absolute");
        // the aggregation-graph predicates are left to the builder
        if !matches!(
            p.as_str(),
            "http://purl.org/dc/terms/creator" | "http://purl.org/dc/terms/modified"
        ) {
            return p;
        }
    }
}

pub fn random_text<R: Rng + ?Sized>(rng: &mut R) -> String {
    (0..rng.gen_range(0..5)).map(|_| pick(rng, TEXT)).collect()
}

pub fn random_literal<R: Rng + ?Sized>(rng: &mut R) -> Literal {
    let lexical = random_text(rng);
    match rng.gen_range(0..4) {
        0 => Literal::lang(lexical, pick(rng, LANGS)).expect("valid tag"),
        1 => Literal::typed(lexical, Iri::new(pick(rng, DATATYPES)).expect("absolute")).expect("not langString"),
        _ => Literal::string(lexical),
    }
}

fn random_node<R: Rng + ?Sized>(rng: &mut R, blanks: usize) -> Term {
    if blanks > 0 && rng.gen_bool(0.35) {
        Term::BlankNode(BlankNode::new(format!("n{}", rng.gen_range(0..blanks))).expect("valid label"))
    } else {
        Term::Iri(random_iri(rng))
    }
}

/// A triple over a pool of `blanks` blank-node labels.
pub fn random_triple<R: Rng + ?Sized>(rng: &mut R, blanks: usize) -> Triple {
    let subject = random_node(rng, blanks);
    let object = if rng.gen_bool(0.4) {
        Term::Literal(random_literal(rng))
    } else {
        random_node(rng, blanks)
    };
    Triple::new(subject, random_predicate(rng), object).expect("well-formed by construction")
}

/// Up to `max_triples` triples (fewer when duplicates collide).
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, max_triples: usize) -> Graph {
    let blanks = rng.gen_range(0..=MAX_BLANKS);
    let n = rng.gen_range(0..=max_triples);
    (0..n).map(|_| random_triple(rng, blanks)).collect()
}

pub fn random_timestamp<R: Rng + ?Sized>(rng: &mut R) -> DateTime<Utc> {
    let secs = rng.gen_range(946_684_800i64..1_893_456_000);
    Utc.timestamp_opt(secs, 0).single().expect("in range")
}

/// A valid Resource Map with 1 to 5 constituents, 1 to 3 literal creators
/// and up to `max_extra` additional statements.
pub fn random_resource_map<R: Rng + ?Sized>(rng: &mut R, max_extra: usize) -> ResourceMap {
    let id: u32 = rng.gen();
    let rem = Iri::new(format!("http://example.org/rem/{id}")).expect("absolute");
    let agg = Iri::new(format!("http://example.org/aggregation/{id}")).expect("absolute");
    random_resource_map_at(rng, rem, agg, max_extra)
}

/// Like [`random_resource_map`] with caller-chosen Resource Map and
/// aggregation URIs.
pub fn random_resource_map_at<R: Rng + ?Sized>(rng: &mut R, rem: Iri, agg: Iri, max_extra: usize) -> ResourceMap {
    let mut builder = ResourceMapBuilder::new(rem, agg, random_timestamp(rng));
    for _ in 0..rng.gen_range(1..=5) {
        builder = builder.aggregate(random_iri(rng));
    }
    for _ in 0..rng.gen_range(1..=3) {
        let name = format!(
            "{} {}",
            pick(rng, &["Ann", "Bo", "Chl\u{f6}e", "D & E"]),
            rng.gen_range(0..100)
        );
        builder = builder.creator(Term::string(name));
    }
    let blanks = rng.gen_range(0..=MAX_BLANKS);
    let mut extra = Graph::new();
    for _ in 0..rng.gen_range(0..=max_extra) {
        let t = random_triple(rng, blanks);
        // ore predicates in extra statements would change the aggregation graph
        if !t.predicate_iri().as_str().starts_with(crate::vocab::ore::NS) {
            extra.insert(t);
        }
    }
    builder.extra(extra).build().expect("generated maps are valid")
}

const FUZZ_TOKENS: &[&[u8]] = &[
    b"<",
    b">",
    b"/>",
    b"\"",
    b"'",
    b"&",
    b"&amp;",
    b"&#x0;",
    b"<!--",
    b"-->",
    b"<![CDATA[",
    b"]]>",
    b"<?xml ",
    b"<!DOCTYPE x [<!ENTITY e \"e\">]>",
    b"rdf:",
    b"xmlns:rdf=\"http://www.w3.org/1999/02/22-rdf-syntax-ns#\"",
    b"rdf:about=\"",
    b"rdf:nodeID=\"",
    b"rdf:parseType=\"Literal\"",
    b"xml:lang=\"",
    b"<entry>",
    b"</entry>",
    b"<link rel=\"self\" href=\"",
    b"; rel=\"resourcemap\"",
    b", ",
    b"<http://",
    b"\r\n",
    b"\n",
    b"#",
    b"\xff",
    b"\xEF\xBB\xBF",
    b"\xc3",
    b"\0",
    b"%",
    b"../",
];

/// A fuzz input: usually a mutated copy of one of `seeds`, sometimes raw
/// random bytes.
pub fn mutate<R: Rng + ?Sized>(rng: &mut R, seeds: &[&[u8]]) -> Vec<u8> {
    if seeds.is_empty() || rng.gen_bool(0.15) {
        let len = rng.gen_range(0..256);
        return (0..len).map(|_| rng.gen()).collect();
    }
    let mut doc = seeds.choose(rng).expect("non-empty").to_vec();
    for _ in 0..rng.gen_range(1..=6) {
        let at = rng.gen_range(0..=doc.len());
        match rng.gen_range(0..5) {
            0 => doc.truncate(at),
            1 => {
                let token = FUZZ_TOKENS.choose(rng).expect("non-empty");
                doc.splice(at..at, token.iter().copied());
            }
            2 if at < doc.len() => doc[at] = rng.gen(),
            3 if at < doc.len() => {
                let end = rng.gen_range(at..=doc.len().min(at + 32));
                doc.drain(at..end);
            }
            _ => {
                let end = rng.gen_range(at..=doc.len().min(at + 64));
                let chunk = doc[at..end].to_vec();
                doc.splice(at..at, chunk);
            }
        }
    }
    doc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuzzOutcome {
    pub iterations: usize,
    pub panics: usize,
    pub slowest: std::time::Duration,
}

/// Runs `target` on `iterations` inputs derived from `seeds`, counting
/// panics and timing the slowest call.
pub fn fuzz(seed: u64, seeds: &[Vec<u8>], iterations: usize, target: impl Fn(&[u8])) -> FuzzOutcome {
    use rand::SeedableRng;
    use std::panic::{catch_unwind, AssertUnwindSafe};
    use std::time::Instant;

    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let seeds: Vec<&[u8]> = seeds.iter().map(Vec::as_slice).collect();
    let mut outcome = FuzzOutcome {
        iterations,
        panics: 0,
        slowest: std::time::Duration::ZERO,
    };
    for _ in 0..iterations {
        let input = mutate(&mut rng, &seeds);
        let start = Instant::now();
        if catch_unwind(AssertUnwindSafe(|| target(&input))).is_err() {
            outcome.panics += 1;
        }
        outcome.slowest = outcome.slowest.max(start.elapsed());
    }
    outcome
}

/// Well-formed documents for each parser, used as mutation seeds.
#[derive(Debug, Clone, Default)]
pub struct FuzzSeeds {
    pub rdfxml: Vec<Vec<u8>>,
    pub atom: Vec<Vec<u8>>,
    pub link_headers: Vec<Vec<u8>>,
    pub batch_lists: Vec<Vec<u8>>,
}

pub fn fuzz_seeds<R: Rng + ?Sized>(rng: &mut R, count: usize) -> FuzzSeeds {
    use crate::discovery::{emit_batch, encode_link_header, BatchFormat};
    use crate::serialization::{serialize_atom, serialize_rdfxml};

    let mut seeds = FuzzSeeds::default();
    for _ in 0..count {
        let map = random_resource_map(rng, 6);
        seeds
            .rdfxml
            .push(serialize_rdfxml(map.graph()).expect("generated graphs serialize"));
        seeds.atom.push(serialize_atom(&map).expect("valid map").document);
        let uris: Vec<Iri> = (0..rng.gen_range(1..4)).map(|_| random_iri(rng)).collect();
        let typed: Vec<(Iri, String)> = uris
            .iter()
            .map(|u| (u.clone(), "application/rdf+xml".to_owned()))
            .collect();
        seeds.link_headers.push(encode_link_header(&typed).into_bytes());
        seeds.batch_lists.push(emit_batch(&uris, BatchFormat::PlainText));
        seeds.batch_lists.push(emit_batch(&uris, BatchFormat::AtomFeed));
    }
    seeds
}
