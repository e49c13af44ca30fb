//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use ore_cli::fetch::{FetchManifest, Outcome};
use ore_core::discovery::{
    decode_link_header, embed_html_link, emit_batch, encode_link_header, extract_html_links, parse_batch, BatchFormat,
    Mechanism,
};
use ore_core::model::ViolationCode;
use ore_core::serialization::{parse_atom, parse_rdfxml, serialize_atom, serialize_rdfxml};
use ore_core::testkit::{fuzz, fuzz_seeds, random_iri, random_resource_map, random_resource_map_at};
use ore_core::{graph_isomorphic, Iri, ResourceMap, WireFormat};
use ore_http::{Client, Method, PublishScenario, Server, Store, StoreConfig, Transport, UreqTransport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);
type FuzzTarget<'a> = (&'static str, &'a [Vec<u8>], Box<dyn Fn(&[u8]) + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const CORPUS: usize = 200;
const BOUNDARY_MAPS: usize = 100;
const FUZZ_ITERATIONS: usize = 10_000;
const MEDIA_TYPES: [&str; 2] = ["application/rdf+xml", "application/atom+xml"];

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn model_conformance() -> Verdict {
    let valid = fixture_files("valid");
    let invalid = fixture_files("invalid");
    ensure!(!valid.is_empty(), "no valid fixtures");
    ensure!(invalid.len() >= 10, "only {} invalid fixtures", invalid.len());

    let mut alone = BTreeSet::new();
    let mut combined = 0;
    let mut checked = 0;
    for (file, code) in valid.iter().map(|f| (f, 0)).chain(invalid.iter().map(|f| (f, 1))) {
        let expected = expected_codes(file).ok_or_else(|| format!("{}: no expect marker", file.display()))?;
        match expected.len() {
            1 => {
                alone.insert(expected.iter().next().unwrap().clone());
            }
            n if n > 1 => combined += 1,
            _ => {}
        }

        let bytes = std::fs::read(file).map_err(|e| e.to_string())?;
        let base = iri("http://example.org/rem/1");
        let graph = parse_rdfxml(&bytes, &base).map_err(|e| format!("{}: {e}", file.display()))?;
        let rem_uri = ore_cli::input::infer_rem_uri(&graph).unwrap_or(base);
        let report = ResourceMap::new(rem_uri, graph).validate();
        let got: BTreeSet<String> = report.violations.iter().map(|v| v.code.as_str().to_owned()).collect();
        ensure!(got == expected, "{}: got {got:?}, want {expected:?}", file.display());
        ensure!(report.is_valid() == (code == 0), "{}: validity", file.display());

        let r = ore(&["validate", path_str(file)]);
        ensure!(r.code == code, "{}: ore validate exited {}", file.display(), r.code);
        checked += 1;
    }
    for code in ViolationCode::ALL {
        ensure!(alone.contains(code.as_str()), "no fixture isolates {}", code.as_str());
    }
    ensure!(combined > 0, "no fixture combines violations");
    Ok(format!(
        "{checked}/{checked} fixtures classified ({} valid, {} invalid, {combined} combined)",
        valid.len(),
        invalid.len()
    ))
}

fn rdfxml_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2d1);
    for k in 0..CORPUS {
        let map = random_resource_map(&mut rng, 10);
        let bytes = serialize_rdfxml(map.graph()).map_err(|e| format!("#{k}: {e}"))?;
        let back = parse_rdfxml(&bytes, map.uri()).map_err(|e| format!("#{k}: {e}"))?;
        ensure!(
            graph_isomorphic(map.graph(), &back).map_err(|e| e.to_string())?,
            "#{k} not isomorphic"
        );
    }
    Ok(format!("{CORPUS}/{CORPUS} isomorphic"))
}

fn atom_loss_accounting() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2d1);
    let mut lossless = 0;
    for k in 0..CORPUS {
        let map = random_resource_map(&mut rng, 10);
        let out = serialize_atom(&map).map_err(|e| format!("#{k}: {e}"))?;
        let back = parse_atom(&out.document).map_err(|e| format!("#{k}: {e}"))?;
        let mut union = back.graph().clone();
        union.extend(out.loss.dropped.iter().cloned());
        ensure!(
            union.len() == back.graph().len() + out.loss.dropped.len(),
            "#{k}: dropped statements overlap the mapped ones"
        );
        ensure!(
            graph_isomorphic(&union, map.graph()).map_err(|e| e.to_string())?,
            "#{k}: union differs"
        );
        let exact = map.aggregation_graph() == *map.graph();
        ensure!(
            out.loss.is_lossless() == exact,
            "#{k}: dropped {} but exact={exact}",
            out.loss.dropped.len()
        );
        lossless += usize::from(exact);
    }
    Ok(format!("{CORPUS}/{CORPUS} accounted for, {lossless} lossless"))
}

fn scenario_matrix() -> Verdict {
    let server = Server::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
    let authority = server.authority();
    let store = Arc::new(Store::new(StoreConfig::new(authority.clone())));
    let handle = server.run(store.clone(), 4);
    let result = (|| {
        let client = Client::default();
        let raw = UreqTransport::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0x4c);
        let mut cells = 0;
        for scenario in [PublishScenario::SeeOther, PublishScenario::HashUri] {
            for format in WireFormat::ALL {
                let max_extra = if format == WireFormat::Atom { 0 } else { 10 };
                let tag = format!("{scenario}-{}", format.extension());
                for k in 0..10 {
                    let rem_uri = iri(&format!("{authority}rem/{tag}/{k}"));
                    let agg_uri = match scenario {
                        PublishScenario::SeeOther => iri(&format!("{authority}aggregation/{tag}/{k}")),
                        PublishScenario::HashUri => iri(&format!("{rem_uri}#aggregation")),
                    };
                    let rem = random_resource_map_at(&mut rng, rem_uri.clone(), agg_uri.clone(), max_extra);
                    store.publish(rem.clone(), scenario).map_err(|e| e.to_string())?;
                    let got = client
                        .dereference_aggregation(&agg_uri, format)
                        .map_err(|e| format!("{tag} #{k}: {e}"))?;
                    ensure!(got.format == format, "{tag} #{k}: served {:?}", got.format);
                    ensure!(
                        graph_isomorphic(got.rem.graph(), rem.graph()).map_err(|e| e.to_string())?,
                        "{tag} #{k}: not isomorphic"
                    );
                    if scenario == PublishScenario::SeeOther {
                        for accept in [
                            None,
                            Some("application/rdf+xml"),
                            Some("application/atom+xml"),
                            Some("*/*"),
                        ] {
                            let r = raw
                                .request(Method::Get, agg_uri.as_str(), accept)
                                .map_err(|e| e.to_string())?;
                            ensure!(r.status == 303, "{agg_uri} answered {} to {accept:?}", r.status);
                        }
                    }
                }
                cells += 1;
            }
        }
        Ok(format!("{cells}/4 cells, SeeOther aggregations always 303"))
    })();
    handle.shutdown();
    result
}

/// Duplicate-free random IRIs.
fn distinct_iris(rng: &mut ChaCha8Rng, max: usize) -> Vec<Iri> {
    let mut seen = BTreeSet::new();
    (0..rng.gen_range(1..=max))
        .map(|_| random_iri(rng))
        .filter(|i| seen.insert(i.clone()))
        .collect()
}

fn discovery_identities(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let base = iri("http://example.org/lists/all");
    let page = iri("http://example.org/page.html");
    let cases = 200;
    for k in 0..cases {
        let uris = distinct_iris(rng, 8);
        for format in [BatchFormat::PlainText, BatchFormat::AtomFeed] {
            let parsed = parse_batch(&emit_batch(&uris, format), &base, format).map_err(|e| format!("#{k}: {e}"))?;
            ensure!(
                parsed.errors.is_empty() && parsed.list.rem_uris == uris,
                "#{k}: batch {format:?}"
            );
        }

        let typed: Vec<(Iri, String)> = uris
            .iter()
            .map(|u| (u.clone(), MEDIA_TYPES[rng.gen_range(0..2)].to_owned()))
            .collect();
        let decoded = decode_link_header(&encode_link_header(&typed), &page);
        let got: Vec<(Iri, String)> = decoded
            .hits
            .into_iter()
            .filter(|h| h.mechanism == Mechanism::ResponseEmbedding)
            .map(|h| (h.rem_uri, h.media_type.unwrap_or_default()))
            .collect();
        ensure!(decoded.warnings.is_empty() && got == typed, "#{k}: Link header");

        let mut html = b"<!DOCTYPE html>\n<html><head><title>t</title></head><body></body></html>\n".to_vec();
        for (uri, mt) in &typed {
            html = embed_html_link(&html, uri, mt).map_err(|e| format!("#{k}: {e}"))?;
        }
        let got: Vec<(Iri, String)> = extract_html_links(&html, &page)
            .into_iter()
            .filter(|h| h.mechanism == Mechanism::ResourceEmbedding)
            .map(|h| (h.rem_uri, h.media_type.unwrap_or_default()))
            .collect();
        ensure!(got == typed, "#{k}: HTML links");
    }
    Ok(cases)
}

/// `(mechanism, rem_uri, media_type)` triples reported by `ore discover --json`.
fn discovered(args: &[&str]) -> Result<Vec<(String, String, Option<String>)>, String> {
    let r = ore(args);
    ensure!(r.code == 0, "{args:?} exited {}: {}", r.code, r.err);
    let json: serde_json::Value = serde_json::from_str(&r.out).map_err(|e| e.to_string())?;
    ensure!(json["schema"] == 1, "schema {}", json["schema"]);
    Ok(json["hits"]
        .as_array()
        .ok_or("no hits array")?
        .iter()
        .map(|h| {
            (
                h["mechanism"].as_str().unwrap_or_default().to_owned(),
                h["rem_uri"].as_str().unwrap_or_default().to_owned(),
                h["media_type"].as_str().map(str::to_owned),
            )
        })
        .collect())
}

fn discovery() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd15c);
    let cases = discovery_identities(&mut rng)?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_map(
        dir.path(),
        "m.rdf",
        &map("m", &[iri("http://example.org/files/doc.pdf")]),
    );
    write_file(dir.path(), "files/doc.pdf", b"%PDF-1.4");
    let embedded: Vec<(Iri, &str)> = distinct_iris(&mut rng, 4)
        .into_iter()
        .map(|u| (u, MEDIA_TYPES[rng.gen_range(0..2)]))
        .collect();
    let mut html = b"<!DOCTYPE html>\n<html><head><title>x</title></head><body></body></html>".to_vec();
    for (uri, mt) in &embedded {
        html = embed_html_link(&html, uri, mt).map_err(|e| e.to_string())?;
    }
    write_file(dir.path(), "page.html", &html);
    let listed = distinct_iris(&mut rng, 6);
    write_file(dir.path(), "list.txt", &emit_batch(&listed, BatchFormat::PlainText));

    let (handle, authority) = serve(dir.path(), PublishScenario::SeeOther);
    let result = (|| {
        let got = discovered(&["discover", "--json", &at(&authority, "files/doc.pdf")])?;
        let want = vec![(
            "response-embedding".to_owned(),
            at(&authority, "rem/m"),
            Some(WireFormat::Atom.media_type().to_owned()),
        )];
        ensure!(got == want, "Link header: got {got:?}, want {want:?}");

        let got = discovered(&["discover", "--json", &at(&authority, "page.html")])?;
        let want: Vec<_> = embedded
            .iter()
            .map(|(u, mt)| ("resource-embedding".to_owned(), u.to_string(), Some(mt.to_string())))
            .collect();
        ensure!(got == want, "HTML: got {got:?}, want {want:?}");

        let got = discovered(&["discover", "--json", "--batch", &at(&authority, "list.txt")])?;
        let got: Vec<(String, String)> = got.into_iter().map(|(m, u, _)| (m, u)).collect();
        let want: Vec<_> = listed.iter().map(|u| ("batch".to_owned(), u.to_string())).collect();
        ensure!(got == want, "batch: got {got:?}, want {want:?}");
        Ok(format!(
            "{cases} random emit/consume cases per mechanism, planted hits 1+{}+{} recovered",
            embedded.len(),
            listed.len()
        ))
    })();
    handle.shutdown();
    result
}

fn boundary_determinism() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0);
    for k in 0..BOUNDARY_MAPS {
        let map = random_resource_map(&mut rng, 10);
        let first = map.boundary().map_err(|e| format!("#{k}: {e}"))?;
        ensure!(!first.resources.is_empty(), "#{k}: empty boundary");
        for _ in 0..3 {
            ensure!(
                map.boundary().map_err(|e| e.to_string())? == first,
                "#{k}: boundary changed"
            );
        }
        let bytes = serialize_rdfxml(map.graph()).map_err(|e| e.to_string())?;
        let back = ResourceMap::new(
            map.uri().clone(),
            parse_rdfxml(&bytes, map.uri()).map_err(|e| e.to_string())?,
        );
        ensure!(
            back.boundary().map_err(|e| e.to_string())? == first,
            "#{k}: boundary differs after round trip"
        );
    }
    Ok(format!("{BOUNDARY_MAPS}/{BOUNDARY_MAPS} identical"))
}

fn end_to_end_archive() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa7c);
    let site = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut payloads: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let mut names = Vec::new();
    for m in 0..4 {
        let name = format!("set{m}");
        let mut constituents = Vec::new();
        for f in 0..rng.gen_range(1..5) {
            let rel = format!("files/{name}/item {f}.bin");
            let bytes = random_bytes(&mut rng);
            write_file(site.path(), &rel, &bytes);
            payloads.insert(format!("{name}/item%20{f}.bin"), bytes);
            constituents.push(iri(&format!("{BASE}files/{name}/item%20{f}.bin")));
        }
        write_map(site.path(), &format!("{name}.rdf"), &map(&name, &constituents));
        names.push((name, constituents.len()));
    }
    write_file(site.path(), "files/fault/present.bin", b"present");
    let fault = [
        iri(&format!("{BASE}files/fault/present.bin")),
        iri(&format!("{BASE}files/fault/absent.bin")),
    ];
    write_map(site.path(), "fault.rdf", &map("fault", &fault));

    let (handle, authority) = serve(site.path(), PublishScenario::SeeOther);
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let result = (|| {
        let mut recovered = 0;
        for (name, count) in &names {
            let first = at(&authority, &format!("files/{name}/item%200.bin"));
            let hits = discovered(&["discover", "--json", &first])?;
            ensure!(hits.len() == 1, "{first}: {hits:?}");
            ensure!(hits[0].1 == at(&authority, &format!("rem/{name}")), "{first}: {hits:?}");

            let target = out.path().join(name);
            let r = ore(&[
                "fetch",
                &at(&authority, &format!("aggregation/{name}")),
                path_str(&target),
            ]);
            ensure!(r.code == 0, "fetch {name} exited {}: {}", r.code, r.err);
            let manifest = FetchManifest::read(&target).map_err(|e| e.to_string())?;
            ensure!(
                manifest.schema == 1 && manifest.constituents.len() == *count,
                "{name}: manifest"
            );
            for c in &manifest.constituents {
                ensure!(c.outcome == Outcome::Ok, "{}: {:?}", c.uri, c.outcome);
                let key = c
                    .uri
                    .strip_prefix(&at(&authority, "files/"))
                    .ok_or("foreign constituent")?;
                let want = payloads.get(key).ok_or_else(|| format!("unplanted {key}"))?;
                let local = c.local_path.as_ref().ok_or("no local path")?;
                let got = std::fs::read(target.join(local)).map_err(|e| e.to_string())?;
                ensure!(&got == want, "{}: payload differs", c.uri);
                ensure!(c.byte_length == Some(want.len() as u64), "{}: byte length", c.uri);
                recovered += 1;
            }
        }

        let target = out.path().join("fault");
        let r = ore(&["fetch", &at(&authority, "aggregation/fault"), path_str(&target)]);
        ensure!(r.code == 1, "faulty fetch exited {}", r.code);
        let manifest = FetchManifest::read(&target).map_err(|e| e.to_string())?;
        let absent = at(&authority, "files/fault/absent.bin");
        let present = at(&authority, "files/fault/present.bin");
        ensure!(
            manifest.constituents.len() == 2,
            "partial manifest lists {}",
            manifest.constituents.len()
        );
        for c in &manifest.constituents {
            if c.uri == absent {
                ensure!(
                    matches!(
                        c.outcome,
                        Outcome::Failed {
                            http_status: Some(404),
                            ..
                        }
                    ) && c.local_path.is_none(),
                    "absent: {c:?}"
                );
            } else {
                ensure!(c.uri == present && c.outcome == Outcome::Ok, "present: {c:?}");
                let got = std::fs::read(target.join(c.local_path.as_ref().ok_or("no local path")?))
                    .map_err(|e| e.to_string())?;
                ensure!(got == b"present", "present: payload differs");
            }
        }
        ensure!(!manifest.all_ok(), "partial manifest reports success");
        Ok(format!(
            "{recovered}/{} payloads byte-identical, 404 gives exit 1 and a partial manifest",
            payloads.len()
        ))
    })();
    handle.shutdown();
    result
}

fn robustness() -> Verdict {
    let seeds = fuzz_seeds(&mut ChaCha8Rng::seed_from_u64(0xf022), 16);
    let base = iri("http://example.org/base/doc");
    let targets: [FuzzTarget; 4] = [
        (
            "parse_rdfxml",
            &seeds.rdfxml,
            Box::new(|d| drop(parse_rdfxml(d, &base))),
        ),
        ("parse_atom", &seeds.atom, Box::new(|d| drop(parse_atom(d)))),
        (
            "decode_link_header",
            &seeds.link_headers,
            Box::new(|d| drop(decode_link_header(&String::from_utf8_lossy(d), &base))),
        ),
        (
            "parse_batch",
            &seeds.batch_lists,
            Box::new(|d| drop(parse_batch(d, &base, BatchFormat::sniff(d)))),
        ),
    ];
    let mut slowest = Duration::ZERO;
    for (k, (name, corpus, target)) in targets.iter().enumerate() {
        let outcome = fuzz(k as u64 + 1, corpus, FUZZ_ITERATIONS, |d| target(d));
        ensure!(
            outcome.iterations == FUZZ_ITERATIONS,
            "{name}: ran {}",
            outcome.iterations
        );
        ensure!(outcome.panics == 0, "{name}: {} panics", outcome.panics);
        ensure!(
            outcome.slowest < Duration::from_secs(1),
            "{name}: input took {:?}",
            outcome.slowest
        );
        slowest = slowest.max(outcome.slowest);
    }
    Ok(format!("4 x {FUZZ_ITERATIONS} inputs, 0 panics, slowest {slowest:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("model conformance", model_conformance),
        ("RDF/XML round trip", rdfxml_round_trip),
        ("Atom loss accounting", atom_loss_accounting),
        ("HTTP scenario matrix", scenario_matrix),
        ("discovery", discovery),
        ("boundary determinism", boundary_determinism),
        ("end-to-end archive", end_to_end_archive),
        ("robustness", robustness),
    ];
    // panics are reported on the criterion's line instead
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.1}s)", n + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.1}s)", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
