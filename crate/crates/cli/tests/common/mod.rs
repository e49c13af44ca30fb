//! Helpers shared by the command tests and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use ore_cli::config::Config;
use ore_cli::serve::{prepare, Args as ServeArgs};
use ore_cli::Context;
use ore_core::serialization::serialize_rdfxml;
use ore_core::{Iri, ResourceMap, ResourceMapBuilder, Term};
use ore_http::{PublishScenario, ServerHandle};
use rand::Rng;

/// Test documents are written under this prefix and rebased onto the
/// server's authority when served.
pub const BASE: &str = "http://example.org/";

pub struct Run {
    pub code: u8,
    pub out: String,
    pub err: String,
}

pub fn ore(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ore_cli::run(std::iter::once("ore").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8_lossy(&out).into_owned(),
        err: String::from_utf8_lossy(&err).into_owned(),
    }
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// `.rdf` files of a fixture subdirectory, sorted.
pub fn fixture_files(sub: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixtures().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "rdf"))
        .collect();
    files.sort();
    files
}

/// The codes named by a fixture's `<!-- expect: ... -->` marker.
pub fn expected_codes(path: &Path) -> Option<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let start = text.find("<!-- expect:")? + "<!-- expect:".len();
    let end = start + text[start..].find("-->")?;
    let list = text[start..end].trim();
    Some(if list == "none" {
        BTreeSet::new()
    } else {
        list.split([',', ' '])
            .filter(|c| !c.is_empty())
            .map(str::to_owned)
            .collect()
    })
}

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

pub fn map(name: &str, constituents: &[Iri]) -> ResourceMap {
    ResourceMapBuilder::new(
        iri(&format!("{BASE}rem/{name}")),
        iri(&format!("{BASE}aggregation/{name}")),
        "2026-01-01T00:00:00Z".parse().unwrap(),
    )
    .aggregates(constituents.iter().cloned())
    .creator(Term::string("Test Author"))
    .build()
    .unwrap()
}

pub fn write_map(dir: &Path, file: &str, rem: &ResourceMap) {
    let path = dir.join(file);
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, serialize_rdfxml(rem.graph()).unwrap()).unwrap();
}

pub fn write_file(dir: &Path, file: &str, bytes: &[u8]) {
    let path = dir.join(file);
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, bytes).unwrap();
}

pub fn random_bytes<R: Rng>(rng: &mut R) -> Vec<u8> {
    let n = rng.gen_range(0..4096);
    (0..n).map(|_| rng.gen()).collect()
}

pub fn serve_args(root: &Path, scenario: PublishScenario) -> ServeArgs {
    ServeArgs {
        root: root.to_path_buf(),
        scenario: Some(scenario),
        bind: Some("127.0.0.1:0".into()),
        rebase: vec![BASE.into()],
        ..ServeArgs::default()
    }
}

pub fn context() -> Context {
    Context::from_parts(Config::default(), None).unwrap()
}

/// Serves `root` in this process; the authority replaces [`BASE`].
pub fn serve(root: &Path, scenario: PublishScenario) -> (ServerHandle, String) {
    let mut err = Vec::new();
    let prepared = prepare(&serve_args(root, scenario), &context(), &mut err)
        .unwrap_or_else(|f| panic!("{f}\n{}", String::from_utf8_lossy(&err)));
    let authority = prepared.authority.clone();
    (prepared.start(), authority)
}

/// `BASE`-relative path on the served authority.
pub fn at(authority: &str, path: &str) -> String {
    format!("{authority}{path}")
}
