//! `Link` response header values.

use super::{DiscoveryHit, Mechanism, REL_RESOURCEMAP};
use crate::rdf::Iri;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkDecode {
    pub hits: Vec<DiscoveryHit>,
    /// Segments that could not be read as a link-value.
    pub warnings: Vec<String>,
}

/// Formats `<uri>; rel="resourcemap"; type="mt"` entries joined by `", "`.
pub fn encode_link_header(maps: &[(Iri, String)]) -> String {
    maps.iter()
        .map(|(uri, media_type)| format!("<{uri}>; rel=\"{REL_RESOURCEMAP}\"; type=\"{media_type}\""))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Splits on `sep` outside double quotes and angle brackets.
fn split_outside(value: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut in_quotes = false;
    let mut in_angle = false;
    let mut escaped = false;
    for (i, c) in value.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match c {
            '\\' if in_quotes => escaped = true,
            '"' if !in_angle => in_quotes = !in_quotes,
            '<' if !in_quotes => in_angle = true,
            '>' if !in_quotes => in_angle = false,
            c if c == sep && !in_quotes && !in_angle => {
                parts.push(&value[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&value[start..]);
    parts
}

fn unquote(v: &str) -> String {
    let v = v.trim();
    match v.strip_prefix('"').and_then(|v| v.strip_suffix('"')) {
        Some(inner) => {
            let mut out = String::with_capacity(inner.len());
            let mut chars = inner.chars();
            while let Some(c) = chars.next() {
                if c == '\\' {
                    if let Some(n) = chars.next() {
                        out.push(n);
                    }
                } else {
                    out.push(c);
                }
            }
            out
        }
        None => v.to_owned(),
    }
}

/// Reads the `resourcemap` links from a header value received for `resource`.
/// Target references resolve against `resource`.
pub fn decode_link_header(value: &str, resource: &Iri) -> LinkDecode {
    let mut out = LinkDecode::default();
    for segment in split_outside(value, ',') {
        let segment = segment.trim();
        if segment.is_empty() {
            continue;
        }
        let Some(rest) = segment.strip_prefix('<') else {
            out.warnings.push(format!("no <target> in {segment:?}"));
            continue;
        };
        let Some(close) = rest.find('>') else {
            out.warnings.push(format!("unterminated <target> in {segment:?}"));
            continue;
        };
        let target = rest[..close].trim();
        let mut rel = None;
        let mut media_type = None;
        for param in split_outside(&rest[close + 1..], ';').into_iter().skip(1) {
            let param = param.trim();
            if param.is_empty() {
                continue;
            }
            let (name, v) = param.split_once('=').unwrap_or((param, ""));
            let name = name.trim().to_ascii_lowercase();
            // first occurrence wins for each parameter
            match name.as_str() {
                "rel" if rel.is_none() => rel = Some(unquote(v)),
                "type" if media_type.is_none() => media_type = Some(unquote(v)),
                _ => {}
            }
        }
        let is_rem = rel.is_some_and(|rel| {
            rel.split_ascii_whitespace()
                .any(|tok| tok.eq_ignore_ascii_case(REL_RESOURCEMAP))
        });
        if !is_rem {
            continue;
        }
        match resource.resolve(target) {
            Ok(rem_uri) => out.hits.push(DiscoveryHit {
                resource: resource.clone(),
                rem_uri,
                mechanism: Mechanism::ResponseEmbedding,
                media_type: media_type.filter(|t| !t.is_empty()),
            }),
            Err(_) => out.warnings.push(format!("invalid target {target:?}")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    #[test]
    fn exact_encoding() {
        let v = encode_link_header(&[
            (iri("http://x.org/rem.rdf"), "application/rdf+xml".into()),
            (iri("http://x.org/rem.atom"), "application/atom+xml".into()),
        ]);
        assert_eq!(
            v,
            "<http://x.org/rem.rdf>; rel=\"resourcemap\"; type=\"application/rdf+xml\", \
             <http://x.org/rem.atom>; rel=\"resourcemap\"; type=\"application/atom+xml\""
        );
        assert_eq!(encode_link_header(&[]), "");
    }

    #[test]
    fn round_trip() {
        let maps = vec![
            (iri("http://x.org/a,b.rdf"), "application/rdf+xml".to_owned()),
            (iri("http://x.org/rem.atom"), "application/atom+xml".to_owned()),
        ];
        let res = iri("http://x.org/page");
        let decoded = decode_link_header(&encode_link_header(&maps), &res);
        assert!(decoded.warnings.is_empty());
        let got: Vec<(Iri, String)> = decoded
            .hits
            .into_iter()
            .map(|h| (h.rem_uri, h.media_type.unwrap()))
            .collect();
        assert_eq!(got, maps);
    }

    #[test]
    fn other_relations_and_junk() {
        let res = iri("http://x.org/dir/page");
        let v = r#"<style.css>; rel=stylesheet, garbage, <rem.rdf>; REL="describedby ResourceMap"; title="a, b; c", <http://x.org/nope"#;
        let d = decode_link_header(v, &res);
        assert_eq!(d.hits.len(), 1);
        assert_eq!(d.hits[0].rem_uri.as_str(), "http://x.org/dir/rem.rdf");
        assert_eq!(d.hits[0].media_type, None);
        assert_eq!(d.hits[0].mechanism, Mechanism::ResponseEmbedding);
        assert_eq!(d.warnings.len(), 2);
    }
}
