//! Tolerant `<link rel="resourcemap">` scanning and insertion.
//!
//! This is a tag scanner, not an HTML tree builder: it skips comments and
//! raw-text elements, reads attributes with or without quotes, and never
//! fails on malformed markup.

use thiserror::Error;

use super::{DiscoveryHit, Mechanism, REL_RESOURCEMAP};
use crate::rdf::Iri;
use crate::serialization::xml::escape_attr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HtmlError {
    #[error("document has no <head> element")]
    NoHead,
}

fn find_ci(haystack_lower: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if from > haystack_lower.len() {
        return None;
    }
    haystack_lower[from..]
        .windows(needle.len())
        .position(|w| w == needle)
        .map(|i| i + from)
}

/// True when `lower[at..]` is the tag name `name` followed by a delimiter.
fn tag_named(lower: &[u8], at: usize, name: &[u8]) -> bool {
    lower[at..].starts_with(name)
        && lower
            .get(at + name.len())
            .is_none_or(|c| c.is_ascii_whitespace() || *c == b'>' || *c == b'/')
}

/// Inserts a Resource Map link as the last child of `<head>`.
pub fn embed_html_link(html: &[u8], rem_uri: &Iri, media_type: &str) -> Result<Vec<u8>, HtmlError> {
    let lower = html.to_ascii_lowercase();
    let head_open = (0..lower.len())
        .filter(|&i| lower[i] == b'<')
        .find(|&i| tag_named(&lower, i + 1, b"head"))
        .ok_or(HtmlError::NoHead)?;
    let at = find_ci(&lower, b"</head", head_open)
        .or_else(|| find_ci(&lower, b"<body", head_open))
        .unwrap_or(html.len());

    let mut tag = String::from("<link rel=\"");
    tag.push_str(REL_RESOURCEMAP);
    tag.push_str("\" type=\"");
    escape_attr(media_type, &mut tag);
    tag.push_str("\" href=\"");
    escape_attr(rem_uri.as_str(), &mut tag);
    tag.push_str("\">\n");

    let mut out = Vec::with_capacity(html.len() + tag.len());
    out.extend_from_slice(&html[..at]);
    out.extend_from_slice(tag.as_bytes());
    out.extend_from_slice(&html[at..]);
    Ok(out)
}

/// Every `<link>` in the head whose `rel` token list contains
/// `resourcemap`, in document order, with `href` resolved against `base`.
pub fn extract_html_links(html: &[u8], base: &Iri) -> Vec<DiscoveryHit> {
    let text = String::from_utf8_lossy(html);
    let bytes = text.as_bytes();
    let lower = bytes.to_ascii_lowercase();
    let end = find_ci(&lower, b"</head", 0)
        .into_iter()
        .chain(find_ci(&lower, b"<body", 0))
        .min()
        .unwrap_or(bytes.len());

    let mut hits = Vec::new();
    let mut i = 0;
    while i < end {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        if lower[i..].starts_with(b"<!--") {
            i = find_ci(&lower, b"-->", i + 4).map_or(bytes.len(), |j| j + 3);
            continue;
        }
        let raw_text = [b"script".as_slice(), b"style", b"title", b"textarea"]
            .into_iter()
            .find(|name| tag_named(&lower, i + 1, name));
        if let Some(name) = raw_text {
            let close = [b"</".as_slice(), name].concat();
            i = find_ci(&lower, &close, i + 1).map_or(bytes.len(), |j| j + close.len());
            continue;
        }
        if !tag_named(&lower, i + 1, b"link") {
            i += 1;
            continue;
        }
        let (attrs, next) = read_attributes(&text, i + 5);
        i = next;
        let get = |name: &str| attrs.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str());
        let is_rem = get("rel").is_some_and(|rel| {
            rel.split_ascii_whitespace()
                .any(|tok| tok.eq_ignore_ascii_case(REL_RESOURCEMAP))
        });
        if !is_rem {
            continue;
        }
        let Some(rem_uri) = get("href").and_then(|href| base.resolve(href).ok()) else {
            continue;
        };
        hits.push(DiscoveryHit {
            resource: base.clone(),
            rem_uri,
            mechanism: Mechanism::ResourceEmbedding,
            media_type: get("type").map(|t| t.trim().to_owned()).filter(|t| !t.is_empty()),
        });
    }
    hits
}

/// Reads attributes from `start` up to the closing `>` of the tag. Returns
/// lower-cased names with entity-decoded values, and the offset after the tag.
fn read_attributes(text: &str, start: usize) -> (Vec<(String, String)>, usize) {
    let bytes = text.as_bytes();
    let mut attrs = Vec::new();
    let mut i = start;
    loop {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'/') {
            i += 1;
        }
        if i >= bytes.len() {
            return (attrs, i);
        }
        if bytes[i] == b'>' {
            return (attrs, i + 1);
        }
        let name_start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !matches!(bytes[i], b'=' | b'>' | b'/') {
            i += 1;
        }
        let name = text[name_start..i].to_ascii_lowercase();
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let mut value = String::new();
        if i < bytes.len() && bytes[i] == b'=' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'"' || bytes[i] == b'\'') {
                let quote = bytes[i];
                let value_start = i + 1;
                i = bytes[value_start..]
                    .iter()
                    .position(|b| *b == quote)
                    .map_or(bytes.len(), |p| value_start + p);
                value = decode_entities(&text[value_start..i]);
                i = (i + 1).min(bytes.len());
            } else {
                let value_start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' {
                    i += 1;
                }
                value = decode_entities(&text[value_start..i]);
            }
        }
        if !name.is_empty() && !attrs.iter().any(|(n, _)| *n == name) {
            attrs.push((name, value));
        }
    }
}

fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_owned();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let decoded = rest.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let entity = &rest[1..semi];
            let c = match entity {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                _ => entity
                    .strip_prefix("#x")
                    .or_else(|| entity.strip_prefix("#X"))
                    .map(|hex| u32::from_str_radix(hex, 16))
                    .or_else(|| entity.strip_prefix('#').map(str::parse::<u32>))
                    .and_then(Result::ok)
                    .and_then(char::from_u32),
            };
            c.map(|c| (c, semi))
        });
        match decoded {
            Some((c, semi)) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Iri {
        Iri::new(s).unwrap()
    }

    const PAGE: &[u8] = b"<!DOCTYPE html>\n<html><head><title>Page</title></head><body><p>hi</p></body></html>";

    #[test]
    fn embed_then_extract() {
        let rem = iri("http://x.org/rem.atom");
        let page = embed_html_link(PAGE, &rem, "application/atom+xml").unwrap();
        let text = String::from_utf8(page.clone()).unwrap();
        assert!(text.contains(
            "<link rel=\"resourcemap\" type=\"application/atom+xml\" href=\"http://x.org/rem.atom\">\n</head>"
        ));
        let hits = extract_html_links(&page, &iri("http://x.org/page"));
        assert_eq!(
            hits,
            vec![DiscoveryHit {
                resource: iri("http://x.org/page"),
                rem_uri: rem,
                mechanism: Mechanism::ResourceEmbedding,
                media_type: Some("application/atom+xml".into()),
            }]
        );
    }

    #[test]
    fn embed_requires_head() {
        assert_eq!(
            embed_html_link(b"<html><body/></html>", &iri("http://x.org/r"), "t"),
            Err(HtmlError::NoHead)
        );
        // an unclosed head still takes the link before <body>
        let out = embed_html_link(b"<html><head><meta charset=utf-8><body>x", &iri("http://x.org/r"), "t").unwrap();
        assert!(String::from_utf8(out)
            .unwrap()
            .contains("href=\"http://x.org/r\">\n<body>"));
    }

    #[test]
    fn no_links() {
        assert!(extract_html_links(PAGE, &iri("http://x.org/")).is_empty());
        assert!(extract_html_links(b"", &iri("http://x.org/")).is_empty());
    }

    #[test]
    fn relative_href_resolution() {
        let page = br#"<html><head><link rel="resourcemap" href="maps/rem1.atom"></head></html>"#;
        let hits = extract_html_links(page, &iri("http://x.org/a/"));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].rem_uri.as_str(), "http://x.org/a/maps/rem1.atom");
        assert_eq!(hits[0].media_type, None);
    }

    #[test]
    fn tolerant_markup() {
        let page = br#"<HTML><HEAD>
<!-- <link rel="resourcemap" href="commented"> -->
<script>var s = '<link rel="resourcemap" href="scripted">';</script>
<LINK REL='alternate ResourceMap' HREF=/one.rdf TYPE="application/rdf+xml"/>
<link rel="stylesheet" href="x.css">
<link rel=resourcemap href="two?a=1&amp;b=2">
<link rel="resourcemap">
</head><body><link rel="resourcemap" href="in-body"></body>"#;
        let hits = extract_html_links(page, &iri("http://x.org/dir/page"));
        let uris: Vec<&str> = hits.iter().map(|h| h.rem_uri.as_str()).collect();
        assert_eq!(uris, ["http://x.org/one.rdf", "http://x.org/dir/two?a=1&b=2"]);
        assert_eq!(hits[0].media_type.as_deref(), Some("application/rdf+xml"));
    }

    #[test]
    fn entity_decoding() {
        assert_eq!(decode_entities("a&amp;b&#x41;&#66;&bogus;&"), "a&bAB&bogus;&");
    }
}
