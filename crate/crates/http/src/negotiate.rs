//! `Accept` header negotiation between the two wire formats.

use ore_core::WireFormat;

/// Format served when the client expresses no preference.
pub const DEFAULT_FORMAT: WireFormat = WireFormat::Atom;

#[derive(Debug, Clone, PartialEq)]
struct MediaRange {
    kind: String,
    subtype: String,
    q: f32,
}

impl MediaRange {
    /// 2 for `type/subtype`, 1 for `type/*`, 0 for `*/*`, `None` if no match.
    fn specificity(&self, media_type: &str) -> Option<u8> {
        let (kind, subtype) = media_type.split_once('/')?;
        match (self.kind.as_str(), self.subtype.as_str()) {
            ("*", "*") => Some(0),
            (k, "*") if k.eq_ignore_ascii_case(kind) => Some(1),
            (k, s) if k.eq_ignore_ascii_case(kind) && s.eq_ignore_ascii_case(subtype) => Some(2),
            _ => None,
        }
    }
}

fn parse_range(item: &str) -> Option<MediaRange> {
    let mut parts = item.split(';');
    let (kind, subtype) = parts.next()?.trim().split_once('/')?;
    let token = |s: &str| {
        !s.is_empty()
            && s.bytes()
                .all(|b| b.is_ascii_graphic() && !b"()<>@,;:\\\"/[]?={}".contains(&b))
    };
    if !token(kind) || !token(subtype) || (kind == "*" && subtype != "*") {
        return None;
    }
    let mut q = 1.0;
    for param in parts {
        if let Some((name, value)) = param.split_once('=') {
            if name.trim().eq_ignore_ascii_case("q") {
                q = value.trim().parse::<f32>().ok().filter(|q| (0.0..=1.0).contains(q))?;
            }
        }
    }
    Some(MediaRange {
        kind: kind.to_owned(),
        subtype: subtype.to_owned(),
        q,
    })
}

fn parse_accept(header: &str) -> Vec<MediaRange> {
    let ranges: Vec<MediaRange> = header.split(',').filter_map(parse_range).collect();
    if ranges.is_empty() {
        // absent, empty or unreadable: anything goes
        vec![MediaRange {
            kind: "*".into(),
            subtype: "*".into(),
            q: 1.0,
        }]
    } else {
        ranges
    }
}

/// Picks the available format with the highest quality; ties go to Atom.
/// `None` means nothing acceptable (a 406).
pub fn negotiate(accept: &str, available: &[WireFormat]) -> Option<WireFormat> {
    negotiate_with_default(accept, available, DEFAULT_FORMAT)
}

pub fn negotiate_with_default(accept: &str, available: &[WireFormat], default: WireFormat) -> Option<WireFormat> {
    let ranges = parse_accept(accept);
    let quality = |format: WireFormat| {
        ranges
            .iter()
            .filter_map(|r| r.specificity(format.media_type()).map(|s| (s, r.q)))
            .max_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)))
            .map_or(0.0, |(_, q)| q)
    };
    let mut best: Option<(WireFormat, f32)> = None;
    for &format in available {
        let q = quality(format);
        if q <= 0.0 {
            continue;
        }
        best = match best {
            Some((b, bq)) if bq > q || (bq == q && (b == default || format != default)) => Some((b, bq)),
            _ => Some((format, q)),
        };
    }
    best.map(|(f, _)| f)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOTH: [WireFormat; 2] = [WireFormat::RdfXml, WireFormat::Atom];

    #[test]
    fn exact_match() {
        assert_eq!(negotiate("application/rdf+xml", &BOTH), Some(WireFormat::RdfXml));
        assert_eq!(negotiate("Application/Atom+XML", &BOTH), Some(WireFormat::Atom));
    }

    #[test]
    fn absent_header_gives_the_default() {
        assert_eq!(negotiate("", &BOTH), Some(WireFormat::Atom));
        assert_eq!(negotiate("*/*", &BOTH), Some(WireFormat::Atom));
        assert_eq!(negotiate("", &[WireFormat::RdfXml]), Some(WireFormat::RdfXml));
        assert_eq!(
            negotiate_with_default("", &BOTH, WireFormat::RdfXml),
            Some(WireFormat::RdfXml)
        );
    }

    #[test]
    fn q_values_order_formats() {
        assert_eq!(
            negotiate("application/atom+xml;q=0.4, application/rdf+xml;q=0.9", &BOTH),
            Some(WireFormat::RdfXml)
        );
        assert_eq!(
            negotiate("application/*;q=0.5, application/rdf+xml;q=0.5", &BOTH),
            Some(WireFormat::Atom)
        );
    }

    #[test]
    fn q_zero_excludes() {
        assert_eq!(
            negotiate("*/*, application/atom+xml;q=0", &BOTH),
            Some(WireFormat::RdfXml)
        );
        assert_eq!(negotiate("application/rdf+xml;q=0", &[WireFormat::RdfXml]), None);
    }

    #[test]
    fn no_acceptable_format() {
        assert_eq!(negotiate("text/html", &BOTH), None);
        assert_eq!(negotiate("text/html, application/xhtml+xml;q=0.9", &BOTH), None);
        assert_eq!(negotiate("application/atom+xml", &[WireFormat::RdfXml]), None);
    }

    #[test]
    fn hopeless_header_is_a_wildcard() {
        assert_eq!(negotiate(";;;,,garbage", &BOTH), Some(WireFormat::Atom));
        assert_eq!(negotiate("text/html;q=banana", &BOTH), Some(WireFormat::Atom));
    }

    #[test]
    fn specific_range_overrides_wildcard() {
        // atom is explicitly unwanted even though */* would allow it
        assert_eq!(
            negotiate("application/atom+xml;q=0, */*;q=0.1", &[WireFormat::Atom]),
            None
        );
        assert_eq!(negotiate("application/*;q=0.2, */*;q=1", &BOTH), Some(WireFormat::Atom));
    }
}
