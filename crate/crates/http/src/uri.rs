//! Mapping between IRIs and the ASCII URIs that go on the wire.

/// Percent-encodes every non-ASCII byte.
pub fn to_uri(iri: &str) -> String {
    let mut out = String::with_capacity(iri.len());
    for c in iri.chars() {
        if c.is_ascii() {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        }
    }
    out
}

/// Decodes percent-escapes that spell non-ASCII UTF-8 characters; ASCII
/// escapes such as `%20` stay encoded.
pub fn to_iri(uri: &str) -> String {
    let bytes = uri.as_bytes();
    let mut out = String::with_capacity(uri.len());
    let mut i = 0;
    while i < bytes.len() {
        if let Some((c, used)) = decode_char(&bytes[i..]) {
            out.push(c);
            i += used;
        } else {
            let ch = uri[i..].chars().next().expect("in bounds");
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    out
}

fn hex_byte(b: &[u8]) -> Option<u8> {
    match b {
        [b'%', h, l, ..] => u8::from_str_radix(std::str::from_utf8(&[*h, *l]).ok()?, 16).ok(),
        _ => None,
    }
}

/// One non-ASCII character spelled as `%XX%XX..` at the start of `b`.
fn decode_char(b: &[u8]) -> Option<(char, usize)> {
    let lead = hex_byte(b)?;
    let len = match lead {
        0xC2..=0xDF => 2,
        0xE0..=0xEF => 3,
        0xF0..=0xF4 => 4,
        _ => return None,
    };
    let mut buf = [0u8; 4];
    for (k, slot) in buf.iter_mut().enumerate().take(len) {
        *slot = hex_byte(b.get(k * 3..)?)?;
    }
    let c = std::str::from_utf8(&buf[..len]).ok()?.chars().next()?;
    (!c.is_control()).then_some((c, len * 3))
}
