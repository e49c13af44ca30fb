//! W3C date-time profile of ISO 8601.
//!
//! Accepted forms: `YYYY`, `YYYY-MM`, `YYYY-MM-DD`, `YYYY-MM-DDThh:mmTZD`,
//! `YYYY-MM-DDThh:mm:ssTZD` and `YYYY-MM-DDThh:mm:ss.sTZD`, where TZD is `Z`
//! or `±hh:mm`.

use chrono::NaiveDate;

pub fn is_w3cdtf(value: &str) -> bool {
    parse(value.as_bytes()).is_some()
}

fn digits(input: &[u8], n: usize) -> Option<(u32, &[u8])> {
    if input.len() < n || !input[..n].iter().all(u8::is_ascii_digit) {
        return None;
    }
    let v = input[..n].iter().fold(0u32, |acc, d| acc * 10 + u32::from(d - b'0'));
    Some((v, &input[n..]))
}

fn expect(input: &[u8], c: u8) -> Option<&[u8]> {
    input.split_first().filter(|(h, _)| **h == c).map(|(_, rest)| rest)
}

fn parse(input: &[u8]) -> Option<()> {
    let (year, rest) = digits(input, 4)?;
    if rest.is_empty() {
        return Some(());
    }
    let (month, rest) = digits(expect(rest, b'-')?, 2)?;
    if !(1..=12).contains(&month) {
        return None;
    }
    if rest.is_empty() {
        return Some(());
    }
    let (day, rest) = digits(expect(rest, b'-')?, 2)?;
    NaiveDate::from_ymd_opt(year as i32, month, day)?;
    if rest.is_empty() {
        return Some(());
    }
    let (hour, rest) = digits(expect(rest, b'T')?, 2)?;
    let (minute, mut rest) = digits(expect(rest, b':')?, 2)?;
    if hour > 23 || minute > 59 {
        return None;
    }
    if let Some(after) = expect(rest, b':') {
        let (second, after) = digits(after, 2)?;
        if second > 59 {
            return None;
        }
        rest = after;
        if let Some(after) = expect(rest, b'.') {
            let n = after.iter().take_while(|c| c.is_ascii_digit()).count();
            if n == 0 {
                return None;
            }
            rest = &after[n..];
        }
    }
    timezone(rest)
}

fn timezone(input: &[u8]) -> Option<()> {
    match input.split_first()? {
        (b'Z', []) => Some(()),
        (b'+' | b'-', rest) => {
            let (h, rest) = digits(rest, 2)?;
            let (m, rest) = digits(expect(rest, b':')?, 2)?;
            (h <= 23 && m <= 59 && rest.is_empty()).then_some(())
        }
        _ => None,
    }
}
