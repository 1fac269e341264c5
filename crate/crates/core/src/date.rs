//! Calendar-date handling for the `date*` fields.

use alloc::string::String;

fn is_leap(year: u32) -> bool {
    (year.is_multiple_of(4) && !year.is_multiple_of(100)) || year.is_multiple_of(400)
}

fn days_in_month(year: u32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

fn digits(s: &[u8]) -> Option<u32> {
    s.iter().try_fold(0u32, |acc, b| b.is_ascii_digit().then(|| acc * 10 + u32::from(b - b'0')))
}

/// Whether `s` is exactly a valid `YYYY-MM-DD` date.
pub fn is_calendar_date(s: &str) -> bool {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return false;
    }
    match (digits(&b[0..4]), digits(&b[5..7]), digits(&b[8..10])) {
        (Some(y), Some(m), Some(d)) => (1..=12).contains(&m) && d >= 1 && d <= days_in_month(y, m),
        _ => false,
    }
}

/// Reduces an ISO-8601 date or timestamp to its `YYYY-MM-DD` prefix.
///
/// Accepts a bare date or a date followed by a time part (`T` or a space).
/// Returns `None` for anything else.
pub fn normalize_date(s: &str) -> Option<String> {
    let s = s.trim();
    let prefix = s.get(..10)?;
    if !is_calendar_date(prefix) {
        return None;
    }
    match s.as_bytes().get(10) {
        None | Some(b'T') | Some(b't') | Some(b' ') => Some(prefix.into()),
        _ => None,
    }
}
