//! Rule-based recognizers for dates and numbers.
//!
//! Dates are relative expressions without a reference clock, so normalized
//! values are canonical strings rather than calendar dates:
//!
//! | surface            | normalized      |
//! |--------------------|-----------------|
//! | `Tuesday`          | `tuesday`       |
//! | `today`/`tomorrow` | `today`/`tomorrow` |
//! | `next Tuesday`     | `next tuesday`  |
//! | `next week`        | `next week`     |
//! | `three days`       | `P3D`           |
//! | `6PM`, `6:30 pm`   | `18:00`, `18:30`|
//! | `18:45`            | `18:45`         |

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RecognizerKind {
    Date,
    Number,
}

/// A recognizer match over `[start, end)` characters of the utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BuiltinHit {
    pub kind: RecognizerKind,
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub normalized: String,
}

impl BuiltinHit {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }
}

const WEEKDAYS: [&str; 7] = [
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];

const SPELLED: [&str; 20] = [
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
];

/// Integer value of a digit literal or a spelled number one through twenty.
pub fn parse_number(word: &str) -> Option<u64> {
    let lower = word.to_lowercase();
    if !lower.is_empty() && lower.chars().all(|c| c.is_ascii_digit()) {
        return lower.parse().ok();
    }
    SPELLED.iter().position(|s| *s == lower).map(|i| i as u64 + 1)
}

fn clock(hour: u32, minute: u32, meridiem: Option<&str>) -> Option<String> {
    if minute > 59 {
        return None;
    }
    let hour = match meridiem {
        Some(m) => {
            if !(1..=12).contains(&hour) {
                return None;
            }
            match (m, hour) {
                ("am", 12) => 0,
                ("am", h) => h,
                ("pm", 12) => 12,
                ("pm", h) => h + 12,
                _ => return None,
            }
        }
        None if hour <= 23 => hour,
        None => return None,
    };
    Some(format!("{hour:02}:{minute:02}"))
}

/// Splits "6", "6:30" into (hour, minute).
fn hour_minute(s: &str) -> Option<(u32, u32)> {
    let (h, m) = match s.split_once(':') {
        Some((h, m)) if m.len() == 2 => (h, m),
        Some(_) => return None,
        None => (s, "00"),
    };
    if h.is_empty() || h.len() > 2 || !h.chars().all(|c| c.is_ascii_digit()) || !m.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((h.parse().ok()?, m.parse().ok()?))
}

/// Clock time starting at token `i`; returns (tokens consumed, normalized).
fn match_clock(tokens: &[Token], i: usize) -> Option<(usize, String)> {
    let word = tokens[i].lower();
    for suffix in ["am", "pm"] {
        if let Some(num) = word.strip_suffix(suffix) {
            if let Some((h, m)) = hour_minute(num) {
                return clock(h, m, Some(suffix)).map(|v| (1, v));
            }
        }
    }
    let (h, m) = hour_minute(&word)?;
    if let Some(next) = tokens.get(i + 1) {
        let nw = next.lower();
        if nw == "am" || nw == "pm" {
            return clock(h, m, Some(&nw)).map(|v| (2, v));
        }
    }
    // A bare number is only a time when written with minutes.
    if word.contains(':') {
        return clock(h, m, None).map(|v| (1, v));
    }
    None
}

fn match_date(tokens: &[Token], i: usize) -> Option<(usize, String)> {
    let word = tokens[i].lower();
    let next = tokens.get(i + 1).map(Token::lower);
    if WEEKDAYS.contains(&word.as_str()) || word == "today" || word == "tomorrow" {
        return Some((1, word));
    }
    if word == "next" {
        if let Some(n) = &next {
            if WEEKDAYS.contains(&n.as_str()) || n == "week" || n == "month" {
                return Some((2, format!("next {n}")));
            }
        }
        return None;
    }
    if let (Some(count), Some(n)) = (parse_number(&word), &next) {
        if n == "days" || n == "day" {
            return Some((2, format!("P{count}D")));
        }
    }
    match_clock(tokens, i)
}

fn candidates(kind: RecognizerKind, text: &str) -> Vec<BuiltinHit> {
    let tokens = tokenize(text).tokens;
    let mut out = Vec::new();
    for i in 0..tokens.len() {
        let found = match kind {
            RecognizerKind::Date => match_date(&tokens, i),
            RecognizerKind::Number => parse_number(&tokens[i].surface).map(|n| (1, n.to_string())),
        };
        if let Some((consumed, normalized)) = found {
            let (start, end) = (tokens[i].start, tokens[i + consumed - 1].end);
            out.push(BuiltinHit {
                kind,
                start,
                end,
                text: super::tokenize::char_slice(text, start, end),
                normalized,
            });
        }
    }
    out
}

/// Keeps a non-overlapping subset: longer spans first, ties to the leftmost.
/// Result is ordered by position.
pub fn resolve_overlaps(mut hits: Vec<BuiltinHit>) -> Vec<BuiltinHit> {
    hits.sort_by(|a, b| b.len().cmp(&a.len()).then(a.start.cmp(&b.start)));
    let mut kept: Vec<BuiltinHit> = Vec::new();
    for h in hits {
        if !kept.iter().any(|k| k.overlaps(h.start, h.end)) {
            kept.push(h);
        }
    }
    kept.sort_by_key(|h| h.start);
    kept
}

/// Runs one recognizer over `text`.
pub fn recognize_builtin(kind: RecognizerKind, text: &str) -> Vec<BuiltinHit> {
    resolve_overlaps(candidates(kind, text))
}

/// The normalized value when a recognizer covers all of `text` (after trimming).
pub fn normalize_whole(kind: RecognizerKind, text: &str) -> Option<String> {
    let trimmed = text.trim();
    let hits = recognize_builtin(kind, trimmed);
    match hits.as_slice() {
        [only] if only.start == 0 && only.end == trimmed.chars().count() => Some(only.normalized.clone()),
        _ => None,
    }
}
