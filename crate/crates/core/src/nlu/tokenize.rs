//! Whitespace + punctuation tokenizer with character offsets.
//!
//! Offsets are Unicode scalar indices into the original text so labeled spans
//! can be mapped back to the raw utterance without worrying about UTF-8 widths.

use serde::{Deserialize, Serialize};

/// One token with its `[start, end)` character range in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Token {
    pub surface: String,
    #[serde(rename = "startChar")]
    pub start: usize,
    #[serde(rename = "endCharExclusive")]
    pub end: usize,
}

impl Token {
    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }

    /// True when the token is made only of punctuation/symbol characters.
    pub fn is_punct(&self) -> bool {
        self.surface.chars().all(|c| !c.is_alphanumeric())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedUtterance {
    pub text: String,
    pub tokens: Vec<Token>,
}

impl TokenizedUtterance {
    /// Index of the token starting exactly at `start`, if any.
    pub fn token_starting_at(&self, start: usize) -> Option<usize> {
        self.tokens.iter().position(|t| t.start == start)
    }

    /// Index of the token ending exactly at `end`, if any.
    pub fn token_ending_at(&self, end: usize) -> Option<usize> {
        self.tokens.iter().position(|t| t.end == end)
    }

    /// Whether `[start, end)` begins and ends on token boundaries.
    pub fn is_aligned(&self, start: usize, end: usize) -> bool {
        self.token_starting_at(start).is_some() && self.token_ending_at(end).is_some()
    }
}

// Punctuation kept inside a word when flanked by alphanumerics: "don't", "6:30", "e-mail", "3.5".
fn is_connector(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '.' | ':')
}

/// Splits on whitespace, then detaches every punctuation character into its
/// own token. No stemming or case folding; callers lowercase as needed.
pub fn tokenize(text: &str) -> TokenizedUtterance {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let chunk_start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_chunk(&chars, chunk_start, i, &mut tokens);
    }
    TokenizedUtterance {
        text: text.to_string(),
        tokens,
    }
}

fn split_chunk(chars: &[char], start: usize, end: usize, out: &mut Vec<Token>) {
    let mut word_start: Option<usize> = None;
    let flush = |from: Option<usize>, to: usize, out: &mut Vec<Token>| {
        if let Some(s) = from {
            out.push(Token {
                surface: chars[s..to].iter().collect(),
                start: s,
                end: to,
            });
        }
    };
    for i in start..end {
        let c = chars[i];
        let inner_connector = is_connector(c)
            && i > start
            && i + 1 < end
            && chars[i - 1].is_alphanumeric()
            && chars[i + 1].is_alphanumeric();
        if c.is_alphanumeric() || inner_connector {
            word_start.get_or_insert(i);
        } else {
            flush(word_start.take(), i, out);
            out.push(Token {
                surface: c.to_string(),
                start: i,
                end: i + 1,
            });
        }
    }
    flush(word_start, end, out);
}

/// Substring by character range. Out-of-range bounds are clamped.
pub fn char_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end.saturating_sub(start)).collect()
}

pub fn char_len(text: &str) -> usize {
    text.chars().count()
}
