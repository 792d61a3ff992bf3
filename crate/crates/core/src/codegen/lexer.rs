//! Tokenizer for the subset of JavaScript the signature scanner needs.
//!
//! Comments are dropped; string, template and regex literals become opaque
//! tokens so nothing inside them can look like a declaration.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Ident,
    Punct,
    Number,
    Str,
    Template,
    Regex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tok {
    pub kind: Kind,
    pub text: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// A line break separates this token from the previous one.
    pub newline_before: bool,
}

impl Tok {
    pub fn is(&self, text: &str) -> bool {
        self.kind != Kind::Str && self.kind != Kind::Template && self.kind != Kind::Regex && self.text == text
    }

    pub fn is_ident(&self) -> bool {
        self.kind == Kind::Ident
    }
}

/// Lexing problems; the lexer recovers and keeps going.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexIssue {
    pub line: usize,
    pub message: String,
}

const PUNCTS: [&str; 52] = [
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "??=", "=>", "==", "!=", "<=", ">=", "&&",
    "||", "??", "?.", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "**", "<<", ">>", "{", "}", "(", ")",
    "[", "]", ";", ",", "<", ">", "+", "-", "*", "%", "&", "|", "^", "!", "~",
];
const SINGLE: [&str; 5] = ["?", ":", "=", ".", "/"];

// Keywords after which a `/` starts a regex rather than a division.
const REGEX_AFTER_KEYWORDS: [&str; 14] = [
    "return",
    "typeof",
    "case",
    "do",
    "else",
    "in",
    "instanceof",
    "new",
    "delete",
    "void",
    "throw",
    "yield",
    "await",
    "of",
];

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphanumeric()
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    saw_newline: bool,
    out: Vec<Tok>,
    issues: &'a mut Vec<LexIssue>,
}

impl Lexer<'_> {
    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.saw_newline = true;
        }
        Some(c)
    }

    fn push(&mut self, kind: Kind, text: String, line: usize) {
        let newline_before = std::mem::take(&mut self.saw_newline) && !self.out.is_empty();
        self.out.push(Tok {
            kind,
            text,
            line,
            newline_before,
        });
    }

    fn regex_allowed(&self) -> bool {
        match self.out.last() {
            None => true,
            Some(t) => match t.kind {
                Kind::Number | Kind::Str | Kind::Template | Kind::Regex => false,
                Kind::Ident => REGEX_AFTER_KEYWORDS.contains(&t.text.as_str()),
                Kind::Punct => !matches!(t.text.as_str(), ")" | "]" | "}" | "++" | "--"),
            },
        }
    }

    fn skip_line_comment(&mut self) {
        while let Some(c) = self.peek(0) {
            if c == '\n' {
                break;
            }
            self.pos += 1;
        }
    }

    fn skip_block_comment(&mut self, line: usize) {
        self.pos += 2;
        loop {
            match self.peek(0) {
                None => {
                    self.issues.push(LexIssue {
                        line,
                        message: "unterminated block comment".into(),
                    });
                    return;
                }
                Some('*') if self.peek(1) == Some('/') => {
                    self.pos += 2;
                    return;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn string(&mut self, quote: char, line: usize) {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.peek(0) {
                None | Some('\n') => {
                    self.issues.push(LexIssue {
                        line,
                        message: "unterminated string literal".into(),
                    });
                    break;
                }
                Some('\\') => {
                    self.bump();
                    self.bump();
                }
                Some(c) if c == quote => {
                    self.pos += 1;
                    break;
                }
                _ => {
                    self.bump();
                }
            }
        }
        let text = self.chars[start..self.pos].iter().collect();
        self.push(Kind::Str, text, line);
    }

    fn template(&mut self, line: usize) {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.peek(0) {
                None => {
                    self.issues.push(LexIssue {
                        line,
                        message: "unterminated template literal".into(),
                    });
                    break;
                }
                Some('\\') => {
                    self.bump();
                    self.bump();
                }
                Some('`') => {
                    self.pos += 1;
                    break;
                }
                Some('$') if self.peek(1) == Some('{') => {
                    self.pos += 2;
                    self.skip_substitution();
                }
                _ => {
                    self.bump();
                }
            }
        }
        let text = self.chars[start..self.pos].iter().collect();
        self.push(Kind::Template, text, line);
    }

    /// Lexes and discards a `${ ... }` body, which may nest strings and templates.
    fn skip_substitution(&mut self) {
        let mark = self.out.len();
        let mut depth = 1usize;
        while depth > 0 {
            if !self.next_token() {
                break;
            }
            if let Some(t) = self.out.last() {
                if t.kind == Kind::Punct {
                    match t.text.as_str() {
                        "{" => depth += 1,
                        "}" => depth -= 1,
                        _ => {}
                    }
                }
            }
        }
        self.out.truncate(mark);
    }

    fn regex(&mut self, line: usize) {
        let start = self.pos;
        self.pos += 1;
        let mut in_class = false;
        loop {
            match self.peek(0) {
                None | Some('\n') => {
                    self.issues.push(LexIssue {
                        line,
                        message: "unterminated regular expression".into(),
                    });
                    break;
                }
                Some('\\') => {
                    self.pos += 2;
                }
                Some('[') => {
                    in_class = true;
                    self.pos += 1;
                }
                Some(']') => {
                    in_class = false;
                    self.pos += 1;
                }
                Some('/') if !in_class => {
                    self.pos += 1;
                    while self.peek(0).is_some_and(is_ident_char) {
                        self.pos += 1;
                    }
                    break;
                }
                _ => {
                    self.pos += 1;
                }
            }
        }
        let text = self.chars[start..self.pos.min(self.chars.len())].iter().collect();
        self.push(Kind::Regex, text, line);
    }

    /// Lexes one token (skipping trivia). Returns false at end of input.
    fn next_token(&mut self) -> bool {
        loop {
            let Some(c) = self.peek(0) else { return false };
            let line = self.line;
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '/' && self.peek(1) == Some('/') {
                self.skip_line_comment();
                continue;
            }
            if c == '/' && self.peek(1) == Some('*') {
                self.skip_block_comment(line);
                continue;
            }
            if c == '<' && self.peek(1) == Some('!') && self.peek(2) == Some('-') && self.peek(3) == Some('-') {
                self.skip_line_comment();
                continue;
            }
            if c == '#' && self.pos == 0 && self.peek(1) == Some('!') {
                self.skip_line_comment();
                continue;
            }
            if c == '"' || c == '\'' {
                self.string(c, line);
                return true;
            }
            if c == '`' {
                self.template(line);
                return true;
            }
            if c == '/' && self.regex_allowed() {
                self.regex(line);
                return true;
            }
            if is_ident_start(c) || c == '#' {
                let start = self.pos;
                self.pos += 1;
                while self.peek(0).is_some_and(is_ident_char) {
                    self.pos += 1;
                }
                let text = self.chars[start..self.pos].iter().collect();
                self.push(Kind::Ident, text, line);
                return true;
            }
            if c.is_ascii_digit() || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) {
                let start = self.pos;
                while self
                    .peek(0)
                    .is_some_and(|d| d.is_ascii_alphanumeric() || d == '.' || d == '_')
                {
                    self.pos += 1;
                }
                let text = self.chars[start..self.pos].iter().collect();
                self.push(Kind::Number, text, line);
                return true;
            }
            for p in PUNCTS.iter().chain(SINGLE.iter()) {
                let len = p.chars().count();
                if self.chars[self.pos..].iter().take(len).copied().eq(p.chars()) {
                    self.pos += len;
                    self.push(Kind::Punct, p.to_string(), line);
                    return true;
                }
            }
            // Unknown character: keep it as punctuation so structure is not lost.
            self.pos += 1;
            self.push(Kind::Punct, c.to_string(), line);
            return true;
        }
    }
}

pub fn lex(source: &str) -> (Vec<Tok>, Vec<LexIssue>) {
    let mut issues = Vec::new();
    let mut lexer = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        saw_newline: false,
        out: Vec::new(),
        issues: &mut issues,
    };
    while lexer.next_token() {}
    let out = lexer.out;
    (out, issues)
}
