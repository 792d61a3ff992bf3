//! Recognizes function declarations and function-valued bindings at top
//! level and inside top-level blocks.

use serde::{Deserialize, Serialize};

use super::lexer::{lex, Kind, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FunctionSignature {
    pub name: String,
    pub parameters: Vec<String>,
    pub source_file: String,
    pub line_number: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub signatures: Vec<FunctionSignature>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FrameKind {
    /// Statement block whose direct children are still scanned.
    Block,
    /// Function body, object literal, class body and the like.
    Opaque,
    Paren,
    Bracket,
}

#[derive(Debug)]
struct Frame {
    kind: FrameKind,
    opener: usize,
    in_declaration: bool,
    switch_body: bool,
}

impl Frame {
    fn new(kind: FrameKind, opener: usize) -> Self {
        Frame {
            kind,
            opener,
            in_declaration: false,
            switch_body: false,
        }
    }
}

const BLOCK_PAREN_OWNERS: [&str; 6] = ["if", "for", "while", "with", "switch", "catch"];
const BLOCK_KEYWORDS: [&str; 4] = ["else", "try", "finally", "do"];
const STATEMENT_KEYWORDS: [&str; 14] = [
    "function", "if", "for", "while", "do", "return", "class", "export", "import", "switch", "try", "throw", "break",
    "continue",
];
const RESERVED: [&str; 8] = [
    "function",
    "return",
    "typeof",
    "new",
    "delete",
    "void",
    "in",
    "instanceof",
];

fn ends_expression(t: &Tok) -> bool {
    match t.kind {
        Kind::Number | Kind::Str | Kind::Template | Kind::Regex => true,
        Kind::Ident => !RESERVED.contains(&t.text.as_str()),
        Kind::Punct => matches!(t.text.as_str(), ")" | "]" | "}"),
    }
}

struct Scanner<'a> {
    toks: &'a [Tok],
    file: &'a str,
    report: ScanReport,
    /// For each `)` token, the token preceding its matching `(`.
    paren_owner: Vec<Option<usize>>,
}

impl Scanner<'_> {
    fn tok(&self, i: usize) -> Option<&Tok> {
        self.toks.get(i)
    }

    fn is(&self, i: usize, text: &str) -> bool {
        self.tok(i).is_some_and(|t| t.is(text))
    }

    fn warn(&mut self, line: usize, message: String) {
        self.report.diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            line,
            message,
        });
    }

    /// Whether a `function` (or `async function`) at `i` begins a declaration
    /// statement. `in_switch` allows a preceding `case ...:` label.
    fn at_statement_start(&self, mut i: usize, in_switch: bool) -> bool {
        if i > 0 && self.is(i - 1, "async") {
            i -= 1;
        }
        if i == 0 {
            return true;
        }
        let prev = &self.toks[i - 1];
        if prev.is(";") || prev.is("{") || prev.is("}") || prev.is("export") || prev.is("default") {
            return true;
        }
        if prev.is(":") && in_switch {
            return true;
        }
        self.toks[i].newline_before && ends_expression(prev)
    }

    /// Classifies the `{` at `i`; the flag marks a switch body.
    fn brace_kind(&self, i: usize, in_switch: bool) -> (FrameKind, bool) {
        let Some(prev_i) = i.checked_sub(1) else {
            return (FrameKind::Block, false);
        };
        let prev = &self.toks[prev_i];
        if prev.is(";") || prev.is("{") || prev.is("}") || (prev.is(":") && in_switch) {
            return (FrameKind::Block, false);
        }
        if prev.kind == Kind::Ident && BLOCK_KEYWORDS.contains(&prev.text.as_str()) {
            return (FrameKind::Block, false);
        }
        if prev.is(")") {
            if let Some(owner) = self.paren_owner[prev_i] {
                let owner = self.toks[owner].text.as_str();
                if BLOCK_PAREN_OWNERS.contains(&owner) {
                    return (FrameKind::Block, owner == "switch");
                }
            }
        }
        (FrameKind::Opaque, false)
    }

    /// Splits the parameter list opened at `open` and returns the names plus
    /// the index of the closing `)`.
    fn parameters(&mut self, open: usize) -> Option<(Vec<String>, usize)> {
        let mut depth = 0usize;
        let mut segments: Vec<Vec<usize>> = vec![Vec::new()];
        let mut i = open + 1;
        let close = loop {
            let t = self.tok(i)?;
            if t.kind == Kind::Punct {
                match t.text.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" if depth == 0 => break i,
                    ")" | "]" | "}" => depth = depth.saturating_sub(1),
                    "," if depth == 0 => {
                        segments.push(Vec::new());
                        i += 1;
                        continue;
                    }
                    _ => {}
                }
            }
            segments.last_mut().expect("non-empty").push(i);
            i += 1;
        };
        let mut names = Vec::new();
        for seg in segments.into_iter().filter(|s| !s.is_empty()) {
            let first = &self.toks[seg[0]];
            let name_tok = if first.is("...") {
                seg.get(1).map(|&j| &self.toks[j])
            } else {
                Some(first)
            };
            match name_tok {
                Some(t) if t.is_ident() => names.push(t.text.clone()),
                Some(t) if t.is("{") || t.is("[") => {
                    let line = t.line;
                    self.warn(line, "destructured parameter skipped".into());
                }
                _ => {
                    let line = first.line;
                    self.warn(line, format!("unrecognized parameter starting with `{}`", first.text));
                }
            }
        }
        Some((names, close))
    }

    fn record(&mut self, name_tok: usize, parameters: Vec<String>) {
        let t = &self.toks[name_tok];
        self.report.signatures.push(FunctionSignature {
            name: t.text.clone(),
            parameters,
            source_file: self.file.to_string(),
            line_number: t.line,
        });
    }

    /// `function [*] name (params)` starting at `i`.
    fn function_declaration(&mut self, i: usize) {
        let mut j = i + 1;
        if self.is(j, "*") {
            j += 1;
        }
        let Some(name) = self.tok(j).filter(|t| t.is_ident()) else {
            return;
        };
        let line = name.line;
        if !self.is(j + 1, "(") {
            self.warn(line, format!("expected `(` after function name `{}`", name.text));
            return;
        }
        match self.parameters(j + 1) {
            Some((params, _)) => self.record(j, params),
            None => self.warn(line, "unterminated parameter list".into()),
        }
    }

    /// One declarator `name = <function-valued initializer>` starting at `i`.
    fn declarator(&mut self, i: usize) {
        let Some(name) = self.tok(i) else { return };
        if name.is("{") || name.is("[") {
            return;
        }
        if !name.is_ident() || !self.is(i + 1, "=") {
            return;
        }
        let mut k = i + 2;
        if self.is(k, "async")
            && self
                .tok(k + 1)
                .is_some_and(|t| t.is("(") || t.is("function") || t.is_ident())
            && !self.is(k + 1, "=>")
        {
            k += 1;
        }
        let Some(init) = self.tok(k) else { return };
        if init.is("function") {
            let mut open = k + 1;
            if self.is(open, "*") {
                open += 1;
            }
            if self.tok(open).is_some_and(Tok::is_ident) {
                open += 1;
            }
            if self.is(open, "(") {
                if let Some((params, _)) = self.parameters(open) {
                    self.record(i, params);
                }
            }
        } else if init.is("(") {
            let before = self.report.diagnostics.len();
            if let Some((params, close)) = self.parameters(k) {
                if self.is(close + 1, "=>") {
                    self.record(i, params);
                    return;
                }
            }
            // A parenthesized expression, not an arrow: drop its diagnostics.
            self.report.diagnostics.truncate(before);
        } else if init.is_ident() && self.is(k + 1, "=>") {
            let param = init.text.clone();
            self.record(i, vec![param]);
        }
    }

    fn run(mut self) -> ScanReport {
        let mut stack = vec![Frame::new(FrameKind::Block, 0)];
        let toks = self.toks;
        for (i, t) in toks.iter().enumerate() {
            let eligible = stack.iter().all(|f| f.kind == FrameKind::Block);
            let in_switch = stack.last().is_some_and(|f| f.switch_body);
            if eligible && t.kind == Kind::Ident {
                let top = stack.last_mut().expect("root frame");
                if matches!(t.text.as_str(), "const" | "let" | "var") {
                    top.in_declaration = true;
                    self.declarator(i + 1);
                } else if STATEMENT_KEYWORDS.contains(&t.text.as_str()) {
                    top.in_declaration = false;
                    if t.text == "function" && self.at_statement_start(i, in_switch) {
                        self.function_declaration(i);
                    }
                }
            }
            if t.kind != Kind::Punct {
                continue;
            }
            match t.text.as_str() {
                "," if eligible && stack.last().is_some_and(|f| f.in_declaration) => self.declarator(i + 1),
                ";" => {
                    if let Some(top) = stack.last_mut() {
                        top.in_declaration = false;
                    }
                }
                "{" => {
                    let (kind, switch_body) = self.brace_kind(i, in_switch);
                    stack.push(Frame {
                        switch_body,
                        ..Frame::new(kind, i)
                    });
                }
                "(" => stack.push(Frame::new(FrameKind::Paren, i)),
                "[" => stack.push(Frame::new(FrameKind::Bracket, i)),
                ")" | "]" | "}" => {
                    let want = match t.text.as_str() {
                        ")" => FrameKind::Paren,
                        "]" => FrameKind::Bracket,
                        _ => FrameKind::Block,
                    };
                    let matches = |f: &Frame| match want {
                        FrameKind::Block => matches!(f.kind, FrameKind::Block | FrameKind::Opaque),
                        k => f.kind == k,
                    };
                    let line = t.line;
                    let text = t.text.clone();
                    match stack.iter().skip(1).rposition(matches) {
                        Some(pos) => {
                            let pos = pos + 1;
                            if pos + 1 != stack.len() {
                                self.warn(line, format!("unbalanced `{text}`; closing enclosing groups"));
                            }
                            let frame = stack.drain(pos..).next().expect("frame at pos");
                            if want == FrameKind::Paren {
                                self.paren_owner[i] = frame.opener.checked_sub(1);
                            }
                        }
                        None => self.warn(line, format!("unmatched `{text}` ignored")),
                    }
                }
                _ => {}
            }
        }
        if stack.len() > 1 {
            let line = self.toks[stack[1].opener].line;
            self.warn(line, "unclosed group at end of file".into());
        }
        self.report
    }
}

/// Lists the functions defined in `source`, in source order.
pub fn scan_functions(source: &str, file_path: &str) -> ScanReport {
    let (toks, issues) = lex(source);
    let scanner = Scanner {
        toks: &toks,
        file: file_path,
        report: ScanReport::default(),
        paren_owner: vec![None; toks.len()],
    };
    let mut report = scanner.run();
    let mut diagnostics: Vec<Diagnostic> = issues
        .into_iter()
        .map(|issue| Diagnostic {
            severity: Severity::Error,
            line: issue.line,
            message: issue.message,
        })
        .collect();
    diagnostics.append(&mut report.diagnostics);
    diagnostics.sort_by_key(|d| d.line);
    report.diagnostics = diagnostics;
    report
}
