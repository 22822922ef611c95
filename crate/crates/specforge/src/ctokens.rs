//! C-aware lexer that partitions source into code tokens, plain comments,
//! ACSL annotation spans, and whitespace, plus the code-level equivalence
//! check built on top of it.
//!
//! The lexer is lossless: concatenating the text of every token reproduces
//! the input byte for byte. It does not parse C — it only needs to keep
//! string/char literals intact, recognize the two ACSL comment forms
//! (`/*@ … */` and `//@ …`), and treat a preprocessor directive as a single
//! code token.

use serde::Serialize;
use thiserror::Error;

/// Classification of a lexed span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenClass {
    Code,
    Comment,
    AcslBlock,
    AcslLine,
    Whitespace,
}

/// Source location of a token: byte range plus 1-based line/column of its start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Span {
    pub byte_start: usize,
    pub byte_end: usize,
    pub line: usize,
    pub col: usize,
}

/// One lexed span. Token texts are non-overlapping, sorted, and jointly
/// cover the input exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub class: TokenClass,
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexError {
    #[error("unterminated comment starting at line {line}")]
    UnterminatedComment { line: usize },
    #[error("unterminated string or character literal starting at line {line}")]
    UnterminatedLiteral { line: usize },
    #[error("trigraph sequence at line {line} is unsupported")]
    UnsupportedTrigraph { line: usize },
    #[error("backslash-newline line splicing at line {line} is unsupported")]
    UnsupportedLineSplice { line: usize },
}

const MULTI_CHAR_OPS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=",
    "-=", "*=", "/=", "%=", "&=", "^=", "|=", "##",
];

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

struct Scanner<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    /// Only whitespace seen since the last newline.
    at_line_start: bool,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            at_line_start: true,
        }
    }

    fn peek(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn starts_with(&self, pat: &str) -> bool {
        self.src[self.pos..].starts_with(pat)
    }

    /// Emit the token covering `[start, self.pos)` and advance line/col.
    fn emit(
        &mut self,
        class: TokenClass,
        start: usize,
        start_line: usize,
        start_col: usize,
    ) -> Token {
        let text = &self.src[start..self.pos];
        for b in text.bytes() {
            if b == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        Token {
            class,
            text: text.to_string(),
            span: Span {
                byte_start: start,
                byte_end: self.pos,
                line: start_line,
                col: start_col,
            },
        }
    }

    /// Advance to the byte after the closing `*/`, or error at end of input.
    fn block_comment(&mut self) -> Result<(), LexError> {
        let start_line = self.line;
        self.pos += 2; // skip "/*"
        loop {
            match self.peek(0) {
                Some(b'*') if self.peek(1) == Some(b'/') => {
                    self.pos += 2;
                    return Ok(());
                }
                Some(_) => self.pos += 1,
                None => return Err(LexError::UnterminatedComment { line: start_line }),
            }
        }
    }

    /// Advance to the end of the current line (newline excluded).
    fn advance_to_line_end(&mut self) {
        while let Some(b) = self.peek(0) {
            if b == b'\n' {
                break;
            }
            self.pos += 1;
        }
    }

    /// Advance past a quoted literal. `quote` is `"` or `'`.
    fn literal(&mut self, quote: u8) -> Result<(), LexError> {
        let start_line = self.line;
        self.pos += 1;
        loop {
            match self.peek(0) {
                Some(b'\\') => {
                    // Escape sequence: skip the backslash plus one byte.
                    if self.peek(1).is_none() {
                        return Err(LexError::UnterminatedLiteral { line: start_line });
                    }
                    self.pos += 2;
                }
                Some(b'\n') | None => {
                    return Err(LexError::UnterminatedLiteral { line: start_line })
                }
                Some(b) if b == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn number(&mut self) {
        // pp-number: digits, letters, dots, underscores, and exponent signs.
        self.pos += 1;
        while let Some(b) = self.peek(0) {
            if b.is_ascii_alphanumeric() || b == b'.' || b == b'_' {
                let exponent = matches!(b, b'e' | b'E' | b'p' | b'P');
                self.pos += 1;
                if exponent && matches!(self.peek(0), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }
}

/// Reject trigraphs and backslash-newline splicing before tokenizing.
fn prescan(src: &str) -> Result<(), LexError> {
    let bytes = src.as_bytes();
    let mut line = 1;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\n' => line += 1,
            b'\\' => {
                if bytes.get(i + 1) == Some(&b'\n')
                    || (bytes.get(i + 1) == Some(&b'\r') && bytes.get(i + 2) == Some(&b'\n'))
                {
                    return Err(LexError::UnsupportedLineSplice { line });
                }
            }
            b'?' if bytes.get(i + 1) == Some(&b'?') => {
                if let Some(b) = bytes.get(i + 2) {
                    if matches!(
                        b,
                        b'=' | b'/' | b'\'' | b'(' | b')' | b'!' | b'<' | b'>' | b'-'
                    ) {
                        return Err(LexError::UnsupportedTrigraph { line });
                    }
                }
            }
            _ => {}
        }
        i += 1;
    }
    Ok(())
}

/// Lex C source into a lossless token stream.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    prescan(source)?;
    let mut s = Scanner::new(source);
    let mut tokens = Vec::new();

    while let Some(b) = s.peek(0) {
        let start = s.pos;
        let (start_line, start_col) = (s.line, s.col);

        let class = if s.starts_with("/*@") {
            s.block_comment()?;
            TokenClass::AcslBlock
        } else if s.starts_with("/*") {
            s.block_comment()?;
            TokenClass::Comment
        } else if s.starts_with("//@") {
            s.advance_to_line_end();
            TokenClass::AcslLine
        } else if s.starts_with("//") {
            s.advance_to_line_end();
            TokenClass::Comment
        } else if b.is_ascii_whitespace() {
            while let Some(w) = s.peek(0) {
                if !w.is_ascii_whitespace() {
                    break;
                }
                s.pos += 1;
            }
            TokenClass::Whitespace
        } else if b == b'"' || b == b'\'' {
            s.literal(b)?;
            TokenClass::Code
        } else if b == b'#' && s.at_line_start {
            // One code token per preprocessor directive line.
            s.advance_to_line_end();
            TokenClass::Code
        } else if is_ident_start(b) {
            while let Some(c) = s.peek(0) {
                if !is_ident_continue(c) {
                    break;
                }
                s.pos += 1;
            }
            TokenClass::Code
        } else if b.is_ascii_digit() || (b == b'.' && s.peek(1).is_some_and(|c| c.is_ascii_digit()))
        {
            s.number();
            TokenClass::Code
        } else {
            let rest = &s.src[s.pos..];
            let op_len = MULTI_CHAR_OPS
                .iter()
                .find(|op| rest.starts_with(**op))
                .map_or(0, |op| op.len());
            if op_len > 0 {
                s.pos += op_len;
            } else {
                // Single byte of punctuation; multi-byte UTF-8 advances as a whole char.
                let ch_len = s.src[s.pos..].chars().next().map_or(1, char::len_utf8);
                s.pos += ch_len;
            }
            TokenClass::Code
        };

        let token = s.emit(class, start, start_line, start_col);
        s.at_line_start = match token.class {
            TokenClass::Whitespace => s.at_line_start || token.text.contains('\n'),
            _ => false,
        };
        tokens.push(token);
    }

    Ok(tokens)
}

/// The two tokens at the first point where the code-token streams differ.
/// A `None` side means that stream ended first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub left: Option<Token>,
    pub right: Option<Token>,
}

/// Result of comparing two files on their code tokens only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub equal: bool,
    pub first_divergence: Option<Divergence>,
}

/// Compare two sources on `Code` tokens alone, ignoring whitespace, plain
/// comments, and ACSL annotations. Reports the first differing token pair
/// when the files diverge.
pub fn code_token_equivalent(a: &str, b: &str) -> Result<Equivalence, LexError> {
    let ta = lex(a)?;
    let tb = lex(b)?;
    let mut ia = ta.iter().filter(|t| t.class == TokenClass::Code);
    let mut ib = tb.iter().filter(|t| t.class == TokenClass::Code);
    loop {
        match (ia.next(), ib.next()) {
            (None, None) => {
                return Ok(Equivalence {
                    equal: true,
                    first_divergence: None,
                })
            }
            (left, right) => {
                if left.map(|t| &t.text) != right.map(|t| &t.text) {
                    return Ok(Equivalence {
                        equal: false,
                        first_divergence: Some(Divergence {
                            left: left.cloned(),
                            right: right.cloned(),
                        }),
                    });
                }
            }
        }
    }
}

/// Concatenate token texts back into source.
pub fn join(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.text.as_str()).collect()
}

/// A top-level function definition located by brace tracking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    /// Byte offset of the name token.
    pub name_start: usize,
    /// Byte range of the braced body, inclusive of both braces.
    pub body_start: usize,
    pub body_end: usize,
}

const STMT_KEYWORDS: &[&str] = &[
    "if", "else", "for", "while", "do", "switch", "return", "sizeof", "case", "default", "goto",
];

/// Locate top-level function definitions: an identifier followed by a
/// balanced parameter list followed by `{`, outside any braces. This is
/// deliberately not a C parser; it is enough for the single-file programs
/// this tool works on.
pub fn function_definitions(tokens: &[Token]) -> Vec<FunctionDef> {
    let code: Vec<&Token> = tokens
        .iter()
        .filter(|t| t.class == TokenClass::Code)
        .collect();
    let mut defs = Vec::new();
    let mut depth = 0usize;
    let mut i = 0;
    while i < code.len() {
        let t = code[i];
        match t.text.as_str() {
            "{" => depth += 1,
            "}" => depth = depth.saturating_sub(1),
            _ => {
                if depth == 0
                    && t.text
                        .as_bytes()
                        .first()
                        .is_some_and(|b| is_ident_start(*b))
                    && !STMT_KEYWORDS.contains(&t.text.as_str())
                    && code.get(i + 1).is_some_and(|n| n.text == "(")
                {
                    let mut j = i + 1;
                    let mut paren = 0i32;
                    while j < code.len() {
                        match code[j].text.as_str() {
                            "(" => paren += 1,
                            ")" => {
                                paren -= 1;
                                if paren == 0 {
                                    break;
                                }
                            }
                            _ => {}
                        }
                        j += 1;
                    }
                    if paren == 0 && code.get(j + 1).is_some_and(|n| n.text == "{") {
                        let mut k = j + 1;
                        let mut braces = 0i32;
                        let mut body_end = code[j + 1].span.byte_end;
                        while k < code.len() {
                            match code[k].text.as_str() {
                                "{" => braces += 1,
                                "}" => {
                                    braces -= 1;
                                    if braces == 0 {
                                        body_end = code[k].span.byte_end;
                                        break;
                                    }
                                }
                                _ => {}
                            }
                            k += 1;
                        }
                        defs.push(FunctionDef {
                            name: t.text.clone(),
                            name_start: t.span.byte_start,
                            body_start: code[j + 1].span.byte_start,
                            body_end,
                        });
                        i = k + 1;
                        depth = 0;
                        continue;
                    }
                }
            }
        }
        i += 1;
    }
    defs
}
