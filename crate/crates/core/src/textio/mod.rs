//! Surface syntax: signature files, AVM descriptions and canonical printing.
//!
//! Identifiers are runs of letters, digits, `_`, `+`, `-` and `'` that do not
//! start with a digit, so `+`, `-` and `t''` are ordinary names. `%` starts
//! a comment that runs to the end of the line.

mod avm;
mod print;
mod signature;

use std::fmt;

use thiserror::Error;

pub use avm::{parse_avm, parse_drfs, AvmError};
pub use print::{print_drfs, print_graph};
pub use signature::parse_signature;

/// A region of the input, for diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    /// 1-based.
    pub line: usize,
    /// 1-based, in characters.
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError { message: message.into(), span }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u32),
    Punct(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Punct(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '+' | '-' | '\'')
}

const PUNCT: &str = ".{}:(),=#$<>|";

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&(start, c)) = chars.peek() {
        let here = |end: usize| SourceSpan { start, end, line, column };
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if c == '%' {
            while chars.peek().is_some_and(|&(_, c)| c != '\n') {
                chars.next();
            }
            continue;
        }
        if PUNCT.contains(c) {
            chars.next();
            tokens.push(Token { tok: Tok::Punct(c), span: here(start + c.len_utf8()) });
            column += 1;
            continue;
        }
        if c.is_ascii_digit() || is_ident_char(c) {
            let numeric = c.is_ascii_digit();
            let mut end = start;
            let mut width = 0;
            while let Some(&(i, c)) = chars.peek() {
                let more = if numeric { c.is_ascii_digit() } else { is_ident_char(c) };
                if !more {
                    break;
                }
                chars.next();
                end = i + c.len_utf8();
                width += 1;
            }
            let word = &text[start..end];
            let tok = if numeric {
                Tok::Int(word.parse().map_err(|_| ParseError::new(format!("number `{word}` out of range"), here(end)))?)
            } else {
                Tok::Ident(word.to_owned())
            };
            tokens.push(Token { tok, span: here(end) });
            column += width;
            continue;
        }
        return Err(ParseError::new(format!("unexpected character `{c}`"), here(start + c.len_utf8())));
    }
    let end = SourceSpan { start: text.len(), end: text.len(), line, column };
    tokens.push(Token { tok: Tok::End, span: end });
    Ok(tokens)
}

struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Cursor { tokens: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_punct(&self, c: char) -> bool {
        *self.peek() == Tok::Punct(c)
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.at_punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<SourceSpan, ParseError> {
        if self.at_punct(c) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self, what: &str) -> Result<(u32, SourceSpan), ParseError> {
        match *self.peek() {
            Tok::Int(n) => Ok((n, self.bump().span)),
            _ => Err(self.unexpected(what)),
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::new(format!("expected {expected}, found {}", self.peek()), self.span())
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::End => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }
}
