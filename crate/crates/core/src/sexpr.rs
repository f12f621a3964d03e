//! A small s-expression reader shared by the datum dump format, table files
//! and schema sources.
//!
//! Surface syntax:
//!
//! ```text
//! ( ... )      list
//! [ ... ]      vector
//! "..."        string, with \" and \\ escapes
//! -12, 7       integers
//! :foo         keyword
//! foo          symbol (case-insensitive)
//! #uninit      the uninitialized value
//! 'foo         quote prefix, accepted and ignored
//! ; ...        comment to end of line
//! ```

use std::fmt;

use thiserror::Error;

use crate::symbol::Symbol;

/// A location in source text. `line` and `column` are 1-based; `offset` is a
/// byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SexpKind {
    List(Vec<Sexp>),
    Vector(Vec<Sexp>),
    Symbol(Symbol),
    Keyword(Symbol),
    Str(String),
    Int(i64),
    Uninit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sexp {
    pub kind: SexpKind,
    pub pos: Pos,
}

impl Sexp {
    pub fn as_list(&self) -> Option<&[Sexp]> {
        match &self.kind {
            SexpKind::List(items) => Some(items),
            _ => None,
        }
    }

    /// Symbol or keyword, colon stripped.
    pub fn as_name(&self) -> Option<&Symbol> {
        match &self.kind {
            SexpKind::Symbol(s) | SexpKind::Keyword(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_keyword(&self) -> Option<&Symbol> {
        match &self.kind {
            SexpKind::Keyword(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match &self.kind {
            SexpKind::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self.kind {
            SexpKind::Int(n) => Some(n),
            _ => None,
        }
    }

    /// Short human description used in error messages.
    pub fn describe(&self) -> String {
        match &self.kind {
            SexpKind::List(items) => match items.first().and_then(Sexp::as_name) {
                Some(head) => format!("({head} ...)"),
                None => "list".to_string(),
            },
            SexpKind::Vector(_) => "vector".to_string(),
            SexpKind::Symbol(s) => format!("symbol `{s}`"),
            SexpKind::Keyword(s) => format!("keyword `:{s}`"),
            SexpKind::Str(_) => "string".to_string(),
            SexpKind::Int(n) => format!("integer {n}"),
            SexpKind::Uninit => "#uninit".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ReadError {
    pub pos: Pos,
    pub message: String,
}

struct Reader<'a> {
    src: &'a str,
    bytes: &'a [u8],
    i: usize,
    line: usize,
    col: usize,
}

fn is_delimiter(b: u8) -> bool {
    b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b'[' | b']' | b'"' | b';' | b'\'')
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader {
            src,
            bytes: src.as_bytes(),
            i: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            offset: self.i,
            line: self.line,
            column: self.col,
        }
    }

    fn err(&self, pos: Pos, message: impl Into<String>) -> ReadError {
        ReadError {
            pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.i).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.src[self.i..].chars().next()?;
        self.i += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.bump();
            } else if b == b';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_trivia();
        self.i >= self.bytes.len()
    }

    fn read(&mut self) -> Result<Sexp, ReadError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(b) = self.peek() else {
            return Err(self.err(pos, "unexpected end of input"));
        };
        match b {
            b'(' => {
                self.bump();
                let items = self.read_seq(b')', pos)?;
                Ok(Sexp {
                    kind: SexpKind::List(items),
                    pos,
                })
            }
            b'[' => {
                self.bump();
                let items = self.read_seq(b']', pos)?;
                Ok(Sexp {
                    kind: SexpKind::Vector(items),
                    pos,
                })
            }
            b')' | b']' => Err(self.err(pos, format!("unexpected `{}`", b as char))),
            b'"' => {
                self.bump();
                let s = self.read_string(pos)?;
                Ok(Sexp {
                    kind: SexpKind::Str(s),
                    pos,
                })
            }
            b'\'' => {
                self.bump();
                let inner = self.read()?;
                match inner.kind {
                    SexpKind::Symbol(_) | SexpKind::Keyword(_) => Ok(inner),
                    _ => Err(self.err(pos, "quote may only prefix a symbol")),
                }
            }
            _ => self.read_atom(pos),
        }
    }

    fn read_seq(&mut self, close: u8, open: Pos) -> Result<Vec<Sexp>, ReadError> {
        let mut items = Vec::new();
        loop {
            self.skip_trivia();
            match self.peek() {
                None => {
                    return Err(self.err(
                        self.pos(),
                        format!("unterminated form opened at {open}"),
                    ))
                }
                Some(b) if b == close => {
                    self.bump();
                    return Ok(items);
                }
                Some(b')') | Some(b']') => {
                    return Err(self.err(self.pos(), "mismatched closing delimiter"))
                }
                Some(_) => items.push(self.read()?),
            }
        }
    }

    fn read_string(&mut self, open: Pos) -> Result<String, ReadError> {
        let mut out = String::new();
        loop {
            let here = self.pos();
            match self.bump() {
                None => {
                    return Err(self.err(here, format!("unterminated string opened at {open}")))
                }
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some(c) => return Err(self.err(here, format!("unknown escape `\\{c}`"))),
                    None => {
                        return Err(self.err(here, format!("unterminated string opened at {open}")))
                    }
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn read_atom(&mut self, pos: Pos) -> Result<Sexp, ReadError> {
        let start = self.i;
        while let Some(b) = self.peek() {
            if is_delimiter(b) {
                break;
            }
            self.bump();
        }
        let text = &self.src[start..self.i];
        let kind = if text.eq_ignore_ascii_case("#uninit") {
            SexpKind::Uninit
        } else if is_integer(text) {
            let n = text
                .parse::<i64>()
                .map_err(|_| self.err(pos, format!("integer `{text}` out of range")))?;
            SexpKind::Int(n)
        } else if let Some(rest) = text.strip_prefix(':') {
            if rest.is_empty() {
                return Err(self.err(pos, "empty keyword"));
            }
            SexpKind::Keyword(Symbol::new(rest))
        } else if text.starts_with('#') {
            return Err(self.err(pos, format!("unknown token `{text}`")));
        } else {
            SexpKind::Symbol(Symbol::new(text))
        };
        Ok(Sexp { kind, pos })
    }
}

fn is_integer(text: &str) -> bool {
    let digits = text.strip_prefix('-').unwrap_or(text);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Reads every top-level form in `src`.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, ReadError> {
    let mut r = Reader::new(src);
    let mut out = Vec::new();
    while !r.at_end() {
        out.push(r.read()?);
    }
    Ok(out)
}

/// Reads exactly one form; anything but trivia after it is an error.
pub fn read_one(src: &str) -> Result<Sexp, ReadError> {
    let mut r = Reader::new(src);
    let form = r.read()?;
    if !r.at_end() {
        return Err(r.err(r.pos(), "trailing input after datum"));
    }
    Ok(form)
}

/// Writes `sym` bare when it reads back as the same symbol, quoted otherwise.
pub fn write_symbol(out: &mut String, sym: &Symbol) {
    let text = sym.as_str();
    let bare = !text.is_empty()
        && !text.bytes().any(is_delimiter)
        && !text.starts_with([':', '#'])
        && !is_integer(text);
    if bare {
        out.push_str(text);
    } else {
        write_string(out, text);
    }
}

/// Writes `s` as a quoted string literal.
pub fn write_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}
