//! Minimal s-expression reader with line/column tracking.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone)]
pub struct Sexpr {
    pub kind: SexprKind,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SexprKind {
    Atom(String),
    /// Double-quoted string literal.
    Str(String),
    List(Vec<Sexpr>),
}

impl PartialEq for Sexpr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}
impl Eq for Sexpr {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

impl ParseError {
    pub fn at(s: &Sexpr, msg: impl Into<String>) -> ParseError {
        ParseError { line: s.line, col: s.col, msg: msg.into() }
    }
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b';') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn read(&mut self) -> Result<Sexpr, ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let kind = match self.peek() {
            None => return Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.peek() {
                        None => return Err(self.error("unclosed (")),
                        Some(b')') => {
                            self.bump();
                            break SexprKind::List(items);
                        }
                        _ => items.push(self.read()?),
                    }
                }
            }
            Some(b')') => return Err(self.error("unexpected )")),
            Some(b'"') => {
                self.bump();
                let mut out = String::new();
                loop {
                    match self.bump() {
                        None => return Err(self.error("unclosed string literal")),
                        Some(b'"') => break SexprKind::Str(out),
                        Some(b'\\') => match self.bump() {
                            Some(b'"') => out.push('"'),
                            Some(b'\\') => out.push('\\'),
                            Some(b'n') => out.push('\n'),
                            _ => return Err(self.error("bad escape in string literal")),
                        },
                        Some(c) => out.push(c as char),
                    }
                }
            }
            Some(_) => {
                let mut out = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_whitespace() || c == b'(' || c == b')' || c == b'"' || c == b';'
                    {
                        break;
                    }
                    out.push(self.bump().unwrap() as char);
                }
                SexprKind::Atom(out)
            }
        };
        Ok(Sexpr { kind, line, col })
    }
}

/// Parse exactly one s-expression; trailing input is an error.
pub fn parse_one(src: &str) -> Result<Sexpr, ParseError> {
    let mut r = Reader::new(src);
    let s = r.read()?;
    r.skip_trivia();
    if r.peek().is_some() {
        return Err(r.error("trailing input after s-expression"));
    }
    Ok(s)
}

impl Sexpr {
    pub fn atom(&self) -> Option<&str> {
        match &self.kind {
            SexprKind::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn string(&self) -> Option<&str> {
        match &self.kind {
            SexprKind::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexpr]> {
        match &self.kind {
            SexprKind::List(items) => Some(items),
            _ => None,
        }
    }

    /// A list whose head atom is `tag`, yielding the remaining items.
    pub fn tagged(&self, tag: &str) -> Option<&[Sexpr]> {
        let items = self.list()?;
        match items.split_first() {
            Some((head, rest)) if head.atom() == Some(tag) => Some(rest),
            _ => None,
        }
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SexprKind::Atom(a) => write!(f, "{a}"),
            SexprKind::Str(s) => {
                write!(f, "\"")?;
                for c in s.chars() {
                    match c {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        '\n' => write!(f, "\\n")?,
                        _ => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"")
            }
            SexprKind::List(items) => {
                write!(f, "(")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let src = "(a (b \"two words\") ; comment\n 42)";
        let s = parse_one(src).unwrap();
        assert_eq!(s.to_string(), "(a (b \"two words\") 42)");
        assert_eq!(parse_one(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn errors_carry_position() {
        let err = parse_one("(a\n(b").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.msg.contains("unclosed"));
        assert!(parse_one("a b").is_err());
    }

    #[test]
    fn spans_point_at_tokens() {
        let s = parse_one("(abc\n  def)").unwrap();
        let items = s.list().unwrap();
        assert_eq!((items[1].line, items[1].col), (2, 3));
    }
}
