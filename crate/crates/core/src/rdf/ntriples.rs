//! Line-oriented N-Triples reader.

use std::collections::HashMap;
use std::io::BufRead;

use super::term::{Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct NTriplesError {
    pub line: usize,
    pub message: String,
}

pub type TermTriple = (Term, Term, Term);

/// Streams statements from a reader. Blank node labels are renamed to
/// `_:b{n}` in first-seen order, so two documents using the same labels map
/// to the same IRIs only if the labels appear in the same order.
pub struct NTriplesReader<R> {
    input: R,
    line_no: usize,
    buf: Vec<u8>,
    blank_nodes: HashMap<String, String>,
    failed: bool,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(input: R) -> Self {
        NTriplesReader {
            input,
            line_no: 0,
            buf: Vec::new(),
            blank_nodes: HashMap::new(),
            failed: false,
        }
    }

    fn error(&mut self, message: impl Into<String>) -> NTriplesError {
        self.failed = true;
        NTriplesError {
            line: self.line_no,
            message: message.into(),
        }
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<TermTriple, NTriplesError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.input.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.line_no += 1;
                    return Some(Err(self.error(format!("read failed: {e}"))));
                }
            }
            self.line_no += 1;
            let line = match std::str::from_utf8(&self.buf) {
                Ok(line) => line.to_owned(),
                Err(_) => return Some(Err(self.error("invalid UTF-8"))),
            };
            let mut cursor = Cursor {
                rest: line.trim_end_matches(['\n', '\r']),
                blank_nodes: &mut self.blank_nodes,
            };
            cursor.skip_ws();
            if cursor.rest.is_empty() || cursor.rest.starts_with('#') {
                continue;
            }
            return Some(cursor.statement().map_err(|m| self.error(m)));
        }
    }
}

/// Parses a whole document held in memory.
pub fn parse_ntriples(text: &str) -> Result<Vec<TermTriple>, NTriplesError> {
    NTriplesReader::new(text.as_bytes()).collect()
}

struct Cursor<'a, 'b> {
    rest: &'a str,
    blank_nodes: &'b mut HashMap<String, String>,
}

impl Cursor<'_, '_> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn peek(&self) -> Option<char> {
        self.rest.chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.rest = &self.rest[c.len_utf8()..];
        Some(c)
    }

    fn statement(&mut self) -> Result<TermTriple, String> {
        let subject = match self.peek() {
            Some('<') => Term::Iri(self.iri()?),
            Some('_') => self.blank_node()?,
            _ => return Err("expected IRI or blank node as subject".into()),
        };
        self.skip_ws();
        let predicate = match self.peek() {
            Some('<') => Term::Iri(self.iri()?),
            _ => return Err("expected IRI as predicate".into()),
        };
        self.skip_ws();
        let object = match self.peek() {
            Some('<') => Term::Iri(self.iri()?),
            Some('_') => self.blank_node()?,
            Some('"') => self.literal()?,
            Some(c) => return Err(format!("unexpected character {c:?} in object position")),
            None => return Err("statement truncated before object".into()),
        };
        self.skip_ws();
        if self.bump() != Some('.') {
            return Err("expected '.' at end of statement".into());
        }
        self.skip_ws();
        if !(self.rest.is_empty() || self.rest.starts_with('#')) {
            return Err(format!("trailing content after '.': {:?}", self.rest));
        }
        Ok((subject, predicate, object))
    }

    fn iri(&mut self) -> Result<String, String> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated IRI".into()),
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => out.push(self.hex_escape(4)?),
                    Some('U') => out.push(self.hex_escape(8)?),
                    _ => return Err("invalid escape in IRI".into()),
                },
                Some(c @ (' ' | '<' | '"' | '{' | '}' | '|' | '^' | '`')) => {
                    return Err(format!("character {c:?} not allowed in IRI"))
                }
                Some(c) if (c as u32) <= 0x20 => return Err("control character in IRI".into()),
                Some(c) => out.push(c),
            }
        }
        if out.is_empty() {
            return Err("empty IRI".into());
        }
        Ok(out)
    }

    fn blank_node(&mut self) -> Result<Term, String> {
        if !self.rest.starts_with("_:") {
            return Err("expected '_:' blank node prefix".into());
        }
        self.rest = &self.rest[2..];
        let end = self
            .rest
            .find(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '.')))
            .unwrap_or(self.rest.len());
        let mut label = &self.rest[..end];
        while let Some(stripped) = label.strip_suffix('.') {
            label = stripped;
        }
        if label.is_empty() {
            return Err("empty blank node label".into());
        }
        self.rest = &self.rest[label.len()..];
        let next = self.blank_nodes.len();
        let iri = self
            .blank_nodes
            .entry(label.to_owned())
            .or_insert_with(|| format!("_:b{next}"))
            .clone();
        Ok(Term::Iri(iri))
    }

    fn literal(&mut self) -> Result<Term, String> {
        self.bump();
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated literal".into()),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err("invalid escape in literal".into()),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        if let Some(rest) = self.rest.strip_prefix("^^") {
            self.rest = rest;
            if self.peek() != Some('<') {
                return Err("expected datatype IRI after '^^'".into());
            }
            let datatype = self.iri()?;
            Ok(Term::Literal(Literal::typed(lexical, datatype)))
        } else if let Some(rest) = self.rest.strip_prefix('@') {
            let end = rest
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                .unwrap_or(rest.len());
            let tag = &rest[..end];
            let well_formed = !tag.is_empty()
                && tag.split('-').all(|part| !part.is_empty())
                && tag.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
            if !well_formed {
                return Err("malformed language tag".into());
            }
            self.rest = &rest[end..];
            Ok(Term::Literal(Literal::lang(lexical, tag)))
        } else {
            Ok(Term::Literal(Literal::simple(lexical)))
        }
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, String> {
        let hex = self
            .rest
            .get(..digits)
            .ok_or_else(|| "truncated unicode escape".to_string())?;
        let code =
            u32::from_str_radix(hex, 16).map_err(|_| "invalid unicode escape".to_string())?;
        self.rest = &self.rest[digits..];
        char::from_u32(code).ok_or_else(|| format!("invalid code point U+{code:X}"))
    }
}
