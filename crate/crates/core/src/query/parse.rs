use indexmap::IndexMap;

use super::ast::{Field, InlineFragment, QueryAst, Selection, Value};
use super::{QueryError, QueryErrorKind as K};
use crate::syntax::{Pos, Token, Tokens};

pub const DEFAULT_DEPTH_LIMIT: usize = 32;

/// Parses a query document with the default nesting limit.
pub fn parse_query(text: &str) -> Result<QueryAst, QueryError> {
    parse_query_with_limit(text, DEFAULT_DEPTH_LIMIT)
}

/// Accepts a bare selection (`people { fname }`), a braced one, or
/// `query [Name] { ... }`.
pub fn parse_query_with_limit(text: &str, depth_limit: usize) -> Result<QueryAst, QueryError> {
    let mut p = Parser {
        toks: Tokens::new(text)?,
        depth_limit,
    };
    let selection = match p.toks.peek().clone() {
        Token::Punct('{') => p.selection_set(1)?,
        Token::Name(kw) if kw == "query" && !p.looks_like_field_start() => {
            p.toks.next();
            if let Token::Name(_) = p.toks.peek() {
                p.toks.next();
            }
            if p.toks.is_punct('(') {
                return Err(unsupported("variable definitions", p.toks.pos()));
            }
            if p.toks.is_punct('@') {
                return Err(unsupported("directives", p.toks.pos()));
            }
            p.selection_set(1)?
        }
        Token::Name(kw) if kw == "mutation" || kw == "subscription" => {
            return Err(unsupported(&format!("{kw} operations"), p.toks.pos()))
        }
        Token::Name(kw) if kw == "fragment" && matches!(p.toks.peek_at(1), Token::Name(_)) => {
            return Err(unsupported("named fragments", p.toks.pos()))
        }
        _ => {
            let mut sel = Vec::new();
            while !p.toks.at_eof() {
                sel.push(p.selection(1)?);
            }
            if sel.is_empty() {
                return Err(QueryError::new(
                    K::Syntax("empty query".into()),
                    p.toks.pos(),
                ));
            }
            sel
        }
    };
    if !p.toks.at_eof() {
        return Err(p.toks.unexpected("end of query").into());
    }
    Ok(QueryAst { selection })
}

fn unsupported(what: &str, pos: Pos) -> QueryError {
    QueryError::new(K::Unsupported(what.to_owned()), pos)
}

struct Parser {
    toks: Tokens,
    depth_limit: usize,
}

impl Parser {
    /// `query` followed by `:` or another field token is a field named query.
    fn looks_like_field_start(&self) -> bool {
        matches!(self.toks.peek_at(1), Token::Punct(':') | Token::Eof)
            || matches!(self.toks.peek_at(1), Token::Name(_))
                && !matches!(self.toks.peek_at(2), Token::Punct('{' | '(' | '@'))
    }

    fn selection_set(&mut self, depth: usize) -> Result<Vec<Selection>, QueryError> {
        let open = self.toks.expect_punct('{')?;
        if depth > self.depth_limit {
            return Err(QueryError::new(K::TooDeep(self.depth_limit), open));
        }
        let mut out = Vec::new();
        while !self.toks.eat_punct('}') {
            if self.toks.at_eof() {
                return Err(self.toks.unexpected("`}`").into());
            }
            out.push(self.selection(depth)?);
        }
        if out.is_empty() {
            return Err(QueryError::new(
                K::Syntax("empty selection set".into()),
                open,
            ));
        }
        Ok(out)
    }

    fn selection(&mut self, depth: usize) -> Result<Selection, QueryError> {
        let pos = self.toks.pos();
        match self.toks.peek().clone() {
            Token::Spread => {
                self.toks.next();
                if !self.toks.is_keyword("on") {
                    return match self.toks.peek() {
                        Token::Name(_) => Err(unsupported("named fragments", pos)),
                        _ => Err(unsupported("fragments without a type condition", pos)),
                    };
                }
                self.toks.next();
                self.fragment_body(pos, depth)
            }
            Token::Name(n)
                if n == "on"
                    && matches!(self.toks.peek_at(1), Token::Name(_))
                    && matches!(self.toks.peek_at(2), Token::Punct('{')) =>
            {
                self.toks.next();
                self.fragment_body(pos, depth)
            }
            Token::Name(_) => self.field(depth).map(Selection::Field),
            Token::Variable(_) => Err(unsupported("variables", pos)),
            _ => Err(self.toks.unexpected("a field or inline fragment").into()),
        }
    }

    fn fragment_body(&mut self, pos: Pos, depth: usize) -> Result<Selection, QueryError> {
        let (on, _) = self.toks.expect_name()?;
        self.no_directives()?;
        let selection = self.selection_set(depth + 1)?;
        Ok(Selection::Fragment(InlineFragment { on, selection, pos }))
    }

    fn no_directives(&self) -> Result<(), QueryError> {
        if self.toks.is_punct('@') {
            Err(unsupported("directives", self.toks.pos()))
        } else {
            Ok(())
        }
    }

    fn field(&mut self, depth: usize) -> Result<Field, QueryError> {
        let (first, pos) = self.toks.expect_name()?;
        let (alias, name) = if self.toks.eat_punct(':') {
            (Some(first), self.toks.expect_name()?.0)
        } else {
            (None, first)
        };
        let mut args = IndexMap::new();
        if self.toks.eat_punct('(') {
            while !self.toks.eat_punct(')') {
                let (arg, apos) = self.toks.expect_name()?;
                self.toks.expect_punct(':')?;
                let value = self.value()?;
                if args.insert(arg.clone(), value).is_some() {
                    return Err(QueryError::new(
                        K::DuplicateArgument { field: name, arg },
                        apos,
                    ));
                }
            }
        }
        self.no_directives()?;
        let selection = if self.toks.is_punct('{') {
            Some(self.selection_set(depth + 1)?)
        } else {
            None
        };
        Ok(Field {
            alias,
            name,
            args,
            selection,
            pos,
        })
    }

    fn value(&mut self) -> Result<Value, QueryError> {
        let pos = self.toks.pos();
        Ok(match self.toks.next().0 {
            Token::Str(s) => Value::String(s),
            Token::Int(s) => Value::Int(s),
            Token::Float(s) => Value::Float(s),
            Token::Name(n) if n == "true" => Value::Boolean(true),
            Token::Name(n) if n == "false" => Value::Boolean(false),
            Token::Variable(_) => return Err(unsupported("variables", pos)),
            Token::Punct('[' | '{') => {
                return Err(unsupported("list and object argument values", pos))
            }
            Token::Name(n) if n == "null" => return Err(unsupported("null argument values", pos)),
            Token::Name(_) => return Err(unsupported("enum argument values", pos)),
            other => {
                return Err(QueryError::new(
                    K::Syntax(format!("expected a value, found {other}")),
                    pos,
                ))
            }
        })
    }
}
