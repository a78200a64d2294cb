//! Tokenizer shared by the SDL and query parsers.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Name(String),
    Int(String),
    Float(String),
    Str(String),
    Punct(char),
    Spread,
    Variable(String),
    Eof,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Name(n) => write!(f, "name `{n}`"),
            Token::Int(v) | Token::Float(v) => write!(f, "number `{v}`"),
            Token::Str(_) => f.write_str("string"),
            Token::Punct(c) => write!(f, "`{c}`"),
            Token::Spread => f.write_str("`...`"),
            Token::Variable(v) => write!(f, "variable `${v}`"),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<(Token, Pos)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let err = |message: String| SyntaxError { pos, message };
        match c {
            ' ' | '\t' | '\r' | '\n' | ',' | '\u{feff}' => bump!(),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '{' | '}' | '(' | ')' | '[' | ']' | ':' | '@' | '=' | '|' | '&' | '!' => {
                out.push((Token::Punct(c), pos));
                bump!();
            }
            '.' => {
                if chars.get(i + 1) == Some(&'.') && chars.get(i + 2) == Some(&'.') {
                    bump!();
                    bump!();
                    bump!();
                    out.push((Token::Spread, pos));
                } else {
                    return Err(err("unexpected `.`".into()));
                }
            }
            '$' => {
                bump!();
                let start = i;
                while i < chars.len() && is_name_char(chars[i]) {
                    bump!();
                }
                out.push((Token::Variable(chars[start..i].iter().collect()), pos));
            }
            '"' => {
                if chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"') {
                    bump!();
                    bump!();
                    bump!();
                    let mut s = String::new();
                    loop {
                        if i >= chars.len() {
                            return Err(err("unterminated block string".into()));
                        }
                        if chars[i] == '"'
                            && chars.get(i + 1) == Some(&'"')
                            && chars.get(i + 2) == Some(&'"')
                        {
                            bump!();
                            bump!();
                            bump!();
                            break;
                        }
                        s.push(chars[i]);
                        bump!();
                    }
                    out.push((Token::Str(s), pos));
                    continue;
                }
                bump!();
                let mut s = String::new();
                loop {
                    let Some(&ch) = chars.get(i) else {
                        return Err(err("unterminated string".into()));
                    };
                    match ch {
                        '"' => {
                            bump!();
                            break;
                        }
                        '\n' => return Err(err("unterminated string".into())),
                        '\\' => {
                            bump!();
                            let Some(&e) = chars.get(i) else {
                                return Err(err("unterminated string".into()));
                            };
                            bump!();
                            match e {
                                '"' => s.push('"'),
                                '\\' => s.push('\\'),
                                '/' => s.push('/'),
                                'b' => s.push('\u{8}'),
                                'f' => s.push('\u{c}'),
                                'n' => s.push('\n'),
                                'r' => s.push('\r'),
                                't' => s.push('\t'),
                                'u' => {
                                    let hex: String = chars.iter().skip(i).take(4).collect();
                                    let code = (hex.len() == 4)
                                        .then(|| u32::from_str_radix(&hex, 16).ok())
                                        .flatten()
                                        .and_then(char::from_u32)
                                        .ok_or_else(|| err("invalid unicode escape".into()))?;
                                    for _ in 0..4 {
                                        bump!();
                                    }
                                    s.push(code);
                                }
                                other => return Err(err(format!("invalid escape `\\{other}`"))),
                            }
                        }
                        _ => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                out.push((Token::Str(s), pos));
            }
            c if c == '-' || c.is_ascii_digit() => {
                let start = i;
                bump!();
                let mut float = false;
                while i < chars.len() {
                    match chars[i] {
                        d if d.is_ascii_digit() => bump!(),
                        '.' | 'e' | 'E' => {
                            float = true;
                            bump!();
                        }
                        '+' | '-' if matches!(chars[i - 1], 'e' | 'E') => bump!(),
                        _ => break,
                    }
                }
                let lexeme: String = chars[start..i].iter().collect();
                let valid = if float {
                    lexeme.parse::<f64>().is_ok() && !lexeme.ends_with('.')
                } else {
                    lexeme.parse::<i64>().is_ok()
                };
                if !valid {
                    return Err(err(format!("malformed number `{lexeme}`")));
                }
                if i < chars.len() && is_name_char(chars[i]) {
                    return Err(err(format!("malformed number `{lexeme}{}`", chars[i])));
                }
                out.push((
                    if float {
                        Token::Float(lexeme)
                    } else {
                        Token::Int(lexeme)
                    },
                    pos,
                ));
            }
            c if is_name_start(c) => {
                let start = i;
                while i < chars.len() && is_name_char(chars[i]) {
                    bump!();
                }
                out.push((Token::Name(chars[start..i].iter().collect()), pos));
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    out.push((Token::Eof, Pos { line, column: col }));
    Ok(out)
}

fn is_name_start(c: char) -> bool {
    c == '_' || c.is_ascii_alphabetic()
}

fn is_name_char(c: char) -> bool {
    c == '_' || c.is_ascii_alphanumeric()
}

/// Cursor over a token vector with the usual expect/eat helpers.
pub(crate) struct Tokens {
    tokens: Vec<(Token, Pos)>,
    at: usize,
}

impl Tokens {
    pub fn new(text: &str) -> Result<Self, SyntaxError> {
        Ok(Tokens {
            tokens: tokenize(text)?,
            at: 0,
        })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.at].0
    }

    pub fn peek_at(&self, ahead: usize) -> &Token {
        let i = (self.at + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    pub fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    pub fn next(&mut self) -> (Token, Pos) {
        let item = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        item
    }

    pub fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            pos: self.pos(),
            message: message.into(),
        }
    }

    pub fn unexpected(&self, wanted: &str) -> SyntaxError {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    pub fn is_punct(&self, c: char) -> bool {
        *self.peek() == Token::Punct(c)
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, c: char) -> Result<Pos, SyntaxError> {
        if self.is_punct(c) {
            Ok(self.next().1)
        } else {
            Err(self.unexpected(&format!("`{c}`")))
        }
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Token::Name(n) if n == kw)
    }

    pub fn expect_name(&mut self) -> Result<(String, Pos), SyntaxError> {
        match self.peek().clone() {
            Token::Name(n) => {
                let pos = self.next().1;
                Ok((n, pos))
            }
            _ => Err(self.unexpected("a name")),
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Token::Eof
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Token> {
        tokenize(text)
            .unwrap()
            .into_iter()
            .map(|(t, _)| t)
            .collect()
    }

    #[test]
    fn tokenizes_query_text() {
        assert_eq!(
            kinds("people(lname:\"Doe\"){fname, email}"),
            vec![
                Token::Name("people".into()),
                Token::Punct('('),
                Token::Name("lname".into()),
                Token::Punct(':'),
                Token::Str("Doe".into()),
                Token::Punct(')'),
                Token::Punct('{'),
                Token::Name("fname".into()),
                Token::Name("email".into()),
                Token::Punct('}'),
                Token::Eof,
            ]
        );
    }

    #[test]
    fn numbers_and_spreads() {
        assert_eq!(
            kinds("-12 3.5e2 ... $v"),
            vec![
                Token::Int("-12".into()),
                Token::Float("3.5e2".into()),
                Token::Spread,
                Token::Variable("v".into()),
                Token::Eof
            ]
        );
        assert!(tokenize("12abc").is_err());
    }

    #[test]
    fn positions_and_escapes() {
        let toks = tokenize("# c\n  \"a\\n\\u0041\" \"\"\"raw \\n\"\"\"").unwrap();
        assert_eq!(
            toks[0],
            (Token::Str("a\nA".into()), Pos { line: 2, column: 3 })
        );
        assert_eq!(toks[1].0, Token::Str("raw \\n".into()));
        let err = tokenize("{\n  \"open").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, column: 3 });
    }
}
