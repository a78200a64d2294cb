//! RDF terms and their dense integer encoding.

use std::collections::HashMap;
use std::fmt;

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// An RDF term. Blank nodes never appear here: the parser maps them into
/// the reserved `_:b{n}` IRI namespace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal(Literal),
}

/// A literal carries at most one of a datatype or a language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    annotation: Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Annotation {
    Plain,
    Datatype(String),
    Language(String),
}

impl Literal {
    /// A simple literal. `xsd:string` typed literals are folded into this form.
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            annotation: Annotation::Plain,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        if datatype == XSD_STRING {
            return Literal::simple(lexical);
        }
        Literal {
            lexical: lexical.into(),
            annotation: Annotation::Datatype(datatype),
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            annotation: Annotation::Language(language.into()),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&str> {
        match &self.annotation {
            Annotation::Datatype(dt) => Some(dt),
            _ => None,
        }
    }

    pub fn language(&self) -> Option<&str> {
        match &self.annotation {
            Annotation::Language(tag) => Some(tag),
            _ => None,
        }
    }
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::simple(lexical))
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    /// IRI text for IRIs, lexical form for literals.
    pub fn text(&self) -> &str {
        match self {
            Term::Iri(iri) => iri,
            Term::Literal(lit) => lit.lexical(),
        }
    }
}

impl fmt::Display for Term {
    /// N-Triples surface syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) if iri.starts_with("_:") => f.write_str(iri),
            Term::Iri(iri) => write!(f, "<{}>", escape(iri, false)),
            Term::Literal(lit) => {
                write!(f, "\"{}\"", escape(&lit.lexical, true))?;
                match &lit.annotation {
                    Annotation::Plain => Ok(()),
                    Annotation::Datatype(dt) => write!(f, "^^<{}>", escape(dt, false)),
                    Annotation::Language(tag) => write!(f, "@{tag}"),
                }
            }
        }
    }
}

fn escape(text: &str, literal: bool) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' if literal => out.push_str("\\\""),
            '\n' if literal => out.push_str("\\n"),
            '\r' if literal => out.push_str("\\r"),
            '\t' if literal => out.push_str("\\t"),
            '>' if !literal => out.push_str("\\u003E"),
            c if c.is_control() => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Dense id of a term in the dictionary, assigned in first-seen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Bijection between terms and dense ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = TermId(u32::try_from(self.terms.len()).expect("dictionary overflow"));
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn decode(&self, id: TermId) -> Option<&Term> {
        self.terms.get(id.index())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, &Term)> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, t)| (TermId(i as u32), t))
    }
}

/// Per-query extension of a frozen dictionary. Terms absent from the graph
/// get fresh ids past the end of the base dictionary; no triple mentions
/// them, so every slice involving one is empty.
#[derive(Debug)]
pub struct TermOverlay<'a> {
    base: &'a Dictionary,
    extra: Vec<Term>,
    extra_ids: HashMap<Term, TermId>,
}

impl<'a> TermOverlay<'a> {
    pub fn new(base: &'a Dictionary) -> Self {
        TermOverlay {
            base,
            extra: Vec::new(),
            extra_ids: HashMap::new(),
        }
    }

    pub fn intern(&mut self, term: Term) -> TermId {
        if let Some(id) = self.base.lookup(&term) {
            return id;
        }
        if let Some(&id) = self.extra_ids.get(&term) {
            return id;
        }
        let id = TermId((self.base.len() + self.extra.len()) as u32);
        self.extra.push(term.clone());
        self.extra_ids.insert(term, id);
        id
    }

    pub fn decode(&self, id: TermId) -> Option<&Term> {
        self.base
            .decode(id)
            .or_else(|| self.extra.get(id.index() - self.base.len()))
    }
}
