//! Query documents: parsing, validation against a schema, and rewriting into
//! non-redundant ground-typed normal form.

mod ast;
mod normalize;
mod parse;
mod validate;

use std::fmt;

use crate::syntax::{Pos, SyntaxError};

pub use ast::{Field, InlineFragment, QueryAst, Selection, Value};
pub use normalize::{normalize, NField, NFragment, NSelection, NormalizedQuery};
pub use parse::{parse_query, parse_query_with_limit, DEFAULT_DEPTH_LIMIT};
pub use validate::validate_query;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryErrorKind {
    Syntax(String),
    Unsupported(String),
    TooDeep(usize),
    DuplicateArgument {
        field: String,
        arg: String,
    },
    UnknownField {
        ty: String,
        field: String,
    },
    UnknownArgument {
        field: String,
        arg: String,
    },
    ArgumentType {
        field: String,
        arg: String,
        expected: String,
    },
    UnknownType(String),
    IncompatibleFragment {
        scope: String,
        on: String,
    },
    SelectionOnScalar {
        field: String,
    },
    MissingSelection {
        field: String,
    },
    MergeConflict {
        key: String,
    },
}

impl fmt::Display for QueryErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use QueryErrorKind::*;
        match self {
            Syntax(m) => write!(f, "syntax error: {m}"),
            Unsupported(what) => write!(f, "unsupported: {what}"),
            TooDeep(limit) => write!(f, "query nesting exceeds the depth limit of {limit}"),
            DuplicateArgument { field, arg } => {
                write!(f, "argument `{arg}` given twice on field `{field}`")
            }
            UnknownField { ty, field } => write!(f, "type `{ty}` has no field `{field}`"),
            UnknownArgument { field, arg } => {
                write!(f, "field `{field}` has no argument `{arg}`")
            }
            ArgumentType {
                field,
                arg,
                expected,
            } => write!(
                f,
                "argument `{arg}` of field `{field}` expects a {expected} value"
            ),
            UnknownType(t) => write!(f, "unknown type `{t}`"),
            IncompatibleFragment { scope, on } => {
                write!(f, "fragment on `{on}` can never apply within `{scope}`")
            }
            SelectionOnScalar { field } => {
                write!(f, "field `{field}` is a leaf and takes no sub-selection")
            }
            MissingSelection { field } => {
                write!(f, "field `{field}` of composite type needs a sub-selection")
            }
            MergeConflict { key } => write!(
                f,
                "response key `{key}` is used for different fields or arguments"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {kind}")]
pub struct QueryError {
    pub kind: QueryErrorKind,
    pub pos: Pos,
}

impl QueryError {
    pub(crate) fn new(kind: QueryErrorKind, pos: Pos) -> Self {
        QueryError { kind, pos }
    }

    /// True for errors raised while reading the text, before any schema
    /// lookup.
    pub fn is_syntax(&self) -> bool {
        matches!(
            self.kind,
            QueryErrorKind::Syntax(_) | QueryErrorKind::Unsupported(_) | QueryErrorKind::TooDeep(_)
        )
    }
}

impl From<SyntaxError> for QueryError {
    fn from(e: SyntaxError) -> Self {
        QueryError::new(QueryErrorKind::Syntax(e.message), e.pos)
    }
}
