use std::fmt;

use indexmap::IndexMap;

use crate::syntax::Pos;

/// Scalar argument value, kept in its lexical form. `1` and `"1"` differ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    String(String),
    Int(String),
    Float(String),
    Boolean(bool),
}

impl Value {
    /// Lexical form as it will appear in an RDF literal.
    pub fn lexical(&self) -> &str {
        match self {
            Value::String(s) | Value::Int(s) | Value::Float(s) => s,
            Value::Boolean(true) => "true",
            Value::Boolean(false) => "false",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::String(s) => {
                f.write_str(&serde_json::to_string(s).expect("strings always serialize"))
            }
            other => f.write_str(other.lexical()),
        }
    }
}

/// `f[α]`, `ℓ:f[α]`, optionally with a sub-selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    pub alias: Option<String>,
    pub name: String,
    pub args: IndexMap<String, Value>,
    pub selection: Option<Vec<Selection>>,
    pub pos: Pos,
}

impl Field {
    pub fn response_key(&self) -> &str {
        self.alias.as_deref().unwrap_or(&self.name)
    }
}

/// `on t{φ}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InlineFragment {
    pub on: String,
    pub selection: Vec<Selection>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    Field(Field),
    Fragment(InlineFragment),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryAst {
    pub selection: Vec<Selection>,
}

fn write_selection(f: &mut fmt::Formatter<'_>, sel: &[Selection]) -> fmt::Result {
    f.write_str("{")?;
    for (i, s) in sel.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        match s {
            Selection::Field(field) => {
                if let Some(alias) = &field.alias {
                    write!(f, "{alias}: ")?;
                }
                f.write_str(&field.name)?;
                if !field.args.is_empty() {
                    f.write_str("(")?;
                    for (j, (name, value)) in field.args.iter().enumerate() {
                        if j > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{name}: {value}")?;
                    }
                    f.write_str(")")?;
                }
                if let Some(sub) = &field.selection {
                    f.write_str(" ")?;
                    write_selection(f, sub)?;
                }
            }
            Selection::Fragment(frag) => {
                write!(f, "... on {} ", frag.on)?;
                write_selection(f, &frag.selection)?;
            }
        }
    }
    f.write_str("}")
}

/// Prints the query as a `{ ... }` document that parses back to an equal AST
/// up to positions.
impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_selection(f, &self.selection)
    }
}
