//! GraphQL responses: the value model and its serialization, the builder
//! that folds solution mappings into a response tree, and a direct
//! evaluator of the query semantics used as an oracle.

mod builder;
mod oracle;
mod value;

pub use builder::{BuildStats, ResponseBuilder};
pub use oracle::{eval_direct, eval_raw, GraphView, OracleOptions};
pub use value::{Response, ResponseValue};

use crate::rdf::Term;
use crate::schema::TypeRef;

/// Scalar value of a leaf term, typed by the field's declared scalar.
pub fn render_scalar(ty: &TypeRef, term: &Term) -> ResponseValue {
    let text = term.text();
    if let Term::Literal(_) = term {
        match ty.name.as_str() {
            "Int" => {
                if let Ok(n) = text.parse::<i64>() {
                    return ResponseValue::Int(n);
                }
            }
            "Float" => {
                if let Ok(x) = text.parse::<f64>() {
                    if x.is_finite() {
                        return ResponseValue::Float(x);
                    }
                }
            }
            "Boolean" => match text {
                "true" | "1" => return ResponseValue::Bool(true),
                "false" | "0" => return ResponseValue::Bool(false),
                _ => {}
            },
            _ => {}
        }
    }
    ResponseValue::String(text.to_owned())
}

/// Error text for a non-list field that has more than one value at a node.
pub(crate) fn cardinality_error(key: &str, node: Option<&Term>) -> String {
    match node {
        Some(t) => format!("field \"{key}\" has more than one value at {t}"),
        None => format!("field \"{key}\" has more than one value at the query root"),
    }
}

#[cfg(test)]
mod tests;
