use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum ResponseValue {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    String(String),
    List(Vec<ResponseValue>),
    /// Keys in selection order.
    Object(Vec<(String, ResponseValue)>),
}

impl ResponseValue {
    pub fn get(&self, key: &str) -> Option<&ResponseValue> {
        match self {
            ResponseValue::Object(entries) => {
                entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
            }
            _ => None,
        }
    }

    /// Number of objects in the tree, this value included.
    pub fn object_count(&self) -> usize {
        match self {
            ResponseValue::Object(entries) => {
                1 + entries.iter().map(|(_, v)| v.object_count()).sum::<usize>()
            }
            ResponseValue::List(items) => items.iter().map(ResponseValue::object_count).sum(),
            _ => 0,
        }
    }

    pub fn write_json(&self, out: &mut String) {
        match self {
            ResponseValue::Null => out.push_str("null"),
            ResponseValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            ResponseValue::Int(n) => {
                let _ = write!(out, "{n}");
            }
            ResponseValue::Float(x) => {
                out.push_str(&serde_json::to_string(x).expect("finite floats serialize"))
            }
            ResponseValue::String(s) => write_str(out, s),
            ResponseValue::List(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write_json(out);
                }
                out.push(']');
            }
            ResponseValue::Object(entries) => {
                out.push('{');
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_str(out, k);
                    out.push(':');
                    v.write_json(out);
                }
                out.push('}');
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        self.write_json(&mut out);
        out
    }
}

fn write_str(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

/// `data` plus any errors raised while building it.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub data: ResponseValue,
    pub errors: Vec<String>,
}

impl Response {
    /// `{"data":...}` with an `"errors"` array when there are any; error
    /// messages are sorted and deduplicated.
    pub fn serialize(&self) -> String {
        let mut out = String::from("{\"data\":");
        self.data.write_json(&mut out);
        let mut errors: Vec<&String> = self.errors.iter().collect();
        errors.sort();
        errors.dedup();
        if !errors.is_empty() {
            out.push_str(",\"errors\":[");
            for (i, e) in errors.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str("{\"message\":");
                write_str(&mut out, e);
                out.push('}');
            }
            out.push(']');
        }
        out.push('}');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serializes_in_key_order() {
        let v = ResponseValue::Object(vec![
            ("b".into(), ResponseValue::Null),
            ("a".into(), ResponseValue::List(vec![])),
            ("s".into(), ResponseValue::String("q\"\n".into())),
            ("n".into(), ResponseValue::Int(-3)),
            ("f".into(), ResponseValue::Float(1.5)),
            ("t".into(), ResponseValue::Bool(true)),
        ]);
        assert_eq!(
            v.to_json(),
            r#"{"b":null,"a":[],"s":"q\"\n","n":-3,"f":1.5,"t":true}"#
        );
    }

    #[test]
    fn errors_are_sorted_and_deduplicated() {
        let r = Response {
            data: ResponseValue::Object(vec![("email".into(), ResponseValue::Null)]),
            errors: vec!["b".into(), "a".into(), "b".into()],
        };
        assert_eq!(
            r.serialize(),
            r#"{"data":{"email":null},"errors":[{"message":"a"},{"message":"b"}]}"#
        );
        let parsed: serde_json::Value = serde_json::from_str(&r.serialize()).unwrap();
        assert_eq!(parsed["errors"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn counts_objects() {
        let leaf = ResponseValue::Object(vec![]);
        let v = ResponseValue::Object(vec![(
            "xs".into(),
            ResponseValue::List(vec![leaf.clone(), leaf]),
        )]);
        assert_eq!(v.object_count(), 3);
    }
}
