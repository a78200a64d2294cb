use super::ast::{QueryAst, Selection, Value};
use super::{QueryError, QueryErrorKind as K};
use crate::schema::{Schema, TypeKind, TypeRef};

/// Checks the query against the schema and reports every violation.
pub fn validate_query(schema: &Schema, ast: &QueryAst) -> Result<(), Vec<QueryError>> {
    let mut errors = Vec::new();
    check(schema, schema.query_root(), &ast.selection, &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// `t` may apply within `scope`: the same type, an implementor of the scope
/// interface, or a member of the scope union.
pub(crate) fn fragment_applies(schema: &Schema, scope: &str, t: &str) -> bool {
    t == scope
        || match schema.kind_of(scope) {
            Some(TypeKind::Interface) => schema.implementors(scope).contains(&t),
            Some(TypeKind::Union) => schema
                .union_members(scope)
                .is_some_and(|m| m.iter().any(|x| x == t)),
            _ => false,
        }
}

fn value_fits(ty: &TypeRef, value: &Value) -> bool {
    match (ty.name.as_str(), value) {
        ("String", Value::String(_)) => true,
        ("ID", Value::String(_) | Value::Int(_)) => true,
        ("Int", Value::Int(_)) => true,
        ("Float", Value::Int(_) | Value::Float(_)) => true,
        ("Boolean", Value::Boolean(_)) => true,
        _ => false,
    }
}

fn check(schema: &Schema, scope: &str, selection: &[Selection], errors: &mut Vec<QueryError>) {
    for sel in selection {
        match sel {
            Selection::Field(f) => {
                let Some(def) = schema.field(scope, &f.name) else {
                    errors.push(QueryError::new(
                        K::UnknownField {
                            ty: scope.to_owned(),
                            field: f.name.clone(),
                        },
                        f.pos,
                    ));
                    continue;
                };
                for (arg, value) in &f.args {
                    match def.args.get(arg) {
                        None => errors.push(QueryError::new(
                            K::UnknownArgument {
                                field: f.name.clone(),
                                arg: arg.clone(),
                            },
                            f.pos,
                        )),
                        Some(ty) if !value_fits(ty, value) => errors.push(QueryError::new(
                            K::ArgumentType {
                                field: f.name.clone(),
                                arg: arg.clone(),
                                expected: ty.to_string(),
                            },
                            f.pos,
                        )),
                        Some(_) => {}
                    }
                }
                match (&f.selection, schema.is_scalar(&def.ty.name)) {
                    (Some(_), true) => errors.push(QueryError::new(
                        K::SelectionOnScalar {
                            field: f.name.clone(),
                        },
                        f.pos,
                    )),
                    (None, false) => errors.push(QueryError::new(
                        K::MissingSelection {
                            field: f.name.clone(),
                        },
                        f.pos,
                    )),
                    (Some(sub), false) => check(schema, &def.ty.name, sub, errors),
                    (None, true) => {}
                }
            }
            Selection::Fragment(fr) => match schema.kind_of(&fr.on) {
                None | Some(TypeKind::Scalar) => {
                    errors.push(QueryError::new(K::UnknownType(fr.on.clone()), fr.pos))
                }
                Some(_) if !fragment_applies(schema, scope, &fr.on) => {
                    errors.push(QueryError::new(
                        K::IncompatibleFragment {
                            scope: scope.to_owned(),
                            on: fr.on.clone(),
                        },
                        fr.pos,
                    ))
                }
                Some(_) => check(schema, &fr.on, &fr.selection, errors),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;
    use crate::schema::parse_sdl;

    fn run(sdl: &str, text: &str) -> Vec<K> {
        let (schema, _) = parse_sdl(sdl).unwrap();
        match validate_query(&schema, &parse_query(text).unwrap()) {
            Ok(()) => vec![],
            Err(es) => es.into_iter().map(|e| e.kind).collect(),
        }
    }

    fn kinds(text: &str) -> Vec<K> {
        run(
            include_str!("../../tests/fixtures/example_verbatim.graphql"),
            text,
        )
    }

    /// Same shape as the example schema plus abstract-typed root fields.
    fn kinds_abstract(text: &str) -> Vec<K> {
        run(
            "interface Entity { id: String }
             type Person implements Entity { id: String age: Int }
             type Company implements Entity { id: String }
             union Any = Person | Company
             type Query { entity: Entity any: Any people: [Person] }",
            text,
        )
    }

    #[test]
    fn example_queries_validate() {
        assert!(kinds(r#"people(lname: "Doe") { fname email }"#).is_empty());
        assert!(kinds("companies { name employees { id lname } }").is_empty());
    }

    #[test]
    fn unknown_field_and_argument() {
        assert_eq!(
            kinds("people { salary }"),
            [K::UnknownField {
                ty: "Person".into(),
                field: "salary".into()
            }]
        );
        assert_eq!(
            kinds("people(age: 3) { fname }"),
            [K::UnknownArgument {
                field: "people".into(),
                arg: "age".into()
            }]
        );
        assert_eq!(
            kinds("people { fname(x: 1) }"),
            [K::UnknownArgument {
                field: "fname".into(),
                arg: "x".into()
            }]
        );
    }

    #[test]
    fn argument_values_are_type_checked() {
        assert_eq!(
            kinds("people(lname: 3) { fname }"),
            [K::ArgumentType {
                field: "people".into(),
                arg: "lname".into(),
                expected: "String".into()
            }]
        );
    }

    #[test]
    fn leaf_and_composite_shape() {
        assert_eq!(
            kinds("people { fname { x } }"),
            [K::SelectionOnScalar {
                field: "fname".into()
            }]
        );
        assert_eq!(
            kinds("companies { employees }"),
            [K::MissingSelection {
                field: "employees".into()
            }]
        );
    }

    #[test]
    fn fragment_compatibility() {
        assert!(kinds_abstract("entity { ... on Person { age } id }").is_empty());
        assert!(kinds_abstract("any { ... on Company { id } }").is_empty());
        assert!(kinds_abstract("entity { ... on Entity { id } }").is_empty());
        assert_eq!(
            kinds("people { ... on Company { id } }"),
            [K::IncompatibleFragment {
                scope: "Person".into(),
                on: "Company".into()
            }]
        );
        assert_eq!(
            kinds("people { ... on Entity { id } }"),
            [K::IncompatibleFragment {
                scope: "Person".into(),
                on: "Entity".into()
            }]
        );
        assert_eq!(
            kinds("people { ... on Nope { id } }"),
            [K::UnknownType("Nope".into())]
        );
        assert_eq!(
            kinds_abstract("any { id }"),
            [K::UnknownField {
                ty: "Any".into(),
                field: "id".into()
            }]
        );
    }

    #[test]
    fn reports_all_errors() {
        assert_eq!(kinds("people { a b { c } } companies { d }").len(), 3);
    }
}
