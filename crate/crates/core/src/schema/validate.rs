use std::collections::{HashSet, VecDeque};

use super::{IdMode, Schema, SchemaError, SchemaErrorKind as K, TermBinding, TypeKind};

/// Checks every schema invariant and reports all violations.
pub fn validate_schema(
    schema: &Schema,
    binding: &TermBinding,
    id_mode: IdMode,
) -> Result<(), Vec<SchemaError>> {
    let mut errors = Vec::new();
    let at = |key: &str| schema.position(key);

    if schema.kind_of(&schema.query_root) != Some(TypeKind::Object) {
        errors.push(SchemaError::at(
            K::MissingQueryRoot(schema.query_root.clone()),
            at(&schema.query_root),
        ));
    }

    for (name, members) in &schema.unions {
        if members.is_empty() {
            errors.push(SchemaError::at(K::EmptyUnion(name.clone()), at(name)));
        }
    }

    for ty in schema.objects.values().chain(schema.interfaces.values()) {
        for f in ty.fields.values() {
            let key = format!("{}.{}", ty.name, f.name);
            if f.args.is_empty() {
                continue;
            }
            if schema.is_scalar(&f.ty.name) || schema.kind_of(&f.ty.name) == Some(TypeKind::Union) {
                errors.push(SchemaError::at(
                    K::LeafFieldArguments {
                        ty: ty.name.clone(),
                        field: f.name.clone(),
                    },
                    at(&key),
                ));
                continue;
            }
            for arg in f.args.keys() {
                let scalar_field = schema
                    .field(&f.ty.name, arg)
                    .is_some_and(|target| !target.ty.list && schema.is_scalar(&target.ty.name));
                if !scalar_field {
                    errors.push(SchemaError::at(
                        K::ArgumentNotScalarField {
                            ty: ty.name.clone(),
                            field: f.name.clone(),
                            arg: arg.clone(),
                        },
                        at(&key),
                    ));
                }
            }
        }
    }

    for obj in schema.objects.values() {
        for iface_name in &obj.interfaces {
            let Some(iface) = schema.interfaces.get(iface_name) else {
                continue;
            };
            for f in iface.fields.values() {
                match obj.fields.get(&f.name) {
                    None => errors.push(SchemaError::at(
                        K::InterfaceFieldMissing {
                            ty: obj.name.clone(),
                            interface: iface_name.clone(),
                            field: f.name.clone(),
                        },
                        at(&obj.name),
                    )),
                    Some(own) if own.ty != f.ty || own.args != f.args => {
                        errors.push(SchemaError::at(
                            K::InterfaceFieldType {
                                ty: obj.name.clone(),
                                interface: iface_name.clone(),
                                field: f.name.clone(),
                            },
                            at(&format!("{}.{}", obj.name, f.name)),
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
    }

    if let Some(root) = schema.objects.get(&schema.query_root) {
        for f in root.fields.values() {
            if schema.is_scalar(&f.ty.name) {
                errors.push(SchemaError::at(
                    K::RootFieldNotComposite {
                        field: f.name.clone(),
                    },
                    at(&format!("{}.{}", root.name, f.name)),
                ));
            }
        }
        errors.extend(missing_bindings(schema, binding, id_mode));
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

/// Every object or interface type reachable from the query root needs a
/// type IRI, and so does every field on a reachable object type (except
/// `ID` fields in direct mode). Root fields themselves need none: they
/// select instances of their type. Unions need an IRI only where a type
/// test against them is generated: as a root field type or a `@filter`
/// target.
fn missing_bindings(schema: &Schema, binding: &TermBinding, id_mode: IdMode) -> Vec<SchemaError> {
    let mut errors = Vec::new();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    let mut need_union_iri: Vec<&str> = Vec::new();

    let root = &schema.objects[&schema.query_root];
    for f in root.fields.values() {
        if schema.kind_of(&f.ty.name) == Some(TypeKind::Union) {
            need_union_iri.push(&f.ty.name);
        }
        if seen.insert(&f.ty.name) {
            queue.push_back(&f.ty.name);
        }
    }
    while let Some(ty) = queue.pop_front() {
        let next: Vec<&str> = match schema.kind_of(ty) {
            Some(TypeKind::Object) => {
                let obj = &schema.objects[ty];
                if binding.type_iri(ty).is_none() {
                    errors.push(SchemaError::at(
                        K::MissingUri(ty.to_owned()),
                        schema.position(ty),
                    ));
                }
                for f in obj.fields.values() {
                    let b = binding.field(schema, ty, &f.name);
                    let direct_id = id_mode == IdMode::Direct && f.ty.name == "ID" && !f.ty.list;
                    if b.iri.is_none() && !direct_id {
                        let key = format!("{ty}.{}", f.name);
                        errors.push(SchemaError::at(
                            K::MissingUri(key.clone()),
                            schema.position(&key),
                        ));
                    }
                    if b.filter && schema.kind_of(&f.ty.name) == Some(TypeKind::Union) {
                        need_union_iri.push(&f.ty.name);
                    }
                }
                obj.fields.values().map(|f| f.ty.name.as_str()).collect()
            }
            Some(TypeKind::Interface) => {
                if binding.type_iri(ty).is_none() {
                    errors.push(SchemaError::at(
                        K::MissingUri(ty.to_owned()),
                        schema.position(ty),
                    ));
                }
                let iface = &schema.interfaces[ty];
                let mut next: Vec<&str> =
                    iface.fields.values().map(|f| f.ty.name.as_str()).collect();
                next.extend(schema.implementors(ty));
                next
            }
            Some(TypeKind::Union) => schema.unions[ty].iter().map(String::as_str).collect(),
            _ => Vec::new(),
        };
        for n in next {
            if !schema.is_scalar(n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    need_union_iri.sort_unstable();
    need_union_iri.dedup();
    for u in need_union_iri {
        if binding.type_iri(u).is_none() {
            errors.push(SchemaError::at(
                K::MissingUri(u.to_owned()),
                schema.position(u),
            ));
        }
    }
    errors
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::parse_sdl;

    const BOUND: &str = include_str!("../../tests/fixtures/example.graphql");

    fn errors(text: &str, mode: IdMode) -> Vec<K> {
        let (s, b) = parse_sdl(text).unwrap();
        match validate_schema(&s, &b, mode) {
            Ok(()) => Vec::new(),
            Err(es) => es.into_iter().map(|e| e.kind).collect(),
        }
    }

    #[test]
    fn bound_example_schema_is_valid() {
        assert!(errors(BOUND, IdMode::Direct).is_empty());
        assert!(errors(BOUND, IdMode::Join).is_empty());
    }

    #[test]
    fn verbatim_example_lacks_bindings() {
        let errs = errors(
            include_str!("../../tests/fixtures/example_verbatim.graphql"),
            IdMode::Direct,
        );
        assert!(errs.contains(&K::MissingUri("Person".into())));
        assert!(errs.contains(&K::MissingUri("Company.employees".into())));
        assert!(errs.iter().all(|e| matches!(e, K::MissingUri(_))));
    }

    #[test]
    fn argument_must_name_a_scalar_field_of_the_target() {
        let errs = errors(
            r#"type P @uri(value: "P") { name: String @uri(value: "n") }
               type Query { people(x: String): [P] }"#,
            IdMode::Direct,
        );
        assert_eq!(
            errs,
            vec![K::ArgumentNotScalarField {
                ty: "Query".into(),
                field: "people".into(),
                arg: "x".into()
            }]
        );
    }

    #[test]
    fn reports_every_violation() {
        let errs = errors(
            r#"interface I { a: Int }
               type P implements I { b(c: Int): Int }
               union U
               type Query { n: Int, p: [P], u: U }"#,
            IdMode::Direct,
        );
        assert!(errs.contains(&K::EmptyUnion("U".into())));
        assert!(errs.contains(&K::LeafFieldArguments {
            ty: "P".into(),
            field: "b".into()
        }));
        assert!(errs.contains(&K::InterfaceFieldMissing {
            ty: "P".into(),
            interface: "I".into(),
            field: "a".into()
        }));
        assert!(errs.contains(&K::RootFieldNotComposite { field: "n".into() }));
        assert!(errs.contains(&K::MissingUri("P".into())));
        assert!(errs.contains(&K::MissingUri("U".into())));
        assert!(errs.len() >= 6);
    }

    #[test]
    fn id_fields_need_bindings_only_in_join_mode() {
        let text = r#"type P @uri(value: "P") { id: ID }
                      type Query { ps: [P] }"#;
        assert!(errors(text, IdMode::Direct).is_empty());
        assert_eq!(
            errors(text, IdMode::Join),
            vec![K::MissingUri("P.id".into())]
        );
    }

    #[test]
    fn missing_query_root() {
        let errs = errors("type P { x: Int }", IdMode::Direct);
        assert_eq!(errs, vec![K::MissingQueryRoot("Query".into())]);
    }
}
