use indexmap::IndexMap;

use super::ast::{Field, InlineFragment, QueryAst, Selection, Value};
use super::{QueryError, QueryErrorKind as K};
use crate::schema::{Schema, TypeRef};

/// A field in normal form, resolved against the concrete object type it is
/// selected on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NField {
    pub key: String,
    pub name: String,
    pub args: IndexMap<String, Value>,
    /// Concrete object type declaring the selection scope.
    pub parent: String,
    pub ty: TypeRef,
    pub selection: NSelection,
}

impl NField {
    pub fn alias(&self) -> Option<&str> {
        (self.key != self.name).then_some(self.key.as_str())
    }
}

/// One fragment per concrete object type under an abstract scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NFragment {
    pub on: String,
    pub fields: Vec<NField>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NSelection {
    Leaf,
    /// Sub-selection of an object-typed field: fields only.
    Fields(Vec<NField>),
    /// Sub-selection of an interface- or union-typed field: fragments on
    /// distinct object types only.
    Fragments(Vec<NFragment>),
}

/// A non-redundant query in ground-typed normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedQuery {
    pub root_type: String,
    pub fields: Vec<NField>,
}

impl NormalizedQuery {
    pub fn to_ast(&self) -> QueryAst {
        QueryAst {
            selection: self.fields.iter().map(field_to_ast).collect(),
        }
    }

    /// Number of selection nodes (fields plus fragments).
    pub fn size(&self) -> usize {
        fn count(fields: &[NField]) -> usize {
            fields
                .iter()
                .map(|f| {
                    1 + match &f.selection {
                        NSelection::Leaf => 0,
                        NSelection::Fields(fs) => count(fs),
                        NSelection::Fragments(frs) => {
                            frs.iter().map(|fr| 1 + count(&fr.fields)).sum()
                        }
                    }
                })
                .sum()
        }
        count(&self.fields)
    }
}

fn field_to_ast(f: &NField) -> Selection {
    let selection = match &f.selection {
        NSelection::Leaf => None,
        NSelection::Fields(fs) => Some(fs.iter().map(field_to_ast).collect()),
        NSelection::Fragments(frs) => Some(
            frs.iter()
                .map(|fr| {
                    Selection::Fragment(InlineFragment {
                        on: fr.on.clone(),
                        selection: fr.fields.iter().map(field_to_ast).collect(),
                        pos: Default::default(),
                    })
                })
                .collect(),
        ),
    };
    Selection::Field(Field {
        alias: f.alias().map(str::to_owned),
        name: f.name.clone(),
        args: f.args.clone(),
        selection,
        pos: Default::default(),
    })
}

/// Rewrites a validated query into normal form: fragments on the scope's own
/// object type are inlined, selections under abstract scopes become one
/// fragment per concrete type, and sibling fields sharing a response key are
/// merged.
pub fn normalize(schema: &Schema, ast: &QueryAst) -> Result<NormalizedQuery, QueryError> {
    let root = schema.query_root();
    let fields = match normalize_selection(schema, root, &ast.selection)? {
        NSelection::Fields(fs) => fs,
        _ => unreachable!("the query root is an object type"),
    };
    Ok(NormalizedQuery {
        root_type: root.to_owned(),
        fields,
    })
}

fn normalize_selection(
    schema: &Schema,
    scope: &str,
    selection: &[Selection],
) -> Result<NSelection, QueryError> {
    let possible = schema.possible_types(scope);
    let mut per_type: IndexMap<&str, Vec<&Field>> = IndexMap::new();
    collect(selection, &possible, schema, &mut per_type);
    if !schema.is_abstract(scope) {
        let fields = per_type.swap_remove(scope).unwrap_or_default();
        return Ok(NSelection::Fields(merge_fields(schema, scope, &fields)?));
    }
    let mut fragments = Vec::with_capacity(per_type.len());
    for (ty, fields) in per_type {
        fragments.push(NFragment {
            on: ty.to_owned(),
            fields: merge_fields(schema, ty, &fields)?,
        });
    }
    Ok(NSelection::Fragments(fragments))
}

/// Distributes fields over the concrete types they apply to. A type is
/// listed when it first receives a field.
fn collect<'s, 'q>(
    selection: &'q [Selection],
    ctx: &[&'s str],
    schema: &'s Schema,
    out: &mut IndexMap<&'s str, Vec<&'q Field>>,
) {
    for sel in selection {
        match sel {
            Selection::Field(f) => {
                for &t in ctx {
                    out.entry(t).or_default().push(f);
                }
            }
            Selection::Fragment(fr) => {
                let inner: Vec<&'s str> = schema
                    .possible_types(&fr.on)
                    .into_iter()
                    .filter(|t| ctx.contains(t))
                    .collect();
                collect(&fr.selection, &inner, schema, out);
            }
        }
    }
}

/// Merges fields that share a response key. They must select the same
/// field with the same arguments; their sub-selections are concatenated.
fn merge_fields(schema: &Schema, ty: &str, fields: &[&Field]) -> Result<Vec<NField>, QueryError> {
    let mut groups: IndexMap<&str, Vec<&Field>> = IndexMap::new();
    for &f in fields {
        let group = groups.entry(f.response_key()).or_default();
        if let Some(first) = group.first() {
            if first.name != f.name || first.args != f.args {
                return Err(QueryError::new(
                    K::MergeConflict {
                        key: f.response_key().to_owned(),
                    },
                    f.pos,
                ));
            }
        }
        group.push(f);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (key, group) in groups {
        let first = group[0];
        let def = schema
            .field(ty, &first.name)
            .expect("normalize runs on validated queries");
        let selection = if schema.is_scalar(&def.ty.name) {
            NSelection::Leaf
        } else {
            let combined: Vec<Selection> = group
                .iter()
                .flat_map(|f| f.selection.iter().flatten().cloned())
                .collect();
            normalize_selection(schema, &def.ty.name, &combined)?
        };
        out.push(NField {
            key: key.to_owned(),
            name: first.name.clone(),
            args: first.args.clone(),
            parent: ty.to_owned(),
            ty: def.ty.clone(),
            selection,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{parse_query, validate_query};
    use crate::schema::parse_sdl;

    const ABSTRACT: &str = "
        interface Entity { id: String email: String }
        type Person implements Entity { id: String email: String fname: String knows: [Entity] }
        type Company implements Entity { id: String email: String name: String }
        union Any = Person | Company
        type Query {
          entity: Entity
          any: [Any]
          people(fname: String, email: String): [Person]
          companies: [Company]
        }";

    fn norm(text: &str) -> Result<NormalizedQuery, QueryError> {
        let (schema, _) = parse_sdl(ABSTRACT).unwrap();
        let ast = parse_query(text).unwrap();
        validate_query(&schema, &ast).unwrap();
        normalize(&schema, &ast)
    }

    fn show(text: &str) -> String {
        norm(text).unwrap().to_ast().to_string()
    }

    #[test]
    fn duplicate_fields_merge() {
        assert_eq!(
            show(r#"{ people(fname: "Doe") { fname fname } }"#),
            r#"{people(fname: "Doe") {fname}}"#
        );
        assert_eq!(
            show("{ people { knows { id } knows { email } } }"),
            "{people {knows {... on Person {id email} ... on Company {id email}}}}"
        );
    }

    #[test]
    fn ground_typed_query_is_unchanged() {
        let text = "{companies {name id}}";
        assert_eq!(show(text), text);
    }

    #[test]
    fn interface_scope_expands_over_implementors() {
        assert_eq!(
            show("{ entity { id } }"),
            "{entity {... on Person {id} ... on Company {id}}}"
        );
        assert_eq!(
            show("{ entity { ... on Company { name } id } }"),
            "{entity {... on Company {name id} ... on Person {id}}}"
        );
        assert_eq!(
            show("{ entity { ... on Entity { ... on Person { fname } } } }"),
            "{entity {... on Person {fname}}}"
        );
    }

    #[test]
    fn fragments_merge_and_inline() {
        assert_eq!(
            show("{ any { ... on Person { id } ... on Company { id } ... on Person { fname } } }"),
            "{any {... on Person {id fname} ... on Company {id}}}"
        );
        assert_eq!(
            show("{ people { ... on Person { fname } email } ... on Query { companies { id } } }"),
            "{people {fname email} companies {id}}"
        );
    }

    #[test]
    fn conflicting_keys_are_rejected() {
        for text in [
            "{ people { a: fname a: email } }",
            r#"{ people(fname: "x") { id } people(fname: "y") { id } }"#,
            r#"{ p: people(fname: "x") { id } p: people(email: "x") { id } }"#,
        ] {
            assert!(matches!(
                norm(text).unwrap_err().kind,
                K::MergeConflict { .. }
            ));
        }
        // Same key on different concrete types is not a conflict.
        assert!(norm("{ any { ... on Person { a: fname } ... on Company { a: name } } }").is_ok());
    }

    #[test]
    fn arguments_compare_as_a_mapping() {
        assert!(norm(
            r#"{ people(fname: "x", email: "y") { id } people(email: "y", fname: "x") { id } }"#
        )
        .is_ok());
    }

    #[test]
    fn normalization_is_idempotent_on_examples() {
        let (schema, _) = parse_sdl(ABSTRACT).unwrap();
        for text in [
            "{ entity { ... on Company { name } id } people { knows { id } knows { email } } }",
            "{ any { ... on Person { id } ... on Company { id } } x: companies { id } }",
        ] {
            let once = norm(text).unwrap();
            let twice = normalize(&schema, &once.to_ast()).unwrap();
            assert_eq!(once, twice);
        }
    }
}
