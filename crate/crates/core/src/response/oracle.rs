//! Direct evaluation of the query semantics over a graph view of the data.
//!
//! Deliberately shares nothing with the engine: the view is built by a
//! plain scan into hash maps and every field is evaluated by walking edges
//! from the current node.

use std::collections::HashMap;

use indexmap::IndexMap;

use crate::query::{Field, NField, NSelection, NormalizedQuery, QueryAst, Selection, Value};
use crate::rdf::{Term, TermId, TripleIndex, XSD_BOOLEAN, XSD_DOUBLE, XSD_INTEGER};
use crate::schema::{IdMode, Schema, TermBinding, TypeKind, TypeRef};

use super::{cardinality_error, render_scalar, Response, ResponseValue};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOptions {
    pub id_mode: IdMode,
    pub type_iri: String,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            id_mode: IdMode::Direct,
            type_iri: crate::rdf::RDF_TYPE.to_owned(),
        }
    }
}

/// The data as a GraphQL graph: nodes are terms, `E` and `λ` follow the
/// field bindings, `τ(u)` is the set of types `u` is declared to have, and
/// the root's edges for a root field go to every instance of its type.
pub struct GraphView<'i> {
    index: &'i TripleIndex,
    forward: HashMap<(TermId, TermId), Vec<TermId>>,
    backward: HashMap<(TermId, TermId), Vec<TermId>>,
    types: HashMap<TermId, Vec<TermId>>,
    instances: HashMap<TermId, Vec<TermId>>,
}

impl<'i> GraphView<'i> {
    pub fn new(index: &'i TripleIndex, type_iri: &str) -> Self {
        let type_pred = index.lookup(&Term::iri(type_iri));
        let mut view = GraphView {
            index,
            forward: HashMap::new(),
            backward: HashMap::new(),
            types: HashMap::new(),
            instances: HashMap::new(),
        };
        for t in index.triples() {
            view.forward
                .entry((t.subject, t.predicate))
                .or_default()
                .push(t.object);
            view.backward
                .entry((t.object, t.predicate))
                .or_default()
                .push(t.subject);
            if Some(t.predicate) == type_pred {
                view.types.entry(t.subject).or_default().push(t.object);
                view.instances.entry(t.object).or_default().push(t.subject);
            }
        }
        for list in view
            .forward
            .values_mut()
            .chain(view.backward.values_mut())
            .chain(view.types.values_mut())
            .chain(view.instances.values_mut())
        {
            list.sort_unstable();
            list.dedup();
        }
        view
    }

    fn term(&self, term: &Term) -> Option<TermId> {
        self.index.lookup(term)
    }

    fn decode(&self, id: TermId) -> &Term {
        self.index
            .decode(id)
            .expect("view nodes are dictionary terms")
    }

    fn neighbors(&self, u: TermId, pred: TermId, inverse: bool) -> &[TermId] {
        let map = if inverse {
            &self.backward
        } else {
            &self.forward
        };
        map.get(&(u, pred)).map_or(&[], Vec::as_slice)
    }

    fn has_type(&self, u: TermId, ty: Option<TermId>) -> bool {
        ty.is_some_and(|t| {
            self.types
                .get(&u)
                .is_some_and(|ts| ts.binary_search(&t).is_ok())
        })
    }

    fn instances_of(&self, ty: Option<TermId>) -> &[TermId] {
        ty.and_then(|t| self.instances.get(&t))
            .map_or(&[], Vec::as_slice)
    }
}

/// Evaluates a normalized query from the root node.
pub fn eval_direct(
    view: &GraphView<'_>,
    schema: &Schema,
    binding: &TermBinding,
    query: &NormalizedQuery,
    options: &OracleOptions,
) -> Response {
    let mut ev = Eval {
        view,
        schema,
        binding,
        options,
        errors: Vec::new(),
    };
    let data = ResponseValue::Object(
        query
            .fields
            .iter()
            .map(|f| {
                let sel = Sub::Normal(&f.selection);
                (f.key.clone(), ev.field(&spec_of(f), None, sel))
            })
            .collect(),
    );
    Response {
        data,
        errors: ev.errors,
    }
}

/// Evaluates a query as written, collecting fields per node at run time
/// instead of relying on normal form.
pub fn eval_raw(
    view: &GraphView<'_>,
    schema: &Schema,
    binding: &TermBinding,
    query: &QueryAst,
    options: &OracleOptions,
) -> Response {
    let mut ev = Eval {
        view,
        schema,
        binding,
        options,
        errors: Vec::new(),
    };
    let data = ev.raw_object(schema.query_root(), &query.selection, None);
    Response {
        data,
        errors: ev.errors,
    }
}

struct FieldSpec<'q> {
    key: &'q str,
    name: &'q str,
    args: &'q IndexMap<String, Value>,
    parent: &'q str,
}

fn spec_of(f: &NField) -> FieldSpec<'_> {
    FieldSpec {
        key: &f.key,
        name: &f.name,
        args: &f.args,
        parent: &f.parent,
    }
}

enum Sub<'q> {
    Normal(&'q NSelection),
    Raw(Vec<Selection>),
}

struct Eval<'v, 'i> {
    view: &'v GraphView<'i>,
    schema: &'v Schema,
    binding: &'v TermBinding,
    options: &'v OracleOptions,
    errors: Vec<String>,
}

fn is_id(ty: &TypeRef) -> bool {
    ty.name == "ID" && !ty.list
}

impl Eval<'_, '_> {
    fn iri(&self, iri: Option<&str>) -> Option<TermId> {
        iri.and_then(|i| self.view.term(&Term::iri(i)))
    }

    fn type_term(&self, ty: &str) -> Option<TermId> {
        self.iri(self.binding.type_iri(ty))
    }

    fn literal(ty: &TypeRef, value: &Value) -> Term {
        let lexical = value.lexical();
        match ty.name.as_str() {
            "Int" => Term::typed_literal(lexical, XSD_INTEGER),
            "Float" => Term::typed_literal(lexical, XSD_DOUBLE),
            "Boolean" => Term::typed_literal(lexical, XSD_BOOLEAN),
            _ => Term::literal(lexical),
        }
    }

    /// `v` satisfies every argument of the field: for each `(f', val)` the
    /// node has `f'` with value `val`.
    fn args_match(&self, spec: &FieldSpec<'_>, target: &str, v: TermId) -> bool {
        let def = self
            .schema
            .field(spec.parent, spec.name)
            .expect("validated");
        spec.args.iter().all(|(a, val)| {
            let arg_ty = &def.args[a];
            if self.options.id_mode == IdMode::Direct && is_id(arg_ty) {
                return *self.view.decode(v) == Term::iri(val.lexical());
            }
            let b = self.binding.field(self.schema, target, a);
            let (Some(pred), Some(lit)) = (
                self.iri(b.iri.as_deref()),
                self.view.term(&Self::literal(arg_ty, val)),
            ) else {
                return false;
            };
            self.view.neighbors(v, pred, b.inverse).contains(&lit)
        })
    }

    /// One field at node `u` (`None` is the root).
    fn field(&mut self, spec: &FieldSpec<'_>, u: Option<TermId>, sub: Sub<'_>) -> ResponseValue {
        let def = self
            .schema
            .field(spec.parent, spec.name)
            .expect("validated");
        let ty = def.ty.clone();
        let leaf = self.schema.is_scalar(&ty.name);
        if leaf && self.options.id_mode == IdMode::Direct && is_id(&ty) {
            let u = u.expect("leaves sit below a node");
            return ResponseValue::String(self.view.decode(u).text().to_owned());
        }
        let targets: Vec<TermId> = match u {
            None => self
                .view
                .instances_of(self.type_term(&ty.name))
                .iter()
                .copied()
                .filter(|&v| self.args_match(spec, &ty.name, v))
                .collect(),
            Some(u) => {
                let b = self.binding.field(self.schema, spec.parent, spec.name);
                let Some(pred) = self.iri(b.iri.as_deref()) else {
                    return if ty.list {
                        ResponseValue::List(vec![])
                    } else {
                        ResponseValue::Null
                    };
                };
                let filter = (!leaf && b.filter).then(|| self.type_term(&ty.name));
                self.view
                    .neighbors(u, pred, b.inverse)
                    .iter()
                    .copied()
                    .filter(|&v| filter.is_none_or(|t| self.view.has_type(v, t)))
                    .filter(|&v| self.args_match(spec, &ty.name, v))
                    .collect()
            }
        };
        let mut targets = targets;
        if !ty.list && targets.len() > 1 {
            // Only the kept value is evaluated; the others are not part of
            // the response and contribute no errors.
            let node = u.map(|u| self.view.decode(u));
            self.errors.push(cardinality_error(spec.key, node));
            targets.truncate(1);
        }
        let values: Vec<ResponseValue> = targets
            .iter()
            .map(|&v| {
                if leaf {
                    render_scalar(&ty, self.view.decode(v))
                } else {
                    match &sub {
                        Sub::Normal(sel) => self.selection(sel, v),
                        Sub::Raw(sel) => self.raw_object(&ty.name, sel, Some(v)),
                    }
                }
            })
            .collect();
        if ty.list {
            ResponseValue::List(values)
        } else {
            values.into_iter().next().unwrap_or(ResponseValue::Null)
        }
    }

    fn selection(&mut self, sel: &NSelection, v: TermId) -> ResponseValue {
        let mut entries: Vec<(String, ResponseValue)> = Vec::new();
        match sel {
            NSelection::Leaf => unreachable!("objects have selections"),
            NSelection::Fields(fs) => {
                for f in fs {
                    let value = self.field(&spec_of(f), Some(v), Sub::Normal(&f.selection));
                    entries.push((f.key.clone(), value));
                }
            }
            NSelection::Fragments(frs) => {
                for fr in frs {
                    if !self.view.has_type(v, self.type_term(&fr.on)) {
                        continue;
                    }
                    for f in &fr.fields {
                        if entries.iter().any(|(k, _)| *k == f.key) {
                            continue;
                        }
                        let value = self.field(&spec_of(f), Some(v), Sub::Normal(&f.selection));
                        entries.push((f.key.clone(), value));
                    }
                }
            }
        }
        ResponseValue::Object(entries)
    }

    /// Field collection at run time: the node's concrete types within
    /// `scope` decide which fragments apply; fields sharing a response key
    /// merge their sub-selections.
    fn raw_object(
        &mut self,
        scope: &str,
        selection: &[Selection],
        u: Option<TermId>,
    ) -> ResponseValue {
        let runtime: Vec<String> = match (self.schema.kind_of(scope), u) {
            (Some(TypeKind::Object), _) | (_, None) => vec![scope.to_owned()],
            (_, Some(u)) => self
                .schema
                .possible_types(scope)
                .into_iter()
                .filter(|t| self.view.has_type(u, self.type_term(t)))
                .map(str::to_owned)
                .collect(),
        };
        let mut entries: Vec<(String, ResponseValue)> = Vec::new();
        for t in &runtime {
            let mut grouped: IndexMap<&str, Vec<&Field>> = IndexMap::new();
            self.collect(t, selection, &mut grouped);
            for (key, group) in grouped {
                if entries.iter().any(|(k, _)| k == key) {
                    continue;
                }
                let first = group[0];
                let merged: Vec<Selection> = group
                    .iter()
                    .flat_map(|f| f.selection.iter().flatten().cloned())
                    .collect();
                let spec = FieldSpec {
                    key,
                    name: &first.name,
                    args: &first.args,
                    parent: t,
                };
                let value = self.field(&spec, u, Sub::Raw(merged));
                entries.push((key.to_owned(), value));
            }
        }
        ResponseValue::Object(entries)
    }

    fn collect<'q>(
        &self,
        t: &str,
        selection: &'q [Selection],
        out: &mut IndexMap<&'q str, Vec<&'q Field>>,
    ) {
        for sel in selection {
            match sel {
                Selection::Field(f) => out.entry(f.response_key()).or_default().push(f),
                Selection::Fragment(fr) => {
                    if self.schema.possible_types(&fr.on).contains(&t) {
                        self.collect(t, &fr.selection, out);
                    }
                }
            }
        }
    }
}
