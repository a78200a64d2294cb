//! Seeded generators for random schemas, graphs and queries.

use indexmap::{IndexMap, IndexSet};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::query::{Field, InlineFragment, QueryAst, Selection, Value};
use crate::rdf::{Term, TermTriple, XSD_BOOLEAN, XSD_DOUBLE, XSD_INTEGER};
use crate::schema::{
    CompositeType, FieldBinding, FieldDef, IdMode, Schema, TermBinding, TypeKind, TypeRef,
};
use crate::syntax::Pos;

const SCALARS: [&str; 5] = ["String", "Int", "Float", "Boolean", "ID"];
const SCALAR_PREDICATES: [&str; 6] = ["p0", "p1", "p2", "p3", "p4", "p5"];
const EDGE_PREDICATES: [&str; 4] = ["e0", "e1", "e2", "e3"];

const STRINGS: [&str; 7] = ["a", "b", "c", "x y", "q\"t", "é", ""];
const INTS: [&str; 5] = ["1", "2", "-3", "40", "abc"];
const FLOATS: [&str; 4] = ["1.5", "-0.25", "2.0", "1e3"];
const BOOLEANS: [&str; 3] = ["true", "false", "1"];

/// A random schema in the bound SDL dialect. Every field carries an IRI
/// (directly or through its interface), so it validates in both ID modes.
pub fn random_schema<R: Rng>(rng: &mut R) -> (Schema, TermBinding) {
    let mut schema = Schema {
        query_root: "Query".into(),
        ..Schema::default()
    };
    let mut binding = TermBinding::default();
    let n_obj = rng.gen_range(2..=4);
    let objects: Vec<String> = (0..n_obj).map(|i| format!("T{i}")).collect();

    let iface = rng.gen_bool(0.6).then(|| "I0".to_owned());
    let mut implementors = Vec::new();
    if let Some(name) = &iface {
        for o in &objects {
            if rng.gen_bool(0.6) {
                implementors.push(o.clone());
            }
        }
        if implementors.is_empty() {
            implementors.push(objects[0].clone());
        }
        let mut ty = composite(name, Vec::new());
        add_field(&mut ty, "id", TypeRef::named("ID"));
        add_field(&mut ty, "name", TypeRef::named("String"));
        bind_field(&mut binding, name, "id", "id", false, false);
        bind_field(&mut binding, name, "name", "name", false, false);
        binding.types.insert(name.clone(), name.clone());
        schema.interfaces.insert(name.clone(), ty);
    }
    let union = rng.gen_bool(0.5).then(|| "U0".to_owned());
    if let Some(name) = &union {
        let mut members: Vec<String> = objects
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .cloned()
            .collect();
        if members.is_empty() {
            members.push(objects[objects.len() - 1].clone());
        }
        binding.types.insert(name.clone(), name.clone());
        schema.unions.insert(name.clone(), members);
    }

    // Scalar fields first, so argument lists can refer to them.
    for o in &objects {
        let implements = implementors.contains(o);
        let mut ty = composite(
            o,
            if implements {
                vec!["I0".to_owned()]
            } else {
                Vec::new()
            },
        );
        add_field(&mut ty, "id", TypeRef::named("ID"));
        if implements {
            add_field(&mut ty, "name", TypeRef::named("String"));
            // Half of the implementors inherit the interface bindings.
            if rng.gen_bool(0.5) {
                bind_field(&mut binding, o, "id", "id", false, false);
                bind_field(&mut binding, o, "name", "p0", false, false);
            }
        } else {
            bind_field(&mut binding, o, "id", "id", false, false);
        }
        for j in 0..rng.gen_range(1..=3) {
            let scalar = *SCALARS[..4].choose(rng).unwrap();
            let tr = if rng.gen_bool(0.15) {
                TypeRef::list_of(scalar)
            } else {
                TypeRef::named(scalar)
            };
            let field = format!("s{j}");
            add_field(&mut ty, &field, tr);
            bind_field(
                &mut binding,
                o,
                &field,
                SCALAR_PREDICATES.choose(rng).unwrap(),
                rng.gen_bool(0.1),
                false,
            );
        }
        binding.types.insert(o.clone(), o.clone());
        schema.objects.insert(o.clone(), ty);
    }

    let mut targets: Vec<String> = objects.clone();
    targets.extend(iface.clone());
    targets.extend(union.clone());
    let reference = |rng: &mut R, schema: &Schema, list_p: f64| -> FieldDef {
        let target = targets.choose(rng).unwrap().clone();
        let mut args = IndexMap::new();
        if schema.kind_of(&target) != Some(TypeKind::Union) && rng.gen_bool(0.35) {
            let ty = schema.composite(&target).unwrap();
            let scalars: Vec<&FieldDef> = ty
                .fields
                .values()
                .filter(|f| !f.ty.list && schema.is_scalar(&f.ty.name))
                .collect();
            let n = rng.gen_range(1..=2);
            for f in scalars.choose_multiple(rng, n) {
                args.insert(f.name.clone(), f.ty.clone());
            }
        }
        let ty = if rng.gen_bool(list_p) {
            TypeRef::list_of(target)
        } else {
            TypeRef::named(target)
        };
        FieldDef {
            name: String::new(),
            args,
            ty,
        }
    };
    for o in &objects {
        for j in 0..rng.gen_range(0..=3) {
            let mut def = reference(rng, &schema, 0.7);
            def.name = format!("r{j}");
            let inverse = rng.gen_bool(0.2);
            let filter = rng.gen_bool(0.2);
            bind_field(
                &mut binding,
                o,
                &def.name,
                EDGE_PREDICATES.choose(rng).unwrap(),
                inverse,
                filter,
            );
            schema.objects[o].fields.insert(def.name.clone(), def);
        }
    }
    let mut root = composite("Query", Vec::new());
    for j in 0..rng.gen_range(2..=4) {
        let mut def = reference(rng, &schema, 0.75);
        def.name = format!("q{j}");
        root.fields.insert(def.name.clone(), def);
    }
    schema.objects.insert("Query".into(), root);
    (schema, binding)
}

fn composite(name: &str, interfaces: Vec<String>) -> CompositeType {
    CompositeType {
        name: name.to_owned(),
        fields: IndexMap::new(),
        interfaces,
    }
}

fn add_field(ty: &mut CompositeType, name: &str, tr: TypeRef) {
    ty.fields.insert(
        name.to_owned(),
        FieldDef {
            name: name.to_owned(),
            args: IndexMap::new(),
            ty: tr,
        },
    );
}

fn bind_field(
    binding: &mut TermBinding,
    ty: &str,
    field: &str,
    iri: &str,
    inverse: bool,
    filter: bool,
) {
    binding.fields.insert(
        (ty.to_owned(), field.to_owned()),
        FieldBinding {
            iri: Some(iri.to_owned()),
            inverse,
            filter,
        },
    );
}

/// Knobs for [`random_graph`].
#[derive(Debug, Clone)]
pub struct GraphConfig {
    pub max_triples: usize,
    /// Probability that a typed node also receives a second object type.
    pub multi_type: f64,
    pub type_iri: String,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            max_triples: 50,
            multi_type: 0.0,
            type_iri: crate::rdf::RDF_TYPE.to_owned(),
        }
    }
}

/// A random graph shaped by the schema: typed nodes, edges along bound
/// fields and literals of roughly the declared scalar type, plus noise.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    schema: &Schema,
    binding: &TermBinding,
    cfg: &GraphConfig,
) -> Vec<TermTriple> {
    let mut triples: IndexSet<TermTriple> = IndexSet::new();
    let type_pred = Term::iri(cfg.type_iri.as_str());
    let objects: Vec<&str> = schema
        .object_types()
        .map(|t| t.name.as_str())
        .filter(|t| *t != schema.query_root())
        .collect();
    if objects.is_empty() || cfg.max_triples == 0 {
        return Vec::new();
    }
    let n_nodes = rng.gen_range(2..=8);
    let nodes: Vec<Term> = (0..n_nodes).map(|i| Term::iri(format!("n{i}"))).collect();
    let mut node_types: Vec<Vec<&str>> = vec![Vec::new(); n_nodes];
    let target = rng.gen_range(1..=cfg.max_triples);

    for (i, node) in nodes.iter().enumerate() {
        if !rng.gen_bool(0.9) {
            continue;
        }
        let mut types = vec![*objects.choose(rng).unwrap()];
        if rng.gen_bool(cfg.multi_type) {
            let other = *objects.choose(rng).unwrap();
            if !types.contains(&other) {
                types.push(other);
            }
        }
        for t in &types {
            let mut iris: Vec<&str> = binding.type_iri(t).into_iter().collect();
            for iface in &schema.composite(t).unwrap().interfaces {
                if rng.gen_bool(0.8) {
                    iris.extend(binding.type_iri(iface));
                }
            }
            for (u, members) in schema.union_types() {
                if members.iter().any(|m| m == t) && rng.gen_bool(0.8) {
                    iris.extend(binding.type_iri(u));
                }
            }
            for iri in iris {
                triples.insert((node.clone(), type_pred.clone(), Term::iri(iri)));
            }
        }
        node_types[i] = types;
    }

    let mut all_predicates: Vec<String> = Vec::new();
    for t in &objects {
        for f in schema.fields_of(t).unwrap() {
            if let Some(iri) = binding.field(schema, t, f).iri {
                if !all_predicates.contains(&iri) {
                    all_predicates.push(iri);
                }
            }
        }
    }
    if all_predicates.is_empty() {
        return triples.into_iter().take(cfg.max_triples).collect();
    }

    let mut attempts = 0;
    while triples.len() < target && attempts < 10 * cfg.max_triples {
        attempts += 1;
        let s = rng.gen_range(0..n_nodes);
        let field = node_types[s]
            .choose(rng)
            .filter(|_| rng.gen_bool(0.8))
            .and_then(|t| {
                let fields = schema.fields_of(t).unwrap();
                let f = *fields.choose(rng).unwrap();
                let def = schema.field(t, f).unwrap();
                let b = binding.field(schema, t, f);
                b.iri.map(|iri| (def.ty.name.clone(), iri, b.inverse))
            });
        let (ty, pred, inverse) = match field {
            Some(f) => f,
            None => {
                let p = all_predicates.choose(rng).unwrap().clone();
                let ty = if rng.gen_bool(0.5) { "String" } else { "Node" };
                (ty.to_owned(), p, false)
            }
        };
        let object = if schema.is_scalar(&ty) && rng.gen_bool(0.9) {
            random_literal(rng, &ty)
        } else if rng.gen_bool(0.95) {
            nodes.choose(rng).unwrap().clone()
        } else {
            random_literal(rng, "String")
        };
        let triple = if inverse && object.is_iri() {
            (object, Term::iri(pred), nodes[s].clone())
        } else {
            (nodes[s].clone(), Term::iri(pred), object)
        };
        triples.insert(triple);
    }
    triples.into_iter().take(cfg.max_triples).collect()
}

fn random_literal<R: Rng>(rng: &mut R, scalar: &str) -> Term {
    // An occasional literal of the wrong type exercises lenient rendering.
    let scalar = if rng.gen_bool(0.1) {
        *SCALARS.choose(rng).unwrap()
    } else {
        scalar
    };
    match scalar {
        "Int" => Term::typed_literal(*INTS.choose(rng).unwrap(), XSD_INTEGER),
        "Float" => Term::typed_literal(*FLOATS.choose(rng).unwrap(), XSD_DOUBLE),
        "Boolean" => Term::typed_literal(*BOOLEANS.choose(rng).unwrap(), XSD_BOOLEAN),
        "ID" => Term::literal(format!("n{}", rng.gen_range(0..8))),
        _ => Term::literal(*STRINGS.choose(rng).unwrap()),
    }
}

/// Knobs for [`random_query`].
#[derive(Debug, Clone)]
pub struct QueryConfig {
    /// Maximum field nesting; root fields are at depth 1.
    pub max_depth: usize,
    pub id_mode: IdMode,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            max_depth: 4,
            id_mode: IdMode::Direct,
        }
    }
}

/// A random valid query. Argument values are sampled from the literals the
/// data holds for the argument's predicate, so some of them match.
pub fn random_query<R: Rng>(
    rng: &mut R,
    schema: &Schema,
    binding: &TermBinding,
    data: &[TermTriple],
    cfg: &QueryConfig,
) -> QueryAst {
    let mut gen = QueryGen {
        rng,
        schema,
        binding,
        data,
        cfg,
        aliases: 0,
        nesting: 0,
    };
    let root = schema.query_root().to_owned();
    let selection = gen.selection(&root, 0);
    QueryAst { selection }
}

struct QueryGen<'a, R> {
    rng: &'a mut R,
    schema: &'a Schema,
    binding: &'a TermBinding,
    data: &'a [TermTriple],
    cfg: &'a QueryConfig,
    aliases: usize,
    /// Inline fragments directly enclosing the current selection.
    nesting: usize,
}

impl<R: Rng> QueryGen<'_, R> {
    /// A non-empty selection on `scope`, whose fields sit at `depth + 1`.
    fn selection(&mut self, scope: &str, depth: usize) -> Vec<Selection> {
        let mut out: Vec<Selection> = Vec::new();
        let want = self.rng.gen_range(1..=3);
        let mut tries = 0;
        while out.len() < want || out.is_empty() {
            tries += 1;
            if tries > 50 {
                break;
            }
            let fragment_p = if self.schema.kind_of(scope) == Some(TypeKind::Union) {
                1.0
            } else if self.nesting < 2 {
                0.25
            } else {
                0.0
            };
            if self.rng.gen_bool(fragment_p) {
                if let Some(frag) = self.fragment(scope, depth) {
                    out.push(Selection::Fragment(frag));
                }
                continue;
            }
            if self.rng.gen_bool(0.15) {
                let earlier: Vec<&Field> = out
                    .iter()
                    .filter_map(|s| match s {
                        Selection::Field(f) => Some(f),
                        _ => None,
                    })
                    .collect();
                if let Some(f) = earlier.choose(self.rng).map(|f| (*f).clone()) {
                    // Same key and arguments, possibly a different sub-selection.
                    let mut dup = f;
                    if dup.selection.is_some() {
                        let target = self.schema.type_of(scope, &dup.name).unwrap().name.clone();
                        let outer = std::mem::take(&mut self.nesting);
                        dup.selection = Some(self.selection(&target, depth + 1));
                        self.nesting = outer;
                    }
                    out.push(Selection::Field(dup));
                    continue;
                }
            }
            if let Some(field) = self.field(scope, depth) {
                out.push(Selection::Field(field));
            }
        }
        if out.is_empty() {
            // Fallback for scopes where random picks kept failing.
            if let Some(f) = self.field(scope, depth).or_else(|| self.leaf_only(scope)) {
                out.push(Selection::Field(f));
            }
        }
        out
    }

    fn leaf_only(&mut self, scope: &str) -> Option<Field> {
        let name = self
            .schema
            .fields_of(scope)?
            .into_iter()
            .find(|f| {
                self.schema
                    .is_scalar(&self.schema.type_of(scope, f).unwrap().name)
            })?
            .to_owned();
        Some(Field {
            alias: None,
            name,
            args: IndexMap::new(),
            selection: None,
            pos: Pos::default(),
        })
    }

    fn fragment(&mut self, scope: &str, depth: usize) -> Option<InlineFragment> {
        let mut candidates: Vec<String> = vec![scope.to_owned()];
        candidates.extend(
            self.schema
                .possible_types(scope)
                .into_iter()
                .map(str::to_owned),
        );
        candidates.dedup();
        if self.schema.kind_of(scope) == Some(TypeKind::Union) {
            candidates.retain(|c| c != scope);
        }
        let on = candidates.choose(self.rng)?.clone();
        self.nesting += 1;
        let selection = self.selection(&on, depth);
        self.nesting -= 1;
        (!selection.is_empty()).then_some(InlineFragment {
            on,
            selection,
            pos: Pos::default(),
        })
    }

    fn field(&mut self, scope: &str, depth: usize) -> Option<Field> {
        let fields = self.schema.fields_of(scope)?;
        let name = (*fields.choose(self.rng)?).to_owned();
        let def = self.schema.field(scope, &name)?.clone();
        let composite = !self.schema.is_scalar(&def.ty.name);
        if composite && depth + 1 >= self.cfg.max_depth {
            return None;
        }
        let mut args = IndexMap::new();
        for (arg, ty) in &def.args {
            if self.rng.gen_bool(0.4) {
                if let Some(v) = self.argument_value(&def.ty.name, arg, ty) {
                    args.insert(arg.clone(), v);
                }
            }
        }
        // Fields with arguments always get a fresh alias so that two picks
        // with different arguments never collide on one response key.
        let alias = (!args.is_empty() || self.rng.gen_bool(0.2)).then(|| {
            self.aliases += 1;
            format!("k{}", self.aliases)
        });
        let outer = std::mem::take(&mut self.nesting);
        let selection = composite.then(|| self.selection(&def.ty.name, depth + 1));
        self.nesting = outer;
        Some(Field {
            alias,
            name,
            args,
            selection,
            pos: Pos::default(),
        })
    }

    fn argument_value(&mut self, target: &str, arg: &str, ty: &TypeRef) -> Option<Value> {
        if ty.name == "ID" && self.cfg.id_mode == IdMode::Direct {
            let subjects: Vec<&str> = self
                .data
                .iter()
                .filter_map(|t| match &t.0 {
                    Term::Iri(iri) => Some(iri.as_str()),
                    _ => None,
                })
                .collect();
            let pick = subjects.choose(self.rng).copied().unwrap_or("n0");
            return Some(Value::String(pick.to_owned()));
        }
        let pred = self.binding.field(self.schema, target, arg).iri;
        let seen: Vec<&str> = self
            .data
            .iter()
            .filter(|t| matches!(&t.1, Term::Iri(p) if Some(p) == pred.as_ref()))
            .filter_map(|t| match &t.2 {
                Term::Literal(l) => Some(l.lexical()),
                _ => None,
            })
            .collect();
        let lexical = match seen.choose(self.rng) {
            Some(l) if self.rng.gen_bool(0.8) => (*l).to_owned(),
            _ => random_literal(self.rng, &ty.name).text().to_owned(),
        };
        match ty.name.as_str() {
            "Int" => lexical.parse::<i64>().ok().map(|_| Value::Int(lexical)),
            "Float" => {
                let ok = lexical.parse::<f64>().is_ok_and(f64::is_finite)
                    && crate::syntax::tokenize(&lexical).is_ok_and(|t| {
                        t.len() == 2
                            && matches!(
                                t[0].0,
                                crate::syntax::Token::Float(_) | crate::syntax::Token::Int(_)
                            )
                    });
                ok.then(|| {
                    if lexical.contains(['.', 'e', 'E']) {
                        Value::Float(lexical)
                    } else {
                        Value::Int(lexical)
                    }
                })
            }
            "Boolean" => match lexical.as_str() {
                "true" => Some(Value::Boolean(true)),
                "false" => Some(Value::Boolean(false)),
                _ => None,
            },
            _ => Some(Value::String(lexical)),
        }
    }
}
