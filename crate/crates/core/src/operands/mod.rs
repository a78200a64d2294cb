//! Query operands (one triple pattern per field, argument, inline fragment
//! and type filter) and the dependency graph over them.

mod graph;

use std::fmt;

use crate::query::{NField, NSelection, NormalizedQuery, Value};
use crate::rdf::{Slot, Term, TermId, TermOverlay, XSD_BOOLEAN, XSD_DOUBLE, XSD_INTEGER};
use crate::schema::{IdMode, Schema, TermBinding, TypeRef};

pub use graph::{build_dependency_graph, DependencyGraph};

/// A query variable. Ids are dense and allocated in depth-first order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl Label {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// `x`, `y`, `z`, `w`, `v`, `u`, ... then suffixed repeats.
    pub fn display_name(self) -> String {
        const NAMES: &[u8] = b"xyzwvutsrqponmlkjihgfedcba";
        let i = self.index();
        let c = NAMES[i % NAMES.len()] as char;
        match i / NAMES.len() {
            0 => c.to_string(),
            round => format!("{c}{round}"),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.display_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    Triple([Slot<Label>; 3]),
    /// The label must be bound to exactly this term (an `ID` argument in
    /// direct mode).
    SameTerm {
        label: Label,
        term: TermId,
    },
}

impl Pattern {
    /// Distinct labels of the pattern in slot order.
    pub fn labels(&self) -> Vec<Label> {
        match self {
            Pattern::Triple(slots) => {
                let mut out: Vec<Label> = Vec::with_capacity(2);
                for l in slots.iter().filter_map(|s| s.var()) {
                    if !out.contains(&l) {
                        out.push(l);
                    }
                }
                out
            }
            Pattern::SameTerm { label, .. } => vec![*label],
        }
    }

    pub fn has_label(&self, label: Label) -> bool {
        match self {
            Pattern::Triple(slots) => slots.contains(&Slot::Var(label)),
            Pattern::SameTerm { label: l, .. } => *l == label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperandKind {
    Root,
    Inner,
    Leaf,
    Argument,
    Fragment,
    TypeFilter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operand {
    /// 1-based position in the operand list.
    pub index: usize,
    pub pattern: Pattern,
    pub kind: OperandKind,
    /// Response key of the field this operand belongs to, if any.
    pub response_key: Option<String>,
}

impl Operand {
    /// Renders as `⟨?x, rdf:type, Person⟩`.
    pub fn render(&self, overlay: &TermOverlay<'_>, type_pred: TermId) -> String {
        let term = |id: TermId| -> String {
            if id == type_pred {
                return "rdf:type".into();
            }
            match overlay.decode(id) {
                Some(Term::Iri(iri)) => iri.clone(),
                Some(t @ Term::Literal(_)) => t.to_string(),
                None => format!("#{}", id.0),
            }
        };
        match self.pattern {
            Pattern::Triple(slots) => {
                let parts: Vec<String> = slots
                    .iter()
                    .map(|s| match s {
                        Slot::Var(l) => l.to_string(),
                        Slot::Bound(id) => term(*id),
                    })
                    .collect();
                format!("⟨{}⟩", parts.join(", "))
            }
            Pattern::SameTerm { label, term: id } => format!("{label} = {}", term(id)),
        }
    }
}

/// Where a field's value comes from in a solution mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueSource {
    Label(Label),
    /// An `ID` leaf in direct mode: the text of the enclosing node's term.
    DirectId(Label),
}

/// The normalized query annotated with labels and operand positions; the
/// response builder walks it once per solution mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanField {
    pub key: String,
    pub ty: TypeRef,
    pub leaf: bool,
    pub value: ValueSource,
    /// Operand positions (0-based) of the field, its type filter and its
    /// arguments.
    pub field_ops: Vec<usize>,
    pub children: PlanChildren,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanChildren {
    None,
    Fields(Vec<PlanField>),
    Fragments(Vec<PlanFragment>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanFragment {
    pub on: String,
    /// Operand position (0-based) of the fragment's type test.
    pub operand: usize,
    pub fields: Vec<PlanField>,
}

#[derive(Debug, Clone)]
pub struct QueryOperands {
    pub operands: Vec<Operand>,
    pub label_count: usize,
    pub plan: Vec<PlanField>,
    pub type_pred: TermId,
}

impl QueryOperands {
    pub fn len(&self) -> usize {
        self.operands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operands.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> {
        (0..self.label_count as u32).map(Label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OperandError {
    #[error("no @uri binding for `{0}`")]
    MissingBinding(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperandOptions {
    pub id_mode: IdMode,
    pub type_iri: String,
}

impl Default for OperandOptions {
    fn default() -> Self {
        OperandOptions {
            id_mode: IdMode::Direct,
            type_iri: crate::rdf::RDF_TYPE.to_owned(),
        }
    }
}

pub(crate) fn is_id_type(ty: &TypeRef) -> bool {
    ty.name == "ID" && !ty.list
}

/// Term for an argument literal, chosen by the argument's declared type.
pub fn argument_term(ty: &TypeRef, value: &Value) -> Term {
    let lexical = value.lexical();
    match ty.name.as_str() {
        "Int" => Term::typed_literal(lexical, XSD_INTEGER),
        "Float" => Term::typed_literal(lexical, XSD_DOUBLE),
        "Boolean" => Term::typed_literal(lexical, XSD_BOOLEAN),
        _ => Term::literal(lexical),
    }
}

/// Generates the operands of a normalized query together with the labelled
/// plan tree. Terms that do not occur in the data are interned into
/// `overlay` with fresh ids.
pub fn generate_operands(
    schema: &Schema,
    binding: &TermBinding,
    query: &NormalizedQuery,
    overlay: &mut TermOverlay<'_>,
    options: &OperandOptions,
) -> Result<QueryOperands, OperandError> {
    let type_pred = overlay.intern(Term::iri(options.type_iri.as_str()));
    let mut gen = Gen {
        schema,
        binding,
        overlay,
        id_mode: options.id_mode,
        type_pred,
        operands: Vec::new(),
        labels: 0,
    };
    let mut plan = Vec::with_capacity(query.fields.len());
    for f in &query.fields {
        plan.push(gen.root_field(f)?);
    }
    Ok(QueryOperands {
        operands: gen.operands,
        label_count: gen.labels as usize,
        plan,
        type_pred,
    })
}

struct Gen<'a, 'o, 'd> {
    schema: &'a Schema,
    binding: &'a TermBinding,
    overlay: &'o mut TermOverlay<'d>,
    id_mode: IdMode,
    type_pred: TermId,
    operands: Vec<Operand>,
    labels: u32,
}

impl Gen<'_, '_, '_> {
    fn label(&mut self) -> Label {
        self.labels += 1;
        Label(self.labels - 1)
    }

    fn push(&mut self, pattern: Pattern, kind: OperandKind, key: Option<&str>) -> usize {
        let pos = self.operands.len();
        self.operands.push(Operand {
            index: pos + 1,
            pattern,
            kind,
            response_key: key.map(str::to_owned),
        });
        pos
    }

    fn type_term(&mut self, ty: &str) -> Result<TermId, OperandError> {
        let iri = self
            .binding
            .type_iri(ty)
            .ok_or_else(|| OperandError::MissingBinding(ty.to_owned()))?;
        Ok(self.overlay.intern(Term::iri(iri)))
    }

    fn type_test(
        &mut self,
        label: Label,
        ty: &str,
        kind: OperandKind,
        key: Option<&str>,
    ) -> Result<usize, OperandError> {
        let t = self.type_term(ty)?;
        Ok(self.push(
            Pattern::Triple([
                Slot::Var(label),
                Slot::Bound(self.type_pred),
                Slot::Bound(t),
            ]),
            kind,
            key,
        ))
    }

    fn root_field(&mut self, f: &NField) -> Result<PlanField, OperandError> {
        let x = self.label();
        let op = self.type_test(x, &f.ty.name, OperandKind::Root, Some(&f.key))?;
        let mut field_ops = vec![op];
        self.arguments(f, x, &mut field_ops)?;
        let children = self.children(&f.selection, x)?;
        Ok(PlanField {
            key: f.key.clone(),
            ty: f.ty.clone(),
            leaf: false,
            value: ValueSource::Label(x),
            field_ops,
            children,
        })
    }

    fn inner_field(&mut self, f: &NField, parent: Label) -> Result<PlanField, OperandError> {
        let leaf = matches!(f.selection, NSelection::Leaf);
        if leaf && self.id_mode == IdMode::Direct && is_id_type(&f.ty) {
            return Ok(PlanField {
                key: f.key.clone(),
                ty: f.ty.clone(),
                leaf,
                value: ValueSource::DirectId(parent),
                field_ops: Vec::new(),
                children: PlanChildren::None,
            });
        }
        let b = self.binding.field(self.schema, &f.parent, &f.name);
        let pred = self.predicate(b.iri.as_deref(), &f.parent, &f.name)?;
        let n = self.label();
        let (s, o) = if b.inverse { (n, parent) } else { (parent, n) };
        let kind = if leaf {
            OperandKind::Leaf
        } else {
            OperandKind::Inner
        };
        let op = self.push(
            Pattern::Triple([Slot::Var(s), Slot::Bound(pred), Slot::Var(o)]),
            kind,
            Some(&f.key),
        );
        let mut field_ops = vec![op];
        if !leaf && b.filter {
            field_ops.push(self.type_test(n, &f.ty.name, OperandKind::TypeFilter, Some(&f.key))?);
        }
        self.arguments(f, n, &mut field_ops)?;
        let children = self.children(&f.selection, n)?;
        Ok(PlanField {
            key: f.key.clone(),
            ty: f.ty.clone(),
            leaf,
            value: ValueSource::Label(n),
            field_ops,
            children,
        })
    }

    fn predicate(
        &mut self,
        iri: Option<&str>,
        ty: &str,
        field: &str,
    ) -> Result<TermId, OperandError> {
        let iri = iri.ok_or_else(|| OperandError::MissingBinding(format!("{ty}.{field}")))?;
        Ok(self.overlay.intern(Term::iri(iri)))
    }

    fn arguments(
        &mut self,
        f: &NField,
        var: Label,
        ops: &mut Vec<usize>,
    ) -> Result<(), OperandError> {
        if f.args.is_empty() {
            return Ok(());
        }
        let def = self
            .schema
            .field(&f.parent, &f.name)
            .expect("normalized fields exist in the schema");
        for (arg, value) in &f.args {
            let arg_ty = &def.args[arg];
            let pattern = if self.id_mode == IdMode::Direct && is_id_type(arg_ty) {
                let term = self.overlay.intern(Term::iri(value.lexical()));
                Pattern::SameTerm { label: var, term }
            } else {
                let b = self.binding.field(self.schema, &f.ty.name, arg);
                let pred = self.predicate(b.iri.as_deref(), &f.ty.name, arg)?;
                let v = self.overlay.intern(argument_term(arg_ty, value));
                if b.inverse {
                    Pattern::Triple([Slot::Bound(v), Slot::Bound(pred), Slot::Var(var)])
                } else {
                    Pattern::Triple([Slot::Var(var), Slot::Bound(pred), Slot::Bound(v)])
                }
            };
            ops.push(self.push(pattern, OperandKind::Argument, Some(&f.key)));
        }
        Ok(())
    }

    fn children(&mut self, sel: &NSelection, var: Label) -> Result<PlanChildren, OperandError> {
        Ok(match sel {
            NSelection::Leaf => PlanChildren::None,
            NSelection::Fields(fs) => PlanChildren::Fields(
                fs.iter()
                    .map(|f| self.inner_field(f, var))
                    .collect::<Result<_, _>>()?,
            ),
            NSelection::Fragments(frs) => {
                let mut out = Vec::with_capacity(frs.len());
                for fr in frs {
                    let operand = self.type_test(var, &fr.on, OperandKind::Fragment, None)?;
                    let fields = fr
                        .fields
                        .iter()
                        .map(|f| self.inner_field(f, var))
                        .collect::<Result<_, _>>()?;
                    out.push(PlanFragment {
                        on: fr.on.clone(),
                        operand,
                        fields,
                    });
                }
                PlanChildren::Fragments(out)
            }
        })
    }
}
