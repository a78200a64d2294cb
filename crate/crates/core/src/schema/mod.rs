//! GraphQL schemas as the six-component structure (fields, args, types,
//! unions, implementations, query root) plus the `@uri`, `@inverse` and
//! `@filter` bindings that tie types and fields to RDF terms.

mod sdl;
mod validate;

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;

use crate::syntax::{Pos, SyntaxError};

pub use sdl::{parse_sdl, to_sdl};
pub use validate::validate_schema;

pub const BUILTIN_SCALARS: [&str; 5] = ["String", "Int", "Float", "Boolean", "ID"];

/// How fields of scalar type `ID` are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum IdMode {
    /// The value is the IRI of the enclosing node; no data access.
    #[default]
    Direct,
    /// Treated like any other string leaf, looked up through its `@uri`.
    Join,
}

impl std::str::FromStr for IdMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(IdMode::Direct),
            "join" => Ok(IdMode::Join),
            other => Err(format!(
                "unknown id mode `{other}` (expected direct or join)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeKind {
    Object,
    Interface,
    Union,
    Scalar,
}

/// A named type or a list of one (`T` or `[T]`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeRef {
    pub name: String,
    pub list: bool,
}

impl TypeRef {
    pub fn named(name: impl Into<String>) -> Self {
        TypeRef {
            name: name.into(),
            list: false,
        }
    }

    pub fn list_of(name: impl Into<String>) -> Self {
        TypeRef {
            name: name.into(),
            list: true,
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.list {
            write!(f, "[{}]", self.name)
        } else {
            f.write_str(&self.name)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub args: IndexMap<String, TypeRef>,
    pub ty: TypeRef,
}

/// Object or interface type: a name and its fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeType {
    pub name: String,
    pub fields: IndexMap<String, FieldDef>,
    /// Interfaces this object type implements (empty for interfaces).
    pub interfaces: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Schema {
    pub(crate) objects: IndexMap<String, CompositeType>,
    pub(crate) interfaces: IndexMap<String, CompositeType>,
    pub(crate) unions: IndexMap<String, Vec<String>>,
    pub(crate) query_root: String,
    /// Declaration sites, keyed by `Type` or `Type.field`. Not part of equality.
    pub(crate) positions: HashMap<String, Pos>,
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        self.objects == other.objects
            && self.interfaces == other.interfaces
            && self.unions == other.unions
            && self.query_root == other.query_root
    }
}

impl Schema {
    pub fn query_root(&self) -> &str {
        &self.query_root
    }

    pub fn kind_of(&self, name: &str) -> Option<TypeKind> {
        if self.objects.contains_key(name) {
            Some(TypeKind::Object)
        } else if self.interfaces.contains_key(name) {
            Some(TypeKind::Interface)
        } else if self.unions.contains_key(name) {
            Some(TypeKind::Union)
        } else if BUILTIN_SCALARS.contains(&name) {
            Some(TypeKind::Scalar)
        } else {
            None
        }
    }

    pub fn is_scalar(&self, name: &str) -> bool {
        self.kind_of(name) == Some(TypeKind::Scalar)
    }

    pub fn is_abstract(&self, name: &str) -> bool {
        matches!(
            self.kind_of(name),
            Some(TypeKind::Interface | TypeKind::Union)
        )
    }

    pub fn object_types(&self) -> impl Iterator<Item = &CompositeType> {
        self.objects.values()
    }

    pub fn interface_types(&self) -> impl Iterator<Item = &CompositeType> {
        self.interfaces.values()
    }

    pub fn union_types(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.unions.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn composite(&self, name: &str) -> Option<&CompositeType> {
        self.objects.get(name).or_else(|| self.interfaces.get(name))
    }

    /// `fields_S(t)` for object and interface types.
    pub fn fields_of(&self, ty: &str) -> Option<Vec<&str>> {
        self.composite(ty)
            .map(|c| c.fields.keys().map(String::as_str).collect())
    }

    pub fn field(&self, ty: &str, field: &str) -> Option<&FieldDef> {
        self.composite(ty)?.fields.get(field)
    }

    /// `args_S(f)` for the field `f` declared on `ty`.
    pub fn args_of(&self, ty: &str, field: &str) -> Option<Vec<&str>> {
        self.field(ty, field)
            .map(|f| f.args.keys().map(String::as_str).collect())
    }

    /// `types_S(f)` for the field `f` declared on `ty`.
    pub fn type_of(&self, ty: &str, field: &str) -> Option<&TypeRef> {
        self.field(ty, field).map(|f| &f.ty)
    }

    /// `unions_S(u)`.
    pub fn union_members(&self, name: &str) -> Option<&[String]> {
        self.unions.get(name).map(Vec::as_slice)
    }

    /// `impl_S(i)`, in object declaration order.
    pub fn implementors(&self, interface: &str) -> Vec<&str> {
        self.objects
            .values()
            .filter(|o| o.interfaces.iter().any(|i| i == interface))
            .map(|o| o.name.as_str())
            .collect()
    }

    /// Concrete object types a value of type `name` may have at runtime.
    pub fn possible_types(&self, name: &str) -> Vec<&str> {
        match self.kind_of(name) {
            Some(TypeKind::Object) => vec![self.objects.get_key_value(name).unwrap().0.as_str()],
            Some(TypeKind::Interface) => self.implementors(name),
            Some(TypeKind::Union) => self.unions[name].iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }

    pub fn position(&self, key: &str) -> Option<Pos> {
        self.positions.get(key).copied()
    }
}

/// RDF bindings attached to a field definition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FieldBinding {
    pub iri: Option<String>,
    pub inverse: bool,
    pub filter: bool,
}

impl FieldBinding {
    fn is_empty(&self) -> bool {
        self.iri.is_none() && !self.inverse && !self.filter
    }
}

/// Type and field IRIs taken from `@uri`, plus field flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermBinding {
    pub(crate) types: HashMap<String, String>,
    pub(crate) fields: HashMap<(String, String), FieldBinding>,
}

impl TermBinding {
    pub fn type_iri(&self, ty: &str) -> Option<&str> {
        self.types.get(ty).map(String::as_str)
    }

    /// Binding as declared on `ty.field`, without inheritance.
    pub fn declared_field(&self, ty: &str, field: &str) -> Option<&FieldBinding> {
        self.fields.get(&(ty.to_owned(), field.to_owned()))
    }

    /// Effective binding of `ty.field`. An object field that carries no
    /// directives inherits the binding of the same field on the first
    /// implemented interface that declares one.
    pub fn field(&self, schema: &Schema, ty: &str, field: &str) -> FieldBinding {
        if let Some(own) = self.declared_field(ty, field) {
            if !own.is_empty() {
                return own.clone();
            }
        }
        if let Some(obj) = schema.objects.get(ty) {
            for iface in &obj.interfaces {
                if let Some(b) = self.declared_field(iface, field) {
                    if !b.is_empty() {
                        return b.clone();
                    }
                }
            }
        }
        FieldBinding::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaErrorKind {
    Syntax(String),
    DuplicateType(String),
    DuplicateField {
        ty: String,
        field: String,
    },
    DuplicateArgument {
        field: String,
        arg: String,
    },
    UnknownType(String),
    UnionMemberNotObject {
        union: String,
        member: String,
    },
    NonScalarArgument {
        field: String,
        arg: String,
    },
    ImplementsNonInterface {
        ty: String,
        target: String,
    },
    MisplacedDirective {
        directive: String,
        on: String,
    },
    UnknownDirective(String),
    CustomScalar(String),
    Unsupported(String),
    NestedList(String),
    MissingQueryRoot(String),
    EmptyUnion(String),
    LeafFieldArguments {
        ty: String,
        field: String,
    },
    ArgumentNotScalarField {
        ty: String,
        field: String,
        arg: String,
    },
    RootFieldNotComposite {
        field: String,
    },
    InterfaceFieldMissing {
        ty: String,
        interface: String,
        field: String,
    },
    InterfaceFieldType {
        ty: String,
        interface: String,
        field: String,
    },
    MissingUri(String),
}

impl fmt::Display for SchemaErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SchemaErrorKind::*;
        match self {
            Syntax(m) => write!(f, "syntax error: {m}"),
            DuplicateType(t) => write!(f, "duplicate type name `{t}`"),
            DuplicateField { ty, field } => write!(f, "duplicate field `{ty}.{field}`"),
            DuplicateArgument { field, arg } => {
                write!(f, "duplicate argument `{arg}` on field `{field}`")
            }
            UnknownType(t) => write!(f, "unknown type `{t}`"),
            UnionMemberNotObject { union, member } => {
                write!(f, "union `{union}` member `{member}` is not an object type")
            }
            NonScalarArgument { field, arg } => {
                write!(f, "argument `{arg}` of field `{field}` must be scalar")
            }
            ImplementsNonInterface { ty, target } => {
                write!(
                    f,
                    "type `{ty}` implements `{target}`, which is not an interface"
                )
            }
            MisplacedDirective { directive, on } => {
                write!(f, "directive `@{directive}` is not allowed on {on}")
            }
            UnknownDirective(d) => write!(f, "unknown directive `@{d}`"),
            CustomScalar(s) => write!(f, "custom scalar `{s}` is not supported"),
            Unsupported(what) => write!(f, "unsupported definition: {what}"),
            NestedList(field) => write!(f, "nested list type on `{field}`"),
            MissingQueryRoot(t) => write!(f, "query root `{t}` is not an object type"),
            EmptyUnion(u) => write!(f, "union `{u}` has no members"),
            LeafFieldArguments { ty, field } => {
                write!(f, "leaf field `{ty}.{field}` must not declare arguments")
            }
            ArgumentNotScalarField { ty, field, arg } => write!(
                f,
                "argument `{arg}` of `{ty}.{field}` is not a scalar field of the field's type"
            ),
            RootFieldNotComposite { field } => {
                write!(
                    f,
                    "root field `{field}` must have an object, interface or union type"
                )
            }
            InterfaceFieldMissing {
                ty,
                interface,
                field,
            } => {
                write!(
                    f,
                    "type `{ty}` lacks field `{field}` of interface `{interface}`"
                )
            }
            InterfaceFieldType {
                ty,
                interface,
                field,
            } => write!(
                f,
                "type `{ty}` declares `{field}` with a type differing from interface `{interface}`"
            ),
            MissingUri(element) => write!(f, "missing @uri binding on `{element}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SchemaError {
    pub kind: SchemaErrorKind,
    pub pos: Option<Pos>,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(pos) => write!(f, "{pos}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl SchemaError {
    pub(crate) fn at(kind: SchemaErrorKind, pos: Option<Pos>) -> Self {
        SchemaError { kind, pos }
    }
}

impl From<SyntaxError> for SchemaError {
    fn from(e: SyntaxError) -> Self {
        SchemaError::at(SchemaErrorKind::Syntax(e.message), Some(e.pos))
    }
}
