//! SDL subset: `schema`, `type` (with `impl` or `implements`), `interface`,
//! `union`, and the `@uri`, `@inverse`, `@filter` directives.

use std::fmt::Write;

use indexmap::IndexMap;

use super::{
    CompositeType, FieldBinding, FieldDef, Schema, SchemaError, SchemaErrorKind as K, TermBinding,
    TypeKind, TypeRef,
};
use crate::syntax::{Pos, Token, Tokens};

struct Directive {
    name: String,
    value: Option<String>,
    pos: Pos,
}

struct Parser {
    toks: Tokens,
    schema: Schema,
    binding: TermBinding,
    /// Type references to resolve once every definition is known.
    refs: Vec<(String, Pos)>,
    arg_refs: Vec<(String, String, String, Pos)>,
    unions: Vec<(String, String, Pos)>,
    impls: Vec<(String, String, Pos)>,
    explicit_root: Option<(String, Pos)>,
}

/// Parses SDL text into a schema and its RDF bindings.
pub fn parse_sdl(text: &str) -> Result<(Schema, TermBinding), SchemaError> {
    let mut p = Parser {
        toks: Tokens::new(text)?,
        schema: Schema::default(),
        binding: TermBinding::default(),
        refs: Vec::new(),
        arg_refs: Vec::new(),
        unions: Vec::new(),
        impls: Vec::new(),
        explicit_root: None,
    };
    p.document()?;
    p.resolve()?;
    Ok((p.schema, p.binding))
}

fn err(kind: K, pos: Pos) -> SchemaError {
    SchemaError::at(kind, Some(pos))
}

impl Parser {
    fn document(&mut self) -> Result<(), SchemaError> {
        loop {
            while matches!(self.toks.peek(), Token::Str(_)) {
                self.toks.next();
            }
            if self.toks.at_eof() {
                return Ok(());
            }
            let (kw, pos) = self.toks.expect_name()?;
            match kw.as_str() {
                "schema" => self.schema_def()?,
                "type" => self.composite(TypeKind::Object, pos)?,
                "interface" => self.composite(TypeKind::Interface, pos)?,
                "union" => self.union_def(pos)?,
                "scalar" => {
                    let (name, pos) = self.toks.expect_name()?;
                    return Err(err(K::CustomScalar(name), pos));
                }
                "enum" | "input" | "directive" | "extend" | "fragment" => {
                    return Err(err(K::Unsupported(format!("`{kw}` definitions")), pos));
                }
                _ => return Err(err(K::Syntax(format!("unexpected `{kw}`")), pos)),
            }
        }
    }

    fn schema_def(&mut self) -> Result<(), SchemaError> {
        self.toks.expect_punct('{')?;
        while !self.toks.eat_punct('}') {
            let (op, pos) = self.toks.expect_name()?;
            self.toks.expect_punct(':')?;
            let (ty, ty_pos) = self.toks.expect_name()?;
            match op.as_str() {
                "query" => self.explicit_root = Some((ty, ty_pos)),
                "mutation" | "subscription" => {
                    return Err(err(K::Unsupported(format!("{op} operations")), pos))
                }
                _ => return Err(err(K::Syntax(format!("unknown operation `{op}`")), pos)),
            }
        }
        Ok(())
    }

    fn declare(&mut self, name: &str, pos: Pos) -> Result<(), SchemaError> {
        if self.schema.kind_of(name).is_some() {
            return Err(err(K::DuplicateType(name.to_owned()), pos));
        }
        self.schema.positions.insert(name.to_owned(), pos);
        Ok(())
    }

    fn composite(&mut self, kind: TypeKind, _kw_pos: Pos) -> Result<(), SchemaError> {
        let (name, pos) = self.toks.expect_name()?;
        self.declare(&name, pos)?;
        let mut interfaces = Vec::new();
        if self.toks.is_keyword("impl") || self.toks.is_keyword("implements") {
            let kw_pos = self.toks.next().1;
            if kind == TypeKind::Interface {
                return Err(err(
                    K::Unsupported("interfaces implementing interfaces".into()),
                    kw_pos,
                ));
            }
            self.toks.eat_punct('&');
            loop {
                let (iface, ipos) = self.toks.expect_name()?;
                self.impls.push((name.clone(), iface.clone(), ipos));
                interfaces.push(iface);
                if !self.toks.eat_punct('&') && !matches!(self.toks.peek(), Token::Name(_)) {
                    break;
                }
            }
        }
        for d in self.directives()? {
            match d.name.as_str() {
                "uri" => {
                    self.binding
                        .types
                        .insert(name.clone(), d.value.unwrap_or_default());
                }
                "inverse" | "filter" => {
                    return Err(err(
                        K::MisplacedDirective {
                            directive: d.name,
                            on: format!("type `{name}`"),
                        },
                        d.pos,
                    ))
                }
                _ => unreachable!("directives() rejects unknown names"),
            }
        }
        let fields = self.fields(&name)?;
        let def = CompositeType {
            name: name.clone(),
            fields,
            interfaces,
        };
        match kind {
            TypeKind::Object => self.schema.objects.insert(name, def),
            _ => self.schema.interfaces.insert(name, def),
        };
        Ok(())
    }

    fn union_def(&mut self, _kw_pos: Pos) -> Result<(), SchemaError> {
        let (name, pos) = self.toks.expect_name()?;
        self.declare(&name, pos)?;
        for d in self.directives()? {
            if d.name == "uri" {
                self.binding
                    .types
                    .insert(name.clone(), d.value.unwrap_or_default());
            } else {
                return Err(err(
                    K::MisplacedDirective {
                        directive: d.name,
                        on: format!("union `{name}`"),
                    },
                    d.pos,
                ));
            }
        }
        let mut members = Vec::new();
        if self.toks.eat_punct('=') {
            self.toks.eat_punct('|');
            loop {
                let (member, mpos) = self.toks.expect_name()?;
                self.unions.push((name.clone(), member.clone(), mpos));
                members.push(member);
                if !self.toks.eat_punct('|') {
                    break;
                }
            }
        }
        self.schema.unions.insert(name, members);
        Ok(())
    }

    fn fields(&mut self, owner: &str) -> Result<IndexMap<String, FieldDef>, SchemaError> {
        let mut fields = IndexMap::new();
        if !self.toks.eat_punct('{') {
            return Ok(fields);
        }
        loop {
            while matches!(self.toks.peek(), Token::Str(_)) {
                self.toks.next();
            }
            if self.toks.eat_punct('}') {
                break;
            }
            let (fname, fpos) = self.toks.expect_name()?;
            let mut args = IndexMap::new();
            if self.toks.eat_punct('(') {
                while !self.toks.eat_punct(')') {
                    while matches!(self.toks.peek(), Token::Str(_)) {
                        self.toks.next();
                    }
                    let (aname, apos) = self.toks.expect_name()?;
                    self.toks.expect_punct(':')?;
                    let ty = self.type_ref(&format!("{owner}.{fname}({aname})"))?;
                    if self.toks.is_punct('=') {
                        return Err(err(
                            K::Unsupported("argument default values".into()),
                            self.toks.pos(),
                        ));
                    }
                    if let Some(d) = self.directives()?.into_iter().next() {
                        return Err(err(
                            K::MisplacedDirective {
                                directive: d.name,
                                on: format!("argument `{aname}`"),
                            },
                            d.pos,
                        ));
                    }
                    self.arg_refs
                        .push((fname.clone(), aname.clone(), ty.name.clone(), apos));
                    if args.insert(aname.clone(), ty).is_some() {
                        return Err(err(
                            K::DuplicateArgument {
                                field: fname,
                                arg: aname,
                            },
                            apos,
                        ));
                    }
                }
            }
            self.toks.expect_punct(':')?;
            let ty_pos = self.toks.pos();
            let ty = self.type_ref(&format!("{owner}.{fname}"))?;
            self.refs.push((ty.name.clone(), ty_pos));
            let mut fb = FieldBinding::default();
            for d in self.directives()? {
                match d.name.as_str() {
                    "uri" => fb.iri = d.value,
                    "inverse" => fb.inverse = true,
                    "filter" => fb.filter = true,
                    _ => unreachable!(),
                }
            }
            if fb != FieldBinding::default() {
                self.binding
                    .fields
                    .insert((owner.to_owned(), fname.clone()), fb);
            }
            self.schema
                .positions
                .insert(format!("{owner}.{fname}"), fpos);
            let def = FieldDef {
                name: fname.clone(),
                args,
                ty,
            };
            if fields.insert(fname.clone(), def).is_some() {
                return Err(err(
                    K::DuplicateField {
                        ty: owner.to_owned(),
                        field: fname,
                    },
                    fpos,
                ));
            }
        }
        Ok(fields)
    }

    /// `T`, `T!`, `[T]`, `[T!]!`. Non-null markers are accepted and dropped.
    fn type_ref(&mut self, site: &str) -> Result<TypeRef, SchemaError> {
        let ty = if self.toks.eat_punct('[') {
            if self.toks.is_punct('[') {
                return Err(err(K::NestedList(site.to_owned()), self.toks.pos()));
            }
            let (name, _) = self.toks.expect_name()?;
            self.toks.eat_punct('!');
            self.toks.expect_punct(']')?;
            TypeRef::list_of(name)
        } else {
            TypeRef::named(self.toks.expect_name()?.0)
        };
        self.toks.eat_punct('!');
        Ok(ty)
    }

    fn directives(&mut self) -> Result<Vec<Directive>, SchemaError> {
        let mut out = Vec::new();
        while self.toks.is_punct('@') {
            let pos = self.toks.next().1;
            let (name, _) = self.toks.expect_name()?;
            let mut value = None;
            match name.as_str() {
                "uri" => {
                    self.toks.expect_punct('(')?;
                    let (arg, apos) = self.toks.expect_name()?;
                    if arg != "value" {
                        return Err(err(
                            K::Syntax(format!("@uri takes `value`, found `{arg}`")),
                            apos,
                        ));
                    }
                    self.toks.expect_punct(':')?;
                    match self.toks.next() {
                        (Token::Str(s), _) => value = Some(s),
                        (_, p) => {
                            return Err(err(K::Syntax("@uri value must be a string".into()), p))
                        }
                    }
                    self.toks.expect_punct(')')?;
                }
                "inverse" | "filter" => {}
                _ => return Err(err(K::UnknownDirective(name), pos)),
            }
            out.push(Directive { name, value, pos });
        }
        Ok(out)
    }

    fn resolve(&mut self) -> Result<(), SchemaError> {
        let s = &self.schema;
        for (name, pos) in &self.refs {
            if s.kind_of(name).is_none() {
                return Err(err(K::UnknownType(name.clone()), *pos));
            }
        }
        for (field, arg, ty, pos) in &self.arg_refs {
            match s.kind_of(ty) {
                None => return Err(err(K::UnknownType(ty.clone()), *pos)),
                Some(TypeKind::Scalar) => {}
                Some(_) => {
                    return Err(err(
                        K::NonScalarArgument {
                            field: field.clone(),
                            arg: arg.clone(),
                        },
                        *pos,
                    ))
                }
            }
        }
        for (union, member, pos) in &self.unions {
            match s.kind_of(member) {
                None => return Err(err(K::UnknownType(member.clone()), *pos)),
                Some(TypeKind::Object) => {}
                Some(_) => {
                    return Err(err(
                        K::UnionMemberNotObject {
                            union: union.clone(),
                            member: member.clone(),
                        },
                        *pos,
                    ))
                }
            }
        }
        for (ty, target, pos) in &self.impls {
            match s.kind_of(target) {
                None => return Err(err(K::UnknownType(target.clone()), *pos)),
                Some(TypeKind::Interface) => {}
                Some(_) => {
                    return Err(err(
                        K::ImplementsNonInterface {
                            ty: ty.clone(),
                            target: target.clone(),
                        },
                        *pos,
                    ))
                }
            }
        }
        self.schema.query_root = match self.explicit_root.take() {
            Some((name, pos)) => {
                if s.kind_of(&name).is_none() {
                    return Err(err(K::UnknownType(name), pos));
                }
                name
            }
            None => "Query".to_owned(),
        };
        Ok(())
    }
}

/// Renders a schema and its bindings back to SDL accepted by [`parse_sdl`].
pub fn to_sdl(schema: &Schema, binding: &TermBinding) -> String {
    let mut out = String::new();
    let uri = |iri: Option<&str>| match iri {
        Some(iri) => format!(" @uri(value: {})", quote(iri)),
        None => String::new(),
    };
    let write_fields = |out: &mut String, ty: &CompositeType| {
        out.push_str(" {\n");
        for f in ty.fields.values() {
            let _ = write!(out, "  {}", f.name);
            if !f.args.is_empty() {
                let args: Vec<String> = f.args.iter().map(|(a, t)| format!("{a}: {t}")).collect();
                let _ = write!(out, "({})", args.join(", "));
            }
            let _ = write!(out, ": {}", f.ty);
            if let Some(b) = binding.declared_field(&ty.name, &f.name) {
                out.push_str(&uri(b.iri.as_deref()));
                if b.inverse {
                    out.push_str(" @inverse");
                }
                if b.filter {
                    out.push_str(" @filter");
                }
            }
            out.push('\n');
        }
        out.push_str("}\n");
    };
    for iface in schema.interfaces.values() {
        let _ = write!(
            out,
            "interface {}{}",
            iface.name,
            uri(binding.type_iri(&iface.name))
        );
        write_fields(&mut out, iface);
    }
    for obj in schema.objects.values() {
        let _ = write!(out, "type {}", obj.name);
        if !obj.interfaces.is_empty() {
            let _ = write!(out, " implements {}", obj.interfaces.join(" & "));
        }
        out.push_str(&uri(binding.type_iri(&obj.name)));
        write_fields(&mut out, obj);
    }
    for (name, members) in &schema.unions {
        let _ = writeln!(
            out,
            "union {name}{} = {}",
            uri(binding.type_iri(name)),
            members.join(" | ")
        );
    }
    let _ = writeln!(out, "schema {{ query: {} }}", schema.query_root);
    out
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}
