//! Synthetic data sets with a known response shape, used for scaling and
//! ID-mode measurements.

use crate::rdf::{Term, TermTriple, RDF_TYPE, XSD_DOUBLE, XSD_INTEGER};

/// A schema, its data and a query over them.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub schema: String,
    pub triples: Vec<TermTriple>,
    pub query: String,
}

impl Fixture {
    pub fn ntriples(&self) -> String {
        self.triples
            .iter()
            .map(|(s, p, o)| format!("{s} {p} {o} .\n"))
            .collect()
    }
}

pub const STAR_SCHEMA: &str = r#"type Sale @uri(value: "Sale") {
  id: ID @uri(value: "id")
  amount: Int @uri(value: "amount")
  product: Product @uri(value: "product")
  shop: Shop @uri(value: "shop")
  customer: Customer @uri(value: "customer")
}
type Product @uri(value: "Product") {
  id: ID @uri(value: "id")
  name: String @uri(value: "name")
  price: Float @uri(value: "price")
}
type Shop @uri(value: "Shop") {
  id: ID @uri(value: "id")
  city: String @uri(value: "city")
}
type Customer @uri(value: "Customer") {
  id: ID @uri(value: "id")
  name: String @uri(value: "name")
}
type Query {
  sales: [Sale]
  products: [Product]
}
"#;

pub const STAR_QUERY: &str =
    "{ sales { id amount product { name price } shop { city } customer { name } } }";

const DIMENSION: usize = 16;

/// A fact table of `facts` sales around three fixed-size dimensions. The
/// response of [`STAR_QUERY`] grows linearly in `facts`, while every sale
/// contributes the same number of bindings.
pub fn star(facts: usize) -> Fixture {
    let ty = Term::iri(RDF_TYPE);
    let p = |name: &str| Term::iri(name);
    let mut triples = Vec::new();
    for d in 0..DIMENSION {
        let product = Term::iri(format!("product{d}"));
        triples.push((product.clone(), ty.clone(), p("Product")));
        triples.push((
            product.clone(),
            p("name"),
            Term::literal(format!("Product {d}")),
        ));
        triples.push((
            product,
            p("price"),
            Term::typed_literal(format!("{d}.5"), XSD_DOUBLE),
        ));
        let shop = Term::iri(format!("shop{d}"));
        triples.push((shop.clone(), ty.clone(), p("Shop")));
        triples.push((shop, p("city"), Term::literal(format!("City {d}"))));
        let customer = Term::iri(format!("customer{d}"));
        triples.push((customer.clone(), ty.clone(), p("Customer")));
        triples.push((customer, p("name"), Term::literal(format!("Customer {d}"))));
    }
    for i in 0..facts {
        let sale = Term::iri(format!("sale{i}"));
        triples.push((sale.clone(), ty.clone(), p("Sale")));
        triples.push((sale.clone(), p("id"), Term::literal(format!("sale{i}"))));
        triples.push((
            sale.clone(),
            p("amount"),
            Term::typed_literal((i % 1000).to_string(), XSD_INTEGER),
        ));
        triples.push((
            sale.clone(),
            p("product"),
            Term::iri(format!("product{}", i % DIMENSION)),
        ));
        triples.push((
            sale.clone(),
            p("shop"),
            Term::iri(format!("shop{}", (i / 3) % DIMENSION)),
        ));
        triples.push((
            sale,
            p("customer"),
            Term::iri(format!("customer{}", (i / 7) % DIMENSION)),
        ));
    }
    Fixture {
        schema: STAR_SCHEMA.to_owned(),
        triples,
        query: STAR_QUERY.to_owned(),
    }
}

pub const ITEM_SCHEMA: &str = r#"type Item @uri(value: "Item") {
  id: ID @uri(value: "id")
  label: String @uri(value: "label")
}
type Query {
  items: [Item]
}
"#;

pub const ITEM_QUERY: &str = "{ items { id label } }";

/// `entities` typed items whose `id` literal spells the item's own IRI, so
/// both ID modes answer identically.
pub fn items(entities: usize) -> Fixture {
    let ty = Term::iri(RDF_TYPE);
    let mut triples = Vec::with_capacity(entities * 3);
    for i in 0..entities {
        let iri = format!("item{i}");
        let item = Term::iri(iri.as_str());
        triples.push((item.clone(), ty.clone(), Term::iri("Item")));
        triples.push((item.clone(), Term::iri("id"), Term::literal(iri)));
        triples.push((item, Term::iri("label"), Term::literal(format!("Item {i}"))));
    }
    Fixture {
        schema: ITEM_SCHEMA.to_owned(),
        triples,
        query: ITEM_QUERY.to_owned(),
    }
}
