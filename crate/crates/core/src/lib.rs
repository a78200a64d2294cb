//! GraphQL queries evaluated natively over an in-memory RDF triple store.
//!
//! A query is parsed, validated and normalized, turned into triple-pattern
//! operands linked by a dependency graph, and evaluated by a multi-way left
//! join whose solution mappings are folded straight into the response tree.

pub mod bench;
pub mod compare;
pub mod engine;
pub mod operands;
pub mod query;
pub mod rdf;
pub mod response;
pub mod schema;
pub mod store;
pub mod syntax;
pub mod synth;

pub use store::{Execution, QueryFailure, Store, StoreOptions};
