//! In-memory RDF storage: N-Triples input, dictionary encoding and sorted
//! triple orderings.

mod index;
mod ntriples;
mod term;

pub use index::{Column, ColumnCursor, Position, Relation, Slot, Triple, TripleIndex};
pub use ntriples::{parse_ntriples, NTriplesError, NTriplesReader, TermTriple};
pub use term::{
    Dictionary, Literal, Term, TermId, TermOverlay, RDF_TYPE, XSD_BOOLEAN, XSD_DOUBLE, XSD_INTEGER,
    XSD_STRING,
};
