//! Sorted triple orderings and pattern slices over them.
//!
//! Three cyclic orderings (SPO, POS, OSP) are kept. Every set of bound
//! positions is a prefix of one of them, so any pattern resolves to one
//! contiguous range with two binary searches. A column whose position
//! directly follows the bound prefix in some ordering is iterated in place;
//! the three remaining shapes (`{S}`→O, `{P}`→S, `{O}`→P) are collected and
//! sorted on demand.

use std::hash::{DefaultHasher, Hash, Hasher};

use super::ntriples::{NTriplesError, NTriplesReader, TermTriple};
use super::term::{Dictionary, Term, TermId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: TermId,
    pub predicate: TermId,
    pub object: TermId,
}

impl Triple {
    pub fn new(subject: TermId, predicate: TermId, object: TermId) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }

    fn as_array(self) -> [TermId; 3] {
        [self.subject, self.predicate, self.object]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    Subject = 0,
    Predicate = 1,
    Object = 2,
}

impl Position {
    pub const ALL: [Position; 3] = [Position::Subject, Position::Predicate, Position::Object];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Order {
    Spo,
    Pos,
    Osp,
}

impl Order {
    const ALL: [Order; 3] = [Order::Spo, Order::Pos, Order::Osp];

    /// Triple position stored at each key position.
    fn perm(self) -> [usize; 3] {
        match self {
            Order::Spo => [0, 1, 2],
            Order::Pos => [1, 2, 0],
            Order::Osp => [2, 0, 1],
        }
    }

    fn slot(self) -> usize {
        self as usize
    }

    fn permute(self, t: [TermId; 3]) -> [TermId; 3] {
        let p = self.perm();
        [t[p[0]], t[p[1]], t[p[2]]]
    }

    fn unpermute(self, row: [TermId; 3]) -> [TermId; 3] {
        let p = self.perm();
        let mut t = [TermId(0); 3];
        for k in 0..3 {
            t[p[k]] = row[k];
        }
        t
    }

    /// An ordering whose first `bound.count()` keys are exactly the bound
    /// positions and, if requested, whose next key is `next`.
    fn covering(bound: [bool; 3], next: Option<usize>) -> Option<Order> {
        let k = bound.iter().filter(|b| **b).count();
        Order::ALL.into_iter().find(|order| {
            let p = order.perm();
            p[..k].iter().all(|&pos| bound[pos]) && next.is_none_or(|n| k < 3 && p[k] == n)
        })
    }
}

/// One position of a slice pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot<V> {
    Bound(TermId),
    Var(V),
}

impl<V: Copy + Eq> Slot<V> {
    pub fn var(self) -> Option<V> {
        match self {
            Slot::Var(v) => Some(v),
            Slot::Bound(_) => None,
        }
    }

    pub fn term(self) -> Option<TermId> {
        match self {
            Slot::Bound(t) => Some(t),
            Slot::Var(_) => None,
        }
    }
}

/// The loaded graph: dictionary plus three deduplicated sorted orderings.
#[derive(Debug, Clone, Default)]
pub struct TripleIndex {
    dict: Dictionary,
    orders: [Vec<[TermId; 3]>; 3],
}

impl TripleIndex {
    /// Builds the index from decoded triples. Duplicates collapse.
    pub fn load(triples: impl IntoIterator<Item = TermTriple>) -> Self {
        let mut dict = Dictionary::new();
        let encoded: Vec<Triple> = triples
            .into_iter()
            .map(|(s, p, o)| {
                let s = dict.intern(s);
                let p = dict.intern(p);
                let o = dict.intern(o);
                Triple::new(s, p, o)
            })
            .collect();
        Self::from_encoded(dict, encoded)
    }

    pub fn load_ntriples(reader: impl std::io::BufRead) -> Result<Self, NTriplesError> {
        let triples = NTriplesReader::new(reader).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::load(triples))
    }

    pub fn from_encoded(dict: Dictionary, triples: Vec<Triple>) -> Self {
        let orders = Order::ALL.map(|order| {
            let mut rows: Vec<[TermId; 3]> = triples
                .iter()
                .map(|t| order.permute(t.as_array()))
                .collect();
            rows.sort_unstable();
            rows.dedup();
            rows
        });
        TripleIndex { dict, orders }
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.dict.lookup(term)
    }

    pub fn decode(&self, id: TermId) -> Option<&Term> {
        self.dict.decode(id)
    }

    pub fn len(&self) -> usize {
        self.orders[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders[0].is_empty()
    }

    /// All triples in subject-major order.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.orders[Order::Spo.slot()]
            .iter()
            .map(|r| Triple::new(r[0], r[1], r[2]))
    }

    pub fn contains(&self, triple: Triple) -> bool {
        self.orders[Order::Spo.slot()]
            .binary_search(&triple.as_array())
            .is_ok()
    }

    /// Stable content hash of the dictionary and every ordering.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for (_, term) in self.dict.iter() {
            term.hash(&mut h);
        }
        self.orders.hash(&mut h);
        h.finish()
    }

    /// Matches of `pattern`. Unknown ids simply match nothing.
    pub fn slice<V: Copy + Eq>(&self, pattern: [Slot<V>; 3]) -> Relation<'_, V> {
        let bound = pattern.map(|s| matches!(s, Slot::Bound(_)));
        let order = Order::covering(bound, None).expect("some ordering covers every bound set");
        let rows = self.prefix_range(order, &pattern, &self.orders[order.slot()]);
        Relation {
            index: self,
            pattern,
            order,
            rows,
        }
    }

    fn prefix_range<'a, V: Copy>(
        &self,
        order: Order,
        pattern: &[Slot<V>; 3],
        within: &'a [[TermId; 3]],
    ) -> &'a [[TermId; 3]] {
        let perm = order.perm();
        let mut key = Vec::with_capacity(3);
        for &pos in &perm {
            match pattern[pos] {
                Slot::Bound(t) => key.push(t),
                Slot::Var(_) => break,
            }
        }
        let k = key.len();
        if k == 0 {
            return within;
        }
        let lo = within.partition_point(|row| row[..k] < key[..]);
        let hi = lo + within[lo..].partition_point(|row| row[..k] == key[..]);
        &within[lo..hi]
    }
}

/// The bindings of a pattern's variables against the index.
#[derive(Debug, Clone, Copy)]
pub struct Relation<'a, V> {
    index: &'a TripleIndex,
    pattern: [Slot<V>; 3],
    order: Order,
    rows: &'a [[TermId; 3]],
}

impl<'a, V: Copy + Eq> Relation<'a, V> {
    pub fn pattern(&self) -> [Slot<V>; 3] {
        self.pattern
    }

    pub fn index(&self) -> &'a TripleIndex {
        self.index
    }

    fn has_repeated_var(&self) -> bool {
        let vars: Vec<V> = self.pattern.iter().filter_map(|s| s.var()).collect();
        (0..vars.len()).any(|i| vars[i + 1..].contains(&vars[i]))
    }

    fn consistent(&self, t: &[TermId; 3]) -> bool {
        for i in 0..3 {
            for j in i + 1..3 {
                if let (Slot::Var(a), Slot::Var(b)) = (self.pattern[i], self.pattern[j]) {
                    if a == b && t[i] != t[j] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Matching triples, in the order of the ordering used for the slice.
    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        let order = self.order;
        self.rows
            .iter()
            .map(move |row| order.unpermute(*row))
            .filter(|t| self.consistent(t))
            .map(|t| Triple::new(t[0], t[1], t[2]))
    }

    pub fn is_empty(&self) -> bool {
        if self.has_repeated_var() {
            self.triples().next().is_none()
        } else {
            self.rows.is_empty()
        }
    }

    /// Upper bound on the number of matching triples.
    pub fn size_hint(&self) -> usize {
        self.rows.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = V> + '_ {
        let mut seen: Vec<V> = Vec::with_capacity(3);
        self.pattern.iter().filter_map(move |s| {
            let v = s.var()?;
            if seen.contains(&v) {
                None
            } else {
                seen.push(v);
                Some(v)
            }
        })
    }

    pub fn contains_var(&self, var: V) -> bool {
        self.pattern.contains(&Slot::Var(var))
    }

    /// Narrows the relation by fixing `var` to `value`.
    pub fn bind(&self, var: V, value: TermId) -> Relation<'a, V> {
        let pattern = self.pattern.map(|s| match s {
            Slot::Var(v) if v == var => Slot::Bound(value),
            other => other,
        });
        let bound = pattern.map(|s| matches!(s, Slot::Bound(_)));
        let order = Order::covering(bound, None).expect("some ordering covers every bound set");
        let within: &'a [[TermId; 3]] = if order == self.order {
            self.rows
        } else {
            &self.index.orders[order.slot()]
        };
        let rows = self.index.prefix_range(order, &pattern, within);
        Relation {
            index: self.index,
            pattern,
            order,
            rows,
        }
    }

    /// Distinct values of `var`, ascending.
    pub fn column(&self, var: V) -> Column<'a> {
        let Some(pos) = self.pattern.iter().position(|s| *s == Slot::Var(var)) else {
            return Column::Empty;
        };
        let bound = self.pattern.map(|s| matches!(s, Slot::Bound(_)));
        if !self.has_repeated_var() {
            if let Some(order) = Order::covering(bound, Some(pos)) {
                let rows = if order == self.order {
                    self.rows
                } else {
                    self.index
                        .prefix_range(order, &self.pattern, &self.index.orders[order.slot()])
                };
                let key = bound.iter().filter(|b| **b).count();
                return Column::Sorted { rows, key };
            }
        }
        let mut values: Vec<TermId> = self
            .rows
            .iter()
            .map(|row| self.order.unpermute(*row))
            .filter(|t| self.consistent(t))
            .map(|t| t[pos])
            .collect();
        values.sort_unstable();
        values.dedup();
        Column::Owned(values)
    }
}

/// A sorted, duplicate-free sequence of values for one variable.
#[derive(Debug, Clone)]
pub enum Column<'a> {
    /// Rows sorted on `key`; equal keys are adjacent and skipped as a group.
    Sorted {
        rows: &'a [[TermId; 3]],
        key: usize,
    },
    /// Values collected for shapes no ordering serves directly.
    Owned(Vec<TermId>),
    Single(TermId),
    Empty,
}

impl<'a> Column<'a> {
    /// Number of values held in memory outside the index itself.
    pub fn buffered_len(&self) -> usize {
        match self {
            Column::Owned(v) => v.len(),
            _ => 0,
        }
    }

    /// Upper bound on the number of distinct values.
    pub fn size_hint(&self) -> usize {
        match self {
            Column::Sorted { rows, .. } => rows.len(),
            Column::Owned(v) => v.len(),
            Column::Single(_) => 1,
            Column::Empty => 0,
        }
    }

    pub fn cursor(self) -> ColumnCursor<'a> {
        ColumnCursor {
            column: self,
            pos: 0,
        }
    }

    pub fn to_vec(self) -> Vec<TermId> {
        let mut cursor = self.cursor();
        let mut out = Vec::new();
        while let Some(v) = cursor.current() {
            out.push(v);
            cursor.advance();
        }
        out
    }
}

/// Forward-only cursor over a [`Column`] supporting galloping seeks.
#[derive(Debug, Clone)]
pub struct ColumnCursor<'a> {
    column: Column<'a>,
    pos: usize,
}

impl ColumnCursor<'_> {
    pub fn current(&self) -> Option<TermId> {
        match &self.column {
            Column::Sorted { rows, key } => rows.get(self.pos).map(|r| r[*key]),
            Column::Owned(values) => values.get(self.pos).copied(),
            Column::Single(v) => (self.pos == 0).then_some(*v),
            Column::Empty => None,
        }
    }

    pub fn at_end(&self) -> bool {
        self.current().is_none()
    }

    /// Moves to the first value `>= target`.
    pub fn seek(&mut self, target: TermId) {
        match &self.column {
            Column::Sorted { rows, key } => {
                let key = *key;
                self.pos += gallop(&rows[self.pos.min(rows.len())..], |r| r[key] < target);
            }
            Column::Owned(values) => {
                self.pos += gallop(&values[self.pos.min(values.len())..], |v| *v < target);
            }
            Column::Single(v) => {
                if *v < target {
                    self.pos = 1;
                }
            }
            Column::Empty => {}
        }
    }

    /// Moves past the current value.
    pub fn advance(&mut self) {
        match self.current() {
            Some(TermId(u32::MAX)) => self.pos = usize::MAX / 2,
            Some(v) => self.seek(TermId(v.0 + 1)),
            None => {}
        }
    }
}

/// Number of leading elements satisfying `less`, found by exponential then
/// binary search. `less` must be monotone (true then false).
fn gallop<T>(slice: &[T], mut less: impl FnMut(&T) -> bool) -> usize {
    if slice.is_empty() || !less(&slice[0]) {
        return 0;
    }
    let mut step = 1;
    let mut lo = 0;
    while lo + step < slice.len() && less(&slice[lo + step]) {
        lo += step;
        step <<= 1;
    }
    let hi = (lo + step).min(slice.len());
    lo + 1 + slice[lo + 1..hi].partition_point(less)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::ntriples::parse_ntriples;
    use proptest::prelude::*;

    pub(crate) const EXAMPLE_GRAPH: &str = include_str!("../../tests/fixtures/example33.nt");

    fn example() -> TripleIndex {
        TripleIndex::load(parse_ntriples(EXAMPLE_GRAPH).unwrap())
    }

    fn id(index: &TripleIndex, term: Term) -> TermId {
        index.lookup(&term).unwrap()
    }

    fn names(index: &TripleIndex, ids: Vec<TermId>) -> Vec<String> {
        ids.into_iter()
            .map(|i| index.decode(i).unwrap().text().to_owned())
            .collect()
    }

    const RDF_TYPE: &str = crate::rdf::term::RDF_TYPE;

    #[test]
    fn example_graph_has_seven_triples() {
        assert_eq!(example().len(), 7);
    }

    #[test]
    fn duplicate_triples_are_stored_once() {
        let t = (Term::iri("s"), Term::iri("p"), Term::iri("o"));
        let index = TripleIndex::load(vec![t.clone(), t]);
        assert_eq!(index.len(), 1);
    }

    #[test]
    fn empty_index_slices_are_empty() {
        let index = TripleIndex::load(Vec::new());
        let rel = index.slice::<u8>([Slot::Var(0), Slot::Var(1), Slot::Var(2)]);
        assert!(rel.is_empty());
        assert!(rel.column(0).to_vec().is_empty());
    }

    #[test]
    fn persons_by_type() {
        let index = example();
        let ty = id(&index, Term::iri(RDF_TYPE));
        let person = id(&index, Term::iri("Person"));
        let rel = index.slice([Slot::Var('x'), Slot::Bound(ty), Slot::Bound(person)]);
        assert_eq!(names(&index, rel.column('x').to_vec()), ["p1", "p2"]);
    }

    #[test]
    fn email_pattern() {
        let index = example();
        let email = id(&index, Term::iri("email"));
        let rel = index.slice([Slot::Var('x'), Slot::Bound(email), Slot::Var('z')]);
        let found: Vec<_> = rel.triples().collect();
        assert_eq!(found.len(), 1);
        assert_eq!(index.decode(found[0].subject), Some(&Term::iri("p1")));
        assert_eq!(index.decode(found[0].object), Some(&Term::literal("e1")));
    }

    #[test]
    fn unmatched_literal_slices_empty() {
        let index = example();
        let fname = id(&index, Term::iri("fname"));
        // "Zed" is not in the dictionary at all; use an id past its end
        let zed = TermId(index.dictionary().len() as u32 + 5);
        let rel = index.slice([Slot::Var('x'), Slot::Bound(fname), Slot::Bound(zed)]);
        assert!(rel.is_empty());
        assert!(rel.column('x').to_vec().is_empty());
    }

    #[test]
    fn bind_narrows_and_columns_follow() {
        let index = example();
        let p1 = id(&index, Term::iri("p1"));
        let rel = index.slice([Slot::Var('s'), Slot::Var('p'), Slot::Var('o')]);
        let bound = rel.bind('s', p1);
        assert_eq!(bound.triples().count(), 4);
        assert_eq!(bound.column('p').size_hint(), 4);
        // {S} -> O is one of the collected shapes
        assert_eq!(bound.column('o').to_vec().len(), 4);
    }

    #[test]
    fn gallop_matches_partition_point() {
        let v: Vec<u32> = (0..100).map(|i| i * 3).collect();
        for t in 0..310 {
            assert_eq!(gallop(&v, |x| *x < t), v.partition_point(|x| *x < t));
        }
    }

    fn brute_force(triples: &[Triple], pattern: [Slot<u8>; 3], var: u8) -> Vec<TermId> {
        let mut out: Vec<TermId> = triples
            .iter()
            .filter_map(|t| {
                let t = t.as_array();
                let mut binding: Vec<(u8, TermId)> = Vec::new();
                for i in 0..3 {
                    match pattern[i] {
                        Slot::Bound(b) if b != t[i] => return None,
                        Slot::Bound(_) => {}
                        Slot::Var(v) => match binding.iter().find(|(w, _)| *w == v) {
                            Some((_, val)) if *val != t[i] => return None,
                            Some(_) => {}
                            None => binding.push((v, t[i])),
                        },
                    }
                }
                binding.iter().find(|(w, _)| *w == var).map(|(_, val)| *val)
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn small_graph() -> impl Strategy<Value = Vec<Triple>> {
        prop::collection::vec((0u32..6, 0u32..4, 0u32..8), 0..40).prop_map(|v| {
            v.into_iter()
                .map(|(s, p, o)| Triple::new(TermId(s), TermId(p), TermId(o)))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn slices_agree_with_linear_scan(
            triples in small_graph(),
            // per position: 0 = variable, 1 = present-ish constant, 2 = absent constant
            shape in prop::array::uniform3(0u8..3),
            consts in prop::array::uniform3(0u32..8),
            repeat in any::<bool>(),
        ) {
            let mut dict = Dictionary::new();
            for i in 0..8 {
                dict.intern(Term::iri(format!("t{i}")));
            }
            let index = TripleIndex::from_encoded(dict, triples.clone());
            let mut pattern = [Slot::Var(0u8); 3];
            for i in 0..3 {
                pattern[i] = match shape[i] {
                    0 => Slot::Var(if repeat { 0 } else { i as u8 }),
                    1 => Slot::Bound(TermId(consts[i])),
                    _ => Slot::Bound(TermId(100 + i as u32)),
                };
            }
            let rel = index.slice(pattern);
            let expected_nonempty = triples.iter().any(|t| {
                let t = t.as_array();
                (0..3).all(|i| pattern[i].term().is_none_or(|b| b == t[i]))
                    && (0..3).all(|i| (0..3).all(|j| {
                        match (pattern[i], pattern[j]) {
                            (Slot::Var(a), Slot::Var(b)) if a == b => t[i] == t[j],
                            _ => true,
                        }
                    }))
            });
            prop_assert_eq!(rel.is_empty(), !expected_nonempty);
            for var in 0u8..3 {
                let got = rel.column(var).to_vec();
                prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(got, brute_force(&triples, pattern, var));
            }
            // further slicing agrees too
            if let Some(v) = pattern.iter().find_map(|s| s.var()) {
                for value in 0u32..8 {
                    let narrowed = rel.bind(v, TermId(value));
                    let bound_pattern = pattern.map(|s| match s {
                        Slot::Var(w) if w == v => Slot::Bound(TermId(value)),
                        other => other,
                    });
                    for var in 0u8..3 {
                        prop_assert_eq!(
                            narrowed.column(var).to_vec(),
                            brute_force(&triples, bound_pattern, var)
                        );
                    }
                }
            }
        }

        #[test]
        fn terms_round_trip_through_the_dictionary(
            raw in prop::collection::vec(("[a-c]{1,2}", "[a-c]{1,2}", "[a-c]{0,2}", any::<bool>()), 0..20)
        ) {
            let triples: Vec<TermTriple> = raw
                .into_iter()
                .map(|(s, p, o, lit)| {
                    let o = if lit { Term::literal(o) } else { Term::iri(format!("o{o}")) };
                    (Term::iri(s), Term::iri(p), o)
                })
                .collect();
            let index = TripleIndex::load(triples.clone());
            for (s, p, o) in &triples {
                for term in [s, p, o] {
                    let id = index.lookup(term).unwrap();
                    prop_assert_eq!(index.decode(id), Some(term));
                }
            }
        }
    }
}
