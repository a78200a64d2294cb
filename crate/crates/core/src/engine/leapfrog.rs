use crate::rdf::{ColumnCursor, TermId};

/// Ascending intersection of sorted columns, produced lazily by seeking
/// every cursor to the largest current value.
pub struct Leapfrog<'a> {
    cursors: Vec<ColumnCursor<'a>>,
    advance_first: bool,
}

impl<'a> Leapfrog<'a> {
    pub fn new(cursors: Vec<ColumnCursor<'a>>) -> Self {
        Leapfrog {
            cursors,
            advance_first: false,
        }
    }
}

impl Iterator for Leapfrog<'_> {
    type Item = TermId;

    fn next(&mut self) -> Option<TermId> {
        if self.cursors.is_empty() {
            return None;
        }
        if self.advance_first {
            self.cursors[0].advance();
            self.advance_first = false;
        }
        loop {
            let mut max = TermId(0);
            for c in &self.cursors {
                max = max.max(c.current()?);
            }
            let mut agreed = true;
            for c in &mut self.cursors {
                if c.current()? < max {
                    c.seek(max);
                    agreed = false;
                }
            }
            if agreed {
                self.advance_first = true;
                return Some(max);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Column;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn col(v: &BTreeSet<u32>) -> Column<'static> {
        Column::Owned(v.iter().map(|&x| TermId(x)).collect())
    }

    proptest! {
        #[test]
        fn equals_set_intersection(sets in prop::collection::vec(prop::collection::btree_set(0u32..60, 0..30), 1..5)) {
            let got: Vec<u32> = Leapfrog::new(sets.iter().map(|s| col(s).cursor()).collect())
                .map(|t| t.0)
                .collect();
            let mut want: BTreeSet<u32> = sets[0].clone();
            for s in &sets[1..] {
                want = want.intersection(s).copied().collect();
            }
            prop_assert_eq!(got, want.into_iter().collect::<Vec<_>>());
        }
    }

    #[test]
    fn brute_force_pair() {
        // employees {p1, p2} against Persons {p2, p3}.
        let a: BTreeSet<u32> = [1, 2].into();
        let b: BTreeSet<u32> = [2, 3].into();
        let got: Vec<u32> = Leapfrog::new(vec![col(&a).cursor(), col(&b).cursor()])
            .map(|t| t.0)
            .collect();
        assert_eq!(got, [2]);
        assert_eq!(Leapfrog::new(vec![]).count(), 0);
        assert_eq!(
            Leapfrog::new(vec![col(&a).cursor(), Column::Empty.cursor()]).count(),
            0
        );
    }
}
