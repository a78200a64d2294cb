//! Multi-way left-join evaluation over operand slices.
//!
//! `mwlj` walks the dependency graph: a disconnected graph is evaluated one
//! component at a time; otherwise the label of the independent strong
//! component is resolved candidate by candidate, empty operands are pruned
//! together with everything depending on them, and the rest recurses. A
//! strongly connected graph is handed to a generic multi-way join.

mod leapfrog;

use std::time::Instant;

use fixedbitset::FixedBitSet;

use crate::operands::{DependencyGraph, Label, OperandKind, Pattern, QueryOperands};
use crate::rdf::{Column, Relation, TermId, TripleIndex};

pub use leapfrog::Leapfrog;

/// Assignment of labels to terms. The domain is every label of the query;
/// unbound labels are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionMapping {
    values: Vec<Option<TermId>>,
    fragments: FixedBitSet,
}

impl SolutionMapping {
    pub fn new(labels: usize, operands: usize) -> Self {
        SolutionMapping {
            values: vec![None; labels],
            fragments: FixedBitSet::with_capacity(operands),
        }
    }

    pub fn get(&self, label: Label) -> Option<TermId> {
        self.values[label.index()]
    }

    /// Bound labels in id order.
    pub fn bound(&self) -> impl Iterator<Item = (Label, TermId)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|t| (Label(i as u32), t)))
    }

    /// Whether the fragment operand at `pos` (0-based) matched the node
    /// bound to its label.
    pub fn fragment_matched(&self, pos: usize) -> bool {
        self.fragments.contains(pos)
    }

    fn set(&mut self, label: Label, value: TermId) {
        self.values[label.index()] = Some(value);
    }

    fn unset(&mut self, label: Label) {
        self.values[label.index()] = None;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("query timed out")]
    Timeout,
}

#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Drop the first candidate of every label resolution.
    SkipFirstCandidate,
}

#[derive(Debug, Clone, Default)]
pub struct EngineConfig {
    pub deadline: Option<Instant>,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Slices taken per operand (0-based positions).
    pub slices: Vec<u64>,
    pub mappings: u64,
    /// Largest number of values held at once in frame state and columns
    /// that had to be collected outside the index.
    pub peak_buffer: usize,
    pub recursion_calls: u64,
}

impl ExecStats {
    pub fn total_slices(&self) -> u64 {
        self.slices.iter().sum()
    }
}

/// Per-operand relation. Triple patterns slice the index; an identity
/// constraint only needs the term itself.
#[derive(Debug, Clone, Copy)]
enum OpRel<'a> {
    Triple(Relation<'a, Label>),
    Same {
        label: Label,
        term: TermId,
        bound: Option<TermId>,
    },
}

impl<'a> OpRel<'a> {
    fn has_var(&self, l: Label) -> bool {
        match self {
            OpRel::Triple(r) => r.contains_var(l),
            OpRel::Same { label, bound, .. } => *label == l && bound.is_none(),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            OpRel::Triple(r) => r.is_empty(),
            OpRel::Same { term, bound, .. } => bound.is_some_and(|b| b != *term),
        }
    }

    fn bind(&self, l: Label, v: TermId) -> OpRel<'a> {
        match *self {
            OpRel::Triple(r) => OpRel::Triple(r.bind(l, v)),
            OpRel::Same { label, term, .. } => OpRel::Same {
                label,
                term,
                bound: Some(v),
            },
        }
    }

    fn column(&self, l: Label) -> Column<'a> {
        match self {
            OpRel::Triple(r) => r.column(l),
            OpRel::Same { term, .. } => Column::Single(*term),
        }
    }

    fn size_hint(&self) -> usize {
        match self {
            OpRel::Triple(r) => r.size_hint(),
            OpRel::Same { .. } => 1,
        }
    }
}

const DEADLINE_CHECK_EVERY: u64 = 256;

struct Exec<'a, 'e> {
    ops: &'a QueryOperands,
    cfg: &'a EngineConfig,
    emit: &'e mut dyn FnMut(&SolutionMapping),
    stats: ExecStats,
    buffer: usize,
}

/// Evaluates the query and passes every solution mapping to `emit`, in
/// depth-first ascending-candidate order.
pub fn mwlj(
    index: &TripleIndex,
    ops: &QueryOperands,
    graph: &DependencyGraph,
    cfg: &EngineConfig,
    emit: &mut dyn FnMut(&SolutionMapping),
) -> Result<ExecStats, ExecError> {
    let rels: Vec<OpRel<'_>> = ops
        .operands
        .iter()
        .map(|o| match o.pattern {
            Pattern::Triple(p) => OpRel::Triple(index.slice(p)),
            Pattern::SameTerm { label, term } => OpRel::Same {
                label,
                term,
                bound: None,
            },
        })
        .collect();
    let mut exec = Exec {
        ops,
        cfg,
        emit,
        stats: ExecStats {
            slices: vec![0; ops.len()],
            ..Default::default()
        },
        buffer: 0,
    };
    let mut x = SolutionMapping::new(ops.label_count, ops.len());
    if !graph.is_empty() {
        exec.frame_enter(rels.len());
        exec.rec(graph, &rels, &mut x)?;
        exec.frame_exit(rels.len());
    }
    Ok(exec.stats)
}

impl<'a> Exec<'a, '_> {
    fn frame_enter(&mut self, size: usize) {
        self.buffer += size;
        self.stats.peak_buffer = self.stats.peak_buffer.max(self.buffer);
    }

    fn frame_exit(&mut self, size: usize) {
        self.buffer -= size;
    }

    fn tick(&mut self) -> Result<(), ExecError> {
        self.stats.recursion_calls += 1;
        if let Some(deadline) = self.cfg.deadline {
            if self.stats.recursion_calls % DEADLINE_CHECK_EVERY == 0 && Instant::now() >= deadline
            {
                return Err(ExecError::Timeout);
            }
        }
        Ok(())
    }

    fn emit(&mut self, x: &SolutionMapping) {
        self.stats.mappings += 1;
        (self.emit)(x);
    }

    /// Returns the number of mappings emitted.
    fn rec<'r>(
        &mut self,
        g: &DependencyGraph,
        rels: &[OpRel<'r>],
        x: &mut SolutionMapping,
    ) -> Result<u64, ExecError> {
        self.tick()?;
        if g.is_empty() {
            self.emit(x);
            return Ok(1);
        }
        let comps = g.components();
        if comps.len() > 1 {
            let mut total = 0;
            for c in &comps {
                total += self.rec(c, rels, x)?;
            }
            return Ok(total);
        }
        if g.is_strongly_connected() {
            let verts: Vec<usize> = g.vertices().collect();
            return self.join(&verts, rels, x);
        }
        let (independent, u) = g.independent_strong_component();
        let label = u[0];
        let (candidates, buffered) = self.candidates(&independent, rels, label);
        self.frame_enter(buffered);
        let result = self.resolve_each(g, rels, x, label, candidates);
        self.frame_exit(buffered);
        result
    }

    fn candidates<'r>(
        &self,
        verts: &[usize],
        rels: &[OpRel<'r>],
        label: Label,
    ) -> (Leapfrog<'r>, usize) {
        let cols: Vec<Column<'r>> = verts
            .iter()
            .filter(|&&v| rels[v].has_var(label))
            .map(|&v| rels[v].column(label))
            .collect();
        let buffered = cols.iter().map(Column::buffered_len).sum();
        (
            Leapfrog::new(cols.into_iter().map(Column::cursor).collect()),
            buffered,
        )
    }

    fn resolve_each<'r>(
        &mut self,
        g: &DependencyGraph,
        rels: &[OpRel<'r>],
        x: &mut SolutionMapping,
        label: Label,
        candidates: Leapfrog<'r>,
    ) -> Result<u64, ExecError> {
        let skip = usize::from(self.cfg.fault == Some(Fault::SkipFirstCandidate));
        let mut total = 0;
        let mut next = rels.to_vec();
        self.frame_enter(next.len());
        for chi in candidates.skip(skip) {
            let (empty, touched) = self.resolve_label(g, rels, &mut next, label, chi);
            let pruned = g.prune(&empty);
            if pruned.is_empty() {
                restore(&mut next, rels, &touched);
                continue;
            }
            x.set(label, chi);
            let frags = self.mark_fragments(&pruned, &touched, x);
            let rest = pruned.remove_label(label);
            let n = self.rec(&rest, &next, x)?;
            if n == 0 {
                // Every dependent join failed: the node itself still stands,
                // with its nested fields missing.
                self.emit(x);
                total += 1;
            } else {
                total += n;
            }
            for f in frags {
                x.fragments.set(f, false);
            }
            x.unset(label);
            restore(&mut next, rels, &touched);
        }
        self.frame_exit(next.len());
        Ok(total)
    }

    /// Slices every operand of `g` that contains `label` by `label := chi`
    /// and returns the operands that became empty.
    fn resolve_label<'r>(
        &mut self,
        g: &DependencyGraph,
        rels: &[OpRel<'r>],
        next: &mut [OpRel<'r>],
        label: Label,
        chi: TermId,
    ) -> (Vec<usize>, Vec<usize>) {
        let mut empty = Vec::new();
        let mut touched = Vec::new();
        for v in g.vertices() {
            if rels[v].has_var(label) {
                next[v] = rels[v].bind(label, chi);
                self.stats.slices[v] += 1;
                touched.push(v);
                if next[v].is_empty() {
                    empty.push(v);
                }
            }
        }
        (empty, touched)
    }

    fn mark_fragments(
        &self,
        g: &DependencyGraph,
        touched: &[usize],
        x: &mut SolutionMapping,
    ) -> Vec<usize> {
        let mut set = Vec::new();
        for &v in touched {
            if g.contains(v) && self.ops.operands[v].kind == OperandKind::Fragment {
                x.fragments.insert(v);
                set.push(v);
            }
        }
        set
    }

    /// Multi-way join over a strongly connected operand set: binds one label
    /// at a time (fewest candidates first) until none is left.
    fn join<'r>(
        &mut self,
        verts: &[usize],
        rels: &[OpRel<'r>],
        x: &mut SolutionMapping,
    ) -> Result<u64, ExecError> {
        self.tick()?;
        let mut best: Option<(usize, Label)> = None;
        for &v in verts {
            for l in self.ops.operands[v].pattern.labels() {
                if rels[v].has_var(l) {
                    let size = rels[v].size_hint();
                    if best.is_none_or(|(s, bl)| (size, l) < (s, bl)) {
                        best = Some((size, l));
                    }
                }
            }
        }
        let Some((_, label)) = best else {
            if verts.iter().any(|&v| rels[v].is_empty()) {
                return Ok(0);
            }
            self.emit(x);
            return Ok(1);
        };
        let (candidates, buffered) = self.candidates(verts, rels, label);
        self.frame_enter(buffered);
        let mut next = rels.to_vec();
        self.frame_enter(next.len());
        let mut total = 0;
        let skip = usize::from(self.cfg.fault == Some(Fault::SkipFirstCandidate));
        let mut result = Ok(());
        for chi in candidates.skip(skip) {
            let mut touched = Vec::new();
            let mut frags = Vec::new();
            for &v in verts {
                if rels[v].has_var(label) {
                    next[v] = rels[v].bind(label, chi);
                    self.stats.slices[v] += 1;
                    touched.push(v);
                    if self.ops.operands[v].kind == OperandKind::Fragment {
                        x.fragments.insert(v);
                        frags.push(v);
                    }
                }
            }
            x.set(label, chi);
            match self.join(verts, &next, x) {
                Ok(n) => total += n,
                Err(e) => result = Err(e),
            }
            x.unset(label);
            for f in frags {
                x.fragments.set(f, false);
            }
            restore(&mut next, rels, &touched);
            if result.is_err() {
                break;
            }
        }
        self.frame_exit(next.len());
        self.frame_exit(buffered);
        result.map(|()| total)
    }
}

fn restore<'r>(next: &mut [OpRel<'r>], rels: &[OpRel<'r>], touched: &[usize]) {
    for &v in touched {
        next[v] = rels[v];
    }
}

#[cfg(test)]
mod tests;
