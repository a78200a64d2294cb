use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::{Label, PlanChildren, PlanField, QueryOperands};

#[derive(Debug)]
struct Topology {
    labels: Vec<Vec<Label>>,
    out: Vec<Vec<(usize, Label)>>,
    label_count: usize,
}

/// Directed, edge-labelled graph over operand positions (0-based).
///
/// The full edge set is shared; a value only tracks which vertices are
/// still present and which labels have been resolved, so the per-step
/// copies made by the engine are two small bitsets.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    topo: Arc<Topology>,
    live: FixedBitSet,
    resolved: FixedBitSet,
}

impl PartialEq for DependencyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices().eq(other.vertices()) && self.edges() == other.edges()
    }
}

/// Builds the graph: the operands of one field expression (field, type
/// filter, arguments) are mutually connected on shared labels; each of them
/// has a one-way edge to every operand of the field's sub-selection that
/// shares a label; a fragment operand has one-way edges to its
/// sub-selection's operands. Sibling subtrees are not connected.
pub fn build_dependency_graph(ops: &QueryOperands) -> DependencyGraph {
    let n = ops.len();
    let labels: Vec<Vec<Label>> = ops.operands.iter().map(|o| o.pattern.labels()).collect();
    let mut out: Vec<Vec<(usize, Label)>> = vec![Vec::new(); n];
    let add = |u: usize, v: usize, out: &mut Vec<Vec<(usize, Label)>>| {
        for &l in &labels[u] {
            if labels[v].contains(&l) && !out[u].contains(&(v, l)) {
                out[u].push((v, l));
            }
        }
    };
    fn subtree(fields: &[PlanField], acc: &mut Vec<usize>) {
        for f in fields {
            acc.extend(&f.field_ops);
            subtree_children(&f.children, acc);
        }
    }
    fn subtree_children(children: &PlanChildren, acc: &mut Vec<usize>) {
        match children {
            PlanChildren::None => {}
            PlanChildren::Fields(fs) => subtree(fs, acc),
            PlanChildren::Fragments(frs) => {
                for fr in frs {
                    acc.push(fr.operand);
                    subtree(&fr.fields, acc);
                }
            }
        }
    }
    fn walk(fields: &[PlanField], add: &mut dyn FnMut(usize, usize)) {
        for f in fields {
            for &u in &f.field_ops {
                for &v in &f.field_ops {
                    if u != v {
                        add(u, v);
                    }
                }
            }
            let mut below = Vec::new();
            subtree_children(&f.children, &mut below);
            for &u in &f.field_ops {
                for &v in &below {
                    add(u, v);
                }
            }
            match &f.children {
                PlanChildren::None => {}
                PlanChildren::Fields(fs) => walk(fs, add),
                PlanChildren::Fragments(frs) => {
                    for fr in frs {
                        let mut inner = Vec::new();
                        subtree(&fr.fields, &mut inner);
                        for &v in &inner {
                            add(fr.operand, v);
                        }
                        walk(&fr.fields, add);
                    }
                }
            }
        }
    }
    walk(&ops.plan, &mut |u, v| add(u, v, &mut out));
    for edges in &mut out {
        edges.sort_unstable();
    }
    let mut live = FixedBitSet::with_capacity(n);
    live.insert_range(..);
    DependencyGraph {
        topo: Arc::new(Topology {
            labels,
            out,
            label_count: ops.label_count,
        }),
        live,
        resolved: FixedBitSet::with_capacity(ops.label_count),
    }
}

impl DependencyGraph {
    pub fn is_empty(&self) -> bool {
        self.live.is_clear()
    }

    pub fn vertex_count(&self) -> usize {
        self.live.count_ones(..)
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.live.ones()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.live.contains(v)
    }

    /// Unresolved labels of vertex `v`.
    pub fn labels_of(&self, v: usize) -> impl Iterator<Item = Label> + '_ {
        self.topo.labels[v]
            .iter()
            .copied()
            .filter(|l| !self.resolved.contains(l.index()))
    }

    /// Unresolved labels over all vertices, ascending.
    pub fn labels(&self) -> Vec<Label> {
        let mut seen = FixedBitSet::with_capacity(self.topo.label_count);
        for v in self.vertices() {
            for l in self.labels_of(v) {
                seen.insert(l.index());
            }
        }
        seen.ones().map(|i| Label(i as u32)).collect()
    }

    fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, Label)> + '_ {
        self.topo.out[u]
            .iter()
            .copied()
            .filter(|&(v, l)| self.live.contains(v) && !self.resolved.contains(l.index()))
    }

    /// Present edges as `(from, label, to)`, sorted.
    pub fn edges(&self) -> Vec<(usize, Label, usize)> {
        let mut out: Vec<_> = self
            .vertices()
            .flat_map(|u| self.out_edges(u).map(move |(v, l)| (u, l, v)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.live.contains(u) && self.out_edges(u).any(|(w, _)| w == v)
    }

    fn with_live(&self, live: FixedBitSet) -> DependencyGraph {
        DependencyGraph {
            topo: Arc::clone(&self.topo),
            live,
            resolved: self.resolved.clone(),
        }
    }

    fn undirected(&self) -> Vec<Vec<usize>> {
        let n = self.topo.out.len();
        let mut adj = vec![Vec::new(); n];
        for u in self.vertices() {
            for (v, _) in self.out_edges(u) {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        adj
    }

    /// Weakly connected components, ordered by their smallest vertex.
    pub fn components(&self) -> Vec<DependencyGraph> {
        let n = self.topo.out.len();
        let adj = self.undirected();
        let mut seen = FixedBitSet::with_capacity(n);
        let mut out = Vec::new();
        for start in self.vertices() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = FixedBitSet::with_capacity(n);
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(u) = stack.pop() {
                comp.insert(u);
                for &v in &adj[u] {
                    if !seen.contains(v) {
                        seen.insert(v);
                        stack.push(v);
                    }
                }
            }
            out.push(self.with_live(comp));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Strongly connected components (Tarjan), each sorted ascending; the
    /// list is ordered by smallest vertex.
    pub fn strong_components(&self) -> Vec<Vec<usize>> {
        struct Tarjan<'g> {
            g: &'g DependencyGraph,
            index: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: FixedBitSet,
            stack: Vec<usize>,
            next: usize,
            out: Vec<Vec<usize>>,
        }
        impl Tarjan<'_> {
            fn visit(&mut self, u: usize) {
                self.index[u] = Some(self.next);
                self.low[u] = self.next;
                self.next += 1;
                self.stack.push(u);
                self.on_stack.insert(u);
                let succ: Vec<usize> = self.g.out_edges(u).map(|(v, _)| v).collect();
                for v in succ {
                    match self.index[v] {
                        None => {
                            self.visit(v);
                            self.low[u] = self.low[u].min(self.low[v]);
                        }
                        Some(iv) if self.on_stack.contains(v) => {
                            self.low[u] = self.low[u].min(iv);
                        }
                        Some(_) => {}
                    }
                }
                if Some(self.low[u]) == self.index[u] {
                    let mut comp = Vec::new();
                    loop {
                        let w = self.stack.pop().expect("tarjan stack holds u");
                        self.on_stack.set(w, false);
                        comp.push(w);
                        if w == u {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    self.out.push(comp);
                }
            }
        }
        let n = self.topo.out.len();
        let mut t = Tarjan {
            g: self,
            index: vec![None; n],
            low: vec![0; n],
            on_stack: FixedBitSet::with_capacity(n),
            stack: Vec::new(),
            next: 0,
            out: Vec::new(),
        };
        for v in self.vertices() {
            if t.index[v].is_none() {
                t.visit(v);
            }
        }
        let mut out = t.out;
        out.sort_unstable_by_key(|c| c[0]);
        out
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.strong_components().len() <= 1
    }

    /// The source component of the condensation and its unresolved labels.
    ///
    /// # Panics
    /// If a connected graph has more than one source component, which the
    /// construction rules rule out.
    pub fn independent_strong_component(&self) -> (Vec<usize>, Vec<Label>) {
        let sccs = self.strong_components();
        let n = self.topo.out.len();
        let mut comp_of = vec![usize::MAX; n];
        for (i, c) in sccs.iter().enumerate() {
            for &v in c {
                comp_of[v] = i;
            }
        }
        let mut has_incoming = vec![false; sccs.len()];
        for u in self.vertices() {
            for (v, _) in self.out_edges(u) {
                if comp_of[u] != comp_of[v] {
                    has_incoming[comp_of[v]] = true;
                }
            }
        }
        let sources: Vec<usize> = (0..sccs.len()).filter(|&i| !has_incoming[i]).collect();
        assert!(
            sources.len() == 1,
            "dependency graph has {} source components",
            sources.len()
        );
        let comp = sccs[sources[0]].clone();
        let mut labels: Vec<Label> = comp.iter().flat_map(|&v| self.labels_of(v)).collect();
        labels.sort_unstable();
        labels.dedup();
        (comp, labels)
    }

    /// Removes the given vertices and everything reachable from them.
    pub fn prune(&self, empty: &[usize]) -> DependencyGraph {
        let mut live = self.live.clone();
        let mut stack: Vec<usize> = empty
            .iter()
            .copied()
            .filter(|&v| live.contains(v))
            .collect();
        for &v in &stack {
            live.set(v, false);
        }
        while let Some(u) = stack.pop() {
            for (v, _) in self.out_edges(u) {
                if live.contains(v) {
                    live.set(v, false);
                    stack.push(v);
                }
            }
        }
        self.with_live(live)
    }

    /// Marks `x` resolved: its edges disappear, and so do vertices left
    /// without labels.
    pub fn remove_label(&self, x: Label) -> DependencyGraph {
        let mut g = self.clone();
        g.resolved.insert(x.index());
        let gone: Vec<usize> = g
            .vertices()
            .filter(|&v| g.labels_of(v).next().is_none())
            .collect();
        for v in gone {
            g.live.set(v, false);
        }
        g
    }
}
