use crate::engine::SolutionMapping;
use crate::operands::{PlanChildren, PlanField, ValueSource};
use crate::rdf::{Term, TermId, TermOverlay};

use super::{cardinality_error, render_scalar, Response, ResponseValue};

#[derive(Debug)]
enum SlotValue {
    Unset,
    Scalar(TermId),
    Scalars(Vec<TermId>),
    Object(Node),
    Objects(Vec<Node>),
}

#[derive(Debug)]
struct Node {
    term: Option<TermId>,
    slots: Vec<SlotValue>,
    matched: Vec<bool>,
}

impl Node {
    fn new(term: Option<TermId>, children: &PlanChildren) -> Node {
        let (slots, fragments) = match children {
            PlanChildren::None => (0, 0),
            PlanChildren::Fields(fs) => (fs.len(), 0),
            PlanChildren::Fragments(frs) => (frs.iter().map(|f| f.fields.len()).sum(), frs.len()),
        };
        Node {
            term,
            slots: (0..slots).map(|_| SlotValue::Unset).collect(),
            matched: vec![false; fragments],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub mappings: u64,
    /// Response objects created while folding mappings.
    pub materialized: usize,
}

struct Ctx<'o, 'd> {
    overlay: &'o TermOverlay<'d>,
    errors: Vec<String>,
    stats: BuildStats,
}

impl Ctx<'_, '_> {
    fn node(&mut self, term: TermId, children: &PlanChildren) -> Node {
        self.stats.materialized += 1;
        Node::new(Some(term), children)
    }

    fn conflict(&mut self, key: &str, at: Option<TermId>) {
        let term = at.and_then(|t| self.overlay.decode(t));
        self.errors.push(cardinality_error(key, term));
    }
}

/// Folds solution mappings, in engine order, into one response tree. Each
/// mapping is walked from the root; a list element is reused while the
/// mapping binds the same term as the list's last element, so shared
/// prefixes are built once.
pub struct ResponseBuilder<'p, 'o, 'd> {
    plan: &'p [PlanField],
    root: Node,
    ctx: Ctx<'o, 'd>,
}

impl<'p, 'o, 'd> ResponseBuilder<'p, 'o, 'd> {
    pub fn new(plan: &'p [PlanField], overlay: &'o TermOverlay<'d>) -> Self {
        ResponseBuilder {
            plan,
            root: Node {
                term: None,
                slots: plan.iter().map(|_| SlotValue::Unset).collect(),
                matched: Vec::new(),
            },
            ctx: Ctx {
                overlay,
                errors: Vec::new(),
                stats: BuildStats::default(),
            },
        }
    }

    pub fn push(&mut self, m: &SolutionMapping) {
        self.ctx.stats.mappings += 1;
        apply_fields(self.plan, &mut self.root, 0, m, &mut self.ctx);
    }

    pub fn finish(self) -> (Response, BuildStats) {
        let overlay = self.ctx.overlay;
        let data = ResponseValue::Object(
            self.plan
                .iter()
                .zip(&self.root.slots)
                .map(|(pf, slot)| (pf.key.clone(), value(pf, slot, &self.root, overlay)))
                .collect(),
        );
        (
            Response {
                data,
                errors: self.ctx.errors,
            },
            self.ctx.stats,
        )
    }
}

fn apply(children: &PlanChildren, node: &mut Node, m: &SolutionMapping, ctx: &mut Ctx<'_, '_>) {
    match children {
        PlanChildren::None => {}
        PlanChildren::Fields(fs) => apply_fields(fs, node, 0, m, ctx),
        PlanChildren::Fragments(frs) => {
            // A node matching several fragments keeps the first value of a
            // duplicated key, so later duplicates are not built at all.
            let mut seen: Vec<&str> = Vec::new();
            let mut base = 0;
            for (i, fr) in frs.iter().enumerate() {
                if m.fragment_matched(fr.operand) {
                    node.matched[i] = true;
                    for (j, pf) in fr.fields.iter().enumerate() {
                        if !seen.contains(&pf.key.as_str()) {
                            seen.push(&pf.key);
                            apply_fields(std::slice::from_ref(pf), node, base + j, m, ctx);
                        }
                    }
                }
                base += fr.fields.len();
            }
        }
    }
}

fn apply_fields(
    fields: &[PlanField],
    node: &mut Node,
    base: usize,
    m: &SolutionMapping,
    ctx: &mut Ctx<'_, '_>,
) {
    let at = node.term;
    for (j, pf) in fields.iter().enumerate() {
        let ValueSource::Label(label) = pf.value else {
            continue;
        };
        let Some(v) = m.get(label) else {
            continue;
        };
        let slot = &mut node.slots[base + j];
        match (pf.leaf, pf.ty.list) {
            (true, true) => match slot {
                SlotValue::Unset => *slot = SlotValue::Scalars(vec![v]),
                SlotValue::Scalars(vs) => {
                    if vs.last() != Some(&v) {
                        vs.push(v);
                    }
                }
                _ => unreachable!("slot shape follows the plan"),
            },
            (true, false) => match slot {
                SlotValue::Unset => *slot = SlotValue::Scalar(v),
                SlotValue::Scalar(w) if *w == v => {}
                _ => ctx.conflict(&pf.key, at),
            },
            (false, true) => {
                if let SlotValue::Unset = slot {
                    *slot = SlotValue::Objects(Vec::new());
                }
                let SlotValue::Objects(items) = slot else {
                    unreachable!("slot shape follows the plan")
                };
                if items.last().is_none_or(|n| n.term != Some(v)) {
                    items.push(ctx.node(v, &pf.children));
                }
                let child = items.last_mut().expect("just ensured");
                apply(&pf.children, child, m, ctx);
            }
            (false, false) => {
                if let SlotValue::Unset = slot {
                    *slot = SlotValue::Object(ctx.node(v, &pf.children));
                }
                match slot {
                    SlotValue::Object(child) if child.term == Some(v) => {
                        apply(&pf.children, child, m, ctx)
                    }
                    _ => ctx.conflict(&pf.key, at),
                }
            }
        }
    }
}

fn decode<'o>(overlay: &'o TermOverlay<'_>, id: TermId) -> &'o Term {
    overlay
        .decode(id)
        .expect("bound terms come from the index or the overlay")
}

fn value(
    pf: &PlanField,
    slot: &SlotValue,
    parent: &Node,
    overlay: &TermOverlay<'_>,
) -> ResponseValue {
    if let ValueSource::DirectId(_) = pf.value {
        let term = parent.term.expect("ID leaves sit below a node");
        return ResponseValue::String(decode(overlay, term).text().to_owned());
    }
    match slot {
        SlotValue::Unset if pf.ty.list => ResponseValue::List(Vec::new()),
        SlotValue::Unset => ResponseValue::Null,
        SlotValue::Scalar(v) => render_scalar(&pf.ty, decode(overlay, *v)),
        SlotValue::Scalars(vs) => ResponseValue::List(
            vs.iter()
                .map(|v| render_scalar(&pf.ty, decode(overlay, *v)))
                .collect(),
        ),
        SlotValue::Object(n) => object(&pf.children, n, overlay),
        SlotValue::Objects(ns) => ResponseValue::List(
            ns.iter()
                .map(|n| object(&pf.children, n, overlay))
                .collect(),
        ),
    }
}

fn object(children: &PlanChildren, node: &Node, overlay: &TermOverlay<'_>) -> ResponseValue {
    let mut entries: Vec<(String, ResponseValue)> = Vec::new();
    match children {
        PlanChildren::None => {}
        PlanChildren::Fields(fs) => {
            for (pf, slot) in fs.iter().zip(&node.slots) {
                entries.push((pf.key.clone(), value(pf, slot, node, overlay)));
            }
        }
        PlanChildren::Fragments(frs) => {
            let mut base = 0;
            for (i, fr) in frs.iter().enumerate() {
                if node.matched[i] {
                    for (j, pf) in fr.fields.iter().enumerate() {
                        if !entries.iter().any(|(k, _)| *k == pf.key) {
                            entries.push((
                                pf.key.clone(),
                                value(pf, &node.slots[base + j], node, overlay),
                            ));
                        }
                    }
                }
                base += fr.fields.len();
            }
        }
    }
    ResponseValue::Object(entries)
}
