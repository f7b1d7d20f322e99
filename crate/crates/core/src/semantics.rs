//! Maximal trace semantics stored as a prefix trie.
//!
//! Every node of the trie is a valid prefix; `ext(node)` is the set of
//! maximal traces (by index) that extend it.

use fixedbitset::FixedBitSet;

use crate::program::{Env, Program};
use crate::trace::{Event, Point, Trace, TraceSet};

pub type NodeId = usize;

/// Concrete states visited by one maximal execution. `states[i]` is the
/// state right before event `i`; a normally terminating run has one extra
/// entry at the exit point.
#[derive(Clone, Debug)]
pub struct Run {
    pub states: Vec<(Point, Env)>,
    pub final_env: Env,
    pub faulted: bool,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub parent: Option<NodeId>,
    pub event: Option<Event>,
    pub depth: usize,
    pub children: Vec<NodeId>,
    /// Maximal traces extending this prefix.
    pub ext: FixedBitSet,
    /// Index of the maximal trace ending exactly here.
    pub maximal: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct MaximalSemantics {
    pub program: Program,
    pub traces: Vec<Trace>,
    pub runs: Vec<Run>,
    nodes: Vec<Node>,
    /// `trace_nodes[i][k]` is the node of the length-`k` prefix of trace `i`.
    trace_nodes: Vec<Vec<NodeId>>,
}

impl MaximalSemantics {
    pub fn new(program: Program, runs: Vec<(Trace, Run)>) -> Self {
        let n = runs.len();
        let mut nodes = vec![Node {
            parent: None,
            event: None,
            depth: 0,
            children: Vec::new(),
            ext: FixedBitSet::with_capacity(n),
            maximal: None,
        }];
        let mut traces = Vec::with_capacity(n);
        let mut trace_runs = Vec::with_capacity(n);
        let mut trace_nodes = Vec::with_capacity(n);
        for (i, (t, run)) in runs.into_iter().enumerate() {
            let mut cur = 0;
            let mut path = vec![0];
            nodes[0].ext.insert(i);
            for e in t.iter() {
                let found = nodes[cur]
                    .children
                    .iter()
                    .copied()
                    .find(|&c| nodes[c].event.as_ref() == Some(e));
                cur = match found {
                    Some(c) => c,
                    None => {
                        let id = nodes.len();
                        nodes.push(Node {
                            parent: Some(cur),
                            event: Some(e.clone()),
                            depth: nodes[cur].depth + 1,
                            children: Vec::new(),
                            ext: FixedBitSet::with_capacity(n),
                            maximal: None,
                        });
                        nodes[cur].children.push(id);
                        id
                    }
                };
                nodes[cur].ext.insert(i);
                path.push(cur);
            }
            nodes[cur].maximal = Some(i);
            traces.push(t);
            trace_runs.push(run);
            trace_nodes.push(path);
        }
        MaximalSemantics {
            program,
            traces,
            runs: trace_runs,
            nodes,
            trace_nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn ext(&self, id: NodeId) -> &FixedBitSet {
        &self.nodes[id].ext
    }

    /// The set of all maximal traces, `S^M`, as a bitset.
    pub fn universe(&self) -> FixedBitSet {
        let mut all = FixedBitSet::with_capacity(self.len());
        all.insert_range(..);
        all
    }

    pub fn trace_set(&self) -> TraceSet {
        self.traces.iter().cloned().collect()
    }

    /// Node of the length-`k` prefix of trace `i`.
    pub fn prefix_node(&self, i: usize, k: usize) -> NodeId {
        self.trace_nodes[i][k]
    }

    pub fn lookup(&self, t: &Trace) -> Option<NodeId> {
        let mut cur = 0;
        for e in t.iter() {
            cur = self.nodes[cur]
                .children
                .iter()
                .copied()
                .find(|&c| self.nodes[c].event.as_ref() == Some(e))?;
        }
        Some(cur)
    }

    /// Looks a prefix up by event display strings, e.g. `["apv=1", "i1=0"]`.
    pub fn find_by_displays<S: AsRef<str>>(&self, displays: &[S]) -> Option<NodeId> {
        let mut cur = 0;
        for d in displays {
            let d = d.as_ref();
            cur = self.nodes[cur].children.iter().copied().find(|&c| {
                self.nodes[c]
                    .event
                    .as_ref()
                    .is_some_and(|e| e.to_string() == d)
            })?;
        }
        Some(cur)
    }

    /// `σ ∈ prefixes(S^M)`.
    pub fn is_valid(&self, t: &Trace) -> bool {
        self.lookup(t).is_some()
    }

    pub fn trace_of(&self, mut id: NodeId) -> Trace {
        let mut v = Vec::with_capacity(self.nodes[id].depth);
        while let Some(p) = self.nodes[id].parent {
            v.push(
                self.nodes[id]
                    .event
                    .clone()
                    .expect("non-root node has an event"),
            );
            id = p;
        }
        v.reverse();
        v.into()
    }

    pub fn event(&self, id: NodeId) -> Option<&Event> {
        self.nodes[id].event.as_ref()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// The ancestor of `id` at depth `k` (`k` ≤ depth).
    pub fn path_prefix(&self, mut id: NodeId, k: usize) -> NodeId {
        while self.nodes[id].depth > k {
            id = self.nodes[id].parent.expect("depth > 0 has a parent");
        }
        id
    }

    /// Whether some trace in `S^M` ends exactly at this node.
    pub fn is_maximal(&self, id: NodeId) -> bool {
        self.nodes[id].maximal.is_some()
    }

    /// Nodes in creation order (parents before children).
    pub fn node_ids(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    /// The trie path of trace `i`, root first.
    pub fn path(&self, i: usize) -> &[NodeId] {
        &self.trace_nodes[i]
    }

    /// Index of a maximal trace, if present.
    pub fn index_of(&self, t: &Trace) -> Option<usize> {
        self.lookup(t).and_then(|n| self.nodes[n].maximal)
    }
}

#[cfg(test)]
mod tests {
    use crate::program::{enumerate_semantics, parse, DEFAULT_STEP_BOUND};

    #[test]
    fn trie_shares_prefixes() {
        let p = parse("a = input s in {0,1}; b = input t in {0,1};").unwrap();
        let s = enumerate_semantics(&p, DEFAULT_STEP_BOUND).unwrap();
        assert_eq!(s.len(), 4);
        // ε, a=0, a=1, and four leaves.
        assert_eq!(s.num_nodes(), 7);
        let n = s.find_by_displays(&["a=1"]).unwrap();
        assert_eq!(s.ext(n).ones().collect::<Vec<_>>(), vec![2, 3]);
        assert!(s.is_valid(&s.trace_of(n)));
        assert_eq!(s.index_of(&s.traces[3]), Some(3));
    }

    #[test]
    fn empty_program_has_single_empty_trace() {
        let p = parse("").unwrap();
        let s = enumerate_semantics(&p, DEFAULT_STEP_BOUND).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s.traces[0].is_empty());
        assert!(s.is_maximal(s.root()));
    }
}
