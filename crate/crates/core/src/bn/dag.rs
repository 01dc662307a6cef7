use std::fmt;

use serde::{Deserialize, Serialize};

use super::BnError;

/// Parent sets are stored as bitmasks.
pub const MAX_NODES: usize = 32;

/// Directed acyclic graph over nodes `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    parents: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Add,
    Remove,
    Reverse,
}

/// A single-edge change. For `Remove` and `Reverse` the edge is the one
/// currently in the graph. The derived ordering (kind, parent, child) is the
/// search's tie-break order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub parent: usize,
    pub child: usize,
}

impl Dag {
    pub fn empty(n: usize) -> Dag {
        assert!(n <= MAX_NODES, "at most {MAX_NODES} nodes");
        Dag {
            parents: vec![0; n],
        }
    }

    /// Complete DAG with `i -> j` for every `i < j`.
    pub fn full(n: usize) -> Dag {
        let mut dag = Dag::empty(n);
        for child in 0..n {
            dag.parents[child] = (1u32 << child).wrapping_sub(1);
        }
        dag
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Dag, BnError> {
        let mut dag = Dag::empty(n);
        for &(p, c) in edges {
            dag.add_edge(p, c)?;
        }
        Ok(dag)
    }

    pub fn n_nodes(&self) -> usize {
        self.parents.len()
    }

    pub fn n_edges(&self) -> usize {
        self.parents.iter().map(|m| m.count_ones() as usize).sum()
    }

    pub fn parent_mask(&self, child: usize) -> u32 {
        self.parents[child]
    }

    pub fn parents_of(&self, child: usize) -> Vec<usize> {
        mask_nodes(self.parents[child])
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child] >> parent & 1 == 1
    }

    /// Edges sorted by `(parent, child)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n_nodes();
        let mut out = Vec::with_capacity(self.n_edges());
        for p in 0..n {
            for c in 0..n {
                if self.has_edge(p, c) {
                    out.push((p, c));
                }
            }
        }
        out
    }

    /// Undirected edges as `(min, max)` pairs, sorted.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        let mut s: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    fn check_node(&self, v: usize) -> Result<(), BnError> {
        if v < self.n_nodes() {
            Ok(())
        } else {
            Err(BnError::UnknownNode(v))
        }
    }

    /// True if a directed path `from ⇝ to` exists.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        // Walk backwards from `to` through parent sets.
        let mut seen: u32 = 1 << to;
        let mut frontier: u32 = 1 << to;
        while frontier != 0 {
            let mut next = 0u32;
            for v in mask_nodes(frontier) {
                next |= self.parents[v];
            }
            next &= !seen;
            if next >> from & 1 == 1 {
                return true;
            }
            seen |= next;
            frontier = next;
        }
        false
    }

    pub fn can_add(&self, parent: usize, child: usize) -> bool {
        parent != child
            && !self.has_edge(parent, child)
            && !self.has_edge(child, parent)
            && !self.reaches(child, parent)
    }

    pub fn add_edge(&mut self, parent: usize, child: usize) -> Result<(), BnError> {
        self.check_node(parent)?;
        self.check_node(child)?;
        if parent == child {
            return Err(BnError::SelfParent(child));
        }
        if !self.can_add(parent, child) {
            return Err(BnError::Cycle { parent, child });
        }
        self.parents[child] |= 1 << parent;
        Ok(())
    }

    pub fn remove_edge(&mut self, parent: usize, child: usize) -> bool {
        let had = self.has_edge(parent, child);
        self.parents[child] &= !(1 << parent);
        had
    }

    /// Reversing `parent -> child` is legal iff no other path `parent ⇝ child` exists.
    pub fn can_reverse(&self, parent: usize, child: usize) -> bool {
        if !self.has_edge(parent, child) {
            return false;
        }
        let mut without = self.clone();
        without.remove_edge(parent, child);
        !without.reaches(parent, child)
    }

    /// Graph after `mv`, or `None` when the move is illegal here.
    pub fn apply(&self, mv: Move) -> Option<Dag> {
        let mut g = self.clone();
        match mv.kind {
            MoveKind::Add => g.add_edge(mv.parent, mv.child).ok()?,
            MoveKind::Remove => {
                if !g.remove_edge(mv.parent, mv.child) {
                    return None;
                }
            }
            MoveKind::Reverse => {
                if !self.can_reverse(mv.parent, mv.child) {
                    return None;
                }
                g.remove_edge(mv.parent, mv.child);
                g.parents[mv.parent] |= 1 << mv.child;
            }
        }
        Some(g)
    }

    /// Every legal single-edge move in tie-break order.
    pub fn legal_moves(&self) -> Vec<Move> {
        let n = self.n_nodes();
        let mut moves = Vec::new();
        for p in 0..n {
            for c in 0..n {
                if self.can_add(p, c) {
                    moves.push(Move {
                        kind: MoveKind::Add,
                        parent: p,
                        child: c,
                    });
                }
            }
        }
        for (p, c) in self.edges() {
            moves.push(Move {
                kind: MoveKind::Remove,
                parent: p,
                child: c,
            });
        }
        for (p, c) in self.edges() {
            if self.can_reverse(p, c) {
                moves.push(Move {
                    kind: MoveKind::Reverse,
                    parent: p,
                    child: c,
                });
            }
        }
        moves
    }

    /// Lowest-index-first topological order; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n_nodes();
        let mut placed: u32 = 0;
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n).find(|&v| placed >> v & 1 == 0 && self.parents[v] & !placed == 0)?;
            placed |= 1 << next;
            order.push(next);
        }
        Some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }
}

pub(crate) fn mask_nodes(mask: u32) -> Vec<usize> {
    (0..MAX_NODES).filter(|&i| mask >> i & 1 == 1).collect()
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dag({} nodes, edges {:?})", self.n_nodes(), self.edges())
    }
}

#[derive(Serialize, Deserialize)]
struct DagRepr {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for Dag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DagRepr {
            n_nodes: self.n_nodes(),
            edges: self.edges(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = DagRepr::deserialize(d)?;
        if r.n_nodes > MAX_NODES {
            return Err(serde::de::Error::custom("too many nodes"));
        }
        Dag::from_edges(r.n_nodes, &r.edges).map_err(serde::de::Error::custom)
    }
}
