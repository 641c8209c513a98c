//! Simple-cycle enumeration and canonical cycle identities.
//!
//! Cycles are enumerated with Johnson's algorithm on the directed support of
//! the network (every edge usable both ways) and folded onto undirected
//! canonical keys, so each physical cycle appears once with its two
//! orientations `C+` and `C−`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{NetworkError, Result};
use crate::network::{GraphMode, TransitionNetwork};

/// Default cap on the number of canonical cycles.
pub const DEFAULT_CYCLE_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Forward,
    Backward,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Forward => Orientation::Backward,
            Orientation::Backward => Orientation::Forward,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Orientation::Forward => 1.0,
            Orientation::Backward => -1.0,
        }
    }
}

/// A closed, self-avoiding walk. Step `t` goes `vertices[t] → vertices[t+1]`
/// (cyclically) along graph edge `edges[t]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DirectedCycle {
    vertices: Vec<usize>,
    edges: Vec<usize>,
}

impl DirectedCycle {
    pub fn new(net: &TransitionNetwork, vertices: Vec<usize>, edges: Vec<usize>) -> Result<Self> {
        let k = vertices.len();
        if k < 2 || edges.len() != k {
            return Err(NetworkError::InvalidCycle(format!(
                "need ≥ 2 vertices and one edge per step, got {k} vertices and {} edges",
                edges.len()
            )));
        }
        let distinct: BTreeSet<_> = vertices.iter().collect();
        if distinct.len() != k {
            return Err(NetworkError::InvalidCycle(format!(
                "vertices repeat: {vertices:?}"
            )));
        }
        for t in 0..k {
            let (u, v) = (vertices[t], vertices[(t + 1) % k]);
            let e = edges[t];
            if e >= net.edges().len() || !net.edges_between(u, v).contains(&e) {
                return Err(NetworkError::InvalidCycle(format!(
                    "edge {e} does not join states {u} and {v}"
                )));
            }
        }
        if k == 2 && edges[0] == edges[1] {
            return Err(NetworkError::InvalidCycle(
                "a 2-cycle must use two distinct channels".into(),
            ));
        }
        Ok(DirectedCycle { vertices, edges })
    }

    /// Resolve the edges of a vertex sequence; each consecutive pair must be
    /// joined by exactly one edge.
    pub fn from_vertices(net: &TransitionNetwork, vertices: &[usize]) -> Result<Self> {
        let k = vertices.len();
        let mut edges = Vec::with_capacity(k);
        for t in 0..k {
            let (u, v) = (vertices[t], vertices[(t + 1) % k]);
            match net.edges_between(u, v) {
                [e] => edges.push(*e),
                [] => {
                    return Err(NetworkError::InvalidCycle(format!(
                        "states {u} and {v} are not adjacent"
                    )))
                }
                _ => {
                    return Err(NetworkError::InvalidCycle(format!(
                        "states {u} and {v} are joined by several channels; pass edges explicitly"
                    )))
                }
            }
        }
        Self::new(net, vertices.to_vec(), edges)
    }

    /// [`from_vertices`](Self::from_vertices) with states given by label.
    pub fn from_labels(net: &TransitionNetwork, labels: &[&str]) -> Result<Self> {
        let vertices = labels
            .iter()
            .map(|l| {
                net.state_by_label(l)
                    .ok_or_else(|| NetworkError::InvalidCycle(format!("unknown state `{l}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_vertices(net, &vertices)
    }

    pub(crate) fn from_parts(vertices: Vec<usize>, edges: Vec<usize>) -> Self {
        DirectedCycle { vertices, edges }
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `(from, to, edge)` for every step.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let k = self.len();
        (0..k).map(move |t| (self.vertices[t], self.vertices[(t + 1) % k], self.edges[t]))
    }

    /// Same cycle traversed the other way, still starting at `vertices[0]`.
    pub fn reversed(&self) -> Self {
        let mut vertices = Vec::with_capacity(self.len());
        vertices.push(self.vertices[0]);
        vertices.extend(self.vertices[1..].iter().rev());
        let edges = self.edges.iter().rev().copied().collect();
        DirectedCycle { vertices, edges }
    }

    fn rotated_to_min(&self) -> Self {
        let start = self
            .vertices
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| v)
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut vertices = self.vertices.clone();
        let mut edges = self.edges.clone();
        vertices.rotate_left(start);
        edges.rotate_left(start);
        DirectedCycle { vertices, edges }
    }

    fn key_cmp(&self, other: &Self) -> Ordering {
        self.vertices
            .cmp(&other.vertices)
            .then_with(|| self.edges.cmp(&other.edges))
    }
}

/// Orientation-free identity of a cycle, stored as its forward orientation:
/// rotated to start at the smallest state id, with the smaller of the two
/// traversal directions (second vertex first, then edge ids).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalCycle(DirectedCycle);

impl CanonicalCycle {
    pub fn vertices(&self) -> &[usize] {
        self.0.vertices()
    }

    pub fn edges(&self) -> &[usize] {
        self.0.edges()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn forward(&self) -> &DirectedCycle {
        &self.0
    }

    pub fn backward(&self) -> DirectedCycle {
        self.0.reversed()
    }

    pub fn directed(&self, orientation: Orientation) -> DirectedCycle {
        match orientation {
            Orientation::Forward => self.0.clone(),
            Orientation::Backward => self.0.reversed(),
        }
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.0.vertices.contains(&v)
    }

    /// Direction in which the forward orientation traverses `edge`
    /// (`+1` for `a → b`, `-1` for `b → a`), or `None` if not on the cycle.
    pub fn edge_sign(&self, net: &TransitionNetwork, edge: usize) -> Option<f64> {
        self.0
            .steps()
            .find(|&(_, _, e)| e == edge)
            .map(|(from, _, _)| if from == net.edge(edge).a { 1.0 } else { -1.0 })
    }

    /// Forward orientation as a label path, e.g. `|00⟩→|10⟩→|00⟩`.
    pub fn label(&self, net: &TransitionNetwork) -> String {
        net.format_cycle(self.vertices())
    }
}

impl Ord for CanonicalCycle {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.key_cmp(&other.0))
    }
}

impl PartialOrd for CanonicalCycle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical identity of `cycle` and the orientation in which it was given.
pub fn canonical_form(cycle: &DirectedCycle) -> (CanonicalCycle, Orientation) {
    let rotated = cycle.rotated_to_min();
    let reversed = rotated.reversed();
    if rotated.key_cmp(&reversed) != Ordering::Greater {
        (CanonicalCycle(rotated), Orientation::Forward)
    } else {
        (CanonicalCycle(reversed), Orientation::Backward)
    }
}

/// All simple cycles of the network, sorted by canonical key.
///
/// In collapsed mode cycles have at least three states. In multigraph mode a
/// pair of distinct parallel channels also forms a two-state cycle.
pub fn enumerate_cycles(net: &TransitionNetwork) -> Result<Vec<CanonicalCycle>> {
    enumerate_cycles_with_budget(net, DEFAULT_CYCLE_BUDGET)
}

pub fn enumerate_cycles_with_budget(
    net: &TransitionNetwork,
    budget: usize,
) -> Result<Vec<CanonicalCycle>> {
    let n = net.n_states();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let set: BTreeSet<usize> = net.neighbors(v).iter().map(|&(_, w)| w).collect();
            set.into_iter().collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut overflow = false;
    johnson(&adjacency, |path| {
        let k = path.len();
        if k == 2 {
            if net.mode() == GraphMode::Collapsed {
                return true;
            }
            let parallel = net.edges_between(path[0], path[1]);
            for (i, &a) in parallel.iter().enumerate() {
                for &b in &parallel[i + 1..] {
                    out.push(CanonicalCycle(DirectedCycle {
                        vertices: path.to_vec(),
                        edges: vec![a, b],
                    }));
                }
            }
        } else {
            // Each undirected cycle is found once per direction.
            if path[1] > path[k - 1] {
                return true;
            }
            expand_edges(net, path, &mut out);
        }
        if out.len() > budget {
            overflow = true;
            return false;
        }
        true
    });
    if overflow {
        return Err(NetworkError::CycleBudgetExceeded { cap: budget });
    }
    out.sort();
    Ok(out)
}

fn expand_edges(net: &TransitionNetwork, path: &[usize], out: &mut Vec<CanonicalCycle>) {
    let k = path.len();
    let choices: Vec<&[usize]> = (0..k)
        .map(|t| net.edges_between(path[t], path[(t + 1) % k]))
        .collect();
    let mut pick = vec![0usize; k];
    loop {
        out.push(CanonicalCycle(DirectedCycle {
            vertices: path.to_vec(),
            edges: (0..k).map(|t| choices[t][pick[t]]).collect(),
        }));
        let mut t = 0;
        loop {
            if t == k {
                return;
            }
            pick[t] += 1;
            if pick[t] < choices[t].len() {
                break;
            }
            pick[t] = 0;
            t += 1;
        }
    }
}

/// Johnson's elementary-circuit algorithm. `adjacency` must be symmetric, so
/// the strongly connected component of the least vertex `s` in the subgraph
/// induced by `{v ≥ s}` is its connected component there. `emit` receives
/// each circuit starting at its least vertex and returns `false` to stop.
fn johnson(adjacency: &[Vec<usize>], mut emit: impl FnMut(&[usize]) -> bool) {
    let n = adjacency.len();
    let mut state = Search {
        blocked: vec![false; n],
        blocked_by: vec![Vec::new(); n],
        in_component: vec![false; n],
        stack: Vec::new(),
        stop: false,
    };
    for s in 0..n {
        // component of s within {v >= s}
        state.in_component.iter_mut().for_each(|x| *x = false);
        let mut frontier = vec![s];
        state.in_component[s] = true;
        while let Some(v) = frontier.pop() {
            for &w in &adjacency[v] {
                if w >= s && !state.in_component[w] {
                    state.in_component[w] = true;
                    frontier.push(w);
                }
            }
        }
        for v in s..n {
            state.blocked[v] = false;
            state.blocked_by[v].clear();
        }
        state.circuit(adjacency, s, s, &mut emit);
        if state.stop {
            return;
        }
    }
}

struct Search {
    blocked: Vec<bool>,
    blocked_by: Vec<Vec<usize>>,
    in_component: Vec<bool>,
    stack: Vec<usize>,
    stop: bool,
}

impl Search {
    fn circuit(
        &mut self,
        adjacency: &[Vec<usize>],
        v: usize,
        s: usize,
        emit: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        let mut found = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in &adjacency[v] {
            if self.stop {
                break;
            }
            if !self.in_component[w] {
                continue;
            }
            if w == s {
                if !emit(&self.stack) {
                    self.stop = true;
                }
                found = true;
            } else if !self.blocked[w] && self.circuit(adjacency, w, s, emit) {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &adjacency[v] {
                if self.in_component[w] && !self.blocked_by[w].contains(&v) {
                    self.blocked_by[w].push(v);
                }
            }
        }
        self.stack.pop();
        found
    }

    fn unblock(&mut self, u: usize) {
        let mut pending = vec![u];
        while let Some(x) = pending.pop() {
            self.blocked[x] = false;
            for w in std::mem::take(&mut self.blocked_by[x]) {
                if self.blocked[w] {
                    pending.push(w);
                }
            }
        }
    }
}
