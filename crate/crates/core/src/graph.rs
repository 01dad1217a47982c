//! Graph states: conversion between graphs and stabilizer groups, the PBS
//! gate, and the join rule it induces on disjoint graphs.
//!
//! The PBS gate on qubits `(i1, i2)` is a postselected `Z_{i1} Z_{i2}`
//! measurement followed by a Hadamard on `i2`. On two disjoint graph states
//! it always succeeds with probability 1/2 and produces another graph state:
//! `i2` becomes a leaf hanging off `i1`, and `i1` takes over every former
//! neighbor of `i2`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::pauli::{PauliError, PauliString, Postselected, StabilizerGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for a graph on {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(usize, usize),
    #[error("gate endpoints must differ, got {0} twice")]
    SameVertex(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Simple undirected graph on vertices `0..vertex_count`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Self {
        Self {
            adjacency: vec![BTreeSet::new(); vertex_count],
        }
    }

    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::new(vertex_count);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn path(vertex_count: usize) -> Self {
        let edges: Vec<_> = (1..vertex_count).map(|v| (v - 1, v)).collect();
        Self::from_edges(vertex_count, &edges).expect("path edges are valid")
    }

    /// Star on `vertex_count` vertices with the given center.
    pub fn star(vertex_count: usize, center: usize) -> Result<Self, GraphError> {
        let edges: Vec<_> = (0..vertex_count)
            .filter(|&v| v != center)
            .map(|v| (center, v))
            .collect();
        if center >= vertex_count {
            return Err(GraphError::VertexOutOfRange {
                vertex: center,
                count: vertex_count,
            });
        }
        Self::from_edges(vertex_count, &edges)
    }

    pub fn cycle(vertex_count: usize) -> Self {
        let mut g = Self::path(vertex_count);
        if vertex_count > 2 {
            g.add_edge(vertex_count - 1, 0)
                .expect("closing edge is new");
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v >= self.vertex_count() {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                count: self.vertex_count(),
            })
        } else {
            Ok(())
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !self.adjacency[u].insert(v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.adjacency[v].insert(u);
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.get(u).is_some_and(|n| n.contains(&v))
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, n)| n.range(u + 1..).map(move |&v| (u, v)))
            .collect()
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.vertex_count()];
        let mut out = Vec::new();
        for start in 0..self.vertex_count() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn is_tree(&self) -> bool {
        self.vertex_count() > 0
            && self.is_connected()
            && self.edge_count() + 1 == self.vertex_count()
    }

    /// `self` on vertices `0..n1` followed by `other` shifted by `n1`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let offset = self.vertex_count();
        let mut adjacency = self.adjacency.clone();
        adjacency.extend(
            other
                .adjacency
                .iter()
                .map(|n| n.iter().map(|v| v + offset).collect::<BTreeSet<_>>()),
        );
        Graph { adjacency }
    }

    /// Relabels vertex `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph, GraphError> {
        let mut g = Graph::new(self.vertex_count());
        for (u, v) in self.edges() {
            g.add_edge(perm[u], perm[v])?;
        }
        Ok(g)
    }

    /// Parses the edge-list format: a `vertices N` header followed by one
    /// `u v` pair per line. Blank lines and `#` comments are ignored.
    pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut graph: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| GraphError::Parse {
                line: line_no,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match graph.as_mut() {
                None => {
                    if fields.len() != 2 || fields[0] != "vertices" {
                        return Err(parse_err("expected header `vertices N`".into()));
                    }
                    let n = fields[1]
                        .parse::<usize>()
                        .map_err(|e| parse_err(format!("bad vertex count: {e}")))?;
                    graph = Some(Graph::new(n));
                }
                Some(g) => {
                    if fields.len() != 2 {
                        return Err(parse_err(format!("expected `u v`, got `{line}`")));
                    }
                    let u = fields[0]
                        .parse::<usize>()
                        .map_err(|e| parse_err(format!("bad vertex `{}`: {e}", fields[0])))?;
                    let v = fields[1]
                        .parse::<usize>()
                        .map_err(|e| parse_err(format!("bad vertex `{}`: {e}", fields[1])))?;
                    g.add_edge(u, v).map_err(|e| parse_err(e.to_string()))?;
                }
            }
        }
        graph.ok_or(GraphError::Parse {
            line: 0,
            message: "missing `vertices N` header".into(),
        })
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("vertices {}\n", self.vertex_count());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Graphviz rendering with vertices and edges in ascending order.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("graph {name} {{\n");
        for v in 0..self.vertex_count() {
            let _ = writeln!(out, "  {v};");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph({}; {:?})", self.vertex_count(), self.edges())
    }
}

/// Marker returned when a stabilizer group is not literally a graph state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotInGraphForm;

impl std::fmt::Display for NotInGraphForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("not in graph form")
    }
}

/// Generator `i` is `X_i` times `Z_j` over the neighbors `j` of `i`.
pub fn graph_to_stabilizers(g: &Graph) -> StabilizerGroup {
    let n = g.vertex_count();
    let generators = (0..n)
        .map(|i| {
            let zs: Vec<usize> = g.neighbors(i).iter().copied().collect();
            PauliString::from_support(n, &[i], &zs).expect("indices are in range")
        })
        .collect();
    StabilizerGroup::from_generators_unchecked(generators)
}

/// Reads the graph off the canonical form. Only exact graph form is
/// recognised; local-Clifford equivalent states give `NotInGraphForm`.
pub fn stabilizers_to_graph(s: &StabilizerGroup) -> Result<Graph, NotInGraphForm> {
    let n = s.num_qubits();
    let canon = s.canonical_form();
    let rows = canon.generators();
    for (i, row) in rows.iter().enumerate() {
        if row.phase() != 0 || row.z(i) {
            return Err(NotInGraphForm);
        }
        if (0..n).any(|q| row.x(q) != (q == i)) {
            return Err(NotInGraphForm);
        }
    }
    let mut g = Graph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            match (rows[i].z(j), rows[j].z(i)) {
                (true, true) => g.add_edge(i, j).expect("fresh edge"),
                (false, false) => {}
                // Cannot happen for a commuting group, but stay exact.
                _ => return Err(NotInGraphForm),
            }
        }
    }
    Ok(g)
}

/// Graph produced by a PBS gate between vertex `i1` of `g1` and vertex `i2`
/// of `g2`. Vertices of `g2` are shifted by `g1.vertex_count()`.
pub fn pbs_join_graphs(g1: &Graph, i1: usize, g2: &Graph, i2: usize) -> Result<Graph, GraphError> {
    g1.check_vertex(i1)?;
    g2.check_vertex(i2)?;
    let offset = g1.vertex_count();
    let mut out = Graph::new(offset + g2.vertex_count());
    for (u, v) in g1.edges() {
        out.add_edge(u, v)?;
    }
    for (u, v) in g2.edges() {
        if u != i2 && v != i2 {
            out.add_edge(u + offset, v + offset)?;
        }
    }
    for &j in g2.neighbors(i2) {
        out.add_edge(i1, j + offset)?;
    }
    out.add_edge(i1, i2 + offset)?;
    Ok(out)
}

/// Whether a PBS gate acts inside one connected piece or joins two pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    InterGraph,
    IntraGraph,
}

/// One PBS gate: `i1` keeps the merged neighborhood, `i2` receives the
/// Hadamard and ends up a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PbsGateRecord {
    i1: usize,
    i2: usize,
    kind: GateKind,
}

impl PbsGateRecord {
    pub fn new(i1: usize, i2: usize, kind: GateKind) -> Result<Self, GraphError> {
        if i1 == i2 {
            return Err(GraphError::SameVertex(i1));
        }
        Ok(Self { i1, i2, kind })
    }

    pub fn i1(&self) -> usize {
        self.i1
    }

    pub fn i2(&self) -> usize {
        self.i2
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }
}

/// PBS gate on a stabilizer state: postselected `Z_{i1} Z_{i2}` then a
/// Hadamard on `i2`. Works for qubits in the same or in different pieces.
pub fn apply_pbs_gate(
    s: &StabilizerGroup,
    i1: usize,
    i2: usize,
) -> Result<Postselected, PauliError> {
    Ok(match s.measure_zz_postselect(i1, i2)? {
        Postselected::Projected(g) => Postselected::Projected(g.apply_hadamard(i2)?),
        Postselected::Deterministic(g) => Postselected::Deterministic(g.apply_hadamard(i2)?),
        Postselected::Impossible => Postselected::Impossible,
    })
}
