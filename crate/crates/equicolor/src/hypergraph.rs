//! k-uniform hypergraph representation, validation, text I/O, and the
//! neighborhood-hypergraph reduction from regular graphs.
//!
//! Vertices are dense 1-based identifiers `1..=n`. Edges are k-sets stored
//! sorted ascending, in input order; duplicate edges are permitted and the
//! incidence index counts them with multiplicity.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// 1-based vertex identifier.
pub type Vertex = u32;
/// Index into [`Hypergraph::edges`], 0-based.
pub type EdgeId = usize;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("line {line}: malformed header, expected \"k n m\"")]
    MalformedHeader { line: usize },
    #[error("line {line}: edge has {found} vertices, expected {expected}")]
    WrongCardinality {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: vertex {vertex} repeated inside an edge")]
    RepeatedVertex { line: usize, vertex: Vertex },
    #[error("line {line}: vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { line: usize, vertex: u64, n: usize },
    #[error("line {line}: {token:?} is not a vertex id")]
    BadVertexToken { line: usize, token: String },
    #[error("line {line}: expected {expected} edges, found extra content")]
    TrailingContent { line: usize, expected: usize },
    #[error("input ends after {found} of {expected} edges")]
    MissingEdges { expected: usize, found: usize },
    #[error("uniformity k must be at least 1")]
    ZeroUniformity,
    #[error("graph has a self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("graph vertex {vertex} out of range 1..={n}")]
    GraphVertexOutOfRange { vertex: Vertex, n: usize },
    #[error("graph is not regular: degree({u}) = {du} but degree({v}) = {dv}")]
    NotRegular { u: Vertex, du: usize, v: Vertex, dv: usize },
}

/// A k-uniform hypergraph on vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    edges: Vec<Vec<Vertex>>,
    /// `incidence[v]` lists the edge indices containing `v`, sorted ascending.
    /// Slot 0 is unused.
    incidence: Vec<Vec<EdgeId>>,
}

impl Hypergraph {
    /// Validates and indexes a hypergraph. Each edge must contain exactly
    /// `k` distinct vertices in `1..=n`; edges are sorted in place.
    pub fn new(n: usize, k: usize, edges: Vec<Vec<Vertex>>) -> Result<Self, HypergraphError> {
        Self::build(n, k, edges, None)
    }

    fn build(
        n: usize,
        k: usize,
        mut edges: Vec<Vec<Vertex>>,
        // When parsing, the source line of each edge for error reporting.
        lines: Option<&[usize]>,
    ) -> Result<Self, HypergraphError> {
        if k == 0 {
            return Err(HypergraphError::ZeroUniformity);
        }
        let line_of = |i: usize| lines.map_or(0, |ls| ls[i]);
        for (i, edge) in edges.iter_mut().enumerate() {
            if edge.len() != k {
                return Err(HypergraphError::WrongCardinality {
                    line: line_of(i),
                    expected: k,
                    found: edge.len(),
                });
            }
            for &v in edge.iter() {
                if v == 0 || v as usize > n {
                    return Err(HypergraphError::VertexOutOfRange {
                        line: line_of(i),
                        vertex: v as u64,
                        n,
                    });
                }
            }
            edge.sort_unstable();
            if let Some(w) = edge.windows(2).find(|w| w[0] == w[1]) {
                return Err(HypergraphError::RepeatedVertex {
                    line: line_of(i),
                    vertex: w[0],
                });
            }
        }
        let mut incidence = vec![Vec::new(); n + 1];
        for (idx, edge) in edges.iter().enumerate() {
            for &v in edge {
                incidence[v as usize].push(idx);
            }
        }
        let h = Hypergraph {
            n,
            k,
            edges,
            incidence,
        };
        // Handshake: sum of degrees equals k * |E|.
        debug_assert_eq!(
            (1..=h.n).map(|v| h.incidence[v].len()).sum::<usize>(),
            h.k * h.edges.len()
        );
        Ok(h)
    }

    /// Parses the text format: header `k n m`, then `m` lines of `k`
    /// space-separated vertex ids. Lines starting with `#` are comments.
    pub fn parse(text: &str) -> Result<Self, HypergraphError> {
        let mut content = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = content
            .next()
            .ok_or(HypergraphError::MalformedHeader { line: 1 })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad_header = HypergraphError::MalformedHeader { line: header_line };
        if fields.len() != 3 {
            return Err(bad_header);
        }
        let k: usize = fields[0].parse().map_err(|_| bad_header.clone())?;
        let n: usize = fields[1].parse().map_err(|_| bad_header.clone())?;
        let m: usize = fields[2].parse().map_err(|_| bad_header)?;

        let mut edges = Vec::with_capacity(m);
        let mut lines = Vec::with_capacity(m);
        for (line_no, line) in content.by_ref() {
            if edges.len() == m {
                return Err(HypergraphError::TrailingContent {
                    line: line_no,
                    expected: m,
                });
            }
            let mut edge = Vec::with_capacity(k);
            for tok in line.split_whitespace() {
                let v: u64 = tok.parse().map_err(|_| HypergraphError::BadVertexToken {
                    line: line_no,
                    token: tok.to_string(),
                })?;
                if v == 0 || v > n as u64 {
                    return Err(HypergraphError::VertexOutOfRange {
                        line: line_no,
                        vertex: v,
                        n,
                    });
                }
                edge.push(v as Vertex);
            }
            edges.push(edge);
            lines.push(line_no);
        }
        if edges.len() < m {
            return Err(HypergraphError::MissingEdges {
                expected: m,
                found: edges.len(),
            });
        }
        Self::build(n, k, edges, Some(&lines))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> &[Vertex] {
        &self.edges[id]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &[Vertex])> {
        self.edges.iter().enumerate().map(|(i, e)| (i, e.as_slice()))
    }

    /// Edge indices containing `v`, sorted ascending (duplicates impossible:
    /// a vertex appears at most once per edge).
    pub fn incident(&self, v: Vertex) -> &[EdgeId] {
        &self.incidence[v as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.incidence[v as usize].len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        1..=self.n as Vertex
    }

    /// Maximum degree over all vertices; 0 when there are no edges.
    pub fn max_degree(&self) -> usize {
        (1..=self.n).map(|v| self.incidence[v].len()).max().unwrap_or(0)
    }
}

/// Bit-exact serialization: header, then each edge's sorted ids in input order.
impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.k, self.n, self.edges.len())?;
        for edge in &self.edges {
            let mut first = true;
            for v in edge {
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
                first = false;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Simple undirected graph, used only as input to the neighborhood reduction.
#[derive(Debug, Clone)]
pub struct SimpleGraph {
    n: usize,
    adjacency: Vec<BTreeSet<Vertex>>,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        SimpleGraph {
            n,
            adjacency: vec![BTreeSet::new(); n + 1],
        }
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<(), HypergraphError> {
        if u == v {
            return Err(HypergraphError::SelfLoop(u));
        }
        for w in [u, v] {
            if w == 0 || w as usize > self.n {
                return Err(HypergraphError::GraphVertexOutOfRange { vertex: w, n: self.n });
            }
        }
        self.adjacency[u as usize].insert(v);
        self.adjacency[v as usize].insert(u);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.adjacency[v as usize].iter().copied()
    }

    /// The hypergraph on the same vertex set whose edges are the
    /// neighborhoods N(v), one per vertex in vertex order. Requires the
    /// graph to be k-regular; the result is k-uniform with max degree k.
    pub fn neighborhood_hypergraph(&self) -> Result<Hypergraph, HypergraphError> {
        let k = self.degree(1);
        for v in 2..=self.n as Vertex {
            let d = self.degree(v);
            if d != k {
                return Err(HypergraphError::NotRegular {
                    u: 1,
                    du: k,
                    v,
                    dv: d,
                });
            }
        }
        let edges: Vec<Vec<Vertex>> = (1..=self.n as Vertex)
            .map(|v| self.neighbors(v).collect())
            .collect();
        let h = Hypergraph::new(self.n, k, edges)?;
        debug_assert_eq!(h.max_degree(), k);
        Ok(h)
    }
}
