//! Finite directed multigraphs and the graphs derived from them.
//!
//! Identifiers are opaque strings interned to dense indices. Letters of the
//! alphabet `V ∪ E` are ordered vertices first, then edges, each in declared
//! order; every enumeration in the crate follows that order.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// Largest vertex count for which vertex subsets are enumerated.
pub const MAX_SUBSET_VERTICES: usize = 24;

/// Suffix carried by the reversed partner of an edge in a doubled graph.
pub const PARTNER_SUFFIX: char = '~';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` refers to undeclared vertex `{vertex}`")]
    UnknownEndpoint { edge: String, vertex: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("identifier `{0}` is empty or contains whitespace or `~`")]
    InvalidId(String),
    #[error("vertex subset is empty")]
    EmptySubset,
    #[error("vertex index {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("{0} vertices exceed the subset enumeration limit of {MAX_SUBSET_VERTICES}")]
    Capacity(usize),
}

/// A generator of the word semigroup: a vertex or an edge, by dense index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Vertex(usize),
    Edge(usize),
}

impl Letter {
    pub fn is_edge(self) -> bool {
        matches!(self, Letter::Edge(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub id: String,
    pub source: usize,
    pub range: usize,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.source == self.range
    }
}

#[derive(Debug, Clone)]
pub struct DirectedMultigraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    lookup: HashMap<String, Letter>,
}

impl PartialEq for DirectedMultigraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for DirectedMultigraph {}

fn check_id(id: &str) -> Result<(), GraphError> {
    if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == PARTNER_SUFFIX) {
        return Err(GraphError::InvalidId(id.to_string()));
    }
    Ok(())
}

impl DirectedMultigraph {
    /// Builds a graph from vertex ids and `(edge id, source id, range id)`
    /// triples.
    pub fn new<V, E, S>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut lookup = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            check_id(v)?;
            if lookup.insert(v.clone(), Letter::Vertex(i)).is_some() {
                return Err(GraphError::DuplicateId(v.clone()));
            }
        }
        let mut out = Vec::new();
        for (id, source, range) in edges {
            let (id, source, range) = (id.into(), source.into(), range.into());
            check_id(&id)?;
            let endpoint = |name: &String| match lookup.get(name) {
                Some(Letter::Vertex(i)) => Ok(*i),
                _ => Err(GraphError::UnknownEndpoint {
                    edge: id.clone(),
                    vertex: name.clone(),
                }),
            };
            let (s, r) = (endpoint(&source)?, endpoint(&range)?);
            if lookup.contains_key(&id) {
                return Err(GraphError::DuplicateId(id));
            }
            lookup.insert(id.clone(), Letter::Edge(out.len()));
            out.push(Edge {
                id,
                source: s,
                range: r,
            });
        }
        Ok(DirectedMultigraph {
            vertices,
            edges: out,
            lookup,
        })
    }

    /// Edgeless graph on `v1, …, vn`.
    pub fn edgeless(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        Self::new(names, Vec::<(String, String, String)>::new()).expect("generated ids are valid")
    }

    // Partner ids carry the reserved suffix, so they bypass `check_id`.
    fn from_parts(vertices: Vec<String>, edges: Vec<Edge>) -> Self {
        let mut lookup = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            lookup.insert(v.clone(), Letter::Vertex(i));
        }
        for (i, e) in edges.iter().enumerate() {
            lookup.insert(e.id.clone(), Letter::Edge(i));
        }
        DirectedMultigraph {
            vertices,
            edges,
            lookup,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn vertex_name(&self, i: usize) -> &str {
        &self.vertices[i]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        match self.lookup.get(name) {
            Some(Letter::Vertex(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn letter(&self, name: &str) -> Option<Letter> {
        self.lookup.get(name).copied()
    }

    pub fn letter_name(&self, l: Letter) -> &str {
        match l {
            Letter::Vertex(i) => &self.vertices[i],
            Letter::Edge(i) => &self.edges[i].id,
        }
    }

    pub fn contains(&self, l: Letter) -> bool {
        match l {
            Letter::Vertex(i) => i < self.vertices.len(),
            Letter::Edge(i) => i < self.edges.len(),
        }
    }

    /// All letters in alphabet order.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.vertices.len())
            .map(Letter::Vertex)
            .chain((0..self.edges.len()).map(Letter::Edge))
    }

    pub fn letter_count(&self) -> usize {
        self.vertices.len() + self.edges.len()
    }

    /// `r(·)` extended to vertices by `r(v) = v`.
    pub fn range(&self, l: Letter) -> Letter {
        match l {
            Letter::Vertex(_) => l,
            Letter::Edge(i) => Letter::Vertex(self.edges[i].range),
        }
    }

    /// `s(·)` extended to vertices by `s(v) = v`.
    pub fn source(&self, l: Letter) -> Letter {
        match l {
            Letter::Vertex(_) => l,
            Letter::Edge(i) => Letter::Vertex(self.edges[i].source),
        }
    }

    /// Bitmask of a vertex subset given by indices.
    pub fn subset_mask(&self, subset: &[usize]) -> Result<u32, GraphError> {
        if self.vertex_count() > MAX_SUBSET_VERTICES {
            return Err(GraphError::Capacity(self.vertex_count()));
        }
        if subset.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        let mut mask = 0u32;
        for &v in subset {
            if v >= self.vertex_count() {
                return Err(GraphError::VertexOutOfRange(v));
            }
            mask |= 1 << v;
        }
        Ok(mask)
    }

    /// Bitmask of the endpoints of edge `e`.
    pub fn endpoint_mask(&self, e: usize) -> u32 {
        let edge = &self.edges[e];
        (1u32 << edge.source) | (1u32 << edge.range)
    }
}

impl fmt::Display for DirectedMultigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            writeln!(f, "vertex {v}")?;
        }
        for e in &self.edges {
            writeln!(
                f,
                "edge {} {} {}",
                e.id, self.vertices[e.source], self.vertices[e.range]
            )?;
        }
        Ok(())
    }
}

/// Undirected multigraph stored as a multiplicity function on unordered
/// vertex pairs. A pair `(v, v)` counts loops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UndirectedMultigraph {
    vertices: Vec<String>,
    multiplicity: BTreeMap<(usize, usize), usize>,
}

impl UndirectedMultigraph {
    pub fn new(
        vertices: Vec<String>,
        pairs: impl IntoIterator<Item = ((usize, usize), usize)>,
    ) -> Result<Self, GraphError> {
        let n = vertices.len();
        let mut multiplicity = BTreeMap::new();
        for ((a, b), count) in pairs {
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange(v));
                }
            }
            if count > 0 {
                *multiplicity.entry((a.min(b), a.max(b))).or_insert(0) += count;
            }
        }
        Ok(UndirectedMultigraph {
            vertices,
            multiplicity,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn multiplicity(&self, v: usize, w: usize) -> usize {
        self.multiplicity
            .get(&(v.min(w), v.max(w)))
            .copied()
            .unwrap_or(0)
    }

    pub fn loops(&self, v: usize) -> usize {
        self.multiplicity(v, v)
    }

    /// Nonzero multiplicities keyed by `(min, max)`.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.multiplicity.iter().map(|(k, v)| (*k, *v))
    }

    pub fn edge_total(&self) -> usize {
        self.multiplicity.values().sum()
    }
}

/// `Q` together with a reversed partner `e~` for each edge `e`.
///
/// Edges `0..m` of [`DoubledGraph::base`] are the edges of the original
/// graph; edge `m + i` is the partner of edge `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubledGraph {
    original: Arc<DirectedMultigraph>,
    base: DirectedMultigraph,
}

impl DoubledGraph {
    pub fn original(&self) -> &Arc<DirectedMultigraph> {
        &self.original
    }

    pub fn base(&self) -> &DirectedMultigraph {
        &self.base
    }

    /// The edge involution `e ↔ e~`.
    pub fn partner(&self, e: usize) -> usize {
        let m = self.original.edge_count();
        if e < m {
            e + m
        } else {
            e - m
        }
    }

    /// Whether edge `e` of the base graph is a reversed partner.
    pub fn is_partner(&self, e: usize) -> bool {
        e >= self.original.edge_count()
    }

    /// Involution on letters; vertices are fixed.
    pub fn star(&self, l: Letter) -> Letter {
        match l {
            Letter::Vertex(_) => l,
            Letter::Edge(e) => Letter::Edge(self.partner(e)),
        }
    }
}

/// The graph an algebra element or representation lives over.
#[derive(Debug, Clone)]
pub enum Carrier {
    Plain(Arc<DirectedMultigraph>),
    Doubled(Arc<DoubledGraph>),
}

impl Carrier {
    pub fn plain(q: DirectedMultigraph) -> Self {
        Carrier::Plain(Arc::new(q))
    }

    pub fn doubled_of(q: DirectedMultigraph) -> Self {
        Carrier::Doubled(Arc::new(double(&Arc::new(q))))
    }

    /// The graph whose letters form words over this carrier.
    pub fn graph(&self) -> &DirectedMultigraph {
        match self {
            Carrier::Plain(q) => q,
            Carrier::Doubled(d) => &d.base,
        }
    }

    /// The undoubled graph `Q`.
    pub fn original(&self) -> &Arc<DirectedMultigraph> {
        match self {
            Carrier::Plain(q) => q,
            Carrier::Doubled(d) => &d.original,
        }
    }

    pub fn doubled(&self) -> Option<&DoubledGraph> {
        match self {
            Carrier::Plain(_) => None,
            Carrier::Doubled(d) => Some(d),
        }
    }

    pub fn is_doubled(&self) -> bool {
        matches!(self, Carrier::Doubled(_))
    }
}

impl PartialEq for Carrier {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Carrier::Plain(a), Carrier::Plain(b)) => Arc::ptr_eq(a, b) || a == b,
            (Carrier::Doubled(a), Carrier::Doubled(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl Eq for Carrier {}

/// Forgets edge directions. Loops contribute to the pair `(v, v)`.
pub fn shadow(q: &DirectedMultigraph) -> UndirectedMultigraph {
    let pairs = q.edges.iter().map(|e| ((e.source, e.range), 1));
    UndirectedMultigraph::new(q.vertices.clone(), pairs).expect("edge endpoints are declared")
}

/// Edges with both endpoints in `subset`.
pub fn internal_edges(q: &DirectedMultigraph, subset: &[usize]) -> Result<Vec<usize>, GraphError> {
    if subset.is_empty() {
        return Err(GraphError::EmptySubset);
    }
    let mut member = vec![false; q.vertex_count()];
    for &v in subset {
        *member
            .get_mut(v)
            .ok_or(GraphError::VertexOutOfRange(v))? = true;
    }
    Ok((0..q.edge_count())
        .filter(|&e| member[q.edges[e].source] && member[q.edges[e].range])
        .collect())
}

/// `n(S)`, the number of edges with both endpoints in `subset`.
pub fn internal_edge_count(q: &DirectedMultigraph, subset: &[usize]) -> Result<usize, GraphError> {
    internal_edges(q, subset).map(|edges| edges.len())
}

/// `(loop edges, non-loop edges)` in declared order.
pub fn loop_partition(q: &DirectedMultigraph) -> (Vec<usize>, Vec<usize>) {
    (0..q.edge_count()).partition(|&e| q.edges[e].is_loop())
}

/// Adds a reversed partner `e~` for every edge.
pub fn double(q: &Arc<DirectedMultigraph>) -> DoubledGraph {
    let mut edges = q.edges.clone();
    edges.extend(q.edges.iter().map(|e| Edge {
        id: format!("{}{PARTNER_SUFFIX}", e.id),
        source: e.range,
        range: e.source,
    }));
    DoubledGraph {
        original: Arc::clone(q),
        base: DirectedMultigraph::from_parts(q.vertices.clone(), edges),
    }
}

/// Number of edges with range `v` and source `w`.
pub fn directed_multiplicity(q: &DirectedMultigraph, v: usize, w: usize) -> Result<usize, GraphError> {
    for x in [v, w] {
        if x >= q.vertex_count() {
            return Err(GraphError::VertexOutOfRange(x));
        }
    }
    Ok(q.edges.iter().filter(|e| e.range == v && e.source == w).count())
}
