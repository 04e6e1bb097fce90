//! Isomorphism deciders for directed and undirected multigraphs.
//!
//! Multigraphs are compared through their multiplicity matrices. The search
//! assigns the most constrained vertices first and prunes on per-vertex
//! invariant vectors; a positive answer carries a vertex bijection (and an
//! edge bijection in the directed case) that is re-verified independently of
//! the search before it is returned.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{shadow, DirectedMultigraph, UndirectedMultigraph};
use crate::mispace::{blind, build_mispace, recover_shadow, MispaceError};

pub const MAX_ISO_VERTICES: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsoError {
    #[error("isomorphism search supports at most {MAX_ISO_VERTICES} vertices, got {0}")]
    Capacity(usize),
    #[error(transparent)]
    Mispace(#[from] MispaceError),
    #[error("shadow recovered from the blinded descriptor disagrees with the direct shadow")]
    CrossCheck,
}

/// First invariant found to differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Refutation {
    VertexCount,
    EdgeCount,
    LoopCount,
    DegreeMultiset,
    DimMultiset,
    ExhaustedSearch,
}

impl std::fmt::Display for Refutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Refutation::VertexCount => "vertex counts differ",
            Refutation::EdgeCount => "edge counts differ",
            Refutation::LoopCount => "loop counts differ",
            Refutation::DegreeMultiset => "multisets of per-vertex multiplicity vectors differ",
            Refutation::DimMultiset => "multisets of component dimensions differ",
            Refutation::ExhaustedSearch => "no bijection survives the search",
        })
    }
}

/// `vertices[i]` is the image of vertex `i`; `edges[j]` the image of edge `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoMapping {
    pub vertices: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoWitness {
    pub verdict: bool,
    pub mapping: Option<IsoMapping>,
    pub refutation: Option<Refutation>,
}

impl IsoWitness {
    fn yes(mapping: IsoMapping) -> Self {
        IsoWitness {
            verdict: true,
            mapping: Some(mapping),
            refutation: None,
        }
    }

    fn no(r: Refutation) -> Self {
        IsoWitness {
            verdict: false,
            mapping: None,
            refutation: Some(r),
        }
    }
}

/// Square multiplicity matrix; `m[a][b]` counts edges from `a` to `b`
/// (symmetric for undirected graphs, loops on the diagonal).
type Matrix = Vec<Vec<usize>>;

fn digraph_matrix(q: &DirectedMultigraph) -> Matrix {
    let n = q.vertex_count();
    let mut m = vec![vec![0; n]; n];
    for e in q.edges() {
        m[e.source][e.range] += 1;
    }
    m
}

fn udgraph_matrix(s: &UndirectedMultigraph) -> Matrix {
    let n = s.vertex_count();
    (0..n).map(|a| (0..n).map(|b| s.multiplicity(a, b)).collect()).collect()
}

/// Per-vertex invariant vector: loops, then sorted multiplicities to and from
/// the other vertices.
fn vertex_invariants(m: &Matrix) -> Vec<(usize, Vec<usize>, Vec<usize>)> {
    let n = m.len();
    (0..n)
        .map(|v| {
            let mut out: Vec<usize> = (0..n).filter(|&w| w != v).map(|w| m[v][w]).collect();
            let mut inc: Vec<usize> = (0..n).filter(|&w| w != v).map(|w| m[w][v]).collect();
            out.sort_unstable();
            inc.sort_unstable();
            (m[v][v], out, inc)
        })
        .collect()
}

fn sorted<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.sort();
    v
}

/// Cheap refutations followed by backtracking. `edge_total` is computed by the
/// caller since undirected totals count each pair once.
fn match_matrices(a: &Matrix, b: &Matrix, edges: (usize, usize)) -> Result<Vec<usize>, Refutation> {
    if a.len() != b.len() {
        return Err(Refutation::VertexCount);
    }
    if edges.0 != edges.1 {
        return Err(Refutation::EdgeCount);
    }
    let trace = |m: &Matrix| (0..m.len()).map(|v| m[v][v]).sum::<usize>();
    if trace(a) != trace(b) {
        return Err(Refutation::LoopCount);
    }
    let ia = vertex_invariants(a);
    let ib = vertex_invariants(b);
    if sorted(&ia) != sorted(&ib) {
        return Err(Refutation::DegreeMultiset);
    }
    let n = a.len();
    // rarest invariant class first, identifier order within ties
    let class_size = |v: usize| ia.iter().filter(|x| **x == ia[v]).count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (class_size(v), v));
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if search(a, b, &ia, &ib, &order, 0, &mut image, &mut used) {
        Ok(image)
    } else {
        Err(Refutation::ExhaustedSearch)
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &Matrix,
    b: &Matrix,
    ia: &[(usize, Vec<usize>, Vec<usize>)],
    ib: &[(usize, Vec<usize>, Vec<usize>)],
    order: &[usize],
    depth: usize,
    image: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&v) = order.get(depth) else {
        return true;
    };
    for w in 0..b.len() {
        if used[w] || ia[v] != ib[w] {
            continue;
        }
        let consistent = order[..depth]
            .iter()
            .all(|&u| a[v][u] == b[w][image[u]] && a[u][v] == b[image[u]][w]);
        if !consistent || a[v][v] != b[w][w] {
            continue;
        }
        image[v] = w;
        used[w] = true;
        if search(a, b, ia, ib, order, depth + 1, image, used) {
            return true;
        }
        used[w] = false;
        image[v] = usize::MAX;
    }
    false
}

fn guard(n: usize) -> Result<(), IsoError> {
    if n > MAX_ISO_VERTICES {
        return Err(IsoError::Capacity(n));
    }
    Ok(())
}

/// Directed multigraph isomorphism preserving source and range.
pub fn digraph_isomorphic(q1: &DirectedMultigraph, q2: &DirectedMultigraph) -> Result<IsoWitness, IsoError> {
    guard(q1.vertex_count())?;
    guard(q2.vertex_count())?;
    let a = digraph_matrix(q1);
    let b = digraph_matrix(q2);
    let vertices = match match_matrices(&a, &b, (q1.edge_count(), q2.edge_count())) {
        Ok(v) => v,
        Err(r) => return Ok(IsoWitness::no(r)),
    };
    // parallel classes matched in identifier order
    let mut pools: std::collections::BTreeMap<(usize, usize), std::collections::VecDeque<usize>> =
        Default::default();
    for (j, e) in q2.edges().iter().enumerate() {
        pools.entry((e.source, e.range)).or_default().push_back(j);
    }
    let edges = q1
        .edges()
        .iter()
        .map(|e| {
            pools
                .get_mut(&(vertices[e.source], vertices[e.range]))
                .and_then(|p| p.pop_front())
                .expect("multiplicity matrices agree")
        })
        .collect();
    let mapping = IsoMapping {
        vertices,
        edges: Some(edges),
    };
    debug_assert!(verify_digraph_mapping(q1, q2, &mapping));
    if !verify_digraph_mapping(q1, q2, &mapping) {
        return Ok(IsoWitness::no(Refutation::ExhaustedSearch));
    }
    Ok(IsoWitness::yes(mapping))
}

/// Undirected multigraph isomorphism carrying multiplicities (loops to loops).
pub fn udgraph_isomorphic(s1: &UndirectedMultigraph, s2: &UndirectedMultigraph) -> Result<IsoWitness, IsoError> {
    guard(s1.vertex_count())?;
    guard(s2.vertex_count())?;
    let a = udgraph_matrix(s1);
    let b = udgraph_matrix(s2);
    match match_matrices(&a, &b, (s1.edge_total(), s2.edge_total())) {
        Ok(vertices) => {
            let mapping = IsoMapping { vertices, edges: None };
            if !verify_udgraph_mapping(s1, s2, &mapping) {
                return Ok(IsoWitness::no(Refutation::ExhaustedSearch));
            }
            Ok(IsoWitness::yes(mapping))
        }
        Err(r) => Ok(IsoWitness::no(r)),
    }
}

/// Isomorphism of the universal operator algebras: directed isomorphism.
pub fn oa_isomorphic(q1: &DirectedMultigraph, q2: &DirectedMultigraph) -> Result<IsoWitness, IsoError> {
    digraph_isomorphic(q1, q2)
}

/// Isomorphism of the universal `C*`-algebras: isomorphism of shadows.
pub fn gcm_isomorphic(q1: &DirectedMultigraph, q2: &DirectedMultigraph) -> Result<IsoWitness, IsoError> {
    udgraph_isomorphic(&shadow(q1), &shadow(q2))
}

/// [`gcm_isomorphic`], additionally confirmed against shadows recovered from
/// blinded maximal-ideal-space descriptors. A refutation prefers the
/// component dimension multiset when that already differs.
pub fn gcm_isomorphic_cross_checked(
    q1: &DirectedMultigraph,
    q2: &DirectedMultigraph,
    seed: u64,
) -> Result<IsoWitness, IsoError> {
    let direct = gcm_isomorphic(q1, q2)?;
    let d1 = build_mispace(q1)?;
    let d2 = build_mispace(q2)?;
    let dims = |d: &crate::mispace::MaxIdealDescriptor| sorted(&d.components().iter().map(|c| c.dim).collect::<Vec<_>>());
    let r1 = recover_shadow(&blind(&d1, seed)?)?;
    let r2 = recover_shadow(&blind(&d2, seed.wrapping_add(1))?)?;
    let recovered = udgraph_isomorphic(&r1, &r2)?;
    if recovered.verdict != direct.verdict {
        return Err(IsoError::CrossCheck);
    }
    if !direct.verdict && d1.vertex_names().len() == d2.vertex_names().len() && dims(&d1) != dims(&d2) {
        return Ok(IsoWitness::no(Refutation::DimMultiset));
    }
    Ok(direct)
}

/// Checks a directed witness against both graphs without trusting the search.
pub fn verify_digraph_mapping(q1: &DirectedMultigraph, q2: &DirectedMultigraph, m: &IsoMapping) -> bool {
    let Some(edges) = &m.edges else { return false };
    is_bijection(&m.vertices, q2.vertex_count())
        && q1.vertex_count() == q2.vertex_count()
        && q1.edge_count() == q2.edge_count()
        && is_bijection(edges, q2.edge_count())
        && q1.edges().iter().zip(edges).all(|(e, &j)| {
            let f = q2.edge(j);
            f.source == m.vertices[e.source] && f.range == m.vertices[e.range]
        })
}

/// Checks an undirected witness: every multiplicity is carried over.
pub fn verify_udgraph_mapping(s1: &UndirectedMultigraph, s2: &UndirectedMultigraph, m: &IsoMapping) -> bool {
    let n = s1.vertex_count();
    n == s2.vertex_count()
        && is_bijection(&m.vertices, n)
        && (0..n).all(|a| (a..n).all(|b| s1.multiplicity(a, b) == s2.multiplicity(m.vertices[a], m.vertices[b])))
}

fn is_bijection(map: &[usize], n: usize) -> bool {
    let mut hit = vec![false; n];
    map.len() == n && map.iter().all(|&x| x < n && !std::mem::replace(&mut hit[x], true))
}
