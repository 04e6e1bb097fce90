//! Finite-dimensional representations of graph algebras.
//!
//! A representation sends vertices to orthogonal projections and edges to
//! contractions `T_e` with `P_{r(e)} T_e P_{s(e)} = T_e`. Projections of
//! different vertices need not be orthogonal to each other. Over a doubled
//! graph the partner edge must go to the adjoint, which makes the
//! representation a `*`-representation.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{to_complex64, AlgebraElement};
use crate::graph::{Carrier, DirectedMultigraph, DoubledGraph, Letter};
use crate::seeds;

pub type ComplexMatrix = DMatrix<Complex64>;

/// Tolerance for the structural checks on representation images.
pub const REP_TOLERANCE: f64 = 1e-9;
/// Largest dimension for randomly sampled representations.
pub const MAX_RANDOM_DIM: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepError {
    #[error("element and representation live over different graphs")]
    GraphMismatch,
    #[error("expected {expected} images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("image of `{0}` has the wrong shape")]
    Shape(String),
    #[error("image of `{0}` has non-finite entries")]
    NonFinite(String),
    #[error("image of vertex `{0}` is not an orthogonal projection")]
    NotProjection(String),
    #[error("image of edge `{0}` is not a contraction")]
    NotContraction(String),
    #[error("image of edge `{0}` violates r(e) e s(e) = e")]
    Relation(String),
    #[error("images of `{0}` and its partner are not adjoint")]
    NotAdjointPair(String),
    #[error("nest representation image of `{0}` is not upper triangular")]
    NotUpperTriangular(String),
    #[error("edge `{0}` is a loop")]
    LoopEdge(String),
    #[error("nest families need two distinct vertices")]
    SameVertex,
    #[error("parameter for `{0}` has modulus greater than one")]
    ParameterModulus(String),
    #[error("parameter given for `{0}`, which the nest family does not use")]
    UnusedParameter(String),
    #[error("index {0} is out of range")]
    OutOfRange(usize),
    #[error("dimension {0} must lie in 1..={MAX_RANDOM_DIM}")]
    Capacity(usize),
    #[error("matrix is not hermitian within {0}")]
    NotHermitian(f64),
}

pub fn max_entry(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && max_entry(&(a - b)) <= tol
}

/// Matrix unit `E_{ij}` of size `n` (zero-based indices).
pub fn matrix_unit(n: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Number of singular values above `tol · max(1, σ_max)`.
pub fn numeric_rank(m: &ComplexMatrix, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max).max(1.0);
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Whether a hermitian matrix has all eigenvalues `≥ -tol`.
pub fn psd_check(h: &ComplexMatrix, tol: f64) -> Result<bool, RepError> {
    if !h.is_square() || !close(h, &h.adjoint(), tol) {
        return Err(RepError::NotHermitian(tol));
    }
    if h.is_empty() {
        return Ok(true);
    }
    let hermitian = (h + h.adjoint()).scale(0.5);
    let min = hermitian
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(min >= -tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRep {
    carrier: Carrier,
    dim: usize,
    vertex_images: Vec<ComplexMatrix>,
    edge_images: Vec<ComplexMatrix>,
}

impl GraphRep {
    /// Validates the images against the representation invariants.
    pub fn new(
        carrier: Carrier,
        dim: usize,
        vertex_images: Vec<ComplexMatrix>,
        edge_images: Vec<ComplexMatrix>,
    ) -> Result<Self, RepError> {
        let g = carrier.graph();
        for (expected, got) in [
            (g.vertex_count(), vertex_images.len()),
            (g.edge_count(), edge_images.len()),
        ] {
            if expected != got {
                return Err(RepError::ImageCount { expected, got });
            }
        }
        let named = vertex_images
            .iter()
            .enumerate()
            .map(|(i, m)| (g.vertex_name(i), m))
            .chain(edge_images.iter().enumerate().map(|(i, m)| (g.edge(i).id.as_str(), m)));
        for (name, m) in named {
            if m.shape() != (dim, dim) {
                return Err(RepError::Shape(name.to_string()));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(RepError::NonFinite(name.to_string()));
            }
        }
        for (i, p) in vertex_images.iter().enumerate() {
            if !close(&(p * p), p, REP_TOLERANCE) || !close(p, &p.adjoint(), REP_TOLERANCE) {
                return Err(RepError::NotProjection(g.vertex_name(i).to_string()));
            }
        }
        for (i, t) in edge_images.iter().enumerate() {
            let e = g.edge(i);
            if operator_norm(t) > 1.0 + REP_TOLERANCE {
                return Err(RepError::NotContraction(e.id.clone()));
            }
            let sandwiched = &vertex_images[e.range] * t * &vertex_images[e.source];
            if !close(&sandwiched, t, REP_TOLERANCE) {
                return Err(RepError::Relation(e.id.clone()));
            }
        }
        if let Some(d) = carrier.doubled() {
            for i in 0..g.edge_count() {
                if !close(&edge_images[d.partner(i)], &edge_images[i].adjoint(), REP_TOLERANCE) {
                    return Err(RepError::NotAdjointPair(g.edge(i).id.clone()));
                }
            }
        }
        Ok(GraphRep {
            carrier,
            dim,
            vertex_images,
            edge_images,
        })
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, l: Letter) -> &ComplexMatrix {
        match l {
            Letter::Vertex(i) => &self.vertex_images[i],
            Letter::Edge(i) => &self.edge_images[i],
        }
    }
}

/// Image of an algebra element: products along words, summed with
/// coefficients.
pub fn rep_eval(rep: &GraphRep, x: &AlgebraElement) -> Result<ComplexMatrix, RepError> {
    if rep.carrier != *x.carrier() {
        return Err(RepError::GraphMismatch);
    }
    let mut total = ComplexMatrix::zeros(rep.dim, rep.dim);
    for (w, c) in x.terms() {
        let mut letters = w.letters().iter();
        let first = letters.next().expect("reduced words are nonempty");
        let mut product = rep.image(*first).clone();
        for &l in letters {
            product *= rep.image(l);
        }
        total += product * to_complex64(c);
    }
    Ok(total)
}

/// Two-dimensional representation with upper-triangular images.
#[derive(Debug, Clone, PartialEq)]
pub struct NestRep(GraphRep);

impl NestRep {
    pub fn new(rep: GraphRep) -> Result<Self, RepError> {
        if rep.dim != 2 {
            return Err(RepError::Shape("nest representation".into()));
        }
        let g = rep.carrier.graph();
        for l in g.letters() {
            if rep.image(l)[(1, 0)].norm() > REP_TOLERANCE {
                return Err(RepError::NotUpperTriangular(g.letter_name(l).to_string()));
            }
        }
        Ok(NestRep(rep))
    }

    pub fn rep(&self) -> &GraphRep {
        &self.0
    }

    /// Whether the generator images and their pairwise products span the
    /// three-dimensional algebra of upper-triangular 2×2 matrices.
    pub fn spans_upper_triangular(&self) -> bool {
        let g = self.0.carrier.graph();
        let images: Vec<&ComplexMatrix> = g.letters().map(|l| self.0.image(l)).collect();
        let mut columns: Vec<ComplexMatrix> = images.iter().map(|m| (*m).clone()).collect();
        for a in &images {
            for b in &images {
                columns.push(*a * *b);
            }
        }
        let coords = ComplexMatrix::from_fn(3, columns.len(), |r, c| {
            let m = &columns[c];
            [m[(0, 0)], m[(1, 1)], m[(0, 1)]][r]
        });
        numeric_rank(&coords, REP_TOLERANCE) == 3
    }
}

impl std::ops::Deref for NestRep {
    type Target = GraphRep;

    fn deref(&self) -> &GraphRep {
        &self.0
    }
}

fn zeros2() -> ComplexMatrix {
    ComplexMatrix::zeros(2, 2)
}

/// Sends `r(e) ↦ E₁₁`, `s(e) ↦ E₂₂`, `e ↦ E₁₂` and every other generator
/// to zero.
pub fn nest_rep(q: &std::sync::Arc<DirectedMultigraph>, e: usize) -> Result<NestRep, RepError> {
    if e >= q.edge_count() {
        return Err(RepError::OutOfRange(e));
    }
    let edge = q.edge(e);
    if edge.is_loop() {
        return Err(RepError::LoopEdge(edge.id.clone()));
    }
    let mut vertices = vec![zeros2(); q.vertex_count()];
    vertices[edge.range] = matrix_unit(2, 0, 0);
    vertices[edge.source] = matrix_unit(2, 1, 1);
    let mut edges = vec![zeros2(); q.edge_count()];
    edges[e] = matrix_unit(2, 0, 1);
    NestRep::new(GraphRep::new(
        Carrier::Plain(std::sync::Arc::clone(q)),
        2,
        vertices,
        edges,
    )?)
}

/// Parameters of a nest family between vertices `v` (range side) and `w`
/// (source side). Unlisted edges `w → v` default to coefficient one and
/// unlisted loops at `v` or `w` default to zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NestParams {
    pub edges: BTreeMap<usize, Complex64>,
    pub loops: BTreeMap<usize, Complex64>,
}

/// `v ↦ E₁₁`, `w ↦ E₂₂`, each edge `w → v` to `a_e E₁₂`, loops at `v` to
/// `λ E₁₁`, loops at `w` to `λ E₂₂`, everything else to zero.
pub fn nest_family(
    q: &std::sync::Arc<DirectedMultigraph>,
    v: usize,
    w: usize,
    params: &NestParams,
) -> Result<NestRep, RepError> {
    for x in [v, w] {
        if x >= q.vertex_count() {
            return Err(RepError::OutOfRange(x));
        }
    }
    if v == w {
        return Err(RepError::SameVertex);
    }
    let links = |e: usize| q.edge(e).range == v && q.edge(e).source == w;
    let looped = |e: usize| q.edge(e).is_loop() && (q.edge(e).range == v || q.edge(e).range == w);
    for (map, uses) in [(&params.edges, &links as &dyn Fn(usize) -> bool), (&params.loops, &looped)] {
        for (&e, z) in map {
            if e >= q.edge_count() {
                return Err(RepError::OutOfRange(e));
            }
            if !uses(e) {
                return Err(RepError::UnusedParameter(q.edge(e).id.clone()));
            }
            if z.norm() > 1.0 + 1e-12 {
                return Err(RepError::ParameterModulus(q.edge(e).id.clone()));
            }
        }
    }
    let mut vertices = vec![zeros2(); q.vertex_count()];
    vertices[v] = matrix_unit(2, 0, 0);
    vertices[w] = matrix_unit(2, 1, 1);
    let one = Complex64::new(1.0, 0.0);
    let edges = (0..q.edge_count())
        .map(|e| {
            if links(e) {
                matrix_unit(2, 0, 1) * params.edges.get(&e).copied().unwrap_or(one)
            } else if looped(e) {
                let corner = if q.edge(e).range == v { 0 } else { 1 };
                matrix_unit(2, corner, corner) * params.loops.get(&e).copied().unwrap_or_default()
            } else {
                zeros2()
            }
        })
        .collect();
    NestRep::new(GraphRep::new(
        Carrier::Plain(std::sync::Arc::clone(q)),
        2,
        vertices,
        edges,
    )?)
}

/// The evaluation matrix `[π_e(T_f)]` over all edges `e, f` of `Q`, where
/// `π_e` is the nest family between `v` and `w` with coefficient one on `e`
/// and zero on every other edge, and the entry is the `E₁₂` coordinate.
pub fn nest_evaluation_matrix(
    q: &std::sync::Arc<DirectedMultigraph>,
    v: usize,
    w: usize,
) -> Result<ComplexMatrix, RepError> {
    let m = q.edge_count();
    let carrier = Carrier::Plain(std::sync::Arc::clone(q));
    let generators: Vec<AlgebraElement> = (0..m)
        .map(|f| AlgebraElement::word(&carrier, &[Letter::Edge(f)]).expect("edge letters are valid"))
        .collect();
    let linked: Vec<usize> = (0..m)
        .filter(|&e| q.edge(e).range == v && q.edge(e).source == w)
        .collect();
    let mut out = ComplexMatrix::zeros(m, m);
    for e in 0..m {
        let params = NestParams {
            edges: linked
                .iter()
                .map(|&f| (f, Complex64::new(if f == e { 1.0 } else { 0.0 }, 0.0)))
                .collect(),
            loops: BTreeMap::new(),
        };
        let pi = nest_family(q, v, w, &params)?;
        for (f, x) in generators.iter().enumerate() {
            out[(e, f)] = rep_eval(&pi, x)?[(0, 1)];
        }
    }
    Ok(out)
}

/// Number of edges with range `v` and source `w`, read off as the rank of
/// [`nest_evaluation_matrix`].
pub fn nest_multiplicity(
    q: &std::sync::Arc<DirectedMultigraph>,
    v: usize,
    w: usize,
) -> Result<usize, RepError> {
    Ok(numeric_rank(&nest_evaluation_matrix(q, v, w)?, REP_TOLERANCE))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Orthogonal projection onto a random subspace of random rank `0..=dim`.
fn random_projection(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let rank = rng.random_range(0..=dim);
    if rank == 0 {
        return ComplexMatrix::zeros(dim, dim);
    }
    let basis = gaussian_matrix(rng, dim, rank).qr().q();
    let p = &basis * basis.adjoint();
    (&p + p.adjoint()).scale(0.5)
}

fn random_images(
    q: &DirectedMultigraph,
    dim: usize,
    seed: u64,
) -> Result<(Vec<ComplexMatrix>, Vec<ComplexMatrix>), RepError> {
    if !(1..=MAX_RANDOM_DIM).contains(&dim) {
        return Err(RepError::Capacity(dim));
    }
    let mut rng = seeds::rng(seed, 0x7265_7073, dim as u64);
    let vertices: Vec<ComplexMatrix> = (0..q.vertex_count())
        .map(|_| random_projection(&mut rng, dim))
        .collect();
    let edges = q
        .edges()
        .iter()
        .map(|e| {
            let a = gaussian_matrix(&mut rng, dim, dim);
            let t = &vertices[e.range] * a * &vertices[e.source];
            let n = operator_norm(&t);
            if n > 1e-12 {
                t.unscale(n)
            } else {
                ComplexMatrix::zeros(dim, dim)
            }
        })
        .collect();
    Ok((vertices, edges))
}

/// Random representation of `Q`: orthogonal projections for vertices and
/// norm-one compressions `P_{r(e)} A P_{s(e)}` for edges.
pub fn random_contractive_rep(
    q: &std::sync::Arc<DirectedMultigraph>,
    dim: usize,
    seed: u64,
) -> Result<GraphRep, RepError> {
    let (vertices, edges) = random_images(q, dim, seed)?;
    GraphRep::new(Carrier::Plain(std::sync::Arc::clone(q)), dim, vertices, edges)
}

/// Random `*`-representation of a doubled graph: a random representation of
/// the original graph with each partner edge sent to the adjoint.
pub fn random_star_rep(
    d: &std::sync::Arc<DoubledGraph>,
    dim: usize,
    seed: u64,
) -> Result<GraphRep, RepError> {
    let (vertices, mut edges) = random_images(d.original(), dim, seed)?;
    let adjoints: Vec<ComplexMatrix> = edges.iter().map(|t| t.adjoint()).collect();
    edges.extend(adjoints);
    GraphRep::new(Carrier::Doubled(std::sync::Arc::clone(d)), dim, vertices, edges)
}

fn identity(k: usize) -> ComplexMatrix {
    ComplexMatrix::identity(k, k)
}

fn block(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix, d: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (a.nrows(), a.ncols());
    let mut m = ComplexMatrix::zeros(p + c.nrows(), q + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, q), b.shape()).copy_from(b);
    m.view_mut((p, 0), c.shape()).copy_from(c);
    m.view_mut((p, q), d.shape()).copy_from(d);
    m
}

/// `[[t, x], [x*, t]]` with `t` acting as a scalar.
pub fn gauge_block(t: f64, x: &ComplexMatrix) -> ComplexMatrix {
    let id = identity(x.nrows()).scale(t);
    block(&id, x, &x.adjoint(), &id)
}

/// Tolerance used by [`lemma_suite`].
pub const LEMMA_TOLERANCE: f64 = 1e-8;

/// `[[t, x], [x*, t]] ≥ 0` and `t² − x*x ≥ 0`.
pub fn order_lemma(x: &ComplexMatrix, t: f64, tol: f64) -> Result<(bool, bool), RepError> {
    let k = x.nrows();
    let gap = identity(k).scale(t * t) - x.adjoint() * x;
    Ok((psd_check(&gauge_block(t, x), tol)?, psd_check(&gap, tol)?))
}

/// `[[t, x], [x*, t]] ≥ 0` and `[[t², x*x], [x*x, t²]] ≥ 0`.
pub fn square_lemma(x: &ComplexMatrix, t: f64, tol: f64) -> Result<(bool, bool), RepError> {
    let k = x.nrows();
    let t2 = identity(k).scale(t * t);
    let xx = x.adjoint() * x;
    Ok((
        psd_check(&gauge_block(t, x), tol)?,
        psd_check(&block(&t2, &xx, &xx, &t2), tol)?,
    ))
}

/// Hypotheses `[[s, x], [x*, s]] ≥ 0`, `[[t, y], [y*, t]] ≥ 0` and the
/// conclusion `[[st, xy], [y*x*, st]] ≥ 0`.
pub fn product_lemma(
    x: &ComplexMatrix,
    s: f64,
    y: &ComplexMatrix,
    t: f64,
    tol: f64,
) -> Result<(bool, bool), RepError> {
    let hyp = psd_check(&gauge_block(s, x), tol)? && psd_check(&gauge_block(t, y), tol)?;
    Ok((hyp, psd_check(&gauge_block(s * t, &(x * y)), tol)?))
}

/// Same hypotheses as [`product_lemma`], conclusion
/// `[[s+t, x+y], [x*+y*, s+t]] ≥ 0`.
pub fn sum_lemma(
    x: &ComplexMatrix,
    s: f64,
    y: &ComplexMatrix,
    t: f64,
    tol: f64,
) -> Result<(bool, bool), RepError> {
    let hyp = psd_check(&gauge_block(s, x), tol)? && psd_check(&gauge_block(t, y), tol)?;
    Ok((hyp, psd_check(&gauge_block(s + t, &(x + y)), tol)?))
}

/// `[[s, x], [x*, s]] ≥ 0` and `[[s, x*], [x, s]] ≥ 0`.
pub fn swap_lemma(x: &ComplexMatrix, s: f64, tol: f64) -> Result<(bool, bool), RepError> {
    Ok((
        psd_check(&gauge_block(s, x), tol)?,
        psd_check(&gauge_block(s, &x.adjoint()), tol)?,
    ))
}

/// `[[|λ|s, λx], [λ̄x*, |λ|s]] ≥ 0` and `[[s, x], [x*, s]] ≥ 0`, for
/// `λ ≠ 0`.
pub fn scalar_lemma(x: &ComplexMatrix, s: f64, lambda: Complex64, tol: f64) -> Result<(bool, bool), RepError> {
    Ok((
        psd_check(&gauge_block(lambda.norm() * s, &(x * lambda)), tol)?,
        psd_check(&gauge_block(s, x), tol)?,
    ))
}

/// `‖x‖² − x*x ≥ 0`.
pub fn factorization_lemma(x: &ComplexMatrix, tol: f64) -> Result<bool, RepError> {
    let n = operator_norm(x);
    psd_check(&(identity(x.nrows()).scale(n * n) - x.adjoint() * x), tol)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaOutcome {
    pub name: &'static str,
    pub trials: usize,
    /// Trials in which the hypotheses of a one-way lemma held.
    pub hypotheses_met: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub trials: usize,
    pub lemmas: Vec<LemmaOutcome>,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.lemmas.iter().all(|l| l.failures == 0)
    }
}

pub const LEMMA_NAMES: [&str; 7] = [
    "order",
    "square",
    "product",
    "sum",
    "swap",
    "scalar",
    "factorization",
];

struct Sample {
    x: ComplexMatrix,
    y: ComplexMatrix,
    s: f64,
    t: f64,
    lambda: Complex64,
}

// Scalars are kept at least 1e-4 (relative) away from the matrix norm so the
// tolerance cannot decide a biconditional on its own.
fn gauge_near(rng: &mut ChaCha8Rng, norm: f64) -> f64 {
    let centre = if norm > 0.0 { norm } else { 1.0 };
    loop {
        let g = centre * rng.random_range(0.3..1.7);
        if (g - norm).abs() > 1e-4 * norm.max(1.0) {
            return g;
        }
    }
}

fn sample(seed: u64, lemma: usize, trial: usize) -> Sample {
    let mut rng = seeds::rng(seed, lemma as u64, trial as u64);
    let k = rng.random_range(1..=6);
    let draw = |rng: &mut ChaCha8Rng| {
        let zero = rng.random_bool(0.05);
        let scale = rng.random_range(0.2..2.0);
        if zero {
            ComplexMatrix::zeros(k, k)
        } else {
            gaussian_matrix(rng, k, k).scale(scale / (k as f64).sqrt())
        }
    };
    let x = draw(&mut rng);
    let y = draw(&mut rng);
    let s = gauge_near(&mut rng, operator_norm(&x));
    let t = gauge_near(&mut rng, operator_norm(&y));
    let modulus = rng.random_range(0.1..3.0);
    let lambda = Complex64::from_polar(modulus, rng.random_range(0.0..std::f64::consts::TAU));
    Sample { x, y, s, t, lambda }
}

fn check(lemma: usize, p: &Sample) -> Result<(bool, bool), RepError> {
    let tol = LEMMA_TOLERANCE;
    // (hypotheses met, passed)
    match lemma {
        0 => order_lemma(&p.x, p.s, tol).map(|(a, b)| (true, a == b)),
        1 => square_lemma(&p.x, p.s, tol).map(|(a, b)| (true, a == b)),
        2 => product_lemma(&p.x, p.s, &p.y, p.t, tol).map(|(h, c)| (h, !h || c)),
        3 => sum_lemma(&p.x, p.s, &p.y, p.t, tol).map(|(h, c)| (h, !h || c)),
        4 => swap_lemma(&p.x, p.s, tol).map(|(a, b)| (true, a == b)),
        5 => scalar_lemma(&p.x, p.s, p.lambda, tol).map(|(a, b)| (true, a == b)),
        _ => factorization_lemma(&p.x, tol).map(|ok| (true, ok)),
    }
}

/// Instantiates each block-matrix positivity lemma on `trials` random
/// matrices of size at most 6.
pub fn lemma_suite(seed: u64, trials: usize) -> LemmaReport {
    let lemmas = LEMMA_NAMES
        .iter()
        .enumerate()
        .map(|(i, &name)| {
            let results: Vec<(usize, Result<(bool, bool), RepError>)> = (0..trials)
                .into_par_iter()
                .map(|trial| (trial, check(i, &sample(seed, i, trial))))
                .collect();
            let mut outcome = LemmaOutcome {
                name,
                trials,
                hypotheses_met: 0,
                failures: 0,
                first_failure: None,
            };
            for (trial, r) in results {
                let (met, ok) = match r {
                    Ok(pair) => pair,
                    Err(e) => {
                        outcome.first_failure.get_or_insert(format!("trial {trial}: {e}"));
                        (true, false)
                    }
                };
                outcome.hypotheses_met += met as usize;
                if !ok {
                    outcome.failures += 1;
                    outcome.first_failure.get_or_insert(format!("trial {trial}"));
                }
            }
            outcome
        })
        .collect();
    LemmaReport {
        seed,
        trials,
        lemmas,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::{directed_multiplicity, double};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 3)), 0.0);
        assert!((operator_norm(&matrix_unit(2, 0, 1)) - 1.0).abs() < 1e-12);
        let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(0.0, 4.0)]));
        assert!((operator_norm(&d) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn psd_examples() {
        assert!(psd_check(&identity(3), 1e-8).unwrap());
        let d = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(!psd_check(&d, 1e-8).unwrap());
        let mut rng = seeds::rng(1, 2, 3);
        let x = gaussian_matrix(&mut rng, 4, 3);
        assert!(psd_check(&(x.adjoint() * &x), 1e-8).unwrap());
        assert_eq!(psd_check(&matrix_unit(2, 0, 1), 1e-8), Err(RepError::NotHermitian(1e-8)));
    }

    #[test]
    fn identity_rep_evaluates_vertices_to_identity() {
        let q = Arc::new(DirectedMultigraph::edgeless(1));
        let rep = GraphRep::new(Carrier::Plain(Arc::clone(&q)), 3, vec![identity(3)], vec![]).unwrap();
        let v = AlgebraElement::named(rep.carrier(), "v1").unwrap();
        assert_eq!(rep_eval(&rep, &v).unwrap(), identity(3));
    }

    #[test]
    fn nest_rep_of_the_bridge() {
        let q = Arc::new(catalog::loops_and_bridge());
        let pi = nest_rep(&q, 2).unwrap();
        let n = |w| AlgebraElement::named(pi.carrier(), w).unwrap();
        // t3 runs v1 → v2, so its range v2 takes the first corner
        assert_eq!(rep_eval(&pi, &n("v2")).unwrap(), matrix_unit(2, 0, 0));
        assert_eq!(rep_eval(&pi, &n("v1")).unwrap(), matrix_unit(2, 1, 1));
        assert_eq!(rep_eval(&pi, &n("t3")).unwrap(), matrix_unit(2, 0, 1));
        for zero in ["t1", "t2", "v3", "t1.t3", "t3.t2"] {
            assert_eq!(rep_eval(&pi, &n(zero)).unwrap(), zeros2());
        }
        assert_eq!(rep_eval(&pi, &n("v1.t3.v2")).unwrap(), zeros2());
        assert!(pi.spans_upper_triangular());
        assert!(matches!(nest_rep(&q, 0), Err(RepError::LoopEdge(_))));
    }

    #[test]
    fn nest_family_examples() {
        let q = Arc::new(catalog::parallel_pair());
        let all_ones = nest_family(&q, 1, 0, &NestParams::default()).unwrap();
        let n = |w| AlgebraElement::named(all_ones.carrier(), w).unwrap();
        let sum = rep_eval(&nest_rep(&q, 0).unwrap(), &n("t1")).unwrap()
            + rep_eval(&nest_rep(&q, 1).unwrap(), &n("t2")).unwrap();
        let fam = rep_eval(&all_ones, &n("t1")).unwrap() + rep_eval(&all_ones, &n("t2")).unwrap();
        assert_eq!(fam, sum);

        let q = Arc::new(catalog::loops_and_bridge());
        let params = NestParams {
            edges: [(2, c(0.0, 1.0))].into(),
            loops: [(0, c(0.5, 0.0)), (1, c(-1.0, 0.0))].into(),
        };
        let pi = nest_family(&q, 1, 0, &params).unwrap();
        let n = |w| AlgebraElement::named(pi.carrier(), w).unwrap();
        assert_eq!(rep_eval(&pi, &n("t3")).unwrap(), matrix_unit(2, 0, 1) * c(0.0, 1.0));
        assert_eq!(rep_eval(&pi, &n("t1")).unwrap(), matrix_unit(2, 1, 1) * c(0.5, 0.0));
        // edges whose range is not v1 vanish in the family between v2 and v3
        let other = nest_family(&q, 1, 2, &NestParams::default()).unwrap();
        for e in ["t1", "t2", "t3"] {
            let x = AlgebraElement::named(other.carrier(), e).unwrap();
            assert_eq!(rep_eval(&other, &x).unwrap(), zeros2());
        }
        let too_big = NestParams {
            edges: [(2, c(1.5, 0.0))].into(),
            ..Default::default()
        };
        assert!(matches!(nest_family(&q, 1, 0, &too_big), Err(RepError::ParameterModulus(_))));
        assert_eq!(nest_family(&q, 1, 1, &NestParams::default()), Err(RepError::SameVertex));
        let unused = NestParams {
            edges: [(0, c(1.0, 0.0))].into(),
            ..Default::default()
        };
        assert!(matches!(nest_family(&q, 1, 0, &unused), Err(RepError::UnusedParameter(_))));
    }

    #[test]
    fn nest_multiplicity_matches_edge_counts() {
        for seed in 0..15 {
            let q = Arc::new(catalog::random_graph(seed, 5, 8));
            for v in 0..q.vertex_count() {
                for w in 0..q.vertex_count() {
                    if v != w {
                        assert_eq!(
                            nest_multiplicity(&q, v, w).unwrap(),
                            directed_multiplicity(&q, v, w).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rep_validation_rejects_bad_images() {
        let q = Arc::new(catalog::single_edge());
        let carrier = Carrier::Plain(Arc::clone(&q));
        let p = vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)];
        let ok = GraphRep::new(carrier.clone(), 2, p.clone(), vec![matrix_unit(2, 1, 0)]);
        assert!(ok.is_ok());
        let wrong_side = GraphRep::new(carrier.clone(), 2, p.clone(), vec![matrix_unit(2, 0, 1)]);
        assert!(matches!(wrong_side, Err(RepError::Relation(_))));
        let big = GraphRep::new(carrier.clone(), 2, p.clone(), vec![matrix_unit(2, 1, 0).scale(2.0)]);
        assert!(matches!(big, Err(RepError::NotContraction(_))));
        let skew = vec![
            ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            matrix_unit(2, 1, 1),
        ];
        let oblique = GraphRep::new(carrier, 2, skew, vec![zeros2()]);
        assert!(matches!(oblique, Err(RepError::NotProjection(_))));
    }

    #[test]
    fn random_star_reps_are_valid_and_positive() {
        let q = Arc::new(catalog::loops_and_bridge());
        let d = Arc::new(double(&q));
        let carrier = Carrier::Doubled(Arc::clone(&d));
        for seed in 0..10 {
            for dim in [1, 2, 4] {
                let rep = random_star_rep(&d, dim, seed).unwrap();
                if dim == 1 {
                    for v in 0..3 {
                        let p = rep.image(Letter::Vertex(v))[(0, 0)];
                        assert!((p - c(0.0, 0.0)).norm() < 1e-12 || (p - c(1.0, 0.0)).norm() < 1e-12);
                    }
                }
                let x = crate::io::parse_expr("t1 + 2 * t3.t1 - 1i * v2", &carrier).unwrap();
                let xsx = x.adjoint().unwrap().mul(&x).unwrap();
                assert!(psd_check(&rep_eval(&rep, &xsx).unwrap(), 1e-8).unwrap());
            }
        }
        assert_eq!(random_star_rep(&d, 0, 0), Err(RepError::Capacity(0)));
        assert_eq!(random_star_rep(&d, 33, 0), Err(RepError::Capacity(33)));
    }

    #[test]
    fn lemma_examples() {
        let zero = ComplexMatrix::zeros(2, 2);
        assert_eq!(order_lemma(&zero, 1.0, 1e-8).unwrap(), (true, true));
        let unit = matrix_unit(2, 0, 1);
        assert_eq!(order_lemma(&unit, 0.5, 1e-8).unwrap(), (false, false));
        assert_eq!(square_lemma(&unit, 0.5, 1e-8).unwrap(), (false, false));
        assert!(factorization_lemma(&unit, 1e-8).unwrap());
    }

    #[test]
    fn small_lemma_suite_passes() {
        let report = lemma_suite(3, 40);
        assert!(report.all_passed(), "{report:?}");
        assert_eq!(report.lemmas.len(), 7);
        let product = &report.lemmas[2];
        assert!(product.hypotheses_met > 0 && product.hypotheses_met < 40);
    }
}
