//! Combinatorial model of the maximal ideal space.
//!
//! The characters of the universal operator algebra of `Q` split into one
//! closed polydisc `D̄^{n(S)}` per nonempty vertex subset `S`, where `n(S)`
//! counts edges with both endpoints in `S`. A character indexed by `S` sends
//! `v ↦ [v ∈ S]`, each `e ∈ 𝓔(S)` to a point `λ(e)` of the closed unit disc,
//! and every other edge to zero. The same space is the maximal ideal space of
//! the universal C*-algebra, so both descriptors coincide.
//!
//! A [`BlindedDescriptor`] forgets the subsets and keeps only component
//! dimensions and the incidence relation "the idempotent sets meet", which is
//! exactly what survives a Banach-algebra isomorphism. Degrees and the shadow
//! graph are recovered from that data alone.

use std::collections::BTreeMap;
use std::ops::Neg;

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{to_complex64, AlgebraElement, Scalar};
use crate::graph::{
    internal_edges, Carrier, DirectedMultigraph, GraphError, Letter, UndirectedMultigraph,
    MAX_SUBSET_VERTICES,
};
use crate::seeds;

/// Largest vertex count for which a blinded descriptor (with its dense
/// incidence relation) is materialized.
pub const MAX_BLIND_VERTICES: usize = 12;

const MODULUS_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MispaceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("the graph has no vertices")]
    EmptyGraph,
    #[error("{0} vertices exceed the blinding limit of {MAX_BLIND_VERTICES}")]
    BlindCapacity(usize),
    #[error("component count {0} is not of the form 2^k - 1")]
    NotPowerOfTwo(usize),
    #[error("corrupted descriptor: {0}")]
    Corrupted(String),
    #[error("character must assign a value to exactly the internal edges of its subset")]
    CharacterDomain,
    #[error("character value {0} lies outside the closed unit disc")]
    CharacterModulus(String),
    #[error("element does not live over the character's graph")]
    GraphMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Component {
    /// Vertex subset as a bitmask over vertex indices.
    pub subset: u32,
    pub dim: usize,
    pub degree: u32,
}

impl Component {
    pub fn vertices(&self) -> Vec<usize> {
        (0..32).filter(|i| self.subset >> i & 1 == 1).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxIdealDescriptor {
    vertex_names: Vec<String>,
    components: Vec<Component>,
}

impl MaxIdealDescriptor {
    /// Components ordered by subset bitmask.
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, subset: u32) -> Option<&Component> {
        subset
            .checked_sub(1)
            .and_then(|i| self.components.get(i as usize))
    }
}

/// Read access to component dimensions shared by both descriptor kinds.
pub trait ComponentDims {
    fn dims(&self) -> Vec<usize>;
}

impl ComponentDims for MaxIdealDescriptor {
    fn dims(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.dim).collect()
    }
}

impl ComponentDims for BlindedDescriptor {
    fn dims(&self) -> Vec<usize> {
        self.dims.clone()
    }
}

/// One component per nonempty vertex subset `S`, of dimension `n(S)`.
pub fn build_mispace(q: &DirectedMultigraph) -> Result<MaxIdealDescriptor, MispaceError> {
    let n = q.vertex_count();
    if n == 0 {
        return Err(MispaceError::EmptyGraph);
    }
    if n > MAX_SUBSET_VERTICES {
        return Err(GraphError::Capacity(n).into());
    }
    // n(S) = Σ_{T ⊆ S} #{edges with endpoint set T}: a subset-sum transform
    let full = 1usize << n;
    let mut count = vec![0u32; full];
    for e in 0..q.edge_count() {
        count[q.endpoint_mask(e) as usize] += 1;
    }
    for bit in 0..n {
        for m in 0..full {
            if m >> bit & 1 == 1 {
                count[m] += count[m ^ (1 << bit)];
            }
        }
    }
    let components = (1..full)
        .map(|m| Component {
            subset: m as u32,
            dim: count[m] as usize,
            degree: (m as u32).count_ones(),
        })
        .collect();
    Ok(MaxIdealDescriptor {
        vertex_names: q.vertices().to_vec(),
        components,
    })
}

/// The maximal ideal space of the universal C*-algebra of `Q`. It is
/// homeomorphic to that of the operator algebra, so the descriptor is shared.
pub fn mispace_of_gcm(q: &DirectedMultigraph) -> Result<MaxIdealDescriptor, MispaceError> {
    build_mispace(q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvariantReport {
    pub n_q: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub alpha: usize,
    pub beta: usize,
    pub total_dim: u64,
    pub k0_rank: usize,
}

fn log2_of_successor(count: usize) -> Result<usize, MispaceError> {
    let succ = count
        .checked_add(1)
        .ok_or(MispaceError::NotPowerOfTwo(count))?;
    if count == 0 || !succ.is_power_of_two() {
        return Err(MispaceError::NotPowerOfTwo(count));
    }
    Ok(succ.trailing_zeros() as usize)
}

/// Recovers `|V|`, `|E|` and the loop/non-loop split from component
/// dimensions alone.
///
/// A loop at `v` lies in the `2^{n-1}` subsets containing `v`; a non-loop
/// edge lies in the `2^{n-2}` subsets containing both endpoints. Hence
/// `Σ n(S) = α 2^{n-1} + β 2^{n-2}` with `α + β = max n(S)`.
pub fn invariants<D: ComponentDims>(d: &D) -> Result<InvariantReport, MispaceError> {
    let dims = d.dims();
    let n = log2_of_successor(dims.len())?;
    let edge_count = dims.iter().copied().max().unwrap_or(0);
    let total: u64 = dims.iter().map(|&x| x as u64).sum();
    let (alpha, beta) = if n == 1 {
        (edge_count, 0)
    } else {
        let unit = 1u64 << (n - 2);
        if !total.is_multiple_of(unit) {
            return Err(MispaceError::Corrupted(format!(
                "dimension total {total} is not a multiple of {unit}"
            )));
        }
        let beta = 2 * edge_count as i128 - (total / unit) as i128;
        let alpha = edge_count as i128 - beta;
        if beta < 0 || alpha < 0 {
            return Err(MispaceError::Corrupted(format!(
                "negative edge split (alpha {alpha}, beta {beta})"
            )));
        }
        (alpha as usize, beta as usize)
    };
    Ok(InvariantReport {
        n_q: dims.len(),
        vertex_count: n,
        edge_count,
        alpha,
        beta,
        total_dim: total,
        k0_rank: n,
    })
}

/// Component dimensions plus the symmetric, reflexive incidence relation
/// "the idempotent sets of the two components meet", with subset labels
/// removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindedDescriptor {
    dims: Vec<usize>,
    // row-major bitsets
    incidence: Vec<Vec<u64>>,
}

fn bitset(n: usize) -> Vec<u64> {
    vec![0u64; n.div_ceil(64)]
}

fn get_bit(row: &[u64], j: usize) -> bool {
    row[j / 64] >> (j % 64) & 1 == 1
}

fn set_bit(row: &mut [u64], j: usize) {
    row[j / 64] |= 1 << (j % 64);
}

impl BlindedDescriptor {
    /// Validates raw data: counts of the form `2^k - 1`, symmetric and
    /// reflexive incidence.
    pub fn from_parts(dims: Vec<usize>, incidence: &[Vec<bool>]) -> Result<Self, MispaceError> {
        let n = dims.len();
        log2_of_successor(n)?;
        if incidence.len() != n || incidence.iter().any(|r| r.len() != n) {
            return Err(MispaceError::Corrupted("incidence is not square".into()));
        }
        let mut rows = vec![bitset(n); n];
        for i in 0..n {
            if !incidence[i][i] {
                return Err(MispaceError::Corrupted(format!("entry {i} is not self-incident")));
            }
            for j in 0..n {
                if incidence[i][j] != incidence[j][i] {
                    return Err(MispaceError::Corrupted(format!(
                        "incidence is not symmetric at ({i}, {j})"
                    )));
                }
                if incidence[i][j] {
                    set_bit(&mut rows[i], j);
                }
            }
        }
        Ok(BlindedDescriptor {
            dims,
            incidence: rows,
        })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, id: usize) -> usize {
        self.dims[id]
    }

    pub fn incident(&self, a: usize, b: usize) -> bool {
        get_bit(&self.incidence[a], b)
    }

    fn neighbourhood_size(&self, a: usize) -> u32 {
        self.incidence[a].iter().map(|w| w.count_ones()).sum()
    }

    fn neighbourhood_within(&self, a: usize, b: usize) -> bool {
        self.incidence[a]
            .iter()
            .zip(&self.incidence[b])
            .all(|(x, y)| x & !y == 0)
    }
}

/// Strips subset labels under a seeded shuffle. Also returns the hidden key:
/// the subset mask behind each anonymous id.
pub fn blind_keyed(d: &MaxIdealDescriptor, seed: u64) -> Result<(BlindedDescriptor, Vec<u32>), MispaceError> {
    let n = d.vertex_names.len();
    if n > MAX_BLIND_VERTICES {
        return Err(MispaceError::BlindCapacity(n));
    }
    let mut order: Vec<usize> = (0..d.components.len()).collect();
    order.shuffle(&mut seeds::rng(seed, 0x626c_696e, 0));
    let key: Vec<u32> = order.iter().map(|&i| d.components[i].subset).collect();
    let dims = order.iter().map(|&i| d.components[i].dim).collect();
    let len = key.len();
    let mut incidence = vec![bitset(len); len];
    for (a, &sa) in key.iter().enumerate() {
        for (b, &sb) in key.iter().enumerate() {
            if sa & sb != 0 {
                set_bit(&mut incidence[a], b);
            }
        }
    }
    Ok((BlindedDescriptor { dims, incidence }, key))
}

pub fn blind(d: &MaxIdealDescriptor, seed: u64) -> Result<BlindedDescriptor, MispaceError> {
    blind_keyed(d, seed).map(|(b, _)| b)
}

/// Ids of the degree-one entries: those whose incidence neighbourhood is
/// minimal under inclusion. In the model these are the singleton subsets.
pub fn degree_one_entries(b: &BlindedDescriptor) -> Result<Vec<usize>, MispaceError> {
    let k = log2_of_successor(b.len())?;
    let sizes: Vec<u32> = (0..b.len()).map(|i| b.neighbourhood_size(i)).collect();
    let mut by_size: Vec<usize> = (0..b.len()).collect();
    by_size.sort_by_key(|&i| (sizes[i], i));
    let minimal: Vec<usize> = (0..b.len())
        .filter(|&x| {
            // a strictly smaller neighbourhood N(y) ⊂ N(x) forces y ∈ N(x)
            !by_size
                .iter()
                .take_while(|&&y| sizes[y] < sizes[x])
                .any(|&y| b.incident(x, y) && b.neighbourhood_within(y, x))
        })
        .collect();
    if minimal.len() != k {
        return Err(MispaceError::Corrupted(format!(
            "{} minimal entries, expected {k}",
            minimal.len()
        )));
    }
    Ok(minimal)
}

/// Degree of every entry: the number of degree-one entries it meets.
pub fn degrees_of(b: &BlindedDescriptor) -> Result<Vec<u32>, MispaceError> {
    let ones = degree_one_entries(b)?;
    Ok((0..b.len())
        .map(|x| ones.iter().filter(|&&y| b.incident(x, y)).count() as u32)
        .collect())
}

/// Rebuilds the shadow graph from a blinded descriptor.
///
/// Each degree-one entry `Y` becomes a vertex `u<i>` (numbered in id order)
/// carrying `dim(Y)` loops. For a pair `{Y, Z}` the unique degree-two entry
/// meeting both has dimension `dim(Y) + dim(Z) + m(Y, Z)`, which yields the
/// multiplicity `m(Y, Z)`.
pub fn recover_shadow(b: &BlindedDescriptor) -> Result<UndirectedMultigraph, MispaceError> {
    let ones = degree_one_entries(b)?;
    let degrees = degrees_of(b)?;
    let k = ones.len();
    let mut pairs = Vec::new();
    for (i, &y) in ones.iter().enumerate() {
        pairs.push(((i, i), b.dim(y)));
    }
    let twos: Vec<usize> = (0..b.len()).filter(|&x| degrees[x] == 2).collect();
    for i in 0..k {
        for j in i + 1..k {
            let (y, z) = (ones[i], ones[j]);
            let mut hits = twos.iter().filter(|&&x| b.incident(x, y) && b.incident(x, z));
            let x = *hits.next().ok_or_else(|| {
                MispaceError::Corrupted(format!("no degree-two entry joins {y} and {z}"))
            })?;
            if hits.next().is_some() {
                return Err(MispaceError::Corrupted(format!(
                    "several degree-two entries join {y} and {z}"
                )));
            }
            let m = b.dim(x) as i64 - b.dim(y) as i64 - b.dim(z) as i64;
            if m < 0 {
                return Err(MispaceError::Corrupted(format!(
                    "negative multiplicity between {y} and {z}"
                )));
            }
            pairs.push(((i, j), m as usize));
        }
    }
    let names = (0..k).map(|i| format!("u{i}")).collect();
    Ok(UndirectedMultigraph::new(names, pairs)?)
}

/// Scalar fields a character can take values in: floating complex numbers
/// for analysis and Gaussian rationals for exact checks.
pub trait CharField: Clone + Num + Neg<Output = Self> {
    fn coefficient(s: &Scalar) -> Complex<Self>;
    fn in_unit_disc(z: &Complex<Self>) -> bool;
    fn describe(z: &Complex<Self>) -> String;
}

impl CharField for f64 {
    fn coefficient(s: &Scalar) -> Complex64 {
        to_complex64(s)
    }

    fn in_unit_disc(z: &Complex64) -> bool {
        z.norm() <= 1.0 + MODULUS_SLACK
    }

    fn describe(z: &Complex64) -> String {
        z.to_string()
    }
}

impl CharField for BigRational {
    fn coefficient(s: &Scalar) -> Scalar {
        s.clone()
    }

    fn in_unit_disc(z: &Scalar) -> bool {
        z.norm_sqr() <= BigRational::one()
    }

    fn describe(z: &Scalar) -> String {
        format!("{} + {}i", z.re, z.im)
    }
}

/// A point of the component indexed by `subset`: values on `𝓔(S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Character<T: CharField = f64> {
    graph: std::sync::Arc<DirectedMultigraph>,
    subset: u32,
    lambda: BTreeMap<usize, Complex<T>>,
}

impl<T: CharField> Character<T> {
    pub fn new(
        graph: &std::sync::Arc<DirectedMultigraph>,
        subset: &[usize],
        lambda: BTreeMap<usize, Complex<T>>,
    ) -> Result<Self, MispaceError> {
        let mask = graph.subset_mask(subset)?;
        let domain = internal_edges(graph, subset)?;
        if !lambda.keys().copied().eq(domain.iter().copied()) {
            return Err(MispaceError::CharacterDomain);
        }
        if let Some(z) = lambda.values().find(|z| !T::in_unit_disc(z)) {
            return Err(MispaceError::CharacterModulus(T::describe(z)));
        }
        Ok(Character {
            graph: std::sync::Arc::clone(graph),
            subset: mask,
            lambda,
        })
    }

    /// Character sending every edge of `𝓔(S)` to `value`.
    pub fn constant(
        graph: &std::sync::Arc<DirectedMultigraph>,
        subset: &[usize],
        value: Complex<T>,
    ) -> Result<Self, MispaceError> {
        let lambda = internal_edges(graph, subset)?
            .into_iter()
            .map(|e| (e, value.clone()))
            .collect();
        Self::new(graph, subset, lambda)
    }

    pub fn subset(&self) -> u32 {
        self.subset
    }

    pub fn lambda(&self) -> &BTreeMap<usize, Complex<T>> {
        &self.lambda
    }

    /// Value on a letter of `Q` or of its doubled graph. Partner edges take
    /// the conjugate value, so characters respect the involution.
    fn letter_value(&self, carrier: &Carrier, l: Letter) -> Complex<T> {
        match l {
            Letter::Vertex(v) => {
                if self.subset >> v & 1 == 1 {
                    Complex::one()
                } else {
                    Complex::zero()
                }
            }
            Letter::Edge(e) => {
                let (base, conj) = match carrier.doubled() {
                    Some(d) if d.is_partner(e) => (d.partner(e), true),
                    _ => (e, false),
                };
                match self.lambda.get(&base) {
                    Some(z) if conj => z.conj(),
                    Some(z) => z.clone(),
                    None => Complex::zero(),
                }
            }
        }
    }
}

/// Evaluates a character on an element over `Q` or over its doubled graph.
pub fn char_eval<T: CharField>(c: &Character<T>, x: &AlgebraElement) -> Result<Complex<T>, MispaceError> {
    let original = x.carrier().original();
    if !(std::sync::Arc::ptr_eq(original, &c.graph) || **original == *c.graph) {
        return Err(MispaceError::GraphMismatch);
    }
    let mut total = Complex::<T>::zero();
    for (w, coeff) in x.terms() {
        let mut value = T::coefficient(coeff);
        for &l in w.letters() {
            value = value * c.letter_value(x.carrier(), l);
            if value.is_zero() {
                break;
            }
        }
        total = total + value;
    }
    Ok(total)
}

/// Floating value of an exact character evaluation.
pub fn exact_to_f64(z: &Scalar) -> Complex64 {
    Complex64::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}
