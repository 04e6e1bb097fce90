//! Lower and upper bounds for the universal operator-algebra norm and the
//! Gelfand–Naimark seminorm.
//!
//! Every lower bound is the norm of an element's image under an actual,
//! validated contractive representation: a character, a nest
//! representation, or a random finite-dimensional (`*`-)representation. The
//! upper bound is the `ℓ¹` norm, since each word maps to a product of
//! contractions. Hence `lower ≤ γ(x) ≤ ‖x‖_OA ≤ upper`, up to the rounding of
//! the lower bound, which is clamped when it overshoots by less than `1e-9`.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{to_complex64, AlgebraElement};
use crate::io::{serialize_opt_sig12, serialize_sig12};
use crate::graph::{Carrier, DirectedMultigraph, DoubledGraph, Letter};
use crate::reps::{self, operator_norm, rep_eval, NestParams, RepError};
use crate::seeds;

/// Slack allowed between a floating lower bound and the upper bound.
pub const BOUND_SLACK: f64 = 1e-9;
/// Largest number of torus lattice points evaluated per component.
pub const GRID_BUDGET: usize = 1 << 16;
/// Relevant-vertex count above which component subsets are sampled.
pub const MAX_EXHAUSTIVE_SUBSET_VERTICES: usize = 12;
const SAMPLED_SUBSETS: usize = 4096;
const COARSE_GRID: usize = 4;
const RANDOM_STARTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("element does not live over the given graph")]
    GraphMismatch,
    #[error("bound configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Rep(#[from] RepError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundConfig {
    pub character_grid: usize,
    pub refinement_steps: usize,
    pub rep_trials: usize,
    pub rep_dims: Vec<usize>,
    pub seed: u64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            character_grid: 16,
            refinement_steps: 50,
            rep_trials: 64,
            rep_dims: vec![2, 3, 4],
            seed: 0,
        }
    }
}

impl BoundConfig {
    fn validate(&self) -> Result<(), BoundError> {
        if self.character_grid == 0 || self.refinement_steps == 0 || self.rep_trials == 0 {
            return Err(BoundError::Config("all counts must be at least one".into()));
        }
        if self.rep_dims.is_empty() {
            return Err(BoundError::Config("at least one representation dimension".into()));
        }
        if let Some(&d) = self.rep_dims.iter().find(|&&d| !(1..=reps::MAX_RANDOM_DIM).contains(&d)) {
            return Err(RepError::Capacity(d).into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBounds {
    #[serde(serialize_with = "serialize_sig12")]
    pub lower: f64,
    #[serde(serialize_with = "serialize_sig12")]
    pub upper: f64,
    pub lower_witness: String,
    pub upper_witness: String,
    /// For self-adjoint elements over a doubled graph: the largest spectral
    /// radius over the sampled `*`-representations.
    #[serde(serialize_with = "serialize_opt_sig12")]
    pub spectral_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Candidate {
    value: f64,
    witness: String,
}

fn best(cands: impl IntoIterator<Item = Candidate>) -> Option<Candidate> {
    // first maximum wins, so merges are independent of thread scheduling
    cands.into_iter().fold(None, |acc, c| match acc {
        Some(a) if a.value >= c.value => Some(a),
        _ => Some(c),
    })
}

/// A term as seen by characters: the vertices it needs and its edge letters
/// as (base edge, conjugated).
struct CharTerm {
    coefficient: Complex64,
    needs: u32,
    edges: Vec<(usize, bool)>,
}

fn char_terms(x: &AlgebraElement) -> Vec<CharTerm> {
    let carrier = x.carrier();
    let q = carrier.original();
    x.terms()
        .map(|(w, c)| {
            let mut needs = 0u32;
            let mut edges = Vec::new();
            for &l in w.letters() {
                match l {
                    Letter::Vertex(v) => needs |= 1 << v,
                    Letter::Edge(e) => {
                        let (base, conj) = match carrier.doubled() {
                            Some(d) if d.is_partner(e) => (d.partner(e), true),
                            _ => (e, false),
                        };
                        needs |= q.endpoint_mask(base);
                        edges.push((base, conj));
                    }
                }
            }
            CharTerm {
                coefficient: to_complex64(c),
                needs,
                edges,
            }
        })
        .collect()
}

/// The polynomial in unimodular edge values that a component contributes.
struct TorusPolynomial<'a> {
    terms: Vec<(&'a CharTerm, Vec<(usize, bool)>)>,
    variables: Vec<usize>,
}

impl<'a> TorusPolynomial<'a> {
    fn new(active: Vec<&'a CharTerm>) -> Self {
        let mut variables: Vec<usize> = active
            .iter()
            .flat_map(|t| t.edges.iter().map(|e| e.0))
            .collect();
        variables.sort();
        variables.dedup();
        let terms = active
            .into_iter()
            .map(|t| {
                let local = t
                    .edges
                    .iter()
                    .map(|&(e, conj)| (variables.binary_search(&e).unwrap(), conj))
                    .collect();
                (t, local)
            })
            .collect();
        TorusPolynomial { terms, variables }
    }

    fn modulus(&self, angles: &[f64]) -> f64 {
        let points: Vec<Complex64> = angles.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (t, local) in &self.terms {
            let mut v = t.coefficient;
            for &(j, conj) in local {
                v *= if conj { points[j].conj() } else { points[j] };
            }
            total += v;
        }
        total.norm()
    }
}

fn lattice_point(index: usize, grid: usize, vars: usize) -> Vec<f64> {
    let mut rest = index;
    (0..vars)
        .map(|_| {
            let k = rest % grid;
            rest /= grid;
            TAU * k as f64 / grid as f64
        })
        .collect()
}

fn lattice_size(grid: usize, vars: usize) -> Option<usize> {
    let mut n = 1usize;
    for _ in 0..vars {
        n = n.checked_mul(grid)?;
    }
    Some(n)
}

/// Best lattice point: the full `grid^vars` lattice when within budget,
/// otherwise seeded random lattice points.
fn lattice_search(p: &TorusPolynomial, grid: usize, seed: u64) -> (f64, Vec<f64>) {
    let vars = p.variables.len();
    let mut top = (f64::NEG_INFINITY, vec![0.0; vars]);
    let mut consider = |angles: Vec<f64>| {
        let v = p.modulus(&angles);
        if v > top.0 {
            top = (v, angles);
        }
    };
    match lattice_size(grid, vars) {
        Some(n) if n <= GRID_BUDGET => (0..n).for_each(|i| consider(lattice_point(i, grid, vars))),
        _ => {
            consider(vec![0.0; vars]);
            for i in 0..GRID_BUDGET {
                let mut rng = seeds::rng(seed, 0x6c61_7474 ^ grid as u64, i as u64);
                consider((0..vars).map(|_| TAU * rng.random_range(0..grid) as f64 / grid as f64).collect());
            }
        }
    }
    top
}

/// Coordinate ascent on the torus with a fixed shrinking step schedule; only
/// improvements are accepted, so more steps never lower the result.
fn ascend(p: &TorusPolynomial, mut angles: Vec<f64>, steps: usize) -> (f64, Vec<f64>) {
    let mut value = p.modulus(&angles);
    let mut delta = TAU / COARSE_GRID as f64 / 2.0;
    for _ in 0..steps {
        for j in 0..angles.len() {
            for dir in [1.0, -1.0] {
                let old = angles[j];
                angles[j] = old + dir * delta;
                let v = p.modulus(&angles);
                if v > value {
                    value = v;
                } else {
                    angles[j] = old;
                }
            }
        }
        delta *= 0.7;
    }
    (value, angles)
}

fn maximize_on_torus(p: &TorusPolynomial, cfg: &BoundConfig, component: u64) -> (f64, Vec<f64>) {
    let vars = p.variables.len();
    if vars == 0 {
        return (p.modulus(&[]), vec![]);
    }
    let seed = seeds::derive(cfg.seed, 0x746f_7275, component);
    let grid = lattice_search(p, cfg.character_grid, seed);
    let coarse = lattice_search(p, COARSE_GRID, seed);
    let mut starts = vec![coarse.1];
    for i in 0..RANDOM_STARTS {
        let mut rng = seeds::rng(seed, 0x7374_6172, i as u64);
        starts.push((0..vars).map(|_| rng.random_range(0.0..TAU)).collect());
    }
    let ascended = starts.into_iter().map(|s| ascend(p, s, cfg.refinement_steps));
    std::iter::once(grid)
        .chain(ascended)
        .fold((f64::NEG_INFINITY, vec![]), |a, b| if b.0 > a.0 { b } else { a })
}

fn subsets_of(relevant: u32, seed: u64) -> Vec<u32> {
    let bits: Vec<u32> = (0..32).filter(|i| relevant >> i & 1 == 1).collect();
    let expand = |code: u64| {
        bits.iter()
            .enumerate()
            .filter(|(k, _)| code >> k & 1 == 1)
            .fold(0u32, |m, (_, &b)| m | 1 << b)
    };
    if bits.len() <= MAX_EXHAUSTIVE_SUBSET_VERTICES {
        (1..1u64 << bits.len()).map(expand).collect()
    } else {
        let mut rng = seeds::rng(seed, 0x7375_6273, 0);
        let mut out = vec![relevant];
        out.extend((0..SAMPLED_SUBSETS).map(|_| expand(rng.random_range(1..1u64 << bits.len()))));
        out
    }
}

fn describe_subset(q: &DirectedMultigraph, s: u32) -> String {
    let names: Vec<&str> = (0..q.vertex_count())
        .filter(|v| s >> v & 1 == 1)
        .map(|v| q.vertex_name(v))
        .collect();
    format!("{{{}}}", names.join(","))
}

fn character_sweep(x: &AlgebraElement, cfg: &BoundConfig) -> Option<Candidate> {
    let terms = char_terms(x);
    let relevant = terms.iter().fold(0u32, |m, t| m | t.needs);
    if relevant == 0 {
        return None;
    }
    // components with the same active terms give the same polynomial
    let mut seen = std::collections::BTreeMap::new();
    for s in subsets_of(relevant, cfg.seed) {
        let active: Vec<usize> = (0..terms.len()).filter(|&i| terms[i].needs & !s == 0).collect();
        if !active.is_empty() {
            seen.entry(active).or_insert(s);
        }
    }
    let q = x.carrier().original();
    let cands: Vec<Candidate> = seen
        .into_par_iter()
        .map(|(active, s)| {
            let p = TorusPolynomial::new(active.iter().map(|&i| &terms[i]).collect());
            let (value, angles) = maximize_on_torus(&p, cfg, s as u64);
            let lambda: Vec<String> = p
                .variables
                .iter()
                .zip(&angles)
                .map(|(&e, a)| format!("{}=exp({:.6}i)", q.edge(e).id, a.rem_euclid(TAU)))
                .collect();
            Candidate {
                value,
                witness: format!("character on {} with {}", describe_subset(q, s), if lambda.is_empty() {
                    "no edge values".to_string()
                } else {
                    lambda.join(", ")
                }),
            }
        })
        .collect();
    best(cands)
}

fn nest_sweep(q: &Arc<DirectedMultigraph>, x: &AlgebraElement, cfg: &BoundConfig) -> Result<Option<Candidate>, BoundError> {
    let relevant = char_terms(x).iter().fold(0u32, |m, t| m | t.needs);
    let verts: Vec<usize> = (0..q.vertex_count()).filter(|v| relevant >> v & 1 == 1).collect();
    let pairs: Vec<(usize, usize)> = verts
        .iter()
        .flat_map(|&v| verts.iter().filter(move |&&w| w != v).map(move |&w| (v, w)))
        .collect();
    let cands = pairs
        .par_iter()
        .map(|&(v, w)| -> Result<Vec<Candidate>, BoundError> {
            let linked: Vec<usize> = (0..q.edge_count())
                .filter(|&e| q.edge(e).range == v && q.edge(e).source == w)
                .collect();
            let loops: Vec<usize> = (0..q.edge_count())
                .filter(|&e| q.edge(e).is_loop() && (q.edge(e).range == v || q.edge(e).range == w))
                .collect();
            let mut out = Vec::new();
            for trial in 0..cfg.rep_trials {
                let mut rng = seeds::rng(cfg.seed, 0x6e65_7374 ^ ((v as u64) << 32 | w as u64), trial as u64);
                let mut phase = |fixed: Option<f64>| {
                    Complex64::from_polar(1.0, fixed.unwrap_or_else(|| rng.random_range(0.0..TAU)))
                };
                let (edge_phase, loop_phase) = match trial {
                    0 => (Some(0.0), None),
                    1 => (Some(0.0), Some(0.0)),
                    _ => (None, None),
                };
                let params = NestParams {
                    edges: linked.iter().map(|&e| (e, phase(edge_phase))).collect(),
                    loops: loops
                        .iter()
                        .map(|&e| (e, if trial == 0 { Complex64::new(0.0, 0.0) } else { phase(loop_phase) }))
                        .collect(),
                };
                let pi = reps::nest_family(q, v, w, &params)?;
                out.push(Candidate {
                    value: operator_norm(&rep_eval(&pi, x)?),
                    witness: format!(
                        "nest family between {} and {} (trial {trial})",
                        q.vertex_name(v),
                        q.vertex_name(w)
                    ),
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(best(cands.into_iter().flatten()))
}

enum RepSource<'a> {
    Plain(&'a Arc<DirectedMultigraph>),
    Star(&'a Arc<DoubledGraph>),
}

fn random_sweep(
    source: RepSource<'_>,
    x: &AlgebraElement,
    cfg: &BoundConfig,
) -> Result<(Option<Candidate>, Option<f64>), BoundError> {
    let jobs: Vec<(usize, usize)> = cfg
        .rep_dims
        .iter()
        .flat_map(|&d| (0..cfg.rep_trials).map(move |t| (d, t)))
        .collect();
    let self_adjoint = matches!(source, RepSource::Star(_)) && x.adjoint().ok().as_ref() == Some(x);
    let results = jobs
        .par_iter()
        .map(|&(dim, trial)| -> Result<(Candidate, Option<f64>), BoundError> {
            let seed = seeds::derive(cfg.seed, dim as u64, trial as u64);
            let rep = match source {
                RepSource::Plain(q) => reps::random_contractive_rep(q, dim, seed)?,
                RepSource::Star(d) => reps::random_star_rep(d, dim, seed)?,
            };
            let image = rep_eval(&rep, x)?;
            let radius = self_adjoint.then(|| {
                let h = (&image + image.adjoint()).scale(0.5);
                h.symmetric_eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()))
            });
            let kind = if matches!(source, RepSource::Star(_)) { "*-representation" } else { "representation" };
            Ok((
                Candidate {
                    value: operator_norm(&image),
                    witness: format!("random {kind} of dimension {dim} (trial {trial})"),
                },
                radius,
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let radius = results
        .iter()
        .filter_map(|r| r.1)
        .reduce(f64::max);
    Ok((best(results.into_iter().map(|r| r.0)), radius))
}

fn assemble(x: &AlgebraElement, cands: Vec<Option<Candidate>>, spectral_radius: Option<f64>) -> NormBounds {
    let upper = x.ell1();
    let upper_witness = "sum of coefficient moduli (each word is a product of contractions)".to_string();
    match best(cands.into_iter().flatten()) {
        None => NormBounds {
            lower: 0.0,
            upper,
            lower_witness: "zero element".into(),
            upper_witness,
            spectral_radius,
        },
        Some(c) => {
            let lower = if c.value > upper && c.value - upper <= BOUND_SLACK {
                upper
            } else {
                c.value.max(0.0)
            };
            NormBounds {
                lower,
                upper,
                lower_witness: c.witness,
                upper_witness,
                spectral_radius,
            }
        }
    }
}

/// Bounds for the universal operator-algebra norm of `x` over `Q`.
pub fn oa_norm_bounds(
    q: &Arc<DirectedMultigraph>,
    x: &AlgebraElement,
    cfg: &BoundConfig,
) -> Result<NormBounds, BoundError> {
    cfg.validate()?;
    match x.carrier() {
        Carrier::Plain(p) if Arc::ptr_eq(p, q) || **p == **q => {}
        _ => return Err(BoundError::GraphMismatch),
    }
    if x.is_zero() {
        return Ok(assemble(x, vec![], None));
    }
    let chars = character_sweep(x, cfg);
    let nests = nest_sweep(q, x, cfg)?;
    let (random, _) = random_sweep(RepSource::Plain(q), x, cfg)?;
    Ok(assemble(x, vec![chars, nests, random], None))
}

/// Bounds for the Gelfand–Naimark seminorm of `x` over the doubled graph.
pub fn gcm_norm_bounds(
    d: &Arc<DoubledGraph>,
    x: &AlgebraElement,
    cfg: &BoundConfig,
) -> Result<NormBounds, BoundError> {
    cfg.validate()?;
    match x.carrier() {
        Carrier::Doubled(p) if Arc::ptr_eq(p, d) || **p == **d => {}
        _ => return Err(BoundError::GraphMismatch),
    }
    if x.is_zero() {
        return Ok(assemble(x, vec![], None));
    }
    let chars = character_sweep(x, cfg);
    let (random, radius) = random_sweep(RepSource::Star(d), x, cfg)?;
    Ok(assemble(x, vec![chars, random], radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::graph::double;
    use crate::io::parse_expr;

    fn quick() -> BoundConfig {
        BoundConfig {
            character_grid: 8,
            refinement_steps: 20,
            rep_trials: 8,
            rep_dims: vec![2, 3],
            seed: 5,
        }
    }

    #[test]
    fn single_words_have_norm_one() {
        let q = Arc::new(catalog::loops_and_bridge());
        let c = Carrier::Plain(Arc::clone(&q));
        for w in ["v1", "t1", "t1.t3", "v1.v2", "t3.v1.t1.t2", "v3.v1"] {
            let x = parse_expr(w, &c).unwrap();
            let b = oa_norm_bounds(&q, &x, &quick()).unwrap();
            assert_eq!((b.lower, b.upper), (1.0, 1.0), "{w}: {b:?}");
        }
    }

    #[test]
    fn difference_of_vertices() {
        let q = Arc::new(catalog::single_edge());
        let x = parse_expr("v0 - v1", &Carrier::Plain(Arc::clone(&q))).unwrap();
        let b = oa_norm_bounds(&q, &x, &quick()).unwrap();
        assert!(b.lower >= 1.0 && b.upper == 2.0, "{b:?}");
    }

    #[test]
    fn zero_has_zero_bounds() {
        let q = Arc::new(catalog::single_edge());
        let x = AlgebraElement::zero(&Carrier::Plain(Arc::clone(&q)));
        let b = oa_norm_bounds(&q, &x, &quick()).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn doubled_single_edge_examples() {
        let d = Arc::new(double(&Arc::new(catalog::single_edge())));
        let c = Carrier::Doubled(Arc::clone(&d));
        let x = parse_expr("t + t~", &c).unwrap();
        let b = gcm_norm_bounds(&d, &x, &quick()).unwrap();
        assert!(b.lower >= 1.0 && b.upper == 2.0, "{b:?}");
        assert!(b.spectral_radius.is_some());
        let v = parse_expr("v0", &c).unwrap();
        let b = gcm_norm_bounds(&d, &v, &quick()).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let tst = parse_expr("t~.t", &c).unwrap();
        let b = gcm_norm_bounds(&d, &tst, &quick()).unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
    }

    #[test]
    fn mismatched_graphs_are_rejected() {
        let q = Arc::new(catalog::single_edge());
        let other = Carrier::plain(catalog::loops_and_bridge());
        let x = parse_expr("v1", &other).unwrap();
        assert_eq!(oa_norm_bounds(&q, &x, &quick()), Err(BoundError::GraphMismatch));
        let bad = BoundConfig { rep_dims: vec![40], ..quick() };
        let y = parse_expr("v0", &Carrier::Plain(Arc::clone(&q))).unwrap();
        assert!(oa_norm_bounds(&q, &y, &bad).is_err());
    }

    #[test]
    fn more_effort_never_lowers_the_bound() {
        let q = Arc::new(catalog::loops_and_bridge());
        let c = Carrier::Plain(Arc::clone(&q));
        let x = parse_expr("t1.t3 - 2 * t2 + (1+i) * t3.t1.t1 + 1/3 * v2", &c).unwrap();
        let base = quick();
        let b0 = oa_norm_bounds(&q, &x, &base).unwrap().lower;
        for more in [
            BoundConfig { rep_trials: 16, ..base.clone() },
            BoundConfig { character_grid: 16, ..base.clone() },
            BoundConfig { refinement_steps: 40, ..base.clone() },
            BoundConfig { rep_dims: vec![2, 3, 5], ..base.clone() },
        ] {
            assert!(oa_norm_bounds(&q, &x, &more).unwrap().lower >= b0);
        }
    }

    #[test]
    fn relabeling_preserves_character_bounds() {
        let q = catalog::loops_and_bridge();
        let (p, vmap, emap) = catalog::relabel(&q, 3);
        let x = parse_expr("t1.t3 - 2 * t2 + i * t3", &Carrier::plain(q)).unwrap();
        let target = Carrier::plain(p);
        let moved = x.terms().map(|(w, c)| {
            let letters: Vec<Letter> = w
                .letters()
                .iter()
                .map(|&l| match l {
                    Letter::Vertex(v) => Letter::Vertex(vmap[v]),
                    Letter::Edge(e) => Letter::Edge(emap[e]),
                })
                .collect();
            AlgebraElement::term(&target, c.clone(), &letters).unwrap()
        });
        let y = moved.fold(AlgebraElement::zero(&target), |a, b| a.add(&b).unwrap());
        let cfg = quick();
        let a = character_sweep(&x, &cfg).unwrap().value;
        let b = character_sweep(&y, &cfg).unwrap().value;
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}
