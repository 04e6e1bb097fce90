//! Named small graphs and seeded random graph generators.

use rand::seq::SliceRandom;
use rand::Rng;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{rational, scalar, AlgebraElement};
use crate::graph::{Carrier, DirectedMultigraph, Letter};
use crate::mispace::Character;
use crate::seeds;

/// Two vertices `v0, v1` and one edge `t: v0 → v1`.
pub fn single_edge() -> DirectedMultigraph {
    DirectedMultigraph::new(["v0", "v1"], [("t", "v0", "v1")]).unwrap()
}

/// Two loops `t1, t2` at `v1`, a bridge `t3: v1 → v2`, and an isolated `v3`.
pub fn loops_and_bridge() -> DirectedMultigraph {
    DirectedMultigraph::new(
        ["v1", "v2", "v3"],
        [("t1", "v1", "v1"), ("t2", "v1", "v1"), ("t3", "v1", "v2")],
    )
    .unwrap()
}

/// Two parallel edges `v1 → v2`.
pub fn parallel_pair() -> DirectedMultigraph {
    DirectedMultigraph::new(["v1", "v2"], [("t1", "v1", "v2"), ("t2", "v1", "v2")]).unwrap()
}

/// One edge in each direction between `w1` and `w2`.
pub fn opposing_pair() -> DirectedMultigraph {
    DirectedMultigraph::new(["w1", "w2"], [("s1", "w1", "w2"), ("s2", "w2", "w1")]).unwrap()
}

/// Graph with `1..=max_vertices` vertices and `0..=max_edges` edges whose
/// endpoints are drawn uniformly.
pub fn random_graph(seed: u64, max_vertices: usize, max_edges: usize) -> DirectedMultigraph {
    let mut rng = seeds::rng(seed, 0x6772_6170, 0);
    let n = rng.random_range(1..=max_vertices.max(1));
    let m = rng.random_range(0..=max_edges);
    random_graph_sized(seed, n, m)
}

/// Graph with exactly `n ≥ 1` vertices and `m` edges.
pub fn random_graph_sized(seed: u64, n: usize, m: usize) -> DirectedMultigraph {
    let mut rng = seeds::rng(seed, 0x6772_6170, 1);
    let vertices: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let edges: Vec<(String, String, String)> = (0..m)
        .map(|j| {
            let s = rng.random_range(0..n);
            let r = rng.random_range(0..n);
            (format!("e{j}"), vertices[s].clone(), vertices[r].clone())
        })
        .collect();
    DirectedMultigraph::new(vertices.clone(), edges).unwrap()
}

/// Randomly permutes and renames vertices and edges. Returns the relabeled
/// graph together with the vertex map `old → new` and edge map `old → new`.
pub fn relabel(q: &DirectedMultigraph, seed: u64) -> (DirectedMultigraph, Vec<usize>, Vec<usize>) {
    let mut rng = seeds::rng(seed, 0x7265_6c61, 0);
    let mut vperm: Vec<usize> = (0..q.vertex_count()).collect();
    vperm.shuffle(&mut rng);
    let mut eperm: Vec<usize> = (0..q.edge_count()).collect();
    eperm.shuffle(&mut rng);
    // vertex old i lands at position vperm[i]
    let vname = |i: usize| format!("x{}", vperm[i]);
    let mut vertices = vec![String::new(); q.vertex_count()];
    for i in 0..q.vertex_count() {
        vertices[vperm[i]] = vname(i);
    }
    let mut edges = vec![(String::new(), String::new(), String::new()); q.edge_count()];
    for (j, e) in q.edges().iter().enumerate() {
        edges[eperm[j]] = (format!("f{}", eperm[j]), vname(e.source), vname(e.range));
    }
    let out = DirectedMultigraph::new(vertices, edges).unwrap();
    (out, vperm, eperm)
}

/// Element with up to `max_terms` terms, each a product of up to `max_len`
/// random letters (reduced afterwards) with a small Gaussian-rational
/// coefficient.
pub fn random_element(carrier: &Carrier, seed: u64, max_terms: usize, max_len: usize) -> AlgebraElement {
    let mut rng = seeds::rng(seed, 0x656c_656d, 0);
    let letters: Vec<Letter> = carrier.graph().letters().collect();
    let terms = rng.random_range(1..=max_terms.max(1));
    let mut x = AlgebraElement::zero(carrier);
    for _ in 0..terms {
        let len = rng.random_range(1..=max_len.max(1));
        let word: Vec<Letter> = (0..len).map(|_| letters[rng.random_range(0..letters.len())]).collect();
        let mut part = || rational(rng.random_range(-5..=5), rng.random_range(1..=4));
        let c = scalar(part(), part());
        x = x
            .add(&AlgebraElement::term(carrier, c, &word).expect("letters of the carrier"))
            .expect("same carrier");
    }
    x
}

/// Character on a random nonempty vertex subset with edge values drawn
/// uniformly from the closed unit disc.
pub fn random_character(q: &Arc<DirectedMultigraph>, seed: u64) -> Character {
    let mut rng = seeds::rng(seed, 0x6368_6172, 0);
    let n = q.vertex_count();
    let mask = rng.random_range(1..1u32 << n);
    let subset: Vec<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
    let lambda: BTreeMap<usize, Complex64> = crate::graph::internal_edges(q, &subset)
        .expect("nonempty subset")
        .into_iter()
        .map(|e| {
            let r = rng.random_range(0.0f64..=1.0).sqrt();
            (e, Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU)))
        })
        .collect();
    Character::new(q, &subset, lambda).expect("values in the unit disc")
}
