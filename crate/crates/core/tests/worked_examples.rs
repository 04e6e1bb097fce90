use std::sync::Arc;

use quivoa::catalog;
use quivoa::graph::{directed_multiplicity, double, internal_edges, loop_partition, shadow};
use quivoa::io::{parse_expr, parse_graph};
use quivoa::iso::{gcm_isomorphic, oa_isomorphic, udgraph_isomorphic, Refutation};
use quivoa::mispace::{blind, build_mispace, invariants, mispace_of_gcm, recover_shadow};
use quivoa::reps::{matrix_unit, nest_family, nest_rep, rep_eval, NestParams};
use quivoa::words::{multiply, parse_word, semigroup_identity};
use quivoa::{AlgebraElement, Carrier, ComplexMatrix, DirectedMultigraph};

const EXAMPLE: &str = "\
vertex v1
vertex v2
vertex v3
edge t1 v1 v1
edge t2 v1 v1
edge t3 v1 v2
";

fn example() -> DirectedMultigraph {
    parse_graph(EXAMPLE).unwrap().graph
}

fn names(q: &DirectedMultigraph, edges: &[usize]) -> Vec<String> {
    edges.iter().map(|&e| q.edge(e).id.clone()).collect()
}

#[test]
fn example_graph_structure() {
    let q = example();
    assert_eq!((q.vertex_count(), q.edge_count()), (3, 3));
    let s = shadow(&q);
    assert_eq!((s.loops(0), s.multiplicity(0, 1), s.multiplicity(1, 2), s.loops(2)), (2, 1, 0, 0));
    assert_eq!(names(&q, &internal_edges(&q, &[0]).unwrap()), ["t1", "t2"]);
    assert!(internal_edges(&q, &[1, 2]).unwrap().is_empty());
    let (loops, others) = loop_partition(&q);
    assert_eq!((names(&q, &loops), names(&q, &others)), (vec!["t1".into(), "t2".into()], vec!["t3".to_string()]));
    // multiplicity is indexed (range, source)
    assert_eq!(directed_multiplicity(&q, 1, 0).unwrap(), 1);
    assert_eq!(directed_multiplicity(&q, 0, 1).unwrap(), 0);
}

#[test]
fn example_maximal_ideal_space_and_invariants() {
    let q = example();
    let d = build_mispace(&q).unwrap();
    let mut dims: Vec<usize> = d.components().iter().map(|c| c.dim).collect();
    dims.sort_unstable();
    assert_eq!(dims, [0, 0, 0, 2, 2, 3, 3]);
    assert_eq!(mispace_of_gcm(&q).unwrap(), d);
    let r = invariants(&d).unwrap();
    assert_eq!(
        (r.n_q, r.vertex_count, r.edge_count, r.total_dim, r.alpha, r.beta, r.k0_rank),
        (7, 3, 3, 10, 2, 1, 3)
    );
    let edgeless = build_mispace(&DirectedMultigraph::edgeless(4)).unwrap();
    assert_eq!(edgeless.component_count(), 15);
    assert!(edgeless.components().iter().all(|c| c.dim == 0));
}

#[test]
fn example_shadow_survives_blinding() {
    let q = example();
    for seed in 0..5 {
        let s = recover_shadow(&blind(&build_mispace(&q).unwrap(), seed).unwrap()).unwrap();
        assert!(udgraph_isomorphic(&s, &shadow(&q)).unwrap().verdict);
    }
}

#[test]
fn word_relations() {
    let q = catalog::single_edge();
    let w = |s| parse_word(&q, s).unwrap();
    assert_eq!(w("v1.t"), w("t"));
    assert_eq!(w("t.v0"), w("t"));
    assert_eq!(w("v0.t").len(), 2);
    assert_eq!(multiply(&q, &w("t"), &w("v0")), w("t"));
    assert!(semigroup_identity(&q).is_none());
    let one = DirectedMultigraph::new(["v"], [("a", "v", "v"), ("b", "v", "v")]).unwrap();
    assert_eq!(semigroup_identity(&one).unwrap(), parse_word(&one, "v").unwrap());
}

#[test]
fn classification_pair() {
    let (p, o) = (catalog::parallel_pair(), catalog::opposing_pair());
    assert!(udgraph_isomorphic(&shadow(&p), &shadow(&o)).unwrap().verdict);
    assert!(gcm_isomorphic(&p, &o).unwrap().verdict);
    let oa = oa_isomorphic(&p, &o).unwrap();
    assert!(!oa.verdict);
    assert_eq!(oa.refutation, Some(Refutation::DegreeMultiset));
    let v2 = DirectedMultigraph::edgeless(2);
    let v3 = DirectedMultigraph::edgeless(3);
    assert_eq!(oa_isomorphic(&v2, &v3).unwrap().refutation, Some(Refutation::VertexCount));
}

#[test]
fn nest_representation_of_the_bridge() {
    let q = Arc::new(example());
    let pi = nest_rep(&q, 2).unwrap();
    let eval = |s: &str| rep_eval(&pi, &AlgebraElement::named(pi.carrier(), s).unwrap()).unwrap();
    // t3 runs v1 → v2: its range takes E11 and its source E22
    assert_eq!(eval("v2"), matrix_unit(2, 0, 0));
    assert_eq!(eval("v1"), matrix_unit(2, 1, 1));
    assert_eq!(eval("t3"), matrix_unit(2, 0, 1));
    for zero in ["t1", "t2", "v3", "t1.t1", "t3.t2"] {
        assert_eq!(eval(zero), ComplexMatrix::zeros(2, 2), "{zero}");
    }
    assert_eq!(eval("v2.t3.v1"), matrix_unit(2, 0, 1));
    assert!(pi.spans_upper_triangular());

    // edges not running w → v vanish in the family
    let fam = nest_family(&q, 1, 0, &NestParams::default()).unwrap();
    let x = parse_expr("t1 + t2", &Carrier::Plain(Arc::clone(&q))).unwrap();
    assert_eq!(rep_eval(&fam, &x).unwrap(), ComplexMatrix::zeros(2, 2));
}

#[test]
fn doubled_graph_expressions() {
    let q = Arc::new(catalog::single_edge());
    let d = Carrier::Doubled(Arc::new(double(&q)));
    let x = parse_expr("t~", &d).unwrap();
    let t = parse_expr("t", &d).unwrap();
    assert_eq!(t.adjoint().unwrap(), x);
    assert_eq!(parse_expr("t~.t", &d).unwrap(), x.mul(&t).unwrap());
}
