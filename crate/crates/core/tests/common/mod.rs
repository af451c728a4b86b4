//! Shared fixtures for integration tests.

#![allow(dead_code)]

use num_complex::Complex64;
use qudit_verify::gates::{GateKind, GateSpec};
use qudit_verify::{ComplexMatrix, GraphEdge, GraphSpec, StateSpec, C64};
use rand::Rng;
use rand_distr::StandardNormal;

/// Three-qutrit hypergraph state with a single 3-vertex edge.
pub fn hyper3() -> GraphSpec {
    GraphSpec { n: 3, edges: vec![GraphEdge { vertices: vec![0, 1, 2], weight: 1, exponents: None }] }
}

/// Path on three vertices with non-unit exponents.
pub fn multi_p3() -> GraphSpec {
    GraphSpec {
        n: 3,
        edges: vec![
            GraphEdge { vertices: vec![0, 1], weight: 1, exponents: Some(vec![2, 1]) },
            GraphEdge { vertices: vec![1, 2], weight: 2, exponents: Some(vec![1, 2]) },
        ],
    }
}

/// One instance of every family that has a test partition.
pub fn partitioned_families() -> Vec<StateSpec> {
    vec![
        StateSpec::Psi1,
        StateSpec::BellLike { theta: 0.4 },
        StateSpec::Ghz { n: 3, d: 2 },
        StateSpec::Ghz { n: 2, d: 3 },
        StateSpec::GhzLikeQubit { n: 3, theta: 0.7 },
        StateSpec::GhzLikeQudit { n: 3, d: 3, thetas: vec![0.6, 0.8] },
        StateSpec::GraphFamily { graph: GraphSpec::path(3), d: 3 },
        StateSpec::GraphFamily { graph: GraphSpec::cycle(5), d: 2 },
        StateSpec::GraphFamily { graph: hyper3(), d: 3 },
        StateSpec::GraphFamily { graph: multi_p3(), d: 3 },
        StateSpec::Psi3,
    ]
}

/// Every family, including a custom circuit.
pub fn all_families() -> Vec<StateSpec> {
    let mut out = partitioned_families();
    out.push(StateSpec::CustomCircuit {
        dims: vec![3, 2],
        gates: vec![
            GateSpec { kind: GateKind::Qft, targets: vec![0] },
            GateSpec { kind: GateKind::Ry { angle: 1.1 }, targets: vec![1] },
            GateSpec { kind: GateKind::HybridCz, targets: vec![0, 1] },
        ],
    });
    out
}

/// Haar-random unitary from Gram-Schmidt on complex Gaussian columns.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v: Vec<C64> =
            (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        for q in &cols {
            let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            m.set(r, c, z);
        }
    }
    m
}

/// Haar-random unit vector.
pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> Vec<C64> {
    haar_unitary(n, rng).column(0)
}

/// Prints one acceptance line and returns `ok`.
pub fn line(criterion: &str, ok: bool, detail: impl std::fmt::Display) -> bool {
    println!("[{}] {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}
