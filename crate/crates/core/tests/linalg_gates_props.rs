mod common;

use common::haar_unitary;
use proptest::prelude::*;
use qudit_verify::gates::{build_local, embed, hyperedge_gate, pauli_x, pauli_z, qft, GateKind, GateSpec};
use qudit_verify::qlinalg::{hermitian_spectrum, is_unitary, kron, ComplexMatrix, C64};
use qudit_verify::HybridDims;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    ComplexMatrix::from_vec(rows, cols, data).unwrap()
}

proptest! {
    #[test]
    fn kron_mixed_product(m in 1usize..4, n in 1usize..4, p in 1usize..4, q in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(m, n, &mut rng);
        let b = random_matrix(p, q, &mut rng);
        let c = random_matrix(n, 2, &mut rng);
        let d = random_matrix(q, 3, &mut rng);
        let left = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap()).unwrap();
        let right = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(2, 3, &mut rng);
        let b = random_matrix(3, 2, &mut rng);
        let c = random_matrix(2, 2, &mut rng);
        let l = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let r = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        prop_assert!(l.max_abs_diff(&r) < 1e-14);
    }

    #[test]
    fn hermitian_spectrum_reconstructs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(8, 8, &mut rng);
        let h = (&a + &a.adjoint()).scale(C64::new(0.5, 0.0));
        let s = hermitian_spectrum(&h).unwrap();
        prop_assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(is_unitary(&s.vectors, 1e-10));
        let diag: Vec<C64> = s.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        let back = s.vectors.matmul(&ComplexMatrix::from_diagonal(&diag)).unwrap().matmul(&s.vectors.adjoint()).unwrap();
        prop_assert!(back.max_abs_diff(&h) < 1e-10);
        let trace: f64 = s.values.iter().sum();
        prop_assert!((trace - h.trace().re).abs() < 1e-10);
    }

    #[test]
    fn diagonal_edge_gates_commute(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = HybridDims::new(vec![3; 4]).unwrap();
        let mut edge = || {
            let mut v: Vec<usize> = (0..4).filter(|_| rng.gen_bool(0.5)).collect();
            if v.len() < 2 {
                v = vec![0, 3];
            }
            let s: Vec<usize> = v.iter().map(|_| rng.gen_range(1..3)).collect();
            (v, s, rng.gen_range(1..3))
        };
        let (v1, s1, m1) = edge();
        let (v2, _, m2) = edge();
        let a = hyperedge_gate(&v1, Some(&s1), m1, &dims).unwrap();
        let b = hyperedge_gate(&v2, None, m2, &dims).unwrap();
        prop_assert!(a.matmul(&b).unwrap().max_abs_diff(&b.matmul(&a).unwrap()) < 1e-14);
    }

    #[test]
    fn gates_on_distinct_particles_commute(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = HybridDims::new(vec![2, 3, 2]).unwrap();
        let a = embed(&haar_unitary(2, &mut rng), &[0], &dims).unwrap();
        let b = embed(&haar_unitary(6, &mut rng), &[2, 1], &dims).unwrap();
        prop_assert!(a.matmul(&b).unwrap().max_abs_diff(&b.matmul(&a).unwrap()) < 1e-12);
        prop_assert!(is_unitary(&b, 1e-12));
    }
}

#[test]
fn every_gate_kind_is_unitary() {
    for d in [2usize, 3, 5] {
        let single = [
            GateKind::PauliZ,
            GateKind::PauliX,
            GateKind::PoweredZ { s: 2 },
            GateKind::Qft,
            GateKind::GivensChain { thetas: (0..d - 1).map(|i| 0.3 + i as f64).collect() },
        ];
        for k in &single {
            assert!(is_unitary(&build_local(k, &[d]).unwrap(), 1e-12), "{k:?} on d={d}");
        }
        let pair = [
            GateKind::Csum,
            GateKind::CzWeighted { m: 1 },
            GateKind::MultiCz { m: 1, s: vec![2, 1] },
            GateKind::HyperCz { m: 1 },
        ];
        for k in &pair {
            assert!(is_unitary(&build_local(k, &[d, d]).unwrap(), 1e-12), "{k:?} on d={d}");
        }
        let k = GateKind::MultiHyperCz { m: 2, s: vec![1, 2, 1] };
        assert!(is_unitary(&build_local(&k, &[d, d, d]).unwrap(), 1e-12));
        assert!(is_unitary(&build_local(&GateKind::HybridCz, &[d, 2]).unwrap(), 1e-12));
    }
    for k in [GateKind::Hadamard, GateKind::Ry { angle: 0.7 }] {
        assert!(is_unitary(&build_local(&k, &[2]).unwrap(), 1e-12));
    }
    assert!(is_unitary(&build_local(&GateKind::Cnot, &[2, 2]).unwrap(), 1e-12));
}

#[test]
fn fourier_conjugates_z_to_shift() {
    for d in 2..=7 {
        let f = qft(d);
        let conj = f.matmul(&pauli_z(d)).unwrap().matmul(&f.adjoint()).unwrap();
        assert!(conj.max_abs_diff(&pauli_x(d)) < 1e-12, "d={d}");
        // Shift-down: X|k> = |k-1 mod d>.
        assert_eq!(pauli_x(d).get(0, 1), C64::new(1.0, 0.0));
        assert_eq!(pauli_x(d).get(d - 1, 0), C64::new(1.0, 0.0));
    }
}

#[test]
fn csum_truth_table() {
    let dims = HybridDims::new(vec![3, 3]).unwrap();
    let m = GateSpec::new(GateKind::Csum, vec![0, 1]).matrix(&dims).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let col = dims.index(&[a, b]);
            let row = dims.index(&[a, (a + b) % 3]);
            assert_eq!(m.get(row, col), C64::new(1.0, 0.0));
        }
    }
    // Reversed targets put the control on particle 1.
    let r = GateSpec::new(GateKind::Csum, vec![1, 0]).matrix(&dims).unwrap();
    assert_eq!(r.get(dims.index(&[2, 1]), dims.index(&[1, 1])), C64::new(1.0, 0.0));
}

#[test]
fn composite_qft_is_unitary_and_capacity_is_enforced() {
    assert!(is_unitary(&qft(6), 1e-12));
    let big = ComplexMatrix::identity(128);
    assert!(kron(&big, &big).is_err());
    assert!(build_local(&GateKind::CzWeighted { m: 1 }, &[6, 6]).is_err());
    assert!(build_local(&GateKind::Cnot, &[3, 3]).is_err());
}
