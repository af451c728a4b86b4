//! Acceptance gate. Each criterion prints one `[PASS]`/`[FAIL]` line.
//!
//! Run with `cargo test -p qudit-verify --test acceptance -- --nocapture --test-threads=1`.

mod common;

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::time::Instant;

use common::{all_families, hyper3, line, partitioned_families, random_state};
use num_complex::Complex64;
use qudit_verify::gates::{pauli_x, pauli_z};
use qudit_verify::qlinalg::{hermiticity_defect, kron};
use qudit_verify::report::{analyze, table1, Relation};
use qudit_verify::simulate::{exact_pass_probability, run_protocol, sample_paths, total_variation, worst_case_state, SourceModel};
use qudit_verify::stabilizer::{bell_like_g10_plan, density_identity_residual, generators, path_distribution, AdaptivePlan};
use qudit_verify::strategy::{closed_form_nu, family_partition, rat_to_f64, TestPartition};
use qudit_verify::{build, ComplexMatrix, ExponentTuple, HybridDims, StateSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAP_TOL: f64 = 1e-9;

/// Gap from the LP optimum and from the second eigenvalue of the assembled operator.
fn gap_two_ways(spec: &StateSpec) -> (f64, f64, bool) {
    let a = analyze(spec).expect("analysis");
    (1.0 - a.optimum.beta_lp, 1.0 - a.spectrum[1], a.optimum.certified)
}

fn check_gap(name: &str, spec: &StateSpec) -> bool {
    let expected = rat_to_f64(&closed_form_nu(spec).unwrap().unwrap());
    let (lp, eig, certified) = gap_two_ways(spec);
    let ok = (lp - expected).abs() <= GAP_TOL && (eig - expected).abs() <= GAP_TOL;
    line(&format!("1 gap {name}"), ok, format!("expected {expected:.12}, lp {lp:.12}, eigen {eig:.12}, certified {certified}"))
}

#[test]
fn criterion_1_closed_form_gaps() {
    let start = Instant::now();
    let mut ok = check_gap("psi1", &StateSpec::Psi1);
    for theta in [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3] {
        ok &= check_gap(&format!("psi2 theta={theta:.4}"), &StateSpec::BellLike { theta });
    }
    for n in 2..=6 {
        ok &= check_gap(&format!("GHZ n={n} d=2"), &StateSpec::Ghz { n, d: 2 });
        ok &= check_gap(&format!("GHZ-like qubit n={n}"), &StateSpec::GhzLikeQubit { n, theta: 0.5 });
    }
    for (n, d) in [(2, 3), (3, 3), (2, 5)] {
        ok &= check_gap(&format!("GHZ n={n} d={d}"), &StateSpec::Ghz { n, d });
    }
    ok &= check_gap("GHZ-like qudit n=3 d=3", &StateSpec::GhzLikeQudit { n: 3, d: 3, thetas: vec![0.6, 0.8] });
    let secs = start.elapsed().as_secs_f64();
    ok &= line("1 runtime", secs < 60.0, format!("{secs:.2} s (limit 60 s)"));
    assert!(ok, "criterion 1 failed");
}

/// Split from the other gaps: the stated value is not the optimum of the
/// stated partition, so this check is expected to fail.
#[test]
fn criterion_1_psi3_gap() {
    assert!(check_gap("psi3", &StateSpec::Psi3), "criterion 1 (psi3) failed");
}

#[test]
fn criterion_2_table1() {
    let rows = table1(0.01, 0.05).expect("table");
    let c = 100.0 * 20f64.ln();
    let mut ok = true;
    for r in &rows {
        // Recompute the ceiling independently of the row's own bookkeeping.
        let factor_ok = match r.relation {
            Relation::Equal => r.n_ours == r.symbolic_value,
            Relation::AtMost => r.n_ours <= r.symbolic_value && Some(r.n_ours) == r.n_closed_form,
            Relation::Below => r.n_ours < r.symbolic_value,
        };
        let row_ok = factor_ok && r.ok;
        ok &= line(
            &format!("2 {} [{}]", r.family, r.instance),
            row_ok,
            format!("nu {}, N {} vs {} = {} ({:?}), c = {c:.4}", r.nu, r.n_ours, r.symbolic, r.symbolic_value, r.relation),
        );
    }
    let psi2 = rows.iter().find(|r| r.family == "psi2").unwrap();
    ok &= line("2 psi2 ceiling", psi2.symbolic_value == (1.5 * c).ceil() as u64, psi2.symbolic_value);
    assert!(ok, "criterion 2 failed");
}

#[test]
fn criterion_3_density_identity() {
    let mut ok = true;
    let specs = [
        ("psi1", StateSpec::Psi1),
        ("psi2", StateSpec::BellLike { theta: 0.3 }),
        ("GHZ(3,3)", StateSpec::Ghz { n: 3, d: 3 }),
        ("hypergraph 3 qutrits", StateSpec::GraphFamily { graph: hyper3(), d: 3 }),
    ];
    for (name, spec) in specs {
        let s = build(&spec).unwrap();
        let r = density_identity_residual(&generators(&s.unitary, &s.dims).unwrap()).unwrap();
        ok &= line(&format!("3 {name}"), r <= 1e-10, format!("residual {r:.3e}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dims in [vec![2, 3], vec![2, 2, 3]] {
        let hd = HybridDims::new(dims.clone()).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let u = common::haar_unitary(hd.total(), &mut rng);
            worst = worst.max(density_identity_residual(&generators(&u, &hd).unwrap()).unwrap());
        }
        ok &= line(&format!("3 Haar x20 dims {dims:?}"), worst <= 1e-10, format!("max residual {worst:.3e}"));
    }
    assert!(ok, "criterion 3 failed");
}

#[test]
fn criterion_4_eigen1_projector() {
    let families = all_families();
    let groups: Vec<_> = families
        .iter()
        .map(|f| {
            let s = build(f).unwrap();
            generators(&s.unitary, &s.dims).unwrap()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut idem, mut herm, mut fix, mut agree) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let g = &groups[rng.gen_range(0..groups.len())];
        let h = ExponentTuple(g.dims.dims().iter().map(|&d| rng.gen_range(0..d)).collect());
        let p = g.eigen1_projector(&h).unwrap();
        idem = idem.max(p.matmul(&p).unwrap().max_abs_diff(&p));
        herm = herm.max(hermiticity_defect(&p));
        let psi = g.psi();
        let moved = p.apply(&psi).unwrap();
        fix = fix.max(moved.iter().zip(&psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        agree = agree.max(p.max_abs_diff(&g.solution_set_projector(&h).unwrap()));
    }
    let ok = line(
        "4 projector x100",
        idem <= 1e-9 && herm <= 1e-9 && fix <= 1e-9 && agree <= 1e-10,
        format!("idempotent {idem:.2e}, hermitian {herm:.2e}, fixes psi {fix:.2e}, vs solution set {agree:.2e}"),
    );
    assert!(ok, "criterion 4 failed");
}

/// `(1/6)[3 II - cos2t ZI + sin2t XX + ZZ - cos2t IZ - sin2t YY]`.
fn bell_like_pauli_form(theta: f64) -> ComplexMatrix {
    let i2 = ComplexMatrix::identity(2);
    let z = pauli_z(2);
    let x = pauli_x(2);
    let y = ComplexMatrix::from_rows(&[
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
        vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
    ])
    .unwrap();
    let k = |a: &ComplexMatrix, b: &ComplexMatrix| kron(a, b).unwrap();
    let r = |v: f64| C64::new(v, 0.0);
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    let terms = [
        (3.0, k(&i2, &i2)),
        (-c, k(&z, &i2)),
        (s, k(&x, &x)),
        (1.0, k(&z, &z)),
        (-c, k(&i2, &z)),
        (-s, k(&y, &y)),
    ];
    let mut out = ComplexMatrix::zeros(4, 4);
    for (w, m) in &terms {
        out = &out + &m.scale(r(w / 6.0));
    }
    out
}

#[test]
fn criterion_5_bell_like_pauli_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let theta = rng.gen_range(0.01..std::f64::consts::FRAC_PI_2 - 0.01);
        let spec = StateSpec::BellLike { theta };
        let s = build(&spec).unwrap();
        let g = generators(&s.unitary, &s.dims).unwrap();
        let p = family_partition(&spec).unwrap();
        let mut omega = ComplexMatrix::zeros(4, 4);
        for (sub, w) in p.subsets.iter().zip(p.weights_f64()) {
            let mut acc = ComplexMatrix::zeros(4, 4);
            for h in &sub.tuples {
                acc = &acc + &g.eigen1_projector(h).unwrap();
            }
            omega = &omega + &acc.scale(C64::new(w / sub.tuples.len() as f64, 0.0));
        }
        worst = worst.max(omega.max_abs_diff(&bell_like_pauli_form(theta)));
    }
    assert!(line("5 psi2 Pauli form x10", worst <= 1e-10, format!("max deviation {worst:.3e}")), "criterion 5 failed");
}

const ROUNDS_COPIES: u64 = 100;
const ROUNDS_TRIALS: u64 = 1000;

fn monte_carlo(name: &str, spec: &StateSpec, expected: f64) -> bool {
    let start = Instant::now();
    let a = analyze(spec).unwrap();
    let eps = 0.1;
    let worst = worst_case_state(&a.operator, &a.state, eps).unwrap();
    let exact = exact_pass_probability(&a.operator, &a.state, &worst).unwrap();
    let rep = run_protocol(&a.state, &a.partition, &worst, ROUNDS_COPIES, ROUNDS_TRIALS, 2024).unwrap();
    let n = rep.rounds as f64;
    let sigma = (expected * (1.0 - expected) / n).sqrt();
    let dev = (rep.pass_frequency - expected).abs();
    let mut ok = line(
        &format!("6 {name} worst case eps=0.1"),
        dev <= 3.0 * sigma,
        format!(
            "frequency {:.5} over {} rounds, target {expected:.5}, 3 sigma {:.5}, exact trace {exact:.5}",
            rep.pass_frequency,
            rep.rounds,
            3.0 * sigma
        ),
    );
    let honest = SourceModel::honest(&a.state);
    let h = run_protocol(&a.state, &a.partition, &honest, ROUNDS_COPIES, ROUNDS_TRIALS, 7).unwrap();
    ok &= line(&format!("6 {name} honest"), h.passes == h.rounds, format!("{} / {} passes", h.passes, h.rounds));
    let secs = start.elapsed().as_secs_f64();
    ok &= line(&format!("6 {name} runtime"), secs < 120.0, format!("{secs:.2} s (limit 120 s)"));
    ok
}

#[test]
fn criterion_6_monte_carlo_bell_like() {
    assert!(monte_carlo("psi2", &StateSpec::BellLike { theta: FRAC_PI_4 }, 1.0 - 0.1 * 2.0 / 3.0), "criterion 6 failed");
}

/// The stated target 0.925 assumes a gap of 3/4; expected to fail.
#[test]
fn criterion_6_monte_carlo_psi3() {
    assert!(monte_carlo("psi3", &StateSpec::Psi3, 0.925), "criterion 6 (psi3) failed");
}

fn tv_check(name: &str, plan: &AdaptivePlan, source_psi: &[C64], seed: u64) -> bool {
    let source = SourceModel::custom(ComplexMatrix::outer(source_psi, source_psi)).unwrap();
    let counts = sample_paths(plan, &source, 100_000, seed).unwrap();
    let exact = path_distribution(plan, source_psi).unwrap();
    let tv = total_variation(&counts, &exact);
    line(&format!("7 {name}"), tv < 0.01, format!("TV {tv:.5} at 1e5 samples"))
}

#[test]
fn criterion_7_adaptive_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bell = build(&StateSpec::BellLike { theta: 0.35 }).unwrap();
    let group = generators(&bell.unitary, &bell.dims).unwrap();
    let plan = bell_like_g10_plan(&group).unwrap();
    let mut ok = tv_check("psi2 g_(1,0) plan, target source", &plan, &bell.psi.amplitudes, 1);
    ok &= tv_check("psi2 g_(1,0) plan, random source", &plan, &random_state(4, &mut rng), 2);
    let ghz = build(&StateSpec::Ghz { n: 3, d: 2 }).unwrap();
    let plan = AdaptivePlan::computational(&ghz.dims);
    ok &= tv_check("GHZ(3,2) subset-0 plan, target source", &plan, &ghz.psi.amplitudes, 3);
    ok &= tv_check("GHZ(3,2) subset-0 plan, random source", &plan, &random_state(8, &mut rng), 4);
    assert!(ok, "criterion 7 failed");
}

#[test]
fn criterion_8_invariants_and_coverage() {
    let mut ok = true;
    for spec in all_families() {
        let s = build(&spec).unwrap();
        let defect = generators(&s.unitary, &s.dims).unwrap().invariant_defect().unwrap();
        ok &= line(&format!("8 invariants {}", spec.label()), defect <= 1e-9, format!("defect {defect:.3e}"));
    }
    for spec in partitioned_families() {
        let p = family_partition(&spec).unwrap();
        let mut rejected = true;
        for k in 0..p.dims.n() {
            let unit = p.dims.unit(k);
            let subsets: Vec<_> = p
                .subsets
                .iter()
                .cloned()
                .map(|mut s| {
                    s.tuples.retain(|h| *h != unit);
                    s
                })
                .filter(|s| !s.tuples.is_empty())
                .collect();
            rejected &= TestPartition::uniform(p.dims.clone(), subsets).is_err();
        }
        ok &= line(&format!("8 coverage guard {}", spec.label()), rejected, "every generator removal rejected");
    }
    assert!(ok, "criterion 8 failed");
}
