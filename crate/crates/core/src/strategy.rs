//! Test partitions, exact lambda coefficients, verification operators and
//! the minimax weight optimization.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{color_graph, ColoringResult};
use crate::error::{invalid, Error, Result};
use crate::qarith::{is_prime, lcm_of, residue_holds, ExponentTuple, HybridDims};
use crate::qlinalg::ComplexMatrix;
use crate::states::{BuiltState, GraphSpec, StateSpec};
use crate::lp::LinearProgram;

/// Exact rational used for weights and lambda coefficients.
pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation of `x` with denominator at most `max_den`.
pub fn limit_denominator(x: f64, max_den: i64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let sign = if x < 0.0 { -1 } else { 1 };
    let x = x.abs();
    // Convergents of the continued fraction, stopping before max_den is exceeded.
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut rest = x;
    loop {
        let a = rest.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as i128 {
            // Semiconvergent check, as in the classic limit-denominator routine.
            let k = (max_den as i128 - q0) / q1;
            let (ps, qs) = (p0 + k * p1, q0 + k * q1);
            let d1 = (ps as f64 / qs as f64 - x).abs();
            let d2 = (p1 as f64 / q1 as f64 - x).abs();
            if d1 < d2 {
                p1 = ps;
                q1 = qs;
            }
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a as f64;
        if frac < 1e-13 {
            break;
        }
        rest = 1.0 / frac;
    }
    Rational::new(BigInt::from(sign * p1), BigInt::from(q1))
}

/// One subset `C_i` of a test partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSubset {
    pub tuples: Vec<ExponentTuple>,
    pub description: String,
    /// Local acceptance rule in words. Operationally, a round draws an
    /// element `h` of the subset uniformly and accepts eigenbasis outcome `j`
    /// iff `sum_k h_k j_k / d_k` is an integer.
    pub pass_rule: String,
}

impl TestSubset {
    pub fn new(tuples: Vec<ExponentTuple>, description: impl Into<String>, pass_rule: impl Into<String>) -> Self {
        Self { tuples, description: description.into(), pass_rule: pass_rule.into() }
    }
}

/// Partition of the testable stabilizer elements with weights `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestPartition {
    /// Prime-split dims on which the exponent tuples live.
    pub dims: HybridDims,
    pub subsets: Vec<TestSubset>,
    pub weights: Vec<Rational>,
}

impl TestPartition {
    /// Builds a partition with uniform weights and validates it.
    pub fn uniform(dims: HybridDims, subsets: Vec<TestSubset>) -> Result<Self> {
        let tau = subsets.len() as i64;
        if tau == 0 {
            return invalid("a partition needs at least one subset");
        }
        let p = Self { dims, subsets, weights: vec![rat(1, tau); tau as usize] };
        p.validate()?;
        Ok(p)
    }

    pub fn with_weights(&self, weights: Vec<Rational>) -> Result<Self> {
        let p = Self { weights, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    pub fn tau(&self) -> usize {
        self.subsets.len()
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(rat_to_f64).collect()
    }

    /// Checks weights, tuple shapes, the zero-tuple exclusion and that every
    /// generator's unit tuple is covered.
    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.subsets.len() {
            return invalid(format!("{} weights for {} subsets", self.weights.len(), self.subsets.len()));
        }
        if self.weights.iter().any(|w| w.is_negative()) {
            return invalid("weights must be nonnegative");
        }
        let total: Rational = self.weights.iter().cloned().sum();
        if !total.is_one() {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        for (i, s) in self.subsets.iter().enumerate() {
            if s.tuples.is_empty() {
                return invalid(format!("subset {i} is empty"));
            }
            for h in &s.tuples {
                if h.0.len() != self.dims.n() || h.0.iter().zip(self.dims.dims()).any(|(&x, &d)| x >= d) {
                    return invalid(format!("tuple {:?} does not conform to dims {:?}", h.0, self.dims.dims()));
                }
                if h.is_zero() {
                    return invalid(format!("subset {i} contains the identity tuple"));
                }
            }
        }
        for k in 0..self.dims.n() {
            let unit = self.dims.unit(k);
            if !self.subsets.iter().any(|s| s.tuples.contains(&unit)) {
                return invalid(format!("generator {k} (tuple {:?}) is not covered by any subset", unit.0));
            }
        }
        Ok(())
    }

    /// `counts[j][i]`: members of `C_i` satisfying the residue condition with outcome `j`.
    pub fn counts(&self) -> Vec<Vec<u32>> {
        let l = lcm_of(&self.dims);
        let dims = self.dims.dims();
        (0..self.dims.total())
            .into_par_iter()
            .map(|idx| {
                let j = self.dims.digits(idx);
                self.subsets
                    .iter()
                    .map(|s| s.tuples.iter().filter(|h| residue_holds(&h.0, &j, dims, l)).count() as u32)
                    .collect()
            })
            .collect()
    }
}

/// `lambda(j) = sum_i mu_i / |C_i| * #{h in C_i : sum_k h_k j_k / d_k in Z}`,
/// indexed by the global index of `j`.
pub fn lambda_coefficients(p: &TestPartition) -> Result<Vec<Rational>> {
    p.validate()?;
    let scale: Vec<Rational> = p
        .subsets
        .iter()
        .zip(&p.weights)
        .map(|(s, w)| w / Rational::from_integer(BigInt::from(s.tuples.len())))
        .collect();
    Ok(p.counts()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(&scale)
                .filter(|(&c, _)| c > 0)
                .map(|(&c, s)| s * Rational::from_integer(BigInt::from(c)))
                .sum()
        })
        .collect())
}

/// The operator `Omega = |psi><psi| + sum_{j != 0} lambda(j) U|j><j|U^dagger`.
#[derive(Debug, Clone)]
pub struct VerificationOperator {
    pub lambda: Vec<Rational>,
    pub omega: ComplexMatrix,
    pub beta_exact: Rational,
    pub beta: f64,
    pub nu: f64,
}

impl VerificationOperator {
    pub fn nu_exact(&self) -> Rational {
        Rational::one() - &self.beta_exact
    }
}

/// `U diag(values) U^dagger`.
pub fn conjugate_diagonal(u: &ComplexMatrix, values: &[f64]) -> Result<ComplexMatrix> {
    let mut left = u.clone();
    for r in 0..u.rows() {
        for (c, &v) in values.iter().enumerate() {
            left.set(r, c, left.get(r, c) * v);
        }
    }
    left.matmul(&u.adjoint())
}

pub fn assemble_omega(state: &BuiltState, p: &TestPartition) -> Result<VerificationOperator> {
    if state.dims.total() != p.dims.total() {
        return invalid("partition dims do not match the state");
    }
    let lambda = lambda_coefficients(p)?;
    if !lambda[0].is_one() {
        return Err(Error::Internal(format!("lambda at the zero outcome is {}", lambda[0])));
    }
    let beta_exact = lambda[1..].iter().max().cloned().unwrap_or_else(Rational::zero);
    let values: Vec<f64> = lambda.iter().map(rat_to_f64).collect();
    let omega = conjugate_diagonal(&state.unitary, &values)?;
    let beta = rat_to_f64(&beta_exact);
    Ok(VerificationOperator { lambda, omega, beta, nu: 1.0 - beta, beta_exact })
}

/// Result of the minimax weight optimization.
#[derive(Debug, Clone)]
pub struct Optimum {
    /// Weights after rational cleanup.
    pub weights: Vec<Rational>,
    /// Optimal value reported by the simplex.
    pub beta_lp: f64,
    /// `max_j lambda(j)` evaluated exactly at `weights`.
    pub beta_exact: Rational,
    /// True when a rational dual solution proves `beta_exact` optimal.
    pub certified: bool,
    pub nu: f64,
}

/// Cap on the number of subsets handed to the dense simplex.
pub const MAX_SUBSETS: usize = 5000;

/// Minimizes `max_{j != 0} lambda(j)` over the weight simplex.
pub fn optimize_weights(p: &TestPartition) -> Result<Optimum> {
    let tau = p.tau();
    if tau == 0 {
        return invalid("empty partition");
    }
    if tau > MAX_SUBSETS {
        return Err(Error::Capacity(format!("{tau} subsets exceed the cap {MAX_SUBSETS}")));
    }
    let sizes: Vec<usize> = p.subsets.iter().map(|s| s.tuples.len()).collect();
    // Distinct constraint rows over nonzero outcomes.
    let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for row in p.counts().into_iter().skip(1) {
        if seen.insert(row.clone(), ()).is_none() {
            rows.push(row);
        }
    }
    if rows.is_empty() {
        // Single-outcome space: no nontrivial constraint.
        return Ok(Optimum {
            weights: p.weights.clone(),
            beta_lp: 0.0,
            beta_exact: Rational::zero(),
            certified: true,
            nu: 1.0,
        });
    }
    let a_ub: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut v: Vec<f64> = r.iter().zip(&sizes).map(|(&c, &s)| c as f64 / s as f64).collect();
            v.push(-1.0);
            v
        })
        .collect();
    let mut c = vec![0.0; tau];
    c.push(1.0);
    let mut eq = vec![1.0; tau];
    eq.push(0.0);
    let lp = LinearProgram { c, b_ub: vec![0.0; a_ub.len()], a_ub, a_eq: vec![eq], b_eq: vec![1.0] };
    let sol = lp.solve()?;
    let beta_lp = sol.objective;

    let coef = |r: &[u32], i: usize| Rational::new(BigInt::from(r[i]), BigInt::from(sizes[i]));
    let normalize = |v: Vec<Rational>| -> Option<Vec<Rational>> {
        let s: Rational = v.iter().cloned().sum();
        (!s.is_zero()).then(|| v.into_iter().map(|x| x / &s).collect())
    };
    let max_row = |mu: &[Rational]| -> Rational {
        rows.iter()
            .map(|r| (0..tau).filter(|&i| r[i] > 0).map(|i| coef(r, i) * &mu[i]).sum::<Rational>())
            .max()
            .expect("nonempty rows")
    };

    let mut best: Option<(Vec<Rational>, Rational)> = None;
    for max_den in [1_000i64, 100_000, 10_000_000] {
        let mu = normalize(sol.x[..tau].iter().map(|&x| limit_denominator(x.max(0.0), max_den)).collect());
        if let Some(mu) = mu {
            let upper = max_row(&mu);
            if (rat_to_f64(&upper) - beta_lp).abs() <= 1e-9 {
                best = Some((mu, upper));
                break;
            }
        }
    }
    let (weights, beta_exact) = match best {
        Some(b) => b,
        None => {
            // Keep the raw floats as finely rationalized weights.
            let mu = normalize(sol.x[..tau].iter().map(|&x| limit_denominator(x.max(0.0), 1_000_000_000)).collect())
                .ok_or_else(|| Error::Internal("simplex returned zero weights".into()))?;
            let upper = max_row(&mu);
            (mu, upper)
        }
    };

    // Dual certificate: any distribution w over rows gives beta >= min_i (A^T w)_i.
    let mut certified = false;
    for max_den in [1_000i64, 100_000, 10_000_000] {
        let w = normalize(sol.dual_ub.iter().map(|&y| limit_denominator((-y).max(0.0), max_den)).collect())
            .or_else(|| normalize(vec![Rational::one(); rows.len()]));
        if let Some(w) = w {
            let lower = (0..tau)
                .map(|i| rows.iter().zip(&w).filter(|(r, _)| r[i] > 0).map(|(r, wr)| coef(r, i) * wr).sum::<Rational>())
                .min()
                .expect("tau >= 1");
            if lower == beta_exact {
                certified = true;
                break;
            }
        }
    }
    let nu = 1.0 - rat_to_f64(&beta_exact);
    Ok(Optimum { weights, beta_lp, beta_exact, certified, nu })
}

/// Sample counts for infidelity `epsilon` and significance `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCount {
    /// `ceil(ln delta / ln(1 - nu eps))`.
    pub exact: u64,
    /// `ceil(ln(1/delta) / (nu eps))`.
    pub bound: u64,
}

pub fn n_opt(nu: f64, epsilon: f64, delta: f64) -> Result<SampleCount> {
    if nu.is_nan() || nu <= 0.0 || !nu.is_finite() {
        return invalid(format!("spectral gap must be positive, got {nu}"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("epsilon must lie in (0,1), got {epsilon}"));
    }
    if delta.is_nan() || delta <= 0.0 {
        return invalid(format!("delta must be positive, got {delta}"));
    }
    if delta >= 1.0 {
        return Ok(SampleCount { exact: 0, bound: 0 });
    }
    let x = nu * epsilon;
    if x >= 1.0 {
        return Ok(SampleCount { exact: 1, bound: 1 });
    }
    let exact = (delta.ln() / (-x).ln_1p()).ceil().max(1.0) as u64;
    let bound = ((1.0 / delta).ln() / x).ceil().max(1.0) as u64;
    Ok(SampleCount { exact, bound })
}

fn subset(tuples: Vec<Vec<usize>>, description: impl Into<String>, pass_rule: impl Into<String>) -> TestSubset {
    TestSubset::new(tuples.into_iter().map(ExponentTuple).collect(), description, pass_rule)
}

/// All nonzero tuples over `dims` whose support lies inside `allowed`.
fn nonzero_supported(dims: &HybridDims, allowed: &[usize]) -> Vec<Vec<usize>> {
    dims.tuples()
        .filter(|h| !h.is_zero() && h.0.iter().enumerate().all(|(k, &x)| x == 0 || allowed.contains(&k)))
        .map(|h| h.0)
        .collect()
}

fn require_prime(d: usize, what: &str) -> Result<()> {
    if !is_prime(d as u64) {
        return Err(Error::Unsupported(format!("{what} partitions are implemented for prime d only, got {d}")));
    }
    Ok(())
}

/// GHZ-type subset 0: every nonzero tuple with `h_0 = 0`.
fn ghz_subset0(dims: &HybridDims) -> TestSubset {
    let rest: Vec<usize> = (1..dims.n()).collect();
    subset(
        nonzero_supported(dims, &rest),
        "all elements with h_0 = 0, tested jointly by one computational-basis measurement",
        "measure every particle in the computational basis; accept iff sum_k h_k j_k = 0 mod d",
    )
}

/// The partition used for each supported family, with uniform weights.
pub fn family_partition(spec: &StateSpec) -> Result<TestPartition> {
    let (source_dims, _) = spec.circuit()?;
    let dims = source_dims.split();
    let z = |t: &[usize]| t.to_vec();
    let subsets = match spec {
        StateSpec::Psi1 => vec![
            subset(vec![z(&[1, 0])], "g_0", "adaptive local test of g_0"),
            subset(vec![z(&[2, 0])], "g_0^2", "adaptive local test of g_0^2"),
            subset(vec![z(&[0, 1])], "g_1", "adaptive local test of g_1"),
        ],
        StateSpec::BellLike { .. } => vec![
            subset(vec![z(&[0, 1])], "g_1 = Z Z", "both qubits in the Z basis; accept iff outcomes agree"),
            subset(
                vec![z(&[1, 0])],
                "g_0",
                "qubit 1 in the X basis, then qubit 0 in the conditional eigenbasis; accept iff the second outcome is +1",
            ),
            subset(vec![z(&[1, 1])], "g_0 g_1", "adaptive Y-type test of g_0 g_1"),
        ],
        StateSpec::Ghz { n, d } => {
            require_prime(*d, "GHZ")?;
            let mut out = vec![ghz_subset0(&dims)];
            let tail = HybridDims::with_cap(vec![*d; n - 1], usize::MAX)?;
            for h0 in 1..*d {
                for h in tail.tuples() {
                    let mut t = vec![h0];
                    t.extend(&h.0);
                    out.push(subset(vec![t], "single element with h_0 != 0", "adaptive Fourier-basis test"));
                }
            }
            out
        }
        StateSpec::GhzLikeQubit { .. } => vec![
            ghz_subset0(&dims),
            subset(vec![dims.unit(0).0], "g_0", "adaptive local test of g_0"),
        ],
        StateSpec::GhzLikeQudit { n, d, .. } => {
            require_prime(*d, "GHZ-like")?;
            let mut powers = Vec::new();
            for h0 in 1..*d {
                let mut t = vec![0; *n];
                t[0] = h0;
                powers.push(t);
            }
            vec![ghz_subset0(&dims), subset(powers, "powers of g_0", "adaptive local test of g_0 and its powers")]
        }
        StateSpec::GraphFamily { graph, d } => graph_subsets(graph, *d, &color_graph(graph))?,
        StateSpec::Psi3 => vec![
            subset(vec![z(&[1, 0, 0, 0])], "g_0", "adaptive local test of g_0"),
            subset(vec![z(&[0, 1, 0, 0])], "g_1", "adaptive local test of g_1"),
            subset(
                vec![z(&[0, 0, 1, 0]), z(&[0, 0, 0, 1])],
                "g_2 and g_3",
                "computational-basis measurement of all four particles",
            ),
        ],
        StateSpec::CustomCircuit { .. } => {
            return Err(Error::Unsupported("no test partition is known for custom circuits".into()))
        }
    };
    TestPartition::uniform(dims, subsets)
}

/// Color-class subsets for graph-type families.
pub fn graph_subsets(graph: &GraphSpec, d: usize, coloring: &ColoringResult) -> Result<Vec<TestSubset>> {
    graph.validate(d)?;
    if !coloring.is_valid_for(graph) {
        return invalid("coloring is not a valid independent cover of the graph");
    }
    let dims = HybridDims::new(vec![d; graph.n])?;
    let mut out = Vec::new();
    let rule = "Z basis on the class, X-type basis elsewhere";
    if !graph.kind().has_exponents() {
        for (c, set) in coloring.sets.iter().enumerate() {
            out.push(subset(nonzero_supported(&dims, set), format!("all elements supported on color class {c}"), rule));
        }
        return Ok(out);
    }
    for (c, set) in coloring.sets.iter().enumerate() {
        let p = set.len();
        // Patterns k in (Z_d^*)^p labelled l = sum_t (k_t - 1)(d - 1)^t.
        let count = (d - 1).pow(p as u32);
        let labelled: Vec<(usize, Vec<usize>)> = (0..count)
            .map(|l| {
                let k = (0..p).map(|t| (l / (d - 1).pow(t as u32)) % (d - 1) + 1).collect();
                (l, k)
            })
            .collect();
        for (l, k) in labelled {
            let members: Vec<Vec<usize>> = dims
                .tuples()
                .filter(|h| {
                    !h.is_zero()
                        && h.0.iter().enumerate().all(|(v, &x)| match set.iter().position(|&u| u == v) {
                            Some(t) => x == 0 || x == k[t],
                            None => x == 0,
                        })
                })
                .map(|h| h.0)
                .collect();
            out.push(subset(members, format!("color class {c}, pattern {l} (k = {k:?})"), rule));
        }
    }
    Ok(out)
}

/// Closed-form gap for graph families from the coloring alone.
pub fn graph_family_nu(graph: &GraphSpec, d: usize, coloring: &ColoringResult) -> Result<Rational> {
    if !is_prime(d as u64) {
        return invalid(format!("graph families need prime d, got {d}"));
    }
    if !coloring.is_valid_for(graph) {
        return invalid("coloring is not a valid independent cover of the graph");
    }
    let big = |x: u64| Rational::from_integer(BigInt::from(x));
    let dd = d as u64;
    if !graph.kind().has_exponents() {
        let chi = coloring.colors() as u64;
        let tail: Rational = coloring.sizes().iter().map(|&p| Rational::one() / big(dd.pow(p as u32 - 1))).sum();
        Ok(big(dd - 1) / (big(dd * chi) - tail))
    } else {
        let total: Rational = coloring
            .sizes()
            .iter()
            .map(|&p| {
                let a = big((1u64 << p) - 1) * big(dd - 1);
                let b = big((1u64 << (p - 1)) - 1);
                &a / (&a - b)
            })
            .sum();
        Ok(Rational::one() / total)
    }
}

/// Closed-form gaps stated for each family, where one exists.
pub fn closed_form_nu(spec: &StateSpec) -> Result<Option<Rational>> {
    let big = |x: u64| Rational::from_integer(BigInt::from(x));
    Ok(match spec {
        StateSpec::Psi1 => Some(rat(1, 2)),
        StateSpec::BellLike { .. } => Some(rat(2, 3)),
        StateSpec::Ghz { n, d } => {
            let (n, d) = (*n as u32, *d as u64);
            Some(big((d - 1) * d.pow(n - 1)) / big(d.pow(n) - 1))
        }
        StateSpec::GhzLikeQubit { n, .. } => {
            let q = 1u64 << (*n - 2);
            Some(big(q) / big(3 * q - 1))
        }
        StateSpec::GhzLikeQudit { n, d, .. } => {
            let (n, d) = (*n as u32, *d as u64);
            Some(big((d - 1) * d.pow(n - 2)) / big(2 * d.pow(n - 1) - d.pow(n - 2) - 1))
        }
        StateSpec::GraphFamily { graph, d } => Some(graph_family_nu(graph, *d, &color_graph(graph))?),
        StateSpec::Psi3 => Some(rat(3, 4)),
        StateSpec::CustomCircuit { .. } => None,
    })
}
