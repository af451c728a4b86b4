//! Generalized stabilizer groups `g_k = U Z_k U^dagger` and adaptive measurement paths.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::gates::{embed, omega_pow, pauli_z, qft};
use crate::qarith::{lcm_of, phase_exponent, ExponentTuple, HybridDims};
use crate::qlinalg::{hermitian_spectrum, inner, is_unitary, kron_vec, ComplexMatrix, C64, ONE, ZERO};

/// Generators of the stabilizer group of `U|0...0>` on prime-split dims.
#[derive(Debug, Clone)]
pub struct StabilizerGroup {
    /// Dims as given by the caller (possibly composite).
    pub source_dims: HybridDims,
    /// Prime-split dims; exponent tuples live here.
    pub dims: HybridDims,
    pub unitary: ComplexMatrix,
    pub generators: Vec<ComplexMatrix>,
}

/// Builds `g_k = U Z_k U^dagger` for every prime-split particle `k`.
/// Composite local dimensions are split into ascending prime factors; the
/// global index is unchanged by that relabeling.
pub fn generators(u: &ComplexMatrix, dims: &HybridDims) -> Result<StabilizerGroup> {
    if !u.is_square() || u.rows() != dims.total() {
        return invalid(format!("unitary is {}x{}, dims need {}", u.rows(), u.cols(), dims.total()));
    }
    if !is_unitary(u, 1e-10) {
        return invalid("source matrix is not unitary");
    }
    let split = dims.split();
    let ud = u.adjoint();
    let generators = (0..split.n())
        .map(|k| {
            let zk = embed(&pauli_z(split.dims()[k]), &[k], &split)?;
            u.matmul(&zk)?.matmul(&ud)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilizerGroup { source_dims: dims.clone(), dims: split, unitary: u.clone(), generators })
}

impl StabilizerGroup {
    pub fn psi(&self) -> Vec<C64> {
        self.unitary.column(0)
    }

    fn check(&self, h: &ExponentTuple) -> Result<()> {
        if h.0.len() != self.dims.n() {
            return invalid(format!("tuple {:?} does not match {} particles", h.0, self.dims.n()));
        }
        Ok(())
    }

    /// `U diag(f(j)) U^dagger`.
    fn conjugate_diagonal(&self, diag: &[C64]) -> Result<ComplexMatrix> {
        let mut left = self.unitary.clone();
        let n = left.rows();
        for r in 0..n {
            for (c, &v) in diag.iter().enumerate() {
                left.set(r, c, left.get(r, c) * v);
            }
        }
        left.matmul(&self.unitary.adjoint())
    }

    /// `prod_k g_k^{h_k}`, formed as `U D_h U^dagger` with exact diagonal phases.
    pub fn group_element(&self, h: &ExponentTuple) -> Result<ComplexMatrix> {
        self.check(h)?;
        let l = lcm_of(&self.dims);
        let diag: Vec<C64> = self
            .dims
            .tuples()
            .map(|j| omega_pow(l, phase_exponent(&h.0, &j.0, self.dims.dims(), l)))
            .collect();
        self.conjugate_diagonal(&diag)
    }

    /// `prod_k g_k^{h_k}` by multiplying generator powers directly.
    pub fn group_element_from_generators(&self, h: &ExponentTuple) -> Result<ComplexMatrix> {
        self.check(h)?;
        let mut acc = ComplexMatrix::identity(self.dims.total());
        for (g, &hk) in self.generators.iter().zip(&h.0) {
            if hk != 0 {
                acc = acc.matmul(&g.pow(hk)?)?;
            }
        }
        Ok(acc)
    }

    /// Eigenvalue-one projector of `g_(h)` as the power average
    /// `(1/L) sum_{l<L} g_(h)^l`, `L = lcm(dims)`.
    pub fn eigen1_projector(&self, h: &ExponentTuple) -> Result<ComplexMatrix> {
        let g = self.group_element_from_generators(h)?;
        let l = lcm_of(&self.dims);
        let mut power = ComplexMatrix::identity(self.dims.total());
        let mut sum = power.clone();
        for _ in 1..l {
            power = power.matmul(&g)?;
            sum = &sum + &power;
        }
        Ok(sum.scale(C64::new(1.0 / l as f64, 0.0)))
    }

    /// The same projector as `sum_{j in sol(h)} U|j><j|U^dagger`.
    pub fn solution_set_projector(&self, h: &ExponentTuple) -> Result<ComplexMatrix> {
        self.check(h)?;
        let l = lcm_of(&self.dims);
        let diag: Vec<C64> = self
            .dims
            .tuples()
            .map(|j| if phase_exponent(&h.0, &j.0, self.dims.dims(), l) == 0 { ONE } else { ZERO })
            .collect();
        self.conjugate_diagonal(&diag)
    }

    /// Largest deviation across the group invariants: unitarity, psi fixed,
    /// pairwise commutation and `g_k^{d_k} = I`.
    pub fn invariant_defect(&self) -> Result<f64> {
        let psi = self.psi();
        let id = ComplexMatrix::identity(self.dims.total());
        let mut worst = 0.0f64;
        for (k, g) in self.generators.iter().enumerate() {
            worst = worst.max(g.adjoint().matmul(g)?.max_abs_diff(&id));
            let gpsi = g.apply(&psi)?;
            worst = worst.max(gpsi.iter().zip(&psi).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
            worst = worst.max(g.pow(self.dims.dims()[k])?.max_abs_diff(&id));
            for other in &self.generators[k + 1..] {
                worst = worst.max(g.matmul(other)?.max_abs_diff(&other.matmul(g)?));
            }
        }
        Ok(worst)
    }
}

/// `max |(1/prod d) prod_i (sum_j g_i^j) - |psi><psi||`; prime dims only.
pub fn density_identity_residual(group: &StabilizerGroup) -> Result<f64> {
    if !group.source_dims.all_prime() {
        return invalid("the density identity is stated for prime local dimensions");
    }
    let total = group.dims.total();
    let mut acc = ComplexMatrix::identity(total);
    for (g, &d) in group.generators.iter().zip(group.dims.dims()) {
        let mut power = ComplexMatrix::identity(total);
        let mut sum = power.clone();
        for _ in 1..d {
            power = power.matmul(g)?;
            sum = &sum + &power;
        }
        acc = acc.matmul(&sum)?;
    }
    let rho = acc.scale(C64::new(1.0 / total as f64, 0.0));
    let psi = group.psi();
    Ok(rho.max_abs_diff(&ComplexMatrix::outer(&psi, &psi)))
}

/// Chooses the local measurement basis (columns) from earlier outcomes.
pub type BasisChooser = Arc<dyn Fn(&[usize]) -> ComplexMatrix + Send + Sync>;
/// Weight `Lambda(J)` of a full path.
pub type PathWeight = Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>;

/// Sequential single-particle measurement plan.
///
/// Outcome tuples `J` are listed in measurement order: `J[i]` is the result
/// on particle `order[i]`, and outcome `j` there projects onto column `j`
/// of the basis returned for the prefix `J[..i]`.
#[derive(Clone)]
pub struct AdaptivePlan {
    pub dims: HybridDims,
    pub order: Vec<usize>,
    pub chooser: BasisChooser,
    pub weight: PathWeight,
}

impl std::fmt::Debug for AdaptivePlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdaptivePlan").field("dims", &self.dims).field("order", &self.order).finish_non_exhaustive()
    }
}

impl AdaptivePlan {
    pub fn new(dims: HybridDims, order: Vec<usize>, chooser: BasisChooser) -> Result<Self> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..dims.n()).collect::<Vec<_>>() {
            return invalid(format!("order {order:?} is not a permutation of the particles"));
        }
        Ok(Self { dims, order, chooser, weight: Arc::new(|_| 1.0) })
    }

    /// Every particle measured in its computational basis, in index order.
    pub fn computational(dims: &HybridDims) -> Self {
        let d = dims.dims().to_vec();
        let order: Vec<usize> = (0..dims.n()).collect();
        let ord = order.clone();
        Self::new(dims.clone(), order, Arc::new(move |prefix: &[usize]| ComplexMatrix::identity(d[ord[prefix.len()]])))
            .expect("identity order is a permutation")
    }

    pub fn with_weight(mut self, weight: PathWeight) -> Self {
        self.weight = weight;
        self
    }

    /// `Lambda = 1` on the support of `psi`, 0 elsewhere.
    pub fn with_support_weight(self, psi: &[C64]) -> Result<Self> {
        let supp = support(&self, psi)?;
        Ok(self.with_weight(Arc::new(move |j: &[usize]| if supp.contains(j) { 1.0 } else { 0.0 })))
    }

    /// Local dimension at step `i`.
    pub fn step_dim(&self, i: usize) -> usize {
        self.dims.dims()[self.order[i]]
    }

    /// Basis at step `prefix.len()`, checked for shape and unitarity.
    pub fn basis(&self, prefix: &[usize]) -> Result<ComplexMatrix> {
        let b = (self.chooser)(prefix);
        let d = self.step_dim(prefix.len());
        if b.rows() != d || b.cols() != d || !is_unitary(&b, 1e-9) {
            return invalid(format!("basis at step {} is not a {d}x{d} unitary", prefix.len()));
        }
        Ok(b)
    }

    /// All outcome tuples in measurement order.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let radices = HybridDims::with_cap(self.order.iter().map(|&p| self.dims.dims()[p]).collect(), usize::MAX)
            .expect("valid dims");
        radices.tuples().map(|t| t.0).collect()
    }

    /// Product vector `|v_J>` with `Pi(J) = |v_J><v_J|`.
    pub fn path_vector(&self, path: &[usize]) -> Result<Vec<C64>> {
        if path.len() != self.order.len() {
            return invalid(format!("path {path:?} has the wrong length"));
        }
        let mut local: Vec<Vec<C64>> = vec![Vec::new(); self.dims.n()];
        for i in 0..path.len() {
            let b = self.basis(&path[..i])?;
            if path[i] >= b.cols() {
                return invalid(format!("outcome {} out of range at step {i}", path[i]));
            }
            local[self.order[i]] = b.column(path[i]);
        }
        Ok(local.iter().skip(1).fold(local[0].clone(), |acc, v| kron_vec(&acc, v)))
    }
}

/// `Pi(J)`: ordered product of the step projectors along `J`.
pub fn path_projector(plan: &AdaptivePlan, path: &[usize]) -> Result<ComplexMatrix> {
    let v = plan.path_vector(path)?;
    Ok(ComplexMatrix::outer(&v, &v))
}

/// `M = sum_J Lambda(J) Pi(J)`.
pub fn measurement_operator(plan: &AdaptivePlan) -> Result<ComplexMatrix> {
    let total = plan.dims.total();
    let mut m = ComplexMatrix::zeros(total, total);
    for path in plan.paths() {
        let w = (plan.weight)(&path);
        if w != 0.0 {
            m = &m + &path_projector(plan, &path)?.scale(C64::new(w, 0.0));
        }
    }
    Ok(m)
}

/// Paths with `|Pi(J) psi| > 1e-9`.
pub fn support(plan: &AdaptivePlan, psi: &[C64]) -> Result<BTreeSet<Vec<usize>>> {
    if psi.len() != plan.dims.total() {
        return Err(Error::InvalidArgument("state does not match plan dims".into()));
    }
    let mut out = BTreeSet::new();
    for path in plan.paths() {
        let v = plan.path_vector(&path)?;
        if inner(&v, psi).norm() > 1e-9 {
            out.insert(path);
        }
    }
    Ok(out)
}

/// Exact Born distribution over all paths of `plan` for the pure state `psi`.
pub fn path_distribution(plan: &AdaptivePlan, psi: &[C64]) -> Result<Vec<(Vec<usize>, f64)>> {
    plan.paths()
        .into_iter()
        .map(|p| {
            let v = plan.path_vector(&p)?;
            Ok((p, inner(&v, psi).norm_sqr()))
        })
        .collect()
}

/// Two-qubit plan testing a Hermitian element `g`: measure `first` in
/// `first_basis`, then the other qubit in the eigenbasis of the conditional
/// operator `<x| g |x>`, ordered by descending eigenvalue. Outcome 0 on the
/// second step means eigenvalue +1, i.e. the test passes.
pub fn conditional_two_qubit_plan(
    g: &ComplexMatrix,
    dims: &HybridDims,
    first: usize,
    first_basis: ComplexMatrix,
) -> Result<AdaptivePlan> {
    if dims.dims() != [2, 2] || first > 1 {
        return invalid("conditional plan is defined for two qubits");
    }
    let second = 1 - first;
    let mut second_bases = Vec::with_capacity(2);
    for x in 0..2 {
        let xv = first_basis.column(x);
        let mut cond = ComplexMatrix::zeros(2, 2);
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let mut v = 0.0 * ONE;
            for a in 0..2 {
                for b in 0..2 {
                    let (mut ri, mut ci) = ([0usize; 2], [0usize; 2]);
                    ri[first] = a;
                    ri[second] = r;
                    ci[first] = b;
                    ci[second] = c;
                    v += xv[a].conj() * g.get(dims.index(&ri), dims.index(&ci)) * xv[b];
                }
            }
            cond.set(r, c, v);
        }
        second_bases.push(hermitian_spectrum(&cond)?.vectors);
    }
    AdaptivePlan::new(
        dims.clone(),
        vec![first, second],
        Arc::new(move |prefix: &[usize]| match prefix {
            [] => first_basis.clone(),
            [x, ..] => second_bases[*x].clone(),
        }),
    )
}

/// Plan for `g_(1,0)` of the Bell-like state: `+-x` on particle 1, then the
/// conditional basis on particle 0.
pub fn bell_like_g10_plan(group: &StabilizerGroup) -> Result<AdaptivePlan> {
    let g = group.group_element(&ExponentTuple(vec![1, 0]))?;
    conditional_two_qubit_plan(&g, &group.dims, 1, qft(2))
}
