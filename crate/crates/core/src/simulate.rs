//! Monte Carlo simulation of the pass/fail verification protocol.
//!
//! A round draws subset `i` with probability `mu_i`, an element `h` of it
//! uniformly, and an eigenbasis outcome `j` from the Born rule; it passes
//! iff `sum_k h_k j_k / d_k` is an integer. The per-round pass probability
//! is therefore exactly `tr(Omega sigma)`.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qarith::{lcm_of, residue_holds};
use crate::qlinalg::{hermitian_spectrum, hermiticity_defect, inner, ComplexMatrix, C64, ZERO};
use crate::stabilizer::AdaptivePlan;
use crate::states::BuiltState;
use crate::strategy::{rat_to_f64, TestPartition, VerificationOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceKind {
    Honest,
    WorstCase { epsilon: f64 },
    DepolarizedTarget { epsilon: f64 },
    CustomDensity,
}

/// An i.i.d. source, stored as its density matrix and a pure-state mixture.
#[derive(Debug, Clone)]
pub struct SourceModel {
    pub kind: SourceKind,
    pub density: ComplexMatrix,
    /// `(probability, unit vector)` pairs whose mixture is `density`.
    pub components: Vec<(f64, Vec<C64>)>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return invalid(format!("epsilon must lie in (0,1), got {epsilon}"));
    }
    Ok(())
}

fn mixture(components: &[(f64, Vec<C64>)], dim: usize) -> ComplexMatrix {
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for (p, v) in components {
        rho = &rho + &ComplexMatrix::outer(v, v).scale(C64::new(*p, 0.0));
    }
    rho
}

impl SourceModel {
    pub fn honest(state: &BuiltState) -> Self {
        let psi = state.psi.amplitudes.clone();
        let components = vec![(1.0, psi)];
        Self { kind: SourceKind::Honest, density: mixture(&components, state.dims.total()), components }
    }

    /// `(1 - e') |psi><psi| + e' I / D` with `e'` chosen so the fidelity is `1 - epsilon`.
    pub fn depolarized(state: &BuiltState, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let dim = state.dims.total();
        let e = epsilon * dim as f64 / (dim as f64 - 1.0);
        if e > 1.0 {
            return invalid(format!("fidelity 1 - {epsilon} is below that of the maximally mixed state"));
        }
        // Mixture over the eigenbasis of Omega's preparing unitary.
        let components = (0..dim)
            .map(|k| {
                let p = if k == 0 { 1.0 - e + e / dim as f64 } else { e / dim as f64 };
                (p, state.unitary.column(k))
            })
            .filter(|(p, _)| *p > 0.0)
            .collect::<Vec<_>>();
        Ok(Self { kind: SourceKind::DepolarizedTarget { epsilon }, density: mixture(&components, dim), components })
    }

    /// Validates a trace-one PSD density and diagonalizes it once.
    pub fn custom(density: ComplexMatrix) -> Result<Self> {
        if hermiticity_defect(&density) > 1e-10 {
            return invalid("density matrix is not Hermitian");
        }
        let tr = density.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return invalid(format!("density trace is {tr}, not 1"));
        }
        let spec = hermitian_spectrum(&density)?;
        if spec.values.iter().any(|&v| v < -1e-10) {
            return invalid("density matrix has a negative eigenvalue");
        }
        let components = spec
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 1e-15)
            .map(|(k, &v)| (v, spec.vectors.column(k)))
            .collect();
        Ok(Self { kind: SourceKind::CustomDensity, density, components })
    }

    /// `<psi| sigma |psi>`.
    pub fn fidelity(&self, psi: &[C64]) -> f64 {
        self.components.iter().map(|(p, v)| p * inner(psi, v).norm_sqr()).sum()
    }
}

/// The maximizer `(1 - eps)|psi><psi| + eps |b><b|` of the pass probability at
/// fidelity `1 - eps`, with `|b> = U|j*>` for an outcome `j*` attaining beta.
pub fn worst_case_state(v: &VerificationOperator, state: &BuiltState, epsilon: f64) -> Result<SourceModel> {
    check_epsilon(epsilon)?;
    let jstar = (1..v.lambda.len())
        .max_by(|&a, &b| v.lambda[a].cmp(&v.lambda[b]).then(b.cmp(&a)))
        .ok_or_else(|| Error::InvalidArgument("a one-dimensional space has no orthogonal state".into()))?;
    let components = vec![(1.0 - epsilon, state.psi.amplitudes.clone()), (epsilon, state.unitary.column(jstar))];
    Ok(SourceModel {
        kind: SourceKind::WorstCase { epsilon },
        density: mixture(&components, state.dims.total()),
        components,
    })
}

/// `tr(Omega sigma)` from the exact lambda coefficients.
pub fn exact_pass_probability(v: &VerificationOperator, state: &BuiltState, source: &SourceModel) -> Result<f64> {
    let lam: Vec<f64> = v.lambda.iter().map(rat_to_f64).collect();
    let ud = state.unitary.adjoint();
    let mut total = 0.0;
    for (p, comp) in &source.components {
        let c = ud.apply(comp)?;
        total += p * c.iter().zip(&lam).map(|(a, l)| a.norm_sqr() * l).sum::<f64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetStats {
    pub subset: usize,
    pub rounds: u64,
    pub passes: u64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub seed: u64,
    pub trials: u64,
    pub copies: u64,
    pub rounds: u64,
    pub passes: u64,
    /// Per-round pass frequency.
    pub pass_frequency: f64,
    /// Binomial standard error of `pass_frequency`.
    pub std_error: f64,
    /// 95% Wilson score interval.
    pub ci95: (f64, f64),
    /// Fraction of trials in which all copies passed.
    pub all_pass_fraction: f64,
    /// `passes_histogram[k]` = number of trials with exactly `k` passes (nonzero entries only).
    pub passes_histogram: BTreeMap<u64, u64>,
    pub per_subset: Vec<SubsetStats>,
}

/// Wilson score interval at `z` standard deviations.
pub fn wilson_interval(passes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = passes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Per-trial RNG: one ChaCha stream per trial index.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials of `copies` rounds each.
pub fn run_protocol(
    state: &BuiltState,
    partition: &TestPartition,
    source: &SourceModel,
    copies: u64,
    trials: u64,
    seed: u64,
) -> Result<ProtocolReport> {
    if copies == 0 || trials == 0 {
        return invalid("copies and trials must be at least 1");
    }
    partition.validate()?;
    if partition.dims.total() != state.dims.total() || source.density.rows() != state.dims.total() {
        return invalid("state, partition and source dimensions differ");
    }
    let ud = state.unitary.adjoint();
    let comp_w: Vec<f64> = source.components.iter().map(|(p, _)| *p).collect();
    let comp_dist = WeightedIndex::new(&comp_w).map_err(|e| Error::InvalidArgument(format!("source weights: {e}")))?;
    let outcome_dists = source
        .components
        .iter()
        .map(|(_, v)| {
            let amps = ud.apply(v)?;
            WeightedIndex::new(amps.iter().map(|a| a.norm_sqr())).map_err(|e| Error::Internal(format!("Born weights: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let subset_dist = WeightedIndex::new(partition.weights_f64())
        .map_err(|e| Error::InvalidArgument(format!("partition weights: {e}")))?;
    let dims = partition.dims.clone();
    let l = lcm_of(&dims);
    let digits: Vec<Vec<usize>> = (0..dims.total()).map(|i| dims.digits(i)).collect();
    let tau = partition.tau();

    let per_trial: Vec<(u64, Vec<(u64, u64)>)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut stats = vec![(0u64, 0u64); tau];
            let mut passes = 0;
            for _ in 0..copies {
                let k = comp_dist.sample(&mut rng);
                let i = subset_dist.sample(&mut rng);
                let members = &partition.subsets[i].tuples;
                let h = &members[rng.gen_range(0..members.len())];
                let j = outcome_dists[k].sample(&mut rng);
                let pass = residue_holds(&h.0, &digits[j], dims.dims(), l);
                stats[i].0 += 1;
                if pass {
                    stats[i].1 += 1;
                    passes += 1;
                }
            }
            (passes, stats)
        })
        .collect();

    let rounds = copies * trials;
    let passes: u64 = per_trial.iter().map(|(p, _)| p).sum();
    let mut histogram = BTreeMap::new();
    let mut per_subset: Vec<SubsetStats> =
        (0..tau).map(|i| SubsetStats { subset: i, rounds: 0, passes: 0, frequency: 0.0 }).collect();
    for (p, stats) in &per_trial {
        *histogram.entry(*p).or_insert(0) += 1;
        for (s, &(r, q)) in per_subset.iter_mut().zip(stats) {
            s.rounds += r;
            s.passes += q;
        }
    }
    for s in &mut per_subset {
        s.frequency = if s.rounds > 0 { s.passes as f64 / s.rounds as f64 } else { 0.0 };
    }
    let freq = passes as f64 / rounds as f64;
    let all_pass = per_trial.iter().filter(|(p, _)| *p == copies).count() as f64 / trials as f64;
    Ok(ProtocolReport {
        seed,
        trials,
        copies,
        rounds,
        passes,
        pass_frequency: freq,
        std_error: (freq * (1.0 - freq) / rounds as f64).sqrt(),
        ci95: wilson_interval(passes, rounds, 1.959_963_984_540_054),
        all_pass_fraction: all_pass,
        passes_histogram: histogram,
        per_subset,
    })
}

/// Applies `local^dagger` to particle `particle` of `amps` in place.
fn rotate_into_basis(amps: &mut [C64], dims: &[usize], particle: usize, basis: &ComplexMatrix) {
    let d = dims[particle];
    let stride: usize = dims[particle + 1..].iter().product();
    let blocks = amps.len() / (d * stride);
    let mut buf = vec![ZERO; d];
    for hi in 0..blocks {
        for lo in 0..stride {
            let at = |k: usize| (hi * d + k) * stride + lo;
            for (j, slot) in buf.iter_mut().enumerate() {
                *slot = (0..d).map(|k| basis.get(k, j).conj() * amps[at(k)]).sum();
            }
            for (k, &v) in buf.iter().enumerate() {
                amps[at(k)] = v;
            }
        }
    }
}

/// One particle-by-particle measurement run along `plan` using `rng`.
pub fn sequential_measure_with<R: Rng>(plan: &AdaptivePlan, source: &SourceModel, rng: &mut R) -> Result<Vec<usize>> {
    let dims = plan.dims.dims();
    if source.density.rows() != plan.dims.total() {
        return invalid("source dimension does not match the plan");
    }
    let weights: Vec<f64> = source.components.iter().map(|(p, _)| *p).collect();
    let k = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(format!("source weights: {e}")))?.sample(rng);
    let mut amps = source.components[k].1.clone();
    let mut outcomes = Vec::with_capacity(plan.order.len());
    for (step, &particle) in plan.order.iter().enumerate() {
        let basis = plan.basis(&outcomes)?;
        rotate_into_basis(&mut amps, dims, particle, &basis);
        let d = dims[particle];
        let stride: usize = dims[particle + 1..].iter().product();
        let mut probs = vec![0.0; d];
        for (idx, a) in amps.iter().enumerate() {
            probs[(idx / stride) % d] += a.norm_sqr();
        }
        let j = WeightedIndex::new(&probs)
            .map_err(|e| Error::Internal(format!("conditional Born weights at step {step}: {e}")))?
            .sample(rng);
        let norm = probs[j].sqrt();
        for (idx, a) in amps.iter_mut().enumerate() {
            *a = if (idx / stride) % d == j { *a / norm } else { ZERO };
        }
        outcomes.push(j);
    }
    Ok(outcomes)
}

/// Single sequential measurement seeded by `seed`.
pub fn sequential_measure(plan: &AdaptivePlan, source: &SourceModel, seed: u64) -> Result<Vec<usize>> {
    sequential_measure_with(plan, source, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Empirical path counts from `samples` sequential runs.
pub fn sample_paths(
    plan: &AdaptivePlan,
    source: &SourceModel,
    samples: u64,
    seed: u64,
) -> Result<BTreeMap<Vec<usize>, u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..samples {
        *counts.entry(sequential_measure_with(plan, source, &mut rng)?).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Total-variation distance between empirical counts and an exact distribution.
pub fn total_variation(counts: &BTreeMap<Vec<usize>, u64>, exact: &[(Vec<usize>, f64)]) -> f64 {
    let n: u64 = counts.values().sum();
    let mut tv = 0.0;
    for (path, p) in exact {
        let q = counts.get(path).copied().unwrap_or(0) as f64 / n as f64;
        tv += (q - p).abs();
    }
    let unexpected: u64 = counts.iter().filter(|(k, _)| !exact.iter().any(|(p, _)| p == *k)).map(|(_, v)| v).sum();
    0.5 * (tv + unexpected as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::HybridDims;
    use crate::strategy::{assemble_omega, family_partition};
    use crate::states::{build, StateSpec};

    #[test]
    fn zero_state_identity_plan_is_deterministic() {
        let dims = HybridDims::new(vec![2, 3]).unwrap();
        let plan = AdaptivePlan::computational(&dims);
        let mut psi = vec![ZERO; 6];
        psi[0] = C64::new(1.0, 0.0);
        let src = SourceModel::custom(ComplexMatrix::outer(&psi, &psi)).unwrap();
        for seed in 0..20 {
            assert_eq!(sequential_measure(&plan, &src, seed).unwrap(), vec![0, 0]);
        }
    }

    #[test]
    fn worst_case_trace_matches_gap() {
        let b = build(&StateSpec::BellLike { theta: 0.7 }).unwrap();
        let p = family_partition(&b.spec).unwrap();
        let v = assemble_omega(&b, &p).unwrap();
        let s = worst_case_state(&v, &b, 0.1).unwrap();
        let tr = v.omega.matmul(&s.density).unwrap().trace().re;
        assert!((tr - (1.0 - 0.1 * 2.0 / 3.0)).abs() < 1e-9);
        assert!((s.fidelity(&b.psi.amplitudes) - 0.9).abs() < 1e-10);
    }

    #[test]
    fn determinism_per_seed() {
        let b = build(&StateSpec::BellLike { theta: 0.7 }).unwrap();
        let p = family_partition(&b.spec).unwrap();
        let v = assemble_omega(&b, &p).unwrap();
        let s = worst_case_state(&v, &b, 0.2).unwrap();
        let a = run_protocol(&b, &p, &s, 10, 50, 9).unwrap();
        let c = run_protocol(&b, &p, &s, 10, 50, 9).unwrap();
        assert_eq!(a, c);
    }
}
