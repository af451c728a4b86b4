//! Builders for the supported target-state families.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gates::{omega_pow, GateKind, GateSpec};
use crate::qarith::{is_prime, HybridDims};
use crate::qlinalg::{is_unitary, ComplexMatrix, StateVector, C64};

/// One (hyper)edge of a graph specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub vertices: Vec<usize>,
    #[serde(default = "one")]
    pub weight: usize,
    /// Per-vertex exponents `s_v`; absent means every exponent is 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<usize>>,
}

fn one() -> usize {
    1
}

/// Which of the four graph families an edge list describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Graph,
    Hypergraph,
    Multigraph,
    MultiHypergraph,
}

impl GraphKind {
    /// Plain graphs and hypergraphs share one partition scheme; the
    /// exponent-carrying variants share the other.
    pub fn has_exponents(self) -> bool {
        matches!(self, GraphKind::Multigraph | GraphKind::MultiHypergraph)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<GraphEdge>,
}

impl GraphSpec {
    /// Plain graph with unit weights.
    pub fn simple(n: usize, edges: &[(usize, usize)]) -> Self {
        Self {
            n,
            edges: edges.iter().map(|&(a, b)| GraphEdge { vertices: vec![a, b], weight: 1, exponents: None }).collect(),
        }
    }

    pub fn path(n: usize) -> Self {
        Self::simple(n, &(1..n).map(|v| (v - 1, v)).collect::<Vec<_>>())
    }

    pub fn cycle(n: usize) -> Self {
        Self::simple(n, &(0..n).map(|v| (v, (v + 1) % n)).collect::<Vec<_>>())
    }

    pub fn complete(n: usize) -> Self {
        let mut e = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                e.push((a, b));
            }
        }
        Self::simple(n, &e)
    }

    pub fn kind(&self) -> GraphKind {
        let hyper = self.edges.iter().any(|e| e.vertices.len() > 2);
        let multi = self.edges.iter().any(|e| e.exponents.is_some());
        match (hyper, multi) {
            (false, false) => GraphKind::Graph,
            (true, false) => GraphKind::Hypergraph,
            (false, true) => GraphKind::Multigraph,
            (true, true) => GraphKind::MultiHypergraph,
        }
    }

    /// Checks vertex ranges, edge sizes and (for prime `d`) weights in `Z_d^*`.
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.n == 0 {
            return invalid("graph needs at least one vertex");
        }
        if !is_prime(d as u64) {
            return invalid(format!("graph states are defined for prime d, got {d}"));
        }
        for e in &self.edges {
            if e.vertices.len() < 2 {
                return invalid(format!("edge {:?} has fewer than two vertices", e.vertices));
            }
            let mut sorted = e.vertices.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != e.vertices.len() || sorted.iter().any(|&v| v >= self.n) {
                return invalid(format!("edge {:?} has repeated or out-of-range vertices", e.vertices));
            }
            if e.weight % d == 0 {
                return invalid(format!("edge weight {} is not a unit mod {d}", e.weight));
            }
            if let Some(s) = &e.exponents {
                if s.len() != e.vertices.len() || s.iter().any(|&x| x % d == 0) {
                    return invalid(format!("edge exponents {s:?} must be units mod {d}, one per vertex"));
                }
            }
        }
        Ok(())
    }
}

/// Target-state families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum StateSpec {
    /// Qutrit-qubit state prepared by a hybrid controlled phase.
    Psi1,
    /// `sin t |00> + cos t |11>`.
    BellLike { theta: f64 },
    Ghz { n: usize, d: usize },
    /// `sin t |0...0> + cos t |1...1>`, with `t` in `(0, pi/2)`.
    GhzLikeQubit { n: usize, theta: f64 },
    /// `sum_j lambda_j |j...j>` with amplitudes set by a Givens chain.
    GhzLikeQudit { n: usize, d: usize, thetas: Vec<f64> },
    GraphFamily { graph: GraphSpec, d: usize },
    /// Generalized Bell state of two `d = 6` particles, split as `(2,3,2,3)`.
    Psi3,
    CustomCircuit { dims: Vec<usize>, gates: Vec<GateSpec> },
}

/// A prepared state: dims, preparing unitary and `U|0...0>`.
#[derive(Debug, Clone)]
pub struct BuiltState {
    pub spec: StateSpec,
    pub dims: HybridDims,
    pub unitary: ComplexMatrix,
    pub psi: StateVector,
}

impl StateSpec {
    /// Gate list (applied first to last) and dims that prepare this state.
    pub fn circuit(&self) -> Result<(HybridDims, Vec<GateSpec>)> {
        use GateKind::*;
        let g = GateSpec::new;
        match self {
            StateSpec::Psi1 => Ok((HybridDims::new(vec![3, 2])?, vec![g(Qft, vec![0]), g(Hadamard, vec![1]), g(HybridCz, vec![0, 1])])),
            StateSpec::BellLike { theta } => {
                if !theta.is_finite() {
                    return invalid("theta must be finite");
                }
                Ok((
                    HybridDims::new(vec![2, 2])?,
                    vec![g(Ry { angle: std::f64::consts::PI - 2.0 * theta }, vec![0]), g(Cnot, vec![0, 1])],
                ))
            }
            StateSpec::Ghz { n, d } => {
                let dims = ghz_dims(*n, *d)?;
                let mut gates = vec![g(Qft, vec![0])];
                gates.extend((1..*n).map(|k| g(Csum, vec![0, k])));
                Ok((dims, gates))
            }
            StateSpec::GhzLikeQubit { n, theta } => {
                let dims = ghz_dims(*n, 2)?;
                if !(*theta > 0.0 && *theta < FRAC_PI_2) {
                    return invalid(format!("theta must lie in (0, pi/2), got {theta}"));
                }
                let mut gates = vec![g(Ry { angle: std::f64::consts::PI - 2.0 * theta }, vec![0])];
                gates.extend((1..*n).map(|k| g(Cnot, vec![0, k])));
                Ok((dims, gates))
            }
            StateSpec::GhzLikeQudit { n, d, thetas } => {
                let dims = ghz_dims(*n, *d)?;
                if thetas.len() + 1 != *d || thetas.iter().any(|t| !t.is_finite()) {
                    return invalid(format!("need {} finite Givens angles for d={d}", d - 1));
                }
                let mut gates = vec![g(GivensChain { thetas: thetas.clone() }, vec![0])];
                gates.extend((1..*n).map(|k| g(Csum, vec![0, k])));
                Ok((dims, gates))
            }
            StateSpec::GraphFamily { graph, d } => {
                graph.validate(*d)?;
                let dims = HybridDims::new(vec![*d; graph.n])?;
                let mut gates: Vec<GateSpec> = (0..graph.n).map(|v| g(Qft, vec![v])).collect();
                for e in &graph.edges {
                    let m = e.weight % d;
                    let kind = match (&e.exponents, e.vertices.len()) {
                        (None, 2) => CzWeighted { m },
                        (None, _) => HyperCz { m },
                        (Some(s), 2) => MultiCz { m, s: s.iter().map(|x| x % d).collect() },
                        (Some(s), _) => MultiHyperCz { m, s: s.iter().map(|x| x % d).collect() },
                    };
                    gates.push(g(kind, e.vertices.clone()));
                }
                Ok((dims, gates))
            }
            StateSpec::Psi3 => Ok((
                HybridDims::new(vec![2, 3, 2, 3])?,
                vec![
                    g(Hadamard, vec![0]),
                    g(Qft, vec![1]),
                    g(HybridCz, vec![1, 0]),
                    g(Cnot, vec![0, 2]),
                    g(Csum, vec![1, 3]),
                ],
            )),
            StateSpec::CustomCircuit { dims, gates } => Ok((HybridDims::new(dims.clone())?, gates.clone())),
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            StateSpec::Psi1 => "psi1".into(),
            StateSpec::BellLike { theta } => format!("bell_like(theta={theta})"),
            StateSpec::Ghz { n, d } => format!("ghz(n={n},d={d})"),
            StateSpec::GhzLikeQubit { n, theta } => format!("ghz_like_qubit(n={n},theta={theta})"),
            StateSpec::GhzLikeQudit { n, d, .. } => format!("ghz_like_qudit(n={n},d={d})"),
            StateSpec::GraphFamily { graph, d } => format!("{:?}(n={},d={d})", graph.kind(), graph.n).to_lowercase(),
            StateSpec::Psi3 => "psi3".into(),
            StateSpec::CustomCircuit { dims, .. } => format!("custom(dims={dims:?})"),
        }
    }
}

fn ghz_dims(n: usize, d: usize) -> Result<HybridDims> {
    if n < 2 {
        return invalid(format!("GHZ-type states need n >= 2, got {n}"));
    }
    HybridDims::new(vec![d; n])
}

/// Prepares `(dims, U, U|0...0>)` for a family.
pub fn build(spec: &StateSpec) -> Result<BuiltState> {
    let (dims, gates) = spec.circuit()?;
    let mut u = ComplexMatrix::identity(dims.total());
    for gate in &gates {
        u = gate.matrix(&dims)?.matmul(&u)?;
    }
    if !is_unitary(&u, 1e-10) {
        return invalid("circuit did not produce a unitary");
    }
    let psi = StateVector::new(dims.clone(), u.column(0))?;
    Ok(BuiltState { spec: spec.clone(), dims, unitary: u, psi })
}

pub fn build_psi3() -> Result<BuiltState> {
    build(&StateSpec::Psi3)
}

/// The `psi3` state written on two `d = 6` particles, with amplitude
/// `w_3^{floor(k/3) (k mod 3)} / sqrt 6` on `|k k>`.
pub fn psi3_composite() -> Result<StateVector> {
    let dims = HybridDims::new(vec![6, 6])?;
    let mut amps = vec![C64::new(0.0, 0.0); 36];
    let s = 1.0 / 6f64.sqrt();
    for k in 0..6 {
        amps[dims.index(&[k, k])] = omega_pow(3, (k / 3) * (k % 3)) * s;
    }
    StateVector::new(dims, amps)
}
