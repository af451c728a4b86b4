//! Qudit gate zoo and embedding into a multi-particle space.
//!
//! Conventions: `Z|k> = w^k |k>`, `X|k> = |k-1 mod d>`, so that
//! `QFT Z QFT^dagger = X` with `QFT|j> = d^{-1/2} sum_k w^{jk} |k>`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::qarith::{is_prime, HybridDims};
use crate::qlinalg::{ComplexMatrix, C64, ONE, ZERO};

/// `exp(2 pi i k / d)` with `k` reduced mod `d` first.
pub fn omega_pow(d: usize, k: usize) -> C64 {
    let r = k % d;
    if r == 0 {
        ONE
    } else {
        C64::from_polar(1.0, 2.0 * PI * r as f64 / d as f64)
    }
}

/// `k^s mod d` without overflow.
pub fn pow_mod(k: usize, s: usize, d: usize) -> usize {
    let mut acc = 1 % d;
    let k = k % d;
    for _ in 0..s {
        acc = acc * k % d;
    }
    acc
}

/// Gate kinds; parameters that are integers are reduced mod the local dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    PauliZ,
    PauliX,
    /// `diag(w^{k^s})`.
    PoweredZ { s: usize },
    Qft,
    Hadamard,
    /// Real rotation `[[cos a/2, -sin a/2], [sin a/2, cos a/2]]`.
    Ry { angle: f64 },
    /// Adjacent-level rotations, `R_{0,1}` applied first.
    GivensChain { thetas: Vec<f64> },
    /// Targets `[control, target]`, qubits only.
    Cnot,
    /// Targets `[control, target]`: `|a,b> -> |a, a+b>`.
    Csum,
    /// Two-particle phase `w^{m i j}`.
    CzWeighted { m: usize },
    /// Targets `[phase particle, control]`: phase `w_{d_phase}^{i_phase i_control}`.
    HybridCz,
    /// Phase `w^{m prod_v i_v}` over all targets.
    HyperCz { m: usize },
    /// Two-particle phase `w^{m i_0^{s_0} i_1^{s_1}}`.
    MultiCz { m: usize, s: Vec<usize> },
    /// Phase `w^{m prod_v i_v^{s_v}}` over all targets.
    MultiHyperCz { m: usize, s: Vec<usize> },
}

/// A gate placed on specific particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    #[serde(flatten)]
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl GateSpec {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Self {
        Self { kind, targets }
    }

    /// Full-space matrix of this gate on `dims`.
    pub fn matrix(&self, dims: &HybridDims) -> Result<ComplexMatrix> {
        let local_dims: Vec<usize> = self
            .targets
            .iter()
            .map(|&t| dims.dims().get(t).copied().ok_or(()))
            .collect::<std::result::Result<_, _>>()
            .or_else(|_| invalid(format!("targets {:?} out of range for {} particles", self.targets, dims.n())))?;
        let local = build_local(&self.kind, &local_dims)?;
        embed(&local, &self.targets, dims)
    }
}

pub fn pauli_z(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&(0..d).map(|k| omega_pow(d, k)).collect::<Vec<_>>())
}

pub fn pauli_x(d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for k in 0..d {
        m.set((k + d - 1) % d, k, ONE);
    }
    m
}

pub fn qft(d: usize) -> ComplexMatrix {
    let s = 1.0 / (d as f64).sqrt();
    let mut m = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            m.set(r, c, omega_pow(d, r * c) * s);
        }
    }
    m
}

pub fn ry(angle: f64) -> ComplexMatrix {
    let (s, c) = (angle / 2.0).sin_cos();
    ComplexMatrix::from_rows(&[vec![C64::new(c, 0.0), C64::new(-s, 0.0)], vec![C64::new(s, 0.0), C64::new(c, 0.0)]])
        .expect("2x2")
}

/// `R_{i,i+1}(theta)` on a `d`-level system.
pub fn givens(d: usize, i: usize, theta: f64) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    let mut m = ComplexMatrix::identity(d);
    m.set(i, i, C64::new(c, 0.0));
    m.set(i + 1, i + 1, C64::new(c, 0.0));
    m.set(i + 1, i, C64::new(s, 0.0));
    m.set(i, i + 1, C64::new(-s, 0.0));
    m
}

/// `R_{d-2,d-1}(theta_{d-2}) ... R_{0,1}(theta_0)`.
pub fn givens_chain(d: usize, thetas: &[f64]) -> Result<ComplexMatrix> {
    if thetas.len() + 1 != d {
        return invalid(format!("Givens chain on d={d} needs {} angles, got {}", d - 1, thetas.len()));
    }
    let mut u = ComplexMatrix::identity(d);
    for (i, &t) in thetas.iter().enumerate() {
        u = givens(d, i, t).matmul(&u)?;
    }
    Ok(u)
}

/// Diagonal matrix over `local_dims` whose entry at digits `i` is `w_d^{phase(i)}`.
fn diagonal_phase(local_dims: &[usize], d: usize, phase: impl Fn(&[usize]) -> usize) -> ComplexMatrix {
    let total: usize = local_dims.iter().product();
    let mut digits = vec![0; local_dims.len()];
    let diag: Vec<C64> = (0..total)
        .map(|idx| {
            let mut m = idx;
            for (slot, &dk) in digits.iter_mut().zip(local_dims).rev() {
                *slot = m % dk;
                m /= dk;
            }
            omega_pow(d, phase(&digits))
        })
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

fn require_arity(kind: &GateKind, local_dims: &[usize], n: usize) -> Result<()> {
    if local_dims.len() != n {
        return invalid(format!("{kind:?} acts on {n} particle(s), got {}", local_dims.len()));
    }
    Ok(())
}

fn require_uniform_prime(kind: &GateKind, local_dims: &[usize]) -> Result<usize> {
    let d = local_dims[0];
    if local_dims.iter().any(|&x| x != d) {
        return invalid(format!("{kind:?} needs equal dimensions, got {local_dims:?}"));
    }
    if !is_prime(d as u64) {
        return invalid(format!("{kind:?} is defined for prime d only, got {d}"));
    }
    Ok(d)
}

/// Local matrix of `kind` on particles of dimensions `local_dims` (target order).
pub fn build_local(kind: &GateKind, local_dims: &[usize]) -> Result<ComplexMatrix> {
    use GateKind::*;
    if local_dims.iter().any(|&d| d < 2) {
        return invalid("local dimensions must be >= 2");
    }
    match kind {
        PauliZ => {
            require_arity(kind, local_dims, 1)?;
            Ok(pauli_z(local_dims[0]))
        }
        PauliX => {
            require_arity(kind, local_dims, 1)?;
            Ok(pauli_x(local_dims[0]))
        }
        PoweredZ { s } => {
            require_arity(kind, local_dims, 1)?;
            let d = local_dims[0];
            Ok(diagonal_phase(local_dims, d, |i| pow_mod(i[0], *s, d)))
        }
        Qft => {
            require_arity(kind, local_dims, 1)?;
            Ok(qft(local_dims[0]))
        }
        Hadamard => {
            require_arity(kind, local_dims, 1)?;
            if local_dims[0] != 2 {
                return invalid("Hadamard requires d = 2");
            }
            Ok(qft(2))
        }
        Ry { angle } => {
            require_arity(kind, local_dims, 1)?;
            if local_dims[0] != 2 {
                return invalid("Ry requires d = 2");
            }
            Ok(ry(*angle))
        }
        GivensChain { thetas } => {
            require_arity(kind, local_dims, 1)?;
            givens_chain(local_dims[0], thetas)
        }
        Cnot | Csum => {
            require_arity(kind, local_dims, 2)?;
            let d = local_dims[0];
            if local_dims[1] != d || (matches!(kind, Cnot) && d != 2) {
                return invalid(format!("{kind:?} incompatible with dims {local_dims:?}"));
            }
            let mut m = ComplexMatrix::zeros(d * d, d * d);
            for a in 0..d {
                for b in 0..d {
                    m.set(a * d + (a + b) % d, a * d + b, ONE);
                }
            }
            Ok(m)
        }
        CzWeighted { m } => {
            require_arity(kind, local_dims, 2)?;
            let d = require_uniform_prime(kind, local_dims)?;
            Ok(diagonal_phase(local_dims, d, |i| (m % d) * i[0] * i[1]))
        }
        HybridCz => {
            require_arity(kind, local_dims, 2)?;
            let d = local_dims[0];
            Ok(diagonal_phase(local_dims, d, |i| i[0] * i[1]))
        }
        HyperCz { m } => {
            if local_dims.len() < 2 {
                return invalid("hyperedge gates need at least two targets");
            }
            let d = require_uniform_prime(kind, local_dims)?;
            Ok(diagonal_phase(local_dims, d, |i| i.iter().fold(m % d, |acc, &x| acc * x % d)))
        }
        MultiCz { m, s } | MultiHyperCz { m, s } => {
            if matches!(kind, MultiCz { .. }) {
                require_arity(kind, local_dims, 2)?;
            } else if local_dims.len() < 2 {
                return invalid("hyperedge gates need at least two targets");
            }
            if s.len() != local_dims.len() {
                return invalid(format!("{} exponents for {} targets", s.len(), local_dims.len()));
            }
            let d = require_uniform_prime(kind, local_dims)?;
            Ok(diagonal_phase(local_dims, d, |i| {
                i.iter().zip(s).fold(m % d, |acc, (&x, &sv)| acc * pow_mod(x, sv, d) % d)
            }))
        }
    }
}

/// Lifts `local` (acting on `targets`, in that order) to the full space.
pub fn embed(local: &ComplexMatrix, targets: &[usize], dims: &HybridDims) -> Result<ComplexMatrix> {
    let n = dims.n();
    let mut seen = vec![false; n];
    for &t in targets {
        if t >= n || std::mem::replace(&mut seen[t], true) {
            return invalid(format!("targets {targets:?} must be distinct indices below {n}"));
        }
    }
    let tdims: Vec<usize> = targets.iter().map(|&t| dims.dims()[t]).collect();
    let ld: usize = tdims.iter().product();
    if !local.is_square() || local.rows() != ld {
        return invalid(format!(
            "local matrix {}x{} does not match target dims {tdims:?}",
            local.rows(),
            local.cols()
        ));
    }
    let total = dims.total();
    let mut out = ComplexMatrix::zeros(total, total);
    // Place value of each target digit within the global index.
    let strides: Vec<usize> = (0..n).map(|k| dims.dims()[k + 1..].iter().product()).collect();
    let tstrides: Vec<usize> = targets.iter().map(|&t| strides[t]).collect();
    for col in 0..total {
        let digits = dims.digits(col);
        let local_col = targets.iter().fold(0, |acc, &t| acc * dims.dims()[t] + digits[t]);
        let base = col - targets.iter().zip(&tstrides).map(|(&t, &s)| digits[t] * s).sum::<usize>();
        for local_row in 0..ld {
            let v = local.get(local_row, local_col);
            if v == ZERO {
                continue;
            }
            let mut m = local_row;
            let mut row = base;
            for (k, &s) in tstrides.iter().enumerate().rev() {
                row += (m % tdims[k]) * s;
                m /= tdims[k];
            }
            out.set(row, col, v);
        }
    }
    Ok(out)
}

/// Diagonal phase `w_d^{m prod_v i_v^{s_v}}` over the edge vertices on the full space.
/// With `exponents = None` every `s_v` is 1 (plain graph or hypergraph edge).
pub fn hyperedge_gate(
    vertices: &[usize],
    exponents: Option<&[usize]>,
    m: usize,
    dims: &HybridDims,
) -> Result<ComplexMatrix> {
    let kind = match exponents {
        None if vertices.len() == 2 => GateKind::CzWeighted { m },
        None => GateKind::HyperCz { m },
        Some(s) if vertices.len() == 2 => GateKind::MultiCz { m, s: s.to_vec() },
        Some(s) => GateKind::MultiHyperCz { m, s: s.to_vec() },
    };
    GateSpec::new(kind, vertices.to_vec()).matrix(dims)
}
