//! Integer and modular arithmetic for exponent-tuple algebra.
//!
//! Every divisibility test here is exact: the condition
//! `sum_k h_k j_k / d_k` is an integer is evaluated as
//! `sum_k h_k j_k (L / d_k) = 0 (mod L)` with `L = lcm(d)`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default cap on the total Hilbert dimension `prod d_i`.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Prime factorization of `n` as ascending `(prime, multiplicity)` pairs.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n < 2 {
        return invalid(format!("factorize needs n >= 2, got {n}"));
    }
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut a = 0;
            while m.is_multiple_of(p) {
                m /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    Ok(out)
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).map(|f| f.len() == 1 && f[0].1 == 1).unwrap_or(false)
}

/// Ordered local dimensions of a hybrid system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct HybridDims {
    dims: Vec<usize>,
    prime_split: Vec<Vec<(u64, u32)>>,
    total: usize,
}

impl HybridDims {
    /// Validates dims against [`DEFAULT_DIM_CAP`].
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if dims.is_empty() {
            return invalid("at least one particle is required");
        }
        let mut total: usize = 1;
        let mut prime_split = Vec::with_capacity(dims.len());
        for &d in &dims {
            if d < 2 {
                return invalid(format!("local dimension must be >= 2, got {d}"));
            }
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or_else(|| Error::Capacity(format!("dims {dims:?} exceed the cap {cap}")))?;
            prime_split.push(factorize(d as u64)?);
        }
        Ok(Self { dims, prime_split, total })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.dims.len()
    }

    /// Total Hilbert dimension.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn prime_split(&self) -> &[Vec<(u64, u32)>] {
        &self.prime_split
    }

    pub fn all_prime(&self) -> bool {
        self.dims.iter().all(|&d| is_prime(d as u64))
    }

    /// Dimensions after replacing each `d_i` by its ascending prime factors,
    /// each prime repeated by its multiplicity.
    pub fn split(&self) -> HybridDims {
        let dims = self
            .prime_split
            .iter()
            .flat_map(|f| f.iter().flat_map(|&(p, a)| std::iter::repeat_n(p as usize, a as usize)))
            .collect();
        HybridDims::with_cap(dims, usize::MAX).expect("split of a valid HybridDims is valid")
    }

    /// Big-endian mixed-radix digits of a global index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// Global index of a digit tuple (particle 0 most significant).
    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&j, &d)| acc * d + j % d)
    }

    /// Every tuple in `Z_{d_0} x ... x Z_{d_{n-1}}`, in index order.
    pub fn tuples(&self) -> impl Iterator<Item = ExponentTuple> + '_ {
        (0..self.total).map(move |i| ExponentTuple(self.digits(i)))
    }

    pub fn zero(&self) -> ExponentTuple {
        ExponentTuple(vec![0; self.n()])
    }

    /// Unit tuple with a one in slot `k`.
    pub fn unit(&self, k: usize) -> ExponentTuple {
        let mut v = vec![0; self.n()];
        v[k] = 1;
        ExponentTuple(v)
    }

    /// Reduces a raw tuple mod the local dimensions, checking its length.
    pub fn tuple(&self, raw: &[usize]) -> Result<ExponentTuple> {
        if raw.len() != self.n() {
            return invalid(format!("tuple {raw:?} has length {}, expected {}", raw.len(), self.n()));
        }
        Ok(ExponentTuple(raw.iter().zip(&self.dims).map(|(&h, &d)| h % d).collect()))
    }
}

impl TryFrom<Vec<usize>> for HybridDims {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        HybridDims::new(v)
    }
}

impl From<HybridDims> for Vec<usize> {
    fn from(h: HybridDims) -> Self {
        h.dims
    }
}

/// A tuple of residues `h_k in Z_{d_k}`; also used for outcome labels `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentTuple(pub Vec<usize>);

impl ExponentTuple {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&h| h == 0)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for ExponentTuple {
    fn from(v: Vec<usize>) -> Self {
        ExponentTuple(v)
    }
}

pub fn lcm_slice(dims: &[usize]) -> usize {
    dims.iter().fold(1usize, |acc, &d| acc.lcm(&d))
}

pub fn lcm_of(dims: &HybridDims) -> usize {
    lcm_slice(dims.dims())
}

/// `sum_k h_k j_k (L/d_k) mod L`, i.e. the exact phase exponent of
/// `prod_k omega_{d_k}^{h_k j_k}` expressed over `omega_L`.
pub fn phase_exponent(h: &[usize], j: &[usize], dims: &[usize], l: usize) -> usize {
    let l64 = l as u128;
    let mut acc: u128 = 0;
    for ((&hk, &jk), &dk) in h.iter().zip(j).zip(dims) {
        let term = ((hk % dk) as u128 * (jk % dk) as u128) % dk as u128 * (l / dk) as u128;
        acc = (acc + term) % l64;
    }
    acc as usize
}

/// True iff `sum_k h_k j_k / d_k` is an integer.
pub fn residue_condition(h: &ExponentTuple, j: &ExponentTuple, dims: &HybridDims) -> Result<bool> {
    if h.0.len() != dims.n() || j.0.len() != dims.n() {
        return invalid(format!(
            "tuple lengths {} and {} do not match {} particles",
            h.0.len(),
            j.0.len(),
            dims.n()
        ));
    }
    Ok(residue_holds(&h.0, &j.0, dims.dims(), lcm_of(dims)))
}

/// Unchecked form of [`residue_condition`] for hot loops; `l` must be `lcm(dims)`.
#[inline]
pub fn residue_holds(h: &[usize], j: &[usize], dims: &[usize], l: usize) -> bool {
    phase_exponent(h, j, dims, l) == 0
}

/// Number of members of `set` satisfying the residue condition with `j`.
pub fn count_condition_solutions(set: &[ExponentTuple], j: &ExponentTuple, dims: &HybridDims) -> Result<usize> {
    let zero = dims.zero();
    residue_condition(&zero, j, dims)?;
    let l = lcm_of(dims);
    let mut count = 0;
    for h in set {
        if h.0.len() != dims.n() {
            return invalid(format!("tuple {:?} does not match {} particles", h.0, dims.n()));
        }
        if residue_holds(&h.0, &j.0, dims.dims(), l) {
            count += 1;
        }
    }
    Ok(count)
}

/// Multiplicative order of the group element labelled by `h`:
/// the least `r >= 1` with `r h_k / d_k` integral for every k.
pub fn element_order(h: &ExponentTuple, dims: &HybridDims) -> usize {
    h.0.iter()
        .zip(dims.dims())
        .fold(1usize, |acc, (&hk, &dk)| acc.lcm(&(dk / (hk % dk).gcd(&dk))))
}

/// Digits of a composite label under the ascending prime split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeIndexMap {
    composite: HybridDims,
    split: HybridDims,
    /// For each composite particle, the range of split particles it owns.
    owners: Vec<std::ops::Range<usize>>,
}

impl CompositeIndexMap {
    pub fn new(composite: &HybridDims) -> Self {
        let mut owners = Vec::with_capacity(composite.n());
        let mut start = 0;
        for f in composite.prime_split() {
            let len: usize = f.iter().map(|&(_, a)| a as usize).sum();
            owners.push(start..start + len);
            start += len;
        }
        Self { composite: composite.clone(), split: composite.split(), owners }
    }

    pub fn composite(&self) -> &HybridDims {
        &self.composite
    }

    pub fn split(&self) -> &HybridDims {
        &self.split
    }

    /// Prime-split digits of label `k` on composite particle `particle`.
    pub fn local_digits(&self, particle: usize, k: usize) -> Vec<usize> {
        let range = self.owners[particle].clone();
        let radices = &self.split.dims()[range];
        let mut out = vec![0; radices.len()];
        let mut m = k % self.composite.dims()[particle];
        for (slot, &p) in out.iter_mut().zip(radices).rev() {
            *slot = m % p;
            m /= p;
        }
        out
    }

    /// Maps a composite label tuple to its prime-split tuple.
    pub fn to_split(&self, labels: &[usize]) -> Vec<usize> {
        labels.iter().enumerate().flat_map(|(i, &k)| self.local_digits(i, k)).collect()
    }

    /// Inverse of [`Self::to_split`].
    pub fn to_composite(&self, digits: &[usize]) -> Vec<usize> {
        self.owners
            .iter()
            .map(|r| r.clone().fold(0, |acc, s| acc * self.split.dims()[s] + digits[s]))
            .collect()
    }
}

/// Bijection between composite labels and prime-split digits.
pub fn composite_index_map(dims: &HybridDims) -> CompositeIndexMap {
    CompositeIndexMap::new(dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hd(v: &[usize]) -> HybridDims {
        HybridDims::new(v.to_vec()).unwrap()
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(6).unwrap(), vec![(2, 1), (3, 1)]);
        assert_eq!(factorize(2).unwrap(), vec![(2, 1)]);
        assert_eq!(factorize(12).unwrap(), vec![(2, 2), (3, 1)]);
        assert!(factorize(1).is_err());
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(lcm_of(&hd(&[2, 3])), 6);
        assert_eq!(lcm_of(&hd(&[2, 2, 2])), 2);
        assert_eq!(lcm_of(&hd(&[3, 2, 3, 2])), 6);
    }

    #[test]
    fn residue_examples() {
        let d = hd(&[3, 2]);
        let t = |v: &[usize]| ExponentTuple(v.to_vec());
        assert!(residue_condition(&t(&[1, 0]), &t(&[0, 1]), &d).unwrap());
        assert!(!residue_condition(&t(&[1, 0]), &t(&[1, 0]), &d).unwrap());
        assert!(!residue_condition(&t(&[1, 1]), &t(&[2, 1]), &d).unwrap());
        assert!(residue_condition(&t(&[1]), &t(&[0, 0]), &d).is_err());
    }

    #[test]
    fn count_examples() {
        let d = hd(&[3, 2]);
        let c = vec![ExponentTuple(vec![0, 1])];
        assert_eq!(count_condition_solutions(&c, &ExponentTuple(vec![0, 1]), &d).unwrap(), 0);
        assert_eq!(count_condition_solutions(&c, &ExponentTuple(vec![0, 0]), &d).unwrap(), 1);
        let d4 = hd(&[2, 3, 2, 3]);
        let c2 = vec![ExponentTuple(vec![0, 0, 1, 0]), ExponentTuple(vec![0, 0, 0, 1])];
        assert_eq!(count_condition_solutions(&c2, &ExponentTuple(vec![0, 0, 1, 1]), &d4).unwrap(), 0);
    }

    #[test]
    fn composite_map_examples() {
        let m = composite_index_map(&hd(&[6]));
        assert_eq!(m.local_digits(0, 4), vec![1, 1]);
        assert_eq!(m.local_digits(0, 0), vec![0, 0]);
        let m12 = composite_index_map(&hd(&[12]));
        assert_eq!(m12.split().dims(), &[2, 2, 3]);
        assert_eq!(m12.local_digits(0, 7), vec![1, 0, 1]);
        assert_eq!(m12.to_composite(&[1, 0, 1]), vec![7]);
    }

    #[test]
    fn dims_cap() {
        assert!(matches!(HybridDims::new(vec![2; 13]), Err(Error::Capacity(_))));
        assert!(HybridDims::new(vec![2; 12]).is_ok());
        assert!(HybridDims::new(vec![1, 2]).is_err());
    }
}
