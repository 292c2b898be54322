//! Compositions, partitions, admissibility, and the duality involution.
//!
//! A composition is an ordered sequence of positive integers; it indexes
//! both the monomial quasi-symmetric basis and multiple zeta values.  The
//! duality map `tau` is implemented literally as the conjugation
//! `Sigma^{-1} R_n C_n Sigma` of partial-sum index sets inside `{1..n}`.

use crate::error::Error;
use crate::Result;
use std::fmt;

/// An ordered sequence of positive integers.  The empty composition is a
/// valid value (weight 0, depth 0) but is excluded from the domains of
/// [`sigma`] and [`tau`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    /// Build from parts. Panics if any part is zero; use this only with
    /// trusted data, otherwise go through [`Composition::try_new`].
    pub fn new(parts: Vec<u32>) -> Self {
        assert!(parts.iter().all(|&p| p >= 1), "composition parts must be >= 1");
        Composition { parts }
    }

    pub fn try_new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidIndex("composition parts must be >= 1".into()));
        }
        Ok(Composition { parts })
    }

    pub fn empty() -> Self {
        Composition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Nonempty with first part at least 2.
    pub fn is_admissible(&self) -> bool {
        self.parts.first().is_some_and(|&p| p >= 2)
    }

    /// Parts in reverse order.
    pub fn reversed(&self) -> Composition {
        let mut parts = self.parts.clone();
        parts.reverse();
        Composition { parts }
    }

    /// The underlying partition (parts sorted weakly decreasing).
    pub fn to_partition(&self) -> Partition {
        let mut parts = self.parts.clone();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    /// Canonical text form: comma-separated parts, e.g. `3,1`.
    pub fn text(&self) -> String {
        self.parts
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Order used to pick the canonical member of a dual pair: shorter
    /// depth first, then lexicographic on parts.
    pub fn shortlex_key(&self) -> (usize, &[u32]) {
        (self.parts.len(), &self.parts)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.text())
    }
}

/// A weakly decreasing sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        assert!(parts.iter().all(|&p| p >= 1), "partition parts must be >= 1");
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Multiplicity vector: `m[i]` = number of parts equal to `i+1`.
    pub fn multiplicities(&self) -> Vec<u32> {
        let max = self.parts.first().copied().unwrap_or(0) as usize;
        let mut m = vec![0u32; max];
        for &p in &self.parts {
            m[(p - 1) as usize] += 1;
        }
        m
    }
}

/// All partitions of `n`, in lexicographic descending order of part lists.
pub fn enumerate_partitions(n: u32) -> Vec<Partition> {
    fn rec(n: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        for first in (1..=n.min(max)).rev() {
            prefix.push(first);
            rec(n - first, first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n.max(1), &mut Vec::new(), &mut out);
    out
}

/// All compositions of `n`, optionally filtered to an exact part count,
/// in lexicographic descending order.  `n = 0` yields the empty
/// composition only when `parts` is absent or zero.
pub fn enumerate_compositions(n: u32, parts: Option<u32>) -> Vec<Composition> {
    fn rec_all(n: u32, prefix: &mut Vec<u32>, out: &mut Vec<Composition>) {
        if n == 0 {
            out.push(Composition { parts: prefix.clone() });
            return;
        }
        for first in (1..=n).rev() {
            prefix.push(first);
            rec_all(n - first, prefix, out);
            prefix.pop();
        }
    }
    fn rec_sized(n: u32, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<Composition>) {
        if m == 0 {
            if n == 0 {
                out.push(Composition { parts: prefix.clone() });
            }
            return;
        }
        if n < m {
            return;
        }
        // leave at least 1 for each of the remaining m-1 parts
        for first in (1..=n - (m - 1)).rev() {
            prefix.push(first);
            rec_sized(n - first, m - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    match parts {
        None => rec_all(n, &mut Vec::new(), &mut out),
        Some(m) => rec_sized(n, m, &mut Vec::new(), &mut out),
    }
    out
}

/// Admissible compositions of weight `n` with `depth` parts, in
/// lexicographic descending order.
pub fn enumerate_admissible(n: u32, depth: u32) -> Vec<Composition> {
    enumerate_compositions(n, Some(depth))
        .into_iter()
        .filter(|c| c.is_admissible())
        .collect()
}

/// Sequence of partial sums `(i1, i1+i2, ..., i1+...+ik)`.
pub fn sigma(c: &Composition) -> Result<Vec<u32>> {
    if c.is_empty() {
        return Err(Error::EmptyComposition);
    }
    let mut acc = 0;
    Ok(c.parts()
        .iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect())
}

/// Inverse of [`sigma`]: consecutive differences of a strictly
/// increasing positive sequence.
fn sigma_inv(sums: &[u32]) -> Composition {
    let mut parts = Vec::with_capacity(sums.len());
    let mut prev = 0;
    for &s in sums {
        debug_assert!(s > prev);
        parts.push(s - prev);
        prev = s;
    }
    Composition { parts }
}

/// The duality involution on admissible compositions.
///
/// With `n` the weight of `I`, computes `Sigma^{-1} R_n C_n Sigma (I)`
/// where `C_n` is complementation in `{1..n}` and `R_n` the reflection
/// `s -> n + 1 - s`.
pub fn tau(c: &Composition) -> Result<Composition> {
    if !c.is_admissible() {
        return Err(Error::NotAdmissible(c.text()));
    }
    let n = c.weight();
    let sums = sigma(c)?;
    let mut member = vec![false; (n + 1) as usize];
    for &s in &sums {
        member[s as usize] = true;
    }
    // complement, then reflect, collected in increasing order
    let mut reflected: Vec<u32> = (1..=n).filter(|&s| !member[s as usize]).map(|s| n + 1 - s).collect();
    reflected.sort_unstable();
    Ok(sigma_inv(&reflected))
}

/// Canonical representative of the dual pair `{I, tau(I)}`: the one that
/// is smaller in shortlex order (depth, then parts).
pub fn dual_canonical(c: &Composition) -> Result<Composition> {
    let d = tau(c)?;
    if d.shortlex_key() < c.shortlex_key() {
        Ok(d)
    } else {
        Ok(c.clone())
    }
}
