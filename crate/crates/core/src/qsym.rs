//! Quasi-symmetric functions in the monomial basis with exact rational
//! coefficients.
//!
//! Every element is stored as a finitely supported map from compositions
//! to rationals; the generators `e_k`, `h_k`, `p_k`, `m_lambda` and
//! `N_{n,m}` are materialized into this basis, so a single product
//! routine (the quasi-shuffle) and a single specialization routine
//! cover everything.

use crate::composition::{enumerate_compositions, Composition, Partition};
use crate::error::Error;
use crate::rat::{is_zero, rat_int, Rat};
use crate::Result;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// An element of the quasi-symmetric function algebra, written in the
/// monomial basis `{M_I}`.  Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QSymElem {
    coords: BTreeMap<Composition, Rat>,
}

impl QSymElem {
    pub fn zero() -> Self {
        QSymElem::default()
    }

    pub fn one() -> Self {
        QSymElem::monomial(Composition::empty())
    }

    /// The basis element `M_I`.
    pub fn monomial(i: Composition) -> Self {
        let mut coords = BTreeMap::new();
        coords.insert(i, Rat::one());
        QSymElem { coords }
    }

    pub fn scalar(c: Rat) -> Self {
        let mut e = QSymElem::zero();
        e.add_term(Composition::empty(), c);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Composition, Rat)>) -> Self {
        let mut e = QSymElem::zero();
        for (i, c) in terms {
            e.add_term(i, c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coeff(&self, i: &Composition) -> Rat {
        self.coords.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Composition, &Rat)> {
        self.coords.iter()
    }

    pub fn support_len(&self) -> usize {
        self.coords.len()
    }

    pub fn add_term(&mut self, i: Composition, c: Rat) {
        if is_zero(&c) {
            return;
        }
        let entry = self.coords.entry(i);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if is_zero(&sum) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if is_zero(c) {
            return QSymElem::zero();
        }
        QSymElem {
            coords: self.coords.iter().map(|(i, v)| (i.clone(), v.clone() * c)).collect(),
        }
    }

    /// Maximum weight over the support; 0 for scalars and zero.
    pub fn degree(&self) -> u32 {
        self.coords.keys().map(|i| i.weight()).max().unwrap_or(0)
    }

    /// All supported compositions have the same weight (scalars count as
    /// homogeneous of degree 0).
    pub fn is_homogeneous(&self) -> bool {
        let mut weights = self.coords.keys().map(|i| i.weight());
        match weights.next() {
            None => true,
            Some(w) => weights.all(|x| x == w),
        }
    }

    /// The part of the element of the given degree.
    pub fn homogeneous_part(&self, d: u32) -> QSymElem {
        QSymElem {
            coords: self
                .coords
                .iter()
                .filter(|(i, _)| i.weight() == d)
                .map(|(i, c)| (i.clone(), c.clone()))
                .collect(),
        }
    }

    /// True iff for every partition, all compositions rearranging it
    /// carry equal coefficients.
    pub fn is_symmetric(&self) -> bool {
        let mut by_partition: BTreeMap<Partition, &Rat> = BTreeMap::new();
        for (i, c) in &self.coords {
            let p = i.to_partition();
            if let Some(prev) = by_partition.get(&p) {
                if *prev != c {
                    return false;
                }
            } else {
                by_partition.insert(p, c);
            }
        }
        // every rearrangement must be present
        for p in by_partition.keys() {
            for c in rearrangements(p) {
                if !self.coords.contains_key(&c) {
                    return false;
                }
            }
        }
        true
    }

    /// Exact value of the element under `x_i -> 1/i` for `i <= n`.
    pub fn specialize_at(&self, n: u64) -> Rat {
        let mut stream = SpecializeStream::new(self);
        let mut val = stream.next_value();
        for _ in 0..n {
            val = stream.next_value();
        }
        val
    }
}

impl Add for &QSymElem {
    type Output = QSymElem;
    fn add(self, rhs: &QSymElem) -> QSymElem {
        let mut out = self.clone();
        for (i, c) in &rhs.coords {
            out.add_term(i.clone(), c.clone());
        }
        out
    }
}

impl Sub for &QSymElem {
    type Output = QSymElem;
    fn sub(self, rhs: &QSymElem) -> QSymElem {
        let mut out = self.clone();
        for (i, c) in &rhs.coords {
            out.add_term(i.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &QSymElem {
    type Output = QSymElem;
    fn neg(self) -> QSymElem {
        self.scale(&-Rat::one())
    }
}

impl Mul for &QSymElem {
    type Output = QSymElem;
    fn mul(self, rhs: &QSymElem) -> QSymElem {
        quasi_shuffle(self, rhs)
    }
}

impl fmt::Display for QSymElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coords.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in &self.coords {
            let neg = c < &Rat::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if i.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "M[{}]", i.text())?;
            } else {
                write!(f, "{mag}*M[{}]", i.text())?;
            }
        }
        Ok(())
    }
}

/// All distinct compositions rearranging a partition.
pub fn rearrangements(p: &Partition) -> Vec<Composition> {
    fn rec(remaining: &mut Vec<u32>, prefix: &mut Vec<u32>, out: &mut Vec<Composition>) {
        if remaining.is_empty() {
            out.push(Composition::new(prefix.clone()));
            return;
        }
        let mut seen = Vec::new();
        for idx in 0..remaining.len() {
            let v = remaining[idx];
            if seen.contains(&v) {
                continue;
            }
            seen.push(v);
            remaining.remove(idx);
            prefix.push(v);
            rec(remaining, prefix, out);
            prefix.pop();
            remaining.insert(idx, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut p.parts().to_vec(), &mut Vec::new(), &mut out);
    out
}

/// The quasi-shuffle product.  Bilinear; on basis elements, interleaves
/// the two compositions allowing adjacent parts from opposite factors to
/// merge by addition.
pub fn quasi_shuffle(u: &QSymElem, v: &QSymElem) -> QSymElem {
    let mut out = QSymElem::zero();
    for (i, a) in u.terms() {
        for (j, b) in v.terms() {
            let c = a.clone() * b;
            for (k, mult) in shuffle_basis(i.parts(), j.parts()) {
                out.add_term(k, c.clone() * rat_int(mult));
            }
        }
    }
    out
}

fn shuffle_basis(i: &[u32], j: &[u32]) -> Vec<(Composition, i64)> {
    fn rec(i: &[u32], j: &[u32], prefix: &mut Vec<u32>, out: &mut BTreeMap<Vec<u32>, i64>) {
        if i.is_empty() && j.is_empty() {
            *out.entry(prefix.clone()).or_insert(0) += 1;
            return;
        }
        if !i.is_empty() {
            prefix.push(i[0]);
            rec(&i[1..], j, prefix, out);
            prefix.pop();
        }
        if !j.is_empty() {
            prefix.push(j[0]);
            rec(i, &j[1..], prefix, out);
            prefix.pop();
        }
        if !i.is_empty() && !j.is_empty() {
            prefix.push(i[0] + j[0]);
            rec(&i[1..], &j[1..], prefix, out);
            prefix.pop();
        }
    }
    let mut out = BTreeMap::new();
    rec(i, j, &mut Vec::new(), &mut out);
    out.into_iter().map(|(k, m)| (Composition::new(k), m)).collect()
}

/// Generator families, all materialized into the monomial basis.
pub mod generators {
    use super::*;

    /// Elementary symmetric function `e_k = M_{(1,...,1)}`.
    pub fn elementary(k: u32) -> QSymElem {
        QSymElem::monomial(Composition::new(vec![1; k as usize]))
    }

    /// Complete symmetric function `h_k`: sum of `M_I` over all
    /// compositions of `k`.
    pub fn complete(k: u32) -> QSymElem {
        QSymElem::from_terms(
            enumerate_compositions(k, None).into_iter().map(|i| (i, Rat::one())),
        )
    }

    /// Power sum `p_k = M_{(k)}`; `p_0 = 1`.
    pub fn powersum(k: u32) -> QSymElem {
        if k == 0 {
            QSymElem::one()
        } else {
            QSymElem::monomial(Composition::new(vec![k]))
        }
    }

    /// Monomial symmetric function `m_lambda`: sum of `M_I` over the
    /// distinct rearrangements of the partition.
    pub fn monomial_partition(p: &Partition) -> QSymElem {
        QSymElem::from_terms(rearrangements(p).into_iter().map(|i| (i, Rat::one())))
    }

    /// `N_{n,m}`: sum of `M_I` over compositions of `n` with `m` parts.
    /// `N_{0,0} = 1`; `N_{n,0} = 0` for `n >= 1`; `m > n` is rejected.
    pub fn n_family(n: u32, m: u32) -> Result<QSymElem> {
        if m > n {
            return Err(Error::InvalidIndex(format!(
                "N[{n},{m}] requires n >= m"
            )));
        }
        if m == 0 {
            return Ok(if n == 0 { QSymElem::one() } else { QSymElem::zero() });
        }
        Ok(QSymElem::from_terms(
            enumerate_compositions(n, Some(m)).into_iter().map(|i| (i, Rat::one())),
        ))
    }
}

/// Incremental exact evaluation of `u(1, 1/2, ..., 1/n)` for
/// `n = 0, 1, 2, ...`.
///
/// For each supported composition of depth `j`, a vector of prefix
/// accumulators `W_1..W_j` is maintained with
/// `W_t(n) = W_t(n-1) + (1/n)^{i_t} W_{t-1}(n-1)`, so each step costs
/// `O(depth)` per basis term.  Instances are single-consumer; create as
/// many independent streams as needed.
pub struct SpecializeStream {
    terms: Vec<(Vec<u32>, Rat, Vec<Rat>)>,
    constant: Rat,
    n: u64,
}

impl SpecializeStream {
    pub fn new(u: &QSymElem) -> Self {
        let mut terms = Vec::new();
        let mut constant = Rat::zero();
        for (i, c) in u.terms() {
            if i.is_empty() {
                constant = c.clone();
            } else {
                terms.push((i.parts().to_vec(), c.clone(), vec![Rat::zero(); i.depth()]));
            }
        }
        SpecializeStream { terms, constant, n: 0 }
    }

    /// Value at the current prefix length, then advance.  The first call
    /// returns the value at `n = 0` (the constant term).
    pub fn next_value(&mut self) -> Rat {
        let mut total = self.constant.clone();
        if self.n > 0 {
            let n = self.n;
            for (exps, coeff, w) in &mut self.terms {
                for t in (0..exps.len()).rev() {
                    let inv = Rat::new(1.into(), num_bigint::BigInt::from(n).pow(exps[t]));
                    let prev = if t == 0 { Rat::one() } else { w[t - 1].clone() };
                    w[t] = w[t].clone() + inv * prev;
                }
                total += coeff.clone() * w[exps.len() - 1].clone();
            }
        }
        self.n += 1;
        total
    }
}

/// Float version of [`SpecializeStream`] with compensated accumulators,
/// used by the direct series summation.
pub struct FloatSpecializeStream {
    terms: Vec<(Vec<i32>, f64, Vec<KahanCell>)>,
    constant: f64,
    n: u64,
}

#[derive(Clone, Copy, Default)]
struct KahanCell {
    sum: f64,
    comp: f64,
}

impl KahanCell {
    #[inline]
    fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

impl FloatSpecializeStream {
    pub fn new(u: &QSymElem) -> Self {
        let mut terms = Vec::new();
        let mut constant = 0.0;
        for (i, c) in u.terms() {
            let cf = crate::rat::rat_to_f64(c);
            if i.is_empty() {
                constant = cf;
            } else {
                let exps: Vec<i32> = i.parts().iter().map(|&p| p as i32).collect();
                let cells = vec![KahanCell::default(); exps.len()];
                terms.push((exps, cf, cells));
            }
        }
        FloatSpecializeStream { terms, constant, n: 0 }
    }

    pub fn next_value(&mut self) -> f64 {
        let mut total = self.constant;
        if self.n > 0 {
            let n = self.n as f64;
            for (exps, coeff, w) in &mut self.terms {
                for t in (0..exps.len()).rev() {
                    let inv = n.powi(-exps[t]);
                    let prev = if t == 0 { 1.0 } else { w[t - 1].sum };
                    w[t].add(inv * prev);
                }
                total += *coeff * w[exps.len() - 1].sum;
            }
        }
        self.n += 1;
        total
    }
}

#[cfg(test)]
mod tests {
    use super::generators::*;
    use super::*;
    use crate::rat::rat;

    fn comp(parts: &[u32]) -> Composition {
        Composition::new(parts.to_vec())
    }

    fn m(parts: &[u32]) -> QSymElem {
        QSymElem::monomial(comp(parts))
    }

    /// Independent oracle: expand an element as an honest polynomial in
    /// `nvars` variables, keyed by exponent vectors.
    fn poly_in_vars(u: &QSymElem, nvars: usize) -> BTreeMap<Vec<u32>, Rat> {
        let mut out: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        for (i, c) in u.terms() {
            let j = i.depth();
            if j > nvars && !i.is_empty() {
                continue;
            }
            // choose positions 1 <= t_1 < ... < t_j <= nvars
            let mut idx: Vec<usize> = (0..j).collect();
            loop {
                let mut exps = vec![0u32; nvars];
                for (slot, &pos) in idx.iter().enumerate() {
                    exps[pos] = i.parts()[slot];
                }
                *out.entry(exps).or_insert_with(Rat::zero) += c.clone();
                // next combination
                let mut k = j;
                loop {
                    if k == 0 {
                        idx.clear();
                        break;
                    }
                    k -= 1;
                    if idx[k] + 1 <= nvars - (j - k) {
                        idx[k] += 1;
                        for t in k + 1..j {
                            idx[t] = idx[t - 1] + 1;
                        }
                        break;
                    }
                }
                if idx.is_empty() || j == 0 {
                    break;
                }
            }
            if i.is_empty() {
                // constant handled once by the empty exponent vector above
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    fn poly_mul(
        a: &BTreeMap<Vec<u32>, Rat>,
        b: &BTreeMap<Vec<u32>, Rat>,
    ) -> BTreeMap<Vec<u32>, Rat> {
        let mut out: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
        for (ea, ca) in a {
            for (eb, cb) in b {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                *out.entry(e).or_insert_with(Rat::zero) += ca.clone() * cb;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    #[test]
    fn quasi_shuffle_basis_examples() {
        // M_(1) * M_(1) = M_(2) + 2 M_(1,1); derived by expanding in 4
        // variables and re-collecting (checked by the oracle below too).
        let p1 = m(&[1]);
        let got = quasi_shuffle(&p1, &p1);
        let mut want = QSymElem::zero();
        want.add_term(comp(&[2]), Rat::one());
        want.add_term(comp(&[1, 1]), rat_int(2));
        assert_eq!(got, want);

        let got = quasi_shuffle(&m(&[2]), &m(&[1]));
        let mut want = QSymElem::zero();
        want.add_term(comp(&[3]), Rat::one());
        want.add_term(comp(&[2, 1]), Rat::one());
        want.add_term(comp(&[1, 2]), Rat::one());
        assert_eq!(got, want);
    }

    #[test]
    fn quasi_shuffle_unit_law() {
        let u = &(&m(&[2, 1]) + &m(&[1])) + &QSymElem::scalar(rat(3, 2));
        assert_eq!(quasi_shuffle(&u, &QSymElem::one()), u);
        assert_eq!(quasi_shuffle(&QSymElem::one(), &u), u);
    }

    #[test]
    fn quasi_shuffle_matches_finite_variable_oracle() {
        // the product must agree with honest polynomial multiplication in
        // enough variables (nvars >= total degree suffices)
        let elems = vec![m(&[1]), m(&[2]), m(&[1, 1]), m(&[2, 1]), complete(2), elementary(2)];
        for u in &elems {
            for v in &elems {
                let prod = quasi_shuffle(u, v);
                let n = (u.degree() + v.degree()) as usize;
                assert_eq!(
                    poly_in_vars(&prod, n),
                    poly_mul(&poly_in_vars(u, n), &poly_in_vars(v, n)),
                    "oracle mismatch for {u} * {v}"
                );
            }
        }
    }

    #[test]
    fn quasi_shuffle_commutative_associative() {
        let a = m(&[2]);
        let b = m(&[1, 1]);
        let c = m(&[3, 1]);
        assert_eq!(quasi_shuffle(&a, &b), quasi_shuffle(&b, &a));
        assert_eq!(
            quasi_shuffle(&quasi_shuffle(&a, &b), &c),
            quasi_shuffle(&a, &quasi_shuffle(&b, &c))
        );
    }

    #[test]
    fn generator_examples() {
        assert_eq!(elementary(2), m(&[1, 1]));
        assert_eq!(
            n_family(3, 2).unwrap(),
            &m(&[2, 1]) + &m(&[1, 2])
        );
        // h_2 = m_(2) + m_(1,1) = M_(2) + M_(1,1)
        assert_eq!(complete(2), &m(&[2]) + &m(&[1, 1]));
        assert_eq!(powersum(1), m(&[1]));
        assert_eq!(monomial_partition(&Partition::new(vec![2, 1])), &m(&[2, 1]) + &m(&[1, 2]));
        assert!(n_family(2, 3).is_err());
        assert_eq!(n_family(0, 0).unwrap(), QSymElem::one());
        assert!(n_family(3, 0).unwrap().is_zero());
    }

    #[test]
    fn generator_n_family_relations() {
        for k in 1..=8u32 {
            let mut sum = QSymElem::zero();
            for mm in 1..=k {
                sum = &sum + &n_family(k, mm).unwrap();
            }
            assert_eq!(sum, complete(k), "h_{k} as sum of N");
            assert_eq!(n_family(k, k).unwrap(), elementary(k), "e_{k} = N({k},{k})");
            assert_eq!(n_family(k, 1).unwrap(), powersum(k), "p_{k} = N({k},1)");
        }
    }

    #[test]
    fn is_symmetric_examples() {
        assert!(!m(&[2, 1]).is_symmetric());
        assert!((&m(&[2, 1]) + &m(&[1, 2])).is_symmetric());
        assert!(elementary(3).is_symmetric());
        assert!(complete(4).is_symmetric());
        // partial coefficients break symmetry
        let mut u = m(&[2, 1]);
        u.add_term(comp(&[1, 2]), rat(1, 2));
        assert!(!u.is_symmetric());
    }

    #[test]
    fn specialize_examples() {
        // e_2 at n=2: single product 1 * (1/2)
        assert_eq!(elementary(2).specialize_at(2), rat(1, 2));
        // p_2 at n=3: 1 + 1/4 + 1/9
        assert_eq!(powersum(2).specialize_at(3), rat(49, 36));
        // h_2 at n=2: 1 + 1/2 + 1/4
        assert_eq!(complete(2).specialize_at(2), rat(7, 4));
        // constant term at n=0
        assert_eq!(complete(3).specialize_at(0), Rat::zero());
        assert_eq!(QSymElem::one().specialize_at(0), Rat::one());
    }

    #[test]
    fn specialize_stream_is_incremental() {
        let u = &complete(2) + &m(&[3]);
        let mut s = SpecializeStream::new(&u);
        for n in 0..=6u64 {
            assert_eq!(s.next_value(), u.specialize_at(n), "at n={n}");
        }
    }

    #[test]
    fn float_stream_tracks_exact() {
        let u = quasi_shuffle(&powersum(1), &complete(2));
        let mut fs = FloatSpecializeStream::new(&u);
        let mut es = SpecializeStream::new(&u);
        for n in 0..=100u64 {
            let f = fs.next_value();
            let e = crate::rat::rat_to_f64(&es.next_value());
            assert!(
                (f - e).abs() <= 1e-12 * e.abs().max(1.0),
                "float/exact drift at n={n}: {f} vs {e}"
            );
        }
    }

    #[test]
    fn specialization_is_algebra_homomorphism() {
        let elems = vec![m(&[1]), m(&[2]), elementary(2), complete(2), m(&[2, 1]), m(&[1, 1, 2])];
        for u in &elems {
            for v in &elems {
                let prod = quasi_shuffle(u, v);
                for n in 0..=12u64 {
                    assert_eq!(
                        prod.specialize_at(n),
                        u.specialize_at(n) * v.specialize_at(n),
                        "homomorphism fails for {u} * {v} at n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn shift_identity_runs_one_step() {
        // h_k(a_1,...,a_{n+1}) = sum_j h_{k-j}(a_1,...,a_n) a_{n+1}^j
        // on a_i = 1/i.  The analogous statement with a_n^j in place of
        // a_{n+1}^j fails; see the audit.
        for k in 1..=5u32 {
            for n in 1..=10u64 {
                let lhs = complete(k).specialize_at(n + 1);
                let mut rhs = Rat::zero();
                let a = Rat::new(1.into(), (n + 1).into());
                let mut apow = Rat::one();
                for j in 0..=k {
                    rhs += complete(k - j).specialize_at(n) * apow.clone();
                    apow *= a.clone();
                }
                assert_eq!(lhs, rhs, "shift identity fails at k={k}, n={n}");
            }
        }
    }

    #[test]
    fn display_roundtrips_through_sign_handling() {
        let mut u = m(&[2, 1]);
        u.add_term(comp(&[3]), rat(-1, 2));
        u.add_term(Composition::empty(), rat_int(5));
        assert_eq!(format!("{u}"), "5 + M[2,1] - 1/2*M[3]");
    }
}
