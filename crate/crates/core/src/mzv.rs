//! Formal polynomial expressions in multiple-zeta symbols and their
//! rewrite rules.
//!
//! A zeta symbol is indexed by an admissible composition `(i_1,...,i_k)`
//! (first entry at least 2), standing for the nested sum over
//! `n_1 > n_2 > ... > n_k >= 1` of the product `n_j^{-i_j}`; the first
//! exponent belongs to the outermost (largest) summation index.  An
//! expression is a finitely supported rational combination of monomials,
//! each monomial a multiset of such compositions; the empty monomial is
//! the constant term.
//!
//! Rewrites provided here: duality canonicalization, weight/depth
//! aggregates, the derivation relation, Euler's reduction of
//! double zetas ending in 1 (with the sign adjudicated numerically, see
//! [`adjudicated_euler_sign`]), height-one reduction through the
//! bivariate generating function, and stuffle expansion of products.

use crate::composition::{dual_canonical, enumerate_admissible, Composition};
use crate::error::Error;
use crate::qsym::{quasi_shuffle, QSymElem};
use crate::rat::{binomial_rat, is_zero, rat, rat_int, Rat};
use crate::Result;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

/// A multiset of admissible compositions; the empty multiset is the
/// constant monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MzvMonomial {
    factors: Vec<Composition>,
}

impl MzvMonomial {
    pub fn unit() -> Self {
        MzvMonomial::default()
    }

    pub fn single(i: Composition) -> Result<Self> {
        if !i.is_admissible() {
            return Err(Error::NotAdmissible(i.text()));
        }
        Ok(MzvMonomial { factors: vec![i] })
    }

    pub fn from_factors(mut factors: Vec<Composition>) -> Result<Self> {
        for f in &factors {
            if !f.is_admissible() {
                return Err(Error::NotAdmissible(f.text()));
            }
        }
        factors.sort();
        Ok(MzvMonomial { factors })
    }

    pub fn factors(&self) -> &[Composition] {
        &self.factors
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn weight(&self) -> u32 {
        self.factors.iter().map(|f| f.weight()).sum()
    }

    fn merged(&self, rhs: &MzvMonomial) -> MzvMonomial {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&rhs.factors);
        factors.sort();
        MzvMonomial { factors }
    }
}

/// A polynomial over the rationals in formal zeta symbols.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MzvExpr {
    terms: BTreeMap<MzvMonomial, Rat>,
}

impl MzvExpr {
    pub fn zero() -> Self {
        MzvExpr::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut e = MzvExpr::zero();
        e.add_term(MzvMonomial::unit(), c);
        e
    }

    pub fn one() -> Self {
        MzvExpr::constant(Rat::one())
    }

    /// The symbol `zeta(I)`; rejects non-admissible compositions.
    pub fn zeta(i: Composition) -> Result<Self> {
        Ok(MzvExpr::from_monomial(MzvMonomial::single(i)?, Rat::one()))
    }

    /// `zeta(i1, ..., ik)` from raw parts.
    pub fn zeta_of(parts: &[u32]) -> Result<Self> {
        MzvExpr::zeta(Composition::try_new(parts.to_vec())?)
    }

    pub fn from_monomial(m: MzvMonomial, c: Rat) -> Self {
        let mut e = MzvExpr::zero();
        e.add_term(m, c);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MzvMonomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &MzvMonomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&MzvMonomial::unit())
    }

    pub fn add_term(&mut self, m: MzvMonomial, c: Rat) {
        if is_zero(&c) {
            return;
        }
        match self.terms.entry(m) {
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

    pub fn add(&self, rhs: &MzvExpr) -> MzvExpr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &MzvExpr) -> MzvExpr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> MzvExpr {
        if is_zero(c) {
            return MzvExpr::zero();
        }
        MzvExpr {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c)).collect(),
        }
    }

    /// Formal product (no stuffle expansion; monomials merge as
    /// multisets).
    pub fn mul(&self, rhs: &MzvExpr) -> MzvExpr {
        let mut out = MzvExpr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.merged(mb), ca.clone() * cb);
            }
        }
        out
    }

    /// Every monomial carries at most one composition.
    pub fn is_linear(&self) -> bool {
        self.terms.keys().all(|m| m.degree() <= 1)
    }

    /// All non-constant monomials share one weight; returns it.
    pub fn homogeneous_weight(&self) -> Option<u32> {
        let mut weights = self.terms.keys().filter(|m| !m.is_constant()).map(|m| m.weight());
        let w = weights.next()?;
        if weights.all(|x| x == w) {
            Some(w)
        } else {
            None
        }
    }
}

impl fmt::Display for MzvExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
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
            if m.is_constant() {
                write!(f, "{mag}")?;
                continue;
            }
            let symbols: Vec<String> =
                m.factors().iter().map(|i| format!("z[{}]", i.text())).collect();
            if mag.is_one() {
                write!(f, "{}", symbols.join("*"))?;
            } else {
                write!(f, "{mag}*{}", symbols.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Which sums of zeta symbols of a fixed weight and depth to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateFlavor {
    /// All admissible compositions.
    All,
    /// Those not starting with 2.
    NotStartingWithTwo,
    /// Those starting with exactly `j`.
    StartsWith(u32),
    /// Those ending in 1.
    EndingInOne,
}

/// A sum of all zeta symbols of fixed weight and depth, filtered by
/// flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregateSpec {
    pub weight: u32,
    pub depth: u32,
    pub flavor: AggregateFlavor,
}

impl AggregateSpec {
    pub fn new(weight: u32, depth: u32, flavor: AggregateFlavor) -> Result<Self> {
        if depth == 0 || depth + 1 > weight {
            return Err(Error::InvalidIndex(format!(
                "aggregate needs 1 <= depth <= weight-1, got weight {weight}, depth {depth}"
            )));
        }
        Ok(AggregateSpec { weight, depth, flavor })
    }
}

/// Expand an aggregate into an explicit sum of zeta symbols with
/// coefficient 1.
pub fn expand_aggregate(a: &AggregateSpec) -> MzvExpr {
    let mut out = MzvExpr::zero();
    for c in enumerate_admissible(a.weight, a.depth) {
        let keep = match a.flavor {
            AggregateFlavor::All => true,
            AggregateFlavor::NotStartingWithTwo => c.parts()[0] != 2,
            AggregateFlavor::StartsWith(j) => c.parts()[0] == j,
            AggregateFlavor::EndingInOne => *c.parts().last().unwrap() == 1,
        };
        if keep {
            out.add_term(MzvMonomial::single(c).unwrap(), Rat::one());
        }
    }
    out
}

/// Replace every composition in every monomial by the canonical member
/// of its dual pair.  Idempotent; the numeric value is invariant.
pub fn dual_canonicalize(e: &MzvExpr) -> MzvExpr {
    let mut out = MzvExpr::zero();
    for (m, c) in e.terms() {
        let factors: Vec<Composition> =
            m.factors().iter().map(|i| dual_canonical(i).expect("stored symbols are admissible")).collect();
        out.add_term(MzvMonomial::from_factors(factors).unwrap(), c.clone());
    }
    out
}

/// Both sides of the derivation relation instantiated at an admissible
/// composition: raising each exponent by one on the left, splitting each
/// exponent on the right.  Both sides are weight-homogeneous of weight
/// `weight(I) + 1`.
pub fn derivation_relation(i: &Composition) -> Result<(MzvExpr, MzvExpr)> {
    if !i.is_admissible() {
        return Err(Error::NotAdmissible(i.text()));
    }
    let parts = i.parts();
    let k = parts.len();
    let mut lhs = MzvExpr::zero();
    let mut rhs = MzvExpr::zero();
    for j in 0..k {
        let mut raised = parts.to_vec();
        raised[j] += 1;
        lhs.add_term(MzvMonomial::single(Composition::new(raised)).unwrap(), Rat::one());
        for p in 1..parts[j] {
            let mut split = Vec::with_capacity(k + 1);
            split.extend_from_slice(&parts[..j]);
            split.push(parts[j] - p + 1);
            split.push(p);
            split.extend_from_slice(&parts[j + 1..]);
            rhs.add_term(MzvMonomial::single(Composition::new(split)).unwrap(), Rat::one());
        }
    }
    Ok((lhs, rhs))
}

/// The sign in front of the cross-term sum of the double-zeta reduction
/// `zeta(n,1) = (n/2) zeta(n+1) + s * (1/2) sum zeta(n-i) zeta(i+1)`.
///
/// Both candidate signs appear in print; the two candidates differ by
/// `zeta(2)^2 ~ 2.7` already at `n = 3`, so a short direct double sum of
/// `zeta(3,1)` settles the question.  The verdict is computed once and
/// reused; the audit reports it alongside the evidence.
pub fn adjudicated_euler_sign() -> i64 {
    static SIGN: OnceLock<i64> = OnceLock::new();
    *SIGN.get_or_init(|| {
        let direct = direct_zeta31(4000);
        let z4 = std::f64::consts::PI.powi(4) / 90.0;
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        let plus = 1.5 * z4 + 0.5 * z2 * z2;
        let minus = 1.5 * z4 - 0.5 * z2 * z2;
        if (direct - minus).abs() < (direct - plus).abs() {
            -1
        } else {
            1
        }
    })
}

/// Direct double summation of `zeta(3,1)` to `N` outer terms (tail is
/// below `1e-5` already at `N = 4000`).
fn direct_zeta31(n: u64) -> f64 {
    let mut inner = 0.0; // H_{m-1}
    let mut sum = 0.0;
    for m in 1..=n {
        if m > 1 {
            inner += 1.0 / (m as f64 - 1.0);
        }
        sum += inner / (m as f64).powi(3);
    }
    sum
}

/// The expansion of a single `zeta(n,1)` symbol under the adjudicated
/// reduction.
fn euler_expansion(n: u32) -> MzvExpr {
    let sign = rat_int(adjudicated_euler_sign());
    let mut out = MzvExpr::zero();
    out.add_term(
        MzvMonomial::single(Composition::new(vec![n + 1])).unwrap(),
        rat(n as i64, 2),
    );
    for i in 1..=n.saturating_sub(2) {
        let m = MzvMonomial::from_factors(vec![
            Composition::new(vec![n - i]),
            Composition::new(vec![i + 1]),
        ])
        .unwrap();
        out.add_term(m, rat(1, 2) * sign.clone());
    }
    out
}

/// Replace every depth-2 factor `zeta(n,1)` with its reduction to
/// products of single zetas.  The output contains no depth-2 symbols
/// ending in 1.
pub fn euler_reduce(e: &MzvExpr) -> MzvExpr {
    let mut out = MzvExpr::zero();
    for (m, c) in e.terms() {
        let mut acc = MzvExpr::constant(c.clone());
        for f in m.factors() {
            let factor_expr = if f.depth() == 2 && f.parts()[1] == 1 {
                euler_expansion(f.parts()[0])
            } else {
                MzvExpr::zeta(f.clone()).unwrap()
            };
            acc = acc.mul(&factor_expr);
        }
        out = out.add(&acc);
    }
    out
}

/// Default truncation bound for [`height_one_reduce`].
pub const HEIGHT_ONE_TRUNCATION: u32 = 12;

/// Express the height-one value `zeta(m+1, 1, ..., 1)` (`n-1` trailing
/// ones) as a polynomial in single zeta symbols.
///
/// Extracts the coefficient of `s^m t^n` in the truncated bivariate
/// series `1 - exp( sum_{j>=2} (zeta(j)/j) (s^j + t^j - (s+t)^j) )` over
/// the polynomial ring in zeta symbols.
pub fn height_one_reduce(m: u32, n: u32) -> Result<MzvExpr> {
    height_one_reduce_bounded(m, n, HEIGHT_ONE_TRUNCATION)
}

pub fn height_one_reduce_bounded(m: u32, n: u32, bound: u32) -> Result<MzvExpr> {
    if m < 1 || n < 1 {
        return Err(Error::InvalidIndex("height-one reduction needs m, n >= 1".into()));
    }
    if m + n > bound {
        return Err(Error::TruncationExceeded { requested: m + n, bound });
    }
    let b = bound as usize;
    // grid[a][c] = coefficient of s^a t^c, kept for a + c <= b
    let zero_grid = || vec![vec![MzvExpr::zero(); b + 1]; b + 1];

    let mut x = zero_grid();
    for j in 2..=bound {
        let zj = MzvExpr::zeta_of(&[j]).unwrap().scale(&rat(1, j as i64));
        for a in 1..j {
            let c = j - a;
            let coeff = zj.scale(&-binomial_rat(j, a));
            x[a as usize][c as usize] = x[a as usize][c as usize].add(&coeff);
        }
    }

    // exp(x) truncated; x has no terms of total degree < 2
    let mut exp = zero_grid();
    exp[0][0] = MzvExpr::one();
    let mut power = zero_grid();
    power[0][0] = MzvExpr::one();
    let mut kfact = Rat::one();
    for k in 1..=(bound / 2).max(1) {
        power = grid_mul(&power, &x, b);
        kfact *= rat_int(k as i64);
        let inv = Rat::one() / kfact.clone();
        for a in 0..=b {
            for c in 0..=(b - a) {
                if !power[a][c].is_zero() {
                    let scaled = power[a][c].scale(&inv);
                    exp[a][c] = exp[a][c].add(&scaled);
                }
            }
        }
    }

    // 1 - exp at (m, n) is minus the exp coefficient for (m, n) != (0, 0)
    Ok(exp[m as usize][n as usize].scale(&-Rat::one()))
}

fn grid_mul(a: &[Vec<MzvExpr>], b: &[Vec<MzvExpr>], bound: usize) -> Vec<Vec<MzvExpr>> {
    let mut out = vec![vec![MzvExpr::zero(); bound + 1]; bound + 1];
    for i in 0..=bound {
        for j in 0..=(bound - i) {
            if a[i][j].is_zero() {
                continue;
            }
            for k in 0..=(bound - i - j) {
                for l in 0..=(bound - i - j - k) {
                    if b[k][l].is_zero() {
                        continue;
                    }
                    let prod = a[i][j].mul(&b[k][l]);
                    out[i + k][j + l] = out[i + k][j + l].add(&prod);
                }
            }
        }
    }
    out
}

/// Rewrite every monomial of degree two or more into a linear
/// combination of single zeta symbols using the stuffle product of the
/// underlying nested sums.  The numeric value is invariant and the
/// output is linear.
pub fn expand_products(e: &MzvExpr) -> MzvExpr {
    let mut out = MzvExpr::zero();
    for (m, c) in e.terms() {
        match m.degree() {
            0 | 1 => out.add_term(m.clone(), c.clone()),
            _ => {
                // multiply in the quasi-symmetric monomial basis; a zeta
                // composition corresponds to its reversal there
                let mut acc = QSymElem::one();
                for f in m.factors() {
                    acc = quasi_shuffle(&acc, &QSymElem::monomial(f.reversed()));
                }
                for (k, v) in acc.terms() {
                    out.add_term(
                        MzvMonomial::single(k.reversed()).expect("stuffle keeps admissibility"),
                        c.clone() * v,
                    );
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(parts: &[u32]) -> Composition {
        Composition::new(parts.to_vec())
    }

    fn z(parts: &[u32]) -> MzvExpr {
        MzvExpr::zeta_of(parts).unwrap()
    }

    #[test]
    fn monomials_reject_inadmissible() {
        assert!(MzvExpr::zeta_of(&[1, 2]).is_err());
        assert!(MzvMonomial::single(Composition::empty()).is_err());
    }

    #[test]
    fn aggregate_expansion() {
        let a = AggregateSpec::new(5, 2, AggregateFlavor::All).unwrap();
        assert_eq!(expand_aggregate(&a), z(&[4, 1]).add(&z(&[3, 2])).add(&z(&[2, 3])));
        let t = AggregateSpec::new(5, 2, AggregateFlavor::NotStartingWithTwo).unwrap();
        assert_eq!(expand_aggregate(&t), z(&[4, 1]).add(&z(&[3, 2])));
        let d3 = AggregateSpec::new(4, 3, AggregateFlavor::All).unwrap();
        assert_eq!(expand_aggregate(&d3), z(&[2, 1, 1]));
        let r = AggregateSpec::new(5, 2, AggregateFlavor::EndingInOne).unwrap();
        assert_eq!(expand_aggregate(&r), z(&[4, 1]));
        let s = AggregateSpec::new(5, 2, AggregateFlavor::StartsWith(3)).unwrap();
        assert_eq!(expand_aggregate(&s), z(&[3, 2]));
        assert!(AggregateSpec::new(4, 4, AggregateFlavor::All).is_err());
    }

    #[test]
    fn dual_canonicalize_examples() {
        assert_eq!(dual_canonicalize(&z(&[2, 1])), z(&[3]));
        assert_eq!(dual_canonicalize(&z(&[3, 1])), z(&[3, 1]));
        let e = MzvExpr::constant(rat_int(5)).add(&z(&[2]));
        assert_eq!(dual_canonicalize(&e), e);
        // idempotent over a weight range
        for w in 2..=8 {
            for c in enumerate_admissible(w, 2).into_iter().chain(enumerate_admissible(w, 3)) {
                let once = dual_canonicalize(&MzvExpr::zeta(c).unwrap());
                assert_eq!(dual_canonicalize(&once), once);
            }
        }
    }

    #[test]
    fn derivation_examples() {
        let (l, r) = derivation_relation(&comp(&[2])).unwrap();
        assert_eq!(l, z(&[3]));
        assert_eq!(r, z(&[2, 1]));

        let (l, r) = derivation_relation(&comp(&[3])).unwrap();
        assert_eq!(l, z(&[4]));
        assert_eq!(r, z(&[3, 1]).add(&z(&[2, 2])));

        // at (2,1): the left side raises each slot, the right side can
        // only split the leading 2
        let (l, r) = derivation_relation(&comp(&[2, 1])).unwrap();
        assert_eq!(l, z(&[3, 1]).add(&z(&[2, 2])));
        assert_eq!(r, z(&[2, 1, 1]));

        assert_eq!(l.homogeneous_weight(), Some(4));
        assert_eq!(r.homogeneous_weight(), Some(4));
        assert!(derivation_relation(&comp(&[1, 2])).is_err());
    }

    #[test]
    fn euler_sign_is_minus() {
        assert_eq!(adjudicated_euler_sign(), -1);
    }

    #[test]
    fn euler_reduce_examples() {
        // empty cross sum at n=2
        assert_eq!(euler_reduce(&z(&[2, 1])), z(&[3]));
        // n=3: (3/2) z4 - (1/2) z2^2
        let got = euler_reduce(&z(&[3, 1]));
        let mut want = z(&[4]).scale(&rat(3, 2));
        want.add_term(
            MzvMonomial::from_factors(vec![comp(&[2]), comp(&[2])]).unwrap(),
            rat(-1, 2),
        );
        assert_eq!(got, want);
        // n=4: the two cross terms z3*z2 and z2*z3 merge into one monomial
        let got = euler_reduce(&z(&[4, 1]).scale(&rat_int(2)));
        let mut want = z(&[5]).scale(&rat_int(4));
        want.add_term(
            MzvMonomial::from_factors(vec![comp(&[2]), comp(&[3])]).unwrap(),
            rat_int(-2),
        );
        assert_eq!(got, want);
        // no z[n,1] symbols remain
        for (m, _) in got.terms() {
            for f in m.factors() {
                assert!(!(f.depth() == 2 && f.parts()[1] == 1));
            }
        }
    }

    #[test]
    fn height_one_examples() {
        assert_eq!(height_one_reduce(1, 1).unwrap(), z(&[2]));
        assert_eq!(height_one_reduce(2, 1).unwrap(), z(&[3]));
        // zeta(3,1) via the generating function equals the Euler route
        assert_eq!(height_one_reduce(2, 2).unwrap(), euler_reduce(&z(&[3, 1])));
        assert!(height_one_reduce(10, 3).is_err());
        assert!(height_one_reduce(0, 2).is_err());
    }

    #[test]
    fn height_one_weight_homogeneous() {
        for m in 1..=4u32 {
            for n in 1..=4u32 {
                let e = height_one_reduce(m, n).unwrap();
                assert_eq!(e.homogeneous_weight(), Some(m + n), "weight at ({m},{n})");
            }
        }
    }

    #[test]
    fn expand_products_examples() {
        let sq = z(&[2]).mul(&z(&[2]));
        let got = expand_products(&sq);
        let want = z(&[2, 2]).scale(&rat_int(2)).add(&z(&[4]));
        assert_eq!(got, want);

        let got = expand_products(&z(&[2]).mul(&z(&[3])));
        let want = z(&[2, 3]).add(&z(&[3, 2])).add(&z(&[5]));
        assert_eq!(got, want);

        assert_eq!(expand_products(&z(&[4])), z(&[4]));
        assert!(got.is_linear());

        // triple product stays linear and weight-homogeneous
        let triple = z(&[2]).mul(&z(&[2])).mul(&z(&[3]));
        let e = expand_products(&triple);
        assert!(e.is_linear());
        assert_eq!(e.homogeneous_weight(), Some(7));
    }

    #[test]
    fn display_format() {
        let mut e = z(&[6]).scale(&rat_int(10));
        e.add_term(
            MzvMonomial::from_factors(vec![comp(&[3]), comp(&[3])]).unwrap(),
            rat(1, 2),
        );
        assert_eq!(format!("{e}"), "1/2*z[3]*z[3] + 10*z[6]");
        assert_eq!(format!("{}", MzvExpr::zero()), "0");
        let c = MzvExpr::constant(rat(5, 4)).sub(&z(&[2]));
        assert_eq!(format!("{c}"), "5/4 - z[2]");
    }
}
