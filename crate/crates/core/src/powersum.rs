//! Polynomials in the power sums.
//!
//! [`PowerSumPoly`] is a multivariate polynomial with exact rational
//! coefficients in abstract variables `y_1, y_2, ...`, where `y_r` stands
//! for the power sum `p_r` (and specializes to the generalized harmonic
//! number `H_n^{(r)}`).  The classical polynomials `P_n` and `Q_n`
//! expressing `e_n` and `h_n` in the power sums live here, together with
//! the change of basis from any symmetric element to the power sums.

use crate::composition::{enumerate_partitions, Partition};
use crate::error::Error;
use crate::qsym::{generators, quasi_shuffle, QSymElem};
use crate::rat::{factorial, is_zero, Rat};
use crate::Result;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Which of the two classical families to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PqKind {
    /// `e_n = P_n(p_1, ..., p_n)`; alternating signs.
    P,
    /// `h_n = Q_n(p_1, ..., p_n)`; all signs positive.
    Q,
}

/// A polynomial in `y_1, y_2, ...` with rational coefficients.  Each
/// monomial is the multiset of variable indices, stored as a partition
/// (the empty partition is the constant monomial).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PowerSumPoly {
    terms: BTreeMap<Partition, Rat>,
}

impl PowerSumPoly {
    pub fn zero() -> Self {
        PowerSumPoly::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = PowerSumPoly::zero();
        p.add_term(Partition::empty(), c);
        p
    }

    /// The variable `y_r`.
    pub fn var(r: u32) -> Self {
        let mut p = PowerSumPoly::zero();
        p.add_term(Partition::new(vec![r]), Rat::one());
        p
    }

    pub fn add_term(&mut self, m: Partition, c: Rat) {
        if is_zero(&c) {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(Rat::zero);
        *e += c;
        if is_zero(e) {
            // re-fetch key to remove; simplest is retain
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Partition, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Partition) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, rhs: &PowerSumPoly) -> PowerSumPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> PowerSumPoly {
        if is_zero(c) {
            return PowerSumPoly::zero();
        }
        PowerSumPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &PowerSumPoly) -> PowerSumPoly {
        let mut out = PowerSumPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut parts = ma.parts().to_vec();
                parts.extend_from_slice(mb.parts());
                let m = if parts.is_empty() { Partition::empty() } else { Partition::new(parts) };
                out.add_term(m, ca.clone() * cb);
            }
        }
        out
    }

    /// Substitute exact values for the variables: `values[r-1]` is the
    /// value of `y_r`.  Variables beyond the slice evaluate to zero.
    pub fn eval(&self, values: &[Rat]) -> Rat {
        let mut total = Rat::zero();
        for (m, c) in &self.terms {
            let mut prod = c.clone();
            for &r in m.parts() {
                match values.get((r - 1) as usize) {
                    Some(v) => prod *= v.clone(),
                    None => {
                        prod = Rat::zero();
                        break;
                    }
                }
            }
            total += prod;
        }
        total
    }

    /// Substitute `y_r -> p_r` and multiply out in the quasi-symmetric
    /// algebra.
    pub fn eval_in_qsym(&self) -> QSymElem {
        let mut total = QSymElem::zero();
        for (m, c) in &self.terms {
            let mut prod = QSymElem::one();
            for &r in m.parts() {
                prod = quasi_shuffle(&prod, &generators::powersum(r));
            }
            total = &total + &prod.scale(c);
        }
        total
    }

    /// Largest variable index that occurs.
    pub fn max_var(&self) -> u32 {
        self.terms.keys().filter_map(|m| m.parts().first().copied()).max().unwrap_or(0)
    }
}

impl fmt::Display for PowerSumPoly {
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
            if m.is_empty() {
                write!(f, "{mag}")?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            // group repeated variables into powers
            let mut parts = m.parts().to_vec();
            parts.reverse(); // ascending for display
            let mut i = 0;
            let mut pieces = Vec::new();
            while i < parts.len() {
                let v = parts[i];
                let mut e = 0;
                while i < parts.len() && parts[i] == v {
                    e += 1;
                    i += 1;
                }
                if e == 1 {
                    pieces.push(format!("y{v}"));
                } else {
                    pieces.push(format!("y{v}^{e}"));
                }
            }
            write!(f, "{}", pieces.join("*"))?;
        }
        Ok(())
    }
}

/// `z_lambda = prod_i i^{m_i} m_i!` for the multiplicity vector of the
/// partition.
fn z_lambda(p: &Partition) -> BigInt {
    let mut z = BigInt::one();
    for (i, &m) in p.multiplicities().iter().enumerate() {
        if m == 0 {
            continue;
        }
        z *= BigInt::from((i + 1) as u64).pow(m) * factorial(m);
    }
    z
}

/// The polynomial `P_n` or `Q_n`: sum over partitions `lambda` of `n` of
/// `(+-1) / z_lambda` times the corresponding power-sum monomial, where
/// the sign for `P` is `(-1)^{number of even parts}`.
pub fn pq_poly(kind: PqKind, n: u32) -> PowerSumPoly {
    if n == 0 {
        return PowerSumPoly::constant(Rat::one());
    }
    let mut out = PowerSumPoly::zero();
    for lambda in enumerate_partitions(n) {
        let even_parts = lambda.parts().iter().filter(|&&p| p % 2 == 0).count();
        let sign = match kind {
            PqKind::Q => 1,
            PqKind::P => {
                if even_parts % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
        };
        let coeff = Rat::new(BigInt::from(sign), z_lambda(&lambda));
        out.add_term(lambda, coeff);
    }
    out
}

/// Express a symmetric element as a polynomial in the power sums.
///
/// Works degree by degree: the products `p_lambda` over partitions of
/// each degree form a basis of the symmetric functions of that degree,
/// so the coordinates are recovered by an exact linear solve against the
/// monomial-basis expansion of each product.
pub fn to_powersum_poly(u: &QSymElem) -> Result<PowerSumPoly> {
    if !u.is_symmetric() {
        return Err(Error::NotSymmetric(u.to_string()));
    }
    let mut out = PowerSumPoly::zero();
    let mut degrees: Vec<u32> = u.terms().map(|(i, _)| i.weight()).collect();
    degrees.sort_unstable();
    degrees.dedup();
    for d in degrees {
        let part = u.homogeneous_part(d);
        if d == 0 {
            out.add_term(Partition::empty(), part.coeff(&crate::composition::Composition::empty()));
            continue;
        }
        let partitions = enumerate_partitions(d);
        let columns: Vec<QSymElem> = partitions
            .iter()
            .map(|l| {
                let mut prod = QSymElem::one();
                for &r in l.parts() {
                    prod = quasi_shuffle(&prod, &generators::powersum(r));
                }
                prod
            })
            .collect();
        let coords = solve_in_basis(&columns, &part)?;
        for (lambda, c) in partitions.into_iter().zip(coords) {
            out.add_term(lambda, c);
        }
    }
    Ok(out)
}

/// Solve `sum_j x_j col_j = target` exactly, where all elements live in
/// the monomial basis.  Errors if the system is inconsistent.
fn solve_in_basis(columns: &[QSymElem], target: &QSymElem) -> Result<Vec<Rat>> {
    use std::collections::BTreeSet;
    let mut rows: BTreeSet<crate::composition::Composition> = BTreeSet::new();
    for col in columns {
        for (i, _) in col.terms() {
            rows.insert(i.clone());
        }
    }
    for (i, _) in target.terms() {
        rows.insert(i.clone());
    }
    let rows: Vec<_> = rows.into_iter().collect();
    let ncols = columns.len();
    let mut mat: Vec<Vec<Rat>> = rows
        .iter()
        .map(|r| {
            let mut row: Vec<Rat> = columns.iter().map(|c| c.coeff(r)).collect();
            row.push(target.coeff(r));
            row
        })
        .collect();

    let nrows = mat.len();
    let mut pivot_of_col = vec![usize::MAX; ncols];
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, p);
        let inv = mat[rank][col].clone();
        for c in col..=ncols {
            let v = mat[rank][c].clone() / inv.clone();
            mat[rank][c] = v;
        }
        for r in 0..nrows {
            if r != rank && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in col..=ncols {
                    let v = mat[r][c].clone() - f.clone() * mat[rank][c].clone();
                    mat[r][c] = v;
                }
            }
        }
        pivot_of_col[col] = rank;
        rank += 1;
    }
    // inconsistency check
    for r in rank..nrows {
        if !mat[r][ncols].is_zero() {
            return Err(Error::NotSymmetric(
                "element is not in the span of power-sum products".into(),
            ));
        }
    }
    let mut x = vec![Rat::zero(); ncols];
    for col in 0..ncols {
        if pivot_of_col[col] != usize::MAX {
            x[col] = mat[pivot_of_col[col]][ncols].clone();
        }
    }
    Ok(x)
}
