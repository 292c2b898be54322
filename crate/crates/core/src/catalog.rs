//! Registry of closed-form identity families, the verification runner,
//! and report serialization.
//!
//! Each family pairs a left-hand side (one or more concrete series
//! descriptors) with a right-hand-side zeta expression, parameterized by
//! small integers.  `verify` evaluates both sides numerically — the left
//! by direct summation, the right through the zeta evaluator — and
//! compares them within declared tolerances.  Families carry their own
//! tolerance and term budget, tuned once against the acceptance grid and
//! committed with the registry.

use crate::composition::Composition;
use crate::eta::EtaSpec;
use crate::error::Error;
use crate::mzv::{expand_aggregate, AggregateFlavor, AggregateSpec, MzvExpr, MzvMonomial};
use crate::qsym::{generators, quasi_shuffle, QSymElem};
use crate::rat::{binomial_rat, factorial, rat, rat_int, Rat};
use crate::series::{eta_numeric_with, LhsDescriptor, NumericValue, SumOptions};
use crate::zeta_num::{expr_value_with, MzvCache};
use crate::Result;
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;
use std::time::Instant;

/// Integer parameters keyed by name (`k`, `l`, `q`, `n`, `s`, `eq`,
/// `idx`).
pub type ParamMap = BTreeMap<String, i64>;

pub fn params(pairs: &[(&str, i64)]) -> ParamMap {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn get(p: &ParamMap, family: &str, key: &str) -> Result<i64> {
    p.get(key).copied().ok_or_else(|| Error::OutOfRange {
        family: family.into(),
        msg: format!("missing parameter `{key}`"),
    })
}

fn reject(family: &str, msg: impl Into<String>) -> Error {
    Error::OutOfRange { family: family.into(), msg: msg.into() }
}

/// One verifiable identity instance.
#[derive(Debug, Clone)]
pub struct Identity {
    pub family: String,
    pub params: ParamMap,
    /// Series descriptors whose values are summed.
    pub lhs: Vec<LhsDescriptor>,
    pub rhs: MzvExpr,
    pub tol: f64,
    pub budget: u64,
}

/// Verification verdict; `Suspect` marks evaluation failures (budget
/// exhaustion, inconsistent extrapolation), never silent passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Suspect,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Suspect => "suspect",
        }
    }
}

/// Outcome of verifying one identity instance.
#[derive(Debug, Clone)]
pub struct Report {
    pub id: String,
    pub params: ParamMap,
    pub lhs: Option<NumericValue>,
    pub rhs: Option<NumericValue>,
    pub difference: f64,
    pub verdict: Verdict,
    pub tol: f64,
    pub runtime_ms: u64,
    pub terms: u64,
    pub note: String,
}

/// A registered identity family.
pub struct IdentityFamily {
    pub name: &'static str,
    /// What the identity says, in plain text.
    pub anchor: &'static str,
    pub param_names: &'static [&'static str],
    /// Human description of the declared validity range.
    pub validity: &'static str,
    check: fn(&ParamMap) -> Result<()>,
    lhs: fn(&ParamMap) -> Result<Vec<LhsDescriptor>>,
    rhs: fn(&ParamMap) -> Result<MzvExpr>,
    pub tol: f64,
    pub budget: u64,
    grid: fn() -> Vec<ParamMap>,
}

impl IdentityFamily {
    pub fn acceptance_grid(&self) -> Vec<ParamMap> {
        (self.grid)()
    }
}

// ---- shared expression helpers ----

fn zeta1(n: u32) -> MzvExpr {
    MzvExpr::zeta_of(&[n]).expect("single argument >= 2")
}

fn zeta(parts: &[u32]) -> MzvExpr {
    MzvExpr::zeta_of(parts).expect("admissible composition")
}

fn st_aggregate(weight: u32, depth: u32) -> MzvExpr {
    expand_aggregate(
        &AggregateSpec::new(weight, depth, AggregateFlavor::NotStartingWithTwo).unwrap(),
    )
}

fn sr_aggregate(weight: u32, depth: u32) -> MzvExpr {
    expand_aggregate(&AggregateSpec::new(weight, depth, AggregateFlavor::EndingInOne).unwrap())
}

fn eh_product(k: u32, l: u32) -> QSymElem {
    quasi_shuffle(&generators::elementary(k), &generators::complete(l))
}

fn single(u: QSymElem, spec: &[u32], start: u32) -> Result<Vec<LhsDescriptor>> {
    Ok(vec![LhsDescriptor::new(vec![(u, 0)], EtaSpec::of(spec)?, start)?])
}

fn ones(q: u32) -> Vec<u32> {
    vec![1; q as usize]
}

fn zero_ones(q: u32) -> Vec<u32> {
    let mut v = vec![1; q as usize + 1];
    v[0] = 0;
    v
}

// ---- right-hand sides shared between families ----

/// The three-case value of the series with denominator (n+1)(n+2) on
/// `e_k h_l`, summed from n = 0.
fn ch2_rhs(k: u32, l: u32) -> MzvExpr {
    match l {
        0 => MzvExpr::one(),
        1 => {
            let mut e = MzvExpr::one();
            for j in 0..k {
                e = e.add(&zeta1(k + 1 - j));
            }
            e
        }
        _ => {
            let mut e = MzvExpr::zero();
            for j in 0..=k {
                e = e.add(&zeta1(k + l - j).scale(&binomial_rat(k + l - j, k + 1 - j)));
            }
            e.sub(&zeta1(l))
        }
    }
}

/// `C(k+l+1, k+1) zeta(k+l+1)`, valid for k >= 1 (the k = 0 boundary is
/// an audit target: the true value there is `l zeta(l+1)`).
fn qpnn1_rhs(k: u32, l: u32) -> MzvExpr {
    zeta1(k + l + 1).scale(&binomial_rat(k + l + 1, k + 1))
}

/// The adjudicated-sign value of the `P_k` series over `n^2`:
/// `(k+3)/2 zeta(k+2) - 1/2 sum_{j=2}^{k} zeta(j) zeta(k+2-j)`.
fn pn2_rhs(k: u32) -> MzvExpr {
    let mut e = zeta1(k + 2).scale(&rat(k as i64 + 3, 2));
    let sign = rat_int(crate::mzv::adjudicated_euler_sign());
    for j in 2..=k {
        let m = MzvMonomial::from_factors(vec![
            Composition::new(vec![j]),
            Composition::new(vec![k + 2 - j]),
        ])
        .unwrap();
        e.add_term(m, rat(1, 2) * sign.clone());
    }
    e
}

fn spiess_rhs(k: u32, q: u32) -> MzvExpr {
    let qm1 = q as i64 - 1;
    MzvExpr::constant(Rat::new(1.into(), factorial(q - 1) * num_bigint::BigInt::from(qm1).pow(k + 1)))
}

// ---- the registry ----

macro_rules! family {
    ($name:literal, $anchor:literal, $params:expr, $validity:literal,
     $check:expr, $lhs:expr, $rhs:expr, $tol:literal, $budget:literal, $grid:expr) => {
        IdentityFamily {
            name: $name,
            anchor: $anchor,
            param_names: $params,
            validity: $validity,
            check: $check,
            lhs: $lhs,
            rhs: $rhs,
            tol: $tol,
            budget: $budget,
            grid: $grid,
        }
    };
}

fn grid_pairs(max_total: u32, min_k: u32) -> Vec<ParamMap> {
    let mut out = Vec::new();
    for k in min_k..=max_total {
        for l in 0..=(max_total - k) {
            out.push(params(&[("k", k as i64), ("l", l as i64)]));
        }
    }
    out
}

fn grid_range(key: &'static str, lo: i64, hi: i64) -> Vec<ParamMap> {
    (lo..=hi).map(|v| params(&[(key, v)])).collect()
}

fn grid_range_eq(key: &'static str, lo: i64, hi: i64, eqs: &[i64]) -> Vec<ParamMap> {
    let mut out = Vec::new();
    for v in lo..=hi {
        for &e in eqs {
            out.push(params(&[(key, v), ("eq", e)]));
        }
    }
    out
}

pub fn registry() -> &'static [IdentityFamily] {
    static REG: OnceLock<Vec<IdentityFamily>> = OnceLock::new();
    REG.get_or_init(build_registry)
}

pub fn family(name: &str) -> Result<&'static IdentityFamily> {
    registry()
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownFamily(name.to_string()))
}

/// Instantiate a family at concrete parameters.
pub fn instantiate(name: &str, p: &ParamMap) -> Result<Identity> {
    let f = family(name)?;
    (f.check)(p)?;
    Ok(Identity {
        family: f.name.to_string(),
        params: p.clone(),
        lhs: (f.lhs)(p)?,
        rhs: (f.rhs)(p)?,
        tol: f.tol,
        budget: f.budget,
    })
}

/// The registered right-hand side of a family as a zeta expression
/// without building the series side.
pub fn closed_form(name: &str, p: &ParamMap) -> Result<MzvExpr> {
    let f = family(name)?;
    (f.check)(p)?;
    (f.rhs)(p)
}

fn build_registry() -> Vec<IdentityFamily> {
    vec![
        family!(
            "eulers",
            "sum_{n>=1} H_n/n^2 = 2 zeta(3); sum_{n>=1} H_n/n^3 = (5/4) zeta(4)",
            &["s"],
            "s in {2, 3}",
            |p| {
                let s = get(p, "eulers", "s")?;
                if s == 2 || s == 3 {
                    Ok(())
                } else {
                    Err(reject("eulers", "s must be 2 or 3"))
                }
            },
            |p| single(generators::powersum(1), &[get(p, "eulers", "s")? as u32], 1),
            |p| {
                Ok(match get(p, "eulers", "s")? {
                    2 => zeta1(3).scale(&rat_int(2)),
                    _ => zeta1(4).scale(&rat(5, 4)),
                })
            },
            1e-6,
            1_000_000,
            || grid_range("s", 2, 3)
        ),
        family!(
            "cho-P",
            "sum_{n>=0} P_k(H_n,...,H_n^(k)) / ((n+1)(n+2)) = 1",
            &["k"],
            "k >= 1",
            |p| {
                if get(p, "cho-P", "k")? >= 1 {
                    Ok(())
                } else {
                    Err(reject("cho-P", "k must be >= 1"))
                }
            },
            |p| single(generators::elementary(get(p, "cho-P", "k")? as u32), &[0, 1, 1], 0),
            |_| Ok(MzvExpr::one()),
            1e-6,
            4_000_000,
            || grid_range("k", 1, 4)
        ),
        family!(
            "cho-Q",
            "sum_{n>=0} Q_1 P_k / ((n+1)(n+2)) = 1 + zeta(2) + ... + zeta(k+1)",
            &["k"],
            "k >= 1",
            |p| {
                if get(p, "cho-Q", "k")? >= 1 {
                    Ok(())
                } else {
                    Err(reject("cho-Q", "k must be >= 1"))
                }
            },
            |p| single(eh_product(get(p, "cho-Q", "k")? as u32, 1), &[0, 1, 1], 0),
            |p| Ok(ch2_rhs(get(p, "cho-Q", "k")? as u32, 1)),
            1e-6,
            2_000_000,
            || grid_range("k", 1, 3)
        ),
        family!(
            "ch2",
            "sum_{n>=0} Q_l P_k / ((n+1)(n+2)) in zeta values, three cases by l",
            &["k", "l"],
            "k, l >= 0",
            |p| {
                get(p, "ch2", "k")?;
                get(p, "ch2", "l")?;
                Ok(())
            },
            |p| {
                let (k, l) = (get(p, "ch2", "k")? as u32, get(p, "ch2", "l")? as u32);
                single(eh_product(k, l), &[0, 1, 1], 0)
            },
            |p| Ok(ch2_rhs(get(p, "ch2", "k")? as u32, get(p, "ch2", "l")? as u32)),
            1e-6,
            2_000_000,
            || grid_pairs(5, 0)
        ),
        family!(
            "qpnn1",
            "sum_{n>=1} Q_l P_k / (n(n+1)) = C(k+l+1, k+1) zeta(k+l+1)",
            &["k", "l"],
            "k >= 1, l >= 0 (k = 0 fails by exactly zeta(l+1); see the audit)",
            |p| {
                let (k, l) = (get(p, "qpnn1", "k")?, get(p, "qpnn1", "l")?);
                if k < 1 {
                    return Err(reject(
                        "qpnn1",
                        "k must be >= 1: at k = 0 the stated value exceeds the series \
                         by exactly zeta(l+1) (audited boundary)",
                    ));
                }
                if l < 0 {
                    return Err(reject("qpnn1", "l must be >= 0"));
                }
                Ok(())
            },
            |p| {
                let (k, l) = (get(p, "qpnn1", "k")? as u32, get(p, "qpnn1", "l")? as u32);
                single(eh_product(k, l), &[1, 1], 1)
            },
            |p| Ok(qpnn1_rhs(get(p, "qpnn1", "k")? as u32, get(p, "qpnn1", "l")? as u32)),
            1e-6,
            2_000_000,
            || grid_pairs(5, 1)
        ),
        family!(
            "qn2",
            "sum_{n>=1} Q_k / n^2 = (k+1) zeta(k+2)",
            &["k"],
            "k >= 0",
            |p| {
                if get(p, "qn2", "k")? >= 0 {
                    Ok(())
                } else {
                    Err(reject("qn2", "k must be >= 0"))
                }
            },
            |p| single(generators::complete(get(p, "qn2", "k")? as u32), &[2], 1),
            |p| {
                let k = get(p, "qn2", "k")? as u32;
                Ok(zeta1(k + 2).scale(&rat_int(k as i64 + 1)))
            },
            1e-6,
            2_000_000,
            || grid_range("k", 0, 5)
        ),
        family!(
            "pn2",
            "sum_{n>=1} P_k / n^2 = (k+3)/2 zeta(k+2) - 1/2 sum_j zeta(j) zeta(k+2-j)",
            &["k"],
            "k >= 1 (the k = 0 case fails both sign variants; the cross-term sign is adjudicated)",
            |p| {
                if get(p, "pn2", "k")? >= 1 {
                    Ok(())
                } else {
                    Err(reject("pn2", "k must be >= 1: at k = 0 the stated value is (3/2) zeta(2) \
                                against a series value of zeta(2)"))
                }
            },
            |p| single(generators::elementary(get(p, "pn2", "k")? as u32), &[2], 1),
            |p| Ok(pn2_rhs(get(p, "pn2", "k")? as u32)),
            1e-6,
            2_000_000,
            || grid_range("k", 1, 5)
        ),
        family!(
            "off",
            "sum_{n>=0} Q_l(H_{n+1},...) P_k(H_n,...) / (n+1)^2 = C(l+k+1, l) zeta(l+k+2)",
            &["k", "l"],
            "k, l >= 0",
            |p| {
                get(p, "off", "k")?;
                get(p, "off", "l")?;
                Ok(())
            },
            |p| {
                let (k, l) = (get(p, "off", "k")? as u32, get(p, "off", "l")? as u32);
                Ok(vec![LhsDescriptor::new(
                    vec![(generators::elementary(k), 0), (generators::complete(l), 1)],
                    EtaSpec::of(&[0, 2])?,
                    0,
                )?])
            },
            |p| {
                let (k, l) = (get(p, "off", "k")? as u32, get(p, "off", "l")? as u32);
                Ok(zeta1(l + k + 2).scale(&binomial_rat(l + k + 1, l)))
            },
            1e-6,
            2_000_000,
            || grid_pairs(4, 0)
        ),
        family!(
            "eta111",
            "sum_{n>=1} Q_l P_k / (n(n+1)(n+2)), composed from the (1,1) and (0,1,1) values",
            &["k", "l"],
            "k >= 1, l >= 0 (boundaries at k = 0 and the printed three-case split are audited)",
            |p| {
                let (k, l) = (get(p, "eta111", "k")?, get(p, "eta111", "l")?);
                if k < 1 {
                    return Err(reject(
                        "eta111",
                        "k must be >= 1: the k = 0 column inherits the audited boundary of \
                         the n(n+1) family",
                    ));
                }
                if l < 0 {
                    return Err(reject("eta111", "l must be >= 0"));
                }
                Ok(())
            },
            |p| {
                let (k, l) = (get(p, "eta111", "k")? as u32, get(p, "eta111", "l")? as u32);
                single(eh_product(k, l), &[1, 1, 1], 1)
            },
            |p| {
                let (k, l) = (get(p, "eta111", "k")? as u32, get(p, "eta111", "l")? as u32);
                Ok(qpnn1_rhs(k, l).sub(&ch2_rhs(k, l)).scale(&rat(1, 2)))
            },
            1e-6,
            2_000_000,
            || grid_pairs(4, 1)
        ),
        family!(
            "spiess",
            "sum_{n>=0} P_k / ((n+1)...(n+q)) = 1/((q-1)! (q-1)^{k+1})",
            &["k", "q"],
            "k >= 0, q >= 2",
            |p| {
                let (k, q) = (get(p, "spiess", "k")?, get(p, "spiess", "q")?);
                if k < 0 {
                    return Err(reject("spiess", "k must be >= 0"));
                }
                if q < 2 {
                    return Err(reject("spiess", "q must be >= 2"));
                }
                Ok(())
            },
            |p| {
                let (k, q) = (get(p, "spiess", "k")? as u32, get(p, "spiess", "q")? as u32);
                single(generators::elementary(k), &zero_ones(q), 0)
            },
            |p| Ok(spiess_rhs(get(p, "spiess", "k")? as u32, get(p, "spiess", "q")? as u32)),
            1e-8,
            8_000_000,
            || {
                let mut g = Vec::new();
                for q in 2..=5 {
                    for k in 0..=4 {
                        g.push(params(&[("k", k), ("q", q)]));
                    }
                }
                g
            }
        ),
        family!(
            "tail",
            "sum_{n>=1} P_k / (n(n+1)...(n+q-1)) = (zeta(k+1) - sum_{j=1}^{q-2} j^{-(k+1)})/(q-1)!",
            &["k", "q"],
            "k >= 1, q >= 2",
            |p| {
                let (k, q) = (get(p, "tail", "k")?, get(p, "tail", "q")?);
                if k < 1 {
                    return Err(reject("tail", "k must be >= 1"));
                }
                if q < 2 {
                    return Err(reject("tail", "q must be >= 2"));
                }
                Ok(())
            },
            |p| {
                let (k, q) = (get(p, "tail", "k")? as u32, get(p, "tail", "q")? as u32);
                single(generators::elementary(k), &ones(q), 1)
            },
            |p| {
                let (k, q) = (get(p, "tail", "k")? as u32, get(p, "tail", "q")? as u32);
                let mut e = zeta1(k + 1);
                for j in 1..=q.saturating_sub(2) {
                    let jj = num_bigint::BigInt::from(j).pow(k + 1);
                    e = e.sub(&MzvExpr::constant(Rat::new(1.into(), jj)));
                }
                Ok(e.scale(&Rat::new(1.into(), factorial(q - 1))))
            },
            1e-6,
            2_000_000,
            || {
                let mut g = Vec::new();
                for q in 2..=4 {
                    for k in 1..=3 {
                        g.push(params(&[("k", k), ("q", q)]));
                    }
                }
                g
            }
        ),
        family!(
            "so-cor",
            "sum_{n>=1} H_n^(k) / ((n+1)(n+2)) = zeta(k) - zeta(k-1) + ... +- zeta(2) -+ 1",
            &["k"],
            "k >= 2",
            |p| {
                if get(p, "so-cor", "k")? >= 2 {
                    Ok(())
                } else {
                    Err(reject("so-cor", "k must be >= 2"))
                }
            },
            |p| single(generators::powersum(get(p, "so-cor", "k")? as u32), &[0, 1, 1], 1),
            |p| Ok(alternating_zeta_rhs(get(p, "so-cor", "k")? as u32)),
            1e-6,
            1_000_000,
            || grid_range("k", 2, 6)
        ),
        family!(
            "omp",
            "the (0,1,1) functional on p_n: alternating single zetas",
            &["n"],
            "n >= 1",
            |p| {
                if get(p, "omp", "n")? >= 1 {
                    Ok(())
                } else {
                    Err(reject("omp", "n must be >= 1"))
                }
            },
            |p| single(generators::powersum(get(p, "omp", "n")? as u32), &[0, 1, 1], 1),
            |p| Ok(alternating_zeta_rhs(get(p, "omp", "n")? as u32)),
            1e-6,
            1_000_000,
            || grid_range("n", 1, 6)
        ),
        family!(
            "eta3peh",
            "the n^3 series of H^(k), P_k and Q_k in zeta values",
            &["k", "eq"],
            "k >= 1, eq in {1, 2, 3}",
            |p| {
                let (k, eq) = (get(p, "eta3peh", "k")?, get(p, "eta3peh", "eq")?);
                if k < 1 {
                    return Err(reject("eta3peh", "k must be >= 1"));
                }
                if !(1..=3).contains(&eq) {
                    return Err(reject("eta3peh", "eq must be 1, 2 or 3"));
                }
                Ok(())
            },
            |p| {
                let k = get(p, "eta3peh", "k")? as u32;
                let u = match get(p, "eta3peh", "eq")? {
                    1 => generators::powersum(k),
                    2 => generators::elementary(k),
                    _ => generators::complete(k),
                };
                single(u, &[3], 1)
            },
            |p| {
                let k = get(p, "eta3peh", "k")? as u32;
                Ok(match get(p, "eta3peh", "eq")? {
                    1 => zeta1(k + 3).add(&zeta(&[3, k])),
                    2 => zeta(&[k + 2, 1]).add(&zeta(&[k + 1, 1, 1])),
                    _ => {
                        let mut e = zeta1(k + 3);
                        for j in 2..=k + 1 {
                            e = e.add(&st_aggregate(k + 3, j));
                        }
                        e
                    }
                })
            },
            1e-6,
            1_000_000,
            || grid_range_eq("k", 1, 5, &[1, 2, 3])
        ),
        family!(
            "eta02pe",
            "sum_{n>=1} H_n^(k) / (n+1)^2 = zeta(2,k); sum_{n>=1} P_k / (n+1)^2 = zeta(k+2)",
            &["k", "eq"],
            "k >= 1, eq in {1, 2}",
            |p| {
                let (k, eq) = (get(p, "eta02pe", "k")?, get(p, "eta02pe", "eq")?);
                if k < 1 {
                    return Err(reject("eta02pe", "k must be >= 1"));
                }
                if !(1..=2).contains(&eq) {
                    return Err(reject("eta02pe", "eq must be 1 or 2"));
                }
                Ok(())
            },
            |p| {
                let k = get(p, "eta02pe", "k")? as u32;
                let u = match get(p, "eta02pe", "eq")? {
                    1 => generators::powersum(k),
                    _ => generators::elementary(k),
                };
                single(u, &[0, 2], 1)
            },
            |p| {
                let k = get(p, "eta02pe", "k")? as u32;
                Ok(match get(p, "eta02pe", "eq")? {
                    1 => zeta(&[2, k]),
                    _ => zeta1(k + 2),
                })
            },
            1e-6,
            2_000_000,
            || grid_range_eq("k", 1, 5, &[1, 2])
        ),
        family!(
            "hsq",
            "remark values over (n+1)^2: H_n, H_n^(2), H_n^2 - H_n^(2), H_n^2, and 6 e_3",
            &["idx"],
            "idx in 1..=5",
            |p| {
                if (1..=5).contains(&get(p, "hsq", "idx")?) {
                    Ok(())
                } else {
                    Err(reject("hsq", "idx must be in 1..=5"))
                }
            },
            |p| {
                let p1 = generators::powersum(1);
                let sq = quasi_shuffle(&p1, &p1);
                let u = match get(p, "hsq", "idx")? {
                    1 => p1,
                    2 => generators::powersum(2),
                    3 => &sq - &generators::powersum(2),
                    4 => sq,
                    _ => generators::elementary(3).scale(&rat_int(6)),
                };
                single(u, &[0, 2], 1)
            },
            |p| {
                Ok(match get(p, "hsq", "idx")? {
                    1 => zeta1(3),
                    2 => zeta(&[2, 2]),
                    3 => zeta1(4).scale(&rat_int(2)),
                    4 => zeta1(4).scale(&rat(11, 4)),
                    _ => zeta1(5).scale(&rat_int(6)),
                })
            },
            1e-5,
            2_000_000,
            || grid_range("idx", 1, 5)
        ),
        family!(
            "h-pair",
            "the (0,2) value of h_{k+1} plus the (3) value of h_k equals (k+2) zeta(k+3)",
            &["k"],
            "k >= 0",
            |p| {
                if get(p, "h-pair", "k")? >= 0 {
                    Ok(())
                } else {
                    Err(reject("h-pair", "k must be >= 0"))
                }
            },
            |p| {
                let k = get(p, "h-pair", "k")? as u32;
                Ok(vec![
                    LhsDescriptor::eta(generators::complete(k + 1), EtaSpec::of(&[0, 2])?),
                    LhsDescriptor::eta(generators::complete(k), EtaSpec::of(&[3])?),
                ])
            },
            |p| {
                let k = get(p, "h-pair", "k")? as u32;
                Ok(zeta1(k + 3).scale(&rat_int(k as i64 + 2)))
            },
            1e-6,
            2_000_000,
            || grid_range("k", 0, 5)
        ),
        family!(
            "eta02eh",
            "sum_{n>=0} Q_l P_k/(n+1)^2 = C(l+k+1,k+1) zeta(l+k+2) - sum_p C(p,k) S^R",
            &["k", "l"],
            "k, l >= 0",
            |p| {
                get(p, "eta02eh", "k")?;
                get(p, "eta02eh", "l")?;
                Ok(())
            },
            |p| {
                let (k, l) = (get(p, "eta02eh", "k")? as u32, get(p, "eta02eh", "l")? as u32);
                single(eh_product(k, l), &[0, 2], 0)
            },
            |p| {
                let (k, l) = (get(p, "eta02eh", "k")? as u32, get(p, "eta02eh", "l")? as u32);
                let mut e = zeta1(l + k + 2).scale(&binomial_rat(l + k + 1, k + 1));
                for pp in k..l + k {
                    // depth l+k+1-pp runs from l+1 down to 2
                    e = e.sub(&sr_aggregate(l + k + 2, l + k + 1 - pp).scale(&binomial_rat(pp, k)));
                }
                Ok(e)
            },
            // the right side mixes in the slowest deep zeta values, which
            // caps the practical tolerance below the usual 1e-6
            1e-5,
            6_000_000,
            || grid_pairs(5, 0)
        ),
        family!(
            "eta02sc",
            "H_n P_k and (H_n^2 + H_n^(2)) P_k / 2 over (n+1)^2 in zeta values",
            &["k", "eq"],
            "k >= 1, eq in {1, 2}",
            |p| {
                let (k, eq) = (get(p, "eta02sc", "k")?, get(p, "eta02sc", "eq")?);
                if k < 1 {
                    return Err(reject("eta02sc", "k must be >= 1"));
                }
                if !(1..=2).contains(&eq) {
                    return Err(reject("eta02sc", "eq must be 1 or 2"));
                }
                Ok(())
            },
            |p| {
                let k = get(p, "eta02sc", "k")? as u32;
                let u = match get(p, "eta02sc", "eq")? {
                    1 => quasi_shuffle(&generators::powersum(1), &generators::elementary(k)),
                    _ => quasi_shuffle(&generators::complete(2), &generators::elementary(k)),
                };
                single(u, &[0, 2], 1)
            },
            |p| {
                let k = get(p, "eta02sc", "k")? as u32;
                Ok(match get(p, "eta02sc", "eq")? {
                    1 => zeta1(k + 3)
                        .scale(&rat_int(k as i64 + 2))
                        .sub(&zeta(&[k + 2, 1])),
                    _ => zeta1(k + 4)
                        .scale(&binomial_rat(k + 3, 2))
                        .sub(&zeta(&[k + 3, 1]).scale(&rat_int(k as i64 + 2)))
                        .sub(&zeta(&[k + 2, 2])),
                })
            },
            1e-5,
            2_000_000,
            || grid_range_eq("k", 1, 4, &[1, 2])
        ),
        family!(
            "cof-remark",
            "sum_{n>=1} H_n^4/(n+1)^2 = (859/24) zeta(6) + 3 zeta(3)^2",
            &["idx"],
            "idx in {1, 2} (reduced form, and the four-term pre-reduction form)",
            |p| {
                if (1..=2).contains(&get(p, "cof-remark", "idx")?) {
                    Ok(())
                } else {
                    Err(reject("cof-remark", "idx must be 1 or 2"))
                }
            },
            |p| {
                let _ = p;
                let p1 = generators::powersum(1);
                let sq = quasi_shuffle(&p1, &p1);
                single(quasi_shuffle(&sq, &sq), &[0, 2], 1)
            },
            |p| {
                let z3sq = MzvExpr::from_monomial(
                    MzvMonomial::from_factors(vec![
                        Composition::new(vec![3]),
                        Composition::new(vec![3]),
                    ])
                    .unwrap(),
                    Rat::one(),
                );
                Ok(match get(p, "cof-remark", "idx")? {
                    1 => zeta1(6).scale(&rat(859, 24)).add(&z3sq.scale(&rat_int(3))),
                    _ => zeta1(6)
                        .scale(&rat(100, 3))
                        .add(&z3sq.scale(&rat_int(4)))
                        .add(&zeta(&[2, 4]))
                        .add(&zeta(&[2, 2, 2]).scale(&rat_int(2))),
                })
            },
            1e-5,
            8_000_000,
            || grid_range("idx", 1, 2)
        ),
        family!(
            "enh1",
            "sum_{n>=1} e_{n-1} h_1 specialized over n^2 = zeta(n,2) + n zeta(n+1,1) + (n+1) zeta(n+2)",
            &["n"],
            "n >= 2",
            |p| {
                if get(p, "enh1", "n")? >= 2 {
                    Ok(())
                } else {
                    Err(reject("enh1", "n must be >= 2"))
                }
            },
            |p| {
                let n = get(p, "enh1", "n")? as u32;
                single(eh_product(n - 1, 1), &[2], 1)
            },
            |p| {
                let n = get(p, "enh1", "n")? as u32;
                Ok(zeta(&[n, 2])
                    .add(&zeta(&[n + 1, 1]).scale(&rat_int(n as i64)))
                    .add(&zeta1(n + 2).scale(&rat_int(n as i64 + 1))))
            },
            1e-6,
            2_000_000,
            || grid_range("n", 2, 6)
        ),
        family!(
            "eta002",
            "the (0,0,2) functional on e_k and p_k in single zetas",
            &["k", "eq"],
            "k >= 1, eq in {1, 2}",
            |p| {
                let (k, eq) = (get(p, "eta002", "k")?, get(p, "eta002", "eq")?);
                if k < 1 {
                    return Err(reject("eta002", "k must be >= 1"));
                }
                if !(1..=2).contains(&eq) {
                    return Err(reject("eta002", "eq must be 1 or 2"));
                }
                Ok(())
            },
            |p| {
                let k = get(p, "eta002", "k")? as u32;
                let u = match get(p, "eta002", "eq")? {
                    1 => generators::elementary(k),
                    _ => generators::powersum(k),
                };
                single(u, &[0, 0, 2], 1)
            },
            |p| {
                let k = get(p, "eta002", "k")? as u32;
                Ok(match get(p, "eta002", "eq")? {
                    1 => {
                        let mut e = MzvExpr::constant(rat_int(-(k as i64 + 1)));
                        for j in 2..=k + 2 {
                            e = e.add(&zeta1(j));
                        }
                        e
                    }
                    _ => {
                        let mut e = zeta(&[2, k]);
                        for j in 0..=k as i64 - 3 {
                            let sign = if (j + 1) % 2 == 0 { 1 } else { -1 };
                            e = e.add(
                                &zeta1(k - j as u32).scale(&rat_int(sign * (j + 1))),
                            );
                        }
                        let ks = if k.is_multiple_of(2) { 1 } else { -1 };
                        e = e.add(&zeta1(2).scale(&rat_int(-ks * k as i64)));
                        e = e.add(&MzvExpr::constant(rat_int(ks * (k as i64 + 1))));
                        e
                    }
                })
            },
            1e-6,
            2_000_000,
            || grid_range_eq("k", 1, 5, &[1, 2])
        ),
        family!(
            "length2-example",
            "sum_{n>=1} H_n^2 / (n^2 (n+1)) = (17/4) zeta(4) - 3 zeta(3)",
            &[],
            "no parameters",
            |_| Ok(()),
            |_| {
                let p1 = generators::powersum(1);
                single(quasi_shuffle(&p1, &p1), &[2, 1], 1)
            },
            |_| Ok(zeta1(4).scale(&rat(17, 4)).sub(&zeta1(3).scale(&rat_int(3)))),
            1e-5,
            1_000_000,
            || vec![ParamMap::new()]
        ),
        family!(
            "eta2eh",
            "sum_{n>=1} e_k h_l specialized over n^2: binomial-weighted depth aggregates",
            &["k", "l"],
            "k, l >= 0",
            |p| {
                get(p, "eta2eh", "k")?;
                get(p, "eta2eh", "l")?;
                Ok(())
            },
            |p| {
                let (k, l) = (get(p, "eta2eh", "k")? as u32, get(p, "eta2eh", "l")? as u32);
                single(eh_product(k, l), &[2], 1)
            },
            |p| {
                let (k, l) = (get(p, "eta2eh", "k")? as u32, get(p, "eta2eh", "l")? as u32);
                let n = k + l;
                if k == 0 {
                    return Ok(zeta1(n + 2).scale(&rat_int(n as i64 + 1)));
                }
                let mut e = zeta1(n + 2).scale(&binomial_rat(n + 1, k + 1));
                for pp in k..=n {
                    e = e.add(&st_aggregate(n + 2, pp).scale(&binomial_rat(pp - 1, k - 1)));
                }
                Ok(e)
            },
            1e-6,
            2_000_000,
            || grid_pairs(5, 0)
        ),
        family!(
            "off-proof",
            "sum_{j=3}^{l+2} of the (0,j) values of e_k h_{2+l-j} equals a binomial sum of S^T",
            &["k", "l"],
            "k >= 1, l >= 1 (at k = 0 the constant-term series shifts the value by 1)",
            |p| {
                let (k, l) = (get(p, "off-proof", "k")?, get(p, "off-proof", "l")?);
                if k < 1 {
                    return Err(reject(
                        "off-proof",
                        "k must be >= 1: at k = 0 the last summand evaluates the empty \
                         product and the stated value is off by exactly 1",
                    ));
                }
                if l < 1 {
                    return Err(reject("off-proof", "l must be >= 1"));
                }
                Ok(())
            },
            |p| {
                let (k, l) = (get(p, "off-proof", "k")? as u32, get(p, "off-proof", "l")? as u32);
                let mut descs = Vec::new();
                for j in 3..=l + 2 {
                    descs.push(LhsDescriptor::eta(eh_product(k, 2 + l - j), EtaSpec::of(&[0, j])?));
                }
                Ok(descs)
            },
            |p| {
                let (k, l) = (get(p, "off-proof", "k")? as u32, get(p, "off-proof", "l")? as u32);
                let mut e = MzvExpr::zero();
                for pp in k..=l + k - 1 {
                    e = e.add(&st_aggregate(l + k + 2, pp + 1).scale(&binomial_rat(pp, k)));
                }
                Ok(e)
            },
            1e-6,
            2_000_000,
            || {
                let mut g = Vec::new();
                for k in 1..=3i64 {
                    for l in 1..=(4 - k) {
                        g.push(params(&[("k", k), ("l", l)]));
                    }
                }
                g
            }
        ),
        family!(
            "hseries",
            "sum_{n>=1} 1/(n(n+1)...(n+q-1)) = 1/((q-1)! (q-1))",
            &["q"],
            "q >= 2",
            |p| {
                if get(p, "hseries", "q")? >= 2 {
                    Ok(())
                } else {
                    Err(reject("hseries", "q must be >= 2"))
                }
            },
            |p| {
                let q = get(p, "hseries", "q")? as u32;
                single(QSymElem::one(), &ones(q), 1)
            },
            |p| {
                let q = get(p, "hseries", "q")? as u32;
                Ok(MzvExpr::constant(Rat::new(
                    1.into(),
                    factorial(q - 1) * num_bigint::BigInt::from(q as i64 - 1),
                )))
            },
            1e-8,
            2_000_000,
            || grid_range("q", 2, 6)
        ),
    ]
}

/// `zeta(k) - zeta(k-1) + ... + (-1)^k zeta(2) + (-1)^{k+1}`.
fn alternating_zeta_rhs(k: u32) -> MzvExpr {
    let mut e = MzvExpr::zero();
    for i in 0..=k as i64 - 2 {
        let sign = if i % 2 == 0 { 1 } else { -1 };
        e = e.add(&zeta1((k as i64 - i) as u32).scale(&rat_int(sign)));
    }
    let last = if (k + 1).is_multiple_of(2) { 1 } else { -1 };
    e.add(&MzvExpr::constant(rat_int(last)))
}

// ---- verification ----

/// Verify one identity instance at its declared tolerance (or an
/// override).  Evaluation failures surface as `Suspect` with the error
/// text, never as silent passes.
pub fn verify(cache: &MzvCache, id: &Identity, tol_override: Option<f64>) -> Report {
    let started = Instant::now();
    let tol = tol_override.unwrap_or(id.tol);
    let side_tol = tol / 2.0;
    let mut note = String::new();

    let mut lhs_value = 0.0;
    let mut lhs_bound = 0.0;
    let mut lhs_terms = 0u64;
    let mut lhs_ok = true;
    let per_desc = side_tol / id.lhs.len() as f64;
    for d in &id.lhs {
        match eta_numeric_with(d, per_desc, SumOptions { max_terms: id.budget, base: None }) {
            Ok(nv) => {
                lhs_value += nv.value;
                lhs_bound += nv.error_bound;
                lhs_terms += nv.terms_used;
            }
            Err(e) => {
                lhs_ok = false;
                let _ = write!(note, "lhs: {e}; ");
                break;
            }
        }
    }
    let lhs = lhs_ok.then_some(NumericValue {
        value: lhs_value,
        error_bound: lhs_bound,
        terms_used: lhs_terms,
    });

    let rhs = match expr_value_with(cache, &id.rhs, side_tol, id.budget) {
        Ok(nv) => Some(nv),
        Err(e) => {
            let _ = write!(note, "rhs: {e}; ");
            None
        }
    };

    let (difference, verdict) = match (&lhs, &rhs) {
        (Some(l), Some(r)) => {
            let diff = (l.value - r.value).abs();
            let allowed = l.error_bound + r.error_bound + tol;
            (diff, if diff <= allowed { Verdict::Pass } else { Verdict::Fail })
        }
        _ => (f64::NAN, Verdict::Suspect),
    };

    Report {
        id: id.family.clone(),
        params: id.params.clone(),
        lhs,
        rhs,
        difference,
        verdict,
        tol,
        runtime_ms: started.elapsed().as_millis() as u64,
        terms: lhs.map_or(0, |l| l.terms_used) + rhs.map_or(0, |r| r.terms_used),
        note: note.trim_end_matches(' ').trim_end_matches(';').to_string(),
    }
}

/// Verify the committed acceptance grid of every family.  Families run
/// concurrently; reports come back in registry-then-grid order, so the
/// output is deterministic.
pub fn verify_all(cache: &MzvCache, tol_override: Option<f64>) -> Vec<Report> {
    let mut jobs = Vec::new();
    for f in registry() {
        for p in f.acceptance_grid() {
            jobs.push((f.name, p));
        }
    }
    let slots: Vec<std::sync::Mutex<Option<Report>>> =
        jobs.iter().map(|_| std::sync::Mutex::new(None)).collect();
    let next = std::sync::atomic::AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map(|v| v.get()).unwrap_or(1).min(8);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let (name, p) = &jobs[i];
                let report = match instantiate(name, p) {
                    Ok(id) => verify(cache, &id, tol_override),
                    Err(e) => Report {
                        id: name.to_string(),
                        params: p.clone(),
                        lhs: None,
                        rhs: None,
                        difference: f64::NAN,
                        verdict: Verdict::Suspect,
                        tol: tol_override.unwrap_or(0.0),
                        runtime_ms: 0,
                        terms: 0,
                        note: e.to_string(),
                    },
                };
                *slots[i].lock().unwrap() = Some(report);
            });
        }
    });
    slots.into_iter().map(|s| s.into_inner().unwrap().unwrap()).collect()
}

// ---- serialization ----

/// Decimal with 12 significant digits, used for all floats in reports.
pub fn fmt_g12(x: f64) -> String {
    if x.is_nan() {
        return "null".into();
    }
    format!("{x:.11e}")
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn params_json(p: &ParamMap) -> String {
    let inner: Vec<String> = p.iter().map(|(k, v)| format!("\"{}\":{}", json_escape(k), v)).collect();
    format!("{{{}}}", inner.join(","))
}

/// JSON array of report records.  Runtime is deliberately omitted so a
/// warm-cache rerun is byte-identical; it stays in the text table.
pub fn reports_to_json(reports: &[Report]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in reports.iter().enumerate() {
        let lhs = r.lhs.map_or(("null".to_string(), "null".to_string()), |v| {
            (fmt_g12(v.value), fmt_g12(v.error_bound))
        });
        let rhs = r.rhs.map_or(("null".to_string(), "null".to_string()), |v| {
            (fmt_g12(v.value), fmt_g12(v.error_bound))
        });
        let _ = write!(
            out,
            "  {{\"id\":\"{}\",\"params\":{},\"lhs\":{},\"lhs_bound\":{},\"rhs\":{},\"rhs_bound\":{},\"difference\":{},\"verdict\":\"{}\",\"tol\":{},\"terms\":{}}}{}",
            json_escape(&r.id),
            params_json(&r.params),
            lhs.0,
            lhs.1,
            rhs.0,
            rhs.1,
            fmt_g12(r.difference),
            r.verdict.as_str(),
            fmt_g12(r.tol),
            r.terms,
            if i + 1 < reports.len() { ",\n" } else { "\n" }
        );
    }
    out.push_str("]\n");
    out
}

/// Plain-text table, one line per report.
pub fn reports_to_text(reports: &[Report]) -> String {
    let mut out = String::new();
    for r in reports {
        let ps: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let lhs = r.lhs.map_or("-".into(), |v| format!("{:.10}", v.value));
        let rhs = r.rhs.map_or("-".into(), |v| format!("{:.10}", v.value));
        let diff =
            if r.difference.is_nan() { "-".into() } else { format!("{:.2e}", r.difference) };
        let _ = writeln!(
            out,
            "{:<16} {:<14} lhs={:<14} rhs={:<14} diff={:<9} {:<7} {} ms{}",
            r.id,
            ps.join(","),
            lhs,
            rhs,
            diff,
            r.verdict.as_str(),
            r.runtime_ms,
            if r.note.is_empty() { String::new() } else { format!("  [{}]", r.note) }
        );
    }
    out
}
