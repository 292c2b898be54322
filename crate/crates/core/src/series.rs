//! Direct numerical summation of the series functionals with log-power
//! Richardson extrapolation.
//!
//! Partial sums of the series handled here approach their limit like
//! `S - N^{-(w-1)} * (polynomial of degree d in ln N)` where `w` is the
//! total denominator exponent and `d` the degree of the numerator
//! factors.  [`extrapolate_logfit`] solves for `S` exactly on a window
//! of geometrically spaced partial sums; the error estimate is the
//! change between the fits on the two most recent windows.  Summation is
//! compensated and strictly ordered, so results are deterministic.

use crate::eta::EtaSpec;
use crate::error::Error;
use crate::qsym::{FloatSpecializeStream, QSymElem, SpecializeStream};
use crate::rat::Rat;
use crate::Result;
use num_traits::Zero;

/// A floating-point result with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericValue {
    pub value: f64,
    pub error_bound: f64,
    pub terms_used: u64,
}

/// Safety factor between the raw window-to-window change and the
/// reported error bound.
pub(crate) const ERR_SAFETY: f64 = 4.0;

/// One series to sum: a product of specialized quasi-symmetric factors
/// over the denominator described by `spec`.
///
/// A factor with offset 1 is specialized at prefix length `n + 1`
/// instead of `n`.  `start_n` is 0 or 1; starting at 0 requires the
/// leading denominator exponent to be 0 so the term is finite (the
/// factors evaluate through the empty prefix, where only constant terms
/// survive).
#[derive(Debug, Clone)]
pub struct LhsDescriptor {
    pub factors: Vec<(QSymElem, u8)>,
    pub spec: EtaSpec,
    pub start_n: u32,
}

impl LhsDescriptor {
    pub fn new(factors: Vec<(QSymElem, u8)>, spec: EtaSpec, start_n: u32) -> Result<Self> {
        if start_n > 1 {
            return Err(Error::InvalidDescriptor("start index must be 0 or 1".into()));
        }
        if factors.iter().any(|(_, off)| *off > 1) {
            return Err(Error::InvalidDescriptor("factor offsets must be 0 or 1".into()));
        }
        if start_n == 0 && spec.exponents()[0] != 0 {
            return Err(Error::InvalidDescriptor(
                "starting at n = 0 requires a zero leading denominator exponent".into(),
            ));
        }
        Ok(LhsDescriptor { factors, spec, start_n })
    }

    /// Plain `eta` series: one factor, offset 0, starting at `n = 1`.
    pub fn eta(u: QSymElem, spec: EtaSpec) -> Self {
        LhsDescriptor { factors: vec![(u, 0)], spec, start_n: 1 }
    }

    /// Sum of the degrees of the factors; governs the logarithmic order
    /// of the tail.
    pub fn total_degree(&self) -> u32 {
        self.factors.iter().map(|(u, _)| u.degree()).sum()
    }

    /// Sum of absolute values of all factor coordinates, multiplied out;
    /// used for the rigorous tail bound.
    fn coefficient_norm(&self) -> f64 {
        self.factors
            .iter()
            .map(|(u, _)| {
                u.terms().map(|(_, c)| crate::rat::rat_to_f64(c).abs()).sum::<f64>().max(1.0)
            })
            .product()
    }

    fn all_coords_nonnegative(&self) -> bool {
        self.factors.iter().all(|(u, _)| u.terms().all(|(_, c)| c >= &Rat::zero()))
    }
}

/// Tuning knobs for [`eta_numeric`]; the defaults suit the identity
/// catalog.
#[derive(Debug, Clone, Copy)]
pub struct SumOptions {
    /// Hard cap on generated terms.
    pub max_terms: u64,
    /// Base of the geometric sample schedule; `None` picks
    /// `max(1000, 200 * d)`.
    pub base: Option<u64>,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions { max_terms: 1_000_000, base: None }
    }
}

#[derive(Clone, Copy, Default)]
pub(crate) struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    pub(crate) fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Estimate the limit of partial sums whose tail behaves like
/// `N^{-(w-1)}` times a degree-`d` polynomial in `ln N`.
///
/// Solves `S_N = S - N^{-(w-1)} sum_j c_j (ln N - mean)^j` exactly on
/// the last `d + 2` samples (the centered powers keep the solve well
/// conditioned; the solution `S` is basis-independent).  The error is
/// the change against the window shifted back by one sample, or against
/// the last partial sum if only one window exists.
pub fn extrapolate_logfit(samples: &[(u64, f64)], w: u32, d: u32) -> Result<NumericValue> {
    let need = (d + 2) as usize;
    if samples.len() < need {
        return Err(Error::NotEnoughSamples { needed: need, got: samples.len() });
    }
    let primary = logfit_window(&samples[samples.len() - need..], w, d)?;
    let error_bound = if samples.len() > need {
        let shifted =
            logfit_window(&samples[samples.len() - need - 1..samples.len() - 1], w, d)?;
        (primary - shifted).abs()
    } else {
        (primary - samples[samples.len() - 1].1).abs()
    };
    Ok(NumericValue {
        value: primary,
        error_bound,
        terms_used: samples[samples.len() - 1].0,
    })
}

fn logfit_window(pts: &[(u64, f64)], w: u32, d: u32) -> Result<f64> {
    let n = pts.len();
    let mean: f64 = pts.iter().map(|(x, _)| (*x as f64).ln()).sum::<f64>() / n as f64;
    let mut mat = vec![vec![0.0f64; n + 1]; n];
    for (r, (x, s)) in pts.iter().enumerate() {
        let lx = (*x as f64).ln();
        let decay = (*x as f64).powi(-((w as i32) - 1));
        mat[r][0] = 1.0;
        for j in 0..=d as usize {
            mat[r][j + 1] = -decay * (lx - mean).powi(j as i32);
        }
        mat[r][n] = *s;
    }
    // Gaussian elimination with partial pivoting
    for col in 0..n {
        let (pivot, max) = (col..n)
            .map(|r| (r, mat[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if max == 0.0 || !max.is_finite() {
            return Err(Error::SingularFit);
        }
        mat.swap(col, pivot);
        for r in col + 1..n {
            let f = mat[r][col] / mat[col][col];
            if f != 0.0 {
                for c in col..=n {
                    mat[r][c] -= f * mat[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0f64; n];
    for r in (0..n).rev() {
        let mut acc = mat[r][n];
        for c in r + 1..n {
            acc -= mat[r][c] * x[c];
        }
        x[r] = acc / mat[r][r];
    }
    if !x[0].is_finite() {
        return Err(Error::SingularFit);
    }
    Ok(x[0])
}

/// Rigorous bound on `int_N^inf (1 + ln x)^d x^{-w} dx` for `w >= 2`,
/// by repeated integration by parts.
pub(crate) fn integral_log_tail(n: f64, w: u32, d: u32) -> f64 {
    let wm1 = (w - 1) as f64;
    let base = n.powf(-wm1) / wm1;
    let l = 1.0 + n.ln();
    // I(j) = l^j * base + (j / wm1) * I(j-1), bottom-up from I(0) = base
    let mut acc = base;
    let mut lpow = 1.0;
    for j in 1..=d {
        lpow *= l;
        acc = lpow * base + (j as f64 / wm1) * acc;
    }
    acc
}

/// Shared convergence loop: callers maintain the running partial sum
/// and feed it in once per term; samples land on a doubling schedule,
/// and the loop converges when the safety-scaled extrapolation error
/// meets the tolerance.
pub(crate) struct SeriesAccumulator {
    samples: Vec<(u64, f64)>,
    next_mark: u64,
    terms: u64,
    last_partial: f64,
    w: u32,
    d: u32,
    tol: f64,
    max_terms: u64,
}

pub(crate) enum SeriesStep {
    Continue,
    Converged(NumericValue),
}

impl SeriesAccumulator {
    pub(crate) fn new(w: u32, d: u32, tol: f64, base: u64, max_terms: u64) -> Self {
        SeriesAccumulator {
            samples: Vec::new(),
            next_mark: base.max(4),
            terms: 0,
            last_partial: 0.0,
            w,
            d,
            tol,
            max_terms,
        }
    }

    /// Record the partial sum after one more term.
    pub(crate) fn observe(&mut self, partial: f64) -> Result<SeriesStep> {
        self.terms += 1;
        self.last_partial = partial;
        if self.terms == self.next_mark {
            self.samples.push((self.terms, partial));
            self.next_mark *= 2;
            if self.samples.len() >= (self.d + 2) as usize {
                let est = extrapolate_logfit(&self.samples, self.w, self.d)?;
                let bound = ERR_SAFETY * est.error_bound;
                if bound <= self.tol {
                    return Ok(SeriesStep::Converged(NumericValue {
                        value: est.value,
                        error_bound: bound.max(f64::EPSILON * est.value.abs()),
                        terms_used: self.terms,
                    }));
                }
            }
        }
        if self.terms >= self.max_terms {
            let achieved = match extrapolate_logfit(&self.samples, self.w, self.d) {
                Ok(est) => ERR_SAFETY * est.error_bound,
                Err(_) => f64::INFINITY,
            };
            return Err(Error::ToleranceUnreachable {
                tol: self.tol,
                budget: self.max_terms,
                achieved,
            });
        }
        Ok(SeriesStep::Continue)
    }

    pub(crate) fn last_partial(&self) -> f64 {
        self.last_partial
    }
}

/// Sum the series described by `d` to absolute tolerance `tol`.
pub fn eta_numeric(d: &LhsDescriptor, tol: f64) -> Result<NumericValue> {
    eta_numeric_with(d, tol, SumOptions::default())
}

pub fn eta_numeric_with(d: &LhsDescriptor, tol: f64, opts: SumOptions) -> Result<NumericValue> {
    if tol < 1e-10 {
        return Err(Error::InvalidDescriptor(format!(
            "tolerance {tol:e} below the supported floor 1e-10"
        )));
    }
    let w = d.spec.weight();
    let deg = d.total_degree();
    let base = opts.base.unwrap_or_else(|| 1000u64.max(200 * deg as u64));
    let mut acc = SeriesAccumulator::new(w, deg, tol, base, opts.max_terms);
    let mut sum = Kahan::default();

    let mut streams: Vec<(FloatSpecializeStream, u8)> =
        d.factors.iter().map(|(u, off)| (FloatSpecializeStream::new(u), *off)).collect();
    // advance offset-1 streams one step so each read is at prefix n+offset
    let mut current: Vec<f64> = streams
        .iter_mut()
        .map(|(s, off)| {
            let mut v = s.next_value();
            if *off == 1 {
                v = s.next_value();
            }
            v
        })
        .collect();

    let mut n = d.start_n as u64;
    // streams currently hold values for prefix length start rather than 0
    if d.start_n == 1 {
        for (i, (s, _)) in streams.iter_mut().enumerate() {
            current[i] = s.next_value();
        }
    }
    loop {
        let mut term = 1.0;
        for v in &current {
            term *= v;
        }
        let exps = d.spec.exponents();
        for (t, &e) in exps.iter().enumerate() {
            if e > 0 {
                term /= ((n + t as u64) as f64).powi(e as i32);
            }
        }
        sum.add(term);
        match acc.observe(sum.value())? {
            SeriesStep::Converged(mut nv) => {
                // terms are positive for nonnegative coordinates: the
                // limit must sit within the rigorous tail of the last
                // partial sum
                if d.all_coords_nonnegative() {
                    let tail = 2.0
                        * d.coefficient_norm()
                        * integral_log_tail((n + 1) as f64, w, deg);
                    let correction = nv.value - acc.last_partial();
                    let slack = nv.error_bound + 1e-12;
                    if correction < -slack || correction > tail + slack {
                        return Err(Error::ExtrapolationInconsistent {
                            value: nv.value,
                            partial: acc.last_partial(),
                            tail,
                        });
                    }
                }
                nv.error_bound = nv.error_bound.min(tol);
                return Ok(nv);
            }
            SeriesStep::Continue => {}
        }
        n += 1;
        for (i, (s, _)) in streams.iter_mut().enumerate() {
            current[i] = s.next_value();
        }
    }
}

/// Exact-rational partial sum of the same series through `n = upto`,
/// used to validate the float path.
pub fn exact_partial_sum(d: &LhsDescriptor, upto: u64) -> Rat {
    let mut streams: Vec<(SpecializeStream, u8)> =
        d.factors.iter().map(|(u, off)| (SpecializeStream::new(u), *off)).collect();
    let mut current: Vec<Rat> = streams
        .iter_mut()
        .map(|(s, off)| {
            let mut v = s.next_value();
            if *off == 1 {
                v = s.next_value();
            }
            v
        })
        .collect();
    if d.start_n == 1 {
        for (i, (s, _)) in streams.iter_mut().enumerate() {
            current[i] = s.next_value();
        }
    }
    let mut total = Rat::zero();
    let mut n = d.start_n as u64;
    while n <= upto {
        let mut term = Rat::from_integer(1.into());
        for v in &current {
            term *= v.clone();
        }
        for (t, &e) in d.spec.exponents().iter().enumerate() {
            if e > 0 {
                let den = num_bigint::BigInt::from(n + t as u64).pow(e);
                term /= Rat::from_integer(den);
            }
        }
        total += term;
        n += 1;
        for (i, (s, _)) in streams.iter_mut().enumerate() {
            current[i] = s.next_value();
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsym::generators;

    const Z2: f64 = 1.6449340668482264; // pi^2/6
    const Z3: f64 = 1.2020569031595943;
    const Z4: f64 = 1.0823232337111382; // pi^4/90

    #[test]
    fn extrapolate_inverse_squares() {
        // partial sums of sum 1/n^2 at N = 1000, 2000, 4000, 8000
        let mut sum = Kahan::default();
        let mut samples = Vec::new();
        for n in 1u64..=8000 {
            sum.add(1.0 / (n * n) as f64);
            if [1000, 2000, 4000, 8000].contains(&n) {
                samples.push((n, sum.value()));
            }
        }
        let est = extrapolate_logfit(&samples, 2, 0).unwrap();
        assert!((est.value - Z2).abs() < 1e-7, "value {}", est.value);
        assert!(est.error_bound < 1e-7, "bound {}", est.error_bound);
        assert!((est.value - Z2).abs() <= est.error_bound * 4.0);
    }

    #[test]
    fn extrapolate_euler_sum() {
        // sum H_n/n^2 with a (ln N)/N tail
        let mut sum = Kahan::default();
        let mut h = 0.0;
        let mut samples = Vec::new();
        for n in 1u64..=8000 {
            h += 1.0 / n as f64;
            sum.add(h / (n * n) as f64);
            if n % 1000 == 0 && (n / 1000).is_power_of_two() {
                samples.push((n, sum.value()));
            }
        }
        let est = extrapolate_logfit(&samples, 2, 1).unwrap();
        assert!((est.value - 2.0 * Z3).abs() < 1e-6, "value {}", est.value);
        assert!(est.error_bound < 1e-6);
    }

    #[test]
    fn extrapolate_constant_sequence() {
        let samples = vec![(1000u64, 5.0), (2000, 5.0), (4000, 5.0), (8000, 5.0)];
        let est = extrapolate_logfit(&samples, 2, 0).unwrap();
        assert_eq!(est.value, 5.0);
        assert_eq!(est.error_bound, 0.0);
    }

    #[test]
    fn extrapolate_needs_enough_samples() {
        let samples = vec![(1000u64, 1.0), (2000, 1.5)];
        assert!(matches!(
            extrapolate_logfit(&samples, 2, 1),
            Err(Error::NotEnoughSamples { .. })
        ));
    }

    #[test]
    fn eta_numeric_euler() {
        let d = LhsDescriptor::eta(generators::powersum(1), EtaSpec::of(&[2]).unwrap());
        let v = eta_numeric(&d, 1e-7).unwrap();
        assert!((v.value - 2.0 * Z3).abs() < 1e-7, "got {}", v.value);
        assert!(v.error_bound <= 1e-7);
    }

    #[test]
    fn eta_numeric_choi_value_one() {
        // degree-4 numerator over (n+1)(n+2): the slowest shape in the
        // catalog; needs a few million terms for 1e-8
        let d = LhsDescriptor::eta(generators::elementary(4), EtaSpec::of(&[0, 1, 1]).unwrap());
        let v =
            eta_numeric_with(&d, 1e-8, SumOptions { max_terms: 4_000_000, base: None }).unwrap();
        assert!((v.value - 1.0).abs() < 1e-8, "got {}", v.value);
    }

    #[test]
    fn eta_numeric_offset_pair() {
        // sum_{n>=0} H_n H_{n+1} / (n+1)^2 = 3 zeta(4)
        let d = LhsDescriptor::new(
            vec![(generators::powersum(1), 0), (generators::powersum(1), 1)],
            EtaSpec::of(&[0, 2]).unwrap(),
            0,
        )
        .unwrap();
        let v = eta_numeric(&d, 1e-7).unwrap();
        assert!((v.value - 3.0 * Z4).abs() < 1e-7, "got {}", v.value);
    }

    #[test]
    fn eta_numeric_rejects_bad_start() {
        assert!(LhsDescriptor::new(
            vec![(generators::powersum(1), 0)],
            EtaSpec::of(&[2]).unwrap(),
            0
        )
        .is_err());
    }

    #[test]
    fn eta_numeric_budget_exhaustion() {
        let d = LhsDescriptor::eta(generators::powersum(1), EtaSpec::of(&[2]).unwrap());
        let r = eta_numeric_with(&d, 1e-10, SumOptions { max_terms: 5_000, base: None });
        assert!(matches!(r, Err(Error::ToleranceUnreachable { .. })));
    }

    #[test]
    fn exact_and_float_partials_agree() {
        let d = LhsDescriptor::new(
            vec![(generators::complete(2), 0), (generators::powersum(1), 1)],
            EtaSpec::of(&[0, 2]).unwrap(),
            0,
        )
        .unwrap();
        let exact = crate::rat::rat_to_f64(&exact_partial_sum(&d, 100));
        // replicate the float loop up to n = 100
        let mut streams: Vec<(FloatSpecializeStream, u8)> =
            d.factors.iter().map(|(u, off)| (FloatSpecializeStream::new(u), *off)).collect();
        let mut current: Vec<f64> = streams
            .iter_mut()
            .map(|(s, off)| {
                let mut v = s.next_value();
                if *off == 1 {
                    v = s.next_value();
                }
                v
            })
            .collect();
        let mut sum = Kahan::default();
        for n in 0u64..=100 {
            let mut term = current.iter().product::<f64>();
            for (t, &e) in d.spec.exponents().iter().enumerate() {
                if e > 0 {
                    term /= ((n + t as u64) as f64).powi(e as i32);
                }
            }
            sum.add(term);
            for (i, (s, _)) in streams.iter_mut().enumerate() {
                current[i] = s.next_value();
            }
        }
        assert!(
            (sum.value() - exact).abs() <= 1e-12 * exact.abs(),
            "float {} vs exact {}",
            sum.value(),
            exact
        );
    }

    #[test]
    fn monotone_partial_sums_for_nonnegative_factors() {
        let d = LhsDescriptor::eta(
            crate::qsym::quasi_shuffle(&generators::powersum(1), &generators::powersum(1)),
            EtaSpec::of(&[2, 1]).unwrap(),
        );
        let mut prev = Rat::zero();
        for n in 1..=40u64 {
            let s = exact_partial_sum(&d, n);
            assert!(s > prev, "partial sums must strictly increase");
            prev = s;
        }
        let v = eta_numeric(&d, 1e-8).unwrap();
        assert!(v.value > crate::rat::rat_to_f64(&prev));
    }
}
