//! Boundary and sign audit.
//!
//! Several closed forms in the Euler-sum literature circulate with a
//! wrong sign, a shifted subscript, or an overstated validity range.
//! Each audit target evaluates the form as printed and a corrected
//! candidate against an independent oracle (direct series summation or
//! exact rational arithmetic) and records which of the two matches.
//! The output is data: nothing here aborts on a mismatch.

use crate::catalog::{fmt_g12, ParamMap};
use crate::eta::EtaSpec;
use crate::mzv::adjudicated_euler_sign;
use crate::qsym::{generators, quasi_shuffle};
use crate::rat::{rat_to_f64, Rat};
use crate::series::{eta_numeric_with, LhsDescriptor, SumOptions};
use crate::zeta_num::{zeta_value_with, MzvCache};
use crate::Result;
use std::fmt::Write as _;

/// Verdict tolerance: a candidate "matches" when it agrees with the
/// oracle to within this plus the oracle's own error bound.
const AUDIT_TOL: f64 = 1e-6;

/// One evaluated probe of an audit target.
#[derive(Debug, Clone)]
pub struct AuditProbe {
    pub params: ParamMap,
    pub oracle: f64,
    pub printed: f64,
    pub corrected: Option<f64>,
    pub printed_matches: bool,
    pub corrected_matches: Option<bool>,
    /// `printed - oracle`.
    pub discrepancy: f64,
}

/// An audited formula with its probes.
#[derive(Debug, Clone)]
pub struct AuditFinding {
    pub target: String,
    pub statement: String,
    pub verdict: String,
    pub probes: Vec<AuditProbe>,
}

fn probe(
    params: ParamMap,
    oracle: f64,
    oracle_bound: f64,
    printed: f64,
    corrected: Option<f64>,
) -> AuditProbe {
    let tol = AUDIT_TOL + oracle_bound;
    AuditProbe {
        params,
        oracle,
        printed,
        corrected,
        printed_matches: (printed - oracle).abs() <= tol,
        corrected_matches: corrected.map(|c| (c - oracle).abs() <= tol),
        discrepancy: printed - oracle,
    }
}

fn zeta_f(cache: &MzvCache, parts: &[u32]) -> Result<(f64, f64)> {
    let c = crate::composition::Composition::try_new(parts.to_vec())?;
    let nv = zeta_value_with(cache, &c, 1e-8, 20_000_000)?;
    Ok((nv.value, nv.error_bound))
}

fn series_f(cache: &MzvCache, d: &LhsDescriptor, tol: f64) -> Result<(f64, f64)> {
    let _ = cache;
    let nv = eta_numeric_with(d, tol, SumOptions { max_terms: 8_000_000, base: None })?;
    Ok((nv.value, nv.error_bound))
}

fn summarize(probes: &[AuditProbe], printed_name: &str, corrected_name: &str) -> String {
    let printed_fail = probes.iter().filter(|p| !p.printed_matches).count();
    let has_corrected = probes.iter().any(|p| p.corrected_matches.is_some());
    let corrected_ok = probes.iter().all(|p| p.corrected_matches.unwrap_or(true));
    if printed_fail == 0 {
        format!("{printed_name} matches the oracle at every probe")
    } else if corrected_ok && has_corrected {
        if printed_fail == probes.len() {
            format!("{printed_name} fails at every probe; {corrected_name} matches throughout")
        } else {
            format!(
                "{printed_name} fails at {printed_fail} of {} probes; {corrected_name} matches throughout",
                probes.len()
            )
        }
    } else {
        "mixed; see probes".to_string()
    }
}

/// Run every audit target.  Deterministic: fixed probe lists, cached
/// evaluations, fixed order.
pub fn audit_boundaries(cache: &MzvCache) -> Result<Vec<AuditFinding>> {
    Ok(vec![
        euler_double_zeta_sign(cache)?,
        single_p_over_n2_sign(cache)?,
        nn1_left_boundary(cache)?,
        triple_ones_case_split(cache)?,
        harmonic_shift_index()?,
        p_e_np1_squared_signs(cache)?,
    ])
}

/// The reduction `zeta(n,1) = (n/2) zeta(n+1) +- (1/2) sum_i
/// zeta(n-i) zeta(i+1)`: the plus variant circulates in print; the
/// minus variant is correct.
fn euler_double_zeta_sign(cache: &MzvCache) -> Result<AuditFinding> {
    let mut probes = Vec::new();
    for n in [3u32, 4] {
        let (oracle, ob) = zeta_f(cache, &[n, 1])?;
        let (main, _) = zeta_f(cache, &[n + 1])?;
        let mut cross = 0.0;
        for i in 1..=n - 2 {
            cross += zeta_f(cache, &[n - i])?.0 * zeta_f(cache, &[i + 1])?.0;
        }
        let printed = n as f64 / 2.0 * main + 0.5 * cross;
        let corrected = n as f64 / 2.0 * main - 0.5 * cross;
        probes.push(probe(
            crate::catalog::params(&[("n", n as i64)]),
            oracle,
            ob,
            printed,
            Some(corrected),
        ));
    }
    let verdict = format!(
        "{}; adjudicated sign stored as {}",
        summarize(&probes, "the plus variant", "the minus variant"),
        adjudicated_euler_sign()
    );
    Ok(AuditFinding {
        target: "euler-double-zeta-sign".into(),
        statement: "zeta(n,1) = (n/2) zeta(n+1) +- (1/2) sum_{i=1}^{n-2} zeta(n-i) zeta(i+1)"
            .into(),
        verdict,
        probes,
    })
}

/// The sign of the cross-term sum in
/// `sum P_k/n^2 = (k+3)/2 zeta(k+2) -+ (1/2) sum_j zeta(j) zeta(k+2-j)`.
fn single_p_over_n2_sign(cache: &MzvCache) -> Result<AuditFinding> {
    let mut probes = Vec::new();
    for k in [2u32, 3] {
        let d = LhsDescriptor::eta(generators::elementary(k), EtaSpec::of(&[2])?);
        let (oracle, ob) = series_f(cache, &d, 1e-8)?;
        let (main, _) = zeta_f(cache, &[k + 2])?;
        let mut cross = 0.0;
        for j in 2..=k {
            cross += zeta_f(cache, &[j])?.0 * zeta_f(cache, &[k + 2 - j])?.0;
        }
        let printed = (k as f64 + 3.0) / 2.0 * main + 0.5 * cross;
        let corrected = (k as f64 + 3.0) / 2.0 * main - 0.5 * cross;
        probes.push(probe(
            crate::catalog::params(&[("k", k as i64)]),
            oracle,
            ob,
            printed,
            Some(corrected),
        ));
    }
    Ok(AuditFinding {
        target: "single-p-over-n2-sign".into(),
        statement:
            "sum_{n>=1} P_k/n^2 = (k+3)/2 zeta(k+2) +- (1/2) sum_{j=2}^{k} zeta(j) zeta(k+2-j)"
                .into(),
        verdict: summarize(&probes, "the plus variant", "the minus variant"),
        probes,
    })
}

/// The stated value `C(k+l+1, k+1) zeta(k+l+1)` of the n(n+1) family at
/// the left boundary k = 0: the series value is smaller by exactly
/// `zeta(l+1)`.
fn nn1_left_boundary(cache: &MzvCache) -> Result<AuditFinding> {
    let mut probes = Vec::new();
    for l in [1u32, 2] {
        let d = LhsDescriptor::eta(generators::complete(l), EtaSpec::of(&[1, 1])?);
        let (oracle, ob) = series_f(cache, &d, 1e-8)?;
        let (z, _) = zeta_f(cache, &[l + 1])?;
        let printed = (l as f64 + 1.0) * z;
        let corrected = l as f64 * z;
        probes.push(probe(
            crate::catalog::params(&[("k", 0), ("l", l as i64)]),
            oracle,
            ob,
            printed,
            Some(corrected),
        ));
    }
    Ok(AuditFinding {
        target: "nn1-left-boundary".into(),
        statement: "sum_{n>=1} Q_l/(n(n+1)) stated as (l+1) zeta(l+1); series gives l zeta(l+1), \
                    a discrepancy of exactly zeta(l+1)"
            .into(),
        verdict: summarize(&probes, "the stated k = 0 value", "the corrected value"),
        probes,
    })
}

/// The printed three-case value of the n(n+1)(n+2) family versus the
/// composition (difference of the two lower families), probed at the
/// k = 0 column and at one interior point of the l >= 2 case.
fn triple_ones_case_split(cache: &MzvCache) -> Result<AuditFinding> {
    // printed three-case form
    fn printed_rhs(cache: &MzvCache, k: u32, l: u32) -> Result<f64> {
        Ok(match l {
            0 => 0.5 * (zeta_f(cache, &[k + 1])?.0 - 1.0),
            1 => {
                let mut s = 0.0;
                for j in 0..k {
                    s += zeta_f(cache, &[k + 1 - j])?.0;
                }
                0.5 * ((k as f64 + 2.0) * zeta_f(cache, &[k + 2])?.0 - s - 1.0)
            }
            _ => {
                let head = rat_to_f64(&crate::rat::binomial_rat(k + l + 1, k))
                    * zeta_f(cache, &[k + l + 1])?.0;
                let mut s = 0.0;
                for j in 0..=k {
                    s += rat_to_f64(&crate::rat::binomial_rat(k + l - j, l + 1 - j))
                        * zeta_f(cache, &[k + l - j])?.0;
                }
                0.5 * (head - s - zeta_f(cache, &[l])?.0)
            }
        })
    }
    // corrected: half the difference of the two audited lower families,
    // with the k = 0 column of the n(n+1) family itself corrected
    fn corrected_rhs(cache: &MzvCache, k: u32, l: u32) -> Result<f64> {
        let upper = if k == 0 {
            l as f64 * zeta_f(cache, &[l + 1])?.0
        } else {
            rat_to_f64(&crate::rat::binomial_rat(k + l + 1, k + 1))
                * zeta_f(cache, &[k + l + 1])?.0
        };
        let lower = {
            let p = crate::catalog::params(&[("k", k as i64), ("l", l as i64)]);
            let e = crate::catalog::closed_form("ch2", &p)?;
            crate::zeta_num::expr_value_with(cache, &e, 1e-8, 20_000_000)?.value
        };
        Ok(0.5 * (upper - lower))
    }
    let mut probes = Vec::new();
    for (k, l) in [(0u32, 1u32), (0, 2), (1, 0), (1, 2)] {
        let d = LhsDescriptor::eta(
            quasi_shuffle(&generators::elementary(k), &generators::complete(l)),
            EtaSpec::of(&[1, 1, 1])?,
        );
        let (oracle, ob) = series_f(cache, &d, 1e-8)?;
        probes.push(probe(
            crate::catalog::params(&[("k", k as i64), ("l", l as i64)]),
            oracle,
            ob,
            printed_rhs(cache, k, l)?,
            Some(corrected_rhs(cache, k, l)?),
        ));
    }
    Ok(AuditFinding {
        target: "triple-ones-case-split".into(),
        statement: "the three-case closed form over n(n+1)(n+2): printed l >= 2 case and the \
                    k = 0 column versus the composed half-difference of the two lower families"
            .into(),
        verdict: summarize(&probes, "the printed case split", "the composed form"),
        probes,
    })
}

/// The one-variable extension step for complete symmetric functions:
/// `h_k(a_1,...,a_{n+1}) = sum_j h_{k-j}(a_1,...,a_n) a^j` with
/// `a = a_{n+1}` (correct) versus `a = a_n` (as sometimes printed).
/// Exact rational check at a_i = 1/i.
fn harmonic_shift_index() -> Result<AuditFinding> {
    let mut probes = Vec::new();
    for (k, n) in [(2u32, 3u64), (3, 4)] {
        let lhs = generators::complete(k).specialize_at(n + 1);
        let eval = |a: Rat| -> Rat {
            let mut acc = Rat::new(0.into(), 1.into());
            let mut apow = Rat::new(1.into(), 1.into());
            for j in 0..=k {
                acc += generators::complete(k - j).specialize_at(n) * apow.clone();
                apow *= a.clone();
            }
            acc
        };
        let printed = eval(Rat::new(1.into(), n.into()));
        let corrected = eval(Rat::new(1.into(), (n + 1).into()));
        let mut p = probe(
            crate::catalog::params(&[("k", k as i64), ("n", n as i64)]),
            rat_to_f64(&lhs),
            0.0,
            rat_to_f64(&printed),
            Some(rat_to_f64(&corrected)),
        );
        // exact verdicts override the float comparison
        p.printed_matches = printed == lhs;
        p.corrected_matches = Some(corrected == lhs);
        probes.push(p);
    }
    Ok(AuditFinding {
        target: "harmonic-shift-index".into(),
        statement: "h_k(a_1..a_{n+1}) = sum_j h_{k-j}(a_1..a_n) a_{n+1}^j; the a_n^j variant \
                    fails exact rational equality at a_i = 1/i"
            .into(),
        verdict: summarize(&probes, "the a_n variant", "the a_{n+1} variant"),
        probes,
    })
}

/// The two (n+1)^2 corollaries with double-zeta terms: the printed signs
/// are checked (and hold); the sign-flipped variants are shown failing.
fn p_e_np1_squared_signs(cache: &MzvCache) -> Result<AuditFinding> {
    let mut probes = Vec::new();
    for k in [1u32, 2] {
        // first equation: H_n P_k over (n+1)^2
        let u = quasi_shuffle(&generators::powersum(1), &generators::elementary(k));
        let d = LhsDescriptor::eta(u, EtaSpec::of(&[0, 2])?);
        let (oracle, ob) = series_f(cache, &d, 1e-7)?;
        let head = (k as f64 + 2.0) * zeta_f(cache, &[k + 3])?.0;
        let tailz = zeta_f(cache, &[k + 2, 1])?.0;
        let mut p = probe(
            crate::catalog::params(&[("k", k as i64), ("eq", 1)]),
            oracle,
            ob,
            head - tailz,
            Some(head + tailz),
        );
        // "corrected" here is the sign-flipped strawman; keep names honest
        p.discrepancy = p.printed - p.oracle;
        probes.push(p);

        // second equation: (H_n^2 + H_n^(2)) P_k / 2 over (n+1)^2
        let u = quasi_shuffle(&generators::complete(2), &generators::elementary(k));
        let d = LhsDescriptor::eta(u, EtaSpec::of(&[0, 2])?);
        let (oracle, ob) = series_f(cache, &d, 1e-7)?;
        let a = rat_to_f64(&crate::rat::binomial_rat(k + 3, 2)) * zeta_f(cache, &[k + 4])?.0;
        let b = (k as f64 + 2.0) * zeta_f(cache, &[k + 3, 1])?.0;
        let c = zeta_f(cache, &[k + 2, 2])?.0;
        probes.push(probe(
            crate::catalog::params(&[("k", k as i64), ("eq", 2)]),
            oracle,
            ob,
            a - b - c,
            Some(a + b - c),
        ));
    }
    Ok(AuditFinding {
        target: "p-e-np1-squared-signs".into(),
        statement: "the (n+1)^2 corollaries (k+2) zeta(k+3) - zeta(k+2,1) and C(k+3,2) zeta(k+4) \
                    - (k+2) zeta(k+3,1) - zeta(k+2,2): printed signs versus flipped variants"
            .into(),
        verdict: summarize(&probes, "the printed form", "the flipped variant"),
        probes,
    })
}

/// Text rendering, one block per finding.
pub fn findings_to_text(findings: &[AuditFinding]) -> String {
    let mut out = String::new();
    for f in findings {
        let _ = writeln!(out, "== {} ==", f.target);
        let _ = writeln!(out, "   {}", f.statement);
        let _ = writeln!(out, "   verdict: {}", f.verdict);
        for p in &f.probes {
            let ps: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let corr = match (p.corrected, p.corrected_matches) {
                (Some(c), Some(m)) => format!(" corrected={:.10} [{}]", c, if m { "match" } else { "no match" }),
                _ => String::new(),
            };
            let _ = writeln!(
                out,
                "   {:<12} oracle={:.10} printed={:.10} [{}]{} disc={:+.6e}",
                ps.join(","),
                p.oracle,
                p.printed,
                if p.printed_matches { "match" } else { "no match" },
                corr,
                p.discrepancy
            );
        }
    }
    out
}

/// JSON rendering with the report float convention.
pub fn findings_to_json(findings: &[AuditFinding]) -> String {
    let mut out = String::from("[\n");
    for (i, f) in findings.iter().enumerate() {
        let _ = write!(
            out,
            "  {{\"target\":\"{}\",\"statement\":\"{}\",\"verdict\":\"{}\",\"probes\":[",
            f.target,
            f.statement.replace('"', "\\\""),
            f.verdict.replace('"', "\\\"")
        );
        for (j, p) in f.probes.iter().enumerate() {
            let params: Vec<String> =
                p.params.iter().map(|(k, v)| format!("\"{k}\":{v}")).collect();
            let _ = write!(
                out,
                "{{\"params\":{{{}}},\"oracle\":{},\"printed\":{},\"corrected\":{},\"printed_matches\":{},\"corrected_matches\":{},\"discrepancy\":{}}}{}",
                params.join(","),
                fmt_g12(p.oracle),
                fmt_g12(p.printed),
                p.corrected.map_or("null".into(), fmt_g12),
                p.printed_matches,
                p.corrected_matches.map_or("null".to_string(), |b| b.to_string()),
                fmt_g12(p.discrepancy),
                if j + 1 < f.probes.len() { "," } else { "" }
            );
        }
        let _ = writeln!(out, "]}}{}", if i + 1 < findings.len() { "," } else { "" });
    }
    out.push_str("]\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn audit_runs_and_adjudicates() {
        let cache = MzvCache::in_memory();
        let findings = audit_boundaries(&cache).unwrap();
        assert_eq!(findings.len(), 6);

        let by_name = |n: &str| findings.iter().find(|f| f.target == n).unwrap();

        // the printed plus-sign reduction fails, the minus variant holds
        let euler = by_name("euler-double-zeta-sign");
        assert!(euler.probes.iter().all(|p| !p.printed_matches));
        assert!(euler.probes.iter().all(|p| p.corrected_matches == Some(true)));

        let pn2 = by_name("single-p-over-n2-sign");
        assert!(pn2.probes.iter().all(|p| !p.printed_matches));
        assert!(pn2.probes.iter().all(|p| p.corrected_matches == Some(true)));

        // the k = 0 discrepancy is exactly zeta(l+1)
        let nn1 = by_name("nn1-left-boundary");
        for p in &nn1.probes {
            assert!(!p.printed_matches);
            assert_eq!(p.corrected_matches, Some(true));
            let l = p.params["l"] as u32;
            let z = zeta_f(&cache, &[l + 1]).unwrap().0;
            assert!(
                (p.discrepancy - z).abs() < 1e-6,
                "discrepancy {} vs zeta({}) = {}",
                p.discrepancy,
                l + 1,
                z
            );
        }

        // the composed three-case form always matches; the printed split
        // matches only at (k=1, l=0)
        let t = by_name("triple-ones-case-split");
        for p in &t.probes {
            assert_eq!(p.corrected_matches, Some(true), "composed form fails at {:?}", p.params);
            let fine = p.params["k"] == 1 && p.params["l"] == 0;
            assert_eq!(p.printed_matches, fine, "printed split at {:?}", p.params);
        }

        // subscript audit: printed index fails exactly, corrected holds
        let shift = by_name("harmonic-shift-index");
        assert!(shift.probes.iter().all(|p| !p.printed_matches));
        assert!(shift.probes.iter().all(|p| p.corrected_matches == Some(true)));

        // the (n+1)^2 corollaries hold as printed
        let sc = by_name("p-e-np1-squared-signs");
        assert!(sc.probes.iter().all(|p| p.printed_matches));
        assert!(sc.probes.iter().all(|p| p.corrected_matches == Some(false)));
    }

    #[test]
    fn failed_targets_are_outside_registry_ranges() {
        // no family may both pass verification and appear as a failed
        // audit target at the same parameters: every probe where the
        // printed form fails must either be rejected by the registry or
        // be registered with the corrected form
        let cache = MzvCache::in_memory();
        let findings = audit_boundaries(&cache).unwrap();
        for f in &findings {
            let family = match f.target.as_str() {
                "nn1-left-boundary" => "qpnn1",
                "triple-ones-case-split" => "eta111",
                _ => continue,
            };
            for p in &f.probes {
                if p.printed_matches {
                    continue;
                }
                match crate::catalog::instantiate(family, &p.params) {
                    Err(_) => {} // boundary excluded from the range
                    Ok(id) => {
                        // in range: the registered value must be the
                        // corrected one, i.e. verification passes
                        let r = crate::catalog::verify(&cache, &id, None);
                        assert_eq!(
                            r.verdict,
                            crate::catalog::Verdict::Pass,
                            "{family} at {:?} registered with a failing form",
                            p.params
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn audit_is_deterministic() {
        let cache = MzvCache::in_memory();
        let a = findings_to_json(&audit_boundaries(&cache).unwrap());
        let b = findings_to_json(&audit_boundaries(&cache).unwrap());
        assert_eq!(a, b);
        // and across a fresh cache
        let fresh = MzvCache::in_memory();
        let c = findings_to_json(&audit_boundaries(&fresh).unwrap());
        assert_eq!(a, c);
    }
}
