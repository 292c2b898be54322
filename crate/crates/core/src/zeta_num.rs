//! Floating-point evaluation of multiple zeta values and of zeta
//! expressions, with a persistent cache.
//!
//! `zeta(i_1,...,i_k)` is summed by inside-out dynamic programming over
//! the outer index: one compensated accumulator per nesting level, each
//! step folding `n^{-i_j}` times the inner level's previous value.
//! Outer partial sums are recorded on a doubling schedule and the limit
//! is recovered by the log-power fit from [`crate::series`] with decay
//! exponent `i_1 - 1` and logarithmic degree `depth - 1`.  The
//! extrapolated correction is checked against the rigorous integral
//! tail bound; disagreement is a hard error, never a silent return.

use crate::composition::Composition;
use crate::error::Error;
use crate::mzv::MzvExpr;
use crate::rat::rat_to_f64;
use crate::series::{integral_log_tail, NumericValue, SeriesAccumulator, SeriesStep};
use crate::Result;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

/// Default cap on outer summation terms for a single zeta evaluation.
pub const DEFAULT_ZETA_BUDGET: u64 = 2_000_000;

const CACHE_HEADER: &str = "MZVCACHE 1";

#[derive(Debug, Clone, Copy)]
struct CacheRecord {
    value: f64,
    bound: f64,
    terms: u64,
}

/// Cache of evaluated zeta values, keyed by canonical composition text
/// and tolerance exponent.  Entries are write-once; an optional backing
/// file holds one record per line under a versioned header.  Concurrent
/// readers are unrestricted; writers are serialized.
pub struct MzvCache {
    map: RwLock<HashMap<(String, i32), CacheRecord>>,
    file: Mutex<Option<fs::File>>,
    path: Option<PathBuf>,
}

impl MzvCache {
    /// Purely in-memory cache.
    pub fn in_memory() -> Self {
        MzvCache { map: RwLock::new(HashMap::new()), file: Mutex::new(None), path: None }
    }

    /// Open (or create) a file-backed cache.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path)?;
            let mut lines = text.lines();
            match lines.next() {
                Some(h) if h.trim() == CACHE_HEADER => {}
                other => {
                    return Err(Error::CacheFormat(format!(
                        "expected header `{CACHE_HEADER}`, found {other:?}"
                    )))
                }
            }
            for (lineno, line) in lines.enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let fields: Vec<&str> = line.split(';').collect();
                if fields.len() != 5 {
                    return Err(Error::CacheFormat(format!(
                        "line {}: expected 5 fields, got {}",
                        lineno + 2,
                        fields.len()
                    )));
                }
                let key = (fields[0].to_string(), parse_i32(fields[1], lineno)?);
                let rec = CacheRecord {
                    value: f64::from_bits(parse_hex(fields[2], lineno)?),
                    bound: f64::from_bits(parse_hex(fields[3], lineno)?),
                    terms: fields[4].parse().map_err(|_| {
                        Error::CacheFormat(format!("line {}: bad term count", lineno + 2))
                    })?,
                };
                map.insert(key, rec);
            }
        }
        let file = fs::OpenOptions::new().create(true).append(true).open(&path)?;
        let cache = MzvCache {
            map: RwLock::new(map),
            file: Mutex::new(Some(file)),
            path: Some(path),
        };
        cache.ensure_header()?;
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ensure_header(&self) -> Result<()> {
        if let Some(path) = &self.path {
            if fs::metadata(path)?.len() == 0 {
                let mut guard = self.file.lock().unwrap();
                if let Some(f) = guard.as_mut() {
                    writeln!(f, "{CACHE_HEADER}")?;
                }
            }
        }
        Ok(())
    }

    fn lookup(&self, text: &str, exponent: i32, tol: f64) -> Option<NumericValue> {
        let map = self.map.read().unwrap();
        // an entry computed at this or any tighter stored exponent works
        for e in exponent..=12 {
            if let Some(rec) = map.get(&(text.to_string(), e)) {
                if rec.bound <= tol {
                    return Some(NumericValue {
                        value: rec.value,
                        error_bound: rec.bound,
                        terms_used: rec.terms,
                    });
                }
            }
        }
        None
    }

    fn store(&self, text: &str, exponent: i32, nv: &NumericValue) {
        let mut map = self.map.write().unwrap();
        if map.contains_key(&(text.to_string(), exponent)) {
            return; // write-once
        }
        map.insert(
            (text.to_string(), exponent),
            CacheRecord { value: nv.value, bound: nv.error_bound, terms: nv.terms_used },
        );
        drop(map);
        let mut guard = self.file.lock().unwrap();
        if let Some(f) = guard.as_mut() {
            let mut line = String::new();
            let _ = write!(
                line,
                "{text};{exponent};{:016x};{:016x};{}",
                nv.value.to_bits(),
                nv.error_bound.to_bits(),
                nv.terms_used
            );
            let _ = writeln!(f, "{line}");
        }
    }
}

fn parse_i32(s: &str, lineno: usize) -> Result<i32> {
    s.parse().map_err(|_| Error::CacheFormat(format!("line {}: bad exponent", lineno + 2)))
}

fn parse_hex(s: &str, lineno: usize) -> Result<u64> {
    u64::from_str_radix(s, 16)
        .map_err(|_| Error::CacheFormat(format!("line {}: bad hex field", lineno + 2)))
}

/// The exponent `e` such that requests at tolerance `tol` are served by
/// entries computed at `10^{-e}`.
fn tol_exponent(tol: f64) -> i32 {
    (-tol.log10() - 1e-9).ceil().max(0.0) as i32
}

/// Evaluate a multiple zeta value to absolute tolerance `tol` with the
/// default term budget.
pub fn zeta_value(cache: &MzvCache, i: &Composition, tol: f64) -> Result<NumericValue> {
    zeta_value_with(cache, i, tol, DEFAULT_ZETA_BUDGET)
}

pub fn zeta_value_with(
    cache: &MzvCache,
    i: &Composition,
    tol: f64,
    budget: u64,
) -> Result<NumericValue> {
    if !i.is_admissible() {
        return Err(Error::NotAdmissible(i.text()));
    }
    if tol < 1e-12 {
        return Err(Error::InvalidIndex(format!(
            "tolerance {tol:e} below the supported floor 1e-12"
        )));
    }
    let exponent = tol_exponent(tol);
    let text = i.text();
    if let Some(hit) = cache.lookup(&text, exponent, tol) {
        return Ok(hit);
    }
    let target = 10f64.powi(-exponent);
    let nv = zeta_direct(i, target, budget)?;
    cache.store(&text, exponent, &nv);
    Ok(nv)
}

fn zeta_direct(i: &Composition, tol: f64, budget: u64) -> Result<NumericValue> {
    let parts = i.parts();
    let k = parts.len();
    let w = parts[0];
    let d = (k - 1) as u32;
    let base = 1000u64.max(200 * d as u64);
    let mut acc = SeriesAccumulator::new(w, d, tol, base, budget);

    // u[j] holds the level-j nested partial sum through the previous n;
    // level k is the innermost. u[k] is the constant 1.
    let mut levels = vec![crate::series::Kahan::default(); k];
    let mut n = 0u64;
    loop {
        n += 1;
        let nf = n as f64;
        // update outermost first so each level reads the inner value
        // from the previous step
        let mut prev_inner = Vec::with_capacity(k);
        for level in levels.iter() {
            prev_inner.push(level.value());
        }
        for j in 0..k {
            let inner = if j + 1 < k { prev_inner[j + 1] } else { 1.0 };
            levels[j].add(nf.powi(-(parts[j] as i32)) * inner);
        }
        match acc.observe(levels[0].value())? {
            SeriesStep::Converged(nv) => {
                let tail = 2.0 * integral_log_tail(nf, w, d);
                let correction = nv.value - levels[0].value();
                let slack = nv.error_bound + 1e-12;
                if correction < -slack || correction > tail + slack {
                    return Err(Error::ExtrapolationInconsistent {
                        value: nv.value,
                        partial: levels[0].value(),
                        tail,
                    });
                }
                return Ok(nv);
            }
            SeriesStep::Continue => {}
        }
    }
}

/// Evaluate a zeta expression: sum over monomials of coefficient times
/// product of zeta values, with per-factor tolerances budgeted so the
/// combined bound meets `tol`.
pub fn expr_value(cache: &MzvCache, e: &MzvExpr, tol: f64) -> Result<NumericValue> {
    expr_value_with(cache, e, tol, DEFAULT_ZETA_BUDGET)
}

pub fn expr_value_with(
    cache: &MzvCache,
    e: &MzvExpr,
    tol: f64,
    budget: u64,
) -> Result<NumericValue> {
    if tol < 1e-12 {
        return Err(Error::InvalidIndex(format!(
            "tolerance {tol:e} below the supported floor 1e-12"
        )));
    }
    // a priori weight: coefficient mass times factor count times a bound
    // on the product of remaining factors (every zeta value is < 1.7)
    let mut mass = 0.0f64;
    for (m, c) in e.terms() {
        let deg = m.degree().max(1) as i32;
        mass += rat_to_f64(c).abs() * deg as f64 * 1.7f64.powi(deg - 1);
    }
    let mut factor_tol = if mass > 0.0 { (tol / (2.0 * mass)).max(1e-12) } else { tol };

    for _attempt in 0..3 {
        let mut total = 0.0;
        let mut bound = 0.0;
        let mut terms_used = 0u64;
        for (m, c) in e.terms() {
            let cf = rat_to_f64(c);
            let mut values = Vec::with_capacity(m.degree());
            for f in m.factors() {
                let nv = zeta_value_with(cache, f, factor_tol, budget)?;
                terms_used = terms_used.max(nv.terms_used);
                values.push(nv);
            }
            let prod: f64 = values.iter().map(|v| v.value).product();
            total += cf * prod;
            // error of a product: sum over factors of its bound times the
            // other factors (bounded above by value + bound)
            let mut mono_err = 0.0;
            for fi in 0..values.len() {
                let mut rest = 1.0;
                for (fj, v) in values.iter().enumerate() {
                    if fj != fi {
                        rest *= v.value.abs() + v.error_bound;
                    }
                }
                mono_err += values[fi].error_bound * rest;
            }
            bound += cf.abs() * mono_err;
        }
        if bound <= tol {
            return Ok(NumericValue { value: total, error_bound: bound, terms_used });
        }
        factor_tol /= 4.0;
        if factor_tol < 1e-12 {
            return Err(Error::ToleranceUnreachable { tol, budget, achieved: bound });
        }
    }
    Err(Error::ToleranceUnreachable { tol, budget, achieved: f64::NAN })
}
