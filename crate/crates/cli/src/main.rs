//! `hsum`: evaluate and verify harmonic-number summation identities.
//!
//! ```text
//! hsum eval-mzv <comp>            zeta value of an admissible composition
//! hsum eval-eta <spec> --u <expr> direct summation of a series
//! hsum reduce-eta <spec>          partial-fraction reduction
//! hsum eta-symbolic <spec> --u <expr>  symbolic value plus residuals
//! hsum verify <family> [--k ...]  check one identity instance
//! hsum verify-all                 check the whole committed grid
//! hsum audit                      boundary/sign adjudication report
//! ```
//!
//! Flags: `--tol <t>` (within [1e-10, 1e-2]), `--max-terms <n>`,
//! `--cache-path <file>` (or the `HSUM_CACHE` environment variable),
//! `--json`.  Exit status: 0 all pass, 1 any fail or suspect, 2 usage.

use hsum_core::catalog::{self, ParamMap, Verdict};
use hsum_core::eta;
use hsum_core::parse;
use hsum_core::series::{self, LhsDescriptor, SumOptions};
use hsum_core::zeta_num::{self, MzvCache};
use std::collections::BTreeMap;
use std::process::ExitCode;

const USAGE: &str = "usage: hsum <command> [options]

commands:
  eval-mzv <comp>                 evaluate zeta(comp), e.g. `hsum eval-mzv 3,1`
  eval-eta <spec> --u <expr>      sum the series with denominator exponents <spec>
                                  over the factors in <expr> (from n = 1);
                                  factors: e<k> h<k> p<k> N[n,m] M[...] m[...],
                                  rationals, products with `*`, `@+1` offsets
  reduce-eta <spec>               write the functional over irreducible ones
  eta-symbolic <spec> --u <expr>  symbolic zeta-expression value plus residuals
  verify <family> [--k --l --q --n --s --eq --idx]
                                  verify one identity instance
  verify-all                      verify the committed acceptance grid
  audit                           run the boundary/sign audit
  families                        list registered identity families

options:
  --tol <t>        tolerance, within [1e-10, 1e-2]
  --max-terms <n>  series term budget
  --cache-path <p> zeta cache file (env HSUM_CACHE; flag wins)
  --json           machine-readable output
";

struct Invocation {
    command: String,
    positional: Vec<String>,
    tol: Option<f64>,
    max_terms: Option<u64>,
    cache_path: Option<String>,
    json: bool,
    u_expr: Option<String>,
    family_params: ParamMap,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}\n\n{USAGE}");
    ExitCode::from(2)
}

fn parse_args(args: &[String]) -> Result<Invocation, String> {
    let mut inv = Invocation {
        command: String::new(),
        positional: Vec::new(),
        tol: None,
        max_terms: None,
        cache_path: None,
        json: false,
        u_expr: None,
        family_params: BTreeMap::new(),
    };
    let mut it = args.iter().peekable();
    let take_value = |it: &mut std::iter::Peekable<std::slice::Iter<String>>,
                          flag: &str|
     -> Result<String, String> {
        it.next().cloned().ok_or_else(|| format!("flag {flag} needs a value"))
    };
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--tol" => {
                let v = take_value(&mut it, "--tol")?;
                let t: f64 = v.parse().map_err(|_| format!("bad tolerance `{v}`"))?;
                if !(1e-10..=1e-2).contains(&t) {
                    return Err(format!("tolerance {t:e} outside [1e-10, 1e-2]"));
                }
                inv.tol = Some(t);
            }
            "--max-terms" => {
                let v = take_value(&mut it, "--max-terms")?;
                inv.max_terms = Some(v.parse().map_err(|_| format!("bad term count `{v}`"))?);
            }
            "--cache-path" => inv.cache_path = Some(take_value(&mut it, "--cache-path")?),
            "--json" => inv.json = true,
            "--u" => inv.u_expr = Some(take_value(&mut it, "--u")?),
            "--k" | "--l" | "--q" | "--n" | "--s" | "--eq" | "--idx" => {
                let key = arg.trim_start_matches("--").to_string();
                let v = take_value(&mut it, arg)?;
                let n: i64 = v.parse().map_err(|_| format!("bad value `{v}` for {arg}"))?;
                inv.family_params.insert(key, n);
            }
            other if other.starts_with("--") => return Err(format!("unknown flag `{other}`")),
            other => {
                if inv.command.is_empty() {
                    inv.command = other.to_string();
                } else {
                    inv.positional.push(other.to_string());
                }
            }
        }
    }
    if inv.command.is_empty() {
        return Err("missing command".into());
    }
    Ok(inv)
}

fn open_cache(inv: &Invocation) -> Result<MzvCache, String> {
    let path = inv.cache_path.clone().or_else(|| std::env::var("HSUM_CACHE").ok());
    match path {
        Some(p) => MzvCache::open(&p).map_err(|e| e.to_string()),
        None => Ok(MzvCache::in_memory()),
    }
}

/// `1.2e-08`-style short form with a two-digit exponent.
fn fmt_bound(b: f64) -> String {
    if b == 0.0 {
        return "0".into();
    }
    let exp = b.abs().log10().floor() as i32;
    let mant = b / 10f64.powi(exp);
    format!("{mant:.0}e{}{:02}", if exp < 0 { "-" } else { "+" }, exp.abs())
}

fn main() -> ExitCode {
    // die quietly when the output pipe closes (e.g. `hsum families | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    let inv = match parse_args(&args) {
        Ok(inv) => inv,
        Err(msg) => return usage_error(&msg),
    };
    match inv.command.as_str() {
        "eval-mzv" => cmd_eval_mzv(&inv),
        "eval-eta" => cmd_eval_eta(&inv),
        "reduce-eta" => cmd_reduce_eta(&inv),
        "eta-symbolic" => cmd_eta_symbolic(&inv),
        "verify" => cmd_verify(&inv),
        "verify-all" => cmd_verify_all(&inv),
        "audit" => cmd_audit(&inv),
        "families" => cmd_families(&inv),
        other => usage_error(&format!("unknown command `{other}`")),
    }
}

fn cmd_eval_mzv(inv: &Invocation) -> ExitCode {
    let [comp] = inv.positional.as_slice() else {
        return usage_error("eval-mzv takes exactly one composition");
    };
    let comp = match parse::parse_composition(comp) {
        Ok(c) => c,
        Err(e) => return usage_error(&e.to_string()),
    };
    if !comp.is_admissible() {
        return usage_error(&format!(
            "composition ({}) is not admissible (first part must exceed 1)",
            comp.text()
        ));
    }
    let cache = match open_cache(inv) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    let tol = inv.tol.unwrap_or(1e-8);
    let budget = inv.max_terms.unwrap_or(zeta_num::DEFAULT_ZETA_BUDGET);
    match zeta_num::zeta_value_with(&cache, &comp, tol, budget) {
        Ok(nv) => {
            if inv.json {
                println!(
                    "{{\"composition\":\"{}\",\"value\":{},\"bound\":{},\"terms\":{}}}",
                    comp.text(),
                    catalog::fmt_g12(nv.value),
                    catalog::fmt_g12(nv.error_bound),
                    nv.terms_used
                );
            } else {
                println!("{:.12} ± {}", nv.value, fmt_bound(nv.error_bound));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn build_descriptors(
    spec: &eta::EtaSpec,
    terms: &[parse::LhsTerm],
) -> Result<Vec<LhsDescriptor>, String> {
    let mut out = Vec::new();
    for t in terms {
        let mut factors = vec![(t.plain.clone(), 0u8)];
        if let Some(sh) = &t.shifted {
            factors.push((sh.clone(), 1));
        }
        out.push(LhsDescriptor::new(factors, spec.clone(), 1).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn cmd_eval_eta(inv: &Invocation) -> ExitCode {
    let [spec] = inv.positional.as_slice() else {
        return usage_error("eval-eta takes exactly one exponent vector");
    };
    let Some(u) = &inv.u_expr else {
        return usage_error("eval-eta needs --u <expr>");
    };
    let spec = match parse::parse_eta_spec(spec) {
        Ok(s) => s,
        Err(e) => return usage_error(&e.to_string()),
    };
    let terms = match parse::parse_lhs(u) {
        Ok(t) => t,
        Err(e) => return usage_error(&e.to_string()),
    };
    let descs = match build_descriptors(&spec, &terms) {
        Ok(d) => d,
        Err(e) => return usage_error(&e),
    };
    let tol = inv.tol.unwrap_or(1e-7);
    let opts = SumOptions {
        max_terms: inv.max_terms.unwrap_or(SumOptions::default().max_terms),
        base: None,
    };
    let mut value = 0.0;
    let mut bound = 0.0;
    let mut terms_used = 0;
    for d in &descs {
        match series::eta_numeric_with(d, tol / descs.len() as f64, opts) {
            Ok(nv) => {
                value += nv.value;
                bound += nv.error_bound;
                terms_used += nv.terms_used;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    if inv.json {
        println!(
            "{{\"spec\":\"{}\",\"value\":{},\"bound\":{},\"terms\":{}}}",
            spec.text(),
            catalog::fmt_g12(value),
            catalog::fmt_g12(bound),
            terms_used
        );
    } else {
        println!("{:.12} ± {}", value, fmt_bound(bound));
    }
    ExitCode::SUCCESS
}

fn cmd_reduce_eta(inv: &Invocation) -> ExitCode {
    let [spec] = inv.positional.as_slice() else {
        return usage_error("reduce-eta takes exactly one exponent vector");
    };
    match parse::parse_eta_spec(spec) {
        Ok(s) => {
            println!("{}", eta::partial_fraction_reduce(&s));
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(&e.to_string()),
    }
}

fn cmd_eta_symbolic(inv: &Invocation) -> ExitCode {
    let [spec] = inv.positional.as_slice() else {
        return usage_error("eta-symbolic takes exactly one exponent vector");
    };
    let Some(u) = &inv.u_expr else {
        return usage_error("eta-symbolic needs --u <expr>");
    };
    let spec = match parse::parse_eta_spec(spec) {
        Ok(s) => s,
        Err(e) => return usage_error(&e.to_string()),
    };
    let elem = match parse::parse_qsym(u) {
        Ok(e) => e,
        Err(e) => return usage_error(&e.to_string()),
    };
    let r = eta::eta_on_qsym(&spec, &elem);
    println!("symbolic: {}", r.symbolic);
    for (c, s, i) in &r.residual {
        println!("residual: {c} * {s} on M[{}]", i.text());
    }
    ExitCode::SUCCESS
}

fn cmd_verify(inv: &Invocation) -> ExitCode {
    let [name] = inv.positional.as_slice() else {
        return usage_error("verify takes exactly one family name (see `hsum families`)");
    };
    let id = match catalog::instantiate(name, &inv.family_params) {
        Ok(id) => id,
        Err(e) => return usage_error(&e.to_string()),
    };
    let cache = match open_cache(inv) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    let report = catalog::verify(&cache, &id, inv.tol);
    if inv.json {
        print!("{}", catalog::reports_to_json(std::slice::from_ref(&report)));
    } else {
        print!("{}", catalog::reports_to_text(std::slice::from_ref(&report)));
    }
    match report.verdict {
        Verdict::Pass => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    }
}

fn cmd_verify_all(inv: &Invocation) -> ExitCode {
    let cache = match open_cache(inv) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    let reports = catalog::verify_all(&cache, inv.tol);
    if inv.json {
        print!("{}", catalog::reports_to_json(&reports));
    } else {
        print!("{}", catalog::reports_to_text(&reports));
        let pass = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
        println!("{pass}/{} pass", reports.len());
    }
    if reports.iter().all(|r| r.verdict == Verdict::Pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_audit(inv: &Invocation) -> ExitCode {
    let cache = match open_cache(inv) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    match hsum_core::audit::audit_boundaries(&cache) {
        Ok(findings) => {
            if inv.json {
                print!("{}", hsum_core::audit::findings_to_json(&findings));
            } else {
                print!("{}", hsum_core::audit::findings_to_text(&findings));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_families(inv: &Invocation) -> ExitCode {
    for f in catalog::registry() {
        if inv.json {
            continue;
        }
        let ps = if f.param_names.is_empty() {
            String::new()
        } else {
            format!(" ({})", f.param_names.join(", "))
        };
        println!("{:<16}{} {}", f.name, ps, f.anchor);
        println!("{:16}  validity: {}", "", f.validity);
    }
    if inv.json {
        let names: Vec<String> =
            catalog::registry().iter().map(|f| format!("\"{}\"", f.name)).collect();
        println!("[{}]", names.join(","));
    }
    ExitCode::SUCCESS
}
