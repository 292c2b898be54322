//! End-to-end tests of the `hsum` binary: command output, exit codes,
//! the cache file, and output determinism.

use std::process::{Command, Output};

fn hsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsum")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn eval_mzv_prints_value_with_bound() {
    let out = hsum(&["eval-mzv", "3,1", "--tol", "1e-8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("0.270580808"), "got {text}");
    assert!(text.contains('±'), "got {text}");
}

#[test]
fn eval_mzv_rejects_bad_input() {
    // not admissible
    let out = hsum(&["eval-mzv", "1,2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("admissible"));
    // malformed
    let out = hsum(&["eval-mzv", "3,x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("usage"));
}

#[test]
fn reduce_eta_matches_known_reduction() {
    let out = hsum(&["reduce-eta", "1,1,1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1/2*eta[1,1] - 1/2*eta[0,1,1]");

    let out = hsum(&["reduce-eta", "2,1"]);
    assert_eq!(stdout(&out).trim(), "eta[2] - eta[1,1]");

    let out = hsum(&["reduce-eta", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

fn leading_value(out: &Output) -> f64 {
    stdout(out).split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn eval_eta_euler_sum() {
    let out = hsum(&["eval-eta", "2", "--u", "p1", "--tol", "1e-7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!((leading_value(&out) - 2.4041138063).abs() < 1e-6, "got {}", stdout(&out));
}

#[test]
fn eval_eta_offset_factor() {
    let out = hsum(&["eval-eta", "0,2", "--u", "p1*p1@+1", "--tol", "1e-7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    // 3 zeta(4), with the n = 0 term vanishing
    assert!((leading_value(&out) - 3.2469697011).abs() < 1e-6, "got {}", stdout(&out));
}

#[test]
fn eta_symbolic_reports_symbolic_and_residual() {
    let out = hsum(&["eta-symbolic", "0,1,1", "--u", "e4"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "symbolic: 1");

    let out = hsum(&["eta-symbolic", "2", "--u", "p1"]);
    assert_eq!(stdout(&out).trim(), "symbolic: z[2,1] + z[3]");

    let out = hsum(&["eta-symbolic", "0,0,3", "--u", "p2"]);
    let text = stdout(&out);
    assert!(text.contains("residual: 1 * eta[0,0,3] on M[2]"), "got {text}");

    // offsets make no sense symbolically
    let out = hsum(&["eta-symbolic", "2", "--u", "p1@+1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_family() {
    let out = hsum(&["verify", "cho-P", "--k", "4", "--tol", "1e-6"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("pass"), "got {text}");
    assert!(text.contains("lhs=1.0000000"), "got {text}");
}

#[test]
fn verify_out_of_range_names_the_boundary() {
    let out = hsum(&["verify", "qpnn1", "--k", "0", "--l", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("audited"), "got {}", stderr(&out));
}

#[test]
fn verify_unknown_family_is_usage_error() {
    let out = hsum(&["verify", "not-a-family"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hsum(&["verify", "eulers"]); // missing --s
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flags_and_bad_tolerances_are_rejected() {
    let out = hsum(&["eval-mzv", "2", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hsum(&["eval-mzv", "2", "--tol", "1e-11"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hsum(&["eval-mzv", "2", "--tol", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hsum(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_json_shape() {
    let out = hsum(&["verify", "eulers", "--s", "2", "--json"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.trim_start().starts_with('['));
    assert!(text.contains("\"id\":\"eulers\""));
    assert!(text.contains("\"verdict\":\"pass\""));
}

#[test]
fn audit_emits_findings() {
    let out = hsum(&["audit"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("euler-double-zeta-sign"));
    assert!(text.contains("harmonic-shift-index"));

    let out = hsum(&["audit", "--json"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"printed_matches\":false"));
}

#[test]
fn families_lists_registry() {
    let out = hsum(&["families"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["eulers", "spiess", "eta02eh", "hseries"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn cache_file_persists_and_output_is_stable() {
    let dir = std::env::temp_dir().join(format!("hsum-cli-cache-{}", std::process::id()));
    let _ = std::fs::remove_file(&dir);
    let path = dir.to_str().unwrap();

    let first = hsum(&["eval-mzv", "3,2", "--cache-path", path]);
    assert!(first.status.success(), "{}", stderr(&first));
    let content = std::fs::read_to_string(&dir).unwrap();
    assert!(content.starts_with("MZVCACHE 1\n"), "got {content}");
    assert!(content.lines().count() >= 2);

    let second = hsum(&["eval-mzv", "3,2", "--cache-path", path]);
    assert_eq!(stdout(&first), stdout(&second));
    let _ = std::fs::remove_file(&dir);
}

#[test]
fn verify_json_is_deterministic_with_warm_cache() {
    let dir = std::env::temp_dir().join(format!("hsum-cli-warm-{}", std::process::id()));
    let _ = std::fs::remove_file(&dir);
    let path = dir.to_str().unwrap();
    let a = hsum(&["verify", "off", "--k", "1", "--l", "1", "--json", "--cache-path", path]);
    let b = hsum(&["verify", "off", "--k", "1", "--l", "1", "--json", "--cache-path", path]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b), "verify output must be byte-identical");
    let _ = std::fs::remove_file(&dir);
}

#[test]
fn verify_all_is_idempotent_and_byte_identical() {
    let dir = std::env::temp_dir().join(format!("hsum-cli-all-{}", std::process::id()));
    let _ = std::fs::remove_file(&dir);
    let path = dir.to_str().unwrap();
    let a = hsum(&["verify-all", "--json", "--cache-path", path]);
    assert!(a.status.success(), "{}", stderr(&a));
    let b = hsum(&["verify-all", "--json", "--cache-path", path]);
    assert!(b.status.success());
    assert_eq!(stdout(&a), stdout(&b), "verify-all output must be byte-identical");
    assert!(stdout(&a).contains("\"id\":\"eulers\""));
    assert!(!stdout(&a).contains("\"verdict\":\"fail\""));
    assert!(!stdout(&a).contains("\"verdict\":\"suspect\""));
    let _ = std::fs::remove_file(&dir);
}

#[test]
fn cache_env_variable_is_honored_and_flag_wins() {
    let env_path = std::env::temp_dir().join(format!("hsum-env-cache-{}", std::process::id()));
    let flag_path = std::env::temp_dir().join(format!("hsum-flag-cache-{}", std::process::id()));
    let _ = std::fs::remove_file(&env_path);
    let _ = std::fs::remove_file(&flag_path);

    let out = Command::new(env!("CARGO_BIN_EXE_hsum"))
        .args(["eval-mzv", "2,2"])
        .env("HSUM_CACHE", &env_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_path.exists(), "env-var cache file not created");

    let out = Command::new(env!("CARGO_BIN_EXE_hsum"))
        .args(["eval-mzv", "2,2", "--cache-path", flag_path.to_str().unwrap()])
        .env("HSUM_CACHE", "/nonexistent/dir/cache")
        .output()
        .unwrap();
    assert!(out.status.success(), "flag must take precedence over the env var");
    assert!(flag_path.exists());

    let _ = std::fs::remove_file(&env_path);
    let _ = std::fs::remove_file(&flag_path);
}
