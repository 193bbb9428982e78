use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn header() -> String {
    std::fs::read_to_string(manifest_dir().join("include/stochexp.h")).unwrap()
}

#[test]
fn header_declares_public_api() {
    let h = header();
    for name in [
        "se_last_error_message",
        "se_version",
        "se_integrand_from_json",
        "se_integrand_constant",
        "se_integrand_free",
        "se_eval_psi",
        "se_phi",
        "se_novikov_check",
        "se_bundle_simulate",
        "se_bundle_free",
        "se_bundle_n_paths",
        "se_bundle_n_nodes",
        "se_bundle_copy_z",
        "se_bundle_copy_compensator",
        "se_estimate_p_moment",
        "se_martingale_test",
        "se_gaussian_moment",
        "se_pairing_count",
        "se_mgf_truncated",
        "se_cgf_truncated",
        "se_log_relation",
    ] {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(h.contains("typedef struct SeIntegrand SeIntegrand;"));
    assert!(h.contains("typedef struct SeBundle SeBundle;"));
    assert!(h.contains("SE_STATUS_OK = 0"));
}

fn cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
}

fn staticlib() -> Option<PathBuf> {
    // target/<profile>/deps/<test> -> target/<profile>/libstochexp_ffi.a
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libstochexp_ffi.a");
    lib.exists().then_some(lib)
}

fn compile(args: &[&Path], extra: &[&str]) -> std::process::Output {
    let mut cmd = Command::new(cc().unwrap());
    cmd.arg("-std=c99").arg("-Wall").arg("-Werror").arg("-I").arg(manifest_dir().join("include"));
    cmd.args(args).args(extra);
    cmd.output().unwrap()
}

#[test]
fn header_compiles_as_c() {
    if cc().is_none() {
        eprintln!("no C compiler found, skipping");
        return;
    }
    let out = compile(&[&manifest_dir().join("tests/c/smoke.c")], &["-fsyntax-only"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_and_runs() {
    let (Some(_), Some(lib)) = (cc(), staticlib()) else {
        eprintln!("no C compiler or static library, skipping");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let out = compile(
        &[&manifest_dir().join("tests/c/smoke.c"), &lib],
        &["-o", bin.to_str().unwrap(), "-lpthread", "-ldl", "-lm"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 0.1.0"));
}
