use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn catalan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catalan"))
        .current_dir(dir)
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn factorize_five() {
    let dir = tempfile::tempdir().unwrap();
    let out = catalan(dir.path(), &["factorize", "--n", "5"]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "prime_count"), "3");
    let text = fs::read_to_string(dir.path().join("catalan_5_factorization.txt")).unwrap();
    assert!(text.contains("# exponent=1 count=3\n2 3 7\n"));
}

#[test]
fn factorize_one_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    assert!(catalan(dir.path(), &["factorize", "--n", "1"]).status.success());
    let text = fs::read_to_string(dir.path().join("catalan_1_factorization.txt")).unwrap();
    assert!(text.contains("# prime_count=0"));
    assert!(!text.contains("# exponent="));
}

#[test]
fn factorize_binomial() {
    let dir = tempfile::tempdir().unwrap();
    let out = catalan(dir.path(), &["factorize", "--binomial", "4", "2"]);
    assert!(out.status.success());
    let path = field(&stdout(&out), "factorization").to_string();
    let out = catalan(dir.path(), &["reconstruct", &path, "--emit-decimal"]);
    assert!(out.status.success());
    let dec = field(&stdout(&out), "decimal").to_string();
    assert_eq!(fs::read_to_string(dir.path().join(dec)).unwrap(), "6\n");
}

#[test]
fn non_integral_ratio_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = catalan(dir.path(), &["factorize", "--ratio", "2/4"]);
    assert_eq!(out.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not an integer"));
}

#[test]
fn reconstruct_five_and_ten() {
    let dir = tempfile::tempdir().unwrap();
    catalan(dir.path(), &["factorize", "--n", "5"]);
    let out = catalan(dir.path(), &["reconstruct", "catalan_5_factorization.txt"]);
    assert!(out.status.success());
    assert_eq!(
        fs::read(dir.path().join("catalan_5_reconstructed.bin")).unwrap(),
        vec![0x2A]
    );
    assert_eq!(field(&stdout(&out), "bit_length"), "6");

    catalan(dir.path(), &["factorize", "--n", "10"]);
    let out = catalan(
        dir.path(),
        &["reconstruct", "catalan_10_factorization.txt", "--emit-decimal"],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("catalan_10_reconstructed.txt")).unwrap();
    assert_eq!(text.trim_end(), "16796");
}

#[test]
fn reconstruct_missing_input_names_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = catalan(dir.path(), &["reconstruct", "no_such_factorization.txt"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_factorization.txt"));
}

#[test]
fn reconstruct_malformed_input_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.txt"),
        "# Prime factorization of Catalan(5)\n2 3 7\n",
    )
    .unwrap();
    let out = catalan(dir.path(), &["reconstruct", "bad.txt"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn solve_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&catalan(dir.path(), &["solve", "--digits", "1234567890"]));
    assert!(out.starts_with("n=2050572903 "), "{out}");
    let out = stdout(&catalan(dir.path(), &["solve", "--digits", "10"]));
    assert!(out.starts_with("n=19 ") && out.contains("status=confirmed"), "{out}");
    let out = stdout(&catalan(dir.path(), &["solve", "--digits", "1"]));
    assert!(out.starts_with("n=0 "), "{out}");
    let out = catalan(dir.path(), &["solve", "--digits", "0"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn verify_self_and_tampered() {
    let dir = tempfile::tempdir().unwrap();
    let run = catalan(dir.path(), &["run", "--n", "100"]);
    assert!(run.status.success());
    let sha = field(&stdout(&run), "sha256").to_string();
    let args = [
        "verify",
        "--factorization",
        "catalan_100_factorization.txt",
        "--binary",
        "catalan_100_reconstructed.bin",
        "--digits",
        "57",
        "--sha256",
        &sha,
    ];
    let ok = catalan(dir.path(), &args);
    assert!(ok.status.success(), "{}", stdout(&ok));

    let bin = dir.path().join("catalan_100_reconstructed.bin");
    let mut bytes = fs::read(&bin).unwrap();
    bytes[0] ^= 1;
    fs::write(&bin, bytes).unwrap();
    let bad = catalan(dir.path(), &args);
    assert_eq!(bad.status.code(), Some(5));
    assert!(stdout(&bad).contains("fail"));
}

#[test]
fn verify_factorization_only() {
    let dir = tempfile::tempdir().unwrap();
    catalan(dir.path(), &["factorize", "--n", "100"]);
    let out = Command::new(env!("CARGO_BIN_EXE_catalan"))
        .current_dir(dir.path())
        .args([
            "verify",
            "--factorization",
            "catalan_100_factorization.txt",
            "--digits",
            "57",
            "--format",
            "kv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("check=digits expected=57 actual=57 result=pass"));
    assert!(text.contains("check=sha256") && text.contains("result=skipped"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
}

#[test]
fn run_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = catalan(dir.path(), &["run", "--n", "1000"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "digits"), "598");
    assert_eq!(field(&text, "verification"), "all checks passed");
    for key in ["phase1_s", "phase2_s", "total_s"] {
        field(&text, key).parse::<f64>().unwrap();
    }

    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(catalan(a.path(), &["run", "--n", "5"]).status.success());
    assert!(catalan(b.path(), &["run", "--n", "5", "--chunk-size", "1"])
        .status
        .success());
    for name in ["catalan_5_factorization.txt", "catalan_5_reconstructed.bin"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap()
        );
    }

    let out = catalan(dir.path(), &["run", "--digits", "10"]);
    assert!(out.status.success());
    assert_eq!(field(&stdout(&out), "spec"), "Catalan(19)");
    assert!(dir.path().join("catalan_19_reconstructed.bin").exists());
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(catalan(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        catalan(dir.path(), &["factorize", "--n", "5", "--binomial", "4", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(catalan(dir.path(), &["factorize"]).status.code(), Some(6));
    assert_eq!(
        catalan(dir.path(), &["run", "--n", "5", "--memory-budget", "lots"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn offload_without_directory_is_resource_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = catalan(
        dir.path(),
        &["run", "--n", "2000", "--memory-budget", "1", "--chunk-size", "4"],
    );
    assert_eq!(out.status.code(), Some(4));

    let spill = tempfile::tempdir().unwrap();
    let out = catalan(
        dir.path(),
        &[
            "run",
            "--n",
            "2000",
            "--memory-budget",
            "1",
            "--chunk-size",
            "4",
            "--offload-dir",
            spill.path().to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    assert_eq!(
        fs::read_dir(spill.path()).unwrap().count(),
        0,
        "spill files are cleaned up"
    );
}

#[test]
fn big_endian_output_is_reversed() {
    let le = tempfile::tempdir().unwrap();
    let be = tempfile::tempdir().unwrap();
    assert!(catalan(le.path(), &["run", "--n", "300"]).status.success());
    assert!(catalan(be.path(), &["run", "--n", "300", "--big-endian"])
        .status
        .success());
    let mut a = fs::read(le.path().join("catalan_300_reconstructed.bin")).unwrap();
    let b = fs::read(be.path().join("catalan_300_reconstructed.bin")).unwrap();
    a.reverse();
    assert_eq!(a, b);
}
