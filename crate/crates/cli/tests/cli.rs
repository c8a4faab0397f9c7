use std::path::PathBuf;
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phiarith")).current_dir(root()).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn minus_class_numbers() {
    let o = run(&["minus", "47"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("chi order 46   2^0*w=47  h-_chi = 139"));
    assert!(stdout(&o).contains("h- of Q(mu_47) = 695"));
    for f in ["3", "4"] {
        let o = run(&["minus", f, "--format", "json"]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["h_minus"], "1");
        assert_eq!(v["characters"][0]["class_number"], "1");
    }
    assert_eq!(run(&["minus", "2"]).status.code(), Some(1));
}

#[test]
fn stickelberger_tables() {
    let o = run(&["stickelberger", "5", "--c", "3"]);
    assert!(stdout(&o).contains("(1 - c*s_c^-1)B = 1*s2^-1 + -1*s3^-1"));
    assert!(stdout(&o).contains("antisymmetry check: ok"));
    let o = run(&["stickelberger", "47", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["lambda"], 47);
    let o = run(&["stickelberger", "5", "--c", "1"]);
    assert!(stdout(&o).contains("twist is the zero element"));
    assert_eq!(run(&["stickelberger", "5", "--c", "4"]).status.code(), Some(1));
    assert_eq!(run(&["stickelberger", "5", "--c", "5"]).status.code(), Some(1));
    assert!(run(&["stickelberger", "24", "--c", "5"]).status.success());
}

#[test]
fn cubic_verify_reports() {
    let o = run(&["cubic-verify", "fixtures/cubic/f313.toml"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("Index [E_K:C_K]=7"));
    assert!(text.contains("1  0    P1 and P2-valuations for alpha+j*beta"));
    assert!(text.contains("total 2"));
    assert!(text.ends_with("MATCH\n"));
    let bad = run(&["cubic-verify", "fixtures/corrupted/f313_sigma.toml"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(run(&["cubic-verify", "fixtures/cubic/missing.toml"]).status.code(), Some(2));
}

#[test]
fn json_output_is_stable_and_matches_goldens() {
    for f in [313, 7351, 10267] {
        let path = format!("fixtures/cubic/f{f}.toml");
        let a = run(&["--format", "json", "cubic-verify", &path]);
        let b = run(&["cubic-verify", &path, "--format", "json"]);
        assert_eq!(a.stdout, b.stdout);
        let golden = std::fs::read(root().join(format!("fixtures/goldens/f{f}.json"))).unwrap();
        assert_eq!(a.stdout, golden, "f = {f}");
    }
}

#[test]
fn product_formula_families() {
    for name in ["trivial", "mu23_minus", "inert_tower"] {
        let o = run(&["product-check", &format!("fixtures/families/{name}.toml")]);
        assert!(o.status.success(), "{name}");
        assert!(stdout(&o).ends_with("PASS\n"));
    }
    let o = run(&["product-check", "fixtures/families/inert_tower.toml", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["per_chi"]["27"], 1);
    assert_eq!(v["algebraic_product"], 81);

    let dir = std::env::temp_dir().join(format!("phiarith-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let incomplete = dir.join("incomplete.toml");
    std::fs::write(&incomplete, "name = \"x\"\ndegree = 6\n[subfields]\n1 = 1\n2 = 3\n6 = 3\n").unwrap();
    assert_eq!(run(&["product-check", incomplete.to_str().unwrap()]).status.code(), Some(1));
    let wrong = dir.join("wrong.toml");
    std::fs::write(&wrong, "name = \"x\"\ndegree = 2\n[subfields]\n1 = 1\n2 = 3\n[per_chi]\n1 = 1\n2 = 5\n").unwrap();
    assert_eq!(run(&["product-check", wrong.to_str().unwrap()]).status.code(), Some(3));
    let garbled = dir.join("garbled.toml");
    std::fs::write(&garbled, "name = \"x\"\ndegree = 2\n[subfields]\none = 1\n").unwrap();
    assert_eq!(run(&["product-check", garbled.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn enumeration_and_torsion() {
    let o = run(&["cubic-enumerate", "--range", "1..100", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let fs: Vec<u64> = v.as_array().unwrap().iter().map(|r| r["f"].as_u64().unwrap()).collect();
    assert_eq!(fs, vec![7, 9, 13, 19, 31, 37, 43, 61, 63, 63, 67, 73, 79, 91, 91, 97]);
    assert_eq!(run(&["cubic-enumerate", "--range", "9..3"]).status.code(), Some(1));
    assert_eq!(run(&["cubic-enumerate", "--range", "x"]).status.code(), Some(1));
    let o = run(&["torsion", "313", "--p", "7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let cubic = v["characters"].as_array().unwrap().iter().find(|c| c["order"] == 3).unwrap();
    assert_eq!(cubic["total"], 2);
    assert_eq!(run(&["torsion", "313", "--p", "6"]).status.code(), Some(1));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn selftest_small_range() {
    let o = run(&["selftest", "--range", "1..11000"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS cubic f=10267"));
    assert!(!text.contains("FAIL"));
}
