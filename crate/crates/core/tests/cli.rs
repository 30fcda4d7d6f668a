use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_borncoarse")).args(args).output().expect("binary runs")
}

fn run_fixture(args: &[&str], name: &str) -> Output {
    let path = fixture(name);
    let mut all: Vec<&str> = args.to_vec();
    all.push(path.to_str().unwrap());
    run(&all)
}

fn field<'a>(stdout: &'a str, key: &str) -> Option<&'a str> {
    stdout.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

const VALID: [&str; 7] = [
    "shift.instance",
    "hyperbola.instance",
    "trivial.instance",
    "shift_maximal_space.instance",
    "trivial_maximal_group.instance",
    "shift_first_coord_z2.instance",
    "cyclic3.instance",
];

#[test]
fn classify_and_axioms_exit_zero() {
    for name in VALID {
        for cmd in ["classify", "axioms"] {
            let o = run_fixture(&["--format", "machine", cmd], name);
            assert_eq!(o.status.code(), Some(0), "{cmd} {name}: {}", String::from_utf8_lossy(&o.stderr));
        }
    }
}

#[test]
fn hyperbola_flags() {
    let o = run_fixture(&["--format", "machine", "classify"], "hyperbola.instance");
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(field(&s, "b_proper").unwrap().starts_with("no ("));
    assert_eq!(field(&s, "weakly"), Some("yes"));
    assert_eq!(field(&s, "bi"), Some("yes"));
}

#[test]
fn theorem_exit_codes() {
    let table = [
        ("shift.instance", [0, 0, 0]),
        ("hyperbola.instance", [0, 0, 0]),
        ("trivial.instance", [0, 0, 1]),
        ("shift_maximal_space.instance", [0, 0, 0]),
        ("trivial_maximal_group.instance", [0, 0, 0]),
        ("shift_first_coord_z2.instance", [0, 0, 0]),
        ("cyclic3.instance", [0, 0, 3]),
    ];
    for (name, codes) in table {
        for (which, code) in ["weak", "main", "transitive"].into_iter().zip(codes) {
            let o = run_fixture(&["--format", "machine", "theorem", which], name);
            assert_eq!(o.status.code(), Some(code), "{which} {name}");
        }
    }
}

#[test]
fn exit_codes_follow_status() {
    for name in VALID {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let expect = text.lines().find_map(|l| l.strip_prefix("expect = ")).map(str::trim);
        for which in ["weak", "main", "transitive"] {
            let o = run_fixture(&["--format", "machine", "theorem", which], name);
            let s = String::from_utf8(o.stdout).unwrap();
            let Some(status) = field(&s, "status") else {
                assert_eq!(o.status.code(), Some(3));
                continue;
            };
            let want = match status {
                "confirmed" => 0,
                "inconclusive" => 2,
                "refuted" | "not-applicable" if expect == Some(status) => 0,
                _ => 1,
            };
            assert_eq!(o.status.code(), Some(want), "{which} {name} {status}");
        }
    }
}

#[test]
fn main_statuses() {
    let expected = [
        ("shift.instance", "confirmed"),
        ("hyperbola.instance", "refuted"),
        ("trivial.instance", "refuted"),
        ("shift_maximal_space.instance", "refuted"),
        ("trivial_maximal_group.instance", "confirmed"),
    ];
    for (name, status) in expected {
        let o = run_fixture(&["--format", "machine", "theorem", "main"], name);
        let s = String::from_utf8(o.stdout).unwrap();
        assert_eq!(field(&s, "status"), Some(status), "{name}");
    }
}

#[test]
fn machine_output_is_stable() {
    let a = run_fixture(&["--format", "machine", "--window", "16", "theorem", "main"], "hyperbola.instance");
    let b = run_fixture(&["--format", "machine", "--window", "16", "theorem", "main"], "hyperbola.instance");
    assert_eq!(a.stdout, b.stdout);
    let s = String::from_utf8(a.stdout).unwrap();
    let keys: Vec<&str> = s.lines().map(|l| l.split('=').next().unwrap()).collect();
    assert_eq!(&keys[..4], ["report", "status", "window", "max_index"]);
    assert_eq!(field(&s, "window"), Some("16"));
    assert!(s.lines().all(|l| l.contains('=')));
}

#[test]
fn malformed_and_missing_exit_3() {
    let o = run_fixture(&["classify"], "malformed_chain.instance");
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 19"), "{err}");
    assert!(err.contains("chain level 0 is empty"), "{err}");
    assert_eq!(run_fixture(&["theorem", "main"], "missing.instance").status.code(), Some(3));
    assert_eq!(run(&["theorem", "sideways", "x"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn closure_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.dot");
    let o = run(&["closure", fixture("cyclic3.instance").to_str().unwrap(), "--dot", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let dot = std::fs::read_to_string(&out).unwrap();
    assert!(dot.starts_with("digraph \"cyclic3\" {\n  0;\n  1;\n  2;\n"));
    assert_eq!(dot.matches("->").count(), 9);
    let again = dir.path().join("d.dot");
    run(&["closure", fixture("cyclic3.instance").to_str().unwrap(), "--dot", again.to_str().unwrap()]);
    assert_eq!(dot, std::fs::read_to_string(&again).unwrap());
    let o = run(&["closure", fixture("shift.instance").to_str().unwrap(), "--dot", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn random_round_trips_through_classify() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, profile) in [("3", "lattice-k1"), ("4", "lattice-k2"), ("5", "finite")] {
        let o = run(&["random", "--seed", seed, "--profile", profile]);
        assert_eq!(o.status.code(), Some(0));
        let again = run(&["random", "--seed", seed, "--profile", profile]);
        assert_eq!(o.stdout, again.stdout);
        let path = dir.path().join(format!("r{seed}.instance"));
        std::fs::write(&path, &o.stdout).unwrap();
        let c = run(&["--window", "16", "classify", path.to_str().unwrap()]);
        assert_eq!(c.status.code(), Some(0), "{}", String::from_utf8_lossy(&c.stderr));
    }
}

#[test]
fn crosscheck_fixtures() {
    let o = run(&[
        "--format",
        "machine",
        "--window",
        "12",
        "crosscheck",
        fixture("shift.instance").to_str().unwrap(),
        fixture("cyclic3.instance").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert_eq!(field(&s, "failed"), Some("0"));
}
