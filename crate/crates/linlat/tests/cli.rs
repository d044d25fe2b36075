//! End-to-end checks of the command-line surface: output values, exit
//! codes, machine-readable documents, and family round trips.

use std::process::{Command, Output};

fn linlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linlat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn qbinom_prints_exact_values() {
    for (args, expected) in [
        (["qbinom", "3", "1", "2"], "7"),
        (["qbinom", "5", "0", "3"], "1"),
        (["qbinom", "4", "2", "2"], "35"),
    ] {
        let out = linlat(&args);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out).trim(), expected);
    }
}

#[test]
fn usage_errors_exit_2() {
    // clap-level parse failure.
    let out = linlat(&["qbinom", "not-a-number", "1", "2"]);
    assert_eq!(out.status.code(), Some(2));
    // Domain validation failure.
    let out = linlat(&["qbinom", "2", "3", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = linlat(&["search", "--n", "3", "--q", "2", "--forbid", "W:9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_fork_free_l32_json() {
    let out = linlat(&[
        "search", "--n", "3", "--q", "2", "--forbid", "V:2,L:2", "--induced",
        "--enumerate-extremal", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(doc["schema"], "linlat.report.v1");
    assert_eq!(doc["config"]["command"], "search");
    assert_eq!(doc["result"]["optimum"], 7);
    assert_eq!(doc["result"]["completed"], true);
    let extremal = doc["result"]["extremal"].as_array().unwrap();
    assert_eq!(extremal.len(), 58);

    // Every printed family re-loads and re-verifies.
    use linlat::families::{Family, FamilyDoc};
    use linlat::posets::{is_free, named_poset};
    let lattice = std::sync::Arc::new(linlat::lattice::build_lattice(3, 2).unwrap());
    let forbidden = [named_poset("V:2").unwrap(), named_poset("L:2").unwrap()];
    for fam_doc in extremal {
        let parsed: FamilyDoc = serde_json::from_value(fam_doc.clone()).unwrap();
        let fam = Family::from_doc(std::sync::Arc::clone(&lattice), &parsed).unwrap();
        assert_eq!(fam.len(), 7);
        assert!(is_free(&fam, &forbidden, true));
    }
}

#[test]
fn search_antichain_and_y_forks() {
    let out = linlat(&["search", "--n", "2", "--q", "2", "--forbid", "C:2", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["result"]["optimum"], 3);

    let out = linlat(&[
        "search", "--n", "3", "--q", "2", "--forbid", "Y:2,Y':2", "--induced", "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["result"]["optimum"], 14);
}

#[test]
fn search_with_dsl_pattern() {
    let out = linlat(&[
        "search", "--n", "3", "--q", "2",
        "--forbid-dsl", "elements: a,b,c,d; relations: a<c,a<d,b<c,b<d",
        "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // The butterfly-free optimum over L(3,2) equals the Y-fork value.
    assert_eq!(doc["result"]["optimum"], 14);
}

#[test]
fn search_budget_exit_code() {
    let out = linlat(&[
        "search", "--n", "3", "--q", "2", "--forbid", "V:2,L:2", "--budget-nodes", "5",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_exit_codes() {
    let out = linlat(&["verify", "eq1", "--n", "5", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));

    let out = linlat(&["verify", "lemma_3.2", "--q", "3", "--k", "2", "--l", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS"));

    // A contradicted claim exits 1.
    let out = linlat(&["verify", "lemma_4.2", "--n", "3", "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));

    // Out-of-guard instances exit 4.
    let out = linlat(&["verify", "thm_1.4", "--n", "4", "--q", "2"]);
    assert_eq!(out.status.code(), Some(4));

    let out = linlat(&["verify", "nope_1.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_writes_output_file() {
    let dir = std::env::temp_dir().join(format!("linlat-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("eq1.json");
    let out = linlat(&[
        "verify", "eq1", "--n", "3", "--q", "2", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["result"]["pass"], true);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn identical_configs_are_byte_identical() {
    let args = [
        "verify", "pushdown_suite", "--n", "4", "--q", "2", "--samples", "40", "--seed",
        "11", "--format", "json",
    ];
    let a = linlat(&args);
    let b = linlat(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn lym_subcommands() {
    let out = linlat(&[
        "lym", "alpha", "--structure", "I:3", "--forbid", "Y:2,Y':2", "--induced", "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["result"]["alpha"], 6);

    let out = linlat(&[
        "lym", "check", "--n", "3", "--q", "2", "--structure", "I:3", "--forbid", "V:2",
        "--levels", "1", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["result"]["lhs"], "3");
    assert_eq!(doc["result"]["holds"], true);

    let out = linlat(&["lym", "eq1", "--n", "7", "--q", "3"]);
    assert_eq!(out.status.code(), Some(0));

    let out = linlat(&["lym", "chains", "--n", "3", "--q", "2", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["result"]["count"], 21);

    let out = linlat(&[
        "lym", "interval", "--k", "2", "--n", "6", "--forbid", "B", "--format", "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["result"]["brute"], 4);
    assert_eq!(doc["result"]["attained"], true);
}

#[test]
fn lym_check_reads_family_files() {
    let dir = std::env::temp_dir().join(format!("linlat-fam-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("family.json");
    // Levels 1 and 2 of L(3,2) given by redundant spanning sets.
    let lattice = std::sync::Arc::new(linlat::lattice::build_lattice(3, 2).unwrap());
    let fam = linlat::families::union_of_levels(std::sync::Arc::clone(&lattice), &[1, 2]).unwrap();
    std::fs::write(&path, serde_json::to_string(&fam.to_doc()).unwrap()).unwrap();

    let out = linlat(&[
        "lym", "check", "--n", "3", "--q", "2", "--structure", "I:3", "--forbid", "Y:2,Y':2",
        "--induced", "--family", path.to_str().unwrap(), "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["result"]["lhs"], "6");
    assert_eq!(doc["result"]["alpha"], 6);
    std::fs::remove_dir_all(&dir).ok();
}
