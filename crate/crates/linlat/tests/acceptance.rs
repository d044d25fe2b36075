//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with its runtime. Exact values only; every expected constant is either
//! trivial, taken from a verified closed form, or frozen from an independent
//! enumeration oracle.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use linlat::families::{fig1_families, level_family, union_of_levels, Family};
use linlat::gfq::make_field;
use linlat::lattice::{build_lattice, enumerate_level, LinearLattice};
use linlat::lym;
use linlat::posets::{fast_free_check, is_free, named_poset, PosetSpec};
use linlat::qarith::{bn_bound, gm_bound, q_binomial, q_factorial, rational_string, to_u64};
use linlat::search::verify::{solve_restricted_two_levels, verify_theorem, VerifyParams};
use linlat::search::{exhaustive_scan, solve, SearchBudget, SearchMode, SearchProblem};

struct Criterion {
    name: &'static str,
    limit: Duration,
    started: Instant,
}

impl Criterion {
    fn start(name: &'static str, limit_secs: u64) -> Criterion {
        Criterion { name, limit: Duration::from_secs(limit_secs), started: Instant::now() }
    }

    fn finish(self) {
        let elapsed = self.started.elapsed();
        println!("{}: PASS ({} ms)", self.name, elapsed.as_millis());
        assert!(
            elapsed < self.limit,
            "{} exceeded its {}s budget ({} ms)",
            self.name,
            self.limit.as_secs(),
            elapsed.as_millis()
        );
    }

    fn fail(self, reason: &str) -> ! {
        println!("{}: FAIL ({} ms) - {reason}", self.name, self.started.elapsed().as_millis());
        panic!("{}: {reason}", self.name);
    }
}

fn arc_lattice(n: usize, q: u64) -> Arc<LinearLattice> {
    Arc::new(build_lattice(n, q).expect("desk-scale lattice"))
}

fn forks(k: usize, l: usize) -> Vec<PosetSpec> {
    vec![
        named_poset(&format!("V:{k}")).unwrap(),
        named_poset(&format!("L:{l}")).unwrap(),
    ]
}

fn params(n: usize, q: u64) -> VerifyParams {
    VerifyParams { n: Some(n), q: Some(q), threads: 4, ..Default::default() }
}

#[test]
fn criterion_01_level_counts_match_q_binomials() {
    let c = Criterion::start("criterion 01 (level counts vs Gaussian binomials)", 10);
    for q in [2u64, 3] {
        let f = make_field(q).unwrap();
        for n in 0..=5usize {
            for k in 0..=n {
                let level = enumerate_level(n, k, &f).unwrap();
                let expected = to_u64(&q_binomial(n as u32, k as u32, q as u32));
                assert_eq!(level.len() as u64, expected, "n={n} k={k} q={q}");
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_02_maximal_chain_counts() {
    let c = Criterion::start("criterion 02 (maximal chains vs [n]_q!)", 1);
    for (n, q, expected) in [(2usize, 2u64, 3u64), (3, 2, 21), (2, 3, 4), (3, 3, 52)] {
        let lat = build_lattice(n, q).unwrap();
        let chains = lym::maximal_chains(&lat).unwrap();
        assert_eq!(chains.len() as u64, expected, "n={n} q={q}");
        assert_eq!(BigUint::from(chains.len()), q_factorial(n as u32, q as u32));
    }
    c.finish();
}

#[test]
fn criterion_03_chain_count_identity() {
    let c = Criterion::start("criterion 03 (interval chain-count identity)", 1);
    for n in [3u32, 5, 7] {
        for q in [2u32, 3] {
            let v = lym::eq1_identity_check(n, q).unwrap();
            assert!(v.holds, "n={n} q={q}: lhs {} != rhs {}", v.lhs, v.rhs);
        }
    }
    c.finish();
}

#[test]
fn criterion_04_fork_free_l32_with_oracle() {
    let c = Criterion::start("criterion 04 (fork-free optimum over L(3,2), oracle-checked)", 30);
    let lat = arc_lattice(3, 2);
    let forbidden = forks(2, 2);

    let mut reports = Vec::new();
    for induced in [false, true] {
        let (oracle_opt, oracle_extremal) =
            exhaustive_scan(&lat, &forbidden, induced, (0, 3), 4);
        let mut p = SearchProblem::new(Arc::clone(&lat), forbidden.clone(), induced);
        p.mode = SearchMode::EnumerateExtremal;
        p.threads = 4;
        let report = solve(&p);
        assert!(report.completed);
        assert_eq!(report.optimum, 7, "optimum is [3 choose 1]_2");
        assert_eq!(report.optimum, oracle_opt);
        let extremal = report.extremal.clone().unwrap();
        assert_eq!(extremal, oracle_extremal, "solver and oracle agree family by family");
        reports.push(extremal);
    }
    // Weak and induced agree here, extremal set included.
    assert_eq!(reports[0], reports[1]);

    let extremal = &reports[1];
    let levels = [
        level_family(Arc::clone(&lat), 1).unwrap(),
        level_family(Arc::clone(&lat), 2).unwrap(),
    ];
    assert!(levels.iter().all(|lv| extremal.contains(lv)));

    // The exceptional families: three comparable pairs plus one isolated
    // element, in both level profiles.
    let exceptional: Vec<&Family> = extremal.iter().filter(|f| !levels.contains(f)).collect();
    assert!(exceptional.len() >= 2);
    for f in &exceptional {
        let counts = f.level_counts();
        let profile = (counts[1], counts[2]);
        assert!(
            profile == (4, 3) || profile == (3, 4),
            "unexpected level profile {profile:?}"
        );
        let ids = f.ids();
        let mut edges = Vec::new();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if lat.lt(a as usize, b as usize) || lat.lt(b as usize, a as usize) {
                    edges.push((a, b));
                }
            }
        }
        assert_eq!(edges.len(), 3, "three comparable pairs");
        let mut endpoints = std::collections::HashSet::new();
        for (a, b) in edges {
            assert!(endpoints.insert(a) && endpoints.insert(b), "pairs form a matching");
        }
    }

    // The dedicated constructor returns exactly the non-level extremal set.
    let fig1 = fig1_families(Arc::clone(&lat)).unwrap();
    assert_eq!(fig1.len(), exceptional.len());
    for f in &fig1 {
        assert!(fast_free_check(f, &forbidden, true).unwrap());
        assert!(!levels.contains(f));
    }

    // End-to-end verdict, including the orbit count of the constructions.
    let v = verify_theorem("thm_1.4", &params(3, 2)).unwrap();
    assert!(v.pass, "{v:?}");
    assert_eq!(v.details["exceptional"]["orbit_count"], 2);
    c.finish();
}

#[test]
fn criterion_05_fork_free_l33_levels_only() {
    let c = Criterion::start("criterion 05 (fork-free optimum over L(3,3))", 300);
    let v = verify_theorem("thm_1.4", &params(3, 3)).unwrap();
    assert!(v.pass, "{v:?}");
    assert_eq!(v.details["optimum"], 13);
    assert_eq!(v.details["extremal_count"], 2, "only the two middle levels");
    assert_eq!(v.details["level_extremal"], serde_json::json!([1, 2]));
    c.finish();
}

#[test]
fn criterion_06_two_level_lemma_with_remark_conditions() {
    let c = Criterion::start("criterion 06 (two-level fork lemma, both conditions)", 300);

    // q = 2: the bound condition holds (7 < 8) but the structure condition
    // fails, and non-level extremal families exist.
    let v2 = solve_restricted_two_levels(2, 2, 2, 4, SearchBudget::default()).unwrap();
    assert_eq!(v2.optimum, 7);
    assert_eq!(v2.bound_value, 7);
    assert!(v2.bound_condition_holds);
    assert!(!v2.structure_condition_holds);
    assert_eq!(v2.level_extremal_count, 2);
    assert!(v2.non_level_extremal_count > 0);

    // Independent oracle for the q = 2 instance: plain scan of the 2^14
    // two-level subsets.
    let lat = arc_lattice(3, 2);
    let (oracle_opt, oracle_extremal) = exhaustive_scan(&lat, &forks(2, 2), false, (1, 2), 4);
    assert_eq!(oracle_opt, 7);
    assert_eq!(oracle_extremal.len(), v2.extremal_count);

    // q = 3: both conditions hold and only the levels are extremal.
    let v3 = solve_restricted_two_levels(3, 2, 2, 4, SearchBudget::default()).unwrap();
    assert_eq!(v3.optimum, 13);
    assert!(v3.bound_condition_holds);
    assert!(v3.structure_condition_holds);
    assert_eq!(v3.level_extremal_count, 2);
    assert_eq!(v3.non_level_extremal_count, 0);
    c.finish();
}

#[test]
fn criterion_07_even_fork_theorems_at_n2() {
    let c = Criterion::start("criterion 07 (even fork theorems at n = 2)", 1);
    for q in [2u64, 3] {
        let expected = q as usize + 1;

        // Weak reading: unique extremal over the whole lattice.
        let lat = arc_lattice(2, q);
        let mut p = SearchProblem::new(Arc::clone(&lat), forks(2, 2), false);
        p.mode = SearchMode::EnumerateExtremal;
        let report = solve(&p);
        assert_eq!(report.optimum, expected);
        let extremal = report.extremal.unwrap();
        assert_eq!(extremal.len(), 1);
        assert_eq!(extremal[0], level_family(Arc::clone(&lat), 1).unwrap());

        // Both named theorems pass end to end.
        let v = verify_theorem("thm_1.5", &params(2, q)).unwrap();
        assert!(v.pass, "q={q}: {v:?}");
        assert_eq!(v.details["optimum"], expected);
        let v = verify_theorem("thm_1.6", &params(2, q)).unwrap();
        assert!(v.pass, "q={q}: {v:?}");
        assert_eq!(v.details["optimum"], expected);
        assert_eq!(v.details["level_extremal"], serde_json::json!([1]));
        // At q = 2 the induced reading admits chain families through {0}
        // and V; they are classified apart from the proper uniqueness claim.
        let extras = v.details["extremal_with_trivial_elements"].as_u64().unwrap();
        assert_eq!(extras, if q == 2 { 3 } else { 0 });
    }
    c.finish();
}

#[test]
fn criterion_08_y_fork_theorem_l32() {
    let c = Criterion::start("criterion 08 (Y-fork optimum over L(3,2), oracle-checked)", 60);
    let lat = arc_lattice(3, 2);
    let forbidden = vec![named_poset("Y:2").unwrap(), named_poset("Y':2").unwrap()];
    let (oracle_opt, oracle_extremal) = exhaustive_scan(&lat, &forbidden, true, (0, 3), 4);
    assert_eq!(oracle_opt, 14);

    let v = verify_theorem("thm_4.2", &{
        let mut p = params(3, 2);
        p.k = Some(2);
        p
    })
    .unwrap();
    assert!(v.pass, "{v:?}");
    assert_eq!(v.details["optimum"], 14);
    assert_eq!(v.details["expected"], 14);
    assert_eq!(
        oracle_extremal,
        vec![union_of_levels(Arc::clone(&lat), &[1, 2]).unwrap()],
        "the union of the two middle levels is the unique extremal family"
    );
    c.finish();
}

#[test]
fn criterion_09_cyclic_alpha_grid() {
    let c = Criterion::start("criterion 09 (cyclic-interval alpha grid)", 120);
    let mut failures = Vec::new();
    for n in [3usize, 4, 5] {
        for k in [1usize, 2] {
            let h = lym::cyclic_intervals(n).unwrap();
            let forbidden = vec![
                named_poset(&format!("Y:{k}")).unwrap(),
                named_poset(&format!("Y':{k}")).unwrap(),
            ];
            let alpha = lym::alpha(&h, &forbidden, true, None).unwrap();
            let expected = k * n;
            let status = if alpha == expected { "ok" } else { "MISMATCH" };
            println!("  alpha*(I_{n}, Y_{k}/Y'_{k}) = {alpha}, claimed {expected}: {status}");
            if alpha != expected {
                failures.push(format!("n={n} k={k}: alpha {alpha} != {expected}"));
            }
        }
    }
    if !failures.is_empty() {
        c.fail(&format!(
            "the width-1 rows of the closed form are not attained: {}",
            failures.join("; ")
        ));
    }
    c.finish();
}

#[test]
fn criterion_10_double_chain_alpha() {
    let c = Criterion::start("criterion 10 (double-chain alpha closed form)", 30);
    let d = lym::double_chain(6).unwrap();
    for name in ["V:2", "L:2", "B", "Y:2", "C:3"] {
        let p = named_poset(name).unwrap();
        let expected = p.size() + p.height() - 2;
        let alpha = lym::alpha(&d, std::slice::from_ref(&p), false, None).unwrap();
        assert_eq!(alpha, expected, "pattern {name}");
    }
    c.finish();
}

#[test]
fn criterion_11_pushdown_property_suite() {
    let c = Criterion::start("criterion 11 (seeded pushdown suite over L(4,2))", 120);
    let mut p = params(4, 2);
    p.samples = 200;
    p.seed = 1;
    let v = verify_theorem("pushdown_suite", &p).unwrap();
    assert!(v.pass, "{v:?}");
    assert_eq!(v.details["samples"], 200);
    assert_eq!(v.details["hall_failures"], 0);
    assert_eq!(v.details["size_violations"], 0);
    assert_eq!(v.details["freeness_violations"], 0);
    assert_eq!(v.details["support_violations"], 0);
    c.finish();
}

#[test]
fn criterion_12_ma_neighborhood_bounds() {
    let c = Criterion::start("criterion 12 (M(A) bound sweep over L(3,2))", 120);
    let v = verify_theorem("ma_bound", &params(3, 2)).unwrap();
    assert!(v.pass, "{v:?}");
    assert_eq!(v.details["size_bound_violations"], 0);
    assert_eq!(v.details["disjointness_violations"], 0);
    assert_eq!(v.details["low_member_containment_violations"], 0);
    assert!(v.details["ma_sets_checked"].as_u64().unwrap() > 1000);
    c.finish();
}

#[test]
fn criterion_13_basis_map_double_count() {
    let c = Criterion::start("criterion 13 (ordered-basis double count)", 10);
    for (n, bases) in [(2usize, 6u64), (3, 168)] {
        let v = verify_theorem("basis_map", &params(n, 2)).unwrap();
        assert!(v.pass, "n={n}: {v:?}");
        for row in v.details["structures"].as_array().unwrap() {
            assert_eq!(row["bases"].as_u64().unwrap(), bases, "n={n}");
            assert_eq!(row["holds"], true);
        }
    }
    c.finish();
}

#[test]
fn criterion_14_lym_sweep() {
    let c = Criterion::start("criterion 14 (LYM sweep over every fork-free family)", 300);
    let v = verify_theorem("lym_sweep", &params(3, 2)).unwrap();
    assert!(v.pass, "{v:?}");
    assert_eq!(v.details["families_checked"], 65536);
    assert_eq!(v.details["violations"], 0);
    c.finish();
}

#[test]
fn criterion_15_bound_corollaries() {
    let c = Criterion::start("criterion 15 (bound formulas and optima)", 1);
    // Exact rational values over the grid; the chain-pair bound (and the
    // width-2 interval bound, which coincides with it) plus width 3.
    let expect_bn = [
        ("B", [("6", "8"), ("70", "260")]),
        ("V:2", [("9/2", "6"), ("105/2", "195")]),
        ("Y:2", [("15/2", "10"), ("175/2", "325")]),
    ];
    let expect_gm3 = [
        ("B", [("33/4", "11"), ("385/4", "715/2")]),
        ("V:2", [("15/2", "10"), ("175/2", "325")]),
        ("Y:2", [("57/4", "19"), ("665/4", "1235/2")]),
    ];
    for ((name, bn_rows), (_, gm_rows)) in expect_bn.iter().zip(&expect_gm3) {
        let p = named_poset(name).unwrap();
        for (row, n) in [0usize, 1].into_iter().zip([2u32, 4]) {
            for (col, q) in [0usize, 1].into_iter().zip([2u32, 3]) {
                let bn = bn_bound(&p, n, q);
                let expected = if col == 0 { bn_rows[row].0 } else { bn_rows[row].1 };
                assert_eq!(rational_string(&bn.exact), expected, "bn {name} n={n} q={q}");
                let gm2 = gm_bound(&p, n, q, 2).unwrap();
                assert_eq!(gm2.exact, bn.exact, "gm at width 2 equals bn");
                let gm3 = gm_bound(&p, n, q, 3).unwrap();
                let expected = if col == 0 { gm_rows[row].0 } else { gm_rows[row].1 };
                assert_eq!(rational_string(&gm3.exact), expected, "gm3 {name} n={n} q={q}");
            }
        }
    }

    // Every exact optimum from criteria 4-8 sits below the applicable bound.
    let le_floor = |opt: u64, b: &linlat::qarith::BoundValue| {
        assert!(BigUint::from(opt) <= b.floor, "optimum {opt} above bound {}", b.floor);
    };
    let v2 = named_poset("V:2").unwrap();
    let y2 = named_poset("Y:2").unwrap();
    le_floor(7, &bn_bound(&v2, 3, 2));
    le_floor(13, &bn_bound(&v2, 3, 3));
    le_floor(7, &bn_bound(&v2, 3, 2)); // two-level restriction is also global
    le_floor(13, &bn_bound(&v2, 3, 3));
    le_floor(3, &bn_bound(&v2, 2, 2));
    le_floor(4, &bn_bound(&v2, 2, 3));
    le_floor(14, &bn_bound(&y2, 3, 2));
    le_floor(14, &gm_bound(&y2, 3, 2, 2).unwrap());
    c.finish();
}

#[test]
fn criterion_16_reports_identical_across_workers() {
    let c = Criterion::start("criterion 16 (byte-identical reports, 1 vs 4 workers)", 600);
    let bin = env!("CARGO_BIN_EXE_linlat");
    let run = |args: &[&str]| -> (Vec<u8>, i32) {
        let out = std::process::Command::new(bin)
            .args(args)
            .output()
            .expect("spawn CLI");
        (out.stdout, out.status.code().unwrap_or(-1))
    };
    let cases: Vec<Vec<&str>> = vec![
        // Criterion 4 pipeline.
        vec![
            "search", "--n", "3", "--q", "2", "--forbid", "V:2,L:2", "--induced",
            "--enumerate-extremal", "--format", "json",
        ],
        // Criterion 8 pipeline.
        vec![
            "search", "--n", "3", "--q", "2", "--forbid", "Y:2,Y':2", "--induced",
            "--enumerate-extremal", "--format", "json",
        ],
        // Criterion 11 pipeline.
        vec![
            "verify", "pushdown_suite", "--n", "4", "--q", "2", "--samples", "200", "--seed",
            "1", "--format", "json",
        ],
    ];
    for case in cases {
        let mut one = case.clone();
        one.extend(["--threads", "1"]);
        let mut four = case.clone();
        four.extend(["--threads", "4"]);
        let (out1, code1) = run(&one);
        let (out4, code4) = run(&four);
        assert_eq!(code1, 0, "case {case:?}");
        assert_eq!(code4, 0, "case {case:?}");
        assert!(!out1.is_empty());
        assert_eq!(out1, out4, "byte-identical machine reports for {case:?}");
    }
    c.finish();
}

// Cross-cutting sanity: every extremal family emitted by the searches above
// re-verifies through the independent embedding checker.
#[test]
fn extremal_families_reverify() {
    let lat = arc_lattice(3, 2);
    let forbidden = forks(2, 2);
    let mut p = SearchProblem::new(Arc::clone(&lat), forbidden.clone(), true);
    p.mode = SearchMode::EnumerateExtremal;
    let report = solve(&p);
    for f in report.extremal.unwrap() {
        assert!(is_free(&f, &forbidden, true));
    }
}
