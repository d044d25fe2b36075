//! Named verification pipelines: run a search (or a transform suite, or a
//! double count), compare against the claimed value and structure, and emit
//! a structured verdict.

use std::sync::Arc;

use num_bigint::BigUint;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::families::{level_family, union_of_levels, Family};
use crate::lattice::{build_lattice, LinearLattice};
use crate::lym;
use crate::posets::{fast_free_check, is_free, named_poset, PosetSpec};
use crate::qarith::{bn_bound, gm_bound, q_binomial, rational_string, sigma_q, to_u64};
use crate::search::{solve, SearchBudget, SearchMode, SearchProblem};
use crate::transforms::{pushdown, TransformError};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("instance out of the desk guard: {0}")]
    OutOfGuard(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct VerifyParams {
    pub n: Option<usize>,
    pub q: Option<u64>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    pub threads: usize,
    pub budget: SearchBudget,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            n: None,
            q: None,
            k: None,
            l: None,
            samples: 200,
            seed: 1,
            threads: 1,
            budget: SearchBudget::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremVerdict {
    pub id: String,
    pub pass: bool,
    pub details: Value,
    pub notes: Vec<String>,
}

fn forks(k: usize, l: usize) -> Vec<PosetSpec> {
    vec![
        named_poset(&format!("V:{k}")).expect("valid fork"),
        named_poset(&format!("L:{l}")).expect("valid fork"),
    ]
}

fn require_n(p: &VerifyParams) -> Result<usize, VerifyError> {
    p.n.ok_or_else(|| VerifyError::Invalid("missing parameter n".into()))
}

fn require_q(p: &VerifyParams) -> Result<u64, VerifyError> {
    p.q.ok_or_else(|| VerifyError::Invalid("missing parameter q".into()))
}

fn lattice(n: usize, q: u64) -> Result<Arc<LinearLattice>, VerifyError> {
    build_lattice(n, q)
        .map(Arc::new)
        .map_err(|e| VerifyError::Invalid(e.to_string()))
}

/// Dispatch by theorem id.
pub fn verify_theorem(id: &str, params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    match id {
        "thm_1.4" => verify_fork_theorem(id, params, true, 2, 2),
        "thm_1.3" => verify_fork_theorem(id, params, false, 2, 2),
        "thm_1.5" => verify_even_fork(id, params, false),
        "thm_1.6" => verify_even_fork(id, params, true),
        "thm_1.7" => verify_odd_induced(params),
        "thm_4.2" => verify_y_forks(params),
        "lemma_3.2" => verify_two_level_lemma(params),
        "lemma_4.2" => verify_cyclic_alpha(params),
        "eq1" => verify_eq1(params),
        "double_chain" => verify_double_chain(params),
        "pushdown_suite" => verify_pushdown_suite(params),
        "ma_bound" => verify_ma_bound(params),
        "lym_sweep" => verify_lym_sweep(params),
        "basis_map" => verify_basis_map(params),
        "bounds" => verify_bounds(params),
        other => Err(VerifyError::Invalid(format!("unknown theorem id {other:?}"))),
    }
}

/// Even-dimension fork theorems: validate the hypothesis on the fork
/// widths, then either search exactly (small lattices) or fall back to the
/// sampled matching-reduction pipeline.
fn verify_even_fork(
    id: &str,
    params: &VerifyParams,
    induced: bool,
) -> Result<TheoremVerdict, VerifyError> {
    let n = require_n(params)?;
    let q = require_q(params)?;
    let (k, l) = (params.k.unwrap_or(2), params.l.unwrap_or(2));
    if n % 2 != 0 {
        return Err(VerifyError::Invalid(format!("requires even n (got {n})")));
    }
    let cap = if induced { q } else { q.pow((n / 2) as u32) };
    if k as u64 > cap || l as u64 > cap || k < 2 || l < 2 {
        return Err(VerifyError::Invalid(format!(
            "hypothesis requires 2 <= k, l <= {cap} (got k={k}, l={l})"
        )));
    }
    let lat = lattice(n, q)?;
    if lat.count() <= 28 || params.budget.max_nodes.is_some() {
        verify_fork_theorem(id, params, induced, k, l)
    } else {
        verify_fork_pipeline(id, params, induced, k, l)
    }
}

/// Reduction pipeline for lattices beyond the exact-search guard: push
/// sampled free families into the bottom half and cite the middle level for
/// attainment. The verdict is conditional on the sampled certificate and
/// says so.
fn verify_fork_pipeline(
    id: &str,
    params: &VerifyParams,
    induced: bool,
    k: usize,
    l: usize,
) -> Result<TheoremVerdict, VerifyError> {
    let n = require_n(params)?;
    let q = require_q(params)?;
    let lat = lattice(n, q)?;
    let floor = n / 2;
    let expected = q_binomial(n as u32, floor as u32, q as u32);
    let forbidden = forks(k, l);

    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let sample_seeds: Vec<u64> = (0..params.samples).map(|_| master.random()).collect();
    let clean: Vec<bool> = crate::exec::map_collect(params.threads, sample_seeds, |s| {
        let f = random_fork_free_family_mode(&lat, &forbidden, floor, s, induced);
        match pushdown(&f, induced, k, l, Some(floor)) {
            Ok(out) => {
                out.family.len() == f.len()
                    && out.family.max_dim().is_none_or(|d| d <= floor)
                    && is_free(&out.family, &forbidden, induced)
            }
            Err(_) => false,
        }
    });
    let failures = clean.iter().filter(|&&ok| !ok).count();
    // The middle level itself is free, so the reduced optimum is the whole
    // level.
    let level = level_family(Arc::clone(&lat), floor).expect("valid level");
    let level_free = is_free(&level, &forbidden, induced);
    let pass = failures == 0 && level_free;
    Ok(TheoremVerdict {
        id: id.to_string(),
        pass,
        details: json!({
            "n": n,
            "q": q,
            "k": k,
            "l": l,
            "induced": induced,
            "mode": "matching-reduction",
            "samples": params.samples,
            "seed": params.seed,
            "sample_failures": failures,
            "middle_level_size": expected.to_string(),
            "middle_level_free": level_free,
        }),
        notes: vec![
            format!(
                "lattice with {} elements is beyond the exact-search guard; the value {} is \
                 certified by the matching reduction on {} sampled free families plus the free \
                 middle level",
                lat.count(),
                expected,
                params.samples
            ),
        ],
    })
}

/// Search-backed verification of the fork-free theorems: the optimum is the
/// middle Gaussian binomial, and the extremal families are levels (plus the
/// matching constructions at n = 3, q = 2 in the induced reading).
fn verify_fork_theorem(
    id: &str,
    params: &VerifyParams,
    induced: bool,
    k: usize,
    l: usize,
) -> Result<TheoremVerdict, VerifyError> {
    let n = require_n(params)?;
    let q = require_q(params)?;
    let lat = lattice(n, q)?;
    if lat.count() > 28 && params.budget.max_nodes.is_none() {
        return Err(VerifyError::OutOfGuard(format!(
            "exact enumeration over {} elements needs an explicit node budget",
            lat.count()
        )));
    }
    let mut notes = vec![format!(
        "families range over all dimensions 0..={n}; uniqueness is classified after separating \
         families that use the zero subspace or the full space"
    )];

    let expected = to_u64(&q_binomial(n as u32, (n / 2) as u32, q as u32));
    let mut problem = SearchProblem::new(Arc::clone(&lat), forks(k, l), induced);
    problem.mode = SearchMode::EnumerateExtremal;
    problem.threads = params.threads;
    problem.budget = params.budget;
    let report = solve(&problem);
    if !report.completed {
        return Err(VerifyError::Budget(format!("search incomplete after {:?} nodes", report.stats.nodes)));
    }

    // The weak optimum for the same instance; the induced theorems assert
    // agreement with the non-induced value.
    let other = {
        let mut p = problem.clone();
        p.induced = !induced;
        p.mode = SearchMode::MaxSize;
        solve(&p)
    };

    let extremal = report.extremal.clone().unwrap_or_default();
    let zero_id = 0u32;
    let full_id = (lat.count() - 1) as u32;
    let mut levels_found: Vec<usize> = Vec::new();
    let mut with_trivial = 0usize;
    let mut exceptional: Vec<&Family> = Vec::new();
    for f in &extremal {
        if let Some(kk) = (0..=n).find(|&kk| {
            *f == level_family(Arc::clone(&lat), kk).expect("valid level")
        }) {
            levels_found.push(kk);
        } else if f.contains(zero_id) || f.contains(full_id) {
            with_trivial += 1;
        } else {
            exceptional.push(f);
        }
    }
    levels_found.sort_unstable();

    let expected_levels: Vec<usize> = if n % 2 == 0 {
        vec![n / 2]
    } else {
        vec![n / 2, n.div_ceil(2)]
    };
    let mut pass = report.optimum as u64 == expected
        && other.optimum as u64 == expected
        && levels_found == expected_levels;
    if with_trivial > 0 {
        notes.push(format!(
            "{with_trivial} extremal families use {{0}} or the full space; the uniqueness claim \
             is read over proper nontrivial subspaces"
        ));
    }

    let special = (n, q) == (3, 2);
    let mut exceptional_detail = json!(null);
    if special {
        // The two non-level constructions: a matching of three comparable
        // pairs plus one isolated element, in both level profiles.
        let mut profiles_ok = true;
        for f in &exceptional {
            let counts = f.level_counts();
            let profile = (counts[1], counts[2]);
            if profile != (4, 3) && profile != (3, 4) {
                profiles_ok = false;
            }
            if !matching_plus_isolated(f) {
                profiles_ok = false;
            }
        }
        let orbits = orbit_count(&lat, &exceptional);
        pass = pass && !exceptional.is_empty() && profiles_ok && orbits == 2;
        exceptional_detail = json!({
            "count": exceptional.len(),
            "profiles_ok": profiles_ok,
            "orbit_count": orbits,
        });
    } else {
        pass = pass && exceptional.is_empty();
    }

    Ok(TheoremVerdict {
        id: id.to_string(),
        pass,
        details: json!({
            "n": n,
            "q": q,
            "k": k,
            "l": l,
            "induced": induced,
            "optimum": report.optimum,
            "other_semantics_optimum": other.optimum,
            "expected": expected,
            "extremal_count": extremal.len(),
            "level_extremal": levels_found,
            "extremal_with_trivial_elements": with_trivial,
            "exceptional": exceptional_detail,
            "nodes": report.stats.nodes,
        }),
        notes,
    })
}

/// Exactly three comparable pairs forming a matching, plus one element in no
/// pair.
fn matching_plus_isolated(f: &Family) -> bool {
    let ids = f.ids();
    let lat = f.lattice();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            if lat.lt(a as usize, b as usize) || lat.lt(b as usize, a as usize) {
                edges.push((a, b));
            }
        }
    }
    if edges.len() != 3 || ids.len() != 7 {
        return false;
    }
    let mut seen = std::collections::HashSet::new();
    for (a, b) in &edges {
        if !seen.insert(*a) || !seen.insert(*b) {
            return false;
        }
    }
    seen.len() == 6
}

fn orbit_count(lat: &Arc<LinearLattice>, families: &[&Family]) -> usize {
    if families.is_empty() {
        return 0;
    }
    let perms = lat.linear_automorphisms().expect("small lattice");
    let index: std::collections::HashMap<Vec<u32>, usize> = families
        .iter()
        .enumerate()
        .map(|(i, f)| (f.ids(), i))
        .collect();
    let mut orbit = vec![usize::MAX; families.len()];
    let mut next = 0usize;
    for i in 0..families.len() {
        if orbit[i] != usize::MAX {
            continue;
        }
        let label = next;
        next += 1;
        let mut stack = vec![i];
        orbit[i] = label;
        while let Some(j) = stack.pop() {
            for perm in &perms {
                let mut image: Vec<u32> =
                    families[j].ids().iter().map(|&id| perm[id as usize]).collect();
                image.sort_unstable();
                if let Some(&t) = index.get(&image) {
                    if orbit[t] == usize::MAX {
                        orbit[t] = label;
                        stack.push(t);
                    }
                }
            }
        }
    }
    next
}

/// Odd induced fork theorem: hypothesis `k, l <= (1 - sqrt(2)/2) q`; the
/// `k = l = 2` case rests on the weaker double-count conditions and is
/// checked for every `q >= 2`.
fn verify_odd_induced(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = require_n(params)?;
    let q = require_q(params)?;
    let (k, l) = (params.k.unwrap_or(2), params.l.unwrap_or(2));
    if n % 2 == 0 {
        return Err(VerifyError::Invalid(format!("requires odd n (got {n})")));
    }
    // k <= (1 - sqrt(2)/2) q  <=>  2 q^2 <= 4 (q - k)^2 and k <= q.
    let hyp = |x: usize| x as u64 <= q && 2 * q * q <= 4 * (q - x as u64).pow(2);
    let hypothesis = hyp(k) && hyp(l);
    if !hypothesis && (k, l) != (2, 2) {
        return Err(VerifyError::OutOfGuard(format!(
            "hypothesis k, l <= (1 - sqrt(2)/2) q fails for k={k}, l={l}, q={q} and no weaker \
             route applies"
        )));
    }
    let mut verdict = verify_fork_theorem("thm_1.7", params, true, k, l)?;
    if !hypothesis {
        verdict.notes.push(format!(
            "k = l = 2 handled by the weaker conditions: the size bound needs q^2 - q - 1 > 0 \
             (q >= 2), the structure claim needs q^2 - 3q + 1 > 0 (q >= 3); here q = {q}"
        ));
        if q == 2 && n == 3 {
            verdict.notes.push(
                "q = 2, n = 3 is the documented exception with non-level extremal families".into(),
            );
        }
    }
    Ok(verdict)
}

fn verify_y_forks(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = require_n(params)?;
    let q = require_q(params)?;
    let k = params.k.unwrap_or(2);
    if k == 0 || n < k + 1 {
        return Err(VerifyError::Invalid(format!("requires 1 <= k and n >= k+1 (n={n}, k={k})")));
    }
    let lat = lattice(n, q)?;
    if lat.count() > 28 && params.budget.max_nodes.is_none() {
        return Err(VerifyError::OutOfGuard(format!(
            "exact search over {} elements needs an explicit node budget",
            lat.count()
        )));
    }
    let expected = to_u64(&sigma_q(n as u32, k as u32, q as u32).map_err(|e| VerifyError::Invalid(e.to_string()))?);
    let forbidden = vec![
        named_poset(&format!("Y:{k}")).expect("valid"),
        named_poset(&format!("Y':{k}")).expect("valid"),
    ];
    let mut problem = SearchProblem::new(Arc::clone(&lat), forbidden, true);
    problem.mode = SearchMode::EnumerateExtremal;
    problem.threads = params.threads;
    problem.budget = params.budget;
    let report = solve(&problem);
    if !report.completed {
        return Err(VerifyError::Budget("search incomplete".into()));
    }
    let extremal = report.extremal.clone().unwrap_or_default();
    // The k (or k+1) largest levels; for n - k odd the union of the k
    // middle levels is the unique candidate shape.
    let middle_union = middle_levels_union(&lat, n, k);
    let union_is_extremal = extremal.contains(&middle_union);
    let pass = report.optimum as u64 == expected && union_is_extremal;
    Ok(TheoremVerdict {
        id: "thm_4.2".into(),
        pass,
        details: json!({
            "n": n,
            "q": q,
            "k": k,
            "optimum": report.optimum,
            "expected": expected,
            "extremal_count": extremal.len(),
            "middle_union_is_extremal": union_is_extremal,
            "nodes": report.stats.nodes,
        }),
        notes: vec![],
    })
}

fn middle_levels_union(lat: &Arc<LinearLattice>, n: usize, k: usize) -> Family {
    // k consecutive levels centered on n/2, preferring the larger side the
    // way the level sizes do.
    let mut levels: Vec<usize> = (0..=n).collect();
    levels.sort_by_key(|&i| ((2 * i).abs_diff(n), i));
    let mut chosen: Vec<usize> = levels.into_iter().take(k).collect();
    chosen.sort_unstable();
    union_of_levels(Arc::clone(lat), &chosen).expect("valid levels")
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoLevelVerdict {
    pub q: u64,
    pub k: usize,
    pub l: usize,
    pub optimum: usize,
    pub bound_value: u64,
    pub extremal_count: usize,
    pub level_extremal_count: usize,
    pub non_level_extremal_count: usize,
    pub bound_condition_holds: bool,
    pub structure_condition_holds: bool,
    pub nodes: u64,
}

/// Exact optimum over families inside levels 1 and 2 of `L(3, q)`, checked
/// against the projective-plane bound `q^2 + q + 1` and the two displayed
/// sufficient conditions for it.
pub fn solve_restricted_two_levels(
    q: u64,
    k: usize,
    l: usize,
    threads: usize,
    budget: SearchBudget,
) -> Result<TwoLevelVerdict, VerifyError> {
    if !(2..=4).contains(&q) {
        return Err(VerifyError::OutOfGuard(format!("two-level search supports q in 2..=4 (got {q})")));
    }
    let lat = lattice(3, q)?;
    let mut problem = SearchProblem::new(Arc::clone(&lat), forks(k, l), false);
    problem.dim_range = (1, 2);
    problem.mode = SearchMode::EnumerateExtremal;
    problem.threads = threads;
    problem.budget = budget;
    let report = solve(&problem);
    if !report.completed {
        return Err(VerifyError::Budget("two-level search incomplete".into()));
    }
    let extremal = report.extremal.unwrap_or_default();
    let levels = [
        level_family(Arc::clone(&lat), 1).expect("valid"),
        level_family(Arc::clone(&lat), 2).expect("valid"),
    ];
    let level_extremal_count = extremal.iter().filter(|f| levels.contains(f)).count();

    let (qi, ki, li) = (q as i64, k as i64, l as i64);
    let plane = qi * qi + qi + 1;
    let bound_condition_holds =
        plane < (qi + 3 - li) * (qi + 1 - li) + (qi + 3 - ki) * (qi + 1 - ki) + 2;
    let structure_condition_holds =
        plane < (qi + 2 - li) * (qi + 1 - li) + (qi + 2 - ki) * (qi + 1 - ki) + 2;

    Ok(TwoLevelVerdict {
        q,
        k,
        l,
        optimum: report.optimum,
        bound_value: plane as u64,
        extremal_count: extremal.len(),
        level_extremal_count,
        non_level_extremal_count: extremal.len() - level_extremal_count,
        bound_condition_holds,
        structure_condition_holds,
        nodes: report.stats.nodes,
    })
}

fn verify_two_level_lemma(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let q = require_q(params)?;
    let (k, l) = (params.k.unwrap_or(2), params.l.unwrap_or(2));
    let v = solve_restricted_two_levels(q, k, l, params.threads, params.budget)?;
    let mut pass = true;
    let mut notes = vec![
        "within two consecutive levels, induced and non-induced fork copies coincide".to_string(),
    ];
    if v.bound_condition_holds {
        pass &= v.optimum as u64 == v.bound_value;
    } else {
        notes.push("size-bound condition fails; the optimum is reported without comparison".into());
    }
    if v.structure_condition_holds {
        pass &= v.non_level_extremal_count == 0 && v.level_extremal_count == 2;
    } else {
        notes.push("structure condition fails; non-level extremal families are expected".into());
    }
    Ok(TheoremVerdict {
        id: "lemma_3.2".into(),
        pass,
        details: serde_json::to_value(&v).expect("serializable"),
        notes,
    })
}

fn verify_cyclic_alpha(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = require_n(params)?;
    let k = params.k.ok_or_else(|| VerifyError::Invalid("missing parameter k".into()))?;
    let h = lym::cyclic_intervals(n).map_err(|e| VerifyError::Invalid(e.to_string()))?;
    let forbidden = vec![
        named_poset(&format!("Y:{k}")).expect("valid"),
        named_poset(&format!("Y':{k}")).expect("valid"),
    ];
    let alpha = lym::alpha(&h, &forbidden, true, None)
        .map_err(|e| VerifyError::Budget(e.to_string()))?;
    let expected = k * n;
    Ok(TheoremVerdict {
        id: "lemma_4.2".into(),
        pass: alpha == expected,
        details: json!({
            "n": n,
            "k": k,
            "alpha": alpha,
            "expected": expected,
        }),
        notes: vec![],
    })
}

fn verify_eq1(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = require_n(params)?;
    let q = require_q(params)?;
    let v = lym::eq1_identity_check(n as u32, q as u32)
        .map_err(|e| VerifyError::Invalid(e.to_string()))?;
    Ok(TheoremVerdict {
        id: "eq1".into(),
        pass: v.holds,
        details: json!({
            "n": n,
            "q": q,
            "lhs": v.lhs.to_string(),
            "rhs": v.rhs.to_string(),
        }),
        notes: vec![],
    })
}

fn verify_double_chain(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = params.n.unwrap_or(6);
    let d = lym::double_chain(n).map_err(|e| VerifyError::Invalid(e.to_string()))?;
    let mut rows = Vec::new();
    let mut pass = true;
    for name in ["V:2", "L:2", "B", "Y:2", "C:3"] {
        let p = named_poset(name).expect("valid");
        let expected = p.size() + p.height() - 2;
        let got = lym::alpha(&d, std::slice::from_ref(&p), false, None)
            .map_err(|e| VerifyError::Budget(e.to_string()))?;
        pass &= got == expected;
        rows.push(json!({
            "pattern": name,
            "alpha": got,
            "expected": expected,
        }));
    }
    Ok(TheoremVerdict {
        id: "double_chain".into(),
        pass,
        details: json!({ "n": n, "grid": rows }),
        notes: vec![],
    })
}

/// Seeded random fork-free families pushed down to the floor; every sample
/// must keep its size, stay free (re-checked by the independent embedding
/// route), and land at or below the floor, with no matching failure.
fn verify_pushdown_suite(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = params.n.unwrap_or(4);
    let q = params.q.unwrap_or(2);
    let (k, l) = (params.k.unwrap_or(2), params.l.unwrap_or(2));
    let lat = lattice(n, q)?;
    let floor = n / 2;
    let forbidden = forks(k, l);

    // Seeds drawn up front so generation is independent of scheduling.
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let sample_seeds: Vec<u64> = (0..params.samples).map(|_| master.random()).collect();

    #[derive(Default)]
    struct Tally {
        hall_failures: u64,
        size_violations: u64,
        freeness_violations: u64,
        support_violations: u64,
        other_errors: u64,
        max_steps: usize,
    }
    let outcomes: Vec<Tally> = crate::exec::map_collect(params.threads, sample_seeds, |s| {
        let mut tally = Tally::default();
        let f = random_fork_free_family(&lat, &forbidden, floor, s);
        match pushdown(&f, false, k, l, Some(floor)) {
            Ok(out) => {
                tally.max_steps = out.steps.len();
                if out.family.len() != f.len() {
                    tally.size_violations = 1;
                }
                let fast = fast_free_check(&out.family, &forbidden, false).unwrap_or(false);
                let slow = is_free(&out.family, &forbidden, false);
                if !(fast && slow) {
                    tally.freeness_violations = 1;
                }
                if out.family.max_dim().is_some_and(|d| d > floor) {
                    tally.support_violations = 1;
                }
            }
            Err(TransformError::HallFailure { .. }) => tally.hall_failures = 1,
            Err(_) => tally.other_errors = 1,
        }
        tally
    });
    let mut total = Tally::default();
    for t in outcomes {
        total.hall_failures += t.hall_failures;
        total.size_violations += t.size_violations;
        total.freeness_violations += t.freeness_violations;
        total.support_violations += t.support_violations;
        total.other_errors += t.other_errors;
        total.max_steps = total.max_steps.max(t.max_steps);
    }
    let pass = total.hall_failures == 0
        && total.size_violations == 0
        && total.freeness_violations == 0
        && total.support_violations == 0
        && total.other_errors == 0;
    Ok(TheoremVerdict {
        id: "pushdown_suite".into(),
        pass,
        details: json!({
            "n": n,
            "q": q,
            "k": k,
            "l": l,
            "floor": floor,
            "samples": params.samples,
            "seed": params.seed,
            "hall_failures": total.hall_failures,
            "size_violations": total.size_violations,
            "freeness_violations": total.freeness_violations,
            "support_violations": total.support_violations,
            "other_errors": total.other_errors,
            "max_steps_in_a_sample": total.max_steps,
        }),
        notes: vec!["samples are greedy maximal fork-free families supported above the floor".into()],
    })
}

/// Greedy fork-free family over the levels above (and including) the floor,
/// in a seeded random insertion order.
fn random_fork_free_family(
    lat: &Arc<LinearLattice>,
    forbidden: &[PosetSpec],
    floor: usize,
    seed: u64,
) -> Family {
    random_fork_free_family_mode(lat, forbidden, floor, seed, false)
}

fn random_fork_free_family_mode(
    lat: &Arc<LinearLattice>,
    forbidden: &[PosetSpec],
    floor: usize,
    seed: u64,
    induced: bool,
) -> Family {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<u32> = (0..lat.count() as u32)
        .filter(|&id| lat.dim_of(id as usize) >= floor)
        .collect();
    ids.shuffle(&mut rng);
    // Drop a random fraction so the samples vary in density, not just order.
    let keep = rng.random_range(ids.len() / 3..=ids.len());
    ids.truncate(keep);
    let mut fam = Family::empty(Arc::clone(lat));
    for id in ids {
        let candidate = fam.inserted(id);
        if fast_free_check(&candidate, forbidden, induced).unwrap_or(false) {
            fam = candidate;
        }
    }
    fam
}

/// Exhaustive M(A) sweep: every induced down-fork-free family of bounded
/// size (over positive dimensions) and every member satisfies the three
/// neighborhood properties, including the size bound.
fn verify_ma_bound(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = params.n.unwrap_or(3);
    let q = params.q.unwrap_or(2);
    let l = params.l.unwrap_or(2);
    let max_size = params.k.unwrap_or(5);
    let lat = lattice(n, q)?;
    let ids: Vec<u32> = (0..lat.count() as u32)
        .filter(|&id| lat.dim_of(id as usize) >= 1)
        .collect();
    if ids.len() > 20 {
        return Err(VerifyError::OutOfGuard(format!(
            "sweep needs 2^{} masks",
            ids.len()
        )));
    }
    let lambda = vec![named_poset(&format!("L:{l}")).expect("valid")];
    let mut families_checked = 0u64;
    let mut ma_sets_checked = 0u64;
    let mut bound_violations = 0u64;
    let mut disjointness_violations = 0u64;
    let mut small_containment_violations = 0u64;
    let qb = |m: u32| to_u64(&crate::qarith::q_bracket(m, q as u32));
    for mask in 0u64..(1 << ids.len()) {
        if (mask.count_ones() as usize) > max_size {
            continue;
        }
        let picked: Vec<u32> = (0..ids.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| ids[i])
            .collect();
        let fam = Family::from_ids(Arc::clone(&lat), &picked);
        if !fast_free_check(&fam, &lambda, true).unwrap_or(false) {
            continue;
        }
        families_checked += 1;
        for &a in &picked {
            let s = lat.dim_of(a as usize) as u32;
            let ma = crate::transforms::build_ma(&fam, a, l)
                .map_err(|e| VerifyError::Invalid(format!("unexpected M(A) failure: {e}")))?;
            ma_sets_checked += 1;
            let lower = qb(s) as i64 - (l as i64 - 1) * qb(s - 1) as i64;
            if (ma.members.len() as i64) < lower {
                bound_violations += 1;
            }
            for &b in &ma.members {
                if fam.contains(b) {
                    disjointness_violations += 1;
                }
                for &m in &picked {
                    if lat.dim_of(m as usize) + 2 <= s as usize
                        && lat.leq(m as usize, b as usize)
                    {
                        small_containment_violations += 1;
                    }
                }
            }
        }
    }
    let pass =
        bound_violations == 0 && disjointness_violations == 0 && small_containment_violations == 0;
    Ok(TheoremVerdict {
        id: "ma_bound".into(),
        pass,
        details: json!({
            "n": n,
            "q": q,
            "l": l,
            "max_size": max_size,
            "families_checked": families_checked,
            "ma_sets_checked": ma_sets_checked,
            "size_bound_violations": bound_violations,
            "disjointness_violations": disjointness_violations,
            "low_member_containment_violations": small_containment_violations,
        }),
        notes: vec![
            "families range over positive dimensions: a zero-dimensional small member admits no \
             pin, so the construction is undefined there"
                .into(),
        ],
    })
}

fn verify_lym_sweep(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = params.n.unwrap_or(3);
    let q = params.q.unwrap_or(2);
    let lat = lattice(n, q)?;
    let h = lym::cyclic_intervals(n).map_err(|e| VerifyError::Invalid(e.to_string()))?;
    let v = lym::v2_free_lym_sweep(&lat, &h, params.threads)
        .map_err(|e| VerifyError::OutOfGuard(e.to_string()))?;
    Ok(TheoremVerdict {
        id: "lym_sweep".into(),
        pass: v.violations == 0,
        details: json!({
            "n": n,
            "q": q,
            "families_checked": v.families_checked,
            "free_families": v.free_families,
            "violations": v.violations,
            "alpha": v.alpha,
        }),
        notes: vec![],
    })
}

fn verify_basis_map(params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let n = require_n(params)?;
    let q = require_q(params)?;
    let lat = lattice(n, q)?;
    let mut rows = Vec::new();
    let mut pass = true;
    let structures: Vec<(&str, lym::SimpleFamily)> = vec![
        (
            "cyclic_intervals",
            lym::cyclic_intervals(n).map_err(|e| VerifyError::Invalid(e.to_string()))?,
        ),
        ("maximal_chain", lym::maximal_chain_family(n)),
    ];
    for (name, h) in &structures {
        let v = lym::ordered_basis_double_count(&lat, h)
            .map_err(|e| VerifyError::OutOfGuard(e.to_string()))?;
        pass &= v.holds;
        rows.push(json!({
            "structure": name,
            "holds": v.holds,
            "bases": v.bases_enumerated,
            "observed": v.observed.iter().map(BigUint::to_string).collect::<Vec<_>>(),
            "expected": v.expected.iter().map(BigUint::to_string).collect::<Vec<_>>(),
        }));
    }
    Ok(TheoremVerdict {
        id: "basis_map".into(),
        pass,
        details: json!({ "n": n, "q": q, "structures": rows }),
        notes: vec![],
    })
}

fn verify_bounds(_params: &VerifyParams) -> Result<TheoremVerdict, VerifyError> {
    let mut rows = Vec::new();
    let mut pass = true;
    for name in ["B", "V:2", "Y:2"] {
        let p = named_poset(name).expect("valid");
        for n in [2usize, 4] {
            for q in [2u64, 3] {
                let bn = bn_bound(&p, n as u32, q as u32);
                let gm2 = gm_bound(&p, n as u32, q as u32, 2).expect("k = 2 valid");
                let gm3 = gm_bound(&p, n as u32, q as u32, 3).expect("k = 3 valid");
                pass &= bn.exact == gm2.exact;
                rows.push(json!({
                    "pattern": name,
                    "n": n,
                    "q": q,
                    "bn_exact": rational_string(&bn.exact),
                    "bn_floor": bn.floor.to_string(),
                    "gm_k2_exact": rational_string(&gm2.exact),
                    "gm_k3_exact": rational_string(&gm3.exact),
                    "gm_k3_floor": gm3.floor.to_string(),
                }));
            }
        }
    }
    Ok(TheoremVerdict {
        id: "bounds".into(),
        pass,
        details: json!({ "grid": rows }),
        notes: vec!["the width-2 interval bound coincides with the chain-pair bound".into()],
    })
}
