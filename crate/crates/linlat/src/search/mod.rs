//! Exact computation of the extremal functions by branch and bound over
//! lattice elements, with optional extremal-family enumeration.
//!
//! A run has two passes. The first finds the optimum value with an atomic
//! shared bound; workers explore disjoint subtrees and merge by max. The
//! second pass re-walks the tree against the now-fixed optimum, which makes
//! its pruning decisions (and therefore node counts and the extremal list)
//! independent of the worker count: completed reports are identical for any
//! number of threads.

pub mod verify;

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use crate::bits::BitSet;
use crate::families::Family;
use crate::lattice::LinearLattice;
use crate::posets::PosetSpec;

/// Node limit for a run; `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    MaxSize,
    EnumerateExtremal,
}

#[derive(Clone)]
pub struct SearchProblem {
    pub lattice: Arc<LinearLattice>,
    pub forbidden: Vec<PosetSpec>,
    pub induced: bool,
    /// Inclusive dimension filter on candidate elements.
    pub dim_range: (usize, usize),
    pub mode: SearchMode,
    pub budget: SearchBudget,
    pub threads: usize,
    /// Restrict the first included element to one representative per level.
    /// Sound for the optimum value only; ignored (with a note) otherwise.
    pub symmetry_reduction: bool,
}

impl SearchProblem {
    pub fn new(lattice: Arc<LinearLattice>, forbidden: Vec<PosetSpec>, induced: bool) -> Self {
        let n = lattice.n();
        SearchProblem {
            lattice,
            forbidden,
            induced,
            dim_range: (0, n),
            mode: SearchMode::MaxSize,
            budget: SearchBudget::default(),
            threads: 1,
            symmetry_reduction: false,
        }
    }
}

/// Counters from the deterministic certification pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneStats {
    pub nodes: u64,
    pub bound_pruned: u64,
    pub infeasible_skips: u64,
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub optimum: usize,
    /// False when the node budget was exhausted; the optimum is then only a
    /// lower bound and the extremal list may be incomplete.
    pub completed: bool,
    pub extremal: Option<Vec<Family>>,
    pub stats: PruneStats,
    pub notes: Vec<String>,
}

/// Candidate elements in branch order: middle levels first, then by level,
/// then by element id.
fn branch_order(lat: &LinearLattice, dim_range: (usize, usize)) -> Vec<u32> {
    let n = lat.n();
    let mut ids: Vec<u32> = (0..lat.count() as u32)
        .filter(|&id| {
            let d = lat.dim_of(id as usize);
            d >= dim_range.0 && d <= dim_range.1
        })
        .collect();
    ids.sort_by_key(|&id| {
        let d = lat.dim_of(id as usize);
        ((2 * d).abs_diff(n), d, id)
    });
    ids
}

/// Decomposed forbidden set: fork widths handled incrementally, everything
/// else by forced-element embedding checks.
struct Checker<'a> {
    lat: &'a LinearLattice,
    induced: bool,
    fork_up: Option<usize>,
    fork_down: Option<usize>,
    generic: Vec<&'a PosetSpec>,
}

impl<'a> Checker<'a> {
    fn new(lat: &'a LinearLattice, forbidden: &'a [PosetSpec], induced: bool) -> Checker<'a> {
        let mut fork_up: Option<usize> = None;
        let mut fork_down: Option<usize> = None;
        let mut generic = Vec::new();
        for p in forbidden {
            if let Some(k) = p.v_shape() {
                fork_up = Some(fork_up.map_or(k, |m: usize| m.min(k)));
            } else if let Some(l) = p.lambda_shape() {
                fork_down = Some(fork_down.map_or(l, |m: usize| m.min(l)));
            } else {
                generic.push(p);
            }
        }
        Checker { lat, induced, fork_up, fork_down, generic }
    }

    /// Would `fam ∪ {c}` still avoid every forbidden pattern?
    fn can_add(&self, c: u32, fam: &BitSet, members: &[u32]) -> bool {
        let lat = self.lat;
        let c = c as usize;
        let strict =
            |set: &BitSet, x: usize| -> Vec<u32> {
                let mut s = set.clone();
                s.intersect_with(fam);
                s.remove(x);
                s.iter_ones().map(|i| i as u32).collect()
            };
        if let Some(k) = self.fork_up {
            let ups = strict(lat.up_set(c), c);
            if self.violates_up_fork(c, &ups, fam, k) {
                return false;
            }
        }
        if let Some(l) = self.fork_down {
            let downs = strict(lat.down_set(c), c);
            if self.violates_down_fork(c, &downs, fam, l) {
                return false;
            }
        }
        if !self.generic.is_empty() {
            let mut with_c: Vec<u32> = members.to_vec();
            with_c.push(c as u32);
            with_c.sort_unstable();
            for p in &self.generic {
                if self.embeds_using(p, &with_c, c as u32) {
                    return false;
                }
            }
        }
        true
    }

    fn violates_up_fork(&self, c: usize, ups_of_c: &[u32], fam: &BitSet, k: usize) -> bool {
        let lat = self.lat;
        if self.induced {
            if has_antichain_ids(lat, ups_of_c, k) {
                return true;
            }
            // Members below c gain c in their up-sets: an antichain of size
            // k-1 among their old up-sets, all incomparable with c, extends
            // to size k through c.
            for m in fam.iter_ones() {
                if !lat.lt(m, c) {
                    continue;
                }
                let incomparable: Vec<u32> = fam
                    .iter_ones()
                    .filter(|&x| x != m && lat.lt(m, x))
                    .filter(|&x| !lat.leq(x, c) && !lat.leq(c, x))
                    .map(|x| x as u32)
                    .collect();
                if has_antichain_ids(lat, &incomparable, k - 1) {
                    return true;
                }
            }
            false
        } else {
            if ups_of_c.len() >= k {
                return true;
            }
            // Members below c gain one strict superspace.
            fam.iter_ones().any(|m| {
                lat.lt(m, c) && lat.up_set(m).intersection_count(fam) /* includes m */ >= k
            })
        }
    }

    fn violates_down_fork(&self, c: usize, downs_of_c: &[u32], fam: &BitSet, l: usize) -> bool {
        let lat = self.lat;
        if self.induced {
            if has_antichain_ids(lat, downs_of_c, l) {
                return true;
            }
            for m in fam.iter_ones() {
                if !lat.lt(c, m) {
                    continue;
                }
                let incomparable: Vec<u32> = fam
                    .iter_ones()
                    .filter(|&x| x != m && lat.lt(x, m))
                    .filter(|&x| !lat.leq(x, c) && !lat.leq(c, x))
                    .map(|x| x as u32)
                    .collect();
                if has_antichain_ids(lat, &incomparable, l - 1) {
                    return true;
                }
            }
            false
        } else {
            if downs_of_c.len() >= l {
                return true;
            }
            fam.iter_ones().any(|m| {
                lat.lt(c, m) && lat.down_set(m).intersection_count(fam) /* includes m */ >= l
            })
        }
    }

    /// Does `p` embed into `members` with some pattern element mapped to
    /// `forced`? `members` must be free of `p` without `forced`.
    fn embeds_using(&self, p: &PosetSpec, members: &[u32], forced: u32) -> bool {
        let lat = self.lat;
        let lt = |a: usize, b: usize| lat.lt(members[a] as usize, members[b] as usize);
        let forced_pos = members.binary_search(&forced).expect("forced is a member");
        crate::posets::embeds_forced(p, members.len(), lt, forced_pos, self.induced)
    }
}

/// Antichain of the given size among lattice element ids.
fn has_antichain_ids(lat: &LinearLattice, ids: &[u32], size: usize) -> bool {
    if size == 0 {
        return true;
    }
    if ids.len() < size {
        return false;
    }
    let first = ids[0] as usize;
    let rest = &ids[1..];
    let incomparable: Vec<u32> = rest
        .iter()
        .copied()
        .filter(|&x| !lat.leq(first, x as usize) && !lat.leq(x as usize, first))
        .collect();
    has_antichain_ids(lat, &incomparable, size - 1) || has_antichain_ids(lat, rest, size)
}

/// Feasible prefixes over the first `depth` elements of the branch order.
/// Purely a function of the problem, so every run splits the tree the same
/// way regardless of thread count.
fn expand_frontier(
    order: &[u32],
    checker: &Checker<'_>,
    universe: usize,
    depth: usize,
) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut fam = BitSet::new(universe);
    let mut members: Vec<u32> = Vec::new();
    fn rec(
        order: &[u32],
        checker: &Checker<'_>,
        depth: usize,
        idx: usize,
        fam: &mut BitSet,
        members: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if idx == depth {
            out.push(members.clone());
            return;
        }
        let c = order[idx];
        if checker.can_add(c, fam, members) {
            fam.insert(c as usize);
            members.push(c);
            rec(order, checker, depth, idx + 1, fam, members, out);
            members.pop();
            fam.remove(c as usize);
        }
        rec(order, checker, depth, idx + 1, fam, members, out);
    }
    rec(order, checker, depth, 0, &mut fam, &mut members, &mut out);
    out
}

const FRONTIER_DEPTH: usize = 10;

struct Shared<'a> {
    order: &'a [u32],
    checker: &'a Checker<'a>,
    best: AtomicUsize,
    nodes: AtomicU64,
    budget: Option<u64>,
    aborted: AtomicBool,
    symmetry_first: Option<Vec<u32>>,
}

impl Shared<'_> {
    fn tick(&self) -> bool {
        // The counter is shared only to enforce the budget; unlimited runs
        // skip it entirely.
        if let Some(limit) = self.budget {
            let n = self.nodes.fetch_add(1, Ordering::Relaxed);
            if n >= limit {
                self.aborted.store(true, Ordering::Relaxed);
                return false;
            }
            return !self.aborted.load(Ordering::Relaxed);
        }
        true
    }

    fn include_allowed(&self, c: u32, members: &[u32]) -> bool {
        match &self.symmetry_first {
            Some(reps) if members.is_empty() => reps.contains(&c),
            _ => true,
        }
    }
}

fn dfs_best(shared: &Shared<'_>, idx: usize, fam: &mut BitSet, members: &mut Vec<u32>) {
    if !shared.tick() {
        return;
    }
    let cur = members.len();
    let remaining = shared.order.len() - idx;
    let best_seen = shared.best.load(Ordering::Relaxed);
    if cur + remaining <= best_seen {
        return;
    }
    if idx == shared.order.len() {
        shared.best.fetch_max(cur, Ordering::Relaxed);
        return;
    }
    let c = shared.order[idx];
    if shared.include_allowed(c, members) && shared.checker.can_add(c, fam, members) {
        fam.insert(c as usize);
        members.push(c);
        if members.len() > best_seen {
            shared.best.fetch_max(members.len(), Ordering::Relaxed);
        }
        dfs_best(shared, idx + 1, fam, members);
        members.pop();
        fam.remove(c as usize);
    }
    dfs_best(shared, idx + 1, fam, members);
}

struct CertOutcome {
    stats: PruneStats,
    found: Vec<BitSet>,
    overshoot: bool,
}

fn dfs_certify(
    shared: &Shared<'_>,
    threshold: usize,
    enumerate: bool,
    idx: usize,
    fam: &mut BitSet,
    members: &mut Vec<u32>,
    out: &mut CertOutcome,
) {
    out.stats.nodes += 1;
    if let Some(limit) = shared.budget {
        if shared.nodes.fetch_add(1, Ordering::Relaxed) >= limit {
            shared.aborted.store(true, Ordering::Relaxed);
        }
    }
    if shared.aborted.load(Ordering::Relaxed) {
        return;
    }
    let cur = members.len();
    let remaining = shared.order.len() - idx;
    let reachable = cur + remaining;
    let prune = if enumerate { reachable < threshold } else { reachable <= threshold };
    if prune {
        out.stats.bound_pruned += 1;
        return;
    }
    if idx == shared.order.len() {
        if cur > threshold {
            out.overshoot = true;
        }
        if enumerate && cur >= threshold {
            out.found.push(fam.clone());
        }
        return;
    }
    let c = shared.order[idx];
    if shared.include_allowed(c, members) {
        if shared.checker.can_add(c, fam, members) {
            fam.insert(c as usize);
            members.push(c);
            dfs_certify(shared, threshold, enumerate, idx + 1, fam, members, out);
            members.pop();
            fam.remove(c as usize);
        } else {
            out.stats.infeasible_skips += 1;
        }
    }
    dfs_certify(shared, threshold, enumerate, idx + 1, fam, members, out);
}

/// Exact optimum (and extremal families, if requested) for a search problem.
pub fn solve(problem: &SearchProblem) -> SearchReport {
    let lat = problem.lattice.as_ref();
    let n = lat.n();
    let mut notes = Vec::new();
    let (lo, hi) = problem.dim_range;
    assert!(lo <= hi && hi <= n, "dimension range {lo}..={hi} invalid for n={n}");
    notes.push(format!("dimension filter {lo}..={hi} over L({n}, {})", lat.q()));

    for p in &problem.forbidden {
        if let Some(w) = p.v_shape().or_else(|| p.lambda_shape()) {
            if w < 2 {
                notes.push(
                    "forbidden set contains a 2-chain (fork of width 1); the usual convention \
                     assumes widths >= 2"
                        .to_string(),
                );
                let _ = w;
                break;
            }
        }
    }

    let order = branch_order(lat, problem.dim_range);
    let checker = Checker::new(lat, &problem.forbidden, problem.induced);

    // Whole levels are feasible whenever every pattern has a relation.
    let all_tall = problem.forbidden.iter().all(|p| p.height() >= 2);
    let initial_bound = if all_tall {
        (lo..=hi).map(|k| lat.level_size(k)).max().unwrap_or(0)
    } else {
        0
    };

    let symmetry_first = if problem.symmetry_reduction {
        if n == 3 && problem.mode == SearchMode::MaxSize {
            notes.push("symmetry reduction: first included element restricted to level representatives".into());
            Some((lo..=hi).map(|k| lat.level_range(k).start as u32).collect())
        } else {
            notes.push("symmetry reduction requested but ignored (needs n = 3 and max-size mode)".into());
            None
        }
    } else {
        None
    };

    let depth = FRONTIER_DEPTH.min(order.len());
    let prefixes = expand_frontier(&order, &checker, lat.count(), depth);

    // Pass 1: optimum value with a shared bound.
    let shared = Shared {
        order: &order,
        checker: &checker,
        best: AtomicUsize::new(initial_bound),
        nodes: AtomicU64::new(0),
        budget: problem.budget.max_nodes,
        aborted: AtomicBool::new(false),
        symmetry_first: symmetry_first.clone(),
    };
    let tasks: Vec<Vec<u32>> = prefixes.clone();
    crate::exec::map_collect(problem.threads, tasks, |members| {
        if members.len() + (order.len() - depth) <= shared.best.load(Ordering::Relaxed) {
            return;
        }
        // Symmetry rule: a nonempty prefix has already fixed its first
        // element; empty prefixes continue under the rule.
        let mut fam = BitSet::new(lat.count());
        for &m in &members {
            fam.insert(m as usize);
        }
        let mut members = members;
        dfs_best(&shared, depth, &mut fam, &mut members);
    });
    if shared.aborted.load(Ordering::Relaxed) {
        return SearchReport {
            optimum: shared.best.load(Ordering::Relaxed),
            completed: false,
            extremal: None,
            stats: PruneStats::default(),
            notes,
        };
    }
    let optimum = shared.best.load(Ordering::Relaxed);

    // Pass 2: deterministic certification / enumeration against the fixed
    // optimum.
    let enumerate = problem.mode == SearchMode::EnumerateExtremal;
    let cert = Shared {
        order: &order,
        checker: &checker,
        best: AtomicUsize::new(optimum),
        nodes: AtomicU64::new(0),
        budget: problem.budget.max_nodes,
        aborted: AtomicBool::new(false),
        symmetry_first,
    };
    let outcomes: Vec<CertOutcome> = crate::exec::map_collect(problem.threads, prefixes, |members| {
        let mut out = CertOutcome { stats: PruneStats::default(), found: Vec::new(), overshoot: false };
        let mut fam = BitSet::new(lat.count());
        for &m in &members {
            fam.insert(m as usize);
        }
        let mut members = members;
        dfs_certify(&cert, optimum, enumerate, depth, &mut fam, &mut members, &mut out);
        out
    });
    let completed = !cert.aborted.load(Ordering::Relaxed);
    let mut stats = PruneStats::default();
    let mut found: Vec<BitSet> = Vec::new();
    let mut overshoot = false;
    for o in outcomes {
        stats.nodes += o.stats.nodes;
        stats.bound_pruned += o.stats.bound_pruned;
        stats.infeasible_skips += o.stats.infeasible_skips;
        found.extend(o.found);
        overshoot |= o.overshoot;
    }
    assert!(!overshoot, "certification pass found a family larger than the computed optimum");

    let extremal = if enumerate {
        found.sort();
        Some(
            found
                .into_iter()
                .map(|bits| Family::from_bitset(Arc::clone(&problem.lattice), bits))
                .collect(),
        )
    } else {
        None
    };
    SearchReport { optimum, completed, extremal, stats, notes }
}

/// Plain exhaustive scan over every subset of the candidate elements; the
/// independent oracle for small lattices (at most 24 candidates).
pub fn exhaustive_scan(
    lattice: &Arc<LinearLattice>,
    forbidden: &[PosetSpec],
    induced: bool,
    dim_range: (usize, usize),
    threads: usize,
) -> (usize, Vec<Family>) {
    let lat = lattice.as_ref();
    let ids: Vec<u32> = (0..lat.count() as u32)
        .filter(|&id| {
            let d = lat.dim_of(id as usize);
            d >= dim_range.0 && d <= dim_range.1
        })
        .collect();
    assert!(ids.len() <= 24, "exhaustive scan is limited to 24 candidates");
    let total: u64 = 1 << ids.len();
    let chunk = 1u64 << ids.len().saturating_sub(6);
    let ranges: Vec<(u64, u64)> = (0..total)
        .step_by(chunk as usize)
        .map(|start| (start, (start + chunk).min(total)))
        .collect();
    let per_chunk: Vec<(usize, Vec<BitSet>)> = crate::exec::map_collect(threads, ranges, |(a, b)| {
        let mut best = 0usize;
        let mut extremal: Vec<BitSet> = Vec::new();
        for mask in a..b {
            let picked: Vec<u32> = ids
                .iter()
                .enumerate()
                .filter(|&(i, _)| mask >> i & 1 == 1)
                .map(|(_, &id)| id)
                .collect();
            if picked.len() < best {
                continue;
            }
            let fam = Family::from_ids(Arc::clone(lattice), &picked);
            if crate::posets::is_free(&fam, forbidden, induced) {
                if picked.len() > best {
                    best = picked.len();
                    extremal.clear();
                }
                extremal.push(fam.members().clone());
            }
        }
        (best, extremal)
    });
    let best = per_chunk.iter().map(|(b, _)| *b).max().unwrap_or(0);
    let mut all: Vec<BitSet> = per_chunk
        .into_iter()
        .flat_map(|(b, sets)| if b == best { sets } else { Vec::new() })
        .filter(|s| s.count() == best)
        .collect();
    all.sort();
    (
        best,
        all.into_iter()
            .map(|bits| Family::from_bitset(Arc::clone(lattice), bits))
            .collect(),
    )
}
