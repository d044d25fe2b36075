//! Constructive transformations of families: matching-based replacement of a
//! family's extreme levels by fresh elements one level toward the middle,
//! preserving size and freeness.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::families::Family;
use crate::lattice::LinearLattice;
use crate::posets::{fast_free_check, named_poset, PosetError};
use crate::qarith::{q_bracket, rational_string, to_u64};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("element {0} is not a member of the family")]
    NotAMember(u32),
    #[error("freeness hypothesis violated: {0}")]
    FreenessViolated(String),
    #[error("no saturating matching at level {level}: matched {matched} of {needed}")]
    HallFailure { level: usize, matched: usize, needed: usize },
    #[error("family stopped being free after replacing level {0}; internal invariant broken")]
    FreenessViolatedAfterStep(usize),
    #[error("small member {0} is zero-dimensional, so no pin can be chosen")]
    PinUnavailable(u32),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// Members that contain no other member.
pub fn small_members(f: &Family) -> Vec<u32> {
    f.ids()
        .into_iter()
        .filter(|&id| f.downs_in_family(id).is_empty())
        .collect()
}

/// The codimension-1 neighborhood of a member `A`: hyperplanes of `A`
/// avoiding one pinned line inside each small member below `A`.
#[derive(Debug, Clone)]
pub struct MaSet {
    pub a: u32,
    /// The small proper subspaces of `A` in the family.
    pub small: Vec<u32>,
    /// One 1-dimensional pin inside each small member (lexicographically
    /// least line, so the construction is deterministic).
    pub pins: Vec<u32>,
    /// Hyperplanes of `A` containing no pin.
    pub members: Vec<u32>,
}

/// Build `M(A)` for a member of an induced fork-free family; `l` is the
/// forbidden down-fork width.
pub fn build_ma(f: &Family, a: u32, l: usize) -> Result<MaSet, TransformError> {
    if !f.contains(a) {
        return Err(TransformError::NotAMember(a));
    }
    let lat = f.lattice();
    let s = lat.dim_of(a as usize);
    if s == 0 {
        return Err(TransformError::PreconditionViolated(
            "M(A) requires dim(A) >= 1".into(),
        ));
    }
    let below_in_family: Vec<u32> = f
        .downs_in_family(a)
        .into_iter()
        .collect();
    let small: Vec<u32> = below_in_family
        .iter()
        .copied()
        .filter(|&m| f.downs_in_family(m).is_empty())
        .collect();
    if small.len() >= l {
        return Err(TransformError::FreenessViolated(format!(
            "member {a} has {} small proper subspaces, which already form a down-fork of width {l}",
            small.len()
        )));
    }
    let mut pins = Vec::with_capacity(small.len());
    for &m in &small {
        if lat.dim_of(m as usize) == 0 {
            return Err(TransformError::PinUnavailable(m));
        }
        // Least 1-dimensional subspace of m, by element id.
        let pin = lat
            .down_set(m as usize)
            .iter_ones()
            .find(|&x| lat.dim_of(x) == 1)
            .expect("positive-dimensional subspace contains a line");
        pins.push(pin as u32);
    }
    let members: Vec<u32> = lat
        .lower_shadow(a as usize)
        .expect("dim >= 1")
        .iter()
        .copied()
        .filter(|&b| {
            pins.iter()
                .all(|&pin| !lat.leq(pin as usize, b as usize))
        })
        .collect();
    Ok(MaSet { a, small, pins, members })
}

/// Maximum bipartite matching (Hopcroft-Karp). `adj[l]` lists right-side
/// neighbors of left vertex `l`; returns the matched right vertex per left
/// vertex.
pub fn hopcroft_karp(left: usize, right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    const NIL: usize = usize::MAX;
    let mut match_l = vec![NIL; left];
    let mut match_r = vec![NIL; right];
    let mut dist = vec![0usize; left];

    loop {
        let mut queue = VecDeque::new();
        for l in 0..left {
            if match_l[l] == NIL {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = NIL;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let l2 = match_r[r];
                if l2 == NIL {
                    found = true;
                } else if dist[l2] == NIL {
                    dist[l2] = dist[l] + 1;
                    queue.push_back(l2);
                }
            }
        }
        if !found {
            break;
        }
        fn augment(
            l: usize,
            adj: &[Vec<usize>],
            match_l: &mut [usize],
            match_r: &mut [usize],
            dist: &mut [usize],
        ) -> bool {
            for &r in &adj[l] {
                let l2 = match_r[r];
                if l2 == NIL || (dist[l2] == dist[l] + 1 && augment(l2, adj, match_l, match_r, dist))
                {
                    match_l[l] = r;
                    match_r[r] = l;
                    return true;
                }
            }
            dist[l] = NIL;
            false
        }
        for l in 0..left {
            if match_l[l] == NIL && dist[l] == 0 {
                augment(l, adj, &mut match_l, &mut match_r, &mut dist);
            }
        }
    }
    match_l
        .into_iter()
        .map(|r| (r != NIL).then_some(r))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepDirection {
    Down,
    Up,
}

/// One level-replacement step of a pushdown or pushup run.
#[derive(Debug, Clone, Serialize)]
pub struct PushdownStep {
    pub direction: StepDirection,
    /// The level that was emptied.
    pub level: usize,
    /// Bipartite edges from removed members to candidate replacements.
    pub edges: Vec<(u32, u32)>,
    /// The saturating matching that was applied.
    pub matching: Vec<(u32, u32)>,
    /// The fresh elements one level toward the middle.
    pub replaced: Vec<u32>,
    /// Least degree on the removed side of the graph.
    pub min_degree: u64,
    /// The degree-ratio lower bound certifying Hall's condition, as an exact
    /// rational string.
    pub hall_ratio: String,
    /// Whether the instance parameters satisfy the ratio chain down to 1.
    pub ratio_at_least_one: bool,
}

#[derive(Debug, Clone)]
pub struct PushdownOutcome {
    pub family: Family,
    pub steps: Vec<PushdownStep>,
    pub notes: Vec<String>,
}

fn forks(k: usize, l: usize) -> Result<Vec<crate::posets::PosetSpec>, TransformError> {
    Ok(vec![named_poset(&format!("V:{k}"))?, named_poset(&format!("L:{l}"))?])
}

/// Replace the top level of `f` by fresh elements one dimension down until
/// the top level is at most `floor`. The weak variant pairs each removed
/// subspace with any free hyperplane; the induced variant restricts the
/// bipartite graph to `M(A)`.
pub fn pushdown(
    f: &Family,
    induced: bool,
    k: usize,
    l: usize,
    floor: Option<usize>,
) -> Result<PushdownOutcome, TransformError> {
    let lat = f.lattice();
    let n = lat.n();
    let q = lat.q() as u64;
    let mut notes = Vec::new();
    let floor = floor.unwrap_or_else(|| {
        if induced {
            n.div_ceil(2)
        } else {
            n / 2
        }
    });

    let forbidden = forks(k, l)?;
    if !fast_free_check(f, &forbidden, induced)? {
        return Err(TransformError::FreenessViolated(format!(
            "input family is not {}{{V_{k}, Lambda_{l}}}-free",
            if induced { "induced " } else { "" }
        )));
    }
    if induced {
        if k.max(l) as u64 > q {
            notes.push(format!(
                "outside lemma hypothesis: induced case expects k, l <= q (k={k}, l={l}, q={q})"
            ));
        }
    } else {
        if n % 2 == 1 {
            notes.push(format!("outside lemma hypothesis: weak case is stated for even n (n={n})"));
        }
        let cap = q.pow((n / 2) as u32);
        if k.max(l) as u64 > cap {
            notes.push(format!(
                "outside lemma hypothesis: weak case expects k, l <= q^(n/2) = {cap} (k={k}, l={l})"
            ));
        }
    }

    let mut current = f.clone();
    let mut steps = Vec::new();
    while let Some(t) = current.max_dim() {
        if t <= floor {
            break;
        }
        let step = replace_top_level(&current, induced, l, t)?;
        let mut next = current.clone();
        for &(a, _) in &step.matching {
            next = next.removed(a);
        }
        for &b in &step.replaced {
            next = next.inserted(b);
        }
        if next.len() != current.len() {
            return Err(TransformError::FreenessViolatedAfterStep(t));
        }
        if !fast_free_check(&next, &forbidden, induced)? {
            return Err(TransformError::FreenessViolatedAfterStep(t));
        }
        current = next;
        steps.push(step);
    }
    Ok(PushdownOutcome { family: current, steps, notes })
}

fn replace_top_level(
    current: &Family,
    induced: bool,
    l: usize,
    t: usize,
) -> Result<PushdownStep, TransformError> {
    let lat = current.lattice();
    let n = lat.n();
    let q = lat.q() as u32;
    let top: Vec<u32> = current.members_of_dim(t);

    let mut edges: Vec<(u32, u32)> = Vec::new();
    for &a in &top {
        let candidates: Vec<u32> = if induced {
            build_ma(current, a, l)?.members
        } else {
            lat.lower_shadow(a as usize)
                .expect("dim >= 1")
                .iter()
                .copied()
                .filter(|&b| !current.contains(b))
                .collect()
        };
        for b in candidates {
            debug_assert!(!current.contains(b));
            edges.push((a, b));
        }
    }

    let mut rights: Vec<u32> = edges.iter().map(|&(_, b)| b).collect();
    rights.sort_unstable();
    rights.dedup();
    let right_pos: std::collections::HashMap<u32, usize> =
        rights.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); top.len()];
    for &(a, b) in &edges {
        let li = top.binary_search(&a).expect("top is sorted");
        adj[li].push(right_pos[&b]);
    }
    let min_degree = adj.iter().map(|nb| nb.len() as u64).min().unwrap_or(0);

    let matching = hopcroft_karp(top.len(), rights.len(), &adj);
    let matched: Vec<(u32, u32)> = matching
        .iter()
        .enumerate()
        .filter_map(|(li, r)| r.map(|ri| (top[li], rights[ri])))
        .collect();
    if matched.len() != top.len() {
        return Err(TransformError::HallFailure {
            level: t,
            matched: matched.len(),
            needed: top.len(),
        });
    }

    // Degree-ratio certificate from the minimum left degree: every removed
    // subspace has at least min_degree candidates and every candidate has at
    // most [n-t+1]_q removable superspaces.
    let up_deg = BigInt::from(to_u64(&q_bracket((n - t + 1) as u32, q)));
    let ratio = BigRational::new(BigInt::from(min_degree), up_deg);
    let replaced: Vec<u32> = matched.iter().map(|&(_, b)| b).collect();
    Ok(PushdownStep {
        direction: StepDirection::Down,
        level: t,
        edges,
        matching: matched,
        replaced,
        min_degree,
        hall_ratio: rational_string(&ratio),
        ratio_at_least_one: ratio >= BigRational::one(),
    })
}

/// Mirror image of `pushdown`: raise the bottom level until it is at least
/// `ceiling`, working through the orthogonal-complement anti-automorphism.
pub fn dual_pushup(
    f: &Family,
    induced: bool,
    k: usize,
    l: usize,
    ceiling: Option<usize>,
) -> Result<PushdownOutcome, TransformError> {
    let lat = f.lattice();
    let n = lat.n();
    let comp = lat.complement_map();
    let mirrored = Family::from_ids(
        f.lattice_arc(),
        &f.ids().iter().map(|&id| comp[id as usize]).collect::<Vec<u32>>(),
    );
    let floor = n - ceiling.unwrap_or(n / 2);
    // Forbidden forks swap sides under an order-reversing map.
    let outcome = pushdown(&mirrored, induced, l, k, Some(floor))?;
    let family = Family::from_ids(
        f.lattice_arc(),
        &outcome
            .family
            .ids()
            .iter()
            .map(|&id| comp[id as usize])
            .collect::<Vec<u32>>(),
    );
    let steps = outcome
        .steps
        .into_iter()
        .map(|s| PushdownStep {
            direction: StepDirection::Up,
            level: n - s.level,
            edges: s.edges.iter().map(|&(a, b)| (comp[a as usize], comp[b as usize])).collect(),
            matching: s
                .matching
                .iter()
                .map(|&(a, b)| (comp[a as usize], comp[b as usize]))
                .collect(),
            replaced: s.replaced.iter().map(|&b| comp[b as usize]).collect(),
            min_degree: s.min_degree,
            hall_ratio: s.hall_ratio,
            ratio_at_least_one: s.ratio_at_least_one,
        })
        .collect();
    Ok(PushdownOutcome { family, steps, notes: outcome.notes })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NeighborhoodVerdict {
    Pass { subsets_checked: u64 },
    Counterexample { subset: Vec<u32> },
}

/// Exhaustive check that in the cover graph between levels `s-1` and `s`
/// (which must be regular, i.e. `[s]_q = [n-s+1]_q`), the only subsets of
/// level `s` whose neighborhood has exactly their size are the empty set and
/// the full level.
pub fn neighborhood_rigidity_check(
    lat: &LinearLattice,
    s: usize,
) -> Result<NeighborhoodVerdict, TransformError> {
    if s == 0 || s > lat.n() {
        return Err(TransformError::PreconditionViolated(format!("level {s} has no cover graph below it")));
    }
    let q = lat.q() as u32;
    let down_deg = q_bracket(s as u32, q);
    let up_deg = q_bracket((lat.n() - s + 1) as u32, q);
    if down_deg != up_deg {
        return Err(TransformError::PreconditionViolated(format!(
            "cover graph between levels {} and {s} is biregular but not regular",
            s - 1
        )));
    }
    let ids: Vec<usize> = lat.level_range(s).collect();
    if ids.len() > 15 {
        return Err(TransformError::PreconditionViolated(format!(
            "level of size {} exceeds the exhaustive guard of 15",
            ids.len()
        )));
    }
    let full = ids.len();
    let mut checked = 0u64;
    for mask in 0u32..(1 << full) {
        checked += 1;
        let picked: Vec<usize> = (0..full).filter(|&i| mask >> i & 1 == 1).collect();
        let mut neighborhood = std::collections::HashSet::new();
        for &i in &picked {
            for &b in lat.lower_shadow(ids[i]).expect("s >= 1") {
                neighborhood.insert(b);
            }
        }
        if neighborhood.len() == picked.len() && !(picked.is_empty() || picked.len() == full) {
            return Ok(NeighborhoodVerdict::Counterexample {
                subset: picked.iter().map(|&i| ids[i] as u32).collect(),
            });
        }
    }
    Ok(NeighborhoodVerdict::Pass { subsets_checked: checked })
}
