//! Simple families, chain structures, exact alpha values, and the LYM-type
//! double-count verdicts.
//!
//! A simple family is order-isomorphic to a set family over a fixed basis,
//! so everything on this side is computed on subsets of `{1..n}` (bitmasks)
//! and only mapped into the lattice when a subspace family is required.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::families::Family;
use crate::lattice::LinearLattice;
use crate::posets::{embeds_forced, embeds_with, PosetSpec};
use crate::qarith::{q_binomial, q_factorial};

/// Exhaustive guard for alpha computations.
pub const MAX_SIMPLE_FAMILY: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LymError {
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("structure too large: {0}")]
    TooLarge(String),
    #[error("node budget exceeded after {0} nodes")]
    BudgetExceeded(u64),
    #[error("family is not free of the forbidden patterns")]
    NotFree,
    #[error("basis size mismatch: family over n={family_n}, structure over n={structure_n}")]
    BasisMismatch { family_n: usize, structure_n: usize },
}

/// Distinct subsets of `{1..n}` (bit `i` encodes element `i+1`), ordered by
/// (size, numeric value).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleFamily {
    n: usize,
    sets: Vec<u32>,
}

impl SimpleFamily {
    pub fn new(n: usize, mut sets: Vec<u32>) -> Result<SimpleFamily, LymError> {
        if n > MAX_SIMPLE_FAMILY {
            return Err(LymError::TooLarge(format!("basis size {n} exceeds {MAX_SIMPLE_FAMILY}")));
        }
        sets.sort_unstable_by_key(|&s| (s.count_ones(), s));
        let before = sets.len();
        sets.dedup();
        if sets.len() != before {
            return Err(LymError::OutOfRange("duplicate sets in a simple family".into()));
        }
        if sets.iter().any(|&s| s >= 1 << n) {
            return Err(LymError::OutOfRange(format!("set exceeds the {n}-element ground set")));
        }
        Ok(SimpleFamily { n, sets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[u32] {
        &self.sets
    }

    /// `N_i`: number of `i`-element sets, for `i = 0..=n`.
    pub fn rank_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n + 1];
        for &s in &self.sets {
            counts[s.count_ones() as usize] += 1;
        }
        counts
    }
}

#[inline]
fn subset_lt(a: u32, b: u32) -> bool {
    a != b && a & !b == 0
}

/// The full chain `{} = A_0 ⊂ A_1 ⊂ ... ⊂ A_n` with `A_i = {1..i}`.
pub fn maximal_chain_family(n: usize) -> SimpleFamily {
    SimpleFamily::new(n, (0..=n).map(|i| ((1u64 << i) - 1) as u32).collect()).expect("valid")
}

/// Union of the rank-`k` intervals `[A_i, A_{i+k}]` along the full chain.
pub fn k_interval_chain(n: usize, k: usize) -> Result<SimpleFamily, LymError> {
    if k == 0 || k > n {
        return Err(LymError::OutOfRange(format!("interval width {k} over n={n}")));
    }
    let mut sets = Vec::new();
    for i in 0..=(n - k) {
        let base = ((1u64 << i) - 1) as u32;
        let block: Vec<u32> = (i..i + k).map(|b| 1 << b).collect();
        for choice in 0u32..(1 << k) {
            let extra: u32 = block
                .iter()
                .enumerate()
                .filter(|&(t, _)| choice >> t & 1 == 1)
                .map(|(_, &b)| b)
                .sum();
            sets.push(base | extra);
        }
    }
    sets.sort_unstable();
    sets.dedup();
    SimpleFamily::new(n, sets)
}

/// The double chain: the 2-interval chain.
pub fn double_chain(n: usize) -> Result<SimpleFamily, LymError> {
    k_interval_chain(n, 2)
}

/// Cyclic interval family: spans of arcs of the circularly arranged basis,
/// excluding the empty set and the whole set. `n(n-1)` sets, `n` per size.
pub fn cyclic_intervals(n: usize) -> Result<SimpleFamily, LymError> {
    if n < 2 {
        return Err(LymError::OutOfRange("cyclic intervals need n >= 2".into()));
    }
    let mut sets = Vec::new();
    for len in 1..n {
        for start in 0..n {
            let mut mask = 0u32;
            for t in 0..len {
                mask |= 1 << ((start + t) % n);
            }
            sets.push(mask);
        }
    }
    SimpleFamily::new(n, sets)
}

/// Exact maximum size of a subfamily of `h` avoiding every pattern,
/// by pruned include/exclude search over the set poset.
pub fn alpha(
    h: &SimpleFamily,
    forbidden: &[PosetSpec],
    induced: bool,
    max_nodes: Option<u64>,
) -> Result<usize, LymError> {
    if h.len() > MAX_SIMPLE_FAMILY {
        return Err(LymError::TooLarge(format!(
            "{} sets exceed the exhaustive guard {MAX_SIMPLE_FAMILY}",
            h.len()
        )));
    }
    struct Ctx<'a> {
        sets: &'a [u32],
        forbidden: &'a [PosetSpec],
        induced: bool,
        best: usize,
        nodes: u64,
        max_nodes: Option<u64>,
    }
    fn feasible(ctx: &Ctx<'_>, chosen: &[usize], cand: usize) -> bool {
        let mut members: Vec<usize> = chosen.to_vec();
        members.push(cand);
        let lt = |a: usize, b: usize| subset_lt(ctx.sets[members[a]], ctx.sets[members[b]]);
        let forced = members.len() - 1;
        !ctx.forbidden
            .iter()
            .any(|p| embeds_forced(p, members.len(), lt, forced, ctx.induced))
    }
    fn rec(ctx: &mut Ctx<'_>, idx: usize, chosen: &mut Vec<usize>) -> Result<(), LymError> {
        ctx.nodes += 1;
        if let Some(limit) = ctx.max_nodes {
            if ctx.nodes > limit {
                return Err(LymError::BudgetExceeded(ctx.nodes));
            }
        }
        if chosen.len() + (ctx.sets.len() - idx) <= ctx.best {
            return Ok(());
        }
        if idx == ctx.sets.len() {
            ctx.best = ctx.best.max(chosen.len());
            return Ok(());
        }
        if feasible(ctx, chosen, idx) {
            chosen.push(idx);
            ctx.best = ctx.best.max(chosen.len());
            rec(ctx, idx + 1, chosen)?;
            chosen.pop();
        }
        rec(ctx, idx + 1, chosen)
    }
    let mut ctx = Ctx { sets: h.sets(), forbidden, induced, best: 0, nodes: 0, max_nodes };
    let mut chosen = Vec::new();
    rec(&mut ctx, 0, &mut chosen)?;
    Ok(ctx.best)
}

/// Reference alpha by unpruned scan of every subfamily; test oracle for
/// small structures (at most 20 sets).
pub fn alpha_by_full_scan(h: &SimpleFamily, forbidden: &[PosetSpec], induced: bool) -> usize {
    assert!(h.len() <= 20);
    let sets = h.sets();
    let mut best = 0usize;
    for mask in 0u32..(1 << sets.len()) {
        let picked: Vec<u32> = (0..sets.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| sets[i])
            .collect();
        if picked.len() <= best {
            continue;
        }
        let lt = |a: usize, b: usize| subset_lt(picked[a], picked[b]);
        let free = forbidden
            .iter()
            .all(|p| embeds_with(p, picked.len(), lt, induced).is_none());
        if free {
            best = picked.len();
        }
    }
    best
}

/// Both sides of the LYM-type inequality, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LymVerdict {
    pub lhs: BigRational,
    pub alpha: usize,
    pub holds: bool,
}

/// Check `sum_F N_dim(F)(H) / [n choose dim(F)]_q <= alpha(H, P)` for a
/// family that is itself P-free.
pub fn lym_check(
    f: &Family,
    h: &SimpleFamily,
    forbidden: &[PosetSpec],
    induced: bool,
) -> Result<LymVerdict, LymError> {
    let lat = f.lattice();
    if h.n() != lat.n() {
        return Err(LymError::BasisMismatch { family_n: lat.n(), structure_n: h.n() });
    }
    if !crate::posets::is_free(f, forbidden, induced) {
        return Err(LymError::NotFree);
    }
    let counts = h.rank_counts();
    let n = lat.n() as u32;
    let q = lat.q() as u32;
    let mut lhs = BigRational::zero();
    for id in f.ids() {
        let d = lat.dim_of(id as usize) as u32;
        lhs += BigRational::new(
            BigInt::from(counts[d as usize]),
            BigInt::from(q_binomial(n, d, q)),
        );
    }
    let a = alpha(h, forbidden, induced, None)?;
    let holds = lhs <= BigRational::from_integer(BigInt::from(a));
    Ok(LymVerdict { lhs, alpha: a, holds })
}

/// Number of ordered-basis maps sending some member of `h` onto a fixed
/// `r`-dimensional subspace: ordered bases of the subspace times extensions
/// to a basis of the ambient space, times `N_r(h)`.
pub fn basis_map_count(r: usize, h: &SimpleFamily, n: usize, q: u32) -> BigUint {
    let counts = h.rank_counts();
    if r > n || counts[r] == 0 {
        return BigUint::zero();
    }
    let qb = BigUint::from(q);
    let mut acc = BigUint::from(counts[r]);
    for i in 0..r {
        acc *= qb.pow(r as u32) - qb.pow(i as u32);
    }
    for j in r..n {
        acc *= qb.pow(n as u32) - qb.pow(j as u32);
    }
    acc
}

/// All maximal chains of the lattice, as id sequences from the zero
/// subspace to the full space.
pub fn maximal_chains(lat: &LinearLattice) -> Result<Vec<Vec<u32>>, LymError> {
    if lat.n() > 4 {
        return Err(LymError::TooLarge(format!(
            "chain enumeration is limited to n <= 4 (got n = {})",
            lat.n()
        )));
    }
    let mut chains = Vec::new();
    let mut path = vec![0u32];
    fn rec(lat: &LinearLattice, path: &mut Vec<u32>, chains: &mut Vec<Vec<u32>>) {
        let top = *path.last().expect("nonempty") as usize;
        if lat.dim_of(top) == lat.n() {
            chains.push(path.clone());
            return;
        }
        for &next in lat.upper_shadow(top).expect("below the top") {
            path.push(next);
            rec(lat, path, chains);
            path.pop();
        }
    }
    rec(lat, &mut path, &mut chains);
    Ok(chains)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityVerdict {
    pub lhs: BigUint,
    pub rhs: BigUint,
    pub holds: bool,
}

/// Exact check of the chain-count identity used in the odd-case double
/// count: `[n choose (n+3)/2]_q [(n+3)/2 choose (n-3)/2]_q ([(n-3)/2]_q!)^2
/// (q^2+q+1)(q+1) = [n]_q!` for odd `n >= 3`.
pub fn eq1_identity_check(n: u32, q: u32) -> Result<IdentityVerdict, LymError> {
    if n < 3 || n % 2 == 0 {
        return Err(LymError::OutOfRange(format!("identity requires odd n >= 3 (got {n})")));
    }
    let upper = (n + 3) / 2;
    let lower = (n - 3) / 2;
    let qq = BigUint::from(q);
    let lhs = q_binomial(n, upper, q)
        * q_binomial(upper, lower, q)
        * q_factorial(lower, q).pow(2)
        * (&qq * &qq + &qq + 1u32)
        * (&qq + 1u32);
    let rhs = q_factorial(n, q);
    let holds = lhs == rhs;
    Ok(IdentityVerdict { lhs, rhs, holds })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalAlphaVerdict {
    pub brute: usize,
    pub closed_form: BigRational,
    pub integral: bool,
    /// Brute force equals the closed form (only assessable when integral).
    pub attained: bool,
    /// Brute force is at most the closed form.
    pub within: bool,
}

/// Compare brute-force alpha on the realized `k`-interval chain against the
/// closed form `(k/2^(k-1)) (|P| + (3k-5) 2^(k-2) (h(P)-1) - 1)`.
pub fn interval_chain_alpha_check(
    k: usize,
    n: usize,
    p: &PosetSpec,
) -> Result<IntervalAlphaVerdict, LymError> {
    if !(2..=3).contains(&k) || n > 8 || p.size() > 5 {
        return Err(LymError::OutOfRange(
            "supported grid: k in {2, 3}, n <= 8, |P| <= 5".into(),
        ));
    }
    let chain = k_interval_chain(n, k)?;
    let brute = alpha(&chain, std::slice::from_ref(p), false, None)?;
    let size = BigInt::from(p.size());
    let height = BigInt::from(p.height());
    let inner = size + BigInt::from(3 * k as i64 - 5) * (BigInt::one() << (k - 2)) * (height - 1)
        - BigInt::one();
    let closed_form = BigRational::new(BigInt::from(k) * inner, BigInt::one() << (k - 1));
    let integral = closed_form.is_integer();
    let brute_rat = BigRational::from_integer(BigInt::from(brute));
    Ok(IntervalAlphaVerdict {
        brute,
        integral,
        attained: integral && brute_rat == closed_form,
        within: brute_rat <= closed_form,
        closed_form,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleCountVerdict {
    /// Per-dimension pair counts observed by full enumeration.
    pub observed: Vec<BigUint>,
    /// Formula values per dimension.
    pub expected: Vec<BigUint>,
    pub holds: bool,
    pub bases_enumerated: u64,
}

/// Enumerate every ordered basis of the ambient space, apply each basis map
/// to `h`, and count the pairs landing on each subspace; the count must
/// match `basis_map_count` for every element of each dimension.
pub fn ordered_basis_double_count(
    lat: &LinearLattice,
    h: &SimpleFamily,
) -> Result<DoubleCountVerdict, LymError> {
    let n = lat.n();
    if h.n() != n {
        return Err(LymError::BasisMismatch { family_n: n, structure_n: h.n() });
    }
    if n > 3 {
        return Err(LymError::TooLarge("basis enumeration is limited to n <= 3".into()));
    }
    let q = lat.q() as u32;
    let f = lat.field();
    let total_vectors = (q as u64).pow(n as u32);

    // All vectors as digit rows.
    let vectors: Vec<Vec<u8>> = (0..total_vectors)
        .map(|enc| {
            let mut v = vec![0u8; n];
            let mut x = enc;
            for d in v.iter_mut() {
                *d = (x % q as u64) as u8;
                x /= q as u64;
            }
            v
        })
        .collect();
    let in_span = |span: &[usize], candidate: usize| -> bool {
        // Brute force span membership over up to q^3 combinations.
        let dim = span.len();
        let mut coeffs = vec![0u8; dim];
        loop {
            let mut acc = vec![0u8; n];
            for (ci, &vi) in span.iter().enumerate() {
                for t in 0..n {
                    acc[t] = f.add(acc[t], f.mul(coeffs[ci], vectors[vi][t]));
                }
            }
            if acc == vectors[candidate] {
                return true;
            }
            let mut carry = true;
            for slot in coeffs.iter_mut() {
                if !carry {
                    break;
                }
                *slot += 1;
                if *slot == q as u8 {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
            if carry {
                return false;
            }
        }
    };

    let mut per_element = vec![0u64; lat.count()];
    let mut bases = 0u64;
    let mut chosen: Vec<usize> = Vec::new();
    fn rec(
        n: usize,
        total: u64,
        chosen: &mut Vec<usize>,
        in_span: &dyn Fn(&[usize], usize) -> bool,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == n {
            visit(chosen);
            return;
        }
        for v in 1..total as usize {
            if !in_span(chosen, v) {
                chosen.push(v);
                rec(n, total, chosen, in_span, visit);
                chosen.pop();
            }
        }
    }
    {
        let mut visit = |basis: &[usize]| {
            bases += 1;
            for &s in h.sets() {
                let rows: Vec<Vec<u8>> = (0..n)
                    .filter(|&i| s >> i & 1 == 1)
                    .map(|i| vectors[basis[i]].clone())
                    .collect();
                let id = lat
                    .id_from_spanning_rows(&rows)
                    .expect("span of basis vectors is a lattice element");
                per_element[id as usize] += 1;
            }
        };
        rec(n, total_vectors, &mut chosen, &in_span, &mut visit);
    }

    let mut observed = Vec::with_capacity(n + 1);
    let mut expected = Vec::with_capacity(n + 1);
    let mut holds = true;
    for r in 0..=n {
        let formula = basis_map_count(r, h, n, q);
        let range = lat.level_range(r);
        let first = per_element[range.start];
        for id in range.clone() {
            if per_element[id] as u64 != first || BigUint::from(per_element[id]) != formula {
                holds = false;
            }
        }
        observed.push(BigUint::from(first));
        expected.push(formula);
    }
    Ok(DoubleCountVerdict { observed, expected, holds, bases_enumerated: bases })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepVerdict {
    pub families_checked: u64,
    pub free_families: u64,
    pub violations: u64,
    pub alpha: usize,
}

/// Criterion-style sweep: every weakly fork-free family (no member with two
/// strict superspaces in the family) over the lattice satisfies the LYM
/// inequality against `h`.
pub fn v2_free_lym_sweep(
    lat: &std::sync::Arc<LinearLattice>,
    h: &SimpleFamily,
    threads: usize,
) -> Result<SweepVerdict, LymError> {
    let count = lat.count();
    if count > 20 {
        return Err(LymError::TooLarge(format!("sweep is limited to 2^20 families (count {count})")));
    }
    if h.n() != lat.n() {
        return Err(LymError::BasisMismatch { family_n: lat.n(), structure_n: h.n() });
    }
    let v2 = crate::posets::named_poset("V:2").expect("valid");
    let a = alpha(h, &[v2], false, None)?;
    let alpha_rat = BigRational::from_integer(BigInt::from(a));

    // Strict up-sets as masks, and per-element exact LHS contributions.
    let ups: Vec<u32> = (0..count)
        .map(|i| {
            let mut mask = 0u32;
            for j in lat.up_set(i).iter_ones() {
                if j != i {
                    mask |= 1 << j;
                }
            }
            mask
        })
        .collect();
    let counts = h.rank_counts();
    let contrib: Vec<BigRational> = (0..count)
        .map(|i| {
            let d = lat.dim_of(i) as u32;
            BigRational::new(
                BigInt::from(counts[d as usize]),
                BigInt::from(q_binomial(lat.n() as u32, d, lat.q() as u32)),
            )
        })
        .collect();

    let total: u64 = 1 << count;
    let chunk = 1u64 << count.saturating_sub(6);
    let ranges: Vec<(u64, u64)> = (0..total)
        .step_by(chunk as usize)
        .map(|s| (s, (s + chunk).min(total)))
        .collect();
    let partials: Vec<(u64, u64)> = crate::exec::map_collect(threads, ranges, |(s, e)| {
        let mut free = 0u64;
        let mut violations = 0u64;
        for mask in s..e {
            let mask32 = mask as u32;
            let mut ok = true;
            let mut m = mask32;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                if (ups[i] & mask32).count_ones() >= 2 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            free += 1;
            let mut lhs = BigRational::zero();
            let mut m = mask32;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                lhs += contrib[i].clone();
            }
            if lhs > alpha_rat {
                violations += 1;
            }
        }
        (free, violations)
    });
    let free_families: u64 = partials.iter().map(|p| p.0).sum();
    let violations: u64 = partials.iter().map(|p| p.1).sum();
    Ok(SweepVerdict { families_checked: total, free_families, violations, alpha: a })
}
