//! Forbidden poset patterns and subposet containment.
//!
//! A pattern `P` embeds weakly into a family when some injection preserves
//! every strict relation of `P`; it embeds as an induced subposet when the
//! injection also reflects relations (images of incomparable elements must be
//! incomparable). Patterns are tiny (at most a handful of elements); families
//! run to a few hundred members, so embedding is a pruned backtracking search.

use crate::families::Family;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("cannot parse poset spec: {0}")]
    ParseError(String),
    #[error("relations contain a cycle involving {0}")]
    CycleError(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("forbidden poset is not a fork shape (V_k or Lambda_l): {0}")]
    UnsupportedShape(String),
}

/// A finite strict partial order on elements `0..m`, transitively closed.
#[derive(Debug, Clone)]
pub struct PosetSpec {
    m: usize,
    lt: Vec<bool>,
    name: Option<String>,
}

/// Structural equality; the display name does not participate.
impl PartialEq for PosetSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.lt == other.lt
    }
}
impl Eq for PosetSpec {}

impl PosetSpec {
    /// Build from strict relations, closing transitively. Rejects cycles.
    pub fn from_relations(
        m: usize,
        relations: &[(usize, usize)],
        name: Option<String>,
    ) -> Result<Self, PosetError> {
        if m == 0 {
            return Err(PosetError::OutOfRange("poset must be nonempty".into()));
        }
        let mut lt = vec![false; m * m];
        for &(a, b) in relations {
            if a >= m || b >= m {
                return Err(PosetError::OutOfRange(format!(
                    "relation ({a}, {b}) references a missing element"
                )));
            }
            lt[a * m + b] = true;
        }
        // Warshall closure.
        for k in 0..m {
            for i in 0..m {
                if lt[i * m + k] {
                    for j in 0..m {
                        if lt[k * m + j] {
                            lt[i * m + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..m {
            if lt[i * m + i] {
                return Err(PosetError::CycleError(format!("element {i}")));
            }
        }
        Ok(PosetSpec { m, lt, name })
    }

    /// Number of elements `|P|`.
    pub fn size(&self) -> usize {
        self.m
    }

    /// Height `h(P)`: the number of elements in a longest chain.
    pub fn height(&self) -> usize {
        let mut memo = vec![0usize; self.m];
        fn depth(p: &PosetSpec, i: usize, memo: &mut Vec<usize>) -> usize {
            if memo[i] != 0 {
                return memo[i];
            }
            let mut best = 1;
            for j in 0..p.m {
                if p.lt(j, i) {
                    best = best.max(1 + depth(p, j, memo));
                }
            }
            memo[i] = best;
            best
        }
        (0..self.m).map(|i| depth(self, i, &mut memo)).max().unwrap_or(1)
    }

    #[inline]
    pub fn lt(&self, a: usize, b: usize) -> bool {
        self.lt[a * self.m + b]
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        a == b || self.lt(a, b) || self.lt(b, a)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// The same elements with every relation reversed.
    pub fn dual(&self) -> PosetSpec {
        let mut lt = vec![false; self.m * self.m];
        for a in 0..self.m {
            for b in 0..self.m {
                lt[b * self.m + a] = self.lt(a, b);
            }
        }
        let name = self.name.as_ref().map(|n| format!("dual({n})"));
        PosetSpec { m: self.m, lt, name }
    }

    /// If this poset is a fork `V_k` (one minimum below `k` pairwise
    /// incomparable elements), return `k`.
    pub fn v_shape(&self) -> Option<usize> {
        let bottoms: Vec<usize> = (0..self.m)
            .filter(|&i| (0..self.m).all(|j| !self.lt(j, i)))
            .collect();
        let [b] = bottoms[..] else { return None };
        for i in 0..self.m {
            if i != b && !self.lt(b, i) {
                return None;
            }
        }
        for i in 0..self.m {
            for j in 0..self.m {
                if i != j && i != b && j != b && self.lt(i, j) {
                    return None;
                }
            }
        }
        Some(self.m - 1)
    }

    /// If this poset is the dual fork `Lambda_l`, return `l`.
    pub fn lambda_shape(&self) -> Option<usize> {
        self.dual().v_shape()
    }
}

/// Construct one of the named patterns:
/// `V:k`, `L:l` (the dual fork), `B` (butterfly), `Y:k`, `Y':k`, `C:h`.
pub fn named_poset(spec: &str) -> Result<PosetSpec, PosetError> {
    let (kind, param) = match spec.split_once(':') {
        Some((k, p)) => {
            let v: usize = p
                .parse()
                .map_err(|_| PosetError::ParseError(format!("bad parameter in {spec:?}")))?;
            (k, Some(v))
        }
        None => (spec, None),
    };
    let need = |p: Option<usize>| -> Result<usize, PosetError> {
        match p {
            Some(0) => Err(PosetError::OutOfRange(format!("parameter must be >= 1 in {spec:?}"))),
            Some(v) => Ok(v),
            None => Err(PosetError::ParseError(format!("{spec:?} needs a parameter"))),
        }
    };
    let name = Some(spec.to_string());
    match kind {
        // x_1, ..., x_k above a common bottom y (y is element k).
        "V" => {
            let k = need(param)?;
            let rels: Vec<(usize, usize)> = (0..k).map(|i| (k, i)).collect();
            PosetSpec::from_relations(k + 1, &rels, name)
        }
        // Dual fork: x_1, ..., x_l below a common top y.
        "L" => {
            let l = need(param)?;
            let rels: Vec<(usize, usize)> = (0..l).map(|i| (i, l)).collect();
            PosetSpec::from_relations(l + 1, &rels, name)
        }
        // a, b < c, d.
        "B" => {
            if param.is_some() {
                return Err(PosetError::ParseError("butterfly takes no parameter".into()));
            }
            PosetSpec::from_relations(4, &[(0, 2), (0, 3), (1, 2), (1, 3)], name)
        }
        // Chain x_1 <= ... <= x_k below two incomparable tops y, z.
        "Y" => {
            let k = need(param)?;
            let mut rels = Vec::new();
            for i in 0..k {
                for j in (i + 1)..k {
                    rels.push((i, j));
                }
                rels.push((i, k));
                rels.push((i, k + 1));
            }
            PosetSpec::from_relations(k + 2, &rels, name)
        }
        "Y'" => {
            let k = need(param)?;
            Ok(named_poset(&format!("Y:{k}"))?.dual_with_name(name))
        }
        // Chain of h elements.
        "C" => {
            let h = need(param)?;
            let rels: Vec<(usize, usize)> = (0..h.saturating_sub(1)).map(|i| (i, i + 1)).collect();
            PosetSpec::from_relations(h, &rels, name)
        }
        _ => Err(PosetError::ParseError(format!("unknown poset name {spec:?}"))),
    }
}

impl PosetSpec {
    fn dual_with_name(&self, name: Option<String>) -> PosetSpec {
        let mut d = self.dual();
        d.name = name;
        d
    }
}

/// Parse `"elements: a,b,c; relations: a<c, b<c"` into a poset.
pub fn parse_poset_dsl(text: &str) -> Result<PosetSpec, PosetError> {
    let mut elements: Option<Vec<String>> = None;
    let mut relations: Vec<(String, String)> = Vec::new();
    let mut saw_relations = false;
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, rest) = part
            .split_once(':')
            .ok_or_else(|| PosetError::ParseError(format!("expected `key: ...` in {part:?}")))?;
        match key.trim() {
            "elements" => {
                let names: Vec<String> = rest
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                elements = Some(names);
            }
            "relations" => {
                saw_relations = true;
                for rel in rest.split(',') {
                    let rel = rel.trim();
                    if rel.is_empty() {
                        continue;
                    }
                    let (a, b) = rel
                        .split_once('<')
                        .ok_or_else(|| PosetError::ParseError(format!("expected `a<b` in {rel:?}")))?;
                    relations.push((a.trim().to_string(), b.trim().to_string()));
                }
            }
            other => return Err(PosetError::ParseError(format!("unknown section {other:?}"))),
        }
    }
    let elements = elements.ok_or_else(|| PosetError::ParseError("missing `elements:` section".into()))?;
    if !saw_relations {
        return Err(PosetError::ParseError("missing `relations:` section".into()));
    }
    if elements.is_empty() {
        return Err(PosetError::OutOfRange("poset must be nonempty".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for e in &elements {
        if !seen.insert(e.clone()) {
            return Err(PosetError::ParseError(format!("duplicate element {e:?}")));
        }
    }
    let index = |name: &str| -> Result<usize, PosetError> {
        elements
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| PosetError::ParseError(format!("unknown element {name:?}")))
    };
    let rels: Vec<(usize, usize)> = relations
        .iter()
        .map(|(a, b)| Ok((index(a)?, index(b)?)))
        .collect::<Result<_, PosetError>>()?;
    PosetSpec::from_relations(elements.len(), &rels, None)
}

/// Backtracking embedding of `P` into an abstract list of `count` members
/// whose strict order is given by `lt(a, b)`. Pattern elements are assigned
/// in index order with ascending candidates, so a returned witness is the
/// lexicographically least assignment vector.
pub fn embeds_with<F>(p: &PosetSpec, count: usize, lt: F, induced: bool) -> Option<Vec<usize>>
where
    F: Fn(usize, usize) -> bool,
{
    if p.size() > count {
        return None;
    }
    // Necessary degree bounds: the strict up/down sets of a pattern element
    // inject into the strict up/down sets of its image.
    let up_need: Vec<usize> = (0..p.size())
        .map(|i| (0..p.size()).filter(|&j| p.lt(i, j)).count())
        .collect();
    let dn_need: Vec<usize> = (0..p.size())
        .map(|i| (0..p.size()).filter(|&j| p.lt(j, i)).count())
        .collect();
    let mut up_have = vec![0usize; count];
    let mut dn_have = vec![0usize; count];
    for a in 0..count {
        for b in 0..count {
            if a != b && lt(a, b) {
                up_have[a] += 1;
                dn_have[b] += 1;
            }
        }
    }

    let mut assign: Vec<usize> = Vec::with_capacity(p.size());
    let mut used = vec![false; count];
    fn rec<F: Fn(usize, usize) -> bool>(
        p: &PosetSpec,
        count: usize,
        lt: &F,
        induced: bool,
        up_need: &[usize],
        dn_need: &[usize],
        up_have: &[usize],
        dn_have: &[usize],
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let i = assign.len();
        if i == p.size() {
            return true;
        }
        'cand: for c in 0..count {
            if used[c] || up_have[c] < up_need[i] || dn_have[c] < dn_need[i] {
                continue;
            }
            for (j, &fj) in assign.iter().enumerate() {
                let pij = p.lt(i, j);
                let pji = p.lt(j, i);
                if pij && !lt(c, fj) {
                    continue 'cand;
                }
                if pji && !lt(fj, c) {
                    continue 'cand;
                }
                if induced && !pij && !pji && (lt(c, fj) || lt(fj, c)) {
                    continue 'cand;
                }
            }
            assign.push(c);
            used[c] = true;
            if rec(p, count, lt, induced, up_need, dn_need, up_have, dn_have, assign, used) {
                return true;
            }
            used[c] = false;
            assign.pop();
        }
        false
    }
    rec(
        p, count, &lt, induced, &up_need, &dn_need, &up_have, &dn_have, &mut assign, &mut used,
    )
    .then_some(assign)
}

/// Does `P` embed with some pattern element mapped to the member at
/// `forced`? Used for incremental freeness: a family known to avoid `P`
/// gains a copy on insertion only if the copy goes through the new member.
pub fn embeds_forced<F>(p: &PosetSpec, count: usize, lt: F, forced: usize, induced: bool) -> bool
where
    F: Fn(usize, usize) -> bool,
{
    if p.size() > count {
        return false;
    }
    fn pair_ok<F: Fn(usize, usize) -> bool>(
        p: &PosetSpec,
        lt: &F,
        induced: bool,
        i: usize,
        j: usize,
        fi: usize,
        fj: usize,
    ) -> bool {
        let pij = p.lt(i, j);
        let pji = p.lt(j, i);
        if pij && !lt(fi, fj) {
            return false;
        }
        if pji && !lt(fj, fi) {
            return false;
        }
        !(induced && !pij && !pji && (lt(fi, fj) || lt(fj, fi)))
    }
    fn rec<F: Fn(usize, usize) -> bool>(
        p: &PosetSpec,
        count: usize,
        lt: &F,
        induced: bool,
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        mut i: usize,
    ) -> bool {
        while i < p.size() && assign[i].is_some() {
            i += 1;
        }
        if i == p.size() {
            return true;
        }
        'cand: for c in 0..count {
            if used[c] {
                continue;
            }
            for j in 0..p.size() {
                if j == i {
                    continue;
                }
                let Some(fj) = assign[j] else { continue };
                if !pair_ok(p, lt, induced, i, j, c, fj) {
                    continue 'cand;
                }
            }
            assign[i] = Some(c);
            used[c] = true;
            if rec(p, count, lt, induced, assign, used, i + 1) {
                return true;
            }
            used[c] = false;
            assign[i] = None;
        }
        false
    }
    for pinned in 0..p.size() {
        let mut assign: Vec<Option<usize>> = vec![None; p.size()];
        let mut used = vec![false; count];
        assign[pinned] = Some(forced);
        used[forced] = true;
        // Pins carry no earlier assignments to validate; relation checks for
        // the pinned position happen as the other positions are filled.
        if rec(p, count, &lt, induced, &mut assign, &mut used, 0) {
            return true;
        }
    }
    false
}

/// Embed `P` into a family of subspaces. Returns the images as lattice
/// element ids, in pattern-element order.
pub fn embeds(p: &PosetSpec, f: &Family, induced: bool) -> Option<Vec<u32>> {
    let ids = f.ids();
    let lat = f.lattice();
    let witness = embeds_with(
        p,
        ids.len(),
        |a, b| lat.lt(ids[a] as usize, ids[b] as usize),
        induced,
    )?;
    Some(witness.into_iter().map(|pos| ids[pos]).collect())
}

/// True when `ids[..]` restricted to `subset` contains an antichain of the
/// given size under the lattice order.
pub fn has_antichain(f: &Family, candidates: &[u32], size: usize) -> bool {
    fn rec(f: &Family, cands: &[u32], size: usize) -> bool {
        if size == 0 {
            return true;
        }
        if cands.len() < size {
            return false;
        }
        let first = cands[0];
        let rest = &cands[1..];
        // Take `first`: everything kept must be incomparable with it.
        let incomparable: Vec<u32> = rest
            .iter()
            .copied()
            .filter(|&x| {
                !f.lattice().leq(first as usize, x as usize)
                    && !f.lattice().leq(x as usize, first as usize)
            })
            .collect();
        if rec(f, &incomparable, size - 1) {
            return true;
        }
        rec(f, rest, size)
    }
    rec(f, candidates, size)
}

/// Specialized freeness check for fork-shaped forbidden sets.
///
/// Weak semantics: `F` is `V_k`-free iff every member has at most `k-1`
/// strict superspaces inside `F` (dually for `Lambda_l`). Induced semantics:
/// the strict superspaces of each member may not contain an antichain of
/// size `k` (dually below).
pub fn fast_free_check(
    f: &Family,
    forbidden: &[PosetSpec],
    induced: bool,
) -> Result<bool, PosetError> {
    let mut k_min: Option<usize> = None;
    let mut l_min: Option<usize> = None;
    for p in forbidden {
        if let Some(k) = p.v_shape() {
            k_min = Some(k_min.map_or(k, |m: usize| m.min(k)));
        } else if let Some(l) = p.lambda_shape() {
            l_min = Some(l_min.map_or(l, |m: usize| m.min(l)));
        } else {
            return Err(PosetError::UnsupportedShape(format!(
                "{:?}",
                p.name().unwrap_or("<anonymous>")
            )));
        }
    }
    let lat = f.lattice();
    for id in f.ids() {
        if let Some(k) = k_min {
            let ups: Vec<u32> = f
                .ids()
                .into_iter()
                .filter(|&x| x != id && lat.leq(id as usize, x as usize))
                .collect();
            let bad = if induced {
                has_antichain(f, &ups, k)
            } else {
                ups.len() >= k
            };
            if bad {
                return Ok(false);
            }
        }
        if let Some(l) = l_min {
            let downs: Vec<u32> = f
                .ids()
                .into_iter()
                .filter(|&x| x != id && lat.leq(x as usize, id as usize))
                .collect();
            let bad = if induced {
                has_antichain(f, &downs, l)
            } else {
                downs.len() >= l
            };
            if bad {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Freeness via the general embedding engine; the slow reference route.
pub fn is_free(f: &Family, forbidden: &[PosetSpec], induced: bool) -> bool {
    forbidden.iter().all(|p| embeds(p, f, induced).is_none())
}
