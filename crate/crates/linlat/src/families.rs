//! Families of subspaces over a shared lattice, canonical constructions, and
//! the averaging/structure lemma checks used in the extremal arguments.

use std::sync::Arc;


use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitSet;
use crate::lattice::{LatticeError, LinearLattice};
use crate::qarith::{q_binomial, to_u64};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("families belong to different lattices")]
    LatticeMismatch,
    #[error("operation requires L({expected_n}, {expected_q})")]
    WrongLattice { expected_n: usize, expected_q: u8 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("averaging argument failed to produce the guaranteed witness")]
    LemmaViolated,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A set of lattice elements. Immutable snapshot; set algebra returns new
/// values.
#[derive(Clone)]
pub struct Family {
    lattice: Arc<LinearLattice>,
    members: BitSet,
}

impl PartialEq for Family {
    fn eq(&self, other: &Self) -> bool {
        self.same_lattice(other) && self.members == other.members
    }
}
impl Eq for Family {}

impl std::fmt::Debug for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Family(L({}, {}), {:?})",
            self.lattice.n(),
            self.lattice.q(),
            self.members
        )
    }
}

impl Family {
    pub fn empty(lattice: Arc<LinearLattice>) -> Family {
        let members = BitSet::new(lattice.count());
        Family { lattice, members }
    }

    pub fn from_ids(lattice: Arc<LinearLattice>, ids: &[u32]) -> Family {
        let mut members = BitSet::new(lattice.count());
        for &id in ids {
            assert!((id as usize) < lattice.count(), "element id out of range");
            members.insert(id as usize);
        }
        Family { lattice, members }
    }

    pub fn from_bitset(lattice: Arc<LinearLattice>, members: BitSet) -> Family {
        assert_eq!(members.len(), lattice.count());
        Family { lattice, members }
    }

    pub fn lattice(&self) -> &LinearLattice {
        &self.lattice
    }

    pub fn lattice_arc(&self) -> Arc<LinearLattice> {
        Arc::clone(&self.lattice)
    }

    pub fn same_lattice(&self, other: &Family) -> bool {
        self.lattice.n() == other.lattice.n() && self.lattice.q() == other.lattice.q()
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.contains(id as usize)
    }

    /// Member ids in ascending order.
    pub fn ids(&self) -> Vec<u32> {
        self.members.iter_ones().map(|i| i as u32).collect()
    }

    pub fn inserted(&self, id: u32) -> Family {
        let mut members = self.members.clone();
        members.insert(id as usize);
        Family { lattice: Arc::clone(&self.lattice), members }
    }

    pub fn removed(&self, id: u32) -> Family {
        let mut members = self.members.clone();
        members.remove(id as usize);
        Family { lattice: Arc::clone(&self.lattice), members }
    }

    pub fn union(&self, other: &Family) -> Result<Family, FamilyError> {
        if !self.same_lattice(other) {
            return Err(FamilyError::LatticeMismatch);
        }
        let mut members = self.members.clone();
        members.union_with(&other.members);
        Ok(Family { lattice: Arc::clone(&self.lattice), members })
    }

    /// Count of members per dimension, `F_s` for `s = 0..=n`.
    pub fn level_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.lattice.n() + 1];
        for id in self.members.iter_ones() {
            counts[self.lattice.dim_of(id)] += 1;
        }
        counts
    }

    /// Ids of members with the given dimension.
    pub fn members_of_dim(&self, s: usize) -> Vec<u32> {
        self.ids()
            .into_iter()
            .filter(|&id| self.lattice.dim_of(id as usize) == s)
            .collect()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.members.iter_ones().map(|i| self.lattice.dim_of(i)).max()
    }

    pub fn min_dim(&self) -> Option<usize> {
        self.members.iter_ones().map(|i| self.lattice.dim_of(i)).min()
    }

    /// Strict superspaces of `id` inside the family.
    pub fn ups_in_family(&self, id: u32) -> Vec<u32> {
        let mut ups = self.lattice.up_set(id as usize).clone();
        ups.intersect_with(&self.members);
        ups.remove(id as usize);
        ups.iter_ones().map(|i| i as u32).collect()
    }

    /// Strict subspaces of `id` inside the family.
    pub fn downs_in_family(&self, id: u32) -> Vec<u32> {
        let mut downs = self.lattice.down_set(id as usize).clone();
        downs.intersect_with(&self.members);
        downs.remove(id as usize);
        downs.iter_ones().map(|i| i as u32).collect()
    }

    /// Serializable document in the family file format.
    pub fn to_doc(&self) -> FamilyDoc {
        FamilyDoc {
            n: self.lattice.n() as u32,
            q: self.lattice.q() as u32,
            subspaces: self
                .ids()
                .iter()
                .map(|&id| {
                    self.lattice
                        .element(id as usize)
                        .row_vectors()
                        .into_iter()
                        .map(|row| row.into_iter().map(u32::from).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Load a family document, canonicalizing every spanning set.
    pub fn from_doc(lattice: Arc<LinearLattice>, doc: &FamilyDoc) -> Result<Family, FamilyError> {
        if doc.n as usize != lattice.n() || doc.q != lattice.q() as u32 {
            return Err(FamilyError::WrongLattice {
                expected_n: lattice.n(),
                expected_q: lattice.q(),
            });
        }
        let mut members = BitSet::new(lattice.count());
        for rows in &doc.subspaces {
            let byte_rows: Vec<Vec<u8>> = rows
                .iter()
                .map(|r| r.iter().map(|&x| x as u8).collect())
                .collect();
            let id = lattice.id_from_spanning_rows(&byte_rows)?;
            members.insert(id as usize);
        }
        Ok(Family { lattice, members })
    }
}

/// JSON-facing family format: spanning rows per subspace, integers in `0..q`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FamilyDoc {
    pub n: u32,
    pub q: u32,
    pub subspaces: Vec<Vec<Vec<u32>>>,
}

/// All `k`-dimensional subspaces as a family.
pub fn level_family(lattice: Arc<LinearLattice>, k: usize) -> Result<Family, FamilyError> {
    if k > lattice.n() {
        return Err(FamilyError::OutOfRange(format!(
            "level {k} of a {}-dimensional lattice",
            lattice.n()
        )));
    }
    let mut members = BitSet::new(lattice.count());
    for id in lattice.level_range(k) {
        members.insert(id);
    }
    Ok(Family { lattice, members })
}

pub fn union_of_levels(lattice: Arc<LinearLattice>, ks: &[usize]) -> Result<Family, FamilyError> {
    let mut seen = std::collections::HashSet::new();
    let mut members = BitSet::new(lattice.count());
    for &k in ks {
        if k > lattice.n() {
            return Err(FamilyError::OutOfRange(format!(
                "level {k} of a {}-dimensional lattice",
                lattice.n()
            )));
        }
        if !seen.insert(k) {
            return Err(FamilyError::OutOfRange(format!("duplicate level {k}")));
        }
        for id in lattice.level_range(k) {
            members.insert(id);
        }
    }
    Ok(Family { lattice, members })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureSide {
    /// Support on `{ceil(n/2), ceil(n/2)+1}`; a heavy element of the upper
    /// level is guaranteed.
    Up,
    /// Support on `{floor(n/2)-1, floor(n/2)}`; mirror image.
    Down,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructureVerdict {
    /// The side in question is empty, so there is nothing to find.
    VacuouslyTrue,
    /// A member with at least `required` neighbors inside the family one
    /// level toward the middle.
    Witness { element: u32, count: u64, required: u64 },
}

/// Averaging check: a family filling `[n choose ceil(n/2)]_q` elements on two
/// adjacent near-middle levels with a nonempty outer level must contain an
/// element with `q^(ceil(n/2))` neighbors in the inner level.
pub fn structure_lemma_check(
    f: &Family,
    side: StructureSide,
) -> Result<StructureVerdict, FamilyError> {
    let lat = f.lattice();
    let n = lat.n() as u32;
    let q = lat.q() as u32;
    let mid = lat.n().div_ceil(2);
    if matches!(side, StructureSide::Down) && lat.n() < 2 {
        return Err(FamilyError::OutOfRange("outer level outside the lattice".into()));
    }
    let (inner, outer) = match side {
        StructureSide::Up => (mid, mid + 1),
        StructureSide::Down => (lat.n() / 2, lat.n() / 2 - 1),
    };
    if outer > lat.n() {
        return Err(FamilyError::OutOfRange("outer level outside the lattice".into()));
    }
    let counts = f.level_counts();
    for (s, &c) in counts.iter().enumerate() {
        if c > 0 && s != inner && s != outer {
            return Err(FamilyError::PreconditionViolated(format!(
                "member of dimension {s} outside the allowed support {{{inner}, {outer}}}"
            )));
        }
    }
    let expected = to_u64(&q_binomial(n, mid as u32, q));
    if f.len() as u64 != expected {
        return Err(FamilyError::PreconditionViolated(format!(
            "family size {} differs from the required {expected}",
            f.len()
        )));
    }
    if counts[outer] == 0 {
        return Ok(StructureVerdict::VacuouslyTrue);
    }
    let required = (q as u64).pow(mid as u32);
    let mut best: Option<(u64, u32)> = None;
    for a in f.members_of_dim(outer) {
        let neighbors = match side {
            StructureSide::Up => f.downs_in_family(a),
            StructureSide::Down => f.ups_in_family(a),
        };
        let count = neighbors
            .iter()
            .filter(|&&x| f.lattice.dim_of(x as usize) == inner)
            .count() as u64;
        match best {
            Some((c, _)) if c >= count => {}
            _ => best = Some((count, a)),
        }
    }
    let (count, element) = best.expect("outer level is nonempty");
    if count >= required {
        Ok(StructureVerdict::Witness { element, count, required })
    } else {
        Err(FamilyError::LemmaViolated)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactVerdict {
    Pass { pairs_checked: u64, expected: u64 },
    Counterexample { g1: u32, g2: u32, between: u64, expected: u64 },
}

/// Chain double-count equality case: for odd `n`, a family of size
/// `[n choose (n+1)/2]_q` supported on the two middle levels must meet every
/// interval between a `(n+3)/2`-dim and a `(n-3)/2`-dim subspace in exactly
/// `q^2 + q + 1` members.
pub fn fact_equality_check(f: &Family) -> Result<FactVerdict, FamilyError> {
    let lat = f.lattice();
    let n = lat.n();
    if n < 3 || n % 2 == 0 {
        return Err(FamilyError::OutOfRange("requires odd n >= 3".into()));
    }
    let q = lat.q() as u64;
    let (lo, hi) = ((n - 1) / 2, n.div_ceil(2));
    if f.min_dim().is_some_and(|d| d < lo) || f.max_dim().is_some_and(|d| d > hi) {
        return Err(FamilyError::PreconditionViolated(format!(
            "support must lie within dimensions {lo}..={hi}"
        )));
    }
    let expected_size = to_u64(&q_binomial(n as u32, hi as u32, lat.q() as u32));
    if f.len() as u64 != expected_size {
        return Err(FamilyError::PreconditionViolated(format!(
            "family size {} differs from the required {expected_size}",
            f.len()
        )));
    }
    let expected = q * q + q + 1;
    let (d1, d2) = ((n + 3) / 2, (n - 3) / 2);
    let mut pairs = 0u64;
    for g1 in lat.level_range(d1) {
        for g2 in lat.level_range(d2) {
            if !lat.leq(g2, g1) {
                continue;
            }
            pairs += 1;
            let mut between = lat.up_set(g2).clone();
            between.intersect_with(lat.down_set(g1));
            between.intersect_with(f.members());
            let between = between
                .iter_ones()
                .filter(|&x| {
                    let d = lat.dim_of(x);
                    d >= lo && d <= hi
                })
                .count() as u64;
            if between != expected {
                return Ok(FactVerdict::Counterexample {
                    g1: g1 as u32,
                    g2: g2 as u32,
                    between,
                    expected,
                });
            }
        }
    }
    Ok(FactVerdict::Pass { pairs_checked: pairs, expected })
}

/// The exceptional maximum fork-free families of `L(3, 2)` that are not
/// levels, found by exhaustive search: each consists of a matching of three
/// comparable point-plane pairs plus one isolated element.
pub fn fig1_families(lattice: Arc<LinearLattice>) -> Result<Vec<Family>, FamilyError> {
    if lattice.n() != 3 || lattice.q() != 2 {
        return Err(FamilyError::WrongLattice { expected_n: 3, expected_q: 2 });
    }
    let forbidden = vec![
        crate::posets::named_poset("V:2").expect("valid"),
        crate::posets::named_poset("L:2").expect("valid"),
    ];
    let problem = crate::search::SearchProblem {
        lattice: Arc::clone(&lattice),
        forbidden,
        induced: true,
        dim_range: (0, 3),
        mode: crate::search::SearchMode::EnumerateExtremal,
        budget: Default::default(),
        threads: 1,
        symmetry_reduction: false,
    };
    let report = crate::search::solve(&problem);
    debug_assert!(report.completed);
    let levels = [level_family(Arc::clone(&lattice), 1)?, level_family(Arc::clone(&lattice), 2)?];
    Ok(report
        .extremal
        .unwrap_or_default()
        .into_iter()
        .filter(|f| !levels.contains(f))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    fn arc_lattice(n: usize, q: u64) -> Arc<LinearLattice> {
        Arc::new(build_lattice(n, q).unwrap())
    }

    #[test]
    fn level_families() {
        let lat = arc_lattice(3, 2);
        assert_eq!(level_family(Arc::clone(&lat), 1).unwrap().len(), 7);
        assert_eq!(level_family(Arc::clone(&lat), 0).unwrap().len(), 1);
        assert!(level_family(Arc::clone(&lat), 4).is_err());
        let lat42 = arc_lattice(4, 2);
        assert_eq!(level_family(Arc::clone(&lat42), 2).unwrap().len(), 35);

        assert_eq!(union_of_levels(Arc::clone(&lat), &[1, 2]).unwrap().len(), 14);
        assert_eq!(union_of_levels(Arc::clone(&lat), &[]).unwrap().len(), 0);
        assert_eq!(union_of_levels(Arc::clone(&lat42), &[1, 2, 3]).unwrap().len(), 65);
        assert!(union_of_levels(lat, &[1, 1]).is_err());
    }

    #[test]
    fn level_counts_and_ids_round_trip() {
        let lat = arc_lattice(3, 2);
        let f = union_of_levels(Arc::clone(&lat), &[0, 2]).unwrap();
        assert_eq!(f.level_counts(), vec![1, 0, 7, 0]);
        let g = Family::from_ids(Arc::clone(&lat), &f.ids());
        assert_eq!(f, g);
    }

    #[test]
    fn doc_round_trip_canonicalizes() {
        let lat = arc_lattice(3, 2);
        let f = union_of_levels(Arc::clone(&lat), &[1, 2]).unwrap();
        let mut doc = f.to_doc();
        // Perturb each spanning set: duplicate a row; order is irrelevant.
        for rows in &mut doc.subspaces {
            let first = rows[0].clone();
            rows.push(first);
            rows.reverse();
        }
        let g = Family::from_doc(Arc::clone(&lat), &doc).unwrap();
        assert_eq!(f, g);

        let wrong = FamilyDoc { n: 4, q: 2, subspaces: vec![] };
        assert!(Family::from_doc(lat, &wrong).is_err());
    }

    #[test]
    fn structure_lemma_up_small_case() {
        // n = 2, q = 2: two points plus the full plane; the plane must
        // contain at least q^1 = 2 family points.
        let lat = arc_lattice(2, 2);
        let full = (lat.count() - 1) as u32;
        let points = lat.level_range(1);
        let f = Family::from_ids(
            Arc::clone(&lat),
            &[points.start as u32, points.start as u32 + 1, full],
        );
        match structure_lemma_check(&f, StructureSide::Up).unwrap() {
            StructureVerdict::Witness { element, count, required } => {
                assert_eq!(element, full);
                assert_eq!(count, 2);
                assert_eq!(required, 2);
            }
            v => panic!("expected a witness, got {v:?}"),
        }
    }

    #[test]
    fn structure_lemma_vacuous_and_errors() {
        let lat = arc_lattice(4, 2);
        let mid = level_family(Arc::clone(&lat), 2).unwrap();
        assert_eq!(
            structure_lemma_check(&mid, StructureSide::Up).unwrap(),
            StructureVerdict::VacuouslyTrue
        );
        assert_eq!(
            structure_lemma_check(&mid, StructureSide::Down).unwrap(),
            StructureVerdict::VacuouslyTrue
        );
        // Wrong size.
        let small = Family::from_ids(Arc::clone(&lat), &[lat.level_range(2).start as u32]);
        assert!(matches!(
            structure_lemma_check(&small, StructureSide::Up),
            Err(FamilyError::PreconditionViolated(_))
        ));
        // Wrong support.
        let f = union_of_levels(Arc::clone(&lat), &[0, 2]).unwrap();
        assert!(matches!(
            structure_lemma_check(&f, StructureSide::Up),
            Err(FamilyError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn structure_lemma_randomized_two_level_families() {
        // Every size-35 family on levels {2, 3} of L(4, 2) with a nonempty
        // top level has an element with >= 4 subspaces one level down.
        use rand::prelude::*;
        let lat = arc_lattice(4, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let level2: Vec<u32> = lat.level_range(2).map(|x| x as u32).collect();
        let level3: Vec<u32> = lat.level_range(3).map(|x| x as u32).collect();
        for _ in 0..200 {
            let t = rng.random_range(1..=15usize);
            let mut ids: Vec<u32> = level3.choose_multiple(&mut rng, t).copied().collect();
            ids.extend(level2.choose_multiple(&mut rng, 35 - t).copied());
            let f = Family::from_ids(Arc::clone(&lat), &ids);
            match structure_lemma_check(&f, StructureSide::Up).unwrap() {
                StructureVerdict::Witness { count, required, .. } => {
                    assert!(count >= required);
                    assert_eq!(required, 4);
                }
                v => panic!("expected witness, got {v:?}"),
            }
        }
    }

    #[test]
    fn level_families_avoid_every_tall_pattern() {
        let lat = arc_lattice(4, 2);
        let patterns = ["V:2", "V:4", "L:3", "B", "Y:2", "Y':3", "C:2"];
        for k in 0..=4usize {
            let level = level_family(Arc::clone(&lat), k).unwrap();
            for name in patterns {
                let p = crate::posets::named_poset(name).unwrap();
                assert!(p.height() >= 2);
                for induced in [false, true] {
                    assert!(
                        crate::posets::embeds(&p, &level, induced).is_none(),
                        "level {k} contains {name}"
                    );
                }
            }
        }
    }

    #[test]
    fn fact_equality_on_middle_levels_of_l32() {
        let lat = arc_lattice(3, 2);
        let f = union_of_levels(Arc::clone(&lat), &[1, 2]).unwrap();
        // 14 members but the required size is 7: precondition fails.
        assert!(fact_equality_check(&f).is_err());
        let level = level_family(Arc::clone(&lat), 2).unwrap();
        match fact_equality_check(&level).unwrap() {
            FactVerdict::Pass { pairs_checked, expected } => {
                assert_eq!(pairs_checked, 1, "only (V, 0) at n = 3");
                assert_eq!(expected, 7);
            }
            v => panic!("{v:?}"),
        }
    }
}
