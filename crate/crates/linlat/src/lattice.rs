//! The linear lattice `L(n, q)`: every subspace of `F_q^n` in canonical form,
//! with the containment order precomputed.
//!
//! A subspace is stored as its reduced row echelon basis, the unique
//! canonical representative, so equality of subspaces is equality of values.
//! Rows are packed as base-q digit words (one hex digit per coordinate, most
//! significant digit first), which makes the numeric order of a packed row
//! equal to the lexicographic order of its digits.

use std::collections::HashMap;
use std::sync::OnceLock;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::bits::BitSet;
use crate::gfq::{make_field, FieldError, FieldSpec};
use crate::qarith::q_binomial;

/// Hard cap on lattice materialization.
pub const MAX_DIMENSION: usize = 6;
pub const MAX_ELEMENTS: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("lattice too large: {0}")]
    TooLarge(String),
    #[error("operands live in different ambient spaces")]
    AmbientMismatch,
}

/// A subspace of `F_q^n`, represented by its RREF basis rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    n: u8,
    q: u8,
    rows: Vec<u32>,
}

#[inline]
fn digit(row: u32, j: usize, n: usize) -> u8 {
    ((row >> (4 * (n - 1 - j))) & 0xF) as u8
}

#[inline]
fn set_digit(row: u32, j: usize, n: usize, v: u8) -> u32 {
    let shift = 4 * (n - 1 - j);
    (row & !(0xFu32 << shift)) | ((v as u32) << shift)
}

fn pack_row(digits: &[u8]) -> u32 {
    assert!(digits.len() <= 8, "rows support at most 8 coordinates");
    digits.iter().fold(0u32, |acc, &d| (acc << 4) | d as u32)
}

/// `dst - c * src`, digit by digit.
fn row_submul(dst: u32, src: u32, c: u8, f: &FieldSpec, n: usize) -> u32 {
    let mut out = dst;
    for j in 0..n {
        let v = f.sub(digit(dst, j, n), f.mul(c, digit(src, j, n)));
        out = set_digit(out, j, n, v);
    }
    out
}

/// Reduce `v` against RREF rows; the residue is zero iff `v` is in their span.
fn reduce_vector(mut v: u32, rows: &[u32], f: &FieldSpec, n: usize) -> u32 {
    for &r in rows {
        let pivot = (0..n).find(|&j| digit(r, j, n) != 0).expect("no zero rows in RREF");
        let c = digit(v, pivot, n);
        if c != 0 {
            v = row_submul(v, r, c, f, n);
        }
    }
    v
}

/// Canonicalize arbitrary spanning rows to RREF, dropping zero rows.
fn rref(mut rows: Vec<u32>, f: &FieldSpec, n: usize) -> Vec<u32> {
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot_row) = (rank..rows.len()).find(|&i| digit(rows[i], col, n) != 0) else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let inv = f.inv(digit(rows[rank], col, n));
        if inv != 1 {
            let mut scaled = rows[rank];
            for j in 0..n {
                scaled = set_digit(scaled, j, n, f.mul(inv, digit(rows[rank], j, n)));
            }
            rows[rank] = scaled;
        }
        for i in 0..rows.len() {
            if i != rank {
                let c = digit(rows[i], col, n);
                if c != 0 {
                    rows[i] = row_submul(rows[i], rows[rank], c, f, n);
                }
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    rows
}

impl Subspace {
    pub fn zero(n: usize, q: u8) -> Subspace {
        Subspace { n: n as u8, q, rows: Vec::new() }
    }

    pub fn full(n: usize, q: u8) -> Subspace {
        let rows = (0..n)
            .map(|i| {
                let mut d = vec![0u8; n];
                d[i] = 1;
                pack_row(&d)
            })
            .collect();
        Subspace { n: n as u8, q, rows }
    }

    /// Canonicalize any spanning set. Entries must lie in `0..q`.
    pub fn from_spanning_rows(
        n: usize,
        f: &FieldSpec,
        spanning: &[Vec<u8>],
    ) -> Result<Subspace, LatticeError> {
        if n > 8 {
            return Err(LatticeError::OutOfRange(format!("ambient dimension {n} > 8")));
        }
        let mut rows = Vec::with_capacity(spanning.len());
        for r in spanning {
            if r.len() != n {
                return Err(LatticeError::OutOfRange(format!(
                    "row has {} entries, expected {n}",
                    r.len()
                )));
            }
            if r.iter().any(|&d| d >= f.q) {
                return Err(LatticeError::OutOfRange(format!(
                    "entry out of field range 0..{}",
                    f.q
                )));
            }
            rows.push(pack_row(r));
        }
        Ok(Subspace { n: n as u8, q: f.q, rows: rref(rows, f, n) })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> u8 {
        digit(self.rows[i], j, self.n())
    }

    /// Basis rows as digit vectors, for serialization.
    pub fn row_vectors(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|&r| (0..self.n()).map(|j| digit(r, j, self.n())).collect())
            .collect()
    }

}

/// Containment test by row reduction: true iff `b` is a subspace of `a`.
pub fn contains(a: &Subspace, b: &Subspace, f: &FieldSpec) -> Result<bool, LatticeError> {
    if a.n != b.n || a.q != b.q {
        return Err(LatticeError::AmbientMismatch);
    }
    Ok(b.rows
        .iter()
        .all(|&v| reduce_vector(v, &a.rows, f, a.n()) == 0))
}

/// All `k`-dimensional subspaces of `F_q^n`, each exactly once, in canonical
/// (dimension, lexicographic-rows) order. Enumerates RREF matrices directly
/// by pivot pattern, so no deduplication is needed.
pub fn enumerate_level(n: usize, k: usize, f: &FieldSpec) -> Result<Vec<Subspace>, LatticeError> {
    if k > n {
        return Err(LatticeError::OutOfRange(format!("level {k} of an {n}-dimensional space")));
    }
    if n > 8 {
        return Err(LatticeError::OutOfRange(format!("ambient dimension {n} > 8")));
    }
    let q = f.q;
    let mut out = Vec::new();
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        // Free positions: to the right of the row's pivot, in non-pivot columns.
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for j in (p + 1)..n {
                if !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        let mut assignment = vec![0u8; free.len()];
        loop {
            let mut rows = vec![0u32; k];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i] = set_digit(rows[i], p, n, 1);
            }
            for (slot, &(i, j)) in free.iter().enumerate() {
                rows[i] = set_digit(rows[i], j, n, assignment[slot]);
            }
            out.push(Subspace { n: n as u8, q, rows });
            // Next mixed-radix assignment.
            let mut carry = true;
            for slot in (0..assignment.len()).rev() {
                if !carry {
                    break;
                }
                assignment[slot] += 1;
                if assignment[slot] == q {
                    assignment[slot] = 0;
                } else {
                    carry = false;
                }
            }
            if carry {
                break;
            }
        }
        // Next pivot combination.
        let mut i = k;
        loop {
            if i == 0 {
                pivots.clear();
                break;
            }
            i -= 1;
            if pivots[i] < n - (k - i) {
                pivots[i] += 1;
                for t in (i + 1)..k {
                    pivots[t] = pivots[t - 1] + 1;
                }
                break;
            }
        }
        if pivots.is_empty() {
            break;
        }
    }
    if k == 0 {
        out = vec![Subspace::zero(n, q)];
    }
    out.sort();
    debug_assert_eq!(out.len(), q_binomial(n as u32, k as u32, q as u32).to_usize().unwrap());
    Ok(out)
}

/// The fully materialized lattice. Immutable after construction.
pub struct LinearLattice {
    n: usize,
    q: u8,
    field: FieldSpec,
    elements: Vec<Subspace>,
    dims: Vec<u8>,
    level_offsets: Vec<usize>,
    index: HashMap<Vec<u32>, u32>,
    /// `up[i]` contains `j` iff `elements[i]` is a subspace of `elements[j]`
    /// (reflexive).
    up: Vec<BitSet>,
    down: Vec<BitSet>,
    covers_up: Vec<Vec<u32>>,
    covers_down: Vec<Vec<u32>>,
    complement: OnceLock<Vec<u32>>,
}

pub fn build_lattice(n: usize, q: u64) -> Result<LinearLattice, LatticeError> {
    if n > MAX_DIMENSION {
        return Err(LatticeError::TooLarge(format!("n = {n} exceeds {MAX_DIMENSION}")));
    }
    let field = make_field(q)?;
    let total: u64 = (0..=n)
        .map(|k| {
            q_binomial(n as u32, k as u32, q as u32)
                .to_u64()
                .unwrap_or(u64::MAX)
        })
        .fold(0u64, |a, b| a.saturating_add(b));
    if total > MAX_ELEMENTS {
        return Err(LatticeError::TooLarge(format!("{total} elements exceed {MAX_ELEMENTS}")));
    }

    let mut elements = Vec::with_capacity(total as usize);
    let mut level_offsets = vec![0usize; n + 2];
    for k in 0..=n {
        level_offsets[k] = elements.len();
        elements.extend(enumerate_level(n, k, &field)?);
        level_offsets[k + 1] = elements.len();
    }
    let dims: Vec<u8> = elements.iter().map(|e| e.dim() as u8).collect();
    let index: HashMap<Vec<u32>, u32> = elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.rows.clone(), i as u32))
        .collect();

    let count = elements.len();
    let mut covers_down: Vec<Vec<u32>> = vec![Vec::new(); count];
    for (i, e) in elements.iter().enumerate() {
        if e.dim() == 0 {
            continue;
        }
        let mut ids = hyperplanes_of(e, &field)
            .into_iter()
            .map(|rows| index[&rows])
            .collect::<Vec<u32>>();
        ids.sort_unstable();
        ids.dedup();
        covers_down[i] = ids;
    }
    let mut covers_up: Vec<Vec<u32>> = vec![Vec::new(); count];
    for (i, below) in covers_down.iter().enumerate() {
        for &b in below {
            covers_up[b as usize].push(i as u32);
        }
    }

    // Transitive closure along the graded cover structure.
    let mut down: Vec<BitSet> = (0..count).map(|_| BitSet::new(count)).collect();
    for i in 0..count {
        down[i].insert(i);
        let mut acc = std::mem::replace(&mut down[i], BitSet::new(0));
        for &c in &covers_down[i] {
            acc.union_with(&down[c as usize]);
        }
        down[i] = acc;
    }
    let mut up: Vec<BitSet> = (0..count).map(|_| BitSet::new(count)).collect();
    for i in (0..count).rev() {
        up[i].insert(i);
        let mut acc = std::mem::replace(&mut up[i], BitSet::new(0));
        for &c in &covers_up[i] {
            acc.union_with(&up[c as usize]);
        }
        up[i] = acc;
    }

    Ok(LinearLattice {
        n,
        q: field.q,
        field,
        elements,
        dims,
        level_offsets,
        index,
        up,
        down,
        covers_up,
        covers_down,
        complement: OnceLock::new(),
    })
}

/// All codimension-1 subspaces of `e`: one per functional on its coordinate
/// space with leading coefficient 1.
fn hyperplanes_of(e: &Subspace, f: &FieldSpec) -> Vec<Vec<u32>> {
    let k = e.dim();
    let n = e.n();
    let q = f.q;
    let mut out = Vec::new();
    let mut phi = vec![0u8; k];
    loop {
        // Advance to the next functional vector.
        let mut carry = true;
        for slot in (0..k).rev() {
            if !carry {
                break;
            }
            phi[slot] += 1;
            if phi[slot] == q {
                phi[slot] = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
        let lead = phi.iter().position(|&c| c != 0).expect("nonzero functional");
        if phi[lead] != 1 {
            continue;
        }
        // Kernel basis in coordinate space: e_j - phi_j * e_lead for j != lead.
        let mut rows = Vec::with_capacity(k - 1);
        for j in 0..k {
            if j == lead {
                continue;
            }
            let mut v = 0u32;
            for col in 0..n {
                let a = e.entry(j, col);
                let b = f.mul(phi[j], e.entry(lead, col));
                v = set_digit(v, col, n, f.sub(a, b));
            }
            rows.push(v);
        }
        out.push(rref(rows, f, n));
    }
    out
}

impl LinearLattice {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u8 {
        self.q
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn count(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, id: usize) -> &Subspace {
        &self.elements[id]
    }

    pub fn dim_of(&self, id: usize) -> usize {
        self.dims[id] as usize
    }

    pub fn level_range(&self, k: usize) -> std::ops::Range<usize> {
        self.level_offsets[k]..self.level_offsets[k + 1]
    }

    pub fn level_size(&self, k: usize) -> usize {
        self.level_range(k).len()
    }

    /// True iff `elements[a]` is contained in `elements[b]` (reflexive).
    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a].contains(b)
    }

    #[inline]
    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    /// Reflexive up-set of `a` as a bitmap over element ids.
    pub fn up_set(&self, a: usize) -> &BitSet {
        &self.up[a]
    }

    pub fn down_set(&self, a: usize) -> &BitSet {
        &self.down[a]
    }

    pub fn index_of(&self, s: &Subspace) -> Option<u32> {
        self.index.get(&s.rows).copied()
    }

    /// Canonicalize spanning rows and resolve to an element id.
    pub fn id_from_spanning_rows(&self, rows: &[Vec<u8>]) -> Result<u32, LatticeError> {
        let s = Subspace::from_spanning_rows(self.n, &self.field, rows)?;
        self.index_of(&s).ok_or(LatticeError::AmbientMismatch)
    }

    /// All `(dim-1)`-dimensional subspaces of `a`.
    pub fn lower_shadow(&self, a: usize) -> Result<&[u32], LatticeError> {
        if self.dim_of(a) == 0 {
            return Err(LatticeError::OutOfRange("the zero subspace has no lower shadow".into()));
        }
        Ok(&self.covers_down[a])
    }

    /// All `(dim+1)`-dimensional superspaces of `a`.
    pub fn upper_shadow(&self, a: usize) -> Result<&[u32], LatticeError> {
        if self.dim_of(a) == self.n {
            return Err(LatticeError::OutOfRange("the full space has no upper shadow".into()));
        }
        Ok(&self.covers_up[a])
    }

    /// The orthogonal-complement permutation: an inclusion-reversing
    /// involution mapping dimension `k` to `n - k`.
    pub fn complement_map(&self) -> &[u32] {
        self.complement.get_or_init(|| {
            (0..self.count())
                .map(|i| {
                    let rows = null_space(&self.elements[i], &self.field);
                    self.index[&rows]
                })
                .collect()
        })
    }

    /// Permutations of element ids induced by the invertible linear maps of
    /// the ambient space (each permutation listed once). Guarded to small
    /// lattices; used for orbit reports and optional symmetry reduction.
    pub fn linear_automorphisms(&self) -> Result<Vec<Vec<u32>>, LatticeError> {
        if self.n > 3 || self.q > 4 {
            return Err(LatticeError::TooLarge(
                "automorphism enumeration is limited to n <= 3, q <= 4".into(),
            ));
        }
        let n = self.n;
        let q = self.q as u64;
        let cells = n * n;
        let total = q.pow(cells as u32);
        let mut perms: Vec<Vec<u32>> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for enc in 0..total {
            let mut m = vec![vec![0u8; n]; n];
            let mut x = enc;
            for cell in m.iter_mut().flatten() {
                *cell = (x % q) as u8;
                x /= q;
            }
            let packed: Vec<u32> = m.iter().map(|r| pack_row(r)).collect();
            if rref(packed, &self.field, n).len() != n {
                continue;
            }
            let perm: Vec<u32> = (0..self.count())
                .map(|i| {
                    let e = &self.elements[i];
                    let rows: Vec<u32> = (0..e.dim())
                        .map(|r| {
                            let mut v = 0u32;
                            for col in 0..n {
                                let mut acc = 0u8;
                                for t in 0..n {
                                    acc = self.field.add(acc, self.field.mul(e.entry(r, t), m[t][col]));
                                }
                                v = set_digit(v, col, n, acc);
                            }
                            v
                        })
                        .collect();
                    self.index[&rref(rows, &self.field, n)]
                })
                .collect();
            if seen.insert(perm.clone()) {
                perms.push(perm);
            }
        }
        Ok(perms)
    }
}

/// RREF basis of the orthogonal complement under the standard dot product.
fn null_space(e: &Subspace, f: &FieldSpec) -> Vec<u32> {
    let n = e.n();
    let k = e.dim();
    if k == 0 {
        return Subspace::full(n, f.q).rows;
    }
    let pivots: Vec<usize> = (0..k)
        .map(|i| (0..n).find(|&j| e.entry(i, j) != 0).expect("RREF row"))
        .collect();
    let mut rows = Vec::with_capacity(n - k);
    for free_col in 0..n {
        if pivots.contains(&free_col) {
            continue;
        }
        let mut v = set_digit(0, free_col, n, 1);
        for (i, &p) in pivots.iter().enumerate() {
            v = set_digit(v, p, n, f.neg(e.entry(i, free_col)));
        }
        rows.push(v);
    }
    rref(rows, f, n)
}

impl std::fmt::Debug for LinearLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "L({}, {}) with {} elements", self.n, self.q, self.count())
    }
}
