//! Finite field arithmetic for prime powers `q <= 16`.
//!
//! Fields are represented by total operation tables on `{0, ..., q-1}`, built
//! once and shared read-only. Prime fields use integers mod `p`; extension
//! fields `F_{p^e}` encode an element as the base-`p` digit string of its
//! residue polynomial and reduce products modulo a fixed irreducible
//! polynomial (the monic irreducible of degree `e` whose non-leading
//! coefficient string has the smallest base-`p` value).

use thiserror::Error;

pub const MAX_ORDER: u8 = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotAPrimePower(u64),
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    UnsupportedOrder(u64),
}

/// Operation tables for `F_q`. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub q: u8,
    /// Characteristic.
    pub p: u8,
    /// Extension degree, `q = p^e`.
    pub e: u8,
    add_table: Vec<u8>,
    mul_table: Vec<u8>,
    inv_table: Vec<u8>,
}

/// Non-leading coefficients (constant term first) of the reduction polynomial
/// used for each supported extension field.
const IRREDUCIBLE: &[(u8, u8, &[u8])] = &[
    (2, 2, &[1, 1]),       // x^2 + x + 1
    (2, 3, &[1, 1, 0]),    // x^3 + x + 1
    (2, 4, &[1, 1, 0, 0]), // x^4 + x + 1
    (3, 2, &[1, 0]),       // x^2 + 1
];

/// Build the operation tables for `F_q`. Deterministic: the same `q` always
/// yields identical tables.
pub fn make_field(q: u64) -> Result<FieldSpec, FieldError> {
    if q > MAX_ORDER as u64 {
        return Err(FieldError::UnsupportedOrder(q));
    }
    let (p, e) = prime_power_decomposition(q).ok_or(FieldError::NotAPrimePower(q))?;
    let q = q as u8;
    let field = if e == 1 {
        let idx = |a: u8, b: u8| a as usize * q as usize + b as usize;
        let mut add = vec![0u8; q as usize * q as usize];
        let mut mul = vec![0u8; q as usize * q as usize];
        for a in 0..q {
            for b in 0..q {
                add[idx(a, b)] = (a + b) % q;
                mul[idx(a, b)] = ((a as u16 * b as u16) % q as u16) as u8;
            }
        }
        let inv = invert_by_search(q, &mul);
        FieldSpec {
            q,
            p,
            e,
            add_table: add,
            mul_table: mul,
            inv_table: inv,
        }
    } else {
        let modulus = IRREDUCIBLE
            .iter()
            .find(|&&(mp, me, _)| mp == p && me == e)
            .map(|&(_, _, c)| c)
            .expect("every supported extension order has a table entry");
        build_extension(q, p, e, modulus)
    };
    debug_assert!(field_axiom_check(&field));
    Ok(field)
}

fn prime_power_decomposition(q: u64) -> Option<(u8, u8)> {
    if q < 2 {
        return None;
    }
    let mut n = q;
    let mut p = 0u64;
    for cand in 2..=q {
        if n % cand == 0 {
            p = cand;
            break;
        }
    }
    let mut e = 0u8;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    (n == 1).then_some((p as u8, e))
}

fn invert_by_search(q: u8, mul: &[u8]) -> Vec<u8> {
    let mut inv = vec![0u8; q as usize];
    for a in 1..q {
        for b in 1..q {
            if mul[a as usize * q as usize + b as usize] == 1 {
                inv[a as usize] = b;
                break;
            }
        }
    }
    inv
}

fn build_extension(q: u8, p: u8, e: u8, modulus: &[u8]) -> FieldSpec {
    let digits = |mut x: u8| -> Vec<u8> {
        let mut d = vec![0u8; e as usize];
        for slot in d.iter_mut() {
            *slot = x % p;
            x /= p;
        }
        d
    };
    let pack = |d: &[u8]| -> u8 { d.iter().rev().fold(0, |acc, &c| acc * p + c) };

    let idx = |a: u8, b: u8| a as usize * q as usize + b as usize;
    let mut add = vec![0u8; q as usize * q as usize];
    let mut mul = vec![0u8; q as usize * q as usize];
    for a in 0..q {
        for b in 0..q {
            let (da, db) = (digits(a), digits(b));
            let sum: Vec<u8> = da.iter().zip(&db).map(|(&x, &y)| (x + y) % p).collect();
            add[idx(a, b)] = pack(&sum);

            // Polynomial product, then reduction by x^e = -(modulus).
            let mut prod = vec![0u8; 2 * e as usize];
            for (i, &x) in da.iter().enumerate() {
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] = ((prod[i + j] as u16 + x as u16 * y as u16) % p as u16) as u8;
                }
            }
            for i in (e as usize..prod.len()).rev() {
                let c = prod[i];
                if c != 0 {
                    prod[i] = 0;
                    for (j, &m) in modulus.iter().enumerate() {
                        let sub = (c as u16 * m as u16 % p as u16) as u8;
                        let t = prod[i - e as usize + j] + (p - sub) % p;
                        prod[i - e as usize + j] = t % p;
                    }
                }
            }
            mul[idx(a, b)] = pack(&prod[..e as usize]);
        }
    }
    let inv = invert_by_search(q, &mul);
    FieldSpec {
        q,
        p,
        e,
        add_table: add,
        mul_table: mul,
        inv_table: inv,
    }
}

impl FieldSpec {
    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add_table[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul_table[a as usize * self.q as usize + b as usize]
    }

    /// Additive inverse.
    pub fn neg(&self, a: u8) -> u8 {
        for b in 0..self.q {
            if self.add(a, b) == 0 {
                return b;
            }
        }
        unreachable!("every element has an additive inverse")
    }

    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    /// Multiplicative inverse; `a` must be nonzero.
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert_ne!(a, 0);
        self.inv_table[a as usize]
    }

    pub fn pow(&self, a: u8, mut n: u32) -> u8 {
        let mut acc = 1u8;
        let mut base = a;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            n >>= 1;
        }
        acc
    }
}

/// Exhaustively verify all field axioms on the tables. Cheap for `q <= 16`
/// (at most `16^3` triples per law).
pub fn field_axiom_check(f: &FieldSpec) -> bool {
    let q = f.q;
    for a in 0..q {
        if f.add(a, 0) != a || f.mul(a, 1) != a || f.mul(a, 0) != 0 {
            return false;
        }
        if a != 0 && f.mul(a, f.inv_table[a as usize]) != 1 {
            return false;
        }
        if f.add(a, f.neg(a)) != 0 {
            return false;
        }
    }
    for a in 0..q {
        for b in 0..q {
            if f.add(a, b) != f.add(b, a) || f.mul(a, b) != f.mul(b, a) {
                return false;
            }
            for c in 0..q {
                if f.add(f.add(a, b), c) != f.add(a, f.add(b, c)) {
                    return false;
                }
                if f.mul(f.mul(a, b), c) != f.mul(a, f.mul(b, c)) {
                    return false;
                }
                if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f2_is_xor_and() {
        let f = make_field(2).unwrap();
        assert_eq!(f.add(1, 1), 0);
        assert_eq!(f.add(0, 1), 1);
        assert_eq!(f.mul(1, 1), 1);
        assert_eq!(f.mul(0, 1), 0);
    }

    #[test]
    fn f3_matches_mod_3() {
        let f = make_field(3).unwrap();
        for a in 0..3u8 {
            for b in 0..3u8 {
                assert_eq!(f.add(a, b), (a + b) % 3);
                assert_eq!(f.mul(a, b), (a * b) % 3);
            }
        }
    }

    #[test]
    fn prime_fields_match_integer_arithmetic() {
        for p in [2u8, 3, 5, 7, 11, 13] {
            let f = make_field(p as u64).unwrap();
            for a in 0..p {
                for b in 0..p {
                    assert_eq!(f.add(a, b), (a + b) % p);
                    assert_eq!(f.mul(a, b), ((a as u16 * b as u16) % p as u16) as u8);
                }
            }
        }
    }

    #[test]
    fn f4_cubes_to_one() {
        let f = make_field(4).unwrap();
        for x in 1..4u8 {
            assert_eq!(f.mul(f.mul(x, x), x), 1, "x^3 != 1 for x = {x}");
        }
        assert!(field_axiom_check(&f));
    }

    #[test]
    fn axioms_hold_for_all_supported_orders() {
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            let f = make_field(q).unwrap();
            assert!(field_axiom_check(&f), "axioms fail for q = {q}");
        }
    }

    #[test]
    fn axiom_check_rejects_corruption() {
        let mut f = make_field(5).unwrap();
        f.mul_table[7] ^= 1;
        assert!(!field_axiom_check(&f));
    }

    #[test]
    fn rejects_non_prime_powers_and_large_orders() {
        for q in [0u64, 1, 6, 10, 12, 14, 15] {
            assert_eq!(make_field(q), Err(FieldError::NotAPrimePower(q)));
        }
        assert_eq!(make_field(25), Err(FieldError::UnsupportedOrder(25)));
    }

    #[test]
    fn nonzero_elements_have_inverses() {
        for q in [4u64, 8, 9, 16] {
            let f = make_field(q).unwrap();
            for x in 1..f.q {
                assert_eq!(f.mul(x, f.inv(x)), 1);
            }
        }
    }

    #[test]
    fn frobenius_is_additive() {
        for q in [4u64, 8, 9, 16] {
            let f = make_field(q).unwrap();
            for x in 0..f.q {
                for y in 0..f.q {
                    let lhs = f.pow(f.add(x, y), f.p as u32);
                    let rhs = f.add(f.pow(x, f.p as u32), f.pow(y, f.p as u32));
                    assert_eq!(lhs, rhs, "q={q} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn reduction_polynomials_are_least_irreducible() {
        // Re-derive each hard-coded modulus: the first monic polynomial of
        // degree e (non-leading coefficients enumerated by base-p value) with
        // no root that is also irreducible by trial division over F_p[x].
        for &(p, e, coeffs) in IRREDUCIBLE {
            let found = least_monic_irreducible(p, e);
            assert_eq!(found.as_slice(), coeffs, "p={p} e={e}");
        }
    }

    fn least_monic_irreducible(p: u8, e: u8) -> Vec<u8> {
        let total = (p as u32).pow(e as u32);
        'outer: for enc in 0..total {
            let mut poly = vec![0u8; e as usize + 1];
            let mut x = enc;
            for c in poly.iter_mut().take(e as usize) {
                *c = (x % p as u32) as u8;
                x /= p as u32;
            }
            poly[e as usize] = 1;
            // Trial division by every monic polynomial of degree 1..=e/2.
            for d in 1..=(e / 2).max(1) {
                let dt = (p as u32).pow(d as u32);
                for denc in 0..dt {
                    let mut div = vec![0u8; d as usize + 1];
                    let mut y = denc;
                    for c in div.iter_mut().take(d as usize) {
                        *c = (y % p as u32) as u8;
                        y /= p as u32;
                    }
                    div[d as usize] = 1;
                    if poly_divides(&div, &poly, p) {
                        continue 'outer;
                    }
                }
            }
            return poly[..e as usize].to_vec();
        }
        panic!("no irreducible of degree {e} over F_{p}");
    }

    fn poly_divides(d: &[u8], n: &[u8], p: u8) -> bool {
        let mut rem: Vec<u8> = n.to_vec();
        let dd = d.len() - 1;
        while rem.len() > dd && rem.iter().any(|&c| c != 0) {
            let lead = *rem.last().unwrap();
            if lead == 0 {
                rem.pop();
                continue;
            }
            let shift = rem.len() - 1 - dd;
            for (i, &dc) in d.iter().enumerate() {
                let sub = (lead as u16 * dc as u16 % p as u16) as u8;
                let cur = rem[shift + i];
                rem[shift + i] = (cur + p - sub) % p;
            }
            rem.pop();
        }
        rem.iter().all(|&c| c == 0)
    }
}
