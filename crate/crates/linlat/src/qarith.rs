//! Exact q-analog arithmetic.
//!
//! All values are arbitrary-precision integers or rationals; nothing here is
//! ever rounded. `[n]_q = (q^n - 1)/(q - 1)`, `[n]_q!` is the product of the
//! brackets, and the Gaussian binomial counts the `k`-dimensional subspaces
//! of `F_q^n`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::posets::PosetSpec;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QArithError {
    #[error("argument out of range: {0}")]
    OutOfRange(String),
}

/// `[n]_q = 1 + q + ... + q^(n-1)`.
pub fn q_bracket(n: u32, q: u32) -> BigUint {
    debug_assert!(q >= 2);
    let q = BigUint::from(q);
    let mut acc = BigUint::zero();
    let mut pow = BigUint::one();
    for _ in 0..n {
        acc += &pow;
        pow *= &q;
    }
    acc
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q`, with the empty product equal to 1.
pub fn q_factorial(n: u32, q: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * q_bracket(i, q))
}

/// Gaussian binomial coefficient; requires `0 <= k <= n`.
pub fn q_binomial(n: u32, k: u32, q: u32) -> BigUint {
    assert!(k <= n, "q_binomial requires k <= n (got n={n}, k={k})");
    let num = q_factorial(n, q);
    let den = q_factorial(k, q) * q_factorial(n - k, q);
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// Total variant: 0 outside the valid range, by convention.
pub fn q_binomial_total(n: u32, k: i64, q: u32) -> BigUint {
    if k < 0 || k as u64 > n as u64 {
        BigUint::zero()
    } else {
        q_binomial(n, k as u32, q)
    }
}

/// Sum of the `k` largest Gaussian binomials `[n choose i]_q` over distinct
/// indices `i`; ties are broken toward indices nearest `n/2`.
pub fn sigma_q(n: u32, k: u32, q: u32) -> Result<BigUint, QArithError> {
    if k == 0 || k > n + 1 {
        return Err(QArithError::OutOfRange(format!(
            "sigma_q requires 1 <= k <= n+1 (got n={n}, k={k})"
        )));
    }
    let mut levels: Vec<(BigUint, u32)> = (0..=n).map(|i| (q_binomial(n, i, q), i)).collect();
    // Largest value first; among equals prefer the index closest to the
    // middle, then the smaller index.
    levels.sort_by(|(va, ia), (vb, ib)| {
        vb.cmp(va)
            .then_with(|| (2 * *ia).abs_diff(n).cmp(&(2 * *ib).abs_diff(n)))
            .then_with(|| ia.cmp(ib))
    });
    Ok(levels.into_iter().take(k as usize).map(|(v, _)| v).sum())
}

/// An exact rational bound together with its floor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundValue {
    pub exact: BigRational,
    pub floor: BigUint,
}

impl BoundValue {
    fn from_rational(exact: BigRational) -> Self {
        debug_assert!(!exact.is_negative());
        let floor = exact.floor().to_integer().to_biguint().expect("non-negative");
        BoundValue { exact, floor }
    }
}

/// `((|P| + h(P))/2 - 1) * [n choose floor(n/2)]_q`.
pub fn bn_bound(p: &PosetSpec, n: u32, q: u32) -> BoundValue {
    let size = BigInt::from(p.size());
    let height = BigInt::from(p.height());
    let factor = BigRational::new(size + height, BigInt::from(2)) - BigRational::one();
    let level = BigRational::from_integer(BigInt::from(q_binomial(n, n / 2, q)));
    BoundValue::from_rational(factor * level)
}

/// `(1/2^(k-1)) (|P| + (3k-5) 2^(k-2) (h(P)-1) - 1) * [n choose floor(n/2)]_q`
/// for `k >= 2`.
pub fn gm_bound(p: &PosetSpec, n: u32, q: u32, k: u32) -> Result<BoundValue, QArithError> {
    if k < 2 {
        return Err(QArithError::OutOfRange(format!(
            "gm_bound requires k >= 2 (got {k})"
        )));
    }
    let size = BigInt::from(p.size());
    let height = BigInt::from(p.height());
    let inner = size + BigInt::from(3 * k as i64 - 5) * (BigInt::one() << (k - 2)) * (height - 1)
        - BigInt::one();
    let factor = BigRational::new(inner, BigInt::one() << (k - 1));
    let level = BigRational::from_integer(BigInt::from(q_binomial(n, n / 2, q)));
    Ok(BoundValue::from_rational(factor * level))
}

/// Render a rational as `num/den` (or just `num` for integers), for reports.
pub fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse back what `rational_string` produced.
pub fn rational_from_string(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => Some(BigRational::new(n.parse().ok()?, d.parse().ok()?)),
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Convenience for tests and guards; panics if the value exceeds u64.
pub fn to_u64(v: &BigUint) -> u64 {
    v.to_u64().expect("value fits in u64")
}
