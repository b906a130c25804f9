//! Exact counting helpers: binomial coefficients and surjection counts.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

/// Binomial coefficient `C(n, k)` as an exact big integer, zero when `k > n`.
pub fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// `C(n, k)` as a `usize`, for sizing enumerations. Panics on overflow,
/// which cannot happen for the desk-scale grids this crate targets.
pub fn binom_usize(n: u32, k: u32) -> usize {
    binom(n, k)
        .to_usize()
        .expect("binomial coefficient exceeds usize")
}

/// Number of surjections from a `k`-element domain onto an `s`-element
/// codomain, by inclusion-exclusion over missed codomain elements.
pub fn surjections(k: u32, s: u32) -> BigInt {
    if s > k {
        return BigInt::zero();
    }
    let mut total = BigInt::zero();
    for i in 0..=s {
        let term = binom(s, i) * BigInt::from(s - i).pow(k);
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binom(5, 2), BigInt::from(10));
        assert_eq!(binom(4, 0), BigInt::from(1));
        assert_eq!(binom(0, 0), BigInt::from(1));
        assert_eq!(binom(3, 5), BigInt::from(0));
        assert_eq!(binom(20, 10), BigInt::from(184756));
        assert_eq!(binom_usize(6, 3), 20);
    }

    #[test]
    fn surjection_values() {
        assert_eq!(surjections(0, 0), BigInt::from(1));
        assert_eq!(surjections(3, 0), BigInt::from(0));
        assert_eq!(surjections(3, 2), BigInt::from(6));
        assert_eq!(surjections(4, 4), BigInt::from(24));
        assert_eq!(surjections(5, 3), BigInt::from(150));
        assert_eq!(surjections(2, 3), BigInt::from(0));
    }

    #[test]
    fn surjections_match_direct_enumeration() {
        // Count maps [k] -> [s] hitting every codomain element, brute force.
        for k in 0..=6u32 {
            for s in 0..=6u32 {
                let mut count = 0u64;
                let total = (s as u64).pow(k);
                for code in 0..total.max(1) {
                    if s == 0 {
                        // Only the empty map exists, and only for k = 0.
                        if k == 0 {
                            count += 1;
                        }
                        break;
                    }
                    let mut hit = vec![false; s as usize];
                    let mut c = code;
                    for _ in 0..k {
                        hit[(c % s as u64) as usize] = true;
                        c /= s as u64;
                    }
                    if hit.iter().all(|&h| h) {
                        count += 1;
                    }
                }
                assert_eq!(
                    surjections(k, s),
                    BigInt::from(count),
                    "surjections({k},{s})"
                );
            }
        }
    }
}
