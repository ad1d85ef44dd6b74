//! Integer factorization support for primitivity certification.
//!
//! Certifying that an element generates the multiplicative group of
//! `F_{q^M}` needs the distinct prime divisors of `q^M - 1`. Trial division
//! handles small factors; Pollard's rho (Brent variant) picks up the rest.
//! Orders at or above `2^64` are refused rather than certified
//! probabilistically.

use crate::{Error, Result};

const TRIAL_DIVISION_BOUND: u64 = 1_000_000;

fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    let mut acc = 1u64 % n;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    // Brent's cycle detection; n must be odd composite and > 3.
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut count = 0u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
            count += 1;
            if count > 1 << 24 {
                break;
            }
        }
        if d != n && d != 1 {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Distinct prime divisors of `n`, ascending.
pub fn distinct_prime_factors(n: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut rest = n;
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_BOUND && p.saturating_mul(p) <= rest {
        if rest % p == 0 {
            primes.push(p);
            while rest % p == 0 {
                rest /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        let mut large = Vec::new();
        factor_into(rest, &mut large);
        large.sort_unstable();
        large.dedup();
        primes.extend(large);
    }
    primes.sort_unstable();
    primes.dedup();
    primes
}

/// Distinct prime divisors of the multiplicative group order `q^M - 1`.
///
/// Refuses orders of 64 bits or more instead of falling back to a
/// probabilistic answer.
pub fn factor_group_order(q: u64, m: usize) -> Result<Vec<u64>> {
    let order = group_order(q, m)?;
    Ok(distinct_prime_factors(order))
}

/// `q^M - 1` as a `u64`, or an error when it does not fit.
pub fn group_order(q: u64, m: usize) -> Result<u64> {
    let mut acc: u128 = 1;
    for _ in 0..m {
        acc = acc.checked_mul(q as u128).ok_or(Error::FactorizationInfeasible { q, m })?;
        if acc > u64::MAX as u128 + 1 {
            return Err(Error::FactorizationInfeasible { q, m });
        }
    }
    Ok((acc - 1) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_small_and_large() {
        assert!(is_prime(2));
        assert!(is_prime(3));
        assert!(is_prime(31));
        assert!(is_prime(127));
        assert!(is_prime(2047 / 23)); // 89
        assert!(!is_prime(1));
        assert!(!is_prime(2047)); // 23 * 89
        assert!(is_prime(18_446_744_073_709_551_557)); // largest u64 prime
    }

    #[test]
    fn factors_of_table_orders() {
        // 2^11 - 1 = 23 * 89
        assert_eq!(distinct_prime_factors(2047), vec![23, 89]);
        // 2^7 - 1 and 2^5 - 1 are prime
        assert_eq!(distinct_prime_factors(127), vec![127]);
        assert_eq!(distinct_prime_factors(31), vec![31]);
        // 2^32 - 1 = 3 * 5 * 17 * 257 * 65537
        assert_eq!(
            distinct_prime_factors((1u64 << 32) - 1),
            vec![3, 5, 17, 257, 65537]
        );
    }

    #[test]
    fn group_order_limits() {
        assert_eq!(group_order(2, 5).unwrap(), 31);
        assert_eq!(group_order(2, 64).unwrap(), u64::MAX);
        assert!(group_order(2, 65).is_err());
        assert!(group_order(3, 41).is_err());
    }

    #[test]
    fn pollard_rho_on_semiprimes() {
        let n = 1_000_003u64 * 1_000_033u64;
        let mut fs = distinct_prime_factors(n);
        fs.sort_unstable();
        assert_eq!(fs, vec![1_000_003, 1_000_033]);
    }
}
