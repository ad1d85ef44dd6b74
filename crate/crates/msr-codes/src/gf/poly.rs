//! Dense univariate polynomials over a prime field `F_q`.
//!
//! Coefficient vectors are stored low-degree-first. These helpers back the
//! extension-field arithmetic in the parent module: reduction modulo the
//! field modulus, inversion through the extended Euclidean algorithm, and
//! irreducibility testing for modulus validation and search.

/// Addition in `F_q`.
#[inline]
pub fn fq_add(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

/// Subtraction in `F_q`.
#[inline]
pub fn fq_sub(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

/// Multiplication in `F_q`.
#[inline]
pub fn fq_mul(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

/// Inverse in `F_q` via Fermat. Panics on zero.
pub fn fq_inv(a: u64, q: u64) -> u64 {
    assert!(a != 0, "inverse of zero in F_q");
    // a^(q-2) mod q
    let mut base = a % q;
    let mut exp = q - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = fq_mul(acc, base, q);
        }
        base = fq_mul(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Drops trailing zero coefficients.
pub fn trim(mut p: Vec<u64>) -> Vec<u64> {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

/// Degree of `p`, or `None` for the zero polynomial.
pub fn degree(p: &[u64]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

/// Schoolbook product of two polynomials over `F_q`.
pub fn mul(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0 {
                out[i + j] = fq_add(out[i + j], fq_mul(ai, bj, q), q);
            }
        }
    }
    trim(out)
}

/// Remainder of `a` modulo the monic polynomial `f`.
pub fn rem(a: &[u64], f: &[u64], q: u64) -> Vec<u64> {
    let df = degree(f).expect("modulus must be non-zero");
    assert_eq!(f[df], 1, "modulus must be monic");
    let mut r: Vec<u64> = a.to_vec();
    loop {
        let dr = match degree(&r) {
            Some(d) if d >= df => d,
            _ => break,
        };
        let lead = r[dr];
        let shift = dr - df;
        for (i, &fi) in f.iter().enumerate().take(df + 1) {
            r[shift + i] = fq_sub(r[shift + i], fq_mul(lead, fi, q), q);
        }
    }
    r.truncate(df);
    r.resize(df, 0);
    r
}

/// Product of `a` and `b` reduced modulo `f`.
pub fn mul_mod(a: &[u64], b: &[u64], f: &[u64], q: u64) -> Vec<u64> {
    rem(&mul(a, b, q), f, q)
}

/// `base^exp` reduced modulo `f`.
pub fn pow_mod(base: &[u64], mut exp: u128, f: &[u64], q: u64) -> Vec<u64> {
    let df = degree(f).expect("modulus must be non-zero");
    let mut acc = vec![0u64; df];
    if df > 0 {
        acc[0] = 1;
    }
    let mut b = rem(base, f, q);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(&acc, &b, f, q);
        }
        b = mul_mod(&b, &b, f, q);
        exp >>= 1;
    }
    acc
}

/// Monic greatest common divisor.
pub fn gcd(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = rem_general(&a, &b, q);
        a = b;
        b = r;
    }
    make_monic(a, q)
}

fn make_monic(p: Vec<u64>, q: u64) -> Vec<u64> {
    match degree(&p) {
        None => p,
        Some(d) => {
            let inv = fq_inv(p[d], q);
            p.into_iter().map(|c| fq_mul(c, inv, q)).collect()
        }
    }
}

/// Remainder where the divisor need not be monic.
fn rem_general(a: &[u64], f: &[u64], q: u64) -> Vec<u64> {
    let df = match degree(f) {
        Some(d) => d,
        None => panic!("division by zero polynomial"),
    };
    let lead_inv = fq_inv(f[df], q);
    let mut r = a.to_vec();
    loop {
        let dr = match degree(&r) {
            Some(d) if d >= df => d,
            _ => break,
        };
        let factor = fq_mul(r[dr], lead_inv, q);
        let shift = dr - df;
        for (i, &fi) in f.iter().enumerate().take(df + 1) {
            r[shift + i] = fq_sub(r[shift + i], fq_mul(factor, fi, q), q);
        }
    }
    trim(r)
}

/// Inverse of `a` modulo the monic irreducible `f`, or `None` when
/// `gcd(a, f) != 1` (in particular for `a = 0`).
pub fn inv_mod(a: &[u64], f: &[u64], q: u64) -> Option<Vec<u64>> {
    // Extended Euclid: maintain r0 = t0*f + s0*a (s coefficients tracked only).
    let df = degree(f).expect("modulus must be non-zero");
    let mut r0 = trim(f.to_vec());
    let mut r1 = trim(rem(a, f, q));
    let mut s0: Vec<u64> = Vec::new();
    let mut s1: Vec<u64> = vec![1];
    while !r1.is_empty() {
        let (quot, r) = div_rem(&r0, &r1, q);
        let s = sub(&s0, &mul(&quot, &s1, q), q);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    if degree(&r0) != Some(0) {
        return None; // gcd not a unit
    }
    let scale = fq_inv(r0[0], q);
    let mut out: Vec<u64> = s0.into_iter().map(|c| fq_mul(c, scale, q)).collect();
    out = rem(&out, f, q);
    out.resize(df, 0);
    Some(out)
}

fn sub(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for i in 0..n {
        let ai = a.get(i).copied().unwrap_or(0);
        let bi = b.get(i).copied().unwrap_or(0);
        out[i] = fq_sub(ai, bi, q);
    }
    trim(out)
}

fn div_rem(a: &[u64], f: &[u64], q: u64) -> (Vec<u64>, Vec<u64>) {
    let df = degree(f).expect("division by zero polynomial");
    let lead_inv = fq_inv(f[df], q);
    let mut r = a.to_vec();
    let mut quot = vec![0u64; a.len().saturating_sub(df) + 1];
    loop {
        let dr = match degree(&r) {
            Some(d) if d >= df => d,
            _ => break,
        };
        let factor = fq_mul(r[dr], lead_inv, q);
        let shift = dr - df;
        quot[shift] = fq_add(quot[shift], factor, q);
        for (i, &fi) in f.iter().enumerate().take(df + 1) {
            r[shift + i] = fq_sub(r[shift + i], fq_mul(factor, fi, q), q);
        }
    }
    (trim(quot), trim(r))
}

/// Ben-Or irreducibility test for a monic polynomial of degree >= 1 over `F_q`.
///
/// `f` is irreducible iff `gcd(X^(q^i) - X, f) = 1` for `i = 1..=deg/2`.
pub fn is_irreducible(f: &[u64], q: u64) -> bool {
    let d = match degree(f) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if f[d] != 1 {
        return false;
    }
    if f[0] == 0 {
        // divisible by X
        return d == 1;
    }
    let x = vec![0u64, 1];
    let mut h = rem(&x, f, q);
    for _ in 1..=d / 2 {
        h = pow_mod(&h, q as u128, f, q);
        // gcd(h - X, f)
        let diff = sub(&h, &x, q);
        let g = gcd(&diff, f, q);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// First irreducible monic polynomial of degree `m` over `F_q`, scanning
/// lower-degree coefficients with the constant term varying fastest.
pub fn find_irreducible(q: u64, m: usize) -> Vec<u64> {
    assert!(m >= 1);
    let mut coeffs = vec![0u64; m + 1];
    coeffs[m] = 1;
    loop {
        if is_irreducible(&coeffs, q) {
            return coeffs;
        }
        // odometer increment over the m low-order coefficients
        let mut i = 0;
        loop {
            assert!(i < m, "no irreducible polynomial found (unreachable)");
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}
