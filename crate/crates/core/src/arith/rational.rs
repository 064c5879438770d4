//! Rational scalars and elementary number theory on machine-word primes:
//! parsing/printing in `p/q` form, valuations, factorization (trial
//! division plus Pollard rho under a 2^64 guard), Legendre symbols and
//! square roots mod p, and small combinatorial counts.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{CoreError, Result};

pub type Rational = num_rational::BigRational;

pub fn rat_i64(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p`, `-p`, or `p/q` with arbitrary-size integer parts.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| CoreError::Parse(format!("bad integer {num:?}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| CoreError::Parse(format!("bad integer {den:?}")))?;
    if d.is_zero() {
        return Err(CoreError::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Prints in the same form `parse_rational` accepts; integers drop the `/1`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

pub fn multinomial(parts: &[u32]) -> BigInt {
    let mut acc = BigInt::one();
    let mut seen: u64 = 0;
    for &p in parts {
        for i in 1..=p as u64 {
            seen += 1;
            acc = acc * BigInt::from(seen) / BigInt::from(i);
        }
    }
    acc
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = 10_000usize;
        let mut sieve = vec![true; limit];
        let mut out = Vec::new();
        for n in 2..limit {
            if sieve[n] {
                out.push(n as u64);
                let mut m = n * n;
                while m < limit {
                    sieve[m] = false;
                    m += n;
                }
            }
        }
        out
    })
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for any u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'wit: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'wit;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n) && n % 2 == 1);
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_u64_into(n: u64, out: &mut BTreeMap<u64, u32>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let d = pollard_rho(n);
    factor_u64_into(d, out);
    factor_u64_into(n / d, out);
}

/// Factors |n| into u64 primes. Composites whose unfactored cofactor does
/// not fit in a u64 are rejected rather than factored heuristically.
pub fn factor_magnitude(n: &BigInt) -> Result<BTreeMap<u64, u32>> {
    let mut rest: BigUint = n.magnitude().clone();
    if rest.is_zero() {
        return Err(CoreError::Invalid("factor of zero".into()));
    }
    let mut out = BTreeMap::new();
    for &p in small_primes() {
        if rest.is_one() {
            break;
        }
        let pb = BigUint::from(p);
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            *out.entry(p).or_insert(0) += 1;
        }
    }
    if !rest.is_one() {
        let r = rest
            .to_u64()
            .ok_or_else(|| CoreError::FactorGuard(rest.to_string()))?;
        factor_u64_into(r, &mut out);
    }
    Ok(out)
}

/// Signed prime exponents of a nonzero rational.
pub fn rational_exponents(q: &Rational) -> Result<BTreeMap<u64, i64>> {
    if q.is_zero() {
        return Err(CoreError::Invalid("exponents of zero".into()));
    }
    let mut out: BTreeMap<u64, i64> = BTreeMap::new();
    for (p, e) in factor_magnitude(q.numer())? {
        *out.entry(p).or_insert(0) += e as i64;
    }
    for (p, e) in factor_magnitude(q.denom())? {
        *out.entry(p).or_insert(0) -= e as i64;
    }
    out.retain(|_, e| *e != 0);
    Ok(out)
}

pub fn valuation_int(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        n = q;
    }
}

pub fn valuation_rat(q: &Rational, p: u64) -> i64 {
    valuation_int(q.numer(), p) as i64 - valuation_int(q.denom(), p) as i64
}

pub fn is_squarefree(n: i64) -> Result<bool> {
    if n == 0 {
        return Ok(false);
    }
    let f = factor_magnitude(&BigInt::from(n))?;
    Ok(f.values().all(|&e| e < 2))
}

/// Writes |n| = s^2 * k with k squarefree; returns (s, k).
pub fn squarefree_part(n: &BigInt) -> Result<(BigInt, u64)> {
    let f = factor_magnitude(n)?;
    let mut s = BigInt::one();
    let mut k: u64 = 1;
    for (p, e) in f {
        for _ in 0..e / 2 {
            s *= BigInt::from(p);
        }
        if e % 2 == 1 {
            k = k
                .checked_mul(p)
                .ok_or_else(|| CoreError::FactorGuard("squarefree part overflow".into()))?;
        }
    }
    Ok((s, k))
}

/// Legendre symbol (a|p) for odd prime p.
pub fn legendre(a: i64, p: u64) -> i64 {
    debug_assert!(p > 2 && is_prime_u64(p));
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let e = pow_mod(a, (p - 1) / 2, p);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// Tonelli-Shanks square root of a mod odd prime p; requires (a|p) = 1.
pub fn sqrt_mod_p(a: u64, p: u64) -> u64 {
    let a = a % p;
    debug_assert!(legendre(a as i64, p) == 1);
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while legendre(z as i64, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

pub fn bigint_sign(n: &BigInt) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3", "-3", "5/7", "-22/7", "0", "100000000000000000001/3"] {
            let q = parse_rational(s).unwrap();
            assert_eq!(format_rational(&q), s);
        }
        assert_eq!(format_rational(&parse_rational("4/6").unwrap()), "2/3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn factorization_small_and_rho() {
        let f = factor_magnitude(&BigInt::from(2u64 * 2 * 3 * 97)).unwrap();
        assert_eq!(f, BTreeMap::from([(2, 2), (3, 1), (97, 1)]));
        // two primes beyond the trial-division sieve
        let n = BigInt::from(1_000_003u64) * BigInt::from(999_983u64);
        let f = factor_magnitude(&n).unwrap();
        assert_eq!(f, BTreeMap::from([(999_983, 1), (1_000_003, 1)]));
    }

    #[test]
    fn rational_exponents_signed() {
        let q = parse_rational("12/35").unwrap();
        let e = rational_exponents(&q).unwrap();
        assert_eq!(e, BTreeMap::from([(2, 2), (3, 1), (5, -1), (7, -1)]));
    }

    #[test]
    fn primality_edge_cases() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(999_983));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(is_prime_u64(18_446_744_073_709_551_557)); // largest u64 prime
    }

    #[test]
    fn sqrt_mod_p_all_residues() {
        for p in [3u64, 5, 7, 13, 17, 41, 997] {
            for a in 1..p {
                if legendre(a as i64, p) == 1 {
                    let r = sqrt_mod_p(a, p);
                    assert_eq!(mul_mod(r, r, p), a, "p={p} a={a}");
                }
            }
        }
    }

    #[test]
    fn squarefree_decomposition() {
        let (s, k) = squarefree_part(&BigInt::from(720)).unwrap(); // 720 = 12^2 * 5
        assert_eq!((s, k), (BigInt::from(12), 5));
        assert!(is_squarefree(10).unwrap());
        assert!(!is_squarefree(12).unwrap());
    }

    #[test]
    fn binomial_and_multinomial() {
        assert_eq!(binomial(10, 3), BigInt::from(120));
        assert_eq!(binomial(3, 5), BigInt::zero());
        // 4!/(2!1!1!) = 12
        assert_eq!(multinomial(&[2, 1, 1]), BigInt::from(12));
        assert_eq!(multinomial(&[0, 0]), BigInt::one());
    }

    #[test]
    fn valuations() {
        assert_eq!(valuation_rat(&parse_rational("12/5").unwrap(), 2), 2);
        assert_eq!(valuation_rat(&parse_rational("12/5").unwrap(), 5), -1);
        assert_eq!(valuation_rat(&parse_rational("12/5").unwrap(), 7), 0);
    }
}
