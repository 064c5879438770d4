//! Fixed-point reals with a tracked absolute error bound. A value is
//! `m * 2^-prec` together with `err_ulps`, an upper bound on the distance
//! to the represented real in units of `2^-prec`. Addition is exact (the
//! error of a sum is the sum of the errors); multiplication and the
//! transcendental maps carry explicit rounding budgets. Everything here is
//! deterministic for fixed inputs and precision, so callers can re-derive
//! values at higher precision when a comparison comes out too close.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::rational::Rational;
use crate::error::{CoreError, Result};

pub const DEFAULT_PREC: u32 = 256;
pub const MAX_PREC: u32 = 4096;

#[derive(Debug, Clone)]
pub struct HpReal {
    m: BigInt,
    prec: u32,
    err_ulps: f64,
}

impl HpReal {
    pub fn exact_zero(prec: u32) -> Self {
        HpReal {
            m: BigInt::zero(),
            prec,
            err_ulps: 0.0,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.err_ulps == 0.0
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let scaled = q.numer() << prec;
        let (quot, rem) = num_integer::Integer::div_mod_floor(&scaled, q.denom());
        HpReal {
            m: quot,
            prec,
            err_ulps: if rem.is_zero() { 0.0 } else { 1.0 },
        }
    }

    /// Exact dyadic import of an f64 plus a caller-supplied absolute error.
    pub fn from_f64(x: f64, err_abs: f64, prec: u32) -> Result<Self> {
        if !x.is_finite() || !err_abs.is_finite() || err_abs < 0.0 {
            return Err(CoreError::Invalid("non-finite float import".into()));
        }
        let q = Rational::from_float(x)
            .ok_or_else(|| CoreError::Invalid("non-finite float import".into()))?;
        let mut v = HpReal::from_rational(&q, prec);
        v.err_ulps += err_abs * pow2(prec as i64);
        Ok(v)
    }

    /// Exact rational equal to the stored mantissa (ignores the error band).
    pub fn center(&self) -> Rational {
        Rational::new(self.m.clone(), BigInt::one() << self.prec)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.m.bits();
        if bits <= 900 {
            return self.m.to_f64().unwrap_or(0.0) * pow2(-(self.prec as i64));
        }
        let shift = bits - 64;
        let top = (&self.m >> shift).to_f64().unwrap_or(0.0);
        top * pow2(shift as i64 - self.prec as i64)
    }

    pub fn err_abs(&self) -> f64 {
        let e = self.err_ulps * pow2(-(self.prec as i64));
        if e == 0.0 && self.err_ulps > 0.0 {
            f64::MIN_POSITIVE
        } else {
            e
        }
    }

    fn align(mut a: HpReal, mut b: HpReal) -> (HpReal, HpReal) {
        match a.prec.cmp(&b.prec) {
            Ordering::Less => a = a.raise_prec(b.prec),
            Ordering::Greater => b = b.raise_prec(a.prec),
            Ordering::Equal => {}
        }
        (a, b)
    }

    fn raise_prec(&self, prec: u32) -> HpReal {
        debug_assert!(prec >= self.prec);
        let k = prec - self.prec;
        HpReal {
            m: &self.m << k,
            prec,
            err_ulps: self.err_ulps * pow2(k as i64),
        }
    }

    /// Rounds to a (usually lower) precision; adds at most one ulp.
    pub fn round_prec(&self, prec: u32) -> HpReal {
        if prec >= self.prec {
            return self.raise_prec(prec);
        }
        let k = self.prec - prec;
        HpReal {
            m: &self.m >> k,
            prec,
            err_ulps: self.err_ulps * pow2(-(k as i64)) + 1.0,
        }
    }

    pub fn add(&self, other: &HpReal) -> HpReal {
        let (a, b) = HpReal::align(self.clone(), other.clone());
        HpReal {
            m: a.m + b.m,
            prec: a.prec,
            err_ulps: a.err_ulps + b.err_ulps,
        }
    }

    pub fn neg(&self) -> HpReal {
        HpReal {
            m: -&self.m,
            prec: self.prec,
            err_ulps: self.err_ulps,
        }
    }

    pub fn sub(&self, other: &HpReal) -> HpReal {
        self.add(&other.neg())
    }

    pub fn abs(&self) -> HpReal {
        HpReal {
            m: self.m.abs(),
            prec: self.prec,
            err_ulps: self.err_ulps,
        }
    }

    pub fn mul_rational(&self, q: &Rational) -> HpReal {
        let scaled = &self.m * q.numer();
        let (quot, rem) = num_integer::Integer::div_mod_floor(&scaled, q.denom());
        let qmag = q.to_f64().unwrap_or(f64::MAX).abs();
        let round = if rem.is_zero() { 0.0 } else { 1.0 };
        HpReal {
            m: quot,
            prec: self.prec,
            err_ulps: self.err_ulps * qmag + round,
        }
    }

    pub fn mul(&self, other: &HpReal) -> HpReal {
        let (a, b) = HpReal::align(self.clone(), other.clone());
        let prod = &a.m * &b.m;
        let m = prod >> a.prec;
        let mag_a = pow2(a.m.bits() as i64 - a.prec as i64);
        let mag_b = pow2(b.m.bits() as i64 - b.prec as i64);
        let err = a.err_ulps * mag_b
            + b.err_ulps * mag_a
            + a.err_ulps * b.err_ulps * pow2(-(a.prec as i64))
            + 1.0;
        HpReal {
            m,
            prec: a.prec,
            err_ulps: err,
        }
    }

    /// Natural log of a strictly positive interval; widens the error band by
    /// the derivative bound at the interval's lower edge.
    pub fn ln(&self, out_prec: u32) -> Result<HpReal> {
        let lower_bits = self.m.bits() as f64 - 1.0;
        if self.m.sign() != num_bigint::Sign::Plus
            || self.err_ulps >= pow2_f(lower_bits - 1.0)
        {
            return Err(CoreError::Invalid(
                "ln of an interval not bounded away from zero".into(),
            ));
        }
        let mut out = ln_rational(&self.center(), out_prec)?;
        if self.err_ulps > 0.0 {
            // |d ln| <= err / (|x| - err) <= 2 err / |x|
            let extra = pow2_f(
                self.err_ulps.log2() - lower_bits + self.prec as f64 + out_prec as f64
                    - self.prec as f64
                    + 1.0,
            );
            out.err_ulps += extra;
        }
        Ok(out)
    }

    /// Interval comparison: `None` when the error bands overlap.
    pub fn definite_cmp(&self, other: &HpReal) -> Option<Ordering> {
        let d = self.sub(other);
        if d.m.is_zero() && d.err_ulps == 0.0 {
            return Some(Ordering::Equal);
        }
        if !d.err_ulps.is_finite() {
            return None;
        }
        // pad for the rounding slop of f64 error accumulation
        let padded = (d.err_ulps * (1.0 + 1e-9)).ceil();
        if !padded.is_finite() {
            return None;
        }
        let bound: BigInt = num_traits::FromPrimitive::from_f64(padded)?;
        if d.m.abs() > bound {
            Some(if d.m.is_positive() {
                Ordering::Greater
            } else {
                Ordering::Less
            })
        } else {
            None
        }
    }

    pub fn definite_sign(&self) -> Option<i8> {
        static ZERO: OnceLock<HpReal> = OnceLock::new();
        let z = ZERO.get_or_init(|| HpReal::exact_zero(8));
        self.definite_cmp(z).map(|o| match o {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        })
    }
}

fn pow2(e: i64) -> f64 {
    pow2_f(e as f64)
}

fn pow2_f(e: f64) -> f64 {
    if e > 1030.0 {
        f64::INFINITY
    } else if e < -1070.0 {
        0.0
    } else {
        e.exp2()
    }
}

/// atanh(p/q) for 0 <= p/q <= 1/2, as a mantissa at `prec` bits plus an
/// error bound in ulps. Plain power series; the ratio bound keeps the term
/// count near prec/3.
fn atanh_ratio(p: &BigInt, q: &BigInt, prec: u32) -> (BigInt, f64) {
    debug_assert!(!p.is_negative() && (p * 2u8) <= *q);
    let z = (p << prec) / q;
    let zz = (&z * &z) >> prec;
    let mut acc = BigInt::zero();
    let mut pw = z;
    let mut j: u64 = 0;
    let mut terms: u64 = 0;
    loop {
        let term = &pw / BigInt::from(2 * j + 1);
        if term.is_zero() {
            break;
        }
        acc += term;
        pw = (&pw * &zz) >> prec;
        j += 1;
        terms += 1;
        if pw.is_zero() {
            break;
        }
    }
    // truncation of z and zz, per-term floor divisions, and the series tail
    (acc, 3.0 * terms as f64 + 8.0)
}

fn ln2_mantissa(prec: u32) -> (BigInt, f64) {
    static CACHE: OnceLock<Mutex<HashMap<u32, BigInt>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    let m = guard
        .entry(prec)
        .or_insert_with(|| {
            let (a, _) = atanh_ratio(&BigInt::one(), &BigInt::from(3), prec);
            a << 1
        })
        .clone();
    (m, 2.0 * (3.0 * (prec as f64 / 3.0) + 8.0))
}

/// ln of a positive rational at `prec` bits with a small-ulp error bound.
pub fn ln_rational(x: &Rational, prec: u32) -> Result<HpReal> {
    if !x.is_positive() {
        return Err(CoreError::Invalid("ln of a non-positive rational".into()));
    }
    let w = prec + 32;
    let num = x.numer().clone();
    let den = x.denom().clone();
    // choose k with den*2^k <= num < den*2^(k+1)
    let mut k = num.bits() as i64 - den.bits() as i64;
    let shifted = |k: i64| -> (BigInt, BigInt) {
        if k >= 0 {
            (num.clone(), &den << k as u64)
        } else {
            (&num << (-k) as u64, den.clone())
        }
    };
    let (mut a, mut b) = shifted(k);
    if a < b {
        k -= 1;
        let s = shifted(k);
        a = s.0;
        b = s.1;
    }
    debug_assert!(a >= b && a < (&b << 1));
    let (series, series_err) = if a == b {
        (BigInt::zero(), 0.0)
    } else {
        let p = &a - &b;
        let q = a + b;
        let (acc, e) = atanh_ratio(&p, &q, w);
        (acc << 1, 2.0 * e)
    };
    let (ln2, ln2_err) = ln2_mantissa(w);
    let total = series + BigInt::from(k) * ln2;
    let m = total >> 32;
    let err = (series_err + k.unsigned_abs() as f64 * ln2_err) * pow2(-32) + 1.0;
    Ok(HpReal {
        m,
        prec,
        err_ulps: err,
    })
}

/// sqrt of a nonnegative u64 at `prec` bits, error at most one ulp.
pub fn sqrt_u64(d: u64, prec: u32) -> HpReal {
    let scaled = BigInt::from(d) << (2 * prec);
    let m = scaled.sqrt();
    let exact = (&m * &m) == scaled;
    HpReal {
        m,
        prec,
        err_ulps: if exact { 0.0 } else { 1.0 },
    }
}

/// sqrt of a nonnegative rational at `prec` bits, error at most two ulps.
pub fn sqrt_rational(q: &Rational, prec: u32) -> Result<HpReal> {
    if q.is_negative() {
        return Err(CoreError::Invalid("sqrt of a negative rational".into()));
    }
    // sqrt(n/d) = sqrt(n*d)/d keeps the integer square root in one place
    let scaled = (q.numer() * q.denom()) << (2 * prec);
    let root = scaled.sqrt();
    let exact_root = (&root * &root) == scaled;
    let (m, rem) = num_integer::Integer::div_rem(&root, q.denom());
    let exact = exact_root && rem.is_zero();
    Ok(HpReal {
        m,
        prec,
        err_ulps: if exact { 0.0 } else { 2.0 },
    })
}

/// ln |a + b sqrt(d)| for b != 0 and squarefree d > 0, escalating internal
/// precision past any cancellation between the rational and surd parts.
pub fn ln_quad_abs(a: &Rational, b: &Rational, d: i64, prec: u32) -> Result<HpReal> {
    if b.is_zero() || d <= 1 {
        return Err(CoreError::Invalid(
            "ln_quad_abs wants an irrational real-quadratic input".into(),
        ));
    }
    let mut w = prec + 64;
    loop {
        let s = sqrt_u64(d as u64, w);
        let t = HpReal::from_rational(a, w).add(&s.mul_rational(b));
        let wide_enough = t.m.bits() as f64 - 1.0 > t.err_ulps.log2() + 2.0 && !t.m.is_zero();
        if wide_enough {
            return t.abs().ln(prec);
        }
        if w >= (1 << 22) {
            return Err(CoreError::Undecidable {
                bits: w,
                error_bound: t.err_abs(),
            });
        }
        w *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{parse_rational, rat_i64};

    /// Parses a decimal literal into an exact rational (test oracle input).
    fn dec(s: &str) -> Rational {
        let (int, frac) = s.split_once('.').unwrap();
        let digits: BigInt = format!("{int}{frac}").parse().unwrap();
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        Rational::new(digits, den)
    }

    fn assert_close(v: &HpReal, oracle: &Rational, tol_log2: i64) {
        let diff = (v.center() - oracle).abs();
        let tol = Rational::new(BigInt::one(), BigInt::one() << (-tol_log2) as u64);
        assert!(
            diff < tol,
            "|{} - oracle| = {} not below 2^{}",
            v.to_f64(),
            diff.to_f64().unwrap(),
            tol_log2
        );
    }

    // mpmath 90-digit references
    const LN2: &str = "0.693147180559945309417232121458176568075500134360255254120680009493393621969694715605863327";
    const LN_6_5: &str = "0.182321556793954626211718025154514633197389337914486983942726451656708927480645917849345204";
    const SQRT2: &str = "1.41421356237309504880168872420969807856967187537694807317667973799073247846210703885038753";
    const LN_1P_SQRT2: &str = "0.881373587019543025232609324979792309028160328261635410753295608653377184222026087833706892";

    #[test]
    fn ln_matches_reference_values() {
        let v = ln_rational(&rat_i64(2), 256).unwrap();
        assert_close(&v, &dec(LN2), -250);
        assert!(v.err_ulps < 16.0);
        let v = ln_rational(&parse_rational("6/5").unwrap(), 256).unwrap();
        assert_close(&v, &dec(LN_6_5), -250);
        // large power: ln(2^100) = 100 ln 2
        let v = ln_rational(&Rational::from_integer(BigInt::one() << 100), 256).unwrap();
        let expect = dec(LN2) * rat_i64(100);
        assert_close(&v, &expect, -240);
        // reciprocal symmetry
        let v = ln_rational(&parse_rational("5/6").unwrap(), 256).unwrap();
        assert_close(&v, &(-dec(LN_6_5)), -250);
    }

    #[test]
    fn sqrt_and_quadratic_log() {
        let v = sqrt_u64(2, 256);
        assert_close(&v, &dec(SQRT2), -250);
        let v = ln_quad_abs(&rat_i64(1), &rat_i64(1), 2, 256).unwrap();
        assert_close(&v, &dec(LN_1P_SQRT2), -248);
        // 1 - sqrt2 is negative; |1 - sqrt2| = sqrt2 - 1 = 1/(1+sqrt2)
        let v = ln_quad_abs(&rat_i64(1), &rat_i64(-1), 2, 256).unwrap();
        assert_close(&v, &(-dec(LN_1P_SQRT2)), -248);
    }

    #[test]
    fn sqrt_rational_values() {
        let v = sqrt_rational(&rat_i64(2), 256).unwrap();
        assert_close(&v, &dec(SQRT2), -250);
        // perfect square of a rational comes out exact
        let v = sqrt_rational(&parse_rational("9/4").unwrap(), 128).unwrap();
        assert!(v.is_exact());
        assert_eq!(v.center(), parse_rational("3/2").unwrap());
        // sqrt(1/2) = sqrt2 / 2
        let v = sqrt_rational(&parse_rational("1/2").unwrap(), 256).unwrap();
        assert_close(&v, &(dec(SQRT2) / rat_i64(2)), -250);
        assert!(sqrt_rational(&rat_i64(-1), 64).is_err());
    }

    #[test]
    fn cancellation_escalates_and_still_lands() {
        // 665857/470832 is a continued-fraction convergent of sqrt2, so
        // a - b sqrt2 is around 1e-12 and the naive subtraction cancels.
        let a = rat_i64(665_857);
        let b = rat_i64(-470_832);
        let v = ln_quad_abs(&a, &b, 2, 128).unwrap();
        // |665857 - 470832 sqrt2| = 1/(665857 + 470832 sqrt2)
        let w = ln_quad_abs(&a, &rat_i64(470_832), 2, 128).unwrap();
        let sum = v.add(&w);
        assert!(sum.definite_sign().is_none() || sum.to_f64().abs() < 1e-30);
        assert!(v.to_f64() < -13.0 && v.to_f64() > -15.0);
    }

    #[test]
    fn arithmetic_error_discipline() {
        let a = ln_rational(&rat_i64(3), 128).unwrap();
        let b = ln_rational(&rat_i64(5), 128).unwrap();
        let sum = a.add(&b);
        assert_eq!(sum.err_ulps, a.err_ulps + b.err_ulps);
        let fifteen = ln_rational(&rat_i64(15), 128).unwrap();
        assert_eq!(sum.definite_cmp(&fifteen), None); // genuinely equal values
        let sixteen = ln_rational(&rat_i64(16), 128).unwrap();
        assert_eq!(sum.definite_cmp(&sixteen), Some(Ordering::Less));
        // exact dyadic arithmetic stays exact
        let x = HpReal::from_rational(&parse_rational("3/8").unwrap(), 64);
        assert!(x.is_exact());
        assert!(x.add(&x).is_exact());
    }

    #[test]
    fn interval_comparison_respects_error_bands() {
        let mut x = HpReal::from_rational(&rat_i64(1), 64);
        x.err_ulps = 4.0;
        let y = HpReal::from_rational(&rat_i64(1), 64);
        assert_eq!(x.definite_cmp(&y), None);
        let z = HpReal::from_rational(&rat_i64(2), 64);
        assert_eq!(x.definite_cmp(&z), Some(Ordering::Less));
        assert_eq!(z.definite_sign(), Some(1));
    }

    #[test]
    fn float_import_is_exact_dyadic() {
        let v = HpReal::from_f64(0.375, 0.0, 64).unwrap();
        assert!(v.is_exact());
        assert_eq!(v.center(), parse_rational("3/8").unwrap());
        assert!(HpReal::from_f64(f64::NAN, 0.0, 64).is_err());
    }
}
