//! Real quadratic surds r * sqrt(k). Multiplication is closed (radicands
//! combine and squares fall out); addition is defined only for matching
//! radicands, which is all the modified Chow form construction ever needs.

use num_traits::{Signed, ToPrimitive, Zero};

use crate::arith::height::LogHeight;
use crate::arith::rational::{
    rational_exponents, squarefree_part, valuation_rat, Rational,
};
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadraticSurd {
    r: Rational,
    k: u64,
}

impl QuadraticSurd {
    /// r * sqrt(k), normalizing k to its squarefree kernel.
    pub fn new(r: Rational, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::Invalid("surd with radicand zero".into()));
        }
        if r.is_zero() {
            return Ok(QuadraticSurd::zero());
        }
        let (g, kernel) = squarefree_part(&k.into())?;
        Ok(QuadraticSurd {
            r: r * Rational::from_integer(g),
            k: kernel,
        })
    }

    pub fn rational(r: Rational) -> Self {
        if r.is_zero() {
            QuadraticSurd::zero()
        } else {
            QuadraticSurd { r, k: 1 }
        }
    }

    pub fn zero() -> Self {
        QuadraticSurd {
            r: Rational::zero(),
            k: 1,
        }
    }

    pub fn one() -> Self {
        QuadraticSurd::rational(Rational::from_integer(1.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.k == 1
    }

    pub fn r(&self) -> &Rational {
        &self.r
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// The square of the value, always rational.
    pub fn value_sq(&self) -> Rational {
        &self.r * &self.r * Rational::from_integer(self.k.into())
    }

    pub fn mul(&self, other: &QuadraticSurd) -> QuadraticSurd {
        if self.is_zero() || other.is_zero() {
            return QuadraticSurd::zero();
        }
        let g = num_integer::gcd(self.k, other.k);
        let ka = self.k / g;
        let kb = other.k / g;
        let k = ka
            .checked_mul(kb)
            .expect("surd radicand overflow; inputs exceed the supported range");
        QuadraticSurd {
            r: &self.r * &other.r * Rational::from_integer(g.into()),
            k,
        }
    }

    pub fn add(&self, other: &QuadraticSurd) -> Result<QuadraticSurd> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.k != other.k {
            return Err(CoreError::Invalid(format!(
                "cannot add surds over sqrt({}) and sqrt({})",
                self.k, other.k
            )));
        }
        let r = &self.r + &other.r;
        Ok(if r.is_zero() {
            QuadraticSurd::zero()
        } else {
            QuadraticSurd { r, k: self.k }
        })
    }

    pub fn neg(&self) -> QuadraticSurd {
        QuadraticSurd {
            r: -&self.r,
            k: if self.r.is_zero() { 1 } else { self.k },
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.r.to_f64().unwrap_or(f64::NAN) * (self.k as f64).sqrt()
    }

    /// ln |r sqrt(k)| = ln|r| + ln(k)/2, exact through prime exponents.
    pub fn log_abs(&self) -> Result<LogHeight> {
        if self.is_zero() {
            return Err(CoreError::Invalid("log of a zero surd".into()));
        }
        let half = Rational::new(1.into(), 2.into());
        Ok(LogHeight::ln_of_rational(&self.r.abs())?.add(
            &LogHeight::ln_of_rational(&Rational::from_integer(self.k.into()))?.scale(&half),
        ))
    }

    /// v_p of the value inside the p-adic closure: v_p(r) + v_p(k)/2.
    pub fn valuation(&self, p: u64) -> Rational {
        let vr = valuation_rat(&self.r, p);
        let vk = if self.k % p == 0 { 1 } else { 0 };
        Rational::from_integer(vr.into()) + Rational::new(vk.into(), 2.into())
    }

    /// Primes where the p-adic absolute value can differ from 1.
    pub fn support_primes(&self) -> Result<Vec<u64>> {
        let mut ps: Vec<u64> = rational_exponents(&self.r)?.into_keys().collect();
        for (p, _) in rational_exponents(&Rational::from_integer(self.k.into()))? {
            if !ps.contains(&p) {
                ps.push(p);
            }
        }
        ps.sort_unstable();
        Ok(ps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{rat_frac, rat_i64};

    #[test]
    fn construction_normalizes_square_parts() {
        let s = QuadraticSurd::new(rat_i64(1), 8).unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.r(), &rat_i64(2));
        let t = QuadraticSurd::new(rat_i64(3), 36).unwrap();
        assert!(t.is_rational());
        assert_eq!(t.r(), &rat_i64(18));
    }

    #[test]
    fn multiplication_combines_radicands() {
        let a = QuadraticSurd::new(rat_i64(2), 6).unwrap();
        let b = QuadraticSurd::new(rat_frac(1, 2), 10).unwrap();
        let p = a.mul(&b);
        // 2 sqrt6 * (1/2) sqrt10 = sqrt60 = 2 sqrt15
        assert_eq!(p.k(), 15);
        assert_eq!(p.r(), &rat_i64(2));
        assert_eq!(p.value_sq(), a.value_sq() * b.value_sq());
    }

    #[test]
    fn addition_requires_matching_radicands() {
        let a = QuadraticSurd::new(rat_i64(1), 2).unwrap();
        let b = QuadraticSurd::new(rat_i64(3), 2).unwrap();
        assert_eq!(a.add(&b).unwrap().r(), &rat_i64(4));
        let c = QuadraticSurd::new(rat_i64(1), 3).unwrap();
        assert!(a.add(&c).is_err());
        assert_eq!(a.add(&QuadraticSurd::zero()).unwrap(), a);
        let cancel = a.add(&a.neg()).unwrap();
        assert!(cancel.is_zero() && cancel.k() == 1);
    }

    #[test]
    fn valuations_and_log() {
        // 6 sqrt(2): v_2 = 1 + 1/2, v_3 = 1
        let s = QuadraticSurd::new(rat_i64(6), 2).unwrap();
        assert_eq!(s.valuation(2), rat_frac(3, 2));
        assert_eq!(s.valuation(3), rat_i64(1));
        assert_eq!(s.valuation(5), rat_i64(0));
        assert_eq!(s.support_primes().unwrap(), vec![2, 3]);
        let h = s.log_abs().unwrap();
        assert!((h.to_f64() - (6.0 * 2f64.sqrt()).ln()).abs() < 1e-12);
    }
}
