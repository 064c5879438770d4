//! Q and quadratic fields Q(sqrt d) with exact element arithmetic. Elements
//! are kept as a + b*sqrt(d) over the declared field; mixing fields in one
//! operation is a caller bug and panics.

use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::rational::{format_rational, is_squarefree, rat_i64, Rational};
use crate::error::{CoreError, Result};

pub const MAX_DISCRIMINANT_MAGNITUDE: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NumberField {
    Rationals,
    /// Q(sqrt d) for squarefree d, |d| <= 10^6, d != 0, 1.
    Quadratic { d: i64 },
}

impl NumberField {
    pub fn quadratic(d: i64) -> Result<Self> {
        if d == 0 || d == 1 || d.abs() > MAX_DISCRIMINANT_MAGNITUDE || !is_squarefree(d)? {
            return Err(CoreError::BadFieldDiscriminant(d));
        }
        Ok(NumberField::Quadratic { d })
    }

    pub fn degree(&self) -> u32 {
        match self {
            NumberField::Rationals => 1,
            NumberField::Quadratic { .. } => 2,
        }
    }

    pub fn is_real_quadratic(&self) -> bool {
        matches!(self, NumberField::Quadratic { d } if *d > 0)
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumberField::Rationals => write!(f, "Q"),
            NumberField::Quadratic { d } => write!(f, "Q(sqrt {d})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement {
    pub field: NumberField,
    pub a: Rational,
    pub b: Rational,
}

impl FieldElement {
    pub fn new(field: NumberField, a: Rational, b: Rational) -> Self {
        if field == NumberField::Rationals {
            assert!(b.is_zero(), "rational field element with surd part");
        }
        FieldElement { field, a, b }
    }

    pub fn from_rational(field: NumberField, a: Rational) -> Self {
        FieldElement {
            field,
            a,
            b: Rational::zero(),
        }
    }

    pub fn from_i64(field: NumberField, n: i64) -> Self {
        Self::from_rational(field, rat_i64(n))
    }

    pub fn zero(field: NumberField) -> Self {
        Self::from_i64(field, 0)
    }

    pub fn one(field: NumberField) -> Self {
        Self::from_i64(field, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn d(&self) -> i64 {
        match self.field {
            NumberField::Rationals => unreachable!("surd arithmetic over Q"),
            NumberField::Quadratic { d } => d,
        }
    }

    fn check_same(&self, other: &FieldElement) {
        assert_eq!(
            self.field, other.field,
            "field elements from different fields"
        );
    }

    pub fn conj(&self) -> FieldElement {
        FieldElement {
            field: self.field,
            a: self.a.clone(),
            b: -self.b.clone(),
        }
    }

    /// Field norm to Q: a^2 - d b^2 (equals a^2 over Q).
    pub fn norm(&self) -> Rational {
        if self.b.is_zero() {
            return &self.a * &self.a;
        }
        &self.a * &self.a - rat_i64(self.d()) * &self.b * &self.b
    }

    pub fn galois_conjugates(&self) -> Vec<FieldElement> {
        match self.field {
            NumberField::Rationals => vec![self.clone()],
            NumberField::Quadratic { .. } => vec![self.clone(), self.conj()],
        }
    }

    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(CoreError::Invalid("inverse of zero".into()));
        }
        let n = self.norm();
        Ok(FieldElement {
            field: self.field,
            a: &self.a / &n,
            b: -&self.b / &n,
        })
    }

    /// Lifts a rational element into a larger field. Anything else is a
    /// genuine field mismatch.
    pub fn promote(&self, field: NumberField) -> Result<FieldElement> {
        if self.field == field {
            Ok(self.clone())
        } else if self.field == NumberField::Rationals {
            Ok(FieldElement::from_rational(field, self.a.clone()))
        } else if field == NumberField::Rationals && self.b.is_zero() {
            Ok(FieldElement::from_rational(field, self.a.clone()))
        } else {
            Err(CoreError::FieldMismatch(format!(
                "cannot view an element of {} inside {}",
                self.field, field
            )))
        }
    }

    pub fn pow(&self, e: u32) -> FieldElement {
        let mut acc = FieldElement::one(self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Sign of the real number a + b sqrt(d) under the d > 0 embedding
    /// sqrt(d) > 0 (exact, no floating point).
    pub fn sign_real(&self) -> i32 {
        let sa = num_sign(&self.a);
        if self.b.is_zero() {
            return sa;
        }
        let d = self.d();
        assert!(d > 0, "sign_real on a complex embedding");
        let sb = num_sign(&self.b);
        if sa == sb || sa == 0 {
            return if sa == 0 { sb } else { sa };
        }
        if sb == 0 {
            return sa;
        }
        // opposite signs: compare a^2 with d b^2
        let lhs = &self.a * &self.a;
        let rhs = rat_i64(d) * &self.b * &self.b;
        if lhs > rhs {
            sa
        } else {
            sb
        }
    }

    /// Square of the archimedean modulus under the first complex embedding;
    /// rational because conjugate pairs multiply out.
    pub fn complex_modulus_sq(&self) -> Rational {
        let d = self.d();
        assert!(d < 0);
        &self.a * &self.a + rat_i64(-d) * &self.b * &self.b
    }

    /// Real embeddings as f64 (both for real quadratic; one for Q).
    pub fn embed_f64(&self, second: bool) -> f64 {
        match self.field {
            NumberField::Rationals => self.a.to_f64().unwrap_or(f64::NAN),
            NumberField::Quadratic { d } => {
                let b = if second { -&self.b } else { self.b.clone() };
                let a = self.a.to_f64().unwrap_or(f64::NAN);
                if d > 0 {
                    a + b.to_f64().unwrap_or(f64::NAN) * (d as f64).sqrt()
                } else {
                    a
                }
            }
        }
    }

    /// Complex embedding (re, im); im = 0 unless the field is imaginary.
    pub fn embed_complex(&self) -> (f64, f64) {
        match self.field {
            NumberField::Quadratic { d } if d < 0 => (
                self.a.to_f64().unwrap_or(f64::NAN),
                self.b.to_f64().unwrap_or(f64::NAN) * ((-d) as f64).sqrt(),
            ),
            _ => (self.embed_f64(false), 0.0),
        }
    }
}

fn num_sign(q: &Rational) -> i32 {
    if q.is_zero() {
        0
    } else if q.is_positive() {
        1
    } else {
        -1
    }
}

impl std::ops::Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.check_same(rhs);
        FieldElement {
            field: self.field,
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }
}

impl std::ops::Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.check_same(rhs);
        FieldElement {
            field: self.field,
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        }
    }
}

impl std::ops::Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.check_same(rhs);
        if self.b.is_zero() && rhs.b.is_zero() {
            return FieldElement {
                field: self.field,
                a: &self.a * &rhs.a,
                b: Rational::zero(),
            };
        }
        let d = rat_i64(self.d());
        FieldElement {
            field: self.field,
            a: &self.a * &rhs.a + &d * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field,
            a: -self.a.clone(),
            b: -self.b.clone(),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", format_rational(&self.a));
        }
        let d = self.d();
        if self.a.is_zero() {
            return write!(f, "{}*sqrt({})", format_rational(&self.b), d);
        }
        write!(
            f,
            "({}{}{}*sqrt({}))",
            format_rational(&self.a),
            if self.b.is_positive() { "+" } else { "" },
            format_rational(&self.b),
            d
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::rat_frac;

    #[test]
    fn quadratic_constructor_validates() {
        assert!(NumberField::quadratic(2).is_ok());
        assert!(NumberField::quadratic(-1).is_ok());
        assert!(NumberField::quadratic(12).is_err());
        assert!(NumberField::quadratic(0).is_err());
        assert!(NumberField::quadratic(1).is_err());
        assert!(NumberField::quadratic(2_000_000).is_err());
    }

    #[test]
    fn arithmetic_and_norm() {
        let k = NumberField::quadratic(2).unwrap();
        let x = FieldElement::new(k, rat_i64(1), rat_i64(1)); // 1 + sqrt2
        let y = FieldElement::new(k, rat_i64(3), rat_i64(-2)); // 3 - 2 sqrt2
        let p = &x * &y;
        // (1+sqrt2)(3-2sqrt2) = 3 - 2sqrt2 + 3sqrt2 - 4 = -1 + sqrt2
        assert_eq!(p, FieldElement::new(k, rat_i64(-1), rat_i64(1)));
        assert_eq!(x.norm(), rat_i64(-1));
        let inv = x.inv().unwrap();
        let one = &x * &inv;
        assert_eq!(one, FieldElement::one(k));
        // norm is multiplicative
        assert_eq!(p.norm(), x.norm() * y.norm());
    }

    #[test]
    fn exact_sign_of_real_embedding() {
        let k = NumberField::quadratic(2).unwrap();
        // 7/5 - sqrt2 < 0 < 3/2 - sqrt2
        let x = FieldElement::new(k, rat_frac(7, 5), rat_i64(-1));
        assert_eq!(x.sign_real(), -1);
        let y = FieldElement::new(k, rat_frac(3, 2), rat_i64(-1));
        assert_eq!(y.sign_real(), 1);
        assert_eq!(FieldElement::zero(k).sign_real(), 0);
        assert_eq!(x.conj().sign_real(), 1);
    }

    #[test]
    fn complex_modulus() {
        let k = NumberField::quadratic(-5).unwrap();
        let x = FieldElement::new(k, rat_i64(2), rat_i64(3)); // |2 + 3 sqrt(-5)|^2 = 4 + 45
        assert_eq!(x.complex_modulus_sq(), rat_i64(49));
        assert_eq!(x.norm(), rat_i64(49));
    }
}
