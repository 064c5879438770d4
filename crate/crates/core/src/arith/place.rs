//! Places of Q and quadratic fields under the normalization that makes the
//! product formula hold with exponent sums over a fiber equal to one: the
//! absolute value of x at a place w above p is |N_{K_w/Q_p}(x)|_p^{1/[K:Q]},
//! and archimedean places carry [K_v:R]/[K:Q].
//!
//! Split places are told apart by which 2-adic/p-adic square root of d the
//! embedding sends sqrt(d) to. The first place takes the root whose residue
//! is the smaller of the pair mod p (root congruent to 1 mod 4 when p = 2);
//! the second takes the other. Valuations at split places are computed by
//! lifting that root to precision v_p(norm) + 1, which always suffices
//! because both conjugate factors are p-adic integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::rational::{legendre, rat_frac, rat_i64, sqrt_mod_p, valuation_int, Rational};
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PlaceKind {
    ArchRational,
    ArchReal { second: bool },
    ArchComplex,
    FiniteRational { p: u64 },
    FiniteSplit { p: u64, second: bool },
    FiniteInert { p: u64 },
    FiniteRamified { p: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Place {
    pub field: NumberField,
    pub kind: PlaceKind,
}

/// A place of the base field Q, used to index fibers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RationalPlace {
    Infinity,
    Prime(u64),
}

impl Place {
    pub fn is_arch(&self) -> bool {
        matches!(
            self.kind,
            PlaceKind::ArchRational | PlaceKind::ArchReal { .. } | PlaceKind::ArchComplex
        )
    }

    pub fn residue_prime(&self) -> Option<u64> {
        match self.kind {
            PlaceKind::FiniteRational { p }
            | PlaceKind::FiniteSplit { p, .. }
            | PlaceKind::FiniteInert { p }
            | PlaceKind::FiniteRamified { p } => Some(p),
            _ => None,
        }
    }

    pub fn below(&self) -> RationalPlace {
        match self.residue_prime() {
            Some(p) => RationalPlace::Prime(p),
            None => RationalPlace::Infinity,
        }
    }

    /// d(w|v) = [K_w : Q_v] / [K : Q]; sums to 1 over each fiber.
    pub fn local_degree_ratio(&self) -> Rational {
        match self.kind {
            PlaceKind::ArchRational | PlaceKind::FiniteRational { .. } => rat_i64(1),
            PlaceKind::ArchReal { .. } | PlaceKind::FiniteSplit { .. } => rat_frac(1, 2),
            PlaceKind::ArchComplex
            | PlaceKind::FiniteInert { .. }
            | PlaceKind::FiniteRamified { .. } => rat_i64(1),
        }
    }
}

/// All places of `field` above a place of Q.
pub fn places_above(field: NumberField, below: RationalPlace) -> Vec<Place> {
    match (field, below) {
        (NumberField::Rationals, RationalPlace::Infinity) => vec![Place {
            field,
            kind: PlaceKind::ArchRational,
        }],
        (NumberField::Rationals, RationalPlace::Prime(p)) => vec![Place {
            field,
            kind: PlaceKind::FiniteRational { p },
        }],
        (NumberField::Quadratic { d }, RationalPlace::Infinity) => {
            if d > 0 {
                vec![
                    Place {
                        field,
                        kind: PlaceKind::ArchReal { second: false },
                    },
                    Place {
                        field,
                        kind: PlaceKind::ArchReal { second: true },
                    },
                ]
            } else {
                vec![Place {
                    field,
                    kind: PlaceKind::ArchComplex,
                }]
            }
        }
        (NumberField::Quadratic { d }, RationalPlace::Prime(p)) => {
            let kinds = match splitting_type(d, p) {
                SplittingType::Split => vec![
                    PlaceKind::FiniteSplit { p, second: false },
                    PlaceKind::FiniteSplit { p, second: true },
                ],
                SplittingType::Inert => vec![PlaceKind::FiniteInert { p }],
                SplittingType::Ramified => vec![PlaceKind::FiniteRamified { p }],
            };
            kinds
                .into_iter()
                .map(|kind| Place { field, kind })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplittingType {
    Split,
    Inert,
    Ramified,
}

pub fn splitting_type(d: i64, p: u64) -> SplittingType {
    if p == 2 {
        return match d.rem_euclid(8) {
            1 => SplittingType::Split,
            5 => SplittingType::Inert,
            _ => SplittingType::Ramified,
        };
    }
    if d.rem_euclid(p as i64) == 0 {
        return SplittingType::Ramified;
    }
    match legendre(d, p) {
        1 => SplittingType::Split,
        _ => SplittingType::Inert,
    }
}

/// The distinguished square root of d mod p^k (see the module docs for the
/// tie-break). Requires that p splits in Q(sqrt d).
pub fn hensel_sqrt(d: i64, p: u64, k: u32) -> BigInt {
    debug_assert_eq!(splitting_type(d, p), SplittingType::Split);
    if p == 2 {
        return hensel_sqrt_two(d, k);
    }
    let r0 = sqrt_mod_p(d.rem_euclid(p as i64) as u64, p);
    let r0 = r0.min(p - r0);
    let mut modulus = BigInt::from(p);
    let target = BigInt::from(p).pow(k);
    let d = BigInt::from(d);
    let mut r = BigInt::from(r0);
    while modulus < target {
        modulus = &modulus * &modulus;
        if modulus > target {
            modulus = target.clone();
        }
        // Newton step: r <- r - (r^2 - d) / (2r) mod modulus
        let f = (&r * &r - &d).mod_floor(&modulus);
        let deriv = (&r << 1u32).mod_floor(&modulus);
        let inv = mod_inverse(&deriv, &modulus);
        r = (&r - f * inv).mod_floor(&modulus);
    }
    r.mod_floor(&target)
}

fn hensel_sqrt_two(d: i64, k: u32) -> BigInt {
    debug_assert_eq!(d.rem_euclid(8), 1);
    let lift_bits = k + 2;
    let d = BigInt::from(d);
    let mut r = BigInt::one();
    for j in 3..=lift_bits as u64 {
        let modulus = BigInt::one() << (j + 1);
        let rem = (&r * &r - &d).mod_floor(&modulus);
        if !(rem >> j).is_zero() {
            r += BigInt::one() << (j - 1);
        }
    }
    r.mod_floor(&(BigInt::one() << k))
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    debug_assert!(g.gcd.is_one());
    g.x.mod_floor(m)
}

/// Valuation of x at a split place, normalized so v(p) = 1. Can be negative.
pub fn split_valuation(x: &FieldElement, p: u64, second: bool) -> Result<i64> {
    if x.is_zero() {
        return Err(CoreError::Invalid("valuation of zero".into()));
    }
    let d = match x.field {
        NumberField::Quadratic { d } => d,
        NumberField::Rationals => {
            return Err(CoreError::FieldMismatch("split place needs Q(sqrt d)".into()))
        }
    };
    // clear denominators: x = (A + B sqrt d) / e
    let e = x.a.denom().lcm(x.b.denom());
    let big_a = x.a.numer() * (&e / x.a.denom());
    let big_b = x.b.numer() * (&e / x.b.denom());
    let ve = valuation_int(&e, p) as i64;
    let norm = &big_a * &big_a - BigInt::from(d) * &big_b * &big_b;
    debug_assert!(!norm.is_zero());
    let vn = valuation_int(&norm, p);
    let k = vn + 1;
    let pk = BigInt::from(p).pow(k);
    let mut r = hensel_sqrt(d, p, k);
    if second {
        r = (&pk - r).mod_floor(&pk);
    }
    let t = (&big_a + &big_b * r).mod_floor(&pk);
    debug_assert!(!t.is_zero(), "valuation exceeded its norm bound");
    Ok(valuation_int(&t, p) as i64 - ve)
}

/// Valuation of x at any finite place (value group normalized to Z with
/// v(p) = 1; at ramified places this is v_p(norm)/2 and may be half-integral,
/// so the result is returned as a rational).
pub fn finite_valuation(x: &FieldElement, place: &Place) -> Result<Rational> {
    if x.is_zero() {
        return Err(CoreError::Invalid("valuation of zero".into()));
    }
    if x.field != place.field {
        return Err(CoreError::FieldMismatch(format!(
            "element of {} at a place of {}",
            x.field, place.field
        )));
    }
    match place.kind {
        PlaceKind::FiniteRational { p } => {
            Ok(rat_i64(crate::arith::rational::valuation_rat(&x.a, p)))
        }
        PlaceKind::FiniteSplit { p, second } => Ok(rat_i64(split_valuation(x, p, second)?)),
        PlaceKind::FiniteInert { p } => {
            let n = x.norm();
            Ok(rat_i64(crate::arith::rational::valuation_rat(&n, p)) / rat_i64(2))
        }
        PlaceKind::FiniteRamified { p } => {
            let n = x.norm();
            Ok(rat_i64(crate::arith::rational::valuation_rat(&n, p)) / rat_i64(2))
        }
        _ => Err(CoreError::Invalid("finite_valuation at an archimedean place".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::rat_i64;

    #[test]
    fn splitting_types_for_small_fields() {
        // Q(sqrt 2): disc 8; 2 ramifies, 7 splits (2 is a QR mod 7), 3 inert
        assert_eq!(splitting_type(2, 2), SplittingType::Ramified);
        assert_eq!(splitting_type(2, 7), SplittingType::Split);
        assert_eq!(splitting_type(2, 3), SplittingType::Inert);
        // Q(i): 2 ramifies, p = 1 mod 4 splits, p = 3 mod 4 inert
        assert_eq!(splitting_type(-1, 2), SplittingType::Ramified);
        assert_eq!(splitting_type(-1, 5), SplittingType::Split);
        assert_eq!(splitting_type(-1, 3), SplittingType::Inert);
        // d = 1 mod 8 splits at 2, d = 5 mod 8 inert at 2
        assert_eq!(splitting_type(17, 2), SplittingType::Split);
        assert_eq!(splitting_type(5, 2), SplittingType::Inert);
        assert_eq!(splitting_type(-7, 2), SplittingType::Split); // -7 = 1 mod 8
    }

    #[test]
    fn fiber_degree_ratios_sum_to_one() {
        for field in [
            NumberField::Rationals,
            NumberField::quadratic(2).unwrap(),
            NumberField::quadratic(-1).unwrap(),
            NumberField::quadratic(17).unwrap(),
        ] {
            for below in [
                RationalPlace::Infinity,
                RationalPlace::Prime(2),
                RationalPlace::Prime(3),
                RationalPlace::Prime(5),
                RationalPlace::Prime(7),
                RationalPlace::Prime(17),
            ] {
                let total: Rational = places_above(field, below)
                    .iter()
                    .map(Place::local_degree_ratio)
                    .sum();
                assert_eq!(total, rat_i64(1), "{field} above {below:?}");
            }
        }
    }

    #[test]
    fn hensel_root_squares_to_d() {
        for (d, p, k) in [(2i64, 7u64, 9u32), (5, 11, 6), (-1, 13, 8), (17, 2, 12), (-7, 2, 10)] {
            let r = hensel_sqrt(d, p, k);
            let pk = BigInt::from(p).pow(k);
            let rem = (&r * &r - BigInt::from(d)).mod_floor(&pk);
            assert!(rem.is_zero(), "d={d} p={p} k={k}");
        }
        // distinguished root mod 7 of 2: roots are 3 and 4, so 3
        assert_eq!(hensel_sqrt(2, 7, 1), BigInt::from(3));
        // distinguished 2-adic root is 1 mod 4
        assert_eq!(hensel_sqrt(17, 2, 5).mod_floor(&BigInt::from(4)), BigInt::one());
    }

    #[test]
    fn split_valuations_add_up_to_norm_valuation() {
        let k = NumberField::quadratic(2).unwrap();
        // 3 + sqrt2 has norm 7; exactly one place above 7 sees it
        let x = FieldElement::new(k, rat_i64(3), rat_i64(1));
        let v1 = split_valuation(&x, 7, false).unwrap();
        let v2 = split_valuation(&x, 7, true).unwrap();
        assert_eq!(v1 + v2, 1);
        assert_eq!(v1.min(v2), 0);
        // conjugation swaps the two places
        let v1c = split_valuation(&x.conj(), 7, false).unwrap();
        assert_eq!(v1c, v2);
    }

    #[test]
    fn split_valuation_sees_lopsided_units() {
        // v_2(1 + sqrt17) is 1 at one place above 2 and 3 at the other
        // (norm -16), so (1 + sqrt17)/8 has valuations (-2, 0).
        let k = NumberField::quadratic(17).unwrap();
        let x = FieldElement::new(k, rat_frac(1, 8), rat_frac(1, 8));
        let v1 = split_valuation(&x, 2, false).unwrap();
        let v2 = split_valuation(&x, 2, true).unwrap();
        assert_eq!(v1 + v2, -2);
        assert_eq!(v1.min(v2), -2);
        assert_eq!(v1.max(v2), 0);
    }
}
