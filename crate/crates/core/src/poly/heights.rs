//! Exact sup and L1 norms of coefficient lists at every place, and the
//! heights built from them. At a finite place both norms are the largest
//! coefficient absolute value; at an archimedean place the L1 norm sums
//! the embedded absolute values, which stays exactly representable: real
//! embeddings fold signs into a single field element, complex embeddings
//! and surd lists become a canonical sum of square roots.

use std::collections::BTreeSet;

use num_traits::Signed;

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::height::{log_abs, relevant_primes, LogHeight};
use crate::arith::place::{finite_valuation, places_above, Place, PlaceKind, RationalPlace};
use crate::arith::rational::Rational;
use crate::error::{CoreError, Result};
use crate::poly::block::BlockPoly;
use crate::poly::homog::HomogeneousPoly;
use crate::poly::surd::QuadraticSurd;

#[derive(Debug, Clone)]
pub enum CoeffList {
    Field(NumberField, Vec<FieldElement>),
    Surd(Vec<QuadraticSurd>),
}

impl CoeffList {
    pub fn field(&self) -> NumberField {
        match self {
            CoeffList::Field(f, _) => *f,
            CoeffList::Surd(_) => NumberField::Rationals,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CoeffList::Field(_, v) => v.len(),
            CoeffList::Surd(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn of_polys(fs: &[HomogeneousPoly]) -> Result<CoeffList> {
        let nonzero: Vec<&HomogeneousPoly> = fs.iter().filter(|f| !f.is_zero()).collect();
        let Some(first) = nonzero.first() else {
            return Err(CoreError::Invalid("norms of an all-zero list".into()));
        };
        let field = first.field();
        if nonzero.iter().any(|f| f.field() != field) {
            return Err(CoreError::FieldMismatch("mixed-field polynomial list".into()));
        }
        Ok(CoeffList::Field(
            field,
            nonzero
                .iter()
                .flat_map(|f| f.coefficients().cloned())
                .collect(),
        ))
    }

    pub fn of_block(f: &BlockPoly) -> Result<CoeffList> {
        if f.is_zero() {
            return Err(CoreError::Invalid("norms of the zero polynomial".into()));
        }
        if let Some(map) = f.field_terms() {
            Ok(CoeffList::Field(
                f.field().unwrap(),
                map.values().cloned().collect(),
            ))
        } else {
            Ok(CoeffList::Surd(
                f.surd_terms().unwrap().values().cloned().collect(),
            ))
        }
    }

    /// Primes where some coefficient's absolute value can differ from 1.
    pub fn relevant_primes(&self) -> Result<BTreeSet<u64>> {
        match self {
            CoeffList::Field(_, v) => relevant_primes(v),
            CoeffList::Surd(v) => {
                let mut out = BTreeSet::new();
                for s in v.iter().filter(|s| !s.is_zero()) {
                    out.extend(s.support_primes()?);
                }
                Ok(out)
            }
        }
    }
}

/// (sup, l1) norms at one place, both as exact logarithmic heights.
pub fn norms_at_place(coeffs: &CoeffList, place: &Place) -> Result<(LogHeight, LogHeight)> {
    match coeffs {
        CoeffList::Field(field, list) => {
            if place.field != *field {
                return Err(CoreError::FieldMismatch(
                    "norm at a place of a different field".into(),
                ));
            }
            field_norms(list, place)
        }
        CoeffList::Surd(list) => {
            if place.field != NumberField::Rationals {
                return Err(CoreError::FieldMismatch(
                    "surd coefficients live over the rationals".into(),
                ));
            }
            surd_norms(list, place)
        }
    }
}

fn field_norms(list: &[FieldElement], place: &Place) -> Result<(LogHeight, LogHeight)> {
    let live: Vec<&FieldElement> = list.iter().filter(|c| !c.is_zero()).collect();
    if live.is_empty() {
        return Err(CoreError::Invalid("norms of an all-zero list".into()));
    }
    match place.kind {
        PlaceKind::ArchRational => {
            let sup = live
                .iter()
                .map(|c| c.a.abs())
                .max()
                .unwrap();
            let total: Rational = live.iter().map(|c| c.a.abs()).sum();
            Ok((
                LogHeight::ln_of_rational(&sup)?,
                LogHeight::ln_of_rational(&total)?,
            ))
        }
        PlaceKind::ArchReal { second } => {
            let mut best = live[0];
            for c in &live[1..] {
                let u = if second { c.conj() } else { (*c).clone() };
                let w = if second { best.conj() } else { best.clone() };
                let t = &(&u * &u) - &(&w * &w);
                if t.sign_real() > 0 {
                    best = c;
                }
            }
            let sup = log_abs(best, place)?;
            // sum of |sigma(c)| = sigma(sum of sign-folded c), a field element
            let mut folded = FieldElement::zero(best.field);
            for c in &live {
                let embedded = if second { c.conj() } else { (*c).clone() };
                let s = embedded.sign_real();
                let signed = if s < 0 {
                    &FieldElement::from_i64(c.field, -1) * c
                } else {
                    (*c).clone()
                };
                folded = &folded + &signed;
            }
            Ok((sup, log_abs(&folded, place)?))
        }
        PlaceKind::ArchComplex => {
            let sup_sq = live
                .iter()
                .map(|c| c.complex_modulus_sq())
                .max()
                .unwrap();
            let half = Rational::new(1.into(), 2.into());
            let sup = LogHeight::ln_of_rational(&sup_sq)?.scale(&half);
            let l1 = LogHeight::ln_sum_sqrt(
                &live
                    .iter()
                    .map(|c| c.complex_modulus_sq())
                    .collect::<Vec<_>>(),
            )?;
            Ok((sup, l1))
        }
        _ => {
            let vmin = live
                .iter()
                .map(|c| finite_valuation(c, place))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .min()
                .unwrap();
            let p = place.residue_prime().unwrap();
            let e = -vmin * place.local_degree_ratio();
            let h = LogHeight::from_prime_exponents([(p, e)].into());
            Ok((h.clone(), h))
        }
    }
}

fn surd_norms(list: &[QuadraticSurd], place: &Place) -> Result<(LogHeight, LogHeight)> {
    let live: Vec<&QuadraticSurd> = list.iter().filter(|c| !c.is_zero()).collect();
    if live.is_empty() {
        return Err(CoreError::Invalid("norms of an all-zero list".into()));
    }
    match place.kind {
        PlaceKind::ArchRational => {
            let best = live
                .iter()
                .max_by(|a, b| a.value_sq().cmp(&b.value_sq()))
                .unwrap();
            let l1 = if live.iter().all(|c| c.is_rational()) {
                let total: Rational = live.iter().map(|c| c.r().abs()).sum();
                LogHeight::ln_of_rational(&total)?
            } else if live.len() == 1 {
                live[0].log_abs()?
            } else {
                LogHeight::ln_sum_sqrt(
                    &live.iter().map(|c| c.value_sq()).collect::<Vec<_>>(),
                )?
            };
            Ok((best.log_abs()?, l1))
        }
        PlaceKind::FiniteRational { p } => {
            let vmin = live.iter().map(|c| c.valuation(p)).min().unwrap();
            let h = LogHeight::from_prime_exponents([(p, -vmin)].into());
            Ok((h.clone(), h))
        }
        _ => Err(CoreError::Invalid(
            "surd norms are defined at rational places".into(),
        )),
    }
}

/// Largest coordinate absolute value at a place, as a logarithmic height.
pub fn point_sup_at(coords: &[FieldElement], place: &Place) -> Result<LogHeight> {
    let i = crate::arith::height::argmax_abs(coords, place)?;
    log_abs(&coords[i], place)
}

/// (h, h1): sums of log sup and log l1 norms over all places.
pub fn heights_of(coeffs: &CoeffList) -> Result<(LogHeight, LogHeight)> {
    let field = coeffs.field();
    let mut h = LogHeight::zero();
    let mut h1 = LogHeight::zero();
    for place in places_above(field, RationalPlace::Infinity) {
        let (sup, l1) = norms_at_place(coeffs, &place)?;
        h = h.add(&sup);
        h1 = h1.add(&l1);
    }
    for p in coeffs.relevant_primes()? {
        for place in places_above(field, RationalPlace::Prime(p)) {
            let (sup, l1) = norms_at_place(coeffs, &place)?;
            h = h.add(&sup);
            h1 = h1.add(&l1);
        }
    }
    Ok((h, h1))
}

pub fn poly_norms(
    fs: &[HomogeneousPoly],
    place: &Place,
) -> Result<(LogHeight, LogHeight)> {
    norms_at_place(&CoeffList::of_polys(fs)?, place)
}

pub fn poly_heights(fs: &[HomogeneousPoly]) -> Result<(LogHeight, LogHeight)> {
    heights_of(&CoeffList::of_polys(fs)?)
}

pub fn block_heights(f: &BlockPoly) -> Result<(LogHeight, LogHeight)> {
    heights_of(&CoeffList::of_block(f)?)
}

/// Slack of the evaluation envelope at one place:
/// log ||f||_{v,1} + D log ||x||_v - log |f(x)|_v, or None when f(x) = 0.
pub fn evaluation_envelope_slack(
    f: &HomogeneousPoly,
    x: &[FieldElement],
    place: &Place,
) -> Result<Option<LogHeight>> {
    let value = f.evaluate(x)?;
    if value.is_zero() {
        return Ok(None);
    }
    let (_, l1) = poly_norms(std::slice::from_ref(f), place)?;
    let sup_x = point_sup_at(x, place)?;
    let d = Rational::from_integer(f.degree().into());
    let lhs = log_abs(&value, place)?;
    Ok(Some(l1.add(&sup_x.scale(&d)).sub(&lhs)))
}

/// Slack of the pushforward height bound h(y) <= D h(x) + h1(fs) for
/// y = (f0(x), ..., fr(x)).
pub fn push_height_bound(
    x: &[FieldElement],
    fs: &[HomogeneousPoly],
) -> Result<LogHeight> {
    if fs.is_empty() {
        return Err(CoreError::Invalid("empty polynomial list".into()));
    }
    let degree = fs[0].degree();
    if fs.iter().any(|f| f.degree() != degree) {
        return Err(CoreError::Invalid("pushforward wants equal degrees".into()));
    }
    let y: Vec<FieldElement> = fs
        .iter()
        .map(|f| f.evaluate(x))
        .collect::<Result<_>>()?;
    if y.iter().all(FieldElement::is_zero) {
        return Err(CoreError::Invalid("image is the zero tuple".into()));
    }
    let hy = crate::arith::height::point_height(&y)?;
    let hx = crate::arith::height::point_height(x)?;
    let (_, h1) = poly_heights(fs)?;
    let d = Rational::from_integer(degree.into());
    Ok(hx.scale(&d).add(&h1).sub(&hy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{rat_frac, rat_i64};
    use crate::poly::monomial::{monomials_of_degree, Monomial};
    use crate::poly::text::parse_homogeneous;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cmp::Ordering;

    fn fe(n: i64) -> FieldElement {
        FieldElement::from_i64(NumberField::Rationals, n)
    }

    #[test]
    fn handbook_norm_values() {
        let f = parse_homogeneous("2 * x0 + 3 * x1", None).unwrap();
        let arch = places_above(NumberField::Rationals, RationalPlace::Infinity)[0];
        let (sup, l1) = poly_norms(std::slice::from_ref(&f), &arch).unwrap();
        assert!(sup
            .sub(&LogHeight::ln_of_rational(&rat_i64(3)).unwrap())
            .is_zero_exact());
        assert!(l1
            .sub(&LogHeight::ln_of_rational(&rat_i64(5)).unwrap())
            .is_zero_exact());
        let at2 = places_above(NumberField::Rationals, RationalPlace::Prime(2))[0];
        let (sup2, l12) = poly_norms(std::slice::from_ref(&f), &at2).unwrap();
        assert!(sup2.is_zero_exact() && l12.is_zero_exact());
        // over all places: h picks up log 3, h1 picks up log 5
        let (h, h1) = poly_heights(std::slice::from_ref(&f)).unwrap();
        assert!(h
            .sub(&LogHeight::ln_of_rational(&rat_i64(3)).unwrap())
            .is_zero_exact());
        assert!(h1
            .sub(&LogHeight::ln_of_rational(&rat_i64(5)).unwrap())
            .is_zero_exact());
    }

    #[test]
    fn gcd_content_shows_up_at_finite_places() {
        // f = 6 x0 + 10 x1: h = log 10 - log 2 = log 5
        let f = parse_homogeneous("6 * x0 + 10 * x1", None).unwrap();
        let (h, _) = poly_heights(std::slice::from_ref(&f)).unwrap();
        assert!(h
            .sub(&LogHeight::ln_of_rational(&rat_i64(5)).unwrap())
            .is_zero_exact());
    }

    #[test]
    fn unit_form_has_height_zero() {
        let f = parse_homogeneous("1 * x0 + 1 * x1", None).unwrap();
        let (h, h1) = poly_heights(std::slice::from_ref(&f)).unwrap();
        assert!(h.is_zero_exact());
        assert!(h1
            .sub(&LogHeight::ln_of_rational(&rat_i64(2)).unwrap())
            .is_zero_exact());
    }

    #[test]
    fn scaling_invariance_of_heights() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let terms: Vec<_> = monomials_of_degree(3, 2)
                .into_iter()
                .filter_map(|m| {
                    rng.random_bool(0.6).then(|| {
                        (
                            m,
                            FieldElement::from_rational(
                                NumberField::Rationals,
                                rat_frac(rng.random_range(-9..=9), rng.random_range(1..=7)),
                            ),
                        )
                    })
                })
                .collect();
            if terms.is_empty() {
                continue;
            }
            let f =
                HomogeneousPoly::new(NumberField::Rationals, 3, 2, terms).unwrap();
            if f.is_zero() {
                continue;
            }
            let lambda = FieldElement::from_rational(NumberField::Rationals, rat_frac(-7, 3));
            let g = f.scale(&lambda);
            let (h0, h10) = poly_heights(std::slice::from_ref(&f)).unwrap();
            let (h1_, h11) = poly_heights(std::slice::from_ref(&g)).unwrap();
            assert!(h0.sub(&h1_).is_zero_exact());
            assert!(h10.sub(&h11).is_zero_exact());
        }
    }

    #[test]
    fn h_below_h1_below_h_plus_log_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..25 {
            let nvars = rng.random_range(2..=3);
            let deg = rng.random_range(1..=3);
            let terms: Vec<_> = monomials_of_degree(nvars, deg)
                .into_iter()
                .filter_map(|m| {
                    rng.random_bool(0.7).then(|| {
                        (
                            m,
                            FieldElement::from_rational(
                                NumberField::Rationals,
                                rat_frac(rng.random_range(-12..=12), rng.random_range(1..=9)),
                            ),
                        )
                    })
                })
                .collect();
            let f = HomogeneousPoly::new(NumberField::Rationals, nvars, deg, terms).unwrap();
            if f.is_zero() {
                continue;
            }
            let (h, h1) = poly_heights(std::slice::from_ref(&f)).unwrap();
            let m = LogHeight::ln_of_rational(&rat_i64(f.num_terms() as i64)).unwrap();
            assert_ne!(h1.cmp3(&h).unwrap(), Ordering::Less);
            assert_ne!(h.add(&m).cmp3(&h1).unwrap(), Ordering::Less);
        }
    }

    #[test]
    fn galois_conjugation_preserves_heights() {
        let k = NumberField::quadratic(2).unwrap();
        let f = HomogeneousPoly::new(
            k,
            2,
            1,
            [
                (
                    Monomial(vec![1, 0]),
                    FieldElement::new(k, rat_i64(1), rat_i64(1)),
                ),
                (
                    Monomial(vec![0, 1]),
                    FieldElement::new(k, rat_frac(1, 3), rat_i64(-2)),
                ),
            ],
        )
        .unwrap();
        let (h, h1) = poly_heights(std::slice::from_ref(&f)).unwrap();
        let (hc, h1c) = poly_heights(&[f.conj()]).unwrap();
        assert!(h.sub(&hc).is_zero_exact());
        assert!(h1.sub(&h1c).is_zero_exact());
    }

    #[test]
    fn pushforward_examples() {
        // x = (1,1), fs = (x0^2, x1^2): h(y) = 0 = D h(x), slack is h1 = log 2
        let f0 = parse_homogeneous("1 * x0^2", Some(2)).unwrap();
        let f1 = parse_homogeneous("1 * x1^2", Some(2)).unwrap();
        let slack = push_height_bound(&[fe(1), fe(1)], &[f0, f1]).unwrap();
        assert!(slack
            .sub(&LogHeight::ln_of_rational(&rat_i64(2)).unwrap())
            .is_zero_exact());
        // x = (2,1), fs = all degree-2 monomials: h(y) = log 4 = 2 h(x)
        // exactly, so the slack is h1 of the three unit coefficients
        let fs = [
            parse_homogeneous("1 * x0^2", Some(2)).unwrap(),
            parse_homogeneous("1 * x0 x1", Some(2)).unwrap(),
            parse_homogeneous("1 * x1^2", Some(2)).unwrap(),
        ];
        let slack = push_height_bound(&[fe(2), fe(1)], &fs).unwrap();
        assert!(slack
            .sub(&LogHeight::ln_of_rational(&rat_i64(3)).unwrap())
            .is_zero_exact());
    }

    #[test]
    fn envelope_slack_nonnegative_on_seeded_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let arch = places_above(NumberField::Rationals, RationalPlace::Infinity)[0];
        let at3 = places_above(NumberField::Rationals, RationalPlace::Prime(3))[0];
        for _ in 0..40 {
            let terms: Vec<_> = monomials_of_degree(2, 3)
                .into_iter()
                .filter_map(|m| {
                    rng.random_bool(0.6).then(|| {
                        (
                            m,
                            FieldElement::from_rational(
                                NumberField::Rationals,
                                rat_frac(rng.random_range(-9..=9), rng.random_range(1..=4)),
                            ),
                        )
                    })
                })
                .collect();
            let f = HomogeneousPoly::new(NumberField::Rationals, 2, 3, terms).unwrap();
            if f.is_zero() {
                continue;
            }
            let x = [fe(rng.random_range(-9..=9)), fe(rng.random_range(-9..=9))];
            if x.iter().all(FieldElement::is_zero) {
                continue;
            }
            for place in [&arch, &at3] {
                if let Some(slack) = evaluation_envelope_slack(&f, &x, place).unwrap() {
                    assert_ne!(slack.sign3().unwrap(), Ordering::Less, "envelope violated");
                }
            }
        }
    }

    #[test]
    fn surd_block_norms() {
        // coefficients sqrt2 and -3/2 sqrt6 on a single block
        let f = BlockPoly::from_surd_terms(
            vec![2],
            vec![
                (vec![1, 0], QuadraticSurd::new(rat_i64(1), 2).unwrap()),
                (vec![0, 1], QuadraticSurd::new(rat_frac(-3, 2), 6).unwrap()),
            ],
        )
        .unwrap();
        let (h, h1) = block_heights(&f).unwrap();
        // sup at infinity is 3/2 sqrt6, at 2 the min valuation is -1/2, at 3 it is 0,
        // so h = ln(3/2) + ln6/2 + ln2/2 = (3/2) ln3
        let expected = LogHeight::ln_of_rational(&rat_i64(3))
            .unwrap()
            .scale(&rat_frac(3, 2));
        assert!(h.sub(&expected).is_zero_exact());
        assert_ne!(h1.cmp3(&h).unwrap(), Ordering::Less);
    }
}
