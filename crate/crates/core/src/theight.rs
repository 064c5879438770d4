//! Heights twisted by place-indexed coordinate weights, together with the
//! dual weights supported on optimal monomial bases and the determinant
//! heights of the linear systems connecting the two scales.
//!
//! The twist parameter Q only ever enters through its logarithm, carried as
//! a [`LogHeight`] so that rational exponents combine exactly and every
//! comparison is either decided or refused. Weight vectors attach to places
//! of a base field; points over an extension pick up the weight of the
//! place below, scaled by the local degree ratio.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::height::{log_abs, point_height, relevant_primes, LogHeight};
use crate::arith::place::{places_above, Place, PlaceKind, RationalPlace};
use crate::arith::rational::{binomial, rat_i64, Rational};
use crate::chow::{chow_form, normalized_chow_weight};
use crate::error::{CoreError, Result};
use crate::linalg::QMatrix;
use crate::poly::monomial::Monomial;
use crate::variety::{
    degree_dimension, hilbert_weight_on_piece, ideal_piece, GradedPiece, VarietySpec,
};

const MINOR_GUARD: u64 = 200_000;

/// Nonnegative weight vectors at finitely many places of one field, with
/// the per-place maxima summing to at most one.
#[derive(Debug, Clone)]
pub struct WeightFamily {
    field: NumberField,
    width: usize,
    entries: BTreeMap<Place, Vec<Rational>>,
}

impl WeightFamily {
    /// Validates shapes, nonnegativity, and the unit budget, dropping
    /// places whose vector is identically zero.
    pub fn new(
        field: NumberField,
        width: usize,
        entries: impl IntoIterator<Item = (Place, Vec<Rational>)>,
    ) -> Result<Self> {
        if width == 0 {
            return Err(CoreError::Invalid(
                "weight family needs at least one coordinate".into(),
            ));
        }
        let mut kept: BTreeMap<Place, Vec<Rational>> = BTreeMap::new();
        let mut budget = Rational::zero();
        for (place, c) in entries {
            if place.field != field {
                return Err(CoreError::FieldMismatch(
                    "weight family mixes places of different fields".into(),
                ));
            }
            if c.len() != width {
                return Err(CoreError::Invalid(format!(
                    "weight vector has {} entries, family wants {width}",
                    c.len()
                )));
            }
            if c.iter().any(Rational::is_negative) {
                return Err(CoreError::Invalid("weights must be nonnegative".into()));
            }
            let top = c.iter().max().cloned().unwrap_or_else(Rational::zero);
            if top.is_zero() {
                continue;
            }
            if kept.insert(place, c).is_some() {
                return Err(CoreError::Invalid("duplicate place in weight family".into()));
            }
            budget += &top;
        }
        if budget > Rational::one() {
            return Err(CoreError::Invalid(format!(
                "per-place weight maxima sum to {budget}, above one"
            )));
        }
        Ok(WeightFamily {
            field,
            width,
            entries: kept,
        })
    }

    pub fn empty(field: NumberField, width: usize) -> Result<Self> {
        WeightFamily::new(field, width, [])
    }

    pub fn field(&self) -> NumberField {
        self.field
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn entries(&self) -> &BTreeMap<Place, Vec<Rational>> {
        &self.entries
    }

    /// Sum over places of the largest coordinate weight.
    pub fn budget(&self) -> Rational {
        self.entries
            .values()
            .map(|c| c.iter().max().cloned().unwrap_or_else(Rational::zero))
            .sum()
    }

    /// Weight vector seen from a place of the working field, with the
    /// factor the exponents pick up there.
    fn scaled_at(&self, place: &Place) -> Result<Option<(&[Rational], Rational)>> {
        if place.field == self.field {
            return Ok(self
                .entries
                .get(place)
                .map(|c| (c.as_slice(), Rational::one())));
        }
        if self.field != NumberField::Rationals {
            return Err(CoreError::FieldMismatch(
                "weights over a quadratic field only apply to points of that field".into(),
            ));
        }
        Ok(self
            .entries
            .get(&rational_shadow(place))
            .map(|c| (c.as_slice(), place.local_degree_ratio())))
    }
}

fn rational_shadow(place: &Place) -> Place {
    Place {
        field: NumberField::Rationals,
        kind: match place.below() {
            RationalPlace::Infinity => PlaceKind::ArchRational,
            RationalPlace::Prime(p) => PlaceKind::FiniteRational { p },
        },
    }
}

/// Promotes coordinates into the smallest field containing both the point
/// and the weight data.
fn unify_coords(coords: &[FieldElement], base: NumberField) -> Result<Vec<FieldElement>> {
    if coords.is_empty() {
        return Err(CoreError::Invalid("empty coordinate vector".into()));
    }
    let mut field = base;
    for x in coords {
        match (field, x.field) {
            (a, b) if a == b => {}
            (NumberField::Rationals, b) => field = b,
            (_, NumberField::Rationals) => {}
            _ => {
                return Err(CoreError::FieldMismatch(
                    "coordinates and weights live over incompatible quadratic fields".into(),
                ))
            }
        }
    }
    coords.iter().map(|x| x.promote(field)).collect()
}

fn max_log(candidates: Vec<LogHeight>) -> Result<LogHeight> {
    let mut iter = candidates.into_iter();
    let mut best = iter
        .next()
        .ok_or_else(|| CoreError::Invalid("maximum of an empty set".into()))?;
    for cand in iter {
        if cand.cmp3(&best)? == Ordering::Greater {
            best = cand;
        }
    }
    Ok(best)
}

fn require_unit_or_more(log_q: &LogHeight) -> Result<()> {
    if log_q.sign3()? == Ordering::Less {
        return Err(CoreError::Invalid("twist parameter is below one".into()));
    }
    Ok(())
}

/// Height of a projective point after scaling coordinate i by Q^{c_iv} at
/// each place: per place the maximum of log|y_i| + c_iv log Q over nonzero
/// coordinates, summed over all places of the point's field. Weights at a
/// place of the family's field apply to every place above it, scaled by
/// the local degree ratio. Requires Q at least one.
pub fn twisted_height(
    log_q: &LogHeight,
    family: &WeightFamily,
    coords: &[FieldElement],
) -> Result<LogHeight> {
    require_unit_or_more(log_q)?;
    if coords.len() != family.width {
        return Err(CoreError::Invalid(format!(
            "point has {} coordinates, family wants {}",
            coords.len(),
            family.width
        )));
    }
    if coords.iter().all(FieldElement::is_zero) {
        return Err(CoreError::Invalid("height of the zero vector".into()));
    }
    let coords = unify_coords(coords, family.field)?;
    let field = coords[0].field;
    let mut primes = relevant_primes(&coords)?;
    for place in family.entries.keys() {
        if let Some(p) = place.residue_prime() {
            primes.insert(p);
        }
    }
    let mut places = places_above(field, RationalPlace::Infinity);
    for p in primes {
        places.extend(places_above(field, RationalPlace::Prime(p)));
    }
    let mut total = LogHeight::zero();
    for w in &places {
        let weight = family.scaled_at(w)?;
        let mut candidates = Vec::new();
        for (i, y) in coords.iter().enumerate() {
            if y.is_zero() {
                continue;
            }
            let mut v = log_abs(y, w)?;
            if let Some((c, factor)) = &weight {
                let e = &c[i] * factor;
                if !e.is_zero() {
                    v = v.add(&log_q.scale(&e));
                }
            }
            candidates.push(v);
        }
        total = total.add(&max_log(candidates)?);
    }
    Ok(total)
}

/// Sum over places of the normalized Chow weight of the family's vectors.
/// Exact rational; zero for an empty family.
pub fn normalized_family_weight(y: &VarietySpec, family: &WeightFamily) -> Result<Rational> {
    if family.width != y.ambient_dim() + 1 {
        return Err(CoreError::Invalid(
            "weight family width does not match the ambient space".into(),
        ));
    }
    let fm = chow_form(y)?;
    let mut total = Rational::zero();
    for c in family.entries.values() {
        total += &normalized_chow_weight(&fm, c)?;
    }
    Ok(total)
}

/// Weights dual to a family, supported on the optimal degree-m monomial
/// basis at each place. Entries at one place sum to zero exactly, and the
/// per-place maxima sum to at most one.
#[derive(Debug, Clone)]
pub struct DualWeightData {
    pub field: NumberField,
    pub m: u32,
    /// Number of degree-m monomials in the ambient coordinates.
    pub width: usize,
    /// Dimension of the degree-m coordinate ring piece.
    pub hilbert: usize,
    /// Optimal basis for the zero weight, used at places off the support.
    pub default_support: Vec<usize>,
    pub entries: BTreeMap<Place, DualPlace>,
}

/// Chosen basis and dual weights at one place; `d` is parallel to
/// `support`, which indexes the canonical degree-m monomial order.
#[derive(Debug, Clone)]
pub struct DualPlace {
    pub support: Vec<usize>,
    pub d: Vec<Rational>,
}

impl DualWeightData {
    /// Basis and weights seen from a place of the working field: the entry
    /// at the place below when there is one, the default basis otherwise.
    fn view_at(&self, place: &Place) -> Result<(&[usize], Option<&[Rational]>, Rational)> {
        let key = if place.field == self.field {
            *place
        } else if self.field == NumberField::Rationals {
            rational_shadow(place)
        } else {
            return Err(CoreError::FieldMismatch(
                "dual weights over a quadratic field only apply to points of that field".into(),
            ));
        };
        let factor = if place.field == self.field {
            Rational::one()
        } else {
            place.local_degree_ratio()
        };
        Ok(match self.entries.get(&key) {
            Some(dp) => (&dp.support, Some(&dp.d), factor),
            None => (&self.default_support, None, factor),
        })
    }
}

fn dual_weights_on_piece(
    piece: &GradedPiece,
    family: &WeightFamily,
) -> Result<DualWeightData> {
    let hilbert = piece.hilbert_value();
    let width = piece.monomials.len();
    let zero_c = vec![Rational::zero(); family.width];
    let (_, default_support) = hilbert_weight_on_piece(piece, &zero_c)?;
    let m_rat = rat_i64(i64::from(piece.m));
    let mh = &m_rat * rat_i64(hilbert as i64);
    let mut entries = BTreeMap::new();
    let mut max_total = Rational::zero();
    for (place, c) in &family.entries {
        let (s_raw, support) = hilbert_weight_on_piece(piece, c)?;
        let shift = &s_raw / &mh;
        let mut d = Vec::with_capacity(support.len());
        let mut sum = Rational::zero();
        for &i in &support {
            let di = &shift - &(piece.monomials[i].weight(c) / &m_rat);
            sum += &di;
            d.push(di);
        }
        if !sum.is_zero() {
            return Err(CoreError::Invalid(
                "dual weights failed to balance at a place".into(),
            ));
        }
        let top = d.iter().max().cloned().unwrap_or_else(Rational::zero);
        if top.is_positive() {
            max_total += &top;
        }
        entries.insert(*place, DualPlace { support, d });
    }
    if max_total > Rational::one() {
        return Err(CoreError::Invalid(format!(
            "dual weight maxima sum to {max_total}, above one"
        )));
    }
    Ok(DualWeightData {
        field: family.field,
        m: piece.m,
        width,
        hilbert,
        default_support,
        entries,
    })
}

/// Dual weights of a family on the degree-m coordinate ring of the
/// variety. Requires m above the variety degree.
pub fn dual_weights(y: &VarietySpec, m: u32, family: &WeightFamily) -> Result<DualWeightData> {
    let dd = degree_dimension(y)?;
    if u64::from(m) <= dd.degree {
        return Err(CoreError::Invalid(format!(
            "dual weights need degree above {}, got {m}",
            dd.degree
        )));
    }
    if family.width != y.ambient_dim() + 1 {
        return Err(CoreError::Invalid(
            "weight family width does not match the ambient space".into(),
        ));
    }
    dual_weights_on_piece(&ideal_piece(y, m)?, family)
}

/// Linear forms expressing each degree-m monomial class over the chosen
/// basis classes of the coordinate ring: row j gives the coefficients of
/// monomial j, so basis rows are unit vectors and evaluating row j on the
/// basis monomials of a variety point recovers the j-th monomial value.
#[derive(Debug, Clone)]
pub struct SpanData {
    pub monomials: Vec<Monomial>,
    pub basis: Vec<usize>,
    pub forms: Vec<Vec<Rational>>,
}

fn span_on_piece(piece: &GradedPiece) -> Result<SpanData> {
    let width = piece.monomials.len();
    let hilbert = piece.hilbert_value();
    let nvars = piece.monomials.first().map_or(0, Monomial::nvars);
    let zero_c = vec![Rational::zero(); nvars];
    let (_, basis) = hilbert_weight_on_piece(piece, &zero_c)?;
    let pivots: BTreeSet<usize> = piece
        .span
        .basis()
        .iter()
        .map(|row| {
            row.iter()
                .position(|x| !x.is_zero())
                .expect("zero row in a reduced basis")
        })
        .collect();
    let anchor: Vec<usize> = (0..width).filter(|i| !pivots.contains(i)).collect();
    let residue = |j: usize| -> Vec<Rational> {
        let mut unit = vec![Rational::zero(); width];
        unit[j] = Rational::one();
        let red = piece.span.reduce(&unit);
        anchor.iter().map(|&a| red[a].clone()).collect()
    };
    let basis_cols: Vec<Vec<Rational>> = basis.iter().map(|&b| residue(b)).collect();
    let convert = QMatrix::from_rows(basis_cols)?.transpose().inverse()?;
    let mut forms = Vec::with_capacity(width);
    for j in 0..width {
        if let Some(k) = basis.iter().position(|&b| b == j) {
            let mut row = vec![Rational::zero(); hilbert];
            row[k] = Rational::one();
            forms.push(row);
        } else {
            forms.push(convert.mul_vec(&residue(j))?);
        }
    }
    Ok(SpanData {
        monomials: piece.monomials.clone(),
        basis,
        forms,
    })
}

/// Coordinates of every degree-m monomial class over the chosen monomial
/// basis of the degree-m coordinate ring.
pub fn span_isomorphism(y: &VarietySpec, m: u32) -> Result<SpanData> {
    span_on_piece(&ideal_piece(y, m)?)
}

fn system_shape(forms: &[Vec<Rational>]) -> Result<(usize, usize)> {
    let w = forms.len();
    let h = forms.first().map_or(0, Vec::len);
    if w == 0 || h == 0 || w < h {
        return Err(CoreError::Invalid(
            "a linear system needs at least as many forms as variables".into(),
        ));
    }
    if forms.iter().any(|row| row.len() != h) {
        return Err(CoreError::Invalid("ragged linear system".into()));
    }
    Ok((w, h))
}

fn basis_det(forms: &[Vec<Rational>], subset: &[usize]) -> Result<Rational> {
    QMatrix::from_rows(subset.iter().map(|&i| forms[i].clone()).collect())?.det()
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Height of the per-place chosen maximal minors of a linear system. The
/// minor at places outside `supports` is the default one, whose total
/// contribution collapses by the product formula, so the sum is finite.
pub fn support_determinant_height(
    forms: &[Vec<Rational>],
    supports: &BTreeMap<Place, Vec<usize>>,
    default_support: &[usize],
) -> Result<LogHeight> {
    let (_, h) = system_shape(forms)?;
    if default_support.len() != h {
        return Err(CoreError::Invalid("default basis has the wrong size".into()));
    }
    let d0 = basis_det(forms, default_support)?;
    if d0.is_zero() {
        return Err(CoreError::Invalid("default basis is degenerate".into()));
    }
    let mut total = LogHeight::zero();
    for (place, subset) in supports {
        if subset.len() != h {
            return Err(CoreError::Invalid("chosen basis has the wrong size".into()));
        }
        let dv = basis_det(forms, subset)?;
        if dv.is_zero() {
            return Err(CoreError::Invalid(
                "chosen basis is degenerate at a place".into(),
            ));
        }
        let num = FieldElement::from_rational(place.field, dv);
        let den = FieldElement::from_rational(place.field, d0.clone());
        total = total.add(&log_abs(&num, place)?).sub(&log_abs(&den, place)?);
    }
    Ok(total)
}

/// The height of the full maximal-minor vector of a linear system and the
/// height of the per-place chosen minors. The chosen value can lag the
/// maximum by at most the subset-count exponent; that envelope is checked
/// exactly before returning.
pub fn determinant_heights(
    forms: &[Vec<Rational>],
    supports: &BTreeMap<Place, Vec<usize>>,
    default_support: &[usize],
) -> Result<(LogHeight, LogHeight)> {
    let (w, h) = system_shape(forms)?;
    let count = binomial(w as u64, h as u64);
    if count > BigInt::from(MINOR_GUARD) {
        return Err(CoreError::SizeGuard(format!(
            "{count} maximal minors, guard {MINOR_GUARD}"
        )));
    }
    let mut minors = Vec::new();
    for subset in subsets_of_size(w, h) {
        minors.push(basis_det(forms, &subset)?);
    }
    if minors.iter().all(Rational::is_zero) {
        return Err(CoreError::Invalid("the linear system has deficient rank".into()));
    }
    let coords: Vec<FieldElement> = minors
        .iter()
        .map(|q| FieldElement::from_rational(NumberField::Rationals, q.clone()))
        .collect();
    let max_height = point_height(&coords)?;
    let chosen_height = support_determinant_height(forms, supports, default_support)?;
    let floor = max_height.scale(&(Rational::one() - rat_i64(minors.len() as i64)));
    if chosen_height.sub(&floor).sign3()? == Ordering::Less {
        return Err(CoreError::Invalid(
            "chosen determinants fell below the generic envelope".into(),
        ));
    }
    Ok((max_height, chosen_height))
}

fn dot(row: &[Rational], x: &[FieldElement]) -> Result<FieldElement> {
    if row.len() != x.len() {
        return Err(CoreError::Invalid("linear form arity mismatch".into()));
    }
    let field = x[0].field;
    let mut acc = FieldElement::zero(field);
    for (c, xi) in row.iter().zip(x) {
        if !c.is_zero() && !xi.is_zero() {
            acc = &acc + &(xi * &FieldElement::from_rational(field, c.clone()));
        }
    }
    Ok(acc)
}

/// Height of the evaluated linear system under dual twisting: per place
/// the maximum of log|L_i(x)| - d_iv log Q over the basis chosen at the
/// place below, summed over all places. Errors when every chosen form
/// vanishes at the point.
pub fn dual_twisted_height(
    log_q: &LogHeight,
    data: &DualWeightData,
    forms: &[Vec<Rational>],
    coords: &[FieldElement],
) -> Result<LogHeight> {
    require_unit_or_more(log_q)?;
    if forms.len() != data.width {
        return Err(CoreError::Invalid(format!(
            "system has {} forms, dual weights want {}",
            forms.len(),
            data.width
        )));
    }
    let coords = unify_coords(coords, data.field)?;
    let field = coords[0].field;
    let values: Vec<FieldElement> = forms
        .iter()
        .map(|row| dot(row, &coords))
        .collect::<Result<_>>()?;
    let mut used: BTreeSet<usize> = data.default_support.iter().copied().collect();
    for dp in data.entries.values() {
        used.extend(dp.support.iter().copied());
    }
    if used.iter().any(|&i| i >= values.len()) {
        return Err(CoreError::Invalid("basis index outside the system".into()));
    }
    let live: Vec<FieldElement> = used
        .iter()
        .map(|&i| values[i].clone())
        .filter(|v| !v.is_zero())
        .collect();
    if live.is_empty() {
        return Err(CoreError::Invalid(
            "every chosen form vanishes at the point".into(),
        ));
    }
    let mut primes = relevant_primes(&live)?;
    for place in data.entries.keys() {
        if let Some(p) = place.residue_prime() {
            primes.insert(p);
        }
    }
    let mut places = places_above(field, RationalPlace::Infinity);
    for p in primes {
        places.extend(places_above(field, RationalPlace::Prime(p)));
    }
    let mut total = LogHeight::zero();
    for w in &places {
        let (support, d, factor) = data.view_at(w)?;
        let mut candidates = Vec::new();
        for (k, &i) in support.iter().enumerate() {
            if values[i].is_zero() {
                continue;
            }
            let mut v = log_abs(&values[i], w)?;
            if let Some(ds) = d {
                let e = &ds[k] * &factor;
                if !e.is_zero() {
                    v = v.sub(&log_q.scale(&e));
                }
            }
            candidates.push(v);
        }
        if candidates.is_empty() {
            return Err(CoreError::Invalid(
                "every chosen form vanishes at the point".into(),
            ));
        }
        total = total.add(&max_log(candidates)?);
    }
    Ok(total)
}

/// Auxiliary degree floor((4n+3) D / delta) for dimension n and degree D.
pub fn suggested_degree(dim: usize, degree: u64, delta: &Rational) -> Result<u32> {
    if !delta.is_positive() {
        return Err(CoreError::Invalid("delta must be positive".into()));
    }
    let num = rat_i64((4 * dim as i64 + 3) * degree as i64) / delta;
    num.floor()
        .to_integer()
        .to_u32()
        .ok_or_else(|| CoreError::SizeGuard("auxiliary degree overflows".into()))
}

/// Three-valued outcome of one inequality in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainVerdict {
    Holds,
    Fails,
    Undecided,
}

fn verdict(sign: Result<Ordering>) -> Result<ChainVerdict> {
    match sign {
        Ok(Ordering::Less) => Ok(ChainVerdict::Fails),
        Ok(_) => Ok(ChainVerdict::Holds),
        Err(CoreError::Undecidable { .. }) => Ok(ChainVerdict::Undecided),
        Err(e) => Err(e),
    }
}

fn established_le(diff: &LogHeight) -> Result<bool> {
    match diff.sign3() {
        Ok(Ordering::Greater) => Ok(false),
        Ok(_) => Ok(true),
        Err(CoreError::Undecidable { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Everything fixed by a variety, a weight family, and a gap parameter:
/// the auxiliary degree, the dual weights, the span forms, and the chosen
/// determinant height.
#[derive(Debug, Clone)]
pub struct DualSetup {
    pub variety: VarietySpec,
    pub family: WeightFamily,
    pub delta: Rational,
    pub m: u32,
    /// Normalized Chow weight of the family on the variety.
    pub expected_weight: Rational,
    /// Sum over places of the chosen basis weight divided by m times the
    /// basis size; the per-degree exponent drop of the pullback.
    pub shift: Rational,
    pub dual: DualWeightData,
    pub span: SpanData,
    pub det_height: LogHeight,
    span_rows: Vec<Vec<Rational>>,
}

/// Outcome of the pullback inequality chain at one point and parameter.
#[derive(Debug, Clone)]
pub struct DualChainReport {
    pub m: u32,
    /// Twisted height of the point.
    pub twisted: LogHeight,
    /// Dual twisted height of the point's basis-monomial image at
    /// parameter Q^m.
    pub dual: LogHeight,
    /// m (twisted - shift log Q) minus the dual height; the pullback
    /// inequality holds when this is nonnegative.
    pub pullback_slack: LogHeight,
    pub pullback: ChainVerdict,
    /// Whether the twisted height was established to sit below
    /// Q^{expected_weight - delta}.
    pub small_height: bool,
    /// Whether delta m hilbert log Q was established to dominate six times
    /// the chosen determinant height.
    pub parameter_large_enough: bool,
    /// Verdict on the dual height falling below the determinant envelope,
    /// present only when both hypotheses are established.
    pub conclusion: Option<ChainVerdict>,
}

impl DualSetup {
    pub fn new(y: &VarietySpec, family: &WeightFamily, delta: &Rational) -> Result<DualSetup> {
        let dd = degree_dimension(y)?;
        let m = suggested_degree(dd.dim, dd.degree, delta)?;
        DualSetup::with_degree(y, family, delta, m)
    }

    pub fn with_degree(
        y: &VarietySpec,
        family: &WeightFamily,
        delta: &Rational,
        m: u32,
    ) -> Result<DualSetup> {
        if !delta.is_positive() || *delta > Rational::one() {
            return Err(CoreError::Invalid("delta must lie in (0, 1]".into()));
        }
        let dd = degree_dimension(y)?;
        if u64::from(m) <= dd.degree {
            return Err(CoreError::Invalid(format!(
                "auxiliary degree must exceed the variety degree {}",
                dd.degree
            )));
        }
        if family.width != y.ambient_dim() + 1 {
            return Err(CoreError::Invalid(
                "weight family width does not match the ambient space".into(),
            ));
        }
        let expected_weight = normalized_family_weight(y, family)?;
        let piece = ideal_piece(y, m)?;
        let dual = dual_weights_on_piece(&piece, family)?;
        let span = span_on_piece(&piece)?;
        let m_rat = rat_i64(i64::from(m));
        let mh = &m_rat * rat_i64(dual.hilbert as i64);
        let mut shift = Rational::zero();
        for (place, dp) in &dual.entries {
            let c = &family.entries[place];
            let raw: Rational = dp
                .support
                .iter()
                .map(|&i| span.monomials[i].weight(c))
                .sum();
            shift += &(&raw / &mh);
        }
        let supports: BTreeMap<Place, Vec<usize>> = dual
            .entries
            .iter()
            .map(|(p, dp)| (*p, dp.support.clone()))
            .collect();
        let det_height =
            support_determinant_height(&span.forms, &supports, &dual.default_support)?;
        Ok(DualSetup {
            variety: y.clone(),
            family: family.clone(),
            delta: delta.clone(),
            m,
            expected_weight,
            shift,
            dual,
            span,
            det_height,
            span_rows: piece.span.basis().to_vec(),
        })
    }

    /// Evaluates the chain at one variety point. The point is checked
    /// against the degree-m piece of the ideal before anything else.
    pub fn report(&self, coords: &[FieldElement], log_q: &LogHeight) -> Result<DualChainReport> {
        let coords = unify_coords(coords, self.family.field)?;
        let mono_values: Vec<FieldElement> = self
            .span
            .monomials
            .iter()
            .map(|mo| mo.evaluate(&coords))
            .collect();
        for row in &self.span_rows {
            if !dot(row, &mono_values)?.is_zero() {
                return Err(CoreError::Invalid(
                    "the point does not lie on the variety".into(),
                ));
            }
        }
        let twisted = twisted_height(log_q, &self.family, &coords)?;
        let image: Vec<FieldElement> = self
            .span
            .basis
            .iter()
            .map(|&b| mono_values[b].clone())
            .collect();
        let m_rat = rat_i64(i64::from(self.m));
        let log_qm = log_q.scale(&m_rat);
        let dual = dual_twisted_height(&log_qm, &self.dual, &self.span.forms, &image)?;
        let rhs = twisted
            .scale(&m_rat)
            .sub(&log_q.scale(&(&m_rat * &self.shift)));
        let pullback_slack = rhs.sub(&dual);
        let pullback = verdict(pullback_slack.sign3())?;
        let gap = &self.expected_weight - &self.delta;
        let small_height = established_le(&twisted.sub(&log_q.scale(&gap)))?;
        let hilbert_rat = rat_i64(self.dual.hilbert as i64);
        let threshold = log_q
            .scale(&(&(&self.delta * &m_rat) * &hilbert_rat))
            .sub(&self.det_height.scale(&rat_i64(6)));
        let parameter_large_enough = established_le(&threshold.neg())?;
        let conclusion = if small_height && parameter_large_enough {
            let bound = self
                .det_height
                .scale(&hilbert_rat.recip())
                .sub(&log_qm.scale(&(&self.delta / rat_i64(3))));
            Some(verdict(bound.sub(&dual).sign3())?)
        } else {
            None
        };
        Ok(DualChainReport {
            m: self.m,
            twisted,
            dual,
            pullback_slack,
            pullback,
            small_height,
            parameter_large_enough,
            conclusion,
        })
    }
}
