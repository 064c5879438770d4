//! Multihomogeneous polynomials over several blocks of variables, with
//! either number-field or quadratic-surd coefficients. The exponent vector
//! of a term is flattened across blocks; each term must be homogeneous of
//! the declared degree inside every block.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::rational::Rational;
use crate::error::{CoreError, Result};
use crate::poly::homog::HomogeneousPoly;
use crate::poly::monomial::Monomial;
use crate::poly::surd::QuadraticSurd;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoeffMap {
    Field(NumberField, BTreeMap<Monomial, FieldElement>),
    Surd(BTreeMap<Monomial, QuadraticSurd>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPoly {
    blocks: Vec<usize>,
    degrees: Vec<u32>,
    terms: CoeffMap,
}

impl BlockPoly {
    pub fn zero_field(blocks: Vec<usize>, degrees: Vec<u32>, field: NumberField) -> Self {
        assert_eq!(blocks.len(), degrees.len());
        BlockPoly {
            blocks,
            degrees,
            terms: CoeffMap::Field(field, BTreeMap::new()),
        }
    }

    pub fn zero_surd(blocks: Vec<usize>, degrees: Vec<u32>) -> Self {
        assert_eq!(blocks.len(), degrees.len());
        BlockPoly {
            blocks,
            degrees,
            terms: CoeffMap::Surd(BTreeMap::new()),
        }
    }

    pub fn from_field_terms(
        blocks: Vec<usize>,
        terms: Vec<(Vec<u32>, FieldElement)>,
        field: NumberField,
    ) -> Result<Self> {
        let degrees = infer_degrees(&blocks, terms.first().map(|(e, _)| e.as_slice()))?;
        let mut map: BTreeMap<Monomial, FieldElement> = BTreeMap::new();
        for (exps, c) in terms {
            check_term(&blocks, &degrees, &exps)?;
            let c = c.promote(field)?;
            let m = Monomial(exps);
            match map.entry(m) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = &*e.get() + &c;
                    *e.get_mut() = sum;
                }
            }
        }
        map.retain(|_, c| !c.is_zero());
        Ok(BlockPoly {
            blocks,
            degrees,
            terms: CoeffMap::Field(field, map),
        })
    }

    pub fn from_surd_terms(
        blocks: Vec<usize>,
        terms: Vec<(Vec<u32>, QuadraticSurd)>,
    ) -> Result<Self> {
        let degrees = infer_degrees(&blocks, terms.first().map(|(e, _)| e.as_slice()))?;
        let mut map: BTreeMap<Monomial, QuadraticSurd> = BTreeMap::new();
        for (exps, c) in terms {
            check_term(&blocks, &degrees, &exps)?;
            let m = Monomial(exps);
            match map.entry(m) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(&c)?;
                    *e.get_mut() = sum;
                }
            }
        }
        map.retain(|_, c| !c.is_zero());
        Ok(BlockPoly {
            blocks,
            degrees,
            terms: CoeffMap::Surd(map),
        })
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn total_vars(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn num_terms(&self) -> usize {
        match &self.terms {
            CoeffMap::Field(_, m) => m.len(),
            CoeffMap::Surd(m) => m.len(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num_terms() == 0
    }

    pub fn field(&self) -> Option<NumberField> {
        match &self.terms {
            CoeffMap::Field(f, _) => Some(*f),
            CoeffMap::Surd(_) => None,
        }
    }

    pub fn field_terms(&self) -> Option<&BTreeMap<Monomial, FieldElement>> {
        match &self.terms {
            CoeffMap::Field(_, m) => Some(m),
            CoeffMap::Surd(_) => None,
        }
    }

    pub fn surd_terms(&self) -> Option<&BTreeMap<Monomial, QuadraticSurd>> {
        match &self.terms {
            CoeffMap::Surd(m) => Some(m),
            CoeffMap::Field(..) => None,
        }
    }

    pub fn support(&self) -> Vec<&Monomial> {
        match &self.terms {
            CoeffMap::Field(_, m) => m.keys().collect(),
            CoeffMap::Surd(m) => m.keys().collect(),
        }
    }

    /// First term in the canonical monomial order.
    pub fn leading(&self) -> Option<&Monomial> {
        self.support().into_iter().next()
    }

    pub fn block_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut start = 0;
        for &b in &self.blocks {
            out.push(start..start + b);
            start += b;
        }
        out
    }

    fn check_shape(&self, other: &BlockPoly) -> Result<()> {
        if self.blocks != other.blocks {
            return Err(CoreError::Invalid("block structure mismatch".into()));
        }
        match (&self.terms, &other.terms) {
            (CoeffMap::Field(f, _), CoeffMap::Field(g, _)) if f == g => Ok(()),
            (CoeffMap::Surd(_), CoeffMap::Surd(_)) => Ok(()),
            _ => Err(CoreError::Invalid(
                "cannot mix surd and field coefficients".into(),
            )),
        }
    }

    pub fn add(&self, other: &BlockPoly) -> Result<BlockPoly> {
        self.check_shape(other)?;
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.degrees != other.degrees {
            return Err(CoreError::Invalid(
                "adding block forms of different multidegrees".into(),
            ));
        }
        let terms = match (&self.terms, &other.terms) {
            (CoeffMap::Field(f, a), CoeffMap::Field(_, b)) => {
                let mut map = a.clone();
                for (m, c) in b {
                    match map.entry(m.clone()) {
                        std::collections::btree_map::Entry::Vacant(e) => {
                            e.insert(c.clone());
                        }
                        std::collections::btree_map::Entry::Occupied(mut e) => {
                            let sum = &*e.get() + c;
                            *e.get_mut() = sum;
                        }
                    }
                }
                map.retain(|_, c| !c.is_zero());
                CoeffMap::Field(*f, map)
            }
            (CoeffMap::Surd(a), CoeffMap::Surd(b)) => {
                let mut map = a.clone();
                for (m, c) in b {
                    match map.entry(m.clone()) {
                        std::collections::btree_map::Entry::Vacant(e) => {
                            e.insert(c.clone());
                        }
                        std::collections::btree_map::Entry::Occupied(mut e) => {
                            let sum = e.get().add(c)?;
                            *e.get_mut() = sum;
                        }
                    }
                }
                map.retain(|_, c| !c.is_zero());
                CoeffMap::Surd(map)
            }
            _ => unreachable!(),
        };
        Ok(BlockPoly {
            blocks: self.blocks.clone(),
            degrees: self.degrees.clone(),
            terms,
        })
    }

    pub fn neg(&self) -> BlockPoly {
        let terms = match &self.terms {
            CoeffMap::Field(f, m) => CoeffMap::Field(
                *f,
                m.iter()
                    .map(|(k, c)| (k.clone(), &FieldElement::from_i64(*f, -1) * c))
                    .collect(),
            ),
            CoeffMap::Surd(m) => {
                CoeffMap::Surd(m.iter().map(|(k, c)| (k.clone(), c.neg())).collect())
            }
        };
        BlockPoly {
            blocks: self.blocks.clone(),
            degrees: self.degrees.clone(),
            terms,
        }
    }

    pub fn sub(&self, other: &BlockPoly) -> Result<BlockPoly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &BlockPoly) -> Result<BlockPoly> {
        self.check_shape(other)?;
        let degrees: Vec<u32> = self
            .degrees
            .iter()
            .zip(&other.degrees)
            .map(|(a, b)| a + b)
            .collect();
        let terms = match (&self.terms, &other.terms) {
            (CoeffMap::Field(f, a), CoeffMap::Field(_, b)) => {
                let mut map: BTreeMap<Monomial, FieldElement> = BTreeMap::new();
                for (ma, ca) in a {
                    for (mb, cb) in b {
                        let m = ma.mul(mb);
                        let c = ca * cb;
                        match map.entry(m) {
                            std::collections::btree_map::Entry::Vacant(e) => {
                                e.insert(c);
                            }
                            std::collections::btree_map::Entry::Occupied(mut e) => {
                                let sum = &*e.get() + &c;
                                *e.get_mut() = sum;
                            }
                        }
                    }
                }
                map.retain(|_, c| !c.is_zero());
                CoeffMap::Field(*f, map)
            }
            (CoeffMap::Surd(a), CoeffMap::Surd(b)) => {
                let mut map: BTreeMap<Monomial, QuadraticSurd> = BTreeMap::new();
                for (ma, ca) in a {
                    for (mb, cb) in b {
                        let m = ma.mul(mb);
                        let c = ca.mul(cb);
                        match map.entry(m) {
                            std::collections::btree_map::Entry::Vacant(e) => {
                                e.insert(c);
                            }
                            std::collections::btree_map::Entry::Occupied(mut e) => {
                                let sum = e.get().add(&c)?;
                                *e.get_mut() = sum;
                            }
                        }
                    }
                }
                map.retain(|_, c| !c.is_zero());
                CoeffMap::Surd(map)
            }
            _ => unreachable!(),
        };
        Ok(BlockPoly {
            blocks: self.blocks.clone(),
            degrees,
            terms,
        })
    }

    pub fn scale_rational(&self, q: &Rational) -> BlockPoly {
        let terms = match &self.terms {
            CoeffMap::Field(f, m) => CoeffMap::Field(
                *f,
                if q.is_zero() {
                    BTreeMap::new()
                } else {
                    m.iter()
                        .map(|(k, c)| {
                            (
                                k.clone(),
                                c * &FieldElement::from_rational(*f, q.clone()),
                            )
                        })
                        .collect()
                },
            ),
            CoeffMap::Surd(m) => CoeffMap::Surd(if q.is_zero() {
                BTreeMap::new()
            } else {
                m.iter()
                    .map(|(k, c)| (k.clone(), c.mul(&QuadraticSurd::rational(q.clone()))))
                    .collect()
            }),
        };
        BlockPoly {
            blocks: self.blocks.clone(),
            degrees: self.degrees.clone(),
            terms,
        }
    }

    /// Substitutes factor[j] * v_j for each variable v_j. Coefficients
    /// become surds; each input term maps to exactly one output term.
    pub fn scale_variables(&self, factors: &[QuadraticSurd]) -> Result<BlockPoly> {
        if factors.len() != self.total_vars() {
            return Err(CoreError::Invalid("one scale factor per variable".into()));
        }
        let base: Vec<(Monomial, QuadraticSurd)> = match &self.terms {
            CoeffMap::Surd(m) => m.iter().map(|(k, c)| (k.clone(), c.clone())).collect(),
            CoeffMap::Field(f, m) => {
                if *f != NumberField::Rationals {
                    return Err(CoreError::Invalid(
                        "variable scaling needs rational or surd coefficients".into(),
                    ));
                }
                m.iter()
                    .map(|(k, c)| (k.clone(), QuadraticSurd::rational(c.a.clone())))
                    .collect()
            }
        };
        let mut out: BTreeMap<Monomial, QuadraticSurd> = BTreeMap::new();
        for (m, c) in base {
            let mut c = c;
            for (j, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    c = c.mul(&factors[j]);
                }
            }
            if !c.is_zero() && out.insert(m, c).is_some() {
                unreachable!("variable scaling is term-bijective");
            }
        }
        Ok(BlockPoly {
            blocks: self.blocks.clone(),
            degrees: self.degrees.clone(),
            terms: CoeffMap::Surd(out),
        })
    }

    /// Exact evaluation for field-coefficient polynomials; the flattened
    /// point must list every block's coordinates in order.
    pub fn evaluate_field(&self, x: &[FieldElement]) -> Result<FieldElement> {
        let CoeffMap::Field(field, map) = &self.terms else {
            return Err(CoreError::Invalid(
                "exact evaluation needs field coefficients".into(),
            ));
        };
        if x.len() != self.total_vars() {
            return Err(CoreError::Invalid("evaluation arity mismatch".into()));
        }
        let target = x
            .iter()
            .find(|c| c.field != NumberField::Rationals)
            .map(|c| c.field)
            .unwrap_or(*field);
        let lifted: Vec<FieldElement> = x
            .iter()
            .map(|c| c.promote(target))
            .collect::<Result<_>>()?;
        let mut acc = FieldElement::zero(target);
        for (m, c) in map {
            acc = &acc + &(&c.promote(target)? * &m.evaluate(&lifted));
        }
        Ok(acc)
    }

    /// Terms with coefficients embedded into complex floats, for sampling.
    /// `second` picks the other real embedding where one exists.
    pub fn complex_terms(&self, second: bool) -> Vec<(Vec<u32>, (f64, f64))> {
        match &self.terms {
            CoeffMap::Field(field, m) => m
                .iter()
                .map(|(k, c)| {
                    let z = match field {
                        NumberField::Quadratic { d } if *d < 0 => c.embed_complex(),
                        _ => (c.embed_f64(second), 0.0),
                    };
                    (k.0.clone(), z)
                })
                .collect(),
            CoeffMap::Surd(m) => m
                .iter()
                .map(|(k, c)| (k.0.clone(), (c.to_f64(), 0.0)))
                .collect(),
        }
    }

    /// Divides out the rational content and fixes the sign so the leading
    /// coefficient is positive. Rational-coefficient polynomials only.
    /// Returns the primitive polynomial and the removed content.
    pub fn primitive_normalized(&self) -> Result<(BlockPoly, Rational)> {
        let CoeffMap::Field(field, map) = &self.terms else {
            return Err(CoreError::Invalid(
                "content normalization needs rational coefficients".into(),
            ));
        };
        if *field != NumberField::Rationals {
            return Err(CoreError::Invalid(
                "content normalization needs rational coefficients".into(),
            ));
        }
        if map.is_empty() {
            return Err(CoreError::Invalid("zero polynomial has no content".into()));
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in map.values() {
            num_gcd = num_gcd.gcd(c.a.numer());
            den_lcm = den_lcm.lcm(c.a.denom());
        }
        let mut content = Rational::new(num_gcd, den_lcm);
        let leading_sign = map.values().next().unwrap().a.is_negative();
        if leading_sign {
            content = -content;
        }
        let inv = content.recip();
        let out = map
            .iter()
            .map(|(m, c)| {
                (
                    m.clone(),
                    FieldElement::from_rational(NumberField::Rationals, &c.a * &inv),
                )
            })
            .collect();
        Ok((
            BlockPoly {
                blocks: self.blocks.clone(),
                degrees: self.degrees.clone(),
                terms: CoeffMap::Field(NumberField::Rationals, out),
            },
            content,
        ))
    }
}

fn infer_degrees(blocks: &[usize], first: Option<&[u32]>) -> Result<Vec<u32>> {
    let total: usize = blocks.iter().sum();
    let Some(exps) = first else {
        return Err(CoreError::Invalid(
            "cannot infer multidegree from an empty term list".into(),
        ));
    };
    if exps.len() != total {
        return Err(CoreError::Invalid("exponent vector length mismatch".into()));
    }
    let mut degrees = Vec::with_capacity(blocks.len());
    let mut start = 0;
    for &b in blocks {
        degrees.push(exps[start..start + b].iter().sum());
        start += b;
    }
    Ok(degrees)
}

fn check_term(blocks: &[usize], degrees: &[u32], exps: &[u32]) -> Result<()> {
    let total: usize = blocks.iter().sum();
    if exps.len() != total {
        return Err(CoreError::Invalid("exponent vector length mismatch".into()));
    }
    let mut start = 0;
    for (&b, &d) in blocks.iter().zip(degrees) {
        let got: u32 = exps[start..start + b].iter().sum();
        if got != d {
            return Err(CoreError::Invalid(format!(
                "term has degree {got} in a block declared degree {d}"
            )));
        }
        start += b;
    }
    Ok(())
}

/// Substitutes block polynomials for the variables of a homogeneous form.
/// All images must share block structure and multidegree.
pub fn substitute(f: &HomogeneousPoly, images: &[BlockPoly]) -> Result<BlockPoly> {
    if images.len() != f.nvars() {
        return Err(CoreError::Invalid("substitution arity mismatch".into()));
    }
    let blocks = images[0].blocks().to_vec();
    let unit_degrees = images[0].degrees().to_vec();
    let field = images[0]
        .field()
        .ok_or_else(|| CoreError::Invalid("field coefficients required".into()))?;
    for g in images {
        if g.blocks() != blocks || g.degrees() != unit_degrees || g.field() != Some(field) {
            return Err(CoreError::Invalid(
                "substitution images must share shape and field".into(),
            ));
        }
    }
    let mut max_exp = vec![0u32; f.nvars()];
    for m in f.terms().keys() {
        for (slot, &v) in max_exp.iter_mut().zip(&m.0) {
            *slot = (*slot).max(v);
        }
    }
    let one = BlockPoly::from_field_terms(
        blocks.clone(),
        vec![(vec![0; images[0].total_vars()], FieldElement::one(field))],
        field,
    )?;
    let powers: Vec<Vec<BlockPoly>> = images
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut v = vec![one.clone()];
            for k in 1..=max_exp[i] {
                let next = v[k as usize - 1].mul(g)?;
                v.push(next);
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let out_degrees: Vec<u32> = unit_degrees.iter().map(|d| d * f.degree()).collect();
    let total = images[0].total_vars();
    let mut acc = BlockPoly::zero_field(blocks.clone(), out_degrees, field);
    for (m, c) in f.terms() {
        let mut term =
            BlockPoly::from_field_terms(blocks.clone(), vec![(vec![0; total], c.clone())], field)?;
        for (i, &exp) in m.0.iter().enumerate() {
            if exp > 0 {
                term = term.mul(&powers[i][exp as usize])?;
            }
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Determinant of a square matrix of block polynomials by Laplace
/// expansion along rows, with minors memoized by column subset.
pub fn block_det(entries: &[Vec<BlockPoly>]) -> Result<BlockPoly> {
    let n = entries.len();
    if n == 0 || entries.iter().any(|row| row.len() != n) {
        return Err(CoreError::Invalid("square matrix required".into()));
    }
    if n > 24 {
        return Err(CoreError::SizeGuard(format!("{n}x{n} symbolic determinant")));
    }
    let mut memo: std::collections::HashMap<u32, BlockPoly> = std::collections::HashMap::new();
    let full: u32 = (1u32 << n) - 1;
    det_rec(entries, n, full, &mut memo)
}

fn det_rec(
    entries: &[Vec<BlockPoly>],
    n: usize,
    cols: u32,
    memo: &mut std::collections::HashMap<u32, BlockPoly>,
) -> Result<BlockPoly> {
    if let Some(hit) = memo.get(&cols) {
        return Ok(hit.clone());
    }
    let row = n - cols.count_ones() as usize;
    let mut acc: Option<BlockPoly> = None;
    let mut parity = false;
    for j in 0..n {
        if cols & (1 << j) == 0 {
            continue;
        }
        let entry = &entries[row][j];
        if !entry.is_zero() {
            let term = if cols.count_ones() == 1 {
                entry.clone()
            } else {
                let minor = det_rec(entries, n, cols & !(1 << j), memo)?;
                entry.mul(&minor)?
            };
            let signed = if parity { term.neg() } else { term };
            acc = Some(match acc {
                None => signed,
                Some(a) => a.add(&signed)?,
            });
        }
        parity = !parity;
    }
    let result = match acc {
        Some(a) => a,
        None => {
            // row of zeros in the remaining columns: determinant zero, with
            // a multidegree consistent with the surviving rows
            let blocks = entries[0][0].blocks().to_vec();
            let mut degrees = vec![0u32; blocks.len()];
            for r in entries.iter().skip(row) {
                for (slot, d) in degrees.iter_mut().zip(r[0].degrees()) {
                    *slot += d;
                }
            }
            match entries[0][0].field() {
                Some(f) => BlockPoly::zero_field(blocks, degrees, f),
                None => BlockPoly::zero_surd(blocks, degrees),
            }
        }
    };
    memo.insert(cols, result.clone());
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{rat_frac, rat_i64};
    use crate::poly::monomial::monomials_of_degree;

    fn fe(n: i64) -> FieldElement {
        FieldElement::from_i64(NumberField::Rationals, n)
    }

    fn var(blocks: &[usize], j: usize) -> BlockPoly {
        let total: usize = blocks.iter().sum();
        let mut e = vec![0; total];
        e[j] = 1;
        BlockPoly::from_field_terms(blocks.to_vec(), vec![(e, fe(1))], NumberField::Rationals)
            .unwrap()
    }

    #[test]
    fn multidegree_validation() {
        // x0 y0 + x1 y1 over blocks (2, 2) is fine
        let ok = BlockPoly::from_field_terms(
            vec![2, 2],
            vec![
                (vec![1, 0, 1, 0], fe(1)),
                (vec![0, 1, 0, 1], fe(1)),
            ],
            NumberField::Rationals,
        );
        assert!(ok.is_ok());
        // mixed block degrees are rejected
        let bad = BlockPoly::from_field_terms(
            vec![2, 2],
            vec![
                (vec![1, 0, 1, 0], fe(1)),
                (vec![1, 1, 0, 0], fe(1)),
            ],
            NumberField::Rationals,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn two_by_two_determinant() {
        // det [[u00, u01], [u10, u11]] over two blocks of two variables
        let blocks = [2usize, 2];
        let m = vec![
            vec![var(&blocks, 0), var(&blocks, 1)],
            vec![var(&blocks, 2), var(&blocks, 3)],
        ];
        let det = block_det(&m).unwrap();
        assert_eq!(det.num_terms(), 2);
        assert_eq!(det.degrees(), &[1, 1]);
        let v = det
            .evaluate_field(&[fe(2), fe(3), fe(5), fe(7)])
            .unwrap();
        assert_eq!(v, fe(2 * 7 - 3 * 5));
    }

    #[test]
    fn four_by_four_determinant_matches_evaluation() {
        // one block of 16 independent variables
        let blocks = [16usize];
        let m: Vec<Vec<BlockPoly>> = (0..4)
            .map(|i| (0..4).map(|j| var(&blocks, 4 * i + j)).collect())
            .collect();
        let det = block_det(&m).unwrap();
        assert_eq!(det.num_terms(), 24);
        // evaluate at a concrete matrix and compare against exact linalg
        let vals: Vec<i64> = vec![2, 0, 1, 3, 1, 1, 0, 2, 0, 4, 1, 1, 3, 2, 2, 0];
        let x: Vec<FieldElement> = vals.iter().map(|&v| fe(v)).collect();
        let got = det.evaluate_field(&x).unwrap();
        let qm = crate::linalg::QMatrix::from_rows(
            (0..4)
                .map(|i| (0..4).map(|j| rat_i64(vals[4 * i + j])).collect())
                .collect(),
        )
        .unwrap();
        assert_eq!(got.a, qm.det().unwrap());
    }

    #[test]
    fn substitution_into_a_quadric() {
        // f = y0 y2 - y1^2, images the three 2x2 minors-like products
        let f = HomogeneousPoly::new(
            NumberField::Rationals,
            3,
            2,
            [
                (Monomial(vec![1, 0, 1]), fe(1)),
                (Monomial(vec![0, 2, 0]), fe(-1)),
            ],
        )
        .unwrap();
        let blocks = [2usize, 2];
        // images of degree (1,1): y0 = x0 y0', y1 = x0 y1' + x1 y0', y2 = x1 y1'
        let g0 = var(&blocks, 0).mul(&var(&blocks, 2)).unwrap();
        let g1 = var(&blocks, 0)
            .mul(&var(&blocks, 3))
            .unwrap()
            .add(&var(&blocks, 1).mul(&var(&blocks, 2)).unwrap())
            .unwrap();
        let g2 = var(&blocks, 1).mul(&var(&blocks, 3)).unwrap();
        let h = substitute(&f, &[g0, g1, g2]).unwrap();
        assert_eq!(h.degrees(), &[2, 2]);
        // pointwise agreement
        let x = [fe(3), fe(-2), fe(1), fe(5)];
        let imgs = [
            fe(3 * 1),
            fe(3 * 5 + (-2) * 1),
            fe(-2 * 5),
        ];
        let direct = f.evaluate(&imgs).unwrap();
        assert_eq!(h.evaluate_field(&x).unwrap(), direct);
    }

    #[test]
    fn variable_scaling_and_surd_terms() {
        let blocks = [3usize];
        let f = BlockPoly::from_field_terms(
            vec![3],
            monomials_of_degree(3, 1)
                .into_iter()
                .enumerate()
                .map(|(i, m)| (m.0, fe(i as i64 + 1)))
                .collect(),
            NumberField::Rationals,
        )
        .unwrap();
        let factors = [
            QuadraticSurd::new(rat_i64(1), 1).unwrap(),
            QuadraticSurd::new(rat_i64(1), 2).unwrap(),
            QuadraticSurd::new(rat_frac(1, 3), 6).unwrap(),
        ];
        let g = f.scale_variables(&factors).unwrap();
        let st = g.surd_terms().unwrap();
        assert_eq!(st.len(), 3);
        let _ = blocks;
        let ks: Vec<u64> = st.values().map(|c| c.k()).collect();
        assert_eq!(ks, vec![1, 2, 6]);
    }

    #[test]
    fn content_normalization() {
        let f = BlockPoly::from_field_terms(
            vec![2],
            vec![
                (vec![1, 0], FieldElement::from_rational(NumberField::Rationals, rat_frac(-4, 3))),
                (vec![0, 1], FieldElement::from_rational(NumberField::Rationals, rat_frac(2, 3))),
            ],
            NumberField::Rationals,
        )
        .unwrap();
        let (prim, content) = f.primitive_normalized().unwrap();
        assert_eq!(content, rat_frac(-2, 3));
        let coeffs: Vec<Rational> = prim
            .field_terms()
            .unwrap()
            .values()
            .map(|c| c.a.clone())
            .collect();
        assert_eq!(coeffs, vec![rat_i64(2), rat_i64(-1)]);
    }
}
