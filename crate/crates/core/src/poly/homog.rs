//! Sparse homogeneous polynomials over a number field with exact
//! arithmetic, evaluation, and substitution.

use std::collections::BTreeMap;

use crate::arith::field::{FieldElement, NumberField};
use crate::error::{CoreError, Result};
use crate::poly::block::BlockPoly;
use crate::poly::monomial::Monomial;
use crate::poly::surd::QuadraticSurd;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousPoly {
    field: NumberField,
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, FieldElement>,
}

impl HomogeneousPoly {
    pub fn zero(field: NumberField, nvars: usize, degree: u32) -> Self {
        assert!(nvars >= 1);
        HomogeneousPoly {
            field,
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn new(
        field: NumberField,
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Monomial, FieldElement)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Monomial, FieldElement> = BTreeMap::new();
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(CoreError::Invalid(format!(
                    "monomial in {} variables inside a {}-variable polynomial",
                    m.nvars(),
                    nvars
                )));
            }
            if m.degree() != degree {
                return Err(CoreError::Invalid(format!(
                    "degree-{} monomial in a degree-{} form",
                    m.degree(),
                    degree
                )));
            }
            let c = c.promote(field)?;
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
        Ok(HomogeneousPoly {
            field,
            nvars,
            degree,
            terms: map,
        })
    }

    pub fn variable(field: NumberField, nvars: usize, i: usize) -> Self {
        HomogeneousPoly::new(
            field,
            nvars,
            1,
            [(Monomial::variable(nvars, i), FieldElement::one(field))],
        )
        .unwrap()
    }

    pub fn monomial(field: NumberField, m: Monomial, c: FieldElement) -> Result<Self> {
        let nvars = m.nvars();
        let degree = m.degree();
        HomogeneousPoly::new(field, nvars, degree, [(m, c)])
    }

    pub fn field(&self) -> NumberField {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, FieldElement> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &FieldElement> {
        self.terms.values()
    }

    pub fn leading(&self) -> Option<(&Monomial, &FieldElement)> {
        self.terms.iter().next()
    }

    /// The same form with coefficients carried into `field`.
    pub fn promote(&self, field: NumberField) -> Result<HomogeneousPoly> {
        HomogeneousPoly::new(
            field,
            self.nvars,
            self.degree,
            self.terms.iter().map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    fn check_compatible(&self, other: &HomogeneousPoly) -> Result<()> {
        if self.field != other.field {
            return Err(CoreError::FieldMismatch("polynomial field mismatch".into()));
        }
        if self.nvars != other.nvars {
            return Err(CoreError::Invalid("polynomial arity mismatch".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &HomogeneousPoly) -> Result<HomogeneousPoly> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(CoreError::Invalid("adding forms of different degrees".into()));
        }
        HomogeneousPoly::new(
            self.field,
            self.nvars,
            self.degree,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    pub fn neg(&self) -> HomogeneousPoly {
        self.scale(&FieldElement::from_i64(self.field, -1))
    }

    pub fn sub(&self, other: &HomogeneousPoly) -> Result<HomogeneousPoly> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &FieldElement) -> HomogeneousPoly {
        if c.is_zero() {
            return HomogeneousPoly::zero(self.field, self.nvars, self.degree);
        }
        HomogeneousPoly {
            field: self.field,
            nvars: self.nvars,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &HomogeneousPoly) -> Result<HomogeneousPoly> {
        self.check_compatible(other)?;
        let mut map: BTreeMap<Monomial, FieldElement> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
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
        Ok(HomogeneousPoly {
            field: self.field,
            nvars: self.nvars,
            degree: self.degree + other.degree,
            terms: map,
        })
    }

    pub fn pow(&self, k: u32) -> HomogeneousPoly {
        let mut acc = HomogeneousPoly::new(
            self.field,
            self.nvars,
            0,
            [(Monomial::constant(self.nvars), FieldElement::one(self.field))],
        )
        .unwrap();
        for _ in 0..k {
            acc = acc.mul(self).unwrap();
        }
        acc
    }

    pub fn evaluate(&self, x: &[FieldElement]) -> Result<FieldElement> {
        if x.is_empty() || x.len() != self.nvars {
            return Err(CoreError::Invalid(format!(
                "evaluating a {}-variable form at a {}-tuple",
                self.nvars,
                x.len()
            )));
        }
        let field = if x[0].field == NumberField::Rationals {
            self.field
        } else {
            x[0].field
        };
        let lifted: Vec<FieldElement> = x
            .iter()
            .map(|c| c.promote(field))
            .collect::<Result<_>>()?;
        let mut acc = FieldElement::zero(field);
        for (m, c) in &self.terms {
            acc = &acc + &(&c.promote(field)? * &m.evaluate(&lifted));
        }
        Ok(acc)
    }

    /// Substitutes gs[i] for variable i. All gs must share a degree e >= 1;
    /// the result has degree deg(self) * e.
    pub fn compose(&self, gs: &[HomogeneousPoly]) -> Result<HomogeneousPoly> {
        if gs.len() != self.nvars {
            return Err(CoreError::Invalid("substitution arity mismatch".into()));
        }
        let e = gs[0].degree;
        let out_vars = gs[0].nvars;
        if e == 0 {
            return Err(CoreError::Invalid("substitution by degree-0 forms".into()));
        }
        for g in gs {
            if g.degree != e || g.nvars != out_vars || g.field != self.field {
                return Err(CoreError::Invalid(
                    "substitution images must share degree, arity, and field".into(),
                ));
            }
        }
        let mut max_exp = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (slot, &v) in max_exp.iter_mut().zip(&m.0) {
                *slot = (*slot).max(v);
            }
        }
        // powers[i][k] = gs[i]^k, built once per variable
        let powers: Vec<Vec<HomogeneousPoly>> = gs
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let mut v = Vec::with_capacity(max_exp[i] as usize + 1);
                v.push(HomogeneousPoly::new(
                    self.field,
                    out_vars,
                    0,
                    [(Monomial::constant(out_vars), FieldElement::one(self.field))],
                )
                .unwrap());
                for k in 1..=max_exp[i] {
                    let next = v[k as usize - 1].mul(g).unwrap();
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = HomogeneousPoly::zero(self.field, out_vars, self.degree * e);
        for (m, c) in &self.terms {
            let mut term = HomogeneousPoly::new(
                self.field,
                out_vars,
                0,
                [(Monomial::constant(out_vars), c.clone())],
            )
            .unwrap();
            for (i, &exp) in m.0.iter().enumerate() {
                if exp > 0 {
                    term = term.mul(&powers[i][exp as usize])?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Galois-conjugates every coefficient.
    pub fn conj(&self) -> HomogeneousPoly {
        HomogeneousPoly {
            field: self.field,
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.conj()))
                .collect(),
        }
    }

    /// Coefficient vector of a binary form: index j holds the coefficient
    /// of x0^(D-j) x1^j.
    pub fn binary_coeffs(&self) -> Result<Vec<FieldElement>> {
        if self.nvars != 2 {
            return Err(CoreError::Invalid("binary form expected".into()));
        }
        let d = self.degree as usize;
        let mut out = vec![FieldElement::zero(self.field); d + 1];
        for (m, c) in &self.terms {
            out[m.0[1] as usize] = c.clone();
        }
        Ok(out)
    }

    pub fn from_binary_coeffs(
        field: NumberField,
        degree: u32,
        coeffs: &[FieldElement],
    ) -> Result<Self> {
        if coeffs.len() != degree as usize + 1 {
            return Err(CoreError::Invalid("binary coefficient count mismatch".into()));
        }
        HomogeneousPoly::new(
            field,
            2,
            degree,
            coeffs.iter().enumerate().map(|(j, c)| {
                (Monomial(vec![degree - j as u32, j as u32]), c.clone())
            }),
        )
    }

    /// Single-block view with the same coefficients.
    pub fn to_block(&self) -> BlockPoly {
        BlockPoly::from_field_terms(
            vec![self.nvars],
            self.terms
                .iter()
                .map(|(m, c)| (m.0.clone(), c.clone()))
                .collect(),
            self.field,
        )
        .unwrap()
    }

    /// Single-block view with surd coefficients (rational coefficients only).
    pub fn to_surd_block(&self) -> Result<BlockPoly> {
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                if !c.is_rational() {
                    return Err(CoreError::Invalid(
                        "surd view needs rational coefficients".into(),
                    ));
                }
                Ok((m.0.clone(), QuadraticSurd::rational(c.a.clone())))
            })
            .collect::<Result<Vec<_>>>()?;
        BlockPoly::from_surd_terms(vec![self.nvars], terms)
    }
}
