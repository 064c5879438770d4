//! Monomials with the canonical iteration order used everywhere downstream:
//! ascending total degree, ties broken so that earlier variables carry the
//! larger exponents first. The degree-2 monomials in two variables run
//! x0^2, x0 x1, x1^2.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::arith::field::FieldElement;
use crate::arith::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn constant(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.nvars(), other.nvars(), "monomial arity mismatch");
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn pow(&self, k: u32) -> Monomial {
        Monomial(self.0.iter().map(|a| a * k).collect())
    }

    /// Inner product of the exponent vector with a weight vector.
    pub fn weight(&self, c: &[Rational]) -> Rational {
        assert_eq!(self.nvars(), c.len(), "weight arity mismatch");
        self.0
            .iter()
            .zip(c)
            .map(|(e, w)| w * Rational::from_integer((*e).into()))
            .sum()
    }

    pub fn evaluate(&self, x: &[FieldElement]) -> FieldElement {
        assert_eq!(self.nvars(), x.len(), "evaluation arity mismatch");
        let mut acc = FieldElement::one(x[0].field);
        for (xi, &e) in x.iter().zip(&self.0) {
            if e > 0 {
                acc = &acc * &xi.pow(e);
            }
        }
        acc
    }
}

/// All monomials of the given degree in `nvars` variables, in canonical
/// order. Length is C(nvars - 1 + degree, degree).
pub fn monomials_of_degree(nvars: usize, degree: u32) -> Vec<Monomial> {
    assert!(nvars >= 1, "need at least one variable");
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(nvars);
    fill(nvars, degree, &mut current, &mut out);
    out
}

fn fill(nvars: usize, remaining: u32, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if current.len() == nvars - 1 {
        current.push(remaining);
        out.push(Monomial(current.clone()));
        current.pop();
        return;
    }
    for e in (0..=remaining).rev() {
        current.push(e);
        fill(nvars, remaining - e, current, out);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::field::NumberField;
    use crate::arith::rational::{binomial, rat_frac, rat_i64};

    #[test]
    fn canonical_order_of_degree_two_in_two_vars() {
        let ms = monomials_of_degree(2, 2);
        assert_eq!(
            ms,
            vec![
                Monomial(vec![2, 0]),
                Monomial(vec![1, 1]),
                Monomial(vec![0, 2])
            ]
        );
        let mut sorted = ms.clone();
        sorted.sort();
        assert_eq!(sorted, ms);
    }

    #[test]
    fn enumeration_counts_are_binomial() {
        for (nvars, d) in [(2usize, 3u32), (3, 3), (4, 2), (3, 6)] {
            let ms = monomials_of_degree(nvars, d);
            let expect = binomial((nvars - 1 + d as usize) as u64, d as u64);
            assert_eq!(ms.len().to_string(), expect.to_string());
            assert!(ms.iter().all(|m| m.degree() == d));
            assert!(ms.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn degree_dominates_order() {
        assert!(Monomial(vec![3, 0]) < Monomial(vec![0, 4]));
        assert!(Monomial(vec![1, 1]) < Monomial(vec![0, 2]));
        assert!(Monomial(vec![2, 0]) < Monomial(vec![1, 1]));
    }

    #[test]
    fn weight_and_evaluate() {
        let m = Monomial(vec![2, 1, 0]);
        assert_eq!(m.weight(&[rat_i64(1), rat_frac(1, 2), rat_i64(5)]), rat_frac(5, 2));
        let f = NumberField::Rationals;
        let x: Vec<_> = [2, 3, 7]
            .iter()
            .map(|&n| FieldElement::from_i64(f, n))
            .collect();
        assert_eq!(m.evaluate(&x), FieldElement::from_i64(f, 12));
    }
}
