//! Chow forms for the supported presentations: symbolic construction,
//! weight extraction, coordinate-subset criteria, Veronese re-embedding
//! with the square-root-multinomial twist, and the exact height
//! envelopes comparing all of these.

use num_traits::{ToPrimitive, Zero};

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::height::LogHeight;
use crate::arith::rational::{factorial, multinomial, rat_frac, rat_i64, Rational};
use crate::error::{CoreError, Result};
use crate::poly::block::{block_det, substitute, BlockPoly};
use crate::poly::heights::{block_heights, poly_heights};
use crate::poly::homog::HomogeneousPoly;
use crate::poly::monomial::{monomials_of_degree, Monomial};
use crate::poly::surd::QuadraticSurd;
use crate::variety::{degree_dimension, VarietySpec};

const MODIFIED_TERM_GUARD: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    Determinant,
    Cramer,
    Resultant,
}

/// A Chow form: primitive integral coefficients, positive leading
/// coefficient, one block of ambient variables per hyperplane slot.
/// `form` equals the k-th power of the irreducible Chow form when the
/// presentation wraps its image k times; `power` records that k.
#[derive(Debug, Clone)]
pub struct ChowForm {
    pub dim: usize,
    pub degree: u64,
    pub power: u64,
    pub content: Rational,
    pub construction: Construction,
    pub form: BlockPoly,
}

impl ChowForm {
    pub fn ambient_dim(&self) -> usize {
        self.form.blocks()[0] - 1
    }

    pub fn block_degree(&self) -> u64 {
        self.form.degrees()[0] as u64
    }
}

fn u_var(blocks: &[usize], block: usize, idx: usize) -> BlockPoly {
    let total: usize = blocks.iter().sum();
    let offset: usize = blocks[..block].iter().sum();
    let mut exps = vec![0u32; total];
    exps[offset + idx] = 1;
    BlockPoly::from_field_terms(
        blocks.to_vec(),
        vec![(exps, FieldElement::one(NumberField::Rationals))],
        NumberField::Rationals,
    )
    .unwrap()
}

/// The linear form sum(weights[i] * u_i) in the given block, with an
/// explicit degree vector so an all-zero entry keeps its shape.
fn linear_entry(
    blocks: &[usize],
    degrees: Vec<u32>,
    block: usize,
    weights: &[FieldElement],
) -> Result<BlockPoly> {
    let total: usize = blocks.iter().sum();
    let offset: usize = blocks[..block].iter().sum();
    let terms: Vec<(Vec<u32>, FieldElement)> = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_zero())
        .map(|(i, w)| {
            let mut exps = vec![0u32; total];
            exps[offset + i] = 1;
            (exps, w.clone())
        })
        .collect();
    if terms.is_empty() {
        return Ok(BlockPoly::zero_field(
            blocks.to_vec(),
            degrees,
            NumberField::Rationals,
        ));
    }
    BlockPoly::from_field_terms(blocks.to_vec(), terms, NumberField::Rationals)
}

/// det of the matrix whose (h, k) entry is sum_i psi[i][k] u_i^{(h)}.
fn embedded_determinant(r: usize, psi: &[Vec<Rational>]) -> Result<BlockPoly> {
    let cols = psi[0].len();
    let blocks = vec![r + 1; cols];
    let mut entries: Vec<Vec<BlockPoly>> = Vec::with_capacity(cols);
    for h in 0..cols {
        let mut degrees = vec![0u32; cols];
        degrees[h] = 1;
        let mut row = Vec::with_capacity(cols);
        for k in 0..cols {
            let weights: Vec<FieldElement> = psi
                .iter()
                .map(|pr| FieldElement::from_rational(NumberField::Rationals, pr[k].clone()))
                .collect();
            row.push(linear_entry(&blocks, degrees.clone(), h, &weights)?);
        }
        entries.push(row);
    }
    block_det(&entries)
}

/// The signed maximal minors of the stacked hyperplane coefficient rows:
/// the projective intersection point of R hyperplanes in R-space, by
/// Cramer's rule.
fn cramer_point(r: usize) -> Result<Vec<BlockPoly>> {
    let blocks = vec![r + 1; r];
    let mut point = Vec::with_capacity(r + 1);
    for skip in 0..=r {
        let mut entries: Vec<Vec<BlockPoly>> = Vec::with_capacity(r);
        for h in 0..r {
            let mut row = Vec::with_capacity(r);
            for j in (0..=r).filter(|&j| j != skip) {
                row.push(u_var(&blocks, h, j));
            }
            entries.push(row);
        }
        let minor = block_det(&entries)?;
        point.push(if skip % 2 == 1 { minor.neg() } else { minor });
    }
    Ok(point)
}

/// Sylvester determinant of the two generic hyperplane pullbacks along a
/// line parametrization.
fn resultant_form(gs: &[HomogeneousPoly]) -> Result<BlockPoly> {
    let rp1 = gs.len();
    let e = gs[0].degree() as usize;
    let blocks = vec![rp1, rp1];
    let coeffs: Vec<Vec<FieldElement>> = gs
        .iter()
        .map(HomogeneousPoly::binary_coeffs)
        .collect::<Result<_>>()?;
    let size = 2 * e;
    let mut entries: Vec<Vec<BlockPoly>> = Vec::with_capacity(size);
    for half in 0..2 {
        let degrees = if half == 0 { vec![1, 0] } else { vec![0, 1] };
        for shift in 0..e {
            let mut row = Vec::with_capacity(size);
            for col in 0..size {
                let entry = if col >= shift && col - shift <= e {
                    let k = col - shift;
                    let weights: Vec<FieldElement> =
                        coeffs.iter().map(|c| c[k].clone()).collect();
                    linear_entry(&blocks, degrees.clone(), half, &weights)?
                } else {
                    BlockPoly::zero_field(
                        blocks.clone(),
                        degrees.clone(),
                        NumberField::Rationals,
                    )
                };
                row.push(entry);
            }
            entries.push(row);
        }
    }
    block_det(&entries)
}

pub fn chow_form(y: &VarietySpec) -> Result<ChowForm> {
    y.validate()?;
    let dd = degree_dimension(y)?;
    let r = y.ambient_dim();
    let (raw, construction) = match y {
        VarietySpec::FullSpace { n } => {
            let psi: Vec<Vec<Rational>> = (0..=*n)
                .map(|i| (0..=*n).map(|j| rat_i64((i == j) as i64)).collect())
                .collect();
            (embedded_determinant(r, &psi)?, Construction::Determinant)
        }
        VarietySpec::LinearSubvariety { map } => {
            (embedded_determinant(r, map)?, Construction::Determinant)
        }
        VarietySpec::Hypersurface { f } => {
            let point = cramer_point(r)?;
            (substitute(f, &point)?, Construction::Cramer)
        }
        VarietySpec::ParametrizedImage { gs } => {
            if gs.iter().any(|g| g.field() != NumberField::Rationals) {
                return Err(CoreError::Unsupported(
                    "Chow forms need a rational presentation".into(),
                ));
            }
            (resultant_form(gs)?, Construction::Resultant)
        }
    };
    if raw.is_zero() {
        return Err(CoreError::Invalid("degenerate presentation".into()));
    }
    let (form, content) = raw.primitive_normalized()?;
    let block_degree = form.degrees()[0] as u64;
    if form.degrees().iter().any(|&d| d as u64 != block_degree) {
        return Err(CoreError::Invalid("unequal block degrees".into()));
    }
    if block_degree % dd.degree != 0 {
        return Err(CoreError::Invalid(format!(
            "block degree {} is not a multiple of the variety degree {}",
            block_degree, dd.degree
        )));
    }
    Ok(ChowForm {
        dim: dd.dim,
        degree: dd.degree,
        power: block_degree / dd.degree,
        content,
        construction,
        form,
    })
}

/// The weight e of the underlying irreducible form: the largest total
/// c-weight over the support, counting the exponent of u_i in every
/// block against c_i, divided by the recorded power.
pub fn chow_weight(fm: &ChowForm, c: &[Rational]) -> Result<Rational> {
    let width = fm.form.blocks()[0];
    if c.len() != width {
        return Err(CoreError::Invalid(format!(
            "weight vector has {} entries, ambient wants {}",
            c.len(),
            width
        )));
    }
    let mut best: Option<Rational> = None;
    for mono in fm.form.support() {
        let mut w = Rational::zero();
        for (flat, &exp) in mono.0.iter().enumerate() {
            if exp > 0 {
                w += &c[flat % width] * &rat_i64(exp as i64);
            }
        }
        if best.as_ref().is_none_or(|b| &w > b) {
            best = Some(w);
        }
    }
    let best = best.ok_or_else(|| CoreError::Invalid("weight of the zero form".into()))?;
    Ok(best / rat_i64(fm.power as i64))
}

/// e / ((n+1) D): the single-place contribution to the weighted height
/// exponent; invariant under fibre powers of the form.
pub fn normalized_chow_weight(fm: &ChowForm, c: &[Rational]) -> Result<Rational> {
    let e = chow_weight(fm, c)?;
    Ok(e / rat_i64(((fm.dim + 1) as u64 * fm.degree) as i64))
}

/// Whether the variety misses the coordinate subspace where the listed
/// n+1 coordinates all vanish, read off from the form's value at the
/// matching unit vectors.
pub fn coordinate_subset_check(fm: &ChowForm, subset: &[usize]) -> Result<bool> {
    let width = fm.form.blocks()[0];
    let slots = fm.form.blocks().len();
    if subset.len() != slots {
        return Err(CoreError::Invalid(format!(
            "subset of {} coordinates, form wants {}",
            subset.len(),
            slots
        )));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &i in subset {
        if i >= width || !seen.insert(i) {
            return Err(CoreError::Invalid("subset indices out of range".into()));
        }
    }
    let mut x = vec![FieldElement::zero(NumberField::Rationals); width * slots];
    for (h, &i) in subset.iter().enumerate() {
        x[h * width + i] = FieldElement::one(NumberField::Rationals);
    }
    Ok(!fm.form.evaluate_field(&x)?.is_zero())
}

/// All sorted coordinate subsets passing `coordinate_subset_check`.
pub fn admissible_subsets(fm: &ChowForm) -> Result<Vec<Vec<usize>>> {
    let width = fm.form.blocks()[0];
    let slots = fm.form.blocks().len();
    let mut out = Vec::new();
    let mut current: Vec<usize> = Vec::with_capacity(slots);
    fn rec(
        fm: &ChowForm,
        width: usize,
        slots: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        if current.len() == slots {
            if coordinate_subset_check(fm, current)? {
                out.push(current.clone());
            }
            return Ok(());
        }
        for i in start..width {
            current.push(i);
            rec(fm, width, slots, i + 1, current, out)?;
            current.pop();
        }
        Ok(())
    }
    rec(fm, width, slots, 0, &mut current, &mut out)?;
    Ok(out)
}

/// Exact slack of the normalized-weight lower bound over an admissible
/// coordinate subset: e/((n+1)D) - (sum of the subset's weights)/(n+1).
/// Nonnegative whenever the subset misses the variety.
pub fn support_weight_slack(
    fm: &ChowForm,
    c: &[Rational],
    subset: &[usize],
) -> Result<Rational> {
    if !coordinate_subset_check(fm, subset)? {
        return Err(CoreError::Invalid(
            "coordinate subset meets the variety".into(),
        ));
    }
    let normalized = normalized_chow_weight(fm, c)?;
    let picked: Rational = subset.iter().map(|&i| c[i].clone()).sum();
    Ok(normalized - picked / rat_i64((fm.dim + 1) as i64))
}

/// A parametrization of the variety by the projective line, where the
/// presentation provides one.
pub fn line_parametrization(y: &VarietySpec) -> Result<Vec<HomogeneousPoly>> {
    match y {
        VarietySpec::FullSpace { n: 1 } => Ok(vec![
            HomogeneousPoly::variable(NumberField::Rationals, 2, 0),
            HomogeneousPoly::variable(NumberField::Rationals, 2, 1),
        ]),
        VarietySpec::ParametrizedImage { gs } => Ok(gs.clone()),
        VarietySpec::LinearSubvariety { map } if map[0].len() == 2 => map
            .iter()
            .map(|row| {
                HomogeneousPoly::new(
                    NumberField::Rationals,
                    2,
                    1,
                    row.iter().enumerate().map(|(j, q)| {
                        (
                            Monomial::variable(2, j),
                            FieldElement::from_rational(NumberField::Rationals, q.clone()),
                        )
                    }),
                )
            })
            .collect(),
        _ => Err(CoreError::Unsupported(
            "no line parametrization for this presentation".into(),
        )),
    }
}

/// Composes a parametrization with the degree-delta Veronese embedding
/// of its ambient space: one coordinate per canonical degree-delta
/// monomial.
pub fn veronese_composition(
    gs: &[HomogeneousPoly],
    delta: u32,
) -> Result<Vec<HomogeneousPoly>> {
    if delta == 0 {
        return Err(CoreError::Invalid("Veronese degree must be positive".into()));
    }
    let nvars = gs.len();
    monomials_of_degree(nvars, delta)
        .into_iter()
        .map(|mono| {
            let mut acc = HomogeneousPoly::monomial(
                gs[0].field(),
                Monomial::constant(gs[0].nvars()),
                FieldElement::one(gs[0].field()),
            )?;
            for (i, &exp) in mono.0.iter().enumerate() {
                if exp > 0 {
                    acc = acc.mul(&gs[i].pow(exp))?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// The Chow form of the variety after re-embedding by the degree-delta
/// Veronese map, for line-parametrizable presentations.
pub fn delta_chow_form(y: &VarietySpec, delta: u32) -> Result<ChowForm> {
    let gs = line_parametrization(y)?;
    let composed = veronese_composition(&gs, delta)?;
    chow_form(&VarietySpec::ParametrizedImage { gs: composed })
}

/// Square-root multinomial factors for each block variable of a
/// degree-delta Veronese Chow form over `ambient_vars` source
/// coordinates.
pub fn veronese_twist_factors(
    fm: &ChowForm,
    ambient_vars: usize,
    delta: u32,
) -> Result<Vec<QuadraticSurd>> {
    let monos = monomials_of_degree(ambient_vars, delta);
    if fm.form.blocks().iter().any(|&b| b != monos.len()) {
        return Err(CoreError::Invalid(format!(
            "blocks of {} variables do not match the {} degree-{delta} monomials",
            fm.form.blocks()[0],
            monos.len()
        )));
    }
    let betas: Vec<QuadraticSurd> = monos
        .iter()
        .map(|m| {
            let beta = multinomial(&m.0)
                .to_u64()
                .ok_or_else(|| CoreError::SizeGuard("multinomial overflow".into()))?;
            QuadraticSurd::new(Rational::from_integer(1.into()), beta)
        })
        .collect::<Result<_>>()?;
    Ok(fm
        .form
        .blocks()
        .iter()
        .flat_map(|_| betas.iter().cloned())
        .collect())
}

/// The modified form: each variable scaled by the square root of its
/// monomial's multinomial coefficient. Term count is preserved.
pub fn modified_chow_form(
    fm: &ChowForm,
    ambient_vars: usize,
    delta: u32,
) -> Result<BlockPoly> {
    if fm.form.num_terms() > MODIFIED_TERM_GUARD {
        return Err(CoreError::SizeGuard(format!(
            "{} terms, guard {MODIFIED_TERM_GUARD}",
            fm.form.num_terms()
        )));
    }
    let factors = veronese_twist_factors(fm, ambient_vars, delta)?;
    fm.form.scale_variables(&factors)
}

/// Exact slack of the modified-form height comparison: the twist moves
/// h1 by at most (1/2)(n+1) d delta^n log(delta!), with d the degree of
/// the variety before the Veronese re-embedding.
pub fn modified_height_gap_slack(
    fm: &ChowForm,
    twisted: &BlockPoly,
    base_degree: u64,
    delta: u32,
) -> Result<LogHeight> {
    let (_, h1_plain) = block_heights(&fm.form)?;
    let (_, h1_twisted) = block_heights(twisted)?;
    let gap = h1_plain.sub(&h1_twisted);
    let gap = match gap.sign3()? {
        std::cmp::Ordering::Less => gap.neg(),
        _ => gap,
    };
    let n = fm.dim as u32;
    let log_fact =
        LogHeight::ln_of_rational(&Rational::from_integer(factorial(delta as u64)))?;
    let scale = rat_frac(
        (n as i64 + 1) * base_degree as i64 * (delta as i64).pow(n),
        2,
    );
    Ok(log_fact.scale(&scale).sub(&gap))
}

/// Exact slack of the Veronese height envelope: h1 of the degree-delta
/// form against delta^{n+1} h of the plain form plus the explicit
/// correction term.
pub fn veronese_height_envelope_slack(y: &VarietySpec, delta: u32) -> Result<LogHeight> {
    let base = chow_form(y)?;
    let dform = delta_chow_form(y, delta)?;
    if base.power != 1 || dform.power != 1 {
        return Err(CoreError::Unsupported(
            "height envelope needs a birational parametrization".into(),
        ));
    }
    let (h_base, _) = block_heights(&base.form)?;
    let (_, h1_delta) = block_heights(&dform.form)?;
    let n = base.dim as u32;
    let d = base.degree as i64;
    let big_n = y.ambient_dim() as i64;
    let dp = (delta as i64).pow(n + 1);
    let log_nd = LogHeight::ln_of_rational(&rat_i64(big_n + delta as i64))?;
    let bound = h_base
        .scale(&rat_i64(dp))
        .add(&log_nd.scale(&rat_i64(5 * (n as i64 + 1) * d * dp)));
    Ok(bound.sub(&h1_delta))
}

/// Exact slack of the image height envelope for a system of equal-degree
/// binary forms with no common zero: the Chow-form height of the image
/// against the system's joint height plus explicit corrections.
pub fn image_height_envelope_slack(gs: &[HomogeneousPoly]) -> Result<LogHeight> {
    let y = VarietySpec::ParametrizedImage { gs: gs.to_vec() };
    y.validate()?;
    let fm = chow_form(&y)?;
    if fm.power != 1 {
        return Err(CoreError::Unsupported(
            "height envelope needs a birational parametrization".into(),
        ));
    }
    let base = chow_form(&VarietySpec::FullSpace { n: 1 })?;
    let (h_base, _) = block_heights(&base.form)?;
    let (h_image, _) = block_heights(&fm.form)?;
    let (_, h1_gs) = poly_heights(gs)?;
    let delta = gs[0].degree() as i64;
    let r = gs.len() as i64 - 1;
    let bound = h_base
        .scale(&rat_i64(delta * delta))
        .add(&h1_gs.scale(&rat_i64(2 * delta)))
        .add(
            &LogHeight::ln_of_rational(&rat_i64(1 + delta))?
                .scale(&rat_i64(10 * delta * delta)),
        )
        .add(&LogHeight::ln_of_rational(&rat_i64(r + 1))?.scale(&rat_i64(6 * delta)));
    Ok(bound.sub(&h_image))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::text::parse_homogeneous;
    use crate::variety::binary_forms_share_zero;
    use crate::variety::zoo::{conic, line_in_plane, quadric_surface, twisted_cubic};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cmp::Ordering;

    fn fe(n: i64) -> FieldElement {
        FieldElement::from_i64(NumberField::Rationals, n)
    }

    #[test]
    fn line_form_is_the_two_by_two_determinant() {
        let fm = chow_form(&VarietySpec::FullSpace { n: 1 }).unwrap();
        let expected = BlockPoly::from_field_terms(
            vec![2, 2],
            vec![
                (vec![1, 0, 0, 1], fe(1)),
                (vec![0, 1, 1, 0], fe(-1)),
            ],
            NumberField::Rationals,
        )
        .unwrap();
        assert_eq!(fm.form, expected);
        assert_eq!(fm.power, 1);
        assert_eq!(fm.degree, 1);
        assert_eq!(fm.content, rat_i64(1));
    }

    #[test]
    fn determinant_and_resultant_agree_on_the_line() {
        let det = chow_form(&VarietySpec::FullSpace { n: 1 }).unwrap();
        let res = delta_chow_form(&VarietySpec::FullSpace { n: 1 }, 1).unwrap();
        assert_eq!(det.form, res.form);
        let line = line_in_plane();
        let det = chow_form(&line).unwrap();
        let gs = line_parametrization(&line).unwrap();
        let res = chow_form(&VarietySpec::ParametrizedImage { gs }).unwrap();
        assert_eq!(det.form, res.form);
    }

    #[test]
    fn veronese_line_recovers_the_conic_form() {
        let from_line = delta_chow_form(&VarietySpec::FullSpace { n: 1 }, 2).unwrap();
        let from_hypersurface = chow_form(&conic()).unwrap();
        assert_eq!(from_line.form, from_hypersurface.form);
        assert_eq!(from_line.degree, 2);
        assert_eq!(from_line.power, 1);
        assert_eq!(from_hypersurface.block_degree(), 2);
    }

    #[test]
    fn twisted_cubic_form_has_block_degree_three() {
        let fm = chow_form(&twisted_cubic()).unwrap();
        assert_eq!(fm.form.degrees(), &[3, 3]);
        assert_eq!(fm.degree, 3);
        assert_eq!(fm.power, 1);
        assert_eq!(fm.construction, Construction::Resultant);
    }

    #[test]
    fn wrapped_parametrization_doubles_the_block_degree() {
        let doubled = VarietySpec::ParametrizedImage {
            gs: vec![
                parse_homogeneous("x0^2", Some(2)).unwrap(),
                parse_homogeneous("x1^2", Some(2)).unwrap(),
            ],
        };
        let fm = chow_form(&doubled).unwrap();
        assert_eq!(fm.power, 2);
        assert_eq!(fm.degree, 1);
        assert_eq!(fm.block_degree(), 2);
        let c = [rat_i64(1), rat_i64(0)];
        assert_eq!(chow_weight(&fm, &c).unwrap(), rat_i64(1));
        let plain = chow_form(&VarietySpec::FullSpace { n: 1 }).unwrap();
        assert_eq!(
            normalized_chow_weight(&fm, &c).unwrap(),
            normalized_chow_weight(&plain, &c).unwrap()
        );
    }

    fn random_weights(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
        (0..len)
            .map(|_| rat_frac(rng.random_range(0..=8), rng.random_range(1..=4)))
            .collect()
    }

    #[test]
    fn full_space_weight_is_the_coordinate_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=3usize {
            let fm = chow_form(&VarietySpec::FullSpace { n }).unwrap();
            for _ in 0..10 {
                let c = random_weights(&mut rng, n + 1);
                let total: Rational = c.iter().cloned().sum();
                assert_eq!(chow_weight(&fm, &c).unwrap(), total);
            }
        }
    }

    #[test]
    fn conic_weight_examples() {
        let fm = chow_form(&conic()).unwrap();
        let c = [rat_i64(1), rat_i64(0), rat_i64(0)];
        assert_eq!(chow_weight(&fm, &c).unwrap(), rat_i64(2));
        assert_eq!(normalized_chow_weight(&fm, &c).unwrap(), rat_frac(1, 2));
        let zero = [rat_i64(0), rat_i64(0), rat_i64(0)];
        assert_eq!(chow_weight(&fm, &zero).unwrap(), rat_i64(0));
    }

    #[test]
    fn all_ones_weight_is_saturated_for_every_form() {
        for y in [
            VarietySpec::FullSpace { n: 2 },
            conic(),
            twisted_cubic(),
            quadric_surface(),
            line_in_plane(),
        ] {
            let fm = chow_form(&y).unwrap();
            let ones = vec![rat_i64(1); y.ambient_dim() + 1];
            assert_eq!(
                normalized_chow_weight(&fm, &ones).unwrap(),
                rat_i64(1),
                "{y:?}"
            );
        }
    }

    #[test]
    fn weight_is_homogeneous_and_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for y in [conic(), twisted_cubic()] {
            let fm = chow_form(&y).unwrap();
            let len = y.ambient_dim() + 1;
            for _ in 0..15 {
                let c = random_weights(&mut rng, len);
                let c2 = random_weights(&mut rng, len);
                let lambda = rat_frac(rng.random_range(0..=6), rng.random_range(1..=3));
                let scaled: Vec<Rational> = c.iter().map(|q| q * &lambda).collect();
                assert_eq!(
                    chow_weight(&fm, &scaled).unwrap(),
                    chow_weight(&fm, &c).unwrap() * &lambda
                );
                let summed: Vec<Rational> =
                    c.iter().zip(&c2).map(|(a, b)| a + b).collect();
                assert!(
                    chow_weight(&fm, &summed).unwrap()
                        <= chow_weight(&fm, &c).unwrap() + chow_weight(&fm, &c2).unwrap()
                );
            }
        }
    }

    #[test]
    fn conic_coordinate_subsets() {
        let fm = chow_form(&conic()).unwrap();
        assert!(coordinate_subset_check(&fm, &[0, 2]).unwrap());
        assert!(!coordinate_subset_check(&fm, &[0, 1]).unwrap());
        assert!(!coordinate_subset_check(&fm, &[1, 2]).unwrap());
        assert_eq!(admissible_subsets(&fm).unwrap(), vec![vec![0, 2]]);
    }

    #[test]
    fn quadric_containing_every_coordinate_point_has_no_admissible_subset() {
        let fm = chow_form(&quadric_surface()).unwrap();
        assert!(admissible_subsets(&fm).unwrap().is_empty());
    }

    #[test]
    fn twisted_cubic_admits_only_the_outer_coordinate_pair() {
        let fm = chow_form(&twisted_cubic()).unwrap();
        assert_eq!(admissible_subsets(&fm).unwrap(), vec![vec![0, 3]]);
    }

    #[test]
    fn support_weight_slack_examples() {
        let fm = chow_form(&conic()).unwrap();
        let c = [rat_i64(1), rat_i64(0), rat_i64(0)];
        assert_eq!(support_weight_slack(&fm, &c, &[0, 2]).unwrap(), rat_i64(0));
        assert!(support_weight_slack(&fm, &c, &[0, 1]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let p2 = chow_form(&VarietySpec::FullSpace { n: 2 }).unwrap();
        for _ in 0..10 {
            let c = random_weights(&mut rng, 3);
            assert_eq!(
                support_weight_slack(&p2, &c, &[0, 1, 2]).unwrap(),
                rat_i64(0)
            );
        }

        let cubic = chow_form(&twisted_cubic()).unwrap();
        let c = [rat_i64(1), rat_i64(0), rat_i64(0), rat_i64(0)];
        for subset in admissible_subsets(&cubic).unwrap() {
            assert!(support_weight_slack(&cubic, &c, &subset).unwrap() >= rat_i64(0));
        }
    }

    #[test]
    fn slack_is_nonnegative_across_varieties_weights_and_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for y in [
            VarietySpec::FullSpace { n: 2 },
            conic(),
            twisted_cubic(),
            line_in_plane(),
        ] {
            let fm = chow_form(&y).unwrap();
            let subsets = admissible_subsets(&fm).unwrap();
            assert!(!subsets.is_empty(), "{y:?}");
            for _ in 0..10 {
                let c = random_weights(&mut rng, y.ambient_dim() + 1);
                for subset in &subsets {
                    assert!(
                        support_weight_slack(&fm, &c, subset).unwrap() >= rat_i64(0),
                        "{y:?} {subset:?} {c:?}"
                    );
                }
            }
        }
    }

    fn random_point_on(y: &VarietySpec, rng: &mut ChaCha8Rng) -> Vec<FieldElement> {
        match y {
            VarietySpec::FullSpace { n } => (0..=*n)
                .map(|_| fe(rng.random_range(1..=9)))
                .collect(),
            VarietySpec::Hypersurface { f } if f.nvars() == 3 => {
                let (a, b) = (rng.random_range(1..=9i64), rng.random_range(1..=9i64));
                vec![fe(a * a), fe(a * b), fe(b * b)]
            }
            VarietySpec::Hypersurface { .. } => {
                let (a, b) = (rng.random_range(1..=9i64), rng.random_range(1..=9i64));
                let (c, d) = (rng.random_range(1..=9i64), rng.random_range(1..=9i64));
                vec![fe(a * c), fe(a * d), fe(b * c), fe(b * d)]
            }
            VarietySpec::LinearSubvariety { map } => {
                let t: Vec<Rational> = (0..map[0].len())
                    .map(|_| rat_i64(rng.random_range(1..=9)))
                    .collect();
                map.iter()
                    .map(|row| {
                        let v: Rational =
                            row.iter().zip(&t).map(|(a, b)| a * b).sum();
                        FieldElement::from_rational(NumberField::Rationals, v)
                    })
                    .collect()
            }
            VarietySpec::ParametrizedImage { gs } => {
                let t = [fe(rng.random_range(1..=9)), fe(rng.random_range(1..=9))];
                gs.iter().map(|g| g.evaluate(&t).unwrap()).collect()
            }
        }
    }

    /// A random tuple of hyperplane coefficient rows all vanishing at p.
    fn hyperplanes_through(
        p: &[FieldElement],
        slots: usize,
        rng: &mut ChaCha8Rng,
    ) -> Vec<FieldElement> {
        let width = p.len();
        let pivot = p.iter().position(|c| !c.is_zero()).unwrap();
        let mut flat = Vec::with_capacity(width * slots);
        for _ in 0..slots {
            let mut row: Vec<FieldElement> =
                (0..width).map(|_| fe(rng.random_range(-5..=5))).collect();
            let dot = row
                .iter()
                .zip(p)
                .fold(FieldElement::zero(NumberField::Rationals), |acc, (u, x)| {
                    &acc + &(u * x)
                });
            let correction = &dot * &p[pivot].inv().unwrap();
            row[pivot] = &row[pivot] - &correction;
            flat.extend(row);
        }
        flat
    }

    #[test]
    fn forms_vanish_on_incident_hyperplane_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        for y in [
            VarietySpec::FullSpace { n: 2 },
            conic(),
            twisted_cubic(),
            quadric_surface(),
            line_in_plane(),
        ] {
            let fm = chow_form(&y).unwrap();
            let slots = fm.form.blocks().len();
            for _ in 0..15 {
                let p = random_point_on(&y, &mut rng);
                let u = hyperplanes_through(&p, slots, &mut rng);
                assert!(
                    fm.form.evaluate_field(&u).unwrap().is_zero(),
                    "{y:?} point {p:?}"
                );
            }
        }
    }

    #[test]
    fn generic_tuples_match_the_elimination_oracle_on_curves() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let cubic = twisted_cubic();
        let gs = match &cubic {
            VarietySpec::ParametrizedImage { gs } => gs.clone(),
            _ => unreachable!(),
        };
        let fm = chow_form(&cubic).unwrap();
        let mut vanished = 0;
        for _ in 0..30 {
            let u: Vec<FieldElement> =
                (0..8).map(|_| fe(rng.random_range(-4..=4))).collect();
            let value = fm.form.evaluate_field(&u).unwrap();
            let pullbacks: Vec<HomogeneousPoly> = (0..2)
                .map(|h| {
                    let mut acc = HomogeneousPoly::zero(NumberField::Rationals, 2, 3);
                    for (i, g) in gs.iter().enumerate() {
                        acc = acc.add(&g.scale(&u[h * 4 + i])).unwrap();
                    }
                    acc
                })
                .collect();
            let shares = binary_forms_share_zero(&pullbacks).unwrap();
            assert_eq!(value.is_zero(), shares);
            if value.is_zero() {
                vanished += 1;
            }
        }
        assert!(vanished < 10);
    }

    #[test]
    fn generic_tuples_match_the_cramer_oracle_on_the_conic() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let fm = chow_form(&conic()).unwrap();
        let f = match conic() {
            VarietySpec::Hypersurface { f } => f,
            _ => unreachable!(),
        };
        let content = FieldElement::from_rational(NumberField::Rationals, fm.content.clone());
        for _ in 0..40 {
            let u: Vec<FieldElement> =
                (0..6).map(|_| fe(rng.random_range(-4..=4))).collect();
            let value = fm.form.evaluate_field(&u).unwrap();
            let cross = [
                &(&u[1] * &u[5]) - &(&u[2] * &u[4]),
                &(&u[2] * &u[3]) - &(&u[0] * &u[5]),
                &(&u[0] * &u[4]) - &(&u[1] * &u[3]),
            ];
            assert_eq!(&value * &content, f.evaluate(&cross).unwrap());
        }
    }

    #[test]
    fn multinomial_twist_factors() {
        let fm = delta_chow_form(&VarietySpec::FullSpace { n: 1 }, 2).unwrap();
        let factors = veronese_twist_factors(&fm, 2, 2).unwrap();
        assert_eq!(factors.len(), 6);
        assert_eq!(factors[0], QuadraticSurd::one());
        assert_eq!(
            factors[1],
            QuadraticSurd::new(rat_i64(1), 2).unwrap()
        );
        assert_eq!(factors[2], QuadraticSurd::one());
    }

    #[test]
    fn trivial_twist_keeps_heights_exactly() {
        let fm = chow_form(&VarietySpec::FullSpace { n: 1 }).unwrap();
        let g = modified_chow_form(&fm, 2, 1).unwrap();
        let slack = modified_height_gap_slack(&fm, &g, 1, 1).unwrap();
        assert!(slack.is_zero_exact());
    }

    #[test]
    fn twist_gap_stays_in_the_envelope() {
        for delta in 2..=3u32 {
            let fm = delta_chow_form(&VarietySpec::FullSpace { n: 1 }, delta).unwrap();
            let g = modified_chow_form(&fm, 2, delta).unwrap();
            let slack = modified_height_gap_slack(&fm, &g, 1, delta).unwrap();
            assert_eq!(slack.sign3().unwrap(), Ordering::Greater, "delta {delta}");
        }
    }

    #[test]
    fn veronese_height_envelope_holds_on_lines() {
        for delta in 1..=3u32 {
            let slack =
                veronese_height_envelope_slack(&VarietySpec::FullSpace { n: 1 }, delta)
                    .unwrap();
            assert_ne!(slack.sign3().unwrap(), Ordering::Less, "delta {delta}");
        }
        let slack = veronese_height_envelope_slack(&line_in_plane(), 2).unwrap();
        assert_ne!(slack.sign3().unwrap(), Ordering::Less);
    }

    #[test]
    fn image_height_envelope_examples() {
        let veronese: Vec<HomogeneousPoly> = vec![
            parse_homogeneous("x0^2", Some(2)).unwrap(),
            parse_homogeneous("x0 x1", Some(2)).unwrap(),
            parse_homogeneous("x1^2", Some(2)).unwrap(),
        ];
        let slack = image_height_envelope_slack(&veronese).unwrap();
        assert_ne!(slack.sign3().unwrap(), Ordering::Less);

        let skew = vec![
            parse_homogeneous("x0^2", Some(2)).unwrap(),
            parse_homogeneous("x0 x1 + x1^2", Some(2)).unwrap(),
            parse_homogeneous("x1^2", Some(2)).unwrap(),
        ];
        let slack = image_height_envelope_slack(&skew).unwrap();
        assert_ne!(slack.sign3().unwrap(), Ordering::Less);

        let based = vec![
            parse_homogeneous("x0^2", Some(2)).unwrap(),
            parse_homogeneous("x0 x1", Some(2)).unwrap(),
        ];
        assert!(image_height_envelope_slack(&based).is_err());
    }
}
