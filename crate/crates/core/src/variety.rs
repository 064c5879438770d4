//! Presentations of the supported projective varieties and the exact
//! graded data attached to them: the degree-m piece of the defining
//! ideal, the Hilbert function, degree and dimension, and weighted
//! monomial bases. Ideals come from pullback kernels along the
//! presentation, which is exact linear algebra; no Groebner machinery.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::rational::{binomial, Rational};
use crate::error::{CoreError, Result};
use crate::linalg::{QMatrix, RowSpan};
use crate::poly::homog::HomogeneousPoly;
use crate::poly::monomial::{monomials_of_degree, Monomial};

const MONOMIAL_GUARD: u64 = 20_000;
const PULLBACK_GUARD: u64 = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub enum VarietySpec {
    /// All of projective n-space.
    FullSpace { n: usize },
    /// The divisor cut out by one form in its ambient space.
    Hypersurface { f: HomogeneousPoly },
    /// The image of a full-rank linear embedding of a smaller projective
    /// space; rows index ambient coordinates, columns source coordinates.
    LinearSubvariety { map: Vec<Vec<Rational>> },
    /// The image of the projective line under equal-degree binary forms
    /// with no common zero.
    ParametrizedImage { gs: Vec<HomogeneousPoly> },
}

impl VarietySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            VarietySpec::FullSpace { n } => {
                if *n == 0 {
                    return Err(CoreError::Invalid("ambient dimension zero".into()));
                }
            }
            VarietySpec::Hypersurface { f } => {
                if f.is_zero() || f.degree() == 0 {
                    return Err(CoreError::Invalid(
                        "hypersurface needs a nonconstant form".into(),
                    ));
                }
                if f.nvars() < 3 {
                    return Err(CoreError::Invalid(
                        "hypersurface ambient must be a plane or larger".into(),
                    ));
                }
                if f.field() != NumberField::Rationals {
                    return Err(CoreError::Unsupported(
                        "hypersurface presentations take rational coefficients".into(),
                    ));
                }
            }
            VarietySpec::LinearSubvariety { map } => {
                let rows = map.len();
                let cols = map.first().map_or(0, Vec::len);
                if cols == 0 || cols > rows || map.iter().any(|r| r.len() != cols) {
                    return Err(CoreError::Invalid("linear presentation shape".into()));
                }
                if cols < 2 {
                    return Err(CoreError::Invalid("source must be at least a line".into()));
                }
                let m = QMatrix::from_rows(map.clone())?;
                if m.rank() != cols {
                    return Err(CoreError::Invalid("linear presentation not injective".into()));
                }
            }
            VarietySpec::ParametrizedImage { gs } => {
                if gs.len() < 2 {
                    return Err(CoreError::Invalid(
                        "image needs at least two coordinates".into(),
                    ));
                }
                let e = gs[0].degree();
                if e == 0 {
                    return Err(CoreError::Invalid("constant parametrization".into()));
                }
                for g in gs {
                    if g.nvars() != 2 || g.degree() != e {
                        return Err(CoreError::Invalid(
                            "parametrization wants equal-degree binary forms".into(),
                        ));
                    }
                }
                if gs.iter().all(HomogeneousPoly::is_zero) {
                    return Err(CoreError::Invalid(
                        "parametrization is identically zero".into(),
                    ));
                }
                if binary_forms_share_zero(gs)? {
                    return Err(CoreError::Invalid("parametrization has a base point".into()));
                }
            }
        }
        Ok(())
    }

    /// Dimension R of the ambient projective space.
    pub fn ambient_dim(&self) -> usize {
        match self {
            VarietySpec::FullSpace { n } => *n,
            VarietySpec::Hypersurface { f } => f.nvars() - 1,
            VarietySpec::LinearSubvariety { map } => map.len() - 1,
            VarietySpec::ParametrizedImage { gs } => gs.len() - 1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            VarietySpec::FullSpace { n } => *n,
            VarietySpec::Hypersurface { f } => f.nvars() - 2,
            VarietySpec::LinearSubvariety { map } => map[0].len() - 1,
            VarietySpec::ParametrizedImage { .. } => 1,
        }
    }
}

/// Whether a family of binary forms has a common projective zero over
/// the algebraic closure. Any common zero forces the gcd of the forms to
/// be nonconstant, so an exact gcd chain on dehomogenizations answers
/// the question without factoring; the point at infinity is handled by
/// checking shared divisibility by the first variable.
pub fn binary_forms_share_zero(gs: &[HomogeneousPoly]) -> Result<bool> {
    let live: Vec<&HomogeneousPoly> = gs.iter().filter(|g| !g.is_zero()).collect();
    if live.is_empty() {
        return Ok(true);
    }
    let at_infinity = live.iter().all(|g| {
        g.binary_coeffs()
            .map(|c| c.last().is_none_or(FieldElement::is_zero))
            .unwrap_or(false)
    });
    if at_infinity {
        return Ok(true);
    }
    let mut acc: Option<Vec<FieldElement>> = None;
    for g in live {
        let coeffs = g.binary_coeffs()?;
        let next = match acc {
            None => trim_poly(coeffs),
            Some(prev) => poly_gcd(prev, coeffs)?,
        };
        if next.len() == 1 {
            return Ok(false);
        }
        acc = Some(next);
    }
    Ok(acc.is_none_or(|g| g.len() > 1))
}

fn trim_poly(mut v: Vec<FieldElement>) -> Vec<FieldElement> {
    while v.len() > 1 && v.last().unwrap().is_zero() {
        v.pop();
    }
    v
}

/// Euclidean gcd of two univariate coefficient vectors in ascending
/// powers; the result is only used through its degree.
fn poly_gcd(a: Vec<FieldElement>, b: Vec<FieldElement>) -> Result<Vec<FieldElement>> {
    let mut a = trim_poly(a);
    let mut b = trim_poly(b);
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !(b.len() == 1 && b[0].is_zero()) {
        while a.len() >= b.len() && !(a.len() == 1 && a[0].is_zero()) {
            let lead = a.last().unwrap().clone();
            if lead.is_zero() {
                a.pop();
                continue;
            }
            let factor = &lead * &b.last().unwrap().inv()?;
            let shift = a.len() - b.len();
            for (i, bc) in b.iter().enumerate() {
                let sub = &factor * bc;
                a[shift + i] = &a[shift + i] - &sub;
            }
            a.pop();
            if a.is_empty() {
                a.push(FieldElement::zero(b[0].field));
            }
            a = trim_poly(a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    Ok(trim_poly(a))
}

/// The degree-m graded piece of the defining ideal: an echelonized span
/// of coefficient vectors over the canonical degree-m monomial basis.
#[derive(Debug, Clone)]
pub struct GradedPiece {
    pub m: u32,
    pub monomials: Vec<Monomial>,
    pub span: RowSpan,
}

impl GradedPiece {
    pub fn rank(&self) -> usize {
        self.span.rank()
    }

    pub fn hilbert_value(&self) -> usize {
        self.monomials.len() - self.span.rank()
    }
}

fn guard_monomials(r: usize, m: u32) -> Result<Vec<Monomial>> {
    let count = binomial((r + m as usize) as u64, m as u64);
    if count > BigInt::from(MONOMIAL_GUARD) {
        return Err(CoreError::SizeGuard(format!(
            "degree-{m} monomial basis has {count} elements, guard {MONOMIAL_GUARD}"
        )));
    }
    Ok(monomials_of_degree(r + 1, m))
}

/// Kernel of the linear map sending ambient degree-m monomials to their
/// pullbacks along the presentation entries, expanded over the source
/// monomial basis. Quadratic-field coefficients contribute their
/// rational and surd components as separate rows, so the kernel is
/// exactly the space of rational forms vanishing on the image.
fn pullback_kernel(
    images: &[HomogeneousPoly],
    ambient_monos: &[Monomial],
    m: u32,
) -> Result<Vec<Vec<Rational>>> {
    let src_vars = images[0].nvars();
    let e = images[0].degree();
    let target_monos = monomials_of_degree(src_vars, m * e);
    let field = images
        .iter()
        .map(HomogeneousPoly::field)
        .find(|f| *f != NumberField::Rationals)
        .unwrap_or(NumberField::Rationals);
    let quadratic = field != NumberField::Rationals;
    let rows = target_monos.len() * if quadratic { 2 } else { 1 };
    if (rows as u64) > PULLBACK_GUARD {
        return Err(CoreError::SizeGuard(format!(
            "pullback dimension {rows}, guard {PULLBACK_GUARD}"
        )));
    }
    let images: Vec<HomogeneousPoly> = images
        .iter()
        .map(|g| g.promote(field))
        .collect::<Result<_>>()?;
    let target_index: std::collections::BTreeMap<&Monomial, usize> = target_monos
        .iter()
        .enumerate()
        .map(|(i, mo)| (mo, i))
        .collect();

    let one = HomogeneousPoly::monomial(
        field,
        Monomial::constant(src_vars),
        FieldElement::one(field),
    )?;
    let mut pows: Vec<Vec<HomogeneousPoly>> = images.iter().map(|_| vec![one.clone()]).collect();
    for (i, g) in images.iter().enumerate() {
        let mut acc = one.clone();
        for _ in 1..=m {
            acc = acc.mul(g)?;
            pows[i].push(acc.clone());
        }
    }

    let mut matrix = QMatrix::zeros(rows, ambient_monos.len());
    for (col, mono) in ambient_monos.iter().enumerate() {
        let mut prod = pows[0][mono.0[0] as usize].clone();
        for (i, &exp) in mono.0.iter().enumerate().skip(1) {
            if exp > 0 {
                prod = prod.mul(&pows[i][exp as usize])?;
            }
        }
        for (tm, coeff) in prod.terms() {
            let r = target_index[tm];
            matrix.set(r, col, coeff.a.clone());
            if quadratic {
                matrix.set(r + target_monos.len(), col, coeff.b.clone());
            }
        }
    }
    Ok(matrix.nullspace())
}

pub fn ideal_piece(y: &VarietySpec, m: u32) -> Result<GradedPiece> {
    y.validate()?;
    if m == 0 {
        return Err(CoreError::Invalid("graded pieces start at degree one".into()));
    }
    let r = y.ambient_dim();
    let monomials = guard_monomials(r, m)?;
    let mut span = RowSpan::new(monomials.len());
    match y {
        VarietySpec::FullSpace { .. } => {}
        VarietySpec::Hypersurface { f } => {
            let deg = f.degree();
            if m >= deg {
                let index: std::collections::BTreeMap<&Monomial, usize> =
                    monomials.iter().enumerate().map(|(i, mo)| (mo, i)).collect();
                for shift in monomials_of_degree(r + 1, m - deg) {
                    let shifted = f.mul(&HomogeneousPoly::monomial(
                        NumberField::Rationals,
                        shift,
                        FieldElement::one(NumberField::Rationals),
                    )?)?;
                    let mut v = vec![Rational::zero(); monomials.len()];
                    for (mono, c) in shifted.terms() {
                        v[index[mono]] = c.a.clone();
                    }
                    span.insert(&v);
                }
            }
        }
        VarietySpec::LinearSubvariety { map } => {
            let src = map[0].len();
            let forms: Vec<HomogeneousPoly> = map
                .iter()
                .map(|row| {
                    HomogeneousPoly::new(
                        NumberField::Rationals,
                        src,
                        1,
                        row.iter().enumerate().map(|(j, q)| {
                            (
                                Monomial::variable(src, j),
                                FieldElement::from_rational(NumberField::Rationals, q.clone()),
                            )
                        }),
                    )
                })
                .collect::<Result<_>>()?;
            for row in pullback_kernel(&forms, &monomials, m)? {
                span.insert(&row);
            }
        }
        VarietySpec::ParametrizedImage { gs } => {
            for row in pullback_kernel(gs, &monomials, m)? {
                span.insert(&row);
            }
        }
    }
    Ok(GradedPiece { m, monomials, span })
}

pub fn hilbert_function(y: &VarietySpec, m: u32) -> Result<usize> {
    Ok(ideal_piece(y, m)?.hilbert_value())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeDimension {
    pub dim: usize,
    pub degree: u64,
    /// Generic fibre cardinality of the presentation; 1 except for
    /// parametrizations that wrap their image multiple times.
    pub fibre_degree: u64,
}

/// Finite differences of the Hilbert function at n+2 consecutive values.
/// Once the function has stabilized to its polynomial the n-th
/// difference is constant and equals the degree.
fn hilbert_fit(y: &VarietySpec, n: usize, m0: u32) -> Result<u64> {
    let mut values: Vec<i64> = Vec::new();
    for k in 0..(n as u32 + 2) {
        values.push(hilbert_function(y, m0 + k)? as i64);
    }
    for _ in 0..n {
        values = values.windows(2).map(|w| w[1] - w[0]).collect();
    }
    if values[0] <= 0 || values[1] != values[0] {
        return Err(CoreError::Invalid(
            "Hilbert values do not fit a stabilized polynomial; the presentation \
             may not be reduced and irreducible"
                .into(),
        ));
    }
    Ok(values[0] as u64)
}

pub fn degree_dimension(y: &VarietySpec) -> Result<DegreeDimension> {
    y.validate()?;
    let n = y.dim();
    let direct = match y {
        VarietySpec::FullSpace { .. } | VarietySpec::LinearSubvariety { .. } => DegreeDimension {
            dim: n,
            degree: 1,
            fibre_degree: 1,
        },
        VarietySpec::Hypersurface { f } => DegreeDimension {
            dim: n,
            degree: f.degree() as u64,
            fibre_degree: 1,
        },
        VarietySpec::ParametrizedImage { gs } => {
            let e = gs[0].degree() as u64;
            let image_degree = hilbert_fit(y, 1, gs[0].degree().max(2))?;
            if e % image_degree != 0 {
                return Err(CoreError::Invalid(
                    "parametrization degree is not a multiple of the image degree".into(),
                ));
            }
            DegreeDimension {
                dim: 1,
                degree: image_degree,
                fibre_degree: e / image_degree,
            }
        }
    };
    // cross-check against a Hilbert polynomial fit when the guard allows
    match hilbert_fit(y, n, (direct.degree as u32).max(2)) {
        Ok(fitted) => {
            if fitted != direct.degree {
                return Err(CoreError::Invalid(format!(
                    "presentation degree {} disagrees with Hilbert fit {}",
                    direct.degree, fitted
                )));
            }
        }
        Err(CoreError::SizeGuard(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(direct)
}

/// Largest total c-weight of a monomial basis of the degree-m coordinate
/// ring, together with the chosen monomials. Greedy over descending
/// weight with canonical-order tie-breaks; the exchange property of
/// linear independence makes the greedy value the exact maximum.
pub fn hilbert_weight(
    y: &VarietySpec,
    m: u32,
    c: &[Rational],
) -> Result<(Rational, Vec<Monomial>)> {
    let piece = ideal_piece(y, m)?;
    let (s, chosen) = hilbert_weight_on_piece(&piece, c)?;
    Ok((
        s,
        chosen.into_iter().map(|i| piece.monomials[i].clone()).collect(),
    ))
}

/// Indices of the chosen monomials within the canonical degree-m order.
pub fn optimal_support(y: &VarietySpec, m: u32, c: &[Rational]) -> Result<Vec<usize>> {
    let piece = ideal_piece(y, m)?;
    Ok(hilbert_weight_on_piece(&piece, c)?.1)
}

pub fn hilbert_weight_on_piece(
    piece: &GradedPiece,
    c: &[Rational],
) -> Result<(Rational, Vec<usize>)> {
    let nvars = piece.monomials.first().map_or(0, Monomial::nvars);
    if c.len() != nvars {
        return Err(CoreError::Invalid(format!(
            "weight vector has {} entries, ambient wants {}",
            c.len(),
            nvars
        )));
    }
    if c.iter().any(|q| q < &Rational::zero()) {
        return Err(CoreError::Invalid("weights must be nonnegative".into()));
    }
    let target = piece.hilbert_value();
    let weights: Vec<Rational> = piece.monomials.iter().map(|mo| mo.weight(c)).collect();
    let mut order: Vec<usize> = (0..piece.monomials.len()).collect();
    order.sort_by(|&i, &j| weights[j].cmp(&weights[i]).then(i.cmp(&j)));
    let mut work = piece.span.clone();
    let mut chosen = Vec::with_capacity(target);
    let mut s = Rational::zero();
    for idx in order {
        if chosen.len() == target {
            break;
        }
        let mut unit = vec![Rational::zero(); piece.monomials.len()];
        unit[idx] = Rational::from_integer(1.into());
        if work.insert(&unit) {
            chosen.push(idx);
            s += &weights[idx];
        }
    }
    debug_assert_eq!(chosen.len(), target);
    chosen.sort_unstable();
    Ok((s, chosen))
}

/// Reference presentations shared by tests, benches, and examples.
pub mod zoo {
    use super::VarietySpec;
    use crate::arith::rational::rat_i64;
    use crate::poly::text::parse_homogeneous;

    /// The plane conic x0 x2 = x1^2.
    pub fn conic() -> VarietySpec {
        VarietySpec::Hypersurface {
            f: parse_homogeneous("x0 x2 + -1 * x1^2", Some(3)).unwrap(),
        }
    }

    /// The degree-3 rational normal curve in 3-space.
    pub fn twisted_cubic() -> VarietySpec {
        VarietySpec::ParametrizedImage {
            gs: vec![
                parse_homogeneous("x0^3", Some(2)).unwrap(),
                parse_homogeneous("x0^2 x1", Some(2)).unwrap(),
                parse_homogeneous("x0 x1^2", Some(2)).unwrap(),
                parse_homogeneous("x1^3", Some(2)).unwrap(),
            ],
        }
    }

    /// The smooth quadric x0 x3 = x1 x2 in 3-space.
    pub fn quadric_surface() -> VarietySpec {
        VarietySpec::Hypersurface {
            f: parse_homogeneous("x0 x3 + -1 * x1 x2", Some(4)).unwrap(),
        }
    }

    /// The line x2 = x0 + x1 in the plane.
    pub fn line_in_plane() -> VarietySpec {
        VarietySpec::LinearSubvariety {
            map: vec![
                vec![rat_i64(1), rat_i64(0)],
                vec![rat_i64(0), rat_i64(1)],
                vec![rat_i64(1), rat_i64(1)],
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::zoo::{conic, line_in_plane, quadric_surface, twisted_cubic};
    use super::*;
    use crate::arith::rational::{rat_frac, rat_i64};
    use crate::poly::text::parse_homogeneous;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ideal_pieces_of_the_reference_varieties() {
        let p2 = VarietySpec::FullSpace { n: 2 };
        let piece = ideal_piece(&p2, 3).unwrap();
        assert_eq!(piece.rank(), 0);
        assert_eq!(hilbert_function(&p2, 3).unwrap(), 10);

        let piece = ideal_piece(&conic(), 3).unwrap();
        assert_eq!(piece.rank(), 3);
        assert_eq!(hilbert_function(&conic(), 3).unwrap(), 7);

        let piece = ideal_piece(&twisted_cubic(), 2).unwrap();
        assert_eq!(piece.rank(), 3);
        assert_eq!(hilbert_function(&twisted_cubic(), 2).unwrap(), 7);
    }

    #[test]
    fn kernel_rows_vanish_on_sampled_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cubic = twisted_cubic();
        let piece = ideal_piece(&cubic, 2).unwrap();
        let gs = match &cubic {
            VarietySpec::ParametrizedImage { gs } => gs.clone(),
            _ => unreachable!(),
        };
        for _ in 0..20 {
            let t = [
                FieldElement::from_i64(NumberField::Rationals, rng.random_range(-9..=9)),
                FieldElement::from_i64(NumberField::Rationals, rng.random_range(1..=9)),
            ];
            let point: Vec<FieldElement> = gs.iter().map(|g| g.evaluate(&t).unwrap()).collect();
            for row in piece.span.basis() {
                let mut acc = FieldElement::zero(NumberField::Rationals);
                for (mono, coeff) in piece.monomials.iter().zip(row) {
                    if !coeff.is_zero() {
                        let c =
                            FieldElement::from_rational(NumberField::Rationals, coeff.clone());
                        acc = &acc + &(&c * &mono.evaluate(&point));
                    }
                }
                assert!(acc.is_zero());
            }
        }
    }

    #[test]
    fn hilbert_function_closed_forms() {
        for m in 1..=5u32 {
            assert_eq!(
                BigInt::from(hilbert_function(&VarietySpec::FullSpace { n: 3 }, m).unwrap()),
                binomial(3 + m as u64, 3)
            );
            assert_eq!(hilbert_function(&conic(), m).unwrap(), 2 * m as usize + 1);
            assert_eq!(
                hilbert_function(&twisted_cubic(), m).unwrap(),
                3 * m as usize + 1
            );
            assert_eq!(
                hilbert_function(&quadric_surface(), m).unwrap(),
                (m as usize + 1) * (m as usize + 1)
            );
            assert_eq!(hilbert_function(&line_in_plane(), m).unwrap(), m as usize + 1);
        }
    }

    #[test]
    fn hilbert_values_stay_under_the_degree_envelope() {
        for (y, n, d) in [
            (VarietySpec::FullSpace { n: 2 }, 2usize, 1u64),
            (conic(), 1, 2),
            (twisted_cubic(), 1, 3),
            (quadric_surface(), 2, 2),
        ] {
            for m in 1..=5u32 {
                let h = hilbert_function(&y, m).unwrap();
                let cap = binomial((m as usize + n) as u64, n as u64) * BigInt::from(d);
                assert!(BigInt::from(h) <= cap, "{y:?} m={m}");
            }
        }
    }

    #[test]
    fn degree_dimension_reads_and_fits() {
        assert_eq!(
            degree_dimension(&VarietySpec::FullSpace { n: 3 }).unwrap(),
            DegreeDimension { dim: 3, degree: 1, fibre_degree: 1 }
        );
        assert_eq!(
            degree_dimension(&conic()).unwrap(),
            DegreeDimension { dim: 1, degree: 2, fibre_degree: 1 }
        );
        assert_eq!(
            degree_dimension(&twisted_cubic()).unwrap(),
            DegreeDimension { dim: 1, degree: 3, fibre_degree: 1 }
        );
        assert_eq!(
            degree_dimension(&quadric_surface()).unwrap(),
            DegreeDimension { dim: 2, degree: 2, fibre_degree: 1 }
        );
        assert_eq!(
            degree_dimension(&line_in_plane()).unwrap(),
            DegreeDimension { dim: 1, degree: 1, fibre_degree: 1 }
        );
        // squares of the coordinates wrap the line onto itself twice
        let doubled = VarietySpec::ParametrizedImage {
            gs: vec![
                parse_homogeneous("x0^2", Some(2)).unwrap(),
                parse_homogeneous("x1^2", Some(2)).unwrap(),
            ],
        };
        assert_eq!(
            degree_dimension(&doubled).unwrap(),
            DegreeDimension { dim: 1, degree: 1, fibre_degree: 2 }
        );
    }

    #[test]
    fn base_points_are_rejected() {
        let bad = VarietySpec::ParametrizedImage {
            gs: vec![
                parse_homogeneous("x0^2", Some(2)).unwrap(),
                parse_homogeneous("x0 x1", Some(2)).unwrap(),
            ],
        };
        assert!(bad.validate().is_err());
        let good = VarietySpec::ParametrizedImage {
            gs: vec![
                parse_homogeneous("x0^2", Some(2)).unwrap(),
                parse_homogeneous("x0 x1 + x1^2", Some(2)).unwrap(),
            ],
        };
        assert!(good.validate().is_ok());
    }

    #[test]
    fn hilbert_weights_on_the_line() {
        let p1 = VarietySpec::FullSpace { n: 1 };
        let (s, chosen) = hilbert_weight(&p1, 2, &[rat_i64(1), rat_i64(0)]).unwrap();
        assert_eq!(s, rat_i64(3));
        assert_eq!(
            chosen,
            vec![
                Monomial(vec![2, 0]),
                Monomial(vec![1, 1]),
                Monomial(vec![0, 2])
            ]
        );
        let (s, _) = hilbert_weight(&p1, 2, &[rat_i64(1), rat_i64(1)]).unwrap();
        assert_eq!(s, rat_i64(6));
    }

    #[test]
    fn conic_weight_at_degree_one() {
        let (s, chosen) =
            hilbert_weight(&conic(), 1, &[rat_i64(1), rat_i64(0), rat_i64(0)]).unwrap();
        assert_eq!(s, rat_i64(1));
        assert_eq!(chosen.len(), 3);
    }

    #[test]
    fn proportional_weights_scale_the_saturated_value() {
        for (y, m) in [
            (VarietySpec::FullSpace { n: 2 }, 3u32),
            (conic(), 2),
            (twisted_cubic(), 2),
            (line_in_plane(), 3),
        ] {
            let r = y.ambient_dim();
            let h = hilbert_function(&y, m).unwrap();
            for q in [rat_i64(1), rat_frac(3, 2)] {
                let c = vec![q.clone(); r + 1];
                let (s, _) = hilbert_weight(&y, m, &c).unwrap();
                assert_eq!(s, rat_i64(m as i64 * h as i64) * &q);
            }
        }
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, k, &mut Vec::new(), &mut out);
        out
    }

    fn brute_force_weight(piece: &GradedPiece, c: &[Rational]) -> Option<Rational> {
        let total = piece.monomials.len();
        let mut best: Option<Rational> = None;
        for subset in subsets(total, piece.hilbert_value()) {
            let mut work = piece.span.clone();
            let independent = subset.iter().all(|&i| {
                let mut unit = vec![Rational::zero(); total];
                unit[i] = Rational::from_integer(1.into());
                work.insert(&unit)
            });
            if independent {
                let s: Rational = subset.iter().map(|&i| piece.monomials[i].weight(c)).sum();
                if best.as_ref().is_none_or(|b| &s > b) {
                    best = Some(s);
                }
            }
        }
        best
    }

    #[test]
    fn greedy_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let small: Vec<(VarietySpec, u32)> = vec![
            (VarietySpec::FullSpace { n: 1 }, 2),
            (VarietySpec::FullSpace { n: 1 }, 3),
            (VarietySpec::FullSpace { n: 2 }, 2),
            (conic(), 2),
            (line_in_plane(), 3),
        ];
        for (y, m) in small {
            let piece = ideal_piece(&y, m).unwrap();
            assert!(piece.monomials.len() <= 12);
            for _ in 0..12 {
                let c: Vec<Rational> = (0..=y.ambient_dim())
                    .map(|_| rat_frac(rng.random_range(0..=8), rng.random_range(1..=4)))
                    .collect();
                let (s, _) = hilbert_weight_on_piece(&piece, &c).unwrap();
                let oracle = brute_force_weight(&piece, &c).unwrap();
                assert_eq!(s, oracle, "{y:?} m={m} c={c:?}");
            }
        }
    }

    #[test]
    fn weight_bounds_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for y in [VarietySpec::FullSpace { n: 2 }, conic(), twisted_cubic()] {
            for m in 2..=3u32 {
                let piece = ideal_piece(&y, m).unwrap();
                let h = piece.hilbert_value();
                for _ in 0..8 {
                    let c: Vec<Rational> = (0..=y.ambient_dim())
                        .map(|_| rat_frac(rng.random_range(0..=6), rng.random_range(1..=3)))
                        .collect();
                    let (s, _) = hilbert_weight_on_piece(&piece, &c).unwrap();
                    let cmax = c.iter().max().unwrap();
                    let cmin = c.iter().min().unwrap();
                    let scale = rat_i64(m as i64 * h as i64);
                    assert!(s <= &scale * cmax);
                    assert!(s >= &scale * cmin);
                    let mut bumped = c.clone();
                    let j = rng.random_range(0..c.len());
                    bumped[j] += rat_i64(1);
                    let (s2, _) = hilbert_weight_on_piece(&piece, &bumped).unwrap();
                    assert!(s2 >= s);
                }
            }
        }
    }
}
