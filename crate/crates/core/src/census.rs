//! Census driver: compile an experiment description, certify that the
//! target systems have no common zero on the variety, equalize degrees,
//! scan primitive points up to a coordinate cap, evaluate the height
//! inequality exactly at every survivor, bucket solutions into covering
//! classes, compare twisted heights against the image variety, and fit
//! hypersurfaces through whatever the scan found. Reports render to TSV
//! and JSON with rationals printed exactly and logarithms printed as a
//! decimal plus an error bound.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::height::{log_abs, point_height, LogHeight};
use crate::arith::place::{places_above, Place, PlaceKind, RationalPlace};
use crate::arith::rational::{
    bigint_sign, format_rational, is_prime_u64, parse_rational, rat_frac, rat_i64, Rational,
};
use crate::bounds::{bounds_a, covering_theta, select_covering_tuple, system_count_bound, TheoremInputs};
use crate::chow::{chow_form, line_parametrization, normalized_chow_weight, ChowForm};
use crate::error::{CoreError, Result};
use crate::exec;
use crate::linalg::{QMatrix, RowSpan};
use crate::poly::heights::{block_heights, heights_of, norms_at_place, point_sup_at, CoeffList};
use crate::poly::homog::HomogeneousPoly;
use crate::poly::monomial::Monomial;
use crate::poly::text::{format_homogeneous, parse_homogeneous};
use crate::theight::{twisted_height, ChainVerdict, WeightFamily};
use crate::variety::{binary_forms_share_zero, degree_dimension, ideal_piece, VarietySpec};

const ENUMERATION_GUARD: u64 = 10_000_000;
const SCAN_GUARD: u64 = 2_000_000_000;
const SCAN_CHUNK: u64 = 64;
const DIVISOR_SEARCH_LIMIT: u64 = 1_000_000_000_000;
const SHADOW_GRID: i64 = 60;
const COORDINATE_ATTEMPTS: usize = 5;
const PENCIL_TRIALS: u32 = 24;

/// Ground field selector in a serialized experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldConfig {
    #[default]
    Rationals,
    Quadratic {
        d: i64,
    },
}

/// Variety selector in a serialized experiment. Forms are given in the
/// text syntax of the polynomial parser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarietyConfig {
    FullSpace { dim: usize },
    Hypersurface { form: String },
    ParametrizedImage { forms: Vec<String> },
}

/// Place selector: an archimedean or prime place of the ground field,
/// with an index choosing among the places above when the field splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceConfig {
    Infinity {
        #[serde(default)]
        index: usize,
    },
    Prime {
        p: u64,
        #[serde(default)]
        index: usize,
    },
}

/// One place together with its system of forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub place: PlaceConfig,
    pub forms: Vec<String>,
}

/// Serialized experiment: ground field, variety, one system of dim+1
/// forms per place, the margin exponent, and scan parameters. The
/// coordinate cap bounds the absolute value of the integer coordinates
/// of scanned points (of the parameters, for a parametrized variety).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub field: FieldConfig,
    pub variety: VarietyConfig,
    pub systems: Vec<SystemConfig>,
    pub delta: String,
    pub coordinate_cap: u64,
    #[serde(default = "default_fit_cap")]
    pub fit_degree_cap: u32,
    #[serde(default)]
    pub probabilistic_emptiness: bool,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_fit_cap() -> u32 {
    2
}

/// Parse a JSON experiment description.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    serde_json::from_str(text).map_err(|e| CoreError::Parse(format!("experiment config: {e}")))
}

/// A compiled experiment: every string resolved to a typed object and
/// every shape constraint checked.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub field: NumberField,
    pub variety: VarietySpec,
    pub systems: BTreeMap<Place, Vec<HomogeneousPoly>>,
    pub delta: Rational,
    pub coordinate_cap: u64,
    pub fit_degree_cap: u32,
    pub probabilistic_emptiness: bool,
    pub seed: u64,
}

/// Resolve and validate a parsed configuration.
pub fn compile_config(cfg: &ExperimentConfig) -> Result<Experiment> {
    let field = match cfg.field {
        FieldConfig::Rationals => NumberField::Rationals,
        FieldConfig::Quadratic { d } => NumberField::quadratic(d)?,
    };
    let variety = match &cfg.variety {
        VarietyConfig::FullSpace { dim } => VarietySpec::FullSpace { n: *dim },
        VarietyConfig::Hypersurface { form } => VarietySpec::Hypersurface {
            f: parse_homogeneous(form, None)?,
        },
        VarietyConfig::ParametrizedImage { forms } => {
            let gs = forms
                .iter()
                .map(|t| parse_homogeneous(t, Some(2)))
                .collect::<Result<Vec<_>>>()?;
            VarietySpec::ParametrizedImage { gs }
        }
    };
    variety.validate()?;
    let nvars = variety.ambient_dim() + 1;
    let n = variety.dim();
    if n == 0 {
        return Err(CoreError::Invalid("the variety must have positive dimension".into()));
    }
    let delta = parse_rational(&cfg.delta)?;
    if !delta.is_positive() || delta > rat_i64(1) {
        return Err(CoreError::Invalid(format!(
            "margin exponent {} outside (0, 1]",
            format_rational(&delta)
        )));
    }
    if cfg.systems.is_empty() {
        return Err(CoreError::Invalid("at least one place is required".into()));
    }
    if cfg.coordinate_cap == 0 {
        return Err(CoreError::Invalid("coordinate cap must be positive".into()));
    }
    let mut systems = BTreeMap::new();
    for sc in &cfg.systems {
        let (below, index) = match sc.place {
            PlaceConfig::Infinity { index } => (RationalPlace::Infinity, index),
            PlaceConfig::Prime { p, index } => {
                if !is_prime_u64(p) {
                    return Err(CoreError::Invalid(format!("{p} is not prime")));
                }
                (RationalPlace::Prime(p), index)
            }
        };
        let above = places_above(field, below);
        let place = *above.get(index).ok_or_else(|| {
            CoreError::Invalid(format!(
                "place index {index} out of range ({} places above)",
                above.len()
            ))
        })?;
        if systems.contains_key(&place) {
            return Err(CoreError::Invalid("duplicate place in the system list".into()));
        }
        if sc.forms.len() != n + 1 {
            return Err(CoreError::Invalid(format!(
                "system at one place has {} forms, the variety dimension wants {}",
                sc.forms.len(),
                n + 1
            )));
        }
        let mut forms = Vec::new();
        for text in &sc.forms {
            let f = parse_homogeneous(text, Some(nvars))?;
            if f.is_zero() || f.degree() == 0 {
                return Err(CoreError::Invalid("system forms must be nonconstant".into()));
            }
            if let NumberField::Quadratic { .. } = field {
                if f.field() != NumberField::Rationals && f.field() != field {
                    return Err(CoreError::Unsupported(
                        "form coefficients outside the ground field need a common quadratic field"
                            .into(),
                    ));
                }
            }
            forms.push(f);
        }
        systems.insert(place, forms);
    }
    Ok(Experiment {
        field,
        variety,
        systems,
        delta,
        coordinate_cap: cfg.coordinate_cap,
        fit_degree_cap: cfg.fit_degree_cap,
        probabilistic_emptiness: cfg.probabilistic_emptiness,
        seed: cfg.seed.unwrap_or(0x5eed_cafe),
    })
}

/// Outcome of the emptiness check at one place: whether the system has
/// no common zero on the variety over the algebraic closure, which
/// certificate decided it, and the failure probability when the only
/// available certificate was randomized.
#[derive(Debug, Clone)]
pub struct PlaceEmptiness {
    pub place: Place,
    pub empty: bool,
    pub certificate: String,
    pub error_bound: Option<f64>,
}

/// Check, place by place, that the forms have no common zero on the
/// variety. Exact for systems pulled back to a line, for linear systems,
/// and for plane systems whose elimination terminates with a constant
/// gcd or a rational shadow; plane systems that resist those steps fall
/// back to a randomized pencil certificate when the experiment opts in.
pub fn check_emptiness(x: &Experiment) -> Result<Vec<PlaceEmptiness>> {
    let mut out = Vec::new();
    for (place, fs) in &x.systems {
        let delta_v = fs
            .iter()
            .map(|f| f.degree() as u64)
            .fold(1u64, |a, b| a.lcm(&b));
        if delta_v > 40 {
            return Err(CoreError::SizeGuard(format!(
                "degree lcm {delta_v} too large for the emptiness check"
            )));
        }
        let gs: Vec<HomogeneousPoly> = fs
            .iter()
            .map(|f| f.pow((delta_v / f.degree() as u64) as u32))
            .collect();
        let (empty, certificate, error_bound) = match &x.variety {
            VarietySpec::FullSpace { n: 1 } => {
                let shared = binary_forms_share_zero(&gs)?;
                (!shared, "binary gcd chain".to_string(), None)
            }
            VarietySpec::ParametrizedImage { .. } | VarietySpec::LinearSubvariety { .. } => {
                let params = line_parametrization(&x.variety)?;
                let pulled = pull_back_to_line(&gs, &params)?;
                let shared = binary_forms_share_zero(&pulled)?;
                (!shared, "pulled back to the line".to_string(), None)
            }
            VarietySpec::FullSpace { n: 2 } => {
                plane_emptiness(&gs, x.probabilistic_emptiness, x.seed)?
            }
            VarietySpec::Hypersurface { f } if f.nvars() == 3 => {
                let joint = (delta_v).lcm(&(f.degree() as u64));
                if joint > 40 {
                    return Err(CoreError::SizeGuard(format!(
                        "degree lcm {joint} too large for the emptiness check"
                    )));
                }
                let mut forms = vec![f.pow((joint / f.degree() as u64) as u32)];
                for g in &gs {
                    forms.push(g.pow((joint / g.degree() as u64) as u32));
                }
                plane_emptiness(&forms, x.probabilistic_emptiness, x.seed)?
            }
            VarietySpec::FullSpace { .. } if gs.iter().all(|g| g.degree() == 1) => {
                let m: Vec<Vec<FieldElement>> = gs
                    .iter()
                    .map(|g| linear_coefficient_row(g))
                    .collect::<Result<Vec<_>>>()?;
                let det = field_det(m)?;
                (!det.is_zero(), "linear determinant".to_string(), None)
            }
            _ => {
                return Err(CoreError::Unsupported(
                    "emptiness check covers the line, the plane, plane curves, parametrized images, and linear systems".into(),
                ))
            }
        };
        out.push(PlaceEmptiness {
            place: *place,
            empty,
            certificate,
            error_bound,
        });
    }
    Ok(out)
}

fn pull_back_to_line(
    gs: &[HomogeneousPoly],
    params: &[HomogeneousPoly],
) -> Result<Vec<HomogeneousPoly>> {
    let mut pulled = Vec::new();
    for g in gs {
        let subs: Vec<HomogeneousPoly> = params
            .iter()
            .map(|p| p.promote(g.field()))
            .collect::<Result<Vec<_>>>()?;
        pulled.push(g.compose(&subs)?);
    }
    Ok(pulled)
}

fn linear_coefficient_row(g: &HomogeneousPoly) -> Result<Vec<FieldElement>> {
    let nvars = g.nvars();
    let mut row = vec![FieldElement::zero(g.field()); nvars];
    for (m, c) in g.terms() {
        let var = m
            .0
            .iter()
            .position(|&e| e == 1)
            .ok_or_else(|| CoreError::Invalid("degree-one form without a variable".into()))?;
        row[var] = c.clone();
    }
    Ok(row)
}

fn plane_emptiness(
    forms: &[HomogeneousPoly],
    probabilistic: bool,
    seed: u64,
) -> Result<(bool, String, Option<f64>)> {
    debug_assert_eq!(forms.len(), 3);
    let degree = forms[0].degree();
    debug_assert!(forms.iter().all(|f| f.degree() == degree));
    if forms.iter().any(HomogeneousPoly::is_zero) {
        return Ok((false, "a form vanished identically".to_string(), None));
    }
    let field = forms
        .iter()
        .map(HomogeneousPoly::field)
        .find(|f| *f != NumberField::Rationals)
        .unwrap_or(NumberField::Rationals);
    let forms: Vec<HomogeneousPoly> = forms
        .iter()
        .map(|f| f.promote(field))
        .collect::<Result<Vec<_>>>()?;
    if degree == 1 {
        let rows = forms
            .iter()
            .map(|g| linear_coefficient_row(g))
            .collect::<Result<Vec<_>>>()?;
        let det = field_det(rows)?;
        return Ok((!det.is_zero(), "linear determinant".to_string(), None));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut first_transformed: Option<Vec<HomogeneousPoly>> = None;
    for _ in 0..COORDINATE_ATTEMPTS {
        let Some(t) = random_coordinate_change(&mut rng, field)? else {
            continue;
        };
        let transformed: Vec<HomogeneousPoly> = forms
            .iter()
            .map(|f| f.compose(&t))
            .collect::<Result<Vec<_>>>()?;
        let monic = transformed.iter().all(|f| {
            f.terms()
                .get(&pure_power_monomial(3, 2, degree))
                .is_some_and(|c| !c.is_zero())
        });
        if !monic {
            continue;
        }
        if first_transformed.is_none() {
            first_transformed = Some(transformed.clone());
        }
        let r1 = binary_resultant(&transformed[0], &transformed[1])?;
        let r2 = binary_resultant(&transformed[0], &transformed[2])?;
        if r1.is_zero() || r2.is_zero() {
            return Ok((false, "common factor after elimination".to_string(), None));
        }
        let g = binary_form_gcd(&r1, &r2)?;
        if g.degree() == 0 || g.is_zero() {
            return Ok((true, "plane elimination".to_string(), None));
        }
        for (a0, a1) in rational_shadows(&g)? {
            let slices: Vec<Vec<FieldElement>> = transformed
                .iter()
                .map(|f| slice_last_variable(f, &a0, &a1))
                .collect();
            if slices.iter().all(|s| fp_is_zero(s)) {
                return Ok((false, "a line lies on every form".to_string(), None));
            }
            let mut acc: Option<Vec<FieldElement>> = None;
            for s in &slices {
                if fp_is_zero(s) {
                    continue;
                }
                acc = Some(match acc {
                    None => fp_trim(s.clone()),
                    Some(prev) => fp_gcd(&prev, s)?,
                });
            }
            if acc.map(|g| g.len() > 1).unwrap_or(false) {
                return Ok((false, "a rational shadow extends".to_string(), None));
            }
        }
    }
    let Some(transformed) = first_transformed else {
        return Err(CoreError::Invalid(
            "no usable coordinate change for the plane elimination".into(),
        ));
    };
    if !probabilistic {
        return Err(CoreError::Unsupported(
            "plane elimination inconclusive; set probabilistic_emptiness to accept a randomized certificate".into(),
        ));
    }
    let r1 = binary_resultant(&transformed[0], &transformed[1])?;
    let lead1 = transformed[1]
        .terms()
        .get(&pure_power_monomial(3, 2, degree))
        .cloned()
        .unwrap_or_else(|| FieldElement::zero(field));
    let lead2 = transformed[2]
        .terms()
        .get(&pure_power_monomial(3, 2, degree))
        .cloned()
        .unwrap_or_else(|| FieldElement::zero(field));
    for _ in 0..PENCIL_TRIALS {
        let t: i64 = rng.random_range(1..(1i64 << 40));
        let te = FieldElement::from_rational(field, rat_i64(t));
        if (&lead1 + &(&lead2 * &te)).is_zero() {
            continue;
        }
        let pencil = transformed[1].add(&transformed[2].scale(&te))?;
        let rt = binary_resultant(&transformed[0], &pencil)?;
        if rt.is_zero() {
            continue;
        }
        let g = binary_form_gcd(&r1, &rt)?;
        if g.degree() == 0 || g.is_zero() {
            return Ok((true, "pencil elimination".to_string(), None));
        }
    }
    let per_trial = (degree as f64).powi(3) / (1i64 << 40) as f64;
    let error = per_trial.powi(PENCIL_TRIALS as i32).min(1.0);
    Ok((
        false,
        format!("no constant pencil gcd in {PENCIL_TRIALS} trials"),
        Some(error),
    ))
}

fn random_coordinate_change(
    rng: &mut ChaCha8Rng,
    field: NumberField,
) -> Result<Option<Vec<HomogeneousPoly>>> {
    let mut entries = [[0i64; 3]; 3];
    for row in &mut entries {
        for e in row.iter_mut() {
            *e = rng.random_range(-3..=3);
        }
    }
    let det = entries[0][0] * (entries[1][1] * entries[2][2] - entries[1][2] * entries[2][1])
        - entries[0][1] * (entries[1][0] * entries[2][2] - entries[1][2] * entries[2][0])
        + entries[0][2] * (entries[1][0] * entries[2][1] - entries[1][1] * entries[2][0]);
    if det == 0 {
        return Ok(None);
    }
    let mut subs = Vec::new();
    for row in &entries {
        let mut terms = Vec::new();
        for (j, &c) in row.iter().enumerate() {
            if c != 0 {
                terms.push((
                    Monomial::variable(3, j),
                    FieldElement::from_rational(field, rat_i64(c)),
                ));
            }
        }
        subs.push(HomogeneousPoly::new(field, 3, 1, terms)?);
    }
    Ok(Some(subs))
}

fn pure_power_monomial(nvars: usize, var: usize, degree: u32) -> Monomial {
    let mut exps = vec![0u32; nvars];
    exps[var] = degree;
    Monomial(exps)
}

/// Coefficients of f(a0, a1, t) as a univariate polynomial in the last
/// variable, constant term first.
fn slice_last_variable(f: &HomogeneousPoly, a0: &FieldElement, a1: &FieldElement) -> Vec<FieldElement> {
    let degree = f.degree() as usize;
    let mut out = vec![FieldElement::zero(f.field()); degree + 1];
    for (m, c) in f.terms() {
        let e0 = m.0[0];
        let e1 = m.0[1];
        let e2 = m.0[2] as usize;
        let mut v = c.clone();
        for _ in 0..e0 {
            v = &v * a0;
        }
        for _ in 0..e1 {
            v = &v * a1;
        }
        out[e2] = &out[e2] + &v;
    }
    fp_pad(out, degree + 1)
}

fn fp_pad(mut v: Vec<FieldElement>, len: usize) -> Vec<FieldElement> {
    let field = v
        .first()
        .map(|c| c.field)
        .unwrap_or(NumberField::Rationals);
    while v.len() < len {
        v.push(FieldElement::zero(field));
    }
    v
}

fn fp_trim(mut v: Vec<FieldElement>) -> Vec<FieldElement> {
    while v.last().is_some_and(FieldElement::is_zero) {
        v.pop();
    }
    v
}

fn fp_is_zero(v: &[FieldElement]) -> bool {
    v.iter().all(FieldElement::is_zero)
}

fn fp_rem(a: &[FieldElement], b: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let b = fp_trim(b.to_vec());
    if b.is_empty() {
        return Err(CoreError::Invalid("polynomial division by zero".into()));
    }
    let mut r = fp_trim(a.to_vec());
    let lead = b.last().unwrap().inv()?;
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let q = r.last().unwrap() * &lead;
        for (i, bc) in b.iter().enumerate() {
            let sub = bc * &q;
            r[shift + i] = &r[shift + i] - &sub;
        }
        r = fp_trim(r);
        if r.is_empty() {
            break;
        }
        if r.len() > shift + b.len() {
            return Err(CoreError::Invalid("division failed to reduce the degree".into()));
        }
    }
    Ok(r)
}

fn fp_gcd(a: &[FieldElement], b: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let mut x = fp_trim(a.to_vec());
    let mut y = fp_trim(b.to_vec());
    while !y.is_empty() {
        let r = fp_rem(&x, &y)?;
        x = y;
        y = r;
    }
    if let Some(lead) = x.last().cloned() {
        let inv = lead.inv()?;
        for c in &mut x {
            *c = &*c * &inv;
        }
    }
    Ok(x)
}

/// Resultant in the last variable of two ternary forms of equal degree
/// whose top coefficient in that variable is a nonzero constant. The
/// answer is a binary form in the first two variables, computed by
/// interpolating scalar Sylvester determinants.
fn binary_resultant(f: &HomogeneousPoly, g: &HomogeneousPoly) -> Result<HomogeneousPoly> {
    let field = f.field();
    let d = f.degree() as usize;
    debug_assert_eq!(g.degree() as usize, d);
    let target = d * d;
    let mut samples = Vec::with_capacity(target + 1);
    for k in 0..=target {
        let t = rat_i64(if k % 2 == 0 { (k / 2) as i64 } else { -((k / 2 + 1) as i64) });
        let a0 = FieldElement::one(field);
        let a1 = FieldElement::from_rational(field, t.clone());
        let pf = slice_last_variable(f, &a0, &a1);
        let pg = slice_last_variable(g, &a0, &a1);
        let value = sylvester_resultant(&pf, &pg, d)?;
        samples.push((t, value));
    }
    let coeffs = lagrange_coefficients(field, &samples)?;
    let mut terms = Vec::new();
    for (j, c) in coeffs.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut exps = vec![0u32; 2];
        exps[0] = (target - j) as u32;
        exps[1] = j as u32;
        terms.push((Monomial(exps), c));
    }
    if terms.is_empty() {
        return Ok(HomogeneousPoly::zero(field, 2, target as u32));
    }
    HomogeneousPoly::new(field, 2, target as u32, terms)
}

fn sylvester_resultant(pf: &[FieldElement], pg: &[FieldElement], d: usize) -> Result<FieldElement> {
    let field = pf
        .first()
        .map(|c| c.field)
        .unwrap_or(NumberField::Rationals);
    let pf = fp_pad(pf.to_vec(), d + 1);
    let pg = fp_pad(pg.to_vec(), d + 1);
    let size = 2 * d;
    let mut m = vec![vec![FieldElement::zero(field); size]; size];
    for row in 0..d {
        for (i, c) in pf.iter().enumerate() {
            m[row][row + d - i] = c.clone();
        }
    }
    for row in 0..d {
        for (i, c) in pg.iter().enumerate() {
            m[d + row][row + d - i] = c.clone();
        }
    }
    field_det(m)
}

fn lagrange_coefficients(
    field: NumberField,
    samples: &[(Rational, FieldElement)],
) -> Result<Vec<FieldElement>> {
    let n = samples.len();
    let mut acc = vec![FieldElement::zero(field); n];
    for (i, (ti, vi)) in samples.iter().enumerate() {
        if vi.is_zero() {
            continue;
        }
        let mut basis = vec![FieldElement::one(field)];
        let mut denom = Rational::one();
        for (j, (tj, _)) in samples.iter().enumerate() {
            if i == j {
                continue;
            }
            denom *= ti - tj;
            let mut next = vec![FieldElement::zero(field); basis.len() + 1];
            let root = FieldElement::from_rational(field, tj.clone());
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] = &next[k + 1] + b;
                let shifted = b * &root;
                next[k] = &next[k] - &shifted;
            }
            basis = next;
        }
        let scale = vi * &FieldElement::from_rational(field, Rational::one() / denom);
        for (k, b) in basis.iter().enumerate() {
            let add = b * &scale;
            acc[k] = &acc[k] + &add;
        }
    }
    Ok(acc)
}

fn field_det(mut m: Vec<Vec<FieldElement>>) -> Result<FieldElement> {
    let n = m.len();
    if n == 0 {
        return Err(CoreError::Invalid("determinant of an empty matrix".into()));
    }
    let field = m[0][0].field;
    let mut det = FieldElement::one(field);
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(FieldElement::zero(field));
        };
        if pivot != col {
            m.swap(pivot, col);
            det = &det * &FieldElement::from_rational(field, -Rational::one());
        }
        let p = m[col][col].clone();
        det = &det * &p;
        let inv = p.inv()?;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] * &inv;
            for c in col..n {
                let sub = &m[col][c] * &factor;
                m[r][c] = &m[r][c] - &sub;
            }
        }
    }
    Ok(det)
}

/// Gcd of two nonzero binary forms, up to the common power of the first
/// variable plus the gcd of the dehomogenizations.
fn binary_form_gcd(a: &HomogeneousPoly, b: &HomogeneousPoly) -> Result<HomogeneousPoly> {
    let field = a.field();
    let (pa, x0a) = dehomogenize_binary(a);
    let (pb, x0b) = dehomogenize_binary(b);
    let pg = fp_gcd(&pa, &pb)?;
    let x0 = x0a.min(x0b);
    let deg = pg.len().saturating_sub(1) as u32 + x0;
    let mut terms = Vec::new();
    for (j, c) in pg.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        terms.push((Monomial(vec![deg - j as u32, j as u32]), c.clone()));
    }
    if terms.is_empty() {
        return Ok(HomogeneousPoly::zero(field, 2, 0));
    }
    HomogeneousPoly::new(field, 2, deg, terms)
}

fn dehomogenize_binary(f: &HomogeneousPoly) -> (Vec<FieldElement>, u32) {
    let d = f.degree() as usize;
    let mut coeffs = vec![FieldElement::zero(f.field()); d + 1];
    for (m, c) in f.terms() {
        coeffs[m.0[1] as usize] = c.clone();
    }
    let trimmed = fp_trim(coeffs);
    let x0_mult = (d + 1 - trimmed.len()) as u32;
    (trimmed, x0_mult)
}

/// Canonical rational zeros (a0 : a1) of a binary form with entries in a
/// quadratic field: a zero must kill both the rational and the surd part,
/// so the search runs over the gcd of those two rational forms. Large
/// coefficients switch the root search to a bounded grid, which can only
/// shrink the candidate list; callers treat the list as a superset check.
fn rational_shadows(g: &HomogeneousPoly) -> Result<Vec<(FieldElement, FieldElement)>> {
    let field = g.field();
    let (pg, x0_mult) = dehomogenize_binary(g);
    let mut a_part: Vec<Rational> = pg.iter().map(|c| c.a.clone()).collect();
    let b_part: Vec<Rational> = pg.iter().map(|c| c.b.clone()).collect();
    if a_part.iter().all(Rational::is_zero) {
        a_part = b_part.clone();
    } else if !b_part.iter().all(Rational::is_zero) {
        let fa: Vec<FieldElement> = a_part
            .iter()
            .map(|c| FieldElement::from_rational(NumberField::Rationals, c.clone()))
            .collect();
        let fb: Vec<FieldElement> = b_part
            .iter()
            .map(|c| FieldElement::from_rational(NumberField::Rationals, c.clone()))
            .collect();
        a_part = fp_gcd(&fa, &fb)?.into_iter().map(|c| c.a).collect();
    }
    let mut shadows = Vec::new();
    if x0_mult > 0 {
        shadows.push((FieldElement::zero(field), FieldElement::one(field)));
    }
    let ints = clear_rational_denominators(&a_part);
    let trimmed: Vec<BigInt> = {
        let mut v = ints.clone();
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        v
    };
    if trimmed.len() <= 1 {
        return Ok(shadows);
    }
    let lead = trimmed.last().unwrap().clone();
    let tail = trimmed
        .iter()
        .find(|c| !c.is_zero())
        .cloned()
        .unwrap_or_else(BigInt::one);
    let mut candidates: BTreeSet<(i64, i64)> = BTreeSet::new();
    let small_enough = |v: &BigInt| v.magnitude().to_u64().is_some_and(|m| m <= DIVISOR_SEARCH_LIMIT);
    if small_enough(&lead) && small_enough(&tail) {
        let ps = divisors_of(&tail);
        let qs = divisors_of(&lead);
        for &p in &ps {
            for &q in &qs {
                if (p as i64).gcd(&(q as i64)) == 1 {
                    candidates.insert((p as i64, q as i64));
                    candidates.insert((-(p as i64), q as i64));
                }
            }
        }
        candidates.insert((0, 1));
    } else {
        for p in -SHADOW_GRID..=SHADOW_GRID {
            for q in 1..=SHADOW_GRID {
                if p.gcd(&q) == 1 {
                    candidates.insert((p, q));
                }
            }
        }
    }
    for (p, q) in candidates {
        let t = rat_frac(p, q);
        let mut value = Rational::zero();
        let mut power = Rational::one();
        for c in &a_part {
            value += c * &power;
            power *= &t;
        }
        if value.is_zero() {
            shadows.push((
                FieldElement::from_rational(field, rat_i64(q)),
                FieldElement::from_rational(field, rat_i64(p)),
            ));
        }
    }
    Ok(shadows)
}

fn clear_rational_denominators(v: &[Rational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for c in v {
        l = l.lcm(c.denom());
    }
    v.iter().map(|c| (c * Rational::from(l.clone())).to_integer()).collect()
}

fn divisors_of(v: &BigInt) -> Vec<u64> {
    let m = v.magnitude().to_u64().unwrap_or(0).max(1);
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            out.push(m / d);
        }
        d += 1;
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// The equalized system: every form raised to a common degree, conjugate
/// forms appended when coefficients live above the ground field, owners
/// recording which indices each place contributed, and the heights that
/// feed the headline bounds. The image variety is present whenever the
/// base variety is a line or a parametrized curve and every equalized
/// form is rational.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub field: NumberField,
    pub coefficient_field: NumberField,
    pub degree_lcm: u32,
    pub conjugacy_bound: u32,
    pub variety_degree: u64,
    pub forms: Vec<HomogeneousPoly>,
    pub owners: BTreeMap<Place, Vec<usize>>,
    pub image: Option<VarietySpec>,
    pub image_degree: Option<u64>,
    pub system_height: LogHeight,
    pub height_payload: LogHeight,
}

fn constant_one(field: NumberField, nvars: usize) -> Result<HomogeneousPoly> {
    HomogeneousPoly::new(
        field,
        nvars,
        0,
        vec![(Monomial::constant(nvars), FieldElement::one(field))],
    )
}

fn has_irrational_coeff(f: &HomogeneousPoly) -> bool {
    f.terms().values().any(|c| !c.b.is_zero())
}

fn max_log(candidates: Vec<LogHeight>) -> Result<LogHeight> {
    let mut iter = candidates.into_iter();
    let mut best = iter
        .next()
        .ok_or_else(|| CoreError::Invalid("maximum of an empty set".into()))?;
    for cand in iter {
        if cand.cmp3(&best)? == std::cmp::Ordering::Greater {
            best = cand;
        }
    }
    Ok(best)
}

/// Equalize the system to a common degree, close it under conjugation,
/// and derive the image data. Internal height inequalities are checked
/// along the way and violations are hard errors.
pub fn reduce_system(x: &Experiment) -> Result<Reduction> {
    let n = x.variety.dim();
    let s = x.systems.len();
    let nvars = x.variety.ambient_dim() + 1;
    let degree_lcm = x
        .systems
        .values()
        .flat_map(|fs| fs.iter().map(|f| f.degree() as u64))
        .fold(1u64, |a, b| a.lcm(&b));
    if degree_lcm > 40 {
        return Err(CoreError::SizeGuard(format!(
            "degree lcm {degree_lcm} too large to equalize"
        )));
    }
    let degree_lcm = degree_lcm as u32;
    let mut coefficient_field = x.field;
    let mut conjugacy_bound = 1u32;
    for f in x.systems.values().flatten() {
        if let NumberField::Quadratic { .. } = f.field() {
            if f.field() != x.field && has_irrational_coeff(f) {
                if coefficient_field == NumberField::Rationals {
                    coefficient_field = f.field();
                } else if coefficient_field != f.field() {
                    return Err(CoreError::FieldMismatch(
                        "two different quadratic coefficient fields".into(),
                    ));
                }
                conjugacy_bound = 2;
            }
        }
    }
    let mut forms: Vec<HomogeneousPoly> = Vec::new();
    let mut owners: BTreeMap<Place, Vec<usize>> = BTreeMap::new();
    for (place, fs) in &x.systems {
        let mut idxs = Vec::new();
        for f in fs {
            let g = f
                .pow(degree_lcm / f.degree())
                .promote(coefficient_field)?;
            let at = match forms.iter().position(|h| h == &g) {
                Some(i) => i,
                None => {
                    forms.push(g);
                    forms.len() - 1
                }
            };
            if idxs.contains(&at) {
                return Err(CoreError::Invalid(
                    "two forms at one place equalize to the same power".into(),
                ));
            }
            idxs.push(at);
        }
        owners.insert(*place, idxs);
    }
    if coefficient_field != x.field {
        let mut i = 0;
        while i < forms.len() {
            let c = forms[i].conj();
            if !forms.contains(&c) {
                forms.push(c);
            }
            i += 1;
        }
    }
    let budget = conjugacy_bound as usize * (n + 1) * s;
    if forms.len() > budget {
        return Err(CoreError::Invalid(format!(
            "conjugate closure produced {} forms, more than its budget {budget}",
            forms.len()
        )));
    }
    let (_, system_height) = crate::poly::heights::poly_heights(&forms)?;
    let variety_height = match &x.variety {
        VarietySpec::FullSpace { .. } => LogHeight::zero(),
        _ => block_heights(&chow_form(&x.variety)?.form)?.0,
    };
    let mut coeff_heights = Vec::new();
    for f in x.systems.values().flatten() {
        let pair = vec![constant_one(f.field(), nvars)?, f.clone()];
        coeff_heights.push(heights_of(&CoeffList::of_polys(&pair)?)?.0);
    }
    let height_payload = variety_height.add(&max_log(coeff_heights)?);
    let ambient = x.variety.ambient_dim() as i64;
    let height_unit = LogHeight::ln_of_rational(&rat_i64(2 * ambient))?.add(&height_payload);
    let dd = degree_dimension(&x.variety)?;
    let variety_degree = dd.degree;
    let scale = rat_i64(6 * (degree_lcm as i64) * (degree_lcm as i64))
        * rat_i64(conjugacy_bound as i64 * n as i64 * s as i64);
    if system_height.sub(&height_unit.scale(&scale)).sign3()? == std::cmp::Ordering::Greater {
        return Err(CoreError::Invalid(
            "equalized system height exceeded its bound".into(),
        ));
    }
    let mut image = None;
    let mut image_degree = None;
    if coefficient_field == NumberField::Rationals {
        if let Ok(params) = line_parametrization(&x.variety) {
            let pulled = pull_back_to_line(&forms, &params)?;
            if !binary_forms_share_zero(&pulled)? {
                let y = VarietySpec::ParametrizedImage { gs: pulled };
                y.validate()?;
                let ydd = degree_dimension(&y)?;
                if ydd.dim != n {
                    return Err(CoreError::Invalid(format!(
                        "image dimension {} does not match the variety dimension {n}",
                        ydd.dim
                    )));
                }
                let degree_cap = variety_degree
                    .checked_mul((degree_lcm as u64).pow(n as u32))
                    .ok_or_else(|| CoreError::SizeGuard("image degree overflow".into()))?;
                if ydd.degree > degree_cap {
                    return Err(CoreError::Invalid(format!(
                        "image degree {} exceeded its bound {degree_cap}",
                        ydd.degree
                    )));
                }
                let hy = block_heights(&chow_form(&y)?.form)?.0;
                let yscale = rat_i64(25 * (n as i64) * (n as i64))
                    * rat_i64(variety_degree as i64)
                    * Rational::from(BigInt::from(degree_lcm).pow(n as u32 + 2))
                    * rat_i64(conjugacy_bound as i64 * s as i64);
                if hy.sub(&height_unit.scale(&yscale)).sign3()? == std::cmp::Ordering::Greater {
                    return Err(CoreError::Invalid(
                        "image height exceeded its bound".into(),
                    ));
                }
                image_degree = Some(ydd.degree);
                image = Some(y);
            }
        }
    }
    Ok(Reduction {
        field: x.field,
        coefficient_field,
        degree_lcm,
        conjugacy_bound,
        variety_degree,
        forms,
        owners,
        image,
        image_degree,
        system_height,
        height_payload,
    })
}

/// Number of primitive canonical points on the line with coordinates
/// bounded by the cap: the two unit points plus two points per coprime
/// pair, counted by Moebius inversion.
pub fn primitive_pair_count(cap: u64) -> u64 {
    if cap == 0 {
        return 2;
    }
    let mu = moebius_table(cap as usize);
    let mut coprime_pairs: i64 = 0;
    for k in 1..=cap {
        let c = (cap / k) as i64;
        coprime_pairs += mu[k as usize] as i64 * c * c;
    }
    2 + 2 * coprime_pairs as u64
}

fn moebius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    let mut primes = Vec::new();
    let mut composite = vec![false; n + 1];
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let v = i * p;
            if v > n {
                break;
            }
            composite[v] = true;
            if i % p == 0 {
                mu[v] = 0;
                break;
            }
            mu[v] = -mu[i];
        }
    }
    mu
}

fn int_gcd(a: i64, b: i64) -> i64 {
    a.abs().gcd(&b.abs())
}

fn visit_line_points(cap: i64, mut visit: impl FnMut(&[i64])) {
    visit(&[0, 1]);
    for a in 1..=cap {
        for b in -cap..=cap {
            if int_gcd(a, b) == 1 {
                visit(&[a, b]);
            }
        }
    }
}

fn visit_plane_points(cap: i64, mut visit: impl FnMut(&[i64])) {
    visit(&[0, 0, 1]);
    for b in 1..=cap {
        for c in -cap..=cap {
            if int_gcd(b, c) == 1 {
                visit(&[0, b, c]);
            }
        }
    }
    for a in 1..=cap {
        for b in -cap..=cap {
            for c in -cap..=cap {
                if int_gcd(int_gcd(a, b), c) == 1 {
                    visit(&[a, b, c]);
                }
            }
        }
    }
}

fn rational_coords(field: NumberField, ints: &[i64]) -> Vec<FieldElement> {
    ints.iter()
        .map(|&v| FieldElement::from_rational(field, rat_i64(v)))
        .collect()
}

/// Scale a rational vector to a primitive integer vector whose first
/// nonzero entry is positive.
fn canonical_integer_point(vals: &[Rational]) -> Result<Vec<BigInt>> {
    let mut l = BigInt::one();
    for v in vals {
        l = l.lcm(v.denom());
    }
    let mut ints: Vec<BigInt> = vals
        .iter()
        .map(|v| (v * Rational::from(l.clone())).to_integer())
        .collect();
    let mut content = BigInt::zero();
    for v in &ints {
        content = content.gcd(v);
    }
    if content.is_zero() {
        return Err(CoreError::Invalid("the zero vector is not a point".into()));
    }
    let first = ints.iter().find(|v| !v.is_zero()).unwrap();
    let sign = BigInt::from(bigint_sign(first));
    let divisor = content * sign;
    for v in &mut ints {
        *v = &*v / &divisor;
    }
    Ok(ints)
}

/// Materialize the canonical primitive points of the variety with
/// coordinates (parameters, for a parametrized image) bounded by the
/// cap. Guarded by a candidate budget; the census scanner streams
/// instead when scanning large ranges.
pub fn enumerate_points(variety: &VarietySpec, cap: u64) -> Result<Vec<Vec<FieldElement>>> {
    let cap_i = i64::try_from(cap)
        .map_err(|_| CoreError::SizeGuard("coordinate cap overflowed".into()))?;
    let field = NumberField::Rationals;
    let line_candidates = (2 * cap + 1).saturating_mul(cap).saturating_add(1);
    let plane_candidates = (2 * cap + 1)
        .saturating_mul(2 * cap + 1)
        .saturating_mul(cap)
        .saturating_add((2 * cap + 1).saturating_mul(cap))
        .saturating_add(1);
    let mut out = Vec::new();
    match variety {
        VarietySpec::FullSpace { n: 1 } => {
            guard_candidates(line_candidates)?;
            visit_line_points(cap_i, |p| out.push(rational_coords(field, p)));
        }
        VarietySpec::FullSpace { n: 2 } => {
            guard_candidates(plane_candidates)?;
            visit_plane_points(cap_i, |p| out.push(rational_coords(field, p)));
        }
        VarietySpec::Hypersurface { f } if f.nvars() == 3 => {
            guard_candidates(plane_candidates)?;
            let mut err = None;
            visit_plane_points(cap_i, |p| {
                if err.is_some() {
                    return;
                }
                let coords = rational_coords(f.field(), p);
                match f.evaluate(&coords) {
                    Ok(v) if v.is_zero() => out.push(rational_coords(field, p)),
                    Ok(_) => {}
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        VarietySpec::ParametrizedImage { gs } => {
            guard_candidates(line_candidates)?;
            let mut err = None;
            let mut seen = BTreeSet::new();
            visit_line_points(cap_i, |p| {
                if err.is_some() {
                    return;
                }
                let params = rational_coords(gs[0].field(), p);
                let vals: Result<Vec<Rational>> = gs
                    .iter()
                    .map(|g| g.evaluate(&params).map(|v| v.a))
                    .collect();
                match vals.and_then(|v| canonical_integer_point(&v)) {
                    Ok(ints) => {
                        if seen.insert(ints.clone()) {
                            out.push(
                                ints.iter()
                                    .map(|v| {
                                        FieldElement::from_rational(field, Rational::from(v.clone()))
                                    })
                                    .collect(),
                            );
                        }
                    }
                    Err(e) => err = Some(e),
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        _ => {
            return Err(CoreError::Unsupported(
                "enumeration covers the line, the plane, plane curves, and parametrized images"
                    .into(),
            ))
        }
    }
    Ok(out)
}

fn guard_candidates(candidates: u64) -> Result<()> {
    if candidates > ENUMERATION_GUARD {
        return Err(CoreError::SizeGuard(format!(
            "{candidates} enumeration candidates exceed the materialization guard"
        )));
    }
    Ok(())
}

/// Verdict for one scanned point. A record is a solution when the margin
/// sign is decided and nonpositive, or when some form vanishes at the
/// point, in which case the left side is off to negative infinity and
/// the record is flagged through the vanishing list instead of a margin.
#[derive(Debug, Clone)]
pub struct SolutionRecord {
    pub point: Vec<FieldElement>,
    pub height: LogHeight,
    pub lhs: Option<LogHeight>,
    pub margin: Option<LogHeight>,
    pub vanishing: Vec<(Place, usize)>,
    pub decided: bool,
    pub is_solution: bool,
    pub meets_height_floor: bool,
}

fn conjugate_orbit(coords: &[FieldElement]) -> Vec<Vec<FieldElement>> {
    let rational = coords.iter().all(|c| c.b.is_zero());
    if rational {
        vec![coords.to_vec()]
    } else {
        vec![coords.to_vec(), coords.iter().map(FieldElement::conj).collect()]
    }
}

/// The classical log absolute value of a field element at a place of the
/// ground field, extended to the coefficient field through the first
/// place above when the element lives in a strictly larger field.
fn classical_log_abs(z: &FieldElement, v: &Place) -> Result<LogHeight> {
    if z.field == v.field {
        let lambda = v.local_degree_ratio();
        return Ok(log_abs(z, v)?.scale(&(Rational::one() / lambda)));
    }
    if v.field != NumberField::Rationals {
        return Err(CoreError::FieldMismatch(
            "value field and place field are incompatible".into(),
        ));
    }
    let below = match v.residue_prime() {
        Some(p) => RationalPlace::Prime(p),
        None => RationalPlace::Infinity,
    };
    let above = places_above(z.field, below);
    let w = above
        .first()
        .ok_or_else(|| CoreError::Invalid("no place above".into()))?;
    let lambda = w.local_degree_ratio();
    Ok(log_abs(z, w)?.scale(&(Rational::one() / lambda)))
}

/// Evaluate the height inequality at one point, exactly. The point must
/// lie on the variety and have coordinates in the ground field.
pub fn evaluate_inequality(x: &Experiment, point: &[FieldElement]) -> Result<SolutionRecord> {
    let nvars = x.variety.ambient_dim() + 1;
    if point.len() != nvars {
        return Err(CoreError::Invalid(format!(
            "point has {} coordinates, the ambient space wants {nvars}",
            point.len()
        )));
    }
    let coords: Vec<FieldElement> = point
        .iter()
        .map(|c| c.promote(x.field))
        .collect::<Result<Vec<_>>>()?;
    if coords.iter().all(FieldElement::is_zero) {
        return Err(CoreError::Invalid("the zero vector is not a point".into()));
    }
    if let VarietySpec::Hypersurface { f } = &x.variety {
        let vals: Vec<FieldElement> = coords
            .iter()
            .map(|c| c.promote(f.field()))
            .collect::<Result<Vec<_>>>()?;
        if !f.evaluate(&vals)?.is_zero() {
            return Err(CoreError::Invalid("the point is off the variety".into()));
        }
    }
    let n = x.variety.dim();
    let height = point_height(&coords)?;
    let orbit = conjugate_orbit(&coords);
    let mut lhs = LogHeight::zero();
    let mut vanishing = Vec::new();
    let mut undecided = false;
    for (place, fs) in &x.systems {
        let lambda = place.local_degree_ratio();
        for (i, f) in fs.iter().enumerate() {
            let inv_deg = rat_frac(1, f.degree() as i64);
            let mut candidates = Vec::new();
            for sigma in &orbit {
                let vals: Vec<FieldElement> = sigma
                    .iter()
                    .map(|c| c.promote(join_fields(f.field(), c.field)?))
                    .collect::<Result<Vec<_>>>()?;
                let fe = f.promote(vals[0].field)?;
                let z = fe.evaluate(&vals)?;
                if z.is_zero() {
                    continue;
                }
                let value = classical_log_abs(&z, place)?.scale(&inv_deg);
                let norm = point_sup_at(sigma, place)?
                    .scale(&(Rational::one() / lambda.clone()));
                candidates.push(value.sub(&norm));
            }
            if candidates.is_empty() {
                vanishing.push((*place, i));
                continue;
            }
            match max_log(candidates) {
                Ok(best) => lhs = lhs.add(&best.scale(&lambda)),
                Err(CoreError::Undecidable { .. }) => {
                    undecided = true;
                }
                Err(e) => return Err(e),
            }
        }
    }
    if !vanishing.is_empty() {
        return Ok(SolutionRecord {
            point: coords,
            height,
            lhs: None,
            margin: None,
            vanishing,
            decided: true,
            is_solution: true,
            meets_height_floor: false,
        });
    }
    let exponent = rat_i64(n as i64 + 1) + x.delta.clone();
    let margin = lhs.add(&height.scale(&exponent));
    if undecided {
        return Ok(SolutionRecord {
            point: coords,
            height,
            lhs: Some(lhs),
            margin: Some(margin),
            vanishing,
            decided: false,
            is_solution: false,
            meets_height_floor: false,
        });
    }
    match margin.sign3() {
        Ok(sign) => Ok(SolutionRecord {
            point: coords,
            height,
            lhs: Some(lhs),
            margin: Some(margin),
            vanishing,
            decided: true,
            is_solution: sign != std::cmp::Ordering::Greater,
            meets_height_floor: false,
        }),
        Err(CoreError::Undecidable { .. }) => Ok(SolutionRecord {
            point: coords,
            height,
            lhs: Some(lhs),
            margin: Some(margin),
            vanishing,
            decided: false,
            is_solution: false,
            meets_height_floor: false,
        }),
        Err(e) => Err(e),
    }
}

fn join_fields(a: NumberField, b: NumberField) -> Result<NumberField> {
    match (a, b) {
        (NumberField::Rationals, f) | (f, NumberField::Rationals) => Ok(f),
        (fa, fb) if fa == fb => Ok(fa),
        _ => Err(CoreError::FieldMismatch(
            "two different quadratic fields".into(),
        )),
    }
}

struct IntForm {
    terms: Vec<(Vec<u8>, i128)>,
    degree: u32,
}

impl IntForm {
    fn eval(&self, pt: &[i64]) -> i128 {
        let mut total: i128 = 0;
        for (exps, c) in &self.terms {
            let mut v: i128 = *c;
            for (x, &e) in pt.iter().zip(exps.iter()) {
                for _ in 0..e {
                    v *= *x as i128;
                }
            }
            total += v;
        }
        total
    }

    fn magnitude_cap(&self, coord_cap: f64) -> f64 {
        self.terms
            .iter()
            .map(|(_, c)| (*c as f64).abs())
            .sum::<f64>()
            * coord_cap.powi(self.degree as i32)
    }
}

fn integer_form(f: &HomogeneousPoly) -> Result<(IntForm, BigInt)> {
    let mut den = BigInt::one();
    for c in f.terms().values() {
        if !c.b.is_zero() {
            return Err(CoreError::Unsupported(
                "integer scan wants rational coefficients".into(),
            ));
        }
        den = den.lcm(c.a.denom());
    }
    let mut terms = Vec::new();
    for (m, c) in f.terms() {
        let v = (&c.a * Rational::from(den.clone())).to_integer();
        let vi = v
            .to_i128()
            .ok_or_else(|| CoreError::SizeGuard("coefficient too large for the scan".into()))?;
        terms.push((m.0.iter().map(|&e| e as u8).collect(), vi));
    }
    Ok((
        IntForm {
            terms,
            degree: f.degree(),
        },
        den,
    ))
}

fn padic_valuation_i128(mut v: i128, p: u64) -> i64 {
    debug_assert!(v != 0);
    let p = p as i128;
    let mut k = 0;
    while v % p == 0 {
        v /= p;
        k += 1;
    }
    k
}

fn padic_valuation_big(v: &BigInt, p: u64) -> i64 {
    let mut v = v.clone();
    let p = BigInt::from(p);
    let mut k = 0;
    while !v.is_zero() && (&v % &p).is_zero() {
        v = v / &p;
        k += 1;
    }
    k
}

struct PreparedSlot {
    form: IntForm,
    lod: f64,
    lambda_arch: f64,
    ln_p: f64,
    prime: Option<u64>,
    den_ln: f64,
    den_vp: i64,
}

enum ScanShape {
    Line,
    Plane,
}

struct PreparedScan {
    shape: ScanShape,
    cap: i64,
    exponent: f64,
    slots: Vec<PreparedSlot>,
    param_forms: Option<Vec<IntForm>>,
    variety_filter: Option<IntForm>,
}

fn prepare_scan(x: &Experiment) -> Result<Option<PreparedScan>> {
    let rational_coeffs = x
        .systems
        .values()
        .flatten()
        .all(|f| !has_irrational_coeff(f));
    if !rational_coeffs {
        return Ok(None);
    }
    let cap = i64::try_from(x.coordinate_cap)
        .map_err(|_| CoreError::SizeGuard("coordinate cap overflowed".into()))?;
    let (shape, param_forms, variety_filter, image_cap) = match &x.variety {
        VarietySpec::FullSpace { n: 1 } => (ScanShape::Line, None, None, cap as f64),
        VarietySpec::FullSpace { n: 2 } => (ScanShape::Plane, None, None, cap as f64),
        VarietySpec::Hypersurface { f } if f.nvars() == 3 => {
            let (form, _) = integer_form(f)?;
            if form.magnitude_cap(cap as f64) > i128::MAX as f64 / 16.0 {
                return Err(CoreError::SizeGuard(
                    "variety filter overflows the integer scan".into(),
                ));
            }
            (ScanShape::Plane, None, Some(form), cap as f64)
        }
        VarietySpec::ParametrizedImage { gs } => {
            let mut den = BigInt::one();
            for g in gs {
                for c in g.terms().values() {
                    if !c.b.is_zero() {
                        return Ok(None);
                    }
                    den = den.lcm(c.a.denom());
                }
            }
            let mut forms = Vec::new();
            let mut worst: f64 = 1.0;
            for g in gs {
                let scaled = g.scale(&FieldElement::from_rational(
                    g.field(),
                    Rational::from(den.clone()),
                ));
                let (form, leftover) = integer_form(&scaled)?;
                debug_assert!(leftover.is_one());
                worst = worst.max(form.magnitude_cap(cap as f64));
                forms.push(form);
            }
            if worst > i128::MAX as f64 / 16.0 {
                return Err(CoreError::SizeGuard(
                    "parametrization overflows the integer scan".into(),
                ));
            }
            (ScanShape::Line, Some(forms), None, worst)
        }
        _ => return Ok(None),
    };
    let mut slots = Vec::new();
    for (place, fs) in &x.systems {
        let lambda = place
            .local_degree_ratio()
            .to_f64()
            .ok_or_else(|| CoreError::Invalid("local degree ratio".into()))?;
        for f in fs {
            let (form, den) = integer_form(f)?;
            if form.magnitude_cap(image_cap) > i128::MAX as f64 / 16.0 {
                return Err(CoreError::SizeGuard(
                    "system forms overflow the integer scan".into(),
                ));
            }
            let prime = place.residue_prime();
            slots.push(PreparedSlot {
                lod: lambda / f.degree() as f64,
                lambda_arch: if place.is_arch() { lambda } else { 0.0 },
                ln_p: prime.map(|p| (p as f64).ln()).unwrap_or(0.0),
                den_vp: prime.map(|p| padic_valuation_big(&den, p)).unwrap_or(0),
                den_ln: den
                    .to_f64()
                    .ok_or_else(|| CoreError::SizeGuard("denominator too large".into()))?
                    .ln(),
                prime,
                form,
            });
        }
    }
    let n = x.variety.dim() as f64;
    let exponent = n + 1.0
        + x.delta
            .to_f64()
            .ok_or_else(|| CoreError::Invalid("margin exponent".into()))?;
    Ok(Some(PreparedScan {
        shape,
        cap,
        exponent,
        slots,
        param_forms,
        variety_filter,
    }))
}

enum FastVerdict {
    NotASolution,
    Candidate,
    OffVariety,
}

fn fast_margin(prep: &PreparedScan, ambient: &[i64]) -> FastVerdict {
    if let Some(filter) = &prep.variety_filter {
        if filter.eval(ambient) != 0 {
            return FastVerdict::OffVariety;
        }
    }
    let m = ambient.iter().map(|v| v.abs()).max().unwrap_or(0) as f64;
    let ln_m = m.ln();
    let mut margin = prep.exponent * ln_m;
    let mut scale = margin.abs() + 1.0;
    for slot in &prep.slots {
        let val = slot.form.eval(ambient);
        if val == 0 {
            return FastVerdict::Candidate;
        }
        let term = if slot.lambda_arch > 0.0 {
            slot.lod * ((val.abs() as f64).ln() - slot.den_ln) - slot.lambda_arch * ln_m
        } else {
            let p = slot.prime.unwrap();
            let vp = padic_valuation_i128(val, p) - slot.den_vp;
            slot.lod * (-(vp as f64) * slot.ln_p)
        };
        margin += term;
        scale += term.abs();
    }
    if margin > 1e-8 * scale {
        FastVerdict::NotASolution
    } else {
        FastVerdict::Candidate
    }
}

struct ScanPart {
    visited: u64,
    on_variety: u64,
    kept: Vec<Vec<i64>>,
}

fn scan_chunk(prep: &PreparedScan, a_range: (i64, i64)) -> ScanPart {
    let mut part = ScanPart {
        visited: 0,
        on_variety: 0,
        kept: Vec::new(),
    };
    let cap = prep.cap;
    let handle = |raw: &[i64], part: &mut ScanPart| {
        part.visited += 1;
        let ambient_owned;
        let ambient: &[i64] = match &prep.param_forms {
            None => raw,
            Some(gs) => {
                let vals: Vec<i128> = gs.iter().map(|g| g.eval(raw)).collect();
                let mut content: i128 = 0;
                for v in &vals {
                    content = integer_gcd_i128(content, *v);
                }
                if content == 0 {
                    return;
                }
                if let Some(first) = vals.iter().find(|v| **v != 0) {
                    if *first < 0 {
                        content = -content;
                    }
                }
                ambient_owned = vals
                    .iter()
                    .map(|v| i64::try_from(v / content).expect("image fits the scan"))
                    .collect::<Vec<i64>>();
                &ambient_owned
            }
        };
        match fast_margin(prep, ambient) {
            FastVerdict::OffVariety => {}
            FastVerdict::NotASolution => part.on_variety += 1,
            FastVerdict::Candidate => {
                part.on_variety += 1;
                part.kept.push(ambient.to_vec());
            }
        }
    };
    match prep.shape {
        ScanShape::Line => {
            if a_range.0 == 0 {
                handle(&[0, 1], &mut part);
            }
            for a in a_range.0.max(1)..a_range.1 {
                for b in -cap..=cap {
                    if int_gcd(a, b) == 1 {
                        handle(&[a, b], &mut part);
                    }
                }
            }
        }
        ScanShape::Plane => {
            if a_range.0 == 0 {
                handle(&[0, 0, 1], &mut part);
                for b in 1..=cap {
                    for c in -cap..=cap {
                        if int_gcd(b, c) == 1 {
                            handle(&[0, b, c], &mut part);
                        }
                    }
                }
            }
            for a in a_range.0.max(1)..a_range.1 {
                for b in -cap..=cap {
                    for c in -cap..=cap {
                        if int_gcd(int_gcd(a, b), c) == 1 {
                            handle(&[a, b, c], &mut part);
                        }
                    }
                }
            }
        }
    }
    part
}

fn integer_gcd_i128(a: i128, b: i128) -> i128 {
    let mut a = a.abs();
    let mut b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Slot order used by covering tuples: places in ascending order, each
/// place's owned form indices in their recorded order.
pub fn covering_slots(red: &Reduction) -> Vec<(Place, usize)> {
    let mut out = Vec::new();
    for (place, idxs) in &red.owners {
        for &i in idxs {
            out.push((*place, i));
        }
    }
    out
}

/// Per-slot drop ratios of a solution against the equalized system: the
/// log of |g_i(x)|_v over the system norm times the point norm raised to
/// the common degree. Each entry is nonpositive for any point.
fn slot_ratios(red: &Reduction, coords: &[FieldElement]) -> Result<Vec<LogHeight>> {
    let orbit = conjugate_orbit(coords);
    let delta_pow = rat_i64(red.degree_lcm as i64);
    let mut one_and_forms = vec![constant_one(red.coefficient_field, coords.len())?];
    one_and_forms.extend(red.forms.iter().cloned());
    let coeffs = CoeffList::of_polys(&one_and_forms)?;
    let mut ratios = Vec::new();
    for (place, idxs) in &red.owners {
        let norm_l1 = norms_at_place(&coeffs, place)?.1;
        for &i in idxs {
            let g = &red.forms[i];
            let mut candidates = Vec::new();
            for sigma in &orbit {
                let z = g.evaluate(sigma)?;
                if z.is_zero() {
                    continue;
                }
                let value = log_abs(&z, place)?;
                let norm_x = point_sup_at(sigma, place)?.scale(&delta_pow);
                candidates.push(value.sub(&norm_l1).sub(&norm_x));
            }
            if candidates.is_empty() {
                return Err(CoreError::Invalid(
                    "slot ratios are undefined where a form vanishes".into(),
                ));
            }
            let best = max_log(candidates)?;
            if best.sign3()? == std::cmp::Ordering::Greater {
                return Err(CoreError::Invalid(
                    "evaluation envelope violated by a slot ratio".into(),
                ));
            }
            ratios.push(best);
        }
    }
    Ok(ratios)
}

/// Assign a covering tuple to a decided solution: rationalize the slot
/// ratios, pick a grid tuple, and verify the per-slot drop exactly at
/// the strengthened exponent. Points of height zero satisfy every slot
/// bound trivially and receive the uniform tuple.
pub fn split_solution(
    x: &Experiment,
    red: &Reduction,
    rec: &SolutionRecord,
) -> Result<Vec<Rational>> {
    if red.coefficient_field != x.field {
        return Err(CoreError::Unsupported(
            "covering classes need the equalized system inside the ground field".into(),
        ));
    }
    let ratios = slot_ratios(red, &rec.point)?;
    let q = ratios.len();
    let n = x.variety.dim() as u32;
    let theta = covering_theta(n, &x.delta)?;
    if rec.height.is_zero_exact() {
        return Ok(vec![rat_frac(1, q as i64); q]);
    }
    let strengthened =
        (rat_i64(x.variety.dim() as i64 + 1) + &x.delta / rat_i64(2)) * rat_i64(red.degree_lcm as i64);
    let totals: Vec<f64> = ratios.iter().map(LogHeight::to_f64).collect();
    let total: f64 = totals.iter().sum();
    if !(total < 0.0) {
        return Err(CoreError::Invalid("slot ratios do not drop".into()));
    }
    let uniform = rat_frac(1, q as i64);
    for attempt in 0..3 {
        let blend = match attempt {
            0 => Rational::zero(),
            1 => rat_frac(1, 1_000_000),
            _ => rat_frac(1, 100),
        };
        let mut shares: Vec<Rational> = totals
            .iter()
            .map(|&v| {
                let raw = Rational::from_float((v / total).max(0.0))
                    .unwrap_or_else(Rational::zero);
                &raw * (rat_i64(1) - &blend) + &uniform * &blend
            })
            .collect();
        let sum: Rational = shares.iter().sum();
        if sum.is_zero() {
            continue;
        }
        for b in &mut shares {
            *b /= &sum;
        }
        let negated: Vec<Rational> = shares.iter().map(|b| -b.clone()).collect();
        let Ok(tuple) = select_covering_tuple(&theta, &negated) else {
            continue;
        };
        let ok = ratios
            .iter()
            .zip(&tuple)
            .try_fold(true, |acc, (r, c)| -> Result<bool> {
                if !acc {
                    return Ok(false);
                }
                let bound = rec.height.scale(&(c * &strengthened));
                Ok(r.add(&bound).sign3()? != std::cmp::Ordering::Greater)
            })?;
        if ok {
            return Ok(tuple);
        }
    }
    Err(CoreError::Invalid(
        "no covering tuple satisfied the exact per-slot check".into(),
    ))
}

/// Comparison of the twisted height of the image of one solution against
/// the power of its height prescribed by the covering tuple. The verdict
/// is observational for points below the height floor.
#[derive(Debug, Clone)]
pub struct ChainOutcome {
    pub solution_index: usize,
    pub tuple: Vec<Rational>,
    pub weight_floor: Rational,
    pub floor_ok: bool,
    pub hypotheses_met: bool,
    pub verdict: ChainVerdict,
}

fn chain_outcome(
    x: &Experiment,
    red: &Reduction,
    fm_image: &ChowForm,
    solution_index: usize,
    rec: &SolutionRecord,
    tuple: &[Rational],
) -> Result<ChainOutcome> {
    let y: Vec<FieldElement> = red
        .forms
        .iter()
        .map(|g| g.evaluate(&rec.point))
        .collect::<Result<Vec<_>>>()?;
    let n = x.variety.dim();
    let strengthened =
        (rat_i64(n as i64 + 1) + &x.delta / rat_i64(2)) * rat_i64(red.degree_lcm as i64);
    let log_q = rec.height.scale(&strengthened);
    let slots = covering_slots(red);
    let width = red.forms.len();
    let mut entries: BTreeMap<Place, Vec<Rational>> = BTreeMap::new();
    for ((place, form_index), c) in slots.iter().zip(tuple) {
        entries
            .entry(*place)
            .or_insert_with(|| vec![Rational::zero(); width])[*form_index] = c.clone();
    }
    let entry_list: Vec<(Place, Vec<Rational>)> =
        entries.iter().map(|(p, v)| (*p, v.clone())).collect();
    let family = WeightFamily::new(x.field, width, entries)?;
    let twisted = twisted_height(&log_q, &family, &y)?;
    let mut weight_floor = Rational::zero();
    for (_, c) in &entry_list {
        weight_floor += normalized_chow_weight(fm_image, c)?;
    }
    let floor_ok = weight_floor >= rat_frac(1, n as i64 + 1);
    let dims = rat_i64(2 * (n as i64 + 2) * (n as i64 + 2));
    let exponent = &weight_floor - &(&x.delta / dims);
    let rhs = log_q.scale(&exponent);
    let verdict = match twisted.sub(&rhs).sign3() {
        Ok(std::cmp::Ordering::Greater) => ChainVerdict::Fails,
        Ok(_) => ChainVerdict::Holds,
        Err(CoreError::Undecidable { .. }) => ChainVerdict::Undecided,
        Err(e) => return Err(e),
    };
    Ok(ChainOutcome {
        solution_index,
        tuple: tuple.to_vec(),
        weight_floor,
        floor_ok,
        hypotheses_met: rec.meets_height_floor,
        verdict,
    })
}

/// Forms of one degree that vanish at every given point but not on the
/// variety: the nullspace of the evaluation matrix reduced modulo the
/// degree piece of the variety's ideal. Surviving residues are exact
/// certificates that a form cuts the points without containing the
/// variety.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub degree: u32,
    pub monomials: Vec<Monomial>,
    pub forms: Vec<HomogeneousPoly>,
    pub nullity: usize,
    pub ideal_rank: usize,
    pub quotient_dim: usize,
}

pub fn fit_hypersurfaces(
    variety: &VarietySpec,
    points: &[Vec<FieldElement>],
    degree: u32,
) -> Result<FitResult> {
    if points.is_empty() {
        return Err(CoreError::Invalid("nothing to fit".into()));
    }
    if degree == 0 {
        return Err(CoreError::Invalid("fit degree must be positive".into()));
    }
    let piece = ideal_piece(variety, degree)?;
    let mut rows = Vec::new();
    for point in points {
        if point.iter().any(|c| !c.b.is_zero()) {
            return Err(CoreError::Unsupported(
                "fitting wants rational points".into(),
            ));
        }
        let coords: Vec<Rational> = point.iter().map(|c| c.a.clone()).collect();
        let row: Vec<Rational> = piece
            .monomials
            .iter()
            .map(|m| {
                m.0.iter()
                    .zip(&coords)
                    .fold(Rational::one(), |acc, (&e, c)| {
                        let mut v = acc;
                        for _ in 0..e {
                            v *= c;
                        }
                        v
                    })
            })
            .collect();
        for basis in piece.span.basis() {
            let dot: Rational = basis.iter().zip(&row).map(|(a, b)| a * b).sum();
            if !dot.is_zero() {
                return Err(CoreError::Invalid("a fitted point is off the variety".into()));
            }
        }
        rows.push(row);
    }
    let nullspace = QMatrix::from_rows(rows)?.nullspace();
    let nullity = nullspace.len();
    let mut quotient = RowSpan::new(piece.monomials.len());
    for b in piece.span.basis() {
        quotient.insert(b);
    }
    let ideal_rank = piece.span.rank();
    let mut forms = Vec::new();
    let field = NumberField::Rationals;
    for v in nullspace {
        let residue = piece.span.reduce(&v);
        if residue.iter().all(Rational::is_zero) {
            continue;
        }
        if !quotient.insert(&residue) {
            continue;
        }
        let ints = canonical_integer_point(&residue)?;
        let terms: Vec<(Monomial, FieldElement)> = piece
            .monomials
            .iter()
            .zip(&ints)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| {
                (
                    m.clone(),
                    FieldElement::from_rational(field, Rational::from(c.clone())),
                )
            })
            .collect();
        forms.push(HomogeneousPoly::new(
            field,
            piece.monomials[0].nvars(),
            degree,
            terms,
        )?);
    }
    Ok(FitResult {
        degree,
        monomials: piece.monomials.clone(),
        forms,
        nullity,
        ideal_rank,
        quotient_dim: piece.hilbert_value(),
    })
}

/// One covering class: the grid tuple and the indices of the solutions
/// assigned to it.
#[derive(Debug, Clone)]
pub struct CoveringClassAssignment {
    pub tuple: Vec<Rational>,
    pub members: Vec<usize>,
}

/// Everything a census run produces. The scope note states up front that
/// scanned points sit far below the height floor of the finiteness
/// statement, so class and chain outcomes are observational; the floor
/// itself is reported as a base-ten logarithm for comparison. Points of
/// height zero satisfy the inequality whenever their margin is zero or a
/// form vanishes, carry no information about accumulation, and land in
/// their own bucket away from the solution table.
#[derive(Debug, Clone)]
pub struct CensusReport {
    pub scope_note: String,
    pub field: NumberField,
    pub dim: usize,
    pub ambient: usize,
    pub delta: Rational,
    pub degree_lcm: u32,
    pub conjugacy_bound: u32,
    pub place_count: usize,
    pub emptiness: Vec<PlaceEmptiness>,
    pub all_empty: bool,
    pub reduced_forms: Vec<String>,
    pub image_degree: Option<u64>,
    pub cover_degree: Rational,
    pub class_budget_log10: f64,
    pub height_floor_log10: f64,
    pub points_scanned: u64,
    pub points_on_variety: u64,
    pub expected_line_count: Option<u64>,
    pub solutions: Vec<SolutionRecord>,
    pub flagged: Vec<SolutionRecord>,
    pub undecided: Vec<SolutionRecord>,
    pub zero_height: Vec<SolutionRecord>,
    pub classes: Vec<CoveringClassAssignment>,
    pub chain: Vec<ChainOutcome>,
    pub binding_violations: usize,
    pub fits: Vec<FitResult>,
    pub notes: Vec<String>,
}

fn scan_candidates_estimate(x: &Experiment) -> u64 {
    let cap = x.coordinate_cap;
    match &x.variety {
        VarietySpec::FullSpace { n: 1 } | VarietySpec::ParametrizedImage { .. } => {
            (2 * cap + 1).saturating_mul(cap).saturating_add(1)
        }
        _ => (2 * cap + 1)
            .saturating_mul(2 * cap + 1)
            .saturating_mul(cap)
            .saturating_add((2 * cap + 1).saturating_mul(cap))
            .saturating_add(1),
    }
}

/// Run the whole pipeline: emptiness check, reduction, headline bounds,
/// streamed exact scan, covering classes, chain comparisons against the
/// image, and hypersurface fits through everything the scan kept.
pub fn run_census(x: &Experiment) -> Result<CensusReport> {
    let n = x.variety.dim();
    let ambient = x.variety.ambient_dim();
    let s = x.systems.len();
    let emptiness = check_emptiness(x)?;
    let all_empty = emptiness.iter().all(|e| e.empty);
    let red = reduce_system(x)?;
    let mut notes = Vec::new();
    if !all_empty {
        notes.push(
            "some system has a common zero on the variety, so the finiteness statement does not apply; the scan is reported as data"
                .to_string(),
        );
    }
    let inputs = TheoremInputs::new(
        n as u32,
        ambient as u32,
        red.variety_degree
            .try_into()
            .map_err(|_| CoreError::SizeGuard("variety degree overflow".into()))?,
        s as u32,
        red.conjugacy_bound,
        red.degree_lcm,
        x.delta.clone(),
        red.height_payload.clone(),
    )?;
    let (headline, height_unit) = bounds_a(&inputs)?;
    let height_floor_log10 =
        (headline.threshold_factor.value() + height_unit.to_f64().max(f64::MIN_POSITIVE).ln())
            / std::f64::consts::LN_10;
    let class_budget_log10 = system_count_bound(n as u32, s as u32, &x.delta)?.log10();
    let scope_note = format!(
        "Scanned points all lie far below the height floor (about 10^{:.1} in logarithmic height), so solutions are reported unconditionally while covering classes and image-height comparisons are observational.",
        height_floor_log10
    );
    let candidates = scan_candidates_estimate(x);
    let prepared = prepare_scan(x)?;
    let (points_scanned, points_on_variety, kept_points) = match &prepared {
        Some(prep) => {
            if candidates > SCAN_GUARD {
                return Err(CoreError::SizeGuard(format!(
                    "{candidates} scan candidates exceed the streaming guard"
                )));
            }
            let cap = prep.cap;
            let mut chunks = Vec::new();
            let mut start = 0i64;
            while start <= cap {
                let end = (start + SCAN_CHUNK as i64).min(cap + 1);
                chunks.push((start, end));
                start = end;
            }
            let parts = exec::map_ordered(chunks, |range| scan_chunk(prep, range));
            let mut visited = 0;
            let mut on_variety = 0;
            let mut kept = Vec::new();
            for part in parts {
                visited += part.visited;
                on_variety += part.on_variety;
                kept.extend(part.kept);
            }
            let kept: Vec<Vec<FieldElement>> = kept
                .into_iter()
                .map(|p| rational_coords(x.field, &p))
                .collect();
            (visited, on_variety, kept)
        }
        None => {
            if candidates > ENUMERATION_GUARD {
                return Err(CoreError::SizeGuard(format!(
                    "{candidates} candidates exceed the guard for the full evaluator"
                )));
            }
            let points = enumerate_points(&x.variety, x.coordinate_cap)?;
            let visited = points.len() as u64;
            (visited, visited, points)
        }
    };
    let counts_parameter_points = match &x.variety {
        VarietySpec::FullSpace { n: 1 } => true,
        VarietySpec::ParametrizedImage { .. } => prepared.is_some(),
        _ => false,
    };
    let expected_line_count = if counts_parameter_points {
        let expected = primitive_pair_count(x.coordinate_cap);
        if points_scanned != expected {
            return Err(CoreError::Invalid(format!(
                "scanned {points_scanned} line points, the coprime count expects {expected}"
            )));
        }
        Some(expected)
    } else {
        None
    };
    let floor_threshold = headline.threshold_factor.value()
        + height_unit.to_f64().max(f64::MIN_POSITIVE).ln();
    let mut solutions = Vec::new();
    let mut flagged = Vec::new();
    let mut undecided = Vec::new();
    let mut zero_height = Vec::new();
    for point in &kept_points {
        let mut rec = evaluate_inequality(x, point)?;
        rec.meets_height_floor = rec.height.to_f64() >= floor_threshold;
        if !rec.decided {
            undecided.push(rec);
        } else if rec.is_solution && rec.height.is_zero_exact() {
            zero_height.push(rec);
        } else if !rec.vanishing.is_empty() {
            flagged.push(rec);
        } else if rec.is_solution {
            solutions.push(rec);
        }
    }
    if !zero_height.is_empty() {
        notes.push(format!(
            "{} height-zero points satisfy the inequality vacuously and sit outside the solution table, the classes, and the fits",
            zero_height.len()
        ));
    }
    let split_ready = red.coefficient_field == x.field;
    if !split_ready {
        notes.push(
            "covering classes skipped: the conjugate closure leaves the ground field".to_string(),
        );
    }
    let mut classes: Vec<CoveringClassAssignment> = Vec::new();
    let mut class_of: BTreeMap<Vec<Rational>, usize> = BTreeMap::new();
    let mut tuples: Vec<Vec<Rational>> = Vec::new();
    if split_ready {
        for (i, rec) in solutions.iter().enumerate() {
            let tuple = split_solution(x, &red, rec)?;
            let at = *class_of.entry(tuple.clone()).or_insert_with(|| {
                classes.push(CoveringClassAssignment {
                    tuple: tuple.clone(),
                    members: Vec::new(),
                });
                classes.len() - 1
            });
            classes[at].members.push(i);
            tuples.push(tuple);
        }
    }
    let mut chain = Vec::new();
    let mut binding_violations = 0;
    if let Some(image) = &red.image {
        if split_ready && all_empty && !solutions.is_empty() {
            let fm_image = chow_form(image)?;
            for (i, rec) in solutions.iter().enumerate() {
                let outcome = chain_outcome(x, &red, &fm_image, i, rec, &tuples[i])?;
                if all_empty && !outcome.floor_ok {
                    return Err(CoreError::Invalid(
                        "image weight fell below its floor on an empty system".into(),
                    ));
                }
                if outcome.hypotheses_met && outcome.verdict == ChainVerdict::Fails {
                    binding_violations += 1;
                }
                chain.push(outcome);
            }
        }
    } else if !solutions.is_empty() {
        notes.push("image comparisons skipped: no line parametrization".to_string());
    }
    let mut fit_points: Vec<Vec<FieldElement>> = Vec::new();
    for rec in solutions.iter().chain(flagged.iter()) {
        if rec.point.iter().all(|c| c.b.is_zero()) {
            fit_points.push(rec.point.clone());
        }
    }
    let mut fits = Vec::new();
    if !fit_points.is_empty() {
        for degree in 1..=x.fit_degree_cap {
            fits.push(fit_hypersurfaces(&x.variety, &fit_points, degree)?);
        }
    } else if x.fit_degree_cap > 0 {
        notes.push("fits skipped: the scan kept no rational solutions".to_string());
    }
    Ok(CensusReport {
        scope_note,
        field: x.field,
        dim: n,
        ambient,
        delta: x.delta.clone(),
        degree_lcm: red.degree_lcm,
        conjugacy_bound: red.conjugacy_bound,
        place_count: s,
        emptiness,
        all_empty,
        reduced_forms: red.forms.iter().map(format_homogeneous).collect(),
        image_degree: red.image_degree,
        cover_degree: headline.cover_degree.clone(),
        class_budget_log10,
        height_floor_log10,
        points_scanned,
        points_on_variety,
        expected_line_count,
        solutions,
        flagged,
        undecided,
        zero_height,
        classes,
        chain,
        binding_violations,
        fits,
        notes,
    })
}

fn place_label(p: &Place) -> String {
    match p.kind {
        PlaceKind::ArchRational | PlaceKind::ArchComplex => "inf".to_string(),
        PlaceKind::ArchReal { second } => format!("inf_{}", if second { 2 } else { 1 }),
        PlaceKind::FiniteRational { p } | PlaceKind::FiniteInert { p } => format!("{p}"),
        PlaceKind::FiniteSplit { p, second } => format!("{p}_{}", if second { 2 } else { 1 }),
        PlaceKind::FiniteRamified { p } => format!("{p}_r"),
    }
}

fn format_point(point: &[FieldElement]) -> String {
    let parts: Vec<String> = point
        .iter()
        .map(crate::poly::text::format_field_coeff)
        .collect();
    format!("({})", parts.join(", "))
}

fn log_json(v: &LogHeight) -> serde_json::Value {
    let value = v.to_f64();
    let err = value.abs() * 1e-14 + 1e-300;
    serde_json::json!({ "value": value, "err": err })
}

fn record_json(rec: &SolutionRecord) -> serde_json::Value {
    serde_json::json!({
        "point": format_point(&rec.point),
        "height": log_json(&rec.height),
        "lhs": rec.lhs.as_ref().map(log_json),
        "margin": rec.margin.as_ref().map(log_json),
        "vanishing": rec
            .vanishing
            .iter()
            .map(|(p, i)| serde_json::json!({ "place": place_label(p), "form": i }))
            .collect::<Vec<_>>(),
        "decided": rec.decided,
        "is_solution": rec.is_solution,
        "meets_height_floor": rec.meets_height_floor,
    })
}

/// Render the full report as JSON. Rationals print exactly as `p/q`;
/// logarithms print as a decimal value with an explicit error bound.
pub fn render_report_json(r: &CensusReport) -> serde_json::Value {
    serde_json::json!({
        "scope_note": r.scope_note,
        "field": format!("{}", r.field),
        "dim": r.dim,
        "ambient": r.ambient,
        "delta": format_rational(&r.delta),
        "degree_lcm": r.degree_lcm,
        "conjugacy_bound": r.conjugacy_bound,
        "place_count": r.place_count,
        "emptiness": r.emptiness.iter().map(|e| serde_json::json!({
            "place": place_label(&e.place),
            "empty": e.empty,
            "certificate": e.certificate,
            "error_bound": e.error_bound,
        })).collect::<Vec<_>>(),
        "all_empty": r.all_empty,
        "reduced_forms": r.reduced_forms,
        "image_degree": r.image_degree,
        "cover_degree": format_rational(&r.cover_degree),
        "class_budget_log10": r.class_budget_log10,
        "height_floor_log10": r.height_floor_log10,
        "points_scanned": r.points_scanned,
        "points_on_variety": r.points_on_variety,
        "expected_line_count": r.expected_line_count,
        "solutions": r.solutions.iter().map(record_json).collect::<Vec<_>>(),
        "flagged": r.flagged.iter().map(record_json).collect::<Vec<_>>(),
        "undecided": r.undecided.iter().map(record_json).collect::<Vec<_>>(),
        "zero_height": r.zero_height.iter().map(record_json).collect::<Vec<_>>(),
        "classes": r.classes.iter().map(|c| serde_json::json!({
            "tuple": c.tuple.iter().map(format_rational).collect::<Vec<_>>(),
            "members": c.members,
        })).collect::<Vec<_>>(),
        "chain": r.chain.iter().map(|c| serde_json::json!({
            "solution": c.solution_index,
            "tuple": c.tuple.iter().map(format_rational).collect::<Vec<_>>(),
            "weight_floor": format_rational(&c.weight_floor),
            "floor_ok": c.floor_ok,
            "hypotheses_met": c.hypotheses_met,
            "verdict": format!("{:?}", c.verdict),
        })).collect::<Vec<_>>(),
        "binding_violations": r.binding_violations,
        "fits": r.fits.iter().map(|f| serde_json::json!({
            "degree": f.degree,
            "forms": f.forms.iter().map(format_homogeneous).collect::<Vec<_>>(),
            "nullity": f.nullity,
            "ideal_rank": f.ideal_rank,
            "quotient_dim": f.quotient_dim,
        })).collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

/// Render the solution table as TSV: one row per kept record, solutions
/// first, then flagged and undecided rows.
pub fn render_solutions_tsv(r: &CensusReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {}\n", r.scope_note));
    out.push_str("point\theight\tmargin\tstatus\tclass\n");
    let class_lookup: BTreeMap<usize, usize> = r
        .classes
        .iter()
        .enumerate()
        .flat_map(|(ci, c)| c.members.iter().map(move |&m| (m, ci)))
        .collect();
    for (i, rec) in r.solutions.iter().enumerate() {
        let class = class_lookup
            .get(&i)
            .map(|c| c.to_string())
            .unwrap_or_else(|| "-".to_string());
        out.push_str(&format!(
            "{}\t{:.12}\t{}\tsolution\t{}\n",
            format_point(&rec.point),
            rec.height.to_f64(),
            rec.margin
                .as_ref()
                .map(|m| format!("{:.12}", m.to_f64()))
                .unwrap_or_else(|| "-".to_string()),
            class,
        ));
    }
    for rec in &r.flagged {
        let places: Vec<String> = rec
            .vanishing
            .iter()
            .map(|(p, i)| format!("{}:{i}", place_label(p)))
            .collect();
        out.push_str(&format!(
            "{}\t{:.12}\t-inf\tflagged {}\t-\n",
            format_point(&rec.point),
            rec.height.to_f64(),
            places.join(","),
        ));
    }
    for rec in &r.undecided {
        out.push_str(&format!(
            "{}\t{:.12}\t{}\tundecided\t-\n",
            format_point(&rec.point),
            rec.height.to_f64(),
            rec.margin
                .as_ref()
                .map(|m| format!("{:.12}", m.to_f64()))
                .unwrap_or_else(|| "-".to_string()),
        ));
    }
    for rec in &r.zero_height {
        out.push_str(&format!(
            "{}\t0\t{}\tzero-height\t-\n",
            format_point(&rec.point),
            rec.margin
                .as_ref()
                .map(|m| format!("{:.12}", m.to_f64()))
                .unwrap_or_else(|| "-inf".to_string()),
        ));
    }
    out
}

/// Write `census.json` and `solutions.tsv` into a directory.
pub fn write_census_outputs(r: &CensusReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CoreError::Invalid(format!("creating {}: {e}", dir.display())))?;
    let json = serde_json::to_string_pretty(&render_report_json(r))
        .map_err(|e| CoreError::Invalid(format!("serializing the report: {e}")))?;
    std::fs::write(dir.join("census.json"), json)
        .map_err(|e| CoreError::Invalid(format!("writing census.json: {e}")))?;
    std::fs::write(dir.join("solutions.tsv"), render_solutions_tsv(r))
        .map_err(|e| CoreError::Invalid(format!("writing solutions.tsv: {e}")))?;
    Ok(())
}
