//! Closed-form bound ladders for the finiteness statements, kept in natural
//! log space so that doubly exponential counts stay manipulable, together
//! with the rational grid families that split one global height drop into
//! finitely many per-place systems.
//!
//! A [`LogBound`] never materializes the bound itself. Its logarithm is a
//! [`LogHeight`] whose rational core and prime-log atoms are exact; only
//! iterated-logarithm factors enter as a float summand, and their absolute
//! error rides along. Grid covering families are exact rationals on a mesh
//! of spacing 1/M, coarse enough to enumerate and fine enough that rounding
//! a normalized ratio vector down and topping it up never loses coverage.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::height::LogHeight;
use crate::arith::rational::{binomial, rat_i64, Rational};
use crate::error::{CoreError, Result};

const GRID_ENUMERATION_GUARD: u64 = 400_000;

/// Shape parameters of a constrained solution-counting problem: a variety
/// of dimension `dim` and degree `degree` in projective `ambient`-space,
/// cut against `place_count` places with at most `conjugacy_bound`
/// conjugate forms per slot, all raised to the common degree `degree_lcm`,
/// with margin `delta` to spare in the exponent.
#[derive(Debug, Clone)]
pub struct TheoremInputs {
    pub dim: u32,
    pub ambient: u32,
    pub degree: u32,
    pub place_count: u32,
    pub conjugacy_bound: u32,
    pub degree_lcm: u32,
    pub delta: Rational,
    /// Caller-assembled height payload: the variety height plus the largest
    /// coefficient height among the forms, leading 1 included.
    pub height_term: LogHeight,
}

impl TheoremInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: u32,
        ambient: u32,
        degree: u32,
        place_count: u32,
        conjugacy_bound: u32,
        degree_lcm: u32,
        delta: Rational,
        height_term: LogHeight,
    ) -> Result<Self> {
        let inputs = TheoremInputs {
            dim,
            ambient,
            degree,
            place_count,
            conjugacy_bound,
            degree_lcm,
            delta,
            height_term,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > self.ambient {
            return Err(CoreError::Invalid(
                "the dimension must be positive and at most the ambient dimension".into(),
            ));
        }
        for (value, what) in [
            (self.degree, "degree"),
            (self.place_count, "place count"),
            (self.conjugacy_bound, "conjugacy bound"),
            (self.degree_lcm, "degree lcm"),
        ] {
            if value == 0 {
                return Err(CoreError::Invalid(format!("the {what} must be positive")));
            }
        }
        check_margin(&self.delta)
    }
}

/// A quantity far too large to write out, held as its natural logarithm.
///
/// The exact ingredients (rational summands and logarithms of rationals)
/// live in the wrapped [`LogHeight`]; iterated-logarithm factors have no
/// exact form and contribute one float summand whose absolute error is
/// recorded. [`LogBound::value`] renders the logarithm as an `f64`, so it
/// is additionally subject to float relative precision.
#[derive(Debug, Clone)]
pub struct LogBound {
    log: LogHeight,
    err: f64,
}

impl LogBound {
    fn exact(log: LogHeight) -> Self {
        LogBound { log, err: 0.0 }
    }

    fn with_float(log: LogHeight, value: f64, err: f64) -> Self {
        LogBound {
            log: log.add(&LogHeight::statistical(value, err)),
            err,
        }
    }

    /// The logarithm with all exact structure intact.
    pub fn log(&self) -> &LogHeight {
        &self.log
    }

    /// Natural logarithm of the bound as a float.
    pub fn value(&self) -> f64 {
        self.log.to_f64()
    }

    /// Decimal logarithm of the bound as a float.
    pub fn log10(&self) -> f64 {
        self.value() / std::f64::consts::LN_10
    }

    /// Absolute error contributed by the float summand, zero when every
    /// ingredient is exact.
    pub fn error(&self) -> f64 {
        self.err
    }

    pub fn is_exact(&self) -> bool {
        self.err == 0.0
    }
}

/// One covering statement: how many pieces, the degree of the forms cutting
/// them, and the factor a height threshold must clear before the statement
/// applies.
#[derive(Debug, Clone)]
pub struct CoverBounds {
    pub cover_count: LogBound,
    pub cover_degree: Rational,
    pub threshold_factor: LogBound,
}

fn check_margin(delta: &Rational) -> Result<()> {
    if !delta.is_positive() || delta > &Rational::one() {
        return Err(CoreError::Invalid("the margin must lie in (0, 1]".into()));
    }
    Ok(())
}

fn checked_exp(e: u64) -> Result<u32> {
    u32::try_from(e)
        .map_err(|_| CoreError::SizeGuard(format!("exponent {e} exceeds the supported range")))
}

fn int_pow(base: u64, exp: u64) -> Result<BigInt> {
    Ok(BigInt::from(base).pow(checked_exp(exp)?))
}

fn inv_pow(q: &Rational, exp: u64) -> Result<Rational> {
    if q.is_zero() {
        return Err(CoreError::Invalid("inverse power of zero".into()));
    }
    let e = checked_exp(exp)?;
    Ok(Rational::new(q.denom().pow(e), q.numer().pow(e)))
}

/// ln(ln x · ln ln x) for rational x > e, as (value, absolute error).
fn iterated_log_factor(x: &Rational) -> Result<(f64, f64)> {
    let xf = x
        .to_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CoreError::SizeGuard("argument too large for the float tail".into()))?;
    let l = xf.ln();
    if !(l > 1.0) {
        return Err(CoreError::Invalid(
            "iterated logarithm needs an argument above e".into(),
        ));
    }
    let v = (l * l.ln()).ln();
    Ok((v, 1e-12 * (1.0 + v.abs())))
}

/// The main covering bounds, plus the height unit the threshold is measured
/// in: log(2·ambient) added to the caller's height payload.
pub fn bounds_a(inputs: &TheoremInputs) -> Result<(CoverBounds, LogHeight)> {
    inputs.validate()?;
    let n = u64::from(inputs.dim);
    let d = u64::from(inputs.degree);
    let s = u64::from(inputs.place_count);
    let c = u64::from(inputs.conjugacy_bound);
    let lcm = u64::from(inputs.degree_lcm);
    let delta = &inputs.delta;

    let cover_degree = Rational::from_integer(
        BigInt::from(8 * n + 6) * int_pow(n + 2, 2)? * BigInt::from(d) * int_pow(lcm, n + 1)?,
    ) / delta;

    let tower1 = Rational::from_integer(
        int_pow(2, 12 * n + 16)? * int_pow(n, 4 * n)? * int_pow(d, 2 * n + 2)?
            * int_pow(lcm, 2 * n * (n + 1))?,
    ) * inv_pow(delta, 2 * n)?;
    let lead = LogHeight::ln_of_rational(&(rat_i64(20 * n as i64) / delta))?
        .scale(&rat_i64(((n + 1) * s) as i64));
    let (tail, tail_err) = iterated_log_factor(&rat_i64(4 * c as i64))?;
    let cover_count = LogBound::with_float(
        LogHeight::from_rational(tower1).add(&lead),
        tail,
        tail_err,
    );

    let tower3 = Rational::from_integer(
        int_pow(2, 6 * n + 20)? * int_pow(n, 2 * n + 3)? * int_pow(d, n + 2)?
            * int_pow(lcm, n * (n + 2))?,
    ) * inv_pow(delta, n + 1)?;
    let threshold_factor = LogBound::exact(
        LogHeight::ln_of_rational(&rat_i64(2 * (c * s) as i64))?.scale(&tower3),
    );

    let height_unit = LogHeight::ln_of_rational(&rat_i64(2 * u64::from(inputs.ambient) as i64))?
        .add(&inputs.height_term);

    Ok((
        CoverBounds {
            cover_count,
            cover_degree,
            threshold_factor,
        },
        height_unit,
    ))
}

/// The auxiliary covering bounds for a variety of dimension `dim` and
/// degree `degree` in projective `ambient`-space.
pub fn bounds_b(dim: u32, degree: u64, ambient: u64, delta: &Rational) -> Result<CoverBounds> {
    if dim == 0 || degree == 0 {
        return Err(CoreError::Invalid(
            "the dimension and degree must be positive".into(),
        ));
    }
    if ambient < u64::from(dim) {
        return Err(CoreError::Invalid(
            "the ambient dimension must be at least the variety dimension".into(),
        ));
    }
    check_margin(delta)?;
    let n = u64::from(dim);

    let cover_degree = rat_i64((4 * n + 3) as i64) * rat_i64(degree as i64) / delta;

    let four_r = Rational::from_integer(BigInt::from(4u32) * BigInt::from(ambient));
    let tower1 = Rational::from_integer(int_pow(2, 10 * n + 4)? * int_pow(degree, 2 * n + 2)?)
        * inv_pow(delta, 2 * n)?;
    let (tail, tail_err) = iterated_log_factor(&four_r)?;
    let cover_count = LogBound::with_float(LogHeight::from_rational(tower1), tail, tail_err);

    let tower3 = Rational::from_integer(int_pow(2, 5 * n + 4)? * int_pow(degree, n + 2)?)
        * inv_pow(delta, n + 1)?;
    let threshold_factor = LogBound::exact(LogHeight::ln_of_rational(&four_r)?.scale(&tower3));

    Ok(CoverBounds {
        cover_count,
        cover_degree,
        threshold_factor,
    })
}

/// Mesh parameter for splitting at margin `delta` over a variety of
/// dimension `dim`: the fraction of the drop sacrificed to rounding.
pub fn covering_theta(dim: u32, delta: &Rational) -> Result<Rational> {
    check_margin(delta)?;
    Ok(delta / (rat_i64(2 * i64::from(dim) + 2) + rat_i64(2) * delta))
}

/// Count, in log space, of the per-place systems the split can produce.
pub fn system_count_bound(dim: u32, place_count: u32, delta: &Rational) -> Result<LogBound> {
    if dim == 0 || place_count == 0 {
        return Err(CoreError::Invalid(
            "the dimension and place count must be positive".into(),
        ));
    }
    check_margin(delta)?;
    let exponent = rat_i64((u64::from(dim) + 1) as i64 * i64::from(place_count) - 1);
    let ratio = rat_i64(17 * i64::from(dim)) / delta;
    Ok(LogBound::exact(
        LogHeight::ln_of_rational(&ratio)?.scale(&exponent),
    ))
}

fn check_covering_parameter(theta: &Rational) -> Result<()> {
    if !theta.is_positive() || theta > &Rational::new(1.into(), 2.into()) {
        return Err(CoreError::Invalid(
            "the covering parameter must lie in (0, 1/2]".into(),
        ));
    }
    Ok(())
}

/// Mesh denominator M = ceil(q^2 / theta) for tuples of length `q`.
pub fn covering_resolution(q: u32, theta: &Rational) -> Result<u64> {
    if q == 0 {
        return Err(CoreError::Invalid("empty tuples cannot cover".into()));
    }
    check_covering_parameter(theta)?;
    let m = (rat_i64(i64::from(q) * i64::from(q)) / theta).ceil();
    m.to_integer()
        .to_u64()
        .ok_or_else(|| CoreError::SizeGuard("covering mesh too fine to index".into()))
}

/// Size and provenance of one grid covering family. The grid construction
/// favors a checkable coverage proof over minimal size, so its cardinality
/// can overshoot the classical (e/theta)^(q-1) count available through
/// subtler constructions; `exceeds_reference` records when it does.
#[derive(Debug, Clone)]
pub struct CoveringReport {
    pub resolution: u64,
    pub cardinality: BigInt,
    pub reference_bound: f64,
    pub exceeds_reference: bool,
}

pub fn covering_report(q: u32, theta: &Rational) -> Result<CoveringReport> {
    let resolution = covering_resolution(q, theta)?;
    let cardinality = binomial(resolution + u64::from(q) - 1, u64::from(q) - 1);
    let theta_f = theta
        .to_f64()
        .filter(|v| v.is_finite() && *v > 0.0)
        .ok_or_else(|| CoreError::SizeGuard("covering parameter too extreme to render".into()))?;
    let reference_ln = f64::from(q - 1) * (1.0 - theta_f.ln());
    let cardinality_ln = match cardinality.to_f64() {
        Some(v) if v.is_finite() => v.ln(),
        _ => cardinality.bits() as f64 * std::f64::consts::LN_2,
    };
    Ok(CoveringReport {
        resolution,
        cardinality,
        reference_bound: reference_ln.exp(),
        exceeds_reference: cardinality_ln > reference_ln,
    })
}

fn push_compositions(total: u64, parts: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if parts == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for k in 0..=total {
        prefix.push(k);
        push_compositions(total - k, parts - 1, prefix, out);
        prefix.pop();
    }
}

/// Every nonnegative tuple on the mesh (1/M)Z^q summing to one. Any vector
/// of nonpositive ratios with a negative sum is covered by some member; see
/// [`select_covering_tuple`] for the constructive choice.
pub fn covering_set(q: u32, theta: &Rational) -> Result<Vec<Vec<Rational>>> {
    let report = covering_report(q, theta)?;
    if report.cardinality > BigInt::from(GRID_ENUMERATION_GUARD) {
        return Err(CoreError::SizeGuard(format!(
            "covering family of {} tuples is too large to enumerate",
            report.cardinality
        )));
    }
    let m = report.resolution;
    let mut raw = Vec::new();
    push_compositions(m, q as usize, &mut Vec::new(), &mut raw);
    let denom = BigInt::from(m);
    Ok(raw
        .into_iter()
        .map(|ks| {
            ks.into_iter()
                .map(|k| Rational::new(k.into(), denom.clone()))
                .collect()
        })
        .collect())
}

/// Picks the covering tuple for one vector of nonpositive ratios: normalize
/// to b = ratios / sum, round down to the mesh, then feed the rounding
/// deficit back into coordinates with room below b_j / (1 - theta). The
/// result c is on the mesh, sums to one, and satisfies
/// c_j (1 - theta) <= b_j in exact arithmetic.
pub fn select_covering_tuple(theta: &Rational, ratios: &[Rational]) -> Result<Vec<Rational>> {
    let q = u32::try_from(ratios.len())
        .map_err(|_| CoreError::SizeGuard("ratio tuple too long".into()))?;
    if q == 0 {
        return Err(CoreError::Invalid("empty ratio tuple".into()));
    }
    if ratios.iter().any(|a| a.is_positive()) {
        return Err(CoreError::Invalid(
            "positive ratio: the tuple does not describe a solution".into(),
        ));
    }
    let total: Rational = ratios.iter().sum();
    if !total.is_negative() {
        return Err(CoreError::Invalid(
            "all ratios vanish: the tuple does not describe a solution".into(),
        ));
    }
    let m = covering_resolution(q, theta)?;
    let mesh = rat_i64(m as i64);
    let keep = Rational::one() - theta;

    let b: Vec<Rational> = ratios.iter().map(|a| a / &total).collect();
    let mut steps: Vec<BigInt> = b.iter().map(|bj| (bj * &mesh).floor().to_integer()).collect();
    let caps: Vec<BigInt> = b
        .iter()
        .map(|bj| (bj * &mesh / &keep).floor().to_integer())
        .collect();
    let mut deficit = BigInt::from(m) - steps.iter().sum::<BigInt>();
    for (step, cap) in steps.iter_mut().zip(&caps) {
        if deficit.is_zero() {
            break;
        }
        let room = cap - &*step;
        let take = room.min(deficit.clone());
        *step += &take;
        deficit -= take;
    }
    if !deficit.is_zero() {
        return Err(CoreError::Invalid(
            "covering selection failed to absorb the rounding deficit".into(),
        ));
    }

    let c: Vec<Rational> = steps
        .into_iter()
        .map(|k| Rational::new(k, BigInt::from(m)))
        .collect();
    let sum: Rational = c.iter().sum();
    if !sum.is_one() {
        return Err(CoreError::Invalid(
            "covering selection left the mesh simplex".into(),
        ));
    }
    for (cj, bj) in c.iter().zip(&b) {
        if &(cj * &keep) > bj {
            return Err(CoreError::Invalid(
                "covering selection overshot a coordinate".into(),
            ));
        }
    }
    Ok(c)
}

/// Splits one global drop across (dim + 1) * place_count slots: given the
/// nonpositive per-slot log ratios of a solution and the required total
/// drop, returns mesh weights c with ratio_j <= -c_j (1 - theta) * drop
/// for every slot, theta as in [`covering_theta`].
pub fn split_into_systems(
    dim: u32,
    place_count: u32,
    delta: &Rational,
    ratios: &[Rational],
    drop: &Rational,
) -> Result<Vec<Rational>> {
    if place_count == 0 {
        return Err(CoreError::Invalid("the place count must be positive".into()));
    }
    let slots = (u64::from(dim) + 1) * u64::from(place_count);
    if ratios.len() as u64 != slots {
        return Err(CoreError::Invalid(format!(
            "expected {} ratios, got {}",
            slots,
            ratios.len()
        )));
    }
    if !drop.is_positive() {
        return Err(CoreError::Invalid("the required drop must be positive".into()));
    }
    let total: Rational = ratios.iter().sum();
    if -&total < *drop {
        return Err(CoreError::Invalid(
            "the ratios do not drop far enough to be a solution".into(),
        ));
    }
    let theta = covering_theta(dim, delta)?;
    let c = select_covering_tuple(&theta, ratios)?;
    let keep = Rational::one() - &theta;
    for (a, cj) in ratios.iter().zip(&c) {
        if a > &-(cj * &keep * drop) {
            return Err(CoreError::Invalid(
                "selected weights miss the per-slot drop".into(),
            ));
        }
    }
    Ok(c)
}
