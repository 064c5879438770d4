//! Logarithmic heights as exact symbolic sums. A `LogHeight` is
//!
//! ```text
//!   rat  +  sum_p e_p * ln p  +  sum_j c_j * atom_j
//! ```
//!
//! with rational `rat`, `e_p`, `c_j`. Atoms are archimedean logs that have
//! no finite prime expansion (ln of an unfactorable rational, ln |a+b sqrt d|,
//! or a Monte Carlo scalar with a statistical error). Everything that can
//! cancel exactly does cancel exactly: logs of rational magnitudes are
//! stored through their prime exponents, so product-formula and height
//! identities over Q come out structurally zero instead of merely small.
//!
//! Comparisons are three-valued. A difference that is structurally zero is
//! equal (complete by unique factorization and the transcendence of e^q for
//! rational q != 0); otherwise the difference is evaluated at increasing
//! precision, from 256 up to 4096 bits, and a sign is returned once the
//! value clears its tracked error band. Statistical atoms cannot be
//! re-derived, so comparisons inside their error bars stay undecidable.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use num_traits::{Signed, Zero};

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::place::{finite_valuation, places_above, Place, PlaceKind, RationalPlace};
use crate::arith::rational::{rational_exponents, squarefree_part, Rational};
use crate::arith::real::{ln_quad_abs, ln_rational, sqrt_u64, HpReal, DEFAULT_PREC, MAX_PREC};
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArchAtom {
    /// ln q for a positive rational kept whole (numerator or denominator
    /// resisted factorization).
    LnRational(Rational),
    /// ln(a + b sqrt d) with d > 1 squarefree and a, b > 0: the dominant
    /// real embedding. Other sign patterns reduce to this plus exact parts.
    LnQuadAbs { a: Rational, b: Rational, d: i64 },
    /// ln(sum_j r_j sqrt(k_j)) with positive rational r_j and distinct
    /// squarefree k_j, at least two distinct radicands. Single-radicand
    /// sums are folded into exact parts by the constructor.
    LnSumSqrt(Vec<(u64, Rational)>),
    /// A Monte Carlo estimate; bits of the f64 value and error bound.
    Statistical { value_bits: u64, err_bits: u64 },
}

impl ArchAtom {
    fn eval(&self, prec: u32) -> Result<HpReal> {
        match self {
            ArchAtom::LnRational(q) => ln_rational(q, prec),
            ArchAtom::LnQuadAbs { a, b, d } => ln_quad_abs(a, b, *d, prec),
            ArchAtom::LnSumSqrt(parts) => {
                let w = prec + 16;
                let mut sum = HpReal::exact_zero(w);
                for (k, r) in parts {
                    sum = sum.add(&sqrt_u64(*k, w).mul_rational(r));
                }
                sum.ln(prec)
            }
            ArchAtom::Statistical { value_bits, err_bits } => HpReal::from_f64(
                f64::from_bits(*value_bits),
                f64::from_bits(*err_bits),
                prec,
            ),
        }
    }

    fn is_statistical(&self) -> bool {
        matches!(self, ArchAtom::Statistical { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LogHeight {
    rat: Rational,
    primes: BTreeMap<u64, Rational>,
    atoms: BTreeMap<ArchAtom, Rational>,
}

impl LogHeight {
    pub fn zero() -> Self {
        LogHeight::default()
    }

    pub fn from_rational(q: Rational) -> Self {
        LogHeight {
            rat: q,
            ..Default::default()
        }
    }

    pub fn from_prime_exponents(primes: BTreeMap<u64, Rational>) -> Self {
        let mut h = LogHeight {
            primes,
            ..Default::default()
        };
        h.normalize();
        h
    }

    /// ln q for q > 0, stored through prime exponents when q factors under
    /// the guard and as a whole atom otherwise.
    pub fn ln_of_rational(q: &Rational) -> Result<Self> {
        if !q.is_positive() {
            return Err(CoreError::Invalid("log of a non-positive rational".into()));
        }
        match rational_exponents(q) {
            Ok(exps) => Ok(LogHeight::from_prime_exponents(
                exps.into_iter()
                    .map(|(p, e)| (p, Rational::from_integer(e.into())))
                    .collect(),
            )),
            Err(CoreError::FactorGuard(_)) => {
                let mut atoms = BTreeMap::new();
                atoms.insert(ArchAtom::LnRational(q.clone()), Rational::from_integer(1.into()));
                Ok(LogHeight {
                    atoms,
                    ..Default::default()
                })
            }
            Err(e) => Err(e),
        }
    }

    /// ln(sum_j sqrt(q_j)) for positive rationals q_j. Each root is reduced
    /// to r sqrt(k) with squarefree k; a single surviving radicand folds
    /// into the exact parts, several stay as one canonical atom.
    pub fn ln_sum_sqrt(qs: &[Rational]) -> Result<Self> {
        if qs.is_empty() {
            return Err(CoreError::Invalid("empty sum under a logarithm".into()));
        }
        let mut groups: BTreeMap<u64, Rational> = BTreeMap::new();
        for q in qs {
            if !q.is_positive() {
                return Err(CoreError::Invalid("sqrt of a non-positive term".into()));
            }
            // sqrt(n/d) = sqrt(n d)/d = (g/d) sqrt(k)
            let (g, k) = squarefree_part(&(q.numer() * q.denom()))?;
            let r = Rational::new(g, q.denom().clone());
            *groups.entry(k).or_insert_with(Rational::zero) += r;
        }
        if groups.len() == 1 {
            let (k, r) = groups.into_iter().next().unwrap();
            let half = Rational::new(1.into(), 2.into());
            let surd = LogHeight::ln_of_rational(&Rational::from_integer(k.into()))?.scale(&half);
            return Ok(LogHeight::ln_of_rational(&r)?.add(&surd));
        }
        let mut atoms = BTreeMap::new();
        atoms.insert(
            ArchAtom::LnSumSqrt(groups.into_iter().collect()),
            Rational::from_integer(1.into()),
        );
        Ok(LogHeight {
            atoms,
            ..Default::default()
        })
    }

    pub fn statistical(value: f64, err: f64) -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert(
            ArchAtom::Statistical {
                value_bits: value.to_bits(),
                err_bits: err.to_bits(),
            },
            Rational::from_integer(1.into()),
        );
        LogHeight {
            atoms,
            ..Default::default()
        }
    }

    /// ln |a + b sqrt d| reduced to the canonical representative with
    /// a, b > 0. Negating the value fixes the sign of b; a negative a is
    /// rewritten through ln |u| = ln |norm u| - ln |conj u|, whose conjugate
    /// lands in the canonical quadrant. Conjugate embeddings therefore hit
    /// the same atom key and cancel exactly in sums.
    fn quad_abs(a: Rational, b: Rational, d: i64) -> Result<Self> {
        let (a, b) = if b.is_negative() { (-a, -b) } else { (a, b) };
        if a.is_negative() {
            let norm_mag = (&a * &a - Rational::from_integer(d.into()) * &b * &b).abs();
            let whole = LogHeight::ln_of_rational(&norm_mag)?;
            return Ok(whole.sub(&LogHeight::quad_abs(-a, b, d)?));
        }
        let mut atoms = BTreeMap::new();
        atoms.insert(ArchAtom::LnQuadAbs { a, b, d }, Rational::from_integer(1.into()));
        Ok(LogHeight {
            atoms,
            ..Default::default()
        })
    }

    fn normalize(&mut self) {
        self.primes.retain(|_, e| !e.is_zero());
        self.atoms.retain(|_, c| !c.is_zero());
    }

    pub fn add(&self, other: &LogHeight) -> LogHeight {
        let mut out = self.clone();
        out.rat += &other.rat;
        for (p, e) in &other.primes {
            let slot = out.primes.entry(*p).or_insert_with(Rational::zero);
            *slot += e;
        }
        for (a, c) in &other.atoms {
            let slot = out.atoms.entry(a.clone()).or_insert_with(Rational::zero);
            *slot += c;
        }
        out.normalize();
        out
    }

    pub fn neg(&self) -> LogHeight {
        self.scale(&Rational::from_integer((-1).into()))
    }

    pub fn sub(&self, other: &LogHeight) -> LogHeight {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> LogHeight {
        if c.is_zero() {
            return LogHeight::zero();
        }
        LogHeight {
            rat: &self.rat * c,
            primes: self.primes.iter().map(|(p, e)| (*p, e * c)).collect(),
            atoms: self.atoms.iter().map(|(a, k)| (a.clone(), k * c)).collect(),
        }
    }

    /// True when the represented real is exactly zero.
    pub fn is_zero_exact(&self) -> bool {
        self.rat.is_zero() && self.primes.is_empty() && self.atoms.is_empty()
    }

    /// True when every part can be re-derived to arbitrary precision.
    pub fn is_escalatable(&self) -> bool {
        self.atoms.keys().all(|a| !a.is_statistical())
    }

    pub fn eval(&self, prec: u32) -> Result<HpReal> {
        let mut acc = HpReal::from_rational(&self.rat, prec);
        for (p, e) in &self.primes {
            acc = acc.add(&ln_prime(*p, prec).mul_rational(e));
        }
        for (atom, c) in &self.atoms {
            acc = acc.add(&atom.eval(prec)?.mul_rational(c));
        }
        Ok(acc)
    }

    pub fn to_f64(&self) -> f64 {
        match self.eval(96) {
            Ok(v) => v.to_f64(),
            Err(_) => f64::NAN,
        }
    }

    /// Three-valued comparison with precision escalation.
    pub fn cmp3(&self, other: &LogHeight) -> Result<Ordering> {
        let diff = self.sub(other);
        if diff.is_zero_exact() {
            return Ok(Ordering::Equal);
        }
        let mut prec = DEFAULT_PREC;
        loop {
            let v = diff.eval(prec)?;
            if let Some(sign) = v.definite_sign() {
                return Ok(match sign {
                    s if s < 0 => Ordering::Less,
                    s if s > 0 => Ordering::Greater,
                    _ => Ordering::Equal,
                });
            }
            if prec >= MAX_PREC || !diff.is_escalatable() {
                return Err(CoreError::Undecidable {
                    bits: prec,
                    error_bound: v.err_abs(),
                });
            }
            prec *= 2;
        }
    }

    pub fn sign3(&self) -> Result<Ordering> {
        self.cmp3(&LogHeight::zero())
    }

    pub fn prime_exponents(&self) -> &BTreeMap<u64, Rational> {
        &self.primes
    }

    pub fn rational_part(&self) -> &Rational {
        &self.rat
    }
}

fn ln_prime(p: u64, prec: u32) -> HpReal {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), HpReal>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((p, prec))
        .or_insert_with(|| {
            ln_rational(&Rational::from_integer(p.into()), prec)
                .expect("prime is positive")
        })
        .clone()
}

/// Normalized log |x|_v. Finite places contribute pure prime exponents;
/// archimedean places contribute prime exponents when the magnitude is a
/// rational power of rationals and a quadratic-log atom otherwise.
pub fn log_abs(x: &FieldElement, place: &Place) -> Result<LogHeight> {
    if x.is_zero() {
        return Err(CoreError::Invalid("log_abs of zero".into()));
    }
    if x.field != place.field {
        return Err(CoreError::FieldMismatch(format!(
            "element of {} at a place of {}",
            x.field, place.field
        )));
    }
    let half = Rational::new(1.into(), 2.into());
    match place.kind {
        PlaceKind::ArchRational => LogHeight::ln_of_rational(&x.a.abs()),
        PlaceKind::ArchComplex => {
            Ok(LogHeight::ln_of_rational(&x.complex_modulus_sq())?.scale(&half))
        }
        PlaceKind::ArchReal { second } => {
            let d = match x.field {
                NumberField::Quadratic { d } => d,
                _ => unreachable!(),
            };
            let y = if second { x.conj() } else { x.clone() };
            if y.b.is_zero() {
                Ok(LogHeight::ln_of_rational(&y.a.abs())?.scale(&half))
            } else if y.a.is_zero() {
                // |b| sqrt(d): ln|b|/2 + ln(d)/4
                let quarter = Rational::new(1.into(), 4.into());
                Ok(LogHeight::ln_of_rational(&y.b.abs())?
                    .scale(&half)
                    .add(&LogHeight::ln_of_rational(&Rational::from_integer(d.into()))?
                        .scale(&quarter)))
            } else {
                Ok(LogHeight::quad_abs(y.a.clone(), y.b.clone(), d)?.scale(&half))
            }
        }
        PlaceKind::FiniteRational { .. }
        | PlaceKind::FiniteSplit { .. }
        | PlaceKind::FiniteInert { .. }
        | PlaceKind::FiniteRamified { .. } => {
            let p = place.residue_prime().unwrap();
            let v = finite_valuation(x, place)?;
            let e = -v * place.local_degree_ratio();
            Ok(LogHeight::from_prime_exponents(BTreeMap::from([(p, e)])))
        }
    }
}

/// Primes where some coordinate can have a nonzero valuation at a place
/// above them. Split places can hide cancelling valuations that are
/// invisible in the norm, which is why coordinate denominators join in.
pub fn relevant_primes(coords: &[FieldElement]) -> Result<BTreeSet<u64>> {
    let mut primes = BTreeSet::new();
    let mut absorb = |q: &Rational| -> Result<()> {
        if !q.is_zero() {
            for (p, _) in rational_exponents(q)? {
                primes.insert(p);
            }
        }
        Ok(())
    };
    for x in coords.iter().filter(|x| !x.is_zero()) {
        match x.field {
            NumberField::Rationals => absorb(&x.a)?,
            NumberField::Quadratic { .. } => {
                absorb(&x.norm())?;
                absorb(&Rational::from_integer(x.a.denom() * x.b.denom()))?;
            }
        }
    }
    Ok(primes)
}

/// Index of a coordinate maximizing |x_i|_v, decided exactly.
pub fn argmax_abs(coords: &[FieldElement], place: &Place) -> Result<usize> {
    let live: Vec<usize> = (0..coords.len()).filter(|&i| !coords[i].is_zero()).collect();
    if live.is_empty() {
        return Err(CoreError::Invalid("all coordinates zero".into()));
    }
    let better = |i: usize, j: usize| -> Result<bool> {
        // true when |x_i| > |x_j| at the place
        let (x, y) = (&coords[i], &coords[j]);
        match place.kind {
            PlaceKind::ArchRational => Ok(x.a.abs() > y.a.abs()),
            PlaceKind::ArchComplex => Ok(x.complex_modulus_sq() > y.complex_modulus_sq()),
            PlaceKind::ArchReal { second } => {
                let (u, w) = if second {
                    (x.conj(), y.conj())
                } else {
                    (x.clone(), y.clone())
                };
                let t = &(&u * &u) - &(&w * &w);
                Ok(t.sign_real() > 0)
            }
            _ => Ok(finite_valuation(x, place)? < finite_valuation(y, place)?),
        }
    };
    let mut best = live[0];
    for &i in &live[1..] {
        if better(i, best)? {
            best = i;
        }
    }
    Ok(best)
}

/// Absolute Weil height of a projective point with coordinates in `field`:
/// sum over all places of log max_i |x_i|_v. Exact over Q; over quadratic
/// fields only genuinely irrational archimedean logs carry atoms.
pub fn point_height(coords: &[FieldElement]) -> Result<LogHeight> {
    if coords.is_empty() || coords.iter().all(FieldElement::is_zero) {
        return Err(CoreError::Invalid("height of the zero vector".into()));
    }
    let field = coords[0].field;
    if coords.iter().any(|c| c.field != field) {
        return Err(CoreError::FieldMismatch("mixed-field coordinates".into()));
    }
    let mut h = LogHeight::zero();
    for place in places_above(field, RationalPlace::Infinity) {
        let i = argmax_abs(coords, &place)?;
        h = h.add(&log_abs(&coords[i], &place)?);
    }
    for p in relevant_primes(coords)? {
        for place in places_above(field, RationalPlace::Prime(p)) {
            let i = argmax_abs(coords, &place)?;
            h = h.add(&log_abs(&coords[i], &place)?);
        }
    }
    Ok(h)
}

/// Sum of log |x|_v over every place (zero by the product formula). The
/// exact parts cancel structurally; for real quadratic inputs a pair of
/// conjugate atoms remains and evaluates inside its error band.
pub fn product_formula_residual(x: &FieldElement) -> Result<LogHeight> {
    if x.is_zero() {
        return Err(CoreError::Invalid("product formula at zero".into()));
    }
    let mut total = LogHeight::zero();
    for place in places_above(x.field, RationalPlace::Infinity) {
        total = total.add(&log_abs(x, &place)?);
    }
    for p in relevant_primes(std::slice::from_ref(x))? {
        for place in places_above(x.field, RationalPlace::Prime(p)) {
            total = total.add(&log_abs(x, &place)?);
        }
    }
    Ok(total)
}
