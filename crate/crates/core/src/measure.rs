//! Monte Carlo integration of log|f| against the product of uniform
//! measures on the unit spheres of each variable block, plus the exact
//! harmonic correction that turns the sphere integral into the measure
//! m(f). Sampling is batched with one RNG stream per batch, and batches
//! are merged in index order, so the parallel and sequential backends
//! return bit-identical estimates.

use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::arith::field::NumberField;
use crate::arith::height::LogHeight;
use crate::arith::place::{places_above, RationalPlace};
use crate::arith::rational::{rat_frac, Rational};
use crate::error::{CoreError, Result};
use crate::exec::map_ordered;
use crate::poly::block::BlockPoly;
use crate::poly::heights::{norms_at_place, CoeffList};

const BATCH: u64 = 4096;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleConfig {
    pub samples: u64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            samples: 200_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchStats {
    sum: f64,
    sum_sq: f64,
    zero_hits: u64,
}

fn complex_pow(base: (f64, f64), e: u32) -> (f64, f64) {
    let mut out = (1.0, 0.0);
    for _ in 0..e {
        out = (
            out.0 * base.0 - out.1 * base.1,
            out.0 * base.1 + out.1 * base.0,
        );
    }
    out
}

fn sample_batch(
    terms: &[(Vec<u32>, (f64, f64))],
    blocks: &[usize],
    seed: u64,
    batch_idx: u64,
    count: usize,
) -> BatchStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch_idx);
    let total: usize = blocks.iter().sum();
    let mut coords = vec![(0.0f64, 0.0f64); total];
    let mut stats = BatchStats::default();
    for _ in 0..count {
        let mut offset = 0;
        for &size in blocks {
            let mut norm_sq = 0.0;
            for slot in coords[offset..offset + size].iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *slot = (re, im);
                norm_sq += re * re + im * im;
            }
            let inv = 1.0 / norm_sq.sqrt();
            for slot in coords[offset..offset + size].iter_mut() {
                slot.0 *= inv;
                slot.1 *= inv;
            }
            offset += size;
        }
        let mut acc = (0.0f64, 0.0f64);
        for (exps, coeff) in terms {
            let mut term = *coeff;
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    let p = complex_pow(coords[i], e);
                    term = (term.0 * p.0 - term.1 * p.1, term.0 * p.1 + term.1 * p.0);
                }
            }
            acc.0 += term.0;
            acc.1 += term.1;
        }
        let mag_sq = acc.0 * acc.0 + acc.1 * acc.1;
        if mag_sq == 0.0 {
            stats.zero_hits += 1;
        } else {
            let v = 0.5 * mag_sq.ln();
            stats.sum += v;
            stats.sum_sq += v * v;
        }
    }
    stats
}

/// Exact correction (1/2) sum_h deg_h(f) * sum_{j=1}^{l_h} 1/(2j) with
/// l_h one less than the block size.
pub fn harmonic_correction(degrees: &[u32], blocks: &[usize]) -> Rational {
    let mut total = Rational::zero();
    for (deg, &size) in degrees.iter().zip(blocks) {
        let mut inner = Rational::zero();
        for j in 1..size {
            inner += rat_frac(1, 2 * j as i64);
        }
        total += Rational::from_integer((*deg).into()) * inner / Rational::from_integer(2.into());
    }
    total
}

/// Monte Carlo estimate of m(f) for one complex embedding of the
/// coefficients. `conjugate_embedding` selects the second real embedding
/// of a real quadratic coefficient field and is ignored otherwise.
pub fn sphere_integral(
    f: &BlockPoly,
    conjugate_embedding: bool,
    cfg: &SampleConfig,
) -> Result<MeasureEstimate> {
    if f.is_zero() {
        return Err(CoreError::Invalid("measure of the zero polynomial".into()));
    }
    if cfg.samples < 2 {
        return Err(CoreError::Invalid("need at least two samples".into()));
    }
    let terms = f.complex_terms(conjugate_embedding);
    let blocks = f.blocks().to_vec();
    let n_batches = cfg.samples.div_ceil(BATCH);
    let plan: Vec<(u64, usize)> = (0..n_batches)
        .map(|b| {
            let count = (cfg.samples - b * BATCH).min(BATCH) as usize;
            (b, count)
        })
        .collect();
    let seed = cfg.seed;
    let stats = map_ordered(plan, |(b, count)| {
        sample_batch(&terms, &blocks, seed, b, count)
    });
    let mut merged = BatchStats::default();
    for s in stats {
        merged.sum += s.sum;
        merged.sum_sq += s.sum_sq;
        merged.zero_hits += s.zero_hits;
    }
    if merged.zero_hits > 0 {
        return Err(CoreError::UnstableIntegrand(format!(
            "{} of {} samples hit a zero of the integrand",
            merged.zero_hits, cfg.samples
        )));
    }
    let n = cfg.samples as f64;
    let mean = merged.sum / n;
    let var = ((merged.sum_sq - merged.sum * merged.sum / n) / (n - 1.0)).max(0.0);
    let correction = harmonic_correction(f.degrees(), &blocks)
        .to_f64()
        .unwrap();
    Ok(MeasureEstimate {
        value: mean + correction,
        stderr: (var / n).sqrt(),
        samples: cfg.samples,
    })
}

/// The measure-based height: archimedean sphere measures weighted by
/// local degree plus exact sup norms at the finite places.
pub fn h_star(f: &BlockPoly, cfg: &SampleConfig) -> Result<MeasureEstimate> {
    let coeffs = CoeffList::of_block(f)?;
    let embeddings: &[(bool, f64)] = match f.field() {
        Some(NumberField::Quadratic { d }) if d > 0 => &[(false, 0.5), (true, 0.5)],
        _ => &[(false, 1.0)],
    };
    let mut value = 0.0;
    let mut var = 0.0;
    for (idx, (second, factor)) in embeddings.iter().enumerate() {
        let local = SampleConfig {
            samples: cfg.samples,
            seed: cfg.seed.wrapping_add(idx as u64 * 0x9e37_79b9_7f4a_7c15),
        };
        let est = sphere_integral(f, *second, &local)?;
        value += factor * est.value;
        var += (factor * est.stderr) * (factor * est.stderr);
    }
    let field = coeffs.field();
    let mut finite = LogHeight::zero();
    for p in coeffs.relevant_primes()? {
        for place in places_above(field, RationalPlace::Prime(p)) {
            let (sup, _) = norms_at_place(&coeffs, &place)?;
            finite = finite.add(&sup);
        }
    }
    value += finite.to_f64();
    Ok(MeasureEstimate {
        value,
        stderr: var.sqrt(),
        samples: cfg.samples,
    })
}

/// |h*(f) - h1(f)| never exceeds this exact quantity.
pub fn hstar_h1_gap_bound(f: &BlockPoly) -> Result<LogHeight> {
    let mut bound = LogHeight::zero();
    for (deg, &size) in f.degrees().iter().zip(f.blocks()) {
        let log_size = LogHeight::ln_of_rational(&Rational::from_integer((size as i64).into()))?;
        bound = bound.add(&log_size.scale(&Rational::from_integer((*deg).into())));
    }
    Ok(bound)
}

/// Exact slacks of the product norm envelope
/// h1(f) <= sum h1(f_i) <= h1(f) + 2 sum_h deg_h(f) log(block size),
/// for f the product of the factors. Both are nonnegative.
pub fn measure_norm_bounds(factors: &[BlockPoly]) -> Result<(LogHeight, LogHeight)> {
    if factors.is_empty() {
        return Err(CoreError::Invalid("empty factor list".into()));
    }
    let mut product = factors[0].clone();
    for g in &factors[1..] {
        product = product.mul(g)?;
    }
    let (_, h1_product) = crate::poly::heights::block_heights(&product)?;
    let mut h1_sum = LogHeight::zero();
    for g in factors {
        let (_, h1) = crate::poly::heights::block_heights(g)?;
        h1_sum = h1_sum.add(&h1);
    }
    let gap = hstar_h1_gap_bound(&product)?.scale(&Rational::from_integer(2.into()));
    let left = h1_sum.sub(&h1_product);
    let right = h1_product.add(&gap).sub(&h1_sum);
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::field::FieldElement;
    use crate::arith::rational::rat_i64;
    use crate::poly::text::parse_block;
    use std::cmp::Ordering;

    fn coordinate(blocks: Vec<usize>) -> BlockPoly {
        let total: usize = blocks.iter().sum();
        let mut exps = vec![0u32; total];
        exps[0] = 1;
        BlockPoly::from_field_terms(
            blocks,
            vec![(
                exps,
                FieldElement::from_i64(NumberField::Rationals, 1),
            )],
            NumberField::Rationals,
        )
        .unwrap()
    }

    #[test]
    fn coordinate_on_a_circle_has_measure_zero() {
        let f = coordinate(vec![1]);
        let est = sphere_integral(&f, false, &SampleConfig { samples: 5_000, seed: 7 }).unwrap();
        assert!(est.value.abs() < 1e-10);
        assert!(est.stderr < 1e-10);
    }

    #[test]
    fn coordinate_on_a_three_sphere_has_measure_minus_quarter() {
        let f = coordinate(vec![2]);
        let est =
            sphere_integral(&f, false, &SampleConfig { samples: 60_000, seed: 11 }).unwrap();
        assert!(
            (est.value + 0.25).abs() < 3.0 * est.stderr + 1e-6,
            "value {} stderr {}",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn estimates_are_deterministic() {
        let f = parse_block("1 * u0_0 + 2 * u0_1 + 1 * u0_0", None).unwrap();
        let cfg = SampleConfig { samples: 9_000, seed: 3 };
        let a = sphere_integral(&f, false, &cfg).unwrap();
        let b = sphere_integral(&f, false, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn stderr_scales_like_inverse_square_root() {
        let f = parse_block("1 * u0_0 + 3 * u0_1", None).unwrap();
        let small = sphere_integral(&f, false, &SampleConfig { samples: 20_000, seed: 5 }).unwrap();
        let large = sphere_integral(&f, false, &SampleConfig { samples: 80_000, seed: 5 }).unwrap();
        let ratio = small.stderr / large.stderr;
        assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn log_of_product_splits_under_shared_seed() {
        let f = parse_block("1 * u0_0 + 1 * u0_1", None).unwrap();
        let g = parse_block("1 * u0_0 + -1 * u0_1", None).unwrap();
        let fg = f.mul(&g).unwrap();
        let cfg = SampleConfig { samples: 10_000, seed: 13 };
        let ef = sphere_integral(&f, false, &cfg).unwrap();
        let eg = sphere_integral(&g, false, &cfg).unwrap();
        let efg = sphere_integral(&fg, false, &cfg).unwrap();
        assert!((efg.value - ef.value - eg.value).abs() < 1e-9);
    }

    #[test]
    fn product_norm_envelope_in_both_directions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..12 {
            let mut factors = Vec::new();
            for _ in 0..rng.random_range(2..=3) {
                let a = rng.random_range(-6..=6i64);
                let b = rng.random_range(1..=6i64);
                let f = BlockPoly::from_field_terms(
                    vec![2],
                    vec![
                        (vec![1, 0], FieldElement::from_i64(NumberField::Rationals, a)),
                        (vec![0, 1], FieldElement::from_i64(NumberField::Rationals, b)),
                    ],
                    NumberField::Rationals,
                )
                .unwrap();
                factors.push(f);
            }
            let (left, right) = measure_norm_bounds(&factors).unwrap();
            assert_ne!(left.sign3().unwrap(), Ordering::Less);
            assert_ne!(right.sign3().unwrap(), Ordering::Less);
        }
    }

    #[test]
    fn hstar_stays_within_the_h1_gap() {
        let f = parse_block("1 * u0_0 + 2 * u0_1", None).unwrap();
        let cfg = SampleConfig { samples: 40_000, seed: 23 };
        let est = h_star(&f, &cfg).unwrap();
        let (_, h1) = crate::poly::heights::block_heights(&f).unwrap();
        let gap = hstar_h1_gap_bound(&f).unwrap();
        assert!(
            (est.value - h1.to_f64()).abs() <= gap.to_f64() + 3.0 * est.stderr + 1e-6,
            "h* {} h1 {} gap {}",
            est.value,
            h1.to_f64(),
            gap.to_f64()
        );
    }

    #[test]
    fn quadratic_coefficients_average_both_embeddings() {
        let k = NumberField::quadratic(2).unwrap();
        // f = (1 + sqrt2) u0_0: m factors through log of the constant, so
        // h*(f) averages log|1+sqrt2| and log|1-sqrt2|, which cancel, and
        // the finite part is log of the norm's content, zero here.
        let f = BlockPoly::from_field_terms(
            vec![1],
            vec![(vec![1], FieldElement::new(k, rat_i64(1), rat_i64(1)))],
            k,
        )
        .unwrap();
        let est = h_star(&f, &SampleConfig { samples: 4_000, seed: 29 }).unwrap();
        assert!(est.value.abs() < 1e-9 + 3.0 * est.stderr);
    }

    #[test]
    fn vanishing_embeddings_are_reported_unstable() {
        // a coefficient below the f64 range embeds to exactly zero, so
        // every sample lands on a zero of the integrand
        let tiny = Rational::new(1.into(), num_bigint::BigInt::from(1) << 1200);
        let f = BlockPoly::from_field_terms(
            vec![1],
            vec![(
                vec![1],
                FieldElement::from_rational(NumberField::Rationals, tiny),
            )],
            NumberField::Rationals,
        )
        .unwrap();
        let err = sphere_integral(&f, false, &SampleConfig { samples: 64, seed: 1 }).unwrap_err();
        assert!(matches!(err, CoreError::UnstableIntegrand(_)));
    }
}
