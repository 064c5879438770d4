//! Text form of polynomials: terms `coeff * x0^a0 x1^a1` joined by ` + `,
//! rationals as `p/q`. Quadratic-field coefficients are parenthesized,
//! `(a+b*sqrt(d))`; surd coefficients are bare products `r*sqrt(k)`.
//! Homogeneous polynomials use variables `x{i}`; block polynomials use
//! `u{h}_{i}` with one block per `h`.

use num_traits::{One, Signed, Zero};

use crate::arith::field::{FieldElement, NumberField};
use crate::arith::rational::{format_rational, parse_rational, Rational};
use crate::error::{CoreError, Result};
use crate::poly::block::BlockPoly;
use crate::poly::homog::HomogeneousPoly;
use crate::poly::surd::QuadraticSurd;

pub fn format_homogeneous(f: &HomogeneousPoly) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    f.terms()
        .iter()
        .map(|(m, c)| {
            let mono = format_x_monomial(&m.0);
            let coeff = format_field_coeff(c);
            if mono.is_empty() {
                coeff
            } else {
                format!("{coeff} * {mono}")
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn format_block(f: &BlockPoly) -> String {
    if f.is_zero() {
        return "0".to_string();
    }
    let ranges = f.block_ranges();
    let fmt_mono = |exps: &[u32]| -> String {
        let mut parts = Vec::new();
        for (h, range) in ranges.iter().enumerate() {
            for (i, &e) in exps[range.clone()].iter().enumerate() {
                if e == 1 {
                    parts.push(format!("u{h}_{i}"));
                } else if e > 1 {
                    parts.push(format!("u{h}_{i}^{e}"));
                }
            }
        }
        parts.join(" ")
    };
    let terms: Vec<String> = if let Some(map) = f.field_terms() {
        map.iter()
            .map(|(m, c)| join_term(format_field_coeff(c), fmt_mono(&m.0)))
            .collect()
    } else {
        f.surd_terms()
            .unwrap()
            .iter()
            .map(|(m, c)| join_term(format_surd_coeff(c), fmt_mono(&m.0)))
            .collect()
    };
    terms.join(" + ")
}

fn join_term(coeff: String, mono: String) -> String {
    if mono.is_empty() {
        coeff
    } else {
        format!("{coeff} * {mono}")
    }
}

fn format_x_monomial(exps: &[u32]) -> String {
    exps.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| {
            if e == 1 {
                format!("x{i}")
            } else {
                format!("x{i}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn format_field_coeff(c: &FieldElement) -> String {
    if c.b.is_zero() {
        return format_rational(&c.a);
    }
    let d = match c.field {
        NumberField::Quadratic { d } => d,
        NumberField::Rationals => unreachable!(),
    };
    let sign = if c.b.is_negative() { "-" } else { "+" };
    format!(
        "({}{}{}*sqrt({}))",
        format_rational(&c.a),
        sign,
        format_rational(&c.b.abs()),
        d
    )
}

fn format_surd_coeff(c: &QuadraticSurd) -> String {
    if c.is_rational() {
        format_rational(c.r())
    } else {
        format!("{}*sqrt({})", format_rational(c.r()), c.k())
    }
}

/// Splits on a separator at parenthesis depth zero.
fn split_depth0(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn parse_field_coeff(s: &str) -> Result<FieldElement> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let Some(sqrt_at) = inner.find("*sqrt(") else {
            return Ok(FieldElement::from_rational(
                NumberField::Rationals,
                parse_rational(inner.trim())?,
            ));
        };
        let after = &inner[sqrt_at + 6..];
        let Some(close) = after.find(')') else {
            return Err(CoreError::Parse(format!("unclosed sqrt in '{s}'")));
        };
        let d: i64 = after[..close]
            .trim()
            .parse()
            .map_err(|_| CoreError::Parse(format!("bad discriminant in '{s}'")))?;
        let prefix = &inner[..sqrt_at];
        // split the a-part from the signed b-part at the last top-level +/-
        let mut split = None;
        for (i, ch) in prefix.char_indices().skip(1) {
            if ch == '+' || ch == '-' {
                let prev = prefix.as_bytes()[i - 1];
                if prev != b'/' && prev != b'e' {
                    split = Some((i, ch));
                }
            }
        }
        let (a, b) = match split {
            Some((i, ch)) => {
                let b = parse_rational(prefix[i + 1..].trim())?;
                (
                    parse_rational(prefix[..i].trim())?,
                    if ch == '-' { -b } else { b },
                )
            }
            None => (Rational::zero(), parse_rational(prefix.trim())?),
        };
        let field = NumberField::quadratic(d)?;
        Ok(FieldElement::new(field, a, b))
    } else {
        Ok(FieldElement::from_rational(
            NumberField::Rationals,
            parse_rational(s)?,
        ))
    }
}

fn parse_surd_coeff(s: &str) -> Result<QuadraticSurd> {
    let s = s.trim();
    if let Some(sqrt_at) = s.find("*sqrt(") {
        let r = parse_rational(s[..sqrt_at].trim())?;
        let after = &s[sqrt_at + 6..];
        let close = after
            .find(')')
            .ok_or_else(|| CoreError::Parse(format!("unclosed sqrt in '{s}'")))?;
        let k: u64 = after[..close]
            .trim()
            .parse()
            .map_err(|_| CoreError::Parse(format!("bad radicand in '{s}'")))?;
        QuadraticSurd::new(r, k)
    } else {
        Ok(QuadraticSurd::rational(parse_rational(s)?))
    }
}

fn parse_x_var(token: &str) -> Result<(usize, u32)> {
    let (base, exp) = match token.split_once('^') {
        Some((b, e)) => (
            b,
            e.trim()
                .parse::<u32>()
                .map_err(|_| CoreError::Parse(format!("bad exponent in '{token}'")))?,
        ),
        None => (token, 1),
    };
    let idx = base
        .trim()
        .strip_prefix('x')
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(|| CoreError::Parse(format!("expected a variable, got '{token}'")))?;
    Ok((idx, exp))
}

fn parse_u_var(token: &str) -> Result<(usize, usize, u32)> {
    let (base, exp) = match token.split_once('^') {
        Some((b, e)) => (
            b,
            e.trim()
                .parse::<u32>()
                .map_err(|_| CoreError::Parse(format!("bad exponent in '{token}'")))?,
        ),
        None => (token, 1),
    };
    let rest = base
        .trim()
        .strip_prefix('u')
        .ok_or_else(|| CoreError::Parse(format!("expected a block variable, got '{token}'")))?;
    let (h, i) = rest
        .split_once('_')
        .ok_or_else(|| CoreError::Parse(format!("block variable wants 'u<h>_<i>': '{token}'")))?;
    Ok((
        h.parse()
            .map_err(|_| CoreError::Parse(format!("bad block index in '{token}'")))?,
        i.parse()
            .map_err(|_| CoreError::Parse(format!("bad variable index in '{token}'")))?,
        exp,
    ))
}

/// Raw parsed term: coefficient text (None means 1) and variable tokens.
fn term_pieces(term: &str) -> (Option<&str>, Vec<&str>) {
    let stars = split_depth0(term, '*');
    // the monomial, if present, is everything after the last '*' that
    // contains a variable token; a pure-coefficient term has none
    if stars.len() == 1 {
        let t = stars[0].trim();
        if t.starts_with('x') || t.starts_with('u') {
            return (None, t.split_whitespace().collect());
        }
        return (Some(t), Vec::new());
    }
    let last = stars[stars.len() - 1].trim();
    if last.starts_with('x') || last.starts_with('u') {
        let coeff_len: usize = term.len() - stars[stars.len() - 1].len() - 1;
        (
            Some(term[..coeff_len].trim()),
            last.split_whitespace().collect(),
        )
    } else {
        (Some(term.trim()), Vec::new())
    }
}

/// Parses `coeff * x0^a0 ...` terms joined by `+`. The variable count is
/// inferred from the largest index unless given.
pub fn parse_homogeneous(s: &str, nvars: Option<usize>) -> Result<HomogeneousPoly> {
    let s = s.trim();
    if s.is_empty() {
        return Err(CoreError::Parse("empty polynomial text".into()));
    }
    let mut raw: Vec<(Vec<(usize, u32)>, FieldElement)> = Vec::new();
    let mut max_var = 0usize;
    let mut field = NumberField::Rationals;
    for term in split_depth0(s, '+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(CoreError::Parse("empty term".into()));
        }
        if term == "0" {
            continue;
        }
        let (coeff_txt, var_tokens) = term_pieces(term);
        let coeff = match coeff_txt {
            Some(t) => parse_field_coeff(t)?,
            None => FieldElement::from_rational(NumberField::Rationals, Rational::one()),
        };
        if coeff.field != NumberField::Rationals {
            if field == NumberField::Rationals {
                field = coeff.field;
            } else if field != coeff.field {
                return Err(CoreError::Parse("mixed quadratic fields".into()));
            }
        }
        let mut vars = Vec::new();
        for tok in var_tokens {
            let (i, e) = parse_x_var(tok)?;
            max_var = max_var.max(i);
            vars.push((i, e));
        }
        raw.push((vars, coeff));
    }
    if raw.is_empty() {
        return Err(CoreError::Parse("zero polynomial needs explicit shape".into()));
    }
    let nvars = match nvars {
        Some(n) => {
            if max_var >= n {
                return Err(CoreError::Parse(format!(
                    "variable x{max_var} outside the declared {n} variables"
                )));
            }
            n
        }
        None => max_var + 1,
    };
    let degree = raw[0].0.iter().map(|(_, e)| e).sum::<u32>();
    let terms: Vec<_> = raw
        .into_iter()
        .map(|(vars, c)| {
            let mut exps = vec![0u32; nvars];
            for (i, e) in vars {
                exps[i] += e;
            }
            (crate::poly::monomial::Monomial(exps), c)
        })
        .collect();
    HomogeneousPoly::new(field, nvars, degree, terms)
}

/// Parses a block polynomial in `u{h}_{i}` variables. Block sizes are
/// inferred from the largest index used in each block unless given.
pub fn parse_block(s: &str, blocks: Option<Vec<usize>>) -> Result<BlockPoly> {
    let s = s.trim();
    if s.is_empty() {
        return Err(CoreError::Parse("empty polynomial text".into()));
    }
    struct RawTerm<'a> {
        coeff: Option<&'a str>,
        vars: Vec<(usize, usize, u32)>,
    }
    let mut raw = Vec::new();
    let mut max_block = 0usize;
    let mut max_index: Vec<usize> = Vec::new();
    let mut surd_seen = false;
    for term in split_depth0(s, '+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(CoreError::Parse("empty term".into()));
        }
        if term == "0" {
            continue;
        }
        let (coeff_txt, var_tokens) = term_pieces(term);
        if let Some(t) = coeff_txt {
            if t.contains("sqrt") && !t.starts_with('(') {
                surd_seen = true;
            }
        }
        let mut vars = Vec::new();
        for tok in var_tokens {
            let (h, i, e) = parse_u_var(tok)?;
            max_block = max_block.max(h);
            if max_index.len() <= h {
                max_index.resize(h + 1, 0);
            }
            max_index[h] = max_index[h].max(i);
            vars.push((h, i, e));
        }
        raw.push(RawTerm {
            coeff: coeff_txt,
            vars,
        });
    }
    if raw.is_empty() {
        return Err(CoreError::Parse("zero polynomial needs explicit shape".into()));
    }
    let blocks = match blocks {
        Some(b) => b,
        None => {
            max_index.resize(max_block + 1, 0);
            max_index.iter().map(|&i| i + 1).collect()
        }
    };
    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0, |acc, &b| {
            let o = *acc;
            *acc += b;
            Some(o)
        })
        .collect();
    let total: usize = blocks.iter().sum();
    let exps_of = |vars: &[(usize, usize, u32)]| -> Result<Vec<u32>> {
        let mut exps = vec![0u32; total];
        for &(h, i, e) in vars {
            if h >= blocks.len() || i >= blocks[h] {
                return Err(CoreError::Parse(format!(
                    "variable u{h}_{i} outside the declared blocks"
                )));
            }
            exps[offsets[h] + i] += e;
        }
        Ok(exps)
    };
    if surd_seen {
        let terms = raw
            .into_iter()
            .map(|t| {
                let c = match t.coeff {
                    Some(txt) => parse_surd_coeff(txt)?,
                    None => QuadraticSurd::one(),
                };
                Ok((exps_of(&t.vars)?, c))
            })
            .collect::<Result<Vec<_>>>()?;
        BlockPoly::from_surd_terms(blocks, terms)
    } else {
        let terms = raw
            .into_iter()
            .map(|t| {
                let c = match t.coeff {
                    Some(txt) => parse_field_coeff(txt)?,
                    None => FieldElement::from_rational(NumberField::Rationals, Rational::one()),
                };
                if c.field != NumberField::Rationals {
                    return Err(CoreError::Parse(
                        "block polynomials take rational or surd coefficients".into(),
                    ));
                }
                Ok((exps_of(&t.vars)?, c))
            })
            .collect::<Result<Vec<_>>>()?;
        BlockPoly::from_field_terms(blocks, terms, NumberField::Rationals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::{rat_frac, rat_i64};
    use crate::poly::monomial::{monomials_of_degree, Monomial};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_simple_forms() {
        let f = parse_homogeneous("1 * x0^2 + -2 * x1^2", None).unwrap();
        assert_eq!(f.degree(), 2);
        assert_eq!(f.nvars(), 2);
        let v = f
            .evaluate(&[
                FieldElement::from_i64(NumberField::Rationals, 7),
                FieldElement::from_i64(NumberField::Rationals, 5),
            ])
            .unwrap();
        assert_eq!(v, FieldElement::from_i64(NumberField::Rationals, -1));
        // implicit coefficient and explicit arity
        let g = parse_homogeneous("x0 x1 + 1/2 * x2^2", Some(4)).unwrap();
        assert_eq!(g.nvars(), 4);
        assert_eq!(g.num_terms(), 2);
    }

    #[test]
    fn quadratic_coefficients_round_trip() {
        let k = NumberField::quadratic(2).unwrap();
        let f = HomogeneousPoly::new(
            k,
            2,
            1,
            [
                (
                    Monomial(vec![1, 0]),
                    FieldElement::new(k, rat_i64(1), rat_frac(-1, 2)),
                ),
                (Monomial(vec![0, 1]), FieldElement::from_i64(k, 3)),
            ],
        )
        .unwrap();
        let text = format_homogeneous(&f);
        assert!(text.contains("sqrt(2)"));
        let back = parse_homogeneous(&text, None).unwrap();
        // the rational coefficient re-enters as rational; promote for equality
        assert_eq!(back.field(), k);
        assert_eq!(back, f);
    }

    #[test]
    fn seeded_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let nvars = rng.random_range(2..=4);
            let degree = rng.random_range(1..=3);
            let terms: Vec<_> = monomials_of_degree(nvars, degree)
                .into_iter()
                .filter_map(|m| {
                    rng.random_bool(0.5).then(|| {
                        (
                            m,
                            FieldElement::from_rational(
                                NumberField::Rationals,
                                rat_frac(rng.random_range(-9..=9), rng.random_range(1..=5)),
                            ),
                        )
                    })
                })
                .collect();
            if terms.is_empty() {
                continue;
            }
            let f = HomogeneousPoly::new(NumberField::Rationals, nvars, degree, terms).unwrap();
            if f.is_zero() {
                continue;
            }
            let back = parse_homogeneous(&format_homogeneous(&f), Some(nvars)).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn block_round_trip_with_surds() {
        let f = BlockPoly::from_surd_terms(
            vec![2, 2],
            vec![
                (vec![1, 0, 0, 1], QuadraticSurd::new(rat_i64(1), 2).unwrap()),
                (vec![0, 1, 1, 0], QuadraticSurd::new(rat_frac(-3, 2), 6).unwrap()),
            ],
        )
        .unwrap();
        let text = format_block(&f);
        let back = parse_block(&text, Some(vec![2, 2])).unwrap();
        assert_eq!(back, f);
        // rational block poly
        let g = BlockPoly::from_field_terms(
            vec![2, 2],
            vec![
                (vec![1, 0, 0, 1], FieldElement::from_i64(NumberField::Rationals, 1)),
                (vec![0, 1, 1, 0], FieldElement::from_i64(NumberField::Rationals, -1)),
            ],
            NumberField::Rationals,
        )
        .unwrap();
        let back = parse_block(&format_block(&g), None).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_homogeneous("", None).is_err());
        assert!(parse_homogeneous("2 * y0", None).is_err());
        assert!(parse_homogeneous("x0 + x1^2", None).is_err()); // inhomogeneous
        assert!(parse_homogeneous("1 * x5", Some(2)).is_err());
        assert!(parse_block("1 * u0_0 u1_0 + 1 * u0_0^2", None).is_err());
    }
}
