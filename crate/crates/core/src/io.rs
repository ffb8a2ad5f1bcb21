//! Text encodings for polynomials and bracketed distributions.
//!
//! Every number is written as a decimal string so that arbitrarily large
//! numerators survive JSON round trips.
//!
//! * polynomial JSON: `{"exp_scale": 1, "coeffs": [["exp", "num", "den"], ..]}`
//!   where the true exponent is `exp / exp_scale` (`2` for symmetric forms);
//! * polynomial CSV: one `exponent,numerator,denominator` row per term, no header;
//! * distribution JSON: `{"mass": [["value", "num", "den"], ..], "unresolved": ["num", "den"]}`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{BigRational, SparsePoly};
use crate::oracle::PiDistribution;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub exp_scale: u8,
    pub coeffs: Vec<[String; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionJson {
    pub mass: Vec<[String; 3]>,
    pub unresolved: [String; 2],
}

fn row(key: i64, q: &BigRational) -> [String; 3] {
    [
        key.to_string(),
        q.numer().to_string(),
        q.denom().to_string(),
    ]
}

fn parse_rational(num: &str, den: &str) -> Result<BigRational> {
    let n: BigInt = num
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator {num:?}")))?;
    let d: BigInt = den
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator {den:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse("zero denominator".into()));
    }
    Ok(BigRational::new(n, d))
}

fn parse_key(text: &str) -> Result<i64> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad exponent {text:?}")))
}

pub fn poly_to_json_value(poly: &SparsePoly, exp_scale: u8) -> PolyJson {
    PolyJson {
        exp_scale,
        coeffs: poly.terms().map(|(e, c)| row(e, c)).collect(),
    }
}

pub fn poly_to_json(poly: &SparsePoly, exp_scale: u8) -> Result<String> {
    Ok(serde_json::to_string(&poly_to_json_value(poly, exp_scale))?)
}

/// Decodes polynomial JSON; returns the stored exponents and the scale.
pub fn poly_from_json(text: &str) -> Result<(SparsePoly, u8)> {
    let raw: PolyJson = serde_json::from_str(text)?;
    if !matches!(raw.exp_scale, 1 | 2) {
        return Err(Error::Parse(format!(
            "exp_scale must be 1 or 2, got {}",
            raw.exp_scale
        )));
    }
    let terms = raw
        .coeffs
        .iter()
        .map(|[e, n, d]| Ok((parse_key(e)?, parse_rational(n, d)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((SparsePoly::from_terms(terms), raw.exp_scale))
}

pub fn poly_to_csv(poly: &SparsePoly) -> String {
    poly.terms()
        .map(|(e, c)| format!("{e},{},{}\n", c.numer(), c.denom()))
        .collect()
}

pub fn poly_from_csv(text: &str) -> Result<SparsePoly> {
    let terms = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            match fields.as_slice() {
                [e, n, d] => Ok((parse_key(e)?, parse_rational(n, d)?)),
                _ => Err(Error::Parse(format!("expected 3 fields in {line:?}"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparsePoly::from_terms(terms))
}

pub fn distribution_to_json_value(dist: &PiDistribution) -> DistributionJson {
    let u = dist.unresolved();
    DistributionJson {
        mass: dist.masses().map(|(v, q)| row(*v, q)).collect(),
        unresolved: [u.numer().to_string(), u.denom().to_string()],
    }
}

pub fn distribution_to_json(dist: &PiDistribution) -> Result<String> {
    Ok(serde_json::to_string(&distribution_to_json_value(dist))?)
}

pub fn distribution_from_json(text: &str) -> Result<PiDistribution> {
    let raw: DistributionJson = serde_json::from_str(text)?;
    let mut mass = BTreeMap::new();
    for [v, n, d] in &raw.mass {
        if mass.insert(parse_key(v)?, parse_rational(n, d)?).is_some() {
            return Err(Error::Parse(format!("value {v} listed twice")));
        }
    }
    let unresolved = parse_rational(&raw.unresolved[0], &raw.unresolved[1])?;
    Ok(PiDistribution::from_parts(mass, unresolved))
}
