//! Brute-force references for the distribution of `phi^(m)`.
//!
//! [`enumerate_pi`] walks every digit prefix of a fixed length with an
//! unresolved tail. A prefix whose evaluation never looks past its last digit
//! contributes its exact Haar weight to the value it produces; otherwise its
//! weight is booked as unresolved. The result is a bracket
//! `mass[v] <= pi_m(v) <= mass[v] + unresolved` for every `v`.
//!
//! Unresolved prefixes can optionally be deepened: each is split into its
//! `p` one-digit extensions and re-evaluated, up to a fixed number of extra
//! digits. This only refines the bracket; whatever is still unresolved at the
//! bottom stays unresolved.
//!
//! [`sample_pi`] is the Monte Carlo counterpart on lazily sampled streams.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::digits::{DigitStream, OmegaSpec};
use crate::error::{Error, Result};
use crate::exact::{BigRational, SparsePoly};

/// Largest number of top-level prefixes an enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

/// Extra digits spent on unresolved prefixes unless told otherwise.
pub const DEFAULT_DEEPEN: u32 = 2;

/// Smallest `c` with `p^c >= m`; zero for `m <= 1`.
pub fn ceil_log(p: u32, m: u64) -> u32 {
    let mut c = 0;
    let mut power = 1u128;
    while power < u128::from(m) {
        power *= u128::from(p);
        c += 1;
    }
    c
}

/// Default prefix length `ceil(log_p m) + 6`.
pub fn default_depth(p: u32, m: u64) -> u32 {
    ceil_log(p, m) + 6
}

/// Prefix length plus the number of extra digits spent on unresolved prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Depth {
    pub prefix: u32,
    pub deepen: u32,
}

impl Depth {
    /// Plain enumeration: no deepening.
    pub fn strict(prefix: u32) -> Self {
        Self { prefix, deepen: 0 }
    }

    pub fn new(prefix: u32, deepen: u32) -> Self {
        Self { prefix, deepen }
    }
}

/// Exact lower bounds on a distribution plus the mass left undecided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bracketed<K: Ord> {
    mass: BTreeMap<K, BigRational>,
    unresolved: BigRational,
}

/// Bracketed law of `phi^(m)`.
pub type PiDistribution = Bracketed<i64>;

/// Bracketed joint law of a window `(phi(S^{±0} x), .., phi(S^{±(w-1)} x))`.
pub type WindowDistribution = Bracketed<Vec<i64>>;

impl<K: Ord + Clone> Bracketed<K> {
    /// Assembles a bracket from resolved masses and the undecided remainder.
    pub fn from_parts(mass: BTreeMap<K, BigRational>, unresolved: BigRational) -> Self {
        Self { mass, unresolved }
    }

    pub fn masses(&self) -> impl Iterator<Item = (&K, &BigRational)> {
        self.mass.iter()
    }

    pub fn mass(&self, key: &K) -> BigRational {
        self.mass
            .get(key)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn unresolved(&self) -> &BigRational {
        &self.unresolved
    }

    /// `[mass, mass + unresolved]`.
    pub fn bracket(&self, key: &K) -> (BigRational, BigRational) {
        let lo = self.mass(key);
        let hi = &lo + &self.unresolved;
        (lo, hi)
    }

    pub fn contains(&self, key: &K, value: &BigRational) -> bool {
        let (lo, hi) = self.bracket(key);
        lo <= *value && *value <= hi
    }

    /// Whether the bracket of `a` here and of `b` in `other` can hold the same value.
    pub fn overlaps(&self, a: &K, other: &Bracketed<K>, b: &K) -> bool {
        let (lo1, hi1) = self.bracket(a);
        let (lo2, hi2) = other.bracket(b);
        lo1 <= hi2 && lo2 <= hi1
    }

    /// First key whose brackets in `self` and `other` are disjoint.
    pub fn first_disagreement(&self, other: &Bracketed<K>) -> Option<K> {
        self.mass
            .keys()
            .chain(other.mass.keys())
            .find(|k| !self.overlaps(k, other, k))
            .cloned()
    }

    /// Resolved mass plus unresolved mass; always exactly one.
    pub fn total(&self) -> BigRational {
        self.mass
            .values()
            .fold(self.unresolved.clone(), |acc, m| acc + m)
    }

    pub fn unresolved_f64(&self) -> f64 {
        to_f64(&self.unresolved)
    }
}

impl PiDistribution {
    /// Checks `pi(lo + j) = pi(hi - j)` for every `j` up to bracket overlap,
    /// where `lo`, `hi` are the extreme values of `phi^(m)`. Returns the first
    /// offending `j`.
    pub fn palindrome_violation(&self, lo: i64, hi: i64) -> Option<i64> {
        (0..=hi - lo).find(|j| !self.overlaps(&(lo + j), self, &(hi - j)))
    }
}

pub(crate) fn to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

struct Tally<K> {
    counts: BTreeMap<K, u128>,
    unresolved: u128,
}

impl<K: Ord> Tally<K> {
    fn new() -> Self {
        Self {
            counts: BTreeMap::new(),
            unresolved: 0,
        }
    }

    fn merge(mut self, other: Tally<K>) -> Self {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.unresolved += other.unresolved;
        self
    }
}

/// Walks all `p^prefix` prefixes. `eval(n, modulus)` receives the prefix as
/// the integer `n < modulus` (digit 0 least significant) and returns `None`
/// when it needs digits beyond it.
pub fn enumerate_with<K, F>(p: u32, depth: Depth, eval: F) -> Result<Bracketed<K>>
where
    K: Ord + Send,
    F: Fn(u64, u64) -> Option<K> + Sync,
{
    let pw = u128::from(p);
    let top = pw.checked_pow(depth.prefix).unwrap_or(u128::MAX);
    if top > ENUMERATION_LIMIT {
        return Err(Error::Resource {
            what: "digit prefixes",
            needed: top,
            limit: ENUMERATION_LIMIT,
        });
    }
    let finest = pw
        .checked_pow(depth.prefix + depth.deepen)
        .unwrap_or(u128::MAX);
    if finest > u128::from(u64::MAX / 2) {
        return Err(Error::Resource {
            what: "deepened prefix modulus",
            needed: finest,
            limit: u128::from(u64::MAX / 2),
        });
    }
    let n_top = top as u64;
    let unit_top = pw.pow(depth.deepen);

    let visit = |mut tally: Tally<K>, n: u64| {
        settle(&eval, &mut tally, u64::from(p), n, n_top, depth.deepen);
        tally
    };

    let tally = (0..n_top)
        .into_par_iter()
        .fold(Tally::new, visit)
        .reduce(Tally::new, Tally::merge);

    let denom = BigInt::from(u128::from(n_top) * unit_top);
    let to_q = |c: u128| BigRational::new(BigInt::from(c), denom.clone());
    Ok(Bracketed {
        mass: tally
            .counts
            .into_iter()
            .map(|(k, c)| (k, to_q(c)))
            .collect(),
        unresolved: to_q(tally.unresolved),
    })
}

/// Books prefix `v` of modulus `modulus`, splitting it into one-digit
/// extensions while it is unresolved and `left` levels remain.
fn settle<K, F>(eval: &F, tally: &mut Tally<K>, p: u64, v: u64, modulus: u64, left: u32)
where
    K: Ord,
    F: Fn(u64, u64) -> Option<K>,
{
    let weight = u128::from(p).pow(left);
    match eval(v, modulus) {
        Some(key) => *tally.counts.entry(key).or_insert(0) += weight,
        None if left == 0 => tally.unresolved += weight,
        None => {
            for d in 0..p {
                settle(eval, tally, p, v + d * modulus, modulus * p, left - 1);
            }
        }
    }
}

/// `phi` on the low digits `w` of a prefix of modulus `modulus`.
#[inline]
pub(crate) fn phi_low(w: u64, modulus: u64, p: u64, omega: &[u32]) -> Option<u32> {
    if w == modulus - 1 {
        return None;
    }
    let mut w = w;
    loop {
        let d = w % p;
        if d != p - 1 {
            return Some(omega[d as usize]);
        }
        w /= p;
    }
}

/// Bracketed law of `phi^(m)` over all prefixes of length `depth.prefix`.
pub fn enumerate_pi_with(omega: &OmegaSpec, m: u64, depth: Depth) -> Result<PiDistribution> {
    let p = u64::from(omega.p());
    let table = omega.values();
    enumerate_with(omega.p(), depth, |n, modulus| {
        let mut sum = 0i64;
        let mut w = n;
        for _ in 0..m {
            sum += i64::from(phi_low(w, modulus, p, table)?);
            w += 1;
            if w == modulus {
                w = 0;
            }
        }
        Some(sum)
    })
}

/// Bracketed law of `phi^(m)` from the `p^k` prefixes of length `k`, with no
/// deepening.
pub fn enumerate_pi(omega: &OmegaSpec, m: u64, k: u32) -> Result<PiDistribution> {
    enumerate_pi_with(omega, m, Depth::strict(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Bracketed joint law of `(phi(S^{±j} x))_{j < w}`. With `flip`, every
/// entry `v` is reported as `zeta - v` where `zeta` is the maximum of omega.
pub fn window_distribution(
    omega: &OmegaSpec,
    w: usize,
    direction: Direction,
    flip: bool,
    depth: Depth,
) -> Result<WindowDistribution> {
    if w == 0 {
        return Err(Error::Domain("window length must be positive".into()));
    }
    if w as u64 > u64::from(depth.prefix) {
        return Err(Error::Domain(format!(
            "window length {w} exceeds the prefix length {}",
            depth.prefix
        )));
    }
    let p = u64::from(omega.p());
    let zeta = i64::from(omega.stats().zeta);
    let table = omega.values();
    enumerate_with(omega.p(), depth, |n, modulus| {
        let mut out = Vec::with_capacity(w);
        for j in 0..w as u64 {
            let at = match direction {
                Direction::Forward => (n + j) % modulus,
                // S^{-j} x: add p^L - j on the L-digit truncation
                Direction::Backward => (n + (modulus - j % modulus)) % modulus,
            };
            let v = i64::from(phi_low(at, modulus, p, table)?);
            out.push(if flip { zeta - v } else { v });
        }
        Some(out)
    })
}

/// Empirical law of `phi^(m)` from seeded samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Empirical {
    pub n: u64,
    pub seed: u64,
    pub counts: BTreeMap<i64, u64>,
}

/// One bin of a Monte Carlo comparison.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BinCheck {
    pub value: i64,
    pub observed: f64,
    pub expected: f64,
    pub sigma: f64,
    pub ok: bool,
}

impl Empirical {
    pub fn frequency(&self, value: i64) -> f64 {
        self.counts.get(&value).copied().unwrap_or(0) as f64 / self.n as f64
    }

    /// Compares every bin with the coefficients of `exact`, accepting
    /// `|freq - q| <= sigmas * sqrt(q(1-q)/n)`.
    pub fn compare(&self, exact: &SparsePoly, sigmas: f64) -> Vec<BinCheck> {
        let mut values: Vec<i64> = exact.terms().map(|(e, _)| e).collect();
        values.extend(self.counts.keys().copied());
        values.sort_unstable();
        values.dedup();
        values
            .into_iter()
            .map(|value| {
                let expected = to_f64(&exact.coeff(value));
                let observed = self.frequency(value);
                let sigma = (expected * (1.0 - expected) / self.n as f64).sqrt();
                BinCheck {
                    value,
                    observed,
                    expected,
                    sigma,
                    ok: (observed - expected).abs() <= sigmas * sigma,
                }
            })
            .collect()
    }
}

impl Empirical {
    /// Like [`Empirical::compare`] against a bracketed law: a bin passes when
    /// its frequency is within `sigmas` standard errors of the bracket
    /// `[lo, hi]`. `expected` reports the bracket midpoint.
    pub fn compare_bracket(&self, exact: &PiDistribution, sigmas: f64) -> Vec<BinCheck> {
        let mut values: Vec<i64> = exact.masses().map(|(v, _)| *v).collect();
        values.extend(self.counts.keys().copied());
        values.sort_unstable();
        values.dedup();
        let n = self.n as f64;
        values
            .into_iter()
            .map(|value| {
                let (lo, hi) = bracket_f64(&exact.bracket(&value));
                let observed = self.frequency(value);
                let sigma = (lo.max(hi.min(0.5)) * (1.0 - lo.max(hi.min(0.5))) / n).sqrt();
                BinCheck {
                    value,
                    observed,
                    expected: (lo + hi) / 2.0,
                    sigma,
                    ok: observed >= lo - sigmas * sigma && observed <= hi + sigmas * sigma,
                }
            })
            .collect()
    }
}

/// `n` i.i.d. samples of `phi^(m)`; sample `i` reads digit stream `i` of `seed`.
pub fn sample_pi(omega: &OmegaSpec, m: u64, n: u64, seed: u64) -> Result<Empirical> {
    if n == 0 {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    let p = omega.p();
    let counts = (0..n)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<i64, u64>, i| {
            let x = DigitStream::sampled(p, seed, i).expect("base validated by OmegaSpec");
            let v = x.phi_m(m, omega).expect("sampled tails always resolve") as i64;
            *acc.entry(v).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        });
    Ok(Empirical { n, seed, counts })
}

/// Exact lower/upper bound pair as `f64`, for reports.
pub fn bracket_f64(b: &(BigRational, BigRational)) -> (f64, f64) {
    (to_f64(&b.0), to_f64(&b.1))
}
