//! Substitution sequences describing the degree increments `S_j` and the
//! lower-degree increments `s_j` of `P_m^p`, and the degree formulas built
//! on them.
//!
//! Upper rule: `q` becomes `p-2, p-3, .., 0` with `q` written twice, and the
//! sequence grows from `p - 2`. Lower rule: `q` becomes `0, 1, .., p-2` with
//! `q` written twice, grown from `0`. Both sequences are fixed points of their
//! rule, so element `pm + r` is element `r` of the block substituted for
//! element `m`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{check_base, Error, Result};
use crate::exact::{ratio, BigRational};
use crate::family::triangle;

/// Largest tier length [`tier`] will materialize.
pub const TIER_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    /// Degree increments, grown from `p - 2`.
    Upper,
    /// Lower-degree increments, grown from `0`.
    Lower,
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Kind::Upper),
            "lower" => Ok(Kind::Lower),
            other => Err(Error::Parse(format!("unknown sequence kind {other:?}"))),
        }
    }
}

/// The block of length `p` that replaces symbol `q`.
pub fn substitution_block(p: u32, kind: Kind, q: u8) -> Vec<u8> {
    let (p, q) = (p as i64, i64::from(q));
    debug_assert!((0..=p - 2).contains(&q));
    (0..p)
        .map(|i| match kind {
            Kind::Upper if i <= p - 2 - q => p - 2 - i,
            Kind::Upper => p - 1 - i,
            Kind::Lower if i <= q => i,
            Kind::Lower => i - 1,
        } as u8)
        .collect()
}

fn seed(p: u32, kind: Kind) -> u8 {
    match kind {
        Kind::Upper => (p - 2) as u8,
        Kind::Lower => 0,
    }
}

fn substitute_all(p: u32, kind: Kind, seq: &[u8]) -> Vec<u8> {
    seq.iter()
        .flat_map(|&q| substitution_block(p, kind, q))
        .collect()
}

/// Tier `l` of the sequence: `p^(l+1)` symbols obtained by applying the rule
/// `l + 1` times to the seed. Tier `l` is a prefix of tier `l + 1`.
pub fn tier(p: u32, kind: Kind, l: u32) -> Result<Vec<u8>> {
    check_base(p)?;
    let needed = u128::from(p).checked_pow(l + 1).unwrap_or(u128::MAX);
    if needed > TIER_LIMIT {
        return Err(Error::Resource {
            what: "substitution tier length",
            needed,
            limit: TIER_LIMIT,
        });
    }
    let mut seq = vec![seed(p, kind)];
    for _ in 0..=l {
        seq = substitute_all(p, kind, &seq);
    }
    Ok(seq)
}

/// Tier `l` of the degree-increment sequence.
pub fn upper_tier(p: u32, l: u32) -> Result<Vec<u8>> {
    tier(p, Kind::Upper, l)
}

/// One of the two substitution sequences for a fixed `p`, backed by its
/// first tier (`p^2` symbols, every substitution block appears there).
#[derive(Debug, Clone)]
pub struct SubstitutionSystem {
    p: u32,
    kind: Kind,
    tier1: Vec<u8>,
}

impl SubstitutionSystem {
    pub fn new(p: u32, kind: Kind) -> Result<Self> {
        let tier1 = tier(p, kind, 1)?;
        Ok(Self { p, kind, tier1 })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn tier1(&self) -> &[u8] {
        &self.tier1
    }

    /// Index of the tier-1 block that is the substitution of `q`.
    #[inline]
    fn block_of(&self, q: u8) -> usize {
        match self.kind {
            Kind::Upper => self.p as usize - 1 - q as usize,
            Kind::Lower => q as usize + 1,
        }
    }

    /// Element `j`, by the characteristic recursion
    /// `X_{pm+r} = X_{p b(X_m) + r}` down to the first tier.
    pub fn get(&self, j: u64) -> u8 {
        let p = u64::from(self.p);
        if j < p * p {
            return self.tier1[j as usize];
        }
        let inner = self.get(j / p);
        self.tier1[self.block_of(inner) * self.p as usize + (j % p) as usize]
    }

    /// Element `j`, by applying the substitution rule along the base-`p`
    /// digits of `j`. Independent of the first-tier table.
    pub fn get_by_rule(&self, j: u64) -> u8 {
        let p = u64::from(self.p);
        if j == 0 {
            return seed(self.p, self.kind);
        }
        let parent = self.get_by_rule(j / p);
        substitution_block(self.p, self.kind, parent)[(j % p) as usize]
    }

    /// The first `count` elements.
    pub fn prefix(&self, count: usize) -> Vec<u8> {
        let p = self.p as usize;
        let mut out = Vec::with_capacity(count);
        for j in 0..count {
            let v = if j < p * p {
                self.tier1[j]
            } else {
                self.tier1[self.block_of(out[j / p]) * p + j % p]
            };
            out.push(v);
        }
        out
    }

    /// Running sums `X_0 + .. + X_{m-1}` for `m = 0..=count`.
    pub fn prefix_sums(&self, count: usize) -> Vec<u64> {
        let mut sums = Vec::with_capacity(count + 1);
        let mut acc = 0u64;
        sums.push(0);
        for v in self.prefix(count) {
            acc += u64::from(v);
            sums.push(acc);
        }
        sums
    }
}

type SystemKey = (u32, Kind);

fn shared(p: u32, kind: Kind) -> Result<Arc<SubstitutionSystem>> {
    static SYSTEMS: OnceLock<RwLock<HashMap<SystemKey, Arc<SubstitutionSystem>>>> = OnceLock::new();
    let reg = SYSTEMS.get_or_init(Default::default);
    if let Some(s) = reg.read().expect("lock poisoned").get(&(p, kind)) {
        return Ok(Arc::clone(s));
    }
    let sys = Arc::new(SubstitutionSystem::new(p, kind)?);
    let mut w = reg.write().expect("lock poisoned");
    Ok(Arc::clone(w.entry((p, kind)).or_insert(sys)))
}

/// `S_j`, the increment `deg P_{j+1} - deg P_j`.
pub fn s_hat(p: u32, j: u64) -> Result<u8> {
    Ok(shared(p, Kind::Upper)?.get(j))
}

/// `s_j`, the increment of the lower degree, from its own substitution rule.
pub fn s_low(p: u32, j: u64) -> Result<u8> {
    Ok(shared(p, Kind::Lower)?.get(j))
}

/// `s_j` through the complement law `s_j = p - 2 - S_j`.
pub fn s_low_by_complement(p: u32, j: u64) -> Result<u8> {
    Ok((p - 2) as u8 - s_hat(p, j)?)
}

/// `deg P_m^p` as the sum of the first `m` upper increments.
pub fn degree(p: u32, m: u64) -> Result<u64> {
    let sys = shared(p, Kind::Upper)?;
    Ok((0..m).map(|j| u64::from(sys.get(j))).sum())
}

/// Lower degree of `P_m^p` as the sum of the first `m` lower increments.
pub fn lower_degree(p: u32, m: u64) -> Result<u64> {
    let sys = shared(p, Kind::Lower)?;
    Ok((0..m).map(|j| u64::from(sys.get(j))).sum())
}

/// `(deg + lowdeg) / 2`.
pub fn mid_degree(p: u32, m: u64) -> Result<BigRational> {
    let sum = degree(p, m)? + lower_degree(p, m)?;
    Ok(ratio(sum as i64, 2))
}

/// `deg P_m^p` from the degree recursion
/// `D_{pm} = m T(p-2) + D_m`,
/// `D_{pm+k} = m T(p-2) + (p-k)(k-1) + T(k-2) + D_m + max(p-k-1, D_{m+1} - D_m)`.
pub fn degree_recursive(p: u32, m: u64) -> Result<u64> {
    check_base(p)?;
    let mut memo = HashMap::new();
    Ok(degree_rec(p, m, Kind::Upper, &mut memo) as u64)
}

/// Lower degree from
/// `d_{pm} = m T(p-2) + d_m`,
/// `d_{pm+k} = m T(p-2) + T(k-2) + d_m + min(k-1, d_{m+1} - d_m)`.
pub fn lower_degree_recursive(p: u32, m: u64) -> Result<u64> {
    check_base(p)?;
    let mut memo = HashMap::new();
    Ok(degree_rec(p, m, Kind::Lower, &mut memo) as u64)
}

fn degree_rec(p: u32, m: u64, kind: Kind, memo: &mut HashMap<u64, i64>) -> i64 {
    let pi = i64::from(p);
    match m {
        0 => return 0,
        1 => {
            return match kind {
                Kind::Upper => pi - 2,
                Kind::Lower => 0,
            }
        }
        _ => {}
    }
    if let Some(&v) = memo.get(&m) {
        return v;
    }
    let tri = |n: i64| triangle(n).expect("n >= -1");
    let (q, k) = (m / u64::from(p), (m % u64::from(p)) as i64);
    let base = q as i64 * tri(pi - 2);
    let at_q = degree_rec(p, q, kind, memo);
    let value = if k == 0 {
        base + at_q
    } else {
        let step = degree_rec(p, q + 1, kind, memo) - at_q;
        match kind {
            Kind::Upper => base + (pi - k) * (k - 1) + tri(k - 2) + at_q + (pi - k - 1).max(step),
            Kind::Lower => base + tri(k - 2) + at_q + (k - 1).min(step),
        }
    };
    memo.insert(m, value);
    value
}
