//! Base-`p` digit streams, the shift and adding maps, and the "first digit
//! other than `p - 1`" functionals generated by an [`OmegaSpec`].
//!
//! Digits are stored least-significant first. A stream is a finite explicit
//! prefix followed by a [`Tail`]: either lazily sampled i.i.d. uniform digits
//! or an unresolved tail that reports [`Unresolved`] when consulted.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_base, Error, Result, Unresolved};

/// Largest supported base; digits are stored as bytes.
pub const MAX_BASE: u32 = 255;

/// The generator `omega: {0, .., p-2} -> Z>=0` of a Chacon-like functional.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OmegaSpec {
    p: u32,
    values: Vec<u32>,
}

/// Extremes of a functional: `zeta = max`, `phi_star = min`, `delta` their gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionalStats {
    pub zeta: u32,
    pub phi_star: u32,
    pub delta: u32,
}

impl OmegaSpec {
    pub fn new(p: u32, values: Vec<u32>) -> Result<Self> {
        check_base(p)?;
        if p > MAX_BASE {
            return Err(Error::Domain(format!("base {p} exceeds {MAX_BASE}")));
        }
        if values.len() != (p - 1) as usize {
            return Err(Error::OmegaLength {
                p,
                expected: (p - 1) as usize,
                got: values.len(),
            });
        }
        Ok(Self { p, values })
    }

    /// `omega(j) = j`, the classic functional.
    pub fn classic(p: u32) -> Result<Self> {
        Self::new(p, (0..p.saturating_sub(1)).collect())
    }

    /// `omega(j) = 1` for `j = p - 2` and `0` otherwise: a single spacer over
    /// column `p - 2`. Coincides with [`OmegaSpec::classic`] at `p = 3`.
    pub fn spacer(p: u32) -> Result<Self> {
        check_base(p)?;
        let mut values = vec![0; (p - 1) as usize];
        values[(p - 2) as usize] = 1;
        Self::new(p, values)
    }

    /// `omega(j) = ((j + 1 | p) + 1) / 2` for an odd prime `p`, built from the
    /// Legendre symbol.
    pub fn legendre(p: u32) -> Result<Self> {
        check_base(p)?;
        if p % 2 == 0 || !(2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
            return Err(Error::Domain(format!("{p} is not an odd prime")));
        }
        let values = (1..p)
            .map(|a| {
                let euler = mod_pow(a as u64, ((p - 1) / 2) as u64, p as u64);
                u32::from(euler == 1)
            })
            .collect();
        Self::new(p, values)
    }

    /// Parses a comma-separated table such as `"1,1,0,1,0,0"`.
    pub fn parse(p: u32, text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::Parse(format!("omega entry {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(p, values)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    #[inline]
    pub fn value(&self, digit: u32) -> u32 {
        self.values[digit as usize]
    }

    pub fn is_classic(&self) -> bool {
        self.values
            .iter()
            .enumerate()
            .all(|(j, &v)| v as usize == j)
    }

    pub fn stats(&self) -> FunctionalStats {
        let zeta = *self
            .values
            .iter()
            .max()
            .expect("p >= 3 gives a nonempty table");
        let phi_star = *self
            .values
            .iter()
            .min()
            .expect("p >= 3 gives a nonempty table");
        FunctionalStats {
            zeta,
            phi_star,
            delta: zeta - phi_star,
        }
    }

    /// `Some(zeta)` when the range of omega is exactly `[0, zeta]` and
    /// `omega(j) = zeta - omega(p - 2 - j)` for every `j`.
    pub fn antipalindromic_check(&self) -> Option<u32> {
        let zeta = self.stats().zeta;
        let mut seen = vec![false; zeta as usize + 1];
        for &v in &self.values {
            seen[v as usize] = true;
        }
        if !seen.iter().all(|&s| s) {
            return None;
        }
        let n = self.values.len();
        let reflected = (0..n).all(|j| self.values[j] + self.values[n - 1 - j] == zeta);
        reflected.then_some(zeta)
    }

    /// The table `a * omega(j) + b`. Requires an antipalindromic input.
    pub fn affine(&self, a: u32, b: u32) -> Result<Self> {
        if a == 0 {
            return Err(Error::Domain("affine scale a must be positive".into()));
        }
        if self.antipalindromic_check().is_none() {
            return Err(Error::Domain(format!(
                "affine_omega needs an antipalindromic table, got {:?}",
                self.values
            )));
        }
        Self::new(self.p, self.values.iter().map(|v| a * v + b).collect())
    }
}

impl fmt::Display for OmegaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

fn mod_pow(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1 % modulus;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// `omega(j) + omega(j+1) + .. + omega(j+k-1)` for the classic table, in
/// closed form `k*j + triangle(k-1)`. Requires `k > 0` and `j + k <= p - 1`.
pub fn omega_partial_sum(omega: &OmegaSpec, j: u32, k: u32) -> Result<u64> {
    if !omega.is_classic() {
        return Err(Error::Domain(
            "omega_partial_sum is defined for the classic table only".into(),
        ));
    }
    if k == 0 || j + k > omega.p() - 1 {
        return Err(Error::Domain(format!(
            "omega_partial_sum needs 0 < k and j + k <= p - 1 (j = {j}, k = {k}, p = {})",
            omega.p()
        )));
    }
    let (j, k) = (j as u64, k as u64);
    Ok(k * j + k * (k - 1) / 2)
}

/// Where digits past the explicit prefix come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tail {
    /// Consulting a digit past the prefix is an error.
    Unresolved,
    /// I.i.d. uniform digits, a pure function of `(seed, stream, offset + index)`.
    Sampled { seed: u64, stream: u64, offset: u64 },
}

/// A point of the p-adic group given by a digit prefix and a tail policy.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DigitStream {
    p: u32,
    prefix: Vec<u8>,
    tail: Tail,
}

/// Deterministic uniform digit for position `index` of sample stream `stream`.
///
/// Each digit owns one ChaCha block, so extending a prefix never perturbs the
/// digits already drawn.
pub fn sampled_digit(p: u32, seed: u64, stream: u64, index: u64) -> u8 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) * 16);
    rng.random_range(0..p) as u8
}

impl DigitStream {
    pub fn new(p: u32, prefix: Vec<u8>, tail: Tail) -> Result<Self> {
        check_base(p)?;
        if p > MAX_BASE {
            return Err(Error::Domain(format!("base {p} exceeds {MAX_BASE}")));
        }
        if let Some(&d) = prefix.iter().find(|&&d| u32::from(d) >= p) {
            return Err(Error::DigitOutOfRange { digit: d.into(), p });
        }
        Ok(Self { p, prefix, tail })
    }

    /// A finite prefix with an unresolved tail.
    pub fn finite(p: u32, prefix: Vec<u8>) -> Result<Self> {
        Self::new(p, prefix, Tail::Unresolved)
    }

    /// A Haar-random point: every digit sampled lazily.
    pub fn sampled(p: u32, seed: u64, stream: u64) -> Result<Self> {
        Self::new(
            p,
            Vec::new(),
            Tail::Sampled {
                seed,
                stream,
                offset: 0,
            },
        )
    }

    /// Parses the comma-separated least-significant-first text form, e.g. `"2,2,0"`.
    pub fn parse_prefix(p: u32, text: &str) -> Result<Self> {
        let text = text.trim();
        let prefix = if text.is_empty() {
            Vec::new()
        } else {
            text.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u8>()
                        .map_err(|e| Error::Parse(format!("digit {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Self::finite(p, prefix)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn prefix(&self) -> &[u8] {
        &self.prefix
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Digit at position `index`.
    pub fn digit(&self, index: usize) -> std::result::Result<u8, Unresolved> {
        if let Some(&d) = self.prefix.get(index) {
            return Ok(d);
        }
        match self.tail {
            Tail::Unresolved => Err(Unresolved { index }),
            Tail::Sampled {
                seed,
                stream,
                offset,
            } => Ok(sampled_digit(self.p, seed, stream, offset + index as u64)),
        }
    }

    /// Makes digits `0..len` explicit. Fails on an unresolved tail.
    fn materialize(&mut self, len: usize) -> std::result::Result<(), Unresolved> {
        while self.prefix.len() < len {
            let d = self.digit(self.prefix.len())?;
            self.prefix.push(d);
        }
        Ok(())
    }

    /// `sigma x`: drops the first digit.
    pub fn shift(&self) -> std::result::Result<DigitStream, Unresolved> {
        let mut out = self.clone();
        out.materialize(1)?;
        out.prefix.remove(0);
        if let Tail::Sampled { offset, .. } = &mut out.tail {
            *offset += 1;
        }
        Ok(out)
    }

    /// `S^j x = x + j` with carries propagating from digit 0 upwards.
    pub fn add(&self, j: u64) -> std::result::Result<DigitStream, Unresolved> {
        let mut out = self.clone();
        out.add_assign(j)?;
        Ok(out)
    }

    pub(crate) fn add_assign(&mut self, j: u64) -> std::result::Result<(), Unresolved> {
        let p = u64::from(self.p);
        let mut carry = j;
        let mut k = 0;
        while carry > 0 {
            self.materialize(k + 1)?;
            let total = u64::from(self.prefix[k]) + carry % p;
            self.prefix[k] = (total % p) as u8;
            carry = carry / p + total / p;
            k += 1;
        }
        Ok(())
    }

    /// `phi(x) = omega(first digit that is not p - 1)`.
    pub fn phi(&self, omega: &OmegaSpec) -> std::result::Result<u32, Unresolved> {
        debug_assert_eq!(self.p, omega.p());
        let top = self.p - 1;
        let mut k = 0;
        loop {
            let d = u32::from(self.digit(k)?);
            if d != top {
                return Ok(omega.value(d));
            }
            k += 1;
        }
    }

    fn phi_materializing(&mut self, omega: &OmegaSpec) -> std::result::Result<u32, Unresolved> {
        let top = self.p - 1;
        let mut k = 0;
        loop {
            self.materialize(k + 1)?;
            let d = u32::from(self.prefix[k]);
            if d != top {
                return Ok(omega.value(d));
            }
            k += 1;
        }
    }

    /// Whether two streams denote the same point: equal tails and equal
    /// digits over the longer of the two explicit prefixes.
    pub fn same_point(&self, other: &DigitStream) -> bool {
        if self.p != other.p || self.tail != other.tail {
            return false;
        }
        let len = self.prefix.len().max(other.prefix.len());
        (0..len).all(|k| self.digit(k).ok() == other.digit(k).ok())
    }

    /// Birkhoff sum `phi(x) + phi(Sx) + .. + phi(S^(m-1) x)`.
    pub fn phi_m(&self, m: u64, omega: &OmegaSpec) -> std::result::Result<u64, Unresolved> {
        debug_assert_eq!(self.p, omega.p());
        let mut y = self.clone();
        let mut sum = 0u64;
        for i in 0..m {
            sum += u64::from(y.phi_materializing(omega)?);
            if i + 1 < m {
                y.add_assign(1)?;
            }
        }
        Ok(sum)
    }
}

impl fmt::Display for DigitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.prefix.iter().map(u8::to_string).collect();
        f.write_str(&parts.join(","))?;
        match self.tail {
            Tail::Unresolved => Ok(()),
            Tail::Sampled { .. } => f.write_str(",..."),
        }
    }
}
