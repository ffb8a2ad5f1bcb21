//! Finite-level towers over the p-adic odometer.
//!
//! Level `n` is `X_n = {(x, i) : 0 <= i <= h_n - 1 + phi(x)}` with
//! `h_0 = 1`, `h_n = p h_{n-1} + 1`. `T_n` climbs a column and wraps to
//! `(Sx, 0)` at its top; `psi_n(x, i) = (sigma x, x_0 h_n + i + [x_0 = p-1])`
//! maps level `n` into level `n + 1`.
//!
//! With these heights and this `psi_n`, conjugacy `psi_n T_n = T_{n+1} psi_n`
//! holds exactly when omega is the single-spacer table `[0, .., 0, 1]`
//! ([`OmegaSpec::spacer`]), which is the classic table at `p = 3`. The
//! simulator accepts any table so that other choices can be checked.

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::digits::{DigitStream, OmegaSpec};
use crate::error::{check_base, Error, Result};
use crate::exact::{ratio, BigRational};
use crate::oracle::{enumerate_with, phi_low, Depth};

/// Separates point-height draws from digit draws sharing a seed.
const HEIGHT_STREAM_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// `h_n` by the recurrence `h_0 = 1`, `h_n = p h_{n-1} + 1`.
pub fn heights(p: u32, n: u32) -> Result<u64> {
    check_base(p)?;
    let mut h = 1u64;
    for _ in 0..n {
        h = h
            .checked_mul(u64::from(p))
            .and_then(|v| v.checked_add(1))
            .ok_or_else(|| Error::Domain(format!("h_{n} overflows u64 for p = {p}")))?;
    }
    Ok(h)
}

/// `h_0 ..= h_n` for a fixed `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightTable {
    p: u32,
    h: Vec<u64>,
}

impl HeightTable {
    pub fn new(p: u32, n_max: u32) -> Result<Self> {
        heights(p, n_max)?;
        let mut h = vec![1u64];
        for _ in 0..n_max {
            let last = *h.last().expect("nonempty");
            h.push(last * u64::from(p) + 1);
        }
        Ok(Self { p, h })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn get(&self, n: u32) -> u64 {
        self.h[n as usize]
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.h
    }
}

/// Which conjugating map to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiVariant {
    /// `(sigma x, x_0 h_n + i + [x_0 = p-1])`.
    #[default]
    Printed,
    /// The same map without the indicator term; a negative control.
    WithoutIndicator,
}

/// Normalizing constant of `mu_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalizer {
    /// `h_n + E[phi]`, which makes `mu_n` a probability measure for any omega.
    #[default]
    MeanHeight,
    /// The constant `h_n + 1/2`.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerPoint {
    pub n: u32,
    pub x: DigitStream,
    pub i: u64,
}

impl TowerPoint {
    pub fn same_point(&self, other: &TowerPoint) -> bool {
        self.n == other.n && self.i == other.i && self.x.same_point(&other.x)
    }
}

/// The family of tower systems `(X_n, T_n)` for one omega table.
#[derive(Debug, Clone)]
pub struct Odometer {
    omega: OmegaSpec,
    psi: PsiVariant,
}

impl Odometer {
    pub fn new(omega: OmegaSpec) -> Self {
        Self {
            omega,
            psi: PsiVariant::Printed,
        }
    }

    /// The single-spacer system for base `p`.
    pub fn spacer(p: u32) -> Result<Self> {
        Ok(Self::new(OmegaSpec::spacer(p)?))
    }

    pub fn with_psi(mut self, psi: PsiVariant) -> Self {
        self.psi = psi;
        self
    }

    pub fn p(&self) -> u32 {
        self.omega.p()
    }

    pub fn omega(&self) -> &OmegaSpec {
        &self.omega
    }

    pub fn height(&self, n: u32) -> Result<u64> {
        heights(self.p(), n)
    }

    /// `h_n - 1 + phi(x)`, the top level of the column over `x`.
    pub fn top(&self, n: u32, x: &DigitStream) -> Result<u64> {
        Ok(self.height(n)? - 1 + u64::from(x.phi(&self.omega)?))
    }

    pub fn is_valid(&self, pt: &TowerPoint) -> Result<bool> {
        Ok(pt.i <= self.top(pt.n, &pt.x)?)
    }

    /// `T_n`.
    pub fn step(&self, pt: &TowerPoint) -> Result<TowerPoint> {
        let top = self.top(pt.n, &pt.x)?;
        if pt.i < top {
            Ok(TowerPoint {
                n: pt.n,
                x: pt.x.clone(),
                i: pt.i + 1,
            })
        } else if pt.i == top {
            Ok(TowerPoint {
                n: pt.n,
                x: pt.x.add(1)?,
                i: 0,
            })
        } else {
            Err(Error::Domain(format!(
                "height {} is above the column top {top}",
                pt.i
            )))
        }
    }

    /// `psi_n`, landing on level `n + 1`.
    pub fn psi(&self, pt: &TowerPoint) -> Result<TowerPoint> {
        let h = self.height(pt.n)?;
        let x0 = u64::from(pt.x.digit(0)?);
        let top_digit = u64::from(self.p() - 1);
        let bump = match self.psi {
            PsiVariant::Printed => u64::from(x0 == top_digit),
            PsiVariant::WithoutIndicator => 0,
        };
        Ok(TowerPoint {
            n: pt.n + 1,
            x: pt.x.shift()?,
            i: x0 * h + pt.i + bump,
        })
    }

    /// Random valid point of level `n`: `x` Haar-random, then `i` uniform on
    /// its column. Not `mu_n`-distributed when column heights differ.
    pub fn sample_point(&self, n: u32, seed: u64, index: u64) -> Result<TowerPoint> {
        let x = DigitStream::sampled(self.p(), seed, index)?;
        let top = self.top(n, &x)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ HEIGHT_STREAM_SALT);
        rng.set_stream(index);
        Ok(TowerPoint {
            n,
            x,
            i: rng.random_range(0..=top),
        })
    }

    /// Tests `psi_n(T_n(pt)) = T_{n+1}(psi_n(pt))` on `samples` random points.
    pub fn check_conjugacy(&self, n: u32, samples: u64, seed: u64) -> Result<ConjugacyReport> {
        let mut failures = Vec::new();
        for s in 0..samples {
            let pt = self.sample_point(n, seed, s)?;
            let lhs = self.psi(&self.step(&pt)?)?;
            let image = self.psi(&pt)?;
            let rhs = if self.is_valid(&image)? {
                Some(self.step(&image)?)
            } else {
                None
            };
            if rhs.as_ref().map_or(true, |r| !r.same_point(&lhs)) {
                failures.push(Witness {
                    x: prefix_text(&pt.x),
                    i: pt.i,
                    psi_of_step: (prefix_text(&lhs.x), lhs.i),
                    step_of_psi: rhs.map(|r| (prefix_text(&r.x), r.i)),
                });
            }
        }
        Ok(ConjugacyReport {
            p: self.p(),
            n,
            checked: samples,
            failures,
        })
    }

    /// Checks that `psi_n` sends level `i < h_n` to level `x_0 h_n + i` for
    /// `x_0 <= p-2` and to `(p-1) h_n + i + 1` for `x_0 = p-1`. Returns the
    /// witnesses that land elsewhere and how many images hit each column.
    pub fn check_tower_decomposition(
        &self,
        n: u32,
        samples: u64,
        seed: u64,
    ) -> Result<TowerReport> {
        let h = self.height(n)?;
        let p = u64::from(self.p());
        let mut column_hits = vec![0u64; p as usize];
        let mut failures = Vec::new();
        for s in 0..samples {
            let mut pt = self.sample_point(n, seed, s)?;
            pt.i %= h;
            let image = self.psi(&pt)?;
            let allowed: Vec<u64> = (0..p)
                .map(|c| {
                    if c < p - 1 {
                        c * h + pt.i
                    } else {
                        c * h + pt.i + 1
                    }
                })
                .collect();
            match allowed.iter().position(|&lvl| lvl == image.i) {
                Some(c) if self.is_valid(&image)? => column_hits[c] += 1,
                _ => failures.push(Witness {
                    x: prefix_text(&pt.x),
                    i: pt.i,
                    psi_of_step: (prefix_text(&image.x), image.i),
                    step_of_psi: None,
                }),
            }
        }
        Ok(TowerReport {
            p: self.p(),
            n,
            checked: samples,
            column_hits,
            failures,
        })
    }

    /// `E[phi]` under Haar measure, exactly.
    pub fn mean_phi(&self) -> BigRational {
        let total: u64 = self.omega.values().iter().map(|&v| u64::from(v)).sum();
        ratio(total as i64, i64::from(self.p()) - 1)
    }

    pub fn normalizer(&self, n: u32, kind: Normalizer) -> Result<BigRational> {
        let h = BigRational::from_integer(BigInt::from(self.height(n)?));
        Ok(match kind {
            Normalizer::MeanHeight => h + self.mean_phi(),
            Normalizer::Printed => h + ratio(1, 2),
        })
    }

    /// Bracket on `mu_n(E_{n,i})` from the `p^k` digit prefixes of length `k`.
    /// Levels `i >= h_n` exist only over columns with `phi(x) > i - h_n`.
    pub fn measure_of_level(
        &self,
        n: u32,
        i: u64,
        k: u32,
        normalizer: Normalizer,
    ) -> Result<(BigRational, BigRational)> {
        let z = self.normalizer(n, normalizer)?;
        let h = self.height(n)?;
        if i < h {
            let full = BigRational::one() / &z;
            return Ok((full.clone(), full));
        }
        let need = i - h + 1;
        let p = u64::from(self.p());
        let table = self.omega.values();
        let law = enumerate_with(self.p(), Depth::strict(k), |w, modulus| {
            phi_low(w, modulus, p, table).map(|phi| u64::from(phi) >= need)
        })?;
        let (lo, hi) = law.bracket(&true);
        Ok((lo / &z, hi / &z))
    }

    /// Runs `T_n` for `steps` steps from a random point and counts visits to
    /// the base level `E_{n,0}`.
    pub fn base_visits(&self, n: u32, steps: u64, seed: u64) -> Result<u64> {
        let mut pt = self.sample_point(n, seed, 0)?;
        let mut visits = 0;
        for _ in 0..steps {
            if pt.i == 0 {
                visits += 1;
            }
            pt = self.step(&pt)?;
        }
        Ok(visits)
    }

    /// Number of levels `i` carrying the full Haar mass of the base, read off
    /// the level measures. Matches `h_n` whenever omega takes the value 0.
    pub fn full_level_count(&self, n: u32, k: u32) -> Result<u64> {
        let full = BigRational::one() / self.normalizer(n, Normalizer::MeanHeight)?;
        let mut i = 0;
        loop {
            let (lo, _) = self.measure_of_level(n, i, k, Normalizer::MeanHeight)?;
            if lo != full {
                return Ok(i);
            }
            i += 1;
        }
    }
}

/// The first eight digits, `?` where unresolved.
fn prefix_text(x: &DigitStream) -> String {
    (0..8)
        .map(|k| {
            x.digit(k)
                .map_or_else(|_| "?".to_string(), |d| d.to_string())
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// A point on which a check failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Leading digits of the base point.
    pub x: String,
    pub i: u64,
    pub psi_of_step: (String, u64),
    pub step_of_psi: Option<(String, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjugacyReport {
    pub p: u32,
    pub n: u32,
    pub checked: u64,
    pub failures: Vec<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TowerReport {
    pub p: u32,
    pub n: u32,
    pub checked: u64,
    pub column_hits: Vec<u64>,
    pub failures: Vec<Witness>,
}

/// Conjugacy check on the single-spacer system for base `p`.
pub fn check_conjugacy(p: u32, n: u32, samples: u64, seed: u64) -> Result<ConjugacyReport> {
    Odometer::spacer(p)?.check_conjugacy(n, samples, seed)
}

/// `mu_n(E_{n,i})` bracket on the single-spacer system.
pub fn measure_of_level(p: u32, n: u32, i: u64, k: u32) -> Result<(BigRational, BigRational)> {
    Odometer::spacer(p)?.measure_of_level(n, i, k, Normalizer::MeanHeight)
}

/// Bracket on `mu_n(X_n)`, the sum of the level brackets of level `n`.
pub fn level_mass_total(
    odo: &Odometer,
    n: u32,
    k: u32,
    normalizer: Normalizer,
) -> Result<(BigRational, BigRational)> {
    let h = odo.height(n)?;
    let zeta = u64::from(odo.omega().stats().zeta);
    let full = BigRational::from_integer(BigInt::from(h)) / odo.normalizer(n, normalizer)?;
    let (mut lo, mut hi) = (full.clone(), full);
    for i in h..h + zeta {
        let (a, b) = odo.measure_of_level(n, i, k, normalizer)?;
        lo += a;
        hi += b;
    }
    Ok((lo, hi))
}

/// `true` when the level brackets of level `n` sum to a bracket containing 1.
pub fn level_measures_cover_one(odo: &Odometer, n: u32, k: u32) -> Result<bool> {
    let (lo, hi) = level_mass_total(odo, n, k, Normalizer::MeanHeight)?;
    Ok(lo <= BigRational::one() && BigRational::one() <= hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(p: u32, n: u32, digits: &[u8], i: u64) -> TowerPoint {
        TowerPoint {
            n,
            x: DigitStream::finite(p, digits.to_vec()).unwrap(),
            i,
        }
    }

    #[test]
    fn height_values() {
        assert_eq!(heights(3, 0).unwrap(), 1);
        assert_eq!(heights(3, 2).unwrap(), 13);
        assert_eq!(heights(5, 1).unwrap(), 6);
        let table = HeightTable::new(7, 6).unwrap();
        for n in 0..=6 {
            assert_eq!(table.get(n), heights(7, n).unwrap());
            // closed form (p^(n+1) - 1) / (p - 1)
            assert_eq!(table.get(n), (7u64.pow(n + 1) - 1) / 6);
        }
        assert!(table.as_slice().windows(2).all(|w| w[0] < w[1]));
        assert!(heights(3, 60).is_err());
    }

    #[test]
    fn step_examples() {
        let odo = Odometer::spacer(3).unwrap();
        let next = odo.step(&point(3, 0, &[0, 0], 0)).unwrap();
        assert_eq!((next.x.prefix(), next.i), (&[1u8, 0][..], 0));
        let next = odo.step(&point(3, 0, &[1, 0], 0)).unwrap();
        assert_eq!((next.x.prefix(), next.i), (&[1u8, 0][..], 1));
        let next = odo.step(&point(3, 1, &[0, 0], 2)).unwrap();
        assert_eq!((next.x.prefix(), next.i), (&[0u8, 0][..], 3));
        assert!(odo.step(&point(3, 0, &[0], 1)).is_err());
    }

    #[test]
    fn psi_examples() {
        let odo = Odometer::spacer(3).unwrap();
        let img = odo.psi(&point(3, 0, &[1, 0], 0)).unwrap();
        assert_eq!((img.n, img.x.prefix(), img.i), (1, &[0u8][..], 1));
        let img = odo.psi(&point(3, 0, &[2, 0], 0)).unwrap();
        assert_eq!((img.n, img.x.prefix(), img.i), (1, &[0u8][..], 3));
    }

    #[test]
    fn conjugacy_holds_on_spacer_systems() {
        for p in [3, 4, 5, 7] {
            for n in 0..=3 {
                let report = check_conjugacy(p, n, 500, 17).unwrap();
                assert!(
                    report.failures.is_empty(),
                    "p={p} n={n}: {:?}",
                    report.failures.first()
                );
            }
        }
    }

    #[test]
    fn dropping_the_indicator_breaks_conjugacy() {
        let odo = Odometer::spacer(3)
            .unwrap()
            .with_psi(PsiVariant::WithoutIndicator);
        let report = odo.check_conjugacy(1, 500, 5).unwrap();
        assert!(!report.failures.is_empty());
    }

    #[test]
    fn classic_table_is_not_conjugate_beyond_p3() {
        let odo = Odometer::new(OmegaSpec::classic(4).unwrap());
        assert!(!odo.check_conjugacy(1, 500, 5).unwrap().failures.is_empty());
        let odo = Odometer::new(OmegaSpec::classic(3).unwrap());
        assert!(odo.check_conjugacy(1, 500, 5).unwrap().failures.is_empty());
    }

    #[test]
    fn tower_decomposition_for_p3() {
        let odo = Odometer::spacer(3).unwrap();
        for n in 0..4 {
            let r = odo.check_tower_decomposition(n, 600, 8).unwrap();
            assert!(r.failures.is_empty());
            assert!(r.column_hits.iter().all(|&c| c > 0));
        }
    }

    #[test]
    fn level_measures() {
        assert_eq!(
            measure_of_level(3, 0, 0, 6).unwrap(),
            (ratio(2, 3), ratio(2, 3))
        );
        let (lo, hi) = measure_of_level(3, 0, 1, 6).unwrap();
        assert!(lo <= ratio(1, 3) && ratio(1, 3) <= hi);
        assert!(hi - lo <= ratio(1, 729));
        for p in [3, 4, 5] {
            let odo = Odometer::spacer(p).unwrap();
            for n in 0..3 {
                assert!(level_measures_cover_one(&odo, n, 6).unwrap());
            }
        }
        let printed = Odometer::spacer(3).unwrap();
        assert_eq!(
            printed.normalizer(2, Normalizer::Printed).unwrap(),
            printed.normalizer(2, Normalizer::MeanHeight).unwrap()
        );
        let classic5 = Odometer::new(OmegaSpec::classic(5).unwrap());
        assert_eq!(
            classic5.normalizer(0, Normalizer::MeanHeight).unwrap(),
            ratio(5, 2)
        );
    }

    #[test]
    fn full_levels_match_heights() {
        for p in [3, 4, 5] {
            let odo = Odometer::spacer(p).unwrap();
            for n in 0..3 {
                assert_eq!(odo.full_level_count(n, 5).unwrap(), odo.height(n).unwrap());
            }
        }
    }

    #[test]
    fn base_level_visit_rate() {
        let odo = Odometer::spacer(3).unwrap();
        let steps = 100_000u64;
        let visits = odo.base_visits(1, steps, 3).unwrap();
        let q = 1.0 / (4.0 + 0.5);
        let sigma = (q * (1.0 - q) / steps as f64).sqrt();
        assert!((visits as f64 / steps as f64 - q).abs() < 4.0 * sigma);
    }
}
