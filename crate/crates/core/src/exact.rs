//! Exact rationals and sparse integer-exponent polynomials.
//!
//! Coefficients are [`BigRational`] values, which `num-rational` keeps in
//! lowest terms with a positive denominator. A [`SparsePoly`] never stores a
//! zero coefficient, so the empty map is the zero polynomial.
//!
//! Symmetric forms reuse the same type with doubled exponents: the stored
//! exponent is twice the actual power of `t`. Nothing in this module cares
//! which convention a value uses; callers keep track of the scale.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};
use std::sync::atomic::{AtomicU64, Ordering};

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

static OP_COUNT: AtomicU64 = AtomicU64::new(0);

#[inline]
fn count_ops(n: u64) {
    OP_COUNT.fetch_add(n, Ordering::Relaxed);
}

/// Total number of coefficient-level rational operations performed by this
/// process so far.
pub fn op_count() -> u64 {
    OP_COUNT.load(Ordering::Relaxed)
}

/// Builds `num / den` in lowest terms. Panics if `den` is zero.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A finitely supported map from integer exponents to nonzero rationals.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct SparsePoly {
    terms: BTreeMap<i64, BigRational>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, BigRational::one())
    }

    pub fn monomial(exp: i64, coeff: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        Self { terms }
    }

    /// Collects `(exponent, coefficient)` pairs, summing repeated exponents
    /// and dropping anything that cancels to zero.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, BigRational)>,
    {
        let mut out = BTreeMap::new();
        for (e, c) in terms {
            accumulate(&mut out, e, c);
        }
        Self { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored (nonzero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest stored exponent, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Smallest stored exponent, `None` for the zero polynomial.
    pub fn low_degree(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn coeff(&self, exp: i64) -> BigRational {
        self.terms
            .get(&exp)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Terms in increasing exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &BigRational)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    /// Value at `t = 1`.
    pub fn coeff_sum(&self) -> BigRational {
        count_ops(self.terms.len() as u64);
        self.terms
            .values()
            .fold(BigRational::zero(), |acc, c| acc + c)
    }

    pub fn all_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Returns `c * t^e * self`.
    pub fn scale_shift(&self, c: &BigRational, e: i64) -> SparsePoly {
        if c.is_zero() {
            return SparsePoly::zero();
        }
        count_ops(self.terms.len() as u64);
        let terms = self
            .terms
            .iter()
            .map(|(exp, coeff)| (exp + e, coeff * c))
            .collect();
        SparsePoly { terms }
    }

    /// Multiplies every exponent by `factor`; used to move between the plain
    /// and doubled exponent conventions.
    pub fn stretch_exponents(&self, factor: i64) -> SparsePoly {
        assert!(factor > 0, "exponent stretch factor must be positive");
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e * factor, c.clone()))
            .collect();
        SparsePoly { terms }
    }

    /// Structural check of the storage invariant.
    pub fn is_normalized(&self) -> bool {
        self.terms.values().all(|c| {
            !c.is_zero()
                && c.denom().is_positive()
                && num_integer::Integer::gcd(c.numer(), c.denom()).is_one()
        })
    }
}

fn accumulate(map: &mut BTreeMap<i64, BigRational>, exp: i64, coeff: BigRational) {
    if coeff.is_zero() {
        return;
    }
    count_ops(1);
    match map.entry(exp) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(coeff);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get() + coeff;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

impl Add for &SparsePoly {
    type Output = SparsePoly;

    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        let (big, small) = if self.len() >= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut terms = big.terms.clone();
        for (e, c) in &small.terms {
            accumulate(&mut terms, *e, c.clone());
        }
        SparsePoly { terms }
    }
}

impl Add for SparsePoly {
    type Output = SparsePoly;

    fn add(self, rhs: SparsePoly) -> SparsePoly {
        &self + &rhs
    }
}

impl Mul for &SparsePoly {
    type Output = SparsePoly;

    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        let mut terms = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                count_ops(1);
                accumulate(&mut terms, ea + eb, ca * cb);
            }
        }
        SparsePoly { terms }
    }
}

impl Mul for SparsePoly {
    type Output = SparsePoly;

    fn mul(self, rhs: SparsePoly) -> SparsePoly {
        &self * &rhs
    }
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{e}")?,
            }
        }
        Ok(())
    }
}

/// Coefficient-wise exact sum.
pub fn poly_add(a: &SparsePoly, b: &SparsePoly) -> SparsePoly {
    a + b
}

/// `c * t^e * a`.
pub fn poly_scale_shift(a: &SparsePoly, c: &BigRational, e: i64) -> SparsePoly {
    a.scale_shift(c, e)
}

/// `sum_{j < count} t^(j * step)`. A zero count gives the zero polynomial.
pub fn geometric_sum(step: i64, count: u64) -> SparsePoly {
    assert!(step > 0, "geometric_sum step must be positive");
    SparsePoly::from_terms((0..count as i64).map(|j| (j * step, BigRational::one())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(terms: &[(i64, i64, i64)]) -> SparsePoly {
        SparsePoly::from_terms(terms.iter().map(|&(e, n, d)| (e, ratio(n, d))))
    }

    #[test]
    fn add_examples() {
        let a = poly(&[(0, 1, 2), (1, 1, 2)]);
        let b = poly(&[(1, 1, 2)]);
        assert_eq!(poly_add(&a, &b), poly(&[(0, 1, 2), (1, 1, 1)]));
        assert_eq!(poly_add(&a, &SparsePoly::zero()), a);

        let p32 = poly(&[(0, 1, 6), (1, 2, 3), (2, 1, 6)]);
        let sum = poly_add(&p32, &poly(&[(2, -1, 6)]));
        assert_eq!(sum, poly(&[(0, 1, 6), (1, 2, 3)]));
        assert_eq!(sum.len(), 2);
        assert!(sum.is_normalized());
    }

    #[test]
    fn scale_shift_examples() {
        let one_plus_t = poly(&[(0, 1, 1), (1, 1, 1)]);
        assert_eq!(
            poly_scale_shift(&one_plus_t, &ratio(1, 2), 0),
            poly(&[(0, 1, 2), (1, 1, 2)])
        );
        let half = poly(&[(0, 1, 2), (1, 1, 2)]);
        let shifted = poly_scale_shift(&half, &ratio(1, 1), 1);
        assert_eq!(shifted, poly(&[(1, 1, 2), (2, 1, 2)]));
        assert_eq!(shifted.low_degree(), Some(1));
        assert!(poly_scale_shift(&half, &ratio(0, 1), 3).is_zero());
    }

    #[test]
    fn geometric_sum_examples() {
        assert_eq!(geometric_sum(2, 1), SparsePoly::one());
        assert_eq!(geometric_sum(1, 2), poly(&[(0, 1, 1), (1, 1, 1)]));
        assert_eq!(
            geometric_sum(3, 3),
            poly(&[(0, 1, 1), (3, 1, 1), (6, 1, 1)])
        );
        assert!(geometric_sum(5, 0).is_zero());
    }

    #[test]
    fn multiplication_matches_hand_expansion() {
        let a = poly(&[(0, 1, 1), (1, 1, 1)]);
        let b = poly(&[(0, 1, 1), (1, -1, 1)]);
        assert_eq!(&a * &b, poly(&[(0, 1, 1), (2, -1, 1)]));
        assert!((&a * &SparsePoly::zero()).is_zero());
    }

    #[test]
    fn display_is_readable() {
        let p = poly(&[(0, 1, 6), (1, 2, 3), (2, 1, 6)]);
        assert_eq!(p.to_string(), "1/6 + 2/3*t + 1/6*t^2");
        assert_eq!(SparsePoly::zero().to_string(), "0");
    }

    fn arb_poly() -> impl Strategy<Value = SparsePoly> {
        prop::collection::vec((-20i64..20, -50i64..50, 1i64..30), 0..8)
            .prop_map(|v| SparsePoly::from_terms(v.into_iter().map(|(e, n, d)| (e, ratio(n, d)))))
    }

    proptest! {
        #[test]
        fn addition_is_associative(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        }

        #[test]
        fn shift_moves_degree(a in arb_poly(), e in -30i64..30) {
            let s = a.scale_shift(&BigRational::one(), e);
            prop_assert_eq!(s.degree(), a.degree().map(|d| d + e));
            prop_assert_eq!(s.low_degree(), a.low_degree().map(|d| d + e));
        }

        #[test]
        fn geometric_sum_at_one_is_count(step in 1i64..10, count in 0u64..40) {
            prop_assert_eq!(geometric_sum(step, count).coeff_sum(), ratio(count as i64, 1));
        }
    }

    #[test]
    fn long_random_operation_chain_stays_normalized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut acc = SparsePoly::one();
        for _ in 0..10_000 {
            let e = rng.random_range(-5..5);
            let c = ratio(rng.random_range(-9..10), rng.random_range(1..12));
            let term = SparsePoly::monomial(e, c.clone());
            acc = match rng.random_range(0..3) {
                0 => &acc + &term,
                1 => acc.scale_shift(&ratio(rng.random_range(1..4), rng.random_range(1..4)), 0),
                _ => {
                    let shifted = acc.scale_shift(&BigRational::one(), e);
                    &shifted + &term
                }
            };
            // keep the support bounded so the test stays quick
            if acc.len() > 40 {
                acc = SparsePoly::from_terms(acc.terms().take(20).map(|(e, c)| (e, c.clone())));
            }
            assert!(acc.is_normalized());
        }
    }
}
