//! Exact computation of the generalized Chacon polynomial family `P_m^p`,
//! its degree substitution sequences, brute-force distribution oracles for
//! the functional `phi`, and a simulator of the finite-stage towers over the
//! `p`-adic odometer.
//!
//! ```
//! use chacon_core::{chacon_poly, ratio};
//!
//! let p = chacon_poly(3, 2).unwrap();
//! assert_eq!(p.coeff(1), ratio(2, 3));
//! ```

pub mod digits;
pub mod error;
pub mod exact;
pub mod family;
pub mod io;
pub mod odometer;
pub mod oracle;
pub mod substitution;
pub mod verify;

pub use digits::{omega_partial_sum, DigitStream, FunctionalStats, OmegaSpec, Tail};
pub use error::{Error, Result, Unresolved};
pub use exact::{op_count, ratio, BigInt, BigRational, SparsePoly};
pub use family::{
    chacon_poly, symmetric_form, symmetric_recurrence_check, triangle, verify_palindromic,
    PolyFamily,
};
pub use odometer::{
    check_conjugacy, heights, level_mass_total, measure_of_level, HeightTable, Normalizer,
    Odometer, PsiVariant, TowerPoint,
};
pub use oracle::{
    default_depth, enumerate_pi, enumerate_pi_with, sample_pi, window_distribution, Bracketed,
    Depth, Direction, PiDistribution, WindowDistribution, DEFAULT_DEEPEN,
};
pub use substitution::{
    degree, degree_recursive, lower_degree, lower_degree_recursive, mid_degree, s_hat, s_low, Kind,
    SubstitutionSystem,
};
pub use verify::{verify_all, Fault, VerifyConfig, VerifyReport};
