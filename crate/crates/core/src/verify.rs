//! Runs the full property suite and summarizes it as a serializable report.

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::digits::OmegaSpec;
use crate::error::Result;
use crate::exact::{geometric_sum, op_count, ratio, BigRational, SparsePoly};
use crate::family::{verify_palindromic, PolyFamily};
use crate::odometer::Odometer;
use crate::oracle::{default_depth, enumerate_pi_with, Depth, DEFAULT_DEEPEN};
use crate::substitution::{Kind, SubstitutionSystem};

/// Deliberate defects for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The recurrence uses `T(-1) = 1` instead of `0`.
    TriangleMinusOne,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub p_list: Vec<u32>,
    pub m_max: u64,
    pub seed: u64,
    pub fault: Option<Fault>,
    /// Oracle brackets are only computed for `m` up to this bound.
    pub oracle_m_max: u64,
    pub conjugacy_samples: u64,
    pub conjugacy_n_max: u32,
    /// Substitution laws are checked for indices below this bound.
    pub sequence_len: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            p_list: vec![3, 4, 5],
            m_max: 50,
            seed: 0,
            fault: None,
            oracle_m_max: 8,
            conjugacy_samples: 1000,
            conjugacy_n_max: 3,
            sequence_len: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub p: u32,
    pub passed: bool,
    pub cases: u64,
    /// First counterexample, if any.
    pub witness: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// Exact-arithmetic operations performed by this process so far.
    pub op_count: u64,
}

fn faulty_triangle(n: i64) -> i64 {
    if n == -1 {
        1
    } else {
        n * (n + 1) / 2
    }
}

struct Check {
    name: &'static str,
    p: u32,
    cases: u64,
    witness: Option<Value>,
}

impl Check {
    fn new(name: &'static str, p: u32) -> Self {
        Self {
            name,
            p,
            cases: 0,
            witness: None,
        }
    }

    /// Counts a case; keeps the first failure.
    fn case(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases_of(1, ok, witness);
    }

    fn cases_of(&mut self, count: u64, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += count;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name.to_string(),
            p: self.p,
            passed: self.witness.is_none(),
            cases: self.cases,
            witness: self.witness,
        }
    }
}

pub fn verify_all(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for &p in &config.p_list {
        let fam = match config.fault {
            None => PolyFamily::new(p)?,
            Some(Fault::TriangleMinusOne) => PolyFamily::with_triangle(p, faulty_triangle)?,
        };
        checks.push(base_cases(&fam));
        checks.push(palindromic(&fam, config.m_max));
        checks.extend(degrees(&fam, config.m_max)?);
        checks.push(scale_identity(&fam, config.m_max));
        checks.push(symmetric_recurrence(&fam, config.m_max)?);
        checks.push(oracle_brackets(
            &fam,
            config.m_max.min(config.oracle_m_max),
        )?);
        checks.extend(substitution_laws(p, config.sequence_len)?);
        checks.push(conjugacy(p, config)?);
    }
    checks.sort_by(|a, b| (a.p, &a.name).cmp(&(b.p, &b.name)));
    Ok(VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
        op_count: op_count(),
    })
}

fn base_cases(fam: &PolyFamily) -> CheckResult {
    let p = fam.p();
    let mut c = Check::new("base_cases", p);
    c.case(*fam.get(0) == SparsePoly::one(), || json!({"m": 0}));
    let expected = geometric_sum(1, u64::from(p - 1)).scale_shift(&ratio(1, i64::from(p) - 1), 0);
    c.case(*fam.get(1) == expected, || json!({"m": 1}));
    c.finish()
}

fn palindromic(fam: &PolyFamily, m_max: u64) -> CheckResult {
    let mut c = Check::new("palindromic", fam.p());
    for m in 0..=m_max {
        let poly = fam.get(m);
        let ok = verify_palindromic(&poly) && poly.is_normalized();
        c.case(ok, || json!({"p": fam.p(), "m": m}));
    }
    c.finish()
}

fn degrees(fam: &PolyFamily, m_max: u64) -> Result<Vec<CheckResult>> {
    let p = fam.p();
    let upper = SubstitutionSystem::new(p, Kind::Upper)?.prefix_sums(m_max as usize);
    let lower = SubstitutionSystem::new(p, Kind::Lower)?.prefix_sums(m_max as usize);
    let mut deg = Check::new("degree_agreement", p);
    let mut mid = Check::new("mid_degree", p);
    for m in 0..=m_max {
        let poly = fam.get(m);
        let (hi, lo) = (poly.degree().unwrap_or(0), poly.low_degree().unwrap_or(0));
        let (want_hi, want_lo) = (upper[m as usize] as i64, lower[m as usize] as i64);
        deg.case(
            hi == want_hi && lo == want_lo,
            || json!({"p": p, "m": m, "expected": [want_lo, want_hi], "got": [lo, hi]}),
        );
        mid.case(
            hi + lo == i64::from(p - 2) * m as i64,
            || json!({"p": p, "m": m, "low": lo, "high": hi}),
        );
    }
    Ok(vec![deg.finish(), mid.finish()])
}

fn scale_identity(fam: &PolyFamily, m_max: u64) -> CheckResult {
    let mut c = Check::new("scale_identity", fam.p());
    for m in 0..=m_max {
        c.case(
            fam.scale_identity_holds(m),
            || json!({"p": fam.p(), "m": m}),
        );
    }
    c.finish()
}

fn symmetric_recurrence(fam: &PolyFamily, m_max: u64) -> Result<CheckResult> {
    let mut c = Check::new("symmetric_recurrence", fam.p());
    for m in 0..=m_max {
        for k in 0..fam.p() {
            let ok = fam.symmetric_recurrence_holds(m, k)?;
            c.case(ok, || json!({"p": fam.p(), "m": m, "k": k}));
        }
    }
    Ok(c.finish())
}

fn oracle_brackets(fam: &PolyFamily, m_max: u64) -> Result<CheckResult> {
    let p = fam.p();
    let omega = OmegaSpec::classic(p)?;
    let limit = ratio(1, 1000);
    let mut c = Check::new("oracle_brackets", p);
    for m in 0..=m_max {
        let k = default_depth(p, m);
        let dist = enumerate_pi_with(&omega, m, Depth::new(k, DEFAULT_DEEPEN))?;
        let poly = fam.get(m);
        let bad = poly
            .terms()
            .map(|(e, q)| (e, q.clone()))
            .chain(
                dist.masses()
                    .filter(|(v, _)| poly.coeff(**v).is_zero())
                    .map(|(v, _)| (*v, BigRational::zero())),
            )
            .find(|(e, q)| !dist.contains(e, q));
        let ok = bad.is_none() && *dist.unresolved() < limit && dist.total().is_one();
        c.case(ok, || {
            json!({
                "p": p, "m": m, "K": k,
                "exponent": bad.as_ref().map(|b| b.0),
                "unresolved": dist.unresolved().to_string(),
            })
        });
    }
    Ok(c.finish())
}

fn substitution_laws(p: u32, len: u64) -> Result<Vec<CheckResult>> {
    let upper = SubstitutionSystem::new(p, Kind::Upper)?;
    let lower = SubstitutionSystem::new(p, Kind::Lower)?;
    let up = upper.prefix(len as usize);
    let low = lower.prefix(len as usize);
    let pu = u64::from(p);

    let mut range = Check::new("sequence_range", p);
    let mut complement = Check::new("sequence_complement", p);
    for j in 0..len as usize {
        range.case(
            u32::from(up[j]) <= p - 2,
            || json!({"p": p, "j": j, "value": up[j]}),
        );
        complement.case(
            u32::from(up[j]) + u32::from(low[j]) == p - 2,
            || json!({"p": p, "j": j, "upper": up[j], "lower": low[j]}),
        );
    }

    let mut characteristic = Check::new("sequence_characteristic", p);
    for m in 0..len / pu {
        let target = pu * (pu - 1 - u64::from(up[m as usize]));
        for j in 0..pu {
            let lhs = up[(pu * m + j) as usize];
            let rhs = upper.get(target + j);
            characteristic.case(
                lhs == rhs,
                || json!({"p": p, "m": m, "j": j, "lhs": lhs, "rhs": rhs}),
            );
        }
    }

    let mut routes = Check::new("sequence_routes", p);
    for j in 0..len.min(2000) {
        let a = upper.get_by_rule(j);
        routes.case(
            a == up[j as usize],
            || json!({"p": p, "j": j, "rule": a, "table": up[j as usize]}),
        );
    }
    Ok(vec![
        range.finish(),
        complement.finish(),
        characteristic.finish(),
        routes.finish(),
    ])
}

fn conjugacy(p: u32, config: &VerifyConfig) -> Result<CheckResult> {
    let odo = Odometer::spacer(p)?;
    let mut c = Check::new("conjugacy", p);
    for n in 0..=config.conjugacy_n_max {
        let report = odo.check_conjugacy(n, config.conjugacy_samples, config.seed)?;
        c.cases_of(
            report.checked,
            report.failures.is_empty(),
            || json!({"p": p, "n": n, "point": report.failures.first()}),
        );
    }
    Ok(c.finish())
}
