use std::fmt::Write as _;

use serde_json::{json, Value};

use chacon_core::io::{distribution_to_json_value, poly_to_csv, poly_to_json};
use chacon_core::odometer::level_mass_total;
use chacon_core::oracle::{bracket_f64, sample_pi};
use chacon_core::substitution::tier;
use chacon_core::{
    chacon_poly, default_depth, degree, enumerate_pi_with, lower_degree, mid_degree,
    symmetric_form, verify_all, BigRational, Depth, Fault, Kind, Normalizer, Odometer, OmegaSpec,
    PsiVariant, Result, SubstitutionSystem, VerifyConfig,
};

use crate::{Command, FaultArg, Format, SeqKind, SimCheck};

const SIGMAS: f64 = 4.0;

pub struct Outcome {
    pub stdout: String,
    pub passed: bool,
}

fn ok(stdout: String) -> Result<Outcome> {
    Ok(Outcome {
        stdout,
        passed: true,
    })
}

fn line(value: &Value) -> String {
    format!("{value}\n")
}

fn fraction(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn omega_for(p: u32, text: &str) -> Result<OmegaSpec> {
    match text {
        "classic" => OmegaSpec::classic(p),
        "spacer" => OmegaSpec::spacer(p),
        "legendre" => OmegaSpec::legendre(p),
        table => OmegaSpec::parse(p, table),
    }
}

pub fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Poly {
            p,
            m,
            symmetric,
            format,
        } => poly(p, m, symmetric, format),
        Command::Seq {
            p,
            kind,
            count,
            tier,
            format,
        } => seq(p, kind, count, tier, format),
        Command::Degrees {
            p,
            m,
            through,
            format,
        } => degrees(p, m, through, format),
        Command::Oracle {
            p,
            m,
            k,
            deepen,
            omega,
            mc,
            seed,
            format,
        } => oracle(p, m, k, deepen, &omega, mc, seed.seed, format),
        Command::Sim {
            p,
            n,
            steps,
            samples,
            seed,
            check,
            omega,
            printed_normalizer,
            k,
            drop_indicator,
        } => {
            let mut odo = Odometer::new(omega_for(p, &omega)?);
            if drop_indicator {
                odo = odo.with_psi(PsiVariant::WithoutIndicator);
            }
            let normalizer = if printed_normalizer {
                Normalizer::Printed
            } else {
                Normalizer::MeanHeight
            };
            sim(&odo, n, steps, samples, seed.seed, check, normalizer, k)
        }
        Command::Verify {
            p,
            m_max,
            seed,
            format,
            inject_fault,
        } => {
            let config = VerifyConfig {
                p_list: p,
                m_max,
                seed: seed.seed,
                fault: inject_fault.map(|FaultArg::TriangleMinusOne| Fault::TriangleMinusOne),
                ..VerifyConfig::default()
            };
            verify(&config, format)
        }
    }
}

fn poly(p: u32, m: u64, symmetric: bool, format: Format) -> Result<Outcome> {
    let (poly, scale) = if symmetric {
        (symmetric_form(p, m)?, 2)
    } else {
        ((*chacon_poly(p, m)?).clone(), 1)
    };
    ok(match format {
        Format::Json => poly_to_json(&poly, scale)? + "\n",
        Format::Csv => poly_to_csv(&poly),
    })
}

fn seq(
    p: u32,
    kind: SeqKind,
    count: Option<u64>,
    tier_l: Option<u32>,
    format: Option<Format>,
) -> Result<Outcome> {
    let kind = match kind {
        SeqKind::Upper => Kind::Upper,
        SeqKind::Lower => Kind::Lower,
    };
    let values = match (tier_l, count) {
        (Some(l), _) => tier(p, kind, l)?,
        (None, Some(count)) => {
            let limit = chacon_core::substitution::TIER_LIMIT as u64;
            if count > limit {
                return Err(chacon_core::Error::Resource {
                    what: "sequence length",
                    needed: u128::from(count),
                    limit: u128::from(limit),
                });
            }
            SubstitutionSystem::new(p, kind)?.prefix(count as usize)
        }
        (None, None) => unreachable!("clap requires --count or --tier"),
    };
    let text: Vec<String> = values.iter().map(u8::to_string).collect();
    ok(match format {
        None => text.iter().map(|v| format!("{v}\n")).collect(),
        Some(Format::Csv) => text.join(",") + "\n",
        Some(Format::Json) => line(&json!(values)),
    })
}

fn degrees(p: u32, m: u64, through: bool, format: Format) -> Result<Outcome> {
    let range = if through { 0..=m } else { m..=m };
    let mut rows = Vec::new();
    let mut csv = String::new();
    for m in range {
        let (hi, lo, mid) = (degree(p, m)?, lower_degree(p, m)?, mid_degree(p, m)?);
        let _ = writeln!(csv, "{m},{hi},{lo},{},{}", mid.numer(), mid.denom());
        rows.push(
            json!({"p": p, "m": m, "degree": hi, "lower_degree": lo, "mid_degree": fraction(&mid)}),
        );
    }
    ok(match format {
        Format::Csv => csv,
        Format::Json if through => line(&Value::Array(rows)),
        Format::Json => line(&rows[0]),
    })
}

#[allow(clippy::too_many_arguments)]
fn oracle(
    p: u32,
    m: u64,
    k: Option<u32>,
    deepen: u32,
    omega: &str,
    mc: Option<u64>,
    seed: u64,
    format: Format,
) -> Result<Outcome> {
    let omega = omega_for(p, omega)?;
    let k = k.unwrap_or_else(|| default_depth(p, m));
    let dist = enumerate_pi_with(&omega, m, Depth::new(k, deepen))?;
    let mut passed = true;
    let mut mc_report = None;
    if let Some(n) = mc {
        let emp = sample_pi(&omega, m, n, seed)?;
        let bins = emp.compare_bracket(&dist, SIGMAS);
        passed = bins.iter().all(|b| b.ok);
        mc_report =
            Some(json!({"n": n, "seed": seed, "sigmas": SIGMAS, "passed": passed, "bins": bins}));
    }
    let stdout = match format {
        Format::Json => {
            let mut out = serde_json::to_value(distribution_to_json_value(&dist))?;
            if let Some(r) = mc_report {
                out["monte_carlo"] = r;
            }
            line(&out)
        }
        Format::Csv => {
            let mut s = String::new();
            for (v, q) in dist.masses() {
                let _ = writeln!(s, "{v},{},{}", q.numer(), q.denom());
            }
            let u = dist.unresolved();
            let _ = writeln!(s, "unresolved,{},{}", u.numer(), u.denom());
            s
        }
    };
    Ok(Outcome { stdout, passed })
}

#[allow(clippy::too_many_arguments)]
fn sim(
    odo: &Odometer,
    n: u32,
    steps: u64,
    samples: u64,
    seed: u64,
    only: Option<SimCheck>,
    normalizer: Normalizer,
    k: u32,
) -> Result<Outcome> {
    let wants = |c: SimCheck| only.map_or(true, |o| o == c);
    let mut checks = Vec::new();
    let mut failures = Vec::new();

    if wants(SimCheck::Conjugacy) {
        let r = odo.check_conjugacy(n, samples, seed)?;
        checks.push(
            json!({"name": "conjugacy", "passed": r.failures.is_empty(), "checked": r.checked}),
        );
        failures.extend(
            r.failures
                .iter()
                .map(|w| json!({"check": "conjugacy", "witness": w})),
        );
    }
    if wants(SimCheck::Towers) {
        let r = odo.check_tower_decomposition(n, samples, seed)?;
        checks.push(json!({
            "name": "towers",
            "passed": r.failures.is_empty(),
            "checked": r.checked,
            "column_hits": r.column_hits,
        }));
        failures.extend(
            r.failures
                .iter()
                .map(|w| json!({"check": "towers", "witness": w})),
        );
    }
    if wants(SimCheck::Measure) {
        let z = odo.normalizer(n, normalizer)?;
        let expected = bracket_f64(&(z.recip(), z.recip())).0;
        let visits = odo.base_visits(n, steps, seed)?;
        let observed = visits as f64 / steps.max(1) as f64;
        let sigma = (expected * (1.0 - expected) / steps.max(1) as f64).sqrt();
        let ok = steps > 0 && (observed - expected).abs() <= SIGMAS * sigma;
        checks.push(json!({
            "name": "return_frequency",
            "passed": ok,
            "steps": steps,
            "observed": observed,
            "expected": fraction(&z.recip()),
            "sigma": sigma,
        }));
        if !ok {
            failures.push(
                json!({"check": "return_frequency", "observed": observed, "expected": expected}),
            );
        }
        let (lo, hi) = level_mass_total(odo, n, k, normalizer)?;
        let one = BigRational::from_integer(1.into());
        let covers = lo <= one && one <= hi;
        checks.push(json!({
            "name": "total_mass",
            "passed": covers,
            "K": k,
            "bracket": [fraction(&lo), fraction(&hi)],
        }));
        if !covers {
            failures
                .push(json!({"check": "total_mass", "bracket": [fraction(&lo), fraction(&hi)]}));
        }
    }
    let passed = failures.is_empty();
    let report =
        json!({"p": odo.p(), "n": n, "seed": seed, "checks": checks, "failures": failures});
    Ok(Outcome {
        stdout: line(&report),
        passed,
    })
}

fn verify(config: &VerifyConfig, format: Format) -> Result<Outcome> {
    let report = verify_all(config)?;
    let stdout = match format {
        Format::Json => line(&serde_json::to_value(&report)?),
        Format::Csv => {
            let mut s = String::new();
            for c in &report.checks {
                let _ = writeln!(s, "{},{},{},{}", c.name, c.p, c.passed, c.cases);
            }
            s
        }
    };
    Ok(Outcome {
        stdout,
        passed: report.passed,
    })
}
