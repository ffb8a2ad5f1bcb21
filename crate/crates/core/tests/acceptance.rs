//! Acceptance gate: one PASS/FAIL line per criterion, each under its time
//! budget. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use chacon_core::exact::geometric_sum;
use chacon_core::family::family;
use chacon_core::odometer::Odometer;
use chacon_core::oracle::window_distribution;
use chacon_core::{
    chacon_poly, default_depth, enumerate_pi_with, ratio, sample_pi, verify_palindromic,
    BigRational, Depth, Direction, Kind, OmegaSpec, SparsePoly, SubstitutionSystem, DEFAULT_DEEPEN,
};
use num_traits::{One, Zero};

type Outcome = Result<String, String>;

/// Id, name, time budget in seconds, check.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn base_cases() -> Outcome {
    for p in 3..=9u32 {
        let p0 = chacon_poly(p, 0).map_err(|e| e.to_string())?;
        ensure(*p0 == SparsePoly::one(), || format!("P({p},0) = {p0}"))?;
        let want = geometric_sum(1, u64::from(p - 1)).scale_shift(&ratio(1, i64::from(p) - 1), 0);
        let p1 = chacon_poly(p, 1).map_err(|e| e.to_string())?;
        ensure(*p1 == want, || format!("P({p},1) = {p1}"))?;
    }
    Ok("p in 3..=9".into())
}

fn palindromic() -> Outcome {
    let mut checked = 0;
    for p in 3..=9u32 {
        for m in 0..=200 {
            let poly = chacon_poly(p, m).map_err(|e| e.to_string())?;
            ensure(verify_palindromic(&poly), || {
                format!("P({p},{m}) is not palindromic")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} polynomials"))
}

fn oracle_equivalence() -> Outcome {
    let limit = ratio(1, 1000);
    let mut worst = BigRational::zero();
    for p in [3u32, 4, 5] {
        let omega = OmegaSpec::classic(p).map_err(|e| e.to_string())?;
        for m in 0..=30 {
            let k = default_depth(p, m);
            let dist = enumerate_pi_with(&omega, m, Depth::new(k, DEFAULT_DEEPEN))
                .map_err(|e| e.to_string())?;
            let poly = chacon_poly(p, m).map_err(|e| e.to_string())?;
            let lo = poly
                .low_degree()
                .unwrap_or(0)
                .min(dist.masses().map(|(v, _)| *v).min().unwrap_or(0));
            let hi = poly
                .degree()
                .unwrap_or(0)
                .max(dist.masses().map(|(v, _)| *v).max().unwrap_or(0));
            for e in lo..=hi {
                ensure(dist.contains(&e, &poly.coeff(e)), || {
                    format!("p={p} m={m} K={k}: coefficient of t^{e} outside bracket")
                })?;
            }
            ensure(*dist.unresolved() < limit, || {
                format!("p={p} m={m} K={k}: unresolved {}", dist.unresolved())
            })?;
            if *dist.unresolved() > worst {
                worst = dist.unresolved().clone();
            }
        }
    }
    Ok(format!(
        "max unresolved {worst} (K = ceil(log_p m)+6, deepen {DEFAULT_DEEPEN})"
    ))
}

fn monte_carlo() -> Outcome {
    let n = 1_000_000;
    let mut bins = 0;
    for (p, m) in [(3u32, 5u64), (4, 7), (7, 3)] {
        let omega = OmegaSpec::classic(p).map_err(|e| e.to_string())?;
        let exact = chacon_poly(p, m).map_err(|e| e.to_string())?;
        let emp = sample_pi(&omega, m, n, 20_240_601).map_err(|e| e.to_string())?;
        for bin in emp.compare(&exact, 4.0) {
            ensure(bin.ok, || {
                format!(
                    "p={p} m={m} t^{}: observed {} expected {}",
                    bin.value, bin.observed, bin.expected
                )
            })?;
            bins += 1;
        }
    }
    Ok(format!("{bins} bins at 4 sigma, n = {n}"))
}

fn degree_laws() -> Outcome {
    for p in [3u32, 4, 5, 7] {
        let upper = SubstitutionSystem::new(p, Kind::Upper)
            .map_err(|e| e.to_string())?
            .prefix_sums(500);
        let lower = SubstitutionSystem::new(p, Kind::Lower)
            .map_err(|e| e.to_string())?
            .prefix_sums(500);
        for m in 0..=500u64 {
            let poly = chacon_poly(p, m).map_err(|e| e.to_string())?;
            let (hi, lo) = (poly.degree().unwrap(), poly.low_degree().unwrap());
            ensure(hi == upper[m as usize] as i64, || {
                format!("deg P({p},{m}) = {hi}")
            })?;
            ensure(lo == lower[m as usize] as i64, || {
                format!("lowdeg P({p},{m}) = {lo}")
            })?;
            let mid = ratio(hi + lo, 2);
            ensure(mid == ratio(i64::from(p - 2) * m as i64, 2), || {
                format!("mid P({p},{m}) = {mid}")
            })?;
        }
    }
    Ok("p in {3,4,5,7}, m <= 500".into())
}

fn substitution_identities() -> Outcome {
    for p in [3u32, 4, 5, 7] {
        let pu = u64::from(p);
        let upper = SubstitutionSystem::new(p, Kind::Upper).map_err(|e| e.to_string())?;
        let lower = SubstitutionSystem::new(p, Kind::Lower).map_err(|e| e.to_string())?;
        let up = upper.prefix(100_001);
        let low = lower.prefix(100_001);
        for m in 0..=10_000u64 {
            let target = pu * (pu - 1 - u64::from(up[m as usize]));
            for j in 0..pu {
                let lhs = up[(pu * m + j) as usize];
                let rhs = up[(target + j) as usize];
                ensure(lhs == rhs, || format!("p={p} m={m} j={j}: {lhs} != {rhs}"))?;
                ensure(upper.get(pu * m + j) == lhs, || {
                    format!("p={p}: recursion disagrees at {}", pu * m + j)
                })?;
            }
        }
        for j in 0..=100_000usize {
            ensure(u32::from(up[j]) <= p - 2, || {
                format!("p={p}: S_{j} = {}", up[j])
            })?;
            ensure(u32::from(up[j]) + u32::from(low[j]) == p - 2, || {
                format!("p={p}: complement fails at {j}")
            })?;
        }
    }
    let spot = SubstitutionSystem::new(4, Kind::Upper)
        .map_err(|e| e.to_string())?
        .get(141);
    ensure(spot == 1, || format!("S_141 = {spot} at p = 4"))?;
    Ok("characteristic m <= 1e4, range/complement j <= 1e5, S_141 = 1".into())
}

fn recurrence_consistency() -> Outcome {
    for p in 3..=7u32 {
        let fam = family(p).map_err(|e| e.to_string())?;
        for m in 0..=100 {
            ensure(fam.scale_identity_holds(m), || {
                format!("scale identity p={p} m={m}")
            })?;
        }
        for m in 0..=50 {
            for k in 0..p {
                let ok = fam
                    .symmetric_recurrence_holds(m, k)
                    .map_err(|e| e.to_string())?;
                ensure(ok, || format!("symmetric recurrence p={p} m={m} k={k}"))?;
            }
        }
    }
    Ok("p <= 7: scale m <= 100, symmetric m <= 50, all k".into())
}

fn general_omega() -> Outcome {
    let base = OmegaSpec::legendre(7).map_err(|e| e.to_string())?;
    let tables = [
        base.clone(),
        base.affine(2, 1).map_err(|e| e.to_string())?,
        base.affine(3, 0).map_err(|e| e.to_string())?,
    ];
    let mut worst = 0f64;
    for omega in &tables {
        let stats = omega.stats();
        for m in 0..=5u64 {
            let depth = Depth::new(default_depth(7, m), DEFAULT_DEEPEN);
            let dist = enumerate_pi_with(omega, m, depth).map_err(|e| e.to_string())?;
            let lo = i64::from(stats.phi_star) * m as i64;
            let hi = i64::from(stats.zeta) * m as i64;
            ensure(dist.palindrome_violation(lo, hi).is_none(), || {
                format!("omega={omega} m={m}: brackets not palindromic")
            })?;
            ensure(dist.total().is_one(), || {
                format!("omega={omega} m={m}: mass does not sum to 1")
            })?;
            worst = worst.max(dist.unresolved_f64());
        }
    }
    Ok(format!(
        "Legendre p=7 and affine (2,1), (3,0); max unresolved {worst:.2e}"
    ))
}

fn conjugacy() -> Outcome {
    let samples = 10_000;
    for p in [3u32, 4, 5, 7] {
        let odo = Odometer::spacer(p).map_err(|e| e.to_string())?;
        for n in 0..=4 {
            let r = odo
                .check_conjugacy(n, samples, 99)
                .map_err(|e| e.to_string())?;
            ensure(r.failures.is_empty(), || {
                format!("p={p} n={n}: {:?}", r.failures[0])
            })?;
        }
    }
    let odo = Odometer::spacer(3).map_err(|e| e.to_string())?;
    for n in 0..=4 {
        let r = odo
            .check_tower_decomposition(n, samples, 7)
            .map_err(|e| e.to_string())?;
        ensure(r.failures.is_empty(), || {
            format!("p=3 n={n}: level outside {{i, h+i, 2h+i+1}}")
        })?;
        ensure(r.column_hits.iter().all(|&c| c > 0), || {
            format!("p=3 n={n}: a column is never hit")
        })?;
    }
    Ok(format!(
        "p in {{3,4,5,7}}, n <= 4, {samples} points each; p=3 towers"
    ))
}

fn window_law() -> Outcome {
    let cases = [
        OmegaSpec::classic(3).map_err(|e| e.to_string())?,
        OmegaSpec::legendre(7).map_err(|e| e.to_string())?,
    ];
    for omega in &cases {
        let p = omega.p();
        let depth = Depth::new(if p == 3 { 10 } else { 6 }, DEFAULT_DEEPEN);
        for w in 1..=3 {
            let fwd = window_distribution(omega, w, Direction::Forward, false, depth)
                .map_err(|e| e.to_string())?;
            let bwd = window_distribution(omega, w, Direction::Backward, true, depth)
                .map_err(|e| e.to_string())?;
            ensure(fwd.first_disagreement(&bwd).is_none(), || {
                format!(
                    "p={p} w={w}: window {:?} disagrees",
                    fwd.first_disagreement(&bwd)
                )
            })?;
        }
    }
    Ok("classic p=3, Legendre p=7, w <= 3".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "base cases", 1, base_cases),
        (2, "palindromicity", 30, palindromic),
        (3, "oracle equivalence", 120, oracle_equivalence),
        (4, "Monte Carlo consistency", 60, monte_carlo),
        (5, "degree laws", 60, degree_laws),
        (6, "substitution identities", 30, substitution_identities),
        (7, "recurrence self-consistency", 60, recurrence_consistency),
        (8, "general-omega palindromicity", 120, general_omega),
        (9, "conjugacy", 30, conjugacy),
        (10, "window distribution law", 60, window_law),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let on_time = elapsed <= Duration::from_secs(budget);
        let (status, detail) = match (&result, on_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over time budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "{status} {id:>2} {name} ({:.2}s / {budget}s): {detail}",
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
