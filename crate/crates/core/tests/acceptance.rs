// Acceptance harness: one PASS/FAIL line per criterion. Each criterion runs
// the matching repro suite plus oracles computed here from first principles.
// The process fails on any failure outside KNOWN_UNATTAINABLE.

#[path = "support/freeness_oracle.rs"]
mod freeness_oracle;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use freeconv::catalog::DistributionSpec;
use freeconv::convolve::{free_mul, product_support_spec};
use freeconv::moments::cumulants_from_moments;
use freeconv::ncpart::{enumerate_nc, mobius_nc, refines, SetPartition};
use freeconv::repro::{criterion_suite, run_suite, Check, ReproOptions};
use freeconv::rmtlab::StreamRng;
use freeconv::series::MomentSequence;
use freeness_oracle::FreeOracle;

// Criterion 8 asks for |n k_j - λ| ≤ 2λ/n at j ≤ 8, but
// n k_j(Bernoulli(λ/n)) - λ = -j(j-1)λ²/(2n) + O(n⁻²), which is 3λ²/n at j = 3.
const KNOWN_UNATTAINABLE: &[(u8, &str)] = &[(8, "n·k_j - λ ≈ -j(j-1)λ²/(2n) exceeds 2λ/n for j ≥ 3")];

fn catalan_oracle(n: usize) -> u64 {
    let mut c = vec![1u64; n + 1];
    for k in 1..=n {
        c[k] = (0..k).map(|i| c[i] * c[k - 1 - i]).sum();
    }
    c[n]
}

// Möbius function straight from its definition on the refinement order.
fn mobius_oracle(n: usize) -> i64 {
    let nc = enumerate_nc(n).unwrap();
    let bottom = nc.iter().position(|p| *p == SetPartition::discrete(n)).unwrap();
    let mut order: Vec<usize> = (0..nc.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(nc[i].block_count()));
    let mut mu = vec![0i64; nc.len()];
    for &c in &order {
        if c == bottom {
            mu[c] = 1;
            continue;
        }
        mu[c] = -order
            .iter()
            .filter(|&&d| d != c && refines(&nc[d], &nc[c]).unwrap())
            .map(|&d| mu[d])
            .sum::<i64>();
    }
    mu[nc.iter().position(|p| *p == SetPartition::full(n)).unwrap()]
}

// Cumulants from the functional relation m_n = Σ_s k_s [z^{n-s}] M(z)^s.
fn cumulants_oracle(m: &[f64]) -> Vec<f64> {
    let n = m.len();
    let mut mm = vec![1.0];
    mm.extend_from_slice(m);
    let mut k = vec![0.0; n + 1];
    for order in 1..=n {
        let mut acc = 0.0;
        for s in 1..order {
            // [z^{order-s}] M(z)^s
            let mut pow = vec![1.0];
            for _ in 0..s {
                let mut next = vec![0.0; order - s + 1];
                for (i, a) in pow.iter().enumerate() {
                    for (j, b) in mm.iter().enumerate().take(order - s + 1 - i) {
                        next[i + j] += a * b;
                    }
                }
                pow = next;
            }
            acc += k[s] * pow[order - s];
        }
        k[order] = mm[order] - acc;
    }
    k[1..].to_vec()
}

fn oracle_checks(criterion: u8) -> Vec<Check> {
    let mut out = Vec::new();
    match criterion {
        1 => {
            for n in 1..=9 {
                out.push(Check::exact(
                    format!("|NC({n})| vs Catalan recurrence"),
                    enumerate_nc(n).unwrap().len() as f64,
                    catalan_oracle(n) as f64,
                    "oracle",
                ));
            }
        }
        2 => {
            for n in 1..=6 {
                let mu = mobius_nc(&SetPartition::discrete(n), &SetPartition::full(n)).unwrap();
                out.push(Check::exact(format!("μ(0_{n},1_{n}) vs definition"), mu as f64, mobius_oracle(n) as f64, "oracle"));
            }
        }
        3 => {
            for law in ["semicircle", "marchenko-pastur:lambda=0.5", "bernoulli1:p=0.3", "arcsine"] {
                let m = law.parse::<DistributionSpec>().unwrap().moment_table(9).unwrap();
                let k = cumulants_from_moments(&m, 9).unwrap();
                let o = cumulants_oracle(m.as_slice());
                let dev = (1..=9).map(|j| (k.k(j) - o[j - 1]).abs()).fold(0.0, f64::max);
                out.push(Check::close(format!("{law}: lattice vs functional-equation oracle"), dev, 0.0, 1e-9, "oracle"));
            }
        }
        5 => {
            let mut worst = 0.0f64;
            for pair in 0..20u64 {
                let mut rng = StreamRng::new(55, pair);
                let mut law = || {
                    let atoms: Vec<(f64, f64)> = (0..3).map(|_| (0.1 + 2.9 * rng.uniform(), 0.1 + 0.9 * rng.uniform())).collect();
                    let w: f64 = atoms.iter().map(|a| a.1).sum();
                    let mean: f64 = atoms.iter().map(|(x, p)| x * p / w).sum();
                    (1..=4).map(|k| atoms.iter().map(|(x, p)| p / w * (x / mean).powi(k)).sum()).collect::<Vec<f64>>()
                };
                let (a, b) = (law(), law());
                let prod = free_mul(&MomentSequence::new(a.clone()), &MomentSequence::new(b.clone()), 4).unwrap();
                let mut oracle = FreeOracle::new(vec![a, b]);
                for k in 1..=4 {
                    let word: Vec<usize> = (0..2 * k).map(|i| i % 2).collect();
                    let want = oracle.moment(&word);
                    worst = worst.max((prod.moments.m(k) - want).abs() / want.abs().max(1.0));
                }
            }
            out.push(Check::close("20 pairs: S-route ⊠ vs freeness oracle E((ab)^k), k ≤ 4", worst, 0.0, 1e-8, "oracle"));
        }
        _ => {}
    }
    out
}

fn runtime_budget(criterion: u8) -> Option<Duration> {
    match criterion {
        1 => Some(Duration::from_secs(5)),
        4 => Some(Duration::from_secs(1)),
        9 => Some(Duration::from_secs(60)),
        16 => Some(Duration::from_secs(300)),
        _ => None,
    }
}

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    let total = Instant::now();
    for criterion in 1..=16u8 {
        let suite = criterion_suite(criterion).expect("every criterion has a suite");
        let start = Instant::now();
        let report = run_suite(suite, &ReproOptions::default());
        let elapsed = start.elapsed();
        let mut checks = match report {
            Ok(r) => r.checks,
            Err(e) => vec![Check::holds(format!("suite error: {e}"), false, "")],
        };
        checks.extend(oracle_checks(criterion));
        if criterion == 13 {
            // the root finding alone, which carries the runtime budget
            let mp: DistributionSpec = "marchenko-pastur:lambda=1".parse().unwrap();
            let t = Instant::now();
            product_support_spec(&mp, 100_000).unwrap();
            checks.push(Check::at_most("root finding seconds", t.elapsed().as_secs_f64(), 1.0, "runtime"));
        }
        if let Some(budget) = runtime_budget(criterion) {
            checks.push(Check::at_most("suite seconds", elapsed.as_secs_f64(), budget.as_secs_f64(), "runtime"));
        }
        let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
        let status = if failed.is_empty() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{status} {criterion:>2} {suite:<16} {:>3} checks  {:>7.2}s",
            checks.len(),
            elapsed.as_secs_f64()
        );
        if let Some(first) = failed.first() {
            line.push_str(&format!(
                "  first failure: {} observed {:.6e} expected {} tol {:.3e}",
                first.name,
                first.observed,
                first.expected.map_or("-".to_string(), |e| format!("{e:.6e}")),
                first.tolerance
            ));
            match KNOWN_UNATTAINABLE.iter().find(|k| k.0 == criterion) {
                Some((_, why)) => line.push_str(&format!("  [unattainable as stated: {why}]")),
                None => unexpected.push(criterion),
            }
        }
        println!("{line}");
    }
    println!("total {:.1}s", total.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
