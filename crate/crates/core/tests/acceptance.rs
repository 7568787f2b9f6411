//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its own PASS/FAIL line; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::time::Instant;

use boolean_rmt::boolean_model::EntryModel;
use boolean_rmt::cumulants::{check_boolean_independence, BDiagonalLaw, WordFunction};
use boolean_rmt::matrix_moments::{
    iota_histogram, limit_bdiag, limit_selfadjoint, trace_moment_exact, trace_moment_selfadjoint_exact, MixedWordSpec,
    SelfAdjointMethod, TraceMethod,
};
use boolean_rmt::partitions::{enumerate_alt, enumerate_partitions, SignPattern};
use boolean_rmt::permutations::partial_transpose_cross_moment;
use boolean_rmt::scalar::{format_scalar, int, ratio, to_f64};
use boolean_rmt::verify::{
    bc1_round_trip_case, cross_moment_by_trace, factorization_sweep, prop_b_ii_violations, random_law,
    random_mixed_spec, random_partition, random_product_factors,
};
use boolean_rmt::{IntervalPartition, Result};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;
const BUDGET: u128 = 1 << 40;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

/// Counting over alternating and non-alternating partitions, n <= 7, N in 2..=5.
fn alternating_tuple_counts() -> Result<Outcome> {
    let start = Instant::now();
    let (mut alt_checked, mut alt_failures, mut bound_failures) = (0usize, 0usize, 0usize);
    let mut first_failure = None;
    for n in 1..=7 {
        for xi in SignPattern::all(n) {
            let alt: Vec<IntervalPartition> = enumerate_alt(&xi).collect();
            for size in 2..=5usize {
                let hist = iota_histogram(&xi, size, BUDGET)?;
                let nn = size as u128;
                for sigma in enumerate_partitions(n)? {
                    let brute = hist.get(&sigma).copied().unwrap_or(0);
                    let r = sigma.num_blocks() as u32;
                    if alt.contains(&sigma) {
                        alt_checked += 1;
                        let expected = nn * nn * (nn - 1).pow(r - 1);
                        if brute != expected {
                            alt_failures += 1;
                            first_failure.get_or_insert(format!(
                                "xi = {xi}, sigma = {sigma}, N = {size}: brute {brute}, closed form {expected}"
                            ));
                        }
                    } else if brute > nn.pow(r) {
                        bound_failures += 1;
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = alt_failures == 0 && bound_failures == 0 && secs < 120.0;
    let mut detail = format!(
        "{alt_checked} alternating counts, {alt_failures} differ from N^2 (N-1)^(r-1); {bound_failures} above N^r; {secs:.1}s"
    );
    if let Some(f) = first_failure {
        detail.push_str(&format!("; first: {f}"));
    }
    outcome(passed, detail)
}

fn oracle_equivalence() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut bad = 0usize;
    for _ in 0..200 {
        let n = rng.gen_range(1..=5);
        let size = rng.gen_range(1..=5);
        let spec = random_mixed_spec(&mut rng, n)?;
        let brute = trace_moment_exact(&spec, size, TraceMethod::Brute, BUDGET)?;
        let part = trace_moment_exact(&spec, size, TraceMethod::Partition, BUDGET)?;
        if brute != part {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("200 random words, {bad} brute/partition mismatches"))
}

fn bdiag_limit() -> Result<Outcome> {
    let (alpha, beta) = (ratio(3, 2), ratio(2, 5));
    let xi: SignPattern = "xx*xx*".parse()?;
    let spec = MixedWordSpec::single(xi.clone(), EntryModel::bdiag(vec![alpha.clone()], vec![beta.clone()]));
    let limit = limit_bdiag(&xi, std::slice::from_ref(&alpha), std::slice::from_ref(&beta))?;
    let a2 = ratio(-7, 3);
    let symbolic =
        limit_bdiag(&xi, &[alpha.clone(), a2.clone()], std::slice::from_ref(&beta))? == &a2 + &alpha * &alpha;
    let mut exact_ok = true;
    let mut scaled = Vec::new();
    for size in [8usize, 16, 32, 64] {
        let v = trace_moment_exact(&spec, size, TraceMethod::Partition, BUDGET)?;
        let n = int(size as i64);
        exact_ok &= v == &alpha * &alpha * (&n - int(1)) / &n;
        scaled.push((&v - &limit).abs() * n);
    }
    let non_increasing = scaled.windows(2).all(|w| w[1] <= w[0]);
    let bounded = scaled.iter().all(|s| *s <= &alpha * &alpha);
    outcome(
        symbolic && exact_ok && non_increasing && bounded,
        format!(
            "limit {}, N * |error| over N = 8..64: {}",
            format_scalar(&limit),
            scaled.iter().map(format_scalar).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn mixed_factorization() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let laws: BTreeMap<usize, BDiagonalLaw> =
        (0..3).map(|k| Ok((k, random_law(&mut rng, 4, 4)?))).collect::<Result<_>>()?;
    let (cases, bad) = factorization_sweep(&laws, 8)?;
    outcome(bad == 0, format!("{cases} (labels, xi) pairs, {bad} failures"))
}

fn star_products_independent() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let law = random_law(&mut rng, 5, 10)?;
    let uv = law.star_products_law();
    let report = check_boolean_independence(&uv, &uv.alphabet().groups_by_tag(), 10)?;
    outcome(report.is_independent(), report.to_string())
}

fn product_cumulants() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut stray = Vec::new();
    for _ in 0..3 {
        let (a, b) = random_product_factors(&mut rng)?;
        stray.extend(prop_b_ii_violations(&a, &b, 8)?);
    }
    outcome(stray.is_empty(), format!("3 random factor pairs, {} stray cumulants", stray.len()))
}

fn selfadjoint_limit() -> Result<Outcome> {
    let bernoulli = (1..=5).all(|r| limit_selfadjoint(&int(1), &int(1), 2 * r).map(|v| v == int(1)).unwrap_or(false));
    let v = limit_selfadjoint(&int(2), &int(1), 4)?;
    let mut worst: f64 = 0.0;
    for (a, b) in [(1i64, 1i64), (2, 1)] {
        let model = EntryModel::selfadjoint(int(a), int(b));
        for r in 1..=5usize {
            let limit = limit_selfadjoint(&int(a), &int(b), 2 * r)?;
            let bound = (2 * r) as f64 * (a.max(b) as f64).powi(r as i32);
            for size in [10usize, 20, 40, 80, 160] {
                let exact = trace_moment_selfadjoint_exact(&model, 2 * r, size, SelfAdjointMethod::Closed, BUDGET)?;
                worst = worst.max(size as f64 * to_f64(&(exact - &limit)).abs() / bound);
            }
        }
    }
    outcome(
        bernoulli && v == ratio(7, 3) && worst <= 1.0,
        format!("limit(2, 1, 4) = {}, largest N * |error| / (2r max^r) = {worst:.4}", format_scalar(&v)),
    )
}

fn partial_transpose() -> Result<Outcome> {
    let beta = ratio(5, 3);
    let mut ok = true;
    let mut values = Vec::new();
    for (m, n) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
        let closed = partial_transpose_cross_moment(&beta, m, n)?;
        let brute = cross_moment_by_trace(&beta, m, n, TraceMethod::Brute)?;
        let part = cross_moment_by_trace(&beta, m, n, TraceMethod::Partition)?;
        let target = &beta / int(n as i64);
        ok &= closed == target && brute == target && part == target;
        values.push(format!("({m},{n}) -> {}", format_scalar(&brute)));
    }
    outcome(ok, values.join(", "))
}

fn structural() -> Result<Outcome> {
    let cardinality = (1..=12).all(|n| enumerate_partitions(n).map(|p| p.count() == 1 << (n - 1)).unwrap_or(false));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut lattice_bad = 0usize;
    for _ in 0..500 {
        let n = rng.gen_range(1..=16);
        let (a, b, c) =
            (random_partition(&mut rng, n)?, random_partition(&mut rng, n)?, random_partition(&mut rng, n)?);
        let (m, j) = (a.meet(&b)?, a.join(&b)?);
        let ok = m == b.meet(&a)?
            && j == b.join(&a)?
            && a.meet(&a)? == a
            && a.meet(&j)? == a
            && a.join(&m)? == a
            && a.meet(&b.meet(&c)?)? == m.meet(&c)?
            && a.join(&b.join(&c)?)? == j.join(&c)?
            && m.is_finer_than(&a)
            && a.is_finer_than(&j);
        if !ok {
            lattice_bad += 1;
        }
    }
    let mut bc1_bad = 0usize;
    for _ in 0..500 {
        if !bc1_round_trip_case(&mut rng, 8)? {
            bc1_bad += 1;
        }
    }
    outcome(
        cardinality && lattice_bad == 0 && bc1_bad == 0,
        format!("|I(n)| = 2^(n-1) for n <= 12: {cardinality}; lattice failures {lattice_bad}/500; round-trip failures {bc1_bad}/500"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 alternating tuple counts", alternating_tuple_counts),
        ("2 oracle equivalence", oracle_equivalence),
        ("3 B-diagonal limit", bdiag_limit),
        ("4 mixed factorization", mixed_factorization),
        ("5 x*x and xx* independent", star_products_independent),
        ("6 cumulants of a product", product_cumulants),
        ("7 self-adjoint limit", selfadjoint_limit),
        ("8 partial transpose", partial_transpose),
        ("9 structural", structural),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {detail} [{:.1}s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
