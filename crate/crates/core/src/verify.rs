//! Named self-check suites that exercise the identities of the crate
//! against independent computations.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::boolean_model::{product_of_boolean_letters_law, EntryModel};
use crate::cumulants::{
    check_boolean_independence, cumulant_table, cumulants_from_moments, is_star_one_alternating,
    moments_from_cumulants, verify_prop_b_part_i, word_signs, Alphabet, BDiagonalLaw, ComputedFunctional, WordFunction,
    WordTable,
};
use crate::error::{Error, Result};
use crate::matrix_moments::{
    block_power_bound, boundaries_change_sign, closed_form_count, count_tuples_blockwise, iota_histogram, limit_mixed,
    limit_mixed_factorized, limit_selfadjoint, trace_moment_exact, trace_moment_selfadjoint_exact, MixedWordSpec,
    SelfAdjointMethod, TraceMethod,
};
use crate::partitions::{enumerate_partitions, IntervalPartition, LabelTuple, Sign, SignPattern};
use crate::permutations::{
    fixed_row_or_col_set, partial_transpose_cross_moment, row_col_condition_count, theta_condition_count,
    PartialTransposeSpec, PermutationSpec,
};
use crate::scalar::{format_scalar, int, ratio, to_f64, Scalar};

/// Every suite name accepted by [`run_suite`].
pub const SUITES: &[&str] =
    &["lattice", "bc1", "counting", "oracle", "prop-b", "prop-b-ii", "factorization", "consequence", "selfadjoint"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Observations that are reported but not asserted.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        Self { suite: suite.to_string(), passed: true, checks: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(f, "{} {}", self.suite, if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Parameters shared by the suites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Largest word length or ground-set size.
    pub n_max: usize,
    /// Largest matrix size.
    pub size_max: usize,
    /// Largest moment order for cumulant checks.
    pub order: usize,
    /// Number of randomized cases.
    pub cases: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { n_max: 6, size_max: 5, order: 8, cases: 100, seed: 0 }
    }
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Result<SuiteReport> {
    match name {
        "lattice" => lattice(opts),
        "bc1" => bc1(opts),
        "counting" => counting(opts),
        "oracle" => oracle(opts),
        "prop-b" => prop_b(opts),
        "prop-b-ii" => prop_b_ii(opts),
        "factorization" => factorization(opts),
        "consequence" => consequence(opts),
        "selfadjoint" => selfadjoint(opts),
        _ => Err(Error::Parse(format!("unknown suite {name:?}; available: {}", SUITES.join(", ")))),
    }
}

/// A small random rational `p/q` with `|p| <= 9`, `1 <= q <= 5`.
pub fn random_scalar(rng: &mut impl Rng) -> Scalar {
    ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5))
}

/// Determining sequences with `terms` random entries, padded to `max_order`.
pub fn random_law(rng: &mut impl Rng, terms: usize, max_order: usize) -> Result<BDiagonalLaw> {
    let alpha = (0..terms).map(|_| random_scalar(rng)).collect();
    let beta = (0..terms).map(|_| random_scalar(rng)).collect();
    BDiagonalLaw::with_max_order(alpha, beta, max_order.max(terms))
}

pub fn random_partition(rng: &mut impl Rng, n: usize) -> Result<IntervalPartition> {
    let mask = if n <= 1 { 0 } else { rng.gen_range(0..1u64 << (n - 1)) };
    IntervalPartition::from_cut_mask(n, mask)
}

pub fn random_signs(rng: &mut impl Rng, n: usize) -> Result<SignPattern> {
    SignPattern::new((0..n).map(|_| if rng.gen_bool(0.5) { Sign::One } else { Sign::Star }).collect())
}

/// A random bijection of `[size]^2` from a shuffled table.
pub fn random_permutation(rng: &mut impl Rng, size: usize) -> Result<PermutationSpec> {
    let mut cells: Vec<(usize, usize)> = (0..size).flat_map(|i| (0..size).map(move |j| (i, j))).collect();
    cells.shuffle(rng);
    let rows: Vec<_> = (0..size).flat_map(|i| (0..size).map(move |j| (i, j))).zip(cells).collect();
    PermutationSpec::from_pairs(size, &rows)
}

/// A random word spec over at most two matrices with bdiag entry models.
pub fn random_mixed_spec(rng: &mut impl Rng, n: usize) -> Result<MixedWordSpec> {
    let labels = LabelTuple::new((0..n).map(|_| rng.gen_range(0..2)).collect())?;
    let models: BTreeMap<usize, EntryModel> = (0..2)
        .map(|k| {
            let a = (0..3).map(|_| random_scalar(rng)).collect();
            let b = (0..3).map(|_| random_scalar(rng)).collect();
            (k, EntryModel::bdiag(a, b))
        })
        .collect();
    MixedWordSpec::new(labels, random_signs(rng, n)?, models)
}

fn lattice(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("lattice");
    let counts_ok = (1..=12).all(|n| enumerate_partitions(n).map(|p| p.count() == 1 << (n - 1)).unwrap_or(false));
    r.check("cardinality", counts_ok, "|I(n)| = 2^(n-1) for n <= 12");
    let n_max = opts.n_max.clamp(1, 8);
    let mut failures = 0usize;
    let mut pairs = 0usize;
    for n in 1..=n_max {
        let all: Vec<_> = enumerate_partitions(n)?.collect();
        let top = IntervalPartition::one(n)?;
        let bottom = IntervalPartition::zero(n)?;
        for a in &all {
            for b in &all {
                pairs += 1;
                let (m, j) = (a.meet(b)?, a.join(b)?);
                let ok = m == b.meet(a)?
                    && j == b.join(a)?
                    && a.meet(a)? == *a
                    && a.join(a)? == *a
                    && a.meet(&j)? == *a
                    && a.join(&m)? == *a
                    && m.is_finer_than(a)
                    && m.is_finer_than(b)
                    && a.is_finer_than(&j)
                    && b.is_finer_than(&j)
                    && a.is_finer_than(&top)
                    && bottom.is_finer_than(a);
                if !ok {
                    failures += 1;
                }
            }
        }
    }
    r.check("lattice laws", failures == 0, format!("{pairs} pairs for n <= {n_max}, {failures} failures"));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut bad = 0usize;
    for _ in 0..opts.cases {
        let n = rng.gen_range(1..=16);
        let (a, b, c) =
            (random_partition(&mut rng, n)?, random_partition(&mut rng, n)?, random_partition(&mut rng, n)?);
        let ok = a.meet(&b.meet(&c)?)? == a.meet(&b)?.meet(&c)?
            && a.join(&b.join(&c)?)? == a.join(&b)?.join(&c)?
            && a.meet(&a.join(&b)?)? == a
            && a.juxtapose(&b.juxtapose(&c)) == a.juxtapose(&b).juxtapose(&c);
        if !ok {
            bad += 1;
        }
    }
    r.check("random associativity", bad == 0, format!("{} random triples, {bad} failures", opts.cases));
    Ok(r)
}

fn random_cumulant_table(rng: &mut impl Rng, order: usize) -> Result<WordTable> {
    let mut c = WordTable::new(Alphabet::star_pair("x", "x"), order);
    for w in Alphabet::star_pair("x", "x").words_up_to(order) {
        if rng.gen_bool(0.7) {
            c.insert(w, random_scalar(rng))?;
        }
    }
    Ok(c)
}

/// Round trip `cumulants → moments → cumulants` on one random word.
pub fn bc1_round_trip_case(rng: &mut impl Rng, order: usize) -> Result<bool> {
    let c = random_cumulant_table(rng, order)?;
    let n = rng.gen_range(1..=order);
    let w: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
    let m = ComputedFunctional::new(c.alphabet().clone(), order, |u: &[usize]| moments_from_cumulants(&c, u));
    Ok(cumulants_from_moments(&m, &w)? == c.value(&w)?)
}

fn bc1(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("bc1");
    let order = opts.order.clamp(1, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut bad = 0usize;
    for _ in 0..opts.cases {
        if !bc1_round_trip_case(&mut rng, order)? {
            bad += 1;
        }
    }
    r.check("round trip", bad == 0, format!("{} random words up to order {order}, {bad} failures", opts.cases));
    Ok(r)
}

fn counting(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("counting");
    let (n_max, size_max) = (opts.n_max.clamp(1, 8), opts.size_max.max(1));
    let budget = crate::matrix_moments::default_budget();
    let (mut compared, mut mismatches, mut bound_violations) = (0usize, 0usize, 0usize);
    let (mut closed_checked, mut closed_failures, mut deviations) = (0usize, 0usize, 0usize);
    for n in 1..=n_max {
        for xi in SignPattern::all(n) {
            for size in 1..=size_max {
                let hist = iota_histogram(&xi, size, budget)?;
                for sigma in enumerate_partitions(n)? {
                    let brute = hist.get(&sigma).copied().unwrap_or(0);
                    compared += 1;
                    if count_tuples_blockwise(&sigma, &xi, size)?.count != brute {
                        mismatches += 1;
                    }
                    match closed_form_count(&sigma, &xi, size)? {
                        None => {
                            if brute > block_power_bound(&sigma, size)? {
                                bound_violations += 1;
                            }
                        }
                        Some(closed) if boundaries_change_sign(&sigma, &xi) => {
                            closed_checked += 1;
                            if closed.count != brute {
                                closed_failures += 1;
                            }
                        }
                        Some(closed) => {
                            if closed.count != brute {
                                deviations += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    r.check(
        "blockwise = brute",
        mismatches == 0,
        format!("{compared} counts (n <= {n_max}, N <= {size_max}), {mismatches} mismatches"),
    );
    r.check("bound off alternation", bound_violations == 0, format!("{bound_violations} counts above N^#sigma"));
    r.check(
        "closed form, sign-changing boundaries",
        closed_failures == 0,
        format!("{closed_checked} counts equal to N^2 (N-1)^(r-1), {closed_failures} failures"),
    );
    r.notes
        .push(format!("{deviations} alternating counts with a same-sign block boundary differ from N^2 (N-1)^(r-1)"));
    Ok(r)
}

fn oracle(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("oracle");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let budget = crate::matrix_moments::default_budget();
    let (mut bad, mut decorated) = (0usize, 0usize);
    for _ in 0..opts.cases {
        let n = rng.gen_range(1..=opts.n_max.clamp(1, 6));
        let size = rng.gen_range(1..=opts.size_max.clamp(1, 6));
        let mut spec = random_mixed_spec(&mut rng, n)?;
        if rng.gen_bool(0.3) {
            decorated += 1;
            let perms = (0..n)
                .map(|_| match rng.gen_range(0..3) {
                    0 => PermutationSpec::identity(size),
                    1 => PermutationSpec::transpose(size),
                    _ => random_permutation(&mut rng, size),
                })
                .collect::<Result<Vec<_>>>()?;
            spec = spec.with_permutations(perms)?;
        }
        let a = trace_moment_exact(&spec, size, TraceMethod::Brute, budget)?;
        let b = trace_moment_exact(&spec, size, TraceMethod::Partition, budget)?;
        if a != b {
            bad += 1;
        }
    }
    r.check(
        "brute = partition",
        bad == 0,
        format!("{} random words ({decorated} with permuted entries), {bad} mismatches", opts.cases),
    );
    Ok(r)
}

fn prop_b(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("prop-b");
    let order = opts.order.clamp(1, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let law = random_law(&mut rng, 5, order)?;
    let uv = law.star_products_law();
    let report = check_boolean_independence(&uv, &uv.alphabet().groups_by_tag(), order)?;
    r.check("x*x and xx* independent", report.is_independent(), report.to_string());
    let mut bad = 0usize;
    let mut cases = 0usize;
    for p in 1..=4 {
        for m in 1..=(5 - p) {
            for tail in SignPattern::all(m) {
                cases += 1;
                if !verify_prop_b_part_i(&law.extended(6), p, &tail)? {
                    bad += 1;
                }
            }
        }
    }
    r.check("head factorization", bad == 0, format!("{cases} (p, tail) with p + m <= 5, {bad} failures"));
    Ok(r)
}

/// Random centered `{a, a*}` and arbitrary `{b, b*}` tables on words of
/// length at most 2.
pub fn random_product_factors(rng: &mut impl Rng) -> Result<(WordTable, WordTable)> {
    let mut a = WordTable::new(Alphabet::star_pair("a", "a"), 2);
    let mut b = WordTable::new(Alphabet::star_pair("b", "b"), 2);
    for w in Alphabet::star_pair("a", "a").words(2) {
        a.insert(w, random_scalar(rng))?;
    }
    for w in Alphabet::star_pair("b", "b").words_up_to(2) {
        b.insert(w, random_scalar(rng))?;
    }
    Ok((a, b))
}

/// Sign patterns carrying a nonzero cumulant of `Y = ab` other than
/// `(*, 1)^k`.
pub fn prop_b_ii_violations(a: &dyn WordFunction, b: &dyn WordFunction, order: usize) -> Result<Vec<String>> {
    let y = product_of_boolean_letters_law(a, b, order)?;
    let c = cumulant_table(&y, order)?;
    let mut out = Vec::new();
    for (w, v) in c.entries() {
        let xi = word_signs(w)?;
        if !is_star_one_alternating(&xi) {
            out.push(format!("b({xi}) = {}", format_scalar(v)));
        }
    }
    Ok(out)
}

fn prop_b_ii(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("prop-b-ii");
    let order = opts.order.clamp(1, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let trials = opts.cases.clamp(1, 10);
    let mut bad = Vec::new();
    for _ in 0..trials {
        let (a, b) = random_product_factors(&mut rng)?;
        bad.extend(prop_b_ii_violations(&a, &b, order)?);
    }
    r.check(
        "cumulants of ab",
        bad.is_empty(),
        format!(
            "{trials} random factor pairs up to order {order}, {} stray cumulants{}",
            bad.len(),
            bad.first().map(|s| format!("; first {s}")).unwrap_or_default()
        ),
    );
    Ok(r)
}

/// Checks `limit_mixed = limit_mixed_factorized` on every label tuple over
/// `labels` letters and every sign pattern, for lengths up to `n_max`.
/// Returns `(cases, failures)`.
pub fn factorization_sweep(laws: &BTreeMap<usize, BDiagonalLaw>, n_max: usize) -> Result<(usize, usize)> {
    let k = laws.len();
    let keys: Vec<usize> = laws.keys().copied().collect();
    let (mut cases, mut bad) = (0usize, 0usize);
    for n in 1..=n_max {
        let patterns: Vec<SignPattern> = SignPattern::all(n).collect();
        for code in 0..k.pow(n as u32) {
            let labels = LabelTuple::new((0..n).map(|s| keys[code / k.pow(s as u32) % k]).collect())?;
            for xi in &patterns {
                cases += 1;
                if limit_mixed(&labels, xi, laws)? != limit_mixed_factorized(&labels, xi, laws)? {
                    bad += 1;
                }
            }
        }
    }
    Ok((cases, bad))
}

fn factorization(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("factorization");
    let n_max = opts.n_max.clamp(1, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let laws: BTreeMap<usize, BDiagonalLaw> =
        (1..=3).map(|k| Ok((k, random_law(&mut rng, 4, 4)?))).collect::<Result<_>>()?;
    let (cases, bad) = factorization_sweep(&laws, n_max)?;
    r.check(
        "mixed limit = product over label runs",
        bad == 0,
        format!("{cases} words, 3 labels, n <= {n_max}, {bad} failures"),
    );
    Ok(r)
}

/// `φ∘tr(X* · X^{Γ,m})` at size `mn`, by the requested method.
pub fn cross_moment_by_trace(beta: &Scalar, m: usize, n: usize, method: TraceMethod) -> Result<Scalar> {
    let spec = PartialTransposeSpec::new(m, n)?;
    let size = spec.size();
    let xi: SignPattern = "x*x".parse()?;
    let word = MixedWordSpec::single(xi, EntryModel::bdiag(vec![int(1)], vec![beta.clone()]))
        .with_permutations(vec![PermutationSpec::identity(size)?, spec.permutation()])?;
    trace_moment_exact(&word, size, method, crate::matrix_moments::default_budget())
}

fn consequence(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("consequence");
    let beta = int(2);
    let mut lines = Vec::new();
    let mut ok = true;
    for (m, n) in [(1, 2), (2, 2), (2, 3), (3, 2), (1, 4), (2, 4)] {
        let closed = partial_transpose_cross_moment(&beta, m, n)?;
        let brute = cross_moment_by_trace(&beta, m, n, TraceMethod::Brute)?;
        let part = cross_moment_by_trace(&beta, m, n, TraceMethod::Partition)?;
        ok &= closed == brute && closed == part && closed == &beta / int(n as i64);
        lines.push(format!("(m,n)=({m},{n}): {}", format_scalar(&closed)));
    }
    r.check("cross moment = beta/n", ok, lines.join(", "));
    let mut delta_ok = true;
    for m in 1..=3 {
        for n in 1..=4 {
            let spec = PartialTransposeSpec::new(m, n)?;
            delta_ok &=
                fixed_row_or_col_set(&spec.permutation()) == spec.delta_set() && spec.delta_set().len() == n * m * m;
        }
    }
    r.check("row/column-fixing cells = block diagonals", delta_ok, "m <= 3, n <= 4");
    let sizes: Vec<usize> = (1..=opts.n_max.clamp(2, 6)).map(|k| 1 << k).collect();
    let ratios: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let p = PermutationSpec::partial_transpose(2, n)?;
            Ok(row_col_condition_count(&p) as f64 / ((2 * n) as f64).powi(2))
        })
        .collect::<Result<_>>()?;
    r.check(
        "partial transpose row/column count / N^2 decreases in n",
        ratios.windows(2).all(|w| w[1] < w[0]),
        format!(
            "m = 2, n in {sizes:?}: {:?}",
            ratios.iter().map(|x| crate::scalar::format_float(*x)).collect::<Vec<_>>()
        ),
    );
    let t = PermutationSpec::transpose(32)?;
    let tr = theta_condition_count(&t) as f64 / 1024.0;
    r.check(
        "transpose count / N^2 stays near 2",
        (tr - 2.0).abs() < 0.05,
        format!("N = 32: {}", crate::scalar::format_float(tr)),
    );
    Ok(r)
}

fn selfadjoint(opts: &VerifyOptions) -> Result<SuiteReport> {
    let mut r = SuiteReport::new("selfadjoint");
    let bern = (1..=5).all(|k| limit_selfadjoint(&int(1), &int(1), 2 * k).map(|v| v == int(1)).unwrap_or(false));
    r.check("alpha = beta gives Bernoulli moments", bern, "limit(1, 1, 2r) = 1 for r <= 5");
    let v = limit_selfadjoint(&int(2), &int(1), 4)?;
    r.check("limit(2, 1, 4)", v == ratio(7, 3), format_scalar(&v));
    let budget = crate::matrix_moments::default_budget();
    let model = EntryModel::selfadjoint(ratio(3, 2), ratio(1, 2));
    let mut agree = true;
    for n in 1..=opts.n_max.clamp(1, 6) {
        for size in 1..=opts.size_max.clamp(1, 5) {
            let a = trace_moment_selfadjoint_exact(&model, n, size, SelfAdjointMethod::Brute, budget)?;
            let b = trace_moment_selfadjoint_exact(&model, n, size, SelfAdjointMethod::Closed, budget)?;
            agree &= a == b;
        }
    }
    r.check(
        "row recursion = brute force",
        agree,
        format!("n <= {}, N <= {}", opts.n_max.clamp(1, 6), opts.size_max.clamp(1, 5)),
    );
    let mut worst: f64 = 0.0;
    for (alpha, beta) in [(1, 1), (2, 1), (1, 3)] {
        let m = EntryModel::selfadjoint(int(alpha), int(beta));
        for k in 1..=3 {
            let limit = limit_selfadjoint(&int(alpha), &int(beta), 2 * k)?;
            let bound = (2 * k) as f64 * (alpha.max(beta) as f64).powi(k as i32);
            for size in [10, 20, 40, 80, 160] {
                let exact = trace_moment_selfadjoint_exact(&m, 2 * k, size, SelfAdjointMethod::Closed, budget)?;
                worst = worst.max(size as f64 * to_f64(&(exact - &limit)).abs() / bound);
            }
        }
    }
    r.check(
        "N * error <= 2r max(alpha, beta)^r",
        worst <= 1.0,
        format!("largest N * |error| / bound = {}", crate::scalar::format_float(worst)),
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_with_small_options() {
        let opts = VerifyOptions { n_max: 4, size_max: 3, order: 5, cases: 20, seed: 7 };
        for s in SUITES {
            let rep = run_suite(s, &opts).unwrap();
            assert!(rep.passed, "{rep}");
        }
    }

    #[test]
    fn unknown_suite_lists_names() {
        let err = run_suite("nope", &VerifyOptions::default()).unwrap_err().to_string();
        assert!(err.contains("lattice") && err.contains("selfadjoint"));
    }

    #[test]
    fn random_permutations_are_bijections() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for size in 1..=5 {
            random_permutation(&mut rng, size).unwrap();
        }
    }
}
