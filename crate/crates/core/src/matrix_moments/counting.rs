//! Counting index tuples `i ∈ [N]^n` by the partition `ι(ξ, i)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{iota_permuted_raw, iota_raw, IntervalPartition, Sign, SignPattern};
use crate::permutations::PermutationSpec;

/// Default cap on the number of tuples a brute-force enumeration visits.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "BOOLEAN_RMT_BUDGET";

/// The budget from the environment, or [`DEFAULT_BUDGET`].
pub fn default_budget() -> u128 {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    Brute,
    Blockwise,
    ClosedForm,
}

/// `#{i ∈ [N]^n : ι(ξ, i) = σ}` with the method that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountResult {
    pub sigma: IntervalPartition,
    pub xi: SignPattern,
    #[serde(rename = "N")]
    pub size: usize,
    pub count: u128,
    pub method: CountMethod,
}

/// `size^n`, failing when it exceeds `budget`.
pub fn check_budget(n: usize, size: usize, budget: u128) -> Result<u128> {
    let required = u32::try_from(n).ok().and_then(|e| (size as u128).checked_pow(e)).unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(required)
}

/// Calls `f` on every tuple of `[size]^n` in lexicographic order.
pub fn for_each_tuple(n: usize, size: usize, budget: u128, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if n == 0 || size == 0 {
        return Err(Error::Empty("index range"));
    }
    check_budget(n, size, budget)?;
    let mut idx = vec![0usize; n];
    loop {
        f(&idx)?;
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < size {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn check_sigma(sigma: &IntervalPartition, xi: &SignPattern) -> Result<()> {
    if sigma.n() != xi.len() {
        return Err(Error::SizeMismatch { expected: xi.len(), actual: sigma.n() });
    }
    Ok(())
}

/// How many tuples produce each `ι(ξ, i)`.
pub fn iota_histogram(xi: &SignPattern, size: usize, budget: u128) -> Result<BTreeMap<IntervalPartition, u128>> {
    let mut hist = BTreeMap::new();
    for_each_tuple(xi.len(), size, budget, |i| {
        *hist.entry(iota_raw(xi.signs(), i)).or_insert(0) += 1;
        Ok(())
    })?;
    Ok(hist)
}

/// How many tuples produce each `ι(α, ξ, i)`.
pub fn iota_histogram_permuted(
    alphas: &[&PermutationSpec],
    xi: &SignPattern,
    budget: u128,
) -> Result<BTreeMap<IntervalPartition, u128>> {
    let n = xi.len();
    if alphas.len() != n {
        return Err(Error::SizeMismatch { expected: n, actual: alphas.len() });
    }
    let size = alphas[0].size();
    if let Some(bad) = alphas.iter().find(|a| a.size() != size) {
        return Err(Error::SizeMismatch { expected: size, actual: bad.size() });
    }
    let mut hist = BTreeMap::new();
    for_each_tuple(n, size, budget, |i| {
        *hist.entry(iota_permuted_raw(alphas, xi.signs(), i)).or_insert(0) += 1;
        Ok(())
    })?;
    Ok(hist)
}

/// Exhaustive count over `[N]^n`.
pub fn count_tuples_brute(
    sigma: &IntervalPartition,
    xi: &SignPattern,
    size: usize,
    budget: u128,
) -> Result<CountResult> {
    check_sigma(sigma, xi)?;
    let mut count = 0u128;
    for_each_tuple(xi.len(), size, budget, |i| {
        if iota_raw(xi.signs(), i) == *sigma {
            count += 1;
        }
        Ok(())
    })?;
    Ok(CountResult { sigma: sigma.clone(), xi: xi.clone(), size, count, method: CountMethod::Brute })
}

/// Exhaustive count of `#{i : ι(α, ξ, i) = σ}`.
pub fn count_tuples_brute_permuted(
    sigma: &IntervalPartition,
    alphas: &[&PermutationSpec],
    xi: &SignPattern,
    budget: u128,
) -> Result<CountResult> {
    check_sigma(sigma, xi)?;
    let hist = iota_histogram_permuted(alphas, xi, budget)?;
    Ok(CountResult {
        sigma: sigma.clone(),
        xi: xi.clone(),
        size: alphas[0].size(),
        count: hist.get(sigma).copied().unwrap_or(0),
        method: CountMethod::Brute,
    })
}

/// Whether the pair constraint between positions `s` and `s+1` holds for
/// indices `(a, b, c) = (i_s, i_{s+1}, i_{s+2})`: equal pairs need `a = c`
/// when the signs differ and `a = b = c` when they agree.
fn pairs_equal(xi_s: Sign, xi_next: Sign, a: u8, b: u8, c: u8) -> bool {
    if xi_s != xi_next {
        a == c
    } else {
        a == b && b == c
    }
}

/// Relabels a triple by first appearance.
fn canonical(t: [u8; 3]) -> [u8; 3] {
    let mut map: Vec<u8> = Vec::with_capacity(3);
    t.map(|v| match map.iter().position(|&m| m == v) {
        Some(k) => k as u8,
        None => {
            map.push(v);
            (map.len() - 1) as u8
        }
    })
}

/// Exact count by propagating the pair constraints left to right.
///
/// The state after placing `i_1, ..., i_t` is the equality pattern of
/// `(i_1, i_{t-1}, i_t)`: the constraint between positions `t-1` and `t`
/// needs the last two, and the closing constraint needs `i_1`. A fresh
/// value differs from every tracked one and has `N - #classes` choices.
pub fn count_tuples_blockwise(sigma: &IntervalPartition, xi: &SignPattern, size: usize) -> Result<CountResult> {
    check_sigma(sigma, xi)?;
    if size == 0 {
        return Err(Error::Empty("index range"));
    }
    let n = xi.len();
    let signs = xi.signs();
    // need_equal[s] for 1 <= s <= n-1: positions s and s+1 share a block
    let mut need_equal = vec![true; n];
    for &e in sigma.internal_endpoints() {
        need_equal[e] = false;
    }
    let mut states: BTreeMap<[u8; 3], u128> = BTreeMap::from([([0, 0, 0], size as u128)]);
    for t in 1..n {
        let mut next: BTreeMap<[u8; 3], u128> = BTreeMap::new();
        for (st, w) in &states {
            let classes = *st.iter().max().expect("three entries") + 1;
            let mut options: Vec<(u8, u128)> = (0..classes).map(|c| (c, 1)).collect();
            if let Some(fresh) = size.checked_sub(classes as usize).filter(|&f| f > 0) {
                options.push((classes, fresh as u128));
            }
            for (v, mult) in options {
                // constraint s = t - 1 (1-based) on (i_{t-1}, i_t, i_{t+1})
                if t >= 2 && pairs_equal(signs[t - 2], signs[t - 1], st[1], st[2], v) != need_equal[t - 1] {
                    continue;
                }
                let weight = w.checked_mul(mult).ok_or(Error::Overflow)?;
                let slot = next.entry(canonical([st[0], st[2], v])).or_insert(0);
                *slot = slot.checked_add(weight).ok_or(Error::Overflow)?;
            }
        }
        states = next;
    }
    let mut count = 0u128;
    for (st, w) in states {
        if n >= 2 && pairs_equal(signs[n - 2], signs[n - 1], st[1], st[2], st[0]) != need_equal[n - 1] {
            continue;
        }
        count = count.checked_add(w).ok_or(Error::Overflow)?;
    }
    Ok(CountResult { sigma: sigma.clone(), xi: xi.clone(), size, count, method: CountMethod::Blockwise })
}

/// `N^2 (N-1)^{r-1}` for a ξ-alternating `σ` with `r` blocks; `None` when
/// `σ` is not ξ-alternating.
pub fn closed_form_count(sigma: &IntervalPartition, xi: &SignPattern, size: usize) -> Result<Option<CountResult>> {
    check_sigma(sigma, xi)?;
    if !sigma.is_xi_alternating(xi) {
        return Ok(None);
    }
    let n = size as u128;
    let r = sigma.num_blocks() as u32;
    let count = n
        .checked_mul(n)
        .and_then(|sq| n.saturating_sub(1).checked_pow(r - 1).and_then(|p| sq.checked_mul(p)))
        .ok_or(Error::Overflow)?;
    Ok(Some(CountResult { sigma: sigma.clone(), xi: xi.clone(), size, count, method: CountMethod::ClosedForm }))
}

/// `N^{#σ}`, the upper bound for any `σ`.
pub fn block_power_bound(sigma: &IntervalPartition, size: usize) -> Result<u128> {
    (size as u128).checked_pow(sigma.num_blocks() as u32).ok_or(Error::Overflow)
}

/// True when every internal block boundary of `σ` separates different
/// signs, `ξ_{l} ≠ ξ_{l+1}` at each internal endpoint `l`.
pub fn boundaries_change_sign(sigma: &IntervalPartition, xi: &SignPattern) -> bool {
    sigma.internal_endpoints().iter().all(|&e| xi.get(e - 1) != xi.get(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{enumerate_alt, enumerate_partitions};

    fn p(s: &str) -> IntervalPartition {
        s.parse().unwrap()
    }

    fn xi(s: &str) -> SignPattern {
        s.parse().unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_tuples_brute(&p("[2]"), &xi("xx*"), 3, DEFAULT_BUDGET).unwrap().count, 9);
        assert_eq!(count_tuples_brute(&p("[2]"), &xi("xx"), 3, DEFAULT_BUDGET).unwrap().count, 3);
        assert_eq!(count_tuples_brute(&p("[2,4]"), &xi("xx*xx*"), 4, DEFAULT_BUDGET).unwrap().count, 48);
        assert_eq!(count_tuples_blockwise(&p("[2,4]"), &xi("xx*xx*"), 4).unwrap().count, 48);
        assert_eq!(closed_form_count(&p("[2,4]"), &xi("xx*xx*"), 4).unwrap().unwrap().count, 48);
        assert!(closed_form_count(&p("[1,2]"), &xi("xx"), 4).unwrap().is_none());
        assert_eq!(count_tuples_blockwise(&p("[1]"), &xi("x*"), 7).unwrap().count, 7);
    }

    #[test]
    fn single_index_counts_are_zero_or_one() {
        for n in 1..=5 {
            for x in SignPattern::all(n) {
                let total: u128 = enumerate_partitions(n)
                    .unwrap()
                    .map(|s| {
                        let c = count_tuples_blockwise(&s, &x, 1).unwrap().count;
                        assert!(c <= 1);
                        c
                    })
                    .sum();
                assert_eq!(total, 1);
            }
        }
    }

    #[test]
    fn blockwise_matches_brute() {
        for n in 1..=5 {
            for x in SignPattern::all(n) {
                for size in 1..=4 {
                    let hist = iota_histogram(&x, size, DEFAULT_BUDGET).unwrap();
                    for s in enumerate_partitions(n).unwrap() {
                        let fast = count_tuples_blockwise(&s, &x, size).unwrap().count;
                        assert_eq!(fast, hist.get(&s).copied().unwrap_or(0), "xi={x} sigma={s} N={size}");
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_when_boundaries_change_sign() {
        for n in 1..=6 {
            for x in SignPattern::all(n) {
                for s in enumerate_alt(&x) {
                    let exact = count_tuples_blockwise(&s, &x, 5).unwrap().count;
                    let closed = closed_form_count(&s, &x, 5).unwrap().unwrap().count;
                    if boundaries_change_sign(&s, &x) {
                        assert_eq!(exact, closed, "xi={x} sigma={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn same_sign_boundary_breaks_closed_form() {
        // (1,*,*,1) split as [2,4]: the two blocks meet with equal signs
        let (s, x) = (p("[2,4]"), xi("xx*x*x"));
        assert!(s.is_xi_alternating(&x));
        for size in 2..=5u128 {
            let exact = count_tuples_brute(&s, &x, size as usize, DEFAULT_BUDGET).unwrap().count;
            assert_eq!(exact, size * size * size - size);
            assert_ne!(exact, size * size * (size - 1));
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            count_tuples_brute(&p("[4]"), &xi("xxxx"), 10, 100),
            Err(Error::BudgetExceeded { required: 10000, budget: 100 })
        ));
        assert!(count_tuples_brute(&p("[4]"), &xi("xxx"), 2, 100).is_err());
    }

    #[test]
    fn permuted_identity_reduces_to_plain() {
        let e = PermutationSpec::identity(3).unwrap();
        let x = xi("xx*xx*");
        let alphas = vec![&e; 4];
        let plain = iota_histogram(&x, 3, DEFAULT_BUDGET).unwrap();
        assert_eq!(iota_histogram_permuted(&alphas, &x, DEFAULT_BUDGET).unwrap(), plain);
        let c = count_tuples_brute_permuted(&p("[2,4]"), &alphas, &x, DEFAULT_BUDGET).unwrap();
        assert_eq!(c.count, plain[&p("[2,4]")]);
    }
}
