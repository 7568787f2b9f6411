//! Exact finite-`N` trace moments of matrices with Boolean independent
//! entries, and their `N → ∞` limits.
//!
//! For a word `X(k_1)^{ξ_1} ⋯ X(k_n)^{ξ_n}`,
//! `φ∘tr = (1/N) Σ_{i ∈ [N]^n} φ(x_1 ⋯ x_n)` where position `s` carries the
//! entry `(i_s, i_{s+1})^{ξ_s}` of matrix `k_s` (indices cyclic). Distinct
//! entries are Boolean independent, so the inner moment factors over the
//! maximal runs of a repeated entry.

pub mod counting;
pub mod limits;
pub mod selfadjoint;

use std::collections::BTreeMap;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::boolean_model::{boolean_product_with, EntryModel, EntrySite};
use crate::error::{Error, Result};
use crate::partitions::{enumerate_partitions, omega_of_labels, IntervalPartition, LabelTuple, Sign, SignPattern};
use crate::permutations::PermutationSpec;
use crate::scalar::{format_scalar, int, to_f64, Scalar};

pub use counting::{
    block_power_bound, boundaries_change_sign, check_budget, closed_form_count, count_tuples_blockwise,
    count_tuples_brute, count_tuples_brute_permuted, default_budget, iota_histogram, iota_histogram_permuted,
    CountMethod, CountResult, DEFAULT_BUDGET,
};
pub use limits::{limit_bdiag, limit_mixed, limit_mixed_factorized, limit_permuted, limit_selfadjoint};
pub use selfadjoint::{trace_moment_selfadjoint_exact, SelfAdjointMethod};

/// A word in one or more matrices: the matrix label and sign at every
/// position, an entry model per label, and optionally an entry permutation
/// at every position.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedWordSpec {
    labels: LabelTuple,
    xi: SignPattern,
    models: BTreeMap<usize, EntryModel>,
    permutations: Option<Vec<PermutationSpec>>,
}

impl MixedWordSpec {
    pub fn new(labels: LabelTuple, xi: SignPattern, models: BTreeMap<usize, EntryModel>) -> Result<Self> {
        if labels.len() != xi.len() {
            return Err(Error::SizeMismatch { expected: xi.len(), actual: labels.len() });
        }
        if let Some(k) = labels.labels().iter().find(|k| !models.contains_key(k)) {
            return Err(Error::MissingModel(k.to_string()));
        }
        Ok(Self { labels, xi, models, permutations: None })
    }

    /// One matrix with model `model`.
    pub fn single(xi: SignPattern, model: EntryModel) -> Self {
        let labels = LabelTuple::constant(0, xi.len()).expect("sign patterns are nonempty");
        Self { labels, xi, models: BTreeMap::from([(0, model)]), permutations: None }
    }

    /// Decorates position `s` with `perms[s]`; all must share one grid side.
    pub fn with_permutations(mut self, perms: Vec<PermutationSpec>) -> Result<Self> {
        if perms.len() != self.xi.len() {
            return Err(Error::SizeMismatch { expected: self.xi.len(), actual: perms.len() });
        }
        if let Some(bad) = perms.iter().find(|p| p.size() != perms[0].size()) {
            return Err(Error::SizeMismatch { expected: perms[0].size(), actual: bad.size() });
        }
        self.permutations = Some(perms);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn labels(&self) -> &LabelTuple {
        &self.labels
    }

    pub fn xi(&self) -> &SignPattern {
        &self.xi
    }

    pub fn models(&self) -> &BTreeMap<usize, EntryModel> {
        &self.models
    }

    pub fn model(&self, label: usize) -> Result<&EntryModel> {
        self.models.get(&label).ok_or_else(|| Error::MissingModel(label.to_string()))
    }

    pub fn permutations(&self) -> Option<&[PermutationSpec]> {
        self.permutations.as_deref()
    }

    /// Text form: the sign pattern, with labels appended when there are
    /// several matrices.
    pub fn describe(&self) -> String {
        let labels = self.labels.labels();
        if labels.iter().all(|&k| k == labels[0]) {
            self.xi.to_string()
        } else {
            let ks: Vec<String> = labels.iter().map(|k| k.to_string()).collect();
            format!("{} @ {}", self.xi, ks.join(","))
        }
    }

    fn check_size(&self, size: usize) -> Result<()> {
        if size == 0 {
            return Err(Error::Precondition("matrix size must be positive".into()));
        }
        if self.models.values().any(|m| m.is_selfadjoint()) {
            return Err(Error::InvalidModel(
                "self-adjoint models are evaluated with trace_moment_selfadjoint_exact".into(),
            ));
        }
        if let Some(perms) = &self.permutations {
            if perms[0].size() != size {
                return Err(Error::SizeMismatch { expected: size, actual: perms[0].size() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    /// Sum over every index tuple.
    Brute,
    /// Sum over interval partitions weighted by tuple counts.
    Partition,
}

impl FromStr for TraceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(TraceMethod::Brute),
            "partition" => Ok(TraceMethod::Partition),
            _ => Err(Error::Parse(format!("unknown method {s:?}, expected brute or partition"))),
        }
    }
}

/// Exact `φ∘tr` of the word at matrix size `size`.
pub fn trace_moment_exact(spec: &MixedWordSpec, size: usize, method: TraceMethod, budget: u128) -> Result<Scalar> {
    spec.check_size(size)?;
    match method {
        TraceMethod::Brute => trace_brute(spec, size, budget),
        TraceMethod::Partition => trace_partition(spec, size, budget),
    }
}

fn trace_brute(spec: &MixedWordSpec, size: usize, budget: u128) -> Result<Scalar> {
    let n = spec.n();
    let labels = spec.labels.labels();
    let signs = spec.xi.signs();
    let mut run_cache: BTreeMap<(usize, Vec<Sign>), Scalar> = BTreeMap::new();
    let mut total = Scalar::zero();
    let mut word: Vec<(TaggedEntry, Sign)> = Vec::with_capacity(n);
    counting::for_each_tuple(n, size, budget, |i| {
        word.clear();
        for s in 0..n {
            let mut pair = signs[s].orient(i[s], i[(s + 1) % n]);
            if let Some(perms) = &spec.permutations {
                pair = perms[s].apply(pair.0, pair.1);
            }
            word.push(((labels[s], pair), signs[s]));
        }
        let v = boolean_product_with(&word, |(label, _), run| {
            let key = (*label, run.to_vec());
            if let Some(v) = run_cache.get(&key) {
                return Ok(v.clone());
            }
            let v = spec.model(*label)?.entry_word_moment(run, EntrySite::OffDiagonal, size)?;
            run_cache.insert(key, v.clone());
            Ok(v)
        })?;
        total += v;
        Ok(())
    })?;
    Ok(total / int(size as i64))
}

/// Product of the single-entry run moments over the blocks of `tau`.
fn block_product(spec: &MixedWordSpec, tau: &IntervalPartition, size: usize) -> Result<Scalar> {
    let signs = spec.xi.signs();
    let labels = spec.labels.labels();
    let mut v = Scalar::one();
    for b in tau.blocks() {
        v *= spec.model(labels[b.start])?.entry_word_moment(&signs[b], EntrySite::OffDiagonal, size)?;
        if v.is_zero() {
            break;
        }
    }
    Ok(v)
}

fn trace_partition(spec: &MixedWordSpec, size: usize, budget: u128) -> Result<Scalar> {
    let omega = omega_of_labels(&spec.labels);
    let mut total = Scalar::zero();
    match &spec.permutations {
        None => {
            for sigma in enumerate_partitions(spec.n())? {
                let v = block_product(spec, &sigma.meet(&omega)?, size)?;
                if v.is_zero() {
                    continue;
                }
                let c = count_tuples_blockwise(&sigma, &spec.xi, size)?.count;
                total += v * Scalar::from_integer(c.into());
            }
        }
        Some(perms) => {
            let alphas: Vec<&PermutationSpec> = perms.iter().collect();
            for (sigma, c) in iota_histogram_permuted(&alphas, &spec.xi, budget)? {
                let v = block_product(spec, &sigma.meet(&omega)?, size)?;
                total += v * Scalar::from_integer(c.into());
            }
        }
    }
    Ok(total / int(size as i64))
}

/// A matrix label together with the entry position it reads.
type TaggedEntry = (usize, (usize, usize));

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRecord {
    pub word: String,
    #[serde(rename = "N")]
    pub size: usize,
    #[serde(with = "crate::scalar::serde_text")]
    pub exact: Scalar,
    #[serde(with = "crate::scalar::serde_text")]
    pub limit: Scalar,
    pub abs_error: f64,
}

impl MomentRecord {
    pub fn new(word: String, size: usize, exact: Scalar, limit: Scalar) -> Self {
        let abs_error = to_f64(&(&exact - &limit)).abs();
        Self { word, size, exact, limit, abs_error }
    }

    pub fn exact_text(&self) -> String {
        format_scalar(&self.exact)
    }
}

/// Exact values of `spec` across `sizes`, against its limit.
pub fn convergence_table(
    spec: &MixedWordSpec,
    sizes: &[usize],
    method: TraceMethod,
    budget: u128,
) -> Result<Vec<MomentRecord>> {
    if sizes.is_empty() {
        return Err(Error::Empty("size sweep"));
    }
    let limit = limit_permuted(spec)?;
    sizes
        .iter()
        .map(|&size| {
            let exact = trace_moment_exact(spec, size, method, budget)?;
            Ok(MomentRecord::new(spec.describe(), size, exact, limit.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn xi(s: &str) -> SignPattern {
        s.parse().unwrap()
    }

    #[test]
    fn single_pair_is_exact_for_every_size() {
        let spec = MixedWordSpec::single(xi("xx*"), EntryModel::bdiag(vec![int(3)], vec![int(1)]));
        for size in 1..=5 {
            for method in [TraceMethod::Brute, TraceMethod::Partition] {
                assert_eq!(trace_moment_exact(&spec, size, method, DEFAULT_BUDGET).unwrap(), int(3));
            }
        }
    }

    #[test]
    fn fourth_moment_finite_size() {
        let spec = MixedWordSpec::single(xi("xx*xx*"), EntryModel::bdiag(vec![int(2)], vec![int(5)]));
        for size in 1..=5 {
            let expected = int(4) * ratio(size as i64 - 1, size as i64);
            assert_eq!(trace_moment_exact(&spec, size, TraceMethod::Brute, DEFAULT_BUDGET).unwrap(), expected);
            assert_eq!(trace_moment_exact(&spec, size, TraceMethod::Partition, DEFAULT_BUDGET).unwrap(), expected);
        }
    }

    #[test]
    fn methods_agree_on_mixed_words() {
        let models = BTreeMap::from([
            (0, EntryModel::bdiag(vec![int(2), ratio(1, 3)], vec![int(-1), int(4)])),
            (1, EntryModel::bdiag(vec![ratio(5, 2)], vec![int(3), int(1)])),
        ]);
        for labels in [[0, 0, 1, 1], [0, 1, 1, 0], [1, 0, 1, 0]] {
            for x in SignPattern::all(4) {
                let spec = MixedWordSpec::new(LabelTuple::new(labels.to_vec()).unwrap(), x, models.clone()).unwrap();
                for size in 1..=4 {
                    let a = trace_moment_exact(&spec, size, TraceMethod::Brute, DEFAULT_BUDGET).unwrap();
                    let b = trace_moment_exact(&spec, size, TraceMethod::Partition, DEFAULT_BUDGET).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn identity_decoration_changes_nothing() {
        let spec = MixedWordSpec::single(xi("xx*xxx*"), EntryModel::bdiag(vec![int(1), int(2)], vec![int(3)]));
        for size in 1..=4 {
            let plain = trace_moment_exact(&spec, size, TraceMethod::Brute, DEFAULT_BUDGET).unwrap();
            let e = PermutationSpec::identity(size).unwrap();
            let decorated = spec.clone().with_permutations(vec![e; 5]).unwrap();
            assert_eq!(trace_moment_exact(&decorated, size, TraceMethod::Brute, DEFAULT_BUDGET).unwrap(), plain);
            assert_eq!(trace_moment_exact(&decorated, size, TraceMethod::Partition, DEFAULT_BUDGET).unwrap(), plain);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let model = EntryModel::bdiag(vec![int(1)], vec![int(1)]);
        let spec = MixedWordSpec::single(xi("xx*"), model.clone());
        assert!(trace_moment_exact(&spec, 0, TraceMethod::Brute, DEFAULT_BUDGET).is_err());
        assert!(matches!(trace_moment_exact(&spec, 100, TraceMethod::Brute, 1000), Err(Error::BudgetExceeded { .. })));
        let sa = MixedWordSpec::single(xi("xx*"), EntryModel::selfadjoint(int(1), int(1)));
        assert!(trace_moment_exact(&sa, 2, TraceMethod::Brute, DEFAULT_BUDGET).is_err());
        let labels = LabelTuple::new(vec![0, 1]).unwrap();
        assert!(MixedWordSpec::new(labels, xi("xx*"), BTreeMap::from([(0, model.clone())])).is_err());
        let e = PermutationSpec::identity(3).unwrap();
        let decorated = spec.with_permutations(vec![e.clone(), e]).unwrap();
        assert!(trace_moment_exact(&decorated, 4, TraceMethod::Brute, DEFAULT_BUDGET).is_err());
        assert!("fast".parse::<TraceMethod>().is_err());
    }

    #[test]
    fn record_json() {
        let r = MomentRecord::new("xx*xx*".into(), 4, ratio(3, 4), int(1));
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(text, r#"{"word":"xx*xx*","N":4,"exact":"3/4","limit":"1","abs_error":0.25}"#);
    }
}
