//! `N → ∞` limits of trace moments.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::cumulants::BDiagonalLaw;
use crate::error::{Error, Result};
use crate::matrix_moments::MixedWordSpec;
use crate::partitions::{enumerate_alt_permuted, omega_of_labels, IntervalPartition, LabelTuple, Sign, SignPattern};
use crate::permutations::PermutationSpec;
use crate::scalar::{int, Scalar};

/// Sum over `parts` of block products: a block opening with `x` gives
/// `α_{|B|/2}` and one opening with `x*` gives `β_{|B|/2}`, taken from the
/// law of the block's first position.
fn block_sum<'a>(
    xi: &SignPattern,
    parts: impl Iterator<Item = IntervalPartition>,
    law_at: impl Fn(usize) -> Result<&'a BDiagonalLaw>,
) -> Result<Scalar> {
    let mut total = Scalar::zero();
    for sigma in parts {
        let mut term = Scalar::one();
        for b in sigma.blocks() {
            let law = law_at(b.start)?;
            let m = b.len() / 2;
            term *= match xi.get(b.start) {
                Sign::One => law.alpha(m)?,
                Sign::Star => law.beta(m)?,
            };
            if term.is_zero() {
                break;
            }
        }
        total += term;
    }
    Ok(total)
}

/// Limit of `φ∘tr(X^{ξ_1} ⋯ X^{ξ_n})` for entries with determining
/// sequences `alpha`, `beta`; missing terms are 0.
pub fn limit_bdiag(xi: &SignPattern, alpha: &[Scalar], beta: &[Scalar]) -> Result<Scalar> {
    let max = alpha.len().max(beta.len()).max(xi.len().div_ceil(2));
    BDiagonalLaw::with_max_order(alpha.to_vec(), beta.to_vec(), max)?.word_moment(xi)
}

fn padded_laws(laws: &BTreeMap<usize, BDiagonalLaw>, n: usize) -> BTreeMap<usize, BDiagonalLaw> {
    laws.iter().map(|(k, l)| (*k, l.extended(n.div_ceil(2)))).collect()
}

fn law_for(laws: &BTreeMap<usize, BDiagonalLaw>, label: usize) -> Result<&BDiagonalLaw> {
    laws.get(&label).ok_or_else(|| Error::MissingModel(label.to_string()))
}

/// Limit of a word in several matrices: the sum over ξ-alternating `τ`
/// whose blocks stay inside single-label runs.
pub fn limit_mixed(labels: &LabelTuple, xi: &SignPattern, laws: &BTreeMap<usize, BDiagonalLaw>) -> Result<Scalar> {
    if labels.len() != xi.len() {
        return Err(Error::SizeMismatch { expected: xi.len(), actual: labels.len() });
    }
    let laws = padded_laws(laws, xi.len());
    let ks = labels.labels();
    block_sum(xi, enumerate_alt_permuted(ks, xi)?, |s| law_for(&laws, ks[s]))
}

/// Product over the label runs `D ∈ ω(k)` of the single-matrix limits of
/// `ξ|D`.
pub fn limit_mixed_factorized(
    labels: &LabelTuple,
    xi: &SignPattern,
    laws: &BTreeMap<usize, BDiagonalLaw>,
) -> Result<Scalar> {
    if labels.len() != xi.len() {
        return Err(Error::SizeMismatch { expected: xi.len(), actual: labels.len() });
    }
    let laws = padded_laws(laws, xi.len());
    let mut total = Scalar::one();
    for d in omega_of_labels(labels).blocks() {
        let law = law_for(&laws, labels.labels()[d.start])?;
        total *= law.word_moment(&xi.window(d)?)?;
        if total.is_zero() {
            break;
        }
    }
    Ok(total)
}

/// Limit of a word with permuted entries: the sum over ξ-alternating
/// partitions whose blocks carry one matrix and one permutation. The limit
/// laws are read off the entry models.
pub fn limit_permuted(spec: &MixedWordSpec) -> Result<Scalar> {
    let n = spec.n();
    if spec.models().values().any(|m| m.is_selfadjoint()) {
        return Err(Error::InvalidModel("self-adjoint models have their own limit".into()));
    }
    let laws: BTreeMap<usize, BDiagonalLaw> =
        spec.models().iter().map(|(k, m)| Ok((*k, m.limit_law(n.div_ceil(2))?))).collect::<Result<_>>()?;
    let ks = spec.labels().labels();
    let keys: Vec<(usize, Option<&PermutationSpec>)> = match spec.permutations() {
        None => ks.iter().map(|&k| (k, None)).collect(),
        Some(perms) => ks.iter().zip(perms).map(|(&k, p)| (k, if p.is_identity() { None } else { Some(p) })).collect(),
    };
    block_sum(spec.xi(), enumerate_alt_permuted(&keys, spec.xi())?, |s| law_for(&laws, ks[s]))
}

/// Limit `n`-th moment of a self-adjoint matrix with `N φ(xx*) = alpha`,
/// `N φ(x*x) = beta` above the diagonal: 0 for odd `n`, and for `n = 2r`
/// `∫_0^1 (α t + β (1 - t))^r dt`, which is `α^r` when `α = β` and
/// `(α^{r+1} - β^{r+1}) / ((r+1)(α - β))` otherwise.
pub fn limit_selfadjoint(alpha: &Scalar, beta: &Scalar, n: usize) -> Result<Scalar> {
    if *alpha < Scalar::zero() || *beta < Scalar::zero() {
        return Err(Error::Precondition("alpha and beta must be nonnegative".into()));
    }
    if n % 2 == 1 {
        return Ok(Scalar::zero());
    }
    let r = n / 2;
    if alpha == beta {
        return Ok(num_traits::pow(alpha.clone(), r));
    }
    let top = num_traits::pow(alpha.clone(), r + 1) - num_traits::pow(beta.clone(), r + 1);
    Ok(top / (int(r as i64 + 1) * (alpha - beta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean_model::EntryModel;
    use crate::partitions::enumerate_partitions;
    use crate::scalar::ratio;

    fn xi(s: &str) -> SignPattern {
        s.parse().unwrap()
    }

    #[test]
    fn bdiag_limits() {
        let (a, b) = (vec![int(2), int(7)], vec![int(3)]);
        assert_eq!(limit_bdiag(&xi("xx*"), &a, &b).unwrap(), int(2));
        assert_eq!(limit_bdiag(&xi("x*x"), &a, &b).unwrap(), int(3));
        assert_eq!(limit_bdiag(&xi("xxx*x*"), &a, &b).unwrap(), int(0));
        assert_eq!(limit_bdiag(&xi("xx*xx*"), &a, &b).unwrap(), int(7 + 4));
        assert_eq!(limit_bdiag(&xi("xx*xx*xx*"), &a, &b).unwrap(), int(8 + 2 * 14));
    }

    #[test]
    fn mixed_limits() {
        let laws = BTreeMap::from([
            (1, BDiagonalLaw::new(vec![int(2)], vec![int(3)])),
            (2, BDiagonalLaw::new(vec![int(5)], vec![int(7)])),
        ]);
        let l = LabelTuple::new(vec![1, 1, 2, 2]).unwrap();
        assert_eq!(limit_mixed(&l, &xi("xx*xx*"), &laws).unwrap(), int(10));
        assert_eq!(limit_mixed_factorized(&l, &xi("xx*xx*"), &laws).unwrap(), int(10));
        let l2 = LabelTuple::new(vec![1, 2]).unwrap();
        assert_eq!(limit_mixed(&l2, &xi("xx*"), &laws).unwrap(), int(0));
        let single = LabelTuple::constant(1, 4).unwrap();
        assert_eq!(
            limit_mixed(&single, &xi("xx*xx*"), &laws).unwrap(),
            limit_bdiag(&xi("xx*xx*"), &[int(2)], &[int(3)]).unwrap()
        );
        assert!(limit_mixed(&LabelTuple::new(vec![3, 3]).unwrap(), &xi("xx*"), &laws).is_err());
    }

    #[test]
    fn summing_over_all_sigma_overcounts() {
        // Every σ with σ ∧ ω = τ contributes once; σ = [4] and σ = [2,4]
        // both meet ω = [2,4] in [2,4].
        let laws = BTreeMap::from([
            (1, BDiagonalLaw::new(vec![int(2)], vec![int(3)])),
            (2, BDiagonalLaw::new(vec![int(5)], vec![int(7)])),
        ]);
        let l = LabelTuple::new(vec![1, 1, 2, 2]).unwrap();
        let x = xi("xx*xx*");
        let omega = omega_of_labels(&l);
        let every_sigma: usize =
            enumerate_partitions(4).unwrap().filter(|s| s.meet(&omega).unwrap().is_xi_alternating(&x)).count();
        assert_eq!(every_sigma, 2);
        assert_eq!(limit_mixed(&l, &x, &laws).unwrap(), int(10));
    }

    #[test]
    fn permuted_limits() {
        let model = EntryModel::bdiag(vec![int(2), int(9)], vec![int(3)]);
        let spec = MixedWordSpec::single(xi("xx*xx*"), model.clone());
        assert_eq!(limit_permuted(&spec).unwrap(), int(9 + 4));
        let e = PermutationSpec::identity(4).unwrap();
        let p = PermutationSpec::partial_transpose(2, 2).unwrap();
        let decorated = spec.clone().with_permutations(vec![e.clone(), e.clone(), p.clone(), p.clone()]).unwrap();
        assert_eq!(limit_permuted(&decorated).unwrap(), int(4));
        let two = MixedWordSpec::single(xi("xx*"), model).with_permutations(vec![e, p]).unwrap();
        assert_eq!(limit_permuted(&two).unwrap(), int(0));
    }

    #[test]
    fn selfadjoint_limits() {
        for r in 1..=5 {
            assert_eq!(limit_selfadjoint(&int(1), &int(1), 2 * r).unwrap(), int(1));
        }
        assert_eq!(limit_selfadjoint(&int(2), &int(1), 4).unwrap(), ratio(7, 3));
        assert_eq!(limit_selfadjoint(&int(2), &int(1), 3).unwrap(), int(0));
        assert_eq!(limit_selfadjoint(&int(3), &int(5), 2).unwrap(), int(4));
        assert_eq!(limit_selfadjoint(&int(0), &int(0), 2).unwrap(), int(0));
        assert!(limit_selfadjoint(&int(-1), &int(0), 2).is_err());
        let (a, b) = (ratio(3, 2), ratio(1, 3));
        assert_eq!(limit_selfadjoint(&a, &b, 4).unwrap(), (&a * &a + &a * &b + &b * &b) / int(3));
    }
}
