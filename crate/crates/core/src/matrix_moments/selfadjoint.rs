//! Moments of self-adjoint matrices `B_N = B_N*` whose entries on and above
//! the diagonal are Boolean independent.
//!
//! Entry `b_{ij}` with `i < j` is the letter `x` of the pair `{i, j}`, and
//! `b_{ji} = x*`. Diagonal entries are separate self-adjoint variables.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_traits::Zero;
use serde::Serialize;

use crate::boolean_model::{boolean_product_with, EntryModel, EntrySite};
use crate::error::{Error, Result};
use crate::matrix_moments::counting::for_each_tuple;
use crate::partitions::Sign;
use crate::scalar::{int, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfAdjointMethod {
    /// Sum over every index tuple.
    Brute,
    /// Row recursion, valid when only `xx*` and `x*x` survive.
    Closed,
}

impl FromStr for SelfAdjointMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" => Ok(SelfAdjointMethod::Brute),
            "closed" => Ok(SelfAdjointMethod::Closed),
            _ => Err(Error::Parse(format!("unknown method {s:?}, expected brute or closed"))),
        }
    }
}

/// Exact `φ∘tr(B_N^n)`.
pub fn trace_moment_selfadjoint_exact(
    model: &EntryModel,
    n: usize,
    size: usize,
    method: SelfAdjointMethod,
    budget: u128,
) -> Result<Scalar> {
    if n == 0 || size == 0 {
        return Err(Error::Precondition("power and matrix size must be positive".into()));
    }
    let EntryModel::SelfadjointFamily { alpha, beta, diag } = model else {
        return Err(Error::InvalidModel("expected a selfadjoint_family model".into()));
    };
    match method {
        SelfAdjointMethod::Brute => brute(model, n, size, budget),
        SelfAdjointMethod::Closed => {
            if diag.iter().any(|d| !d.is_zero()) {
                return Err(Error::Precondition("the row recursion needs vanishing diagonal moments".into()));
            }
            Ok(closed(alpha, beta, n, size))
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Entry {
    Off(usize, usize),
    Diag(usize),
}

fn brute(model: &EntryModel, n: usize, size: usize, budget: u128) -> Result<Scalar> {
    let mut cache: BTreeMap<(bool, Vec<Sign>), Scalar> = BTreeMap::new();
    let mut total = Scalar::zero();
    let mut word: Vec<(Entry, Sign)> = Vec::with_capacity(n);
    for_each_tuple(n, size, budget, |i| {
        word.clear();
        for s in 0..n {
            let (a, b) = (i[s], i[(s + 1) % n]);
            word.push(match a.cmp(&b) {
                std::cmp::Ordering::Less => (Entry::Off(a, b), Sign::One),
                std::cmp::Ordering::Greater => (Entry::Off(b, a), Sign::Star),
                std::cmp::Ordering::Equal => (Entry::Diag(a), Sign::One),
            });
        }
        total += boolean_product_with(&word, |entry, run| {
            let diagonal = matches!(entry, Entry::Diag(_));
            let key = (diagonal, run.to_vec());
            if let Some(v) = cache.get(&key) {
                return Ok(v.clone());
            }
            let site = if diagonal { EntrySite::Diagonal } else { EntrySite::OffDiagonal };
            let v = model.entry_word_moment(run, site, size)?;
            cache.insert(key, v.clone());
            Ok(v)
        })?;
        Ok(())
    })?;
    Ok(total / int(size as i64))
}

/// With only `φ(xx*) = α/N` and `φ(x*x) = β/N` nonzero, a contributing
/// tuple is `(i, j_1, i, j_2, ..., i, j_r)` with every `j_t ≠ i` and
/// `j_t ≠ j_{t+1}`; a step to `j > i` weighs `α/N` and to `j < i` weighs
/// `β/N`. For fixed `i`, `g_s` (resp. `h_s`) is the weight of the length-`s`
/// walks ending at one given `j > i` (resp. `j < i`).
fn closed(alpha: &Scalar, beta: &Scalar, n: usize, size: usize) -> Scalar {
    if n % 2 == 1 {
        return Scalar::zero();
    }
    let r = n / 2;
    let nn = int(size as i64);
    let (wa, wb) = (alpha / &nn, beta / &nn);
    let mut total = Scalar::zero();
    for i in 1..=size {
        let above = int((size - i) as i64);
        let below = int(i as i64 - 1);
        let (mut g, mut h) = (wa.clone(), wb.clone());
        let mut f = &above * &g + &below * &h;
        for _ in 1..r {
            let g_next = &wa * (&f - &g);
            let h_next = &wb * (&f - &h);
            g = g_next;
            h = h_next;
            f = &above * &g + &below * &h;
        }
        total += f;
    }
    total / nn
}
