//! Interval partitions of `[n]` and the partition-valued constructions built
//! from sign patterns, matrix labels and index tuples.
//!
//! An interval partition is stored by its endpoint sequence
//! `l(1) < l(2) < ... < l(r) = n`; block `t` is `{l(t-1)+1, ..., l(t)}` with
//! `l(0) = 0`. Positions are 1-based in the bracket notation `[l1,...,lr]`
//! and in [`IntervalPartition::endpoints`]; block ranges handed out by
//! [`IntervalPartition::blocks`] are 0-based half-open ranges into a word.
//!
//! `I(n)` is a lattice under refinement. With endpoint sets, the meet is the
//! union and the join is the intersection of the two sets.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::permutations::PermutationSpec;

/// An element of `I(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalPartition {
    n: usize,
    endpoints: Vec<usize>,
}

impl IntervalPartition {
    pub fn new(n: usize, endpoints: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("ground set must be nonempty".into()));
        }
        if endpoints.last() != Some(&n) {
            return Err(Error::InvalidPartition(format!("last endpoint must equal n = {n}, got {endpoints:?}")));
        }
        if endpoints[0] == 0 || endpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(format!(
                "endpoints must be strictly increasing positive integers, got {endpoints:?}"
            )));
        }
        Ok(Self { n, endpoints })
    }

    /// Builds a partition whose ground-set size is its last endpoint.
    pub fn from_endpoints(endpoints: Vec<usize>) -> Result<Self> {
        let n = *endpoints.last().ok_or_else(|| Error::InvalidPartition("no endpoints".into()))?;
        Self::new(n, endpoints)
    }

    /// The single-block partition `1_n`.
    pub fn one(n: usize) -> Result<Self> {
        Self::new(n, vec![n])
    }

    /// The all-singletons partition `0_n`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, (1..=n).collect())
    }

    /// Partition whose internal endpoints are the set bits of `mask`
    /// (bit `k - 1` stands for endpoint `k`, `1 <= k < n`).
    pub fn from_cut_mask(n: usize, mask: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidPartition(format!("cut masks support 1 <= n <= 64, got {n}")));
        }
        if n < 64 && mask >> (n - 1) != 0 {
            return Err(Error::InvalidPartition(format!("mask {mask:#b} has cuts beyond n - 1 = {}", n - 1)));
        }
        let mut endpoints: Vec<usize> = (1..n).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        endpoints.push(n);
        Ok(Self { n, endpoints })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn endpoints(&self) -> &[usize] {
        &self.endpoints
    }

    /// Endpoints strictly below `n`.
    pub fn internal_endpoints(&self) -> &[usize] {
        &self.endpoints[..self.endpoints.len() - 1]
    }

    pub fn num_blocks(&self) -> usize {
        self.endpoints.len()
    }

    /// 0-based half-open ranges of the blocks, left to right.
    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        let starts = std::iter::once(0).chain(self.endpoints.iter().copied());
        starts.zip(self.endpoints.iter().copied()).map(|(a, b)| a..b)
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks().map(|b| b.len()).collect()
    }

    /// Index of the block containing the 0-based position `pos`.
    pub fn block_of(&self, pos: usize) -> Option<usize> {
        if pos >= self.n {
            return None;
        }
        Some(self.endpoints.partition_point(|&e| e <= pos))
    }

    pub fn cut_mask(&self) -> Option<u64> {
        if self.n > 64 {
            return None;
        }
        Some(self.internal_endpoints().iter().fold(0u64, |m, &e| m | 1 << (e - 1)))
    }

    /// Refinement order: every block of `self` lies inside a block of `other`.
    pub fn is_finer_than(&self, other: &Self) -> bool {
        self.n == other.n
            && other.internal_endpoints().iter().all(|e| self.internal_endpoints().binary_search(e).is_ok())
    }

    fn check_same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::SizeMismatch { expected: self.n, actual: other.n });
        }
        Ok(())
    }

    /// Greatest lower bound: the union of the endpoint sets.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let (a, b) = (&self.endpoints, &other.endpoints);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => match x.cmp(&y) {
                    Ordering::Less => {
                        i += 1;
                        x
                    }
                    Ordering::Greater => {
                        j += 1;
                        y
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        x
                    }
                },
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        Ok(Self { n: self.n, endpoints: out })
    }

    /// Least upper bound: the intersection of the endpoint sets.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.check_same_n(other)?;
        let endpoints = self.endpoints.iter().copied().filter(|e| other.endpoints.binary_search(e).is_ok()).collect();
        Ok(Self { n: self.n, endpoints })
    }

    /// `self ⊕ other`: `other` shifted past `self`.
    pub fn juxtapose(&self, other: &Self) -> Self {
        let mut endpoints = self.endpoints.clone();
        endpoints.extend(other.endpoints.iter().map(|e| e + self.n));
        Self { n: self.n + other.n, endpoints }
    }

    /// Restriction to the window `{start+1, ..., start+len}`, relabelled to
    /// start at 1.
    pub fn restrict(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.n {
            return Err(Error::WindowOutOfRange { start, len, n: self.n });
        }
        let end = start + len;
        let mut endpoints: Vec<usize> =
            self.endpoints.iter().filter(|&&e| e > start && e < end).map(|e| e - start).collect();
        endpoints.push(len);
        Ok(Self { n: len, endpoints })
    }

    /// True when every block `(d+1, ..., d+p)` has `ξ_{d+1} ≠ ξ_{d+2}, ...,
    /// ξ_{d+p-1} ≠ ξ_{d+p}` and `ξ_{d+p} ≠ ξ_{d+1}`. Returns false on a length
    /// mismatch.
    pub fn is_xi_alternating(&self, xi: &SignPattern) -> bool {
        xi.len() == self.n && self.blocks().all(|b| xi.is_alternating_block(b))
    }
}

impl Ord for IntervalPartition {
    /// Orders by `n`, then by the cut mask read as a binary number. For
    /// `n <= 64` this is exactly the enumeration order of [`enumerate_partitions`].
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| {
            let mut a = self.internal_endpoints().iter().rev();
            let mut b = other.internal_endpoints().iter().rev();
            loop {
                match (a.next(), b.next()) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Greater,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(x), Some(y)) if x != y => return x.cmp(y),
                    _ => {}
                }
            }
        })
    }
}

impl PartialOrd for IntervalPartition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for IntervalPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, e) in self.endpoints.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for IntervalPartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected \"[l1,...,lr]\", got {s:?}")))?;
        let endpoints = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad endpoint {t:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_endpoints(endpoints)
    }
}

impl Serialize for IntervalPartition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.endpoints.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalPartition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let endpoints = Vec::<usize>::deserialize(d)?;
        Self::from_endpoints(endpoints).map_err(serde::de::Error::custom)
    }
}

/// Streams `I(n)` in increasing cut-mask order.
#[derive(Clone, Debug)]
pub struct Partitions {
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for Partitions {
    type Item = IntervalPartition;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        IntervalPartition::from_cut_mask(self.n, mask).ok()
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Partitions {}

/// All of `I(n)`, `2^(n-1)` elements, ordered by cut mask.
pub fn enumerate_partitions(n: usize) -> Result<Partitions> {
    if n == 0 {
        return Err(Error::Empty("ground set"));
    }
    if n > 63 {
        return Err(Error::InvalidPartition(format!("cannot enumerate I({n}): 2^{} elements", n - 1)));
    }
    Ok(Partitions { n, next: 0, end: 1u64 << (n - 1) })
}

/// Adjoint marker of a letter in a ∗-word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "*")]
    Star,
}

impl Sign {
    pub fn flip(self) -> Self {
        match self {
            Sign::One => Sign::Star,
            Sign::Star => Sign::One,
        }
    }

    /// `(i, j)^1 = (i, j)`, `(i, j)^* = (j, i)`.
    pub fn orient(self, i: usize, j: usize) -> (usize, usize) {
        match self {
            Sign::One => (i, j),
            Sign::Star => (j, i),
        }
    }
}

/// A tuple `ξ ∈ {1, *}^n`, written `x` / `x*` per letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignPattern(Vec<Sign>);

impl SignPattern {
    pub fn new(signs: Vec<Sign>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::Empty("sign pattern"));
        }
        Ok(Self(signs))
    }

    /// `(1, *)` repeated `pairs` times.
    pub fn alternating(pairs: usize) -> Result<Self> {
        Self::new([Sign::One, Sign::Star].repeat(pairs))
    }

    /// Every pattern of length `n`, ordered with `1 < *` lexicographically.
    pub fn all(n: usize) -> impl Iterator<Item = SignPattern> {
        let count = if n == 0 { 0 } else { 1u64 << n };
        (0..count).map(move |bits| {
            SignPattern((0..n).map(|k| if bits >> (n - 1 - k) & 1 == 1 { Sign::Star } else { Sign::One }).collect())
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    pub fn get(&self, k: usize) -> Sign {
        self.0[k]
    }

    /// Signs on a 0-based window, as a new pattern.
    pub fn window(&self, range: Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::WindowOutOfRange { start: range.start, len: range.len(), n: self.len() });
        }
        Ok(Self(self.0[range].to_vec()))
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }

    /// Consecutive signs differ on `block`, and so do its last and first.
    pub fn is_alternating_block(&self, block: Range<usize>) -> bool {
        let s = &self.0[block];
        s.windows(2).all(|w| w[0] != w[1]) && s.first() != s.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = Sign> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(match s {
                Sign::One => "x",
                Sign::Star => "x*",
            })?;
        }
        Ok(())
    }
}

impl FromStr for SignPattern {
    type Err = Error;

    /// `"xx*xx*"` is `(1, *, 1, *)`: each `x` is a letter, a `*` right after
    /// it marks the adjoint.
    fn from_str(s: &str) -> Result<Self> {
        let mut signs = Vec::new();
        for c in s.chars().filter(|c| !c.is_whitespace()) {
            match c {
                'x' | 'X' => signs.push(Sign::One),
                '*' => match signs.last_mut() {
                    Some(last @ Sign::One) => *last = Sign::Star,
                    _ => return Err(Error::Parse(format!("dangling '*' in {s:?}"))),
                },
                other => return Err(Error::Parse(format!("unexpected {other:?} in sign pattern {s:?}"))),
            }
        }
        Self::new(signs)
    }
}

impl Serialize for SignPattern {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SignPattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Matrix labels `(k_1, ..., k_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelTuple(Vec<usize>);

impl LabelTuple {
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("label tuple"));
        }
        Ok(Self(labels))
    }

    pub fn constant(label: usize, n: usize) -> Result<Self> {
        Self::new(vec![label; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.0
    }
}

/// Indices `(i_1, ..., i_n)` into `[N]`, stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexTuple {
    indices: Vec<usize>,
    size: usize,
}

impl IndexTuple {
    pub fn new(indices: Vec<usize>, size: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("index tuple"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= size) {
            return Err(Error::Precondition(format!("index {bad} outside [0, {size})")));
        }
        Ok(Self { indices, size })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Every `σ ∈ I(n)` that is ξ-alternating, in cut-mask order.
pub fn enumerate_alt(xi: &SignPattern) -> std::vec::IntoIter<IntervalPartition> {
    let mut out = Vec::new();
    alt_search(xi, &|_, _| true, 0, &mut Vec::new(), &mut out);
    out.sort();
    out.into_iter()
}

/// `alt(α, ξ)`: the ξ-alternating partitions whose blocks carry a single
/// value of `labels`.
pub fn enumerate_alt_permuted<T: PartialEq>(
    labels: &[T],
    xi: &SignPattern,
) -> Result<std::vec::IntoIter<IntervalPartition>> {
    if labels.len() != xi.len() {
        return Err(Error::SizeMismatch { expected: xi.len(), actual: labels.len() });
    }
    let mut out = Vec::new();
    alt_search(xi, &|a, b| labels[a] == labels[b], 0, &mut Vec::new(), &mut out);
    out.sort();
    Ok(out.into_iter())
}

/// Depth-first search over even alternating blocks; `same(a, b)` must hold
/// for adjacent positions inside a block.
fn alt_search(
    xi: &SignPattern,
    same: &dyn Fn(usize, usize) -> bool,
    start: usize,
    ends: &mut Vec<usize>,
    out: &mut Vec<IntervalPartition>,
) {
    let n = xi.len();
    if start == n {
        out.push(IntervalPartition { n, endpoints: ends.clone() });
        return;
    }
    let mut end = start + 1;
    while end < n && xi.get(end) != xi.get(end - 1) && same(end - 1, end) {
        end += 1;
        if (end - start).is_multiple_of(2) {
            ends.push(end);
            alt_search(xi, same, end, ends, out);
            ends.pop();
        }
    }
}

/// `ω(k)`: the coarsest interval partition on whose blocks `k` is constant.
pub fn omega_of_labels(k: &LabelTuple) -> IntervalPartition {
    omega_of_values(k.labels())
}

/// `ω` for any sequence compared by equality.
pub fn omega_of_values<T: PartialEq>(values: &[T]) -> IntervalPartition {
    let n = values.len();
    let mut endpoints: Vec<usize> = (1..n).filter(|&s| values[s - 1] != values[s]).collect();
    endpoints.push(n);
    IntervalPartition { n, endpoints }
}

/// `ι(ξ, i)`: positions `s` and `s+1` share a block iff
/// `(i_s, i_{s+1})^{ξ_s} = (i_{s+1}, i_{s+2})^{ξ_{s+1}}`, with `i_{n+1} = i_1`.
pub fn iota(xi: &SignPattern, i: &IndexTuple) -> Result<IntervalPartition> {
    if xi.len() != i.len() {
        return Err(Error::SizeMismatch { expected: xi.len(), actual: i.len() });
    }
    Ok(iota_raw(xi.signs(), i.indices()))
}

pub(crate) fn iota_raw(xi: &[Sign], idx: &[usize]) -> IntervalPartition {
    let n = xi.len();
    let at = |s: usize| idx[s % n];
    let pair = |s: usize| xi[s].orient(at(s), at(s + 1));
    let mut endpoints: Vec<usize> = (1..n).filter(|&s| pair(s - 1) != pair(s)).collect();
    endpoints.push(n);
    IntervalPartition { n, endpoints }
}

/// `ι(α, ξ, i)`: as [`iota`] with the pairs replaced by
/// `α_s^{ξ_s}(i_s, i_{s+1})`, where `α^*(i, j) = α(j, i)`.
pub fn iota_permuted(alphas: &[&PermutationSpec], xi: &SignPattern, i: &IndexTuple) -> Result<IntervalPartition> {
    let n = xi.len();
    if alphas.len() != n || i.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: if alphas.len() != n { alphas.len() } else { i.len() },
        });
    }
    if let Some(bad) = alphas.iter().find(|a| a.size() != i.size()) {
        return Err(Error::SizeMismatch { expected: i.size(), actual: bad.size() });
    }
    Ok(iota_permuted_raw(alphas, xi.signs(), i.indices()))
}

pub(crate) fn iota_permuted_raw(alphas: &[&PermutationSpec], xi: &[Sign], idx: &[usize]) -> IntervalPartition {
    let n = xi.len();
    let at = |s: usize| idx[s % n];
    let pair = |s: usize| {
        let (a, b) = xi[s].orient(at(s), at(s + 1));
        alphas[s].apply(a, b)
    };
    let mut endpoints: Vec<usize> = (1..n).filter(|&s| pair(s - 1) != pair(s)).collect();
    endpoints.push(n);
    IntervalPartition { n, endpoints }
}
