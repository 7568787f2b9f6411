//! Boolean moment-cumulant calculus over finite ∗-alphabets.
//!
//! A word is a sequence of letter indices into an [`Alphabet`]. Moments and
//! cumulants are both represented as [`WordFunction`]s: either an explicit
//! [`WordTable`] or a [`ComputedFunctional`] backed by a closure.
//!
//! Moments and Boolean cumulants are tied by
//! `φ(a_1 ⋯ a_n) = Σ_{π ∈ I(n)} b_π[a_1, ..., a_n]`, where `b_π` multiplies
//! the cumulants of the blocks of `π`. Grouping the sum by the first block
//! gives the recurrence
//! `b_n(w) = φ(w) - Σ_{k<n} b_k(w_1..w_k) φ(w_{k+1}..w_n)` used here for the
//! inverse direction.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{enumerate_alt, enumerate_partitions, Sign, SignPattern};
use crate::scalar::{format_scalar, Scalar};

pub type Word = Vec<usize>;

/// One symbol of an alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Letter {
    pub name: String,
    /// Group (subalgebra) the letter belongs to.
    pub tag: String,
    /// Index of `letter*`.
    pub adjoint: usize,
}

/// A finite alphabet closed under an involution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<Letter>,
}

impl Alphabet {
    pub fn new(letters: Vec<Letter>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Empty("alphabet"));
        }
        for (k, l) in letters.iter().enumerate() {
            let adj = letters
                .get(l.adjoint)
                .ok_or_else(|| Error::InvalidModel(format!("adjoint of {} out of range", l.name)))?;
            if adj.adjoint != k {
                return Err(Error::InvalidModel(format!("adjoint map is not an involution at {}", l.name)));
            }
            if letters[..k].iter().any(|o| o.name == l.name) {
                return Err(Error::InvalidModel(format!("duplicate letter {}", l.name)));
            }
        }
        Ok(Self { letters })
    }

    /// Builds an alphabet from `(name, tag)` pairs and involution pairs;
    /// letters not listed in any pair are self-adjoint.
    pub fn from_names(letters: &[(&str, &str)], involution: &[(&str, &str)]) -> Result<Self> {
        let mut out: Vec<Letter> = letters
            .iter()
            .enumerate()
            .map(|(k, (name, tag))| Letter { name: name.to_string(), tag: tag.to_string(), adjoint: k })
            .collect();
        let find = |out: &[Letter], n: &str| {
            out.iter().position(|l| l.name == n).ok_or_else(|| Error::Parse(format!("unknown letter {n:?}")))
        };
        for (a, b) in involution {
            let (i, j) = (find(&out, a)?, find(&out, b)?);
            out[i].adjoint = j;
            out[j].adjoint = i;
        }
        Self::new(out)
    }

    /// `{x, x*}` sharing one tag; letter 0 is `x`, letter 1 is `x*`.
    pub fn star_pair(name: &str, tag: &str) -> Self {
        let star = format!("{name}*");
        Self::from_names(&[(name, tag), (&star, tag)], &[(name, &star)]).expect("two distinct letters")
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn letter(&self, k: usize) -> &Letter {
        &self.letters[k]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|l| l.name == name)
    }

    pub fn adjoint(&self, k: usize) -> usize {
        self.letters[k].adjoint
    }

    /// `(a_1 ⋯ a_n)* = a_n* ⋯ a_1*`.
    pub fn adjoint_word(&self, w: &[usize]) -> Word {
        w.iter().rev().map(|&k| self.adjoint(k)).collect()
    }

    /// Group index per letter: letters sharing a tag share a group, numbered
    /// by first appearance.
    pub fn groups_by_tag(&self) -> Vec<usize> {
        let mut seen: Vec<&str> = Vec::new();
        self.letters
            .iter()
            .map(|l| match seen.iter().position(|t| *t == l.tag) {
                Some(g) => g,
                None => {
                    seen.push(&l.tag);
                    seen.len() - 1
                }
            })
            .collect()
    }

    /// Parses whitespace-separated letter names.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        text.split_whitespace()
            .map(|t| self.index_of(t).ok_or_else(|| Error::Parse(format!("unknown letter {t:?}"))))
            .collect()
    }

    pub fn format_word(&self, w: &[usize]) -> String {
        w.iter().map(|&k| self.letters[k].name.as_str()).collect::<Vec<_>>().join(" ")
    }

    fn check_word(&self, w: &[usize]) -> Result<()> {
        match w.iter().find(|&&k| k >= self.len()) {
            Some(bad) => {
                Err(Error::Precondition(format!("letter index {bad} outside alphabet of size {}", self.len())))
            }
            None => Ok(()),
        }
    }

    /// All words of length exactly `n`, in lexicographic order.
    pub fn words(&self, n: usize) -> impl Iterator<Item = Word> {
        let size = self.len();
        let total = (size as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        (0..total).map(move |mut code| {
            let mut w = vec![0; n];
            for slot in w.iter_mut().rev() {
                *slot = (code % size as u128) as usize;
                code /= size as u128;
            }
            w
        })
    }

    /// All words of length `1..=order`, shortest first.
    pub fn words_up_to(&self, order: usize) -> impl Iterator<Item = Word> + '_ {
        (1..=order).flat_map(move |n| self.words(n))
    }
}

/// Letters `x` (index 0) and `x*` (index 1) spelling out a sign pattern.
pub fn sign_word(xi: &SignPattern) -> Word {
    xi.iter().map(|s| if s == Sign::One { 0 } else { 1 }).collect()
}

/// Inverse of [`sign_word`].
pub fn word_signs(w: &[usize]) -> Result<SignPattern> {
    SignPattern::new(
        w.iter()
            .map(|&k| match k {
                0 => Ok(Sign::One),
                1 => Ok(Sign::Star),
                _ => Err(Error::Precondition(format!("letter {k} is neither x nor x*"))),
            })
            .collect::<Result<_>>()?,
    )
}

/// A scalar-valued map on words, with the empty word sent to 1.
pub trait WordFunction {
    fn alphabet(&self) -> &Alphabet;
    fn max_order(&self) -> usize;
    fn value(&self, word: &[usize]) -> Result<Scalar>;
}

/// Explicit word table. Words without an entry evaluate to 0; those
/// defaults can be listed with [`WordTable::defaulted_words`].
#[derive(Clone, Debug, PartialEq)]
pub struct WordTable {
    alphabet: Alphabet,
    max_order: usize,
    values: BTreeMap<Word, Scalar>,
}

/// Joint moments `φ` on words.
pub type MomentFunctional = WordTable;
/// Boolean cumulants `b_n` on words.
pub type CumulantFunctional = WordTable;

impl WordTable {
    pub fn new(alphabet: Alphabet, max_order: usize) -> Self {
        Self { alphabet, max_order, values: BTreeMap::new() }
    }

    pub fn insert(&mut self, word: Word, value: Scalar) -> Result<()> {
        self.check(&word)?;
        if word.is_empty() {
            return Err(Error::Empty("word"));
        }
        self.values.insert(word, value);
        Ok(())
    }

    /// Inserts a word given as whitespace-separated letter names.
    pub fn set(&mut self, word: &str, value: Scalar) -> Result<()> {
        let w = self.alphabet.parse_word(word)?;
        self.insert(w, value)
    }

    fn check(&self, word: &[usize]) -> Result<()> {
        if word.len() > self.max_order {
            return Err(Error::OrderOverflow { requested: word.len(), max: self.max_order });
        }
        self.alphabet.check_word(word)
    }

    pub fn get(&self, word: &[usize]) -> Option<&Scalar> {
        self.values.get(word)
    }

    pub fn is_asserted(&self, word: &[usize]) -> bool {
        self.values.contains_key(word)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.values.iter()
    }

    /// Words of length `<= order` that evaluate to the default 0.
    pub fn defaulted_words(&self, order: usize) -> Vec<Word> {
        self.alphabet.words_up_to(order.min(self.max_order)).filter(|w| !self.values.contains_key(w)).collect()
    }

    /// Tabulates `f` on every word up to `order`, skipping zeros.
    pub fn tabulate(f: &dyn WordFunction, order: usize) -> Result<Self> {
        let mut t = Self::new(f.alphabet().clone(), order);
        for w in f.alphabet().words_up_to(order) {
            let v = f.value(&w)?;
            if !v.is_zero() {
                t.values.insert(w, v);
            }
        }
        Ok(t)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(text)?;
        doc.into_table()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TableDoc::from_table(self))?)
    }
}

impl WordFunction for WordTable {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn max_order(&self) -> usize {
        self.max_order
    }

    fn value(&self, word: &[usize]) -> Result<Scalar> {
        if word.is_empty() {
            return Ok(Scalar::one());
        }
        self.check(word)?;
        Ok(self.values.get(word).cloned().unwrap_or_else(Scalar::zero))
    }
}

#[derive(Serialize, Deserialize)]
struct LetterDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<String>,
}

/// JSON layout: letters with optional tags, involution pairs, and
/// `[word, numerator, denominator]` entries with words as arrays of names.
#[derive(Serialize, Deserialize)]
struct TableDoc {
    letters: Vec<LetterDoc>,
    #[serde(default)]
    involution: Vec<(String, String)>,
    max_order: usize,
    #[serde(default)]
    entries: Vec<(Vec<String>, i64, i64)>,
}

impl TableDoc {
    fn into_table(self) -> Result<WordTable> {
        let named: Vec<(String, String)> = self
            .letters
            .into_iter()
            .map(|l| {
                let tag = l.tag.unwrap_or_else(|| l.name.clone());
                (l.name, tag)
            })
            .collect();
        let refs: Vec<(&str, &str)> = named.iter().map(|(n, t)| (n.as_str(), t.as_str())).collect();
        let pairs: Vec<(&str, &str)> = self.involution.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let alphabet = Alphabet::from_names(&refs, &pairs)?;
        let mut table = WordTable::new(alphabet, self.max_order);
        for (word, num, den) in self.entries {
            if den == 0 {
                return Err(Error::Parse(format!("zero denominator for word {word:?}")));
            }
            let w = table.alphabet.parse_word(&word.join(" "))?;
            table.insert(w, crate::scalar::ratio(num, den))?;
        }
        Ok(table)
    }

    fn from_table(t: &WordTable) -> Self {
        let letters =
            t.alphabet.letters().iter().map(|l| LetterDoc { name: l.name.clone(), tag: Some(l.tag.clone()) }).collect();
        let involution = t
            .alphabet
            .letters()
            .iter()
            .enumerate()
            .filter(|(k, l)| l.adjoint > *k)
            .map(|(_, l)| (l.name.clone(), t.alphabet.letter(l.adjoint).name.clone()))
            .collect();
        let entries = t
            .values
            .iter()
            .filter_map(|(w, v)| {
                let num = i64::try_from(v.numer()).ok()?;
                let den = i64::try_from(v.denom()).ok()?;
                Some((w.iter().map(|&k| t.alphabet.letter(k).name.clone()).collect(), num, den))
            })
            .collect();
        Self { letters, involution, max_order: t.max_order, entries }
    }
}

/// A [`WordFunction`] computed on demand.
pub struct ComputedFunctional<F> {
    alphabet: Alphabet,
    max_order: usize,
    f: F,
}

impl<F: Fn(&[usize]) -> Result<Scalar>> ComputedFunctional<F> {
    pub fn new(alphabet: Alphabet, max_order: usize, f: F) -> Self {
        Self { alphabet, max_order, f }
    }
}

impl<F: Fn(&[usize]) -> Result<Scalar>> WordFunction for ComputedFunctional<F> {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn max_order(&self) -> usize {
        self.max_order
    }

    fn value(&self, word: &[usize]) -> Result<Scalar> {
        if word.is_empty() {
            return Ok(Scalar::one());
        }
        if word.len() > self.max_order {
            return Err(Error::OrderOverflow { requested: word.len(), max: self.max_order });
        }
        self.alphabet.check_word(word)?;
        (self.f)(word)
    }
}

fn check_order(f: &dyn WordFunction, word: &[usize]) -> Result<()> {
    if word.len() > f.max_order() {
        return Err(Error::OrderOverflow { requested: word.len(), max: f.max_order() });
    }
    Ok(())
}

/// `φ(w) = Σ_{π ∈ I(n)} b_π[w]`, summed over every interval partition.
pub fn moments_from_cumulants(c: &dyn WordFunction, word: &[usize]) -> Result<Scalar> {
    check_order(c, word)?;
    if word.is_empty() {
        return Ok(Scalar::one());
    }
    let mut cache: HashMap<(usize, usize), Scalar> = HashMap::new();
    let mut total = Scalar::zero();
    for pi in enumerate_partitions(word.len())? {
        let mut term = Scalar::one();
        for b in pi.blocks() {
            let key = (b.start, b.end);
            let v = match cache.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let v = c.value(&word[b])?;
                    cache.insert(key, v.clone());
                    v
                }
            };
            term *= v;
            if term.is_zero() {
                break;
            }
        }
        total += term;
    }
    Ok(total)
}

/// `b_n(w)` by the first-block recurrence.
pub fn cumulants_from_moments(m: &dyn WordFunction, word: &[usize]) -> Result<Scalar> {
    check_order(m, word)?;
    let n = word.len();
    if n == 0 {
        return Err(Error::Empty("word"));
    }
    // prefix[k] = b_k(w_1..w_k)
    let mut prefix: Vec<Scalar> = Vec::with_capacity(n + 1);
    prefix.push(Scalar::zero());
    for k in 1..=n {
        let mut b = m.value(&word[..k])?;
        for (j, bj) in prefix.iter().enumerate().take(k).skip(1) {
            if !bj.is_zero() {
                b -= bj * m.value(&word[j..k])?;
            }
        }
        prefix.push(b);
    }
    Ok(prefix.pop().expect("n >= 1"))
}

/// Memoizing evaluator of all cumulants of a moment functional.
pub struct CumulantCache<'a> {
    moments: &'a dyn WordFunction,
    phi: HashMap<Word, Scalar>,
    b: HashMap<Word, Scalar>,
}

impl<'a> CumulantCache<'a> {
    pub fn new(moments: &'a dyn WordFunction) -> Self {
        Self { moments, phi: HashMap::new(), b: HashMap::new() }
    }

    pub fn moment(&mut self, w: &[usize]) -> Result<Scalar> {
        if let Some(v) = self.phi.get(w) {
            return Ok(v.clone());
        }
        let v = self.moments.value(w)?;
        self.phi.insert(w.to_vec(), v.clone());
        Ok(v)
    }

    pub fn cumulant(&mut self, w: &[usize]) -> Result<Scalar> {
        if w.is_empty() {
            return Err(Error::Empty("word"));
        }
        if let Some(v) = self.b.get(w) {
            return Ok(v.clone());
        }
        let mut v = self.moment(w)?;
        for k in 1..w.len() {
            let bk = self.cumulant(&w[..k])?;
            if !bk.is_zero() {
                v -= bk * self.moment(&w[k..])?;
            }
        }
        self.b.insert(w.to_vec(), v.clone());
        Ok(v)
    }
}

/// Every cumulant of every word up to `order`, zeros omitted.
pub fn cumulant_table(m: &dyn WordFunction, order: usize) -> Result<CumulantFunctional> {
    if order > m.max_order() {
        return Err(Error::OrderOverflow { requested: order, max: m.max_order() });
    }
    let mut cache = CumulantCache::new(m);
    let mut out = WordTable::new(m.alphabet().clone(), order);
    for w in m.alphabet().words_up_to(order) {
        let v = cache.cumulant(&w)?;
        if !v.is_zero() {
            out.values.insert(w, v);
        }
    }
    Ok(out)
}

/// Every moment of every word up to `order`, zeros omitted.
pub fn moment_table(c: &dyn WordFunction, order: usize) -> Result<MomentFunctional> {
    if order > c.max_order() {
        return Err(Error::OrderOverflow { requested: order, max: c.max_order() });
    }
    let mut out = WordTable::new(c.alphabet().clone(), order);
    for w in c.alphabet().words_up_to(order) {
        let v = moments_from_cumulants(c, &w)?;
        if !v.is_zero() {
            out.values.insert(w, v);
        }
    }
    Ok(out)
}

/// A formal linear combination `Σ c_k · letter_k`.
pub type Combination = Vec<(Scalar, usize)>;

/// `φ(c_1 ⋯ c_n)` for linear combinations of letters, by expansion.
pub fn moment_of_combinations(m: &dyn WordFunction, slots: &[Combination]) -> Result<Scalar> {
    let mut total = Scalar::zero();
    let mut word = vec![0; slots.len()];
    expand(m, slots, 0, &Scalar::one(), &mut word, &mut total)?;
    Ok(total)
}

fn expand(
    m: &dyn WordFunction,
    slots: &[Combination],
    k: usize,
    coeff: &Scalar,
    word: &mut Word,
    total: &mut Scalar,
) -> Result<()> {
    if coeff.is_zero() {
        return Ok(());
    }
    if k == slots.len() {
        *total += coeff * m.value(word)?;
        return Ok(());
    }
    for (c, letter) in &slots[k] {
        word[k] = *letter;
        expand(m, slots, k + 1, &(coeff * c), word, total)?;
    }
    Ok(())
}

/// `b_n(c_1, ..., c_n)` for linear combinations, from the recurrence applied
/// to moments of combinations.
pub fn cumulant_of_combinations(m: &dyn WordFunction, slots: &[Combination]) -> Result<Scalar> {
    let n = slots.len();
    if n == 0 {
        return Err(Error::Empty("word"));
    }
    let mut prefix: Vec<Scalar> = vec![Scalar::zero()];
    for k in 1..=n {
        let mut b = moment_of_combinations(m, &slots[..k])?;
        for (j, bj) in prefix.iter().enumerate().take(k).skip(1) {
            if !bj.is_zero() {
                b -= bj * moment_of_combinations(m, &slots[j..k])?;
            }
        }
        prefix.push(b);
    }
    Ok(prefix.pop().expect("n >= 1"))
}

/// Outcome of [`check_boolean_independence`].
#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceReport {
    pub order: usize,
    pub checked_words: usize,
    /// Mixed words whose cumulant is not zero.
    pub mixed_nonzero: Vec<(Word, Scalar)>,
    /// Words where `φ(w)` differs from the product over maximal same-group
    /// runs: `(word, φ(w), run product)`.
    pub run_product_failures: Vec<(Word, Scalar, Scalar)>,
}

impl IndependenceReport {
    pub fn is_independent(&self) -> bool {
        self.mixed_nonzero.is_empty() && self.run_product_failures.is_empty()
    }
}

impl fmt::Display for IndependenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "order {}: {} words, {} nonvanishing mixed cumulants, {} run-product failures",
            self.order,
            self.checked_words,
            self.mixed_nonzero.len(),
            self.run_product_failures.len()
        )?;
        if let Some((w, v)) = self.mixed_nonzero.first() {
            write!(f, "; first: b({w:?}) = {}", format_scalar(v))?;
        }
        Ok(())
    }
}

/// Checks that the letter groups are Boolean independent up to `order`:
/// every cumulant involving two or more groups vanishes, and every moment
/// equals the product of the moments of its maximal same-group runs.
pub fn check_boolean_independence(m: &dyn WordFunction, groups: &[usize], order: usize) -> Result<IndependenceReport> {
    if groups.len() != m.alphabet().len() {
        return Err(Error::SizeMismatch { expected: m.alphabet().len(), actual: groups.len() });
    }
    if order > m.max_order() {
        return Err(Error::OrderOverflow { requested: order, max: m.max_order() });
    }
    let mut cache = CumulantCache::new(m);
    let mut report =
        IndependenceReport { order, checked_words: 0, mixed_nonzero: vec![], run_product_failures: vec![] };
    for w in m.alphabet().words_up_to(order) {
        report.checked_words += 1;
        let first = groups[w[0]];
        if w.iter().all(|&k| groups[k] == first) {
            continue;
        }
        let b = cache.cumulant(&w)?;
        if !b.is_zero() {
            report.mixed_nonzero.push((w.clone(), b));
        }
        let mut product = Scalar::one();
        let mut start = 0;
        for end in 1..=w.len() {
            if end == w.len() || groups[w[end]] != groups[w[start]] {
                product *= cache.moment(&w[start..end])?;
                start = end;
            }
        }
        let phi = cache.moment(&w)?;
        if phi != product {
            report.run_product_failures.push((w, phi, product));
        }
    }
    Ok(report)
}

/// Cumulants of a Bernoulli variable of variance `alpha`: only `b_2 = alpha`.
pub fn bernoulli_cumulants(alpha: Scalar, max_order: usize) -> CumulantFunctional {
    let alphabet = Alphabet::from_names(&[("x", "x")], &[]).expect("one letter");
    let mut t = WordTable::new(alphabet, max_order);
    if max_order >= 2 {
        t.values.insert(vec![0, 0], alpha);
    }
    t
}

/// `α^{n/2}` for even `n`, else 0.
pub fn bernoulli_moment(alpha: &Scalar, n: usize) -> Scalar {
    if n % 2 == 1 {
        Scalar::zero()
    } else {
        num_traits::pow(alpha.clone(), n / 2)
    }
}

/// Determining sequences of a B-diagonal variable: `alpha[m-1]` is the
/// cumulant `b_{2m}(x, x*, ..., x, x*)` and `beta[m-1]` is
/// `b_{2m}(x*, x, ..., x*, x)`. Terms past the given ones are 0 up to
/// `max_order` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BDiagonalLaw {
    #[serde(with = "crate::scalar::serde_text_vec")]
    alpha: Vec<Scalar>,
    #[serde(with = "crate::scalar::serde_text_vec")]
    beta: Vec<Scalar>,
    max_order: usize,
}

impl BDiagonalLaw {
    pub fn new(alpha: Vec<Scalar>, beta: Vec<Scalar>) -> Self {
        let max_order = alpha.len().max(beta.len());
        Self { alpha, beta, max_order }
    }

    /// Pads with zeros so that words of up to `2 * max_order` letters can be
    /// evaluated.
    pub fn with_max_order(alpha: Vec<Scalar>, beta: Vec<Scalar>, max_order: usize) -> Result<Self> {
        if alpha.len() > max_order || beta.len() > max_order {
            return Err(Error::OrderOverflow { requested: alpha.len().max(beta.len()), max: max_order });
        }
        Ok(Self { alpha, beta, max_order })
    }

    /// Same law with zeros appended up to `max_order` pairs.
    pub fn extended(&self, max_order: usize) -> Self {
        Self { max_order: self.max_order.max(max_order), ..self.clone() }
    }

    /// Maximal pair count `m` for which `α_m`, `β_m` are defined.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn alpha_terms(&self) -> &[Scalar] {
        &self.alpha
    }

    pub fn beta_terms(&self) -> &[Scalar] {
        &self.beta
    }

    fn term(seq: &[Scalar], m: usize, max: usize) -> Result<Scalar> {
        if m == 0 || m > max {
            return Err(Error::OrderOverflow { requested: m, max });
        }
        Ok(seq.get(m - 1).cloned().unwrap_or_else(Scalar::zero))
    }

    pub fn alpha(&self, m: usize) -> Result<Scalar> {
        Self::term(&self.alpha, m, self.max_order)
    }

    pub fn beta(&self, m: usize) -> Result<Scalar> {
        Self::term(&self.beta, m, self.max_order)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n > 2 * self.max_order {
            return Err(Error::OrderOverflow { requested: n, max: 2 * self.max_order });
        }
        Ok(())
    }

    /// `b_n(x^{ξ_1}, ..., x^{ξ_n})`: `α_{n/2}` or `β_{n/2}` on alternating
    /// patterns, 0 otherwise.
    pub fn cumulant(&self, xi: &SignPattern) -> Result<Scalar> {
        self.check_len(xi.len())?;
        let n = xi.len();
        let alternating = n.is_multiple_of(2) && xi.signs().windows(2).all(|w| w[0] != w[1]);
        if !alternating {
            return Ok(Scalar::zero());
        }
        match xi.get(0) {
            Sign::One => self.alpha(n / 2),
            Sign::Star => self.beta(n / 2),
        }
    }

    /// `φ(x^{ξ_1} ⋯ x^{ξ_n})`: the sum over ξ-alternating partitions of
    /// block products, a block opening with `x` giving `α_{|B|/2}` and one
    /// opening with `x*` giving `β_{|B|/2}`.
    pub fn word_moment(&self, xi: &SignPattern) -> Result<Scalar> {
        self.check_len(xi.len())?;
        let mut total = Scalar::zero();
        for sigma in enumerate_alt(xi) {
            let mut term = Scalar::one();
            for b in sigma.blocks() {
                let m = b.len() / 2;
                term *= match xi.get(b.start) {
                    Sign::One => self.alpha(m)?,
                    Sign::Star => self.beta(m)?,
                };
                if term.is_zero() {
                    break;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Cumulants as a functional on `{x, x*}` words.
    pub fn cumulant_functional(&self) -> ComputedFunctional<impl Fn(&[usize]) -> Result<Scalar> + '_> {
        ComputedFunctional::new(Alphabet::star_pair("x", "x"), 2 * self.max_order, move |w| {
            self.cumulant(&word_signs(w)?)
        })
    }

    /// Moments as a functional on `{x, x*}` words.
    pub fn moment_functional(&self) -> ComputedFunctional<impl Fn(&[usize]) -> Result<Scalar> + '_> {
        ComputedFunctional::new(Alphabet::star_pair("x", "x"), 2 * self.max_order, move |w| {
            self.word_moment(&word_signs(w)?)
        })
    }

    /// Joint moments of `u = x*x` and `v = xx*` (letters 0 and 1, tagged
    /// `u` and `v`, both self-adjoint) on words of up to `max_order`
    /// letters.
    pub fn star_products_law(&self) -> ComputedFunctional<impl Fn(&[usize]) -> Result<Scalar> + '_> {
        let alphabet = Alphabet::from_names(&[("u", "u"), ("v", "v")], &[]).expect("two letters");
        ComputedFunctional::new(alphabet, self.max_order, move |w| {
            let signs: Vec<Sign> = w
                .iter()
                .flat_map(|&k| if k == 0 { [Sign::Star, Sign::One] } else { [Sign::One, Sign::Star] })
                .collect();
            self.word_moment(&SignPattern::new(signs)?)
        })
    }
}

/// Moment of a B-diagonal law on a sign pattern.
pub fn bdiag_word_moment(law: &BDiagonalLaw, xi: &SignPattern) -> Result<Scalar> {
    law.word_moment(xi)
}

/// Checks `φ((xx*)^p x* x^{ξ}) = φ((xx*)^p) · φ(x* x^{ξ})` and that `x*x`
/// and `xx*` are Boolean independent up to the order the law supports.
pub fn verify_prop_b_part_i(law: &BDiagonalLaw, p: usize, tail: &SignPattern) -> Result<bool> {
    if p == 0 {
        return Err(Error::Precondition("p must be positive".into()));
    }
    let head = SignPattern::alternating(p)?;
    let star = SignPattern::new(vec![Sign::Star])?;
    let rest = star.concat(tail);
    let lhs = law.word_moment(&head.concat(&rest))?;
    let rhs = law.word_moment(&head)? * law.word_moment(&rest)?;
    if lhs != rhs {
        return Ok(false);
    }
    let order = (2 * p + rest.len()).div_ceil(2).min(law.max_order());
    let uv = law.star_products_law();
    let groups = uv.alphabet().groups_by_tag();
    Ok(check_boolean_independence(&uv, &groups, order)?.is_independent())
}

/// Sign patterns `(*, 1, *, 1, ...)` of even length, the only ones on which
/// a product of Boolean independent centered letters may carry cumulants.
pub fn is_star_one_alternating(xi: &SignPattern) -> bool {
    xi.len().is_multiple_of(2)
        && xi.iter().enumerate().all(|(k, s)| s == if k % 2 == 0 { Sign::Star } else { Sign::One })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn pair_table(values: &[(&str, Scalar)], max_order: usize) -> WordTable {
        let mut t = WordTable::new(Alphabet::star_pair("x", "x"), max_order);
        for (w, v) in values {
            t.set(w, v.clone()).unwrap();
        }
        t
    }

    #[test]
    fn low_order_moments_from_cumulants() {
        let c = pair_table(&[("x", int(2)), ("x*", int(3)), ("x x*", int(5))], 4);
        assert_eq!(moments_from_cumulants(&c, &[0]).unwrap(), int(2));
        // φ(a1 a2) = b2 + b1 b1
        assert_eq!(moments_from_cumulants(&c, &[0, 1]).unwrap(), int(5 + 6));
        assert_eq!(moments_from_cumulants(&c, &[]).unwrap(), int(1));
        assert!(matches!(moments_from_cumulants(&c, &[0; 5]), Err(Error::OrderOverflow { .. })));
    }

    #[test]
    fn second_cumulant_is_covariance() {
        let m = pair_table(&[("x", int(2)), ("x*", int(3)), ("x x*", int(7))], 3);
        assert_eq!(cumulants_from_moments(&m, &[0, 1]).unwrap(), int(7 - 6));
        assert!(cumulants_from_moments(&m, &[]).is_err());
        assert!(cumulants_from_moments(&m, &[0; 4]).is_err());
    }

    #[test]
    fn bernoulli_moments_and_cumulants() {
        let alpha = ratio(3, 2);
        let c = bernoulli_cumulants(alpha.clone(), 8);
        for n in 1..=8 {
            assert_eq!(moments_from_cumulants(&c, &vec![0; n]).unwrap(), bernoulli_moment(&alpha, n));
        }
        assert_eq!(moments_from_cumulants(&c, &[0; 4]).unwrap(), &alpha * &alpha);
        let m = moment_table(&c, 8).unwrap();
        for n in 1..=8 {
            let expected = if n == 2 { alpha.clone() } else { Scalar::zero() };
            assert_eq!(cumulants_from_moments(&m, &vec![0; n]).unwrap(), expected);
        }
    }

    #[test]
    fn table_and_cache_agree() {
        let m = pair_table(&[("x", int(1)), ("x x", int(4)), ("x* x x", ratio(1, 3)), ("x x* x x*", int(-2))], 4);
        let t = cumulant_table(&m, 4).unwrap();
        for w in m.alphabet().words_up_to(4) {
            assert_eq!(t.value(&w).unwrap(), cumulants_from_moments(&m, &w).unwrap());
        }
        let back = moment_table(&t, 4).unwrap();
        for w in m.alphabet().words_up_to(4) {
            assert_eq!(back.value(&w).unwrap(), m.value(&w).unwrap());
        }
    }

    #[test]
    fn defaults_are_listed() {
        let m = pair_table(&[("x", int(1))], 2);
        assert!(m.is_asserted(&[0]));
        assert!(!m.is_asserted(&[1]));
        assert_eq!(m.defaulted_words(2).len(), 1 + 4);
        assert_eq!(m.value(&[1, 1]).unwrap(), Scalar::zero());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{
            "letters": [{"name": "a", "tag": "A"}, {"name": "a*", "tag": "A"}, {"name": "b"}],
            "involution": [["a", "a*"]],
            "max_order": 3,
            "entries": [[["a", "a*"], 1, 2], [["b"], -3, 1]]
        }"#;
        let t = WordTable::from_json(text).unwrap();
        assert_eq!(t.alphabet().adjoint(0), 1);
        assert_eq!(t.alphabet().adjoint(2), 2);
        assert_eq!(t.value(&[0, 1]).unwrap(), ratio(1, 2));
        assert_eq!(t.value(&[2]).unwrap(), int(-3));
        let again = WordTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(again, t);
        assert!(WordTable::from_json(r#"{"letters": [], "max_order": 1}"#).is_err());
        assert!(
            WordTable::from_json(r#"{"letters": [{"name":"a"}], "max_order": 1, "entries": [[["c"], 1, 1]]}"#).is_err()
        );
    }

    #[test]
    fn alphabet_validation() {
        assert!(Alphabet::from_names(&[("a", "A"), ("a", "A")], &[]).is_err());
        assert!(Alphabet::from_names(&[("a", "A")], &[("a", "z")]).is_err());
        let ab = Alphabet::from_names(&[("a", "A"), ("b", "B"), ("c", "A")], &[]).unwrap();
        assert_eq!(ab.groups_by_tag(), vec![0, 1, 0]);
        assert_eq!(ab.words(3).count(), 27);
        assert_eq!(ab.parse_word("a c b").unwrap(), vec![0, 2, 1]);
        assert_eq!(ab.format_word(&[1, 1]), "b b");
    }

    #[test]
    fn bdiag_examples() {
        let law = BDiagonalLaw::new(vec![int(2), int(5)], vec![int(3), int(7)]);
        let xi = |s: &str| s.parse::<SignPattern>().unwrap();
        assert_eq!(law.word_moment(&xi("xx*")).unwrap(), int(2));
        assert_eq!(law.word_moment(&xi("x*x")).unwrap(), int(3));
        assert_eq!(law.word_moment(&xi("xx*xx*")).unwrap(), int(5 + 4));
        assert_eq!(law.word_moment(&xi("xx")).unwrap(), int(0));
        assert!(matches!(law.word_moment(&xi("xx*xx*xx*")), Err(Error::OrderOverflow { .. })));
        assert_eq!(law.cumulant(&xi("x*xx*x")).unwrap(), int(7));
        assert_eq!(law.cumulant(&xi("xx*x*x")).unwrap(), int(0));
    }

    #[test]
    fn bdiag_moments_match_cumulant_sum() {
        let law = BDiagonalLaw::new(vec![ratio(1, 2), int(-1), ratio(2, 3)], vec![int(3), ratio(1, 5), int(4)]);
        let c = law.cumulant_functional();
        for n in 1..=6 {
            for x in SignPattern::all(n) {
                assert_eq!(law.word_moment(&x).unwrap(), moments_from_cumulants(&c, &sign_word(&x)).unwrap());
            }
        }
    }

    #[test]
    fn star_products_independent() {
        let law = BDiagonalLaw::new(vec![int(1), ratio(-1, 2), int(3)], vec![int(2), int(1), ratio(1, 7)]);
        let uv = law.star_products_law();
        let report = check_boolean_independence(&uv, &uv.alphabet().groups_by_tag(), 3).unwrap();
        assert!(report.is_independent(), "{report}");
        assert!(verify_prop_b_part_i(&law, 1, &"xx*".parse().unwrap()).unwrap());
    }

    #[test]
    fn classical_like_functional_is_not_boolean_independent() {
        let ab = Alphabet::from_names(&[("a", "A"), ("b", "B")], &[]).unwrap();
        let mut m = WordTable::new(ab, 4);
        // commuting variables with φ(a) = φ(b) = 1, φ(a^2) = φ(b^2) = 2
        let f = |w: &[usize]| {
            let ca = w.iter().filter(|&&k| k == 0).count();
            let cb = w.len() - ca;
            let mom = |c: usize| match c {
                0 => 1,
                1 => 1,
                2 => 2,
                3 => 4,
                _ => 10,
            };
            int(mom(ca) * mom(cb))
        };
        for w in m.alphabet().words_up_to(4).collect::<Vec<_>>() {
            let v = f(&w);
            m.insert(w, v).unwrap();
        }
        let report = check_boolean_independence(&m, &[0, 1], 4).unwrap();
        assert!(!report.is_independent());
        assert!(!report.mixed_nonzero.is_empty());
        let single = check_boolean_independence(&m, &[0, 0], 4).unwrap();
        assert!(single.is_independent());
    }

    #[test]
    fn cumulants_are_multilinear() {
        let m = pair_table(
            &[("x", int(1)), ("x*", int(2)), ("x x*", int(3)), ("x* x x", ratio(1, 2)), ("x x x", int(-1))],
            3,
        );
        let slots: Vec<Combination> =
            vec![vec![(int(2), 0), (ratio(1, 3), 1)], vec![(int(1), 1)], vec![(int(-1), 0), (int(4), 1)]];
        let lhs = cumulant_of_combinations(&m, &slots).unwrap();
        let mut rhs = Scalar::zero();
        for (c0, l0) in &slots[0] {
            for (c1, l1) in &slots[1] {
                for (c2, l2) in &slots[2] {
                    rhs += c0 * c1 * c2 * cumulants_from_moments(&m, &[*l0, *l1, *l2]).unwrap();
                }
            }
        }
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn star_one_patterns() {
        assert!(is_star_one_alternating(&"x*xx*x".parse().unwrap()));
        assert!(!is_star_one_alternating(&"xx*".parse().unwrap()));
        assert!(!is_star_one_alternating(&"x*".parse().unwrap()));
    }
}
