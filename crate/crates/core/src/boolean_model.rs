//! Entry models for matrices with Boolean independent entries and the
//! run-factorization rule that evaluates their mixed moments.
//!
//! Boolean independence of a family of subalgebras forces
//! `φ(w) = Π φ(run)` over the maximal runs of `w` whose letters come from
//! the same subalgebra. Every matrix moment in the crate is ultimately
//! computed this way.

use std::collections::BTreeMap;
use std::fmt::Display;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cumulants::{sign_word, Alphabet, BDiagonalLaw, MomentFunctional, WordFunction, WordTable};
use crate::error::{Error, Result};
use crate::partitions::{Sign, SignPattern};
use crate::scalar::{int, Scalar};

/// Product of `run(tag, letters)` over the maximal runs of equal tags.
pub fn boolean_product_with<T: PartialEq, L: Copy>(
    word: &[(T, L)],
    mut run: impl FnMut(&T, &[L]) -> Result<Scalar>,
) -> Result<Scalar> {
    let mut total = Scalar::one();
    let mut letters: Vec<L> = Vec::with_capacity(word.len());
    let mut start = 0;
    for end in 1..=word.len() {
        if end == word.len() || word[end].0 != word[start].0 {
            letters.clear();
            letters.extend(word[start..end].iter().map(|(_, l)| *l));
            total *= run(&word[start].0, &letters)?;
            if total.is_zero() {
                return Ok(total);
            }
            start = end;
        }
    }
    Ok(total)
}

/// Moment of a tagged word when the tag algebras are Boolean independent,
/// each described by its own moment functional.
pub fn boolean_product_moment<T: Ord + Display>(
    models: &BTreeMap<T, &dyn WordFunction>,
    word: &[(T, usize)],
) -> Result<Scalar> {
    boolean_product_with(word, |tag, letters| {
        models.get(tag).ok_or_else(|| Error::MissingModel(tag.to_string()))?.value(letters)
    })
}

/// Where an entry sits in its matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntrySite {
    OffDiagonal,
    Diagonal,
}

/// Distribution shared by all entries of one matrix. Stored values are
/// numerators: an off-diagonal entry word has moment `value / N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntryModel {
    /// Explicit numerators on `{x, x*}` words.
    General {
        #[serde(with = "table_json")]
        table: WordTable,
    },
    /// `N φ((xx*)^m) = a_m`, `N φ((x*x)^m) = b_m`, every other word 0.
    BdiagFamily {
        #[serde(with = "crate::scalar::serde_text_vec")]
        a: Vec<Scalar>,
        #[serde(with = "crate::scalar::serde_text_vec")]
        b: Vec<Scalar>,
    },
    /// Self-adjoint matrix: above the diagonal `N φ(xx*) = alpha` and
    /// `N φ(x*x) = beta`, other off-diagonal words 0; the diagonal entries
    /// are self-adjoint with `φ(d^k) = diag[k-1]` (0 past the list).
    SelfadjointFamily {
        #[serde(with = "crate::scalar::serde_text")]
        alpha: Scalar,
        #[serde(with = "crate::scalar::serde_text")]
        beta: Scalar,
        #[serde(default, with = "crate::scalar::serde_text_vec")]
        diag: Vec<Scalar>,
    },
}

mod table_json {
    use crate::cumulants::WordTable;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(t: &WordTable, s: S) -> Result<S::Ok, S::Error> {
        let text = t.to_json().map_err(serde::ser::Error::custom)?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(serde::ser::Error::custom)?;
        value.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<WordTable, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        WordTable::from_json(&value.to_string()).map_err(serde::de::Error::custom)
    }
}

fn is_alternating(signs: &[Sign]) -> bool {
    signs.len().is_multiple_of(2) && signs.windows(2).all(|w| w[0] != w[1])
}

impl EntryModel {
    pub fn bdiag(a: Vec<Scalar>, b: Vec<Scalar>) -> Self {
        EntryModel::BdiagFamily { a, b }
    }

    pub fn selfadjoint(alpha: Scalar, beta: Scalar) -> Self {
        EntryModel::SelfadjointFamily { alpha, beta, diag: Vec::new() }
    }

    /// Wraps an explicit numerator table; its alphabet must be `{x, x*}`.
    pub fn general(table: WordTable) -> Result<Self> {
        let ab = table.alphabet();
        if ab.len() != 2 || ab.adjoint(0) != 1 {
            return Err(Error::InvalidModel("entry tables use the alphabet {x, x*}".into()));
        }
        Ok(EntryModel::General { table })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        if let EntryModel::General { table } = model {
            return Self::general(table);
        }
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn is_selfadjoint(&self) -> bool {
        matches!(self, EntryModel::SelfadjointFamily { .. })
    }

    /// `N φ` of one entry raised along `xi`, i.e. the numerator of the
    /// entry word moment.
    pub fn numerator(&self, xi: &[Sign], site: EntrySite) -> Result<Scalar> {
        match self {
            EntryModel::General { table } => table.value(&sign_word(&SignPattern::new(xi.to_vec())?)),
            EntryModel::BdiagFamily { a, b } => {
                if !is_alternating(xi) {
                    return Ok(Scalar::zero());
                }
                let seq = if xi[0] == Sign::One { a } else { b };
                Ok(seq.get(xi.len() / 2 - 1).cloned().unwrap_or_else(Scalar::zero))
            }
            EntryModel::SelfadjointFamily { alpha, beta, .. } => {
                if site == EntrySite::Diagonal {
                    return Err(Error::Precondition("diagonal entries are not scaled by 1/N".into()));
                }
                Ok(match xi {
                    [Sign::One, Sign::Star] => alpha.clone(),
                    [Sign::Star, Sign::One] => beta.clone(),
                    _ => Scalar::zero(),
                })
            }
        }
    }

    /// Moment `φ(x^{ξ_1} ⋯ x^{ξ_p})` of a single entry at matrix size `n`.
    pub fn entry_word_moment(&self, xi: &[Sign], site: EntrySite, n: usize) -> Result<Scalar> {
        if n == 0 {
            return Err(Error::Precondition("matrix size must be positive".into()));
        }
        if xi.is_empty() {
            return Ok(Scalar::one());
        }
        if let (EntryModel::SelfadjointFamily { diag, .. }, EntrySite::Diagonal) = (self, site) {
            return Ok(diag.get(xi.len() - 1).cloned().unwrap_or_else(Scalar::zero));
        }
        Ok(self.numerator(xi, site)? / int(n as i64))
    }

    /// Determining sequences of the limit law, `α_m = N φ((xx*)^m)` and
    /// `β_m = N φ((x*x)^m)`, with `max_pairs` terms.
    pub fn limit_law(&self, max_pairs: usize) -> Result<BDiagonalLaw> {
        let mut alpha = Vec::with_capacity(max_pairs);
        let mut beta = Vec::with_capacity(max_pairs);
        for m in 1..=max_pairs {
            let up: Vec<Sign> = [Sign::One, Sign::Star].repeat(m);
            let down: Vec<Sign> = [Sign::Star, Sign::One].repeat(m);
            alpha.push(self.numerator(&up, EntrySite::OffDiagonal)?);
            beta.push(self.numerator(&down, EntrySite::OffDiagonal)?);
        }
        BDiagonalLaw::with_max_order(alpha, beta, max_pairs)
    }
}

/// Free-function form of [`EntryModel::entry_word_moment`].
pub fn entry_word_moment(model: &EntryModel, xi: &SignPattern, site: EntrySite, n: usize) -> Result<Scalar> {
    model.entry_word_moment(xi.signs(), site, n)
}

/// Joint ∗-moments of `Y = ab` on words up to `order`, where `{a, a*}` and
/// `{b, b*}` are Boolean independent. Each model's letter 0 is the
/// generator; `φ(a) = φ(a*) = 0` is required. The result uses the alphabet
/// `{Y, Y*}`.
pub fn product_of_boolean_letters_law(
    a_model: &dyn WordFunction,
    b_model: &dyn WordFunction,
    order: usize,
) -> Result<MomentFunctional> {
    let a = 0;
    let a_star = a_model.alphabet().adjoint(a);
    if !a_model.value(&[a])?.is_zero() || !a_model.value(&[a_star])?.is_zero() {
        return Err(Error::Precondition("φ(a) and φ(a*) must vanish".into()));
    }
    let b = 0;
    let b_star = b_model.alphabet().adjoint(b);
    let alphabet = Alphabet::star_pair("Y", "Y");
    let mut out = WordTable::new(alphabet.clone(), order);
    for w in alphabet.words_up_to(order) {
        let mut tagged: Vec<(bool, usize)> = Vec::with_capacity(2 * w.len());
        for &letter in &w {
            if letter == 0 {
                tagged.push((true, a));
                tagged.push((false, b));
            } else {
                tagged.push((false, b_star));
                tagged.push((true, a_star));
            }
        }
        let v = boolean_product_with(&tagged, |is_a, run| if *is_a { a_model.value(run) } else { b_model.value(run) })?;
        if !v.is_zero() {
            out.insert(w, v)?;
        }
    }
    Ok(out)
}
