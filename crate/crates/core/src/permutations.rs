//! Bijections of the entry grid `[N] × [N]` used to rearrange matrix
//! entries, their involution `α*(i, j) = α(j, i)`, transposes and partial
//! transposes, and the counting diagnostics attached to them.
//!
//! Indices are 0-based. A matrix `A` rearranged by `α` has `(i, j)` entry
//! equal to the `α(i, j)` entry of `A`.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{int, Scalar};

/// Grids up to this side are validated exhaustively.
pub const DENSE_LIMIT: usize = 1 << 12;

const SAMPLE_CHECKS: usize = 1 << 16;

type PairMap = Arc<dyn Fn(usize, usize) -> (usize, usize) + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Identity,
    Transpose,
    /// `m × m` blocks of side `n`, each transposed in place.
    PartialTranspose {
        m: usize,
        n: usize,
    },
    Table(Arc<Vec<u32>>),
    Rule {
        name: String,
        f: PairMap,
    },
}

/// A matrix position `(row, column)`.
pub type Cell = (usize, usize);

/// A bijection of `[N] × [N]`.
#[derive(Clone)]
pub struct PermutationSpec {
    size: usize,
    kind: Kind,
    starred: bool,
}

impl fmt::Debug for PermutationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PermutationSpec({}, N={})", self.name(), self.size)
    }
}

impl PartialEq for PermutationSpec {
    fn eq(&self, other: &Self) -> bool {
        if self.size != other.size {
            return false;
        }
        let same_kind = match (&self.kind, &other.kind) {
            (Kind::Identity, Kind::Identity) | (Kind::Transpose, Kind::Transpose) => true,
            (Kind::PartialTranspose { m, n }, Kind::PartialTranspose { m: m2, n: n2 }) => m == m2 && n == n2,
            (Kind::Table(a), Kind::Table(b)) => a == b,
            (Kind::Rule { f: a, .. }, Kind::Rule { f: b, .. }) => Arc::ptr_eq(a, b),
            _ => false,
        };
        if same_kind && self.starred == other.starred {
            return true;
        }
        // different descriptions of the same map
        self.size <= 64 && (0..self.size).all(|i| (0..self.size).all(|j| self.apply(i, j) == other.apply(i, j)))
    }
}

impl PermutationSpec {
    pub fn identity(size: usize) -> Result<Self> {
        Self::check_size(size)?;
        Ok(Self { size, kind: Kind::Identity, starred: false })
    }

    pub fn transpose(size: usize) -> Result<Self> {
        Self::check_size(size)?;
        Ok(Self { size, kind: Kind::Transpose, starred: false })
    }

    /// Partial transpose of an `mn × mn` matrix viewed as `m × m` blocks of
    /// size `n × n`.
    pub fn partial_transpose(m: usize, n: usize) -> Result<Self> {
        PartialTransposeSpec::new(m, n).map(|p| p.permutation())
    }

    /// Explicit table from `((i, j), (i', j'))` rows; rejects non-bijections.
    pub fn from_pairs(size: usize, rows: &[(Cell, Cell)]) -> Result<Self> {
        Self::check_size(size)?;
        let cells = size * size;
        if rows.len() != cells {
            return Err(Error::NotBijection { size, reason: format!("{} rows for {cells} cells", rows.len()) });
        }
        let mut table = vec![u32::MAX; cells];
        let mut hit = vec![false; cells];
        for &((i, j), (a, b)) in rows {
            if i >= size || j >= size || a >= size || b >= size {
                return Err(Error::NotBijection { size, reason: format!("row ({i},{j}) -> ({a},{b}) out of range") });
            }
            if table[i * size + j] != u32::MAX {
                return Err(Error::NotBijection { size, reason: format!("({i},{j}) mapped twice") });
            }
            if hit[a * size + b] {
                return Err(Error::NotBijection { size, reason: format!("({a},{b}) hit twice") });
            }
            table[i * size + j] = (a * size + b) as u32;
            hit[a * size + b] = true;
        }
        Ok(Self { size, kind: Kind::Table(Arc::new(table)), starred: false })
    }

    /// A computed map. Grids with side at most [`DENSE_LIMIT`] are checked
    /// exhaustively; larger ones need `inverse`, which is checked on random
    /// cells.
    pub fn from_fn(
        name: &str,
        size: usize,
        f: impl Fn(usize, usize) -> (usize, usize) + Send + Sync + 'static,
        inverse: Option<&dyn Fn(usize, usize) -> (usize, usize)>,
    ) -> Result<Self> {
        Self::check_size(size)?;
        if size <= DENSE_LIMIT {
            let mut hit = vec![false; size * size];
            for i in 0..size {
                for j in 0..size {
                    let (a, b) = f(i, j);
                    if a >= size || b >= size || std::mem::replace(&mut hit[a * size + b], true) {
                        return Err(Error::NotBijection {
                            size,
                            reason: format!("collision or overflow at ({i},{j})"),
                        });
                    }
                }
            }
        } else {
            let inv = inverse.ok_or_else(|| Error::NotBijection {
                size,
                reason: "grids above the dense limit need an inverse".into(),
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(size as u64);
            for _ in 0..SAMPLE_CHECKS {
                let (i, j) = (rng.gen_range(0..size), rng.gen_range(0..size));
                let (a, b) = f(i, j);
                if a >= size || b >= size || inv(a, b) != (i, j) {
                    return Err(Error::NotBijection { size, reason: format!("inverse check failed at ({i},{j})") });
                }
            }
        }
        Ok(Self { size, kind: Kind::Rule { name: name.to_string(), f: Arc::new(f) }, starred: false })
    }

    fn check_size(size: usize) -> Result<()> {
        if size == 0 {
            return Err(Error::Empty("grid"));
        }
        if size > u32::MAX as usize {
            return Err(Error::Precondition(format!("grid side {size} too large")));
        }
        Ok(())
    }

    /// Parses `identity`, `transpose` or `partial:m,n`, each optionally
    /// followed by `*`. A partial transpose must have side `size`.
    pub fn builtin(spec: &str, size: usize) -> Result<Self> {
        let spec = spec.trim();
        let (base, starred) = match spec.strip_suffix('*') {
            Some(b) => (b, true),
            None => (spec, false),
        };
        let p = match base {
            "identity" | "e" => Self::identity(size)?,
            "transpose" | "t" => Self::transpose(size)?,
            _ => {
                let args = base
                    .strip_prefix("partial:")
                    .ok_or_else(|| Error::Parse(format!("unknown permutation {spec:?}")))?;
                let (m, n) =
                    args.split_once(',').ok_or_else(|| Error::Parse(format!("expected partial:m,n, got {spec:?}")))?;
                let m: usize = m.trim().parse().map_err(|_| Error::Parse(format!("bad m in {spec:?}")))?;
                let n: usize = n.trim().parse().map_err(|_| Error::Parse(format!("bad n in {spec:?}")))?;
                let p = Self::partial_transpose(m, n)?;
                if p.size != size {
                    return Err(Error::SizeMismatch { expected: size, actual: p.size });
                }
                p
            }
        };
        Ok(if starred { p.star() } else { p })
    }

    /// Parses CSV rows `i,j,i',j'` with 0-based indices.
    pub fn from_csv(size: usize, text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: Vec<usize> = line
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("line {}: expected four integers", lineno + 1)))?;
            if v.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected four integers", lineno + 1)));
            }
            rows.push(((v[0], v[1]), (v[2], v[3])));
        }
        Self::from_pairs(size, &rows)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn name(&self) -> String {
        let base = match &self.kind {
            Kind::Identity => "identity".to_string(),
            Kind::Transpose => "transpose".to_string(),
            Kind::PartialTranspose { m, n } => format!("partial:{m},{n}"),
            Kind::Table(_) => "table".to_string(),
            Kind::Rule { name, .. } => name.clone(),
        };
        if self.starred {
            format!("{base}*")
        } else {
            base
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity) || (matches!(self.kind, Kind::Transpose) && self.starred)
    }

    fn apply_base(&self, i: usize, j: usize) -> (usize, usize) {
        match &self.kind {
            Kind::Identity => (i, j),
            Kind::Transpose => (j, i),
            Kind::PartialTranspose { n, .. } => {
                let (bi, a) = (i / n, i % n);
                let (bj, b) = (j / n, j % n);
                (bi * n + b, bj * n + a)
            }
            Kind::Table(t) => {
                let c = t[i * self.size + j] as usize;
                (c / self.size, c % self.size)
            }
            Kind::Rule { f, .. } => f(i, j),
        }
    }

    /// `α(i, j)`.
    pub fn apply(&self, i: usize, j: usize) -> (usize, usize) {
        if self.starred {
            self.apply_base(j, i)
        } else {
            self.apply_base(i, j)
        }
    }

    /// `α*`, with `α*(i, j) = α(j, i)`.
    pub fn star(&self) -> Self {
        Self { starred: !self.starred, ..self.clone() }
    }

    /// `A^{⌈α⌉}` for a dense row-major matrix.
    pub fn permute_matrix<T: Clone>(&self, a: &[T]) -> Result<Vec<T>> {
        let n = self.size;
        if a.len() != n * n {
            return Err(Error::SizeMismatch { expected: n * n, actual: a.len() });
        }
        Ok((0..n * n)
            .map(|c| {
                let (i, j) = self.apply(c / n, c % n);
                a[i * n + j].clone()
            })
            .collect())
    }
}

/// `#{(i, j, k) : α(i, j) ∈ {(j, k), (k, i)}}`.
pub fn theta_condition_count(alpha: &PermutationSpec) -> u128 {
    let n = alpha.size();
    let mut count = 0u128;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = alpha.apply(i, j);
            let first = a == j;
            let second = b == i;
            count += first as u128 + second as u128 - (first && second && a == b) as u128;
        }
    }
    count
}

/// `#{(i, j, k) : α(i, j) ∈ {(i, k), (k, j)}}`: triples where `α` keeps
/// the row or the column of `(i, j)`.
pub fn row_col_condition_count(alpha: &PermutationSpec) -> u128 {
    let n = alpha.size();
    let mut count = 0u128;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = alpha.apply(i, j);
            let first = a == i;
            let second = b == j;
            count += first as u128 + second as u128 - (first && second && a == b) as u128;
        }
    }
    count
}

/// Cells `(i, j)` with `α(i, j) ∈ {(i, k), (k, j)}` for some `k`.
pub fn fixed_row_or_col_set(alpha: &PermutationSpec) -> BTreeSet<(usize, usize)> {
    let n = alpha.size();
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = alpha.apply(i, j);
            if a == i || b == j {
                out.insert((i, j));
            }
        }
    }
    out
}

/// Which of the two triple counts a diagnostic uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaVariant {
    /// `α(i, j) ∈ {(j, k), (k, i)}`.
    Swapped,
    /// `α(i, j) ∈ {(i, k), (k, j)}`.
    RowCol,
}

/// One row of a θ sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaPoint {
    pub size: usize,
    pub count: u128,
    /// `count / N^θ`.
    pub ratio: f64,
}

/// `count / N^θ` over a family of permutations indexed by grid side.
pub fn theta_sweep(
    family: impl Fn(usize) -> Result<PermutationSpec>,
    sizes: &[usize],
    theta: f64,
    variant: ThetaVariant,
) -> Result<Vec<ThetaPoint>> {
    sizes
        .iter()
        .map(|&s| {
            let alpha = family(s)?;
            let count = match variant {
                ThetaVariant::Swapped => theta_condition_count(&alpha),
                ThetaVariant::RowCol => row_col_condition_count(&alpha),
            };
            let size = alpha.size();
            Ok(ThetaPoint { size, count, ratio: count as f64 / (size as f64).powf(theta) })
        })
        .collect()
}

/// Partial transpose on `mn × mn` matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialTransposeSpec {
    m: usize,
    n: usize,
}

impl PartialTransposeSpec {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Precondition("block count and block size must be positive".into()));
        }
        m.checked_mul(n).filter(|&s| s <= u32::MAX as usize).ok_or(Error::Overflow)?;
        Ok(Self { m, n })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.m * self.n
    }

    pub fn permutation(&self) -> PermutationSpec {
        PermutationSpec { size: self.size(), kind: Kind::PartialTranspose { m: self.m, n: self.n }, starred: false }
    }

    /// Cells lying on the diagonal of some block: `i ≡ j (mod n)`.
    pub fn delta_set(&self) -> BTreeSet<(usize, usize)> {
        let s = self.size();
        (0..s).flat_map(|i| (0..s).filter(move |j| i % self.n == j % self.n).map(move |j| (i, j))).collect()
    }

    pub fn delta_size(&self) -> usize {
        self.n * self.m * self.m
    }
}

/// Free-function form of [`PartialTransposeSpec::delta_set`].
pub fn delta_set(spec: &PartialTransposeSpec) -> BTreeSet<(usize, usize)> {
    spec.delta_set()
}

/// Exact `φ∘tr(X* · X^{Γ,m})` when `N φ(x*x) = beta` and
/// `φ(x) = φ(x*) = 0`: equals `beta / n`.
pub fn partial_transpose_cross_moment(beta: &Scalar, m: usize, n: usize) -> Result<Scalar> {
    let spec = PartialTransposeSpec::new(m, n)?;
    let size = spec.size() as i64;
    // (1/N) Σ_{(i,j)} φ(x*_{ij} x_{α(i,j)}); only cells with α(i,j) = (i,j)
    // contribute, each with φ(x*x) = beta / N.
    Ok(int(spec.delta_size() as i64) * beta / int(size * size))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn brute_theta(alpha: &PermutationSpec) -> u128 {
        let n = alpha.size();
        let mut c = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = alpha.apply(i, j);
                    if p == (j, k) || p == (k, i) {
                        c += 1;
                    }
                }
            }
        }
        c
    }

    fn brute_row_col(alpha: &PermutationSpec) -> u128 {
        let n = alpha.size();
        let mut c = 0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = alpha.apply(i, j);
                    if p == (i, k) || p == (k, j) {
                        c += 1;
                    }
                }
            }
        }
        c
    }

    #[test]
    fn builtin_actions() {
        let t = PermutationSpec::transpose(3).unwrap();
        assert_eq!(t.apply(0, 2), (2, 0));
        let e = PermutationSpec::identity(3).unwrap();
        assert_eq!(e.apply(1, 2), (1, 2));
        assert_eq!(t.star(), e);
        assert_eq!(t.star().star(), t);
        let a: Vec<u32> = (0..9).collect();
        assert_eq!(e.permute_matrix(&a).unwrap(), a);
        assert_eq!(t.permute_matrix(&a).unwrap(), vec![0, 3, 6, 1, 4, 7, 2, 5, 8]);
    }

    #[test]
    fn partial_transpose_action() {
        let p = PermutationSpec::partial_transpose(2, 2).unwrap();
        // block (0,1), inner (0,1) -> block (0,1), inner (1,0)
        assert_eq!(p.apply(0, 3), (1, 2));
        let a: Vec<u32> = (0..16).collect();
        let b = p.permute_matrix(&a).unwrap();
        for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for x in 0..2 {
                for y in 0..2 {
                    assert_eq!(b[(bi * 2 + x) * 4 + bj * 2 + y], a[(bi * 2 + y) * 4 + bj * 2 + x]);
                }
            }
        }
        assert_eq!(PermutationSpec::partial_transpose(1, 3).unwrap(), PermutationSpec::transpose(3).unwrap());
        assert_eq!(PermutationSpec::partial_transpose(3, 1).unwrap(), PermutationSpec::identity(3).unwrap());
    }

    #[test]
    fn star_is_involution() {
        for p in [
            PermutationSpec::identity(4).unwrap(),
            PermutationSpec::transpose(4).unwrap(),
            PermutationSpec::partial_transpose(2, 2).unwrap(),
        ] {
            assert_eq!(p.star().star(), p);
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(p.star().apply(i, j), p.apply(j, i));
                }
            }
        }
    }

    #[test]
    fn explicit_tables() {
        let rows: Vec<_> = (0..2).flat_map(|i| (0..2).map(move |j| ((i, j), (1 - i, j)))).collect();
        let p = PermutationSpec::from_pairs(2, &rows).unwrap();
        assert_eq!(p.apply(0, 1), (1, 1));
        let mut bad = rows.clone();
        bad[0].1 = (1, 1);
        assert!(matches!(PermutationSpec::from_pairs(2, &bad), Err(Error::NotBijection { .. })));
        assert!(PermutationSpec::from_pairs(2, &rows[..3]).is_err());
        let csv = "0,0,1,0\n0,1,1,1\n1,0,0,0\n1,1,0,1\n";
        assert_eq!(PermutationSpec::from_csv(2, csv).unwrap(), p);
        assert!(PermutationSpec::from_csv(2, "0,0,1\n").is_err());
        assert!(PermutationSpec::from_fn("collapse", 3, |_, _| (0, 0), None).is_err());
        let shift = PermutationSpec::from_fn("shift", 3, |i, j| ((i + 1) % 3, j), None).unwrap();
        assert_eq!(shift.apply(2, 1), (0, 1));
    }

    #[test]
    fn builtin_names() {
        assert_eq!(PermutationSpec::builtin("partial:2,3", 6).unwrap().name(), "partial:2,3");
        assert!(PermutationSpec::builtin("partial:2,3", 5).is_err());
        assert_eq!(PermutationSpec::builtin("transpose*", 3).unwrap(), PermutationSpec::identity(3).unwrap());
        assert!(PermutationSpec::builtin("rotate", 3).is_err());
    }

    #[test]
    fn theta_counts_match_brute_force() {
        for n in 1..=6 {
            let e = PermutationSpec::identity(n).unwrap();
            let t = PermutationSpec::transpose(n).unwrap();
            assert_eq!(theta_condition_count(&e), brute_theta(&e));
            assert_eq!(theta_condition_count(&e), n as u128);
            assert_eq!(theta_condition_count(&t), brute_theta(&t));
            assert_eq!(theta_condition_count(&t), 2 * (n * n) as u128 - n as u128);
        }
        for (m, n) in [(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)] {
            let p = PermutationSpec::partial_transpose(m, n).unwrap();
            assert_eq!(theta_condition_count(&p), brute_theta(&p));
            assert_eq!(row_col_condition_count(&p), brute_row_col(&p));
            assert_eq!(theta_condition_count(&p), (m * n * (2 * n - 1)) as u128);
            assert_eq!(row_col_condition_count(&p), (m * n * (2 * m - 1)) as u128);
        }
    }

    #[test]
    fn row_col_cells_are_the_block_diagonals() {
        for m in 1..=3 {
            for n in 1..=4 {
                let spec = PartialTransposeSpec::new(m, n).unwrap();
                let delta = spec.delta_set();
                assert_eq!(delta.len(), spec.delta_size());
                assert_eq!(fixed_row_or_col_set(&spec.permutation()), delta);
            }
        }
        assert_eq!(PartialTransposeSpec::new(1, 1).unwrap().delta_set().into_iter().collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(PartialTransposeSpec::new(2, 2).unwrap().delta_size(), 8);
    }

    #[test]
    fn sweep_ratios() {
        let pts = theta_sweep(PermutationSpec::transpose, &[4, 8], 2.0, ThetaVariant::Swapped).unwrap();
        assert!((pts[1].ratio - (2.0 - 1.0 / 8.0)).abs() < 1e-12);
        let pts =
            theta_sweep(|n| PermutationSpec::partial_transpose(2, n), &[2, 4, 8], 2.0, ThetaVariant::RowCol).unwrap();
        assert!(pts.windows(2).all(|w| w[1].ratio < w[0].ratio));
    }

    #[test]
    fn cross_moment_formula() {
        assert_eq!(partial_transpose_cross_moment(&int(2), 3, 4).unwrap(), ratio(1, 2));
        assert_eq!(partial_transpose_cross_moment(&int(5), 7, 1).unwrap(), int(5));
        assert_eq!(partial_transpose_cross_moment(&int(0), 2, 2).unwrap(), int(0));
    }
}
