//! Binary operations `⋆` on the index set `Iₙ = {1, …, n}`.
//!
//! An operation is stored as its `n × n` matrix: row `i` is the index
//! sequence `(i_1, …, i_n)` that selects the arguments of the `i`-th
//! component equation. Indices are 1-based at every public boundary.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StarError {
    #[error("tuple dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("entry {value} at ({row}, {col}) is outside 1..={n}")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: usize,
        n: usize,
    },
    #[error("row index {index} is outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("unknown preset `{0}`")]
    UnknownPreset(alloc::string::String),
    #[error("preset `{name}` has fixed dimension {fixed}, requested {requested}")]
    PresetDimension {
        name: &'static str,
        fixed: usize,
        requested: usize,
    },
    #[error("preset `{0}` needs a dimension")]
    MissingDimension(&'static str),
}

/// A binary operation on `Iₙ`, validated on construction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StarOp {
    n: usize,
    // row-major, 0-based
    entries: Vec<usize>,
}

impl StarOp {
    /// Builds an operation from a 1-based `n × n` matrix.
    pub fn new(n: usize, rows: &[Vec<usize>]) -> Result<Self, StarError> {
        if n < 2 {
            return Err(StarError::DimensionTooSmall(n));
        }
        if rows.len() != n {
            return Err(StarError::RowCount {
                expected: n,
                found: rows.len(),
            });
        }
        let mut entries = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(StarError::RowLength {
                    row: r + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            for (c, &value) in row.iter().enumerate() {
                if value == 0 || value > n {
                    return Err(StarError::EntryOutOfRange {
                        row: r + 1,
                        col: c + 1,
                        value,
                        n,
                    });
                }
                entries.push(value - 1);
            }
        }
        Ok(StarOp { n, entries })
    }

    fn from_fn(n: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self, StarError> {
        if n < 2 {
            return Err(StarError::DimensionTooSmall(n));
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 1..=n {
            for k in 1..=n {
                let value = f(i, k);
                debug_assert!((1..=n).contains(&value));
                entries.push(value - 1);
            }
        }
        Ok(StarOp { n, entries })
    }

    /// `F(x_i, x_{i+1}, …, x_n, x_1, …, x_{i-1}) = x_i`.
    pub fn forward_cyclic(n: usize) -> Result<Self, StarError> {
        Self::from_fn(n, |i, k| if k + i <= n + 1 { i + k - 1 } else { i + k - n - 1 })
    }

    /// `F(x_i, x_{i-1}, …, x_1, x_n, …, x_{i+1}) = x_i`.
    ///
    /// The second branch runs up to and including column `n`, as in the
    /// matrix form `(1, n, n-1, …, 2)`.
    pub fn backward_cyclic(n: usize) -> Result<Self, StarError> {
        Self::from_fn(n, |i, k| if k <= i { i + 1 - k } else { n + i + 1 - k })
    }

    /// 1-skew cyclic: `F(x_i, x_{i-1}, …, x_1, x_2, …, x_{n-i+1}) = x_i`.
    pub fn skew_1(n: usize) -> Result<Self, StarError> {
        Self::from_fn(n, |i, k| if k <= i { i + 1 - k } else { k + 1 - i })
    }

    /// n-skew cyclic: `F(x_i, x_{i+1}, …, x_n, x_{n-1}, …, x_{n-i+1}) = x_i`.
    pub fn skew_n(n: usize) -> Result<Self, StarError> {
        Self::from_fn(n, |i, k| if k + i <= n + 1 { i + k - 1 } else { 2 * n + 1 - i - k })
    }

    /// The quadruple operation `[[1,2,3,4],[1,4,3,2],[3,2,1,4],[3,4,1,2]]`.
    pub fn karapinar_quadruple() -> Self {
        const ROWS: [[usize; 4]; 4] = [[1, 2, 3, 4], [1, 4, 3, 2], [3, 2, 1, 4], [3, 4, 1, 2]];
        Self::fixed(&ROWS)
    }

    /// The tripled operation `[[1,2,3],[2,1,3],[3,2,1]]`.
    pub fn borcut_triple() -> Self {
        const ROWS: [[usize; 3]; 3] = [[1, 2, 3], [2, 1, 3], [3, 2, 1]];
        Self::fixed(&ROWS)
    }

    /// The coupled operation `[[1,2],[2,1]]`.
    pub fn coupled() -> Self {
        const ROWS: [[usize; 2]; 2] = [[1, 2], [2, 1]];
        Self::fixed(&ROWS)
    }

    fn fixed<const N: usize>(rows: &[[usize; N]; N]) -> Self {
        let entries = rows.iter().flat_map(|r| r.iter().map(|v| v - 1)).collect();
        StarOp { n: N, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `i_k` of row `i`, all 1-based.
    pub fn entry(&self, i: usize, k: usize) -> Result<usize, StarError> {
        let n = self.n;
        if i == 0 || i > n {
            return Err(StarError::IndexOutOfRange { index: i, n });
        }
        if k == 0 || k > n {
            return Err(StarError::IndexOutOfRange { index: k, n });
        }
        Ok(self.entries[(i - 1) * n + (k - 1)] + 1)
    }

    /// Row `i` as the 1-based sequence `(i_1, …, i_n)`.
    pub fn row_projection(&self, i: usize) -> Result<Vec<usize>, StarError> {
        if i == 0 || i > self.n {
            return Err(StarError::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(self.row0(i - 1).iter().map(|v| v + 1).collect())
    }

    /// Row `i` (0-based) with 0-based entries.
    pub fn row0(&self, i: usize) -> &[usize] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows0(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.entries.chunks(self.n)
    }

    /// The 1-based matrix.
    pub fn to_matrix(&self) -> Vec<Vec<usize>> {
        self.rows0().map(|r| r.iter().map(|v| v + 1).collect()).collect()
    }

    /// True iff every row is a permutation of `Iₙ`.
    pub fn is_permuted(&self) -> bool {
        let mut seen = alloc::vec![false; self.n];
        self.rows0().all(|row| {
            seen.iter_mut().for_each(|s| *s = false);
            for &v in row {
                if seen[v] {
                    return false;
                }
                seen[v] = true;
            }
            true
        })
    }

    /// Resolves a named preset. Presets with a fixed size accept `n` only
    /// when it matches.
    pub fn preset(preset: Preset, n: Option<usize>) -> Result<Self, StarError> {
        let need = |name| n.ok_or(StarError::MissingDimension(name));
        let fixed = |op: StarOp, name| match n {
            Some(req) if req != op.n => Err(StarError::PresetDimension {
                name,
                fixed: op.n,
                requested: req,
            }),
            _ => Ok(op),
        };
        match preset {
            Preset::ForwardCyclic => Self::forward_cyclic(need("forward_cyclic")?),
            Preset::BackwardCyclic => Self::backward_cyclic(need("backward_cyclic")?),
            Preset::Skew1 => Self::skew_1(need("skew_1")?),
            Preset::SkewN => Self::skew_n(need("skew_n")?),
            Preset::Karapinar4 => fixed(Self::karapinar_quadruple(), "karapinar4"),
            Preset::Borcut3 => fixed(Self::borcut_triple(), "borcut3"),
            Preset::Coupled2 => fixed(Self::coupled(), "coupled2"),
        }
    }
}

impl fmt::Debug for StarOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarOp")
            .field("n", &self.n)
            .field("rows", &self.to_matrix())
            .finish()
    }
}

impl fmt::Display for StarOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (r, row) in self.rows0().enumerate() {
            if r > 0 {
                writeln!(f)?;
            }
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", v + 1)?;
            }
        }
        Ok(())
    }
}

/// Named operations addressable by string id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    ForwardCyclic,
    BackwardCyclic,
    Skew1,
    SkewN,
    Karapinar4,
    Borcut3,
    Coupled2,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::ForwardCyclic,
        Preset::BackwardCyclic,
        Preset::Skew1,
        Preset::SkewN,
        Preset::Karapinar4,
        Preset::Borcut3,
        Preset::Coupled2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::ForwardCyclic => "forward_cyclic",
            Preset::BackwardCyclic => "backward_cyclic",
            Preset::Skew1 => "skew_1",
            Preset::SkewN => "skew_n",
            Preset::Karapinar4 => "karapinar4",
            Preset::Borcut3 => "borcut3",
            Preset::Coupled2 => "coupled2",
        }
    }
}

impl FromStr for Preset {
    type Err = StarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| StarError::UnknownPreset(s.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[usize]]) -> Vec<Vec<usize>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    // Independent reading of the definition: a row is a permutation iff its
    // entry set equals {1..n}.
    fn rows_are_permutations(matrix: &[Vec<usize>]) -> bool {
        let n = matrix.len();
        matrix.iter().all(|row| {
            let mut sorted = row.clone();
            sorted.sort_unstable();
            sorted == (1..=n).collect::<Vec<_>>()
        })
    }

    #[test]
    fn make_star_accepts_valid_matrices() {
        let ex1 = StarOp::new(3, &m(&[&[1, 2, 3], &[2, 1, 3], &[3, 2, 1]])).unwrap();
        assert_eq!(ex1.n(), 3);
        let constant = StarOp::new(2, &m(&[&[1, 1], &[1, 1]])).unwrap();
        assert_eq!(constant.to_matrix(), m(&[&[1, 1], &[1, 1]]));
    }

    #[test]
    fn make_star_rejects_bad_input() {
        assert_eq!(
            StarOp::new(2, &m(&[&[0, 1], &[1, 2]])),
            Err(StarError::EntryOutOfRange {
                row: 1,
                col: 1,
                value: 0,
                n: 2
            })
        );
        assert!(matches!(
            StarOp::new(2, &m(&[&[1, 3], &[1, 2]])),
            Err(StarError::EntryOutOfRange { value: 3, .. })
        ));
        assert_eq!(StarOp::new(1, &m(&[&[1]])), Err(StarError::DimensionTooSmall(1)));
        assert!(matches!(
            StarOp::new(3, &m(&[&[1, 2, 3], &[1, 2, 3]])),
            Err(StarError::RowCount { expected: 3, found: 2 })
        ));
        assert!(matches!(
            StarOp::new(2, &m(&[&[1, 2], &[1]])),
            Err(StarError::RowLength { row: 2, .. })
        ));
    }

    #[test]
    fn cyclic_constructors_match_matrix_displays() {
        assert_eq!(StarOp::forward_cyclic(2).unwrap().to_matrix(), m(&[&[1, 2], &[2, 1]]));
        assert_eq!(
            StarOp::forward_cyclic(3).unwrap().to_matrix(),
            m(&[&[1, 2, 3], &[2, 3, 1], &[3, 1, 2]])
        );
        assert_eq!(
            StarOp::backward_cyclic(3).unwrap().to_matrix(),
            m(&[&[1, 3, 2], &[2, 1, 3], &[3, 2, 1]])
        );
        assert_eq!(
            StarOp::backward_cyclic(4).unwrap().to_matrix(),
            m(&[&[1, 4, 3, 2], &[2, 1, 4, 3], &[3, 2, 1, 4], &[4, 3, 2, 1]])
        );
        assert_eq!(
            StarOp::skew_1(3).unwrap().to_matrix(),
            m(&[&[1, 2, 3], &[2, 1, 2], &[3, 2, 1]])
        );
        assert_eq!(
            StarOp::skew_n(3).unwrap().to_matrix(),
            m(&[&[1, 2, 3], &[2, 3, 2], &[3, 2, 1]])
        );
        for ctor in [
            StarOp::forward_cyclic,
            StarOp::backward_cyclic,
            StarOp::skew_1,
            StarOp::skew_n,
        ] {
            assert_eq!(ctor(1), Err(StarError::DimensionTooSmall(1)));
            assert_eq!(ctor(0), Err(StarError::DimensionTooSmall(0)));
        }
    }

    #[test]
    fn constructor_entry_identities() {
        for n in 2..=8 {
            let fwd = StarOp::forward_cyclic(n).unwrap();
            assert_eq!(fwd.row_projection(1).unwrap(), (1..=n).collect::<Vec<_>>());
            let bwd = StarOp::backward_cyclic(n).unwrap();
            let s1 = StarOp::skew_1(n).unwrap();
            let sn = StarOp::skew_n(n).unwrap();
            for i in 1..=n {
                assert_eq!(bwd.entry(i, 1).unwrap(), i);
                assert_eq!(s1.entry(i, i).unwrap(), 1);
                assert_eq!(sn.entry(i, n - i + 1).unwrap(), n);
            }
        }
    }

    #[test]
    fn permuted_classification_of_named_families() {
        for n in 2..=8 {
            assert!(StarOp::forward_cyclic(n).unwrap().is_permuted());
            assert!(StarOp::backward_cyclic(n).unwrap().is_permuted());
        }
        for n in 3..=8 {
            assert!(!StarOp::skew_1(n).unwrap().is_permuted());
            assert!(!StarOp::skew_n(n).unwrap().is_permuted());
        }
        assert!(StarOp::karapinar_quadruple().is_permuted());
        assert!(StarOp::borcut_triple().is_permuted());
        let circ = StarOp::new(3, &m(&[&[1, 2, 3], &[2, 1, 3], &[3, 3, 2]])).unwrap();
        assert!(!circ.is_permuted());
        assert!(!StarOp::new(2, &m(&[&[1, 1], &[1, 1]])).unwrap().is_permuted());
    }

    #[test]
    fn size_two_families_coincide() {
        let coupled = m(&[&[1, 2], &[2, 1]]);
        assert_eq!(StarOp::skew_1(2).unwrap().to_matrix(), coupled);
        assert_eq!(StarOp::skew_n(2).unwrap().to_matrix(), coupled);
        assert_eq!(StarOp::forward_cyclic(2).unwrap().to_matrix(), coupled);
        assert_eq!(StarOp::coupled().to_matrix(), coupled);
    }

    #[test]
    fn is_permuted_agrees_with_row_sets() {
        // all 16 operations on I2
        for bits in 0u32..16 {
            let rows: Vec<Vec<usize>> = (0..2)
                .map(|r| (0..2).map(|c| 1 + ((bits >> (2 * r + c)) & 1) as usize).collect())
                .collect();
            let star = StarOp::new(2, &rows).unwrap();
            assert_eq!(star.is_permuted(), rows_are_permutations(&rows), "{rows:?}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..500 {
            let n = 3 + trial % 2;
            let rows: Vec<Vec<usize>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(1..=n)).collect()).collect();
            let star = StarOp::new(n, &rows).unwrap();
            assert_eq!(star.is_permuted(), rows_are_permutations(&rows));
        }
    }

    #[test]
    fn row_projection_reads_rows() {
        assert_eq!(
            StarOp::forward_cyclic(3).unwrap().row_projection(2).unwrap(),
            vec![2, 3, 1]
        );
        assert_eq!(
            StarOp::karapinar_quadruple().row_projection(2).unwrap(),
            vec![1, 4, 3, 2]
        );
        assert_eq!(
            StarOp::coupled().row_projection(3),
            Err(StarError::IndexOutOfRange { index: 3, n: 2 })
        );
        assert!(StarOp::coupled().row_projection(0).is_err());
    }

    #[test]
    fn presets_resolve_by_name() {
        let p: Preset = "karapinar4".parse().unwrap();
        assert_eq!(StarOp::preset(p, None).unwrap(), StarOp::karapinar_quadruple());
        assert_eq!(
            StarOp::preset("borcut3".parse().unwrap(), None).unwrap().to_matrix(),
            m(&[&[1, 2, 3], &[2, 1, 3], &[3, 2, 1]])
        );
        assert!(matches!(
            StarOp::preset(Preset::Coupled2, Some(3)),
            Err(StarError::PresetDimension { .. })
        ));
        assert_eq!(
            StarOp::preset(Preset::Skew1, None),
            Err(StarError::MissingDimension("skew_1"))
        );
        assert!(matches!("nope".parse::<Preset>(), Err(StarError::UnknownPreset(_))));
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }

    #[test]
    fn display_is_space_separated_rows() {
        let s = alloc::format!("{}", StarOp::forward_cyclic(3).unwrap());
        assert_eq!(s, "1 2 3\n2 3 1\n3 1 2");
    }
}
