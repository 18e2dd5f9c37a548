//! The product-space reduction.
//!
//! A tuple `U = (x₁, …, xₙ) ∈ Xⁿ` is a plain slice of points. Given `⋆`,
//! `F` and `g` this module builds the projections `U⋆ᵢ = (x_{i_1}, …, x_{i_n})`,
//! the induced self-maps
//!
//! ```text
//! F⋆(U) = (F(U⋆₁), …, F(U⋆ₙ))      G(U) = (g(x₁), …, g(xₙ))
//! ```
//!
//! the metrics `Δₙ` (mean of coordinate distances) and `∇ₙ` (max of them),
//! and the componentwise order `⊑ₙ`. A `⋆`-coincidence point of `(F, g)` is
//! exactly a coincidence point of `(F⋆, G)`.

use alloc::vec::Vec;

use serde::Serialize;
use thiserror::Error;

use crate::index::{StarError, StarOp};
use crate::map::{decode_tuple, EvalError, Mapping, SelfMap};
use crate::space::OrderedMetricSpace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("tuple lengths differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error(transparent)]
    Index(#[from] StarError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn same_len<P>(u: &[P], v: &[P]) -> Result<(), ProductError> {
    if u.len() == v.len() {
        Ok(())
    } else {
        Err(ProductError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        })
    }
}

/// `U⋆ᵢ` for a 1-based row index `i`.
pub fn project_star<P: Clone>(u: &[P], star: &StarOp, i: usize) -> Result<Vec<P>, ProductError> {
    if u.len() != star.n() {
        return Err(ProductError::DimensionMismatch {
            left: u.len(),
            right: star.n(),
        });
    }
    if i == 0 || i > star.n() {
        return Err(StarError::IndexOutOfRange { index: i, n: star.n() }.into());
    }
    Ok(project0(u, star, i - 1))
}

/// `U⋆ᵢ` for a 0-based row, without checks.
pub(crate) fn project0<P: Clone>(u: &[P], star: &StarOp, row: usize) -> Vec<P> {
    star.row0(row).iter().map(|&j| u[j].clone()).collect()
}

/// `Δₙ(U, V) = (1/n) Σᵢ d(xᵢ, yᵢ)`.
pub fn delta_n<S: OrderedMetricSpace>(space: &S, u: &[S::Point], v: &[S::Point]) -> Result<f64, ProductError> {
    same_len(u, v)?;
    let sum: f64 = u.iter().zip(v).map(|(x, y)| space.distance(x, y)).sum();
    Ok(sum / u.len() as f64)
}

/// `∇ₙ(U, V) = maxᵢ d(xᵢ, yᵢ)`.
pub fn nabla_n<S: OrderedMetricSpace>(space: &S, u: &[S::Point], v: &[S::Point]) -> Result<f64, ProductError> {
    same_len(u, v)?;
    Ok(u.iter().zip(v).map(|(x, y)| space.distance(x, y)).fold(0.0, f64::max))
}

/// `U ⊑ₙ V`: `xᵢ ⪯ yᵢ` for every `i`.
pub fn order_leq_n<S: OrderedMetricSpace>(space: &S, u: &[S::Point], v: &[S::Point]) -> Result<bool, ProductError> {
    same_len(u, v)?;
    Ok(u.iter().zip(v).all(|(x, y)| space.leq(x, y)))
}

/// Comparable in `⊑ₙ` (either direction). Lengths must match.
pub(crate) fn comparable_n<S: OrderedMetricSpace>(space: &S, u: &[S::Point], v: &[S::Point]) -> bool {
    u.iter().zip(v).all(|(x, y)| space.leq(x, y)) || u.iter().zip(v).all(|(x, y)| space.leq(y, x))
}

/// `F⋆` and `G` induced by `F`, `g` and `⋆`.
pub struct InducedMaps<F, G> {
    pub f: F,
    pub g: G,
    pub star: StarOp,
}

impl<F, G> InducedMaps<F, G> {
    pub fn new(f: F, g: G, star: StarOp) -> Self {
        InducedMaps { f, g, star }
    }

    pub fn n(&self) -> usize {
        self.star.n()
    }

    fn check_len<P>(&self, u: &[P]) -> Result<(), ProductError> {
        if u.len() == self.star.n() {
            Ok(())
        } else {
            Err(ProductError::DimensionMismatch {
                left: u.len(),
                right: self.star.n(),
            })
        }
    }

    /// `F⋆(U)`: component `i` is `F(U⋆ᵢ)`.
    pub fn f_star<P: Clone>(&self, u: &[P]) -> Result<Vec<P>, ProductError>
    where
        F: Mapping<P>,
    {
        self.check_len(u)?;
        let mut args = Vec::with_capacity(u.len());
        (0..self.star.n())
            .map(|row| {
                args.clear();
                args.extend(self.star.row0(row).iter().map(|&j| u[j].clone()));
                Ok(self.f.eval(&args)?)
            })
            .collect()
    }

    /// `G(U) = (g(x₁), …, g(xₙ))`.
    pub fn big_g<P: Clone>(&self, u: &[P]) -> Result<Vec<P>, ProductError>
    where
        G: SelfMap<P>,
    {
        big_g(&self.g, u)
    }
}

/// `G(U)` for any self-map `g`.
pub fn big_g<P, G: SelfMap<P> + ?Sized>(g: &G, u: &[P]) -> Result<Vec<P>, ProductError> {
    Ok(u.iter().map(|x| g.eval(x)).collect::<Result<Vec<_>, _>>()?)
}

/// One row of [`row_distance_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowDistances {
    /// 1-based row index.
    pub row: usize,
    /// `(1/n) Σₖ d(g x_{i_k}, g y_{i_k})`
    pub mean: f64,
    /// `maxₖ d(g x_{i_k}, g y_{i_k})`
    pub max: f64,
    pub mean_matches_delta: bool,
    pub max_matches_nabla: bool,
    pub max_bounded_by_nabla: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowDistanceReport {
    pub delta: f64,
    pub nabla: f64,
    pub rows: Vec<RowDistances>,
}

impl RowDistanceReport {
    pub fn all_equal(&self) -> bool {
        self.rows.iter().all(|r| r.mean_matches_delta && r.max_matches_nabla)
    }

    pub fn all_bounded(&self) -> bool {
        self.rows.iter().all(|r| r.max_bounded_by_nabla)
    }
}

/// Compares the per-row mean and max of `d(g x_{i_k}, g y_{i_k})` against
/// `Δₙ(GU, GV)` and `∇ₙ(GU, GV)`. For a permuted `⋆` both equalities hold;
/// the bound `max ≤ ∇ₙ` holds for every `⋆`. Comparisons use `tol`.
pub fn row_distance_check<S, G>(
    space: &S,
    g: &G,
    star: &StarOp,
    u: &[S::Point],
    v: &[S::Point],
    tol: f64,
) -> Result<RowDistanceReport, ProductError>
where
    S: OrderedMetricSpace,
    G: SelfMap<S::Point> + ?Sized,
{
    same_len(u, v)?;
    if u.len() != star.n() {
        return Err(ProductError::DimensionMismatch {
            left: u.len(),
            right: star.n(),
        });
    }
    let gu = big_g(g, u)?;
    let gv = big_g(g, v)?;
    let n = star.n();
    let delta = delta_n(space, &gu, &gv)?;
    let nabla = nabla_n(space, &gu, &gv)?;
    let rows = star
        .rows0()
        .enumerate()
        .map(|(row, idx)| {
            let dists = idx.iter().map(|&j| space.distance(&gu[j], &gv[j]));
            let mean = dists.clone().sum::<f64>() / n as f64;
            let max = dists.fold(0.0, f64::max);
            RowDistances {
                row: row + 1,
                mean,
                max,
                mean_matches_delta: (mean - delta).abs() <= tol,
                max_matches_nabla: (max - nabla).abs() <= tol,
                max_bounded_by_nabla: max <= nabla + tol,
            }
        })
        .collect();
    Ok(RowDistanceReport { delta, nabla, rows })
}

/// Iterates every tuple in `{0..p}ⁿ` in lexicographic order.
pub struct Tuples {
    p: usize,
    next: usize,
    count: usize,
    buf: Vec<usize>,
}

impl Tuples {
    /// `None` if `pⁿ` overflows.
    pub fn new(p: usize, n: usize) -> Option<Self> {
        Some(Tuples {
            p,
            next: 0,
            count: crate::map::tuple_count(p, n)?,
            buf: alloc::vec![0; n],
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

impl Iterator for Tuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.next >= self.count {
            return None;
        }
        decode_tuple(self.next, self.p, &mut self.buf);
        self.next += 1;
        Some(self.buf.clone())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.count - self.next;
        (rest, Some(rest))
    }
}
