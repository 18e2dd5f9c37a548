//! Ordered metric spaces.
//!
//! Two concrete carriers: [`VectorSpace`] (`ℝᵏ` with the componentwise order)
//! for the solver, and [`FiniteSpace`] (tabulated distances and order) for
//! exact, exhaustive oracles. [`Dual`] flips the order of any space.

use alloc::vec::Vec;
use core::fmt::Debug;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sampling::{stream_rng, SamplePlan};

pub trait OrderedMetricSpace {
    type Point: Clone + PartialEq + Debug + Send + Sync;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// The partial order `x ⪯ y`.
    fn leq(&self, x: &Self::Point, y: &Self::Point) -> bool;

    /// `x ≺≻ y`: the points are comparable.
    fn comparable(&self, x: &Self::Point, y: &Self::Point) -> bool {
        self.leq(x, y) || self.leq(y, x)
    }

    /// Whether `x` is a legitimate, finite element of the carrier.
    fn is_valid(&self, x: &Self::Point) -> bool;
}

/// A space that hypothesis checks can walk: exhaustively when the carrier is
/// finite, by seeded sampling otherwise.
pub trait Domain: OrderedMetricSpace {
    /// Every point of the carrier, if it is finite.
    fn points(&self) -> Option<Vec<Self::Point>>;

    fn sample_point(&self, rng: &mut ChaCha8Rng, plan: &SamplePlan) -> Self::Point;

    /// A random `y` with `x ⪯ y`.
    fn sample_above(&self, rng: &mut ChaCha8Rng, x: &Self::Point, plan: &SamplePlan) -> Self::Point;

    /// A random `y` with `y ⪯ x`.
    fn sample_below(&self, rng: &mut ChaCha8Rng, x: &Self::Point, plan: &SamplePlan) -> Self::Point;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    #[default]
    Euclidean,
    Max,
    Sum,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Max => "max",
            MetricKind::Sum => "sum",
        }
    }
}

/// `ℝᵏ` with one of three metrics and the componentwise order.
///
/// Order comparisons are exact; an epsilon-order would not be transitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorSpace {
    pub k: usize,
    pub metric: MetricKind,
}

impl VectorSpace {
    pub fn new(k: usize, metric: MetricKind) -> Self {
        VectorSpace { k, metric }
    }

    pub fn real_line() -> Self {
        VectorSpace::new(1, MetricKind::Euclidean)
    }
}

impl OrderedMetricSpace for VectorSpace {
    type Point = Vec<f64>;

    fn distance(&self, x: &Vec<f64>, y: &Vec<f64>) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self.metric {
            MetricKind::Euclidean if self.k == 1 => diffs.sum(),
            MetricKind::Euclidean => libm::sqrt(diffs.map(|d| d * d).sum()),
            MetricKind::Max => diffs.fold(0.0, f64::max),
            MetricKind::Sum => diffs.sum(),
        }
    }

    fn leq(&self, x: &Vec<f64>, y: &Vec<f64>) -> bool {
        x.iter().zip(y).all(|(a, b)| a <= b)
    }

    fn is_valid(&self, x: &Vec<f64>) -> bool {
        x.len() == self.k && x.iter().all(|v| v.is_finite())
    }
}

// Per-coordinate offsets are zero with this probability, so sampled pairs
// include equal and partially equal coordinates.
const ZERO_OFFSET_ODDS: f64 = 0.1;

fn offset(rng: &mut ChaCha8Rng, plan: &SamplePlan) -> f64 {
    if rng.gen_bool(ZERO_OFFSET_ODDS) {
        0.0
    } else {
        rng.gen_range(0.0..=(plan.upper - plan.lower).abs())
    }
}

impl Domain for VectorSpace {
    fn points(&self) -> Option<Vec<Vec<f64>>> {
        None
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng, plan: &SamplePlan) -> Vec<f64> {
        (0..self.k).map(|_| rng.gen_range(plan.lower..=plan.upper)).collect()
    }

    fn sample_above(&self, rng: &mut ChaCha8Rng, x: &Vec<f64>, plan: &SamplePlan) -> Vec<f64> {
        x.iter().map(|v| v + offset(rng, plan)).collect()
    }

    fn sample_below(&self, rng: &mut ChaCha8Rng, x: &Vec<f64>, plan: &SamplePlan) -> Vec<f64> {
        x.iter().map(|v| v - offset(rng, plan)).collect()
    }
}

/// Draws `(x, y)` with `x ⪯ y`: `x` uniform in the plan's box, `y` = `x` plus
/// a nonnegative offset per coordinate. Deterministic in `plan.seed`.
pub fn random_comparable_pair(space: &VectorSpace, plan: &SamplePlan) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream_rng(plan.seed, 0);
    let x = space.sample_point(&mut rng, plan);
    let y = space.sample_above(&mut rng, &x, plan);
    (x, y)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("space must have at least one point")]
    Empty,
    #[error("{table} table must be {p}x{p}, found a row of length {found} at row {row}")]
    Shape {
        table: &'static str,
        p: usize,
        row: usize,
        found: usize,
    },
    #[error("{table} table has {found} rows, expected {p}")]
    RowCount {
        table: &'static str,
        p: usize,
        found: usize,
    },
}

/// A finite ordered metric space on the points `0..p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    p: usize,
    dist: Vec<f64>,
    leq: Vec<bool>,
}

impl FiniteSpace {
    /// Builds a space from a `p × p` distance table and `p × p` order table.
    /// Only the shapes are checked here; see [`FiniteSpace::validate`].
    pub fn new(dist: &[Vec<f64>], leq: &[Vec<bool>]) -> Result<Self, SpaceError> {
        let p = dist.len();
        if p == 0 {
            return Err(SpaceError::Empty);
        }
        if leq.len() != p {
            return Err(SpaceError::RowCount {
                table: "order",
                p,
                found: leq.len(),
            });
        }
        for (table, lens) in [
            ("distance", dist.iter().map(Vec::len).collect::<Vec<_>>()),
            ("order", leq.iter().map(Vec::len).collect()),
        ] {
            if let Some((row, &found)) = lens.iter().enumerate().find(|(_, &l)| l != p) {
                return Err(SpaceError::Shape { table, p, row, found });
            }
        }
        Ok(FiniteSpace {
            p,
            dist: dist.iter().flatten().copied().collect(),
            leq: leq.iter().flatten().copied().collect(),
        })
    }

    /// The chain `0 ⪯ 1 ⪯ … ⪯ p-1` with `d(i, j) = |i - j|`.
    pub fn chain(p: usize) -> Self {
        let positions: Vec<f64> = (0..p).map(|i| i as f64).collect();
        Self::on_line(&positions, |i, j| i <= j)
    }

    /// Points at the given positions on the real line, ordered by `leq`.
    pub fn on_line(positions: &[f64], leq: impl Fn(usize, usize) -> bool) -> Self {
        let p = positions.len();
        let mut dist = Vec::with_capacity(p * p);
        let mut order = Vec::with_capacity(p * p);
        for i in 0..p {
            for j in 0..p {
                dist.push((positions[i] - positions[j]).abs());
                order.push(leq(i, j));
            }
        }
        FiniteSpace { p, dist, leq: order }
    }

    pub fn len(&self) -> usize {
        self.p
    }

    pub fn is_empty(&self) -> bool {
        self.p == 0
    }

    pub fn dist_table(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.p).map(<[f64]>::to_vec).collect()
    }

    pub fn order_table(&self) -> Vec<Vec<bool>> {
        self.leq.chunks(self.p).map(<[bool]>::to_vec).collect()
    }

    /// Every metric and order axiom violation, each with witness indices.
    ///
    /// The triangle inequality allows a relative slack of `1e-12` so that
    /// tables written in decimal text are not rejected for rounding.
    pub fn validate(&self) -> Vec<Violation> {
        let p = self.p;
        let d = |i: usize, j: usize| self.dist[i * p + j];
        let le = |i: usize, j: usize| self.leq[i * p + j];
        let mut out = Vec::new();
        let mut push = |axiom, witness: &[usize]| {
            out.push(Violation {
                axiom,
                witness: witness.to_vec(),
            })
        };
        for i in 0..p {
            if d(i, i) != 0.0 {
                push(Axiom::ZeroDiagonal, &[i]);
            }
            if !le(i, i) {
                push(Axiom::Reflexivity, &[i]);
            }
            for j in 0..p {
                let dij = d(i, j);
                if !dij.is_finite() || dij < 0.0 {
                    push(Axiom::NonNegativity, &[i, j]);
                }
                if i < j {
                    if dij != d(j, i) {
                        push(Axiom::Symmetry, &[i, j]);
                    }
                    if dij == 0.0 {
                        push(Axiom::Separation, &[i, j]);
                    }
                    if le(i, j) && le(j, i) {
                        push(Axiom::Antisymmetry, &[i, j]);
                    }
                }
                for k in 0..p {
                    let direct = d(i, k);
                    let via = dij + d(j, k);
                    if direct > via + 1e-12 * via.abs().max(1.0) {
                        push(Axiom::Triangle, &[i, j, k]);
                    }
                    if le(i, j) && le(j, k) && !le(i, k) {
                        push(Axiom::Transitivity, &[i, j, k]);
                    }
                }
            }
        }
        out
    }

    /// The same carrier with the order reversed.
    pub fn reversed(&self) -> Self {
        let p = self.p;
        let mut leq = self.leq.clone();
        for i in 0..p {
            for j in 0..p {
                leq[i * p + j] = self.leq[j * p + i];
            }
        }
        FiniteSpace {
            p,
            dist: self.dist.clone(),
            leq,
        }
    }
}

impl OrderedMetricSpace for FiniteSpace {
    type Point = usize;

    fn distance(&self, x: &usize, y: &usize) -> f64 {
        self.dist[x * self.p + y]
    }

    fn leq(&self, x: &usize, y: &usize) -> bool {
        self.leq[x * self.p + y]
    }

    fn is_valid(&self, x: &usize) -> bool {
        *x < self.p
    }
}

impl Domain for FiniteSpace {
    fn points(&self) -> Option<Vec<usize>> {
        Some((0..self.p).collect())
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng, _plan: &SamplePlan) -> usize {
        rng.gen_range(0..self.p)
    }

    fn sample_above(&self, rng: &mut ChaCha8Rng, x: &usize, _plan: &SamplePlan) -> usize {
        let above: Vec<usize> = (0..self.p).filter(|y| self.leq(x, y)).collect();
        if above.is_empty() {
            *x
        } else {
            above[rng.gen_range(0..above.len())]
        }
    }

    fn sample_below(&self, rng: &mut ChaCha8Rng, x: &usize, _plan: &SamplePlan) -> usize {
        let below: Vec<usize> = (0..self.p).filter(|y| self.leq(y, x)).collect();
        if below.is_empty() {
            *x
        } else {
            below[rng.gen_range(0..below.len())]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    NonNegativity,
    ZeroDiagonal,
    Separation,
    Symmetry,
    Triangle,
    Reflexivity,
    Antisymmetry,
    Transitivity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<usize>,
}

/// A space with its order reversed: `x ⪯' y` iff `y ⪯ x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual<S>(pub S);

impl<S: OrderedMetricSpace> OrderedMetricSpace for Dual<S> {
    type Point = S::Point;

    fn distance(&self, x: &S::Point, y: &S::Point) -> f64 {
        self.0.distance(x, y)
    }

    fn leq(&self, x: &S::Point, y: &S::Point) -> bool {
        self.0.leq(y, x)
    }

    fn is_valid(&self, x: &S::Point) -> bool {
        self.0.is_valid(x)
    }
}

impl<S: Domain> Domain for Dual<S> {
    fn points(&self) -> Option<Vec<S::Point>> {
        self.0.points()
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng, plan: &SamplePlan) -> S::Point {
        self.0.sample_point(rng, plan)
    }

    fn sample_above(&self, rng: &mut ChaCha8Rng, x: &S::Point, plan: &SamplePlan) -> S::Point {
        self.0.sample_below(rng, x, plan)
    }

    fn sample_below(&self, rng: &mut ChaCha8Rng, x: &S::Point, plan: &SamplePlan) -> S::Point {
        self.0.sample_above(rng, x, plan)
    }
}

impl<S: OrderedMetricSpace + ?Sized> OrderedMetricSpace for &S {
    type Point = S::Point;

    fn distance(&self, x: &S::Point, y: &S::Point) -> f64 {
        (**self).distance(x, y)
    }

    fn leq(&self, x: &S::Point, y: &S::Point) -> bool {
        (**self).leq(x, y)
    }

    fn is_valid(&self, x: &S::Point) -> bool {
        (**self).is_valid(x)
    }
}

impl<S: Domain + ?Sized> Domain for &S {
    fn points(&self) -> Option<Vec<S::Point>> {
        (**self).points()
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng, plan: &SamplePlan) -> S::Point {
        (**self).sample_point(rng, plan)
    }

    fn sample_above(&self, rng: &mut ChaCha8Rng, x: &S::Point, plan: &SamplePlan) -> S::Point {
        (**self).sample_above(rng, x, plan)
    }

    fn sample_below(&self, rng: &mut ChaCha8Rng, x: &S::Point, plan: &SamplePlan) -> S::Point {
        (**self).sample_below(rng, x, plan)
    }
}

/// Total order on `0..p` as a 0/1 table, for tests and fixtures.
pub fn chain_order(p: usize) -> Vec<Vec<bool>> {
    (0..p).map(|i| (0..p).map(|j| i <= j).collect()).collect()
}

/// The discrete order (only `x ⪯ x`).
pub fn discrete_order(p: usize) -> Vec<Vec<bool>> {
    (0..p).map(|i| (0..p).map(|j| i == j).collect()).collect()
}
