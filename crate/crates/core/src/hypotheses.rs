//! Order, initial-value, commuting and contraction hypotheses, checked
//! exhaustively on finite spaces and by seeded sampling on `ℝᵏ`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

use crate::dsl::Expr;
use crate::index::StarOp;
use crate::map::{decode_tuple, tuple_count, EvalError, Mapping, SelfMap};
use crate::product::{big_g, comparable_n, order_leq_n, project0, ProductError};
use crate::sampling::{Executor, SamplePlan};
use crate::space::{Domain, OrderedMetricSpace, VectorSpace};
use crate::Direction;

/// Largest number of cases an exhaustive check will visit.
pub const DEFAULT_PAIR_BOUND: u64 = 10_000_000;

/// Slack allowed in `lhs ≤ rhs`, relative to `1 + rhs`.
pub const CONTRACTION_SLACK: f64 = 1e-12;

/// Tolerance for `g(F(x)) = F(g x₁, …, g xₙ)`.
pub const COMMUTE_TOL: f64 = 1e-9;

const EXHAUSTIVE_CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypothesisError {
    #[error("invalid comparison function: {0}")]
    InvalidPhi(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("no comparable pairs were sampled")]
    EmptySample,
    #[error("exhaustive check needs {cases} cases, bound is {bound}")]
    BoundExceeded { cases: u128, bound: u64 },
    #[error("tuple length {found} does not match n = {expected}")]
    Length { expected: usize, found: usize },
    #[error("unknown contraction variant `{0}`")]
    UnknownVariant(String),
    #[error("variant `{id}` needs {what}")]
    MissingParameter { id: &'static str, what: &'static str },
    #[error("space kind `{0}` has no built-in flags; declare them explicitly")]
    UnknownSpaceKind(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Product(#[from] ProductError),
}

/// Declared membership of `φ`. `Phi` declarations are handled as `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiClass {
    Omega,
    Phi,
    #[default]
    Undeclared,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhiKind {
    /// `φ(t) = αt`.
    Linear(f64),
    /// An expression in `x1`.
    Expression(Expr),
}

/// A comparison function `φ: [0, ∞) → [0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonFn {
    pub kind: PhiKind,
    pub declared: PhiClass,
}

impl ComparisonFn {
    pub fn linear(alpha: f64) -> Self {
        ComparisonFn {
            kind: PhiKind::Linear(alpha),
            declared: PhiClass::Phi,
        }
    }

    pub fn expression(expr: Expr, declared: PhiClass) -> Self {
        ComparisonFn {
            kind: PhiKind::Expression(expr),
            declared,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            PhiKind::Linear(a) => Some(a),
            PhiKind::Expression(_) => None,
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        match &self.kind {
            PhiKind::Linear(a) => Ok(a * t),
            PhiKind::Expression(e) => e.eval_scalar(&[t]),
        }
    }

    /// Log-spaced grid over `[1e-9, 1e9]`, ten points per decade.
    pub fn grid() -> impl Iterator<Item = f64> {
        (-90..=90).map(|e| libm::pow(10.0, f64::from(e) / 10.0))
    }

    /// Linear `φ` must have `0 ≤ α < 1` and then holds. An expression is
    /// checked for `0 ≤ φ(t) < t` on [`grid`](Self::grid): a clean run is
    /// `Unknown`, a violation fails with the offending `t`.
    pub fn validate(&self) -> Result<Verdict<f64>, HypothesisError> {
        if let PhiKind::Linear(a) = self.kind {
            if !(0.0..1.0).contains(&a) {
                return Err(HypothesisError::InvalidPhi(format!(
                    "linear coefficient {a} is outside [0, 1)"
                )));
            }
        }
        for t in Self::grid() {
            let value = self.eval(t).unwrap_or(f64::NAN);
            if !(value >= 0.0 && value < t) {
                return Ok(Verdict::Fails(Witness::Phi { t, value }));
            }
        }
        Ok(match self.kind {
            PhiKind::Linear(_) => Verdict::Holds,
            PhiKind::Expression(_) => Verdict::Unknown,
        })
    }

    /// Nondecreasing on `0` and the grid. Exact for linear `φ`.
    pub fn is_increasing(&self) -> bool {
        match self.kind {
            PhiKind::Linear(a) => a >= 0.0,
            PhiKind::Expression(_) => {
                let mut prev = match self.eval(0.0) {
                    Ok(v) => v,
                    Err(_) => return false,
                };
                Self::grid().all(|t| match self.eval(t) {
                    Ok(v) if v >= prev => {
                        prev = v;
                        true
                    }
                    _ => false,
                })
            }
        }
    }

    fn require_valid(&self) -> Result<(), HypothesisError> {
        match self.validate()? {
            Verdict::Fails(Witness::Phi { t, value }) => Err(HypothesisError::InvalidPhi(format!(
                "φ({t}) = {value} is not in [0, t)"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ComparisonFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PhiKind::Linear(a) => write!(f, "{a:?} * x1"),
            PhiKind::Expression(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariantId {
    AvgVii,
    MaxViiPrime,
    PointwiseAvg,
    PointwiseMax,
    LinAvgViii,
    LinMaxIx,
    LinPtMaxX,
    WeightedXi,
    LinPtAvgXii,
}

impl VariantId {
    pub const ALL: [VariantId; 9] = [
        VariantId::AvgVii,
        VariantId::MaxViiPrime,
        VariantId::PointwiseAvg,
        VariantId::PointwiseMax,
        VariantId::LinAvgViii,
        VariantId::LinMaxIx,
        VariantId::LinPtMaxX,
        VariantId::WeightedXi,
        VariantId::LinPtAvgXii,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantId::AvgVii => "avg_vii",
            VariantId::MaxViiPrime => "max_vii_prime",
            VariantId::PointwiseAvg => "pointwise_avg",
            VariantId::PointwiseMax => "pointwise_max",
            VariantId::LinAvgViii => "lin_avg_viii",
            VariantId::LinMaxIx => "lin_max_ix",
            VariantId::LinPtMaxX => "lin_pt_max_x",
            VariantId::WeightedXi => "weighted_xi",
            VariantId::LinPtAvgXii => "lin_pt_avg_xii",
        }
    }

    /// Whether the variant takes a general `φ` rather than a constant.
    pub fn uses_phi(self) -> bool {
        matches!(
            self,
            VariantId::AvgVii | VariantId::MaxViiPrime | VariantId::PointwiseAvg | VariantId::PointwiseMax
        )
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantId {
    type Err = HypothesisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantId::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| HypothesisError::UnknownVariant(s.into()))
    }
}

/// One contraction inequality, for pairs `U, V` whose `g`-images are
/// comparable in `⊑ₙ`. Below `d_F(i) = d(F(U⋆ᵢ), F(V⋆ᵢ))`,
/// `d_g(i) = d(g xᵢ, g yᵢ)` and `d_F = d(F(U), F(V))`.
#[derive(Debug, Clone, PartialEq)]
pub enum ContractionVariant {
    /// `mean d_F(i) ≤ φ(mean d_g(i))`
    AvgVii(ComparisonFn),
    /// `max d_F(i) ≤ φ(max d_g(i))`
    MaxViiPrime(ComparisonFn),
    /// `d_F ≤ φ(mean d_g(i))`
    PointwiseAvg(ComparisonFn),
    /// `d_F ≤ φ(max d_g(i))`
    PointwiseMax(ComparisonFn),
    /// `mean d_F(i) ≤ α mean d_g(i)`
    LinAvgViii(f64),
    /// `max d_F(i) ≤ α max d_g(i)`
    LinMaxIx(f64),
    /// `d_F ≤ α max d_g(i)`
    LinPtMaxX(f64),
    /// `d_F ≤ Σ αᵢ d_g(i)` with `Σ αᵢ < 1`
    WeightedXi(Vec<f64>),
    /// `d_F ≤ (α/n) Σ d_g(i)`
    LinPtAvgXii(f64),
}

impl ContractionVariant {
    pub fn id(&self) -> VariantId {
        match self {
            ContractionVariant::AvgVii(_) => VariantId::AvgVii,
            ContractionVariant::MaxViiPrime(_) => VariantId::MaxViiPrime,
            ContractionVariant::PointwiseAvg(_) => VariantId::PointwiseAvg,
            ContractionVariant::PointwiseMax(_) => VariantId::PointwiseMax,
            ContractionVariant::LinAvgViii(_) => VariantId::LinAvgViii,
            ContractionVariant::LinMaxIx(_) => VariantId::LinMaxIx,
            ContractionVariant::LinPtMaxX(_) => VariantId::LinPtMaxX,
            ContractionVariant::WeightedXi(_) => VariantId::WeightedXi,
            ContractionVariant::LinPtAvgXii(_) => VariantId::LinPtAvgXii,
        }
    }

    /// Builds a variant from its id and whichever parameter it needs.
    pub fn from_parts(
        id: VariantId,
        phi: Option<ComparisonFn>,
        alpha: Option<f64>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, HypothesisError> {
        let phi = || {
            phi.clone()
                .or_else(|| alpha.map(ComparisonFn::linear))
                .ok_or(HypothesisError::MissingParameter {
                    id: id.as_str(),
                    what: "phi or alpha",
                })
        };
        let alpha = || {
            alpha.ok_or(HypothesisError::MissingParameter {
                id: id.as_str(),
                what: "alpha",
            })
        };
        Ok(match id {
            VariantId::AvgVii => ContractionVariant::AvgVii(phi()?),
            VariantId::MaxViiPrime => ContractionVariant::MaxViiPrime(phi()?),
            VariantId::PointwiseAvg => ContractionVariant::PointwiseAvg(phi()?),
            VariantId::PointwiseMax => ContractionVariant::PointwiseMax(phi()?),
            VariantId::LinAvgViii => ContractionVariant::LinAvgViii(alpha()?),
            VariantId::LinMaxIx => ContractionVariant::LinMaxIx(alpha()?),
            VariantId::LinPtMaxX => ContractionVariant::LinPtMaxX(alpha()?),
            VariantId::LinPtAvgXii => ContractionVariant::LinPtAvgXii(alpha()?),
            VariantId::WeightedXi => {
                ContractionVariant::WeightedXi(weights.ok_or(HypothesisError::MissingParameter {
                    id: id.as_str(),
                    what: "weights",
                })?)
            }
        })
    }

    pub fn phi(&self) -> Option<&ComparisonFn> {
        match self {
            ContractionVariant::AvgVii(p)
            | ContractionVariant::MaxViiPrime(p)
            | ContractionVariant::PointwiseAvg(p)
            | ContractionVariant::PointwiseMax(p) => Some(p),
            _ => None,
        }
    }

    /// The contraction constant of a linear instance: `α`, `Σ αᵢ`, or the
    /// `α` of a linear `φ`.
    pub fn linear_constant(&self) -> Option<f64> {
        match self {
            ContractionVariant::LinAvgViii(a)
            | ContractionVariant::LinMaxIx(a)
            | ContractionVariant::LinPtMaxX(a)
            | ContractionVariant::LinPtAvgXii(a) => Some(*a),
            ContractionVariant::WeightedXi(w) => Some(w.iter().sum()),
            _ => self.phi().and_then(ComparisonFn::alpha),
        }
    }

    /// Checks the parameters for an `n`-tuple problem.
    pub fn validate(&self, n: usize) -> Result<(), HypothesisError> {
        match self {
            ContractionVariant::WeightedXi(w) => {
                if w.len() != n {
                    return Err(HypothesisError::InvalidWeights(format!(
                        "expected {n} weights, got {}",
                        w.len()
                    )));
                }
                if w.iter().any(|a| a.is_nan() || *a < 0.0) {
                    return Err(HypothesisError::InvalidWeights("weights must be nonnegative".into()));
                }
                let sum: f64 = w.iter().sum();
                if sum >= 1.0 {
                    return Err(HypothesisError::InvalidWeights(format!(
                        "weights sum to {sum}, need < 1"
                    )));
                }
                Ok(())
            }
            _ => match self.phi() {
                Some(phi) => phi.require_valid(),
                None => ComparisonFn::linear(self.linear_constant().unwrap_or(f64::NAN)).require_valid(),
            },
        }
    }
}

impl fmt::Display for ContractionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContractionVariant::WeightedXi(w) => write!(f, "{}(weights = {w:?})", self.id()),
            _ => match self.phi() {
                Some(phi) => write!(f, "{}(φ = {phi})", self.id()),
                None => write!(f, "{}(α = {:?})", self.id(), self.linear_constant().unwrap_or(f64::NAN)),
            },
        }
    }
}

/// Concrete evidence of a failed hypothesis. Tuple indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness<P> {
    /// A contraction violation: `lhs > rhs` at `(U, V)`.
    Pair {
        u: Vec<P>,
        v: Vec<P>,
        lhs: f64,
        rhs: f64,
    },
    /// `GU ⊑ GV` but `F(U) ⋠ F(V)`; `slot` is set for argumentwise checks.
    Order {
        u: Vec<P>,
        v: Vec<P>,
        fu: P,
        fv: P,
        slot: Option<usize>,
    },
    /// The initial condition fails at component `index`.
    Initial {
        index: usize,
        gx: P,
        f: P,
    },
    Commute {
        args: Vec<P>,
        g_of_f: P,
        f_of_g: P,
    },
    Phi {
        t: f64,
        value: f64,
    },
    /// `g` of the `step`-th term of a monotone sequence is not bounded by `g`
    /// of its limit.
    Sequence {
        start: P,
        limit: P,
        step: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict<P> {
    Holds,
    Fails(Witness<P>),
    /// Sampled without finding a counterexample.
    Unknown,
}

impl<P> Verdict<P> {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Unknown => "unknown",
        }
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn witness(&self) -> Option<&Witness<P>> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport<P> {
    pub hypothesis: String,
    pub verdict: Verdict<P>,
    /// Cases actually evaluated (sampled pairs that qualified, or
    /// enumerated ones).
    pub samples: u64,
    /// Seed of a sampled check; `None` when exhaustive.
    pub seed: Option<u64>,
}

impl<P: Serialize> Serialize for HypothesisReport<P> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("hypothesis", &self.hypothesis)?;
        map.serialize_entry("verdict", self.verdict.as_str())?;
        if let Verdict::Fails(w) = &self.verdict {
            map.serialize_entry("witness", w)?;
        }
        map.serialize_entry("samples", &self.samples)?;
        map.serialize_entry("seed", &self.seed)?;
        map.end()
    }
}

pub(crate) enum Visit<P> {
    Skip,
    Pass,
    Fail(Witness<P>),
}

pub(crate) type Decode<'a, C> = &'a (dyn Fn(u64) -> C + Sync);
pub(crate) type Draw<'a, C> = &'a (dyn Fn(&mut ChaCha8Rng) -> C + Sync);

pub(crate) enum Source<'a, C> {
    Exhaustive { total: u64, decode: Decode<'a, C> },
    Sampled { plan: &'a SamplePlan, draw: Draw<'a, C> },
}

struct ChunkOutcome<P> {
    samples: u64,
    stop: Option<Result<Witness<P>, HypothesisError>>,
}

/// Visits every case of `source` chunk by chunk and merges in chunk order:
/// the reported witness is the first one in the lowest failing chunk, and
/// `samples` counts cases up to and including it.
pub(crate) fn run_cases<P: Send, C, E: Executor + ?Sized>(
    exec: &E,
    source: &Source<'_, C>,
    visit: &(dyn Fn(&C) -> Result<Visit<P>, HypothesisError> + Sync),
) -> Result<(Verdict<P>, u64), HypothesisError> {
    let chunk = |cases: &mut dyn Iterator<Item = C>| {
        let mut samples = 0;
        for case in cases {
            match visit(&case) {
                Ok(Visit::Skip) => {}
                Ok(Visit::Pass) => samples += 1,
                Ok(Visit::Fail(w)) => {
                    return ChunkOutcome {
                        samples: samples + 1,
                        stop: Some(Ok(w)),
                    }
                }
                Err(e) => {
                    return ChunkOutcome {
                        samples,
                        stop: Some(Err(e)),
                    }
                }
            }
        }
        ChunkOutcome { samples, stop: None }
    };
    let (outcomes, exhaustive) = match source {
        Source::Exhaustive { total, decode } => {
            let count = total.div_ceil(EXHAUSTIVE_CHUNK) as usize;
            let f = |c: usize| {
                let start = c as u64 * EXHAUSTIVE_CHUNK;
                let end = (start + EXHAUSTIVE_CHUNK).min(*total);
                chunk(&mut (start..end).map(decode))
            };
            (exec.map_chunks(count, &f), true)
        }
        Source::Sampled { plan, draw } => {
            let f = |c: usize| {
                let mut rng = plan.chunk_rng(c);
                chunk(&mut (0..plan.chunk_len(c)).map(|_| draw(&mut rng)))
            };
            (exec.map_chunks(plan.chunk_count(), &f), false)
        }
    };
    let mut samples = 0;
    for o in outcomes {
        samples += o.samples;
        match o.stop {
            Some(Ok(w)) => return Ok((Verdict::Fails(w), samples)),
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    Ok((if exhaustive { Verdict::Holds } else { Verdict::Unknown }, samples))
}

fn check_bound(cases: u128, bound: u64) -> Result<u64, HypothesisError> {
    if cases > u128::from(bound) {
        Err(HypothesisError::BoundExceeded { cases, bound })
    } else {
        Ok(cases as u64)
    }
}

fn tuple_total(p: usize, n: usize) -> u128 {
    tuple_count(p, n).map_or(u128::MAX, |c| c as u128)
}

fn tuple_of<P: Clone>(points: &[P], idx: u64, n: usize) -> Vec<P> {
    let mut digits = vec![0; n];
    decode_tuple(idx as usize, points.len(), &mut digits);
    digits.into_iter().map(|d| points[d].clone()).collect()
}

type TuplePair<P> = (Vec<P>, Vec<P>);
type PairVisitor<'a, P> = dyn Fn(&TuplePair<P>) -> Result<Visit<P>, HypothesisError> + Sync + 'a;
/// Verdict, cases visited, and the seed when sampled.
type Tally<P> = (Verdict<P>, u64, Option<u64>);

/// Runs `visit` over pairs of `n`-tuples: every pair on a finite space,
/// otherwise sampled pairs with `V` above `U` (or below, at random) in every
/// coordinate.
fn over_tuple_pairs<S, E>(
    space: &S,
    n: usize,
    plan: &SamplePlan,
    bound: u64,
    exec: &E,
    visit: &PairVisitor<'_, S::Point>,
) -> Result<Tally<S::Point>, HypothesisError>
where
    S: Domain + Sync,
    E: Executor + ?Sized,
{
    match space.points() {
        Some(points) => {
            let tuples = tuple_total(points.len(), n);
            let total = check_bound(tuples.saturating_mul(tuples), bound)?;
            let per = tuples as u64;
            let decode = |idx: u64| (tuple_of(&points, idx / per, n), tuple_of(&points, idx % per, n));
            let (v, s) = run_cases(exec, &Source::Exhaustive { total, decode: &decode }, visit)?;
            Ok((v, s, None))
        }
        None => {
            let draw = |rng: &mut ChaCha8Rng| {
                let up = rng.gen_bool(0.5);
                let u: Vec<S::Point> = (0..n).map(|_| space.sample_point(rng, plan)).collect();
                let v = u
                    .iter()
                    .map(|x| {
                        if up {
                            space.sample_above(rng, x, plan)
                        } else {
                            space.sample_below(rng, x, plan)
                        }
                    })
                    .collect();
                (u, v)
            };
            let (v, s) = run_cases(exec, &Source::Sampled { plan, draw: &draw }, visit)?;
            Ok((v, s, Some(plan.seed)))
        }
    }
}

/// Shared settings for checks that enumerate or sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub plan: SamplePlan,
    /// Exhaustive checks refuse to run beyond this many cases.
    pub bound: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            plan: SamplePlan::default(),
            bound: DEFAULT_PAIR_BOUND,
        }
    }
}

fn report<P>(hypothesis: &str, (verdict, samples, seed): Tally<P>) -> HypothesisReport<P> {
    HypothesisReport {
        hypothesis: hypothesis.into(),
        verdict,
        samples,
        seed,
    }
}

/// `F` has the `g`-monotone property: `g xᵢ ⪯ g yᵢ` for all `i` implies
/// `F(x₁, …, xₙ) ⪯ F(y₁, …, yₙ)`.
pub fn check_monotone_property<S, F, G, E>(
    space: &S,
    f: &F,
    g: &G,
    cfg: &CheckConfig,
    exec: &E,
) -> Result<HypothesisReport<S::Point>, HypothesisError>
where
    S: Domain + Sync,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
    E: Executor + ?Sized,
{
    let visit = |(u, v): &TuplePair<S::Point>| {
        if !order_leq_n(space, &big_g(g, u)?, &big_g(g, v)?)? {
            return Ok(Visit::Skip);
        }
        let fu = f.eval(u)?;
        let fv = f.eval(v)?;
        Ok(if space.leq(&fu, &fv) {
            Visit::Pass
        } else {
            Visit::Fail(Witness::Order {
                u: u.clone(),
                v: v.clone(),
                fu,
                fv,
                slot: None,
            })
        })
    };
    Ok(report(
        "monotone_property",
        over_tuple_pairs(space, f.arity(), &cfg.plan, cfg.bound, exec, &visit)?,
    ))
}

/// `F` is `g`-increasing in each argument: changing slot `i` from `x` to `y`
/// with `g x ⪯ g y` never decreases `F`.
pub fn check_argumentwise_monotone<S, F, G, E>(
    space: &S,
    f: &F,
    g: &G,
    cfg: &CheckConfig,
    exec: &E,
) -> Result<HypothesisReport<S::Point>, HypothesisError>
where
    S: Domain + Sync,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
    E: Executor + ?Sized,
{
    let n = f.arity();
    let visit = |(slot, u, y): &(usize, Vec<S::Point>, S::Point)| {
        if !space.leq(&g.eval(&u[*slot])?, &g.eval(y)?) {
            return Ok(Visit::Skip);
        }
        let mut v = u.clone();
        v[*slot] = y.clone();
        let fu = f.eval(u)?;
        let fv = f.eval(&v)?;
        Ok(if space.leq(&fu, &fv) {
            Visit::Pass
        } else {
            Visit::Fail(Witness::Order {
                u: u.clone(),
                v,
                fu,
                fv,
                slot: Some(slot + 1),
            })
        })
    };
    let plan = &cfg.plan;
    let (verdict, samples, seed) = match space.points() {
        Some(points) => {
            let p = points.len() as u64;
            let tuples = tuple_total(points.len(), n);
            let total = check_bound(tuples.saturating_mul(u128::from(p) * n as u128), cfg.bound)?;
            let per_slot = total / n.max(1) as u64;
            let decode = |idx: u64| {
                let slot = (idx / per_slot) as usize;
                let rest = idx % per_slot;
                (
                    slot,
                    tuple_of(&points, rest / p, n),
                    points[(rest % p) as usize].clone(),
                )
            };
            let (v, s) = run_cases(exec, &Source::Exhaustive { total, decode: &decode }, &visit)?;
            (v, s, None)
        }
        None => {
            let draw = |rng: &mut ChaCha8Rng| {
                let slot = rng.gen_range(0..n);
                let u: Vec<S::Point> = (0..n).map(|_| space.sample_point(rng, plan)).collect();
                let y = if rng.gen_bool(0.5) {
                    space.sample_above(rng, &u[slot], plan)
                } else {
                    space.sample_below(rng, &u[slot], plan)
                };
                (slot, u, y)
            };
            let (v, s) = run_cases(exec, &Source::Sampled { plan, draw: &draw }, &visit)?;
            (v, s, Some(plan.seed))
        }
    };
    Ok(report("argumentwise_monotone", (verdict, samples, seed)))
}

fn initial_witness<S, F, G>(
    space: &S,
    f: &F,
    g: &G,
    star: &StarOp,
    u0: &[S::Point],
    up: bool,
) -> Result<Option<Witness<S::Point>>, HypothesisError>
where
    S: OrderedMetricSpace,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
{
    if u0.len() != star.n() {
        return Err(HypothesisError::Length {
            expected: star.n(),
            found: u0.len(),
        });
    }
    for (i, x) in u0.iter().enumerate() {
        let gx = g.eval(x)?;
        let fx = f.eval(&project0(u0, star, i))?;
        let ok = if up { space.leq(&gx, &fx) } else { space.leq(&fx, &gx) };
        if !ok {
            return Ok(Some(Witness::Initial {
                index: i + 1,
                gx,
                f: fx,
            }));
        }
    }
    Ok(None)
}

/// Which initial condition holds at `U0`: `Up` if `g xᵢ ⪯ F(U0⋆ᵢ)` for all
/// `i`, else `Down` if the reverse holds, else `None`.
pub fn initial_direction<S, F, G>(
    space: &S,
    f: &F,
    g: &G,
    star: &StarOp,
    u0: &[S::Point],
) -> Result<Option<Direction>, HypothesisError>
where
    S: OrderedMetricSpace,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
{
    if initial_witness(space, f, g, star, u0, true)?.is_none() {
        Ok(Some(Direction::Up))
    } else if initial_witness(space, f, g, star, u0, false)?.is_none() {
        Ok(Some(Direction::Down))
    } else {
        Ok(None)
    }
}

/// The initial condition at `U0` in the requested direction. For `Either`
/// a failure reports the upward witness.
pub fn check_initial_condition<S, F, G>(
    space: &S,
    f: &F,
    g: &G,
    star: &StarOp,
    u0: &[S::Point],
    direction: Direction,
) -> Result<HypothesisReport<S::Point>, HypothesisError>
where
    S: OrderedMetricSpace,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
{
    let witness = match direction {
        Direction::Up => initial_witness(space, f, g, star, u0, true)?,
        Direction::Down => initial_witness(space, f, g, star, u0, false)?,
        Direction::Either => match initial_witness(space, f, g, star, u0, true)? {
            None => None,
            Some(w) => initial_witness(space, f, g, star, u0, false)?.map(|_| w),
        },
    };
    Ok(HypothesisReport {
        hypothesis: format!("initial_condition_{}", direction.as_str()),
        verdict: witness.map_or(Verdict::Holds, Verdict::Fails),
        samples: 1,
        seed: None,
    })
}

/// `g(F(x₁, …, xₙ)) = F(g x₁, …, g xₙ)`, up to [`COMMUTE_TOL`] in distance.
pub fn check_commuting<S, F, G, E>(
    space: &S,
    f: &F,
    g: &G,
    cfg: &CheckConfig,
    exec: &E,
) -> Result<HypothesisReport<S::Point>, HypothesisError>
where
    S: Domain + Sync,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
    E: Executor + ?Sized,
{
    let n = f.arity();
    let visit = |args: &Vec<S::Point>| {
        let g_of_f = g.eval(&f.eval(args)?)?;
        let f_of_g = f.eval(&big_g(g, args)?)?;
        Ok(if space.distance(&g_of_f, &f_of_g) <= COMMUTE_TOL {
            Visit::Pass
        } else {
            Visit::Fail(Witness::Commute {
                args: args.clone(),
                g_of_f,
                f_of_g,
            })
        })
    };
    let plan = &cfg.plan;
    let out = match space.points() {
        Some(points) => {
            let total = check_bound(tuple_total(points.len(), n), cfg.bound)?;
            let decode = |idx: u64| tuple_of(&points, idx, n);
            let (v, s) = run_cases(exec, &Source::Exhaustive { total, decode: &decode }, &visit)?;
            (v, s, None)
        }
        None => {
            let draw = |rng: &mut ChaCha8Rng| (0..n).map(|_| space.sample_point(rng, plan)).collect::<Vec<_>>();
            let (v, s) = run_cases(exec, &Source::Sampled { plan, draw: &draw }, &visit)?;
            (v, s, Some(plan.seed))
        }
    };
    Ok(report("commuting", out))
}

/// Both sides of `variant` at `(U, V)`, or `None` when `GU` and `GV` are not
/// comparable.
pub fn contraction_sides<S, F, G>(
    space: &S,
    f: &F,
    g: &G,
    star: &StarOp,
    variant: &ContractionVariant,
    u: &[S::Point],
    v: &[S::Point],
) -> Result<Option<(f64, f64)>, HypothesisError>
where
    S: OrderedMetricSpace,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
{
    let n = star.n();
    for t in [u, v] {
        if t.len() != n {
            return Err(HypothesisError::Length {
                expected: n,
                found: t.len(),
            });
        }
    }
    let gu = big_g(g, u)?;
    let gv = big_g(g, v)?;
    if !comparable_n(space, &gu, &gv) {
        return Ok(None);
    }
    let dg: Vec<f64> = gu.iter().zip(&gv).map(|(a, b)| space.distance(a, b)).collect();
    let avg = dg.iter().sum::<f64>() / n as f64;
    let max = dg.iter().copied().fold(0.0, f64::max);
    let rows = || -> Result<Vec<f64>, HypothesisError> {
        (0..n)
            .map(|i| {
                let a = f.eval(&project0(u, star, i))?;
                let b = f.eval(&project0(v, star, i))?;
                Ok(space.distance(&a, &b))
            })
            .collect()
    };
    let pointwise = || -> Result<f64, HypothesisError> { Ok(space.distance(&f.eval(u)?, &f.eval(v)?)) };
    let mean = |d: Vec<f64>| d.iter().sum::<f64>() / n as f64;
    let top = |d: Vec<f64>| d.into_iter().fold(0.0, f64::max);
    Ok(Some(match variant {
        ContractionVariant::AvgVii(phi) => (mean(rows()?), phi.eval(avg)?),
        ContractionVariant::MaxViiPrime(phi) => (top(rows()?), phi.eval(max)?),
        ContractionVariant::PointwiseAvg(phi) => (pointwise()?, phi.eval(avg)?),
        ContractionVariant::PointwiseMax(phi) => (pointwise()?, phi.eval(max)?),
        ContractionVariant::LinAvgViii(a) => (mean(rows()?), a * avg),
        ContractionVariant::LinMaxIx(a) => (top(rows()?), a * max),
        ContractionVariant::LinPtMaxX(a) => (pointwise()?, a * max),
        ContractionVariant::WeightedXi(w) => (pointwise()?, w.iter().zip(&dg).map(|(a, d)| a * d).sum()),
        ContractionVariant::LinPtAvgXii(a) => (pointwise()?, a * avg),
    }))
}

/// Whether `lhs ≤ rhs` within [`CONTRACTION_SLACK`].
pub fn within_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + CONTRACTION_SLACK * (1.0 + rhs.abs())
}

/// Evaluates `variant` on every pair of tuples (finite) or on sampled pairs
/// whose `g`-images are comparable.
pub fn check_contraction<S, F, G, E>(
    space: &S,
    f: &F,
    g: &G,
    star: &StarOp,
    variant: &ContractionVariant,
    cfg: &CheckConfig,
    exec: &E,
) -> Result<HypothesisReport<S::Point>, HypothesisError>
where
    S: Domain + Sync,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
    E: Executor + ?Sized,
{
    variant.validate(star.n())?;
    let visit = |(u, v): &TuplePair<S::Point>| {
        Ok(match contraction_sides(space, f, g, star, variant, u, v)? {
            None => Visit::Skip,
            Some((lhs, rhs)) if within_slack(lhs, rhs) => Visit::Pass,
            Some((lhs, rhs)) => Visit::Fail(Witness::Pair {
                u: u.clone(),
                v: v.clone(),
                lhs,
                rhs,
            }),
        })
    };
    let out = over_tuple_pairs(space, star.n(), &cfg.plan, cfg.bound, exec, &visit)?;
    if out.2.is_some() && out.1 == 0 {
        return Err(HypothesisError::EmptySample);
    }
    Ok(report(&format!("contraction_{}", variant.id()), out))
}

/// Every variant implied by `variant` (excluding itself), closed under the
/// implications between the contraction conditions. `n` is the tuple size.
pub fn implied_variants(
    variant: &ContractionVariant,
    star_permuted: bool,
    phi_increasing: bool,
    n: usize,
) -> Vec<ContractionVariant> {
    use ContractionVariant as V;
    let step = |v: &V| -> Vec<V> {
        let increasing = |phi: &ComparisonFn| phi_increasing || phi.alpha().is_some();
        let mut out = Vec::new();
        match v {
            V::PointwiseAvg(phi) => {
                if star_permuted {
                    out.push(V::AvgVii(phi.clone()));
                }
                if let Some(a) = phi.alpha() {
                    out.push(V::LinPtAvgXii(a));
                }
            }
            V::PointwiseMax(phi) => {
                if star_permuted || increasing(phi) {
                    out.push(V::MaxViiPrime(phi.clone()));
                }
                if let Some(a) = phi.alpha() {
                    out.push(V::LinPtMaxX(a));
                }
            }
            V::AvgVii(phi) => out.extend(phi.alpha().map(V::LinAvgViii)),
            V::MaxViiPrime(phi) => out.extend(phi.alpha().map(V::LinMaxIx)),
            V::LinAvgViii(a) => out.push(V::AvgVii(ComparisonFn::linear(*a))),
            V::LinMaxIx(a) => out.push(V::MaxViiPrime(ComparisonFn::linear(*a))),
            V::LinPtMaxX(a) => {
                out.push(V::PointwiseMax(ComparisonFn::linear(*a)));
                out.push(V::LinMaxIx(*a));
            }
            V::WeightedXi(w) => out.push(V::LinPtMaxX(w.iter().sum())),
            V::LinPtAvgXii(a) => {
                out.push(V::PointwiseAvg(ComparisonFn::linear(*a)));
                if n > 0 {
                    out.push(V::WeightedXi(vec![a / n as f64; n]));
                }
            }
        }
        out
    };
    let mut seen = vec![variant.clone()];
    let mut todo = vec![variant.clone()];
    while let Some(v) = todo.pop() {
        for next in step(&v) {
            if !seen.contains(&next) {
                seen.push(next.clone());
                todo.push(next);
            }
        }
    }
    seen.remove(0);
    seen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Vector,
    Finite,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "state", content = "value", rename_all = "snake_case")]
pub enum FlagState {
    SatisfiedByConstruction,
    Declared(bool),
    Unknown,
}

impl FlagState {
    /// Satisfied by construction or declared true.
    pub fn is_satisfied(self) -> bool {
        matches!(self, FlagState::SatisfiedByConstruction | FlagState::Declared(true))
    }
}

/// User declarations for the topological hypotheses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct FlagOverrides {
    pub o_complete: Option<bool>,
    pub icu: Option<bool>,
    pub dcl: Option<bool>,
    pub mcb: Option<bool>,
}

impl FlagOverrides {
    fn is_empty(&self) -> bool {
        *self == FlagOverrides::default()
    }
}

/// Completeness and the upper/lower bound properties of sequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologicalFlags {
    pub o_complete: FlagState,
    pub icu: FlagState,
    pub dcl: FlagState,
    pub mcb: FlagState,
    pub warnings: Vec<String>,
}

impl TopologicalFlags {
    pub fn all_satisfied(&self) -> bool {
        [self.o_complete, self.icu, self.dcl, self.mcb]
            .iter()
            .all(|f| f.is_satisfied())
    }
}

/// Flags for a space of the given kind. `ℝᵏ` and finite spaces satisfy all
/// of them by construction; overrides are recorded as declared, with a
/// warning. Other kinds need at least one explicit flag.
pub fn declare_topological_flags(
    kind: SpaceKind,
    overrides: &FlagOverrides,
) -> Result<TopologicalFlags, HypothesisError> {
    if kind == SpaceKind::Other && overrides.is_empty() {
        return Err(HypothesisError::UnknownSpaceKind("other".into()));
    }
    let mut warnings = Vec::new();
    let mut resolve = |name: &str, over: Option<bool>| match (over, kind) {
        (Some(v), SpaceKind::Other) => {
            if !v {
                warnings.push(format!("{name} declared false; no convergence guarantee"));
            }
            FlagState::Declared(v)
        }
        (Some(v), _) => {
            warnings.push(format!("{name} overridden to {v} by declaration"));
            FlagState::Declared(v)
        }
        (None, SpaceKind::Other) => {
            warnings.push(format!("{name} not declared"));
            FlagState::Unknown
        }
        (None, _) => FlagState::SatisfiedByConstruction,
    };
    Ok(TopologicalFlags {
        o_complete: resolve("o_complete", overrides.o_complete),
        icu: resolve("icu", overrides.icu),
        dcl: resolve("dcl", overrides.dcl),
        mcb: resolve("mcb", overrides.mcb),
        warnings,
    })
}

const SEQUENCE_STEPS: usize = 40;

/// Samples monotone sequences `x_m → x` in `ℝᵏ` (increasing if `up`) and
/// checks `g x_m ⪯ g x` (respectively `g x ⪯ g x_m`) for every term.
pub fn check_g_sequence_bound<G>(
    space: &VectorSpace,
    g: &G,
    up: bool,
    plan: &SamplePlan,
) -> Result<HypothesisReport<Vec<f64>>, HypothesisError>
where
    G: SelfMap<Vec<f64>> + ?Sized,
{
    let draw = |rng: &mut ChaCha8Rng| {
        let start = space.sample_point(rng, plan);
        let limit = if up {
            space.sample_above(rng, &start, plan)
        } else {
            space.sample_below(rng, &start, plan)
        };
        (start, limit)
    };
    let visit = |(start, limit): &(Vec<f64>, Vec<f64>)| {
        let gl = g.eval(limit)?;
        let mut w = 1.0;
        for step in 0..SEQUENCE_STEPS {
            let x: Vec<f64> = start.iter().zip(limit).map(|(s, l)| l + (s - l) * w).collect();
            let gx = g.eval(&x)?;
            let ok = if up { space.leq(&gx, &gl) } else { space.leq(&gl, &gx) };
            if !ok {
                return Ok(Visit::Fail(Witness::Sequence {
                    start: start.clone(),
                    limit: limit.clone(),
                    step,
                }));
            }
            w *= 0.5;
        }
        Ok(Visit::Pass)
    };
    let (verdict, samples) = run_cases(
        &crate::sampling::Sequential,
        &Source::Sampled { plan, draw: &draw },
        &visit,
    )?;
    Ok(report(
        if up { "g_icu" } else { "g_dcl" },
        (verdict, samples, Some(plan.seed)),
    ))
}

impl<P> fmt::Display for HypothesisReport<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} cases",
            self.hypothesis,
            self.verdict.as_str(),
            self.samples
        )?;
        if let Some(seed) = self.seed {
            write!(f, ", seed {seed}")?;
        }
        f.write_str(")")
    }
}

/// One line per report, with the witness when it failed.
pub fn summarize<P: fmt::Debug>(r: &HypothesisReport<P>) -> String {
    match &r.verdict {
        Verdict::Fails(w) => format!("{r}: {w:?}"),
        _ => r.to_string(),
    }
}
