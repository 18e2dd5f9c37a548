//! Solver and verifier for n-tupled fixed points and coincidence points in
//! ordered metric spaces.
//!
//! A binary operation `⋆` on the index set `{1, …, n}` (a [`StarOp`]) decides
//! which coordinates feed each component equation
//! `F(x_{i_1}, …, x_{i_n}) = g(x_i)`. The crate reduces such systems to an
//! ordinary coincidence problem on the product space `Xⁿ` (see [`product`]),
//! checks the order and contraction hypotheses that guarantee a solution
//! ([`hypotheses`]), runs Picard/Jungck iteration ([`solver`]) and provides
//! exhaustive enumeration on finite spaces as an exact oracle.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command line live in the companion `ntuple` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dsl;
pub mod hypotheses;
pub mod index;
pub mod map;
pub mod product;
pub mod sampling;
pub mod solver;
pub mod space;

pub use dsl::{format_mapping, parse_expr, parse_mapping, Expr, MappingAst, ParseError, ParseErrorKind};
pub use hypotheses::{ComparisonFn, ContractionVariant, HypothesisReport, PhiClass, VariantId, Verdict, Witness};
pub use index::{Preset, StarError, StarOp};
pub use map::{EvalError, FiniteTable, FnMapping, FnSelfMap, Identity, Mapping, SelfMap, UnaryTable};
pub use product::InducedMaps;
pub use sampling::{Executor, SamplePlan, Sequential};
pub use solver::{ProblemSpec, ResidualMetric, SolveConfig, SolveReport, SolveStatus};
pub use space::{Domain, Dual, FiniteSpace, MetricKind, OrderedMetricSpace, VectorSpace};

/// Which initial condition the iteration starts from.
///
/// `Up` is `g(xᵢ) ⪯ F(U⋆ᵢ)` for every `i`, `Down` the reverse, and `Either`
/// accepts whichever of the two holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Up,
    Down,
    Either,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Either => "either",
        }
    }
}
