//! Picard/Jungck iteration on the product space, solution checks, a
//! multi-start uniqueness probe and exact enumeration on finite spaces.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;
use thiserror::Error;

use crate::hypotheses::{
    check_contraction, check_initial_condition, check_monotone_property, initial_direction, CheckConfig,
    ContractionVariant, HypothesisError, HypothesisReport, TopologicalFlags, Verdict,
};
use crate::index::StarOp;
use crate::map::{tuple_count, Identity, Mapping, SelfMap};
use crate::product::{big_g, delta_n, nabla_n, order_leq_n, project0, InducedMaps, ProductError, Tuples};
use crate::sampling::{stream_rng, Executor, SamplePlan};
use crate::space::{Domain, FiniteSpace, OrderedMetricSpace};
use crate::Direction;

/// Largest `pⁿ` an enumeration will scan.
pub const DEFAULT_ENUM_BOUND: u64 = 1_000_000;

/// Residuals above this abort the iteration as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Attempts per requested trial when drawing admissible starting tuples.
pub const START_ATTEMPTS_PER_TRIAL: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("{what} has length {found}, expected n = {expected}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("F has arity {found}, expected n = {expected}")]
    Arity { expected: usize, found: usize },
    #[error("initial component {0} is not a point of the space")]
    InvalidInitial(usize),
    #[error("tolerance must be positive and max_iter at least 1")]
    Config,
    #[error("enumeration needs {cases} tuples, bound is {bound}")]
    BoundExceeded { cases: u128, bound: u64 },
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error(transparent)]
    Product(#[from] ProductError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMetric {
    Delta,
    #[default]
    Nabla,
}

impl ResidualMetric {
    pub fn eval<S: OrderedMetricSpace>(self, space: &S, u: &[S::Point], v: &[S::Point]) -> Result<f64, ProductError> {
        match self {
            ResidualMetric::Delta => delta_n(space, u, v),
            ResidualMetric::Nabla => nabla_n(space, u, v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub residual_metric: ResidualMetric,
    /// Check the initial condition, monotone property and contraction
    /// before iterating.
    pub check_hypotheses: bool,
    pub check: CheckConfig,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-10,
            max_iter: 10_000,
            residual_metric: ResidualMetric::Nabla,
            check_hypotheses: true,
            check: CheckConfig::default(),
        }
    }
}

impl SolveConfig {
    fn validate(&self) -> Result<(), SolveError> {
        if self.tol > 0.0 && self.max_iter >= 1 {
            Ok(())
        } else {
            Err(SolveError::Config)
        }
    }
}

/// A coincidence problem `F(x_{i_1}, …, x_{i_n}) = g(xᵢ)` for all `i`.
pub struct ProblemSpec<S: Domain> {
    pub space: S,
    pub star: StarOp,
    pub f: Box<dyn Mapping<S::Point>>,
    /// `None` is the identity.
    pub g: Option<Box<dyn SelfMap<S::Point>>>,
    pub g_inverse: Option<Box<dyn SelfMap<S::Point>>>,
    pub initial: Vec<S::Point>,
    pub direction: Direction,
    pub contraction: Option<ContractionVariant>,
    pub flags: Option<TopologicalFlags>,
}

impl<S: Domain> ProblemSpec<S> {
    /// A problem with `g` the identity, started upward from `initial`.
    pub fn new(space: S, star: StarOp, f: Box<dyn Mapping<S::Point>>, initial: Vec<S::Point>) -> Self {
        ProblemSpec {
            space,
            star,
            f,
            g: None,
            g_inverse: None,
            initial,
            direction: Direction::Up,
            contraction: None,
            flags: None,
        }
    }

    pub fn n(&self) -> usize {
        self.star.n()
    }

    pub fn g(&self) -> &dyn SelfMap<S::Point>
    where
        S::Point: Clone + 'static,
    {
        match &self.g {
            Some(g) => g.as_ref(),
            None => &Identity,
        }
    }

    fn g_is_identity(&self) -> bool {
        self.g.as_ref().is_none_or(|g| g.is_identity())
    }

    fn validate(&self) -> Result<(), SolveError> {
        let n = self.n();
        if self.f.arity() != n {
            return Err(SolveError::Arity {
                expected: n,
                found: self.f.arity(),
            });
        }
        if self.initial.len() != n {
            return Err(SolveError::Length {
                what: "initial tuple",
                expected: n,
                found: self.initial.len(),
            });
        }
        if let Some(i) = self.initial.iter().position(|x| !self.space.is_valid(x)) {
            return Err(SolveError::InvalidInitial(i + 1));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    HypothesisFailure,
    GInverseMissing,
    /// A non-finite value or a residual above [`DIVERGENCE_LIMIT`].
    Diverged,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::HypothesisFailure => "hypothesis_failure",
            SolveStatus::GInverseMissing => "g_inverse_missing",
            SolveStatus::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "P: Serialize")]
pub struct SolveReport<P> {
    pub status: SolveStatus,
    /// Number of updates performed.
    pub iterations: usize,
    pub point: Vec<P>,
    pub residual: f64,
    /// `ρ₀, ρ₁, …`, one per visited iterate.
    pub history: Vec<f64>,
    pub hypotheses: Vec<HypothesisReport<P>>,
    /// Direction the monotonicity check used, if any.
    pub direction: Option<Direction>,
    /// Whether `G U⁽ᵐ⁾` moved monotonically in that direction at every step.
    pub monotone: Option<bool>,
    pub warnings: Vec<String>,
}

struct Iteration<P> {
    status: SolveStatus,
    iterations: usize,
    point: Vec<P>,
    residual: f64,
    history: Vec<f64>,
    monotone: Option<bool>,
}

/// Runs `U⁽ᵐ⁺¹⁾ = g⁻¹(F⋆(U⁽ᵐ⁾))` from `start` without any hypothesis checks.
fn iterate<S: Domain>(
    problem: &ProblemSpec<S>,
    start: Vec<S::Point>,
    direction: Option<Direction>,
    config: &SolveConfig,
) -> Result<Iteration<S::Point>, SolveError>
where
    S::Point: 'static,
{
    let space = &problem.space;
    let g = problem.g();
    let maps = InducedMaps::new(problem.f.as_ref(), g, problem.star.clone());
    let inverse = if problem.g_is_identity() {
        None
    } else {
        problem.g_inverse.as_deref()
    };
    let mut u = start;
    let mut gu = maps.big_g(&u)?;
    let mut history = Vec::new();
    let mut monotone = direction.map(|_| true);
    let mut m = 0;
    loop {
        let fu = maps.f_star(&u)?;
        let finite = fu.iter().all(|x| space.is_valid(x));
        let rho = if finite {
            config.residual_metric.eval(space, &gu, &fu)?
        } else {
            f64::NAN
        };
        history.push(rho);
        let status = if !rho.is_finite() || rho > DIVERGENCE_LIMIT {
            Some(SolveStatus::Diverged)
        } else if rho <= config.tol {
            Some(SolveStatus::Converged)
        } else if m >= config.max_iter {
            Some(SolveStatus::MaxIter)
        } else {
            None
        };
        if let Some(status) = status {
            return Ok(Iteration {
                status,
                iterations: m,
                point: u,
                residual: rho,
                history,
                monotone,
            });
        }
        let next = match inverse {
            Some(inv) => big_g(inv, &fu)?,
            None => fu,
        };
        let g_next = maps.big_g(&next)?;
        if let (Some(true), Some(d)) = (monotone, direction) {
            let ok = match d {
                Direction::Down => order_leq_n(space, &g_next, &gu)?,
                _ => order_leq_n(space, &gu, &g_next)?,
            };
            monotone = Some(ok);
        }
        u = next;
        gu = g_next;
        m += 1;
    }
}

/// Picard iteration for `F⋆` and `G`: checks the hypotheses (unless
/// disabled), then iterates until the residual drops to `tol`.
pub fn picard_solve<S: Domain + Sync>(
    problem: &ProblemSpec<S>,
    config: &SolveConfig,
    exec: &(impl Executor + ?Sized),
) -> Result<SolveReport<S::Point>, SolveError>
where
    S::Point: 'static,
{
    config.validate()?;
    problem.validate()?;
    let mut warnings = Vec::new();
    if let Some(flags) = &problem.flags {
        warnings.extend(flags.warnings.iter().cloned());
        for (name, state) in [
            ("o_complete", flags.o_complete),
            ("icu", flags.icu),
            ("dcl", flags.dcl),
            ("mcb", flags.mcb),
        ] {
            if !state.is_satisfied() {
                warnings.push(format!("{name} is not established; convergence is not guaranteed"));
            }
        }
    }
    let mut report = SolveReport {
        status: SolveStatus::Converged,
        iterations: 0,
        point: problem.initial.clone(),
        residual: f64::NAN,
        history: Vec::new(),
        hypotheses: Vec::new(),
        direction: None,
        monotone: None,
        warnings,
    };
    if !problem.g_is_identity() && problem.g_inverse.is_none() {
        report.status = SolveStatus::GInverseMissing;
        return Ok(report);
    }
    let space = &problem.space;
    let g = problem.g();
    let f = problem.f.as_ref();
    let star = &problem.star;
    let held = initial_direction(space, f, g, star, &problem.initial)?;
    let direction = match problem.direction {
        Direction::Either => held,
        d => Some(d),
    };
    report.direction = direction;
    if config.check_hypotheses {
        let initial = check_initial_condition(space, f, g, star, &problem.initial, problem.direction)?;
        report.hypotheses.push(initial);
        report
            .hypotheses
            .push(check_monotone_property(space, f, g, &config.check, exec)?);
        if let Some(variant) = &problem.contraction {
            report
                .hypotheses
                .push(check_contraction(space, f, g, star, variant, &config.check, exec)?);
        }
        for h in &report.hypotheses {
            if h.verdict == Verdict::Unknown {
                report
                    .warnings
                    .push(format!("{} was only sampled ({} cases)", h.hypothesis, h.samples));
            }
        }
        if report.hypotheses.iter().any(|h| h.verdict.is_fail()) {
            report.status = SolveStatus::HypothesisFailure;
            return Ok(report);
        }
    }
    let it = iterate(problem, problem.initial.clone(), direction, config)?;
    report.status = it.status;
    report.iterations = it.iterations;
    report.point = it.point;
    report.residual = it.residual;
    report.history = it.history;
    report.monotone = it.monotone;
    Ok(report)
}

/// `maxᵢ d(F(U⋆ᵢ), g(xᵢ))` and whether it is at most `tol`.
pub fn verify_solution<S, F, G>(
    space: &S,
    f: &F,
    g: &G,
    star: &StarOp,
    u: &[S::Point],
    tol: f64,
) -> Result<(bool, f64), SolveError>
where
    S: OrderedMetricSpace,
    F: Mapping<S::Point> + ?Sized,
    G: SelfMap<S::Point> + ?Sized,
{
    if u.len() != star.n() {
        return Err(SolveError::Length {
            what: "tuple",
            expected: star.n(),
            found: u.len(),
        });
    }
    let mut residual: f64 = 0.0;
    for (i, x) in u.iter().enumerate() {
        let fx = f.eval(&project0(u, star, i)).map_err(ProductError::from)?;
        let gx = g.eval(x).map_err(ProductError::from)?;
        residual = residual.max(space.distance(&fx, &gx));
    }
    Ok((residual <= tol, residual))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "P: Serialize")]
pub struct Cluster<P> {
    pub representative: Vec<P>,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "P: Serialize")]
pub struct UniquenessReport<P> {
    pub trials: usize,
    /// Trials that found an admissible start.
    pub starts: usize,
    pub converged: usize,
    pub clusters: Vec<Cluster<P>>,
    pub seed: u64,
    pub radius: f64,
}

impl<P> UniquenessReport<P> {
    /// At most one limit was found.
    pub fn supports_uniqueness(&self) -> bool {
        self.clusters.len() <= 1
    }
}

/// Solves from `trials` random starts that satisfy the problem's initial
/// condition and clusters the limits at radius `10·tol` in `∇ₙ`. Trial `t`
/// draws from stream `t` of `seed`.
pub fn uniqueness_probe<S: Domain + Sync>(
    problem: &ProblemSpec<S>,
    config: &SolveConfig,
    trials: usize,
    seed: u64,
    plan: &SamplePlan,
    exec: &(impl Executor + ?Sized),
) -> Result<UniquenessReport<S::Point>, SolveError>
where
    S::Point: 'static,
{
    config.validate()?;
    problem.validate()?;
    let radius = 10.0 * config.tol;
    let space = &problem.space;
    let g = problem.g();
    let f = problem.f.as_ref();
    let run = |t: usize| -> Result<Option<Iteration<S::Point>>, SolveError> {
        let mut rng = stream_rng(seed, t as u64);
        for _ in 0..START_ATTEMPTS_PER_TRIAL {
            let start: Vec<S::Point> = (0..problem.n()).map(|_| space.sample_point(&mut rng, plan)).collect();
            let admissible = check_initial_condition(space, f, g, &problem.star, &start, problem.direction)?;
            if admissible.verdict.is_fail() {
                continue;
            }
            let direction = match problem.direction {
                Direction::Either => initial_direction(space, f, g, &problem.star, &start)?.unwrap_or(Direction::Up),
                d => d,
            };
            return Ok(Some(iterate(problem, start, Some(direction), config)?));
        }
        Ok(None)
    };
    let outcomes = exec.map_chunks(trials, &run);
    let mut report = UniquenessReport {
        trials,
        starts: 0,
        converged: 0,
        clusters: Vec::new(),
        seed,
        radius,
    };
    for o in outcomes {
        let Some(it) = o? else { continue };
        report.starts += 1;
        if it.status != SolveStatus::Converged {
            continue;
        }
        report.converged += 1;
        let mut placed = false;
        for c in &mut report.clusters {
            if nabla_n(space, &c.representative, &it.point)? <= radius {
                c.members += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            report.clusters.push(Cluster {
                representative: it.point,
                members: 1,
            });
        }
    }
    Ok(report)
}

fn enum_count(p: usize, n: usize, bound: u64) -> Result<usize, SolveError> {
    let cases = tuple_count(p, n).map_or(u128::MAX, |c| c as u128);
    if cases > u128::from(bound) {
        Err(SolveError::BoundExceeded { cases, bound })
    } else {
        Ok(cases as usize)
    }
}

fn scan<F, G>(
    space: &FiniteSpace,
    f: &F,
    g: &G,
    star: &StarOp,
    bound: u64,
    keep: impl Fn(&[usize], &[usize], &[usize]) -> bool,
) -> Result<Vec<Vec<usize>>, SolveError>
where
    F: Mapping<usize> + ?Sized,
    G: SelfMap<usize> + ?Sized,
{
    let n = star.n();
    enum_count(space.len(), n, bound)?;
    let maps = InducedMaps::new(f, g, star.clone());
    let mut out = Vec::new();
    for u in Tuples::new(space.len(), n).expect("count checked") {
        let fu = maps.f_star(&u)?;
        let gu = maps.big_g(&u)?;
        if keep(&u, &fu, &gu) {
            out.push(u);
        }
    }
    Ok(out)
}

/// All `U` with `F(U⋆ᵢ) = g(xᵢ)` for every `i`, in lexicographic order.
pub fn enumerate_star_coincidence<F, G>(
    space: &FiniteSpace,
    f: &F,
    g: &G,
    star: &StarOp,
    bound: u64,
) -> Result<Vec<Vec<usize>>, SolveError>
where
    F: Mapping<usize> + ?Sized,
    G: SelfMap<usize> + ?Sized,
{
    scan(space, f, g, star, bound, |_, fu, gu| fu == gu)
}

/// All `U` with `F(U⋆ᵢ) = g(xᵢ) = xᵢ` for every `i`, in lexicographic order.
pub fn enumerate_common_star_fixed<F, G>(
    space: &FiniteSpace,
    f: &F,
    g: &G,
    star: &StarOp,
    bound: u64,
) -> Result<Vec<Vec<usize>>, SolveError>
where
    F: Mapping<usize> + ?Sized,
    G: SelfMap<usize> + ?Sized,
{
    scan(space, f, g, star, bound, |u, fu, gu| fu == gu && gu == u)
}

/// Whether `g(F(U⋆ᵢ)) = F((GU)⋆ᵢ)` for every `i` at each of `points`.
pub fn commutes_at<F, G>(f: &F, g: &G, star: &StarOp, points: &[Vec<usize>]) -> Result<bool, SolveError>
where
    F: Mapping<usize> + ?Sized,
    G: SelfMap<usize> + ?Sized,
{
    let maps = InducedMaps::new(f, g, star.clone());
    for u in points {
        let gfu = maps.big_g(&maps.f_star(u)?)?;
        let fgu = maps.f_star(&maps.big_g(u)?)?;
        if gfu != fgu {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_mapping;
    use crate::map::{FiniteTable, FnMapping, FnSelfMap, UnaryTable};
    use crate::sampling::Sequential;
    use crate::space::VectorSpace;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coupled(initial: f64) -> ProblemSpec<VectorSpace> {
        ProblemSpec::new(
            VectorSpace::real_line(),
            StarOp::coupled(),
            Box::new(parse_mapping("(x1 + x2)/6 + 1", 2, 1).unwrap()),
            vec![vec![initial], vec![initial]],
        )
    }

    fn tol(t: f64) -> SolveConfig {
        SolveConfig {
            tol: t,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn coupled_converges() {
        let mut problem = coupled(0.0);
        problem.contraction = Some(ContractionVariant::LinPtMaxX(1.0 / 3.0));
        let r = picard_solve(&problem, &SolveConfig::default(), &Sequential).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        for x in &r.point {
            assert!((x[0] - 1.5).abs() < 1e-8);
        }
        assert!(r.iterations <= 60);
        assert_eq!(r.monotone, Some(true));
        assert_eq!(r.history.len(), r.iterations + 1);
        assert!((r.history[0] - 1.0).abs() < 1e-15);
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] / 3.0 + 1e-9);
        }
        assert_eq!(r.hypotheses.len(), 3);
        let (ok, res) = verify_solution(
            &problem.space,
            problem.f.as_ref(),
            &Identity,
            &problem.star,
            &r.point,
            1e-8,
        )
        .unwrap();
        assert!(ok && res <= 1e-8);
    }

    #[test]
    fn tripled_converges() {
        let problem = ProblemSpec::new(
            VectorSpace::real_line(),
            StarOp::borcut_triple(),
            Box::new(parse_mapping("(x1 + x2 + x3)/6 + 1", 3, 1).unwrap()),
            vec![vec![0.0]; 3],
        );
        let r = picard_solve(&problem, &SolveConfig::default(), &Sequential).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        for x in &r.point {
            assert!((x[0] - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn fixed_point_start_takes_no_iterations() {
        let r = picard_solve(&coupled(1.5), &SolveConfig::default(), &Sequential).unwrap();
        assert_eq!((r.status, r.iterations, r.residual), (SolveStatus::Converged, 0, 0.0));
    }

    #[test]
    fn max_iter_and_hypothesis_failure() {
        let cfg = SolveConfig {
            max_iter: 1,
            ..SolveConfig::default()
        };
        let r = picard_solve(&coupled(0.0), &cfg, &Sequential).unwrap();
        assert_eq!((r.status, r.iterations), (SolveStatus::MaxIter, 1));
        let r = picard_solve(&coupled(10.0), &SolveConfig::default(), &Sequential).unwrap();
        assert_eq!(r.status, SolveStatus::HypothesisFailure);
        let mut down = coupled(10.0);
        down.direction = Direction::Down;
        let r = picard_solve(&down, &SolveConfig::default(), &Sequential).unwrap();
        assert_eq!((r.status, r.monotone), (SolveStatus::Converged, Some(true)));
        let mut either = coupled(10.0);
        either.direction = Direction::Either;
        let r = picard_solve(&either, &SolveConfig::default(), &Sequential).unwrap();
        assert_eq!(r.direction, Some(Direction::Down));
        let mut bad = coupled(0.0);
        bad.contraction = Some(ContractionVariant::LinPtMaxX(0.1));
        assert_eq!(
            picard_solve(&bad, &SolveConfig::default(), &Sequential).unwrap().status,
            SolveStatus::HypothesisFailure
        );
        assert!(picard_solve(&coupled(0.0), &tol(0.0), &Sequential).is_err());
    }

    #[test]
    fn g_inverse_is_required_and_used() {
        let mut p = coupled(0.0);
        p.g = Some(Box::new(FnSelfMap(|x: &Vec<f64>| vec![2.0 * x[0]])));
        let r = picard_solve(&p, &SolveConfig::default(), &Sequential).unwrap();
        assert_eq!(r.status, SolveStatus::GInverseMissing);
        p.g_inverse = Some(Box::new(FnSelfMap(|x: &Vec<f64>| vec![x[0] / 2.0])));
        let r = picard_solve(&p, &SolveConfig::default(), &Sequential).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        // 2t = t/3 + 1
        assert!((r.point[0][0] - 0.6).abs() < 1e-9);
        let mut id = coupled(0.0);
        id.g = Some(Box::new(Identity));
        assert_eq!(
            picard_solve(&id, &SolveConfig::default(), &Sequential).unwrap().status,
            SolveStatus::Converged
        );
    }

    #[test]
    fn divergence_is_reported() {
        let mut p = ProblemSpec::new(
            VectorSpace::real_line(),
            StarOp::coupled(),
            Box::new(parse_mapping("2 * x1 + 1", 2, 1).unwrap()),
            vec![vec![0.0], vec![0.0]],
        );
        let cfg = SolveConfig {
            check_hypotheses: false,
            ..SolveConfig::default()
        };
        let r = picard_solve(&p, &cfg, &Sequential).unwrap();
        assert_eq!(r.status, SolveStatus::Diverged);
        assert!(r.iterations < 100);
        p.f = Box::new(parse_mapping("x1 / (x2 - x2)", 2, 1).unwrap());
        assert!(picard_solve(&p, &cfg, &Sequential).is_err());
    }

    #[test]
    fn verify_examples() {
        let p = coupled(0.0);
        let (ok, r) = verify_solution(
            &p.space,
            p.f.as_ref(),
            &Identity,
            &p.star,
            &[vec![0.0], vec![0.0]],
            1e-10,
        )
        .unwrap();
        assert!(!ok);
        assert_eq!(r, 1.0);
        let (ok, r) =
            verify_solution(&p.space, p.f.as_ref(), &Identity, &p.star, &[vec![1.5], vec![1.5]], 0.0).unwrap();
        assert!(ok);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn uniqueness() {
        let p = coupled(0.0);
        let cfg = tol(1e-10);
        let plan = SamplePlan::default();
        let r = uniqueness_probe(&p, &cfg, 20, 3, &plan, &Sequential).unwrap();
        assert_eq!((r.starts, r.converged), (20, 20));
        assert_eq!(r.clusters.len(), 1);
        assert!((r.clusters[0].representative[0][0] - 1.5).abs() < 1e-9);
        let empty = uniqueness_probe(&p, &cfg, 0, 3, &plan, &Sequential).unwrap();
        assert!(empty.clusters.is_empty() && empty.supports_uniqueness());

        let proj = ProblemSpec::new(
            VectorSpace::real_line(),
            StarOp::coupled(),
            Box::new(FnMapping::new(2, |a: &[Vec<f64>]| a[0].clone())),
            vec![vec![0.0], vec![0.0]],
        );
        let r = uniqueness_probe(&proj, &cfg, 20, 3, &plan, &Sequential).unwrap();
        assert!(r.clusters.len() > 1);
        assert!(!r.supports_uniqueness());
    }

    #[test]
    fn enumeration_examples() {
        let chain = FiniteSpace::chain(2);
        let min = FiniteTable::tabulate(2, 2, |a| a[0].min(a[1])).unwrap();
        let id = UnaryTable::identity(2);
        let star = StarOp::coupled();
        let pts = enumerate_star_coincidence(&chain, &min, &id, &star, DEFAULT_ENUM_BOUND).unwrap();
        assert_eq!(pts, vec![vec![0, 0], vec![1, 1]]);
        assert_eq!(
            enumerate_common_star_fixed(&chain, &min, &id, &star, DEFAULT_ENUM_BOUND).unwrap(),
            pts
        );
        let swap = UnaryTable::new(vec![1, 0]).unwrap();
        assert!(
            enumerate_common_star_fixed(&chain, &min, &swap, &star, DEFAULT_ENUM_BOUND)
                .unwrap()
                .is_empty()
        );
        let c = FiniteTable::tabulate(4, 3, |_| 2).unwrap();
        let pts = enumerate_star_coincidence(
            &FiniteSpace::chain(4),
            &c,
            &UnaryTable::identity(4),
            &StarOp::borcut_triple(),
            100,
        )
        .unwrap();
        assert_eq!(pts, vec![vec![2, 2, 2]]);
        assert!(matches!(
            enumerate_star_coincidence(
                &FiniteSpace::chain(4),
                &c,
                &UnaryTable::identity(4),
                &StarOp::borcut_triple(),
                10
            ),
            Err(SolveError::BoundExceeded { cases: 64, bound: 10 })
        ));
    }

    /// Coincidence points of `(F, g)` under `⋆`, computed from the
    /// component equations directly rather than through `F⋆` and `G`.
    fn direct_coincidence(p: usize, f: &FiniteTable, g: &UnaryTable, star: &StarOp) -> Vec<Vec<usize>> {
        Tuples::new(p, star.n())
            .unwrap()
            .filter(|u| {
                (1..=star.n()).all(|i| {
                    let args: Vec<usize> = (1..=star.n()).map(|k| u[star.entry(i, k).unwrap() - 1]).collect();
                    f.get(&args).unwrap() == g.values()[u[i - 1]]
                })
            })
            .collect()
    }

    fn random_star(rng: &mut ChaCha8Rng, n: usize) -> StarOp {
        let rows: Vec<Vec<usize>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(1..=n)).collect()).collect();
        StarOp::new(n, &rows).unwrap()
    }

    #[test]
    fn enumeration_matches_component_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let p = rng.gen_range(1..=3);
            let n = rng.gen_range(2..=3);
            let space = FiniteSpace::chain(p);
            let f = FiniteTable::tabulate(p, n, |_| rng.gen_range(0..p)).unwrap();
            let g = UnaryTable::new((0..p).map(|_| rng.gen_range(0..p)).collect()).unwrap();
            let star = random_star(&mut rng, n);
            let fast = enumerate_star_coincidence(&space, &f, &g, &star, DEFAULT_ENUM_BOUND).unwrap();
            assert_eq!(fast, direct_coincidence(p, &f, &g, &star));
            let fixed = enumerate_common_star_fixed(&space, &f, &g, &star, DEFAULT_ENUM_BOUND).unwrap();
            assert!(fixed.iter().all(|u| fast.contains(u)));
            let with_id =
                enumerate_common_star_fixed(&space, &f, &UnaryTable::identity(p), &star, DEFAULT_ENUM_BOUND).unwrap();
            assert_eq!(
                with_id,
                enumerate_star_coincidence(&space, &f, &UnaryTable::identity(p), &star, DEFAULT_ENUM_BOUND).unwrap()
            );
        }
    }

    #[test]
    fn commuting_at_coincidences_maps_them_to_coincidences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        for _ in 0..2000 {
            let p = rng.gen_range(2..=3);
            let n = 2;
            let space = FiniteSpace::chain(p);
            let f = FiniteTable::tabulate(p, n, |_| rng.gen_range(0..p)).unwrap();
            let g = UnaryTable::new((0..p).map(|_| rng.gen_range(0..p)).collect()).unwrap();
            let star = random_star(&mut rng, n);
            let pts = enumerate_star_coincidence(&space, &f, &g, &star, DEFAULT_ENUM_BOUND).unwrap();
            if pts.is_empty() || !commutes_at(&f, &g, &star, &pts).unwrap() {
                continue;
            }
            checked += 1;
            for u in &pts {
                let gu = big_g(&g, u).unwrap();
                assert!(pts.contains(&gu), "{u:?} -> {gu:?}");
            }
        }
        assert!(checked >= 20, "{checked}");
    }
}
