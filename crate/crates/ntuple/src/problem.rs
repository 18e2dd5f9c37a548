//! Turns a [`LoadedConfig`] into a typed problem over `ℝᵏ` or a finite space.

use std::path::Path;

use ntuple_core::hypotheses::{declare_topological_flags, CheckConfig, FlagOverrides, SpaceKind, DEFAULT_PAIR_BOUND};
use ntuple_core::map::EvalError;
use ntuple_core::sampling::DEFAULT_SEED;
use ntuple_core::{
    parse_expr, parse_mapping, ComparisonFn, ContractionVariant, Direction, Domain, FiniteSpace, Mapping, MappingAst,
    MetricKind, PhiClass, Preset, ProblemSpec, SamplePlan, SelfMap, SolveConfig, StarOp, VariantId, VectorSpace,
};

use crate::config::{LoadedConfig, PointValue, SpaceKindName};
use crate::error::{read_file, CliError};
use crate::formats;

/// Command-line settings that take precedence over the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub bound: Option<u64>,
}

/// Settings shared by both space kinds.
#[derive(Clone)]
pub struct Settings {
    pub kind: SpaceKind,
    pub has_initial: bool,
    pub phi: Option<ComparisonFn>,
    pub solve: SolveConfig,
    pub check: CheckConfig,
    pub probe_trials: usize,
    pub hypotheses: Option<Vec<String>>,
    pub flags: FlagOverrides,
}

/// A problem with everything needed to check and solve it.
pub struct Setup<S: Domain> {
    pub problem: ProblemSpec<S>,
    pub settings: Settings,
}

pub enum Problem {
    Vector(Setup<VectorSpace>),
    Finite(Setup<FiniteSpace>),
}

/// A mapping over the labels `0..p` given by an expression on the labels as
/// numbers. Results must be labels again.
pub struct LabelExpr {
    ast: MappingAst,
    p: usize,
}

impl LabelExpr {
    fn to_label(&self, v: f64) -> Result<usize, EvalError> {
        if v.is_finite() && v >= 0.0 && v < self.p as f64 && v == v.trunc() {
            Ok(v as usize)
        } else if v.is_finite() {
            Err(EvalError::OutOfCarrier(v.max(0.0) as usize))
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

impl Mapping<usize> for LabelExpr {
    fn arity(&self) -> usize {
        self.ast.arity()
    }

    fn eval(&self, args: &[usize]) -> Result<usize, EvalError> {
        let args: Vec<Vec<f64>> = args.iter().map(|&a| vec![a as f64]).collect();
        self.to_label(self.ast.eval_point(&args)?[0])
    }
}

impl SelfMap<usize> for LabelExpr {
    fn eval(&self, x: &usize) -> Result<usize, EvalError> {
        self.to_label(self.ast.eval_point(&[vec![*x as f64]])?[0])
    }

    fn is_identity(&self) -> bool {
        SelfMap::<Vec<f64>>::is_identity(&self.ast)
    }
}

fn parse_err(cfg: &LoadedConfig, field: &str, e: impl std::fmt::Display) -> CliError {
    CliError::parse(&cfg.path, format!("{field}: {e}"))
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn load_text(cfg: &LoadedConfig, rel: &str) -> Result<(String, std::path::PathBuf), CliError> {
    let path = cfg.resolve(rel);
    Ok((read_file(&path)?, path))
}

/// Resolves a star from a preset name (plus optional `n`) or a matrix file.
pub fn resolve_star(preset: Option<&str>, n: Option<usize>, file: Option<&Path>) -> Result<StarOp, CliError> {
    match (preset, file) {
        (Some(name), None) => {
            let preset: Preset = name
                .parse()
                .map_err(|e: ntuple_core::StarError| CliError::Usage(e.to_string()))?;
            StarOp::preset(preset, n).map_err(|e| CliError::Usage(e.to_string()))
        }
        (None, Some(path)) => {
            let text = read_file(path)?;
            formats::parse_star(&text).map_err(|e| CliError::parse(path, e))
        }
        _ => Err(CliError::Usage("give exactly one of a preset or a star file".into())),
    }
}

fn star_from(cfg: &LoadedConfig) -> Result<StarOp, CliError> {
    let s = &cfg.config.star;
    let given = [s.preset.is_some(), s.file.is_some(), s.matrix.is_some()];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(parse_err(cfg, "star", "give exactly one of preset, file or matrix"));
    }
    if let Some(rows) = &s.matrix {
        return StarOp::new(rows.len(), rows).map_err(|e| parse_err(cfg, "star.matrix", e));
    }
    if let Some(name) = &s.preset {
        let preset: Preset = name.parse().map_err(|e| parse_err(cfg, "star.preset", e))?;
        return StarOp::preset(preset, s.n).map_err(|e| parse_err(cfg, "star", e));
    }
    let (text, path) = load_text(cfg, s.file.as_deref().unwrap_or_default())?;
    formats::parse_star(&text).map_err(|e| CliError::parse(path, e))
}

fn variant_from(
    cfg: &LoadedConfig,
    phi: Option<&ComparisonFn>,
    n: usize,
) -> Result<Option<ContractionVariant>, CliError> {
    let c = &cfg.config.check;
    let Some(id) = &c.variant else {
        return Ok(None);
    };
    let id: VariantId = id.parse().map_err(|e| parse_err(cfg, "check.variant", e))?;
    let phi = if id.uses_phi() { phi.cloned() } else { None };
    let v =
        ContractionVariant::from_parts(id, phi, c.alpha, c.weights.clone()).map_err(|e| parse_err(cfg, "check", e))?;
    v.validate(n).map_err(|e| parse_err(cfg, "check", e))?;
    Ok(Some(v))
}

fn phi_from(cfg: &LoadedConfig) -> Result<Option<ComparisonFn>, CliError> {
    let m = &cfg.config.mappings;
    let class = match m.phi_class.as_deref() {
        None | Some("undeclared") => PhiClass::Undeclared,
        Some("omega") => PhiClass::Omega,
        Some("phi") => PhiClass::Phi,
        Some(other) => return Err(parse_err(cfg, "mappings.phi_class", format!("unknown class `{other}`"))),
    };
    m.phi
        .as_deref()
        .map(|text| {
            parse_expr(text, 1, 1)
                .map(|e| ComparisonFn::expression(e, class))
                .map_err(|e| parse_err(cfg, "mappings.phi", e))
        })
        .transpose()
}

fn configs(cfg: &LoadedConfig, over: &Overrides) -> Result<(SolveConfig, CheckConfig), CliError> {
    let c = &cfg.config.check;
    let s = &cfg.config.solver;
    let mut plan = SamplePlan::default().with_seed(over.seed.or(c.seed).unwrap_or(DEFAULT_SEED));
    if let Some(n) = over.samples.or(c.samples) {
        plan = plan.with_samples(n);
    }
    if c.lower.is_some() || c.upper.is_some() {
        plan = plan.with_box(c.lower.unwrap_or(plan.lower), c.upper.unwrap_or(plan.upper));
    }
    if plan.lower.is_nan() || plan.upper.is_nan() || plan.lower > plan.upper {
        return Err(parse_err(cfg, "check", "lower must not exceed upper"));
    }
    let check = CheckConfig {
        plan,
        bound: over.bound.or(c.bound).unwrap_or(DEFAULT_PAIR_BOUND),
    };
    let defaults = SolveConfig::default();
    let solve = SolveConfig {
        tol: over.tol.or(s.tol).unwrap_or(defaults.tol),
        max_iter: over.max_iter.or(s.max_iter).unwrap_or(defaults.max_iter),
        residual_metric: s.residual_metric.unwrap_or_default(),
        check_hypotheses: true,
        check,
    };
    if solve.tol.is_nan() || solve.tol <= 0.0 || solve.max_iter == 0 {
        return Err(invalid("tol must be positive and max_iter at least 1"));
    }
    Ok((solve, check))
}

fn exactly_one<'a>(
    cfg: &LoadedConfig,
    field: &str,
    expr: &'a Option<String>,
    table: &'a Option<String>,
    required: bool,
) -> Result<Option<Result<&'a str, &'a str>>, CliError> {
    match (expr, table) {
        (Some(_), Some(_)) => Err(parse_err(cfg, field, "give an expression or a table, not both")),
        (Some(e), None) => Ok(Some(Ok(e))),
        (None, Some(t)) => Ok(Some(Err(t))),
        (None, None) if required => Err(parse_err(cfg, field, "missing")),
        (None, None) => Ok(None),
    }
}

impl Problem {
    pub fn load(cfg: &LoadedConfig, over: &Overrides) -> Result<Problem, CliError> {
        let star = star_from(cfg)?;
        let n = star.n();
        let phi = phi_from(cfg)?;
        let contraction = variant_from(cfg, phi.as_ref(), n)?;
        let (solve, check) = configs(cfg, over)?;
        let c = &cfg.config;
        let m = &c.mappings;
        let direction = c.solver.direction.unwrap_or(Direction::Up);
        let initial = c.initial.as_ref().map(|i| i.values.clone());
        if let Some(values) = &initial {
            if values.len() != n {
                return Err(parse_err(
                    cfg,
                    "initial.values",
                    format!("expected {n} points, found {}", values.len()),
                ));
            }
        }
        let has_initial = initial.is_some();
        let settings = |kind| Settings {
            kind,
            has_initial,
            phi: phi.clone(),
            solve,
            check,
            probe_trials: c.solver.probe_trials.unwrap_or(0),
            hypotheses: c.check.hypotheses.clone(),
            flags: c.flags,
        };
        match c.space.kind {
            SpaceKindName::Vector => {
                if c.space.file.is_some() || c.space.chain.is_some() {
                    return Err(parse_err(cfg, "space", "file and chain apply to finite spaces only"));
                }
                if m.f_table.is_some() || m.g_table.is_some() || m.g_inverse_table.is_some() {
                    return Err(parse_err(cfg, "mappings", "tables apply to finite spaces only"));
                }
                let k = c.space.k.unwrap_or(1);
                if k == 0 {
                    return Err(parse_err(cfg, "space.k", "dimension must be at least 1"));
                }
                let space = VectorSpace::new(k, c.space.metric.unwrap_or(MetricKind::Euclidean));
                let f_text = m.f.as_deref().ok_or_else(|| parse_err(cfg, "mappings.f", "missing"))?;
                let f = parse_mapping(f_text, n, k).map_err(|e| parse_err(cfg, "mappings.f", e))?;
                let unary =
                    |field: &str, text: &Option<String>| -> Result<Option<Box<dyn SelfMap<Vec<f64>>>>, CliError> {
                        text.as_deref()
                            .map(|t| {
                                parse_mapping(t, 1, k)
                                    .map(|a| Box::new(a) as Box<dyn SelfMap<Vec<f64>>>)
                                    .map_err(|e| parse_err(cfg, field, e))
                            })
                            .transpose()
                    };
                let initial = initial
                    .unwrap_or_default()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let v = v.to_vec();
                        if v.len() != k || v.iter().any(|x| !x.is_finite()) {
                            Err(parse_err(
                                cfg,
                                "initial.values",
                                format!("point {} must be {k} finite numbers", i + 1),
                            ))
                        } else {
                            Ok(v)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let mut problem = ProblemSpec::new(space, star, Box::new(f), initial);
                problem.g = unary("mappings.g", &m.g)?;
                problem.g_inverse = unary("mappings.g_inverse", &m.g_inverse)?;
                problem.direction = direction;
                problem.contraction = contraction;
                problem.flags = Some(declare_topological_flags(SpaceKind::Vector, &c.flags)?);
                Ok(Problem::Vector(Setup {
                    problem,
                    settings: settings(SpaceKind::Vector),
                }))
            }
            SpaceKindName::Finite => {
                if c.space.k.is_some() || c.space.metric.is_some() {
                    return Err(parse_err(cfg, "space", "k and metric apply to vector spaces only"));
                }
                let space = match (&c.space.file, c.space.chain) {
                    (Some(rel), None) => {
                        let (text, path) = load_text(cfg, rel)?;
                        formats::parse_finite_space(&text).map_err(|e| CliError::parse(path, e))?
                    }
                    (None, Some(p)) if p >= 1 => FiniteSpace::chain(p),
                    _ => return Err(parse_err(cfg, "space", "give exactly one of file or chain (p ≥ 1)")),
                };
                let p = space.len();
                let f: Box<dyn Mapping<usize>> = match exactly_one(cfg, "mappings.f", &m.f, &m.f_table, true)? {
                    Some(Ok(text)) => Box::new(LabelExpr {
                        ast: parse_mapping(text, n, 1).map_err(|e| parse_err(cfg, "mappings.f", e))?,
                        p,
                    }),
                    Some(Err(rel)) => {
                        let (text, path) = load_text(cfg, rel)?;
                        Box::new(formats::parse_f_table(&text, p, n).map_err(|e| CliError::parse(path, e))?)
                    }
                    None => unreachable!("required"),
                };
                let unary = |field: &str,
                             e: &Option<String>,
                             t: &Option<String>|
                 -> Result<Option<Box<dyn SelfMap<usize>>>, CliError> {
                    Ok(match exactly_one(cfg, field, e, t, false)? {
                        None => None,
                        Some(Ok(text)) => Some(Box::new(LabelExpr {
                            ast: parse_mapping(text, 1, 1).map_err(|e| parse_err(cfg, field, e))?,
                            p,
                        })),
                        Some(Err(rel)) => {
                            let (text, path) = load_text(cfg, rel)?;
                            Some(Box::new(
                                formats::parse_g_table(&text, p).map_err(|e| CliError::parse(path, e))?,
                            ))
                        }
                    })
                };
                let initial = initial
                    .unwrap_or_default()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        PointValue::Scalar(x) if *x >= 0.0 && *x < p as f64 && x.trunc() == *x => Ok(*x as usize),
                        _ => Err(parse_err(
                            cfg,
                            "initial.values",
                            format!("point {} must be a label in 0..{p}", i + 1),
                        )),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let mut problem = ProblemSpec::new(space, star, f, initial);
                problem.g = unary("mappings.g", &m.g, &m.g_table)?;
                problem.g_inverse = unary("mappings.g_inverse", &m.g_inverse, &m.g_inverse_table)?;
                problem.direction = direction;
                problem.contraction = contraction;
                problem.flags = Some(declare_topological_flags(SpaceKind::Finite, &c.flags)?);
                Ok(Problem::Finite(Setup {
                    problem,
                    settings: settings(SpaceKind::Finite),
                }))
            }
        }
    }
}
