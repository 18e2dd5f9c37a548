//! The `star`, `check`, `solve` and `enumerate` commands. Each returns a
//! human summary and a JSON report; the caller decides where they go.

use std::collections::BTreeSet;
use std::fmt::{Debug, Write as _};
use std::path::Path;
use std::time::Instant;

use ntuple_core::hypotheses::{
    check_argumentwise_monotone, check_commuting, check_contraction, check_g_sequence_bound, check_initial_condition,
    check_monotone_property, implied_variants, summarize, HypothesisError, SpaceKind,
};
use ntuple_core::map::EvalError;
use ntuple_core::product::Tuples;
use ntuple_core::solver::{
    commutes_at, enumerate_common_star_fixed, enumerate_star_coincidence, picard_solve, uniqueness_probe,
    verify_solution, DEFAULT_ENUM_BOUND,
};
use ntuple_core::{
    ComparisonFn, Domain, FiniteSpace, HypothesisReport, Mapping, SamplePlan, SelfMap, SolveStatus, StarOp,
    VectorSpace, Verdict,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{LoadedConfig, ProblemConfig};
use crate::error::{exit, CliError};
use crate::exec::Threads;
use crate::problem::{resolve_star, Overrides, Problem, Setup};

pub const SCHEMA_VERSION: u32 = 1;

type Tuple = Vec<usize>;

/// Options every config-driven command accepts.
#[derive(Debug, Clone, Copy, Default)]
pub struct Common {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub jobs: Option<usize>,
    pub no_timings: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveArgs {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub force: bool,
    pub probe: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit: u8,
    pub summary: String,
    pub report: Value,
}

impl Outcome {
    pub fn report_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("reports serialize");
        s.push('\n');
        s
    }
}

struct Clock {
    start: Instant,
    enabled: bool,
}

impl Clock {
    fn new(common: &Common) -> Self {
        Clock {
            start: Instant::now(),
            enabled: !common.no_timings,
        }
    }

    fn stamp(&self, report: &mut Map<String, Value>) {
        if self.enabled {
            report.insert(
                "timings".into(),
                json!({ "total_ms": self.start.elapsed().as_secs_f64() * 1e3 }),
            );
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn executor(common: &Common) -> Threads {
    common.jobs.map_or_else(Threads::available, Threads::new)
}

pub fn star(preset: Option<&str>, n: Option<usize>, file: Option<&Path>, common: &Common) -> Result<Outcome, CliError> {
    let clock = Clock::new(common);
    let star = resolve_star(preset, n, file)?;
    let permuted = star.is_permuted();
    let mut summary = String::new();
    for row in star.to_matrix() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>2}")).collect();
        let _ = writeln!(summary, "{}", cells.join(" "));
    }
    let _ = writeln!(summary, "permuted: {permuted}");
    let mut report = Map::new();
    report.insert("schema_version".into(), json!(SCHEMA_VERSION));
    report.insert("command".into(), json!("star"));
    match (preset, file) {
        (Some(p), _) => report.insert("preset".into(), json!(p)),
        (_, Some(f)) => report.insert("file".into(), json!(f.display().to_string())),
        _ => None,
    };
    report.insert("n".into(), json!(star.n()));
    report.insert("matrix".into(), json!(star.to_matrix()));
    report.insert("permuted".into(), json!(permuted));
    clock.stamp(&mut report);
    Ok(Outcome {
        exit: exit::OK,
        summary,
        report: Value::Object(report),
    })
}

/// The config with command-line overrides folded in, so that re-running the
/// echo reproduces the run.
fn effective_config(loaded: &LoadedConfig, over: &Overrides, probe: Option<usize>) -> ProblemConfig {
    let mut c = loaded.config.clone();
    c.check.seed = over.seed.or(c.check.seed);
    c.check.samples = over.samples.or(c.check.samples);
    c.check.bound = over.bound.or(c.check.bound);
    c.solver.tol = over.tol.or(c.solver.tol);
    c.solver.max_iter = over.max_iter.or(c.solver.max_iter);
    c.solver.probe_trials = probe.or(c.solver.probe_trials);
    c
}

fn envelope(command: &str, loaded: &LoadedConfig, echo: &ProblemConfig) -> Map<String, Value> {
    let mut report = Map::new();
    report.insert("schema_version".into(), json!(SCHEMA_VERSION));
    report.insert("command".into(), json!(command));
    report.insert("config_path".into(), json!(loaded.path.display().to_string()));
    report.insert("config".into(), to_value(echo));
    report
}

/// Extra checks that only make sense for some space kinds.
pub trait SpaceOps: Domain + Sync + Sized {
    /// Sampled bound checks for `g` along monotone sequences, if the space
    /// supports them.
    fn sequence_check(
        &self,
        g: &dyn SelfMap<Self::Point>,
        up: bool,
        plan: &SamplePlan,
    ) -> Option<Result<HypothesisReport<Self::Point>, HypothesisError>>;
}

impl SpaceOps for VectorSpace {
    fn sequence_check(
        &self,
        g: &dyn SelfMap<Vec<f64>>,
        up: bool,
        plan: &SamplePlan,
    ) -> Option<Result<HypothesisReport<Vec<f64>>, HypothesisError>> {
        Some(check_g_sequence_bound(self, g, up, plan))
    }
}

impl SpaceOps for FiniteSpace {
    fn sequence_check(
        &self,
        _: &dyn SelfMap<usize>,
        _: bool,
        _: &SamplePlan,
    ) -> Option<Result<HypothesisReport<usize>, HypothesisError>> {
        None
    }
}

pub const HYPOTHESES: [&str; 8] = [
    "phi",
    "initial_condition",
    "monotone_property",
    "argumentwise_monotone",
    "commuting",
    "contraction",
    "g_icu",
    "g_dcl",
];

fn applicable<S: Domain>(setup: &Setup<S>, name: &str) -> bool {
    let p = &setup.problem;
    match name {
        "phi" => setup.settings.phi.is_some(),
        "initial_condition" => setup.settings.has_initial,
        "commuting" => p.g.is_some(),
        "contraction" => p.contraction.is_some(),
        "g_icu" | "g_dcl" => p.g.is_some() && setup.settings.kind == SpaceKind::Vector,
        _ => true,
    }
}

fn selected<S: Domain>(setup: &Setup<S>) -> Result<Vec<&'static str>, CliError> {
    match &setup.settings.hypotheses {
        None => Ok(HYPOTHESES.into_iter().filter(|h| applicable(setup, h)).collect()),
        Some(list) => list
            .iter()
            .map(|name| {
                let h = HYPOTHESES
                    .into_iter()
                    .find(|h| h == name)
                    .ok_or_else(|| CliError::Invalid(format!("unknown hypothesis `{name}`")))?;
                if applicable(setup, h) {
                    Ok(h)
                } else {
                    Err(CliError::Invalid(format!(
                        "hypothesis `{h}` does not apply to this config"
                    )))
                }
            })
            .collect(),
    }
}

#[derive(Default)]
struct Checked {
    reports: Vec<Value>,
    lines: Vec<String>,
    failed: bool,
    unknown: Vec<String>,
    implied: Option<Vec<String>>,
}

impl Checked {
    fn push<P: Serialize + Debug>(&mut self, r: &HypothesisReport<P>) {
        match r.verdict {
            Verdict::Fails(_) => self.failed = true,
            Verdict::Unknown => self.unknown.push(r.hypothesis.clone()),
            Verdict::Holds => {}
        }
        self.lines.push(summarize(r));
        self.reports.push(to_value(r));
    }
}

fn phi_report(phi: &ComparisonFn) -> Result<HypothesisReport<f64>, CliError> {
    let verdict = phi.validate()?;
    Ok(HypothesisReport {
        hypothesis: "phi".into(),
        verdict,
        samples: ComparisonFn::grid().count() as u64,
        seed: None,
    })
}

fn run_checks<S>(setup: &Setup<S>, exec: &Threads) -> Result<Checked, CliError>
where
    S: SpaceOps,
    S::Point: Clone + Debug + PartialEq + Serialize + Send + Sync + 'static,
{
    let p = &setup.problem;
    let g = p.g();
    let cfg = &setup.settings.check;
    let mut out = Checked::default();
    for name in selected(setup)? {
        match name {
            "phi" => {
                let r = phi_report(setup.settings.phi.as_ref().expect("applicable"))?;
                out.push(&r);
            }
            "initial_condition" => out.push(&check_initial_condition(
                &p.space,
                p.f.as_ref(),
                g,
                &p.star,
                &p.initial,
                p.direction,
            )?),
            "monotone_property" => out.push(&check_monotone_property(&p.space, p.f.as_ref(), g, cfg, exec)?),
            "argumentwise_monotone" => out.push(&check_argumentwise_monotone(&p.space, p.f.as_ref(), g, cfg, exec)?),
            "commuting" => out.push(&check_commuting(&p.space, p.f.as_ref(), g, cfg, exec)?),
            "contraction" => {
                let variant = p.contraction.as_ref().expect("applicable");
                let r = check_contraction(&p.space, p.f.as_ref(), g, &p.star, variant, cfg, exec)?;
                if !r.verdict.is_fail() {
                    let increasing = variant.phi().is_some_and(ComparisonFn::is_increasing);
                    out.implied = Some(
                        implied_variants(variant, p.star.is_permuted(), increasing, p.n())
                            .iter()
                            .map(ToString::to_string)
                            .collect(),
                    );
                }
                out.push(&r);
            }
            "g_icu" | "g_dcl" => {
                if let Some(r) = p.space.sequence_check(g, name == "g_icu", &cfg.plan) {
                    out.push(&r?);
                }
            }
            _ => unreachable!("names come from HYPOTHESES"),
        }
    }
    Ok(out)
}

fn load(path: &Path, over: &Overrides) -> Result<(LoadedConfig, Problem), CliError> {
    let loaded = ProblemConfig::load(path)?;
    let problem = Problem::load(&loaded, over)?;
    Ok((loaded, problem))
}

fn overrides(common: &Common) -> Overrides {
    Overrides {
        seed: common.seed,
        samples: common.samples,
        ..Overrides::default()
    }
}

pub fn check(path: &Path, common: &Common) -> Result<Outcome, CliError> {
    let clock = Clock::new(common);
    let over = overrides(common);
    let (loaded, problem) = load(path, &over)?;
    let exec = executor(common);
    let (checked, flags) = match &problem {
        Problem::Vector(s) => (run_checks(s, &exec)?, to_value(&s.problem.flags)),
        Problem::Finite(s) => (run_checks(s, &exec)?, to_value(&s.problem.flags)),
    };
    let echo = effective_config(&loaded, &over, None);
    let mut report = envelope("check", &loaded, &echo);
    let mut warnings: Vec<String> = checked
        .unknown
        .iter()
        .map(|h| format!("{h}: sampled without a counterexample, verdict unknown"))
        .collect();
    if let Some(w) = flags.get("warnings").and_then(Value::as_array) {
        warnings.extend(w.iter().filter_map(|v| v.as_str().map(String::from)));
    }
    report.insert("hypotheses".into(), Value::Array(checked.reports));
    if let Some(implied) = &checked.implied {
        report.insert("implied_variants".into(), json!(implied));
    }
    report.insert("flags".into(), flags);
    report.insert("warnings".into(), json!(warnings));
    clock.stamp(&mut report);
    let mut summary = checked.lines.join("\n");
    summary.push('\n');
    if let Some(implied) = &checked.implied {
        if !implied.is_empty() {
            let _ = writeln!(summary, "implies: {}", implied.join(", "));
        }
    }
    for w in &warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    let exit = if checked.failed {
        exit::HYPOTHESIS_FAILURE
    } else {
        exit::OK
    };
    let _ = writeln!(
        summary,
        "{}",
        if checked.failed {
            "result: hypothesis failure"
        } else {
            "result: ok"
        }
    );
    Ok(Outcome {
        exit,
        summary,
        report: Value::Object(report),
    })
}

fn solve_setup<S>(
    setup: &Setup<S>,
    args: &SolveArgs,
    exec: &Threads,
    report: &mut Map<String, Value>,
) -> Result<(u8, String), CliError>
where
    S: SpaceOps,
    S::Point: Clone + Debug + PartialEq + Serialize + Send + Sync + 'static,
{
    if !setup.settings.has_initial {
        return Err(CliError::Invalid("solve needs an [initial] section".into()));
    }
    let p = &setup.problem;
    let mut cfg = setup.settings.solve;
    let mut result = picard_solve(p, &cfg, exec)?;
    let mut forced = false;
    if result.status == SolveStatus::HypothesisFailure && args.force {
        forced = true;
        cfg.check_hypotheses = false;
        let failed = std::mem::take(&mut result.hypotheses);
        result = picard_solve(p, &cfg, exec)?;
        result.hypotheses.splice(0..0, failed);
        result
            .warnings
            .push("hypotheses failed; iterated anyway because of --force".into());
    }
    let mut summary = String::new();
    for r in &result.hypotheses {
        let _ = writeln!(summary, "{}", summarize(r));
    }
    let _ = write!(
        summary,
        "status: {} after {} iterations",
        result.status.as_str(),
        result.iterations
    );
    if result.residual.is_finite() {
        let _ = write!(summary, ", residual {:e}", result.residual);
    }
    summary.push('\n');
    if matches!(result.status, SolveStatus::Converged | SolveStatus::MaxIter) {
        let _ = writeln!(summary, "point: {:?}", result.point);
    }
    report.insert("forced".into(), json!(forced));
    if result.status == SolveStatus::Converged {
        let (ok, residual) = verify_solution(&p.space, p.f.as_ref(), p.g(), &p.star, &result.point, cfg.tol)?;
        report.insert("verification".into(), json!({ "holds": ok, "residual": residual }));
        let _ = writeln!(summary, "verified: {ok}");
        let trials = args.probe.or(Some(setup.settings.probe_trials)).unwrap_or(0);
        if trials > 0 {
            let plan = setup.settings.check.plan;
            let probe = uniqueness_probe(p, &cfg, trials, plan.seed, &plan, exec)?;
            let _ = writeln!(
                summary,
                "uniqueness probe: {} of {} trials converged into {} cluster(s)",
                probe.converged,
                probe.trials,
                probe.clusters.len()
            );
            report.insert("uniqueness".into(), to_value(&probe));
        }
    }
    for w in &result.warnings {
        let _ = writeln!(summary, "warning: {w}");
    }
    let code = match result.status {
        SolveStatus::Converged => exit::OK,
        SolveStatus::MaxIter | SolveStatus::Diverged => exit::NO_CONVERGENCE,
        SolveStatus::HypothesisFailure => exit::HYPOTHESIS_FAILURE,
        SolveStatus::GInverseMissing => exit::MISSING_ORACLE,
    };
    report.insert("warnings".into(), json!(result.warnings));
    report.insert("solve".into(), to_value(&result));
    Ok((code, summary))
}

pub fn solve(path: &Path, common: &Common, args: &SolveArgs) -> Result<Outcome, CliError> {
    let clock = Clock::new(common);
    let over = Overrides {
        tol: args.tol,
        max_iter: args.max_iter,
        ..overrides(common)
    };
    let (loaded, mut problem) = load(path, &over)?;
    if let Some(t) = args.probe {
        match &mut problem {
            Problem::Vector(s) => s.settings.probe_trials = t,
            Problem::Finite(s) => s.settings.probe_trials = t,
        }
    }
    let exec = executor(common);
    let echo = effective_config(&loaded, &over, args.probe);
    let mut report = envelope("solve", &loaded, &echo);
    let (exit, summary) = match &problem {
        Problem::Vector(s) => solve_setup(s, args, &exec, &mut report)?,
        Problem::Finite(s) => solve_setup(s, args, &exec, &mut report)?,
    };
    clock.stamp(&mut report);
    Ok(Outcome {
        exit,
        summary,
        report: Value::Object(report),
    })
}

/// Coincidence points and common fixed points straight from the component
/// equations `F(u_{σᵢ(1)}, …, u_{σᵢ(n)}) = g uᵢ`.
pub fn component_scan(
    p: usize,
    f: &dyn Mapping<usize>,
    g: &dyn SelfMap<usize>,
    star: &StarOp,
) -> Result<(Vec<Tuple>, Vec<Tuple>), EvalError> {
    let n = star.n();
    let mut coincidences = Vec::new();
    let mut fixed = Vec::new();
    let tuples = Tuples::new(p, n).ok_or(EvalError::OutOfCarrier(p))?;
    for u in tuples {
        let mut coincident = true;
        let mut is_fixed = true;
        for i in 0..n {
            let args: Vec<usize> = star.row0(i).iter().map(|&k| u[k]).collect();
            let fi = f.eval(&args)?;
            let gi = g.eval(&u[i])?;
            coincident &= fi == gi;
            is_fixed &= fi == u[i] && gi == u[i];
        }
        if coincident {
            coincidences.push(u.clone());
        }
        if is_fixed {
            fixed.push(u);
        }
    }
    Ok((coincidences, fixed))
}

fn tuple_text(u: &[usize]) -> String {
    let cells: Vec<String> = u.iter().map(ToString::to_string).collect();
    format!("({})", cells.join(", "))
}

fn set_text(set: &[Vec<usize>]) -> String {
    let items: Vec<String> = set.iter().map(|u| tuple_text(u)).collect();
    format!("{{{}}}", items.join(", "))
}

pub fn enumerate(path: &Path, common: &Common, bound: Option<u64>) -> Result<Outcome, CliError> {
    let clock = Clock::new(common);
    let over = Overrides {
        bound,
        ..overrides(common)
    };
    let (loaded, problem) = load(path, &over)?;
    let Problem::Finite(setup) = problem else {
        return Err(CliError::Usage("enumerate needs a finite space".into()));
    };
    let bound = bound.or(loaded.config.check.bound).unwrap_or(DEFAULT_ENUM_BOUND);
    let p = &setup.problem;
    let g = p.g();
    let coincidences = enumerate_star_coincidence(&p.space, p.f.as_ref(), g, &p.star, bound)?;
    let fixed = enumerate_common_star_fixed(&p.space, p.f.as_ref(), g, &p.star, bound)?;
    let (oracle_c, oracle_f) =
        component_scan(p.space.len(), p.f.as_ref(), g, &p.star).map_err(|e| CliError::Invalid(e.to_string()))?;
    let as_set = |v: &[Vec<usize>]| v.iter().cloned().collect::<BTreeSet<_>>();
    let pass = as_set(&coincidences) == as_set(&oracle_c) && as_set(&fixed) == as_set(&oracle_f);
    let compatible = commutes_at(p.f.as_ref(), g, &p.star, &coincidences)?;
    let identity_g = p.g.as_ref().is_none_or(|g| g.is_identity());

    let echo = effective_config(&loaded, &over, None);
    let mut report = envelope("enumerate", &loaded, &echo);
    report.insert("bound".into(), json!(bound));
    report.insert("coincidence_points".into(), json!(coincidences));
    report.insert("common_fixed_points".into(), json!(fixed));
    report.insert("commutes_at_coincidences".into(), json!(compatible));
    report.insert("g_is_identity".into(), json!(identity_g));
    report.insert(
        "oracle".into(),
        json!({
            "method": "component_equations",
            "coincidence_points": oracle_c,
            "common_fixed_points": oracle_f,
            "cross_check": if pass { "pass" } else { "fail" },
        }),
    );
    clock.stamp(&mut report);
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "coincidence points ({}): {}",
        coincidences.len(),
        set_text(&coincidences)
    );
    let _ = writeln!(summary, "common fixed points ({}): {}", fixed.len(), set_text(&fixed));
    let _ = writeln!(summary, "commutes at coincidence points: {compatible}");
    let _ = writeln!(summary, "cross-check: {}", if pass { "pass" } else { "fail" });
    Ok(Outcome {
        exit: if pass { exit::OK } else { exit::HYPOTHESIS_FAILURE },
        summary,
        report: Value::Object(report),
    })
}
