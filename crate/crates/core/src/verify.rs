//! The identity battery behind `folia verify`: named checks, a registry to
//! select them, and a deterministic parallel runner.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::connections::{Eps, Geometry};
use crate::curvature::{self, CurvatureError};
use crate::frames::FrameSpec;
use crate::exterior::MixedTensor;
use crate::jets::{Jet, JetError};
use crate::laplacians::{self, LaplacianError};
use crate::scalar::{render, Rational, Scalar};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "FOLIA_THREADS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("unknown check '{name}' (known: {known})")]
    UnknownCheck { name: String, known: String },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Laplacian(#[from] LaplacianError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub eps: Vec<Eps<Rational>>,
    pub trials: usize,
    pub seed: u64,
    /// Jet order of random inputs; each check falls back to its own minimum.
    pub order: Option<usize>,
    pub tolerance: f64,
    pub exact: bool,
    pub constraints: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            eps: vec![Eps::Finite(Rational::from_i64(1)), Eps::Infinite],
            trials: 20,
            seed: 0,
            order: None,
            tolerance: 1e-9,
            exact: false,
            constraints: true,
        }
    }
}

/// Geometry and parameters in one scalar type.
pub struct Ctx<S> {
    pub geo: Geometry<S>,
    pub eps: Vec<Eps<S>>,
    ric: Vec<OnceLock<Result<MixedTensor<Jet<S>>, JetError>>>,
}

impl<S: Scalar> Ctx<S> {
    fn new(geo: Geometry<S>, eps: Vec<Eps<S>>) -> Self {
        let ric = eps.iter().map(|_| OnceLock::new()).collect();
        Ctx { geo, eps, ric }
    }

    /// `Ric^ε` for the epsilon of a case, computed once per context.
    pub fn ric(&self, case: &Case) -> Result<&MixedTensor<Jet<S>>, JetError> {
        let i = case.eps.expect("case without epsilon");
        self.ric[i].get_or_init(|| curvature::ric(&self.geo, &self.eps[i])).as_ref().map_err(|e| e.clone())
    }
}

pub struct CheckContext {
    pub spec: FrameSpec,
    pub config: VerifyConfig,
    exact: Ctx<Rational>,
    float: Ctx<f64>,
}

impl CheckContext {
    pub fn new(spec: &FrameSpec, config: VerifyConfig) -> Self {
        let mut geo: Geometry<Rational> = Geometry::new(spec);
        if !config.constraints {
            geo = geo.without_constraints();
        }
        let float_geo = Geometry::from_algebra(geo.n, geo.m, geo.alg.map_scalar(|q| q.as_f64()));
        let float_eps = config.eps.iter().map(|e| e.map(|q| q.as_f64())).collect();
        CheckContext {
            spec: spec.clone(),
            exact: Ctx::new(geo, config.eps.clone()),
            float: Ctx::new(float_geo, float_eps),
            config,
        }
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }
}

/// One unit of work of a check: an epsilon, a degree and a trial number.
#[derive(Clone, Copy, Debug)]
pub struct Case {
    pub eps: Option<usize>,
    pub degree: usize,
    pub trial: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub detail: String,
}

pub trait Check: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult, VerifyError>;
}

/// Residual-based checks written once for both scalar types.
pub trait ResidualCheck: Send + Sync {
    const NAME: &'static str;
    const DESCRIPTION: &'static str;
    fn cases(&self, ctx: &CheckContext) -> Vec<Case>;
    fn residual<S: Scalar>(&self, ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError>;
}

pub struct Residual<T>(pub T);

impl<T: ResidualCheck> Check for Residual<T> {
    fn name(&self) -> &'static str {
        T::NAME
    }

    fn description(&self) -> &'static str {
        T::DESCRIPTION
    }

    fn run(&self, ctx: &CheckContext) -> Result<CheckResult, VerifyError> {
        let cases = self.0.cases(ctx);
        let residuals: Vec<Result<f64, VerifyError>> = if ctx.config.exact {
            cases.par_iter().map(|c| self.0.residual(ctx, &ctx.exact, c)).collect()
        } else {
            cases.par_iter().map(|c| self.0.residual(ctx, &ctx.float, c)).collect()
        };
        // a case that cannot be evaluated counts as a failure
        let bad = |r: &Result<f64, VerifyError>| match r {
            Ok(r) if ctx.config.exact => *r != 0.0,
            Ok(r) => !(*r <= ctx.config.tolerance),
            Err(_) => true,
        };
        let failures = residuals.iter().filter(|r| bad(r)).count();
        let max_residual = residuals.iter().map(|r| *r.as_ref().unwrap_or(&f64::INFINITY)).fold(0.0, f64::max);
        let detail = residuals.iter().find_map(|r| r.as_ref().err()).map(|e| e.to_string()).unwrap_or_default();
        Ok(CheckResult { name: T::NAME.to_string(), passed: failures == 0, cases: cases.len(), failures, max_residual, detail })
    }
}

fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &p in parts {
        rng = ChaCha8Rng::seed_from_u64(rng.gen::<u64>() ^ p);
    }
    rng.gen()
}

fn name_tag(name: &str) -> u64 {
    name.bytes().fold(0u64, |h, b| h.rotate_left(8) ^ b as u64)
}

/// Cases over every configured epsilon (optionally finite only), every
/// degree in `degrees` and `trials` seeded trials.
pub fn sweep(ctx: &CheckContext, name: &str, degrees: impl Iterator<Item = usize> + Clone, finite_only: bool) -> Vec<Case> {
    let mut out = Vec::new();
    for (ei, e) in ctx.config.eps.iter().enumerate() {
        if finite_only && !e.is_finite() {
            continue;
        }
        for degree in degrees.clone() {
            for trial in 0..ctx.config.trials {
                let seed = mix(ctx.config.seed, &[name_tag(name), ei as u64, degree as u64, trial as u64]);
                out.push(Case { eps: Some(ei), degree, trial, seed });
            }
        }
    }
    out
}

/// A single case for checks that quantify over frame indices only.
pub fn single(ctx: &CheckContext, name: &str) -> Vec<Case> {
    vec![Case { eps: None, degree: 0, trial: 0, seed: mix(ctx.config.seed, &[name_tag(name)]) }]
}

fn eps_of<'a, S: Scalar>(sc: &'a Ctx<S>, case: &Case) -> &'a Eps<S> {
    &sc.eps[case.eps.expect("case without epsilon")]
}

fn eps_label(e: &Eps<Rational>) -> String {
    match e {
        Eps::Finite(v) => render(v),
        Eps::Infinite => "inf".to_string(),
    }
}

/// Cases without an epsilon, over the given degrees.
pub fn sweep_plain(ctx: &CheckContext, name: &str, degrees: impl Iterator<Item = usize>) -> Vec<Case> {
    let mut out = Vec::new();
    for degree in degrees {
        for trial in 0..ctx.config.trials {
            let seed = mix(ctx.config.seed, &[name_tag(name), u64::MAX, degree as u64, trial as u64]);
            out.push(Case { eps: None, degree, trial, seed });
        }
    }
    out
}

fn order_at_least(ctx: &CheckContext, min: usize) -> usize {
    ctx.config.order.unwrap_or(min).max(min)
}

fn table_diff<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> f64 {
    a.iter().zip(b).flat_map(|(x, y)| x.iter().zip(y)).map(|(u, v)| (u.clone() - v.clone()).as_f64().abs()).fold(0.0, f64::max)
}

fn curvature_mismatch(r: Result<impl Sized, CurvatureError>) -> Result<f64, VerifyError> {
    match r {
        Ok(_) => Ok(0.0),
        Err(CurvatureError::Mismatch { residual, .. }) => Ok(residual),
        Err(e) => Err(e.into()),
    }
}

pub struct Weitzenbock;

impl ResidualCheck for Weitzenbock {
    const NAME: &'static str = "weitzenbock";
    const DESCRIPTION: &'static str = "hodge_laplacian - bochner_laplacian on random forms of every degree";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        sweep(ctx, Self::NAME, 0..=ctx.dim(), false)
    }
    fn residual<S: Scalar>(&self, ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let alpha = laplacians::random_form::<S>(ctx.dim(), case.degree, order_at_least(ctx, 2), case.seed);
        let e = eps_of(sc, case);
        let h = laplacians::hodge_laplacian(&sc.geo, e, &alpha)?;
        let b = laplacians::bochner_laplacian_with(&sc.geo, &sc.geo.epsilon_connection(e), sc.ric(case)?, &alpha)?;
        Ok(laplacians::max_abs_at_point(&h.sub(&b)))
    }
}

pub struct DSquared;

impl ResidualCheck for DSquared {
    const NAME: &'static str = "d-squared";
    const DESCRIPTION: &'static str = "d(d alpha) at the point on random forms";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        sweep_plain(ctx, Self::NAME, 0..ctx.dim().saturating_sub(1))
    }
    fn residual<S: Scalar>(&self, ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let alpha = laplacians::random_form::<S>(ctx.dim(), case.degree, order_at_least(ctx, 3), case.seed);
        let dd = laplacians::exterior_derivative(&sc.geo, &laplacians::exterior_derivative(&sc.geo, &alpha)?)?;
        Ok(laplacians::max_abs_at_point(&dd))
    }
}

pub struct FunctionCommutation;

impl ResidualCheck for FunctionCommutation {
    const NAME: &'static str = "function-commutation";
    const DESCRIPTION: &'static str = "d Delta_H f - Delta_{H,eps} d f on random function jets";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        sweep(ctx, Self::NAME, 0..1, false)
    }
    fn residual<S: Scalar>(&self, ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let f = Jet::<S>::random(ctx.dim(), order_at_least(ctx, 3), case.seed);
        let r = laplacians::commutation_check(&sc.geo, eps_of(sc, case), &f)?;
        Ok(laplacians::max_abs_at_point(&r))
    }
}

pub struct Bianchi;

impl ResidualCheck for Bianchi {
    const NAME: &'static str = "bianchi";
    const DESCRIPTION: &'static str = "first Bianchi identity with torsion for the Bott connection and each nabla^eps";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        let base = single(ctx, Self::NAME)[0];
        std::iter::once(base).chain((0..ctx.config.eps.len()).map(|i| Case { eps: Some(i), ..base })).collect()
    }
    fn residual<S: Scalar>(&self, _ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let conn = match case.eps {
            None => sc.geo.bott.clone(),
            Some(_) => sc.geo.epsilon_connection(eps_of(sc, case)),
        };
        Ok(curvature::bianchi_residual(&sc.geo.alg, &conn)?)
    }
}

pub struct AdjointCurvature;

impl ResidualCheck for AdjointCurvature {
    const NAME: &'static str = "adjoint-curvature";
    const DESCRIPTION: &'static str = "curvature of the adjoint connection through R and nabla T, for the Bott connection and each nabla^eps";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        Bianchi.cases(ctx)
    }
    fn residual<S: Scalar>(&self, _ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let conn = match case.eps {
            None => sc.geo.bott.clone(),
            Some(_) => sc.geo.epsilon_connection(eps_of(sc, case)),
        };
        let one = curvature::curv1_residual(&sc.geo.alg, &conn)?;
        let two = curvature::curv2_residual(&sc.geo.alg, &conn)?;
        Ok(one.max(two))
    }
}

pub struct CommuteBott;

impl ResidualCheck for CommuteBott {
    const NAME: &'static str = "commute-bott";
    const DESCRIPTION: &'static str = "pair-exchange identity of the Bott curvature through the A map";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        single(ctx, Self::NAME)
    }
    fn residual<S: Scalar>(&self, _ctx: &CheckContext, sc: &Ctx<S>, _case: &Case) -> Result<f64, VerifyError> {
        let r = curvature::metric_connection_commutation(&sc.geo.alg, &sc.geo.bott)?;
        Ok(r.general.max(r.derivative_terms_only))
    }
}

pub struct CommuteSkew;

impl ResidualCheck for CommuteSkew {
    const NAME: &'static str = "commute";
    const DESCRIPTION: &'static str = "pair-exchange identity for random metric connections with skew torsion";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        sweep_plain(ctx, Self::NAME, 0..1)
    }
    fn residual<S: Scalar>(&self, _ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let conn = curvature::random_skew_torsion_connection(&sc.geo.alg, case.seed);
        let r = curvature::metric_connection_commutation(&sc.geo.alg, &conn)?;
        Ok(r.general.max(r.derivative_terms_only))
    }
}

pub struct ScalingExpansion;

impl ResidualCheck for ScalingExpansion {
    const NAME: &'static str = "scaling-expansion";
    const DESCRIPTION: &'static str = "adjoint curvature of nabla^eps against R + (B1 + B2)/eps + B3/eps^2";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        let c = single(ctx, Self::NAME)[0];
        (0..ctx.config.eps.len()).map(|i| Case { eps: Some(i), ..c }).collect()
    }
    fn residual<S: Scalar>(&self, _ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        curvature_mismatch(curvature::adjoint_curvature(&sc.geo, eps_of(sc, case)))
    }
}

pub struct RicciLocal;

impl ResidualCheck for RicciLocal {
    const NAME: &'static str = "ricci-local";
    const DESCRIPTION: &'static str = "local frame formula for C_{Ric^eps} - C_{Ric_H}";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        ScalingExpansion.cases(ctx)
    }
    fn residual<S: Scalar>(&self, _ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let e = eps_of(sc, case);
        let diff = curvature::ric(&sc.geo, e)?.sub(&curvature::ric(&sc.geo, &Eps::Infinite)?);
        let local = curvature::ricci_difference_local(&sc.geo, e)?;
        Ok(diff.sub(&local).terms().map(|(_, j)| j.value().as_f64().abs()).fold(0.0, f64::max))
    }
}

pub struct BochnerEquality;

impl ResidualCheck for BochnerEquality {
    const NAME: &'static str = "bochner";
    const DESCRIPTION: &'static str = "Bochner identity for 1-forms closed at the point";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        sweep(ctx, Self::NAME, 1..2, true)
    }
    fn residual<S: Scalar>(&self, ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let alpha = laplacians::random_form::<S>(ctx.dim(), 1, order_at_least(ctx, 2), case.seed);
        let alpha = laplacians::close_at_point(&sc.geo, &alpha)?;
        let r = laplacians::bochner_inequality_check(&sc.geo, eps_of(sc, case), &alpha)?;
        Ok(r.residual.as_f64().abs())
    }
}

pub struct AdiabaticQ;

impl ResidualCheck for AdiabaticQ {
    const NAME: &'static str = "adiabatic-q";
    const DESCRIPTION: &'static str = "Ric_{g_eps}(v + eps w) through Q, J^2 and Ric_V";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        sweep(ctx, Self::NAME, 0..1, true)
    }
    fn residual<S: Scalar>(&self, ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
        let x: Vec<S> = (0..ctx.dim()).map(|_| S::from_i64(rng.gen_range(-4..=4))).collect();
        let e = eps_of(sc, case).value().expect("finite epsilon").clone();
        Ok(curvature::adiabatic_q_residual(&sc.geo, &e, &x)?.as_f64().abs())
    }
}

pub struct CanonicalVariation;

impl ResidualCheck for CanonicalVariation {
    const NAME: &'static str = "canonical-variation";
    const DESCRIPTION: &'static str = "Ricci table of g_eps against the weighted Koszul oracle";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        let c = single(ctx, Self::NAME)[0];
        ctx.config.eps.iter().enumerate().filter(|(_, e)| e.is_finite()).map(|(i, _)| Case { eps: Some(i), ..c }).collect()
    }
    fn residual<S: Scalar>(&self, _ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let e = eps_of(sc, case);
        let table = curvature::ricci_canonical_variation(&sc.geo, e)?;
        let oracle = curvature::ricci_levi_civita(&sc.geo, e)?;
        Ok(table_diff(&table, &oracle))
    }
}

pub struct OneFormReconciliation;

impl ResidualCheck for OneFormReconciliation {
    const NAME: &'static str = "one-form-operator";
    const DESCRIPTION: &'static str = "explicit 1-form operator against L^eps - C_{Ric^eps}";
    fn cases(&self, ctx: &CheckContext) -> Vec<Case> {
        sweep(ctx, Self::NAME, 1..2, false)
    }
    fn residual<S: Scalar>(&self, ctx: &CheckContext, sc: &Ctx<S>, case: &Case) -> Result<f64, VerifyError> {
        let alpha = laplacians::random_form::<S>(ctx.dim(), 1, order_at_least(ctx, 2), case.seed);
        Ok(laplacians::one_form_reconciliation(&sc.geo, eps_of(sc, case), &alpha)?)
    }
}

pub struct Validity;

impl Check for Validity {
    fn name(&self) -> &'static str {
        "validity"
    }
    fn description(&self) -> &'static str {
        "adapted-frame validity checks of the model"
    }
    fn run(&self, ctx: &CheckContext) -> Result<CheckResult, VerifyError> {
        let report = ctx.spec.validate();
        let failures = report.failures();
        Ok(CheckResult {
            name: self.name().to_string(),
            passed: failures.is_empty(),
            cases: report.checks.len(),
            failures: failures.len(),
            max_residual: 0.0,
            detail: failures.join(", "),
        })
    }
}

pub struct CheckRegistry {
    checks: Vec<Box<dyn Check>>,
}

impl CheckRegistry {
    pub fn empty() -> Self {
        CheckRegistry { checks: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Validity));
        r.register(Box::new(Residual(Weitzenbock)));
        r.register(Box::new(Residual(DSquared)));
        r.register(Box::new(Residual(FunctionCommutation)));
        r.register(Box::new(Residual(Bianchi)));
        r.register(Box::new(Residual(AdjointCurvature)));
        r.register(Box::new(Residual(CommuteBott)));
        r.register(Box::new(Residual(CommuteSkew)));
        r.register(Box::new(Residual(ScalingExpansion)));
        r.register(Box::new(Residual(RicciLocal)));
        r.register(Box::new(Residual(BochnerEquality)));
        r.register(Box::new(Residual(AdiabaticQ)));
        r.register(Box::new(Residual(CanonicalVariation)));
        r.register(Box::new(Residual(OneFormReconciliation)));
        r
    }

    /// Later registrations shadow earlier ones with the same name.
    pub fn register(&mut self, check: Box<dyn Check>) {
        self.checks.retain(|c| c.name() != check.name());
        self.checks.push(check);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.iter().map(|c| c.name()).collect()
    }

    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.checks.iter().map(|c| (c.name(), c.description())).collect()
    }

    /// The named checks in the order given, or all of them for an empty list.
    pub fn select(&self, names: &[String]) -> Result<Vec<&dyn Check>, VerifyError> {
        if names.is_empty() {
            return Ok(self.checks.iter().map(|c| c.as_ref()).collect());
        }
        names
            .iter()
            .map(|n| {
                self.checks.iter().find(|c| c.name() == n).map(|c| c.as_ref()).ok_or_else(|| VerifyError::UnknownCheck {
                    name: n.clone(),
                    known: self.names().join(", "),
                })
            })
            .collect()
    }
}

/// Thread cap from `FOLIA_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Runs the checks on a local pool of `threads` workers (all cores when
/// `None`); results keep the order of `checks`.
pub fn run_checks(ctx: &CheckContext, checks: &[&dyn Check], threads: Option<usize>) -> Result<Vec<CheckResult>, VerifyError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| VerifyError::Pool(e.to_string()))?;
    pool.install(|| checks.iter().map(|c| c.run(ctx)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct Parameters {
    pub eps: Vec<String>,
    pub trials: usize,
    pub seed: u64,
    pub order: Option<usize>,
    pub tolerance: f64,
    pub exact: bool,
    pub commutator_constraints: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub command: String,
    pub model: String,
    pub parameters: Parameters,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// Not serialized, so that reports stay byte-identical across runs.
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Builds the context, runs the selected checks and assembles the report.
pub fn verify(spec: &FrameSpec, config: VerifyConfig, names: &[String], threads: Option<usize>) -> Result<VerifyReport, VerifyError> {
    let start = Instant::now();
    let registry = CheckRegistry::builtin();
    let checks = registry.select(names)?;
    let parameters = Parameters {
        eps: config.eps.iter().map(eps_label).collect(),
        trials: config.trials,
        seed: config.seed,
        order: config.order,
        tolerance: config.tolerance,
        exact: config.exact,
        commutator_constraints: config.constraints,
    };
    let ctx = CheckContext::new(spec, config);
    let results = run_checks(&ctx, &checks, threads)?;
    Ok(VerifyReport {
        schema: SCHEMA_VERSION,
        command: "verify".to_string(),
        model: spec.name.clone(),
        parameters,
        passed: results.iter().all(|r| r.passed),
        checks: results,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
