//! Acceptance battery: one PASS/FAIL line per criterion.
//!
//! Criteria 6 and 8 include hopf_s5, whose horizontal curvature operator
//! (Fubini-Study on CP^2) has a kernel; those parts are known to fail and
//! are reported as such. The process exits nonzero on any other failure.

use std::process::ExitCode;
use std::time::Instant;

use folia_core::connections::{Eps, Geometry};
use folia_core::curvature;
use folia_core::frames::FrameSpec;
use folia_core::laplacians;
use folia_core::models::{builtin_model, ModelRegistry};
use folia_core::spectral::{self, DecayStatus, DegreeStatus};
use folia_core::verify::{self, VerifyConfig};
use folia_core::{Rational, Scalar};

struct Outcome {
    passed: bool,
    /// Failure limited to the documented hopf_s5 defect.
    known_defect: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Outcome { passed, known_defect: false, detail }
    }
}

fn q(num: i64, den: i64) -> Rational {
    Rational::from_ratio(num, den)
}

fn model(name: &str) -> FrameSpec {
    builtin_model(name).expect("built-in model")
}

fn all_models() -> Vec<FrameSpec> {
    let reg = ModelRegistry::builtin();
    reg.names().into_iter().map(|n| reg.build(n).unwrap()).collect()
}

fn quarter_one_four_inf() -> Vec<Eps<Rational>> {
    vec![Eps::Finite(q(1, 4)), Eps::Finite(q(1, 1)), Eps::Finite(q(4, 1)), Eps::Infinite]
}

fn exact_config(eps: Vec<Eps<Rational>>, trials: usize, order: usize) -> VerifyConfig {
    VerifyConfig { eps, trials, seed: 2024, order: Some(order), tolerance: 0.0, exact: true, constraints: true }
}

fn run(spec: &FrameSpec, config: VerifyConfig, checks: &[&str]) -> verify::VerifyReport {
    let names: Vec<String> = checks.iter().map(|s| s.to_string()).collect();
    verify::verify(spec, config, &names, verify::threads_from_env()).expect("verify runs")
}

fn weitzenbock() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut ok = true;
    for name in ["heisenberg3", "heisenberg5", "hopf_s3", "hopf_s5"] {
        let r = run(&model(name), exact_config(quarter_one_four_inf(), 200, 2), &["weitzenbock"]);
        ok &= r.passed;
        worst = worst.max(r.checks[0].max_residual);
        cases += r.checks[0].cases;
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(ok && secs < 300.0, format!("{cases} exact cases, max residual {worst}, {secs:.1}s"))
}

fn d_squared_and_commutation() -> Outcome {
    let mut ok = true;
    let mut cases = 0;
    for name in ["heisenberg3", "heisenberg5", "hopf_s3", "hopf_s5"] {
        let spec = model(name);
        let r = run(&spec, exact_config(quarter_one_four_inf(), 200, 3), &["function-commutation"]);
        ok &= r.passed;
        cases += r.checks[0].cases;
        // d^2 does not involve eps
        let r = run(&spec, exact_config(vec![Eps::Infinite], 200, 3), &["d-squared"]);
        ok &= r.passed;
        cases += r.checks[0].cases;
    }
    let mut control = VerifyConfig { constraints: false, ..exact_config(vec![Eps::Infinite], 200, 3) };
    control.seed = 99;
    let mut worst_rate = 1.0f64;
    for name in ["heisenberg3", "hopf_s3", "hopf_s5"] {
        let r = run(&model(name), control.clone(), &["d-squared"]);
        let c = &r.checks[0];
        worst_rate = worst_rate.min(c.failures as f64 / c.cases as f64);
    }
    Outcome::new(ok && worst_rate >= 0.95, format!("{cases} exact cases; negative control fails on {:.1}% of trials", 100.0 * worst_rate))
}

fn curvature_identities() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for spec in all_models() {
        let geo: Geometry<Rational> = Geometry::new(&spec);
        let mut residuals = vec![
            curvature::bianchi_residual(&geo.alg, &geo.bott).unwrap(),
            curvature::curv1_residual(&geo.alg, &geo.bott).unwrap(),
            curvature::curv2_residual(&geo.alg, &geo.bott).unwrap(),
        ];
        let c = curvature::metric_connection_commutation(&geo.alg, &geo.bott).unwrap();
        residuals.push(c.general);
        residuals.push(c.derivative_terms_only);
        let r = residuals.iter().copied().fold(0.0, f64::max);
        ok &= r == 0.0;
        worst = worst.max(r);
    }
    Outcome::new(ok, format!("Bianchi, adjoint curvature and Bott pair exchange on all models, max residual {worst}"))
}

fn canonical_variation() -> Outcome {
    let mut ok = true;
    for name in ["hopf_s3", "heisenberg3"] {
        let geo: Geometry<Rational> = Geometry::new(&model(name));
        for e in [q(1, 2), q(1, 1), q(2, 1)] {
            let eps = Eps::Finite(e);
            ok &= curvature::ricci_canonical_variation(&geo, &eps).unwrap() == curvature::ricci_levi_civita(&geo, &eps).unwrap();
        }
    }
    let s3: Geometry<Rational> = Geometry::new(&model("hopf_s3"));
    let ric = curvature::ricci_levi_civita(&s3, &Eps::Finite(q(1, 1))).unwrap();
    let round = (0..3).all(|a| (0..3).all(|b| ric[a][b] == if a == b { q(2, 1) } else { q(0, 1) }));
    Outcome::new(ok && round, format!("table = Koszul oracle exactly: {ok}; Ric_g1(S^3) = 2 Id: {round}"))
}

fn one_form_reconciliation() -> Outcome {
    let mut ok = true;
    let mut count = 0;
    for spec in all_models() {
        let geo: Geometry<Rational> = Geometry::new(&spec);
        for e in [q(1, 4), q(1, 1), q(4, 1)] {
            for seed in 0..10u64 {
                let alpha = laplacians::random_form::<Rational>(spec.dim(), 1, 2, seed);
                ok &= laplacians::one_form_reconciliation(&geo, &Eps::Finite(e.clone()), &alpha).unwrap() == 0.0;
                count += 1;
            }
        }
    }
    Outcome::new(ok, format!("{count} exact comparisons on all models"))
}

fn positivity_pipeline() -> Outcome {
    let mut notes = Vec::new();
    let mut s3_ok = true;
    let mut s5_c1_ok = true;
    let mut s5_decay_ok = true;
    for name in ["hopf_s3", "hopf_s5"] {
        let geo: Geometry<Rational> = Geometry::new(&model(name));
        let fibers = curvature::fiber_bounds(&geo).unwrap();
        let bad: Vec<String> = fibers.iter().filter(|f| f.c1 <= spectral::POSITIVITY_TOL).map(|f| format!("{:?}", f.bigrade)).collect();
        let scaling = laplacians::ricci_scaling(&geo, &[q(10, 1), q(100, 1), q(1000, 1)], 5).unwrap();
        let m10 = scaling.samples[0].measured;
        let decay = scaling.samples.iter().all(|s| s.measured <= 2.0 * m10 * (10.0 / s.eps).sqrt());
        let measured: Vec<String> = scaling.samples.iter().map(|s| format!("{:.4}", s.measured)).collect();
        notes.push(format!("{name}: c1 <= 0 on {bad:?}, measured [{}]", measured.join(", ")));
        if name == "hopf_s3" {
            s3_ok = bad.is_empty() && decay;
        } else {
            s5_c1_ok = bad.is_empty();
            s5_decay_ok = decay;
        }
    }
    let passed = s3_ok && s5_c1_ok && s5_decay_ok;
    Outcome { passed, known_defect: !passed && s3_ok && s5_decay_ok && !s5_c1_ok, detail: notes.join("; ") }
}

fn spectral_decay() -> Outcome {
    let spec = model("hopf_s3");
    let geo: Geometry<Rational> = Geometry::new(&spec);
    let Some((eps, c)) = spectral::auto_epsilon(&geo).unwrap() else {
        return Outcome::new(false, "no epsilon with positive curvature constant".into());
    };
    let report = spectral::closed_form_decay(&spec, &eps, 1).unwrap();
    let decay_ok = report.status == DecayStatus::Confirmed
        && report.max_slack() <= spectral::DECAY_SLACK_TOL
        && report.exactness_residual <= spectral::EXACTNESS_TOL
        && report.gap_closed >= c - 1e-9;
    let mut symmetry_ok = true;
    let mut checked = 0;
    for spec in all_models() {
        let geo: Geometry<Rational> = Geometry::new(&spec);
        let ym = geo.is_yang_mills().unwrap();
        for e in [q(1, 4), q(1, 1), q(4, 1)] {
            symmetry_ok &= spectral::zero_order_symmetric(&geo, &e).unwrap() == ym;
            if let Ok(op) = spectral::invariant_matrix(&spec, &Eps::Finite(e), 1) {
                symmetry_ok &= op.is_symmetric() == ym;
                checked += 1;
            }
        }
    }
    Outcome::new(
        decay_ok && symmetry_ok,
        format!(
            "eps = {eps}, c = {c}, gap = {}, slack = {:.2e}, exactness = {:.2e}, {:?}; symmetry iff Yang-Mills on all models ({checked} operator matrices): {symmetry_ok}",
            report.gap_closed,
            report.max_slack(),
            report.exactness_residual,
            report.status
        ),
    )
}

fn verdicts() -> Outcome {
    let vanish = |name: &str, degrees: &[usize]| {
        let v = spectral::cohomology_verdict(&model(name)).unwrap();
        let missing: Vec<usize> = degrees.iter().copied().filter(|&k| v.status(k) != Some(DegreeStatus::Vanishes)).collect();
        missing
    };
    let s3 = vanish("hopf_s3", &[1, 2]);
    let s5 = vanish("hopf_s5", &[1, 2, 3, 4]);
    let nil = spectral::cohomology_verdict(&model("heisenberg3_nilmanifold")).unwrap();
    let nil_ok = nil.degrees.iter().all(|d| d.status == DegreeStatus::NoConclusion);
    let passed = s3.is_empty() && s5.is_empty() && nil_ok;
    Outcome {
        passed,
        known_defect: !passed && s3.is_empty() && nil_ok,
        detail: format!("not vanishing: hopf_s3 {s3:?}, hopf_s5 {s5:?}; nilmanifold all NO_CONCLUSION: {nil_ok}"),
    }
}

fn determinism() -> Outcome {
    let spec = model("hopf_s3");
    let config = VerifyConfig { trials: 5, seed: 11, ..VerifyConfig::default() };
    let json = |threads: Option<usize>| verify::verify(&spec, config.clone(), &[], threads).unwrap().to_json();
    let a = json(Some(1));
    let b = json(Some(1));
    let c = json(Some(8));
    Outcome::new(a == b && a == c, format!("{} bytes; repeat identical: {}; 1 vs 8 threads identical: {}", a.len(), a == b, a == c))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Weitzenbock identity, exact", weitzenbock),
        ("d^2 = 0 and function commutation, with negative control", d_squared_and_commutation),
        ("Bianchi, adjoint curvature and Bott pair exchange", curvature_identities),
        ("canonical variation Ricci against Koszul oracle", canonical_variation),
        ("one-form operator reconciliation", one_form_reconciliation),
        ("fiber positivity and Ricci scaling", positivity_pipeline),
        ("spectral decay and symmetry", spectral_decay),
        ("cohomology verdicts", verdicts),
        ("determinism of verify output", determinism),
    ];
    let mut unexpected = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        let o = f();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        let known = if !o.passed && o.known_defect { " [known: hopf_s5 horizontal curvature operator has a kernel]" } else { "" };
        println!("{tag} criterion {}: {label}: {}{known}", i + 1, o.detail);
        if !o.passed && !o.known_defect {
            unexpected += 1;
        }
    }
    if unexpected == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
