use folia_core::connections::{Eps, Geometry};
use folia_core::exterior::{Form, MultiIndex};
use folia_core::models::{builtin_model, ModelRegistry};
use folia_core::spectral::{self, DegreeStatus};
use folia_core::verify::{self, VerifyConfig, VerifyError};
use folia_core::{curvature, laplacians, Rational, Scalar};
use proptest::prelude::*;

fn r(a: i64, b: i64) -> Rational {
    Rational::from_ratio(a, b)
}

fn geo(name: &str) -> Geometry<Rational> {
    Geometry::new(&builtin_model(name).unwrap())
}

fn idx(slots: &[usize]) -> MultiIndex {
    MultiIndex::from_slots(slots).unwrap().0
}

#[test]
fn heisenberg_contact_form_differential() {
    // [X1, X2] = Z gives dν(X1, X2) = −ν([X1, X2]) = −1
    let g = geo("heisenberg3");
    let nu = Form::basis(2, r(1, 1));
    let d = spectral::constant_exterior_derivative(&g.alg, &nu);
    assert_eq!(d.len(), 1);
    assert_eq!(d.get(idx(&[0, 1])), Some(&r(-1, 1)));
}

#[test]
fn q_tensor_values() {
    let q = curvature::q_tensor(&geo("hopf_s3")).unwrap();
    assert_eq!(q.matrix, vec![vec![r(4, 1), r(0, 1), r(0, 1)], vec![r(0, 1), r(4, 1), r(0, 1)], vec![r(0, 1), r(0, 1), r(2, 1)]]);
    assert!(q.symmetric);
    let q = curvature::q_tensor(&geo("heisenberg3")).unwrap();
    assert_eq!(q.matrix[2][2], r(1, 2));
    assert_eq!(q.min_eigenvalue, 0.0);
}

#[test]
fn horizontal_curvature_operator_of_the_hopf_base() {
    // the base of S^3 → S^2 has sectional curvature 4 in this normalization
    let rh = curvature::horizontal_curvature_operator(&geo("hopf_s3")).unwrap();
    assert_eq!(rh.matrix, vec![vec![r(4, 1)]]);
    let rh = curvature::horizontal_curvature_operator(&geo("heisenberg5")).unwrap();
    assert!(rh.min_eigenvalue.abs() < 1e-12);
}

#[test]
fn fiber_bounds_on_hopf_s3() {
    let fibers = curvature::fiber_bounds(&geo("hopf_s3")).unwrap();
    assert_eq!(fibers.len(), 2);
    assert!(fibers.iter().all(|f| f.c1 > 0.0 && f.leakage == 0.0));
    assert!((fibers[0].c1 - 4.0).abs() < 1e-12);
}

#[test]
fn closed_one_form_constant_and_auto_epsilon_on_hopf_s3() {
    let g = geo("hopf_s3");
    for e in [1.5f64, 2.0, 3.0, 8.0] {
        let c = spectral::closed_one_form_constant(&g, &Rational::from_f64(e).unwrap()).unwrap();
        assert!((c - (4.0 - 4.0 / e).min(2.0 / e)).abs() < 1e-12, "eps {e}: {c}");
    }
    let (eps, c) = spectral::auto_epsilon(&g).unwrap().unwrap();
    assert_eq!(eps, r(2, 1));
    assert!((c - 1.0).abs() < 1e-12);
}

#[test]
fn invariant_laplacian_on_round_one_forms() {
    let op = spectral::invariant_matrix(&builtin_model("hopf_s3").unwrap(), &Eps::Finite(r(2, 1)), 1).unwrap();
    let minus_four: Vec<Vec<Rational>> = (0..3).map(|i| (0..3).map(|j| if i == j { r(-4, 1) } else { r(0, 1) }).collect()).collect();
    assert_eq!(op.matrix, minus_four);
    assert!(spectral::invariant_matrix(&builtin_model("hopf_s5").unwrap(), &Eps::Infinite, 1).is_err());
}

#[test]
fn richardson_ratio_is_linear_in_inverse_epsilon() {
    let g = geo("hopf_s3");
    for seed in 0..4 {
        let alpha = laplacians::random_form::<Rational>(g.dim(), 1, 2, seed);
        let ratio = laplacians::richardson_ratio(&g, &alpha).unwrap();
        assert!((ratio - 100.0).abs() < 1e-9, "{ratio}");
    }
}

#[test]
fn verdicts_respect_compactness_and_validity() {
    let v = spectral::cohomology_verdict(&builtin_model("heisenberg3").unwrap()).unwrap();
    assert!(v.degrees.iter().all(|d| d.status == DegreeStatus::NoConclusion));
    assert!(v.degrees[1..3].iter().all(|d| d.certificate.starts_with("compactness not asserted")));
    let v = spectral::cohomology_verdict(&builtin_model("hopf_s3").unwrap()).unwrap();
    assert_eq!(v.status(0), Some(DegreeStatus::NoConclusion));
    assert_eq!(v.status(3), Some(DegreeStatus::NoConclusion));
    assert!(v.notes.iter().any(|n| n == spectral::HODGE_NOTE));
}

#[test]
fn every_builtin_model_validates() {
    let reg = ModelRegistry::builtin();
    for name in reg.names() {
        let report = reg.build(name).unwrap().validate();
        assert!(report.passed(), "{name}: {:?}", report.failures());
    }
}

#[test]
fn unknown_check_is_rejected() {
    let spec = builtin_model("hopf_s3").unwrap();
    let err = verify::verify(&spec, VerifyConfig::default(), &["no-such-check".to_string()], Some(1)).unwrap_err();
    assert!(matches!(err, VerifyError::UnknownCheck { .. }));
}

#[test]
fn negative_control_fails_without_constraints() {
    let spec = builtin_model("hopf_s3").unwrap();
    let config = VerifyConfig { constraints: false, order: Some(3), ..VerifyConfig::default() };
    let report = verify::verify(&spec, config, &["d-squared".to_string()], Some(1)).unwrap();
    assert!(!report.passed);
    assert!(report.checks[0].failures * 20 >= report.checks[0].cases * 19);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn verify_json_independent_of_thread_count(seed in any::<u64>(), threads in 2usize..6) {
        let spec = builtin_model("heisenberg3").unwrap();
        let config = VerifyConfig { trials: 3, seed, ..VerifyConfig::default() };
        let one = verify::verify(&spec, config.clone(), &[], Some(1)).unwrap().to_json();
        let many = verify::verify(&spec, config, &[], Some(threads)).unwrap().to_json();
        prop_assert_eq!(one, many);
    }
}
