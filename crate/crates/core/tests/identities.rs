use folia_core::connections::{Eps, Geometry};
use folia_core::models::builtin_model;
use folia_core::{curvature, laplacians, Jet, Rational, Scalar};
use proptest::prelude::*;

const SMALL: [&str; 5] = ["heisenberg3", "hopf_s3", "berger_s3", "fixture_non_yang_mills", "fixture_twisted_rank2"];

fn geo(name: &str) -> Geometry<Rational> {
    Geometry::new(&builtin_model(name).unwrap())
}

fn any_model() -> impl Strategy<Value = &'static str> {
    prop::sample::select(SMALL.to_vec())
}

fn finite_eps() -> impl Strategy<Value = Rational> {
    prop::sample::select(vec![(1, 4), (1, 2), (1, 1), (3, 1), (4, 1)]).prop_map(|(a, b)| Rational::from_ratio(a, b))
}

fn any_eps() -> impl Strategy<Value = Eps<Rational>> {
    prop_oneof![finite_eps().prop_map(Eps::Finite), Just(Eps::Infinite)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hodge_equals_bochner_plus_curvature(name in any_model(), eps in any_eps(), degree in 0usize..4, seed in any::<u64>()) {
        let g = geo(name);
        let degree = degree.min(g.dim());
        let alpha = laplacians::random_form::<Rational>(g.dim(), degree, 2, seed);
        let h = laplacians::hodge_laplacian(&g, &eps, &alpha).unwrap();
        let b = laplacians::bochner_laplacian(&g, &eps, &alpha).unwrap();
        prop_assert_eq!(laplacians::max_abs_at_point(&h.sub(&b)), 0.0);
    }

    #[test]
    fn d_squared_vanishes(name in any_model(), degree in 0usize..2, seed in any::<u64>()) {
        let g = geo(name);
        let alpha = laplacians::random_form::<Rational>(g.dim(), degree, 3, seed);
        let dd = laplacians::exterior_derivative(&g, &laplacians::exterior_derivative(&g, &alpha).unwrap()).unwrap();
        prop_assert_eq!(laplacians::max_abs_at_point(&dd), 0.0);
    }

    #[test]
    fn d_squared_needs_commutator_constraints(name in prop::sample::select(vec!["heisenberg3", "hopf_s3"]), seed in any::<u64>()) {
        let g = geo(name).without_constraints();
        let f = laplacians::random_form::<Rational>(g.dim(), 0, 3, seed);
        let dd = laplacians::exterior_derivative(&g, &laplacians::exterior_derivative(&g, &f).unwrap()).unwrap();
        prop_assert!(laplacians::max_abs_at_point(&dd) > 0.0);
    }

    #[test]
    fn horizontal_laplacian_commutes_with_d_on_functions(name in any_model(), eps in any_eps(), seed in any::<u64>()) {
        let g = geo(name);
        let f = Jet::<Rational>::random(g.dim(), 3, seed);
        let r = laplacians::commutation_check(&g, &eps, &f).unwrap();
        prop_assert_eq!(laplacians::max_abs_at_point(&r), 0.0);
    }

    #[test]
    fn adiabatic_expansion_of_ricci(name in any_model(), eps in finite_eps(), x in prop::collection::vec(-5i64..=5, 4)) {
        let g = geo(name);
        let x: Vec<Rational> = (0..g.dim()).map(|a| Rational::from_i64(x[a % x.len()] + a as i64)).collect();
        let r = curvature::adiabatic_q_residual(&g, &eps, &x).unwrap();
        prop_assert_eq!(r, Rational::from_i64(0));
    }

    #[test]
    fn one_form_operator_reconciles(name in any_model(), eps in finite_eps(), seed in any::<u64>()) {
        let g = geo(name);
        let alpha = laplacians::random_form::<Rational>(g.dim(), 1, 2, seed);
        prop_assert_eq!(laplacians::one_form_reconciliation(&g, &Eps::Finite(eps), &alpha).unwrap(), 0.0);
    }

    #[test]
    fn bochner_formula_for_one_forms(name in any_model(), eps in finite_eps(), seed in any::<u64>()) {
        let g = geo(name);
        let alpha = laplacians::random_form::<Rational>(g.dim(), 1, 2, seed);
        let c = laplacians::bochner_inequality_check(&g, &Eps::Finite(eps), &alpha).unwrap();
        prop_assert_eq!(c.residual, Rational::from_i64(0));
    }

    #[test]
    fn skew_torsion_connections_exchange_pairs(name in any_model(), seed in any::<u64>()) {
        let g = geo(name);
        let conn = curvature::random_skew_torsion_connection(&g.alg, seed);
        let c = curvature::metric_connection_commutation(&g.alg, &conn).unwrap();
        prop_assert!(c.skew_torsion);
        prop_assert_eq!(c.general, 0.0);
        prop_assert_eq!(c.derivative_terms_only, 0.0);
    }
}

#[test]
fn weitzenbock_with_float_scalars() {
    for name in SMALL {
        let g: Geometry<f64> = Geometry::new(&builtin_model(name).unwrap());
        for seed in 0..5 {
            let alpha = laplacians::random_form::<f64>(g.dim(), 1, 2, seed);
            let eps = Eps::Finite(0.5);
            let h = laplacians::hodge_laplacian(&g, &eps, &alpha).unwrap();
            let b = laplacians::bochner_laplacian(&g, &eps, &alpha).unwrap();
            assert!(laplacians::max_abs_at_point(&h.sub(&b)) < 1e-9, "{name}");
        }
    }
}
