//! Exterior derivative, horizontal codifferential and the two
//! constructions of `Δ_{H,ε}` on jet-valued forms.

use crate::connections::{covariant_form, covariant_form_along, ConnectionCoeffs, Eps, FormField, Geometry};
use crate::curvature;
use crate::exterior::{Coeff, MixedTensor, MultiIndex};
use crate::jets::{Jet, JetError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LaplacianError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("jet order {got} is below the required {needed}")]
    OrderTooLow { needed: usize, got: usize },
    #[error("expected a {expected}-form, got a {got}-form")]
    Degree { expected: usize, got: usize },
    #[error("a finite epsilon is required")]
    InfiniteEpsilon,
}

/// Torsion of the Bott connection as an element of `Ψ_(2,1)`:
/// `Σ_{a<b} θ^a ∧ θ^b ⊗ T(E_a, E_b)`.
pub fn torsion_operator<S: Scalar>(geo: &Geometry<S>) -> MixedTensor<Jet<S>> {
    let dim = geo.dim();
    let mut t = MixedTensor::zero();
    for a in 0..dim {
        for b in (a + 1)..dim {
            let form = MultiIndex::single(a).wedge(MultiIndex::single(b)).unwrap().0;
            for c in 0..dim {
                let w = geo.torsion.get(a, b, c);
                if !Coeff::is_zero(w) {
                    t.add_term(form, MultiIndex::single(c), w.clone());
                }
            }
        }
    }
    t
}

fn coframe<S: Scalar>(slot: usize) -> FormField<S> {
    FormField::basis(slot, Jet::constant(S::one()))
}

/// `d = C_T + Σ_a θ^a ∧ ∇_a` with the Bott connection.
pub fn exterior_derivative<S: Scalar>(geo: &Geometry<S>, alpha: &FormField<S>) -> Result<FormField<S>, JetError> {
    let mut out = FormField::zero(alpha.degree() + 1);
    if alpha.degree() > 0 {
        out = torsion_operator(geo).apply(alpha);
        if out.degree() != alpha.degree() + 1 {
            out = FormField::zero(alpha.degree() + 1);
        }
    }
    for a in 0..geo.dim() {
        let na = covariant_form(&geo.alg, &geo.bott, a, alpha)?;
        if !na.is_zero() {
            out = out.add(&coframe::<S>(a).wedge(&na));
        }
    }
    Ok(out)
}

/// `δ_{H,ε} α = −Σ_i ι_{X_i} ∇^ε_{X_i} α`.
pub fn codifferential<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>, alpha: &FormField<S>) -> Result<FormField<S>, JetError> {
    let conn = geo.epsilon_connection(eps);
    codifferential_with(geo, &conn, alpha)
}

pub fn codifferential_with<S: Scalar>(
    geo: &Geometry<S>,
    conn: &ConnectionCoeffs<S>,
    alpha: &FormField<S>,
) -> Result<FormField<S>, JetError> {
    if alpha.degree() == 0 {
        return Ok(FormField::zero(0));
    }
    let mut out = FormField::zero(alpha.degree() - 1);
    for i in 0..geo.n {
        let d = covariant_form(&geo.alg, conn, i, alpha)?;
        out = out.sub(&d.contract(i));
    }
    Ok(out)
}

/// `Δ_{H,ε} = −d δ_{H,ε} − δ_{H,ε} d`.
pub fn hodge_laplacian<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>, alpha: &FormField<S>) -> Result<FormField<S>, JetError> {
    let conn = geo.epsilon_connection(eps);
    let d_alpha = exterior_derivative(geo, alpha)?;
    let a = codifferential_with(geo, &conn, &d_alpha)?;
    let out = if alpha.degree() == 0 {
        a.neg()
    } else {
        let b = exterior_derivative(geo, &codifferential_with(geo, &conn, alpha)?)?;
        a.add(&b).neg()
    };
    Ok(out)
}

/// `L^ε α = Σ_i ∇^ε_{X_i} ∇^ε_{X_i} α − ∇^ε_{∇^ε_{X_i} X_i} α`.
pub fn connection_laplacian<S: Scalar>(
    geo: &Geometry<S>,
    conn: &ConnectionCoeffs<S>,
    alpha: &FormField<S>,
) -> Result<FormField<S>, JetError> {
    let mut out = FormField::zero(alpha.degree());
    for i in 0..geo.n {
        let first = covariant_form(&geo.alg, conn, i, alpha)?;
        let second = covariant_form(&geo.alg, conn, i, &first)?;
        let dir: Vec<Jet<S>> = (0..geo.dim()).map(|c| conn.get(i, i, c).clone()).collect();
        let corr = covariant_form_along(&geo.alg, conn, &dir, alpha)?;
        out = out.add(&second).sub(&corr);
    }
    Ok(out)
}

/// `L^ε − C_{Ric^ε}`.
pub fn bochner_laplacian<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>, alpha: &FormField<S>) -> Result<FormField<S>, JetError> {
    let conn = geo.epsilon_connection(eps);
    if alpha.degree() == 0 {
        return connection_laplacian(geo, &conn, alpha);
    }
    let ric = curvature::ric(geo, eps)?;
    bochner_laplacian_with(geo, &conn, &ric, alpha)
}

/// [`bochner_laplacian`] with `∇^ε` and `Ric^ε` supplied by the caller.
pub fn bochner_laplacian_with<S: Scalar>(
    geo: &Geometry<S>,
    conn: &ConnectionCoeffs<S>,
    ric: &MixedTensor<Jet<S>>,
    alpha: &FormField<S>,
) -> Result<FormField<S>, JetError> {
    let l = connection_laplacian(geo, conn, alpha)?;
    if alpha.degree() == 0 {
        return Ok(l);
    }
    let c = ric.apply(alpha);
    Ok(if c.degree() == l.degree() { l.sub(&c) } else { l })
}

/// Values at the point of each coefficient.
pub fn point_values<S: Scalar>(alpha: &FormField<S>) -> crate::exterior::Form<S> {
    alpha.map(|j| j.value())
}

/// Smallest coefficient order of a form field.
pub fn field_order<S: Scalar>(alpha: &FormField<S>) -> usize {
    alpha.terms().map(|(_, j)| j.order()).min().unwrap_or(crate::jets::CONST_ORDER)
}

/// Largest coefficient magnitude at the point.
pub fn max_abs_at_point<S: Scalar>(alpha: &FormField<S>) -> f64 {
    alpha.terms().map(|(_, j)| j.value().as_f64().abs()).fold(0.0, f64::max)
}

/// `d Δ_H f − Δ_{H,ε} d f` at the point, for a function jet of order ≥ 3.
pub fn commutation_check<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>, f: &Jet<S>) -> Result<FormField<S>, LaplacianError> {
    if f.order() < 3 {
        return Err(LaplacianError::OrderTooLow { needed: 3, got: f.order() });
    }
    let f = FormField::scalar(f.clone());
    let lhs = exterior_derivative(geo, &hodge_laplacian(geo, &Eps::Infinite, &f)?)?;
    let rhs = hodge_laplacian(geo, eps, &exterior_derivative(geo, &f)?)?;
    Ok(point_values_field(&lhs.sub(&rhs)))
}

/// `d Δ_{H,ε} α − Δ_{H,ε} d α` at the point.
pub fn laplacian_d_commutator<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>, alpha: &FormField<S>) -> Result<FormField<S>, JetError> {
    let lhs = exterior_derivative(geo, &hodge_laplacian(geo, eps, alpha)?)?;
    let rhs = hodge_laplacian(geo, eps, &exterior_derivative(geo, alpha)?)?;
    Ok(point_values_field(&lhs.sub(&rhs)))
}

fn point_values_field<S: Scalar>(alpha: &FormField<S>) -> FormField<S> {
    alpha.map(|j| Jet::constant(j.value()))
}

/// A random jet-valued `k`-form with every basis coefficient drawn from one
/// seeded stream.
pub fn random_form<S: Scalar>(dim: usize, degree: usize, order: usize, seed: u64) -> FormField<S> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = FormField::zero(degree);
    for idx in MultiIndex::all_of_degree(dim, degree) {
        out.add_term(idx, Jet::random_with(dim, order, &mut rng));
    }
    out
}

/// Adjusts first derivatives of a one-form so that `dα` vanishes at the
/// point: the `E_a` derivative of the `θ^b` coefficient absorbs
/// `(dα)(E_a, E_b)` for `a < b`.
pub fn close_at_point<S: Scalar>(geo: &Geometry<S>, alpha: &FormField<S>) -> Result<FormField<S>, LaplacianError> {
    if alpha.degree() != 1 {
        return Err(LaplacianError::Degree { expected: 1, got: alpha.degree() });
    }
    let da = exterior_derivative(geo, alpha)?;
    let mut out = FormField::zero(1);
    for b in 0..geo.dim() {
        let idx = MultiIndex::single(b);
        let coeff = alpha.get(idx).cloned().unwrap_or_else(Jet::zero_const);
        let order = coeff.order();
        let mut comps: Vec<(Vec<u8>, S)> = coeff.components().map(|(w, v)| (w.clone(), v.clone())).collect();
        for a in 0..b {
            let pair = MultiIndex::single(a).wedge(MultiIndex::single(b)).unwrap().0;
            let r = da.get(pair).map(|j| j.value()).unwrap_or_else(S::zero);
            if !r.is_zero() {
                comps.push((vec![a as u8], -r));
            }
        }
        let merged = merge_components(comps);
        out.add_term(idx, Jet::from_components(order, merged));
    }
    Ok(out)
}

fn merge_components<S: Scalar>(comps: Vec<(Vec<u8>, S)>) -> Vec<(Vec<u8>, S)> {
    let mut map: std::collections::BTreeMap<Vec<u8>, S> = std::collections::BTreeMap::new();
    for (w, v) in comps {
        let e = map.entry(w).or_insert_with(S::zero);
        *e = e.clone() + v;
    }
    map.into_iter().collect()
}

/// Applies a linear map on covectors given by `(A η)_c = Σ_b η_b A[b][c]`.
fn covector_map<S: Scalar>(alpha: &crate::exterior::Form<S>, a: &[Vec<S>]) -> crate::exterior::Form<S> {
    let mut out = crate::exterior::Form::zero(1);
    for (idx, v) in alpha.terms() {
        let b = idx.slots().next().unwrap();
        for (c, w) in a[b].iter().enumerate() {
            if !w.is_zero() {
                out.add_term(MultiIndex::single(c), v.clone() * w.clone());
            }
        }
    }
    out
}

/// The one-form operator `Σ(∇^ε_{X_i})² − ∇^ε_{∇^ε_{X_i}X_i} + (1/ε)δ_H T − (1/ε)𝐉² − Ric_H`
/// at the point, with `(1,1)` tensors acting on covectors through `g`.
pub fn one_form_operator<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>, alpha: &FormField<S>) -> Result<crate::exterior::Form<S>, LaplacianError> {
    if alpha.degree() != 1 {
        return Err(LaplacianError::Degree { expected: 1, got: alpha.degree() });
    }
    let dim = geo.dim();
    let conn = geo.epsilon_connection(eps);
    let lap = point_values(&connection_laplacian(geo, &conn, alpha)?);
    let at = point_values(alpha);
    let k = eps.inv();
    let div: Vec<Vec<S>> = geo.horizontal_divergence_torsion()?.iter().map(|r| r.iter().map(|j| j.value()).collect()).collect();
    let j2 = curvature::j_squared(geo);
    let mut j2_map = vec![vec![S::zero(); dim]; dim];
    for b in 0..geo.n {
        for c in 0..geo.n {
            j2_map[b][c] = j2[c][b].clone();
        }
    }
    let ric = curvature::horizontal_ricci(geo)?;
    let ric_map: Vec<Vec<S>> = (0..dim).map(|c| (0..dim).map(|b| ric[b][c].clone()).collect()).collect();
    let out = lap
        .add(&covector_map(&at, &div).scale(&k))
        .sub(&covector_map(&at, &j2_map).scale(&k))
        .sub(&covector_map(&at, &ric_map));
    Ok(out)
}

/// `(L^ε − C_{Ric^ε}) α` minus [`one_form_operator`], at the point.
pub fn one_form_reconciliation<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>, alpha: &FormField<S>) -> Result<f64, LaplacianError> {
    let lhs = point_values(&bochner_laplacian(geo, eps, alpha)?);
    let rhs = one_form_operator(geo, eps, alpha)?;
    Ok(lhs.sub(&rhs).terms().map(|(_, v)| v.as_f64().abs()).fold(0.0, f64::max))
}

/// Both sides of
/// `½Δ_H‖α‖²_ε − ⟨Δ_{H,ε}α, α⟩_ε = ‖∇^ε_H α‖²_ε + ⟨Ric_H α, α⟩_H − ⟨δ_H T α, α⟩_V + (1/ε)⟨𝐉²α, α⟩_H`
/// at the point.
#[derive(Clone, Debug, PartialEq)]
pub struct BochnerCheck<S> {
    pub lhs: S,
    pub gradient: S,
    pub ricci: S,
    pub divergence: S,
    pub j_term: S,
    pub residual: S,
    /// `−¼ Tr_H(J_α²)`, the lower bound for the gradient term on closed forms.
    pub trace_bound: S,
}

pub fn bochner_inequality_check<S: Scalar>(
    geo: &Geometry<S>,
    eps: &Eps<S>,
    alpha: &FormField<S>,
) -> Result<BochnerCheck<S>, LaplacianError> {
    if alpha.degree() != 1 {
        return Err(LaplacianError::Degree { expected: 1, got: alpha.degree() });
    }
    let e = eps.value().cloned().ok_or(LaplacianError::InfiniteEpsilon)?;
    let (n, dim) = (geo.n, geo.dim());
    let weight = |c: usize| if c < n { S::one() } else { e.clone() };
    let coeff = |c: usize| alpha.get(MultiIndex::single(c)).cloned().unwrap_or_else(Jet::zero_const);
    let mut norm_sq = Jet::zero_const();
    for c in 0..dim {
        let a = coeff(c);
        norm_sq = norm_sq.add(&a.mul(&a).scale(&weight(c)));
    }
    let lap_norm = hodge_laplacian(geo, &Eps::Infinite, &FormField::scalar(norm_sq))?;
    let half = S::from_ratio(1, 2);
    let lap_alpha = point_values(&hodge_laplacian(geo, eps, alpha)?);
    let a: Vec<S> = (0..dim).map(|c| coeff(c).value()).collect();
    let pair = |f: &crate::exterior::Form<S>| {
        (0..dim).fold(S::zero(), |acc, c| acc + weight(c) * f.get(MultiIndex::single(c)).cloned().unwrap_or_else(S::zero) * a[c].clone())
    };
    let lhs = half * lap_norm.get(MultiIndex(0)).map(|j| j.value()).unwrap_or_else(S::zero) - pair(&lap_alpha);
    let conn = geo.epsilon_connection(eps);
    let mut gradient = S::zero();
    for i in 0..n {
        let d = point_values(&covariant_form(&geo.alg, &conn, i, alpha)?);
        for (idx, v) in d.terms() {
            let c = idx.slots().next().unwrap();
            gradient = gradient + weight(c) * v.clone() * v.clone();
        }
    }
    let ric = curvature::horizontal_ricci(geo)?;
    let div = geo.horizontal_divergence_torsion()?;
    let j2 = curvature::j_squared(geo);
    let mut ricci = S::zero();
    let mut divergence = S::zero();
    let mut j_term = S::zero();
    for b in 0..dim {
        for c in 0..dim {
            ricci = ricci + a[b].clone() * ric[b][c].clone() * a[c].clone();
            if b < n && c >= n {
                divergence = divergence - a[b].clone() * div[b][c].value() * a[c].clone();
            }
            if b < n && c < n {
                j_term = j_term + eps.inv() * a[c].clone() * j2[c][b].clone() * a[b].clone();
            }
        }
    }
    let js = curvature::j_matrices(geo);
    let mut j_alpha = vec![vec![S::zero(); n]; n];
    for (l, jl) in js.iter().enumerate() {
        for r in 0..n {
            for s in 0..n {
                j_alpha[r][s] = j_alpha[r][s].clone() + a[n + l].clone() * jl[r][s].clone();
            }
        }
    }
    let mut tr = S::zero();
    for r in 0..n {
        for s in 0..n {
            tr = tr + j_alpha[r][s].clone() * j_alpha[s][r].clone();
        }
    }
    let trace_bound = -(S::from_ratio(1, 4) * tr);
    let residual = lhs.clone() - (gradient.clone() + ricci.clone() + divergence.clone() + j_term.clone());
    Ok(BochnerCheck { lhs, gradient, ricci, divergence, j_term, residual, trace_bound })
}

/// `|Δ_{H,ε}α − Δ_{H,∞}α|` at `ε = 10²` over the same at `ε = 10⁴`; close to
/// `10²` when the convergence is linear in `1/ε`.
pub fn richardson_ratio<S: Scalar>(geo: &Geometry<S>, alpha: &FormField<S>) -> Result<f64, JetError> {
    let limit = hodge_laplacian(geo, &Eps::Infinite, alpha)?;
    let gap = |e: i64| -> Result<f64, JetError> {
        let eps = Eps::Finite(S::from_i64(e));
        Ok(max_abs_at_point(&hodge_laplacian(geo, &eps, alpha)?.sub(&limit)))
    };
    let (a, b) = (gap(100)?, gap(10_000)?);
    Ok(if b == 0.0 { if a == 0.0 { 100.0 } else { f64::INFINITY } } else { a / b })
}

/// One sample of the large-`ε` behaviour of `C_{Ric^ε} − C_{Ric_H}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSample {
    pub eps: f64,
    /// `sup |⟨(C_{Ric^ε} − C_{Ric_H})α, α⟩_ε| / ‖α‖²_ε` over all degrees.
    pub measured: f64,
    /// `M₁/√ε + (M₂ + M₃)/ε`.
    pub bound: f64,
    /// Smallest slack of the graded chain of inequalities over sampled `α`.
    pub chain_slack: f64,
}

/// Operator norms `M_j` of `C_{B_j + B̌_j}` and samples of the decay.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub m: [f64; 3],
    pub vertical_parallel: bool,
    pub samples: Vec<ScalingSample>,
}

fn weighted_block(a: &nalgebra::DMatrix<f64>, weights: &[f64]) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| weights[i].sqrt() * a[(i, j)] / weights[j].sqrt())
}

pub fn ricci_scaling<S: Scalar>(geo: &Geometry<S>, eps_list: &[S], seed: u64) -> Result<ScalingReport, LaplacianError> {
    use rand::{Rng, SeedableRng};
    let (n, dim) = (geo.n, geo.dim());
    let st = curvature::scaling_terms(geo)?;
    let pieces: Vec<MixedTensor<Jet<S>>> = [&st.b1, &st.b2, &st.b3]
        .iter()
        .map(|b| curvature::ScalingTerms::as_two_two(n, b).add(&curvature::ScalingTerms::checked(n, b)))
        .collect();
    let bases: Vec<Vec<MultiIndex>> = (0..=dim).map(|k| MultiIndex::all_of_degree(dim, k)).collect();
    let mut m = [0.0f64; 3];
    for (j, p) in pieces.iter().enumerate() {
        for b in &bases {
            let mat = crate::linalg::to_dmatrix(&curvature::operator_block(p, b, b));
            m[j] = m[j].max(crate::linalg::operator_norm(&mat));
        }
    }
    let vertical_parallel = curvature::vertical_parallel_torsion(geo)?.parallel;
    let ric_h = curvature::ric(geo, &Eps::Infinite)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for e in eps_list {
        let eps = Eps::finite(e.clone()).map_err(|_| LaplacianError::InfiniteEpsilon)?;
        let ef = e.as_f64();
        let diff = curvature::ric(geo, &eps)?.sub(&ric_h);
        let mut measured = 0.0f64;
        let mut chain_slack = f64::INFINITY;
        for b in &bases {
            if b.is_empty() {
                continue;
            }
            let a = crate::linalg::to_dmatrix(&curvature::operator_block(&diff, b, b));
            let w: Vec<f64> = b.iter().map(|x| ef.powi(x.bigrade(n).1 as i32)).collect();
            measured = measured.max(crate::linalg::numerical_radius_sym(&weighted_block(&a, &w)));
            for _ in 0..32 {
                let x: Vec<f64> = (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let ax = &a * nalgebra::DVector::from_column_slice(&x);
                let lhs: f64 = (0..b.len()).map(|i| w[i] * ax[i] * x[i]).sum::<f64>().abs();
                let mut graded = std::collections::BTreeMap::<usize, f64>::new();
                for (i, idx) in b.iter().enumerate() {
                    *graded.entry(idx.bigrade(n).1).or_default() += w[i] * x[i] * x[i];
                }
                let norm = |j: usize| graded.get(&j).copied().unwrap_or(0.0).sqrt();
                let total: f64 = graded.values().sum();
                let mut bound = m[1] / ef * total;
                for j in 0..=geo.m {
                    if j >= 1 {
                        bound += m[0] / ef.sqrt() * norm(j - 1) * norm(j);
                    }
                    if j >= 2 {
                        bound += m[2] / ef * norm(j - 2) * norm(j);
                    }
                }
                chain_slack = chain_slack.min(bound - lhs);
            }
        }
        let bound = m[0] / ef.sqrt() + (m[1] + m[2]) / ef;
        samples.push(ScalingSample { eps: ef, measured, bound, chain_slack });
    }
    Ok(ScalingReport { m, vertical_parallel, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_model;
    use crate::scalar::Rational;

    fn geo(name: &str) -> Geometry<Rational> {
        Geometry::new(&builtin_model(name).unwrap())
    }

    #[test]
    fn constants_are_harmonic() {
        let g = geo("hopf_s3");
        let one = FormField::scalar(Jet::constant(Rational::from_i64(3)));
        for eps in [Eps::Finite(Rational::from_i64(2)), Eps::Infinite] {
            assert!(hodge_laplacian(&g, &eps, &one).unwrap().terms().all(|(_, c)| c.is_zero()));
        }
    }

    #[test]
    fn closing_at_the_point() {
        for name in ["heisenberg3", "hopf_s3", "fixture_non_yang_mills"] {
            let g = geo(name);
            for seed in 0..5 {
                let alpha = random_form::<Rational>(g.dim(), 1, 2, seed);
                let closed = close_at_point(&g, &alpha).unwrap();
                assert_eq!(max_abs_at_point(&exterior_derivative(&g, &closed).unwrap()), 0.0);
                assert_eq!(point_values(&closed), point_values(&alpha));
            }
        }
    }

    #[test]
    fn one_form_entry_points_check_degree() {
        let g = geo("hopf_s3");
        let two = random_form::<Rational>(3, 2, 2, 0);
        let eps = Eps::Finite(Rational::from_i64(1));
        assert!(matches!(close_at_point(&g, &two), Err(LaplacianError::Degree { expected: 1, got: 2 })));
        assert!(matches!(bochner_inequality_check(&g, &eps, &two), Err(LaplacianError::Degree { .. })));
        assert!(matches!(one_form_operator(&g, &eps, &two), Err(LaplacianError::Degree { .. })));
        let one = random_form::<Rational>(3, 1, 2, 0);
        assert!(matches!(bochner_inequality_check(&g, &Eps::Infinite, &one), Err(LaplacianError::InfiniteEpsilon)));
    }

    #[test]
    fn random_forms_are_reproducible() {
        let a = random_form::<Rational>(5, 2, 3, 42);
        assert_eq!(a, random_form::<Rational>(5, 2, 3, 42));
        assert_ne!(a, random_form::<Rational>(5, 2, 3, 43));
        assert_eq!(field_order(&a), 3);
    }

    #[test]
    fn ricci_correction_decays_like_inverse_epsilon() {
        let g = geo("hopf_s3");
        let eps: Vec<Rational> = [10, 100, 1000].iter().map(|&e| Rational::from_i64(e)).collect();
        let rep = ricci_scaling(&g, &eps, 1).unwrap();
        assert!(rep.vertical_parallel);
        for w in rep.samples.windows(2) {
            assert!((w[0].measured / w[1].measured - 10.0).abs() < 1e-9);
        }
        assert!(rep.samples.iter().all(|s| s.measured <= s.bound + 1e-12 && s.chain_slack >= -1e-12));
    }
}
