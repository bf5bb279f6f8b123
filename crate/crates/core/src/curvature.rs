//! Curvature tensors, Weitzenböck Ricci terms and the curvature quantities
//! that gate the vanishing criteria.

use crate::connections::{adjoint_of, covariant_tensor3, torsion, ConnectionCoeffs, Eps, Geometry, Tensor3, TorsionTensor};
use crate::exterior::{Coeff, MixedTensor, MultiIndex};
use crate::jets::{FrameAlgebra, Jet, JetError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("{what}: two evaluations disagree by {residual:e}")]
    Mismatch { what: &'static str, residual: f64 },
    #[error("connection is not metric (residual {residual:e})")]
    NonMetric { residual: f64 },
}

/// Tolerance for residuals in float mode; exact mode compares with zero.
pub const FLOAT_TOL: f64 = 1e-9;

fn negligible<S: Scalar>(r: f64) -> bool {
    if S::EXACT {
        r == 0.0
    } else {
        r <= FLOAT_TOL
    }
}

/// `R[a][b][c][e]`: the `E_e` component of `R(E_a, E_b) E_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4<S> {
    dim: usize,
    comps: Vec<Jet<S>>,
}

pub type CurvatureTensor<S> = Tensor4<S>;

impl<S: Scalar> Tensor4<S> {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize, usize) -> Jet<S>) -> Self {
        let mut comps = Vec::with_capacity(dim.pow(4));
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for e in 0..dim {
                        comps.push(f(a, b, c, e));
                    }
                }
            }
        }
        Tensor4 { dim, comps }
    }

    pub fn try_from_fn(
        dim: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> Result<Jet<S>, JetError>,
    ) -> Result<Self, JetError> {
        let mut comps = Vec::with_capacity(dim.pow(4));
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for e in 0..dim {
                        comps.push(f(a, b, c, e)?);
                    }
                }
            }
        }
        Ok(Tensor4 { dim, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(&self, a: usize, b: usize, c: usize, e: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + e
    }

    pub fn get(&self, a: usize, b: usize, c: usize, e: usize) -> &Jet<S> {
        &self.comps[self.idx(a, b, c, e)]
    }

    pub fn value(&self, a: usize, b: usize, c: usize, e: usize) -> S {
        self.get(a, b, c, e).value()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Tensor4 { dim: self.dim, comps: self.comps.iter().zip(&other.comps).map(|(x, y)| x.sub(y)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Tensor4 { dim: self.dim, comps: self.comps.iter().zip(&other.comps).map(|(x, y)| x.add(y)).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        Tensor4 { dim: self.dim, comps: self.comps.iter().map(|x| x.scale(c)).collect() }
    }

    /// Largest component magnitude at the point.
    pub fn max_abs_at_point(&self) -> f64 {
        self.comps.iter().map(|j| j.value().as_f64().abs()).fold(0.0, f64::max)
    }
}

/// `R(X,Y) = ∇_X ∇_Y − ∇_Y ∇_X − ∇_{[X,Y]}` in frame components.
pub fn curvature<S: Scalar>(alg: &FrameAlgebra<S>, conn: &ConnectionCoeffs<S>) -> Result<CurvatureTensor<S>, JetError> {
    let dim = alg.dim();
    Tensor4::try_from_fn(dim, |a, b, c, e| {
        let mut acc = alg.frame_derivative(a, conn.get(b, c, e))?.sub(&alg.frame_derivative(b, conn.get(a, c, e))?);
        for d in 0..dim {
            let g1 = conn.get(b, c, d);
            if !Coeff::is_zero(g1) {
                acc = acc.add(&g1.mul(conn.get(a, d, e)));
            }
            let g2 = conn.get(a, c, d);
            if !Coeff::is_zero(g2) {
                acc = acc.sub(&g2.mul(conn.get(b, d, e)));
            }
            let cab = alg.bracket(a, b, d);
            if !Coeff::is_zero(cab) {
                acc = acc.sub(&cab.mul(conn.get(d, c, e)));
            }
        }
        Ok(acc)
    })
}

/// Weitzenböck Ricci terms built from the curvature `r̂` of the adjoint
/// connection: `Ric_{1,1}(v) = −Σ_i R̂(X_i, v) X_i` and
/// `Ric_{2,2}(v, w) = Σ_i X_i ∧ R̂(v, w) X_i`.
pub fn ric_terms_from<S: Scalar>(n: usize, r_hat: &CurvatureTensor<S>) -> (MixedTensor<Jet<S>>, MixedTensor<Jet<S>>) {
    let dim = r_hat.dim();
    let mut ric11 = MixedTensor::zero();
    for b in 0..dim {
        for c in 0..dim {
            let mut acc = Jet::zero_const();
            for i in 0..n {
                acc = acc.sub(r_hat.get(i, b, i, c));
            }
            ric11.add_term(MultiIndex::single(b), MultiIndex::single(c), acc);
        }
    }
    let mut ric22 = MixedTensor::zero();
    for a in 0..dim {
        for b in (a + 1)..dim {
            let form = MultiIndex::single(a).wedge(MultiIndex::single(b)).unwrap().0;
            for i in 0..n {
                for c in 0..dim {
                    let w = r_hat.get(a, b, i, c);
                    if Coeff::is_zero(w) {
                        continue;
                    }
                    if let Some((vec, sign)) = MultiIndex::single(i).wedge(MultiIndex::single(c)) {
                        let w = if sign < 0 { w.neg() } else { w.clone() };
                        ric22.add_term(form, vec, w);
                    }
                }
            }
        }
    }
    (ric11, ric22)
}

/// `(Ric_{1,1}, Ric_{2,2})` of `Δ_{H,ε}`, from the curvature of `∇̂^ε`.
pub fn ric_terms<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>) -> Result<(MixedTensor<Jet<S>>, MixedTensor<Jet<S>>), JetError> {
    let hat = geo.adjoint_connection(eps);
    let r_hat = curvature(&geo.alg, &hat)?;
    Ok(ric_terms_from(geo.n, &r_hat))
}

pub fn ric<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>) -> Result<MixedTensor<Jet<S>>, JetError> {
    let (a, b) = ric_terms(geo, eps)?;
    Ok(a.add(&b))
}

/// `(∇_{E_a} t)` for every frame slot `a`.
pub fn covariant_all<S: Scalar>(
    alg: &FrameAlgebra<S>,
    conn: &ConnectionCoeffs<S>,
    t: &Tensor3<S>,
) -> Result<Vec<Tensor3<S>>, JetError> {
    (0..alg.dim()).map(|a| covariant_tensor3(alg, conn, a, t)).collect()
}

/// Right side of `R̂(X,Y)Z = R(Z,Y)X − R(Z,X)Y + (∇_Z T)(X,Y)` for the
/// adjoint of `conn`.
pub fn adjoint_curvature_from<S: Scalar>(
    alg: &FrameAlgebra<S>,
    conn: &ConnectionCoeffs<S>,
) -> Result<CurvatureTensor<S>, JetError> {
    let t = torsion(conn, alg);
    let r = curvature(alg, conn)?;
    let nt = covariant_all(alg, conn, &t)?;
    Ok(Tensor4::from_fn(alg.dim(), |x, y, z, e| r.get(z, y, x, e).sub(r.get(z, x, y, e)).add(nt[z].get(x, y, e))))
}

/// Largest value residual between the curvature of the adjoint of `conn`
/// and its expression through the curvature and torsion of `conn`.
pub fn curv1_residual<S: Scalar>(alg: &FrameAlgebra<S>, conn: &ConnectionCoeffs<S>) -> Result<f64, JetError> {
    let direct = curvature(alg, &adjoint_of(conn, alg))?;
    Ok(direct.sub(&adjoint_curvature_from(alg, conn)?).max_abs_at_point())
}

/// Residual of `R̂(X,Y)X = R(X,Y)X + (∇_X T)(X,Y)`.
pub fn curv2_residual<S: Scalar>(alg: &FrameAlgebra<S>, conn: &ConnectionCoeffs<S>) -> Result<f64, JetError> {
    let dim = alg.dim();
    let r_hat = curvature(alg, &adjoint_of(conn, alg))?;
    let r = curvature(alg, conn)?;
    let nt = covariant_all(alg, conn, &torsion(conn, alg))?;
    let mut worst = 0.0f64;
    for x in 0..dim {
        for y in 0..dim {
            for e in 0..dim {
                let d = r_hat.value(x, y, x, e) - r.value(x, y, x, e) - nt[x].value(x, y, e);
                worst = worst.max(d.as_f64().abs());
            }
        }
    }
    Ok(worst)
}

/// `T(T(E_a, E_b), E_c)` components.
fn torsion_of_torsion<S: Scalar>(t: &TorsionTensor<S>, a: usize, b: usize, c: usize, e: usize) -> S {
    (0..t.dim()).fold(S::zero(), |acc, d| acc + t.value(a, b, d) * t.value(d, c, e))
}

/// Residual of the first Bianchi identity
/// `↻ R(X,Y)Z = ↻ T(T(X,Y),Z) + ↻ (∇_X T)(Y,Z)`.
pub fn bianchi_residual<S: Scalar>(alg: &FrameAlgebra<S>, conn: &ConnectionCoeffs<S>) -> Result<f64, JetError> {
    let dim = alg.dim();
    let t = torsion(conn, alg);
    let r = curvature(alg, conn)?;
    let nt = covariant_all(alg, conn, &t)?;
    let mut worst = 0.0f64;
    for x in 0..dim {
        for y in 0..dim {
            for z in 0..dim {
                for e in 0..dim {
                    let mut d = S::zero();
                    for (p, q, w) in [(x, y, z), (y, z, x), (z, x, y)] {
                        d = d + r.value(p, q, w, e) - torsion_of_torsion(&t, p, q, w, e) - nt[p].value(q, w, e);
                    }
                    worst = worst.max(d.as_f64().abs());
                }
            }
        }
    }
    Ok(worst)
}

/// The endomorphism-valued two-forms of the scaling expansion
/// `R̂^ε = R + (1/ε)(B₁ + B₂) + (1/ε²) B₃`, each stored as
/// `[x][y][z][e] = (B(E_x, E_y) E_z)^e`.
#[derive(Clone, Debug)]
pub struct ScalingTerms<S> {
    pub b1: Tensor4<S>,
    pub b2: Tensor4<S>,
    pub b3: Tensor4<S>,
}

/// `B₁(X,Y) = (∇_X J)_Y − (∇_Y J)_X`, `B₂(X,Y) = J_{T(X,Y)}`,
/// `B₃(X,Y) = [J_X, J_Y]` for the Bott connection.
pub fn scaling_terms<S: Scalar>(geo: &Geometry<S>) -> Result<ScalingTerms<S>, JetError> {
    let dim = geo.dim();
    let nj = covariant_all(&geo.alg, &geo.bott, &geo.j)?;
    let b1 = Tensor4::from_fn(dim, |x, y, z, e| nj[x].get(y, z, e).sub(nj[y].get(x, z, e)));
    let b2 = Tensor4::from_fn(dim, |x, y, z, e| {
        let mut acc = Jet::zero_const();
        for d in 0..dim {
            let t = geo.torsion.get(x, y, d);
            if !Coeff::is_zero(t) {
                acc = acc.add(&t.mul(geo.j.get(d, z, e)));
            }
        }
        acc
    });
    let b3 = Tensor4::from_fn(dim, |x, y, z, e| {
        let mut acc = Jet::zero_const();
        for d in 0..dim {
            acc = acc.add(&geo.j.get(y, z, d).mul(geo.j.get(x, d, e)));
            acc = acc.sub(&geo.j.get(x, z, d).mul(geo.j.get(y, d, e)));
        }
        acc
    });
    Ok(ScalingTerms { b1, b2, b3 })
}

impl<S: Scalar> ScalingTerms<S> {
    /// `(1/ε)(B₁ + B₂) + (1/ε²) B₃`.
    pub fn correction(&self, eps: &Eps<S>) -> Tensor4<S> {
        let k = eps.inv();
        let k2 = k.clone() * k.clone();
        self.b1.add(&self.b2).scale(&k).add(&self.b3.scale(&k2))
    }

    /// `B` as an element of `Ψ_(2,2)`, in the same layout as `Ric_{2,2}`.
    pub fn as_two_two(n: usize, b: &Tensor4<S>) -> MixedTensor<Jet<S>> {
        ric_terms_from(n, b).1
    }

    /// `B̌` as an element of `Ψ_(1,1)`: `α B̌(v) = tr_H ⟨B(×, v) ♯α, ×⟩`.
    pub fn checked(n: usize, b: &Tensor4<S>) -> MixedTensor<Jet<S>> {
        ric_terms_from(n, b).0
    }
}

/// Curvature of `∇̂^ε`, computed directly and cross-checked against the
/// expression through `∇^ε` and against the scaling expansion.
pub fn adjoint_curvature<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>) -> Result<CurvatureTensor<S>, CurvatureError> {
    let direct = curvature(&geo.alg, &geo.adjoint_connection(eps))?;
    let conn = geo.epsilon_connection(eps);
    let via_torsion = adjoint_curvature_from(&geo.alg, &conn)?;
    let r = direct.sub(&via_torsion).max_abs_at_point();
    if !negligible::<S>(r) {
        return Err(CurvatureError::Mismatch { what: "adjoint curvature through torsion", residual: r });
    }
    let bott = curvature(&geo.alg, &geo.bott)?;
    let expanded = bott.add(&scaling_terms(geo)?.correction(eps));
    let r = direct.sub(&expanded).max_abs_at_point();
    if !negligible::<S>(r) {
        return Err(CurvatureError::Mismatch { what: "adjoint curvature scaling expansion", residual: r });
    }
    let r = curv2_residual(&geo.alg, &conn)?;
    if !negligible::<S>(r) {
        return Err(CurvatureError::Mismatch { what: "adjoint curvature on a repeated argument", residual: r });
    }
    Ok(direct)
}

/// `A(X,Y) = T(X,Y) − J_X Y − J_Y X` where `⟨J_Z X, Y⟩ = ⟨Z, T(X,Y)⟩` for
/// every `Z`.
pub fn a_map<S: Scalar>(t: &TorsionTensor<S>) -> Tensor3<S> {
    Tensor3::from_fn(t.dim(), |x, y, e| t.get(x, y, e).sub(t.get(y, e, x)).sub(t.get(x, e, y)))
}

/// Residuals of the curvature commutation identity for a metric connection.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutationResidual {
    /// The full identity with all `A` terms.
    pub general: f64,
    /// The identity keeping only the `∇A` terms (valid when `T(T(X,Y),Z) = 0`
    /// or `T` is skew).
    pub derivative_terms_only: f64,
    /// Largest `|T(T(X,Y),Z)|`.
    pub torsion_of_torsion: f64,
    /// Whether `⟨T(X,Y),Z⟩` is totally skew.
    pub skew_torsion: bool,
}

/// `⟨R(X,Y)Z,W⟩ − ⟨R(Z,W)X,Y⟩` against its expression through the `A` map,
/// over all frame 4-tuples.
pub fn metric_connection_commutation<S: Scalar>(
    alg: &FrameAlgebra<S>,
    conn: &ConnectionCoeffs<S>,
) -> Result<CommutationResidual, CurvatureError> {
    let dim = alg.dim();
    let ones = vec![S::one(); dim];
    let residual = crate::connections::metric_residual(conn, &ones);
    if !negligible::<S>(residual) {
        return Err(CurvatureError::NonMetric { residual });
    }
    let t = torsion(conn, alg);
    let a = a_map(&t);
    let r = curvature(alg, conn)?;
    let na = covariant_all(alg, conn, &a)?;
    let av = |x: usize, y: usize, e: usize| a.value(x, y, e);
    let a_dot = |x: usize, y: usize, z: usize, w: usize| (0..dim).fold(S::zero(), |acc, e| acc + av(x, y, e) * av(z, w, e));
    let a_of_t = |x: usize, y: usize, z: usize, w: usize| (0..dim).fold(S::zero(), |acc, d| acc + t.value(x, y, d) * av(d, z, w));
    let half = S::from_ratio(1, 2);
    let quarter = S::from_ratio(1, 4);
    let mut general = 0.0f64;
    let mut partial = 0.0f64;
    let mut tt = 0.0f64;
    let mut skew = true;
    for x in 0..dim {
        for y in 0..dim {
            for z in 0..dim {
                skew &= (t.value(x, y, z) + t.value(x, z, y)).as_f64().abs() <= FLOAT_TOL;
                for w in 0..dim {
                    tt = tt.max(torsion_of_torsion(&t, x, y, z, w).as_f64().abs());
                    let lhs = r.value(x, y, z, w) - r.value(z, w, x, y);
                    let deriv = half.clone()
                        * (na[x].value(y, z, w) - na[y].value(x, z, w) - na[z].value(w, x, y) + na[w].value(z, x, y));
                    let torsion_terms = half.clone() * (a_of_t(x, y, z, w) - a_of_t(z, w, x, y));
                    let quadratic = quarter.clone()
                        * (a_dot(y, z, x, w) - a_dot(z, y, w, x) - a_dot(x, z, y, w) + a_dot(z, x, w, y));
                    let d_partial = lhs.clone() - deriv.clone();
                    partial = partial.max(d_partial.as_f64().abs());
                    general = general.max((d_partial - torsion_terms - quadratic).as_f64().abs());
                }
            }
        }
    }
    Ok(CommutationResidual { general, derivative_terms_only: partial, torsion_of_torsion: tt, skew_torsion: skew })
}

/// `∇^g + ½τ` for a random constant totally skew 3-tensor `τ`: a metric
/// connection with skew torsion `τ`.
pub fn random_skew_torsion_connection<S: Scalar>(alg: &FrameAlgebra<S>, seed: u64) -> ConnectionCoeffs<S> {
    use rand::{Rng, SeedableRng};
    let dim = alg.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut tau = vec![0i64; dim * dim * dim];
    for a in 0..dim {
        for b in (a + 1)..dim {
            for c in (b + 1)..dim {
                let v: i64 = rng.gen_range(-3..=3);
                for (p, q, r, s) in [(a, b, c, 1), (b, c, a, 1), (c, a, b, 1), (b, a, c, -1), (a, c, b, -1), (c, b, a, -1)] {
                    tau[(p * dim + q) * dim + r] = s * v;
                }
            }
        }
    }
    let lc = crate::connections::koszul(alg);
    Tensor3::from_fn(dim, |a, b, c| {
        let v = tau[(a * dim + b) * dim + c];
        if v == 0 {
            lc.get(a, b, c).clone()
        } else {
            lc.get(a, b, c).add(&Jet::constant(S::from_ratio(v, 2)))
        }
    })
}

/// Point values `M[b][c]` of a `Ψ_(1,1)` tensor, so that
/// `C_M θ^c = Σ_b M[b][c] θ^b`.
pub fn one_one_matrix<S: Scalar>(t: &MixedTensor<Jet<S>>, dim: usize) -> Vec<Vec<S>> {
    let mut out = vec![vec![S::zero(); dim]; dim];
    for ((form, vector), w) in t.terms() {
        if form.degree() == 1 && vector.degree() == 1 {
            let b = form.slots().next().unwrap();
            let c = vector.slots().next().unwrap();
            out[b][c] = out[b][c].clone() + w.value();
        }
    }
    out
}

/// `Ric_H` as a bilinear form on the frame, `[r][s]`.
pub fn horizontal_ricci<S: Scalar>(geo: &Geometry<S>) -> Result<Vec<Vec<S>>, JetError> {
    let (ric11, _) = ric_terms(geo, &Eps::Infinite)?;
    Ok(one_one_matrix(&ric11, geo.dim()))
}

/// `J_{Z_l}` as matrices `[l][c][b] = (J_{Z_l} X_b)^c` at the point.
pub fn j_matrices<S: Scalar>(geo: &Geometry<S>) -> Vec<Vec<Vec<S>>> {
    (0..geo.m)
        .map(|l| (0..geo.n).map(|c| (0..geo.n).map(|b| geo.j.value(geo.n + l, b, c)).collect()).collect())
        .collect()
}

fn mat_mul<S: Scalar>(a: &[Vec<S>], b: &[Vec<S>]) -> Vec<Vec<S>> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n).map(|i| (0..m).map(|j| (0..k).fold(S::zero(), |acc, d| acc + a[i][d].clone() * b[d][j].clone())).collect()).collect()
}

fn trace<S: Scalar>(a: &[Vec<S>]) -> S {
    (0..a.len()).fold(S::zero(), |acc, i| acc + a[i][i].clone())
}

/// `𝐉² = Σ_l J_{Z_l}²` on `H`, `[c][b]`.
pub fn j_squared<S: Scalar>(geo: &Geometry<S>) -> Vec<Vec<S>> {
    let mut out = vec![vec![S::zero(); geo.n]; geo.n];
    for jl in j_matrices(geo) {
        let sq = mat_mul(&jl, &jl);
        for c in 0..geo.n {
            for b in 0..geo.n {
                out[c][b] = out[c][b].clone() + sq[c][b].clone();
            }
        }
    }
    out
}

/// `tr_H(J_{Z_k} J_{Z_l})`.
pub fn j_trace_pairs<S: Scalar>(geo: &Geometry<S>) -> Vec<Vec<S>> {
    let js = j_matrices(geo);
    (0..geo.m).map(|k| (0..geo.m).map(|l| trace(&mat_mul(&js[k], &js[l]))).collect()).collect()
}

/// The one-form curvature quantity
/// `⟨Q α, α⟩ = ⟨Ric_H α, α⟩_H − ⟨δ_H T α, α⟩_V − ¼ Tr_H(J_α²)` on all
/// covectors at the point.
#[derive(Clone, Debug)]
pub struct QTensor<S> {
    /// `⟨Q α, α⟩ = Σ α_a matrix[a][b] α_b`.
    pub matrix: Vec<Vec<S>>,
    pub min_eigenvalue: f64,
    pub min_horizontal_eigenvalue: f64,
    pub symmetric: bool,
}

pub fn q_tensor<S: Scalar>(geo: &Geometry<S>) -> Result<QTensor<S>, JetError> {
    let (n, dim) = (geo.n, geo.dim());
    let ric = horizontal_ricci(geo)?;
    let div = geo.horizontal_divergence_torsion()?;
    let jj = j_trace_pairs(geo);
    let quarter = S::from_ratio(1, 4);
    let mut q = vec![vec![S::zero(); dim]; dim];
    for a in 0..dim {
        for b in 0..dim {
            q[a][b] = match (a < n, b < n) {
                (true, true) => ric[a][b].clone(),
                (false, true) => -div[b][a].value(),
                (false, false) => -(quarter.clone() * jj[a - n][b - n].clone()),
                (true, false) => S::zero(),
            };
        }
    }
    let m = crate::linalg::to_dmatrix(&q);
    let min_eigenvalue = crate::linalg::min_sym_eigenvalue(&m);
    let min_horizontal_eigenvalue = crate::linalg::min_sym_eigenvalue(&m.view((0, 0), (n, n)).into_owned());
    let symmetric = (0..dim).all(|a| (0..dim).all(|b| (q[a][b].clone() - q[b][a].clone()).is_negligible(FLOAT_TOL)));
    Ok(QTensor { matrix: q, min_eigenvalue, min_horizontal_eigenvalue, symmetric })
}

/// `R_H(β₁ ∧ β₂)(v, w) = ⟨R(♯β₁, ♯β₂) w, v⟩` on `∧²H*` for the Bott
/// curvature, over the basis `θ_i ∧ θ_j` with `i < j`.
#[derive(Clone, Debug)]
pub struct HorizontalCurvatureOperator<S> {
    pub pairs: Vec<(usize, usize)>,
    /// `[(r,s)][(i,j)] = ⟨R(X_i, X_j) X_s, X_r⟩`.
    pub matrix: Vec<Vec<S>>,
    pub min_eigenvalue: f64,
    pub symmetry_residual: f64,
}

pub fn horizontal_curvature_operator<S: Scalar>(geo: &Geometry<S>) -> Result<HorizontalCurvatureOperator<S>, JetError> {
    let r = curvature(&geo.alg, &geo.bott)?;
    let pairs: Vec<(usize, usize)> = (0..geo.n).flat_map(|i| ((i + 1)..geo.n).map(move |j| (i, j))).collect();
    let matrix: Vec<Vec<S>> = pairs.iter().map(|&(rr, s)| pairs.iter().map(|&(i, j)| r.value(i, j, s, rr)).collect()).collect();
    let mut symmetry_residual = 0.0f64;
    for p in 0..pairs.len() {
        for q in 0..pairs.len() {
            symmetry_residual = symmetry_residual.max((matrix[p][q].clone() - matrix[q][p].clone()).as_f64().abs());
        }
    }
    let min_eigenvalue = crate::linalg::min_sym_eigenvalue(&crate::linalg::to_dmatrix(&matrix));
    Ok(HorizontalCurvatureOperator { pairs, matrix, min_eigenvalue, symmetry_residual })
}

/// Whether `∇_Z T = 0` for vertical `Z`, and the residual of
/// `⟨(∇_Z T)(X,Y), W⟩ = ⟨R(X,Y) Z, W⟩` over horizontal `X, Y` and vertical
/// `Z, W`.
#[derive(Clone, Debug, PartialEq)]
pub struct VerticalParallelTorsion {
    pub parallel: bool,
    pub equivalence_residual: f64,
}

pub fn vertical_parallel_torsion<S: Scalar>(geo: &Geometry<S>) -> Result<VerticalParallelTorsion, JetError> {
    let (n, dim) = (geo.n, geo.dim());
    let r = curvature(&geo.alg, &geo.bott)?;
    let mut parallel = true;
    let mut worst = 0.0f64;
    for z in n..dim {
        let nt = covariant_tensor3(&geo.alg, &geo.bott, z, &geo.torsion)?;
        for x in 0..n {
            for y in 0..n {
                for w in 0..dim {
                    parallel &= Coeff::is_zero(nt.get(x, y, w)) || nt.get(x, y, w).max_abs() == 0.0;
                    if w >= n {
                        let d = nt.value(x, y, w) - r.value(x, y, z, w);
                        worst = worst.max(d.as_f64().abs());
                    }
                }
            }
        }
    }
    Ok(VerticalParallelTorsion { parallel, equivalence_residual: worst })
}

/// Levi-Civita connection of the diagonal metric with frame weights `w`
/// (`g(E_a, E_b) = w_a δ_ab`), from the Koszul formula.
pub fn weighted_levi_civita<S: Scalar>(alg: &FrameAlgebra<S>, w: &[S]) -> ConnectionCoeffs<S> {
    let half = S::from_ratio(1, 2);
    Tensor3::from_fn(alg.dim(), |a, b, c| {
        let num = alg.bracket(a, b, c).scale(&w[c]).sub(&alg.bracket(a, c, b).scale(&w[b])).sub(&alg.bracket(b, c, a).scale(&w[a]));
        num.scale(&(half.clone() / w[c].clone()))
    })
}

/// `Ric(E_b, E_c) = Σ_a ⟨R(E_a, E_b) E_c⟩^a` at the point.
pub fn ricci_table<S: Scalar>(r: &CurvatureTensor<S>, slots: &[usize]) -> Vec<Vec<S>> {
    let dim = r.dim();
    (0..dim)
        .map(|b| (0..dim).map(|c| slots.iter().fold(S::zero(), |acc, &a| acc + r.value(a, b, c, a))).collect())
        .collect()
}

/// Ricci curvature of `g_ε` from the weighted Koszul formula.
pub fn ricci_levi_civita<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>) -> Result<Vec<Vec<S>>, JetError> {
    let w: Vec<S> = (0..geo.dim()).map(|s| if s < geo.n { S::one() } else { eps.vertical_weight().unwrap_or_else(S::zero) }).collect();
    let conn = weighted_levi_civita(&geo.alg, &w);
    let r = curvature(&geo.alg, &conn)?;
    Ok(ricci_table(&r, &(0..geo.dim()).collect::<Vec<_>>()))
}

/// Ricci curvature of the leaves, on the vertical block `[k][l]`.
pub fn leaf_ricci<S: Scalar>(geo: &Geometry<S>) -> Result<Vec<Vec<S>>, JetError> {
    let (n, dim) = (geo.n, geo.dim());
    let lc = crate::connections::koszul(&geo.alg);
    let conn = Tensor3::from_fn(dim, |a, b, c| if a >= n && b >= n && c >= n { lc.get(a, b, c).clone() } else { Jet::zero_const() });
    let r = curvature(&geo.alg, &conn)?;
    let full = ricci_table(&r, &(n..dim).collect::<Vec<_>>());
    Ok((n..dim).map(|k| (n..dim).map(|l| full[k][l].clone()).collect()).collect())
}

/// Ricci table of `g_ε` assembled from the foliation data:
/// `Ric_V − (1/4ε²) tr_H J_v J_w` on `V×V`, `−(1/2ε)⟨δ_H T(v), w⟩` on
/// `H×V`, and `Ric_H(v,w) + (1/2ε)⟨𝐉² w, v⟩` on `H×H`.
pub fn ricci_canonical_variation<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>) -> Result<Vec<Vec<S>>, JetError> {
    let (n, dim) = (geo.n, geo.dim());
    let k = eps.inv();
    let half_k = k.clone() * S::from_ratio(1, 2);
    let ric_h = horizontal_ricci(geo)?;
    let ric_v = leaf_ricci(geo)?;
    let div = geo.horizontal_divergence_torsion()?;
    let jj = j_trace_pairs(geo);
    let j2 = j_squared(geo);
    let mut out = vec![vec![S::zero(); dim]; dim];
    for a in 0..dim {
        for b in 0..dim {
            out[a][b] = match (a < n, b < n) {
                (true, true) => ric_h[a][b].clone() + half_k.clone() * j2[a][b].clone(),
                (true, false) => -(half_k.clone() * div[a][b].value()),
                (false, true) => -(half_k.clone() * div[b][a].value()),
                (false, false) => {
                    ric_v[a - n][b - n].clone() - k.clone() * k.clone() * S::from_ratio(1, 4) * jj[a - n][b - n].clone()
                }
            };
        }
    }
    Ok(out)
}

fn quadratic<S: Scalar>(m: &[Vec<S>], x: &[S]) -> S {
    let mut acc = S::zero();
    for (a, row) in m.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            acc = acc + x[a].clone() * v.clone() * x[b].clone();
        }
    }
    acc
}

/// Residual of
/// `Ric_{g_ε}(v + εw, v + εw) = (1/2ε)⟨𝐉²v, v⟩ + ⟨Q(v + w), v + w⟩ + ε² Ric_V(w, w)`
/// for horizontal `v` and vertical `w` given as one frame vector `x = v + w`.
pub fn adiabatic_q_residual<S: Scalar>(geo: &Geometry<S>, eps: &S, x: &[S]) -> Result<S, CurvatureError> {
    let (n, dim) = (geo.n, geo.dim());
    let e = Eps::finite(eps.clone()).map_err(|_| CurvatureError::Mismatch { what: "epsilon", residual: eps.as_f64() })?;
    let table = ricci_canonical_variation(geo, &e)?;
    let q = q_tensor(geo)?;
    let ric_v = leaf_ricci(geo)?;
    let j2 = j_squared(geo);
    let scaled: Vec<S> = (0..dim).map(|a| if a < n { x[a].clone() } else { eps.clone() * x[a].clone() }).collect();
    let lhs = quadratic(&table, &scaled);
    let v: Vec<S> = x[..n].to_vec();
    let w: Vec<S> = x[n..].to_vec();
    let rhs = quadratic(&j2, &v) / (S::from_i64(2) * eps.clone()) + quadratic(&q.matrix, x) + eps.clone() * eps.clone() * quadratic(&ric_v, &w);
    Ok(lhs - rhs)
}

/// `[I][J]` = coefficient of `e_I` in `C_t e_J`, at the point.
pub fn operator_block<S: Scalar>(t: &MixedTensor<Jet<S>>, rows: &[MultiIndex], cols: &[MultiIndex]) -> Vec<Vec<S>> {
    let mut out = vec![vec![S::zero(); cols.len()]; rows.len()];
    for (j, col) in cols.iter().enumerate() {
        let image = t.apply(&crate::exterior::Form::monomial(*col, Jet::constant(S::one())));
        for (i, row) in rows.iter().enumerate() {
            if let Some(v) = image.get(*row) {
                out[i][j] = v.value();
            }
        }
    }
    out
}

/// Smallest Rayleigh quotient of `C_{Ric_H}` on one bigraded fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberBound {
    pub bigrade: (usize, usize),
    pub c1: f64,
    /// Largest component of `C_{Ric_H}` leaving the fiber.
    pub leakage: f64,
}

/// `c₁` on every `∧^{(i,j)}` fiber with `0 < i < n`. Basis monomials are
/// orthonormal for `g`, and every element of one fiber has the same
/// `g_ε`-scaling, so the quotient does not depend on `ε`.
pub fn fiber_bounds<S: Scalar>(geo: &Geometry<S>) -> Result<Vec<FiberBound>, JetError> {
    let ric_h = ric(geo, &Eps::Infinite)?;
    let mut out = Vec::new();
    for i in 1..geo.n {
        for j in 0..=geo.m {
            let basis = MultiIndex::all_of_bigrade(geo.n, geo.m, i, j);
            let all = MultiIndex::all_of_degree(geo.dim(), i + j);
            let outside: Vec<MultiIndex> = all.iter().copied().filter(|x| x.bigrade(geo.n) != (i, j)).collect();
            let block = operator_block(&ric_h, &basis, &basis);
            let leak = operator_block(&ric_h, &outside, &basis);
            let leakage = leak.iter().flatten().map(|v| v.as_f64().abs()).fold(0.0, f64::max);
            let c1 = crate::linalg::min_sym_eigenvalue(&crate::linalg::to_dmatrix(&block));
            out.push(FiberBound { bigrade: (i, j), c1, leakage });
        }
    }
    Ok(out)
}

/// `C_{Ric_H}(a ∧ b) − (C_{Ric_H} a) ∧ b` over horizontal basis `a` and
/// vertical basis `b`.
pub fn product_rule_residual<S: Scalar>(geo: &Geometry<S>) -> Result<f64, JetError> {
    let ric_h = ric(geo, &Eps::Infinite)?;
    let one = Jet::constant(S::one());
    let mut worst = 0.0f64;
    for i in 0..=geo.n {
        for a in MultiIndex::all_of_bigrade(geo.n, geo.m, i, 0) {
            let fa = crate::exterior::Form::monomial(a, one.clone());
            let ca = ric_h.apply(&fa);
            for j in 1..=geo.m {
                for b in MultiIndex::all_of_bigrade(geo.n, geo.m, 0, j) {
                    let fb = crate::exterior::Form::monomial(b, one.clone());
                    let lhs = ric_h.apply(&fa.wedge(&fb));
                    let rhs = if ca.degree() == i { ca.wedge(&fb) } else { crate::exterior::Form::zero(i + j) };
                    for (_, v) in lhs.sub(&rhs).terms() {
                        worst = worst.max(v.value().as_f64().abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Largest `|⟨R(Z,W) X₁, X₂⟩|` for vertical `Z, W` and horizontal `X₁, X₂`
/// (Bott curvature).
pub fn vertical_pair_curvature<S: Scalar>(geo: &Geometry<S>) -> Result<f64, JetError> {
    let (n, dim) = (geo.n, geo.dim());
    let r = curvature(&geo.alg, &geo.bott)?;
    let mut worst = 0.0f64;
    for z in n..dim {
        for w in n..dim {
            for x1 in 0..n {
                for x2 in 0..n {
                    worst = worst.max(r.value(z, w, x1, x2).as_f64().abs());
                }
            }
        }
    }
    Ok(worst)
}

/// `ν₀ = Σ θ_j ∧ θ_k ⊗ X_i ∧ ↻(∇_{X_i} T)(X_j, X_k)`, the cyclic sum
/// running over `(i, j, k)`.
pub fn nu_zero<S: Scalar>(geo: &Geometry<S>) -> Result<MixedTensor<Jet<S>>, JetError> {
    let (n, dim) = (geo.n, geo.dim());
    let nt: Vec<Tensor3<S>> = (0..n).map(|a| covariant_tensor3(&geo.alg, &geo.bott, a, &geo.torsion)).collect::<Result<_, _>>()?;
    let mut out = MixedTensor::zero();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let Some((form, fs)) = MultiIndex::from_slots(&[j, k]) else { continue };
                for e in 0..dim {
                    let c = nt[i].get(j, k, e).add(nt[j].get(k, i, e)).add(nt[k].get(i, j, e));
                    if Coeff::is_zero(&c) {
                        continue;
                    }
                    if let Some((vec, vs)) = MultiIndex::from_slots(&[i, e]) {
                        let c = if fs * vs < 0 { c.neg() } else { c };
                        out.add_term(form, vec, c);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn push_term<S: Scalar>(t: &mut MixedTensor<Jet<S>>, forms: &[usize], vectors: &[usize], w: Jet<S>) {
    if Coeff::is_zero(&w) {
        return;
    }
    let (Some((f, fs)), Some((v, vs))) = (MultiIndex::from_slots(forms), MultiIndex::from_slots(vectors)) else {
        return;
    };
    t.add_term(f, v, if fs * vs < 0 { w.neg() } else { w });
}

/// `C_{Ric^ε} − C_{Ric_H}` written directly in a local orthonormal frame
/// through `∇T`, `𝐉²` and `J`. The divergence term enters as
/// `−(1/ε) Σ_i ♭δ_H T(X_i) ∧ ι_{X_i}` in the sign convention of
/// [`Geometry::horizontal_divergence_torsion`].
pub fn ricci_difference_local<S: Scalar>(geo: &Geometry<S>, eps: &Eps<S>) -> Result<MixedTensor<Jet<S>>, JetError> {
    let (n, dim) = (geo.n, geo.dim());
    let k = Jet::constant(eps.inv());
    let k2 = k.mul(&k);
    let half_k = k.scale(&S::from_ratio(1, 2));
    let div = geo.horizontal_divergence_torsion()?;
    let nt = covariant_all(&geo.alg, &geo.bott, &geo.torsion)?;
    let mut out = MixedTensor::zero();
    for i in 0..n {
        for c in 0..dim {
            push_term(&mut out, &[c], &[i], k.mul(&div[i][c]).neg());
            let mut j2 = Jet::zero_const();
            for l in n..dim {
                for d in 0..n {
                    j2 = j2.add(&geo.j.get(l, i, d).mul(geo.j.get(l, d, c)));
                }
            }
            push_term(&mut out, &[c], &[i], k.mul(&j2));
        }
    }
    for a in 0..dim {
        for i in 0..n {
            for j in 0..n {
                for c in 0..dim {
                    push_term(&mut out, &[a, c], &[i, j], k.mul(nt[a].get(i, j, c)));
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for kk in 0..n {
                for c in 0..dim {
                    let mut v = Jet::zero_const();
                    for d in 0..dim {
                        v = v.add(&geo.torsion.get(i, j, d).mul(geo.j.get(d, kk, c)));
                    }
                    push_term(&mut out, &[i, j], &[kk, c], half_k.mul(&v));
                }
            }
        }
    }
    for r in n..dim {
        for s in n..dim {
            for kk in 0..n {
                for c in 0..dim {
                    let mut v = Jet::zero_const();
                    for d in 0..dim {
                        v = v.add(&geo.j.get(s, kk, d).mul(geo.j.get(r, d, c)));
                    }
                    push_term(&mut out, &[r, s], &[kk, c], k2.mul(&v));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_model;
    use crate::scalar::Rational;

    fn geo(name: &str) -> Geometry<Rational> {
        Geometry::new(&builtin_model(name).unwrap())
    }

    fn r(a: i64, b: i64) -> Rational {
        Rational::from_ratio(a, b)
    }

    fn diag(d: &[Rational]) -> Vec<Vec<Rational>> {
        (0..d.len()).map(|i| (0..d.len()).map(|j| if i == j { d[i].clone() } else { r(0, 1) }).collect()).collect()
    }

    #[test]
    fn round_sphere_ricci() {
        let g = geo("hopf_s3");
        let eps = Eps::Finite(r(1, 1));
        assert_eq!(ricci_levi_civita(&g, &eps).unwrap(), diag(&[r(2, 1), r(2, 1), r(2, 1)]));
        assert_eq!(ricci_canonical_variation(&g, &eps).unwrap(), diag(&[r(2, 1), r(2, 1), r(2, 1)]));
    }

    #[test]
    fn berger_ricci_table() {
        // Ric_H + (1/2ε)𝐉² = 4 − 2/ε, and −(1/4ε²) tr(J²) = 8/4ε² on the fiber frame vector
        let g = geo("berger_s3");
        let t = ricci_canonical_variation(&g, &Eps::Finite(r(4, 1))).unwrap();
        assert_eq!(t, diag(&[r(7, 2), r(7, 2), r(1, 8)]));
        assert_eq!(t, ricci_levi_civita(&g, &Eps::Finite(r(4, 1))).unwrap());
    }

    #[test]
    fn curvature_is_skew_in_first_pair() {
        for name in ["heisenberg5", "hopf_s3", "fixture_twisted_rank2"] {
            let g = geo(name);
            let rt = curvature(&g.alg, &g.bott).unwrap();
            let d = g.dim();
            for (a, b, c, e) in (0..d).flat_map(|a| (0..d).flat_map(move |b| (0..d).flat_map(move |c| (0..d).map(move |e| (a, b, c, e))))) {
                assert_eq!(rt.value(a, b, c, e), -rt.value(b, a, c, e));
            }
        }
    }

    #[test]
    fn j_squared_normalizations() {
        assert_eq!(j_squared(&geo("heisenberg3")), diag(&[r(-1, 1), r(-1, 1)]));
        assert_eq!(j_squared(&geo("hopf_s3")), diag(&[r(-4, 1), r(-4, 1)]));
    }

    #[test]
    fn line_leaves_are_flat() {
        for name in ["heisenberg3", "hopf_s3", "heisenberg5"] {
            let ric_v = leaf_ricci(&geo(name)).unwrap();
            assert_eq!(ric_v, vec![vec![r(0, 1)]]);
        }
    }

    #[test]
    fn hopf_torsion_is_vertically_parallel() {
        let v = vertical_parallel_torsion(&geo("hopf_s3")).unwrap();
        assert!(v.parallel);
        assert_eq!(v.equivalence_residual, 0.0);
    }

    #[test]
    fn non_metric_connection_is_rejected() {
        let g = geo("heisenberg3");
        let conn = Tensor3::from_fn(3, |a, b, c| if (a, b, c) == (0, 0, 0) { Jet::constant(r(1, 1)) } else { Jet::zero_const() });
        assert!(matches!(metric_connection_commutation(&g.alg, &conn), Err(CurvatureError::NonMetric { .. })));
    }

    #[test]
    fn float_and_exact_agree() {
        let exact = geo("hopf_s5");
        let float: Geometry<f64> = Geometry::new(&builtin_model("hopf_s5").unwrap());
        let a = horizontal_curvature_operator(&exact).unwrap();
        let b = horizontal_curvature_operator(&float).unwrap();
        assert!((a.min_eigenvalue - b.min_eigenvalue).abs() < 1e-9);
        for (x, y) in a.matrix.iter().flatten().zip(b.matrix.iter().flatten()) {
            assert!((x.as_f64() - y).abs() < 1e-9);
        }
    }
}
