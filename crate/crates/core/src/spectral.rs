//! `Δ_{H,ε}` restricted to constant-coefficient frame forms on homogeneous
//! models: heat semigroup, Gårding constant, decay of closed forms and the
//! cohomology verdicts.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_traits::{One, Zero};

use crate::connections::{coframe_action, Eps, Geometry};
use crate::curvature::{self, CurvatureError};
use crate::exterior::{Form, MultiIndex};
use crate::frames::FrameSpec;
use crate::jets::{FrameAlgebra, JetError};
use crate::linalg;
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("model '{0}' does not have constant structure functions")]
    NotHomogeneous(String),
    #[error("heat time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("degree {degree} exceeds the dimension {dim}")]
    Degree { degree: usize, dim: usize },
    #[error("expected {expected} coefficients, got {got}")]
    Length { expected: usize, got: usize },
    #[error("a finite epsilon is required")]
    InfiniteEpsilon,
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
}

/// Matrix of `Δ_{H,ε}` on the `C(n+m, k)` constant frame `k`-forms.
#[derive(Clone, Debug)]
pub struct InvariantOperator {
    pub degree: usize,
    pub n: usize,
    pub m: usize,
    pub eps: Eps<Rational>,
    pub basis: Vec<MultiIndex>,
    /// `matrix[I][J]` is the coefficient of `θ^I` in `Δ θ^J`.
    pub matrix: Vec<Vec<Rational>>,
    /// Diagonal `g_ε` Gram matrix: `ε^j` on a form with `j` vertical slots.
    /// All ones at `ε = ∞`, where `g_ε` degenerates.
    pub weights: Vec<Rational>,
}

/// `dθ^c = −Σ_{a<b} C_ab^c θ^a ∧ θ^b` for constant structure.
fn d_coframe<S: Scalar>(alg: &FrameAlgebra<S>, c: usize) -> Form<S> {
    let mut out = Form::zero(2);
    for a in 0..alg.dim() {
        for b in (a + 1)..alg.dim() {
            let v = alg.bracket(a, b, c).value();
            if !v.is_zero() {
                let (idx, _) = MultiIndex::single(a).wedge(MultiIndex::single(b)).unwrap();
                out.add_term(idx, -v);
            }
        }
    }
    out
}

fn d_monomial<S: Scalar>(alg: &FrameAlgebra<S>, slots: &[usize]) -> Form<S> {
    let Some((&first, rest)) = slots.split_first() else {
        return Form::zero(1);
    };
    let rest_form = match MultiIndex::from_slots(rest) {
        Some((idx, _)) => Form::monomial(idx, S::one()),
        None => return Form::zero(slots.len() + 1),
    };
    let head = d_coframe(alg, first).wedge(&rest_form);
    if rest.is_empty() {
        return head;
    }
    head.sub(&Form::basis(first, S::one()).wedge(&d_monomial(alg, rest)))
}

/// Exterior derivative of a constant-coefficient form, from the structure
/// constants alone.
pub fn constant_exterior_derivative<S: Scalar>(alg: &FrameAlgebra<S>, alpha: &Form<S>) -> Form<S> {
    let mut out = Form::zero(alpha.degree() + 1);
    for (idx, v) in alpha.terms() {
        let slots: Vec<usize> = idx.slots().collect();
        out = out.add(&d_monomial(alg, &slots).scale(v));
    }
    out
}

/// `δ_{H,ε}` of a constant-coefficient form.
pub fn constant_codifferential(geo: &Geometry<Rational>, eps: &Eps<Rational>, alpha: &Form<Rational>) -> Form<Rational> {
    if alpha.degree() == 0 {
        return Form::zero(0);
    }
    let conn = geo.epsilon_connection(eps);
    let mut out = Form::zero(alpha.degree() - 1);
    for i in 0..geo.n {
        let rot = coframe_action(&conn, i).map(|j| j.value()).apply(alpha);
        out = out.sub(&rot.contract(i));
    }
    out
}

fn columns(basis: &[MultiIndex], image: impl Fn(MultiIndex) -> Form<Rational>, rows: &[MultiIndex]) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![Rational::zero(); basis.len()]; rows.len()];
    for (jj, &idx) in basis.iter().enumerate() {
        let f = image(idx);
        for (ii, row) in rows.iter().enumerate() {
            if let Some(v) = f.get(*row) {
                out[ii][jj] = v.clone();
            }
        }
    }
    out
}

fn geometry_of(spec: &FrameSpec) -> Result<Geometry<Rational>, SpectralError> {
    if !spec.homogeneous {
        return Err(SpectralError::NotHomogeneous(spec.name.clone()));
    }
    Ok(Geometry::new(spec))
}

fn check_degree(spec: &FrameSpec, k: usize) -> Result<(), SpectralError> {
    if k > spec.dim() {
        return Err(SpectralError::Degree { degree: k, dim: spec.dim() });
    }
    Ok(())
}

pub fn form_weights(basis: &[MultiIndex], n: usize, eps: &Eps<Rational>) -> Vec<Rational> {
    basis
        .iter()
        .map(|idx| match eps.value() {
            Some(e) => (0..idx.bigrade(n).1).fold(Rational::one(), |acc, _| acc * e.clone()),
            None => Rational::one(),
        })
        .collect()
}

/// Matrix of `d` from constant `k`-forms to constant `(k+1)`-forms,
/// `[I][J]` = coefficient of `θ^I` in `dθ^J`.
pub fn d_matrix(spec: &FrameSpec, k: usize) -> Result<Vec<Vec<Rational>>, SpectralError> {
    let geo = geometry_of(spec)?;
    check_degree(spec, k)?;
    let dim = spec.dim();
    let basis = MultiIndex::all_of_degree(dim, k);
    let rows = MultiIndex::all_of_degree(dim, k + 1);
    Ok(columns(&basis, |idx| constant_exterior_derivative(&geo.alg, &Form::monomial(idx, Rational::one())), &rows))
}

pub fn invariant_matrix(spec: &FrameSpec, eps: &Eps<Rational>, k: usize) -> Result<InvariantOperator, SpectralError> {
    let geo = geometry_of(spec)?;
    check_degree(spec, k)?;
    let dim = spec.dim();
    let basis = MultiIndex::all_of_degree(dim, k);
    let lap = |idx: MultiIndex| {
        let e = Form::monomial(idx, Rational::one());
        let a = constant_codifferential(&geo, eps, &constant_exterior_derivative(&geo.alg, &e));
        if k == 0 {
            return a.neg();
        }
        let b = constant_exterior_derivative(&geo.alg, &constant_codifferential(&geo, eps, &e));
        a.add(&b).neg()
    };
    let matrix = columns(&basis, lap, &basis);
    let weights = form_weights(&basis, spec.n, eps);
    Ok(InvariantOperator { degree: k, n: spec.n, m: spec.m, eps: eps.clone(), basis, matrix, weights })
}

impl InvariantOperator {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        linalg::to_dmatrix(&self.matrix)
    }

    fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.as_f64().sqrt()).collect()
    }

    /// The matrix in `g_ε`-orthonormal coordinates, `W^{1/2} A W^{-1/2}`.
    pub fn orthonormal_matrix(&self) -> DMatrix<f64> {
        let s = self.sqrt_weights();
        let a = self.to_f64();
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| s[i] * a[(i, j)] / s[j])
    }

    /// Exact `g_ε`-symmetry: `W A` is a symmetric matrix.
    pub fn is_symmetric(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| self.weights[i].clone() * self.matrix[i][j].clone() == self.weights[j].clone() * self.matrix[j][i].clone())
        })
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        a.iter().zip(&self.weights).map(|(x, w)| w.as_f64() * x * x).sum::<f64>().sqrt()
    }

    /// `e^{tA}` in frame coordinates.
    pub fn exp(&self, t: f64) -> Result<DMatrix<f64>, SpectralError> {
        if !(t >= 0.0) {
            return Err(SpectralError::NegativeTime(t));
        }
        let d = self.dim();
        let s = self.sqrt_weights();
        let b = self.orthonormal_matrix();
        let e = if self.is_symmetric() {
            let eig = SymmetricEigen::new(linalg::symmetric_part(&b));
            let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (t * l).exp()));
            &eig.eigenvectors * diag * eig.eigenvectors.transpose()
        } else {
            // scaling and squaring; copes with defective operators
            (b * t).exp()
        };
        Ok(DMatrix::from_fn(d, d, |i, j| e[(i, j)] * s[j] / s[i]))
    }
}

/// `e^{tΔ_{H,ε}} a` on frame coefficients.
pub fn heat_apply(op: &InvariantOperator, t: f64, a: &[f64]) -> Result<Vec<f64>, SpectralError> {
    if a.len() != op.dim() {
        return Err(SpectralError::Length { expected: op.dim(), got: a.len() });
    }
    let e = op.exp(t)?;
    Ok((&e * DVector::from_column_slice(a)).iter().copied().collect())
}

/// Smallest `K_ε` with `⟨Δ_{H,ε}α, α⟩_ε ≤ K_ε ‖α‖²_ε` on the invariant
/// forms.
pub fn garding_constant(op: &InvariantOperator) -> f64 {
    linalg::sym_eigenvalues(&op.orthonormal_matrix()).last().copied().unwrap_or(0.0)
}

/// The constant `c_ε` of the pointwise bound
/// `½Δ_H‖α‖²_ε − ⟨Δ_{H,ε}α, α⟩_ε ≥ c_ε ‖α‖²_ε` on closed 1-forms: the
/// smallest `g_ε`-Rayleigh quotient of `Q + (1/ε)𝐉²` on covectors.
pub fn closed_one_form_constant<S: Scalar>(geo: &Geometry<S>, eps: &S) -> Result<f64, SpectralError> {
    let (n, dim) = (geo.n, geo.dim());
    let q = curvature::q_tensor(geo)?;
    let j2 = curvature::j_squared(geo);
    let inv = S::one() / eps.clone();
    let mut p = q.matrix;
    for c in 0..n {
        for b in 0..n {
            p[c][b] = p[c][b].clone() + inv.clone() * j2[c][b].clone();
        }
    }
    let s: Vec<f64> = (0..dim).map(|c| if c < n { 1.0 } else { eps.as_f64().sqrt() }).collect();
    let p = linalg::symmetric_part(&linalg::to_dmatrix(&p));
    let scaled = DMatrix::from_fn(dim, dim, |i, j| p[(i, j)] / (s[i] * s[j]));
    Ok(linalg::min_sym_eigenvalue(&scaled))
}

pub const AUTO_EPS_CAP: u32 = 20;

/// Doubles `ε` from 1 until the closed 1-form constant is positive; `None`
/// when `2^20` is reached without success.
pub fn auto_epsilon<S: Scalar>(geo: &Geometry<S>) -> Result<Option<(S, f64)>, SpectralError> {
    let mut eps = S::one();
    for _ in 0..=AUTO_EPS_CAP {
        let c = closed_one_form_constant(geo, &eps)?;
        if c > 0.0 {
            return Ok(Some((eps, c)));
        }
        eps = eps.clone() + eps;
    }
    Ok(None)
}

/// Basis of the kernel of a rational matrix with `cols` columns, one
/// vector per free column.
pub fn rational_nullspace(rows: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let lead = a[rank][col].clone();
        for c in 0..cols {
            a[rank][c] = a[rank][c].clone() / lead.clone();
        }
        for r in 0..a.len() {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..cols {
                    let s = f.clone() * a[rank][c].clone();
                    a[r][c] = a[r][c].clone() - s;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][free].clone();
            }
            v
        })
        .collect()
}

pub const DECAY_TIMES: [f64; 4] = [1.0, 2.0, 5.0, 10.0];

#[derive(Clone, Debug, PartialEq)]
pub struct DecaySample {
    pub t: f64,
    /// Worst `‖e^{tΔ}α‖_ε / ‖α‖_ε` over the closed invariant forms.
    pub ratio: f64,
    pub bound: f64,
    pub slack: f64,
    /// Same ratio over all invariant forms of the degree.
    pub ratio_all: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecayStatus {
    Confirmed,
    NoConclusion(String),
    Violated(String),
}

pub const DECAY_SLACK_TOL: f64 = 1e-6;
pub const EXACTNESS_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DecayReport {
    pub degree: usize,
    pub eps: Rational,
    /// Curvature lower bound `c_ε`; only defined for 1-forms.
    pub c_eps: Option<f64>,
    pub closed_dim: usize,
    /// `−λ_max` of the symmetrized operator on closed invariant forms; `+∞`
    /// when there are none.
    pub gap_closed: f64,
    pub gap_all: f64,
    pub samples: Vec<DecaySample>,
    /// Largest `|d x − (α_t − α)|` of the least-squares solves.
    pub exactness_residual: f64,
    pub status: DecayStatus,
}

impl DecayReport {
    pub fn max_slack(&self) -> f64 {
        self.samples.iter().map(|s| s.slack).fold(0.0, f64::max)
    }
}

/// `g_ε`-orthonormal basis (in orthonormal coordinates) of the span of the
/// given frame-coordinate vectors.
fn orthonormal_span(vectors: &[Vec<Rational>], s: &[f64]) -> DMatrix<f64> {
    let d = s.len();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut y = DVector::from_fn(d, |i, _| s[i] * v[i].as_f64());
        for c in &cols {
            let p = c.dot(&y);
            y -= c * p;
        }
        let nrm = y.norm();
        if nrm > 1e-12 {
            cols.push(y / nrm);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(d, 0);
    }
    DMatrix::from_columns(&cols)
}

fn semigroup_ratio(b_t: &DMatrix<f64>, basis: &DMatrix<f64>) -> f64 {
    if basis.ncols() == 0 {
        return 0.0;
    }
    linalg::operator_norm(&(b_t * basis))
}

/// Decay of the heat semigroup on closed invariant `k`-forms, with the
/// exactness bookkeeping `α_t − α ∈ d(invariant (k−1)-forms)`.
pub fn closed_form_decay(spec: &FrameSpec, eps: &Rational, k: usize) -> Result<DecayReport, SpectralError> {
    let geo = geometry_of(spec)?;
    let e = Eps::Finite(eps.clone());
    let op = invariant_matrix(spec, &e, k)?;
    let d = op.dim();
    let s = op.sqrt_weights();
    let closed = if k < spec.dim() { rational_nullspace(&d_matrix(spec, k)?, d) } else { (0..d).map(|i| unit(d, i)).collect() };
    let u = orthonormal_span(&closed, &s);
    let b = op.orthonormal_matrix();
    let sym = linalg::symmetric_part(&b);
    let gap_closed = if u.ncols() == 0 {
        f64::INFINITY
    } else {
        -linalg::sym_eigenvalues(&(u.transpose() * &sym * &u)).last().copied().unwrap_or(f64::NEG_INFINITY)
    };
    let gap_all = -garding_constant(&op);
    let c_eps = if k == 1 { Some(closed_one_form_constant(&geo, eps)?) } else { None };
    let rate = c_eps.unwrap_or(0.0);
    let all = DMatrix::<f64>::identity(d, d);
    let prev = if k > 0 { Some(linalg::to_dmatrix(&d_matrix(spec, k - 1)?)) } else { None };
    let mut samples = Vec::new();
    let mut exactness_residual = 0.0f64;
    for &t in &DECAY_TIMES {
        let et = op.exp(t)?;
        let b_t = DMatrix::from_fn(d, d, |i, j| s[i] * et[(i, j)] / s[j]);
        let ratio = semigroup_ratio(&b_t, &u);
        let bound = (-rate * t).exp();
        samples.push(DecaySample { t, ratio, bound, slack: (ratio - bound).max(0.0), ratio_all: semigroup_ratio(&b_t, &all) });
        for v in &closed {
            let a = DVector::from_fn(d, |i, _| v[i].as_f64());
            let r = &et * &a - &a;
            let res = match &prev {
                Some(dm) if dm.ncols() > 0 => {
                    let x = dm.clone().svd(true, true).solve(&r, 1e-12).map_err(|_| SpectralError::Length { expected: d, got: 0 })?;
                    (dm * x - &r).norm()
                }
                _ => r.norm(),
            };
            exactness_residual = exactness_residual.max(res);
        }
    }
    let status = match c_eps {
        None => DecayStatus::NoConclusion(format!("no curvature bound for {k}-forms")),
        Some(c) if c <= 0.0 => DecayStatus::NoConclusion(format!("curvature bound c_eps = {c} is not positive")),
        Some(_) => {
            let slack = samples.iter().map(|s| s.slack).fold(0.0, f64::max);
            if slack > DECAY_SLACK_TOL {
                DecayStatus::Violated(format!("decay bound exceeded by {slack:e}"))
            } else if exactness_residual > EXACTNESS_TOL {
                DecayStatus::Violated(format!("exactness residual {exactness_residual:e}"))
            } else {
                DecayStatus::Confirmed
            }
        }
    };
    Ok(DecayReport {
        degree: k,
        eps: eps.clone(),
        c_eps,
        closed_dim: u.ncols(),
        gap_closed,
        gap_all,
        samples,
        exactness_residual,
        status,
    })
}

fn unit(d: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); d];
    v[i] = Rational::one();
    v
}

/// Eigenvalues at or below this count as non-positive in the verdict gates.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeStatus {
    Vanishes,
    NoConclusion,
}

impl DegreeStatus {
    pub fn label(self) -> &'static str {
        match self {
            DegreeStatus::Vanishes => "VANISHES",
            DegreeStatus::NoConclusion => "NO_CONCLUSION",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeVerdict {
    pub degree: usize,
    pub status: DegreeStatus,
    /// Which criterion concluded, or why none did.
    pub certificate: String,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub compact: bool,
    pub valid: bool,
    pub q_min_eigenvalue: f64,
    pub rh_min_eigenvalue: f64,
    pub vertical_parallel_torsion: bool,
    pub yang_mills: bool,
    /// For line foliations with `δ_H T = 0`: whether `R_H > 0 ⇒ Q > 0` holds
    /// on the computed numbers.
    pub k_contact_consistent: Option<bool>,
    pub degrees: Vec<DegreeVerdict>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn status(&self, k: usize) -> Option<DegreeStatus> {
        self.degrees.iter().find(|d| d.degree == k).map(|d| d.status)
    }
}

pub const HODGE_NOTE: &str =
    "the L2 continuity of the Hodge projection used to pass from decay to vanishing is cited, not recomputed";

/// Per-degree de Rham vanishing verdicts from the curvature gates.
///
/// `H¹` vanishes when `Q > 0`. `H^k` for `m < k < n` vanishes when
/// `R_H > 0` and `∇_Z T = 0`. Every vanishing degree `k` also gives
/// `H^{n+m−k}` by Poincaré duality, which is how line foliations get `Hⁿ`
/// from `H¹`. Nothing vanishes unless the model is valid and claims to be
/// compact.
pub fn cohomology_verdict(spec: &FrameSpec) -> Result<Verdict, SpectralError> {
    let geo: Geometry<Rational> = Geometry::new(spec);
    let (n, m, dim) = (spec.n, spec.m, spec.dim());
    let valid = spec.validate().passed();
    let q = curvature::q_tensor(&geo)?;
    let rh = curvature::horizontal_curvature_operator(&geo)?;
    let vpt = curvature::vertical_parallel_torsion(&geo)?;
    let yang_mills = geo.is_yang_mills()?;
    let q_pos = q.min_eigenvalue > POSITIVITY_TOL;
    let rh_pos = rh.min_eigenvalue > POSITIVITY_TOL;
    let k_contact_consistent = (m == 1 && yang_mills).then_some(!rh_pos || q_pos);

    let mut direct: Vec<Option<String>> = vec![None; dim + 1];
    if q_pos && 1 < dim {
        direct[1] = Some(format!("Q > 0 (min eigenvalue {:.6})", q.min_eigenvalue));
    }
    if rh_pos && vpt.parallel {
        for slot in direct.iter_mut().take(n).skip(m + 1) {
            *slot = Some(format!("R_H > 0 (min eigenvalue {:.6}) and nabla_Z T = 0", rh.min_eigenvalue));
        }
    }
    let mut degrees = Vec::with_capacity(dim + 1);
    for k in 0..=dim {
        let reason = if let Some(c) = &direct[k] {
            Some(c.clone())
        } else {
            direct[dim - k].as_ref().map(|c| format!("Poincare duality with degree {}: {c}", dim - k))
        };
        let (status, certificate) = match reason {
            _ if k == 0 || k == dim => (DegreeStatus::NoConclusion, "top and bottom degrees are never covered".to_string()),
            None if !spec.compact => (
                DegreeStatus::NoConclusion,
                format!("compactness not asserted; {}", gate_failure(k, n, m, &q, &rh, vpt.parallel)),
            ),
            None => (DegreeStatus::NoConclusion, gate_failure(k, n, m, &q, &rh, vpt.parallel)),
            Some(c) if !spec.compact => (DegreeStatus::NoConclusion, format!("compactness not asserted; gates pass: {c}")),
            Some(c) if !valid => (DegreeStatus::NoConclusion, format!("frame validation failed; gates pass: {c}")),
            Some(c) => (DegreeStatus::Vanishes, c),
        };
        degrees.push(DegreeVerdict { degree: k, status, certificate });
    }
    let mut notes = vec![HODGE_NOTE.to_string()];
    if spec.compact {
        notes.push("compactness, connectedness and orientability are assumed from the model, not verified".to_string());
    }
    if !spec.homogeneous {
        notes.push("curvature gates are evaluated at the base point of the frame chart".to_string());
    }
    Ok(Verdict {
        model: spec.name.clone(),
        n,
        m,
        compact: spec.compact,
        valid,
        q_min_eigenvalue: q.min_eigenvalue,
        rh_min_eigenvalue: rh.min_eigenvalue,
        vertical_parallel_torsion: vpt.parallel,
        yang_mills,
        k_contact_consistent,
        degrees,
        notes,
    })
}

fn gate_failure(
    k: usize,
    n: usize,
    m: usize,
    q: &curvature::QTensor<Rational>,
    rh: &curvature::HorizontalCurvatureOperator<Rational>,
    parallel: bool,
) -> String {
    let mut parts = Vec::new();
    if k == 1 || k + 1 == n + m {
        parts.push(format!("Q min eigenvalue {:.6} is not positive", q.min_eigenvalue));
    }
    let in_range = |d: usize| m < d && d < n;
    if in_range(k) || in_range(n + m - k) {
        if rh.min_eigenvalue <= POSITIVITY_TOL {
            parts.push(format!("R_H min eigenvalue {:.3e} is not positive", rh.min_eigenvalue));
        }
        if !parallel {
            parts.push("nabla_Z T does not vanish".to_string());
        }
    }
    if parts.is_empty() {
        "no criterion covers this degree".to_string()
    } else {
        parts.join("; ")
    }
}

/// Pointwise form of the symmetry test for models without constant
/// structure: whether the zero-order term `C_{Ric^ε}` of `Δ_{H,ε}` on
/// 1-forms is `g_ε`-symmetric. Its only non-symmetric contribution is the
/// `δ_H T` block.
pub fn zero_order_symmetric(geo: &Geometry<Rational>, eps: &Rational) -> Result<bool, SpectralError> {
    let (n, dim) = (geo.n, geo.dim());
    let ric = curvature::ric(geo, &Eps::Finite(eps.clone()))?;
    let a = curvature::one_one_matrix(&ric, dim);
    let w = |c: usize| if c < n { Rational::one() } else { eps.clone() };
    Ok((0..dim).all(|b| (0..dim).all(|c| w(b) * a[b][c].clone() == w(c) * a[c][b].clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplacians::{hodge_laplacian, point_values};
    use crate::models::{builtin_model, ModelRegistry};

    fn q(num: i64, den: i64) -> Rational {
        Rational::from_ratio(num, den)
    }

    fn homogeneous_models() -> Vec<FrameSpec> {
        let reg = ModelRegistry::builtin();
        reg.names().into_iter().map(|n| reg.build(n).unwrap()).filter(|s| s.homogeneous).collect()
    }

    #[test]
    fn matrix_matches_jet_laplacian_on_constant_forms() {
        for spec in homogeneous_models() {
            let geo: Geometry<Rational> = Geometry::new(&spec);
            for eps in [Eps::Finite(q(1, 4)), Eps::Finite(q(1, 1)), Eps::Finite(q(4, 1)), Eps::Infinite] {
                for k in 0..=spec.dim() {
                    let op = invariant_matrix(&spec, &eps, k).unwrap();
                    for (j, &idx) in op.basis.iter().enumerate() {
                        let field = Form::monomial(idx, crate::jets::Jet::constant(Rational::one()));
                        let lap = point_values(&hodge_laplacian(&geo, &eps, &field).unwrap());
                        for (i, &row) in op.basis.iter().enumerate() {
                            let v = lap.get(row).cloned().unwrap_or_else(Rational::zero);
                            assert_eq!(v, op.matrix[i][j], "{} k={k} {row:?}<-{idx:?}", spec.name);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn constant_d_squares_to_zero() {
        for spec in homogeneous_models() {
            for k in 0..spec.dim().saturating_sub(1) {
                let a = linalg::to_dmatrix(&d_matrix(&spec, k).unwrap());
                let b = linalg::to_dmatrix(&d_matrix(&spec, k + 1).unwrap());
                assert_eq!((b * a).abs().max(), 0.0, "{} k={k}", spec.name);
            }
        }
    }

    #[test]
    fn heisenberg_functions_are_harmonic() {
        let op = invariant_matrix(&builtin_model("heisenberg3").unwrap(), &Eps::Finite(q(1, 1)), 0).unwrap();
        assert_eq!(op.matrix, vec![vec![Rational::zero()]]);
        assert_eq!(garding_constant(&op), 0.0);
    }

    #[test]
    fn hopf_adiabatic_one_form_snapshot() {
        let op = invariant_matrix(&builtin_model("hopf_s3").unwrap(), &Eps::Infinite, 1).unwrap();
        let z = Rational::zero;
        let expect = vec![vec![q(-4, 1), z(), z()], vec![z(), q(-4, 1), z()], vec![z(), z(), z()]];
        assert_eq!(op.matrix, expect);
    }

    #[test]
    fn heat_at_zero_is_identity_and_rejects_negative_time() {
        let op = invariant_matrix(&builtin_model("hopf_s3").unwrap(), &Eps::Finite(q(2, 1)), 1).unwrap();
        let a = [0.3, -1.0, 2.0];
        let b = heat_apply(&op, 0.0, &a).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-15));
        assert_eq!(heat_apply(&op, -1.0, &a), Err(SpectralError::NegativeTime(-1.0)));
        assert!(matches!(heat_apply(&op, 1.0, &a[..2]), Err(SpectralError::Length { .. })));
    }

    #[test]
    fn semigroup_law_and_gronwall_bound() {
        for spec in homogeneous_models() {
            for k in 0..=spec.dim() {
                let op = invariant_matrix(&spec, &Eps::Finite(q(1, 2)), k).unwrap();
                let a: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.7).sin() + 0.1).collect();
                let direct = heat_apply(&op, 1.0, &a).unwrap();
                let split = heat_apply(&op, 0.7, &heat_apply(&op, 0.3, &a).unwrap()).unwrap();
                let res = direct.iter().zip(&split).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                assert!(res <= 1e-10, "{} k={k} {res}", spec.name);
                let kk = garding_constant(&op);
                for t in [0.5, 1.0, 3.0] {
                    let at = heat_apply(&op, t, &a).unwrap();
                    assert!(op.norm(&at) <= (kk * t).exp() * op.norm(&a) * (1.0 + 1e-12) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn matrix_symmetry_tracks_yang_mills() {
        for spec in homogeneous_models() {
            let geo: Geometry<Rational> = Geometry::new(&spec);
            let ym = geo.is_yang_mills().unwrap();
            for k in 0..=spec.dim() {
                let op = invariant_matrix(&spec, &Eps::Finite(q(3, 1)), k).unwrap();
                assert_eq!(op.is_symmetric(), ym, "{} k={k}", spec.name);
            }
        }
        let reg = ModelRegistry::builtin();
        for name in reg.names() {
            let geo: Geometry<Rational> = Geometry::new(&reg.build(name).unwrap());
            assert_eq!(zero_order_symmetric(&geo, &q(2, 1)).unwrap(), geo.is_yang_mills().unwrap(), "{name}");
        }
    }

    #[test]
    fn non_homogeneous_models_are_rejected() {
        let spec = builtin_model("hopf_s5").unwrap();
        assert!(matches!(invariant_matrix(&spec, &Eps::Infinite, 1), Err(SpectralError::NotHomogeneous(_))));
    }

    #[test]
    fn hopf_auto_epsilon_and_constant() {
        let geo: Geometry<Rational> = Geometry::new(&builtin_model("hopf_s3").unwrap());
        let (eps, c) = auto_epsilon(&geo).unwrap().unwrap();
        assert_eq!(eps, q(2, 1));
        assert!((c - 1.0).abs() < 1e-12);
        for e in [1i64, 4, 8] {
            let expect = (4.0 - 4.0 / e as f64).min(2.0 / e as f64);
            assert!((closed_one_form_constant(&geo, &q(e, 1)).unwrap() - expect).abs() < 1e-12);
        }
        let heis: Geometry<Rational> = Geometry::new(&builtin_model("heisenberg3").unwrap());
        assert_eq!(auto_epsilon(&heis).unwrap(), None);
    }

    #[test]
    fn nullspace_vectors_are_in_the_kernel() {
        let rows = vec![vec![q(1, 1), q(2, 1), q(3, 1)], vec![q(2, 1), q(4, 1), q(6, 1)]];
        let ns = rational_nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            for r in &rows {
                assert!(r.iter().zip(&v).fold(Rational::zero(), |s, (a, b)| s + a.clone() * b.clone()).is_zero());
            }
        }
    }

    #[test]
    fn hopf_decay_is_confirmed_and_heisenberg_is_not() {
        let r = closed_form_decay(&builtin_model("hopf_s3").unwrap(), &q(2, 1), 1).unwrap();
        assert_eq!(r.status, DecayStatus::Confirmed);
        assert!(r.gap_all >= r.c_eps.unwrap() - 1e-9 && r.gap_closed >= r.c_eps.unwrap() - 1e-9);
        let h = closed_form_decay(&builtin_model("heisenberg3").unwrap(), &q(2, 1), 1).unwrap();
        assert!(matches!(h.status, DecayStatus::NoConclusion(_)));
        assert_eq!(h.closed_dim, 2);
        assert!(h.exactness_residual <= EXACTNESS_TOL);
    }

    #[test]
    fn verdicts_match_known_betti_numbers() {
        let v = cohomology_verdict(&builtin_model("hopf_s3").unwrap()).unwrap();
        assert_eq!(v.status(1), Some(DegreeStatus::Vanishes));
        assert_eq!(v.status(2), Some(DegreeStatus::Vanishes));
        assert_eq!(v.status(0), Some(DegreeStatus::NoConclusion));
        let nil = cohomology_verdict(&builtin_model("heisenberg3_nilmanifold").unwrap()).unwrap();
        assert!(nil.degrees.iter().all(|d| d.status == DegreeStatus::NoConclusion));
        let open = cohomology_verdict(&builtin_model("heisenberg3").unwrap()).unwrap();
        assert!(open.degrees[1].certificate.starts_with("compactness not asserted"));
        assert!(v.notes.iter().any(|n| n == HODGE_NOTE));
    }
}
