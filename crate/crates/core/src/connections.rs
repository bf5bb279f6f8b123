//! The Bott connection, the ε-families `∇^ε` and `∇̂^ε`, torsion, the
//! J-map and covariant derivatives of jet-valued forms and tensors.

use std::fmt;

use crate::exterior::{Coeff, Form, MixedTensor, MultiIndex};
use crate::frames::FrameSpec;
use crate::jets::{FrameAlgebra, Jet, JetError};
use crate::scalar::{parse_scalar, Scalar};

/// A form with jet coefficients.
pub type FormField<S> = Form<Jet<S>>;

/// Vertical scale of the canonical variation `g_ε = g_H ⊕ (1/ε) g_V`.
#[derive(Clone, Debug, PartialEq)]
pub enum Eps<S> {
    Finite(S),
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EpsError {
    #[error("eps must be positive, got {0}")]
    NonPositive(String),
    #[error("unreadable eps '{0}'")]
    Unreadable(String),
}

impl<S: Scalar> Eps<S> {
    pub fn finite(v: S) -> Result<Self, EpsError> {
        if v.as_f64() <= 0.0 {
            return Err(EpsError::NonPositive(v.to_string()));
        }
        Ok(Eps::Finite(v))
    }

    pub fn parse(text: &str) -> Result<Self, EpsError> {
        let t = text.trim();
        if matches!(t, "inf" | "infinity" | "∞") {
            return Ok(Eps::Infinite);
        }
        let v: S = parse_scalar(t).ok_or_else(|| EpsError::Unreadable(t.to_string()))?;
        Self::finite(v)
    }

    /// `1/ε`, zero at infinity.
    pub fn inv(&self) -> S {
        match self {
            Eps::Finite(v) => S::one() / v.clone(),
            Eps::Infinite => S::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Eps::Finite(_))
    }

    /// Weight of a vertical direction in `g_ε` (`1/ε`), or `None` at infinity.
    pub fn vertical_weight(&self) -> Option<S> {
        match self {
            Eps::Finite(v) => Some(S::one() / v.clone()),
            Eps::Infinite => None,
        }
    }

    /// The form-side weight `ε` per vertical slot used by `⟨·,·⟩_ε`.
    pub fn value(&self) -> Option<&S> {
        match self {
            Eps::Finite(v) => Some(v),
            Eps::Infinite => None,
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Eps<T> {
        match self {
            Eps::Finite(v) => Eps::Finite(f(v)),
            Eps::Infinite => Eps::Infinite,
        }
    }
}

impl<S: Scalar> fmt::Display for Eps<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Eps::Finite(v) => write!(f, "{v}"),
            Eps::Infinite => write!(f, "inf"),
        }
    }
}

/// Frame components `t[(a*dim + b)*dim + c]` of a vector-valued bilinear
/// map `(E_a, E_b) ↦ Σ_c t_ab^c E_c`. Connection coefficients use the
/// same layout with `∇_{E_a} E_b = Σ_c Γ_ab^c E_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<S> {
    dim: usize,
    comps: Vec<Jet<S>>,
}

pub type ConnectionCoeffs<S> = Tensor3<S>;
pub type TorsionTensor<S> = Tensor3<S>;
/// `⟨J_{E_a} E_b, E_c⟩` stored at `(a, b, c)`.
pub type JMap<S> = Tensor3<S>;

impl<S: Scalar> Tensor3<S> {
    pub fn zero(dim: usize) -> Self {
        Tensor3 { dim, comps: vec![Jet::zero_const(); dim * dim * dim] }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> Jet<S>) -> Self {
        let mut comps = Vec::with_capacity(dim * dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    comps.push(f(a, b, c));
                }
            }
        }
        Tensor3 { dim, comps }
    }

    pub fn try_from_fn(
        dim: usize,
        mut f: impl FnMut(usize, usize, usize) -> Result<Jet<S>, JetError>,
    ) -> Result<Self, JetError> {
        let mut comps = Vec::with_capacity(dim * dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    comps.push(f(a, b, c)?);
                }
            }
        }
        Ok(Tensor3 { dim, comps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &Jet<S> {
        &self.comps[(a * self.dim + b) * self.dim + c]
    }

    pub fn value(&self, a: usize, b: usize, c: usize) -> S {
        self.get(a, b, c).value()
    }

    pub fn add(&self, other: &Self) -> Self {
        Tensor3 { dim: self.dim, comps: self.comps.iter().zip(&other.comps).map(|(x, y)| x.add(y)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Tensor3 { dim: self.dim, comps: self.comps.iter().zip(&other.comps).map(|(x, y)| x.sub(y)).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        Tensor3 { dim: self.dim, comps: self.comps.iter().map(|x| x.scale(c)).collect() }
    }

    /// `(a, b, c) ↦ t_ba^c`.
    pub fn swap_args(&self) -> Self {
        Tensor3::from_fn(self.dim, |a, b, c| self.get(b, a, c).clone())
    }

    pub fn is_zero_at_point(&self) -> bool {
        self.comps.iter().all(|j| j.value().is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Coeff::is_zero)
    }

    /// Largest component value at the point.
    pub fn max_abs_at_point(&self) -> f64 {
        self.comps.iter().map(|j| j.value().as_f64().abs()).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: usize) -> Self {
        Tensor3 { dim: self.dim, comps: self.comps.iter().map(|j| j.truncate(order)).collect() }
    }

    /// `t(X, Y)` for constant-coefficient vectors given by component lists.
    pub fn apply_at_point(&self, x: &[S], y: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim];
        for a in 0..self.dim {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..self.dim {
                if y[b].is_zero() {
                    continue;
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o = o.clone() + x[a].clone() * y[b].clone() * self.value(a, b, c);
                }
            }
        }
        out
    }
}

/// Frame data shared by all connection constructions: the bracket algebra
/// over the chosen scalar, plus the splitting.
#[derive(Clone, Debug)]
pub struct Geometry<S> {
    pub n: usize,
    pub m: usize,
    pub alg: FrameAlgebra<S>,
    pub bott: ConnectionCoeffs<S>,
    pub torsion: TorsionTensor<S>,
    pub j: JMap<S>,
}

impl<S: Scalar> Geometry<S> {
    pub fn new(spec: &FrameSpec) -> Self {
        Self::from_algebra(spec.n, spec.m, spec.algebra().map_scalar(S::from_rational))
    }

    pub fn from_algebra(n: usize, m: usize, alg: FrameAlgebra<S>) -> Self {
        let bott = bott_connection(n, &alg);
        let torsion = torsion(&bott, &alg);
        let j = j_map(n, &torsion);
        Geometry { n, m, alg, bott, torsion, j }
    }

    /// The same geometry with commuting frame derivatives (negative control).
    pub fn without_constraints(&self) -> Self {
        Geometry { alg: self.alg.without_constraints(), ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn is_horizontal(&self, slot: usize) -> bool {
        slot < self.n
    }

    pub fn bracket(&self, a: usize, b: usize, c: usize) -> &Jet<S> {
        self.alg.bracket(a, b, c)
    }

    /// `∇^ε_X Y = ∇_X Y − T(X,Y) + (1/ε) J_Y X`.
    pub fn epsilon_connection(&self, eps: &Eps<S>) -> ConnectionCoeffs<S> {
        let k = eps.inv();
        Tensor3::from_fn(self.dim(), |a, b, c| {
            let mut g = self.bott.get(a, b, c).sub(self.torsion.get(a, b, c));
            if !k.is_zero() {
                g = g.add(&self.j.get(b, a, c).scale(&k));
            }
            g
        })
    }

    /// `∇̂^ε_X Y = ∇_X Y + (1/ε) J_X Y`.
    pub fn adjoint_connection(&self, eps: &Eps<S>) -> ConnectionCoeffs<S> {
        let k = eps.inv();
        Tensor3::from_fn(self.dim(), |a, b, c| {
            let g = self.bott.get(a, b, c).clone();
            if k.is_zero() {
                g
            } else {
                g.add(&self.j.get(a, b, c).scale(&k))
            }
        })
    }

    /// Levi-Civita connection of `g` in the orthonormal frame.
    pub fn levi_civita(&self) -> ConnectionCoeffs<S> {
        koszul(&self.alg)
    }

    /// Horizontal divergence of the torsion as `(b, c) ↦ ⟨δ_H T(E_b), E_c⟩`,
    /// with `δ_H T(X) = Σ_j (∇_{X_j} T)(X_j, X)`. This sign is the one for
    /// which the one-form Laplacian, its Bochner identity and the Ricci
    /// curvature of `g_ε` take their stated forms.
    pub fn horizontal_divergence_torsion(&self) -> Result<Vec<Vec<Jet<S>>>, JetError> {
        let dim = self.dim();
        let mut out = vec![vec![Jet::zero_const(); dim]; dim];
        for jx in 0..self.n {
            let nt = covariant_tensor3(&self.alg, &self.bott, jx, &self.torsion)?;
            for b in 0..dim {
                for c in 0..dim {
                    out[b][c] = out[b][c].add(nt.get(jx, b, c));
                }
            }
        }
        Ok(out)
    }

    pub fn is_yang_mills(&self) -> Result<bool, JetError> {
        Ok(self.horizontal_divergence_torsion()?.iter().flatten().all(|j| j.value().is_zero()))
    }
}

/// `2Γ_ab^c = C_ab^c − C_ac^b − C_bc^a` for an orthonormal frame.
pub fn koszul<S: Scalar>(alg: &FrameAlgebra<S>) -> ConnectionCoeffs<S> {
    let half = S::from_ratio(1, 2);
    Tensor3::from_fn(alg.dim(), |a, b, c| {
        alg.bracket(a, b, c).sub(alg.bracket(a, c, b)).sub(alg.bracket(b, c, a)).scale(&half)
    })
}

/// The Bott connection: projected Levi-Civita on `H×H` and `V×V`, projected
/// brackets on the mixed cases.
pub fn bott_connection<S: Scalar>(n: usize, alg: &FrameAlgebra<S>) -> ConnectionCoeffs<S> {
    let lc = koszul(alg);
    Tensor3::from_fn(alg.dim(), |a, b, c| {
        let (ha, hb, hc) = (a < n, b < n, c < n);
        match (ha, hb) {
            (true, true) | (false, false) => {
                if hb == hc {
                    lc.get(a, b, c).clone()
                } else {
                    Jet::zero_const()
                }
            }
            // ∇_Z X = π_H [Z, X], ∇_X Z = π_V [X, Z]
            _ => {
                if hb == hc {
                    alg.bracket(a, b, c).clone()
                } else {
                    Jet::zero_const()
                }
            }
        }
    })
}

/// `T_ab^c = Γ_ab^c − Γ_ba^c − C_ab^c`.
pub fn torsion<S: Scalar>(conn: &ConnectionCoeffs<S>, alg: &FrameAlgebra<S>) -> TorsionTensor<S> {
    Tensor3::from_fn(alg.dim(), |a, b, c| conn.get(a, b, c).sub(conn.get(b, a, c)).sub(alg.bracket(a, b, c)))
}

/// `⟨J_Z X, Y⟩ = ⟨Z, T(X, Y)⟩` for vertical `Z`; `J` vanishes on horizontal
/// arguments and on vertical inputs.
pub fn j_map<S: Scalar>(n: usize, t: &TorsionTensor<S>) -> JMap<S> {
    Tensor3::from_fn(t.dim(), |a, b, c| {
        if a >= n && b < n && c < n {
            t.get(b, c, a).clone()
        } else {
            Jet::zero_const()
        }
    })
}

/// The connection whose covariant derivative is `∇̂_X Y = ∇_Y X + [X, Y]`.
pub fn adjoint_of<S: Scalar>(conn: &ConnectionCoeffs<S>, alg: &FrameAlgebra<S>) -> ConnectionCoeffs<S> {
    Tensor3::from_fn(alg.dim(), |a, b, c| conn.get(b, a, c).add(alg.bracket(a, b, c)))
}

/// Residual of `∇ g_w = 0` for the diagonal metric with weights `w`:
/// the largest `|w_c Γ_ab^c + w_b Γ_ac^b|` at the point.
pub fn metric_residual<S: Scalar>(conn: &ConnectionCoeffs<S>, weights: &[S]) -> f64 {
    let dim = conn.dim();
    let mut worst = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let r = weights[c].clone() * conn.value(a, b, c) + weights[b].clone() * conn.value(a, c, b);
                worst = worst.max(r.as_f64().abs());
            }
        }
    }
    worst
}

/// Whether every `∇_a E_b` stays in the block of `E_b`.
pub fn preserves_splitting<S: Scalar>(conn: &ConnectionCoeffs<S>, n: usize) -> bool {
    let dim = conn.dim();
    (0..dim).all(|a| (0..dim).all(|b| (0..dim).all(|c| (b < n) == (c < n) || Coeff::is_zero(conn.get(a, b, c)))))
}

/// Components `(b, c)` of `∇_{E_a}(Σ_i X_i ⊗ X_i)` at the point.
pub fn cometric_derivative<S: Scalar>(conn: &ConnectionCoeffs<S>, n: usize, a: usize) -> Vec<Vec<S>> {
    let dim = conn.dim();
    let mut out = vec![vec![S::zero(); dim]; dim];
    for i in 0..n {
        for c in 0..dim {
            let g = conn.value(a, i, c);
            out[c][i] = out[c][i].clone() + g.clone();
            out[i][c] = out[i][c].clone() + g;
        }
    }
    out
}

/// Frame derivative of each coefficient of a form.
pub fn derive_form<S: Scalar>(alg: &FrameAlgebra<S>, s: usize, alpha: &FormField<S>) -> Result<FormField<S>, JetError> {
    alpha.try_map(|c| alg.frame_derivative(s, c))
}

/// The endomorphism `θ^c ↦ −Σ_b Γ_ab^c θ^b` of covectors, as an element of
/// `Ψ_(1,1)`.
pub fn coframe_action<S: Scalar>(conn: &ConnectionCoeffs<S>, a: usize) -> MixedTensor<Jet<S>> {
    let dim = conn.dim();
    let mut t = MixedTensor::zero();
    for b in 0..dim {
        for c in 0..dim {
            let g = conn.get(a, b, c);
            if !Coeff::is_zero(g) {
                t.add_term(MultiIndex::single(b), MultiIndex::single(c), g.neg());
            }
        }
    }
    t
}

/// `∇_{E_a} α` for a jet-valued form.
pub fn covariant_form<S: Scalar>(
    alg: &FrameAlgebra<S>,
    conn: &ConnectionCoeffs<S>,
    a: usize,
    alpha: &FormField<S>,
) -> Result<FormField<S>, JetError> {
    let d = derive_form(alg, a, alpha)?;
    if alpha.degree() == 0 {
        return Ok(d);
    }
    let rot = coframe_action(conn, a).apply(alpha);
    Ok(d.add(&rot))
}

/// `∇_v α` for a jet-valued direction `v = Σ_c v^c E_c`.
pub fn covariant_form_along<S: Scalar>(
    alg: &FrameAlgebra<S>,
    conn: &ConnectionCoeffs<S>,
    v: &[Jet<S>],
    alpha: &FormField<S>,
) -> Result<FormField<S>, JetError> {
    let mut out = FormField::zero(alpha.degree());
    for (c, vc) in v.iter().enumerate() {
        if Coeff::is_zero(vc) {
            continue;
        }
        let d = covariant_form(alg, conn, c, alpha)?;
        out = out.add(&d.scale(vc));
    }
    Ok(out)
}

/// `(∇_{E_a} t)(E_b, E_c)` components for a vector-valued bilinear map.
pub fn covariant_tensor3<S: Scalar>(
    alg: &FrameAlgebra<S>,
    conn: &ConnectionCoeffs<S>,
    a: usize,
    t: &Tensor3<S>,
) -> Result<Tensor3<S>, JetError> {
    let dim = t.dim();
    let mut comps = Vec::with_capacity(dim * dim * dim);
    for b in 0..dim {
        for c in 0..dim {
            for e in 0..dim {
                let mut acc = alg.frame_derivative(a, t.get(b, c, e))?;
                for d in 0..dim {
                    let g = conn.get(a, b, d);
                    if !Coeff::is_zero(g) {
                        acc = acc.sub(&g.mul(t.get(d, c, e)));
                    }
                    let g = conn.get(a, c, d);
                    if !Coeff::is_zero(g) {
                        acc = acc.sub(&g.mul(t.get(b, d, e)));
                    }
                    let g = conn.get(a, d, e);
                    if !Coeff::is_zero(g) {
                        acc = acc.add(&g.mul(t.get(b, c, d)));
                    }
                }
                comps.push(acc);
            }
        }
    }
    Ok(Tensor3 { dim, comps })
}

/// Diagonal weights of `g_ε` on the frame (`1` horizontal, `1/ε` vertical).
pub fn metric_weights<S: Scalar>(n: usize, m: usize, eps: &Eps<S>) -> Option<Vec<S>> {
    let v = eps.vertical_weight()?;
    Some((0..n + m).map(|s| if s < n { S::one() } else { v.clone() }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_model;
    use crate::scalar::Rational;
    use num_traits::Zero;

    fn geo(name: &str) -> Geometry<Rational> {
        Geometry::new(&builtin_model(name).unwrap())
    }

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn heisenberg_bott_is_flat_frame() {
        let g = geo("heisenberg3");
        assert!(g.bott.is_zero());
        // T(X1, X2) = −Z
        assert_eq!(g.torsion.value(0, 1, 2), q(-1));
        // J_Z X1 = −X2, J_Z X2 = X1
        assert_eq!(g.j.value(2, 0, 1), q(-1));
        assert_eq!(g.j.value(2, 1, 0), q(1));
    }

    #[test]
    fn hopf_s3_bott_table() {
        let g = geo("hopf_s3");
        assert_eq!(g.bott.value(2, 0, 1), q(2));
        assert_eq!(g.bott.value(2, 1, 0), q(-2));
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..3 {
                    assert!(Zero::is_zero(&g.bott.value(a, b, c)));
                }
            }
        }
        assert_eq!(g.torsion.value(0, 1, 2), q(-2));
        assert_eq!(g.j.value(2, 0, 1), q(-2));
        // T(Z, X) = 0
        assert!(Zero::is_zero(&g.torsion.value(2, 0, 1)) && Zero::is_zero(&g.torsion.value(2, 1, 0)));
    }

    #[test]
    fn epsilon_family_plug_in() {
        let g = geo("heisenberg3");
        let e1 = Eps::Finite(q(1));
        let nabla = g.epsilon_connection(&e1);
        let hat = g.adjoint_connection(&e1);
        assert_eq!(nabla.value(0, 1, 2), q(1));
        assert!(Zero::is_zero(&hat.value(0, 1, 2)));
        assert_eq!(g.adjoint_connection(&Eps::Infinite), g.bott);
    }

    #[test]
    fn adjoint_pair_has_opposite_torsion() {
        for name in ["heisenberg3", "hopf_s3", "heisenberg5"] {
            let g = geo(name);
            for eps in [Eps::Finite(Rational::from_ratio(1, 4)), Eps::Finite(q(4)), Eps::Infinite] {
                let nabla = g.epsilon_connection(&eps);
                let hat = g.adjoint_connection(&eps);
                let t1 = torsion(&nabla, &g.alg);
                let t2 = torsion(&hat, &g.alg);
                assert!(t1.add(&t2).is_zero(), "{name} {eps}");
                assert_eq!(adjoint_of(&nabla, &g.alg), hat);
                assert_eq!(adjoint_of(&hat, &g.alg), nabla);
            }
        }
    }

    #[test]
    fn eps_parsing() {
        assert_eq!(Eps::<Rational>::parse("inf").unwrap(), Eps::Infinite);
        assert_eq!(Eps::<Rational>::parse("1/4").unwrap(), Eps::Finite(Rational::from_ratio(1, 4)));
        assert!(Eps::<Rational>::parse("0").is_err());
        assert!(Eps::<Rational>::parse("-2").is_err());
    }
}
