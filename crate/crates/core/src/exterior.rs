//! Exterior algebra over an orthonormal adapted frame.
//!
//! Frame slots `0..n` are the horizontal vectors `X_1..X_n`, slots `n..n+m`
//! the vertical vectors `Z_1..Z_m`. A basis monomial of forms (or of
//! multivectors) is a set of frame slots, stored as a bit mask and read in
//! increasing slot order. Forms use the determinant convention,
//! `(θ^I)(E_J) = δ_IJ`, so basis monomials are orthonormal for `g`.

use std::collections::BTreeMap;
use std::fmt;

use crate::scalar::Scalar;

/// Maximum frame dimension supported by the bit-mask encoding.
pub const MAX_DIM: usize = 24;

/// Coefficient ring for forms and mixed tensors: plain scalars or jets.
pub trait Coeff: Clone + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl<S: Scalar> Coeff for S {
    fn zero() -> Self {
        <S as num_traits::Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn mul(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }
    fn sub(&self, other: &Self) -> Self {
        self.clone() - other.clone()
    }
}

/// A strictly increasing set of frame slots, split into horizontal and
/// vertical parts by the horizontal rank `n`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(pub u32);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn single(slot: usize) -> Self {
        debug_assert!(slot < MAX_DIM);
        MultiIndex(1 << slot)
    }

    /// Builds the monomial `E_{s_1} ∧ … ∧ E_{s_k}` in the given order and
    /// returns it normalized together with its sign, or `None` on repeats.
    pub fn from_slots(slots: &[usize]) -> Option<(MultiIndex, i8)> {
        let mut mask = 0u32;
        let mut sign = 1i8;
        for &s in slots {
            let bit = 1u32 << s;
            if mask & bit != 0 {
                return None;
            }
            // moving s left past every larger slot already present
            if (mask >> s).count_ones() % 2 == 1 {
                sign = -sign;
            }
            mask |= bit;
        }
        Some((MultiIndex(mask), sign))
    }

    /// Builds from horizontal indices (0-based within `0..n`) and vertical
    /// indices (0-based within `0..m`).
    pub fn from_parts(n: usize, horizontal: &[usize], vertical: &[usize]) -> Option<(MultiIndex, i8)> {
        let slots: Vec<usize> = horizontal.iter().copied().chain(vertical.iter().map(|v| v + n)).collect();
        Self::from_slots(&slots)
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, slot: usize) -> bool {
        self.0 & (1 << slot) != 0
    }

    pub fn slots(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..MAX_DIM).filter(move |s| mask & (1 << s) != 0)
    }

    pub fn horizontal(self, n: usize) -> Vec<usize> {
        self.slots().filter(|&s| s < n).collect()
    }

    pub fn vertical(self, n: usize) -> Vec<usize> {
        self.slots().filter(|&s| s >= n).map(|s| s - n).collect()
    }

    /// The bi-grade `(i, j)`: number of horizontal and vertical slots.
    pub fn bigrade(self, n: usize) -> (usize, usize) {
        let h = (self.0 & ((1u32 << n) - 1)).count_ones() as usize;
        (h, self.degree() - h)
    }

    /// Sign of `θ^self ∧ θ^other`, or `None` if the sets overlap.
    pub fn wedge(self, other: MultiIndex) -> Option<(MultiIndex, i8)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut inversions = 0u32;
        for s in other.slots() {
            inversions += (self.0 >> (s + 1)).count_ones();
        }
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        Some((MultiIndex(self.0 | other.0), sign))
    }

    /// `ι_{E_slot} θ^self` as (monomial, sign), `None` if `slot ∉ self`.
    pub fn contract(self, slot: usize) -> Option<(MultiIndex, i8)> {
        if !self.contains(slot) {
            return None;
        }
        let before = (self.0 & ((1u32 << slot) - 1)).count_ones();
        let sign = if before % 2 == 0 { 1 } else { -1 };
        Some((MultiIndex(self.0 & !(1 << slot)), sign))
    }

    /// All monomials of the given degree in `dim` slots, in mask order.
    pub fn all_of_degree(dim: usize, degree: usize) -> Vec<MultiIndex> {
        (0u32..(1u32 << dim))
            .filter(|m| m.count_ones() as usize == degree)
            .map(MultiIndex)
            .collect()
    }

    /// All monomials of bi-grade `(i, j)` for ranks `(n, m)`.
    pub fn all_of_bigrade(n: usize, m: usize, i: usize, j: usize) -> Vec<MultiIndex> {
        Self::all_of_degree(n + m, i + j)
            .into_iter()
            .filter(|mi| mi.bigrade(n) == (i, j))
            .collect()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slots: Vec<usize> = self.slots().collect();
        write!(f, "{slots:?}")
    }
}

fn signed<C: Coeff>(c: &C, sign: i8) -> C {
    if sign < 0 {
        c.neg()
    } else {
        c.clone()
    }
}

fn accumulate<C: Coeff>(map: &mut BTreeMap<MultiIndex, C>, key: MultiIndex, value: C) {
    if value.is_zero() {
        return;
    }
    match map.get_mut(&key) {
        Some(slot) => {
            let sum = slot.add(&value);
            if sum.is_zero() {
                map.remove(&key);
            } else {
                *slot = sum;
            }
        }
        None => {
            map.insert(key, value);
        }
    }
}

/// A homogeneous k-form with sparse coefficients over frame monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<C> {
    degree: usize,
    coeffs: BTreeMap<MultiIndex, C>,
}

/// Multivectors share the representation of forms.
pub type MultiVector<C> = Form<C>;

impl<C: Coeff> Form<C> {
    pub fn zero(degree: usize) -> Self {
        Form { degree, coeffs: BTreeMap::new() }
    }

    pub fn scalar(value: C) -> Self {
        Self::monomial(MultiIndex::EMPTY, value)
    }

    pub fn monomial(index: MultiIndex, value: C) -> Self {
        let mut f = Self::zero(index.degree());
        accumulate(&mut f.coeffs, index, value);
        f
    }

    /// The coframe covector `θ^slot` (or frame vector `E_slot`).
    pub fn basis(slot: usize, one: C) -> Self {
        Self::monomial(MultiIndex::single(slot), one)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, index: MultiIndex) -> Option<&C> {
        self.coeffs.get(&index)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `value` to the coefficient of `index`; panics on degree mismatch.
    pub fn add_term(&mut self, index: MultiIndex, value: C) {
        assert_eq!(index.degree(), self.degree, "monomial degree mismatch");
        accumulate(&mut self.coeffs, index, value);
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() && self.degree != other.degree {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            accumulate(&mut out.coeffs, *k, v.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplies every coefficient by `c` from the left.
    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.degree);
        for (k, v) in &self.coeffs {
            accumulate(&mut out.coeffs, *k, c.mul(v));
        }
        out
    }

    pub fn map<D: Coeff>(&self, mut f: impl FnMut(&C) -> D) -> Form<D> {
        let mut out = Form::zero(self.degree);
        for (k, v) in &self.coeffs {
            accumulate(&mut out.coeffs, *k, f(v));
        }
        out
    }

    pub fn try_map<D: Coeff, E>(&self, mut f: impl FnMut(&C) -> Result<D, E>) -> Result<Form<D>, E> {
        let mut out = Form::zero(self.degree);
        for (k, v) in &self.coeffs {
            accumulate(&mut out.coeffs, *k, f(v)?);
        }
        Ok(out)
    }

    /// Exterior product; the result is zero when the degree overflows `dim`.
    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for (ka, va) in &self.coeffs {
            for (kb, vb) in &other.coeffs {
                if let Some((k, sign)) = ka.wedge(*kb) {
                    accumulate(&mut out.coeffs, k, signed(&va.mul(vb), sign));
                }
            }
        }
        out
    }

    /// Interior product `ι_{E_slot}`. Zero forms contract to the zero form of
    /// degree 0.
    pub fn contract(&self, slot: usize) -> Self {
        let mut out = Self::zero(self.degree.saturating_sub(1));
        for (k, v) in &self.coeffs {
            if let Some((kk, sign)) = k.contract(slot) {
                accumulate(&mut out.coeffs, kk, signed(v, sign));
            }
        }
        out
    }

    /// Splits into bi-graded components `(i, j)` for horizontal rank `n`.
    pub fn bigrade_split(&self, n: usize) -> BTreeMap<(usize, usize), Form<C>> {
        let mut out: BTreeMap<(usize, usize), Form<C>> = BTreeMap::new();
        for (k, v) in &self.coeffs {
            out.entry(k.bigrade(n))
                .or_insert_with(|| Form::zero(self.degree))
                .add_term(*k, v.clone());
        }
        if out.is_empty() && self.degree == 0 {
            out.insert((0, 0), self.clone());
        }
        out
    }

    /// Keeps only the bi-grade `(i, j)` component.
    pub fn component(&self, n: usize, grade: (usize, usize)) -> Self {
        let mut out = Self::zero(self.degree);
        for (k, v) in &self.coeffs {
            if k.bigrade(n) == grade {
                out.coeffs.insert(*k, v.clone());
            }
        }
        out
    }
}

impl<S: Scalar> Form<S> {
    /// `⟨a, b⟩_ε = Σ ε^j a_I b_I` over bi-grades `(i, j)`.
    pub fn inner_eps(&self, other: &Self, eps: &S, n: usize) -> Result<S, ExteriorError> {
        if self.degree != other.degree && !(self.is_zero() || other.is_zero()) {
            return Err(ExteriorError::DegreeMismatch(self.degree, other.degree));
        }
        let mut acc = S::zero();
        for (k, v) in &self.coeffs {
            if let Some(w) = other.coeffs.get(k) {
                let (_, j) = k.bigrade(n);
                let mut weight = S::one();
                for _ in 0..j {
                    weight = weight * eps.clone();
                }
                acc = acc + weight * v.clone() * w.clone();
            }
        }
        Ok(acc)
    }

    /// The reference-metric inner product `⟨a, b⟩_g`.
    pub fn inner(&self, other: &Self) -> Result<S, ExteriorError> {
        self.inner_eps(other, &S::one(), 0)
    }

    pub fn norm_sq_eps(&self, eps: &S, n: usize) -> S {
        self.inner_eps(self, eps, n).expect("same degree")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExteriorError {
    #[error("inner product of forms of degree {0} and {1}")]
    DegreeMismatch(usize, usize),
}

/// An element of `Ψ = ∧T*M ⊗ ∧TM`, stored in expanded monomial form
/// `Σ w · θ^I ⊗ E_J`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedTensor<C> {
    terms: BTreeMap<(MultiIndex, MultiIndex), C>,
}

impl<C: Coeff> Default for MixedTensor<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> MixedTensor<C> {
    pub fn zero() -> Self {
        MixedTensor { terms: BTreeMap::new() }
    }

    /// The scalar `1 ∈ Ψ_(0,0)`, acting as the identity.
    pub fn identity(one: C) -> Self {
        let mut t = Self::zero();
        t.add_term(MultiIndex::EMPTY, MultiIndex::EMPTY, one);
        t
    }

    pub fn monomial(form: MultiIndex, vector: MultiIndex, weight: C) -> Self {
        let mut t = Self::zero();
        t.add_term(form, vector, weight);
        t
    }

    /// Builds the tensor `α ⊗ χ` from a form and a multivector.
    pub fn tensor(alpha: &Form<C>, chi: &MultiVector<C>) -> Self {
        let mut t = Self::zero();
        for (a, va) in alpha.terms() {
            for (x, vx) in chi.terms() {
                t.add_term(*a, *x, va.mul(vx));
            }
        }
        t
    }

    pub fn add_term(&mut self, form: MultiIndex, vector: MultiIndex, weight: C) {
        if weight.is_zero() {
            return;
        }
        let key = (form, vector);
        match self.terms.get_mut(&key) {
            Some(slot) => {
                let sum = slot.add(&weight);
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(key, weight);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &C)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((a, x), w) in &other.terms {
            out.add_term(*a, *x, w.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(|w| w.neg())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        self.map(|w| c.mul(w))
    }

    pub fn map<D: Coeff>(&self, mut f: impl FnMut(&C) -> D) -> MixedTensor<D> {
        let mut out = MixedTensor::zero();
        for ((a, x), w) in &self.terms {
            out.add_term(*a, *x, f(w));
        }
        out
    }

    /// Homogeneous component of bi-type `(i, j)` (form degree, vector degree).
    pub fn of_type(&self, i: usize, j: usize) -> Self {
        let mut out = Self::zero();
        for ((a, x), w) in &self.terms {
            if a.degree() == i && x.degree() == j {
                out.add_term(*a, *x, w.clone());
            }
        }
        out
    }

    /// `(α ⊗ χ)* = ♭χ ⊗ ♯α` in the orthonormal frame.
    pub fn star(&self) -> Self {
        let mut out = Self::zero();
        for ((a, x), w) in &self.terms {
            out.add_term(*x, *a, w.clone());
        }
        out
    }

    /// `ι_{E_slot} ν`, contracting the form part.
    pub fn contract_form(&self, slot: usize) -> Self {
        let mut out = Self::zero();
        for ((a, x), w) in &self.terms {
            if let Some((aa, sign)) = a.contract(slot) {
                out.add_term(aa, *x, signed(w, sign));
            }
        }
        out
    }

    /// The operator `C_ν`: for `ν = w θ^I ⊗ E_{j_1} ∧ … ∧ E_{j_l}` with
    /// `j_1 < … < j_l`, `C_ν η = w θ^I ∧ ι_{E_{j_l}} ⋯ ι_{E_{j_1}} η`.
    /// Degree-`k` input is sent to degree `k + i − j`; the result is the zero
    /// form of that degree when every term annihilates the input.
    pub fn apply(&self, eta: &Form<C>) -> Form<C> {
        let mut out: Option<Form<C>> = None;
        for ((a, x), w) in &self.terms {
            if x.degree() > eta.degree() {
                continue;
            }
            let out_degree = eta.degree() + a.degree() - x.degree();
            let acc = out.get_or_insert_with(|| Form::zero(out_degree));
            if acc.degree() != out_degree {
                panic!("apply on a non-homogeneous mixed tensor mixing output degrees");
            }
            for (k, v) in eta.terms() {
                // contract in increasing slot order
                let mut cur = *k;
                let mut sign = 1i8;
                let mut alive = true;
                for s in x.slots() {
                    match cur.contract(s) {
                        Some((kk, sg)) => {
                            cur = kk;
                            sign *= sg;
                        }
                        None => {
                            alive = false;
                            break;
                        }
                    }
                }
                if !alive {
                    continue;
                }
                if let Some((kk, sg)) = a.wedge(cur) {
                    acc.add_term(kk, signed(&w.mul(v), sign * sg));
                }
            }
        }
        out.unwrap_or_else(|| {
            let shift = self
                .terms
                .keys()
                .next()
                .map(|(a, x)| a.degree() as isize - x.degree() as isize)
                .unwrap_or(0);
            Form::zero((eta.degree() as isize + shift).max(0) as usize)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    fn theta(slot: usize) -> Form<Rational> {
        Form::basis(slot, q(1))
    }

    #[test]
    fn wedge_of_basis_covectors() {
        let t12 = theta(0).wedge(&theta(1));
        assert_eq!(t12.get(MultiIndex(0b11)), Some(&q(1)));
        let t21 = theta(1).wedge(&theta(0));
        assert_eq!(t21.get(MultiIndex(0b11)), Some(&q(-1)));
        // α = θ₁ + ν₁ in (n, m) = (2, 1)
        let alpha = theta(0).add(&theta(2));
        assert!(alpha.wedge(&alpha).is_zero());
    }

    #[test]
    fn contraction_examples() {
        let t12 = theta(0).wedge(&theta(1));
        assert_eq!(t12.contract(0), theta(1));
        assert!(t12.contract(2).is_zero());
        assert_eq!(t12.contract(1), theta(0).neg());
    }

    #[test]
    fn apply_identity_and_endomorphism() {
        let one = MixedTensor::identity(q(1));
        let a = theta(0).wedge(&theta(2)).scale(&q(3));
        assert_eq!(one.apply(&a), a);

        // S(θ_0) = 2θ_0 + θ_1, S(θ_1) = -θ_2, S(θ_2) = 0, as Σ S(θ_c) ⊗ E_c
        let mut s = MixedTensor::zero();
        s.add_term(MultiIndex::single(0), MultiIndex::single(0), q(2));
        s.add_term(MultiIndex::single(1), MultiIndex::single(0), q(1));
        s.add_term(MultiIndex::single(2), MultiIndex::single(1), q(-1));
        let a = theta(0).wedge(&theta(1));
        let expected = s
            .apply(&theta(0))
            .wedge(&theta(1))
            .add(&theta(0).wedge(&s.apply(&theta(1))));
        assert_eq!(s.apply(&a), expected);
    }

    #[test]
    fn double_contraction_kills_one_forms() {
        let nu = MixedTensor::monomial(MultiIndex(0b11), MultiIndex(0b11), q(1));
        let out = nu.apply(&theta(0));
        assert!(out.is_zero());
    }

    #[test]
    fn star_swaps_and_is_an_involution() {
        let nu = MixedTensor::monomial(MultiIndex::single(0), MultiIndex::single(1), q(1));
        let star = nu.star();
        assert_eq!(star, MixedTensor::monomial(MultiIndex::single(1), MultiIndex::single(0), q(1)));
        assert_eq!(star.star(), nu);
    }

    #[test]
    fn inner_eps_weights_vertical_degree() {
        let eps = Rational::from_ratio(3, 7);
        let n = 2;
        assert_eq!(theta(0).inner_eps(&theta(0), &eps, n).unwrap(), q(1));
        assert_eq!(theta(2).inner_eps(&theta(2), &eps, n).unwrap(), eps.clone());
        let mixed = theta(0).wedge(&theta(2));
        assert_eq!(mixed.inner_eps(&mixed, &eps, n).unwrap(), eps);
        let err = theta(0).inner_eps(&theta(0).wedge(&theta(1)), &eps, n);
        assert_eq!(err, Err(ExteriorError::DegreeMismatch(1, 2)));
    }

    #[test]
    fn bigrade_split_examples() {
        let n = 2;
        let t12 = theta(0).wedge(&theta(1));
        let split = t12.bigrade_split(n);
        assert_eq!(split.len(), 1);
        assert_eq!(split[&(2, 0)], t12);

        // (n, m) = (2, 2): θ₁∧ν₁ + ν₁∧ν₂
        let a = theta(0).wedge(&theta(2));
        let b = theta(2).wedge(&theta(3));
        let split = a.add(&b).bigrade_split(n);
        assert_eq!(split[&(1, 1)], a);
        assert_eq!(split[&(0, 2)], b);

        let f = Form::scalar(q(5));
        assert_eq!(f.bigrade_split(n)[&(0, 0)], f);
    }

    #[test]
    fn from_slots_sign() {
        assert_eq!(MultiIndex::from_slots(&[1, 0]), Some((MultiIndex(0b11), -1)));
        assert_eq!(MultiIndex::from_slots(&[2, 0, 1]), Some((MultiIndex(0b111), 1)));
        assert_eq!(MultiIndex::from_slots(&[1, 1]), None);
    }
}
