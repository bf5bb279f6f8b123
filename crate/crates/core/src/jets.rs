//! Frame jets.
//!
//! A [`Jet`] stores the values at the anchor point of `E_{w_1} ⋯ E_{w_k} f`
//! for normally ordered words `w_1 ≤ … ≤ w_k` over the frame symbols
//! (`X_1 < … < X_n < Z_1 < … < Z_m`), up to a truncation order. Any other
//! word is brought to normal order with the bracket relations
//! `[E_a, E_b] = Σ_c C_ab^c E_c`, whose coefficients are jets themselves.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exterior::Coeff;
use crate::scalar::Scalar;

/// Order assigned to jets that are constant to all orders.
pub const CONST_ORDER: usize = 1 << 20;

pub type Word = Vec<u8>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JetError {
    #[error("jet order exhausted: need {needed}, have {available}")]
    OrderExhausted { needed: usize, available: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    order: usize,
    comps: BTreeMap<Word, S>,
}

impl<S: Scalar> Jet<S> {
    /// A jet constant to all orders.
    pub fn constant(value: S) -> Self {
        let mut comps = BTreeMap::new();
        if !value.is_zero() {
            comps.insert(Word::new(), value);
        }
        Jet { order: CONST_ORDER, comps }
    }

    pub fn zero_const() -> Self {
        Jet { order: CONST_ORDER, comps: BTreeMap::new() }
    }

    /// A jet whose nonempty components are all zero, truncated at `order`.
    pub fn constant_with_order(value: S, order: usize) -> Self {
        let mut j = Self::constant(value);
        j.order = order;
        j
    }

    /// Builds a jet from components; words are sorted, and repeated words
    /// must agree.
    pub fn from_components(order: usize, comps: impl IntoIterator<Item = (Word, S)>) -> Self {
        let mut map = BTreeMap::new();
        for (mut w, v) in comps {
            w.sort_unstable();
            if w.len() <= order && !v.is_zero() {
                map.insert(w, v);
            }
        }
        Jet { order, comps: map }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_constant_to_all_orders(&self) -> bool {
        self.order >= CONST_ORDER && self.comps.keys().all(|w| w.is_empty())
    }

    /// True when every nonempty component vanishes.
    pub fn is_locally_constant(&self) -> bool {
        self.comps.keys().all(|w| w.is_empty())
    }

    pub fn value(&self) -> S {
        self.comps.get(&Word::new()).cloned().unwrap_or_else(S::zero)
    }

    /// Component at a normally ordered word (zero when absent).
    pub fn get(&self, word: &[u8]) -> S {
        self.comps.get(word).cloned().unwrap_or_else(S::zero)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.comps.iter()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet {
            order,
            comps: self.comps.iter().filter(|(w, _)| w.len() <= order).map(|(w, v)| (w.clone(), v.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Jet { order: self.order, comps: BTreeMap::new() };
        }
        Jet { order: self.order, comps: self.comps.iter().map(|(w, v)| (w.clone(), c.clone() * v.clone())).collect() }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        Jet::from_components(self.order, self.comps.iter().map(|(w, v)| (w.clone(), f(v))))
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.comps.values().map(|v| v.as_f64().abs()).fold(0.0, f64::max)
    }

    /// Deterministic random jet: every component is an integer in `-4..=4`.
    pub fn random(dim: usize, order: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(dim, order, &mut rng)
    }

    pub fn random_with(dim: usize, order: usize, rng: &mut impl Rng) -> Self {
        let comps = sorted_words(dim, order).into_iter().map(|w| {
            // nonzero, so random jets are generic
            let v: i64 = rng.gen_range(1..=16) * if rng.gen_bool(0.5) { 1 } else { -1 };
            (w, S::from_i64(v))
        });
        Self::from_components(order, comps)
    }

    fn multiply(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut comps: BTreeMap<Word, S> = BTreeMap::new();
        for (u, fu) in &self.comps {
            for (v, gv) in &other.comps {
                if u.len() + v.len() > order {
                    continue;
                }
                let w = merge_sorted(u, v);
                let mult = split_count(&w, u);
                let term = S::from_i64(mult as i64) * fu.clone() * gv.clone();
                let entry = comps.entry(w).or_insert_with(S::zero);
                *entry = entry.clone() + term;
            }
        }
        comps.retain(|_, v| !v.is_zero());
        Jet { order, comps }
    }
}

impl<S: Scalar> Coeff for Jet<S> {
    fn zero() -> Self {
        Jet::zero_const()
    }

    fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut comps = self.comps.clone();
        for (w, v) in &other.comps {
            let entry = comps.entry(w.clone()).or_insert_with(S::zero);
            *entry = entry.clone() + v.clone();
        }
        comps.retain(|w, v| !v.is_zero() && w.len() <= order);
        Jet { order, comps }
    }

    fn neg(&self) -> Self {
        Jet { order: self.order, comps: self.comps.iter().map(|(w, v)| (w.clone(), -v.clone())).collect() }
    }

    fn mul(&self, other: &Self) -> Self {
        // fast paths for constants
        if self.comps.is_empty() || other.comps.is_empty() {
            return Jet { order: self.order.min(other.order), comps: BTreeMap::new() };
        }
        if self.is_constant_to_all_orders() {
            let mut out = other.scale(&self.value());
            out.order = other.order;
            return out;
        }
        if other.is_constant_to_all_orders() {
            let mut out = self.scale(&other.value());
            out.order = self.order;
            return out;
        }
        self.multiply(other)
    }
}

fn merge_sorted(u: &[u8], v: &[u8]) -> Word {
    let mut out = Vec::with_capacity(u.len() + v.len());
    out.extend_from_slice(u);
    out.extend_from_slice(v);
    out.sort_unstable();
    out
}

/// Number of position subsets `S` of the sorted word `w` with `w_S = u`.
fn split_count(w: &[u8], u: &[u8]) -> u64 {
    let mut total = 1u64;
    let mut i = 0;
    while i < w.len() {
        let sym = w[i];
        let cw = w[i..].iter().take_while(|&&x| x == sym).count();
        let cu = u.iter().filter(|&&x| x == sym).count();
        total *= binomial(cw as u64, cu as u64);
        i += cw;
    }
    total
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// All normally ordered words over `dim` symbols of length `≤ max_len`.
pub fn sorted_words(dim: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::new()];
    let mut frontier = vec![Word::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            let start = w.last().copied().unwrap_or(0);
            for s in start..dim as u8 {
                let mut nw = w.clone();
                nw.push(s);
                next.push(nw);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Which out-of-order adjacent pair the rewrite resolves first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteStrategy {
    FirstDescent,
    LastDescent,
}

/// Bracket relations of an anchored frame: `[E_a, E_b] = Σ_c C_ab^c E_c`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameAlgebra<S> {
    dim: usize,
    brackets: Vec<Jet<S>>,
    constrained: bool,
}

impl<S: Scalar> FrameAlgebra<S> {
    /// `brackets[(a * dim + b) * dim + c] = C_ab^c`.
    pub fn new(dim: usize, brackets: Vec<Jet<S>>) -> Self {
        assert_eq!(brackets.len(), dim * dim * dim);
        FrameAlgebra { dim, brackets, constrained: true }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bracket(&self, a: usize, b: usize, c: usize) -> &Jet<S> {
        &self.brackets[(a * self.dim + b) * self.dim + c]
    }

    pub fn brackets(&self) -> &[Jet<S>] {
        &self.brackets
    }

    pub fn is_constant(&self) -> bool {
        self.brackets.iter().all(|j| j.is_locally_constant())
    }

    /// Smallest truncation order among non-constant structure jets.
    pub fn structure_order(&self) -> usize {
        self.brackets
            .iter()
            .filter(|j| !j.is_locally_constant())
            .map(|j| j.order())
            .min()
            .unwrap_or(CONST_ORDER)
    }

    pub fn is_constrained(&self) -> bool {
        self.constrained
    }

    /// A copy that treats frame derivatives as commuting. Only meant as a
    /// negative control: `d² = 0` fails under it.
    pub fn without_constraints(&self) -> Self {
        FrameAlgebra { constrained: false, ..self.clone() }
    }

    /// Value at the point of `E_{u_1} ⋯ E_{u_k} f` for an arbitrary word.
    pub fn eval(&self, word: &[u8], f: &Jet<S>) -> Result<S, JetError> {
        self.eval_with(word, f, RewriteStrategy::FirstDescent)
    }

    pub fn eval_with(&self, word: &[u8], f: &Jet<S>, strategy: RewriteStrategy) -> Result<S, JetError> {
        if word.len() > f.order {
            return Err(JetError::OrderExhausted { needed: word.len(), available: f.order });
        }
        if f.comps.is_empty() || (!word.is_empty() && f.is_locally_constant()) {
            return Ok(S::zero());
        }
        let descent = match strategy {
            RewriteStrategy::FirstDescent => (0..word.len().saturating_sub(1)).find(|&i| word[i] > word[i + 1]),
            RewriteStrategy::LastDescent => (0..word.len().saturating_sub(1)).rev().find(|&i| word[i] > word[i + 1]),
        };
        let Some(i) = descent else {
            return Ok(f.get(word));
        };
        if !self.constrained {
            let mut sorted = word.to_vec();
            sorted.sort_unstable();
            return Ok(f.get(&sorted));
        }
        let (a, b) = (word[i] as usize, word[i + 1] as usize);
        let mut swapped = word.to_vec();
        swapped.swap(i, i + 1);
        let mut total = self.eval_with(&swapped, f, strategy)?;

        let prefix = &word[..i];
        let suffix = &word[i + 2..];
        for c in 0..self.dim {
            let coeff = self.bracket(a, b, c);
            if coeff.comps.is_empty() {
                continue;
            }
            if coeff.is_locally_constant() {
                let mut w = prefix.to_vec();
                w.push(c as u8);
                w.extend_from_slice(suffix);
                total = total + coeff.value() * self.eval_with(&w, f, strategy)?;
                continue;
            }
            // Leibniz over the prefix: E_prefix (C · E_c E_suffix f)
            let p = prefix.len();
            for mask in 0u32..(1u32 << p) {
                let on: Vec<u8> = (0..p).filter(|k| mask & (1 << k) != 0).map(|k| prefix[k]).collect();
                let mut off: Vec<u8> = (0..p).filter(|k| mask & (1 << k) == 0).map(|k| prefix[k]).collect();
                let cval = self.eval_with(&on, coeff, strategy)?;
                if cval.is_zero() {
                    continue;
                }
                off.push(c as u8);
                off.extend_from_slice(suffix);
                total = total + cval * self.eval_with(&off, f, strategy)?;
            }
        }
        Ok(total)
    }

    /// The jet of `E_s f`, one order lower than `f`.
    pub fn frame_derivative(&self, s: usize, f: &Jet<S>) -> Result<Jet<S>, JetError> {
        if f.order == 0 {
            return Err(JetError::OrderExhausted { needed: 1, available: 0 });
        }
        let order = if f.order >= CONST_ORDER { CONST_ORDER } else { f.order - 1 };
        if f.is_locally_constant() {
            return Ok(Jet { order, comps: BTreeMap::new() });
        }
        let mut comps = BTreeMap::new();
        for w in sorted_words(self.dim, order) {
            let mut full = w.clone();
            full.push(s as u8);
            let v = self.eval(&full, f)?;
            if !v.is_zero() {
                comps.insert(w, v);
            }
        }
        Ok(Jet { order, comps })
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> FrameAlgebra<T> {
        FrameAlgebra {
            dim: self.dim,
            brackets: self.brackets.iter().map(|j| j.map_scalar(f)).collect(),
            constrained: self.constrained,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    /// Heisenberg algebra: [X_1, X_2] = Z.
    fn heisenberg() -> FrameAlgebra<Rational> {
        let dim = 3;
        let mut br = vec![Jet::zero_const(); 27];
        br[(0 * dim + 1) * dim + 2] = Jet::constant(q(1));
        br[(1 * dim + 0) * dim + 2] = Jet::constant(q(-1));
        FrameAlgebra::new(dim, br)
    }

    #[test]
    fn constant_jet_has_zero_derivative() {
        let alg = heisenberg();
        let c = Jet::constant(q(7));
        let d = alg.frame_derivative(0, &c).unwrap();
        assert!(Coeff::is_zero(&d));
    }

    #[test]
    fn heisenberg_commutator_gives_vertical_derivative() {
        let alg = heisenberg();
        let f: Jet<Rational> = Jet::random(3, 3, 42);
        let x1x2 = alg.eval(&[0, 1], &f).unwrap();
        let x2x1 = alg.eval(&[1, 0], &f).unwrap();
        assert_eq!(x1x2 - x2x1, f.get(&[2]));
    }

    #[test]
    fn random_jets_are_seed_deterministic() {
        let a: Jet<Rational> = Jet::random(3, 3, 42);
        let b: Jet<Rational> = Jet::random(3, 3, 42);
        let c: Jet<Rational> = Jet::random(3, 3, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn derivative_order_bookkeeping() {
        let alg = heisenberg();
        let f: Jet<Rational> = Jet::random(3, 1, 1);
        let df = alg.frame_derivative(0, &f).unwrap();
        assert_eq!(df.order(), 0);
        assert_eq!(
            alg.frame_derivative(1, &df),
            Err(JetError::OrderExhausted { needed: 1, available: 0 })
        );
    }

    #[test]
    fn product_counts_repeated_symbols() {
        // f = g = x near 0 with X_1 x = 1: (x²) has X_1 X_1 (x²) = 2
        let x = Jet::from_components(2, vec![(vec![0u8], q(1))]);
        let sq = Coeff::mul(&x, &x);
        assert_eq!(sq.get(&[0, 0]), q(2));
        assert_eq!(sq.get(&[0]), q(0));
    }

    #[test]
    fn sorted_word_count() {
        // multisets of size ≤ 2 over 3 symbols: 1 + 3 + 6
        assert_eq!(sorted_words(3, 2).len(), 10);
    }
}
