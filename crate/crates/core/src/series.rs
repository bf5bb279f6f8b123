//! Truncated multivariate power series with exact coefficients.
//!
//! Used to derive structure-function jets of frames that are given by
//! explicit vector fields in a coordinate chart around the origin.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::jets::{sorted_words, FrameAlgebra, Jet};
use crate::scalar::{Rational, Scalar};

/// A power series known exactly up to total degree `valid`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    nvars: usize,
    valid: i32,
    terms: BTreeMap<Vec<u8>, Rational>,
}

fn degree(e: &[u8]) -> i32 {
    e.iter().map(|&x| x as i32).sum()
}

impl Series {
    pub fn zero(nvars: usize, valid: i32) -> Self {
        Series { nvars, valid, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, valid: i32, c: Rational) -> Self {
        let mut s = Self::zero(nvars, valid);
        if !c.is_zero() && valid >= 0 {
            s.terms.insert(vec![0; nvars], c);
        }
        s
    }

    pub fn var(nvars: usize, valid: i32, i: usize) -> Self {
        let mut s = Self::zero(nvars, valid);
        if valid >= 1 {
            let mut e = vec![0; nvars];
            e[i] = 1;
            s.terms.insert(e, Rational::one());
        }
        s
    }

    pub fn valid(&self) -> i32 {
        self.valid
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(Rational::zero)
    }

    fn insert_add(&mut self, e: Vec<u8>, c: Rational) {
        if degree(&e) > self.valid {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        // keep zero entries out
    }

    fn cleaned(mut self) -> Self {
        self.terms.retain(|_, v| !v.is_zero());
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let valid = self.valid.min(other.valid);
        let mut out = Series::zero(self.nvars, valid);
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            out.insert_add(e.clone(), c.clone());
        }
        out.cleaned()
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Series::zero(self.nvars, self.valid);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect();
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        // a zero-order-free factor raises the validity of the product
        let low_a = self.terms.keys().map(|e| degree(e)).min();
        let low_b = other.terms.keys().map(|e| degree(e)).min();
        let valid = match (low_a, low_b) {
            (None, _) | (_, None) => self.valid.min(other.valid),
            (Some(la), Some(lb)) => (self.valid + lb).min(other.valid + la),
        };
        let mut out = Series::zero(self.nvars, valid);
        for (ea, ca) in &self.terms {
            let da = degree(ea);
            for (eb, cb) in &other.terms {
                if da + degree(eb) > valid {
                    continue;
                }
                let e: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert_add(e, ca * cb);
            }
        }
        out.cleaned()
    }

    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Series::zero(self.nvars, self.valid - 1);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            out.insert_add(ne, c * Rational::from_i64(e[i] as i64));
        }
        out.cleaned()
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inv(&self) -> Self {
        let c0 = self.constant_term();
        assert!(!c0.is_zero(), "series inverse needs a nonzero constant term");
        let r = self.sub(&Series::constant(self.nvars, self.valid, c0.clone())).scale(&(-c0.recip()));
        // 1/(c0 (1 - r')) = (1/c0) Σ r'^k
        let mut total = Series::constant(self.nvars, self.valid, Rational::one());
        let mut power = total.clone();
        for _ in 0..self.valid.max(0) {
            power = power.mul(&r);
            if power.terms.is_empty() {
                break;
            }
            total = total.add(&power);
        }
        total.scale(&c0.recip())
    }

    /// Square root of a series whose constant term is one.
    pub fn sqrt(&self) -> Self {
        let c0 = self.constant_term();
        assert!(c0.is_one(), "series square root needs constant term one");
        let r = self.sub(&Series::constant(self.nvars, self.valid, c0));
        let mut total = Series::constant(self.nvars, self.valid, Rational::one());
        let mut power = total.clone();
        let mut coeff = Rational::one();
        let half = Rational::from_ratio(1, 2);
        for k in 0..self.valid.max(0) {
            // binomial(1/2, k+1)
            coeff = coeff * (half.clone() - Rational::from_i64(k as i64)) / Rational::from_i64(k as i64 + 1);
            power = power.mul(&r);
            if power.terms.is_empty() {
                break;
            }
            total = total.add(&power.scale(&coeff));
        }
        total
    }
}

/// A frame of vector fields on a chart, `fields[a][mu]` the coefficient of
/// `∂_mu` in `E_a`.
#[derive(Clone, Debug)]
pub struct CoordinateFrame {
    pub nvars: usize,
    pub fields: Vec<Vec<Series>>,
}

impl CoordinateFrame {
    pub fn apply(&self, a: usize, g: &Series) -> Series {
        let mut out = Series::zero(self.nvars, g.valid - 1);
        for (mu, coeff) in self.fields[a].iter().enumerate() {
            out = out.add(&coeff.mul(&g.deriv(mu)));
        }
        out
    }

    fn inverse_matrix(&self) -> Vec<Vec<Series>> {
        let dim = self.fields.len();
        let valid = self.fields.iter().flatten().map(Series::valid).min().unwrap_or(0);
        // F[mu][c] = E_c^mu, split F = F0 (I + N)
        let f0: Vec<Vec<Rational>> = (0..dim)
            .map(|mu| (0..dim).map(|c| self.fields[c][mu].constant_term()).collect())
            .collect();
        let f0_inv = invert_rational(&f0).expect("frame must be a basis at the origin");
        let f: Vec<Vec<Series>> = (0..dim).map(|mu| (0..dim).map(|c| self.fields[c][mu].clone()).collect()).collect();
        // M = F0^{-1} F - I, F^{-1} = Σ (-M)^k F0^{-1}
        let mut m = vec![vec![Series::zero(self.nvars, valid); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Series::zero(self.nvars, valid);
                for k in 0..dim {
                    acc = acc.add(&f[k][j].scale(&f0_inv[i][k]));
                }
                if i == j {
                    acc = acc.sub(&Series::constant(self.nvars, valid, Rational::one()));
                }
                m[i][j] = acc.neg();
            }
        }
        let ident: Vec<Vec<Series>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| Series::constant(self.nvars, valid, if i == j { Rational::one() } else { Rational::zero() }))
                    .collect()
            })
            .collect();
        let mut total = ident.clone();
        let mut power = ident;
        for _ in 0..valid.max(0) {
            power = mat_mul(&power, &m);
            total = mat_add(&total, &power);
        }
        let f0_inv_s: Vec<Vec<Series>> = f0_inv
            .iter()
            .map(|row| row.iter().map(|c| Series::constant(self.nvars, valid, c.clone())).collect())
            .collect();
        mat_mul(&total, &f0_inv_s)
    }

    /// Structure-function jets `C_ab^c` at the origin, to the given order.
    pub fn structure(&self, order: usize) -> FrameAlgebra<Rational> {
        let dim = self.fields.len();
        let finv = self.inverse_matrix();
        let mut brackets = Vec::with_capacity(dim * dim * dim);
        let mut table = vec![vec![vec![Series::zero(self.nvars, 0); dim]; dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                if a == b {
                    continue;
                }
                let br: Vec<Series> = (0..self.nvars)
                    .map(|mu| self.apply(a, &self.fields[b][mu]).sub(&self.apply(b, &self.fields[a][mu])))
                    .collect();
                for c in 0..dim {
                    let mut acc = Series::zero(self.nvars, i32::MAX);
                    for (mu, v) in br.iter().enumerate() {
                        acc = acc.add(&finv[c][mu].mul(v));
                    }
                    table[a][b][c] = acc;
                }
            }
        }
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    if a == b {
                        brackets.push(Jet::zero_const());
                    } else {
                        brackets.push(self.jet_of(&table[a][b][c], order));
                    }
                }
            }
        }
        FrameAlgebra::new(dim, brackets)
    }

    /// Normally ordered frame derivatives of `g` at the origin.
    pub fn jet_of(&self, g: &Series, order: usize) -> Jet<Rational> {
        assert!(g.valid >= order as i32, "series precision below requested jet order");
        let dim = self.fields.len();
        let mut cache: BTreeMap<Vec<u8>, Series> = BTreeMap::new();
        cache.insert(Vec::new(), g.clone());
        let mut comps = Vec::new();
        // words sorted by length, so every proper suffix is cached first
        for w in sorted_words(dim, order) {
            if !w.is_empty() {
                let inner = cache[&w[1..].to_vec()].clone();
                let s = self.apply(w[0] as usize, &inner);
                cache.insert(w.clone(), s);
            }
            comps.push((w.clone(), cache[&w].constant_term()));
        }
        Jet::from_components(order, comps)
    }
}

fn mat_mul(a: &[Vec<Series>], b: &[Vec<Series>]) -> Vec<Vec<Series>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = a[i][0].mul(&b[0][j]);
                    for l in 1..k {
                        acc = acc.add(&a[i][l].mul(&b[l][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn mat_add(a: &[Vec<Series>], b: &[Vec<Series>]) -> Vec<Vec<Series>> {
    a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add(y)).collect()).collect()
}

/// Gauss–Jordan inverse over the rationals.
pub fn invert_rational(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = v.clone() / p.clone();
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let sub = f.clone() * a[col][c].clone();
                    a[r][c] = a[r][c].clone() - sub;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}
