//! Built-in model foliations, looked up by name through a registry of
//! builders.

use std::sync::OnceLock;

use crate::frames::FrameSpec;
use crate::jets::{FrameAlgebra, Jet};
use crate::scalar::{Rational, Scalar};
use crate::series::{CoordinateFrame, Series};

/// Truncation order of structure jets for models built from charts.
pub const CHART_ORDER: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("unknown model '{name}' (known: {known})")]
    Unknown { name: String, known: String },
}

pub trait ModelBuilder: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn build(&self) -> FrameSpec;
}

pub struct ModelRegistry {
    builders: Vec<Box<dyn ModelBuilder>>,
}

impl ModelRegistry {
    pub fn empty() -> Self {
        ModelRegistry { builders: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Heisenberg3 { compact: false }));
        r.register(Box::new(Heisenberg3 { compact: true }));
        r.register(Box::new(Heisenberg5));
        r.register(Box::new(HopfS3 { berger: false }));
        r.register(Box::new(HopfS3 { berger: true }));
        r.register(Box::new(HopfS5));
        r.register(Box::new(NonYangMills));
        r.register(Box::new(TwistedRank2));
        r
    }

    /// Later registrations shadow earlier ones with the same name.
    pub fn register(&mut self, builder: Box<dyn ModelBuilder>) {
        self.builders.retain(|b| b.name() != builder.name());
        self.builders.push(builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.iter().map(|b| b.name()).collect()
    }

    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.builders.iter().map(|b| (b.name(), b.description())).collect()
    }

    pub fn build(&self, name: &str) -> Result<FrameSpec, ModelError> {
        self.builders
            .iter()
            .find(|b| b.name() == name)
            .map(|b| b.build())
            .ok_or_else(|| ModelError::Unknown { name: name.to_string(), known: self.names().join(", ") })
    }
}

pub fn builtin_model(name: &str) -> Result<FrameSpec, ModelError> {
    ModelRegistry::builtin().build(name)
}

fn q(v: i64) -> Rational {
    Rational::from_i64(v)
}

/// Constant structure from a list of brackets `[E_a, E_b] = c E_k`,
/// antisymmetrized.
fn lie_algebra(n: usize, m: usize, brackets: &[(usize, usize, usize, i64)]) -> FrameAlgebra<Rational> {
    let dim = n + m;
    let mut table = vec![Jet::zero_const(); dim * dim * dim];
    for &(a, b, c, v) in brackets {
        table[(a * dim + b) * dim + c] = Jet::constant(q(v));
        table[(b * dim + a) * dim + c] = Jet::constant(q(-v));
    }
    FrameAlgebra::new(dim, table)
}

struct Heisenberg3 {
    compact: bool,
}

impl ModelBuilder for Heisenberg3 {
    fn name(&self) -> &'static str {
        if self.compact {
            "heisenberg3_nilmanifold"
        } else {
            "heisenberg3"
        }
    }

    fn description(&self) -> &'static str {
        if self.compact {
            "Heisenberg nilmanifold quotient (b1 = 2), same frame as heisenberg3"
        } else {
            "Heisenberg group H3: [X1,X2] = Z"
        }
    }

    fn build(&self) -> FrameSpec {
        let spec = FrameSpec::from_algebra(self.name(), 2, 1, lie_algebra(2, 1, &[(0, 1, 2, 1)])).with_compact(self.compact);
        spec.with_note("J^2 = -Id_H")
    }
}

struct Heisenberg5;

impl ModelBuilder for Heisenberg5 {
    fn name(&self) -> &'static str {
        "heisenberg5"
    }

    fn description(&self) -> &'static str {
        "Heisenberg group H5: [X1,X2] = [X3,X4] = Z"
    }

    fn build(&self) -> FrameSpec {
        FrameSpec::from_algebra("heisenberg5", 4, 1, lie_algebra(4, 1, &[(0, 1, 4, 1), (2, 3, 4, 1)])).with_note("J^2 = -Id_H")
    }
}

struct HopfS3 {
    berger: bool,
}

impl ModelBuilder for HopfS3 {
    fn name(&self) -> &'static str {
        if self.berger {
            "berger_s3"
        } else {
            "hopf_s3"
        }
    }

    fn description(&self) -> &'static str {
        if self.berger {
            "Berger spheres: the hopf_s3 frame, with the vertical scale carried by eps"
        } else {
            "Hopf fibration of S3 over S2, su(2) frame with e3 vertical"
        }
    }

    fn build(&self) -> FrameSpec {
        // [e1,e2] = 2e3, [e2,e3] = 2e1, [e3,e1] = 2e2
        let alg = lie_algebra(2, 1, &[(0, 1, 2, 2), (1, 2, 0, 2), (2, 0, 1, 2)]);
        let mut spec = FrameSpec::from_algebra(self.name(), 2, 1, alg).with_compact(true);
        spec = spec.with_note("J^2 = -4 Id_H (the contact normalization J^2 = -Id_H after rescaling by 2)");
        if self.berger {
            spec = spec.with_note("canonical variation g_eps: pass eps to the operators");
        }
        spec
    }
}

// ------------------------------------------------------------ chart models

fn chart_valid() -> i32 {
    CHART_ORDER as i32 + 2
}

fn sc(nvars: usize, v: i64) -> Series {
    Series::constant(nvars, chart_valid(), q(v))
}

fn var(nvars: usize, i: usize) -> Series {
    Series::var(nvars, chart_valid(), i)
}

fn coordinate_field(nvars: usize, mu: usize) -> Vec<Series> {
    (0..nvars).map(|nu| sc(nvars, if nu == mu { 1 } else { 0 })).collect()
}

/// Hopf fibration `S^5 → CP^2` near a point: affine coordinates
/// `w = (u1 + i v1, u2 + i v2)` on the base, fibre coordinate `t`.
fn hopf_s5_frame() -> CoordinateFrame {
    let nv = 5;
    let u1 = var(nv, 0);
    let v1 = var(nv, 1);
    let u2 = var(nv, 2);
    let v2 = var(nv, 3);
    let rho = sc(nv, 1).add(&u1.mul(&u1)).add(&v1.mul(&v1)).add(&u2.mul(&u2)).add(&v2.mul(&v2));
    let rho_inv = rho.inv();
    let rho_inv2 = rho_inv.mul(&rho_inv);
    let a = [u1.clone(), v1.clone(), u2.clone(), v2.clone()];
    let b = [v1.neg(), u1.clone(), v2.neg(), u2.clone()];
    // Fubini–Study: h = [ρ|dw|² − |w̄·dw|²]/ρ²
    let metric: Vec<Vec<Series>> = (0..4)
        .map(|mu| {
            (0..4)
                .map(|nu| {
                    let diag = if mu == nu { rho.clone() } else { sc(nv, 0) };
                    diag.sub(&a[mu].mul(&a[nu])).sub(&b[mu].mul(&b[nu])).mul(&rho_inv2)
                })
                .collect()
        })
        .collect();
    let inner = |x: &[Series], y: &[Series]| -> Series {
        let mut acc = sc(nv, 0);
        for mu in 0..4 {
            for nu in 0..4 {
                acc = acc.add(&x[mu].mul(&y[nu]).mul(&metric[mu][nu]));
            }
        }
        acc
    };
    // Gram–Schmidt on the coordinate fields
    let mut base: Vec<Vec<Series>> = Vec::new();
    for mu in 0..4 {
        let mut v: Vec<Series> = (0..4).map(|nu| sc(nv, if nu == mu { 1 } else { 0 })).collect();
        for e in &base {
            let c = inner(&v, e);
            v = v.iter().zip(e).map(|(x, y)| x.sub(&c.mul(y))).collect();
        }
        let norm_inv = inner(&v, &v).sqrt().inv();
        base.push(v.iter().map(|x| x.mul(&norm_inv)).collect());
    }
    // horizontal lift X − A(X) ∂_t with A = Σ (u dv − v du)/ρ
    let mut fields = Vec::new();
    for e in &base {
        let mut ax = sc(nv, 0);
        for mu in 0..4 {
            ax = ax.add(&e[mu].mul(&b[mu]));
        }
        let ax = ax.mul(&rho_inv);
        let mut f: Vec<Series> = e.clone();
        f.push(ax.neg());
        fields.push(f);
    }
    fields.push(coordinate_field(nv, 4));
    CoordinateFrame { nvars: nv, fields }
}

struct HopfS5;

impl ModelBuilder for HopfS5 {
    fn name(&self) -> &'static str {
        "hopf_s5"
    }

    fn description(&self) -> &'static str {
        "Hopf fibration of S5 over CP2 (Fubini-Study), structure jets from a chart"
    }

    fn build(&self) -> FrameSpec {
        static ALG: OnceLock<FrameAlgebra<Rational>> = OnceLock::new();
        let alg = ALG.get_or_init(|| hopf_s5_frame().structure(CHART_ORDER)).clone();
        FrameSpec::from_algebra("hopf_s5", 4, 1, alg)
            .with_compact(true)
            .with_note("S5 is not a group: structure functions are jets, not constants")
    }
}

/// `X1 = ∂x`, `X2 = ∂y + (x + x²/2) ∂z`, `Z = ∂z`: `[X1, X2] = (1 + x) Z`.
fn non_yang_mills_frame() -> CoordinateFrame {
    let nv = 3;
    let x = var(nv, 0);
    let half = Series::constant(nv, chart_valid(), Rational::from_ratio(1, 2));
    let f = x.add(&x.mul(&x).mul(&half));
    CoordinateFrame {
        nvars: nv,
        fields: vec![
            coordinate_field(nv, 0),
            vec![sc(nv, 0), sc(nv, 1), f],
            coordinate_field(nv, 2),
        ],
    }
}

struct NonYangMills;

impl ModelBuilder for NonYangMills {
    fn name(&self) -> &'static str {
        "fixture_non_yang_mills"
    }

    fn description(&self) -> &'static str {
        "test fixture: [X1,X2] = (1 + x) Z, a non Yang-Mills foliation"
    }

    fn build(&self) -> FrameSpec {
        static ALG: OnceLock<FrameAlgebra<Rational>> = OnceLock::new();
        let alg = ALG.get_or_init(|| non_yang_mills_frame().structure(CHART_ORDER)).clone();
        FrameSpec::from_algebra("fixture_non_yang_mills", 2, 1, alg)
    }
}

/// Rank-two fibres with a twisted connection:
/// `X1 = ∂1`, `X2 = ∂2 + x1 ∂z1 + x1 (z2 ∂z1 − z1 ∂z2)`, `X3 = ∂3 + x1 ∂z2`.
fn twisted_rank2_frame() -> CoordinateFrame {
    let nv = 5;
    let x1 = var(nv, 0);
    let z1 = var(nv, 3);
    let z2 = var(nv, 4);
    let zero = sc(nv, 0);
    let one = sc(nv, 1);
    CoordinateFrame {
        nvars: nv,
        fields: vec![
            coordinate_field(nv, 0),
            vec![zero.clone(), one.clone(), zero.clone(), x1.add(&x1.mul(&z2)), x1.mul(&z1).neg()],
            vec![zero.clone(), zero.clone(), one.clone(), zero.clone(), x1.clone()],
            coordinate_field(nv, 3),
            coordinate_field(nv, 4),
        ],
    }
}

struct TwistedRank2;

impl ModelBuilder for TwistedRank2 {
    fn name(&self) -> &'static str {
        "fixture_twisted_rank2"
    }

    fn description(&self) -> &'static str {
        "test fixture: n = 3, m = 2, non-constant torsion that is not vertically parallel"
    }

    fn build(&self) -> FrameSpec {
        static ALG: OnceLock<FrameAlgebra<Rational>> = OnceLock::new();
        let alg = ALG.get_or_init(|| twisted_rank2_frame().structure(CHART_ORDER)).clone();
        FrameSpec::from_algebra("fixture_twisted_rank2", 3, 2, alg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_validates() {
        let reg = ModelRegistry::builtin();
        for name in reg.names() {
            let spec = reg.build(name).unwrap();
            let report = spec.validate();
            assert!(report.passed(), "{name}: {:?}", report.failures());
            assert!(report.check("jacobi").unwrap().passed, "{name}");
        }
    }

    #[test]
    fn heisenberg3_structure() {
        let s = builtin_model("heisenberg3").unwrap();
        assert_eq!((s.n, s.m), (2, 1));
        assert_eq!(s.gamma(0, 1, 0).value(), q(1));
        assert!(s.homogeneous);
    }

    #[test]
    fn hopf_s3_j_squared() {
        let s = builtin_model("hopf_s3").unwrap();
        assert!(s.validate().check("k_contact").unwrap().detail.contains("-4"));
    }

    #[test]
    fn hopf_s5_is_k_contact_and_not_constant() {
        let s = builtin_model("hopf_s5").unwrap();
        assert!(!s.homogeneous);
        let r = s.validate();
        assert!(r.check("k_contact").unwrap().passed, "{:?}", r.check("k_contact"));
    }

    #[test]
    fn unknown_model_lists_known_names() {
        let err = builtin_model("torus").unwrap_err().to_string();
        assert!(err.contains("hopf_s3"));
    }
}
