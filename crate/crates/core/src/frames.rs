//! Adapted orthonormal frames of a foliated manifold and their validity
//! checks.
//!
//! Frame slots `0..n` are the horizontal fields `X_1..X_n`, slots
//! `n..n+m` the vertical fields `Z_1..Z_m`.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::jets::{sorted_words, FrameAlgebra, Jet, JetError, RewriteStrategy, CONST_ORDER};
use crate::scalar::{parse_scalar, Rational, Scalar};
use crate::series::invert_rational;

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Jet(#[from] JetError),
}

fn perr(path: &str, message: impl Into<String>) -> FrameError {
    FrameError::Parse { path: path.to_string(), message: message.into() }
}

#[derive(Clone, Debug)]
pub struct FrameSpec {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub homogeneous: bool,
    pub compact: bool,
    pub notes: Vec<String>,
    algebra: FrameAlgebra<Rational>,
}

impl FrameSpec {
    /// Builds a spec from a full bracket table `C_ab^c`.
    pub fn from_algebra(name: &str, n: usize, m: usize, algebra: FrameAlgebra<Rational>) -> Self {
        assert_eq!(algebra.dim(), n + m);
        FrameSpec {
            name: name.to_string(),
            n,
            m,
            homogeneous: algebra.is_constant(),
            compact: false,
            notes: Vec::new(),
            algebra,
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    pub fn algebra(&self) -> &FrameAlgebra<Rational> {
        &self.algebra
    }

    pub fn with_compact(mut self, compact: bool) -> Self {
        self.compact = compact;
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.notes.push(note.to_string());
        self
    }

    pub fn is_horizontal(&self, slot: usize) -> bool {
        slot < self.n
    }

    pub fn slot_name(&self, slot: usize) -> String {
        slot_label(self.n, slot)
    }

    pub fn bracket(&self, a: usize, b: usize, c: usize) -> &Jet<Rational> {
        self.algebra.bracket(a, b, c)
    }

    /// `γ_ij^l`, the `Z_l` component of `[X_i, X_j]`.
    pub fn gamma(&self, i: usize, j: usize, l: usize) -> &Jet<Rational> {
        self.bracket(i, j, self.n + l)
    }

    /// Torsion-dual matrices: `J_l[c][b] = ⟨J_{Z_l} X_b, X_c⟩ = -γ_bc^l` at the point.
    pub fn j_matrices(&self) -> Vec<Vec<Vec<Rational>>> {
        (0..self.m)
            .map(|l| {
                (0..self.n)
                    .map(|c| (0..self.n).map(|b| -self.gamma(b, c, l).value()).collect())
                    .collect()
            })
            .collect()
    }

    pub fn structure_order(&self) -> usize {
        self.algebra.structure_order()
    }

    /// The same foliation described in a rotated frame: `E'_a = Σ_b R_ab E_b`
    /// with `R = diag(h, v)` orthogonal.
    pub fn rotated(&self, h: &[Vec<Rational>], v: &[Vec<Rational>]) -> Result<FrameSpec, FrameError> {
        let dim = self.dim();
        let mut r = vec![vec![Rational::zero(); dim]; dim];
        for i in 0..self.n {
            for j in 0..self.n {
                r[i][j] = h[i][j].clone();
            }
        }
        for k in 0..self.m {
            for l in 0..self.m {
                r[self.n + k][self.n + l] = v[k][l].clone();
            }
        }
        let order = self.structure_order();
        let mut brackets = Vec::with_capacity(dim * dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                for f in 0..dim {
                    // C'_ab^f = Σ R_ac R_bd R_fe C_cd^e
                    let mut acc: Option<Jet<Rational>> = None;
                    for c in 0..dim {
                        if r[a][c].is_zero() {
                            continue;
                        }
                        for d in 0..dim {
                            if r[b][d].is_zero() {
                                continue;
                            }
                            for e in 0..dim {
                                if r[f][e].is_zero() {
                                    continue;
                                }
                                let w = r[a][c].clone() * r[b][d].clone() * r[f][e].clone();
                                let term = self.bracket(c, d, e).scale(&w);
                                acc = Some(match acc {
                                    None => term,
                                    Some(x) => crate::exterior::Coeff::add(&x, &term),
                                });
                            }
                        }
                    }
                    let jet = acc.unwrap_or_else(Jet::zero_const);
                    brackets.push(rotate_jet(&self.algebra, &r, &jet, order)?);
                }
            }
        }
        let mut out = FrameSpec::from_algebra(&format!("{}_rotated", self.name), self.n, self.m, FrameAlgebra::new(dim, brackets));
        out.homogeneous = self.homogeneous;
        out.compact = self.compact;
        Ok(out)
    }

    pub fn validate(&self) -> ValidityReport {
        validate(self)
    }
}

pub fn slot_label(n: usize, slot: usize) -> String {
    if slot < n {
        format!("X{}", slot + 1)
    } else {
        format!("Z{}", slot - n + 1)
    }
}

/// Expresses a jet in a constantly rotated frame.
pub fn rotate_jet(
    alg: &FrameAlgebra<Rational>,
    r: &[Vec<Rational>],
    g: &Jet<Rational>,
    order: usize,
) -> Result<Jet<Rational>, JetError> {
    if g.is_locally_constant() {
        return Ok(if g.order() >= CONST_ORDER { Jet::constant(g.value()) } else { g.clone() });
    }
    let order = order.min(g.order());
    let dim = alg.dim();
    let mut comps = Vec::new();
    for w in sorted_words(dim, order) {
        // E'_{w} g = Σ_u Π R_{w_i u_i} E_u g
        let mut total = Rational::zero();
        let mut stack: Vec<(Vec<u8>, Rational)> = vec![(Vec::new(), Rational::one())];
        for &s in &w {
            let mut next = Vec::new();
            for (u, c) in &stack {
                for t in 0..dim {
                    if r[s as usize][t].is_zero() {
                        continue;
                    }
                    let mut nu = u.clone();
                    nu.push(t as u8);
                    next.push((nu, c.clone() * r[s as usize][t].clone()));
                }
            }
            stack = next;
        }
        for (u, c) in stack {
            total = total + c * alg.eval(&u, g)?;
        }
        comps.push((w, total));
    }
    Ok(Jet::from_components(order, comps))
}

/// A random rational orthogonal matrix via the Cayley transform of a skew
/// matrix with small integer entries.
pub fn cayley_rotation(dim: usize, rng: &mut impl Rng) -> Vec<Vec<Rational>> {
    let mut a = vec![vec![Rational::zero(); dim]; dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = Rational::from_ratio(rng.gen_range(-3..=3), 2);
            a[i][j] = v.clone();
            a[j][i] = -v;
        }
    }
    let ident = |i: usize, j: usize| if i == j { Rational::one() } else { Rational::zero() };
    let plus: Vec<Vec<Rational>> = (0..dim).map(|i| (0..dim).map(|j| ident(i, j) + a[i][j].clone()).collect()).collect();
    let minus: Vec<Vec<Rational>> = (0..dim).map(|i| (0..dim).map(|j| ident(i, j) - a[i][j].clone()).collect()).collect();
    let inv = invert_rational(&plus).expect("I + skew is invertible");
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).fold(Rational::zero(), |acc, k| acc + minus[i][k].clone() * inv[k][j].clone()))
                .collect()
        })
        .collect()
}

pub fn random_block_rotation(n: usize, m: usize, seed: u64) -> (Vec<Vec<Rational>>, Vec<Vec<Rational>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (cayley_rotation(n, &mut rng), cayley_rotation(m, &mut rng))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Informational checks never make a spec invalid.
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport {
    pub checks: Vec<ValidityCheck>,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.required)
    }

    pub fn check(&self, name: &str) -> Option<&ValidityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| c.required && !c.passed).map(|c| c.name).collect()
    }
}

fn jet_sum_zero(a: &Jet<Rational>, b: &Jet<Rational>) -> bool {
    crate::exterior::Coeff::is_zero(&crate::exterior::Coeff::add(a, b))
}

pub fn validate(spec: &FrameSpec) -> ValidityReport {
    let (n, m) = (spec.n, spec.m);
    let dim = n + m;
    let h = |i: usize| i;
    let v = |k: usize| n + k;
    let mut checks = Vec::new();

    // (a) antisymmetries
    let mut bad = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            let both_h = a < n && b < n;
            let both_v = a >= n && b >= n;
            if !(both_h || both_v) {
                continue;
            }
            for c in 0..dim {
                if !jet_sum_zero(spec.bracket(a, b, c), spec.bracket(b, a, c)) {
                    bad.push(format!("[{},{}]^{}", spec.slot_name(a), spec.slot_name(b), spec.slot_name(c)));
                }
            }
        }
    }
    for i in 0..n {
        for k in 0..m {
            for l in 0..m {
                if !jet_sum_zero(spec.bracket(h(i), v(k), v(l)), spec.bracket(h(i), v(l), v(k))) {
                    bad.push(format!("beta[{}][{}][{}]", i + 1, k + 1, l + 1));
                }
            }
        }
    }
    checks.push(ValidityCheck {
        name: "antisymmetry",
        passed: bad.is_empty(),
        required: true,
        detail: if bad.is_empty() { "ok".into() } else { format!("asymmetric: {}", bad.join(", ")) },
    });

    // (b) bundle-like metric with totally geodesic leaves
    let mut bad = Vec::new();
    for k in 0..m {
        for i in 0..n {
            for j in 0..n {
                if !jet_sum_zero(spec.bracket(h(i), v(k), h(j)), spec.bracket(h(j), v(k), h(i))) {
                    bad.push(format!("(L_Z{} g)(X{},X{})", k + 1, i + 1, j + 1));
                }
            }
        }
        for i in 0..n {
            for l in 0..m {
                if !jet_sum_zero(spec.bracket(h(i), v(k), v(l)), spec.bracket(h(i), v(l), v(k))) {
                    bad.push(format!("(L_X{} g)(Z{},Z{})", i + 1, k + 1, l + 1));
                }
            }
        }
    }
    bad.dedup();
    checks.push(ValidityCheck {
        name: "totally_geodesic_bundle_like",
        passed: bad.is_empty(),
        required: true,
        detail: if bad.is_empty() { "ok".into() } else { format!("nonzero: {}", bad.join(", ")) },
    });

    // (c) vertical integrability
    let mut bad = Vec::new();
    for k in 0..m {
        for l in 0..m {
            for j in 0..n {
                if !crate::exterior::Coeff::is_zero(spec.bracket(v(k), v(l), h(j))) {
                    bad.push(format!("[Z{},Z{}]^X{}", k + 1, l + 1, j + 1));
                }
            }
        }
    }
    checks.push(ValidityCheck {
        name: "vertical_integrability",
        passed: bad.is_empty(),
        required: true,
        detail: if bad.is_empty() { "ok".into() } else { format!("horizontal part: {}", bad.join(", ")) },
    });

    // (d) step-two bracket generation
    let rows: Vec<Vec<Rational>> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| (0..m).map(|l| spec.gamma(i, j, l).value()).collect())
        .collect();
    let rank = rational_rank(&rows, m);
    checks.push(ValidityCheck {
        name: "bracket_generating",
        passed: rank == m,
        required: true,
        detail: format!("rank of gamma is {rank}, need {m}"),
    });

    if spec.homogeneous {
        let constant = spec.algebra.is_constant();
        checks.push(ValidityCheck {
            name: "constant_structure",
            passed: constant,
            required: true,
            detail: if constant { "ok".into() } else { "homogeneous spec has non-constant structure".into() },
        });
    }

    let (jacobi_ok, detail) = jacobi_consistency(spec);
    checks.push(ValidityCheck { name: "jacobi", passed: jacobi_ok, required: false, detail });

    if m == 1 && n > 0 {
        let j = &spec.j_matrices()[0];
        let sq = mat_sq(j);
        let c = sq[0][0].clone();
        let scalar = (0..n).all(|a| (0..n).all(|b| sq[a][b] == if a == b { c.clone() } else { Rational::zero() }));
        let ok = scalar && c < Rational::zero();
        checks.push(ValidityCheck {
            name: "k_contact",
            passed: ok,
            required: false,
            detail: if ok { format!("J^2 = {} Id_H", c) } else { "J^2 is not a negative multiple of Id_H".into() },
        });
    }

    ValidityReport { checks }
}

fn mat_sq(a: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).fold(Rational::zero(), |s, k| s + a[i][k].clone() * a[k][j].clone())).collect())
        .collect()
}

pub fn rational_rank(rows: &[Vec<Rational>], cols: usize) -> usize {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in 0..a.len() {
            if r != rank && !a[r][col].is_zero() {
                let f = a[r][col].clone() / a[rank][col].clone();
                for c in 0..cols {
                    let s = f.clone() * a[rank][c].clone();
                    a[r][c] = a[r][c].clone() - s;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Checks that both rewrite strategies agree on all words of length three
/// applied to a random jet, up to the available truncation order.
fn jacobi_consistency(spec: &FrameSpec) -> (bool, String) {
    let dim = spec.dim();
    let alg = &spec.algebra;
    let order = spec.structure_order().min(4).max(3);
    let f: Jet<Rational> = Jet::random(dim, order, 0x5eed);
    let mut bad = 0usize;
    let mut skipped = 0usize;
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let w = [a as u8, b as u8, c as u8];
                match (
                    alg.eval_with(&w, &f, RewriteStrategy::FirstDescent),
                    alg.eval_with(&w, &f, RewriteStrategy::LastDescent),
                ) {
                    (Ok(x), Ok(y)) => {
                        if x != y {
                            bad += 1;
                        }
                    }
                    _ => skipped += 1,
                }
            }
        }
    }
    let detail = if bad == 0 {
        format!("rewrite paths agree ({skipped} words beyond truncation)")
    } else {
        format!("{bad} words rewrite inconsistently")
    };
    (bad == 0, detail)
}

// ---------------------------------------------------------------- JSON

fn parse_word(n: usize, m: usize, text: &str, path: &str) -> Result<Vec<u8>, FrameError> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        if tok == "1" {
            continue;
        }
        let (kind, idx) = tok.split_at(1);
        let idx: usize = idx.parse().map_err(|_| perr(path, format!("bad frame symbol '{tok}'")))?;
        let slot = match kind {
            "X" if (1..=n).contains(&idx) => idx - 1,
            "Z" if (1..=m).contains(&idx) => n + idx - 1,
            _ => return Err(perr(path, format!("bad frame symbol '{tok}'"))),
        };
        out.push(slot as u8);
    }
    out.sort_unstable();
    Ok(out)
}

fn parse_number(v: &Value, path: &str) -> Result<Rational, FrameError> {
    match v {
        Value::Number(num) => parse_scalar(&num.to_string()).ok_or_else(|| perr(path, "unreadable number")),
        Value::String(s) => parse_scalar(s).ok_or_else(|| perr(path, format!("unreadable number '{s}'"))),
        _ => Err(perr(path, "expected a number")),
    }
}

fn parse_jet(n: usize, m: usize, v: &Value, path: &str) -> Result<Jet<Rational>, FrameError> {
    match v {
        Value::Object(obj) => {
            let order = match obj.get("order") {
                Some(o) => o.as_u64().ok_or_else(|| perr(&format!("{path}.order"), "expected an integer"))? as usize,
                None => return Err(perr(path, "jet object needs an 'order'")),
            };
            let terms = obj
                .get("terms")
                .and_then(Value::as_object)
                .ok_or_else(|| perr(path, "jet object needs a 'terms' map"))?;
            let mut comps = Vec::new();
            for (word, coeff) in terms {
                let p = format!("{path}.terms[{word:?}]");
                let w = parse_word(n, m, word, &p)?;
                if w.len() > order {
                    return Err(perr(&p, "word longer than jet order"));
                }
                comps.push((w, parse_number(coeff, &p)?));
            }
            Ok(Jet::from_components(order, comps))
        }
        _ => Ok(Jet::constant(parse_number(v, path)?)),
    }
}

fn parse_array3(
    obj: &Map<String, Value>,
    key: &str,
    shape: [usize; 3],
    n: usize,
    m: usize,
    required: bool,
) -> Result<Option<Vec<Jet<Rational>>>, FrameError> {
    let Some(v) = obj.get(key) else {
        return if required && shape.iter().all(|&s| s > 0) {
            Err(perr(key, "missing field"))
        } else {
            Ok(None)
        };
    };
    let mut out = Vec::with_capacity(shape.iter().product());
    let l0 = v.as_array().ok_or_else(|| perr(key, "expected an array"))?;
    if l0.len() != shape[0] {
        return Err(perr(key, format!("expected length {}, found {}", shape[0], l0.len())));
    }
    for (i, l1) in l0.iter().enumerate() {
        let p1 = format!("{key}[{i}]");
        let l1 = l1.as_array().ok_or_else(|| perr(&p1, "expected an array"))?;
        if l1.len() != shape[1] {
            return Err(perr(&p1, format!("expected length {}, found {}", shape[1], l1.len())));
        }
        for (j, l2) in l1.iter().enumerate() {
            let p2 = format!("{p1}[{j}]");
            let l2 = l2.as_array().ok_or_else(|| perr(&p2, "expected an array"))?;
            if l2.len() != shape[2] {
                return Err(perr(&p2, format!("expected length {}, found {}", shape[2], l2.len())));
            }
            for (k, e) in l2.iter().enumerate() {
                out.push(parse_jet(n, m, e, &format!("{p2}[{k}]"))?);
            }
        }
    }
    Ok(Some(out))
}

impl FrameSpec {
    pub fn from_json_str(text: &str) -> Result<FrameSpec, FrameError> {
        let value: Value = serde_json::from_str(text)?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<FrameSpec, FrameError> {
        let obj = value.as_object().ok_or_else(|| perr("$", "expected an object"))?;
        let get_usize = |key: &str| -> Result<usize, FrameError> {
            obj.get(key)
                .ok_or_else(|| perr(key, "missing field"))?
                .as_u64()
                .map(|v| v as usize)
                .ok_or_else(|| perr(key, "expected a nonnegative integer"))
        };
        let get_bool = |key: &str| -> Result<bool, FrameError> {
            match obj.get(key) {
                None => Ok(false),
                Some(v) => v.as_bool().ok_or_else(|| perr(key, "expected a boolean")),
            }
        };
        let n = get_usize("n")?;
        let m = get_usize("m")?;
        if n + m == 0 || n + m > crate::exterior::MAX_DIM {
            return Err(perr("n", "dimension out of range"));
        }
        let homogeneous = get_bool("homogeneous")?;
        let compact = get_bool("compact")?;
        let name = obj.get("name").and_then(Value::as_str).unwrap_or("file").to_string();

        let dim = n + m;
        let mut table = vec![Jet::zero_const(); dim * dim * dim];
        let idx = |a: usize, b: usize, c: usize| (a * dim + b) * dim + c;
        let mut put = |arr: Option<Vec<Jet<Rational>>>, shape: [usize; 3], map: &dyn Fn(usize, usize, usize) -> (usize, usize, usize)| {
            if let Some(arr) = arr {
                let mut it = arr.into_iter();
                for x in 0..shape[0] {
                    for y in 0..shape[1] {
                        for z in 0..shape[2] {
                            let (a, b, c) = map(x, y, z);
                            table[idx(a, b, c)] = it.next().expect("shape checked");
                        }
                    }
                }
            }
        };
        put(parse_array3(obj, "omega", [n, n, n], n, m, true)?, [n, n, n], &|i, j, k| (i, j, k));
        put(parse_array3(obj, "gamma", [n, n, m], n, m, true)?, [n, n, m], &|i, j, l| (i, j, n + l));
        put(parse_array3(obj, "beta", [n, m, m], n, m, true)?, [n, m, m], &|i, k, l| (i, n + k, n + l));
        put(parse_array3(obj, "alpha", [n, m, n], n, m, false)?, [n, m, n], &|i, k, j| (i, n + k, j));
        put(parse_array3(obj, "zeta", [m, m, m], n, m, false)?, [m, m, m], &|k, l, p| (n + k, n + l, n + p));
        put(parse_array3(obj, "eta", [m, m, n], n, m, false)?, [m, m, n], &|k, l, j| (n + k, n + l, j));
        for i in 0..n {
            for k in 0..m {
                for c in 0..dim {
                    table[idx(n + k, i, c)] = crate::exterior::Coeff::neg(&table[idx(i, n + k, c)]);
                }
            }
        }
        let mut spec = FrameSpec::from_algebra(&name, n, m, FrameAlgebra::new(dim, table));
        spec.homogeneous = homogeneous;
        spec.compact = compact;
        if let Some(notes) = obj.get("notes").and_then(Value::as_array) {
            spec.notes = notes.iter().filter_map(|v| v.as_str().map(str::to_string)).collect();
        }
        Ok(spec)
    }

    pub fn to_json(&self) -> Value {
        let (n, m) = (self.n, self.m);
        let arr = |shape: [usize; 3], map: &dyn Fn(usize, usize, usize) -> (usize, usize, usize)| -> (Value, bool) {
            let mut nonzero = false;
            let v = Value::Array(
                (0..shape[0])
                    .map(|x| {
                        Value::Array(
                            (0..shape[1])
                                .map(|y| {
                                    Value::Array(
                                        (0..shape[2])
                                            .map(|z| {
                                                let (a, b, c) = map(x, y, z);
                                                let j = self.bracket(a, b, c);
                                                nonzero |= !crate::exterior::Coeff::is_zero(j);
                                                jet_to_json(n, j)
                                            })
                                            .collect(),
                                    )
                                })
                                .collect(),
                        )
                    })
                    .collect(),
            );
            (v, nonzero)
        };
        let mut obj = Map::new();
        obj.insert("name".into(), json!(self.name));
        obj.insert("n".into(), json!(n));
        obj.insert("m".into(), json!(m));
        obj.insert("homogeneous".into(), json!(self.homogeneous));
        obj.insert("compact".into(), json!(self.compact));
        obj.insert("omega".into(), arr([n, n, n], &|i, j, k| (i, j, k)).0);
        obj.insert("gamma".into(), arr([n, n, m], &|i, j, l| (i, j, n + l)).0);
        obj.insert("beta".into(), arr([n, m, m], &|i, k, l| (i, n + k, n + l)).0);
        for (key, shape, map) in [
            ("alpha", [n, m, n], &(|i, k, j| (i, n + k, j)) as &dyn Fn(usize, usize, usize) -> (usize, usize, usize)),
            ("zeta", [m, m, m], &|k, l, p| (n + k, n + l, n + p)),
            ("eta", [m, m, n], &|k, l, j| (n + k, n + l, j)),
        ] {
            let (v, nonzero) = arr(shape, map);
            if nonzero {
                obj.insert(key.into(), v);
            }
        }
        if !self.notes.is_empty() {
            obj.insert("notes".into(), json!(self.notes));
        }
        Value::Object(obj)
    }
}

pub fn scalar_to_json(v: &Rational) -> Value {
    if v.is_integer() {
        if let Ok(i) = v.to_integer().to_string().parse::<i64>() {
            return json!(i);
        }
    }
    json!(v.to_string())
}

pub fn jet_to_json(n: usize, j: &Jet<Rational>) -> Value {
    if j.is_constant_to_all_orders() {
        return scalar_to_json(&j.value());
    }
    let mut terms = Map::new();
    for (w, c) in j.components() {
        let key = w.iter().map(|&s| slot_label(n, s as usize)).collect::<Vec<_>>().join(" ");
        terms.insert(key, scalar_to_json(c));
    }
    json!({ "order": j.order(), "terms": terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEIS: &str = r#"{"n":2,"m":1,"homogeneous":true,"compact":false,
        "omega":[[[0,0],[0,0]],[[0,0],[0,0]]],
        "gamma":[[[0],[1]],[[-1],[0]]],
        "beta":[[[0]],[[0]]]}"#;

    #[test]
    fn heisenberg_json_validates() {
        let spec = FrameSpec::from_json_str(HEIS).unwrap();
        let report = spec.validate();
        assert!(report.passed(), "{report:?}");
        assert_eq!(spec.gamma(0, 1, 0).value(), Rational::one());
    }

    #[test]
    fn abelian_frame_is_not_bracket_generating() {
        let text = HEIS.replace("[[[0],[1]],[[-1],[0]]]", "[[[0],[0]],[[0],[0]]]");
        let report = FrameSpec::from_json_str(&text).unwrap().validate();
        assert_eq!(report.failures(), vec!["bracket_generating"]);
    }

    #[test]
    fn injected_horizontal_x_z_bracket_fails_bundle_like() {
        let text = HEIS.replace("\"beta\"", "\"alpha\":[[[0,1]],[[0,0]]],\"beta\"");
        let report = FrameSpec::from_json_str(&text).unwrap().validate();
        assert_eq!(report.failures(), vec!["totally_geodesic_bundle_like"]);
    }

    #[test]
    fn broken_antisymmetry_is_named() {
        let text = HEIS.replace("[[[0],[1]],[[-1],[0]]]", "[[[0],[1]],[[1],[0]]]");
        let report = FrameSpec::from_json_str(&text).unwrap().validate();
        assert!(report.failures().contains(&"antisymmetry"));
    }

    #[test]
    fn parse_errors_carry_location() {
        let text = HEIS.replace("[[[0],[1]],[[-1],[0]]]", "[[[0],[1]],[[\"x\"],[0]]]");
        let err = FrameSpec::from_json_str(&text).unwrap_err().to_string();
        assert!(err.starts_with("gamma[1][0][0]"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let spec = FrameSpec::from_json_str(HEIS).unwrap();
        let again = FrameSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec.algebra(), again.algebra());
    }

    #[test]
    fn jet_entries_parse() {
        let text = HEIS.replace(
            "[[[0],[1]],[[-1],[0]]]",
            r#"[[[0],[{"order":3,"terms":{"":1,"X1":1}}]],[[{"order":3,"terms":{"":-1,"X1":-1}}],[0]]]"#,
        );
        let spec = FrameSpec::from_json_str(&text).unwrap();
        assert_eq!(spec.gamma(0, 1, 0).get(&[0]), Rational::one());
        assert!(!spec.algebra().is_constant());
    }

    #[test]
    fn cayley_rotations_are_orthogonal() {
        let (h, _) = random_block_rotation(3, 1, 9);
        for i in 0..3 {
            for j in 0..3 {
                let dot = (0..3).fold(Rational::zero(), |s, k| s + h[i][k].clone() * h[j][k].clone());
                assert_eq!(dot, if i == j { Rational::one() } else { Rational::zero() });
            }
        }
    }
}
