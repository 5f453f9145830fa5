//! Tabulated Fukaya categories of the round sphere and the flat torus.
//!
//! Intersection generators sit at level `h`, Morse generators at level 0 and
//! all gradings are mod 2. The open-closed map is tabulated on the chains
//! where its value is known; everything else is a coverage gap.

mod oracle;

pub use oracle::{oracle_enumerate, OracleValue, Query};

use crate::ainf::{add_term, Builder, Category, GenId, Object, Tensor, TensorChain, Vector};
use crate::error::{Error, Result};
use crate::hochschild;
use crate::novikov::Nov;
use crate::q::{fmt_q, q, qi, Ext, Q};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

/// An element of quantum cohomology, by coefficients on named generators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QhElement {
    pub coeffs: BTreeMap<String, Nov>,
}

impl QhElement {
    pub fn add_term(&mut self, g: &str, c: &Nov) {
        add_term(&mut self.coeffs, g.to_string(), c);
    }

    pub fn component(&self, g: &str) -> Nov {
        self.coeffs.get(g).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Quantum generators all sit at level 0.
    pub fn level(&self) -> Option<Q> {
        self.coeffs.values().filter_map(|c| c.valuation().fin()).map(|v| -v).max()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Object(self.coeffs.iter().map(|(g, c)| (g.clone(), c.to_string().into())).collect())
    }
}

impl std::fmt::Display for QhElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coeffs.iter().map(|(g, c)| format!("({c}) {g}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    SingleEquator,
    Sphere { n: usize },
    Torus { nx: usize, ny: usize },
}

#[derive(Debug, Clone)]
pub struct Model {
    pub kind: ModelKind,
    pub h: Q,
    /// Precision of truncated area series, if any.
    pub precision: Option<Q>,
    pub cat: Category,
    /// Quantum cohomology generators; the unit comes first.
    pub qh: Vec<String>,
    oc: BTreeMap<Tensor, QhElement>,
    /// The Hochschild chain certifying approximability.
    pub witness: TensorChain,
}

impl Model {
    pub fn name(&self) -> String {
        match self.kind {
            ModelKind::SingleEquator => "single-equator".into(),
            ModelKind::Sphere { n } => format!("sphere-{n}"),
            ModelKind::Torus { nx, ny } => format!("torus-{nx}x{ny}"),
        }
    }

    pub fn g(&self, name: &str) -> GenId {
        self.cat.gen_id(name).unwrap_or_else(|_| panic!("no generator {name} in {}", self.name()))
    }

    pub fn tensor(&self, names: &[&str]) -> Tensor {
        names.iter().map(|n| self.g(n)).collect()
    }

    pub fn oc_table(&self) -> impl Iterator<Item = (&Tensor, &QhElement)> {
        self.oc.iter()
    }

    /// Number of Lagrangians in the family.
    pub fn family_size(&self) -> usize {
        self.cat.objects.len()
    }
}

fn check_h(h: Q) -> Result<()> {
    if h < Q::zero() {
        return Err(Error::Precondition("h must be non-negative".into()));
    }
    Ok(())
}

fn mono(c: Q, g: GenId) -> Vector {
    let mut v = Vector::new();
    add_term(&mut v, g, &Nov::mono(c));
    v
}

fn qh_mono(g: &str, e: Q) -> QhElement {
    let mut x = QhElement::default();
    x.add_term(g, &Nov::mono(e));
    x
}

/// Cyclic distance `w(i, j)` between great circles, in units of `1/(4N)`.
fn weight(n: usize, i: usize, j: usize) -> Q {
    let d = (i as i64 - j as i64).rem_euclid(n as i64);
    let d = d.min(n as i64 - d);
    q(d, 4 * n as i64)
}

/// Names of the two intersection generators of `CF(L_i, L_j)`: the even one
/// first.
fn sphere_pair_names(n: usize, i: usize, j: usize) -> (String, String) {
    let (a, b) = (i + 1, j + 1);
    if n == 2 {
        return if i == 0 { ("n_1".into(), "s_1".into()) } else { ("s_1'".into(), "n_1'".into()) };
    }
    if j == (i + 1) % n {
        (format!("n_{a}"), format!("s_{a}"))
    } else if i == (j + 1) % n {
        (format!("s_{b}'"), format!("n_{b}'"))
    } else {
        (format!("x_{a}_{b}"), format!("y_{a}_{b}"))
    }
}

/// The single equator `L` with `e_L`, `pt_L`: `μ_k(pt, …, pt) = T^{1/2} e_L`
/// for `3 ≤ k ≤ max_order`.
pub fn build_single_equator(h: Q) -> Result<Model> {
    build_gauge(1, h, 8)
}

/// `N` great circles through the poles, spaced evenly. Intersections of
/// `L_i, L_j` come in an even and an odd kind; products of even ones pick up
/// the area between the circles and `μ_{≥3}` is nonzero only on odd inputs,
/// where it returns a hemisphere.
pub fn build_sphere(n: usize, h: Q) -> Result<Model> {
    if n == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    build_gauge(n, h, if n <= 2 { 8 } else { 6 })
}

/// The sphere model with an explicit top order for tabulated `μ_k`.
pub fn build_sphere_upto(n: usize, h: Q, max_order: usize) -> Result<Model> {
    if n == 0 || max_order < 2 {
        return Err(Error::Precondition("need N ≥ 1 and max order ≥ 2".into()));
    }
    build_gauge(n, h, max_order)
}

fn build_gauge(n: usize, h: Q, max_order: usize) -> Result<Model> {
    check_h(h)?;
    let mut b = Builder::new(2, 1);
    let sigma = |i: usize| (i % 2) as i64;
    let mut units = Vec::new();
    let mut pts = Vec::new();
    for i in 0..n {
        let (obj, e, p) = if n == 1 {
            ("L".to_string(), "e_L".to_string(), "pt_L".to_string())
        } else {
            (format!("L{}", i + 1), format!("e_{}", i + 1), format!("pt_{}", i + 1))
        };
        let mut o = Object::new(obj);
        o.family = Some("equators".into());
        let k = b.object(o, e);
        units.push(b.unit(k));
        pts.push(b.gen(p, i, i, 1, Q::zero()));
    }
    // even[i][j], odd[i][j]; on the diagonal these are e_i and pt_i
    let mut even = vec![vec![0; n]; n];
    let mut odd = vec![vec![0; n]; n];
    for i in 0..n {
        even[i][i] = units[i];
        odd[i][i] = pts[i];
        for j in 0..n {
            if i != j {
                let (en, on) = sphere_pair_names(n, i, j);
                let d = sigma(j) - sigma(i);
                even[i][j] = b.gen(en, i, j, d.rem_euclid(2), h);
                odd[i][j] = b.gen(on, i, j, (1 + d).rem_euclid(2), h);
            }
        }
    }
    let w = |i: usize, j: usize| weight(n, i, j);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = w(i, j) + w(j, k) - w(i, k);
                if i != j && j != k {
                    b.set(vec![even[i][j], even[j][k]], mono(c, even[i][k]));
                }
                if j != k {
                    b.set(vec![odd[i][j], even[j][k]], mono(c, odd[i][k]));
                }
                if i != j {
                    b.set(vec![even[i][j], odd[j][k]], mono(c, odd[i][k]));
                }
            }
        }
    }
    for len in 3..=max_order {
        let mut path = vec![0usize; len + 1];
        loop {
            let t: Tensor = path.windows(2).map(|p| odd[p[0]][p[1]]).collect();
            let s: Q = path.windows(2).map(|p| w(p[0], p[1])).sum();
            let (a, z) = (path[0], path[len]);
            b.set(t, mono(q(1, 2) + s - w(a, z), even[a][z]));
            let mut p = 0;
            while p <= len {
                path[p] += 1;
                if path[p] < n {
                    break;
                }
                path[p] = 0;
                p += 1;
            }
            if p > len {
                break;
            }
        }
    }
    let cat = b.build(max_order)?;
    let mut oc = BTreeMap::new();
    let witness = if n == 1 {
        let (e, pt) = (units[0], pts[0]);
        oc.insert(vec![e], QhElement::default());
        let mut x = qh_mono("pt", Q::zero());
        x.add_term("u", &Nov::mono(q(1, 2)));
        oc.insert(vec![pt], x);
        oc.insert(vec![pt, pt], qh_mono("u", q(1, 2)));
        crate::ainf::pure(vec![pt, pt])
    } else {
        let mut wit = TensorChain::new();
        for i in 0..n {
            let t = vec![even[i][(i + 1) % n], even[(i + 1) % n][i]];
            let v = if i == 0 { qh_mono("u", q(1, 2 * n as i64)) } else { QhElement::default() };
            oc.insert(t.clone(), v);
            add_term(&mut wit, t, &Nov::one());
        }
        wit
    };
    Ok(Model {
        kind: if n == 1 { ModelKind::SingleEquator } else { ModelKind::Sphere { n } },
        h,
        precision: None,
        cat,
        qh: vec!["u".into(), "pt".into()],
        oc,
        witness,
    })
}

/// Generators `(n_i, s_i')` of the sphere model, `i` counted from 1 and
/// cyclically.
pub fn sphere_pair(m: &Model, i: usize) -> (GenId, GenId) {
    let ModelKind::Sphere { n } = m.kind else { panic!("not a sphere model") };
    let a = (i - 1) % n;
    let b = (a + 1) % n;
    let (ab, _) = sphere_pair_names(n, a, b);
    let (ba, _) = sphere_pair_names(n, b, a);
    (m.g(&ab), m.g(&ba))
}

/// `Σ c(n,m) T^{e(n,m)}` over `n, m ≥ 1`, for `e` increasing in both
/// arguments, truncated below `p`.
fn lattice_sum(p: Q, c: impl Fn(i64, i64) -> i64, e: impl Fn(i64, i64) -> Q) -> Vec<Q> {
    let mut out = Vec::new();
    let mut n = 1;
    while e(n, 1) < p {
        let mut m = 1;
        while e(n, m) < p {
            if c(n, m) % 2 != 0 {
                out.push(e(n, m));
            }
            m += 1;
        }
        n += 1;
    }
    out
}

fn trunc(exps: Vec<Q>, p: Q) -> Nov {
    Nov::from_exps_prec(exps, Some(p))
}

/// `q^h_A = Σ n (T^{n(m−1+A)} + T^{n(m−A)})`.
pub fn q_h(a: Q, p: Q) -> Nov {
    let mut x = lattice_sum(p, |n, _| n, |n, m| qi(n) * (qi(m - 1) + a));
    x.extend(lattice_sum(p, |n, _| n, |n, m| qi(n) * (qi(m) - a)));
    trunc(x, p)
}

/// `q̃^h_A = Σ (T^{n(m−1+A)} + T^{n(m−A)})`.
pub fn q_h_tilde(a: Q, p: Q) -> Nov {
    let mut x = lattice_sum(p, |_, _| 1, |n, m| qi(n) * (qi(m - 1) + a));
    x.extend(lattice_sum(p, |_, _| 1, |n, m| qi(n) * (qi(m) - a)));
    trunc(x, p)
}

/// `q^v_A = Σ m (T^{n(m−A)} + T^{n(m+A)})`.
pub fn q_v(a: Q, p: Q) -> Nov {
    let mut x = lattice_sum(p, |_, m| m, |n, m| qi(n) * (qi(m) - a));
    x.extend(lattice_sum(p, |_, m| m, |n, m| qi(n) * (qi(m) + a)));
    trunc(x, p)
}

/// `Σ nm (T^{n(m−c)} + T^{n(m+c)})`; `c = 0` gives `Σ nm T^{nm}` once.
pub fn oc_strip(c: Q, p: Q) -> Nov {
    let mut x = lattice_sum(p, |n, m| n * m, |n, m| qi(n) * (qi(m) - c));
    if !c.is_zero() {
        x.extend(lattice_sum(p, |n, m| n * m, |n, m| qi(n) * (qi(m) + c)));
    }
    trunc(x, p)
}

/// `Σ nm (T^{(n−1+c)(m−1+c)} + T^{(n+1−c)(m+1−c)})`.
pub fn oc_cell(c: Q, p: Q) -> Nov {
    let mut x = lattice_sum(p, |n, m| n * m, |n, m| (qi(n - 1) + c) * (qi(m - 1) + c));
    x.extend(lattice_sum(p, |n, m| n * m, |n, m| (qi(n + 1) - c) * (qi(m + 1) - c)));
    trunc(x, p)
}

/// Torus models: `nx` horizontal circles `y = (j−1)/nx` and `ny` vertical
/// circles `x = (k−1)/ny`. Supported shapes are `1×1`, `N×1` and `N×N`.
pub fn build_torus(nx: usize, ny: usize, p: Q, h: Q) -> Result<Model> {
    check_h(h)?;
    if p <= Q::zero() {
        return Err(Error::Precondition("precision must be positive".into()));
    }
    if nx == 0 || ny == 0 || !(ny == 1 || nx == ny) {
        return Err(Error::Precondition(format!("unsupported torus family {nx}×{ny}: use 1×1, N×1 or N×N")));
    }
    let mut b = Builder::new(2, 1);
    let hx: Vec<String> = (1..=nx).map(|j| if nx == 1 { "x".into() } else { j.to_string() }).collect();
    let vy: Vec<String> = (1..=ny).map(|k| if ny == 1 { "y".into() } else { format!("y{k}") }).collect();
    let mut pts = Vec::new();
    for s in &hx {
        let mut o = Object::new(format!("L{s}"));
        o.family = Some("horizontal".into());
        b.object(o, format!("e_{s}"));
    }
    for s in &vy {
        let mut o = Object::new(format!("L{s}"));
        o.family = Some("vertical".into());
        b.object(o, format!("e_{s}"));
    }
    for (i, s) in hx.iter().chain(&vy).enumerate() {
        pts.push(b.gen(format!("pt_{s}"), i, i, 1, Q::zero()));
    }
    let mut xy = vec![vec![0; ny]; nx];
    let mut yx = vec![vec![0; nx]; ny];
    let tag = |j: usize, k: usize| {
        if nx == 1 && ny == 1 {
            String::new()
        } else if ny == 1 {
            (j + 1).to_string()
        } else {
            format!("{},{}", j + 1, k + 1)
        }
    };
    for j in 0..nx {
        for k in 0..ny {
            xy[j][k] = b.gen(format!("a{}_xy", tag(j, k)), j, nx + k, 0, h);
            yx[k][j] = b.gen(format!("a{}_yx", tag(j, k)), nx + k, j, 1, h);
        }
    }
    for &pt in &pts {
        b.set(vec![pt, pt], Vector::new());
    }
    let mut oc = BTreeMap::new();
    let mut witness = TensorChain::new();
    let units: Vec<GenId> = (0..nx + ny).map(|i| b.unit(i)).collect();
    let e = |i: usize| units[i];
    if nx == 1 && ny == 1 {
        let (a, c) = (xy[0][0], yx[0][0]);
        for t in [vec![a, c], vec![c, a], vec![a, c, a], vec![c, a, c], vec![a, c, a, c], vec![c, a, c, a]] {
            b.set(t, Vector::new());
        }
        let chain = vec![a, c, a, c];
        oc.insert(chain.clone(), qh_series("u", oc_strip(Q::zero(), p)));
        add_term(&mut witness, chain, &Nov::one());
    } else if ny == 1 {
        let n = nx;
        let inv = q(1, n as i64);
        let (qh, qt) = (q_h(inv, p), q_h_tilde(inv, p));
        let ey = units[nx];
        let set = |b: &mut Builder, t: Tensor, v: Vector| {
            if let Some(old) = b.get(&t) {
                assert_eq!(*old, v, "inconsistent torus table");
            }
            b.set(t, v);
        };
        for j in 0..n {
            let j1 = (j + 1) % n;
            let (ax, ay, bx, by) = (xy[j][0], yx[0][j], xy[j1][0], yx[0][j1]);
            set(&mut b, vec![ax, ay], Vector::new());
            set(&mut b, vec![ay, ax], Vector::new());
            let cv = if j == 0 { Q::one() - inv } else { inv };
            let qv = q_v(cv, p);
            let sc = |c: &Nov, g: GenId| {
                let mut v = Vector::new();
                add_term(&mut v, g, c);
                v
            };
            set(&mut b, vec![ax, by, bx], sc(&qt, ax));
            set(&mut b, vec![by, bx, ay], sc(&qt, ay));
            set(&mut b, vec![ay, ax, by], sc(&qt, by));
            set(&mut b, vec![bx, ay, ax], sc(&qt, bx));
            set(&mut b, vec![ax, by, bx, ay], sc(&qh, e(j)));
            set(&mut b, vec![by, bx, ay, ax], sc(&qv, ey));
            set(&mut b, vec![bx, ay, ax, by], sc(&qh, e(j1)));
            set(&mut b, vec![ay, ax, by, bx], sc(&qv, ey));
            let gamma = vec![ax, by, bx, ay];
            let c = if j == 0 { Q::one() - inv } else { inv };
            oc.insert(gamma.clone(), qh_series("u", oc_strip(c, p)));
            add_term(&mut witness, gamma, &Nov::one());
            let corr = vec![e(j), ax, ay];
            oc.insert(corr.clone(), QhElement::default());
            add_term(&mut witness, corr, &qt);
        }
    } else {
        let n = nx;
        let chain = vec![xy[0][0], yx[0][1 % n], xy[1 % n][1 % n], yx[1 % n][0]];
        oc.insert(chain.clone(), qh_series("u", oc_cell(q(1, n as i64), p)));
        add_term(&mut witness, chain, &Nov::one());
    }
    let cat = b.build(1)?;
    Ok(Model {
        kind: ModelKind::Torus { nx, ny },
        h,
        precision: Some(p),
        cat,
        qh: vec!["u".into(), "s1".into(), "s2".into(), "pt".into()],
        oc,
        witness,
    })
}

fn qh_series(g: &str, c: Nov) -> QhElement {
    let mut x = QhElement::default();
    x.coeffs.insert(g.to_string(), c);
    x
}

/// The open-closed map on a Hochschild chain of the model.
pub fn oc_evaluate(m: &Model, c: &TensorChain) -> Result<QhElement> {
    let mut out = QhElement::default();
    for (t, x) in hochschild::normalize(&m.cat, c) {
        let v = m.oc.get(&t).ok_or_else(|| Error::Coverage(format!("OC on {}", m.cat.tuple_name(&t))))?;
        for (g, y) in &v.coeffs {
            out.add_term(g, &y.mul_ref(&x));
        }
    }
    Ok(out)
}

/// Result of certifying that the model's family retract-approximates.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub model: String,
    pub witness: Vec<String>,
    /// Level of the witness chain.
    #[serde(serialize_with = "ser_q")]
    pub level: Q,
    /// Valuation of the `u`-coefficient of `OC(witness)`.
    #[serde(serialize_with = "ser_q")]
    pub oc_valuation: Q,
    /// `R(u, OC) ≤ α = level + oc_valuation`.
    #[serde(serialize_with = "ser_q")]
    pub alpha: Q,
    /// `α/2`, plus `h` when the family has more than one Lagrangian.
    #[serde(serialize_with = "ser_q")]
    pub accuracy: Q,
    /// The same accuracy with the perturbation size kept symbolic.
    pub accuracy_symbolic: String,
    #[serde(serialize_with = "ser_opt_q")]
    pub precision: Option<Q>,
    /// Whether `d_CC(witness) = 0` was verified from the tables.
    pub cycle_verified: bool,
    pub within: Option<bool>,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_q(x))
}

fn ser_opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(x) => s.serialize_str(&fmt_q(x)),
        None => s.serialize_none(),
    }
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Checks the witness, evaluates `OC` on it and converts the reach of the
/// unit into an approximation accuracy. If `eps` is given, also reports
/// whether the accuracy is at most `eps`. Witnesses whose cycle condition
/// involves untabulated `μ` are accepted with `cycle_verified = false`.
pub fn approximability_certificate(m: &Model, eps: Option<Q>) -> Result<Certificate> {
    let cycle_verified = match hochschild::is_cycle(&m.cat, &m.witness) {
        Ok(true) => true,
        Ok(false) => return Err(Error::Verification(format!("{}: witness is not a Hochschild cycle", m.name()))),
        Err(Error::Coverage(_)) => false,
        Err(e) => return Err(e),
    };
    let oc = oc_evaluate(m, &m.witness)?;
    let unit = &m.qh[0];
    if oc.coeffs.keys().any(|g| g != unit) {
        return Err(Error::Verification(format!("{}: OC(witness) = {oc} is not a multiple of {unit}", m.name())));
    }
    let Ext::Fin(v) = oc.component(unit).valuation() else {
        return Err(Error::Verification(format!("{}: OC(witness) does not reach {unit}", m.name())));
    };
    let level = hochschild::level(&m.cat, &m.witness).expect("witness is nonzero");
    let alpha = level + v;
    let many = m.family_size() > 1;
    let accuracy = alpha / qi(2) + if many { m.h } else { Q::zero() };
    let (k, c) = symbolic_level(m);
    let coef = qi(k) / qi(2) + if many { Q::one() } else { Q::zero() };
    let constant = (c + v) / qi(2);
    let accuracy_symbolic = if coef.is_zero() { fmt_q(&constant) } else { format!("{} + {}·ν", fmt_q(&constant), fmt_q(&coef)) };
    Ok(Certificate {
        model: m.name(),
        witness: m.witness.iter().map(|(t, c)| format!("({c}) {}", tensor_str(&m.cat, t))).collect(),
        level,
        oc_valuation: v,
        alpha,
        accuracy,
        accuracy_symbolic,
        precision: m.precision,
        cycle_verified,
        within: eps.map(|e| accuracy <= e),
    })
}

/// The witness level as `k·h + c`, read off the leading tensor.
fn symbolic_level(m: &Model) -> (i64, Q) {
    m.witness
        .iter()
        .filter_map(|(t, x)| {
            let k = t.iter().filter(|&&g| m.cat.gens[g].source != m.cat.gens[g].target).count() as i64;
            x.valuation().fin().map(|v| (k, -v))
        })
        .max_by_key(|&(k, c)| (qi(k) * m.h + c, k))
        .unwrap_or((0, Q::zero()))
}

pub fn tensor_str(a: &Category, t: &[GenId]) -> String {
    t.iter().map(|&g| a.gens[g].name.as_str()).collect::<Vec<_>>().join("⊗")
}

/// Looks a model up by descriptor: `single`, `sphere:N`, `torus:NXxNY`.
pub fn model_from_descriptor(desc: &str, h: Q, p: Q) -> Result<Model> {
    let bad = || Error::Parse(format!("unknown model {desc:?}; expected single, sphere:N or torus:NXxNY"));
    if desc == "single" || desc == "single-equator" {
        return build_single_equator(h);
    }
    if let Some(n) = desc.strip_prefix("sphere:") {
        return build_sphere(n.parse().map_err(|_| bad())?, h);
    }
    if let Some(s) = desc.strip_prefix("torus:") {
        let (a, b) = s.split_once('x').ok_or_else(bad)?;
        return build_torus(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?, p, h);
    }
    Err(bad())
}
