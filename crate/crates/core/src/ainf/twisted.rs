//! Filtered twisted complexes: shifted, translated objects with a strictly
//! triangular Maurer–Cartan differential, cones and twists.

use super::{add_term, basis, scale, Category, GenId, Vector};
use crate::error::{Error, Result};
use crate::novikov::Nov;
use crate::novikov_complex::{FloerComplex, FloerGen};
use crate::q::{qstr, Q};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// `Σ^shift X [degree]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub object: usize,
    #[serde(with = "qstr")]
    pub shift: Q,
    pub degree: i64,
}

/// Morphism matrices are keyed by `(i, j)` and hold elements of `A(X_i, Y_j)`.
pub type Matrix = BTreeMap<(usize, usize), Vector>;

/// `q[(i, j)]` (with `i > j`) is the component from summand `i` to summand `j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TwistedComplex {
    pub summands: Vec<Summand>,
    pub q: Matrix,
}

impl TwistedComplex {
    pub fn object(x: usize) -> TwistedComplex {
        TwistedComplex { summands: vec![Summand { object: x, shift: Q::zero(), degree: 0 }], q: Matrix::new() }
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }
}

/// Level and degree of `c·g` viewed as a morphism between two summands.
fn entry_shape(a: &Category, from: &Summand, to: &Summand, g: GenId, c: &Nov) -> (Option<Q>, i64) {
    let h = &a.gens[g];
    let lvl = c.valuation().fin().map(|v| h.level - v - from.shift + to.shift);
    (lvl, a.reduce(h.degree + from.degree - to.degree))
}

fn check_matrix(a: &Category, from: &[Summand], to: &[Summand], m: &Matrix, degree: i64, level: Q) -> Result<()> {
    for (&(i, j), v) in m {
        let (s, t) = (&from[i], &to[j]);
        for (&g, c) in v {
            let h = &a.gens[g];
            if h.source != s.object || h.target != t.object {
                return Err(Error::Precondition(format!("entry ({i}, {j}) uses {} from the wrong hom space", h.name)));
            }
            let (lvl, deg) = entry_shape(a, s, t, g, c);
            if deg != a.reduce(degree) {
                return Err(Error::Precondition(format!("entry ({i}, {j}) has degree {deg}, expected {degree}")));
            }
            if lvl.is_some_and(|l| l > level) {
                return Err(Error::Precondition(format!("entry ({i}, {j}) has level above {level}")));
            }
        }
    }
    Ok(())
}

fn validate(a: &Category, x: &TwistedComplex) -> Result<()> {
    if let Some(&(i, j)) = x.q.keys().find(|(i, j)| i <= j || *i >= x.len()) {
        return Err(Error::Precondition(format!("q has entry ({i}, {j}) outside the strict triangle")));
    }
    check_matrix(a, &x.summands, &x.summands, &x.q, 1, Q::zero())
}

/// Descending `q`-paths `i_0 > i_1 > … > i_m` starting at `i`, with their entries.
fn q_paths(x: &TwistedComplex, i: usize) -> Vec<(usize, Vec<&Vector>)> {
    let mut out = vec![(i, Vec::new())];
    let mut k = 0;
    while k < out.len() {
        let (at, path) = out[k].clone();
        for (&(s, t), v) in x.q.range((at, 0)..(at, at)) {
            debug_assert_eq!(s, at);
            let mut p = path.clone();
            p.push(v);
            out.push((t, p));
        }
        k += 1;
    }
    out
}

/// Paths ending at `i` instead of starting there.
fn q_paths_into(x: &TwistedComplex, i: usize) -> Vec<(usize, Vec<&Vector>)> {
    let mut out = Vec::new();
    for s in i..x.len() {
        for (end, p) in q_paths(x, s) {
            if end == i {
                out.push((s, p));
            }
        }
    }
    out
}

/// `Σ μ_d(q, …, q) = 0` on every entry; coverage gaps are errors.
pub fn maurer_cartan_check(a: &Category, x: &TwistedComplex) -> Result<bool> {
    validate(a, x)?;
    for i in 0..x.len() {
        let mut acc: BTreeMap<usize, Vector> = BTreeMap::new();
        for (end, p) in q_paths(x, i) {
            if p.is_empty() {
                continue;
            }
            let v = a.mu_lin(&p)?;
            let slot = acc.entry(end).or_default();
            for (g, c) in v {
                add_term(slot, g, &c);
            }
        }
        if acc.values().any(|v| !v.is_empty()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `μ₁^{Tw}` of a morphism `f: X → Y`.
pub fn mu1_tw(a: &Category, x: &TwistedComplex, y: &TwistedComplex, f: &Matrix) -> Result<Matrix> {
    let mut out = Matrix::new();
    for (&(i, j), v) in f {
        for (s, pre) in q_paths_into(x, i) {
            for (t, post) in q_paths(y, j) {
                let mut args: Vec<&Vector> = pre.clone();
                args.push(v);
                args.extend(post.iter().copied());
                let img = a.mu_lin(&args)?;
                let slot = out.entry((s, t)).or_default();
                for (g, c) in img {
                    add_term(slot, g, &c);
                }
            }
        }
    }
    out.retain(|_, v| !v.is_empty());
    Ok(out)
}

/// `hom^{Tw}(X, Y)` as a complex over the Novikov field.
#[derive(Debug, Clone)]
pub struct TwHom {
    /// `(i, j, g)` with `g ∈ A(X_i, Y_j)`.
    pub basis: Vec<(usize, usize, GenId)>,
    pub complex: FloerComplex,
}

pub fn tw_hom(a: &Category, x: &TwistedComplex, y: &TwistedComplex) -> Result<TwHom> {
    let mut basis_list = Vec::new();
    for (i, s) in x.summands.iter().enumerate() {
        for (j, t) in y.summands.iter().enumerate() {
            for &g in a.hom(s.object, t.object) {
                basis_list.push((i, j, g));
            }
        }
    }
    let pos: HashMap<(usize, usize, GenId), usize> = basis_list.iter().enumerate().map(|(k, b)| (*b, k)).collect();
    let mut gens = Vec::new();
    let mut d = Vec::new();
    for &(i, j, g) in &basis_list {
        let (lvl, deg) = entry_shape(a, &x.summands[i], &y.summands[j], g, &Nov::one());
        gens.push(FloerGen::new(format!("{}:{}→{}", a.gens[g].name, i, j), a.reduce(-deg), lvl.expect("unit coefficient has a valuation")));
        let f = Matrix::from([((i, j), basis(g))]);
        let mut col = Vec::new();
        for ((s, t), v) in mu1_tw(a, x, y, &f)? {
            for (h, c) in v {
                col.push((pos[&(s, t, h)], c));
            }
        }
        d.push(col);
    }
    Ok(TwHom { basis: basis_list, complex: FloerComplex::new(gens, d, a.modulus)? })
}

/// The `λ`-filtered cone of a degree-0 cycle `f: X → Y` of level at most `λ`:
/// `Y ⊕ Σ^λ X[1]`.
pub fn twisted_cone(a: &Category, x: &TwistedComplex, y: &TwistedComplex, f: &Matrix, lambda: Q) -> Result<TwistedComplex> {
    validate(a, x)?;
    validate(a, y)?;
    check_matrix(a, &x.summands, &y.summands, f, 0, lambda)
        .map_err(|e| Error::Precondition(format!("f is not a degree-0 morphism of level ≤ {lambda}: {e}")))?;
    let m = y.len();
    let mut summands = y.summands.clone();
    for s in &x.summands {
        summands.push(Summand { object: s.object, shift: s.shift + lambda, degree: s.degree + 1 });
    }
    let mut q = y.q.clone();
    for (&(i, j), v) in &x.q {
        q.insert((i + m, j + m), v.clone());
    }
    for (&(i, j), v) in f {
        if !v.is_empty() {
            q.insert((i + m, j), v.clone());
        }
    }
    let cone = TwistedComplex { summands, q };
    if !maurer_cartan_check(a, &cone)? {
        return Err(Error::Verification("f is not a cycle: the cone fails Maurer–Cartan".into()));
    }
    Ok(cone)
}

/// The twisting `T_Y X`: the cone of the evaluation `Y ⊗ hom(Y, X) → X`, with
/// one copy of `Y` per basis element of `hom^{Tw}(Y, X)`.
pub fn twist(a: &Category, y: usize, x: &TwistedComplex) -> Result<TwistedComplex> {
    validate(a, x)?;
    let yt = TwistedComplex::object(y);
    let hom = tw_hom(a, &yt, x)?;
    let n = hom.basis.len();
    // copies must come after every copy their differential reaches
    let mut indeg = vec![0usize; n];
    for col in &hom.complex.d {
        for (t, _) in col {
            indeg[*t] += 1;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut ready: Vec<usize> = (0..n).filter(|&b| indeg[b] == 0).collect();
    while let Some(b) = ready.pop() {
        order.push(b);
        for (t, _) in &hom.complex.d[b] {
            indeg[*t] -= 1;
            if indeg[*t] == 0 {
                ready.push(*t);
            }
        }
    }
    if order.len() < n {
        return Err(Error::Precondition("μ₁ on hom(Y, X) admits no triangular ordering".into()));
    }
    order.reverse();
    let m = x.len();
    let slot: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &b)| (b, m + p)).collect();
    let mut summands = x.summands.clone();
    let mut q = x.q.clone();
    let e = basis(a.unit(y));
    for &b in &order {
        let (_, i, g) = hom.basis[b];
        let s = &x.summands[i];
        summands.push(Summand { object: y, shift: a.gens[g].level + s.shift, degree: a.reduce(1 + s.degree - a.gens[g].degree) });
        q.insert((slot[&b], i), basis(g));
        for (t, c) in &hom.complex.d[b] {
            q.insert((slot[&b], slot[t]), scale(&e, c));
        }
    }
    let tw = TwistedComplex { summands, q };
    if !maurer_cartan_check(a, &tw)? {
        return Err(Error::Verification("twisted complex fails Maurer–Cartan".into()));
    }
    Ok(tw)
}
