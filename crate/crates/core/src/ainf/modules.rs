//! Left `A∞`-modules and the homotopy inverse `λ` of evaluation at the unit.
//!
//! A module structure map is `μ^M_{l|1}(x_1, …, x_l, m)` with
//! `x_i ∈ A(X_{i−1}, X_i)`, `m ∈ M(X_l)` and value in `M(X_0)`.

use super::{add_term, Category, GenId, Report, Tensor};
use crate::error::{Error, Result};
use crate::novikov::Nov;
use crate::q::Q;
use std::collections::{BTreeMap, HashMap};

pub type ModVector = BTreeMap<usize, Nov>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModGen {
    pub name: String,
    pub object: usize,
    pub degree: i64,
    pub level: Q,
}

#[derive(Debug, Clone)]
pub enum Module {
    Zero,
    /// `Z ↦ A(Z, X)` with `μ^M_{l|1} = μ_{l+1}`; generators are hom generators.
    Yoneda(usize),
    Table(TableModule),
}

#[derive(Debug, Clone)]
pub struct TableModule {
    pub gens: Vec<ModGen>,
    pub complete_upto: usize,
    table: HashMap<(Tensor, usize), ModVector>,
}

impl TableModule {
    /// The Yoneda module of `x`, tabulated for `l ≤ max_l`.
    pub fn from_yoneda(a: &Category, x: usize, max_l: usize) -> Result<TableModule> {
        let mut gens = Vec::new();
        let mut id: HashMap<GenId, usize> = HashMap::new();
        for (g, h) in a.gens.iter().enumerate().filter(|(_, h)| h.target == x) {
            id.insert(g, gens.len());
            gens.push(ModGen { name: h.name.clone(), object: h.source, degree: h.degree, level: h.level });
        }
        let mut table = HashMap::new();
        for (g, &m) in &id {
            for l in 0..=max_l {
                let src = a.gens[*g].source;
                let tuples = if l == 0 { vec![Vec::new()] } else { a.tuples(l, None, Some(src), &|_| true) };
                for t in tuples {
                    if t.iter().any(|&u| a.is_unit(u)) {
                        continue;
                    }
                    let mut s = t.clone();
                    s.push(*g);
                    let v: ModVector = a.mu(&s)?.into_iter().map(|(h, c)| (id[&h], c)).collect();
                    if !v.is_empty() {
                        table.insert((t, m), v);
                    }
                }
            }
        }
        Ok(TableModule { gens, complete_upto: max_l, table })
    }

    pub fn gen_id(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn set(&mut self, x: Tensor, m: usize, out: ModVector) {
        self.table.insert((x, m), out);
    }
}

impl Module {
    pub fn gens_at(&self, a: &Category, obj: usize) -> Vec<usize> {
        match self {
            Module::Zero => Vec::new(),
            Module::Yoneda(x) => a.hom(obj, *x).to_vec(),
            Module::Table(t) => (0..t.gens.len()).filter(|&i| t.gens[i].object == obj).collect(),
        }
    }

    pub fn gen_name(&self, a: &Category, m: usize) -> String {
        match self {
            Module::Zero => String::new(),
            Module::Yoneda(_) => a.gens[m].name.clone(),
            Module::Table(t) => t.gens[m].name.clone(),
        }
    }

    /// `μ^M_{|x||1}(x, m)`.
    pub fn act(&self, a: &Category, x: &[GenId], m: usize) -> Result<ModVector> {
        match self {
            Module::Zero => Ok(ModVector::new()),
            Module::Yoneda(_) => {
                let mut s = x.to_vec();
                s.push(m);
                a.mu(&s)
            }
            Module::Table(t) => {
                if x.iter().any(|&g| a.is_unit(g)) {
                    return Ok(if x.len() == 1 { ModVector::from([(m, Nov::one())]) } else { ModVector::new() });
                }
                match t.table.get(&(x.to_vec(), m)) {
                    Some(v) => Ok(v.clone()),
                    None if x.len() <= t.complete_upto => Ok(ModVector::new()),
                    None => Err(Error::Coverage(format!("μ^M on {} ⊗ {}", a.tuple_name(x), t.gens[m].name))),
                }
            }
        }
    }

    fn act_vec(&self, a: &Category, x: &[GenId], v: &ModVector) -> Result<ModVector> {
        let mut out = ModVector::new();
        for (m, c) in v {
            for (k, e) in self.act(a, x, *m)? {
                add_term(&mut out, k, &e.mul_ref(c));
            }
        }
        Ok(out)
    }
}

/// A linear expression in the values of an unknown pre-morphism `φ`: the term
/// `((p, s), c)` stands for `c · μ^M(p, φ(s))`, or `c · φ(s)` when `p` is `None`.
type Expr = BTreeMap<(Option<Tensor>, Tensor), Nov>;

fn phi(t: &[GenId]) -> Expr {
    Expr::from([((None, t.to_vec()), Nov::one())])
}

fn act_expr(prefix: &[GenId], e: &Expr) -> Expr {
    let mut out = Expr::new();
    for ((p, s), c) in e {
        assert!(p.is_none(), "module actions nest at most once");
        add_term(&mut out, (Some(prefix.to_vec()), s.clone()), c);
    }
    out
}

/// `(μ₁ψ)(t)` for the pre-morphism `ψ` between Yoneda-type inputs: outer
/// actions on `ψ` plus `ψ` after contracting any block of `t`.
fn mu1_pre(a: &Category, t: &[GenId], psi: &dyn Fn(&[GenId]) -> Expr) -> Result<Expr> {
    let mut out = Expr::new();
    for i in 0..t.len() {
        for (k, c) in act_expr(&t[..i], &psi(&t[i..])) {
            add_term(&mut out, k, &c);
        }
    }
    let blocks = a.contract_blocks(&super::pure(t.to_vec()), |_, _, _| true)?;
    for (s, c) in &blocks {
        for (k, x) in psi(s) {
            add_term(&mut out, k, &x.mul_ref(c));
        }
    }
    Ok(out)
}

/// Checks `θ∘λ = id` and `λ∘θ + id = μ₁H + Hμ₁` for pre-morphisms from the
/// Yoneda module of `x` to `m`, on all inputs with `l ≤ l_max`, plus the module
/// relations of `m` on the same range.
pub fn verify_lambda_homotopy(a: &Category, x: usize, m: &Module, l_max: usize) -> Result<Report> {
    let mut rep = Report::default();
    let e = a.unit(x);
    for c in m.gens_at(a, x) {
        rep.record(|| format!("θλ = id on {}", m.gen_name(a, c)), m.act(a, &[e], c).map(|v| v == ModVector::from([(c, Nov::one())])));
    }
    for l in 0..=l_max {
        for t in a.tuples(l + 1, None, Some(x), &|_| true) {
            let what = || format!("λθ + id = μ₁H + Hμ₁ at {}", a.tuple_name(&t));
            rep.record(what, homotopy_instance(a, x, m, &t));
        }
    }
    for l in 0..=l_max {
        for obj in 0..a.objects.len() {
            for c in m.gens_at(a, obj) {
                let tuples = if l == 0 { vec![Vec::new()] } else { a.tuples(l, None, Some(obj), &|_| true) };
                for t in tuples {
                    let what = || format!("module relation on {} ⊗ {}", a.tuple_name(&t), m.gen_name(a, c));
                    rep.record(what, module_relation(a, m, &t, c).map(|v| v.is_empty()));
                }
            }
        }
    }
    Ok(rep)
}

fn module_relation(a: &Category, m: &Module, t: &[GenId], c: usize) -> Result<ModVector> {
    let mut out = ModVector::new();
    for i in 0..=t.len() {
        let inner = m.act(a, &t[i..], c)?;
        for (k, v) in m.act_vec(a, &t[..i], &inner)? {
            add_term(&mut out, k, &v);
        }
    }
    let blocks = a.contract_blocks(&super::pure(t.to_vec()), |_, _, _| true)?;
    for (s, x) in &blocks {
        for (k, v) in m.act(a, s, c)? {
            add_term(&mut out, k, &v.mul_ref(x));
        }
    }
    Ok(out)
}

fn homotopy_instance(a: &Category, x: usize, m: &Module, t: &[GenId]) -> Result<bool> {
    let e = a.unit(x);
    let with_e = |s: &[GenId]| {
        let mut v = s.to_vec();
        v.push(e);
        v
    };
    // λθφ + φ
    let mut total = act_expr(t, &phi(&[e]));
    for (k, c) in phi(t) {
        add_term(&mut total, k, &c);
    }
    // μ₁(Hφ)
    let h_phi = |s: &[GenId]| phi(&with_e(s));
    for (k, c) in mu1_pre(a, t, &h_phi)? {
        add_term(&mut total, k, &c);
    }
    // H(μ₁φ)
    for (k, c) in mu1_pre(a, &with_e(t), &|s: &[GenId]| phi(s))? {
        add_term(&mut total, k, &c);
    }
    // the identity must hold for every value of φ on every input
    let mut by_input: BTreeMap<Tensor, Vec<(Option<Tensor>, Nov)>> = BTreeMap::new();
    for ((p, s), c) in total {
        by_input.entry(s).or_default().push((p, c));
    }
    for (s, terms) in by_input {
        for val in m.gens_at(a, a.gens[s[0]].source) {
            let mut acc = ModVector::new();
            for (p, c) in &terms {
                let v = match p {
                    None => ModVector::from([(val, Nov::one())]),
                    Some(p) => m.act(a, p, val)?,
                };
                for (k, y) in v {
                    add_term(&mut acc, k, &y.mul_ref(c));
                }
            }
            if !acc.is_empty() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
