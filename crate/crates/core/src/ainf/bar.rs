//! The bar complex of `K` through a set of objects `B`, its contraction to
//! `A(K, K)`, and the `★` product on the cone of that contraction.
//!
//! A bar tensor `γ₁ ⊗ a₁ ⊗ … ⊗ a_d ⊗ γ₂` is stored as the tuple of its
//! `d + 2` factors. Cone elements are tensors from `K` to `K` of any positive
//! length; length one is the `A(K, K)` summand.

use super::{add_term, pure, Category, GenId, Report, Tensor, TensorChain, Vector};
use crate::error::{Error, Result};
use crate::novikov::Nov;
use crate::novikov_complex::{FloerComplex, FloerGen};
use crate::q::{Ext, Q};
use crate::tseries::{min_preimage_level, LevelMap};
use std::collections::HashMap;

/// `F^N B̄(K, K)` together with the contraction `μ^{B̄}` into `A(K, K)`.
#[derive(Debug, Clone)]
pub struct BarComplex {
    pub tensors: Vec<Tensor>,
    /// Homological grading: degree `−(Σ deg − d)`.
    pub complex: FloerComplex,
    pub targets: Vec<GenId>,
    /// `μ^{B̄}` on each bar generator, as `(index into targets, coefficient)`.
    pub mu_map: Vec<Vec<(usize, Nov)>>,
    index: HashMap<Tensor, usize>,
}

/// Cohomological degree of a bar tensor.
fn bar_degree(a: &Category, t: &[GenId]) -> i64 {
    a.reduce(a.tensor_degree(t) - (t.len() as i64 - 2))
}

/// Bar differential: every block that does not contain both end factors.
pub fn bar_differential(a: &Category, c: &TensorChain) -> Result<TensorChain> {
    a.contract_blocks(c, |n, i, k| !(i == 0 && i + k == n))
}

/// Differential of the cone of `μ^{B̄}`: every block.
pub fn cone_differential(a: &Category, c: &TensorChain) -> Result<TensorChain> {
    a.contract_blocks(c, |_, _, _| true)
}

impl BarComplex {
    pub fn build(a: &Category, b: &[usize], k: usize, n_max: usize) -> Result<BarComplex> {
        let in_b: Vec<bool> = (0..a.objects.len()).map(|x| b.contains(&x)).collect();
        let mut tensors = Vec::new();
        if !b.is_empty() {
            for d in 0..=n_max {
                tensors.extend(a.tuples(d + 2, Some(k), Some(k), &|x| in_b[x]));
            }
        }
        let index: HashMap<Tensor, usize> = tensors.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let gens = tensors.iter().map(|t| FloerGen::new(a.tuple_name(t), a.reduce(-bar_degree(a, t)), a.tensor_level(t))).collect();
        let targets: Vec<GenId> = a.hom(k, k).to_vec();
        let tpos: HashMap<GenId, usize> = targets.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let mut d = Vec::with_capacity(tensors.len());
        let mut mu_map = Vec::with_capacity(tensors.len());
        for t in &tensors {
            let img = bar_differential(a, &pure(t.clone()))?;
            d.push(img.into_iter().map(|(s, c)| (index[&s], c)).collect());
            mu_map.push(a.mu(t)?.into_iter().map(|(g, c)| (tpos[&g], c)).collect());
        }
        let complex = FloerComplex::new(gens, d, a.modulus)?;
        Ok(BarComplex { tensors, complex, targets, mu_map, index })
    }

    pub fn index_of(&self, t: &[GenId]) -> Option<usize> {
        self.index.get(t).copied()
    }
}

/// Least `α` such that `e_K = μ^{B̄}(h) + μ₁(y)` with `h` a bar cycle and
/// `h`, `y` of level at most `α`, over the length-`n_max` truncation.
pub fn unit_reach(a: &Category, b: &[usize], k: usize, n_max: usize) -> Result<Ext> {
    let bar = BarComplex::build(a, b, k, n_max)?;
    let cx = &bar.complex;
    let deg = |i: usize| bar_degree(a, &bar.tensors[i]);
    let xs: Vec<usize> = (0..cx.dim()).filter(|&i| deg(i) == 0).collect();
    let rows_bar: Vec<usize> = (0..cx.dim()).filter(|&i| deg(i) == a.reduce(1)).collect();
    let ys: Vec<usize> = (0..bar.targets.len()).filter(|&i| a.reduce(a.gens[bar.targets[i]].degree + 1) == 0).collect();
    let rows_a: Vec<usize> = (0..bar.targets.len()).filter(|&i| a.reduce(a.gens[bar.targets[i]].degree) == 0).collect();
    let row_bar: HashMap<usize, usize> = rows_bar.iter().enumerate().map(|(r, &i)| (i, r)).collect();
    let row_a: HashMap<usize, usize> = rows_a.iter().enumerate().map(|(r, &i)| (i, rows_bar.len() + r)).collect();
    let src: Vec<Q> = xs.iter().map(|&i| cx.gens[i].level).chain(ys.iter().map(|&i| a.gens[bar.targets[i]].level)).collect();
    let tgt: Vec<Q> = rows_bar.iter().map(|&i| cx.gens[i].level).chain(rows_a.iter().map(|&i| a.gens[bar.targets[i]].level)).collect();
    let mut f = LevelMap::new(src, tgt);
    for (j, &x) in xs.iter().enumerate() {
        for (i, c) in &cx.d[x] {
            f.push(j, row_bar[i], c.clone());
        }
        for (i, c) in &bar.mu_map[x] {
            f.push(j, row_a[i], c.clone());
        }
    }
    let tpos: HashMap<GenId, usize> = bar.targets.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    for (j, &y) in ys.iter().enumerate() {
        for (g, c) in a.mu(&[bar.targets[y]])? {
            f.push(xs.len() + j, row_a[&tpos[&g]], c);
        }
    }
    let e = tpos[&a.unit(k)];
    min_preimage_level(&f, &[(row_a[&e], Nov::one())])
}

fn check_bar_chain(a: &Category, b: &[usize], k: usize, h: &TensorChain) -> Result<()> {
    for t in h.keys() {
        let ok = t.len() >= 2
            && a.composable(t)
            && a.gens[t[0]].source == k
            && a.gens[*t.last().unwrap()].target == k
            && t[1..].iter().all(|&g| b.contains(&a.gens[g].source));
        if !ok {
            return Err(Error::Precondition(format!("{} is not a bar tensor", a.tuple_name(t))));
        }
    }
    Ok(())
}

/// Checks that `h` is a bar cycle with `μ^{B̄}(h) + μ₁(y) = e_K` and returns
/// the level of the pair.
pub fn unit_witness_level(a: &Category, b: &[usize], k: usize, h: &TensorChain, y: &Vector) -> Result<Q> {
    check_bar_chain(a, b, k, h)?;
    if !bar_differential(a, h)?.is_empty() {
        return Err(Error::Verification("witness is not a bar cycle".into()));
    }
    let mut img = a.mu_chain(h)?;
    for (g, c) in a.mu_lin(&[y])? {
        add_term(&mut img, g, &c);
    }
    if img != super::basis(a.unit(k)) {
        return Err(Error::Verification("witness does not contract to the unit".into()));
    }
    let yl = a.level_of(y);
    a.chain_level(h).max(yl).ok_or_else(|| Error::Precondition("zero witness".into()))
}

/// `x ★ y = Σ x₁…x_k ⊗ μ(x_{k+1}, …, x_d, y₁, …, y_j) ⊗ y_{j+1}…y_n` with
/// `0 ≤ k < d` and `1 ≤ j ≤ n`.
pub fn star_product(a: &Category, x: &TensorChain, y: &TensorChain) -> Result<TensorChain> {
    let mut out = TensorChain::new();
    for (s, c) in x {
        for (t, c2) in y {
            let coef = c.mul_ref(c2);
            let joined: Tensor = s.iter().chain(t.iter()).copied().collect();
            if !a.composable(&joined) {
                continue;
            }
            for k in 0..s.len() {
                for j in 1..=t.len() {
                    a.contract(&joined, &coef, k, s.len() - k + j, &mut out)?;
                }
            }
        }
    }
    Ok(out)
}

/// `H(x) = x ★ c` for a cone element `c = h + y` with `D c = e_K`.
#[derive(Debug, Clone)]
pub struct Homotopy {
    pub c: TensorChain,
    pub level: Q,
}

impl Homotopy {
    pub fn apply(&self, a: &Category, x: &TensorChain) -> Result<TensorChain> {
        star_product(a, x, &self.c)
    }

    /// `D H x + H D x + x`, which vanishes when `H` contracts the cone.
    pub fn defect(&self, a: &Category, x: &TensorChain) -> Result<TensorChain> {
        let mut out = cone_differential(a, &self.apply(a, x)?)?;
        for (t, c) in self.apply(a, &cone_differential(a, x)?)? {
            add_term(&mut out, t, &c);
        }
        for (t, c) in x {
            add_term(&mut out, t.clone(), c);
        }
        Ok(out)
    }
}

/// Builds `H` from a unit witness `(h, y)`; fails unless it is one.
pub fn contracting_homotopy(a: &Category, b: &[usize], k: usize, h: &TensorChain, y: &Vector) -> Result<Homotopy> {
    let level = unit_witness_level(a, b, k, h, y)?;
    let mut c = h.clone();
    for (g, x) in y {
        add_term(&mut c, vec![*g], x);
    }
    Ok(Homotopy { c, level })
}

/// Full contractions of `prefix ⊗ t[i..i+k] contracted ⊗ rest` summed into `out`.
fn contract_then_full(a: &Category, t: &[GenId], i: usize, k: usize, out: &mut Vector) -> Result<()> {
    let mut tmp = TensorChain::new();
    a.contract(t, &Nov::one(), i, k, &mut tmp)?;
    for (g, c) in a.mu_chain(&tmp)? {
        add_term(out, g, &c);
    }
    Ok(())
}

/// One instance of `λ∘μ^{B̄}(γ) + μ₂(λ̄_γ, ξ) = μ₁(H_γ) + H_{∂γ}` evaluated at
/// `(x₁, …, x_l, y)`.
fn abouzaid_instance(a: &Category, x: &[GenId], gamma: &[GenId]) -> Result<bool> {
    let l = x.len() - 1;
    let d = gamma.len() - 2;
    let t: Tensor = x.iter().chain(gamma).copied().collect();
    let n = t.len();
    let mut lhs = Vector::new();
    // λ(μ^{B̄} γ)(x, y) = μ(x, y, μ(γ))
    let mu_gamma = a.mu(gamma)?;
    for (g, c) in &mu_gamma {
        let mut s = x.to_vec();
        s.push(*g);
        for (h, e) in a.mu(&s)? {
            add_term(&mut lhs, h, &e.mul_ref(c));
        }
    }
    // ξ ∘ λ̄: λ̄ absorbs y, γ₁ and the first j interior factors
    for i in 0..=l {
        for j in 0..=d {
            contract_then_full(a, &t, i, (l + 1 - i) + 1 + j, &mut lhs)?;
        }
    }
    let mut rhs = Vector::new();
    // μ₁(H_γ): outer action on H, then H after a block inside (x, y)
    for i in 0..=l {
        contract_then_full(a, &t, i, n - i, &mut rhs)?;
    }
    for i in 0..=l {
        for k in 1..=l + 1 - i {
            contract_then_full(a, &t, i, k, &mut rhs)?;
        }
    }
    // H on the bar differential of γ
    for i in l + 1..n {
        for k in 1..=n - i {
            if !(i == l + 1 && k == d + 2) {
                contract_then_full(a, &t, i, k, &mut rhs)?;
            }
        }
    }
    Ok(lhs == rhs)
}

/// Checks the commutative diagram relating `λ`, `λ̄`, `ξ` and `H` on every bar
/// generator of length at most `n_max` and every input `(x₁, …, x_l, y)` with
/// `l ≤ l_max`.
pub fn verify_abouzaid_diagram(a: &Category, b: &[usize], k: usize, n_max: usize, l_max: usize) -> Result<Report> {
    let bar = BarComplex::build(a, b, k, n_max)?;
    let mut rep = Report::default();
    for gamma in &bar.tensors {
        for l in 0..=l_max {
            for x in a.tuples(l + 1, None, Some(k), &|_| true) {
                rep.record(|| format!("diagram at γ = {}, x = {}", a.tuple_name(gamma), a.tuple_name(&x)), abouzaid_instance(a, &x, gamma));
            }
        }
    }
    Ok(rep)
}
