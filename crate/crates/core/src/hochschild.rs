//! Normalized cyclic bar complexes of tabulated categories.
//!
//! A chain is a combination of cyclically composable tensors
//! `x_0 ⊗ x_1 ⊗ … ⊗ x_{k−1}`; tensors with a unit in a position other than
//! the first are zero. The level of a tensor is the sum of its factor levels
//! and its degree is `k − 1 − n − Σ deg x_i`, with hom degrees read
//! cohomologically.

use crate::ainf::{add_term, Category, GenId, Tensor, TensorChain};
use crate::error::{Error, Result};
use crate::novikov::Nov;
use crate::novikov_complex::{concise_barcode, ConciseBarcode, FloerComplex, FloerGen};
use crate::q::{Ext, Q};
use crate::tseries::{min_preimage_level, LevelMap};
use std::collections::HashMap;

pub fn is_cyclic(a: &Category, t: &[GenId]) -> bool {
    !t.is_empty() && a.composable(t) && a.gens[*t.last().unwrap()].target == a.gens[t[0]].source
}

pub fn is_normalized(a: &Category, t: &[GenId]) -> bool {
    t.iter().skip(1).all(|&g| !a.is_unit(g))
}

/// Drops tensors that vanish in the normalized complex.
pub fn normalize(a: &Category, c: &TensorChain) -> TensorChain {
    c.iter().filter(|(t, _)| is_normalized(a, t)).map(|(t, x)| (t.clone(), x.clone())).collect()
}

pub fn degree(a: &Category, t: &[GenId]) -> i64 {
    a.reduce(t.len() as i64 - 1 - a.half_dim - a.tensor_degree(t))
}

fn check(a: &Category, c: &TensorChain) -> Result<()> {
    match c.keys().find(|t| !is_cyclic(a, t)) {
        Some(t) => Err(Error::Precondition(format!("{} is not cyclically composable", a.tuple_name(t)))),
        None => Ok(()),
    }
}

/// The cyclic differential: every block not containing `x_0` is contracted in
/// place; a block containing `x_0` puts its output first.
pub fn dcc(a: &Category, c: &TensorChain) -> Result<TensorChain> {
    check(a, c)?;
    let mut out = TensorChain::new();
    for (t, x) in normalize(a, c) {
        let k = t.len();
        for i in 1..k {
            for len in 1..=k - i {
                a.contract(&t, &x, i, len, &mut out)?;
            }
        }
        for s in 0..k {
            for j in 1..=k - s {
                let rot: Tensor = t[k - s..].iter().chain(&t[..k - s]).copied().collect();
                a.contract(&rot, &x, 0, s + j, &mut out)?;
            }
        }
    }
    Ok(normalize(a, &out))
}

pub fn is_cycle(a: &Category, c: &TensorChain) -> Result<bool> {
    Ok(dcc(a, c)?.is_empty())
}

/// Level of a chain: `max (Σ ℓ(x_i) − val(c))`.
pub fn level(a: &Category, c: &TensorChain) -> Option<Q> {
    a.chain_level(&normalize(a, c))
}

/// The length filtration piece `F^N CC` as a complex over the Novikov field.
#[derive(Debug, Clone)]
pub struct HochschildComplex {
    pub tensors: Vec<Tensor>,
    pub complex: FloerComplex,
    index: HashMap<Tensor, usize>,
}

impl HochschildComplex {
    pub fn build(a: &Category, n_max: usize) -> Result<HochschildComplex> {
        let mut tensors = Vec::new();
        for len in 1..=n_max {
            for obj in 0..a.objects.len() {
                for t in a.tuples(len, Some(obj), Some(obj), &|_| true) {
                    if is_normalized(a, &t) {
                        tensors.push(t);
                    }
                }
            }
        }
        let index: HashMap<Tensor, usize> = tensors.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let gens = tensors.iter().map(|t| FloerGen::new(a.tuple_name(t), degree(a, t), a.tensor_level(t))).collect();
        let mut d = Vec::with_capacity(tensors.len());
        for t in &tensors {
            let img = dcc(a, &crate::ainf::pure(t.clone()))?;
            d.push(img.into_iter().map(|(s, c)| (index[&s], c)).collect());
        }
        Ok(HochschildComplex { complex: FloerComplex::new(gens, d, a.modulus)?, tensors, index })
    }

    pub fn index_of(&self, t: &[GenId]) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn vector(&self, c: &TensorChain) -> Result<Vec<(usize, Nov)>> {
        c.iter()
            .map(|(t, x)| {
                self.index_of(t)
                    .map(|i| (i, x.clone()))
                    .ok_or_else(|| Error::Precondition(format!("tensor of length {} outside the truncation", t.len())))
            })
            .collect()
    }
}

/// Concise barcode of `F^N CC`, optionally restricted to one degree.
pub fn hochschild_barcode(a: &Category, n_max: usize, deg: Option<i64>) -> Result<ConciseBarcode> {
    let hc = HochschildComplex::build(a, n_max)?;
    let mut b = concise_barcode(&hc.complex)?;
    if let Some(k) = deg {
        let k = a.reduce(k);
        b.finite.retain(|x| x.degree == k);
        b.infinite.retain(|d, _| *d == k);
    }
    Ok(b)
}

/// How far above its own level a boundary `c` first becomes one:
/// `min {ℓ(b) : d_CC b = c} − ℓ(c)` within `F^N CC`, or `∞` if `c` is not
/// a boundary there.
pub fn boundary_depth_of(a: &Category, c: &TensorChain, n_max: usize) -> Result<Ext> {
    let c = normalize(a, c);
    let Some(lc) = a.chain_level(&c) else {
        return Err(Error::Precondition("zero chain".into()));
    };
    let hc = HochschildComplex::build(a, n_max)?;
    let w = hc.vector(&c)?;
    let deg = degree(a, c.keys().next().unwrap());
    let cx = &hc.complex;
    let srcs: Vec<usize> = (0..cx.dim()).filter(|&i| cx.gens[i].degree == a.reduce(deg + 1)).collect();
    let tgts: Vec<usize> = (0..cx.dim()).filter(|&i| cx.gens[i].degree == deg).collect();
    let row: HashMap<usize, usize> = tgts.iter().enumerate().map(|(r, &i)| (i, r)).collect();
    let mut f = LevelMap::new(srcs.iter().map(|&i| cx.gens[i].level).collect(), tgts.iter().map(|&i| cx.gens[i].level).collect());
    for (j, &s) in srcs.iter().enumerate() {
        for (i, x) in &cx.d[s] {
            f.push(j, row[i], x.clone());
        }
    }
    let w: Vec<(usize, Nov)> = w.into_iter().map(|(i, x)| (row[&i], x)).collect();
    Ok(match min_preimage_level(&f, &w)? {
        Ext::Fin(l) => Ext::Fin(l - lc),
        Ext::Inf => Ext::Inf,
    })
}

/// Sum of two chains.
pub fn add(a: &TensorChain, b: &TensorChain) -> TensorChain {
    let mut out = a.clone();
    for (t, x) in b {
        add_term(&mut out, t.clone(), x);
    }
    out
}
