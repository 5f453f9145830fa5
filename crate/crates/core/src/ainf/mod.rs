//! Filtered A∞-categories over `Z/2` given by finite tables of structure maps.
//!
//! Composition is written in path order: `μ_d(x_1, …, x_d)` takes
//! `x_i ∈ A(X_{i−1}, X_i)` into `A(X_0, X_d)` with degree `2 − d`. Every object
//! carries a strict unit at level 0 and the unit rules are applied before the
//! table is consulted. Orders up to `complete_upto` are tabulated in full, so
//! a missing tuple there means zero; above it only listed tuples are known.

mod bar;
mod modules;
mod twisted;

pub use bar::{
    bar_differential, cone_differential, contracting_homotopy, star_product, unit_reach, unit_witness_level, verify_abouzaid_diagram,
    BarComplex, Homotopy,
};
pub use modules::{verify_lambda_homotopy, ModGen, ModVector, Module, TableModule};
pub use twisted::{maurer_cartan_check, mu1_tw, tw_hom, twist, twisted_cone, Matrix, Summand, TwHom, TwistedComplex};

use crate::error::{Error, Result};
use crate::novikov::Nov;
use crate::q::{qstr, Q};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

pub type GenId = usize;
/// A linear combination of hom generators.
pub type Vector = BTreeMap<GenId, Nov>;
pub type Tensor = Vec<GenId>;
/// A linear combination of composable tensors.
pub type TensorChain = BTreeMap<Tensor, Nov>;

/// Adds `c·k` to `m` over `Z/2`, dropping cancelled terms.
pub fn add_term<K: Ord>(m: &mut BTreeMap<K, Nov>, k: K, c: &Nov) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match m.entry(k) {
        Entry::Vacant(v) => {
            v.insert(c.clone());
        }
        Entry::Occupied(mut o) => {
            let s = o.get().add_ref(c);
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

pub fn add_into<K: Ord + Clone>(m: &mut BTreeMap<K, Nov>, other: &BTreeMap<K, Nov>) {
    for (k, c) in other {
        add_term(m, k.clone(), c);
    }
}

pub fn scale<K: Ord + Clone>(m: &BTreeMap<K, Nov>, c: &Nov) -> BTreeMap<K, Nov> {
    let mut out = BTreeMap::new();
    for (k, x) in m {
        add_term(&mut out, k.clone(), &x.mul_ref(c));
    }
    out
}

pub fn basis(g: GenId) -> Vector {
    BTreeMap::from([(g, Nov::one())])
}

pub fn pure(t: Tensor) -> TensorChain {
    BTreeMap::from([(t, Nov::one())])
}

fn zero_q() -> Q {
    Q::zero()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Object {
    pub name: String,
    /// Shift tag `a_L`; objects in one family are shifts of each other.
    #[serde(with = "qstr", default = "zero_q")]
    pub shift: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default)]
    pub grading: i64,
}

impl Object {
    pub fn new(name: impl Into<String>) -> Object {
        Object { name: name.into(), shift: Q::zero(), family: None, grading: 0 }
    }

    pub fn family(&self) -> &str {
        self.family.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomGen {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub degree: i64,
    pub level: Q,
}

#[derive(Debug, Clone)]
pub struct Category {
    pub objects: Vec<Object>,
    pub gens: Vec<HomGen>,
    pub units: Vec<GenId>,
    pub modulus: u32,
    /// Half the ambient dimension, used by the Hochschild grading.
    pub half_dim: i64,
    pub complete_upto: usize,
    table: HashMap<Tensor, Vector>,
    homs: HashMap<(usize, usize), Vec<GenId>>,
    is_unit: Vec<bool>,
    gen_index: HashMap<String, GenId>,
    obj_index: HashMap<String, usize>,
}

/// Incremental construction of a [`Category`]; `build` validates.
#[derive(Debug, Clone, Default)]
pub struct Builder {
    objects: Vec<Object>,
    gens: Vec<HomGen>,
    units: Vec<GenId>,
    table: HashMap<Tensor, Vector>,
    modulus: u32,
    half_dim: i64,
}

impl Builder {
    pub fn new(modulus: u32, half_dim: i64) -> Builder {
        Builder { modulus, half_dim, ..Default::default() }
    }

    /// Adds an object together with its unit generator.
    pub fn object(&mut self, obj: Object, unit: impl Into<String>) -> usize {
        let k = self.objects.len();
        self.objects.push(obj);
        let e = self.gen(unit, k, k, 0, Q::zero());
        self.units.push(e);
        k
    }

    pub fn gen(&mut self, name: impl Into<String>, source: usize, target: usize, degree: i64, level: Q) -> GenId {
        self.gens.push(HomGen { name: name.into(), source, target, degree, level });
        self.gens.len() - 1
    }

    /// Sets `μ_d(inputs)`, replacing any earlier value.
    pub fn set(&mut self, inputs: Tensor, out: Vector) {
        self.table.insert(inputs, out);
    }

    pub fn unit(&self, obj: usize) -> GenId {
        self.units[obj]
    }

    pub fn get(&self, inputs: &[GenId]) -> Option<&Vector> {
        self.table.get(inputs)
    }

    pub fn build(self, complete_upto: usize) -> Result<Category> {
        let mut homs: HashMap<(usize, usize), Vec<GenId>> = HashMap::new();
        let mut gen_index = HashMap::new();
        for (i, g) in self.gens.iter().enumerate() {
            if g.source >= self.objects.len() || g.target >= self.objects.len() {
                return Err(Error::Precondition(format!("generator {} has an unknown endpoint", g.name)));
            }
            if gen_index.insert(g.name.clone(), i).is_some() {
                return Err(Error::Precondition(format!("duplicate generator name {}", g.name)));
            }
            homs.entry((g.source, g.target)).or_default().push(i);
        }
        let mut obj_index = HashMap::new();
        for (i, o) in self.objects.iter().enumerate() {
            if obj_index.insert(o.name.clone(), i).is_some() {
                return Err(Error::Precondition(format!("duplicate object name {}", o.name)));
            }
        }
        let mut is_unit = vec![false; self.gens.len()];
        for &e in &self.units {
            is_unit[e] = true;
        }
        let c = Category {
            objects: self.objects,
            gens: self.gens,
            units: self.units,
            modulus: self.modulus,
            half_dim: self.half_dim,
            complete_upto,
            table: self.table.into_iter().map(|(k, v)| (k, v.into_iter().filter(|(_, c)| !c.is_zero()).collect())).collect(),
            homs,
            is_unit,
            gen_index,
            obj_index,
        };
        c.validate_table()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub checked: usize,
    pub failures: Vec<String>,
    pub uncheckable: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn merge(&mut self, o: Report) {
        self.checked += o.checked;
        self.failures.extend(o.failures);
        self.uncheckable.extend(o.uncheckable);
    }

    /// The report itself, or a verification error naming the first failure.
    pub fn into_result(self) -> Result<Report> {
        match self.failures.first() {
            Some(f) => Err(Error::Verification(format!("{f} ({} failures)", self.failures.len()))),
            None => Ok(self),
        }
    }

    /// Records the outcome of one identity check.
    pub fn record(&mut self, what: impl FnOnce() -> String, outcome: Result<bool>) {
        match outcome {
            Ok(true) => self.checked += 1,
            Ok(false) => {
                self.checked += 1;
                self.failures.push(what());
            }
            Err(Error::Coverage(m)) => self.uncheckable.push(format!("{}: {m}", what())),
            Err(e) => self.failures.push(format!("{}: {e}", what())),
        }
    }
}

impl Category {
    pub fn reduce(&self, k: i64) -> i64 {
        if self.modulus == 0 {
            k
        } else {
            k.rem_euclid(self.modulus as i64)
        }
    }

    pub fn gen_id(&self, name: &str) -> Result<GenId> {
        self.gen_index.get(name).copied().ok_or_else(|| Error::Precondition(format!("unknown generator {name:?}")))
    }

    pub fn obj_id(&self, name: &str) -> Result<usize> {
        self.obj_index.get(name).copied().ok_or_else(|| Error::Precondition(format!("unknown object {name:?}")))
    }

    pub fn hom(&self, x: usize, y: usize) -> &[GenId] {
        self.homs.get(&(x, y)).map_or(&[], |v| v.as_slice())
    }

    pub fn is_unit(&self, g: GenId) -> bool {
        self.is_unit[g]
    }

    pub fn unit(&self, x: usize) -> GenId {
        self.units[x]
    }

    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    pub fn table_entries(&self) -> impl Iterator<Item = (&Tensor, &Vector)> {
        self.table.iter()
    }

    pub fn tuple_name(&self, t: &[GenId]) -> String {
        let names: Vec<&str> = t.iter().map(|&g| self.gens[g].name.as_str()).collect();
        format!("({})", names.join(", "))
    }

    pub fn composable(&self, t: &[GenId]) -> bool {
        t.windows(2).all(|w| self.gens[w[0]].target == self.gens[w[1]].source)
    }

    /// Is `μ_{|t|}(t)` known, by a unit rule, the table, completeness or an
    /// empty output space?
    pub fn covered(&self, t: &[GenId]) -> bool {
        t.iter().any(|&g| self.is_unit[g]) || t.len() <= self.complete_upto || self.table.contains_key(t) || self.lands_in_zero(t)
    }

    fn lands_in_zero(&self, t: &[GenId]) -> bool {
        self.hom(self.gens[t[0]].source, self.gens[t[t.len() - 1]].target).is_empty()
    }

    /// `μ_{|t|}(t)` on basis elements.
    pub fn mu(&self, t: &[GenId]) -> Result<Vector> {
        if t.is_empty() {
            return Ok(Vector::new());
        }
        if let Some(i) = t.iter().position(|&g| self.is_unit[g]) {
            return Ok(if t.len() == 2 { basis(t[1 - i]) } else { Vector::new() });
        }
        match self.table.get(t) {
            Some(v) => Ok(v.clone()),
            None if t.len() <= self.complete_upto || self.lands_in_zero(t) => Ok(Vector::new()),
            None => Err(Error::Coverage(format!("μ_{} on {}", t.len(), self.tuple_name(t)))),
        }
    }

    /// Multilinear extension of `μ` to vectors.
    pub fn mu_lin(&self, args: &[&Vector]) -> Result<Vector> {
        let mut out = Vector::new();
        let mut idx = vec![0usize; args.len()];
        let items: Vec<Vec<(&GenId, &Nov)>> = args.iter().map(|v| v.iter().collect()).collect();
        if items.iter().any(|v| v.is_empty()) {
            return Ok(out);
        }
        loop {
            let t: Tensor = idx.iter().zip(&items).map(|(&k, v)| *v[k].0).collect();
            let mut c = Nov::one();
            for (&k, v) in idx.iter().zip(&items) {
                c = c.mul_ref(v[k].1);
            }
            for (g, x) in self.mu(&t)? {
                add_term(&mut out, g, &x.mul_ref(&c));
            }
            let mut p = 0;
            loop {
                if p == idx.len() {
                    return Ok(out);
                }
                idx[p] += 1;
                if idx[p] < items[p].len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }

    /// Full contraction: `μ_{|t|}` applied to each tensor of `c`.
    pub fn mu_chain(&self, c: &TensorChain) -> Result<Vector> {
        let mut out = Vector::new();
        for (t, x) in c {
            for (g, y) in self.mu(t)? {
                add_term(&mut out, g, &y.mul_ref(x));
            }
        }
        Ok(out)
    }

    /// Adds `c · t[..i] ⊗ μ_k(t[i..i+k]) ⊗ t[i+k..]` to `out`.
    pub fn contract(&self, t: &[GenId], c: &Nov, i: usize, k: usize, out: &mut TensorChain) -> Result<()> {
        for (g, x) in self.mu(&t[i..i + k])? {
            let mut s = Vec::with_capacity(t.len() + 1 - k);
            s.extend_from_slice(&t[..i]);
            s.push(g);
            s.extend_from_slice(&t[i + k..]);
            add_term(out, s, &x.mul_ref(c));
        }
        Ok(())
    }

    /// Contracts every block `[i, i+k)` accepted by `keep` in every tensor of `c`.
    pub fn contract_blocks(&self, c: &TensorChain, mut keep: impl FnMut(usize, usize, usize) -> bool) -> Result<TensorChain> {
        let mut out = TensorChain::new();
        for (t, x) in c {
            let n = t.len();
            for i in 0..n {
                for k in 1..=n - i {
                    if keep(n, i, k) {
                        self.contract(t, x, i, k, &mut out)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// The A∞ relation `Σ μ(…, μ(…), …)` evaluated on one tuple.
    pub fn relation(&self, t: &[GenId]) -> Result<Vector> {
        let inner = self.contract_blocks(&pure(t.to_vec()), |_, _, _| true)?;
        self.mu_chain(&inner)
    }

    pub fn level_of(&self, v: &Vector) -> Option<Q> {
        v.iter().filter_map(|(g, c)| c.valuation().fin().map(|x| self.gens[*g].level - x)).max()
    }

    pub fn tensor_level(&self, t: &[GenId]) -> Q {
        t.iter().map(|&g| self.gens[g].level).sum()
    }

    pub fn tensor_degree(&self, t: &[GenId]) -> i64 {
        t.iter().map(|&g| self.gens[g].degree).sum()
    }

    pub fn chain_level(&self, c: &TensorChain) -> Option<Q> {
        c.iter().filter_map(|(t, x)| x.valuation().fin().map(|v| self.tensor_level(t) - v)).max()
    }

    /// All composable tuples of length `len`, optionally pinned at either end
    /// and with every intermediate object accepted by `inner`.
    pub fn tuples(&self, len: usize, start: Option<usize>, end: Option<usize>, inner: &dyn Fn(usize) -> bool) -> Vec<Tensor> {
        let mut out = Vec::new();
        if len == 0 {
            return out;
        }
        let starts: Vec<usize> = match start {
            Some(s) => vec![s],
            None => (0..self.objects.len()).collect(),
        };
        let mut stack: Vec<GenId> = Vec::new();
        fn rec(
            c: &Category,
            at: usize,
            len: usize,
            end: Option<usize>,
            inner: &dyn Fn(usize) -> bool,
            stack: &mut Vec<GenId>,
            out: &mut Vec<Tensor>,
        ) {
            if stack.len() == len {
                if end.is_none_or(|e| e == at) {
                    out.push(stack.clone());
                }
                return;
            }
            for y in 0..c.objects.len() {
                let last = stack.len() + 1 == len;
                if (!last && !inner(y)) || (last && end.is_some_and(|e| e != y)) {
                    continue;
                }
                for &g in c.hom(at, y) {
                    stack.push(g);
                    rec(c, y, len, end, inner, stack, out);
                    stack.pop();
                }
            }
        }
        for s in starts {
            rec(self, s, len, end, inner, &mut stack, &mut out);
        }
        out
    }

    fn validate_table(&self) -> Result<()> {
        for (k, &e) in self.units.iter().enumerate() {
            let g = &self.gens[e];
            if g.source != k || g.target != k || !g.level.is_zero() || self.reduce(g.degree) != 0 {
                return Err(Error::Precondition(format!("unit {} must be a degree-0, level-0 endomorphism", g.name)));
            }
        }
        for (t, v) in &self.table {
            let name = self.tuple_name(t);
            if t.is_empty() || !self.composable(t) {
                return Err(Error::Precondition(format!("μ entry on non-composable tuple {name}")));
            }
            let (src, tgt) = (self.gens[t[0]].source, self.gens[*t.last().unwrap()].target);
            let deg = self.reduce(self.tensor_degree(t) + 2 - t.len() as i64);
            let lvl = self.tensor_level(t);
            for (g, c) in v {
                let h = &self.gens[*g];
                if h.source != src || h.target != tgt {
                    return Err(Error::Precondition(format!("μ{name} has output {} in the wrong hom space", h.name)));
                }
                if self.reduce(h.degree) != deg {
                    return Err(Error::Precondition(format!("μ{name} has output {} of the wrong degree", h.name)));
                }
                if let Some(v) = c.valuation().fin() {
                    if h.level - v > lvl {
                        return Err(Error::Precondition(format!("μ{name} raises the level")));
                    }
                }
            }
            if let Some(i) = t.iter().position(|&g| self.is_unit[g]) {
                let want = if t.len() == 2 { basis(t[1 - i]) } else { Vector::new() };
                if *v != want {
                    return Err(Error::Precondition(format!("μ{name} violates strict unitality")));
                }
            }
        }
        Ok(())
    }

    /// Checks the A∞ relation on every composable tuple of length at most
    /// `max_len`; tuples needing an unknown `μ` are listed as uncheckable.
    pub fn verify_ainf(&self, max_len: usize) -> Report {
        let mut r = Report::default();
        for len in 1..=max_len {
            for t in self.tuples(len, None, None, &|_| true) {
                r.record(|| format!("A∞ relation on {}", self.tuple_name(&t)), self.relation(&t).map(|v| v.is_empty()));
            }
        }
        r
    }

    /// The normalized `r`-shift: homs between objects of different families
    /// move up by `r`. Also checks that the identity `S^r A → A` is filtered.
    pub fn shift_category(&self, r: Q) -> Result<(Category, Report)> {
        if r < Q::zero() {
            return Err(Error::Precondition("shift must be non-negative".into()));
        }
        let mut s = self.clone();
        for g in &mut s.gens {
            if self.objects[g.source].family() != self.objects[g.target].family() {
                g.level += r;
            }
        }
        s.validate_table()?;
        let mut rep = Report::default();
        for (a, b) in s.gens.iter().zip(&self.gens) {
            rep.record(|| format!("η_r on {}", a.name), Ok(b.level <= a.level));
        }
        for t in s.table.keys() {
            rep.record(|| format!("η_r commutes with μ{}", s.tuple_name(t)), Ok(s.mu(t)? == self.mu(t)?));
        }
        Ok((s, rep))
    }
}

#[derive(Serialize, Deserialize)]
struct ObjectJson {
    #[serde(flatten)]
    object: Object,
    unit: String,
}

#[derive(Serialize, Deserialize)]
struct HomJson {
    name: String,
    source: String,
    target: String,
    degree: i64,
    #[serde(with = "qstr")]
    level: Q,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    gen: String,
    novikov: String,
}

#[derive(Serialize, Deserialize)]
struct MuJson {
    order: usize,
    inputs: Vec<String>,
    output_terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct CategoryJson {
    modulus: u32,
    #[serde(default = "one_i64")]
    half_dim: i64,
    complete_upto: usize,
    objects: Vec<ObjectJson>,
    homs: Vec<HomJson>,
    mu: Vec<MuJson>,
}

fn one_i64() -> i64 {
    1
}

impl Category {
    pub fn parse_json(s: &str) -> Result<Category> {
        let j: CategoryJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("category: {e}")))?;
        let mut b = Builder::new(j.modulus, j.half_dim);
        let mut objs = HashMap::new();
        for o in j.objects {
            let name = o.object.name.clone();
            objs.insert(name, b.object(o.object, o.unit));
        }
        let obj = |n: &str| objs.get(n).copied().ok_or_else(|| Error::Parse(format!("unknown object {n:?}")));
        for h in &j.homs {
            b.gen(h.name.clone(), obj(&h.source)?, obj(&h.target)?, h.degree, h.level);
        }
        let index: HashMap<String, GenId> = b.gens.iter().enumerate().map(|(i, g)| (g.name.clone(), i)).collect();
        let look = |n: &str| index.get(n).copied().ok_or_else(|| Error::Parse(format!("unknown generator {n:?}")));
        for (k, m) in j.mu.iter().enumerate() {
            if m.order != m.inputs.len() {
                return Err(Error::Parse(format!("mu[{k}]: order {} but {} inputs", m.order, m.inputs.len())));
            }
            let t = m.inputs.iter().map(|n| look(n)).collect::<Result<Tensor>>()?;
            let mut v = Vector::new();
            for term in &m.output_terms {
                let c: Nov = term.novikov.parse().map_err(|e: Error| Error::Parse(format!("mu[{k}]: {e}")))?;
                add_term(&mut v, look(&term.gen)?, &c);
            }
            b.set(t, v);
        }
        b.build(j.complete_upto)
    }

    pub fn to_json(&self) -> String {
        let objects =
            self.objects.iter().zip(&self.units).map(|(o, &e)| ObjectJson { object: o.clone(), unit: self.gens[e].name.clone() }).collect();
        let homs = self
            .gens
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.is_unit[*i])
            .map(|(_, g)| HomJson {
                name: g.name.clone(),
                source: self.objects[g.source].name.clone(),
                target: self.objects[g.target].name.clone(),
                degree: g.degree,
                level: g.level,
            })
            .collect();
        let mut entries: Vec<(&Tensor, &Vector)> = self.table.iter().collect();
        entries.sort_by(|a, b| (a.0.len(), a.0).cmp(&(b.0.len(), b.0)));
        let mu = entries
            .into_iter()
            .map(|(t, v)| MuJson {
                order: t.len(),
                inputs: t.iter().map(|&g| self.gens[g].name.clone()).collect(),
                output_terms: v.iter().map(|(g, c)| TermJson { gen: self.gens[*g].name.clone(), novikov: c.to_string() }).collect(),
            })
            .collect();
        let j = CategoryJson { modulus: self.modulus, half_dim: self.half_dim, complete_upto: self.complete_upto, objects, homs, mu };
        serde_json::to_string_pretty(&j).expect("category serializes")
    }
}
