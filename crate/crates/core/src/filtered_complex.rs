//! Finite filtered chain complexes over GF(2).
//!
//! A generator has a name, a degree (taken modulo the grading modulus) and a
//! rational level. The differential never raises level. Everything here is
//! exact: levels are rationals and all linear algebra is over GF(2).

use crate::error::{Error, Result};
use crate::gf2::{self, BitVec, Echelon};
use crate::persistence::{bar_count, retract_interleaving, Bar, Barcode};
use crate::q::{qstr, Ext, Q};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gen {
    pub name: String,
    pub degree: i64,
    #[serde(with = "qstr")]
    pub level: Q,
}

impl Gen {
    pub fn new(name: impl Into<String>, degree: i64, level: Q) -> Gen {
        Gen { name: name.into(), degree, level }
    }
}

/// `d` is stored by columns: `d[j]` lists the generators in `d(g_j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilteredComplex {
    pub gens: Vec<Gen>,
    pub d: Vec<Vec<usize>>,
    pub modulus: u32,
    pub cohomological: bool,
}

#[derive(Serialize, Deserialize)]
struct Edge {
    from: String,
    to: String,
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    modulus: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    cohomological: bool,
    generators: Vec<Gen>,
    differential: Vec<Edge>,
}

fn reduce_deg(modulus: u32, k: i64) -> i64 {
    if modulus == 0 {
        k
    } else {
        k.rem_euclid(modulus as i64)
    }
}

impl FilteredComplex {
    /// Builds and validates a complex.
    pub fn new(gens: Vec<Gen>, d: Vec<Vec<usize>>, modulus: u32) -> Result<FilteredComplex> {
        Self::with_flag(gens, d, modulus, false)
    }

    pub fn with_flag(gens: Vec<Gen>, d: Vec<Vec<usize>>, modulus: u32, cohomological: bool) -> Result<FilteredComplex> {
        let d = d.into_iter().map(gf2::col_from_multiset).collect();
        let c = FilteredComplex { gens, d, modulus, cohomological };
        c.validate()?;
        Ok(c)
    }

    /// From `(from, to)` index pairs.
    pub fn from_edges(gens: Vec<Gen>, edges: &[(usize, usize)], modulus: u32) -> Result<FilteredComplex> {
        let mut d = vec![Vec::new(); gens.len()];
        for &(f, t) in edges {
            if f >= gens.len() || t >= gens.len() {
                return Err(Error::Parse(format!("edge ({f},{t}) out of range")));
            }
            d[f].push(t);
        }
        Self::new(gens, d, modulus)
    }

    pub fn zero(modulus: u32) -> FilteredComplex {
        FilteredComplex { gens: vec![], d: vec![], modulus, cohomological: false }
    }

    /// `E₁(c)`: one generator, no differential.
    pub fn e1(level: Q, degree: i64, modulus: u32) -> FilteredComplex {
        FilteredComplex { gens: vec![Gen::new("c", degree, level)], d: vec![vec![]], modulus, cohomological: false }
    }

    /// `E₂(a,b)`: `db = a`, with `a` in `degree`.
    pub fn e2(va: Q, vb: Q, degree: i64, modulus: u32) -> Result<FilteredComplex> {
        let gens = vec![Gen::new("a", degree, va), Gen::new("b", degree + 1, vb)];
        Self::new(gens, vec![vec![], vec![0]], modulus)
    }

    /// The minimal complex with the given barcode.
    pub fn from_barcode(b: &Barcode) -> FilteredComplex {
        let mut gens = Vec::new();
        let mut d = Vec::new();
        for (k, bar) in b.bars.iter().enumerate() {
            gens.push(Gen::new(format!("x{k}"), bar.degree, bar.birth));
            d.push(vec![]);
            if let Ext::Fin(death) = bar.death {
                let a = gens.len() - 1;
                gens.push(Gen::new(format!("y{k}"), b.reduce(bar.degree + 1), death));
                d.push(vec![a]);
            }
        }
        FilteredComplex { gens, d, modulus: b.modulus, cohomological: false }
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    pub fn d_degree(&self) -> i64 {
        if self.cohomological {
            1
        } else {
            -1
        }
    }

    pub fn reduce(&self, k: i64) -> i64 {
        reduce_deg(self.modulus, k)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.d.len() != n {
            return Err(Error::Precondition("differential has wrong number of columns".into()));
        }
        for (j, col) in self.d.iter().enumerate() {
            for &i in col {
                if i >= n {
                    return Err(Error::Precondition(format!("differential entry {j}->{i} out of range")));
                }
                if self.gens[i].level > self.gens[j].level {
                    return Err(Error::Precondition(format!(
                        "filtration violated: d({}) contains {}",
                        self.gens[j].name, self.gens[i].name
                    )));
                }
                if self.reduce(self.gens[i].degree) != self.reduce(self.gens[j].degree + self.d_degree()) {
                    return Err(Error::Precondition(format!("degree violated: d({}) contains {}", self.gens[j].name, self.gens[i].name)));
                }
            }
        }
        for j in 0..n {
            if !gf2::apply(&self.d, &self.d[j]).is_empty() {
                return Err(Error::Precondition(format!("d² ≠ 0 on {}", self.gens[j].name)));
            }
        }
        Ok(())
    }

    pub fn apply_d(&self, chain: &[usize]) -> Vec<usize> {
        gf2::apply(&self.d, chain)
    }

    /// Filtration level of a chain; `None` for the zero chain.
    pub fn level_of(&self, chain: &[usize]) -> Option<Q> {
        chain.iter().map(|&i| self.gens[i].level).max()
    }

    pub fn shifted(&self, s: Q) -> FilteredComplex {
        let mut c = self.clone();
        for g in &mut c.gens {
            g.level += s;
        }
        c
    }

    pub fn translated(&self, t: i64) -> FilteredComplex {
        let mut c = self.clone();
        for g in &mut c.gens {
            g.degree = reduce_deg(c.modulus, g.degree + t);
        }
        c
    }

    pub fn direct_sum(&self, o: &FilteredComplex) -> Result<FilteredComplex> {
        if self.modulus != o.modulus {
            return Err(Error::ModulusMismatch(self.modulus, o.modulus));
        }
        let n = self.dim();
        let mut gens = self.gens.clone();
        gens.extend(o.gens.iter().cloned());
        let mut d = self.d.clone();
        d.extend(o.d.iter().map(|c| c.iter().map(|i| i + n).collect()));
        Ok(FilteredComplex { gens, d, modulus: self.modulus, cohomological: self.cohomological })
    }

    /// Generator order by level, then topologically along `d` (lowest index first).
    fn filtration_order(&self) -> Result<Vec<usize>> {
        let n = self.dim();
        let mut levels: Vec<Q> = self.gens.iter().map(|g| g.level).collect();
        levels.sort();
        levels.dedup();
        let mut order = Vec::with_capacity(n);
        for lv in levels {
            let block: Vec<usize> = (0..n).filter(|&i| self.gens[i].level == lv).collect();
            let inblock: HashSet<usize> = block.iter().copied().collect();
            // edge j -> i (i in d(j)) forces i before j
            let mut indeg: HashMap<usize, usize> = block.iter().map(|&j| (j, 0)).collect();
            let mut parents: HashMap<usize, Vec<usize>> = HashMap::new();
            for &j in &block {
                for &i in &self.d[j] {
                    if inblock.contains(&i) {
                        *indeg.get_mut(&j).unwrap() += 1;
                        parents.entry(i).or_default().push(j);
                    }
                }
            }
            let mut ready: BTreeSet<usize> = block.iter().copied().filter(|j| indeg[j] == 0).collect();
            let start = order.len();
            while let Some(&i) = ready.iter().next() {
                ready.remove(&i);
                order.push(i);
                for &j in parents.get(&i).map(|v| v.as_slice()).unwrap_or(&[]) {
                    let e = indeg.get_mut(&j).unwrap();
                    *e -= 1;
                    if *e == 0 {
                        ready.insert(j);
                    }
                }
            }
            if order.len() - start != block.len() {
                return Err(Error::Precondition("differential support has a cycle within one level".into()));
            }
        }
        Ok(order)
    }

    pub fn parse_json(s: &str) -> Result<FilteredComplex> {
        let j: ComplexJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("complex: {e}")))?;
        let index: HashMap<&str, usize> = j.generators.iter().enumerate().map(|(i, g)| (g.name.as_str(), i)).collect();
        if index.len() != j.generators.len() {
            return Err(Error::Parse("duplicate generator names".into()));
        }
        let mut d = vec![Vec::new(); j.generators.len()];
        for (k, e) in j.differential.iter().enumerate() {
            let look = |n: &str| index.get(n).copied().ok_or_else(|| Error::Parse(format!("differential[{k}]: unknown generator {n:?}")));
            let (f, t) = (look(&e.from)?, look(&e.to)?);
            d[f].push(t);
        }
        let mut gens = j.generators;
        for g in &mut gens {
            g.degree = reduce_deg(j.modulus, g.degree);
        }
        Self::with_flag(gens, d, j.modulus, j.cohomological)
    }

    pub fn to_json(&self) -> String {
        let mut differential = Vec::new();
        for (j, col) in self.d.iter().enumerate() {
            for &i in col {
                differential.push(Edge { from: self.gens[j].name.clone(), to: self.gens[i].name.clone() });
            }
        }
        let j = ComplexJson { modulus: self.modulus, cohomological: self.cohomological, generators: self.gens.clone(), differential };
        serde_json::to_string(&j).expect("complex serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElemPair {
    /// Cycle `a` with `d(b) = a`.
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub a_gen: usize,
    pub b_gen: usize,
    pub va: Q,
    pub vb: Q,
    pub degree: i64,
}

impl ElemPair {
    pub fn length(&self) -> Q {
        self.vb - self.va
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElemSingle {
    pub c: Vec<usize>,
    pub c_gen: usize,
    pub v: Q,
    pub degree: i64,
}

/// A filtered basis splitting the complex into `E₂` and `E₁` pieces. Each
/// basis chain has a distinct leading generator with the same level.
#[derive(Debug, Clone)]
pub struct ElementaryDecomposition {
    pub pairs: Vec<ElemPair>,
    pub singles: Vec<ElemSingle>,
    /// `basis[g]`: basis chain led by generator `g`.
    pub basis: Vec<Vec<usize>>,
    /// `inverse[g]`: coordinates of generator `g` in the new basis.
    pub inverse: Vec<Vec<usize>>,
    pub order: Vec<usize>,
}

impl ElementaryDecomposition {
    pub fn barcode(&self, modulus: u32) -> Barcode {
        let mut bars: Vec<Bar> = self.pairs.iter().map(|p| Bar::finite(p.va, p.vb, p.degree)).collect();
        bars.extend(self.singles.iter().map(|s| Bar::infinite(s.v, s.degree)));
        Barcode::new(modulus, bars)
    }
}

pub fn decompose_elementary(c: &FilteredComplex) -> Result<ElementaryDecomposition> {
    c.validate()?;
    let n = c.dim();
    let order = c.filtration_order()?;
    let mut pos = vec![0; n];
    for (p, &g) in order.iter().enumerate() {
        pos[g] = p;
    }
    let low = |col: &[usize]| col.iter().copied().max_by_key(|&i| pos[i]);
    let mut r: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut v: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pivot_of: Vec<Option<usize>> = vec![None; n];
    for &j in &order {
        let mut rj = c.d[j].clone();
        let mut vj = vec![j];
        while let Some(l) = low(&rj) {
            match pivot_of[l] {
                Some(k) => {
                    gf2::col_add_assign(&mut rj, &r[k]);
                    gf2::col_add_assign(&mut vj, &v[k]);
                }
                None => {
                    pivot_of[l] = Some(j);
                    break;
                }
            }
        }
        r[j] = rj;
        v[j] = vj;
    }
    let mut pairs = Vec::new();
    let mut singles = Vec::new();
    let mut basis = vec![Vec::new(); n];
    for &j in &order {
        if let Some(l) = low(&r[j]) {
            basis[l] = r[j].clone();
            basis[j] = v[j].clone();
            pairs.push(ElemPair {
                a: r[j].clone(),
                b: v[j].clone(),
                a_gen: l,
                b_gen: j,
                va: c.gens[l].level,
                vb: c.gens[j].level,
                degree: c.gens[l].degree,
            });
        } else if pivot_of[j].is_none() {
            basis[j] = v[j].clone();
            singles.push(ElemSingle { c: v[j].clone(), c_gen: j, v: c.gens[j].level, degree: c.gens[j].degree });
        }
    }
    let mut inverse: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &g in &order {
        let mut acc = vec![g];
        for &h in &basis[g] {
            if h != g {
                acc.extend_from_slice(&inverse[h]);
            }
        }
        inverse[g] = gf2::col_from_multiset(acc);
    }
    Ok(ElementaryDecomposition { pairs, singles, basis, inverse, order })
}

pub fn homology_barcode(c: &FilteredComplex) -> Result<Barcode> {
    Ok(decompose_elementary(c)?.barcode(c.modulus))
}

/// A chain map of the given degree which raises level by at most `shift`.
/// `cols[j]` lists the image of source generator `j`.
#[derive(Debug, Clone)]
pub struct FilteredMap {
    pub source: FilteredComplex,
    pub target: FilteredComplex,
    pub cols: Vec<Vec<usize>>,
    pub shift: Q,
    pub degree: i64,
}

impl FilteredMap {
    pub fn new(source: FilteredComplex, target: FilteredComplex, cols: Vec<Vec<usize>>, shift: Q, degree: i64) -> Result<FilteredMap> {
        let cols = cols.into_iter().map(gf2::col_from_multiset).collect();
        let f = FilteredMap { source, target, cols, shift, degree };
        f.validate()?;
        Ok(f)
    }

    pub fn identity(c: &FilteredComplex) -> FilteredMap {
        FilteredMap { source: c.clone(), target: c.clone(), cols: (0..c.dim()).map(|i| vec![i]).collect(), shift: Q::zero(), degree: 0 }
    }

    pub fn zero(source: &FilteredComplex, target: &FilteredComplex) -> FilteredMap {
        FilteredMap { source: source.clone(), target: target.clone(), cols: vec![vec![]; source.dim()], shift: Q::zero(), degree: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let (s, t) = (&self.source, &self.target);
        if s.modulus != t.modulus {
            return Err(Error::ModulusMismatch(s.modulus, t.modulus));
        }
        if self.cols.len() != s.dim() {
            return Err(Error::Precondition("map has wrong number of columns".into()));
        }
        for (j, col) in self.cols.iter().enumerate() {
            for &i in col {
                if i >= t.dim() {
                    return Err(Error::Precondition(format!("map entry {j}->{i} out of range")));
                }
                if t.gens[i].level > s.gens[j].level + self.shift {
                    return Err(Error::Precondition(format!("map raises level of {} by more than its shift", s.gens[j].name)));
                }
                if t.reduce(t.gens[i].degree) != t.reduce(s.gens[j].degree + self.degree) {
                    return Err(Error::Precondition(format!("map entry from {} has wrong degree", s.gens[j].name)));
                }
            }
            let fd = gf2::apply(&self.cols, &s.d[j]);
            let df = gf2::apply(&t.d, col);
            if fd != df {
                return Err(Error::Precondition(format!("not a chain map at {}", s.gens[j].name)));
            }
        }
        Ok(())
    }

    pub fn apply(&self, chain: &[usize]) -> Vec<usize> {
        gf2::apply(&self.cols, chain)
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &FilteredMap) -> Result<FilteredMap> {
        if self.target.dim() != g.source.dim() {
            return Err(Error::Precondition("maps are not composable".into()));
        }
        let cols = self.cols.iter().map(|c| g.apply(c)).collect();
        Ok(FilteredMap {
            source: self.source.clone(),
            target: g.target.clone(),
            cols,
            shift: self.shift + g.shift,
            degree: self.degree + g.degree,
        })
    }
}

/// `V_δ` with its projection and section.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub complex: FilteredComplex,
    pub projection: FilteredMap,
    pub section: FilteredMap,
}

/// Drops every elementary pair of length `≤ δ`.
pub fn truncate(c: &FilteredComplex, delta: Q) -> Result<Truncation> {
    if delta < Q::zero() {
        return Err(Error::Precondition("truncation parameter must be non-negative".into()));
    }
    let dec = decompose_elementary(c)?;
    let mut keep = vec![false; c.dim()];
    let mut partner: Vec<Option<usize>> = vec![None; c.dim()];
    for p in &dec.pairs {
        if p.length() > delta {
            keep[p.a_gen] = true;
            keep[p.b_gen] = true;
            partner[p.b_gen] = Some(p.a_gen);
        }
    }
    for s in &dec.singles {
        keep[s.c_gen] = true;
    }
    let kept: Vec<usize> = dec.order.iter().copied().filter(|&g| keep[g]).collect();
    let mut new_index = vec![usize::MAX; c.dim()];
    for (k, &g) in kept.iter().enumerate() {
        new_index[g] = k;
    }
    let gens: Vec<Gen> = kept.iter().map(|&g| c.gens[g].clone()).collect();
    let d: Vec<Vec<usize>> = kept.iter().map(|&g| partner[g].map(|a| vec![new_index[a]]).unwrap_or_default()).collect();
    let vd = FilteredComplex { gens, d, modulus: c.modulus, cohomological: c.cohomological };
    let proj_cols: Vec<Vec<usize>> = (0..c.dim())
        .map(|h| {
            let mut col: Vec<usize> = dec.inverse[h].iter().filter(|&&g| keep[g]).map(|&g| new_index[g]).collect();
            col.sort_unstable();
            col
        })
        .collect();
    let sec_cols: Vec<Vec<usize>> = kept.iter().map(|&g| dec.basis[g].clone()).collect();
    let projection = FilteredMap::new(c.clone(), vd.clone(), proj_cols, Q::zero(), 0)?;
    let section = FilteredMap::new(vd.clone(), c.clone(), sec_cols, Q::zero(), 0)?;
    Ok(Truncation { complex: vd, projection, section })
}

/// `target ⊕ Σ^λ source[1]` with `d(s) = f(s) + d(s)`.
pub fn cone(f: &FilteredMap, lambda: Q) -> Result<FilteredComplex> {
    if f.degree != 0 {
        return Err(Error::Precondition("cone needs a degree-0 map".into()));
    }
    if lambda < f.shift {
        return Err(Error::Precondition(format!("cone weight {} is below the map shift {}", lambda, f.shift)));
    }
    let (s, t) = (&f.source, &f.target);
    if s.cohomological != t.cohomological {
        return Err(Error::Precondition("mixed grading conventions".into()));
    }
    let n = t.dim();
    let mut gens = t.gens.clone();
    let mut d = t.d.clone();
    for (j, g) in s.gens.iter().enumerate() {
        gens.push(Gen::new(format!("{}[1]", g.name), t.reduce(g.degree - t.d_degree()), g.level + lambda));
        let mut col = f.cols[j].clone();
        col.extend(s.d[j].iter().map(|i| i + n));
        d.push(col);
    }
    FilteredComplex::with_flag(gens, d, t.modulus, t.cohomological)
}

/// The hom complex. Generator `g*dim(D) + h` sends `g` to `h` and is zero
/// elsewhere; its level is `v(h) − v(g)`.
pub fn internal_hom(c: &FilteredComplex, dd: &FilteredComplex) -> Result<FilteredComplex> {
    if c.modulus != dd.modulus {
        return Err(Error::ModulusMismatch(c.modulus, dd.modulus));
    }
    if c.cohomological != dd.cohomological {
        return Err(Error::Precondition("mixed grading conventions".into()));
    }
    let m = dd.dim();
    let idx = |g: usize, h: usize| g * m + h;
    let mut preimages: Vec<Vec<usize>> = vec![Vec::new(); c.dim()];
    for (x, col) in c.d.iter().enumerate() {
        for &g in col {
            preimages[g].push(x);
        }
    }
    let mut gens = Vec::with_capacity(c.dim() * m);
    let mut d = Vec::with_capacity(c.dim() * m);
    for (g, gg) in c.gens.iter().enumerate() {
        for (h, hh) in dd.gens.iter().enumerate() {
            gens.push(Gen::new(format!("{}->{}", gg.name, hh.name), dd.reduce(hh.degree - gg.degree), hh.level - gg.level));
            let mut col: Vec<usize> = dd.d[h].iter().map(|&h2| idx(g, h2)).collect();
            col.extend(preimages[g].iter().map(|&x| idx(x, h)));
            d.push(col);
        }
    }
    FilteredComplex::with_flag(gens, d, c.modulus, c.cohomological)
}

/// One weight-0 attachment: a new generator of degree `translation` and
/// level `shift` whose boundary is `attaching` (indices into the complex
/// built so far).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConeStep {
    pub generator: String,
    #[serde(with = "qstr")]
    pub shift: Q,
    pub translation: i64,
    #[serde(with = "qstr")]
    pub weight: Q,
    pub attaching: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ConeDecomposition {
    pub steps: Vec<ConeStep>,
    pub start: FilteredComplex,
    pub end: FilteredComplex,
}

impl ConeDecomposition {
    pub fn total_weight(&self) -> Q {
        self.steps.iter().map(|s| s.weight).sum()
    }

    /// Replays the steps from `start`, checking each attachment.
    pub fn realize(start: &FilteredComplex, steps: &[ConeStep]) -> Result<FilteredComplex> {
        let mut c = start.clone();
        for (k, st) in steps.iter().enumerate() {
            let ch = gf2::col_from_multiset(st.attaching.clone());
            if ch.iter().any(|&i| i >= c.dim()) {
                return Err(Error::Verification(format!("step {k}: attaching chain out of range")));
            }
            if !c.apply_d(&ch).is_empty() {
                return Err(Error::Verification(format!("step {k}: attaching chain is not a cycle")));
            }
            if let Some(l) = c.level_of(&ch) {
                if l > st.shift + st.weight {
                    return Err(Error::Verification(format!("step {k}: attaching map exceeds the cone weight")));
                }
            }
            let deg = c.reduce(st.translation);
            if ch.iter().any(|&i| c.reduce(c.gens[i].degree) != c.reduce(deg + c.d_degree())) {
                return Err(Error::Verification(format!("step {k}: attaching chain has the wrong degree")));
            }
            c.gens.push(Gen::new(format!("{}#{k}", st.generator), deg, st.shift + st.weight));
            c.d.push(ch);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn verify(&self) -> Result<()> {
        let end = Self::realize(&self.start, &self.steps)?;
        if end != self.end {
            return Err(Error::Verification("replayed decomposition differs from its end".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMode {
    /// Build something `ε`-close to `C` from `0`.
    ToTarget,
    /// Kill `C` up to `ε` by attaching cones to it.
    ToZero,
}

impl std::str::FromStr for ConeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<ConeMode> {
        match s {
            "to_target" | "target" => Ok(ConeMode::ToTarget),
            "to_zero" | "zero" => Ok(ConeMode::ToZero),
            _ => Err(Error::Parse(format!("unknown cone-length mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConeLength {
    pub value: usize,
    pub decomposition: ConeDecomposition,
}

/// Weighted cone length over `k`: `2·#{bars longer than 2ε} − #{infinite bars}`,
/// with a decomposition realizing it.
pub fn cone_length(c: &FilteredComplex, eps: Q, mode: ConeMode) -> Result<ConeLength> {
    if eps < Q::zero() {
        return Err(Error::Precondition("ε must be non-negative".into()));
    }
    let two_eps = eps + eps;
    let h = homology_barcode(c)?;
    let long = bar_count(&h, two_eps, false)?;
    let value = 2 * long - h.bars.iter().filter(|b| b.is_infinite()).count();
    let mut steps = Vec::new();
    let step = |shift: Q, translation: i64, attaching: Vec<usize>| ConeStep {
        generator: "k".into(),
        shift,
        translation,
        weight: Q::zero(),
        attaching,
    };
    let start = match mode {
        ConeMode::ToTarget => {
            let t = truncate(c, two_eps)?.complex;
            for (g, col) in t.gens.iter().zip(&t.d) {
                steps.push(step(g.level, g.degree, col.clone()));
            }
            FilteredComplex { gens: vec![], d: vec![], modulus: c.modulus, cohomological: c.cohomological }
        }
        ConeMode::ToZero => {
            let dec = decompose_elementary(c)?;
            let up = -c.d_degree();
            let mut next = c.dim();
            for s in &dec.singles {
                steps.push(step(s.v, s.degree + up, s.c.clone()));
                next += 1;
            }
            for p in dec.pairs.iter().filter(|p| p.length() > two_eps) {
                steps.push(step(p.va, p.degree + up, p.a.clone()));
                let mut b = p.b.clone();
                b.push(next);
                steps.push(step(p.vb, p.degree + 2 * up, gf2::col_from_multiset(b)));
                next += 2;
            }
            c.clone()
        }
    };
    let end = ConeDecomposition::realize(&start, &steps)?;
    debug_assert_eq!(steps.len(), value);
    Ok(ConeLength { value, decomposition: ConeDecomposition { steps, start, end } })
}

/// Degree-0 homology classes of `hom(s, x)` at level `≤ 0`, as all chain-map
/// representatives (one per class).
pub fn level_zero_map_classes(s: &FilteredComplex, x: &FilteredComplex) -> Result<Vec<FilteredMap>> {
    let h = internal_hom(s, x)?;
    let n = h.dim();
    let m = x.dim();
    let zero = Q::zero();
    let low: Vec<usize> = (0..n).filter(|&i| h.gens[i].level <= zero).collect();
    let deg0: Vec<usize> = low.iter().copied().filter(|&i| h.reduce(h.gens[i].degree) == 0).collect();
    let from_above: Vec<usize> = low.iter().copied().filter(|&i| h.reduce(h.gens[i].degree + h.d_degree()) == 0).collect();
    let mut bnd = Echelon::new(n, from_above.len() + deg0.len() + 1);
    for &i in &from_above {
        bnd.insert(&BitVec::from_indices(n, &h.d[i]));
    }
    let mut ker = Echelon::new(n, deg0.len().max(1));
    let mut cycles = Vec::new();
    for &i in &deg0 {
        if let Some(rel) = ker.insert_relation(&BitVec::from_indices(n, &h.d[i])) {
            let z: Vec<usize> = rel.indices().into_iter().map(|k| deg0[k]).collect();
            cycles.push(z);
        }
    }
    let mut reps = Vec::new();
    for z in cycles {
        let v = BitVec::from_indices(n, &z);
        if bnd.insert(&v) {
            reps.push(z);
        }
    }
    if reps.len() > 16 {
        return Err(Error::Coverage(format!("{} independent map classes is too many to enumerate", reps.len())));
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << reps.len()) {
        let mut acc = Vec::new();
        for (k, r) in reps.iter().enumerate() {
            if mask >> k & 1 == 1 {
                acc.extend_from_slice(r);
            }
        }
        let chain = gf2::col_from_multiset(acc);
        let mut cols = vec![Vec::new(); s.dim()];
        for e in chain {
            cols[e / m].push(e % m);
        }
        out.push(FilteredMap::new(s.clone(), x.clone(), cols, zero, 0)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetractConeLength {
    pub lower: usize,
    pub upper: Option<usize>,
    /// `k` of the combined family.
    pub k: Q,
}

/// `N^r(A;F,ε)`: least number of weight-0 cone attachments over shifted and
/// translated members of `family`, starting from `0`, after which `A` is an
/// `ε`-retract of the result.
pub fn retract_cone_length_over(a: &FilteredComplex, family: &[FilteredComplex], eps: Q, budget: usize) -> Result<RetractConeLength> {
    if family.is_empty() {
        return Err(Error::Precondition("empty family".into()));
    }
    let mut g_sum = family[0].clone();
    for g in &family[1..] {
        g_sum = g_sum.direct_sum(g)?;
    }
    let self_len = cone_length(&internal_hom(&g_sum, &g_sum)?, Q::zero(), ConeMode::ToTarget)?.value;
    let k = if self_len == 0 { Q::zero() } else { Q::new(1, self_len as i64) };
    let bars = bar_count(&homology_barcode(&internal_hom(&g_sum, a)?)?, eps + eps, false)?;
    let lower_q = k * Q::from_integer(bars as i64);
    let lower = lower_q.ceil().to_integer() as usize;
    let upper = cone_search(a, family, eps, budget)?;
    Ok(RetractConeLength { lower, upper, k })
}

fn cone_search(a: &FilteredComplex, family: &[FilteredComplex], eps: Q, budget: usize) -> Result<Option<usize>> {
    let target = homology_barcode(a)?.sorted();
    let done = |b: &Barcode| -> Result<bool> { Ok(matches!(retract_interleaving(&target, b)?, Ext::Fin(r) if r <= eps)) };
    let start = Barcode::empty(a.modulus);
    if done(&start)? {
        return Ok(Some(0));
    }
    let up = -a.d_degree();
    let mut moves: Vec<FilteredComplex> = Vec::new();
    let mut seen_moves = HashSet::new();
    for g in family {
        for ga in &g.gens {
            for aa in &a.gens {
                let alpha = aa.level - ga.level;
                for t in [aa.degree - ga.degree - up, aa.degree - ga.degree] {
                    let t = a.reduce(t);
                    if seen_moves.insert((g.to_json(), alpha, t)) {
                        moves.push(g.shifted(alpha).translated(t));
                    }
                }
            }
        }
    }
    let key = |b: &Barcode| b.sorted().to_json();
    let mut seen = HashSet::new();
    seen.insert(key(&start));
    let mut frontier = VecDeque::from([start]);
    for depth in 1..=budget {
        let mut next = VecDeque::new();
        while let Some(b) = frontier.pop_front() {
            let x = FilteredComplex::from_barcode(&b);
            for s in &moves {
                for f in level_zero_map_classes(s, &x)? {
                    let nb = homology_barcode(&cone(&f, Q::zero())?)?;
                    if seen.insert(key(&nb)) {
                        if done(&nb)? {
                            return Ok(Some(depth));
                        }
                        next.push_back(nb);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

/// Result of eliminating short `d`-pairs from `(C, d + D′)`.
#[derive(Debug, Clone)]
pub struct StabilityRetract {
    pub retract: FilteredComplex,
    /// `(C, D)` itself.
    pub full: FilteredComplex,
    pub projection: FilteredMap,
    pub section: FilteredMap,
    pub d_barcode: Barcode,
    pub full_barcode: Barcode,
    pub d_acyclic: bool,
}

impl StabilityRetract {
    /// `(#bars of H(C,d) longer than ε, #bars of H(C,D) longer than ε)`.
    pub fn counts(&self, eps: Q) -> Result<(usize, usize)> {
        Ok((bar_count(&self.d_barcode, eps, false)?, bar_count(&self.full_barcode, eps, false)?))
    }
}

/// `c` carries `d`; `d_prime` (by columns) must lower level by at least `δ`.
pub fn stability_reduce(c: &FilteredComplex, d_prime: &[Vec<usize>], delta: Q) -> Result<StabilityRetract> {
    let n = c.dim();
    if d_prime.len() != n {
        return Err(Error::Precondition("D′ has wrong number of columns".into()));
    }
    let d_prime: Vec<Vec<usize>> = d_prime.iter().map(|c| gf2::col_from_multiset(c.clone())).collect();
    for (j, col) in d_prime.iter().enumerate() {
        for &i in col {
            if i >= n || c.gens[i].level > c.gens[j].level - delta {
                return Err(Error::Precondition(format!("D′ entry from {} does not drop level by δ", c.gens[j].name)));
            }
        }
    }
    let big: Vec<Vec<usize>> = (0..n).map(|j| gf2::col_add(&c.d[j], &d_prime[j])).collect();
    let full = FilteredComplex::with_flag(c.gens.clone(), big, c.modulus, c.cohomological)?;
    let dec = decompose_elementary(c)?;
    let d_barcode = dec.barcode(c.modulus);
    // everything below is in the d-elementary basis, indexed by leading generator
    let to_new = |chain: &[usize]| gf2::apply(&dec.inverse, chain);
    let mut dcur: Vec<Vec<usize>> = (0..n).map(|g| to_new(&full.apply_d(&dec.basis[g]))).collect();
    let mut alive = vec![true; n];
    let mut p_tot: Vec<Vec<usize>> = (0..n).map(|g| vec![g]).collect();
    let mut j_tot: Vec<Vec<usize>> = (0..n).map(|g| vec![g]).collect();
    let mut pairs: Vec<&ElemPair> = dec.pairs.iter().filter(|p| p.length() < delta).collect();
    pairs.sort_by_key(|p| (p.length(), p.b_gen));
    for p in pairs {
        let (a0, b0) = (p.a_gen, p.b_gen);
        let w: Vec<usize> = gf2::col_add(&dcur[b0], &[a0]);
        let proj = |v: &[usize]| -> Vec<usize> {
            let mut out: Vec<usize> = v.iter().copied().filter(|&x| x != a0 && x != b0).collect();
            if v.contains(&a0) {
                out = gf2::col_add(&out, &w);
            }
            out
        };
        alive[a0] = false;
        alive[b0] = false;
        let mut ndcur = vec![Vec::new(); n];
        let mut nj = vec![Vec::new(); n];
        for x in (0..n).filter(|&x| alive[x]) {
            ndcur[x] = proj(&dcur[x]);
            nj[x] = if dcur[x].contains(&a0) { gf2::col_add(&j_tot[x], &j_tot[b0]) } else { j_tot[x].clone() };
        }
        for col in p_tot.iter_mut() {
            *col = proj(col);
        }
        dcur = ndcur;
        j_tot = nj;
    }
    let kept: Vec<usize> = dec.order.iter().copied().filter(|&g| alive[g]).collect();
    let mut idx = vec![usize::MAX; n];
    for (k, &g) in kept.iter().enumerate() {
        idx[g] = k;
    }
    let relabel = |v: &[usize]| -> Vec<usize> {
        let mut o: Vec<usize> = v.iter().map(|&g| idx[g]).collect();
        o.sort_unstable();
        o
    };
    let gens: Vec<Gen> = kept.iter().map(|&g| c.gens[g].clone()).collect();
    let rd: Vec<Vec<usize>> = kept.iter().map(|&g| relabel(&dcur[g])).collect();
    let retract = FilteredComplex::with_flag(gens, rd, c.modulus, c.cohomological)?;
    let proj_cols: Vec<Vec<usize>> = (0..n).map(|h| relabel(&gf2::apply(&p_tot, &dec.inverse[h]))).collect();
    let sec_cols: Vec<Vec<usize>> = kept.iter().map(|&g| gf2::apply(&dec.basis, &j_tot[g])).collect();
    let projection = FilteredMap::new(full.clone(), retract.clone(), proj_cols, Q::zero(), 0)?;
    let section = FilteredMap::new(retract.clone(), full.clone(), sec_cols, Q::zero(), 0)?;
    let full_barcode = homology_barcode(&full)?;
    let d_acyclic = dec.singles.is_empty();
    Ok(StabilityRetract { retract, full, projection, section, d_barcode, full_barcode, d_acyclic })
}

/// Cycles of `c` supported on generators of level `≤ t`.
fn cycles_below(c: &FilteredComplex, t: Q) -> Vec<Vec<usize>> {
    let n = c.dim();
    let gs: Vec<usize> = (0..n).filter(|&i| c.gens[i].level <= t).collect();
    let mut e = Echelon::new(n, gs.len().max(1));
    let mut out = Vec::new();
    for &g in &gs {
        if let Some(rel) = e.insert_relation(&BitVec::from_indices(n, &c.d[g])) {
            out.push(rel.indices().into_iter().map(|k| gs[k]).collect());
        }
    }
    out
}

/// Least `s ≥ r` at which the class of the cycle `w` (level `≤ r`) lies in
/// the image of `H(f)` from source level `s − max(shift, 0)`.
pub fn reach_gap(w: &[usize], r: Q, f: &FilteredMap) -> Result<Ext> {
    let t = &f.target;
    let w = gf2::col_from_multiset(w.to_vec());
    if w.iter().any(|&i| i >= t.dim()) {
        return Err(Error::Precondition("class out of range".into()));
    }
    if !t.apply_d(&w).is_empty() {
        return Err(Error::Precondition("w is not a cycle".into()));
    }
    if matches!(t.level_of(&w), Some(l) if l > r) {
        return Err(Error::Precondition("w lies above the level r".into()));
    }
    let up = if f.shift > Q::zero() { f.shift } else { Q::zero() };
    let mut cands: Vec<Q> = vec![r];
    cands.extend(t.gens.iter().map(|g| g.level).filter(|&l| l >= r));
    cands.extend(f.source.gens.iter().map(|g| g.level + up).filter(|&l| l >= r));
    cands.sort();
    cands.dedup();
    let n = t.dim();
    let wv = BitVec::from_indices(n, &w);
    for s in cands {
        let z = cycles_below(&f.source, s - up);
        let bs: Vec<usize> = (0..n).filter(|&i| t.gens[i].level <= s).collect();
        let mut e = Echelon::new(n, z.len() + bs.len() + 1);
        for zc in &z {
            e.insert(&BitVec::from_indices(n, &f.apply(zc)));
        }
        for &i in &bs {
            e.insert(&BitVec::from_indices(n, &t.d[i]));
        }
        if e.contains(&wv) {
            return Ok(Ext::Fin(s));
        }
    }
    Ok(Ext::Inf)
}
