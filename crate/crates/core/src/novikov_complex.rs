//! Finite-dimensional complexes over the Novikov field with an action filtration.
//!
//! Rescaling every generator `x` to `T^{ℓ(x)} x` puts all generators at level
//! zero; the differential then has entries in the valuation ring, and the
//! concise barcode is read off from its Smith form there.

use crate::error::{Error, Result};
use crate::gf2;
use crate::novikov::Nov;
use crate::q::{qstr, Ext, Q};
use crate::tseries::{smith_valuations, TPoly};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FloerGen {
    pub name: String,
    pub degree: i64,
    #[serde(with = "qstr")]
    pub level: Q,
}

impl FloerGen {
    pub fn new(name: impl Into<String>, degree: i64, level: Q) -> FloerGen {
        FloerGen { name: name.into(), degree, level }
    }
}

/// `d[j]` lists `(i, c)` with `d(x_j) = Σ c·x_i`; coefficients are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloerComplex {
    pub gens: Vec<FloerGen>,
    pub d: Vec<Vec<(usize, Nov)>>,
    pub modulus: u32,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    from: String,
    to: String,
    coefficient: String,
}

#[derive(Serialize, Deserialize)]
struct FloerJson {
    modulus: u32,
    generators: Vec<FloerGen>,
    differential: Vec<EntryJson>,
}

fn merge_col(col: Vec<(usize, Nov)>) -> Vec<(usize, Nov)> {
    let mut m: BTreeMap<usize, Nov> = BTreeMap::new();
    for (i, c) in col {
        let e = m.entry(i).or_insert_with(Nov::zero);
        *e = e.add_ref(&c);
    }
    m.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

impl FloerComplex {
    pub fn new(gens: Vec<FloerGen>, d: Vec<Vec<(usize, Nov)>>, modulus: u32) -> Result<FloerComplex> {
        let d = d.into_iter().map(merge_col).collect();
        let c = FloerComplex { gens, d, modulus };
        c.validate()?;
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    pub fn reduce(&self, k: i64) -> i64 {
        if self.modulus == 0 {
            k
        } else {
            k.rem_euclid(self.modulus as i64)
        }
    }

    /// Level drop `ℓ(x_j) − ℓ(x_i) + val(c)` of an entry; non-negative when valid.
    pub fn entry_drop(&self, i: usize, j: usize, c: &Nov) -> Ext {
        c.valuation().add_q(self.gens[j].level - self.gens[i].level)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.d.len() != n {
            return Err(Error::Precondition("differential has wrong number of columns".into()));
        }
        for (j, col) in self.d.iter().enumerate() {
            for (i, c) in col {
                if *i >= n {
                    return Err(Error::Precondition(format!("entry {j}->{i} out of range")));
                }
                if c.precision().is_some() {
                    return Err(Error::Precondition(format!("entry from {} is truncated", self.gens[j].name)));
                }
                if self.entry_drop(*i, j, c) < Ext::zero() {
                    return Err(Error::Precondition(format!("entry {} -> {} raises action", self.gens[j].name, self.gens[*i].name)));
                }
                if self.reduce(self.gens[*i].degree) != self.reduce(self.gens[j].degree - 1) {
                    return Err(Error::Precondition(format!("entry {} -> {} has the wrong degree", self.gens[j].name, self.gens[*i].name)));
                }
            }
        }
        for j in 0..n {
            if !self.apply_d(&self.d[j]).is_empty() {
                return Err(Error::Precondition(format!("d² ≠ 0 on {}", self.gens[j].name)));
            }
        }
        Ok(())
    }

    pub fn apply_d(&self, chain: &[(usize, Nov)]) -> Vec<(usize, Nov)> {
        let mut out = Vec::new();
        for (j, a) in chain {
            for (i, c) in &self.d[*j] {
                out.push((*i, a.mul_ref(c)));
            }
        }
        merge_col(out)
    }

    /// `ℓ` of a chain: `max (ℓ(x_i) − val(c_i))`, `None` for zero.
    pub fn level_of(&self, chain: &[(usize, Nov)]) -> Option<Q> {
        chain.iter().filter_map(|(i, c)| c.valuation().fin().map(|v| self.gens[*i].level - v)).max()
    }

    /// The `Z/2` complex obtained by setting `T = 1`, as sparse columns.
    pub fn at_one(&self) -> Vec<Vec<usize>> {
        self.d.iter().map(|col| col.iter().filter(|(_, c)| c.at_one()).map(|(i, _)| *i).collect()).collect()
    }

    /// `dim H(C|_{T=1})` over `Z/2`.
    pub fn homology_rank_at_one(&self) -> usize {
        let d1 = self.at_one();
        self.dim() - 2 * gf2::rank(self.dim(), &d1)
    }

    pub fn parse_json(s: &str) -> Result<FloerComplex> {
        let j: FloerJson = serde_json::from_str(s).map_err(|e| Error::Parse(format!("floer complex: {e}")))?;
        let index: HashMap<&str, usize> = j.generators.iter().enumerate().map(|(i, g)| (g.name.as_str(), i)).collect();
        if index.len() != j.generators.len() {
            return Err(Error::Parse("duplicate generator names".into()));
        }
        let mut d = vec![Vec::new(); j.generators.len()];
        for (k, e) in j.differential.iter().enumerate() {
            let look = |n: &str| index.get(n).copied().ok_or_else(|| Error::Parse(format!("differential[{k}]: unknown generator {n:?}")));
            let c: Nov = e.coefficient.parse().map_err(|err: Error| Error::Parse(format!("differential[{k}]: {err}")))?;
            d[look(&e.from)?].push((look(&e.to)?, c));
        }
        FloerComplex::new(j.generators, d, j.modulus)
    }

    pub fn to_json(&self) -> String {
        let mut differential = Vec::new();
        for (j, col) in self.d.iter().enumerate() {
            for (i, c) in col {
                differential.push(EntryJson {
                    from: self.gens[j].name.clone(),
                    to: self.gens[*i].name.clone(),
                    coefficient: c.to_string(),
                });
            }
        }
        let j = FloerJson { modulus: self.modulus, generators: self.gens.clone(), differential };
        serde_json::to_string(&j).expect("floer complex serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteBar {
    #[serde(with = "qstr")]
    pub length: Q,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConciseBarcode {
    pub finite: Vec<FiniteBar>,
    pub infinite: BTreeMap<i64, usize>,
}

impl ConciseBarcode {
    pub fn infinite_count(&self) -> usize {
        self.infinite.values().sum()
    }

    pub fn lengths(&self) -> Vec<Q> {
        let mut v: Vec<Q> = self.finite.iter().map(|b| b.length).collect();
        v.sort();
        v
    }

    /// Finite bars longer than `δ` plus infinite bars.
    pub fn count_above(&self, delta: Q) -> usize {
        self.finite.iter().filter(|b| b.length > delta).count() + self.infinite_count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("barcode serializes")
    }
}

/// Concise barcode: finite bars from the Smith form of each rescaled
/// differential, infinite bars from the remaining rank.
pub fn concise_barcode(c: &FloerComplex) -> Result<ConciseBarcode> {
    c.validate()?;
    let n = c.dim();
    // common denominator of all rescaled exponents
    let mut den: i64 = 1;
    let mut max_exp = Q::zero();
    for (j, col) in c.d.iter().enumerate() {
        for (i, coef) in col {
            for e in coef.exps() {
                let r = *e + c.gens[j].level - c.gens[*i].level;
                den = den.lcm(r.denom());
                max_exp = max_exp.max(r);
            }
        }
    }
    let max_deg = (max_exp * Q::from_integer(den)).to_integer() as usize;
    let mut by_deg: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, g) in c.gens.iter().enumerate() {
        by_deg.entry(c.reduce(g.degree)).or_default().push(i);
    }
    let mut finite = Vec::new();
    let mut rank_out: HashMap<i64, usize> = HashMap::new();
    let mut rank_in: HashMap<i64, usize> = HashMap::new();
    for (&deg, srcs) in &by_deg {
        let tdeg = c.reduce(deg - 1);
        let Some(tgts) = by_deg.get(&tdeg) else {
            continue;
        };
        let row_of: HashMap<usize, usize> = tgts.iter().enumerate().map(|(r, &g)| (g, r)).collect();
        let rank_bound = srcs.len().min(tgts.len());
        let p = rank_bound * max_deg + 1;
        let mut m: Vec<Vec<Option<TPoly>>> = vec![vec![None; srcs.len()]; tgts.len()];
        for (ci, &j) in srcs.iter().enumerate() {
            for (i, coef) in &c.d[j] {
                let mut t = TPoly::zero(p);
                for e in coef.exps() {
                    let r = *e + c.gens[j].level - c.gens[*i].level;
                    let k = (r * Q::from_integer(den)).to_integer() as usize;
                    if k < p {
                        t.flip(k);
                    }
                }
                m[row_of[i]][ci] = Some(t);
            }
        }
        let vals = smith_valuations(m, p);
        rank_out.insert(deg, vals.len());
        *rank_in.entry(tdeg).or_default() += vals.len();
        for v in vals {
            finite.push(FiniteBar { length: Q::new(v as i64, den), degree: tdeg });
        }
    }
    let mut infinite = BTreeMap::new();
    for (&deg, g) in &by_deg {
        let k = g.len() - rank_out.get(&deg).copied().unwrap_or(0) - rank_in.get(&deg).copied().unwrap_or(0);
        if k > 0 {
            infinite.insert(deg, k);
        }
    }
    debug_assert_eq!(2 * finite.len() + infinite.values().sum::<usize>(), n);
    finite.sort_by_key(|a| (a.degree, a.length));
    Ok(ConciseBarcode { finite, infinite })
}

pub fn bar_count_at(c: &FloerComplex, delta: Q) -> Result<usize> {
    if delta < Q::zero() {
        return Err(Error::Precondition("δ must be non-negative".into()));
    }
    Ok(concise_barcode(c)?.count_above(delta))
}

/// Longest finite bar, `0` if there is none.
pub fn boundary_depth(c: &FloerComplex) -> Result<Q> {
    Ok(concise_barcode(c)?.finite.iter().map(|b| b.length).max().unwrap_or_else(Q::zero))
}

/// Bound from the counting argument: with `r = dim H(C|_{T=1})` there are at
/// least `(m − r)/2` finite bars, each of length at least the smallest level
/// drop of a differential entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingBound {
    pub bars: usize,
    #[serde(with = "qstr")]
    pub min_length: Q,
}

pub fn counting_bound(c: &FloerComplex) -> Result<CountingBound> {
    c.validate()?;
    let mut v: Option<Q> = None;
    for (j, col) in c.d.iter().enumerate() {
        for (i, coef) in col {
            if let Ext::Fin(x) = c.entry_drop(*i, j, coef) {
                v = Some(v.map_or(x, |y: Q| y.min(x)));
            }
        }
    }
    let r = c.homology_rank_at_one();
    Ok(CountingBound { bars: (c.dim() - r) / 2, min_length: v.unwrap_or_else(Q::zero) })
}
