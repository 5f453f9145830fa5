//! Truncated power series over `Z/2`, Smith forms over `Z/2[[t]]`, and
//! minimal-level preimages for linear maps between filtered Novikov spaces.

use crate::error::{Error, Result};
use crate::novikov::Nov;
use crate::q::{Ext, Q};
use num_integer::Integer;

/// Power series over `Z/2` modulo `t^P`, as a bitset.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) struct TPoly {
    w: Vec<u64>,
}

impl TPoly {
    pub(crate) fn zero(p: usize) -> TPoly {
        TPoly { w: vec![0; p.div_ceil(64).max(1)] }
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.w.iter().all(|x| *x == 0)
    }

    pub(crate) fn flip(&mut self, i: usize) {
        self.w[i / 64] ^= 1 << (i % 64);
    }

    pub(crate) fn ord(&self) -> Option<usize> {
        self.w.iter().enumerate().find(|(_, x)| **x != 0).map(|(k, x)| k * 64 + x.trailing_zeros() as usize)
    }

    pub(crate) fn xor(&mut self, o: &TPoly) {
        for (a, b) in self.w.iter_mut().zip(&o.w) {
            *a ^= b;
        }
    }

    pub(crate) fn bits(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        (0..p.min(64 * self.w.len())).filter(move |&i| self.w[i / 64] >> (i % 64) & 1 == 1)
    }

    pub(crate) fn mask(&mut self, p: usize) {
        let full = p / 64;
        for k in full + 1..self.w.len() {
            self.w[k] = 0;
        }
        if full < self.w.len() && !p.is_multiple_of(64) {
            self.w[full] &= (1u64 << (p % 64)) - 1;
        } else if full < self.w.len() {
            self.w[full] = 0;
        }
    }

    /// `self · t^s` truncated to `p` bits.
    pub(crate) fn shl(&self, s: usize, p: usize) -> TPoly {
        let mut out = TPoly::zero(p);
        let (ws, bs) = (s / 64, s % 64);
        for k in (0..self.w.len()).rev() {
            if k + ws >= out.w.len() {
                continue;
            }
            out.w[k + ws] ^= self.w[k] << bs;
            if bs != 0 && k + ws + 1 < out.w.len() {
                out.w[k + ws + 1] ^= self.w[k] >> (64 - bs);
            }
        }
        out.mask(p);
        out
    }

    pub(crate) fn shr(&self, s: usize, p: usize) -> TPoly {
        let mut out = TPoly::zero(p);
        for i in self.bits(p).filter(|&i| i >= s) {
            out.flip(i - s);
        }
        out
    }

    pub(crate) fn mul(&self, o: &TPoly, p: usize) -> TPoly {
        let mut out = TPoly::zero(p);
        for i in self.bits(p) {
            out.xor(&o.shl(i, p));
        }
        out
    }

    /// Inverse of a unit modulo `t^p`.
    pub(crate) fn inverse(&self, p: usize) -> TPoly {
        let mut x = TPoly::zero(p);
        x.flip(0);
        let mut prec = 1;
        while prec < p {
            prec = (2 * prec).min(p);
            // x ← x·(2 − u x) = u x² in characteristic two
            x = self.mul(&x.mul(&x, prec), prec);
        }
        x
    }
}

struct Smith {
    /// `(valuation, pivot row)` in pivot order.
    pivots: Vec<(usize, usize)>,
    rhs: Vec<TPoly>,
    /// Entries of `rhs` are known modulo `t^rhs_prec`.
    rhs_prec: usize,
}

/// Row-reduces `m` (known modulo `t^p`), pivoting on a minimal-valuation
/// entry each time and applying the same row operations to `rhs`.
fn smith(mut m: Vec<Vec<Option<TPoly>>>, mut rhs: Vec<TPoly>, p: usize) -> Smith {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut row_alive = vec![true; rows];
    let mut col_alive = vec![true; cols];
    let mut pivots = Vec::new();
    let mut rhs_prec = p;
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for c in (0..cols).filter(|&c| col_alive[c]) {
            for r in (0..rows).filter(|&r| row_alive[r]) {
                if let Some(o) = m[r][c].as_ref().and_then(|e| e.ord()) {
                    if best.is_none_or(|(b, _, _)| o < b) {
                        best = Some((o, r, c));
                    }
                }
            }
        }
        let Some((k, pr, pc)) = best else { break };
        pivots.push((k, pr));
        let unit = m[pr][pc].as_ref().unwrap().shr(k, p).inverse(p);
        let pivot_row: Vec<(usize, TPoly)> = (0..cols)
            .filter(|&c| col_alive[c] && c != pc)
            .filter_map(|c| m[pr][c].clone().filter(|e| !e.is_zero()).map(|e| (c, e)))
            .collect();
        let pivot_rhs = rhs.get(pr).cloned();
        if let Some(o) = pivot_rhs.as_ref().and_then(|w| w.ord()).filter(|&o| o < rhs_prec) {
            rhs_prec = rhs_prec.min(p - k + o);
        }
        for r in (0..rows).filter(|&r| row_alive[r] && r != pr) {
            let Some(e) = m[r][pc].as_ref().filter(|e| !e.is_zero()) else {
                continue;
            };
            let factor = e.shr(k, p).mul(&unit, p);
            for (c, pe) in &pivot_row {
                let add = factor.mul(pe, p);
                match &mut m[r][*c] {
                    Some(x) => x.xor(&add),
                    slot => *slot = Some(add),
                }
            }
            if let Some(w) = &pivot_rhs {
                let add = factor.mul(w, p);
                rhs[r].xor(&add);
            }
            m[r][pc] = None;
        }
        row_alive[pr] = false;
        col_alive[pc] = false;
    }
    Smith { pivots, rhs, rhs_prec }
}

/// Smith-form valuations (in units of `t`) of a matrix over `Z/2[[t]]`
/// known modulo `t^p`.
pub(crate) fn smith_valuations(m: Vec<Vec<Option<TPoly>>>, p: usize) -> Vec<usize> {
    smith(m, Vec::new(), p).pivots.into_iter().map(|(k, _)| k).collect()
}

/// A Λ-linear map between spaces with orthogonal bases at the given levels;
/// `cols[j]` lists `(i, c)` with `f(x_j) = Σ c·y_i`. Stored terms are read
/// as exact.
#[derive(Debug, Clone, Default)]
pub struct LevelMap {
    pub src: Vec<Q>,
    pub tgt: Vec<Q>,
    pub cols: Vec<Vec<(usize, Nov)>>,
}

impl LevelMap {
    pub fn new(src: Vec<Q>, tgt: Vec<Q>) -> LevelMap {
        let cols = vec![Vec::new(); src.len()];
        LevelMap { src, tgt, cols }
    }

    pub fn push(&mut self, j: usize, i: usize, c: Nov) {
        if !c.is_zero() {
            self.cols[j].push((i, c));
        }
    }
}

/// Integer exponent lists after rescaling to level-zero bases and passing to
/// `t = T^{1/den}`.
struct Scaled {
    den: i64,
    m: Vec<Vec<(usize, Vec<i64>)>>,
    w: Vec<(usize, Vec<i64>)>,
}

fn scale(f: &LevelMap, w: &[(usize, Nov)]) -> Scaled {
    let mut den: i64 = 1;
    let mut raw_m = Vec::new();
    for (j, col) in f.cols.iter().enumerate() {
        let mut out = Vec::new();
        for (i, c) in col {
            let e: Vec<Q> = c.exps().iter().map(|e| *e + f.src[j] - f.tgt[*i]).collect();
            for x in &e {
                den = den.lcm(x.denom());
            }
            out.push((*i, e));
        }
        raw_m.push(out);
    }
    let mut raw_w = Vec::new();
    for (i, c) in w {
        let e: Vec<Q> = c.exps().iter().map(|e| *e - f.tgt[*i]).collect();
        for x in &e {
            den = den.lcm(x.denom());
        }
        raw_w.push((*i, e));
    }
    let int = |v: Vec<Q>| v.into_iter().map(|x| (x * Q::from_integer(den)).to_integer()).collect::<Vec<i64>>();
    Scaled {
        den,
        m: raw_m.into_iter().map(|col| col.into_iter().map(|(i, e)| (i, int(e))).collect()).collect(),
        w: raw_w.into_iter().map(|(i, e)| (i, int(e))).collect(),
    }
}

fn poly(exps: &[i64], shift: i64, p: usize) -> TPoly {
    let mut t = TPoly::zero(p);
    for &e in exps {
        let k = (e - shift) as usize;
        if k < p {
            t.flip(k);
        }
    }
    t
}

/// Smallest `s` such that `w = f(x)` for some `x` of level at most `s`, or
/// `∞` when `w` is not in the image. `w` must be nonzero.
pub fn min_preimage_level(f: &LevelMap, w: &[(usize, Nov)]) -> Result<Ext> {
    let w: Vec<(usize, Nov)> = w.iter().filter(|(_, c)| !c.is_zero()).cloned().collect();
    if w.is_empty() {
        return Err(Error::Precondition("target vector is zero".into()));
    }
    let s = scale(f, &w);
    let Some(m_lo) = s.m.iter().flatten().flat_map(|(_, e)| e.iter().copied()).min() else {
        return Ok(Ext::Inf);
    };
    let w_lo = s.w.iter().flat_map(|(_, e)| e.iter().copied()).min().unwrap();
    let m_deg = s.m.iter().flatten().flat_map(|(_, e)| e.iter()).map(|e| e - m_lo).max().unwrap() as usize;
    let w_deg = s.w.iter().flat_map(|(_, e)| e.iter()).map(|e| e - w_lo).max().unwrap() as usize;
    let rows = f.tgt.len();
    let cols = f.src.len();
    let build = |p: usize, with_w: bool| {
        let mut m: Vec<Vec<Option<TPoly>>> = vec![vec![None; cols + with_w as usize]; rows];
        for (j, col) in s.m.iter().enumerate() {
            for (i, e) in col {
                let t = poly(e, m_lo, p);
                match &mut m[*i][j] {
                    Some(x) => x.xor(&t),
                    slot => *slot = Some(t),
                }
            }
        }
        let mut rhs = vec![TPoly::zero(p); rows];
        for (i, e) in &s.w {
            rhs[*i].xor(&poly(e, w_lo, p));
        }
        if with_w {
            for i in 0..rows {
                m[i][cols] = Some(rhs[i].clone());
            }
        }
        (m, rhs)
    };
    let bound = |n: usize, deg: usize| (n + 1) * deg.max(1) + 1;
    let p0 = bound(rows.min(cols), m_deg);
    let rank = smith(build(p0, false).0, Vec::new(), p0).pivots.len();
    let p1 = bound(rows.min(cols + 1), m_deg.max(w_deg));
    let rank_aug = smith(build(p1, true).0, Vec::new(), p1).pivots.len();
    if rank_aug > rank {
        return Ok(Ext::Inf);
    }
    let mut p = p0.max(p1);
    loop {
        let (m, rhs) = build(p, false);
        let sm = smith(m, rhs, p);
        let mut known: Option<i64> = None;
        let mut unknown: Option<i64> = None;
        for &(k, r) in &sm.pivots {
            match sm.rhs[r].ord().filter(|&o| o < sm.rhs_prec) {
                Some(o) => known = known.max(Some(k as i64 - o as i64)),
                None => unknown = unknown.max(Some(k as i64 - sm.rhs_prec as i64)),
            }
        }
        if let Some(sigma) = known.filter(|&x| unknown.is_none_or(|u| x >= u)) {
            return Ok(Ext::Fin(Q::new(sigma + m_lo - w_lo, s.den)));
        }
        p *= 2;
    }
}
