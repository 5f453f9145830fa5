//! Barcodes checked through persistent ranks, computed straight from cycle and
//! boundary spaces, plus helpers producing random filtered complexes.

use super::chain::{self, Cx};
use super::gf2::{Bv, Echelon};
use rand::Rng;
use tpcalc::filtered_complex::{FilteredComplex, Gen};
use tpcalc::{Bar, Barcode, Ext, Q};

pub fn cx_of(c: &FilteredComplex) -> Cx {
    Cx { deg: c.gens.iter().map(|g| g.degree).collect(), lvl: c.gens.iter().map(|g| g.level).collect(), d: c.d.clone() }
}

fn vec_of(idx: &[usize]) -> Bv {
    let mut v = Bv::zero();
    for &i in idx {
        v.flip(i);
    }
    v
}

/// `dim im(H_k(≤ r) → H_k(≤ s))` for a homological complex.
pub fn persistent_rank(c: &FilteredComplex, k: i64, r: Q, s: Q) -> usize {
    let n = c.dim();
    let cols: Vec<usize> = (0..n).filter(|&i| c.gens[i].degree == k && c.gens[i].level <= r).collect();
    let imgs: Vec<Bv> = cols.iter().map(|&i| vec_of(&c.d[i])).collect();
    let cycles: Vec<Bv> = super::gf2::kernel(&imgs)
        .iter()
        .map(|comb| {
            let mut v = Bv::zero();
            for j in comb.ones() {
                v.flip(cols[j]);
            }
            v
        })
        .collect();
    let mut b = Echelon::new();
    for i in (0..n).filter(|&i| c.gens[i].degree == k + 1 && c.gens[i].level <= s) {
        b.insert(&vec_of(&c.d[i]));
    }
    let base = b.dim();
    for z in &cycles {
        b.insert(z);
    }
    b.dim() - base
}

/// Bars of degree `k` alive on all of `[r, s]`.
pub fn alive(b: &Barcode, k: i64, r: Q, s: Q) -> usize {
    b.bars.iter().filter(|x| x.degree == k && x.birth <= r && x.death > Ext::Fin(s)).count()
}

/// Levels at which ranks can change, plus midpoints and an upper sentinel.
pub fn probe_levels(levels: &[Q]) -> Vec<Q> {
    let mut l: Vec<Q> = levels.to_vec();
    l.sort();
    l.dedup();
    let mut out = l.clone();
    for w in l.windows(2) {
        out.push((w[0] + w[1]) / Q::from_integer(2));
    }
    if let (Some(a), Some(z)) = (l.first(), l.last()) {
        out.push(*a - Q::from_integer(1));
        out.push(*z + Q::from_integer(1));
    }
    out.sort();
    out
}

/// Does `b` have the persistent ranks of `c` at every probe pair?
pub fn barcode_matches_ranks(c: &FilteredComplex, b: &Barcode) -> bool {
    let levels: Vec<Q> = c.gens.iter().map(|g| g.level).collect();
    let probes = probe_levels(&levels);
    let mut degs: Vec<i64> = c.gens.iter().map(|g| g.degree).collect();
    degs.sort();
    degs.dedup();
    for &k in &degs {
        for (i, &r) in probes.iter().enumerate() {
            for &s in &probes[i..] {
                if persistent_rank(c, k, r, s) != alive(b, k, r, s) {
                    return false;
                }
            }
        }
    }
    b.bars.iter().all(|x| degs.contains(&x.degree))
}

/// Degree-0 persistent ranks of the space of maps `x -> y` up to homotopy.
pub fn map_space_rank(x: &Cx, y: &Cx, r: Q, s: Q) -> usize {
    let mut e = chain::boundaries(x, y, s);
    let base = e.dim();
    for z in chain::cycles(x, y, r) {
        e.insert(&z);
    }
    e.dim() - base
}

pub fn random_barcode(rng: &mut impl Rng, n_bars: usize, max_deg: i64, grid: i64) -> Barcode {
    let mut bars = Vec::new();
    for _ in 0..n_bars {
        let deg = rng.gen_range(0..=max_deg);
        let a = rng.gen_range(0..grid);
        if rng.gen_bool(0.3) {
            bars.push(Bar::infinite(Q::new(a, 4), deg));
        } else {
            let b = rng.gen_range(a..=grid);
            bars.push(Bar::finite(Q::new(a, 4), Q::new(b, 4), deg));
        }
    }
    Barcode::new(0, bars)
}

fn xor_into(acc: &mut Vec<usize>, v: &[usize]) {
    for &i in v {
        if let Some(p) = acc.iter().position(|&j| j == i) {
            acc.swap_remove(p);
        } else {
            acc.push(i);
        }
    }
}

/// A random filtered basis change of `c` followed by a random relabelling.
pub fn scramble(c: &FilteredComplex, rng: &mut impl Rng) -> FilteredComplex {
    let n = c.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (c.gens[i].level, i));
    // keep d strictly triangular in `order`: generators of equal level are
    // combined only with earlier ones
    let mut m: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (p, &j) in order.iter().enumerate() {
        m[j].push(j);
        for &i in &order[..p] {
            if c.gens[i].degree == c.gens[j].degree && rng.gen_bool(0.4) {
                m[j].push(i);
            }
        }
    }
    let mut inv: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &j in &order {
        let mut acc = vec![j];
        for &i in &m[j] {
            if i != j {
                xor_into(&mut acc, &inv[i]);
            }
        }
        inv[j] = acc;
    }
    let apply = |mat: &[Vec<usize>], v: &[usize]| {
        let mut acc = Vec::new();
        for &i in v {
            xor_into(&mut acc, &mat[i]);
        }
        acc
    };
    let new_d: Vec<Vec<usize>> = (0..n).map(|j| apply(&inv, &apply(&c.d, &m[j]))).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    // perm[old] = new
    let mut gens = vec![Gen::new("", 0, Q::from_integer(0)); n];
    let mut d = vec![Vec::new(); n];
    for old in 0..n {
        let g = &c.gens[old];
        gens[perm[old]] = Gen::new(format!("g{}", perm[old]), g.degree, g.level);
        d[perm[old]] = new_d[old].iter().map(|&i| perm[i]).collect();
    }
    FilteredComplex::new(gens, d, c.modulus).expect("scrambled complex is valid")
}

pub fn random_complex(rng: &mut impl Rng, n_bars: usize, max_deg: i64, grid: i64) -> (FilteredComplex, Barcode) {
    let b = random_barcode(rng, n_bars, max_deg, grid);
    (scramble(&FilteredComplex::from_barcode(&b), rng), b)
}

/// Random acyclic `(C, d)` with a perturbation `D′` dropping level by `δ`.
pub fn random_perturbed(r: &mut impl Rng) -> (FilteredComplex, Vec<Vec<usize>>, Q) {
    loop {
        let mut bars = Vec::new();
        for _ in 0..r.gen_range(1..5) {
            let a = r.gen_range(0..16);
            let b = r.gen_range(a + 1..=a + 8);
            bars.push(Bar::finite(Q::new(a, 2), Q::new(b, 2), r.gen_range(0..3)));
        }
        let c = scramble(&FilteredComplex::from_barcode(&Barcode::new(0, bars)), r);
        let delta = Q::new(r.gen_range(1..7), 2);
        let n = c.dim();
        let mut dp = vec![Vec::new(); n];
        for (j, col) in dp.iter_mut().enumerate() {
            for i in 0..n {
                if c.gens[i].level <= c.gens[j].level - delta && c.gens[i].degree == c.gens[j].degree - 1 && r.gen_bool(0.5) {
                    col.push(i);
                }
            }
        }
        // keep D′ only if (d + D′)² = 0
        let total: Vec<Vec<usize>> = (0..n)
            .map(|j| {
                let mut v = c.d[j].clone();
                for &i in &dp[j] {
                    if let Some(p) = v.iter().position(|&x| x == i) {
                        v.remove(p);
                    } else {
                        v.push(i);
                    }
                }
                v
            })
            .collect();
        if FilteredComplex::new(c.gens.clone(), total, 0).is_ok() {
            return (c, dp, delta);
        }
    }
}
