use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use tpcalc::novikov_complex::*;
use tpcalc::{Ext, Nov, Q};

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Determinant by cofactor expansion along the first row.
fn det(m: &[Vec<Nov>]) -> Nov {
    let n = m.len();
    if n == 0 {
        return Nov::one();
    }
    let mut acc = Nov::zero();
    for c in 0..n {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Nov>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != c).map(|(_, x)| x.clone()).collect()).collect();
        acc = acc.add_ref(&m[0][c].mul_ref(&det(&minor)));
    }
    acc
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Finite bar lengths per degree from determinantal divisors of the rescaled
/// differentials: `λ_j = Δ_j − Δ_{j−1}` with `Δ_j` the least valuation of a
/// `j × j` minor.
fn oracle_lengths(c: &FloerComplex) -> BTreeMap<i64, Vec<Q>> {
    let mut by_deg: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, g) in c.gens.iter().enumerate() {
        by_deg.entry(g.degree).or_default().push(i);
    }
    let mut out = BTreeMap::new();
    for (&deg, srcs) in &by_deg {
        let Some(tgts) = by_deg.get(&(deg - 1)) else {
            continue;
        };
        let mut a = vec![vec![Nov::zero(); srcs.len()]; tgts.len()];
        for (cj, &j) in srcs.iter().enumerate() {
            for (i, coef) in &c.d[j] {
                let r = tgts.iter().position(|t| t == i).unwrap();
                a[r][cj] = coef.shift(c.gens[j].level - c.gens[*i].level);
            }
        }
        let mut prev = Q::from_integer(0);
        let mut lens = Vec::new();
        for k in 1..=srcs.len().min(tgts.len()) {
            let mut best: Option<Q> = None;
            for rs in subsets(tgts.len(), k) {
                for cs in subsets(srcs.len(), k) {
                    let m: Vec<Vec<Nov>> = rs.iter().map(|&r| cs.iter().map(|&cc| a[r][cc].clone()).collect()).collect();
                    if let Ext::Fin(v) = det(&m).valuation() {
                        best = Some(best.map_or(v, |b: Q| b.min(v)));
                    }
                }
            }
            let Some(b) = best else { break };
            lens.push(b - prev);
            prev = b;
        }
        lens.sort();
        out.insert(deg - 1, lens);
    }
    out
}

fn lengths_by_degree(b: &ConciseBarcode) -> BTreeMap<i64, Vec<Q>> {
    let mut m: BTreeMap<i64, Vec<Q>> = BTreeMap::new();
    for x in &b.finite {
        m.entry(x.degree).or_default().push(x.length);
    }
    for v in m.values_mut() {
        v.sort();
    }
    m
}

/// Pairs `d y = T^λ x` and free generators, then a random filtered basis change.
fn random_floer(r: &mut ChaCha8Rng, pairs: usize, singles: usize) -> (FloerComplex, Vec<Q>) {
    let mut gens = Vec::new();
    let mut d: Vec<Vec<(usize, Nov)>> = Vec::new();
    let mut lens = Vec::new();
    for k in 0..pairs {
        let deg = r.gen_range(0..2);
        let a = q(r.gen_range(0..8), 4);
        let b = q(r.gen_range(0..8), 4);
        let lam = (a - b) + q(r.gen_range(0..6), 4);
        gens.push(FloerGen::new(format!("x{k}"), deg, a));
        d.push(vec![]);
        gens.push(FloerGen::new(format!("y{k}"), deg + 1, b));
        d.push(vec![(gens.len() - 2, Nov::mono(lam))]);
        lens.push(b - a + lam);
    }
    for k in 0..singles {
        gens.push(FloerGen::new(format!("z{k}"), r.gen_range(0..3), q(r.gen_range(0..8), 4)));
        d.push(vec![]);
    }
    let c = FloerComplex::new(gens, d, 0).unwrap();
    (scramble(&c, r), lens)
}

/// `x_j ↦ x_j + Σ_{i<j} c_ij x_i` with `ℓ(c_ij x_i) ≤ ℓ(x_j)`, then conjugate.
fn scramble(c: &FloerComplex, r: &mut ChaCha8Rng) -> FloerComplex {
    let n = c.dim();
    let mut nmat: Vec<Vec<(usize, Nov)>> = vec![vec![]; n];
    for j in 0..n {
        for i in 0..j {
            if c.gens[i].degree == c.gens[j].degree && r.gen_bool(0.4) {
                let lo = c.gens[i].level - c.gens[j].level;
                let lo = lo.max(q(-2, 1));
                let e1 = lo + q(r.gen_range(0..4), 4);
                let coef = if r.gen_bool(0.5) { Nov::mono(e1) } else { Nov::from_exps([e1, e1 + q(r.gen_range(1..4), 4)]) };
                nmat[j].push((i, coef));
            }
        }
    }
    let apply = |m: &[Vec<(usize, Nov)>], v: &[(usize, Nov)]| {
        let mut acc: BTreeMap<usize, Nov> = BTreeMap::new();
        for (j, a) in v {
            for (i, cc) in &m[*j] {
                let e = acc.entry(*i).or_insert_with(Nov::zero);
                *e = e.add_ref(&a.mul_ref(cc));
            }
        }
        acc.into_iter().filter(|(_, x)| !x.is_zero()).collect::<Vec<_>>()
    };
    let id: Vec<Vec<(usize, Nov)>> = (0..n).map(|i| vec![(i, Nov::one())]).collect();
    let add = |a: &[(usize, Nov)], b: &[(usize, Nov)]| {
        let mut v = a.to_vec();
        v.extend_from_slice(b);
        apply(&id, &v)
    };
    let m: Vec<Vec<(usize, Nov)>> = (0..n).map(|j| add(&id[j], &nmat[j])).collect();
    // M⁻¹ = Σ Nᵏ (characteristic two, N nilpotent)
    let mut minv: Vec<Vec<(usize, Nov)>> = id.clone();
    let mut power: Vec<Vec<(usize, Nov)>> = nmat.clone();
    for _ in 0..n {
        minv = (0..n).map(|j| add(&minv[j], &power[j])).collect();
        power = (0..n).map(|j| apply(&nmat, &power[j])).collect();
    }
    let d: Vec<Vec<(usize, Nov)>> = (0..n).map(|j| apply(&minv, &apply(&c.d, &m[j]))).collect();
    FloerComplex::new(c.gens.clone(), d, 0).expect("scrambled complex is valid")
}

#[test]
fn frozen_oracle_values() {
    let gens = vec![FloerGen::new("x", 0, q(0, 1)), FloerGen::new("y", 1, q(5, 1))];
    let c = FloerComplex::new(gens, vec![vec![], vec![(0, Nov::mono(q(2, 1)))]], 0).unwrap();
    assert_eq!(oracle_lengths(&c)[&0], vec![q(7, 1)]);
    assert_eq!(concise_barcode(&c).unwrap().lengths(), vec![q(7, 1)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn matches_determinantal_oracle(seed in any::<u64>(), pairs in 0usize..4, singles in 0usize..3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (c, lens) = random_floer(&mut r, pairs, singles);
        let b = concise_barcode(&c).unwrap();
        prop_assert_eq!(2 * b.finite.len() + b.infinite_count(), c.dim());
        let mut got = b.lengths();
        got.sort();
        let mut want = lens.clone();
        want.sort();
        prop_assert_eq!(&got, &want);
        let oracle = oracle_lengths(&c);
        let mine = lengths_by_degree(&b);
        let empty = Vec::new();
        for (deg, v) in &oracle {
            prop_assert_eq!(v, mine.get(deg).unwrap_or(&empty));
        }
    }

    #[test]
    fn invariant_under_basis_change(seed in any::<u64>(), pairs in 0usize..4, singles in 0usize..3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (c, _) = random_floer(&mut r, pairs, singles);
        let c2 = scramble(&c, &mut r);
        prop_assert_eq!(concise_barcode(&c).unwrap(), concise_barcode(&c2).unwrap());
    }

    #[test]
    fn counting_bound_holds(seed in any::<u64>(), pairs in 0usize..4, singles in 0usize..3) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (c, _) = random_floer(&mut r, pairs, singles);
        let b = concise_barcode(&c).unwrap();
        let cb = counting_bound(&c).unwrap();
        prop_assert!(c.homology_rank_at_one() >= b.infinite_count());
        let long = b.finite.iter().filter(|x| x.length >= cb.min_length).count();
        prop_assert!(long >= cb.bars);
    }
}
