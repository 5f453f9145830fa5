//! Cone-length lower bounds, entropy estimators, the action model for
//! Hamiltonian chords between cotangent fibers, and the Dehn-twist model on
//! the sphere.

use crate::error::{Error, Result};
use crate::filtered_complex::{cone_length, ConeMode, FilteredComplex};
use crate::novikov::Nov;
use crate::novikov_complex::{concise_barcode, counting_bound, ConciseBarcode, FloerComplex, FloerGen};
use crate::persistence::{bar_count, Barcode};
use crate::q::{fmt_q, parse_q, q, qi, qstr, to_f64, Q};
use num_traits::Zero;
use serde::Serialize;

/// `η` is `0` on `[0, 1]`, `σx − k` on `[2, 7]` and `Var` on `[8, ∞)`, joined by
/// cubics that are convex on `(1, 2)` and concave on `(7, 8)`.
///
/// `rise` is `η(8) − η(7)`. Convexity forces `4σ/3 < k ≤ 5σ/3` and concavity
/// `σ/3 < rise ≤ 2σ/3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EtaProfile {
    #[serde(with = "qstr")]
    pub sigma: Q,
    #[serde(with = "qstr")]
    pub k: Q,
    #[serde(with = "qstr")]
    pub rise: Q,
}

/// Fraction of the length spectrum that the gap bound certifies: `5/8`.
pub fn lemma_rate() -> Q {
    q(5, 8)
}

impl EtaProfile {
    pub fn new(sigma: Q, k: Q, rise: Q) -> Result<EtaProfile> {
        if sigma < qi(1) || sigma >= q(3, 2) {
            return Err(Error::Precondition(format!("σ = {} must lie in [1, 3/2)", fmt_q(&sigma))));
        }
        if k <= sigma * q(4, 3) || k > sigma * q(5, 3) || k >= qi(2) {
            return Err(Error::Precondition(format!("k = {} must lie in (4σ/3, min(5σ/3, 2))", fmt_q(&k))));
        }
        if rise <= sigma / qi(3) || rise > sigma * q(2, 3) {
            return Err(Error::Precondition(format!("rise = {} must lie in (σ/3, 2σ/3]", fmt_q(&rise))));
        }
        Ok(EtaProfile { sigma, k, rise })
    }

    /// `σ`, with `k = 3σ/2` and `rise = σ/2`: both transitions are quadratic.
    pub fn standard(sigma: Q) -> Result<EtaProfile> {
        EtaProfile::new(sigma, sigma * q(3, 2), sigma / qi(2))
    }

    pub fn variation(&self) -> Q {
        self.sigma * qi(7) - self.k + self.rise
    }

    /// `(a, b)` with `η(1 + t) = a t² + b t³`.
    fn low(&self) -> (f64, f64) {
        let s = to_f64(&self.sigma);
        let a_ = to_f64(&(self.sigma * qi(2) - self.k));
        (3.0 * a_ - s, s - 2.0 * a_)
    }

    /// `(c, d)` with `η(7 + t) = η(7) + σt + c t² + d t³`.
    fn high(&self) -> (f64, f64) {
        let s = to_f64(&self.sigma);
        let c = 3.0 * to_f64(&self.rise) - 2.0 * s;
        (c, -(s + 2.0 * c) / 3.0)
    }

    pub fn eta(&self, x: f64) -> f64 {
        let s = to_f64(&self.sigma);
        let k = to_f64(&self.k);
        if x <= 1.0 {
            0.0
        } else if x < 2.0 {
            let (a, b) = self.low();
            let t = x - 1.0;
            a * t * t + b * t * t * t
        } else if x <= 7.0 {
            s * x - k
        } else if x < 8.0 {
            let (c, d) = self.high();
            let t = x - 7.0;
            7.0 * s - k + s * t + c * t * t + d * t * t * t
        } else {
            to_f64(&self.variation())
        }
    }

    pub fn deta(&self, x: f64) -> f64 {
        let s = to_f64(&self.sigma);
        if x <= 1.0 || x >= 8.0 {
            0.0
        } else if x < 2.0 {
            let (a, b) = self.low();
            let t = x - 1.0;
            2.0 * a * t + 3.0 * b * t * t
        } else if x <= 7.0 {
            s
        } else {
            let (c, d) = self.high();
            let t = x - 7.0;
            s + 2.0 * c * t + 3.0 * d * t * t
        }
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    let increasing = f(hi) > f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v - target).abs() <= 1e-13 {
            return mid;
        }
        if (v < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The radii `r ∈ (1, 2)` and `r′ ∈ (7, 8)` with `η′(r) = ℓ/n`.
pub fn eta_solve(p: &EtaProfile, ell: Q, n: u64) -> Result<(f64, f64)> {
    if n == 0 || ell <= Q::zero() {
        return Err(Error::Precondition("need ℓ > 0 and n ≥ 1".into()));
    }
    let slope = ell / Q::from_integer(n as i64);
    if slope >= p.sigma {
        return Err(Error::Precondition(format!("ℓ/n = {} is not below σ = {}", fmt_q(&slope), fmt_q(&p.sigma))));
    }
    let t = to_f64(&slope);
    Ok((bisect(|x| p.deta(x), 1.0, 2.0, t), bisect(|x| p.deta(x), 7.0, 8.0, t)))
}

/// `A_n = nη(r) − rℓ`.
pub fn chord_action(p: &EtaProfile, n: u64, ell: Q, r: f64) -> f64 {
    n as f64 * p.eta(r) - r * to_f64(&ell)
}

/// Geodesic-arc lengths with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthSpectrum {
    pub lengths: Vec<(Q, u64)>,
}

impl LengthSpectrum {
    pub fn new(mut lengths: Vec<(Q, u64)>) -> Result<LengthSpectrum> {
        if lengths.iter().any(|(l, _)| *l <= Q::zero()) {
            return Err(Error::Precondition("lengths must be positive".into()));
        }
        lengths.sort();
        let mut merged: Vec<(Q, u64)> = Vec::new();
        for (l, m) in lengths {
            match merged.last_mut() {
                Some((x, c)) if *x == l => *c += m,
                _ => merged.push((l, m)),
            }
        }
        merged.retain(|(_, m)| *m > 0);
        Ok(LengthSpectrum { lengths: merged })
    }

    /// One length per line, optionally followed by a multiplicity; `#` starts a comment.
    pub fn parse(s: &str) -> Result<LengthSpectrum> {
        let mut out = Vec::new();
        for (no, line) in s.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let at = |e: Error| Error::Parse(format!("line {}: {e}", no + 1));
            let l = parse_q(it.next().unwrap_or_default()).map_err(at)?;
            let m = match it.next() {
                Some(m) => m.parse().map_err(|_| Error::Parse(format!("line {}: bad multiplicity {m:?}", no + 1)))?,
                None => 1,
            };
            out.push((l, m));
        }
        LengthSpectrum::new(out)
    }

    /// Lengths on the grid `1, 1 + step, …, t_max` with
    /// `#{ℓ ≤ T} = max_{T′ ≤ T} round(e^{hT′}/(hT′))`.
    pub fn synthetic(h: f64, t_max: Q, step: Q) -> Result<LengthSpectrum> {
        if step <= Q::zero() || h <= 0.0 {
            return Err(Error::Precondition("need step > 0 and h > 0".into()));
        }
        let mut out = Vec::new();
        let mut total = 0u64;
        let mut t = qi(1);
        while t <= t_max {
            let x = h * to_f64(&t);
            let target = (x.exp() / x).round() as u64;
            if target > total {
                out.push((t, target - total));
                total = target;
            }
            t += step;
        }
        LengthSpectrum::new(out)
    }

    pub fn count_upto(&self, t: Q) -> u64 {
        self.lengths.iter().take_while(|(l, _)| *l <= t).map(|(_, m)| m).sum()
    }

    /// `σ ∉ {ℓ/n}` for this `n`.
    pub fn generic_at(&self, sigma: Q, n: u64) -> bool {
        let top = sigma * Q::from_integer(n as i64);
        self.lengths.binary_search_by(|(l, _)| l.cmp(&top)).is_err()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChordBar {
    #[serde(with = "qstr")]
    pub ell: Q,
    pub multiplicity: u64,
    pub r: f64,
    pub r_prime: f64,
    /// Numeric `A_n(γ′) − A_n(γ)`.
    pub gap: f64,
    /// `5n − 7ℓ`, a lower bound for the gap.
    #[serde(with = "qstr")]
    pub gap_bound: Q,
}

#[derive(Debug, Clone, Serialize)]
pub struct ActionModel {
    pub n: u64,
    pub bars: Vec<ChordBar>,
}

impl ActionModel {
    /// Bars whose certified gap is at least `δ`, i.e. `n ≥ 7ℓ/5 + δ/5`.
    pub fn certified_count(&self, delta: Q) -> u64 {
        self.bars.iter().filter(|b| b.gap_bound >= delta).map(|b| b.multiplicity).sum()
    }

    pub fn numeric_count(&self, delta: f64) -> u64 {
        self.bars.iter().filter(|b| b.gap >= delta).map(|b| b.multiplicity).sum()
    }
}

/// One bar per geodesic arc with `ℓ < nσ`, pairing the chords at `r` and `r′`.
pub fn floer_action_model(spec: &LengthSpectrum, p: &EtaProfile, n: u64) -> Result<ActionModel> {
    if !spec.generic_at(p.sigma, n) {
        return Err(Error::Precondition(format!("nσ = {} lies in the length spectrum", fmt_q(&(p.sigma * qi(n as i64))))));
    }
    let top = p.sigma * Q::from_integer(n as i64);
    let mut bars = Vec::new();
    for &(ell, m) in spec.lengths.iter().take_while(|(l, _)| *l < top) {
        let (r, rp) = eta_solve(p, ell, n)?;
        let gap = chord_action(p, n, ell, rp) - chord_action(p, n, ell, r);
        let gap_bound = Q::from_integer(5 * n as i64) - ell * qi(7);
        bars.push(ChordBar { ell, multiplicity: m, r, r_prime: rp, gap, gap_bound });
    }
    Ok(ActionModel { n, bars })
}

/// The complex of a meridian against the `k`-th Dehn twist of another
/// meridian along the equator: the two poles plus a pair of intersection
/// points per turn, every differential entry of area at least `3/32`.
pub fn dehn_sphere_complex(k: usize) -> Result<FloerComplex> {
    if k == 0 {
        return Err(Error::Precondition("k ≥ 1".into()));
    }
    let mut gens = vec![FloerGen::new("north", 0, Q::zero()), FloerGen::new("south", 1, Q::zero())];
    let mut d = vec![vec![], vec![]];
    for i in 1..=k {
        let lvl = q(i as i64, 4 * k as i64);
        gens.push(FloerGen::new(format!("a_{i}"), 0, lvl));
        gens.push(FloerGen::new(format!("b_{i}"), 1, lvl));
        d.push(vec![]);
        let mut col = vec![(gens.len() - 2, Nov::mono(q(3, 32)))];
        if i > 1 {
            col.push((gens.len() - 4, Nov::mono(q(3, 32))));
        }
        d.push(col);
    }
    FloerComplex::new(gens, d, 2)
}

#[derive(Debug, Clone, Serialize)]
pub struct DehnModel {
    pub k: usize,
    pub barcode: ConciseBarcode,
    /// Bars certified by the counting argument to be longer than `2ε′`.
    pub certified: usize,
    #[serde(with = "qstr")]
    pub min_length: Q,
}

pub fn dehn_sphere_model(k: usize, eps: Q) -> Result<(FloerComplex, DehnModel)> {
    if eps > q(1, 32) || eps < Q::zero() {
        return Err(Error::Precondition("ε′ must lie in [0, 1/32]".into()));
    }
    let c = dehn_sphere_complex(k)?;
    let cb = counting_bound(&c)?;
    let certified = if cb.min_length > eps * qi(2) { cb.bars } else { 0 };
    let barcode = concise_barcode(&c)?;
    Ok((c, DehnModel { k, barcode, certified, min_length: cb.min_length }))
}

/// `k(F) = 1/N^r(hom(G_F, G_F); k, 0)`.
pub fn family_constant(hom_gg: &FilteredComplex) -> Result<Q> {
    let n = cone_length(hom_gg, Q::zero(), ConeMode::ToTarget)?.value;
    if n == 0 {
        return Err(Error::Precondition("hom(G_F, G_F) has zero cone length".into()));
    }
    Ok(Q::new(1, n as i64))
}

/// `⌈k(F) · Σ_F #B^{2ε}(hom(F, L))⌉`.
pub fn lower_bound_conelength(homs: &[Barcode], kf: Q, eps: Q) -> Result<u64> {
    let mut total = 0u64;
    for b in homs {
        total += bar_count(b, eps * qi(2), false)? as u64;
    }
    Ok(ceil_mul(kf, total))
}

/// The same bound for complexes over the Novikov field.
pub fn lower_bound_conelength_concise(homs: &[ConciseBarcode], kf: Q, eps: Q) -> u64 {
    let total: u64 = homs.iter().map(|b| b.count_above(eps * qi(2)) as u64).sum();
    ceil_mul(kf, total)
}

fn ceil_mul(kf: Q, n: u64) -> u64 {
    let v = kf * Q::from_integer(n as i64);
    v.ceil().to_integer().max(0) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMode {
    /// `log N_k / k`.
    Exponential,
    /// `log N_k / log k`.
    Slow,
}

impl std::str::FromStr for EntropyMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<EntropyMode> {
        match s {
            "exponential" | "exp" => Ok(EntropyMode::Exponential),
            "slow" => Ok(EntropyMode::Slow),
            _ => Err(Error::Parse(format!("unknown entropy mode {s:?}"))),
        }
    }
}

/// `N_k` for `k = start, start + 1, …`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterateSequence {
    pub start: u64,
    pub values: Vec<u64>,
}

impl IterateSequence {
    pub fn new(start: u64, values: Vec<u64>) -> IterateSequence {
        IterateSequence { start, values }
    }

    pub fn from_fn(ks: std::ops::RangeInclusive<u64>, f: impl FnMut(u64) -> u64) -> IterateSequence {
        let start = *ks.start();
        IterateSequence { start, values: ks.map(f).collect() }
    }

    pub fn csv(&self, bounds: Option<&[u64]>) -> String {
        let mut s = String::from("k,N_k,bound\n");
        for (i, v) in self.values.iter().enumerate() {
            let b = bounds.and_then(|b| b.get(i)).map(|x| x.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{}\n", self.start + i as u64, v, b));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyEstimate {
    pub value: f64,
    /// First and last `k` of the regression window.
    pub window: (u64, u64),
}

/// Least-squares slope of `log N_k` against `k` (or `log k`) over the second
/// half of the prefix; `N_k = 0` counts as `log 1`.
pub fn entropy_estimate(seq: &IterateSequence, mode: EntropyMode) -> Result<EntropyEstimate> {
    let n = seq.values.len();
    if n < 3 {
        return Err(Error::Precondition("need at least 3 points".into()));
    }
    if mode == EntropyMode::Slow && seq.start == 0 {
        return Err(Error::Precondition("slow entropy needs k ≥ 1".into()));
    }
    let from = n / 2;
    let pts: Vec<(f64, f64)> = (from..n)
        .map(|i| {
            let k = (seq.start + i as u64) as f64;
            let x = match mode {
                EntropyMode::Exponential => k,
                EntropyMode::Slow => k.ln(),
            };
            (x, (seq.values[i].max(1) as f64).ln())
        })
        .collect();
    Ok(EntropyEstimate { value: slope(&pts), window: (seq.start + from as u64, seq.start + n as u64 - 1) })
}

pub fn slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `hom(L, L)` of a circle: one generator in each degree, no differential.
pub fn circle_self_hom() -> FilteredComplex {
    let e = FilteredComplex::e1(Q::zero(), 0, 2);
    e.direct_sum(&FilteredComplex::e1(Q::zero(), 1, 2)).expect("same modulus")
}

/// Lower bounds for `N^r(Ψ^k L; E, ε)` along the Dehn-twist family.
pub fn dehn_conelength_bounds(ks: std::ops::RangeInclusive<u64>, eps: Q) -> Result<(IterateSequence, IterateSequence)> {
    let kf = family_constant(&circle_self_hom())?;
    let mut bars = Vec::new();
    let mut bounds = Vec::new();
    let start = *ks.start();
    for k in ks {
        let (_, m) = dehn_sphere_model(k as usize, eps)?;
        bars.push(m.barcode.count_above(eps * qi(2)) as u64);
        bounds.push(lower_bound_conelength_concise(std::slice::from_ref(&m.barcode), kf, eps));
    }
    Ok((IterateSequence::new(start, bars), IterateSequence::new(start, bounds)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_shape() {
        let p = EtaProfile::new(q(11, 10), q(8, 5), q(1, 2)).unwrap();
        for i in 0..=900 {
            let x = i as f64 / 100.0;
            assert!(p.deta(x) <= 1.5 + 1e-12);
            assert!(p.deta(x) >= -1e-12);
        }
        assert!((p.eta(2.0) - (2.2 - 1.6)).abs() < 1e-12);
        assert!((p.eta(8.0 - 1e-12) - to_f64(&p.variation())).abs() < 1e-9);
        assert!(EtaProfile::new(qi(1), q(6, 5), q(1, 2)).is_err());
    }
}
