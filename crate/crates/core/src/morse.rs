//! Morse functions of small variation whose gradient is large away from small
//! balls around the critical points, on circles and flat tori.
//!
//! A circle profile is a piecewise-linear function with slopes `±s` whose
//! corners are smoothed by symmetric caps. A cap of outer radius `ρ` around a
//! corner is C¹; a shrunk cap additionally has an inner ball of radius `η_z`
//! on which `|f′| ≤ δ`.

use crate::error::{Error, Result};
use crate::q::{fmt_q, q, qi, qstr, to_f64, Q};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Kink {
    #[serde(with = "qstr")]
    pub x: Q,
    /// Value of the underlying corner before smoothing.
    #[serde(with = "qstr")]
    pub corner: Q,
    pub peak: bool,
    #[serde(with = "qstr")]
    pub rho: Q,
    /// Radius of the declared critical ball.
    #[serde(with = "qstr")]
    pub eta: Q,
    /// `|f′|` on the boundary of the declared ball.
    #[serde(with = "qstr")]
    pub inner_slope: Q,
}

impl Kink {
    /// `∫₀^ρ (s − |f′|)`: how far the smoothed critical value sits from the corner.
    fn depth(&self, s: Q) -> Q {
        s * self.rho - self.inner_slope * self.eta / qi(2) - (self.rho - self.eta) * (self.inner_slope + s) / qi(2)
    }

    pub fn critical_value(&self, s: Q) -> Q {
        if self.peak {
            self.corner - self.depth(s)
        } else {
            self.corner + self.depth(s)
        }
    }

    /// Rise above the critical value at distance `τ ≤ ρ`, and `|f′|` there.
    fn cap(&self, s: f64, tau: f64) -> (f64, f64) {
        let (rho, eta, d) = (to_f64(&self.rho), to_f64(&self.eta), to_f64(&self.inner_slope));
        if tau <= eta {
            (d * tau * tau / (2.0 * eta), d * tau / eta)
        } else {
            let u = tau - eta;
            let w = rho - eta;
            (d * eta / 2.0 + d * u + (s - d) * u * u / (2.0 * w), d + (s - d) * u / w)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PiecewiseProfile {
    #[serde(with = "qstr")]
    pub circumference: Q,
    #[serde(with = "qstr")]
    pub slope: Q,
    #[serde(with = "qstr")]
    pub k: Q,
    #[serde(with = "qstr")]
    pub delta: Q,
    #[serde(with = "qstr")]
    pub eta: Q,
    /// Cap radius given to corners created by folding.
    #[serde(with = "qstr")]
    pub smoothing: Q,
    /// Sorted by position; alternately valleys and peaks.
    pub kinks: Vec<Kink>,
}

fn check_params(k: Q, delta: Q, eta: Q, c: Q) -> Result<()> {
    if k <= Q::zero() || delta <= Q::zero() || delta >= Q::one() || eta <= Q::zero() || c <= Q::zero() {
        return Err(Error::Precondition("need K > 0, 0 < δ < 1, η > 0 and a positive circumference".into()));
    }
    Ok(())
}

impl PiecewiseProfile {
    /// The height function with one valley at `0` and one peak at `c/2`, slope `±s`.
    pub fn standard(c: Q, s: Q, k: Q, delta: Q, eta: Q, rho: Q) -> Result<PiecewiseProfile> {
        check_params(k, delta, eta, c)?;
        if s < delta || rho <= Q::zero() || rho * qi(4) > c {
            return Err(Error::Precondition("need s ≥ δ and 0 < ρ ≤ c/4".into()));
        }
        let cap = |x: Q, corner: Q, peak: bool| Kink { x, corner, peak, rho, eta: rho, inner_slope: s };
        let mut f = PiecewiseProfile {
            circumference: c,
            slope: s,
            k,
            delta,
            eta,
            smoothing: rho,
            kinks: vec![cap(Q::zero(), Q::zero(), false), cap(c / qi(2), s * c / qi(2), true)],
        };
        f.normalize();
        Ok(f)
    }

    pub fn constant(c: Q, k: Q, delta: Q, eta: Q) -> Result<PiecewiseProfile> {
        check_params(k, delta, eta, c)?;
        Ok(PiecewiseProfile { circumference: c, slope: Q::zero(), k, delta, eta, smoothing: Q::zero(), kinks: vec![] })
    }

    /// Shifts values so that the minimum is `0`.
    fn normalize(&mut self) {
        let s = self.slope;
        if let Some(m) = self.kinks.iter().map(|z| z.critical_value(s)).min() {
            for z in &mut self.kinks {
                z.corner -= m;
            }
        }
    }

    pub fn critical_points(&self) -> usize {
        self.kinks.len()
    }

    pub fn min_value(&self) -> Q {
        self.kinks.iter().map(|z| z.critical_value(self.slope)).min().unwrap_or_else(Q::zero)
    }

    pub fn max_value(&self) -> Q {
        self.kinks.iter().map(|z| z.critical_value(self.slope)).max().unwrap_or_else(Q::zero)
    }

    pub fn variation(&self) -> Q {
        self.max_value() - self.min_value()
    }

    fn corner_range(&self) -> (Q, Q) {
        let lo = self.kinks.iter().map(|z| z.corner).min().unwrap_or_else(Q::zero);
        let hi = self.kinks.iter().map(|z| z.corner).max().unwrap_or_else(Q::zero);
        (lo, hi)
    }

    /// Cyclic signed offset `x − z` in `[−c/2, c/2)`.
    fn offset(&self, x: f64, z: f64) -> f64 {
        let c = to_f64(&self.circumference);
        (x - z + c / 2.0).rem_euclid(c) - c / 2.0
    }

    /// Index of the last kink at or before `x` (cyclically).
    fn kink_before(&self, x: f64) -> usize {
        let n = self.kinks.len();
        let p = self.kinks.partition_point(|z| to_f64(&z.x) <= x);
        (p + n - 1) % n
    }

    /// The critical point closest to `x` and the distance to it.
    fn nearest(&self, x: f64) -> Option<(&Kink, f64)> {
        if self.kinks.is_empty() {
            return None;
        }
        let i = self.kink_before(x.rem_euclid(to_f64(&self.circumference)));
        let j = (i + 1) % self.kinks.len();
        let (a, b) = (&self.kinks[i], &self.kinks[j]);
        let (da, db) = (self.offset(x, to_f64(&a.x)).abs(), self.offset(x, to_f64(&b.x)).abs());
        Some(if da <= db { (a, da) } else { (b, db) })
    }

    /// `(f(x), f′(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        if self.kinks.is_empty() {
            return (0.0, 0.0);
        }
        let c = to_f64(&self.circumference);
        let x = x.rem_euclid(c);
        let s = to_f64(&self.slope);
        let i = self.kink_before(x);
        let j = (i + 1) % self.kinks.len();
        for z in [&self.kinks[i], &self.kinks[j]] {
            let t = self.offset(x, to_f64(&z.x));
            if t.abs() <= to_f64(&z.rho) {
                let (rise, grad) = z.cap(s, t.abs());
                let m = to_f64(&z.critical_value(self.slope));
                let sign = if t < 0.0 { -1.0 } else { 1.0 };
                return if z.peak { (m - rise, -sign * grad) } else { (m + rise, sign * grad) };
            }
        }
        let z = &self.kinks[i];
        let t = (x - to_f64(&z.x)).rem_euclid(c);
        if z.peak {
            (to_f64(&z.corner) - s * t, -s)
        } else {
            (to_f64(&z.corner) + s * t, s)
        }
    }

    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        let c = to_f64(&self.circumference);
        (0..n)
            .map(|i| {
                let x = c * i as f64 / n as f64;
                (x, self.eval(x).0)
            })
            .collect()
    }

    pub fn to_csv(&self, n: usize) -> String {
        let mut s = String::from("sample,value\n");
        for (x, v) in self.samples(n) {
            s.push_str(&format!("{x},{v}\n"));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }
}

/// Folds `f` successively at each cut level: values above the level are
/// reflected below it, and every crossing becomes a new smoothed peak.
pub fn fold_step(f: &PiecewiseProfile, cuts: &[Q]) -> Result<PiecewiseProfile> {
    let mut g = f.clone();
    for &a in cuts {
        g = fold_once(&g, a)?;
    }
    Ok(g)
}

fn fold_once(f: &PiecewiseProfile, a: Q) -> Result<PiecewiseProfile> {
    let n = f.kinks.len();
    let s = f.slope;
    let c = f.circumference;
    let rho = f.smoothing;
    if f.kinks.iter().any(|z| z.corner == a) {
        return Err(Error::Precondition(format!("cut level {} is a critical value", fmt_q(&a))));
    }
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let z = &f.kinks[i];
        let w = &f.kinks[(i + 1) % n];
        let mut kz = z.clone();
        if z.corner > a {
            kz.corner = a * qi(2) - z.corner;
            kz.peak = !z.peak;
        }
        out.push(kz);
        if (z.corner < a) != (w.corner < a) {
            let dist = (a - z.corner).abs() / s;
            let len = if i + 1 == n { w.x + c - z.x } else { w.x - z.x };
            if dist < z.rho + rho || len - dist < w.rho + rho {
                return Err(Error::Precondition(format!("cut level {} hits a critical ball", fmt_q(&a))));
            }
            let mut x = z.x + dist;
            if x >= c {
                x -= c;
            }
            out.push(Kink { x, corner: a, peak: true, rho, eta: rho, inner_slope: s });
        }
    }
    out.sort_by_key(|p| p.x);
    let mut g = PiecewiseProfile { kinks: out, ..f.clone() };
    g.normalize();
    Ok(g)
}

/// Replaces the cap at kink `z` by one whose gradient is at most `δ` on the
/// ball of radius `η` and at least `δ` outside it.
pub fn shrink_step(f: &PiecewiseProfile, z: usize, eta: Q) -> Result<PiecewiseProfile> {
    let k = f.kinks.get(z).ok_or_else(|| Error::Precondition(format!("no critical point {z}")))?;
    if eta <= Q::zero() || eta >= k.rho {
        return Err(Error::Precondition(format!("η = {} must lie in (0, ρ = {})", fmt_q(&eta), fmt_q(&k.rho))));
    }
    if f.delta >= f.slope {
        return Err(Error::Precondition("δ must be below the slope".into()));
    }
    let mut g = f.clone();
    g.kinks[z].eta = eta;
    g.kinks[z].inner_slope = f.delta;
    g.normalize();
    Ok(g)
}

/// Unit slopes, folded at mid-level until the variation is at most `K`, then
/// every critical ball shrunk to radius `η`.
pub fn build_1d(k: Q, delta: Q, eta: Q, c: Q) -> Result<PiecewiseProfile> {
    check_params(k, delta, eta, c)?;
    let s = Q::one();
    let mut height = s * c / qi(2);
    let mut folds = 0u32;
    while height > k {
        height /= qi(2);
        folds += 1;
        if folds > 40 {
            return Err(Error::Precondition("K is too small".into()));
        }
    }
    let seg = c / Q::from_integer(1i64 << (folds + 1));
    let rho = (eta * qi(2)).min(seg / qi(4));
    if eta >= rho {
        return Err(Error::Precondition(format!(
            "η = {} is too large for {} segments of length {}",
            fmt_q(&eta),
            1u64 << (folds + 1),
            fmt_q(&seg)
        )));
    }
    let mut f = PiecewiseProfile::standard(c, s, k, delta, eta, rho)?;
    for _ in 0..folds {
        let (lo, hi) = f.corner_range();
        f = fold_step(&f, &[(lo + hi) / qi(2)])?;
    }
    for z in 0..f.kinks.len() {
        f = shrink_step(&f, z, eta)?;
    }
    Ok(f)
}

#[derive(Debug, Clone, Serialize)]
pub struct MorseReport {
    pub grid: usize,
    pub critical_points: usize,
    #[serde(with = "qstr")]
    pub variation: Q,
    #[serde(with = "qstr")]
    pub min: Q,
    pub sampled_min: f64,
    pub sampled_max: f64,
    pub min_gradient_outside: f64,
    pub failures: Vec<String>,
}

impl MorseReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Grid check of the bounds: `0 ≤ f ≤ K`, `min f = 0`, central differences at
/// least `δ(1 − 10⁻³)` wherever the stencil avoids the declared balls, and the
/// declared balls small and disjoint.
pub fn verify(f: &PiecewiseProfile, n: usize) -> MorseReport {
    let c = to_f64(&f.circumference);
    let h = c / n as f64;
    let delta = to_f64(&f.delta);
    let mut failures = Vec::new();
    let variation = f.variation();
    if variation > f.k {
        failures.push(format!("variation {} exceeds K = {}", fmt_q(&variation), fmt_q(&f.k)));
    }
    if !f.min_value().is_zero() {
        failures.push(format!("minimum is {}", fmt_q(&f.min_value())));
    }
    let m = f.kinks.len();
    for (i, z) in f.kinks.iter().enumerate() {
        if z.eta > f.eta || z.eta <= Q::zero() {
            failures.push(format!("critical point {i} has radius {}", fmt_q(&z.eta)));
        }
        let w = &f.kinks[(i + 1) % m];
        let gap = if i + 1 == m { w.x + f.circumference - z.x } else { w.x - z.x };
        if m > 1 && gap < z.rho + w.rho {
            failures.push(format!("caps at {i} and {} overlap", (i + 1) % m));
        }
    }
    let mut sampled_min = f64::INFINITY;
    let mut sampled_max = f64::NEG_INFINITY;
    let mut min_grad = f64::INFINITY;
    let mut signs = Vec::with_capacity(n);
    for i in 0..n {
        let x = c * i as f64 / n as f64;
        let v = f.eval(x).0;
        sampled_min = sampled_min.min(v);
        sampled_max = sampled_max.max(v);
        let g = (f.eval(x + h).0 - f.eval(x - h).0) / (2.0 * h);
        signs.push(g > 0.0);
        let near = f.nearest(x).is_some_and(|(z, d)| d <= to_f64(&z.eta) + h);
        if !near {
            min_grad = min_grad.min(g.abs());
            if g.abs() < delta * (1.0 - 1e-3) && failures.len() < 20 {
                failures.push(format!("|f′({x})| ≈ {} is below δ", g.abs()));
            }
        }
    }
    let sign_changes = (0..n).filter(|&i| signs[i] != signs[(i + 1) % n]).count();
    if sampled_min < -1e-12 || sampled_max > to_f64(&f.k) + 1e-12 {
        failures.push(format!("samples leave [0, K]: [{sampled_min}, {sampled_max}]"));
    }
    if n >= 8 * m.max(1) && !f.kinks.is_empty() && sign_changes != m {
        failures.push(format!("the grid sees {sign_changes} critical points, {m} declared"));
    }
    MorseReport {
        grid: n,
        critical_points: m,
        variation,
        min: f.min_value(),
        sampled_min,
        sampled_max,
        min_gradient_outside: min_grad,
        failures,
    }
}

/// `F(x, y) = u(x) + w(y)`: the fold in `x` plus a fiberwise profile on each
/// level circle.
#[derive(Debug, Clone, Serialize)]
pub struct TorusProfile {
    pub u: PiecewiseProfile,
    pub w: PiecewiseProfile,
}

pub fn build_torus(k: Q, delta: Q, eta: Q, cx: Q, cy: Q) -> Result<TorusProfile> {
    check_params(k, delta, eta, cx)?;
    let half = q(1, 2);
    let u = build_1d(k * half, delta, eta * half, cx)?;
    let w = build_1d(k * half, delta, eta * half, cy)?;
    Ok(TorusProfile { u, w })
}

impl TorusProfile {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.u.eval(x).0 + self.w.eval(y).0
    }

    pub fn critical_points(&self) -> usize {
        self.u.critical_points() * self.w.critical_points()
    }

    pub fn variation(&self) -> Q {
        self.u.variation() + self.w.variation()
    }
}

/// The two-dimensional analogue of [`verify`] on an `n × n` grid; a critical
/// ball is centred at a pair of critical points with radius `η_u + η_w`.
pub fn verify_torus(t: &TorusProfile, n: usize) -> MorseReport {
    let (cx, cy) = (to_f64(&t.u.circumference), to_f64(&t.w.circumference));
    let (hx, hy) = (cx / n as f64, cy / n as f64);
    let delta = to_f64(&t.u.delta);
    let k = t.u.k + t.w.k;
    let mut failures = Vec::new();
    let variation = t.variation();
    if variation > k {
        failures.push(format!("variation {} exceeds K = {}", fmt_q(&variation), fmt_q(&k)));
    }
    let min = t.u.min_value() + t.w.min_value();
    if !min.is_zero() {
        failures.push(format!("minimum is {}", fmt_q(&min)));
    }
    for a in &t.u.kinks {
        for b in &t.w.kinks {
            if a.eta + b.eta > t.u.eta * qi(2) {
                failures.push("a critical ball exceeds η".into());
            }
        }
    }
    let reach = hx.hypot(hy);
    let mut sampled_min = f64::INFINITY;
    let mut sampled_max = f64::NEG_INFINITY;
    let mut min_grad = f64::INFINITY;
    for i in 0..n {
        let x = cx * i as f64 / n as f64;
        let fx = t.u.eval(x).0;
        let gx = (t.u.eval(x + hx).0 - t.u.eval(x - hx).0) / (2.0 * hx);
        for j in 0..n {
            let y = cy * j as f64 / n as f64;
            let v = fx + t.w.eval(y).0;
            sampled_min = sampled_min.min(v);
            sampled_max = sampled_max.max(v);
            let gy = (t.w.eval(y + hy).0 - t.w.eval(y - hy).0) / (2.0 * hy);
            let g = gx.hypot(gy);
            let near = match (t.u.nearest(x), t.w.nearest(y)) {
                (Some((a, dx)), Some((b, dy))) => dx.hypot(dy) <= to_f64(&(a.eta + b.eta)) + reach,
                _ => false,
            };
            if !near {
                min_grad = min_grad.min(g);
                if g < delta * (1.0 - 1e-3) && failures.len() < 20 {
                    failures.push(format!("|∇F({x}, {y})| ≈ {g} is below δ"));
                }
            }
        }
    }
    if sampled_min < -1e-12 || sampled_max > to_f64(&k) + 1e-12 {
        failures.push(format!("samples leave [0, K]: [{sampled_min}, {sampled_max}]"));
    }
    MorseReport {
        grid: n * n,
        critical_points: t.critical_points(),
        variation,
        min,
        sampled_min,
        sampled_max,
        min_gradient_outside: min_grad,
        failures,
    }
}
