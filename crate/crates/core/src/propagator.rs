//! Evaluation of `S^a f(x, t) = (2π)^{−n} ∫ e^{i(x·ξ + t|ξ|^a)} f̂(ξ) dξ` for
//! radial data.
//!
//! For `f̂(ξ) = g(|ξ|)` the integral reduces to
//! `(2π)^{−n/2} ∫₀^∞ g(ρ) e^{itρ^a} (rρ)^{−ν} J_ν(rρ) ρ^{n−1} dρ` with
//! `ν = n/2 − 1`, which at `t = 0` is the inverse transform of `g`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profile::Spectrum;
use crate::quadrature::{marching_nodes, Node};
use crate::special::BesselOrder;
use crate::transform::{line_nodes, sphere_factor};

/// Dispersion exponent `a`, dimension `n` and regularity `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub a: f64,
    pub n: usize,
    pub s: f64,
}

impl SymbolParams {
    pub fn new(a: f64, n: usize, s: f64) -> Result<Self> {
        let p = Self { a, n, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return invalid(format!("dispersion exponent must be positive, got {}", self.a));
        }
        if self.n < 1 {
            return invalid("dimension must be at least 1");
        }
        if !self.s.is_finite() {
            return invalid("regularity must be finite");
        }
        Ok(())
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    pub(crate) fn order(&self) -> Result<BesselOrder> {
        BesselOrder::for_dimension(self.n)
    }
}

/// Radius `r = |x|` and time `t`, `|t| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub r: f64,
    pub t: f64,
}

impl EvalPoint {
    pub fn new(r: f64, t: f64) -> Result<Self> {
        let pt = Self { r, t };
        pt.validate()?;
        Ok(pt)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r >= 0.0) {
            return invalid(format!("radius must be finite and non-negative, got {}", self.r));
        }
        if !(self.t.abs() < 1.0) {
            return invalid(format!("time must satisfy |t| < 1, got {}", self.t));
        }
        Ok(())
    }
}

#[inline]
fn normalization(n: usize) -> f64 {
    (2.0 * PI).powf(-(n as f64) / 2.0)
}

/// Largest `ρ^{a−1}` over the part of the support that quadrature panels
/// actually reach.
fn max_slope(g: &dyn Spectrum, a: f64) -> f64 {
    let (lo, hi) = g.support();
    let lo = lo.max(g.resolution().min(hi) * 1e-3).max(1e-6);
    lo.powf(a - 1.0).max(hi.powf(a - 1.0))
}

/// Quadrature nodes in `ρ` resolving `e^{i(±rρ + tρ^a)}` for all `|t| ≤ t_max`.
///
/// Each Gauss–Legendre panel spans at most one local wavelength of the
/// combined phase, so the mean node spacing stays below an eighth of it.
pub(crate) fn frequency_nodes(g: &dyn Spectrum, a: f64, r: f64, t_max: f64) -> Vec<Node> {
    let (lo, hi) = g.support();
    let res = g.resolution().min((hi - lo) / 4.0);
    let rate = g.phase_rate();
    let step = |rho: f64| {
        let omega = r + a * t_max * rho.powf(a - 1.0) + rate + 1.0;
        res.min(2.0 * PI / omega)
    };
    marching_nodes(lo, hi, &g.breaks(), step)
}

/// `S^a f(r, t)` at every `t` in `ts`, sharing one node set.
pub(crate) fn propagate_many(g: &dyn Spectrum, order: &BesselOrder, a: f64, n: usize, r: f64, ts: &[f64]) -> Vec<Complex64> {
    let t_max = ts.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let nodes = frequency_nodes(g, a, r, t_max);
    let pow = (n - 1) as i32;
    let mut out = vec![Complex64::new(0.0, 0.0); ts.len()];
    for nd in &nodes {
        let v = g.value(nd.x);
        if v == Complex64::new(0.0, 0.0) {
            continue;
        }
        let base = v * (nd.w * order.j_scaled(r * nd.x) * nd.x.powi(pow));
        let ua = nd.x.powf(a);
        for (o, &t) in out.iter_mut().zip(ts) {
            *o += base * Complex64::from_polar(1.0, t * ua);
        }
    }
    let c = normalization(n);
    out.iter_mut().for_each(|v| *v *= c);
    out
}

/// `S^a f(r, t)` by direct quadrature of the one-dimensional reduction.
pub fn evaluate_sa(g: &dyn Spectrum, p: &SymbolParams, pt: EvalPoint) -> Result<Complex64> {
    p.validate()?;
    pt.validate()?;
    let order = p.order()?;
    let v = propagate_many(g, &order, p.a, p.n, pt.r, &[pt.t])[0];
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Divergent(format!("S^a f is not finite at r = {}, t = {}", pt.r, pt.t)));
    }
    Ok(v)
}

/// `(2π)^{−2} ∫_{ℝ²} e^{i(x·ξ + t|ξ|^a)} g(|ξ|) dξ` by Cartesian quadrature.
pub fn evaluate_sa_oracle(g: &dyn Spectrum, p: &SymbolParams, x: [f64; 2], t: f64) -> Result<Complex64> {
    p.validate()?;
    if p.n != 2 {
        return Err(Error::Unsupported(format!("the Cartesian oracle only handles n = 2, got {}", p.n)));
    }
    if !(t.abs() < 1.0) {
        return invalid(format!("time must satisfy |t| < 1, got {t}"));
    }
    let (lo, hi) = g.support();
    let breaks = g.breaks();
    let res = g.resolution().min((hi - lo) / 4.0);
    let sweep = p.a * t.abs() * max_slope(g, p.a) + g.phase_rate() + 1.0;
    let step = |c: f64| res.min(2.0 * PI / (c.abs() + sweep));
    let mut outer_breaks = breaks.clone();
    if lo > 0.0 {
        outer_breaks.push(lo);
    }
    let outer = line_nodes(0.0, 0.0, hi, &outer_breaks, step(x[0]), true);
    let inner_step = step(x[1]);
    let mut total = Complex64::new(0.0, 0.0);
    for o in &outer {
        let mut acc = Complex64::new(0.0, 0.0);
        for nd in line_nodes(o.x, lo, hi, &breaks, inner_step, true) {
            let rho = (o.x * o.x + nd.x * nd.x).sqrt();
            let v = g.value(rho);
            if v != Complex64::new(0.0, 0.0) {
                let phase = x[0] * o.x + x[1] * nd.x + t * rho.powf(p.a);
                acc += v * Complex64::from_polar(nd.w, phase);
            }
        }
        total += acc * o.w;
    }
    Ok(total / (4.0 * PI * PI))
}

/// `(2π)^{−n} |S^{n−1}| ∫ ρ^{n−1} |g| dρ`, the triangle-inequality ceiling for
/// `|S^a f|`.
pub fn magnitude_ceiling(g: &dyn Spectrum, n: usize) -> f64 {
    moment(g, n, 0.0) * sphere_factor(n) * (2.0 * PI).powi(-(n as i32))
}

/// `(2π)^{−n} |S^{n−1}| ∫ ρ^{a+n−1} |g| dρ`, a Lipschitz constant of
/// `t ↦ S^a f(r, t)`.
pub fn time_lipschitz_bound(g: &dyn Spectrum, p: &SymbolParams) -> f64 {
    moment(g, p.n, p.a) * sphere_factor(p.n) * (2.0 * PI).powi(-(p.n as i32))
}

fn moment(g: &dyn Spectrum, n: usize, k: f64) -> f64 {
    let (lo, hi) = g.support();
    let step = g.resolution().min((hi - lo) / 4.0);
    let pow = (n - 1) as f64 + k;
    marching_nodes(lo, hi, &g.breaks(), |_| step)
        .iter()
        .map(|nd| nd.w * g.value(nd.x).norm() * nd.x.powf(pow))
        .sum()
}

/// `‖S^a f(·, t)‖_{L²(ℝⁿ)}` by radial quadrature in `x`, extending the radius
/// until the outermost shell no longer contributes.
pub fn spatial_l2_norm(g: &dyn Spectrum, p: &SymbolParams, t: f64) -> Result<f64> {
    p.validate()?;
    let order = p.order()?;
    let (_, hi) = g.support();
    let band = 2.0 * (hi + g.phase_rate()) + 1.0;
    let panel = 2.0 * PI / band;
    let reach = p.a * t.abs() * max_slope(g, p.a) + g.phase_rate();
    let mut r_hi = (reach + 12.0 / g.smooth_scale().min(1.0)).max(4.0);
    let mut r_lo = 0.0;
    let pow = (p.n - 1) as i32;
    let mut total = 0.0;
    let mut previous = f64::INFINITY;
    let mut previous_q = f64::NAN;
    loop {
        let nodes = marching_nodes(r_lo, r_hi, &[], |_| panel);
        let shell: Vec<f64> = nodes
            .par_iter()
            .map(|nd| {
                let v = propagate_many(g, &order, p.a, p.n, nd.x, &[t])[0];
                nd.w * v.norm_sqr() * nd.x.powi(pow)
            })
            .collect();
        let piece: f64 = shell.iter().sum();
        total += piece;
        if !total.is_finite() {
            return Err(Error::Divergent("spatial norm is not finite".into()));
        }
        if piece <= 1e-10 * total || r_hi > 1e5 {
            break;
        }
        // Once consecutive doubling shells shrink by a steady factor (algebraic
        // decay in r), the rest of the series is summed in closed form.
        let q = piece / previous;
        let steady = (q / previous_q - 1.0).abs() < 0.25;
        if steady && q <= 0.5 {
            let tail = piece * q / (1.0 - q);
            if tail <= 1e-8 * total {
                total += tail;
                break;
            }
        }
        previous = piece;
        previous_q = q;
        r_lo = r_hi;
        r_hi *= 2.0;
    }
    Ok((sphere_factor(p.n) * total).sqrt())
}

/// `‖S^a f(·, t)‖ / ‖f‖`, both norms taken in space.
pub fn unimodularity_check(g: &dyn Spectrum, p: &SymbolParams, t: f64) -> Result<f64> {
    Ok(unimodularity_checks(g, p, &[t])?[0])
}

/// [`unimodularity_check`] at several times, sharing the `t = 0` norm.
pub fn unimodularity_checks(g: &dyn Spectrum, p: &SymbolParams, ts: &[f64]) -> Result<Vec<f64>> {
    if let Some(t) = ts.iter().find(|t| !(t.abs() < 1.0)) {
        return invalid(format!("time must satisfy |t| < 1, got {t}"));
    }
    let base = spatial_l2_norm(g, p, 0.0)?;
    if base == 0.0 {
        return invalid("zero input has no isometry ratio");
    }
    ts.iter().map(|&t| if t == 0.0 { Ok(1.0) } else { Ok(spatial_l2_norm(g, p, t)? / base) }).collect()
}

/// Equispaced times `t_j = j·h·2^{−L}`, `|j| < 2^L`, inside `(−h, h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
    level: Option<u32>,
    half_width: f64,
}

impl TimeGrid {
    pub fn uniform(level: u32, half_width: f64) -> Self {
        let m = 1i64 << level;
        let dt = half_width / m as f64;
        let points = (-(m - 1)..m).map(|j| j as f64 * dt).collect();
        Self { points, level: Some(level), half_width }
    }

    /// Arbitrary points inside `(−half_width, half_width)`.
    pub fn from_points(mut points: Vec<f64>, half_width: f64) -> Result<Self> {
        if points.is_empty() {
            return invalid("time grid is empty");
        }
        if points.iter().any(|t| !(t.abs() < half_width)) {
            return invalid(format!("time grid leaves (-{half_width}, {half_width})"));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Self { points, level: None, half_width })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn level(&self) -> Option<u32> {
        self.level
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Next level of a uniform grid (a superset); explicit grids are returned
    /// unchanged.
    pub fn refined(&self) -> Self {
        match self.level {
            Some(l) => Self::uniform(l + 1, self.half_width),
            None => self.clone(),
        }
    }

    fn step(&self) -> Option<f64> {
        self.level.map(|l| self.half_width / (1u64 << l) as f64)
    }
}

enum SlabMode {
    Direct,
    Fft { len: usize, slots: Vec<usize>, plan: Arc<dyn Fft<f64>> },
}

/// All times of a uniform grid at once, via the substitution `u = ρ^a` and a
/// trapezoid rule in `u`.
///
/// With `Δt·Δu = 2π/P` the trapezoid sum becomes a length-`P` discrete
/// Fourier transform. Only profiles supported away from the origin and
/// vanishing smoothly at both ends qualify; for those the trapezoid rule is
/// spectrally accurate.
pub struct TimeSlab {
    order: BesselOrder,
    rho: Vec<f64>,
    u: Vec<f64>,
    weight: Vec<Complex64>,
    times: Vec<f64>,
    mode: SlabMode,
}

const ENVELOPE_BAND: f64 = 16.0;

impl TimeSlab {
    pub fn eligible(g: &dyn Spectrum) -> bool {
        g.support().0 > 0.0 && g.smooth_ends()
    }

    /// Plan for radii up to `r_max`.
    pub fn new(g: &dyn Spectrum, p: &SymbolParams, grid: &TimeGrid, r_max: f64) -> Result<Self> {
        p.validate()?;
        if !Self::eligible(g) {
            return Err(Error::Unsupported("profile does not vanish smoothly away from the origin".into()));
        }
        let dt = grid.step().ok_or_else(|| Error::Unsupported("time slab needs a uniform grid".into()))?;
        let a = p.a;
        let (lo, hi) = g.support();
        let (u_lo, u_hi) = (lo.powf(a), hi.powf(a));
        // dρ/du = ρ^{1−a}/a and du/dρ = aρ^{a−1}, extremes at the support ends.
        let drho_du = lo.powf(1.0 - a).max(hi.powf(1.0 - a)) / a;
        let du_drho = a * lo.powf(a - 1.0).min(hi.powf(a - 1.0));
        let ell_u = g.smooth_scale() * du_drho;
        let band = grid.half_width() + (r_max + g.phase_rate()) * drho_du + ENVELOPE_BAND / ell_u;
        let du_max = 2.0 * PI / band;

        let times = grid.points().to_vec();
        let t_count = times.len();
        let m_est = ((u_hi - u_lo) / du_max).ceil() as usize + 1;
        let p_len = (2.0 * PI / (dt * du_max)).ceil().max(t_count as f64 + 1.0) as usize;
        let p_len = p_len.next_power_of_two();
        let fft_cost = p_len as f64 * (p_len as f64).log2() * 3.0;
        let use_fft = fft_cost < (m_est * t_count) as f64;
        let du = if use_fft { 2.0 * PI / (p_len as f64 * dt) } else { du_max };

        let k_lo = (u_lo / du).ceil() as i64;
        let k_hi = (u_hi / du).floor() as i64;
        let pow = (p.n - 1) as i32;
        let c = normalization(p.n) * du / a;
        let mut rho = Vec::new();
        let mut u = Vec::new();
        let mut weight = Vec::new();
        let mut ks = Vec::new();
        for k in k_lo..=k_hi {
            let uk = k as f64 * du;
            let r = uk.powf(1.0 / a);
            let v = g.value(r);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            rho.push(r);
            u.push(uk);
            weight.push(v * (c * r.powi(pow) * r.powf(1.0 - a)));
            ks.push(k);
        }
        let mode = if use_fft {
            let slots = ks.iter().map(|k| k.rem_euclid(p_len as i64) as usize).collect();
            let plan = FftPlanner::new().plan_fft_inverse(p_len);
            SlabMode::Fft { len: p_len, slots, plan }
        } else {
            SlabMode::Direct
        };
        Ok(Self { order: p.order()?, rho, u, weight, times, mode })
    }

    pub fn sample_count(&self) -> usize {
        self.rho.len()
    }

    /// `S^a f(r, t_j)` in grid order.
    pub fn eval(&self, r: f64) -> Vec<Complex64> {
        let f: Vec<Complex64> =
            self.rho.iter().zip(&self.weight).map(|(&x, &w)| w * self.order.j_scaled(r * x)).collect();
        match &self.mode {
            SlabMode::Direct => {
                let t0 = self.times[0];
                let dt = if self.times.len() > 1 { self.times[1] - self.times[0] } else { 0.0 };
                let mut out = vec![Complex64::new(0.0, 0.0); self.times.len()];
                for (&fk, &uk) in f.iter().zip(&self.u) {
                    let rot = Complex64::from_polar(1.0, dt * uk);
                    let mut cur = fk * Complex64::from_polar(1.0, t0 * uk);
                    for o in out.iter_mut() {
                        *o += cur;
                        cur *= rot;
                    }
                }
                out
            }
            SlabMode::Fft { len, slots, plan } => {
                let mut buf = vec![Complex64::new(0.0, 0.0); *len];
                for (&fk, &slot) in f.iter().zip(slots) {
                    buf[slot] += fk;
                }
                plan.process(&mut buf);
                let dt = self.times.get(1).map_or(1.0, |t1| t1 - self.times[0]);
                self.times
                    .iter()
                    .map(|&t| {
                        let j = (t / dt).round() as i64;
                        buf[j.rem_euclid(*len as i64) as usize]
                    })
                    .collect()
            }
        }
    }
}
