//! The linearized maximal operator `R_t`, its cosine split, the frequency and
//! range splits of the tilded operator, and the kernel `K_{mμ}`.
//!
//! Two versions of `R_t` appear. [`apply_rt`] is the operator on the line,
//!
//! `R_t f(x) = ∫_ℝ e^{ixξ} e^{it(x)|ξ|^a} γ_{−2s}(ξ)^{1/2} f(ξ) dξ`,
//!
//! applied to even `f` described by its values on `ξ ≥ 0`. [`apply_rt_radial`]
//! is the half-line operator obtained from the Bessel reduction,
//!
//! `R_t f(r) = ψ(r) ∫₀^∞ (rρ)^{1/2} J_λ(rρ) e^{it(r)ρ^a} ρ^{−s} ψ(ρ) f(ρ) dρ`,
//!
//! whose kernel splits into the cosine main term and a remainder of size
//! `(rρ)^{−1}`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoffs::{chi, gamma_weight, psi, CutoffFamily};
use crate::error::{invalid, Error, Result};
use crate::maximal::{converged_field, range_norm, sobolev_norm, FieldPolicy, MaximalField, RadialGrid, Range};
use crate::profile::{Spectrum, Weighted};
use crate::propagator::{propagate_many, SymbolParams, TimeGrid};
use crate::quadrature::{marching_nodes, trapezoid_weights, Node};
use crate::special::{AsymptoticCertificate, BesselOrder};
use crate::transform::radial_l2_norm;

/// A time `t(r) ∈ (−1, 1)` attached to every node of a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSelector {
    grid: RadialGrid,
    times: Vec<f64>,
}

impl TimeSelector {
    pub fn new(grid: RadialGrid, times: Vec<f64>) -> Result<Self> {
        if times.len() != grid.nodes().len() {
            return invalid(format!("selector has {} times for {} radii", times.len(), grid.nodes().len()));
        }
        if let Some(t) = times.iter().find(|t| !(t.abs() < 1.0)) {
            return invalid(format!("selector value {t} is outside (-1, 1)"));
        }
        Ok(Self { grid, times })
    }

    pub fn constant(grid: RadialGrid, t: f64) -> Result<Self> {
        let times = vec![t; grid.nodes().len()];
        Self::new(grid, times)
    }

    /// Constant on each of `pieces` random subintervals of `[0, r_max]`, the
    /// values drawn from `choices`.
    pub fn piecewise_random<R: Rng + ?Sized>(
        grid: RadialGrid,
        pieces: usize,
        choices: &[f64],
        rng: &mut R,
    ) -> Result<Self> {
        if pieces == 0 || choices.is_empty() {
            return invalid("random selector needs at least one piece and one value");
        }
        let mut cuts: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.0..grid.r_max())).collect();
        cuts.sort_by(f64::total_cmp);
        let values: Vec<f64> = (0..pieces).map(|_| choices[rng.gen_range(0..choices.len())]).collect();
        let times = grid.nodes().iter().map(|nd| values[cuts.partition_point(|&c| c < nd.x)]).collect();
        Self::new(grid, times)
    }

    /// The maximizing times of a maximal field.
    pub fn from_field(field: &MaximalField) -> Result<Self> {
        Self::new(field.radii.clone(), field.argmax_t.clone())
    }

    /// `t(r)`; radii that are not grid nodes are rejected.
    pub fn at(&self, r: f64) -> Result<f64> {
        let nodes = self.grid.nodes();
        let i = nodes.partition_point(|nd| nd.x < r);
        let tol = 1e-12 * r.abs().max(1.0);
        for j in [i.wrapping_sub(1), i] {
            if let Some(nd) = nodes.get(j) {
                if (nd.x - r).abs() <= tol {
                    return Ok(self.times[j]);
                }
            }
        }
        invalid(format!("radius {r} is not a node of the selector grid"))
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
}

/// Frequency weight inside the line operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineWeight {
    /// `γ ≡ 1`.
    Unit,
    /// `γ_{−2s}^{1/2}`.
    LittlewoodPaley,
}

fn dyadic_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut b = 1.0;
    while b < hi {
        if b > lo {
            out.push(b);
        }
        b *= 2.0;
    }
    out
}

fn line_spectrum<'a>(f: &'a dyn Spectrum, s: f64, weight: LineWeight) -> Weighted<'a, dyn Spectrum + 'a, impl Fn(f64) -> f64 + Sync> {
    let (lo, hi) = f.support();
    Weighted {
        base: f,
        weight: move |xi: f64| match weight {
            LineWeight::Unit => 1.0,
            LineWeight::LittlewoodPaley => gamma_weight(-s, xi).sqrt(),
        },
        extra_breaks: dyadic_breaks(lo, hi),
        smooth: true,
    }
}

/// `R_t f` on the selector grid, for `f` even on the line.
pub fn apply_rt(f: &dyn Spectrum, sel: &TimeSelector, p: &SymbolParams, weight: LineWeight) -> Result<Vec<Complex64>> {
    p.validate()?;
    let h = line_spectrum(f, p.s, weight);
    let order = BesselOrder::new(-0.5)?;
    // With n = 1 the propagator is (1/π) ∫₀^∞ cos(xξ) e^{itξ^a} h dξ.
    Ok(sel
        .grid
        .nodes()
        .par_iter()
        .zip(sel.times.par_iter())
        .map(|(nd, &t)| 2.0 * PI * propagate_many(&h, &order, p.a, 1, nd.x, &[t])[0])
        .collect())
}

/// `‖v‖_{L²(ℝ)}` of an even function sampled on the grid nodes.
pub fn line_norm(values: &[Complex64], grid: &RadialGrid) -> f64 {
    (2.0 * weighted_sum(values, grid.nodes())).sqrt()
}

/// `‖v‖_{L²(ℝ₊)}` of a function sampled on the grid nodes.
pub fn half_line_norm(values: &[Complex64], grid: &RadialGrid) -> f64 {
    weighted_sum(values, grid.nodes()).sqrt()
}

fn weighted_sum(values: &[Complex64], nodes: &[Node]) -> f64 {
    nodes.iter().zip(values).map(|(nd, v)| nd.w * v.norm_sqr()).sum()
}

/// `‖f‖_{L²(ℝ)}` for `f` even, from its values on `ξ ≥ 0`.
pub fn profile_line_norm(f: &dyn Spectrum) -> f64 {
    radial_l2_norm(f, 1)
}

/// `‖f‖_{L²(ℝ₊)}`.
pub fn profile_half_line_norm(f: &dyn Spectrum) -> f64 {
    radial_l2_norm(f, 1) / 2f64.sqrt()
}

/// `sup_{|t|<1} |R_t f|` on the line with its `L²(ℝ)` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineMaximal {
    pub field: MaximalField,
    pub norm: f64,
}

impl LineMaximal {
    /// The time grid the sup was taken over.
    pub fn time_grid(&self) -> TimeGrid {
        let level = ((self.field.time_points + 1) as f64).log2().round() as u32 - 1;
        TimeGrid::uniform(level, 1.0)
    }
}

pub fn line_maximal(f: &dyn Spectrum, p: &SymbolParams, weight: LineWeight, policy: &FieldPolicy) -> Result<LineMaximal> {
    let h = line_spectrum(f, p.s, weight);
    let p1 = SymbolParams::new(p.a, 1, 0.0)?;
    let field = converged_field(&h, &p1, Range::Global, policy)?;
    let norm = 2.0 * PI * range_norm(&field, 1, Range::Global)?;
    for &v in &field.sup_values {
        if !v.is_finite() {
            return Err(Error::Divergent("line maximal function is not finite".into()));
        }
    }
    Ok(LineMaximal { field, norm })
}

/// Kernel of the half-line operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialPiece {
    /// `(rρ)^{1/2} J_λ(rρ)`.
    Full,
    /// `√(2/π) cos(rρ − λπ/2 − π/4)`.
    Main,
    /// `(rρ)^{1/2} (J_λ − main term)(rρ)`.
    Remainder,
}

impl RadialPiece {
    #[inline]
    fn kernel(self, order: &BesselOrder, x: f64) -> f64 {
        let root = x.sqrt();
        match self {
            RadialPiece::Full => root * order.j(x),
            RadialPiece::Main => root * order.main_term(x),
            RadialPiece::Remainder => root * order.remainder(x),
        }
    }
}

/// The half-line `R_t` with kernel `piece`, on the selector grid.
pub fn apply_rt_radial(f: &dyn Spectrum, sel: &TimeSelector, p: &SymbolParams, piece: RadialPiece) -> Result<Vec<Complex64>> {
    p.validate()?;
    let order = p.order()?;
    let (lo, hi) = f.support();
    let lo = lo.max(1.0);
    let mut breaks: Vec<f64> = f.breaks().into_iter().chain([2.0]).filter(|&b| b > lo && b < hi).collect();
    breaks.sort_by(f64::total_cmp);
    let res = f.resolution().min(0.25);
    Ok(sel
        .grid
        .nodes()
        .par_iter()
        .zip(sel.times.par_iter())
        .map(|(nd, &t)| {
            let r = nd.x;
            let cut = psi(r);
            if cut == 0.0 || lo >= hi {
                return Complex64::new(0.0, 0.0);
            }
            let step = |rho: f64| res.min(2.0 * PI / (r + p.a * t.abs() * rho.powf(p.a - 1.0) + 1.0));
            let mut acc = Complex64::new(0.0, 0.0);
            for q in marching_nodes(lo, hi, &breaks, step) {
                let v = f.value(q.x);
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let amp = q.w * piece.kernel(&order, r * q.x) * q.x.powf(-p.s) * psi(q.x);
                acc += v * Complex64::from_polar(amp, t * q.x.powf(p.a));
            }
            acc * cut
        })
        .collect())
}

/// `R_{t,1}` (`which = 1`) or `R_{t,2}` (`which = 2`).
pub fn apply_rt_split(f: &dyn Spectrum, sel: &TimeSelector, p: &SymbolParams, which: u8) -> Result<Vec<Complex64>> {
    let piece = match which {
        1 => RadialPiece::Main,
        2 => RadialPiece::Remainder,
        _ => return invalid(format!("split piece must be 1 or 2, got {which}")),
    };
    apply_rt_radial(f, sel, p, piece)
}

/// Radial grid for the half-line operator wide enough that the output is
/// negligible beyond it.
pub fn split_grid(f: &dyn Spectrum, p: &SymbolParams) -> Result<RadialGrid> {
    let (lo, hi) = f.support();
    let lo = lo.max(1.0);
    let reach = p.a * lo.powf(p.a - 1.0).max(hi.powf(p.a - 1.0));
    let r_max = 2.0 * reach + 16.0 / f.smooth_scale().min(1.0);
    let panel = (2.0 * PI / (hi + reach + 1.0)).min(1.0);
    RadialGrid::new(r_max, panel)
}

/// `c_λ (∫₁^∞ ψ(r)² r^{−2} dr)^{1/2} (∫₁^∞ ρ^{−2−2s} ψ(ρ) dρ)^{1/2}`, an
/// explicit bound for `‖R_{t,2}‖` on `L²(ℝ₊)`.
pub fn remainder_constant(p: &SymbolParams, cutoffs: &CutoffFamily, cert: &AsymptoticCertificate) -> Result<f64> {
    p.validate()?;
    if !(p.s > -0.5) {
        return Err(Error::Divergent(format!("∫ ρ^(-2-2s) ψ diverges for s = {}", p.s)));
    }
    let lambda = p.n as f64 / 2.0 - 1.0;
    if cert.lambda != lambda {
        return invalid(format!("certificate is for order {}, dimension {} needs {lambda}", cert.lambda, p.n));
    }
    // ψ ≡ 1 beyond 2, where both integrals are elementary.
    let band = marching_nodes(1.0, 2.0, &[], |_| 1.0 / 64.0);
    let range: f64 = band.iter().map(|q| q.w * (cutoffs.psi(q.x) / q.x).powi(2)).sum::<f64>() + 0.5;
    let e = -2.0 - 2.0 * p.s;
    let inner: f64 =
        band.iter().map(|q| q.w * q.x.powf(e) * cutoffs.psi(q.x)).sum::<f64>() + 2f64.powf(e + 1.0) / (1.0 + 2.0 * p.s);
    Ok(cert.c_lambda_empirical * range.sqrt() * inner.sqrt())
}

/// Samples of `K_{mμ}` on `[−2m, 2m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSamples {
    pub x: Vec<f64>,
    pub k: Vec<f64>,
    pub l1_estimate: f64,
    pub time_points: usize,
    pub converged: bool,
}

/// `K_{mμ}` with the sup taken over the points of `times`.
pub fn kernel_k_on(m: f64, mu: f64, p: &SymbolParams, cutoffs: &CutoffFamily, times: &TimeGrid) -> Result<KernelSamples> {
    p.validate()?;
    if !(m > 1.0 && mu > 1.0 && m.is_finite() && mu.is_finite()) {
        return invalid(format!("kernel needs m, μ > 1, got {m}, {mu}"));
    }
    if times.is_empty() {
        return invalid("time grid is empty");
    }
    let t_max = times.points().iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let top = 2.0 * mu;
    let step = |xi: f64| (2.0 * PI / (2.0 * m + p.a * t_max * xi.powf(p.a - 1.0) + 1.0)).min(0.25);
    let mut breaks = dyadic_breaks(0.0, top);
    breaks.push(mu);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let nodes: Vec<Node> = marching_nodes(0.0, top, &breaks, step)
        .into_iter()
        .filter(|q| cutoffs.chi_m(mu, q.x) != 0.0)
        .collect();
    let amp: Vec<f64> = nodes.iter().map(|q| 2.0 * q.w * gamma_weight(-p.s, q.x) * cutoffs.chi_m(mu, q.x).powi(2)).collect();

    let count = ((4.0 * m) / (PI / (8.0 * mu)).min(m / 64.0)).ceil() as usize;
    let count = count + count % 2;
    let h = 4.0 * m / count as f64;
    let x: Vec<f64> = (0..=count).map(|j| -2.0 * m + j as f64 * h).collect();

    let ts = times.points();
    let mut e_re = Array2::<f64>::zeros((nodes.len(), ts.len()));
    let mut e_im = Array2::<f64>::zeros((nodes.len(), ts.len()));
    for (i, (q, &a)) in nodes.iter().zip(&amp).enumerate() {
        let ua = q.x.powf(p.a);
        for (j, &t) in ts.iter().enumerate() {
            let (s, c) = (t * ua).sin_cos();
            e_re[[i, j]] = a * c;
            e_im[[i, j]] = a * s;
        }
    }
    let cos = Array2::from_shape_fn((x.len(), nodes.len()), |(i, k)| (x[i] * nodes[k].x).cos());
    let re = cos.dot(&e_re);
    let im = cos.dot(&e_im);
    let k: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let sup = (0..ts.len()).map(|j| re[[i, j]].hypot(im[[i, j]])).fold(0.0, f64::max);
            cutoffs.chi_m(m, xi) * sup
        })
        .collect();
    let l1_estimate = trapezoid_weights(&x).iter().zip(&k).map(|(w, v)| w * v).sum();
    Ok(KernelSamples { x, k, l1_estimate, time_points: ts.len(), converged: true })
}

/// `K_{mμ}` with the sup over `t ∈ 2B` refined until the `L¹` estimate is
/// stable to the policy tolerance.
pub fn kernel_k(m: f64, mu: f64, p: &SymbolParams, cutoffs: &CutoffFamily, policy: &FieldPolicy) -> Result<KernelSamples> {
    let hw = 2.0;
    let max_level = policy.max_level();
    let tau = 1.0 / ((2.0 * mu).powf(p.a) + 1.0);
    let mut level = policy.initial_level.unwrap_or_else(|| (2.0 * hw / tau).log2().ceil().clamp(2.0, 12.0) as u32).min(max_level);
    let mut current = kernel_k_on(m, mu, p, cutoffs, &TimeGrid::uniform(level, hw))?;
    while level < max_level {
        let next = kernel_k_on(m, mu, p, cutoffs, &TimeGrid::uniform(level + 1, hw))?;
        let change = (next.l1_estimate - current.l1_estimate).abs() / next.l1_estimate.abs().max(f64::MIN_POSITIVE);
        current = next;
        level += 1;
        if change < policy.tolerance {
            return Ok(current);
        }
    }
    current.converged = false;
    Ok(current)
}

/// One of the two cutoffs `χ`, `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cutoff {
    Chi,
    Psi,
}

impl Cutoff {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Cutoff::Chi => chi(x),
            Cutoff::Psi => psi(x),
        }
    }
}

/// The piece `ζ′(|x|) · S̃^a_ζ g` of the tilded operator
/// `S̃^a g = ∫ e^{i(x·ξ + t|ξ|^a)} (1+|ξ|²)^{−s/2} g dξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitOperators {
    pub frequency: Cutoff,
    pub range: Cutoff,
}

impl SplitOperators {
    pub const ALL: [SplitOperators; 4] = [
        SplitOperators { frequency: Cutoff::Chi, range: Cutoff::Chi },
        SplitOperators { frequency: Cutoff::Chi, range: Cutoff::Psi },
        SplitOperators { frequency: Cutoff::Psi, range: Cutoff::Chi },
        SplitOperators { frequency: Cutoff::Psi, range: Cutoff::Psi },
    ];

    /// The piece at radius `r` and every time in `ts`.
    pub fn apply(&self, g: &dyn Spectrum, p: &SymbolParams, r: f64, ts: &[f64]) -> Result<Vec<Complex64>> {
        let mut v = tilded(g, p, Some(self.frequency), r, ts)?;
        let c = self.range.eval(r);
        v.iter_mut().for_each(|z| *z *= c);
        Ok(v)
    }
}

/// `S̃^a_ζ g` at radius `r`, or `S̃^a g` when `zeta` is `None`.
pub fn tilded(g: &dyn Spectrum, p: &SymbolParams, zeta: Option<Cutoff>, r: f64, ts: &[f64]) -> Result<Vec<Complex64>> {
    p.validate()?;
    let order = p.order()?;
    let s = p.s;
    let h = Weighted {
        base: g,
        weight: move |rho: f64| zeta.map_or(1.0, |z| z.eval(rho)) * (1.0 + rho * rho).powf(-0.5 * s),
        extra_breaks: vec![1.0, 2.0],
        smooth: true,
    };
    Ok(propagate_many(&h, &order, p.a, p.n, r, ts))
}

/// `max |S̃^a g − Σ_{ζ,ζ′} ζ′(|x|) S̃^a_ζ g|` over the radii and times.
pub fn recompose_check(g: &dyn Spectrum, p: &SymbolParams, radii: &RadialGrid, times: &TimeGrid) -> Result<f64> {
    let ts = times.points();
    let residuals: Result<Vec<f64>> = radii
        .nodes()
        .par_iter()
        .map(|nd| {
            let full = tilded(g, p, None, nd.x, ts)?;
            let mut sum = vec![Complex64::new(0.0, 0.0); ts.len()];
            for op in SplitOperators::ALL {
                for (acc, v) in sum.iter_mut().zip(op.apply(g, p, nd.x, ts)?) {
                    *acc += v;
                }
            }
            Ok(full.iter().zip(&sum).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        })
        .collect();
    Ok(residuals?.into_iter().fold(0.0, f64::max))
}

/// `‖sup_{|t|<1} |S^a f|‖_{L²(ℝⁿ)} / ‖f‖_{L²}` for `f̂` supported in `2B`.
pub fn band_limited_ratio(g: &dyn Spectrum, p: &SymbolParams, policy: &FieldPolicy) -> Result<f64> {
    if g.support().1 > 2.0 {
        return invalid(format!("spectrum reaches {} beyond the ball of radius 2", g.support().1));
    }
    let field = converged_field(g, p, Range::Global, policy)?;
    let l2 = sobolev_norm(g, p.n, 0.0)?;
    if l2 == 0.0 {
        return invalid("zero profile");
    }
    Ok(range_norm(&field, p.n, Range::Global)? / l2)
}
