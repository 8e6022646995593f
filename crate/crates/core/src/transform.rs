//! Fourier transforms of radial functions through the Bessel kernel, and a
//! Cartesian quadrature oracle that never touches Bessel functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::profile::{RadialProfile, Spectrum};
use crate::quadrature::{marching_nodes, Node};
use crate::special::{gamma, BesselOrder};

/// Surface measure of the unit sphere in `ℝⁿ`.
pub fn sphere_factor(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// `f̂(ρ) = (2π)^{n/2} ρ^{1−n/2} ∫₀^∞ f₀(r) J_{n/2−1}(rρ) r^{n/2} dr`.
///
/// Written with the scaled kernel `(rρ)^{−ν} J_ν(rρ)` so that `ρ = 0` gives
/// `|S^{n−1}| ∫ f₀ r^{n−1} dr` without a separate branch.
pub fn hankel_fourier(f0: &RadialProfile, n: usize, rho: f64) -> Result<f64> {
    if n < 1 {
        return invalid("dimension must be at least 1");
    }
    if !(rho.is_finite() && rho >= 0.0) {
        return invalid(format!("frequency must be finite and non-negative, got {rho}"));
    }
    let order = BesselOrder::for_dimension(n)?;
    let (lo, hi) = f0.support();
    let res = f0.resolution().min((hi - lo) / 4.0);
    let lambda = PI / (4.0 * rho.max(1e-300));
    let step = res.min(lambda);
    let nodes = marching_nodes(lo, hi, &f0.breaks(), |_| step);
    let pow = (n - 1) as i32;
    let sum: f64 = nodes
        .iter()
        .map(|nd| nd.w * f0.eval(nd.x) * order.j_scaled(nd.x * rho) * nd.x.powi(pow))
        .sum();
    let value = (2.0 * PI).powf(n as f64 / 2.0) * sum;
    if !value.is_finite() {
        return Err(Error::Divergent(format!("transform at ρ = {rho} is not finite")));
    }
    Ok(value)
}

/// `(|S^{n−1}| ∫ |g|² ρ^{n−1} dρ)^{1/2}` for any radial profile.
pub fn radial_l2_norm(g: &dyn Spectrum, n: usize) -> f64 {
    let (lo, hi) = g.support();
    let step = g.resolution().min((hi - lo) / 4.0);
    let nodes = marching_nodes(lo, hi, &g.breaks(), |_| step);
    let pow = (n - 1) as i32;
    let s: f64 = nodes.iter().map(|nd| nd.w * g.value(nd.x).norm_sqr() * nd.x.powi(pow)).sum();
    (sphere_factor(n) * s).sqrt()
}

fn axis_step(res: f64, freq: f64) -> f64 {
    res.min(PI / (4.0 * (freq.abs() + 1.0)))
}

/// Nodes on the part of a coordinate line, at transverse offset `c`, that
/// meets the radial support `[lo, hi]` and its break circles.
pub(crate) fn line_nodes(c: f64, lo: f64, hi: f64, breaks: &[f64], step: f64, symmetric: bool) -> Vec<Node> {
    let c2 = c * c;
    if c2 >= hi * hi {
        return Vec::new();
    }
    let top = (hi * hi - c2).sqrt();
    let bottom = if c2 < lo * lo { (lo * lo - c2).sqrt() } else { 0.0 };
    let mut cuts: Vec<f64> =
        breaks.iter().filter(|&&b| b * b > c2).map(|&b| (b * b - c2).sqrt()).filter(|&x| x > bottom && x < top).collect();
    cuts.sort_by(f64::total_cmp);
    let half = marching_nodes(bottom, top, &cuts, |_| step);
    if !symmetric {
        return half;
    }
    let mut out: Vec<Node> = half.iter().rev().map(|nd| Node { x: -nd.x, w: nd.w }).collect();
    out.extend(half);
    out
}

/// `∫_{ℝⁿ} e^{−i x·ξ} f(|x|) dx` with `ξ = (ρ, 0, …)`, by iterated
/// Gauss–Legendre quadrature on Cartesian lines clipped to the support.
///
/// In three dimensions the transverse plane `(x₂, x₃)` is integrated in polar
/// coordinates, which needs no special functions since the phase only
/// depends on `x₁`.
pub fn nd_oracle(f: &RadialProfile, n: usize, xi: f64) -> Result<f64> {
    match n {
        2 => Ok(nd_oracle_planar(f, [xi, 0.0])?.re),
        3 => Ok(oracle_slab(f, xi)),
        _ => Err(Error::Unsupported(format!("nd_oracle supports n = 2 or 3, got {n}"))),
    }
}

/// Two-dimensional oracle for an arbitrary frequency vector.
pub fn nd_oracle_planar(f: &RadialProfile, xi: [f64; 2]) -> Result<Complex64> {
    let (lo, hi) = f.support();
    let breaks = f.breaks();
    let res = f.resolution().min((hi - lo) / 4.0);
    let outer = line_nodes(0.0, 0.0, hi, &outer_breaks(&breaks, lo), axis_step(res, xi[0]), true);
    let inner_step = axis_step(res, xi[1]);
    let mut total = Complex64::new(0.0, 0.0);
    for o in &outer {
        let line = line_nodes(o.x, lo, hi, &breaks, inner_step, true);
        let mut acc = Complex64::new(0.0, 0.0);
        for nd in &line {
            let r = (o.x * o.x + nd.x * nd.x).sqrt();
            let v = f.eval(r);
            if v != 0.0 {
                acc += Complex64::from_polar(nd.w * v, -(o.x * xi[0] + nd.x * xi[1]));
            }
        }
        total += acc * o.w;
    }
    Ok(total)
}

fn outer_breaks(breaks: &[f64], lo: f64) -> Vec<f64> {
    let mut b: Vec<f64> = breaks.to_vec();
    if lo > 0.0 {
        b.push(lo);
    }
    b
}

fn oracle_slab(f: &RadialProfile, xi: f64) -> f64 {
    let (lo, hi) = f.support();
    let breaks = f.breaks();
    let res = f.resolution().min((hi - lo) / 4.0);
    let outer = line_nodes(0.0, 0.0, hi, &outer_breaks(&breaks, lo), axis_step(res, xi), true);
    let mut total = 0.0;
    for o in &outer {
        let q_nodes = line_nodes(o.x, lo, hi, &breaks, res, false);
        let plane: f64 = q_nodes
            .iter()
            .map(|nd| nd.w * nd.x * f.eval((o.x * o.x + nd.x * nd.x).sqrt()))
            .sum();
        total += o.w * (o.x * xi).cos() * 2.0 * PI * plane;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_factors() {
        assert!((sphere_factor(1) - 2.0).abs() < 1e-15);
        assert!((sphere_factor(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_factor(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_factor(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn gaussian_transform_closed_form() {
        let g = RadialProfile::gaussian(1.0).unwrap();
        for n in [2usize, 3] {
            for rho in [0.0, 0.3, 1.0, 2.5, 5.0] {
                let v = hankel_fourier(&g, n, rho).unwrap();
                let exact = (2.0 * PI).powf(n as f64 / 2.0) * (-0.5 * rho * rho).exp();
                assert!((v - exact).abs() < 1e-8 * exact, "n={n} rho={rho} {v} {exact}");
            }
        }
    }

    #[test]
    fn oracle_gaussian_and_zero() {
        let g = RadialProfile::gaussian(1.0).unwrap();
        let v = nd_oracle(&g, 2, 1.0).unwrap();
        let exact = 2.0 * PI * (-0.5f64).exp();
        assert!((v - exact).abs() < 1e-10 * exact, "{v}");
        let zero = RadialProfile::sampled(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(nd_oracle(&zero, 2, 1.0).unwrap(), 0.0);
        assert!(nd_oracle(&g, 4, 1.0).is_err());
    }

    #[test]
    fn oracle_rotational_invariance() {
        let b = RadialProfile::smooth_bump(0.3, 0.2).unwrap();
        let a = nd_oracle_planar(&b, [7.0, 0.0]).unwrap();
        let c = nd_oracle_planar(&b, [0.0, 7.0]).unwrap();
        assert!((a - c).norm() < 1e-10 * a.norm(), "{a} {c}");
    }

    #[test]
    fn bump_matches_oracle() {
        let b = RadialProfile::smooth_bump(0.3, 0.2).unwrap();
        let v = hankel_fourier(&b, 2, 0.7).unwrap();
        let o = nd_oracle(&b, 2, 0.7).unwrap();
        assert!((v - o).abs() < 1e-6 * o.abs(), "{v} {o}");
    }

    #[test]
    fn origin_uses_mass() {
        let b = RadialProfile::smooth_bump(1.0, 0.5).unwrap();
        let v = hankel_fourier(&b, 3, 0.0).unwrap();
        let nodes = marching_nodes(0.5, 1.5, &[1.0], |_| 0.05);
        let mass: f64 = nodes.iter().map(|nd| nd.w * b.eval(nd.x) * nd.x * nd.x).sum();
        assert!((v - 4.0 * PI * mass).abs() < 1e-12 * v);
    }
}
