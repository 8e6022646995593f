//! Smooth cutoffs: the plateau `χ`, its complement `ψ`, the dyadic bump
//! `η(ξ) = χ(ξ) − χ(2ξ)` and the Littlewood–Paley weight `γ_{2s}`.

use serde::{Deserialize, Serialize};

/// The plateau cutoff: 1 on `|x| ≤ 1`, 0 on `|x| ≥ 2`, smooth and even.
#[inline]
pub fn chi(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 1.0 {
        1.0
    } else if ax >= 2.0 {
        0.0
    } else {
        let u = 2.0 - ax;
        let v = ax - 1.0;
        // Ratio of the two kernels written so neither exponential overflows.
        1.0 / (1.0 + (1.0 / u - 1.0 / v).exp())
    }
}

/// `1 − χ(x)`, computed without cancellation in the transition band.
#[inline]
pub fn psi(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 1.0 {
        0.0
    } else if ax >= 2.0 {
        1.0
    } else {
        let u = 2.0 - ax;
        let v = ax - 1.0;
        1.0 / (1.0 + (1.0 / v - 1.0 / u).exp())
    }
}

/// `(χ, ψ, χ_m)` as a value; all members are pure functions of `x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily;

impl CutoffFamily {
    pub fn chi(&self, x: f64) -> f64 {
        chi(x)
    }

    pub fn psi(&self, x: f64) -> f64 {
        psi(x)
    }

    /// The dilate `χ(x/m)`.
    pub fn chi_m(&self, m: f64, x: f64) -> f64 {
        chi(x / m)
    }

    /// Derivative of χ, used when a smooth profile must be checked for flat
    /// ends.
    pub fn chi_prime(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax <= 1.0 || ax >= 2.0 {
            return 0.0;
        }
        let u = 2.0 - ax;
        let v = ax - 1.0;
        let c = chi(ax);
        // d/dx of 1/(1+e^{φ}) with φ = 1/u − 1/v.
        let dphi = 1.0 / (u * u) + 1.0 / (v * v);
        let d = -c * (1.0 - c) * dphi;
        if x < 0.0 {
            -d
        } else {
            d
        }
    }
}

pub fn make_cutoff() -> CutoffFamily {
    CutoffFamily
}

/// The dyadic bump `η(ξ) = χ(ξ) − χ(2ξ)`, supported in `1/2 ≤ |ξ| ≤ 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DyadicBump;

impl DyadicBump {
    #[inline]
    pub fn eta(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a <= 0.5 || a >= 2.0 {
            return 0.0;
        }
        if a <= 1.0 {
            psi(2.0 * a)
        } else {
            chi(a)
        }
    }

    /// Exponents `k ≥ 0` with `η(ξ/2^k)` possibly nonzero.
    #[allow(clippy::reversed_empty_ranges)]
    pub fn active_scales(&self, xi: f64) -> std::ops::RangeInclusive<i32> {
        let a = xi.abs();
        if a <= 0.5 {
            return 1..=0;
        }
        let lo = ((a / 2.0).log2().floor() as i32).max(0);
        let hi = ((2.0 * a).log2().ceil() as i32).max(0);
        lo..=hi
    }

    /// `Σ_{N>1} η(Nξ) + Σ_{N≥1} η(ξ/N)` over dyadic `N`.
    pub fn partition_sum(&self, xi: f64) -> f64 {
        let a = xi.abs();
        if a == 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        let mut j = a.log2().floor() as i32 - 2;
        let last = a.log2().ceil() as i32 + 2;
        while j <= last {
            sum += self.eta(a * 2f64.powi(-j));
            j += 1;
        }
        sum
    }
}

pub fn make_dyadic_bump() -> DyadicBump {
    DyadicBump
}

/// `γ_{2s}(ξ) = χ(ξ) + Σ_{N ≥ 1} N^{2s} η(ξ/N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpWeight {
    pub s: f64,
}

impl LpWeight {
    pub fn new(s: f64) -> Self {
        Self { s }
    }

    pub fn gamma(&self, xi: f64) -> f64 {
        gamma_weight(self.s, xi)
    }
}

/// Littlewood–Paley weight. The exponent passed is `s`; the weight carries
/// `N^{2s}` on the annulus `|ξ| ≈ N`.
pub fn gamma_weight(s: f64, xi: f64) -> f64 {
    let bump = DyadicBump;
    let mut total = chi(xi);
    for k in bump.active_scales(xi) {
        let n = 2f64.powi(k);
        let e = bump.eta(xi / n);
        if e != 0.0 {
            total += n.powf(2.0 * s) * e;
        }
    }
    total
}

/// Empirical band `[min, max]` of `γ_{2s}(ξ)/(1+ξ²)^s` on a log-spaced sample
/// of `[0, xi_max]` with `per_octave` points per dyadic octave.
pub fn comparability_band(s: f64, xi_max: f64, per_octave: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut visit = |xi: f64| {
        let r = gamma_weight(s, xi) / (1.0 + xi * xi).powf(s);
        lo = lo.min(r);
        hi = hi.max(r);
    };
    visit(0.0);
    let octaves = xi_max.log2().ceil().max(1.0) as i32 + 4;
    let start = xi_max * 2f64.powi(-octaves);
    let total = octaves as usize * per_octave;
    for i in 0..=total {
        let xi = start * 2f64.powf(i as f64 / per_octave as f64);
        if xi <= xi_max {
            visit(xi);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plateau_values() {
        let c = make_cutoff();
        assert_eq!(c.chi(0.5), 1.0);
        assert_eq!(c.chi(3.0), 0.0);
        let v = c.chi(1.5);
        assert!(v > 0.0 && v < 1.0);
        assert!((v + c.psi(1.5) - 1.0).abs() < 1e-16);
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(c.chi(-1.2), c.chi(1.2));
    }

    #[test]
    fn complement_and_dilates_at_random_points() {
        let c = make_cutoff();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-250.0..250.0);
            assert!((c.chi(x) + c.psi(x) - 1.0).abs() < 1e-15);
            let v = c.chi(x);
            assert!((0.0..=1.0).contains(&v));
            for m in [2.0, 10.0, 100.0] {
                assert_eq!(c.chi_m(m, x), chi(x / m));
            }
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let c = make_cutoff();
        for x in [1.1, 1.37, 1.5, 1.8, -1.6] {
            let h = 1e-6;
            let fd = (c.chi(x + h) - c.chi(x - h)) / (2.0 * h);
            assert!((fd - c.chi_prime(x)).abs() < 1e-7, "{x}");
        }
    }

    #[test]
    fn bump_support_and_partition() {
        let b = make_dyadic_bump();
        assert_eq!(b.eta(3.0), 0.0);
        assert_eq!(b.eta(0.4), 0.0);
        assert!((b.partition_sum(0.37) - 1.0).abs() < 1e-12);
        assert!((b.partition_sum(1024.5) - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let xi = 2f64.powf(rng.gen_range(-20.0..20.0)) * if rng.gen() { 1.0 } else { -1.0 };
            assert!((b.partition_sum(xi) - 1.0).abs() < 1e-12, "{xi}");
            let e = b.eta(xi);
            assert!((0.0..=1.0).contains(&e));
        }
    }

    #[test]
    fn bump_matches_its_construction() {
        let b = make_dyadic_bump();
        for xi in [0.6, 0.75, 0.99, 1.0, 1.3, 1.9] {
            assert!((b.eta(xi) - (chi(xi) - chi(2.0 * xi))).abs() < 1e-15);
        }
    }

    #[test]
    fn weight_inside_the_unit_ball() {
        assert_eq!(gamma_weight(0.7, 0.4), 1.0);
        assert_eq!(gamma_weight(-0.3, 0.0), 1.0);
    }

    #[test]
    fn order_zero_weight_is_at_least_one_outside_the_ball() {
        for i in 0..2000 {
            let xi = 1.0 + i as f64 * 0.37;
            let g = gamma_weight(0.0, xi);
            assert!((1.0 - 1e-15..=2.0 + 1e-15).contains(&g), "{xi} {g}");
        }
    }

    #[test]
    fn comparability_on_dyadic_points() {
        let s = 0.3;
        let ratios: Vec<f64> = (0..=12)
            .map(|k| {
                let xi = 2f64.powi(k);
                gamma_weight(s, xi) / (1.0 + xi * xi).powf(s)
            })
            .collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        assert!(lo > 0.5 && hi < 2.0, "{lo} {hi}");
    }

    #[test]
    fn comparability_band_does_not_widen() {
        for s in [-1.0, -0.5, 0.0, 0.25, 0.5, 1.0] {
            let (a, b) = comparability_band(s, 2f64.powi(13), 64);
            let (c, d) = comparability_band(s, 2f64.powi(14), 64);
            assert!(a > 0.0 && b.is_finite());
            assert!((a - c).abs() <= 0.01 * a && (b - d).abs() <= 0.01 * b, "{s}");
        }
    }
}
