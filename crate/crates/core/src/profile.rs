//! Radial profiles, used both as spatial profiles `f₀(r)` and as frequency
//! profiles `g(ρ)` of `f̂`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoffs::{chi, DyadicBump};
use crate::error::{invalid, Result};

/// Common view of anything that can be integrated against a radial kernel.
pub trait Spectrum: Sync {
    fn value(&self, rho: f64) -> Complex64;

    /// `[lo, hi]` outside of which the profile vanishes or is negligible
    /// (below 1e-17 of its peak).
    fn support(&self) -> (f64, f64);

    /// Points where quadrature panels should be cut.
    fn breaks(&self) -> Vec<f64>;

    /// Panel length that resolves the envelope.
    fn resolution(&self) -> f64;

    /// Envelope length scale, used when sampling in `ρ^a`.
    fn smooth_scale(&self) -> f64;

    /// Extra oscillation rate carried by the profile's phase.
    fn phase_rate(&self) -> f64 {
        0.0
    }

    /// True when the profile vanishes to infinite order at both ends of its
    /// support.
    fn smooth_ends(&self) -> bool;
}

/// A named radial family or sampled data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialProfile {
    /// `e^{−r²/(2σ²)}`.
    Gaussian { sigma: f64 },
    /// `exp(1 − 1/(1 − u²))` with `u = (r − center)/width`.
    SmoothBump { center: f64, width: f64 },
    /// The dyadic bump at scale `N`, `η(r/N)`.
    Annular { scale: f64 },
    /// Gaussian wave packet `e^{−(r−c)²/(2w²)}`, cut off smoothly between
    /// `6w` and `8w` from its center.
    Packet { center: f64, width: f64 },
    /// Piecewise-linear data on a strictly increasing positive grid; zero
    /// outside the grid.
    Sampled { grid: Vec<f64>, values: Vec<f64> },
    Combination { terms: Vec<(f64, RadialProfile)> },
}

/// `f̂`'s radial profile; same representation as the spatial one.
pub type FrequencyProfile = RadialProfile;

const GAUSS_CUT: f64 = 9.0;

impl RadialProfile {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return invalid(format!("gaussian width must be positive, got {sigma}"));
        }
        Ok(Self::Gaussian { sigma })
    }

    pub fn smooth_bump(center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0 && center.is_finite() && center >= width) {
            return invalid(format!("bump needs 0 < width <= center, got center {center}, width {width}"));
        }
        Ok(Self::SmoothBump { center, width })
    }

    pub fn annular(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return invalid(format!("annular scale must be positive, got {scale}"));
        }
        Ok(Self::Annular { scale })
    }

    pub fn packet(center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0 && center.is_finite() && center > 0.0) {
            return invalid(format!("packet needs positive center and width, got {center}, {width}"));
        }
        Ok(Self::Packet { center, width })
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return invalid("sampled profile needs at least two points and matching lengths");
        }
        if grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("sampled grid must be positive and strictly increasing");
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return invalid("sampled profile contains non-finite entries");
        }
        Ok(Self::Sampled { grid, values })
    }

    pub fn combination(terms: Vec<(f64, RadialProfile)>) -> Result<Self> {
        if terms.is_empty() {
            return invalid("empty combination");
        }
        Ok(Self::Combination { terms })
    }

    /// Real value at `r ≥ 0`.
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Self::Gaussian { sigma } => {
                let z = r / sigma;
                if z > GAUSS_CUT {
                    0.0
                } else {
                    (-0.5 * z * z).exp()
                }
            }
            Self::SmoothBump { center, width } => {
                let u = (r - center) / width;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                }
            }
            Self::Annular { scale } => DyadicBump.eta(r / scale),
            Self::Packet { center, width } => {
                let z = (r - center).abs() / width;
                if z >= 8.0 {
                    0.0
                } else {
                    let window = if z <= 6.0 { 1.0 } else { chi(1.0 + (z - 6.0) / 2.0) };
                    (-0.5 * z * z).exp() * window
                }
            }
            Self::Sampled { grid, values } => {
                if r < grid[0] || r > grid[grid.len() - 1] {
                    return 0.0;
                }
                let i = grid.partition_point(|&g| g <= r).clamp(1, grid.len() - 1);
                let (x0, x1) = (grid[i - 1], grid[i]);
                let th = (r - x0) / (x1 - x0);
                values[i - 1] * (1.0 - th) + values[i] * th
            }
            Self::Combination { terms } => terms.iter().map(|(c, p)| c * p.eval(r)).sum(),
        }
    }

    fn support_bounds(&self) -> (f64, f64) {
        match self {
            Self::Gaussian { sigma } => (0.0, GAUSS_CUT * sigma),
            Self::SmoothBump { center, width } => (center - width, center + width),
            Self::Annular { scale } => (0.5 * scale, 2.0 * scale),
            Self::Packet { center, width } => ((center - 8.0 * width).max(0.0), center + 8.0 * width),
            Self::Sampled { grid, .. } => (grid[0], grid[grid.len() - 1]),
            Self::Combination { terms } => terms.iter().fold((f64::INFINITY, 0.0), |(lo, hi), (_, p)| {
                let (a, b) = p.support_bounds();
                (lo.min(a), hi.max(b))
            }),
        }
    }

    fn break_points(&self, out: &mut Vec<f64>) {
        match self {
            Self::Gaussian { .. } => {}
            Self::SmoothBump { center, width } => out.extend([center - width, *center, center + width]),
            Self::Annular { scale } => out.extend([0.5 * scale, *scale, 2.0 * scale]),
            Self::Packet { center, width } => {
                for k in [-8.0, -6.0, 0.0, 6.0, 8.0] {
                    let x = center + k * width;
                    if x > 0.0 {
                        out.push(x);
                    }
                }
            }
            Self::Sampled { grid, .. } => out.extend(grid.iter().copied()),
            Self::Combination { terms } => terms.iter().for_each(|(_, p)| p.break_points(out)),
        }
    }

    fn envelope_scale(&self) -> f64 {
        match self {
            Self::Gaussian { sigma } => *sigma,
            Self::SmoothBump { width, .. } => 0.25 * width,
            Self::Annular { scale } => 0.125 * scale,
            Self::Packet { width, .. } => *width,
            Self::Sampled { grid, .. } => {
                grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
            }
            Self::Combination { terms } => {
                terms.iter().map(|(_, p)| p.envelope_scale()).fold(f64::INFINITY, f64::min)
            }
        }
    }

    fn ends_flat(&self) -> bool {
        match self {
            Self::Gaussian { .. } | Self::Sampled { .. } => false,
            Self::SmoothBump { .. } | Self::Annular { .. } => true,
            Self::Packet { center, width } => center - 8.0 * width > 0.0,
            Self::Combination { terms } => terms.iter().all(|(_, p)| p.ends_flat()),
        }
    }
}

impl Spectrum for RadialProfile {
    fn value(&self, rho: f64) -> Complex64 {
        Complex64::new(self.eval(rho), 0.0)
    }

    fn support(&self) -> (f64, f64) {
        self.support_bounds()
    }

    fn breaks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.break_points(&mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn resolution(&self) -> f64 {
        match self {
            Self::Gaussian { sigma } => 0.5 * sigma,
            Self::SmoothBump { width, .. } => 0.125 * width,
            Self::Annular { scale } => scale / 16.0,
            Self::Packet { width, .. } => 0.5 * width,
            Self::Sampled { .. } => f64::INFINITY,
            Self::Combination { terms } => terms.iter().map(|(_, p)| p.resolution()).fold(f64::INFINITY, f64::min),
        }
    }

    fn smooth_scale(&self) -> f64 {
        self.envelope_scale()
    }

    fn smooth_ends(&self) -> bool {
        self.ends_flat()
    }
}

/// `g_y(ρ) = e^{iyρ} g(ρ)`.
#[derive(Debug, Clone, Copy)]
pub struct Modulated<'a, S: ?Sized> {
    pub base: &'a S,
    pub y: f64,
}

impl<'a, S: Spectrum + ?Sized> Modulated<'a, S> {
    pub fn new(base: &'a S, y: f64) -> Self {
        Self { base, y }
    }
}

impl<S: Spectrum + ?Sized> Spectrum for Modulated<'_, S> {
    fn value(&self, rho: f64) -> Complex64 {
        self.base.value(rho) * Complex64::from_polar(1.0, self.y * rho)
    }
    fn support(&self) -> (f64, f64) {
        self.base.support()
    }
    fn breaks(&self) -> Vec<f64> {
        self.base.breaks()
    }
    fn resolution(&self) -> f64 {
        self.base.resolution()
    }
    fn smooth_scale(&self) -> f64 {
        self.base.smooth_scale()
    }
    fn phase_rate(&self) -> f64 {
        self.base.phase_rate() + self.y.abs()
    }
    fn smooth_ends(&self) -> bool {
        self.base.smooth_ends()
    }
}

/// Complex conjugate of a profile.
#[derive(Debug, Clone, Copy)]
pub struct Conjugated<'a, S: ?Sized>(pub &'a S);

impl<S: Spectrum + ?Sized> Spectrum for Conjugated<'_, S> {
    fn value(&self, rho: f64) -> Complex64 {
        self.0.value(rho).conj()
    }
    fn support(&self) -> (f64, f64) {
        self.0.support()
    }
    fn breaks(&self) -> Vec<f64> {
        self.0.breaks()
    }
    fn resolution(&self) -> f64 {
        self.0.resolution()
    }
    fn smooth_scale(&self) -> f64 {
        self.0.smooth_scale()
    }
    fn phase_rate(&self) -> f64 {
        self.0.phase_rate()
    }
    fn smooth_ends(&self) -> bool {
        self.0.smooth_ends()
    }
}

/// Profile multiplied pointwise by a real weight, e.g. a cutoff.
pub struct Weighted<'a, S: ?Sized, W> {
    pub base: &'a S,
    pub weight: W,
    pub extra_breaks: Vec<f64>,
    /// The weight is smooth on the support, so flat ends survive.
    pub smooth: bool,
}

impl<S: Spectrum + ?Sized, W: Fn(f64) -> f64 + Sync> Spectrum for Weighted<'_, S, W> {
    fn value(&self, rho: f64) -> Complex64 {
        let w = (self.weight)(rho);
        if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.base.value(rho) * w
        }
    }
    fn support(&self) -> (f64, f64) {
        self.base.support()
    }
    fn breaks(&self) -> Vec<f64> {
        let mut b = self.base.breaks();
        b.extend(self.extra_breaks.iter().copied());
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
    fn resolution(&self) -> f64 {
        self.base.resolution().min(0.25)
    }
    fn smooth_scale(&self) -> f64 {
        self.base.smooth_scale().min(0.25)
    }
    fn phase_rate(&self) -> f64 {
        self.base.phase_rate()
    }
    fn smooth_ends(&self) -> bool {
        self.smooth && self.base.smooth_ends()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_validate() {
        assert!(RadialProfile::gaussian(0.0).is_err());
        assert!(RadialProfile::smooth_bump(0.1, 0.2).is_err());
        assert!(RadialProfile::sampled(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(RadialProfile::sampled(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(RadialProfile::combination(vec![]).is_err());
    }

    #[test]
    fn family_values() {
        let g = RadialProfile::gaussian(1.0).unwrap();
        assert_eq!(g.eval(0.0), 1.0);
        assert!((g.eval(1.0) - (-0.5f64).exp()).abs() < 1e-16);
        let b = RadialProfile::smooth_bump(0.3, 0.2).unwrap();
        assert_eq!(b.eval(0.3), 1.0);
        assert_eq!(b.eval(0.1), 0.0);
        let a = RadialProfile::annular(8.0).unwrap();
        assert_eq!(a.support(), (4.0, 16.0));
        assert_eq!(a.eval(8.0), 1.0);
        let p = RadialProfile::packet(10.0, 0.5).unwrap();
        assert_eq!(p.eval(10.0), 1.0);
        assert_eq!(p.eval(14.0), 0.0);
        assert!(p.smooth_ends());
        let s = RadialProfile::sampled(vec![1.0, 2.0, 4.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(s.eval(1.5), 1.0);
        assert_eq!(s.eval(3.0), 1.0);
        assert_eq!(s.eval(5.0), 0.0);
    }

    #[test]
    fn modulation_preserves_modulus() {
        let p = RadialProfile::packet(5.0, 0.4).unwrap();
        let m = Modulated::new(&p, 0.7);
        for rho in [3.0, 4.5, 5.2, 6.9] {
            assert!((m.value(rho).norm() - p.eval(rho).abs()).abs() < 1e-15);
        }
        let c = Conjugated(&m);
        assert_eq!(c.value(4.5), m.value(4.5).conj());
    }

    #[test]
    fn serde_round_trip() {
        let p = RadialProfile::combination(vec![
            (0.5, RadialProfile::annular(4.0).unwrap()),
            (-1.0, RadialProfile::smooth_bump(1.0, 0.5).unwrap()),
        ])
        .unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: RadialProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
    }
}
