//! Bessel functions of the first kind and their large-argument main term.
//!
//! `J_λ(ρ)` is evaluated by its power series below a crossover argument and by
//! the Hankel asymptotic expansion above it. The series is summed in
//! double-double arithmetic: its terms grow like `e^ρ` before they decay, so
//! plain `f64` summation would lose most of its digits on the overlap band
//! where the two regimes are compared.
//!
//! The main term `√(2/(πρ)) cos(ρ − λπ/2 − π/4)` is evaluated with the phase
//! offset split off exactly when `2λ` is an integer, which makes the
//! remainder of `J_{1/2}` vanish identically rather than up to rounding.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use twofloat::TwoFloat;

use crate::error::{domain, invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum ClosedForm {
    MinusHalf,
    Half,
    ThreeHalves,
}

/// The order `λ` of a Bessel function, with the constants needed to evaluate
/// it cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder {
    lambda: f64,
    closed: Option<ClosedForm>,
    inv_gamma: f64,
    phase: (f64, f64),
    crossover: f64,
}

impl BesselOrder {
    /// Orders below `−1/2` are rejected.
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return invalid(format!("Bessel order must be finite, got {lambda}"));
        }
        if lambda < -0.5 {
            return invalid(format!("Bessel order {lambda} is below -1/2"));
        }
        let closed = if lambda == -0.5 {
            Some(ClosedForm::MinusHalf)
        } else if lambda == 0.5 {
            Some(ClosedForm::Half)
        } else if lambda == 1.5 {
            Some(ClosedForm::ThreeHalves)
        } else {
            None
        };
        Ok(Self {
            lambda,
            closed,
            inv_gamma: 1.0 / gamma(lambda + 1.0),
            phase: main_phase(lambda),
            crossover: (2.0 * lambda * lambda).max(12.0),
        })
    }

    /// The order `n/2 − 1` of the radial Fourier kernel in dimension `n`.
    pub fn for_dimension(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("dimension must be at least 1");
        }
        Self::new(n as f64 / 2.0 - 1.0)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Argument at which evaluation switches from the series to the
    /// asymptotic expansion.
    pub fn crossover(&self) -> f64 {
        self.crossover
    }

    /// `J_λ(ρ)` for finite `ρ ≥ 0`, without argument checks.
    #[inline]
    pub fn j(&self, rho: f64) -> f64 {
        match self.closed {
            Some(ClosedForm::Half) if rho > 0.0 => return self.main_term(rho),
            Some(ClosedForm::MinusHalf) => return envelope(rho) * rho.cos(),
            Some(ClosedForm::ThreeHalves) if rho >= 1.0 => {
                return envelope(rho) * (rho.sin() / rho - rho.cos())
            }
            _ => {}
        }
        if rho < self.crossover {
            self.series(rho)
        } else {
            self.asymptotic(rho)
        }
    }

    /// `ρ^{−λ} J_λ(ρ)`, finite at the origin for every admissible order.
    #[inline]
    pub fn j_scaled(&self, rho: f64) -> f64 {
        if self.closed == Some(ClosedForm::MinusHalf) {
            (2.0 / PI).sqrt() * rho.cos()
        } else if rho < 1e-3 {
            // Three series terms leave a tail below 1e-19 relative.
            let x2 = 0.25 * rho * rho;
            let l = self.lambda;
            let poly = 1.0 - x2 / (l + 1.0) * (1.0 - x2 / (2.0 * (l + 2.0)));
            self.inv_gamma * 2f64.powf(-l) * poly
        } else if self.lambda == 0.0 {
            self.j(rho)
        } else {
            self.j(rho) * rho.powf(-self.lambda)
        }
    }

    /// The asymptotic main term `√(2/(πρ)) cos(ρ − λπ/2 − π/4)`, `ρ > 0`.
    #[inline]
    pub fn main_term(&self, rho: f64) -> f64 {
        envelope(rho) * self.cos_phase(rho)
    }

    #[inline]
    fn cos_phase(&self, rho: f64) -> f64 {
        let (c, s) = self.phase;
        let (sr, cr) = (rho.sin(), rho.cos());
        cr * c + sr * s
    }

    #[inline]
    fn sin_phase(&self, rho: f64) -> f64 {
        let (c, s) = self.phase;
        let (sr, cr) = (rho.sin(), rho.cos());
        sr * c - cr * s
    }

    /// Power series evaluated in double-double arithmetic.
    pub fn series(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            return if self.lambda == 0.0 { 1.0 } else { 0.0 };
        }
        let x = 0.5 * rho;
        let x2 = TwoFloat::new_mul(x, x);
        let mut term = TwoFloat::from(1.0);
        let mut sum = term;
        let mut k = 0.0f64;
        loop {
            k += 1.0;
            let denom = TwoFloat::new_add(self.lambda, k) * k;
            term = -dd_div(term * x2, denom);
            sum += term;
            let small = term.hi().abs() < 1e-16 * sum.hi().abs();
            if (small && k >= self.lambda + rho) || k > 500.0 {
                break;
            }
        }
        let prefactor = if self.lambda == 0.0 { 1.0 } else { x.powf(self.lambda) };
        prefactor * self.inv_gamma * sum.hi()
    }

    /// Hankel's asymptotic expansion, truncated at its smallest term.
    pub fn asymptotic(&self, rho: f64) -> f64 {
        let (pm, q) = self.hankel_pq(rho);
        envelope(rho) * ((1.0 + pm) * self.cos_phase(rho) - q * self.sin_phase(rho))
    }

    /// `J_λ(ρ) − main term`, `ρ > 0`, formed without cancelling the main term
    /// on the asymptotic side.
    pub fn remainder(&self, rho: f64) -> f64 {
        match self.closed {
            Some(ClosedForm::Half) | Some(ClosedForm::MinusHalf) => 0.0,
            Some(ClosedForm::ThreeHalves) if rho >= 1.0 => envelope(rho) * rho.sin() / rho,
            _ if rho >= self.crossover => {
                let (pm, q) = self.hankel_pq(rho);
                envelope(rho) * (pm * self.cos_phase(rho) - q * self.sin_phase(rho))
            }
            _ => self.j(rho) - self.main_term(rho),
        }
    }

    /// `(P − 1, Q)` of the Hankel expansion.
    fn hankel_pq(&self, rho: f64) -> (f64, f64) {
        let mu = 4.0 * self.lambda * self.lambda;
        let settle = self.lambda.ceil() + 1.0;
        let mut pm = 0.0;
        let mut q = 0.0;
        let mut term = 1.0f64;
        let mut k = 0.0f64;
        loop {
            k += 1.0;
            let odd = 2.0 * k - 1.0;
            let next = term * (mu - odd * odd) / (k * 8.0 * rho);
            if next == 0.0 {
                break;
            }
            if k > settle && next.abs() >= term.abs() {
                break;
            }
            term = next;
            let ki = k as u64;
            let sign = if ((ki - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if ki % 2 == 1 {
                q += sign * term;
            } else {
                // k = 2j carries (−1)^j
                let sign_even = if (ki / 2) % 2 == 0 { 1.0 } else { -1.0 };
                pm += sign_even * term;
            }
            if term.abs() < 1e-17 || k > 200.0 {
                break;
            }
        }
        (pm, q)
    }
}

// Double-double quotient by long division; the division operator of the
// twofloat crate only keeps a double-precision quotient.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

#[inline]
fn envelope(rho: f64) -> f64 {
    (2.0 / (PI * rho)).sqrt()
}

/// `(cos φ, sin φ)` for `φ = (2λ + 1)π/4`, exact when `2λ` is an integer.
fn main_phase(lambda: f64) -> (f64, f64) {
    let k = 2.0 * lambda + 1.0;
    if k.fract() == 0.0 && k.abs() < 1e6 {
        let s = FRAC_1_SQRT_2;
        match (k as i64).rem_euclid(8) {
            0 => (1.0, 0.0),
            1 => (s, s),
            2 => (0.0, 1.0),
            3 => (-s, s),
            4 => (-1.0, 0.0),
            5 => (-s, -s),
            6 => (0.0, -1.0),
            _ => (s, -s),
        }
    } else {
        let phi = k * PI / 4.0;
        (phi.cos(), phi.sin())
    }
}

/// Γ(x) for x > 0, exact recurrences for integers and half-integers.
pub(crate) fn gamma(x: f64) -> f64 {
    if x > 0.0 && (2.0 * x).fract() == 0.0 && x < 100.0 {
        let (mut acc, mut y) = if x.fract() == 0.0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
        while y < x {
            acc *= y;
            y += 1.0;
        }
        acc
    } else {
        libm::tgamma(x)
    }
}

/// `J_λ(ρ)`.
pub fn bessel_j(order: BesselOrder, rho: f64) -> Result<f64> {
    if !rho.is_finite() {
        return domain(format!("Bessel argument must be finite, got {rho}"));
    }
    if rho < 0.0 {
        return domain(format!("Bessel argument must be non-negative, got {rho}"));
    }
    if rho == 0.0 && order.lambda < 0.0 {
        return domain("J_{-1/2} is singular at the origin");
    }
    Ok(order.j(rho))
}

/// The large-argument main term `(2/π)^{1/2} ρ^{−1/2} cos(ρ − λπ/2 − π/4)`.
pub fn bessel_main_term(order: BesselOrder, rho: f64) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return domain(format!("main term needs a finite argument > 0, got {rho}"));
    }
    Ok(order.main_term(rho))
}

/// Sampling plan for an asymptotic certificate: arguments in
/// `[rho_min, rho_max]`, grouped by octave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicRange {
    pub rho_min: f64,
    pub rho_max: f64,
    /// Largest spacing between samples.
    pub max_spacing: f64,
}

impl DyadicRange {
    pub fn new(rho_min: f64, rho_max: f64) -> Result<Self> {
        if !(rho_min > 1.0) || !rho_min.is_finite() {
            return domain(format!("certificate range must lie above 1, got lower end {rho_min}"));
        }
        if !(rho_max.is_finite() && (rho_max / rho_min).log2() >= 8.0 - 1e-12) {
            return invalid(format!(
                "certificate range [{rho_min}, {rho_max}] spans fewer than 8 octaves"
            ));
        }
        Ok(Self { rho_min, rho_max, max_spacing: 1.0 / 16.0 })
    }

    /// Octave boundaries `rho_min · 2^k`, the last one clipped to `rho_max`.
    pub fn octaves(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut lo = self.rho_min;
        while lo < self.rho_max * (1.0 - 1e-12) {
            let hi = (2.0 * lo).min(self.rho_max);
            out.push((lo, hi));
            lo = hi;
        }
        out
    }
}

/// Empirical constant in `|J_λ(ρ) − main term| ≤ C ρ^{−3/2}` over a finite
/// range of arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticCertificate {
    pub lambda: f64,
    pub rho_range: (f64, f64),
    pub c_lambda_empirical: f64,
    /// `sup ρ^{3/2} |remainder|` over each octave of the range.
    pub octave_sups: Vec<f64>,
}

impl AsymptoticCertificate {
    /// Whether every octave sup after the first is at most its predecessor,
    /// allowing a relative slack of `rel_tol`.
    pub fn octaves_non_increasing(&self, rel_tol: f64) -> bool {
        self.octave_sups
            .windows(2)
            .skip(1)
            .all(|w| w[1] <= w[0] * (1.0 + rel_tol))
    }

    /// Largest relative increase between consecutive octave sups after the
    /// first octave (negative when the sequence strictly decreases).
    pub fn max_relative_increase(&self) -> f64 {
        self.octave_sups
            .windows(2)
            .skip(1)
            .map(|w| (w[1] - w[0]) / w[0].max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `ρ^{3/2} |J_λ(ρ) − main term|`.
pub fn scaled_remainder(order: &BesselOrder, rho: f64) -> f64 {
    rho.powf(1.5) * order.remainder(rho).abs()
}

/// Samples `ρ^{3/2}|J_λ − main|` densely over each octave of `range`,
/// polishing every sampled local maximum by golden-section search.
pub fn certify_asymptotic(order: BesselOrder, range: DyadicRange) -> Result<AsymptoticCertificate> {
    if range.rho_min <= 1.0 {
        return domain("certificate range touches (0, 1]");
    }
    let mut octave_sups = Vec::new();
    for (lo, hi) in range.octaves() {
        let count = (((hi - lo) / range.max_spacing).ceil() as usize).max(512);
        let h = (hi - lo) / count as f64;
        let values: Vec<f64> = (0..=count)
            .map(|i| scaled_remainder(&order, if i == count { hi } else { lo + i as f64 * h }))
            .collect();
        let mut best = values.iter().copied().fold(0.0, f64::max);
        for i in 1..count {
            if values[i] >= values[i - 1] && values[i] >= values[i + 1] && values[i] > 0.0 {
                let centre = lo + i as f64 * h;
                let peak = golden_max(|x| scaled_remainder(&order, x), centre - h, centre + h);
                best = best.max(peak);
            }
        }
        if !best.is_finite() {
            return Err(crate::Error::Divergent(format!("remainder sup is not finite on [{lo}, {hi}]")));
        }
        octave_sups.push(best);
    }
    let c = octave_sups.iter().copied().fold(0.0, f64::max);
    Ok(AsymptoticCertificate {
        lambda: order.lambda,
        rho_range: (range.rho_min, range.rho_max),
        c_lambda_empirical: c,
        octave_sups,
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 * b.abs() {
            break;
        }
    }
    fc.max(fd)
}

/// Largest gap between the series and the asymptotic expansion on `[lo, hi]`,
/// measured against the envelope `√(2/(πρ))`.
pub fn crossover_gap(order: &BesselOrder, lo: f64, hi: f64, samples: usize) -> f64 {
    (0..=samples)
        .map(|i| {
            let rho = lo + (hi - lo) * i as f64 / samples as f64;
            (order.series(rho) - order.asymptotic(rho)).abs() / envelope(rho)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(l: f64) -> BesselOrder {
        BesselOrder::new(l).unwrap()
    }

    /// Plain-`f64` truncated series Σ_{k≤40}, adequate for ρ = 1.
    fn series_oracle_j1(rho: f64) -> f64 {
        let x = rho / 2.0;
        let mut sum = 0.0;
        let mut fact_k = 1.0;
        for k in 0..=40 {
            if k > 0 {
                fact_k *= k as f64;
            }
            let fact_k1 = fact_k * (k + 1) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * x.powi(2 * k + 1) / (fact_k * fact_k1);
        }
        sum
    }

    #[test]
    fn anchors() {
        assert_eq!(bessel_j(order(0.0), 0.0).unwrap(), 1.0);
        assert!(bessel_j(order(0.5), PI).unwrap().abs() < 1e-16);
        let v = bessel_j(order(1.0), 1.0).unwrap();
        let oracle = series_oracle_j1(1.0);
        assert!((v - oracle).abs() < 1e-15 * oracle.abs(), "{v} vs {oracle}");
        // Tail bound of the oracle: the k = 41 term is below 1e-80.
        assert!((v - 0.440_050_585_744_933_5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(BesselOrder::new(-0.6).is_err());
        assert!(BesselOrder::new(f64::NAN).is_err());
        assert!(bessel_j(order(0.0), f64::INFINITY).is_err());
        assert!(bessel_j(order(0.0), -1.0).is_err());
        assert!(bessel_main_term(order(0.0), 0.0).is_err());
        assert!(bessel_main_term(order(0.0), -2.0).is_err());
    }

    #[test]
    fn known_values_across_regimes() {
        // Reference values from Abramowitz & Stegun tables.
        let cases = [
            (0.0, 5.0, -0.177_596_771_314_338_3),
            (0.0, 20.0, 0.167_024_664_340_583_1),
            (1.0, 10.0, 0.043_472_746_168_861_44),
            (1.0, 50.0, -0.097_511_828_125_175_55),
            (2.0, 30.0, 0.078_451_246_073_265_38),
        ];
        for (l, rho, want) in cases {
            let got = order(l).j(rho);
            assert!((got - want).abs() < 1e-13, "J_{l}({rho}) = {got}, want {want}");
        }
    }

    #[test]
    fn half_integer_closed_form_exact() {
        let o = order(0.5);
        let mut rho = 0.1;
        while rho < 1e4 {
            let want = (2.0 / (PI * rho)).sqrt() * rho.sin();
            assert!((o.j(rho) - want).abs() <= 1e-12);
            assert_eq!(o.j(rho), o.main_term(rho));
            rho *= 1.07;
        }
    }

    #[test]
    fn three_halves_matches_series_below_and_above_switch() {
        let o = order(1.5);
        for rho in [0.3, 0.9, 1.0, 1.1, 3.0, 8.0] {
            let closed = o.j(rho);
            let series = o.series(rho);
            assert!((closed - series).abs() < 1e-14, "{rho}: {closed} vs {series}");
        }
    }

    #[test]
    fn main_term_phase_cancels_for_order_zero() {
        let o = order(0.0);
        let v = o.main_term(PI / 4.0);
        let want = (2.0 / PI).sqrt() * (PI / 4.0f64).powf(-0.5);
        assert!((v - want).abs() < 1e-15);
        let o = order(0.5);
        for rho in [0.2, 3.0, 77.0] {
            assert_eq!(o.main_term(rho), (2.0 / (PI * rho)).sqrt() * rho.sin());
        }
    }

    #[test]
    fn regimes_agree_on_an_octave_above_crossover() {
        for l in [0.0, 0.25, 1.0, 2.0] {
            let o = order(l);
            let lo = o.crossover();
            let gap = crossover_gap(&o, lo, 2.0 * lo, 2000);
            assert!(gap < 1e-9, "lambda = {l}: gap {gap:e}");
        }
    }

    #[test]
    fn scaled_evaluation_near_origin() {
        let o = order(1.0);
        assert!((o.j_scaled(0.0) - 0.5).abs() < 1e-16);
        let rho = 2e-3;
        assert!((o.j_scaled(rho) - o.j(rho) / rho).abs() < 1e-15);
    }

    #[test]
    fn certificate_for_half_order_is_zero() {
        let cert = certify_asymptotic(order(0.5), DyadicRange::new(2.0, 4096.0).unwrap()).unwrap();
        assert_eq!(cert.c_lambda_empirical, 0.0);
        assert_eq!(cert.octave_sups.len(), 11);
    }

    #[test]
    fn certificate_rejects_ranges_near_one() {
        assert!(DyadicRange::new(1.0, 4096.0).is_err());
        assert!(DyadicRange::new(0.5, 4096.0).is_err());
        assert!(DyadicRange::new(2.0, 256.0).is_err());
        assert!(DyadicRange::new(2.0, 512.0).is_ok());
    }

    #[test]
    fn gamma_recurrences() {
        assert_eq!(gamma(1.0), 1.0);
        assert_eq!(gamma(4.0), 6.0);
        assert!((gamma(2.5) - 1.329_340_388_179_137).abs() < 1e-15);
        assert!((gamma(1.3) - 0.897_470_696_306_277_2).abs() < 1e-14);
    }
}
