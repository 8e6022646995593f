//! Composite Gauss–Legendre rules on panel partitions.
//!
//! Everything oscillatory in the crate is integrated by splitting the domain
//! into panels short enough that the phase moves by at most a fraction of a
//! wavelength across each one, then applying a fixed-order Gauss–Legendre
//! rule per panel. The helpers here only build node sets; callers form the
//! weighted sums themselves so that complex integrands and shared nodes need
//! no extra plumbing.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

/// Default number of Gauss–Legendre points per panel.
pub const PANEL_ORDER: usize = 16;

/// A node with its quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub x: f64,
    pub w: f64,
}

fn reference_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let degree = NonZeroUsize::new(PANEL_ORDER).expect("nonzero order");
        let mut pairs = GaussLegendre::new(degree).as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

/// Appends the Gauss–Legendre nodes of the panel `[a, b]` to `out`.
pub fn push_panel(a: f64, b: f64, out: &mut Vec<Node>) {
    if b <= a {
        return;
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for &(x, w) in reference_rule() {
        out.push(Node { x: mid + half * x, w: half * w });
    }
}

/// Nodes for `[a, b]` cut into equal panels no longer than `h_max`.
pub fn uniform_nodes(a: f64, b: f64, h_max: f64) -> Vec<Node> {
    let mut out = Vec::new();
    push_uniform(a, b, h_max, &mut out);
    out
}

fn push_uniform(a: f64, b: f64, h_max: f64, out: &mut Vec<Node>) {
    if b <= a {
        return;
    }
    let count = ((b - a) / h_max).ceil().max(1.0) as usize;
    let h = (b - a) / count as f64;
    for i in 0..count {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == count { b } else { lo + h };
        push_panel(lo, hi, out);
    }
}

/// Nodes for `[a, b]` where the admissible panel length varies along the
/// interval.
///
/// `step(x)` returns the largest panel length allowed for a panel whose left
/// end sits at `x` (and whose right end is close by). Panels never cross the
/// sorted `breaks`. When `a == 0` the first panels are graded geometrically
/// towards the origin so that integrands with fractional powers of `x` there
/// keep their accuracy.
pub fn marching_nodes(a: f64, b: f64, breaks: &[f64], step: impl Fn(f64) -> f64) -> Vec<Node> {
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(a);
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut out = Vec::new();
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mut x = lo;
        if lo == 0.0 {
            let first = (1e-12 * hi).max(f64::MIN_POSITIVE);
            push_panel(0.0, first, &mut out);
            x = first;
        }
        while x < hi {
            let mut h = step(x);
            // Re-evaluate at the far end; the step rule may shrink there.
            h = h.min(step((x + h).min(hi)));
            if lo == 0.0 {
                h = h.min(x);
            }
            let h = h.max(1e-14 * (1.0 + x.abs()));
            let next = if x + h >= hi * (1.0 - 1e-14) { hi } else { x + h };
            push_panel(x, next, &mut out);
            x = next;
        }
    }
    out
}

/// Trapezoid weights for a strictly increasing abscissa list.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = 0.5 * (x[i] - x[i - 1]);
        w[i - 1] += h;
        w[i] += h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(nodes: &[Node], f: impl Fn(f64) -> f64) -> f64 {
        nodes.iter().map(|n| n.w * f(n.x)).sum()
    }

    #[test]
    fn reference_rule_is_exact_for_polynomials() {
        let nodes = uniform_nodes(-1.0, 1.0, 2.0);
        assert_eq!(nodes.len(), PANEL_ORDER);
        let v = integrate(&nodes, |x| x.powi(30));
        assert!((v - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn oscillatory_panels_resolve_high_frequencies() {
        let omega = 200.0;
        let nodes = uniform_nodes(0.0, 3.0, std::f64::consts::PI / (4.0 * omega));
        let v = integrate(&nodes, |x| (omega * x).cos());
        assert!((v - (3.0 * omega).sin() / omega).abs() < 1e-14);
    }

    #[test]
    fn grading_handles_fractional_powers_at_origin() {
        let nodes = marching_nodes(0.0, 1.0, &[], |_| 0.1);
        let v = integrate(&nodes, |x| x.powf(0.25));
        assert!((v - 0.8).abs() < 1e-13, "{v}");
    }

    #[test]
    fn marching_respects_breaks() {
        let nodes = marching_nodes(0.5, 2.0, &[1.0], |_| 10.0);
        assert_eq!(nodes.len(), 2 * PANEL_ORDER);
        assert!(nodes[..PANEL_ORDER].iter().all(|n| n.x < 1.0));
        assert!(nodes[PANEL_ORDER..].iter().all(|n| n.x > 1.0));
    }

    #[test]
    fn trapezoid_weights_sum_to_length() {
        let x = [0.0, 0.5, 1.5, 4.0];
        let w = trapezoid_weights(&x);
        assert!((w.iter().sum::<f64>() - 4.0).abs() < 1e-15);
    }
}
