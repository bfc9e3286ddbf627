//! Gauss–Legendre quadrature (order 32, composite) with deterministic
//! reductions.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

pub const ORDER: usize = 32;

fn reference_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let gl = GaussLegendre::new(NonZeroUsize::new(ORDER).expect("nonzero order"));
        let mut v = gl.as_node_weight_pairs().to_vec();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    })
}

/// Composite nodes and weights for `[a, b]` split into `panels` equal panels.
pub fn nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let rule = reference_rule();
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for &(x, w) in rule {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

/// Pairwise summation; the association order depends only on the length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// `∫_a^b f` with the composite rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    if b == a {
        return 0.0;
    }
    let vals: Vec<f64> = nodes(a, b, panels).into_iter().map(|(x, w)| w * f(x)).collect();
    pairwise_sum(&vals)
}

/// Tensor-product quadrature over a box. The outer axis is split across
/// rayon workers and combined in node order.
pub fn integrate_box<F>(f: F, bounds: &[(f64, f64)], panels: usize) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if bounds.is_empty() {
        return f(&[]);
    }
    let axes: Vec<Vec<(f64, f64)>> = bounds.iter().map(|&(a, b)| nodes(a, b, panels)).collect();
    let outer: Vec<f64> = axes[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut point = vec![0.0; bounds.len()];
            point[0] = x0;
            w0 * inner(&f, &axes, 1, &mut point)
        })
        .collect();
    pairwise_sum(&outer)
}

fn inner<F: Fn(&[f64]) -> f64>(f: &F, axes: &[Vec<(f64, f64)>], k: usize, point: &mut [f64]) -> f64 {
    if k == axes.len() {
        return f(point);
    }
    let mut vals = Vec::with_capacity(axes[k].len());
    for &(x, w) in &axes[k] {
        point[k] = x;
        vals.push(w * inner(f, axes, k + 1, point));
    }
    pairwise_sum(&vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        let v = integrate(|x| x.powi(9) - 3.0 * x * x, -1.0, 2.0, 1);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn smooth_integrand() {
        let v = integrate(f64::exp, 0.0, 1.0, 2);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn box_rule_separable() {
        let v = integrate_box(|p| p[0] * p[1].cos(), &[(0.0, 1.0), (0.0, 1.0)], 1);
        assert!((v - 0.5 * 1f64.sin()).abs() < 1e-14);
    }
}
