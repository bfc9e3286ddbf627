//! Exact Gaussian moment oracles.

use num_complex::Complex64;

use super::cpoly::CPoly;
use super::poly::Poly;
use super::sequence::Weights;
use super::special;

/// `(n)!!`, with `(−1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `E x^k` for `x ~ N(0, sigma²)`: `(k−1)!!·sigma^k`, and exactly 0 for odd `k`.
pub fn gaussian_moment(k: u32, sigma: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    double_factorial(i64::from(k) - 1) * sigma.powi(k as i32)
}

/// `E x^k` for `x ~ N(mu, sigma²)` by the three-term recurrence
/// `m_k = mu·m_{k−1} + (k−1)·sigma²·m_{k−2}`.
pub fn noncentral_moment(k: u32, mu: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let (mut prev, mut cur) = (1.0, mu);
    if k == 0 {
        return 1.0;
    }
    for j in 2..=k {
        let next = mu * cur + f64::from(j - 1) * s2 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `E[x^k e^{λx}]` for `x ~ N(0, sigma²)`, completing the square.
pub fn tilted_moment(k: u32, lambda: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    (0.5 * lambda * lambda * s2).exp() * noncentral_moment(k, lambda * s2, sigma)
}

/// `∫_c^∞ x^k φ_sigma(x) dx` by the recurrence
/// `J_k = sigma²·(c^{k−1} φ_sigma(c) + (k−1) J_{k−2})`.
pub fn upper_incomplete_moment(k: u32, c: f64, sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let phi = special::normal_pdf(c, sigma);
    let j0 = special::normal_sf(c / sigma);
    if k == 0 {
        return j0;
    }
    let j1 = s2 * phi;
    let (mut prev, mut cur) = (j0, j1);
    for m in 2..=k {
        let next = s2 * (c.powi(m as i32 - 1) * phi + f64::from(m - 1) * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// `E[z^m z̄^n]` for a circular complex Gaussian with `E|z|² = var`:
/// `δ_{mn}·m!·var^m`.
pub fn complex_moment(m: u32, n: u32, var: f64) -> f64 {
    if m != n {
        return 0.0;
    }
    factorial(m) * var.powi(m as i32)
}

/// Exact `∫ p dP_r` under the product Gaussian with standard deviations
/// `r·a_i`.
pub fn integrate_polynomial(p: &Poly, w: &Weights, r: f64) -> f64 {
    p.terms()
        .map(|(m, c)| c * m.pairs().iter().map(|&(i, e)| gaussian_moment(e, r * w.a(i))).product::<f64>())
        .sum()
}

/// Exact `∫ p dP_r` for a complex polynomial; each complex coordinate has
/// independent real and imaginary parts with variance `(r a_j)²`, so
/// `E|z_j|² = 2 r² a_j²`.
pub fn integrate_cpoly(p: &CPoly, w: &Weights, r: f64) -> Complex64 {
    p.terms()
        .filter(|(m, _)| m.is_balanced())
        .map(|(m, c)| {
            let v: f64 = m
                .triples()
                .iter()
                .map(|&(j, a, b)| complex_moment(a, b, 2.0 * r * r * w.a(j) * w.a(j)))
                .product();
            c * v
        })
        .sum()
}

/// `E[f·conj(g)]` under the complex product Gaussian.
pub fn cpoly_inner(f: &CPoly, g: &CPoly, w: &Weights, r: f64) -> Complex64 {
    integrate_cpoly(&(f * &g.conj()), w, r)
}
