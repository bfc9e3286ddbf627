use l2gauss::measure::{
    classify_pair, fernique_integral, hellinger_1d, hellinger_product, log_hellinger_product, mc_integrate, rn_translation,
    Fernique, ProductGaussian, ShiftedGaussianPair, Verdict,
};
use l2gauss::numerics::moments::tilted_moment;
use l2gauss::numerics::special::normal_pdf;
use l2gauss::numerics::{integrate_polynomial, quad, Poly, Sequence, TruncatedPoint};
use l2gauss::Result;
use rand::Rng;

use super::{rng, stream, Outcome, Worst};
use crate::config::RunConfig;

/// `∫√(p·q)` for `p = N(x1, (ra)²)`, `q = N(x2, (sa)²)` by composite
/// Gauss–Legendre over a window covering both bells.
fn hellinger_by_quadrature(a: f64, r: f64, s: f64, x1: f64, x2: f64) -> f64 {
    let (s1, s2) = (r * a, s * a);
    let lo = (x1 - 16.0 * s1).min(x2 - 16.0 * s2);
    let hi = (x1 + 16.0 * s1).max(x2 + 16.0 * s2);
    quad::integrate(|x| (normal_pdf(x - x1, s1) * normal_pdf(x - x2, s2)).sqrt(), lo, hi, 400)
}

pub fn hellinger(cfg: &RunConfig) -> Result<Outcome> {
    let mut g = rng(cfg, 1);
    let mut worst = Worst::default();
    let mut identical = true;
    for _ in 0..100 {
        let a = g.random_range(0.05..2.0);
        let r = g.random_range(0.3..3.0);
        let s = g.random_range(0.3..3.0);
        let x1 = g.random_range(-2.0..2.0);
        let x2 = g.random_range(-2.0..2.0);
        // absolute error: both sides lie in [0, 1]
        worst.push(hellinger_1d(a, r, s, x1, x2), hellinger_by_quadrature(a, r, s, x1, x2), 1.0);
        identical &= hellinger_1d(a, r, r, x1, x1) == 1.0;
    }
    let tol = 1e-8;
    let o = Outcome::new(tol).count("cases", 100).value("identical_is_one", f64::from(u8::from(identical)));
    Ok(worst
        .into_outcome(o, "quadrature")
        .require(worst.within(tol), "closed form differs from quadrature")
        .require(identical, "identical measures do not give 1"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Branch {
    Dilated,
    Summable,
    NotSummable,
    FiniteShifts,
}

fn random_pair(cfg: &RunConfig, g: &mut impl Rng, branch: Branch) -> ShiftedGaussianPair {
    let r = g.random_range(0.5..2.0);
    let first = g.random_range(-2.0..2.0);
    let n = g.random_range(1..6);
    let (s, mu, nu) = match branch {
        Branch::Dilated => {
            let s = r * g.random_range(1.05..2.0);
            (s, Sequence::geometric(first, g.random_range(0.05..0.45), n), Sequence::finite(vec![]))
        }
        Branch::Summable => (r, Sequence::geometric(first, g.random_range(0.05..0.45), n), Sequence::finite(vec![])),
        Branch::NotSummable => (r, Sequence::geometric(first.signum() * (0.5 + first.abs()), g.random_range(0.5..0.9), n), Sequence::finite(vec![])),
        Branch::FiniteShifts => {
            let mu = (0..n).map(|_| g.random_range(-1.0..1.0)).collect();
            let nu = (0..g.random_range(0..4)).map(|_| g.random_range(-1.0..1.0)).collect();
            (r, Sequence::finite(mu), Sequence::finite(nu))
        }
    };
    ShiftedGaussianPair { weights: cfg.weights.clone(), r, s, shift_mu: mu, shift_nu: nu }
}

/// `Σ_i log H_i` term by term, independent of the library's tail handling.
fn brute_log_hellinger(p: &ShiftedGaussianPair) -> f64 {
    let mut acc = 0.0;
    for i in 0..4000 {
        let a = p.weights.a(i);
        if a < 1e-250 {
            break;
        }
        let q = (p.shift_mu.get(i) - p.shift_nu.get(i)) / a;
        acc -= q * q / (8.0 * p.r * p.r);
    }
    acc
}

pub fn dichotomy(cfg: &RunConfig) -> Result<Outcome> {
    let mut g = rng(cfg, 2);
    let branches = [Branch::Dilated, Branch::Summable, Branch::NotSummable, Branch::FiniteShifts];
    let (mut consistent, mut expected, mut equivalent) = (0usize, 0usize, 0usize);
    let mut worst = Worst::default();
    for k in 0..200 {
        let branch = branches[k % branches.len()];
        let pair = random_pair(cfg, &mut g, branch);
        let v = classify_pair(&pair)?;
        let h = hellinger_product(&pair, 1e-15)?;
        let eq = v.verdict == Verdict::Equivalent;
        consistent += usize::from(eq == (h > 0.0));
        expected += usize::from(eq == matches!(branch, Branch::Summable | Branch::FiniteShifts));
        if eq {
            equivalent += 1;
            worst.push(log_hellinger_product(&pair, 1e-15)?, brute_log_hellinger(&pair), 1.0);
        }
    }
    let tol = 1e-9;
    let o = Outcome::new(tol)
        .count("pairs", 200)
        .count("consistent", consistent)
        .count("expected_branch", expected)
        .count("equivalent", equivalent);
    Ok(worst
        .into_outcome(o, "log_hellinger")
        .require(consistent == 200, "verdict disagrees with H > 0")
        .require(expected == 200, "verdict disagrees with the constructed branch")
        .require(worst.within(tol), "log Hellinger differs from the term-by-term sum"))
}

/// `Σ_k ∫ y^k ρ(y) φ(y) dy · ∫ q_k dP`, the moments taken by quadrature of
/// the library's pointwise density.
fn density_by_quadrature(g: &ProductGaussian, p: &Poly, i: usize, s: f64) -> f64 {
    let sigma = g.sigma(i);
    let mut total = 0.0;
    for (k, q) in p.split_by_var(i) {
        let moment = quad::integrate(
            |y| {
                let mut pt = vec![0.0; i + 1];
                pt[i] = y;
                y.powi(k as i32) * rn_translation(g, i, s, &TruncatedPoint::new(pt)) * normal_pdf(y, sigma)
            },
            -s - 16.0 * sigma,
            -s + 16.0 * sigma,
            128,
        );
        total += moment * integrate_polynomial(&q, &g.weights, g.r);
    }
    total
}

pub fn translation(cfg: &RunConfig) -> Result<Outcome> {
    let mut rn = rng(cfg, 3);
    let mut exact = Worst::default();
    let mut quadrature = Worst::default();
    for _ in 0..20 {
        let g = ProductGaussian::new(cfg.weights.clone(), rn.random_range(0.5..2.0))?;
        let p = Poly::random(&mut rn, 4, 4, 5);
        let i = rn.random_range(0..4);
        let s = rn.random_range(-1.5..1.5);
        // ∫ g(y − s e_i) dP against ∫ g ρ dP through tilted Gaussian moments
        let shifted = integrate_polynomial(&p.shift(i, -s), &g.weights, g.r);
        let sigma = g.sigma(i);
        let lambda = -s / (sigma * sigma);
        let pref = (-s * s / (2.0 * sigma * sigma)).exp();
        let tilted: f64 = p
            .split_by_var(i)
            .into_iter()
            .map(|(k, q)| pref * tilted_moment(k, lambda, sigma) * integrate_polynomial(&q, &g.weights, g.r))
            .sum();
        exact.push(shifted, tilted, 1.0);
        quadrature.push(density_by_quadrature(&g, &p, i, s), tilted, 1.0);
    }
    let tol = 1e-12;
    let o = exact.into_outcome(Outcome::new(tol).count("polynomials", 20), "exact");
    Ok(quadrature
        .into_outcome(o, "density_quadrature")
        .require(exact.within(tol), "shift and density integrals differ")
        .require(quadrature.within(1e-10), "pointwise density disagrees with its moments"))
}

pub fn fernique(cfg: &RunConfig) -> Result<Outcome> {
    let g = ProductGaussian::new(cfg.weights.clone(), 1.0)?;
    let threshold = 1.0 / (2.0 * g.r * g.r * g.weights.sup().powi(2));
    let c = 0.5 * threshold;
    let Fernique::Finite(closed) = fernique_integral(&g, c) else {
        return Ok(Outcome::new(0.02).require(false, "finite case flagged divergent"));
    };
    let direct: f64 = (0..4000)
        .map(|k| g.weights.a(k))
        .take_while(|&a| a > 1e-250)
        .map(|a| (1.0 - 2.0 * c * g.r * g.r * a * a).powf(-0.5))
        .product();
    let mc = mc_integrate(&g, |x| (c * x.iter().map(|v| v * v).sum::<f64>()).exp(), &stream(cfg, 4), cfg.samples.fernique)?;
    let rel = (mc.mean - closed).abs() / closed;
    let below = f64::from_bits(threshold.to_bits() - 1);
    let flags = [
        fernique_integral(&g, threshold) == Fernique::Divergent,
        fernique_integral(&g, 1.5 * threshold) == Fernique::Divergent,
        matches!(fernique_integral(&g, below), Fernique::Finite(v) if v.is_finite()),
    ];
    Ok(Outcome::new(0.02)
        .value("c", c)
        .value("threshold", threshold)
        .value("closed_form", closed)
        .value("partial_product", direct)
        .value("mc_mean", mc.mean)
        .value("mc_std_error", mc.std_error)
        .count("mc_samples", mc.n)
        .value("relative_gap", rel)
        .require(rel <= 0.02, "closed form and Monte Carlo differ by more than 2%")
        .require((closed - direct).abs() <= 1e-12 * closed, "closed form differs from the partial product")
        .require(flags[0] && flags[1], "divergence not flagged at or above the threshold")
        .require(flags[2], "divergence flagged below the threshold"))
}
