//! Conditional expectation onto the first `n` coordinates and mollification
//! of the reduced function.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::cpoly::{CMonomial, CPoly};
use crate::numerics::moments::{complex_moment, gaussian_moment};
use crate::numerics::sampling::{fill_gaussian, Estimate, SampleStream};
use crate::numerics::{MultiIndex, Poly, Weights};

/// `E[p | x_0, …, x_{n−1}]` under `P_r`: trailing variables are replaced by
/// their moments.
pub fn reduce_dimension(p: &Poly, n: usize, w: &Weights, r: f64) -> Poly {
    Poly::from_terms(p.terms().map(|(m, c)| {
        let (keep, drop): (Vec<(usize, u32)>, Vec<(usize, u32)>) = m.pairs().iter().partition(|&&(i, _)| i < n);
        let factor: f64 = drop.iter().map(|&(i, e)| gaussian_moment(e, r * w.a(i))).product();
        (MultiIndex::from_pairs(keep), c * factor)
    }))
}

/// The complex analogue, with `E|z_j|² = 2r²a_j²`.
pub fn reduce_cpoly(p: &CPoly, n: usize, w: &Weights, r: f64) -> CPoly {
    CPoly::from_terms(p.terms().map(|(m, c)| {
        let (keep, drop): (Vec<(usize, u32, u32)>, Vec<(usize, u32, u32)>) =
            m.triples().iter().partition(|&&(j, _, _)| j < n);
        let factor: f64 = drop.iter().map(|&(j, a, b)| complex_moment(a, b, 2.0 * r * r * w.a(j).powi(2))).product();
        (CMonomial::from_triples(keep), c * Complex64::new(factor, 0.0))
    }))
}

/// `f_n(x) = ∫ f(x_{<n}, y_{≥n}) dP_r(y)` for a black box on the first
/// `dims` coordinates.
pub fn reduce_function<F>(f: F, x: &[f64], n: usize, dims: usize, w: &Weights, r: f64, stream: &SampleStream, samples: usize) -> Estimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sig: Vec<f64> = (0..dims).map(|i| r * w.a(i)).collect();
    stream.with_dims(dims).estimate(
        samples,
        |rng, buf| fill_gaussian(rng, &sig, buf),
        |y| {
            let z: Vec<f64> = (0..dims).map(|i| if i < n { x[i] } else { y[i] }).collect();
            f(&z)
        },
    )
}

/// A draw from the radial bump `∝ exp(−1/(1 − |y|²/δ²))` on the `n`-ball of
/// radius `δ`, by rejection from the uniform ball.
fn bump_draw<R: Rng + ?Sized>(rng: &mut R, n: usize, delta: f64, out: &mut [f64]) {
    loop {
        let mut norm = 0.0;
        for o in out.iter_mut() {
            let g: f64 = StandardNormal.sample(rng);
            *o = g;
            norm += g * g;
        }
        let norm = norm.sqrt();
        let u: f64 = rng.random();
        let rho = u.powf(1.0 / n as f64);
        let accept: f64 = rng.random();
        if norm > 0.0 && rho < 1.0 && accept < (1.0 - 1.0 / (1.0 - rho * rho)).exp() {
            for o in out.iter_mut() {
                *o *= delta * rho / norm;
            }
            return;
        }
    }
}

/// `f_{n,δ}(x) = ∫ f_n(x − y) ψ_δ(y) dy` with `ψ_δ` the normalised radial
/// bump in the first `n` coordinates.
#[allow(clippy::too_many_arguments)]
pub fn mollify<F>(
    f: F,
    x: &[f64],
    n: usize,
    delta: f64,
    dims: usize,
    w: &Weights,
    r: f64,
    stream: &SampleStream,
    samples: usize,
) -> Estimate
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sig: Vec<f64> = (0..dims).map(|i| r * w.a(i)).collect();
    stream.with_dims(dims).estimate(
        samples,
        |rng, buf| {
            fill_gaussian(rng, &sig, buf);
            bump_draw(rng, n, delta, &mut buf[..n]);
        },
        |y| {
            let z: Vec<f64> = (0..dims).map(|i| if i < n { x[i] - y[i] } else { y[i] }).collect();
            f(&z)
        },
    )
}
