//! The product Gaussian `P_r` on ℓ² and its closed-form calculus.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::sampling::{fill_gaussian, Estimate, SampleStream, Welford};
use crate::numerics::sequence::{Sequence, TailTerm, Weights};
use crate::numerics::special::interval_prob;
use crate::numerics::TruncatedPoint;

/// Independent coordinates `x_i ~ N(0, (r·a_i)²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductGaussian {
    pub weights: Weights,
    pub r: f64,
}

impl ProductGaussian {
    pub fn new(weights: Weights, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("scale r = {r} must be positive")));
        }
        Ok(ProductGaussian { weights, r })
    }

    pub fn standard(weights: Weights) -> Self {
        ProductGaussian { weights, r: 1.0 }
    }

    pub fn sigma(&self, i: usize) -> f64 {
        self.r * self.weights.a(i)
    }

    pub fn sigmas(&self, dims: usize) -> Vec<f64> {
        (0..dims).map(|i| self.sigma(i)).collect()
    }

    /// Fills `out` with a draw of the first `out.len()` coordinates.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, sigmas: &[f64], out: &mut [f64]) {
        fill_gaussian(rng, sigmas, out);
    }
}

/// `√(2rs/(r²+s²))·exp(−(x1−x2)²/(4(r²+s²)a²))`: the Hellinger integral of
/// `N(x1, (ra)²)` and `N(x2, (sa)²)`.
pub fn hellinger_1d(a: f64, r: f64, s: f64, x1: f64, x2: f64) -> f64 {
    log_hellinger_1d(a, r, s, x1, x2).exp()
}

fn log_hellinger_1d(a: f64, r: f64, s: f64, x1: f64, x2: f64) -> f64 {
    let q = r * r + s * s;
    0.5 * (2.0 * r * s / q).ln() - (x1 - x2).powi(2) / (4.0 * q * a * a)
}

/// Two shifted product Gaussians `P_r(·, x¹)` and `P_s(·, x²)` over the same
/// weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftedGaussianPair {
    pub weights: Weights,
    pub r: f64,
    pub s: f64,
    pub shift_mu: Sequence,
    pub shift_nu: Sequence,
}

impl ShiftedGaussianPair {
    /// Explicit shift differences and the closed-form tail of the difference.
    fn difference(&self) -> Result<(Vec<f64>, TailTerm)> {
        let n = self.shift_mu.len_explicit().max(self.shift_nu.len_explicit());
        let head = (0..n)
            .map(|i| match (self.shift_mu.try_get(i), self.shift_nu.try_get(i)) {
                (Some(u), Some(v)) => Ok(u - v),
                _ => Err(Error::TailNotCertified),
            })
            .collect::<Result<Vec<_>>>()?;
        let tu = self.shift_mu.tail_term().ok_or(Error::TailNotCertified)?;
        let tv = self.shift_nu.tail_term().ok_or(Error::TailNotCertified)?;
        let tail = if tv.c == 0.0 {
            tu
        } else if tu.c == 0.0 {
            tv.scale(-1.0)
        } else if tu.rho == tv.rho && tu.p == tv.p {
            TailTerm { c: tu.c - tv.c, ..tu }
        } else {
            return Err(Error::TailNotCertified);
        };
        Ok((head, tail))
    }

    /// `Σ (x¹_i − x²_i)²/a_i²` with closed-form tail, `+∞` if divergent.
    pub fn weighted_shift_sum(&self) -> Result<f64> {
        let (head, tail) = self.difference()?;
        let w = &self.weights;
        let n = head.len().max(w.len_explicit());
        let diff_at = |i: usize| if i < head.len() { head[i] } else { tail.eval(i + 1) };
        let explicit: f64 = (0..n).map(|i| (diff_at(i) / w.a(i)).powi(2)).sum();
        let ratio = tail.div(&w.tail_term()).powf(2.0);
        Ok(match ratio.sum_after(n) {
            Some(t) => explicit + t,
            None => f64::INFINITY,
        })
    }
}

/// `ln H(μ, ν)` for the pair; `−∞` when the product diverges to 0.
///
/// Explicit factors are multiplied until a factor deviates from 1 by less
/// than `tol`; the remainder is summed in closed form.
pub fn log_hellinger_product(pair: &ShiftedGaussianPair, tol: f64) -> Result<f64> {
    let (head, tail) = pair.difference()?;
    let w = &pair.weights;
    let (r, s) = (pair.r, pair.s);
    if (r - s).abs() > 0.0 {
        // A fixed factor √(2rs/(r²+s²)) < 1 repeats in every coordinate.
        return Ok(f64::NEG_INFINITY);
    }
    let ratio = tail.div(&w.tail_term()).powf(2.0);
    if ratio.sum_after(0).is_none() {
        return Ok(f64::NEG_INFINITY);
    }
    let diff_at = |i: usize| if i < head.len() { head[i] } else { tail.eval(i + 1) };
    let mut log_h = 0.0;
    let mut i = 0;
    let min_head = head.len().max(w.len_explicit());
    loop {
        let lf = log_hellinger_1d(w.a(i), r, s, diff_at(i), 0.0);
        log_h += lf;
        i += 1;
        if i >= min_head && (-lf).abs() < tol {
            break;
        }
        if i > 100_000 {
            return Err(Error::TailNotCertified);
        }
    }
    match ratio.sum_after(i) {
        Some(t) => Ok(log_h - t / (8.0 * r * r)),
        None => Ok(f64::NEG_INFINITY),
    }
}

/// `H(μ, ν) = Π_i H(μ_i, ν_i)`.
pub fn hellinger_product(pair: &ShiftedGaussianPair, tol: f64) -> Result<f64> {
    log_hellinger_product(pair, tol).map(f64::exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equivalent,
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DichotomyVerdict {
    pub verdict: Verdict,
    pub hellinger: f64,
    pub log_hellinger: f64,
    pub tail_sum: f64,
}

/// Equivalent iff `r = s` and `Σ (x¹_i − x²_i)²/a_i² < ∞`; singular otherwise.
pub fn classify_pair(pair: &ShiftedGaussianPair) -> Result<DichotomyVerdict> {
    let tail_sum = pair.weighted_shift_sum()?;
    let log_hellinger = log_hellinger_product(pair, 1e-15)?;
    let verdict = if pair.r == pair.s && tail_sum.is_finite() {
        Verdict::Equivalent
    } else {
        Verdict::Singular
    };
    Ok(DichotomyVerdict { verdict, hellinger: log_hellinger.exp(), log_hellinger, tail_sum })
}

/// Density of `P_r(· + s·e_i)` against `P_r` at `y`:
/// `exp(−(2s·y_i + s²)/(2r²a_i²))`, so that
/// `∫ g(y − s e_i) dP_r(y) = ∫ g(y)·density(y) dP_r(y)`.
pub fn rn_translation(g: &ProductGaussian, i: usize, s: f64, y: &TruncatedPoint) -> f64 {
    rn_translation_multi(g, &[(i, s)], y)
}

/// Product of the single-coordinate densities for several shifted coordinates.
pub fn rn_translation_multi(g: &ProductGaussian, shifts: &[(usize, f64)], y: &TruncatedPoint) -> f64 {
    let expo: f64 = shifts
        .iter()
        .map(|&(i, s)| -(2.0 * s * y.get(i) + s * s) / (2.0 * g.sigma(i).powi(2)))
        .sum();
    expo.exp()
}

/// A finite-dimensional rectangle `{lo_k < x_{i_k} < hi_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectEvent {
    pub sides: Vec<(usize, f64, f64)>,
}

impl RectEvent {
    pub fn probability(&self, g: &ProductGaussian) -> f64 {
        self.sides.iter().map(|&(i, lo, hi)| interval_prob(lo, hi, g.sigma(i))).product()
    }

    pub fn scaled(&self, factor: f64) -> RectEvent {
        RectEvent { sides: self.sides.iter().map(|&(i, lo, hi)| (i, lo * factor, hi * factor)).collect() }
    }
}

/// `(P_{sr}(E), P_r(s⁻¹E))`, each a product of 1-D CDF differences.
pub fn dilation_check(g: &ProductGaussian, s: f64, event: &RectEvent) -> (f64, f64) {
    let dilated = ProductGaussian { weights: g.weights.clone(), r: g.r * s };
    (event.probability(&dilated), event.scaled(1.0 / s).probability(g))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Fernique {
    Finite(f64),
    Divergent,
}

/// `∫ e^{c‖x‖²} dP_r = Π_k (1 − 2r²a_k²c)^{−1/2}` below the threshold
/// `1/(2r²·sup a_k²)`, divergent at or above it.
pub fn fernique_integral(g: &ProductGaussian, c: f64) -> Fernique {
    let r2 = g.r * g.r;
    let threshold = 1.0 / (2.0 * r2 * g.weights.sup().powi(2));
    if c >= threshold {
        return Fernique::Divergent;
    }
    if c == 0.0 {
        return Fernique::Finite(1.0);
    }
    let w = &g.weights;
    let n = w.len_explicit();
    let head: f64 = (0..n).map(|k| -0.5 * (-2.0 * r2 * w.a(k).powi(2) * c).ln_1p()).sum();
    // −½ Σ_{k≥n} ln(1 − u_k) = ½ Σ_j (2r²c)^j/j · Σ_{k≥n} a_k^{2j}
    let base = 2.0 * r2 * c;
    let mut tail = 0.0;
    for j in 1..400 {
        let term = 0.5 * base.powi(j) / f64::from(j) * w.power_sum_from(n, 2.0 * f64::from(j));
        tail += term;
        if term.abs() < 1e-18 * tail.abs().max(1e-300) {
            break;
        }
    }
    Fernique::Finite((head + tail).exp())
}

/// `∫ e^{c‖x‖^q} dP_r` for exponents other than 2: divergent for every
/// `q > 2, c > 0`; `q = 2` reduces to [`fernique_integral`].
pub fn fernique_exponent(g: &ProductGaussian, c: f64, q: f64) -> Result<Fernique> {
    if q == 2.0 {
        return Ok(fernique_integral(g, c));
    }
    if q > 2.0 && c > 0.0 {
        return Ok(Fernique::Divergent);
    }
    if c == 0.0 {
        return Ok(Fernique::Finite(1.0));
    }
    Err(Error::InvalidInput("no closed form for this exponent".into()))
}

/// Sample mean of `f` under `P_r` restricted to `stream.dims` coordinates.
pub fn mc_integrate<F>(g: &ProductGaussian, f: F, stream: &SampleStream, n: usize) -> Result<Estimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let sigmas = g.sigmas(stream.dims);
    let parts = stream.map_chunks(n, |rng, count| {
        let mut buf = vec![0.0; sigmas.len()];
        let mut acc = Welford::default();
        let mut finite = true;
        for _ in 0..count {
            fill_gaussian(rng, &sigmas, &mut buf);
            let v = f(&buf);
            finite &= v.is_finite();
            acc.push(v);
        }
        (acc, finite)
    });
    if parts.iter().any(|(_, ok)| !ok) {
        return Err(Error::NonFiniteSample);
    }
    let acc: Vec<Welford> = parts.into_iter().map(|(a, _)| a).collect();
    Ok(Welford::merge_all(&acc).estimate())
}

/// Monte Carlo estimate of `P_r(‖x − center‖ < radius)` at truncation.
pub fn positivity_smoke(
    g: &ProductGaussian,
    center: &TruncatedPoint,
    radius: f64,
    stream: &SampleStream,
    n: usize,
) -> Estimate {
    if radius <= 0.0 {
        return Estimate::exact(0.0);
    }
    let r2 = radius * radius;
    mc_integrate(
        g,
        |x| {
            let d2: f64 = x.iter().enumerate().map(|(i, v)| (v - center.get(i)).powi(2)).sum();
            if d2 < r2 {
                1.0
            } else {
                0.0
            }
        },
        stream,
        n,
    )
    .expect("indicator is finite")
}
