//! Weighted Sobolev norms of cylinder polynomials under `P`, the adjoint
//! derivative `D_i* φ = −D_i φ + x_i φ / a_i²`, translation identities,
//! and boundary-flattening charts.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cutoff::AxisCutoff;
use crate::error::{Error, Result};
use crate::numerics::moments::{integrate_polynomial, tilted_moment};
use crate::numerics::quad;
use crate::numerics::sampling::{fill_gaussian, Estimate, SampleStream};
use crate::numerics::special::normal_pdf;
use crate::numerics::{MultiIndex, Poly, Weights};
use crate::surface::gauss_green::halfspace_integral;
use crate::surface::HalfSpace;

/// `D_i* p = −∂_i p + x_i p / a_i²`.
pub fn adjoint_derivative(p: &Poly, i: usize, w: &Weights) -> Poly {
    &p.mul_var(i).scale(1.0 / w.a(i).powi(2)) - &p.deriv(i)
}

/// Largest `|∫ f·D_i*φ dP − ∫ ∂_i f·φ dP|` over the test functions.
pub fn weak_derivative_defect(f: &Poly, i: usize, tests: &[Poly], w: &Weights) -> f64 {
    let df = f.deriv(i);
    tests
        .iter()
        .map(|phi| {
            let weak = integrate_polynomial(&(f * &adjoint_derivative(phi, i, w)), w, 1.0);
            let strong = integrate_polynomial(&(&df * phi), w, 1.0);
            (weak - strong).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Full,
    HalfSpace { coord: usize, offset: f64 },
}

impl Domain {
    fn integrate(&self, p: &Poly, w: &Weights) -> f64 {
        match *self {
            Domain::Full => integrate_polynomial(p, w, 1.0),
            Domain::HalfSpace { coord, offset } => halfspace_integral(p, HalfSpace { coord, offset }, w),
        }
    }
}

/// A cylinder polynomial with its derivatives `D^α f`, `|α| ≤ m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SobolevElement {
    pub f: Poly,
    pub m: u32,
    derivs: BTreeMap<MultiIndex, Poly>,
}

fn indices_up_to(vars: &[usize], m: u32) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::one()];
    for _ in 0..m {
        let mut next: Vec<MultiIndex> = out
            .iter()
            .flat_map(|a| vars.iter().map(move |&v| a.mul(&MultiIndex::var(v))))
            .collect();
        next.extend(out.iter().cloned());
        next.sort();
        next.dedup();
        out = next;
    }
    out
}

impl SobolevElement {
    pub fn new(f: Poly, m: u32) -> Self {
        let vars: Vec<usize> = f.support().into_iter().collect();
        let derivs = indices_up_to(&vars, m)
            .into_iter()
            .map(|alpha| {
                let mut d = f.clone();
                for &(v, e) in alpha.pairs() {
                    for _ in 0..e {
                        d = d.deriv(v);
                    }
                }
                (alpha, d)
            })
            .collect();
        SobolevElement { f, m, derivs }
    }

    /// `D^α f`; zero for any `α` outside the support.
    pub fn derivative(&self, alpha: &MultiIndex) -> Poly {
        self.derivs.get(alpha).cloned().unwrap_or_default()
    }

    /// `(Σ_{|α|≤m} a^α ∫_O |D^α f|² dP)^{1/2}` with `a^α = Π a_i^{2α_i}`.
    pub fn norm(&self, w: &Weights, domain: Domain) -> f64 {
        self.derivs
            .iter()
            .map(|(alpha, d)| {
                let weight: f64 = alpha.pairs().iter().map(|&(v, e)| w.a(v).powi(2 * e as i32)).product();
                weight * domain.integrate(&(d * d), w)
            })
            .sum::<f64>()
            .sqrt()
    }
}

pub fn sobolev_norm(f: &Poly, m: u32, w: &Weights, domain: Domain) -> f64 {
    SobolevElement::new(f.clone(), m).norm(w, domain)
}

/// Both sides of `∫|f(x + t e_0)|² dP = e^{−t²/(2a_0²)} ∫|f|² e^{t x_0/a_0²} dP`.
/// The left side expands the shift binomially; the right uses tilted moments.
pub fn translation_identity_check(f: &Poly, t: f64, w: &Weights) -> (f64, f64) {
    let shifted = f.shift(0, t);
    let lhs = integrate_polynomial(&(&shifted * &shifted), w, 1.0);
    let a2 = w.a(0).powi(2);
    let lambda = t / a2;
    let sq = f * f;
    let rhs: f64 = sq
        .split_by_var(0)
        .iter()
        .map(|(&k, q)| tilted_moment(k, lambda, w.a(0)) * integrate_polynomial(q, w, 1.0))
        .sum();
    (lhs, (-t * t / (2.0 * a2)).exp() * rhs)
}

/// The bump `exp(−1/(y(1−y)))` on `(0, 1)` and its derivative.
fn bump(y: f64) -> (f64, f64) {
    if y <= 0.0 || y >= 1.0 {
        return (0.0, 0.0);
    }
    let q = y * (1.0 - y);
    let v = (-1.0 / q).exp();
    (v, v * (1.0 - 2.0 * y) / (q * q))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnboundednessRow {
    pub n: u32,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

impl UnboundednessRow {
    pub fn bracketed(&self) -> bool {
        self.lower <= self.ratio * (1.0 + 1e-12) && self.ratio <= self.upper * (1.0 + 1e-12)
    }
}

/// `‖f_n(τ_1)‖_{H¹} / ‖f_n‖_{H¹}` for `f_n(x) = f(x_0 + n)` by 1-D
/// quadrature, with the bracketing bounds `e^{∓1/(4a²) − n/(2a²)}`.
pub fn translation_unboundedness(n: u32, w: &Weights) -> UnboundednessRow {
    let a = w.a(0);
    let a2 = a * a;
    let nf = f64::from(n);
    // both weights are scaled by the same constant to stay in range
    let shift = (nf - 0.5).powi(2) / (2.0 * a2);
    let weighted = |m: f64| {
        move |y: f64| {
            let (v, d) = bump(y);
            (v * v + a2 * d * d) * (shift - (y - m).powi(2) / (2.0 * a2)).exp()
        }
    };
    let den = quad::integrate(weighted(nf), 0.0, 1.0, 64);
    let num = quad::integrate(weighted(nf + 1.0), 0.0, 1.0, 64);
    UnboundednessRow {
        n,
        ratio: (num / den).sqrt(),
        lower: (-1.0 / (4.0 * a2) - nf / (2.0 * a2)).exp(),
        upper: (1.0 / (4.0 * a2) - nf / (2.0 * a2)).exp(),
    }
}

/// A boundary-flattening pair `ψ(x) = (g(x), x_1, …)`, `τ(x̂) = (h(x̂), x̂_1, …)`
/// around a boundary point of `O = {g > 0}`, with `U_0` a ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartChange {
    /// `O = {x_0 > 0}`, `U_0 = B_r(0)`, `ψ = τ = id`.
    HalfSpace { r: f64 },
    /// `O = {|x| > 1}`, `U_0 = B_{1/3}(e_0)`, `g = |x| − 1`.
    Sphere,
}

/// A map of `[0,1]²` onto part of a planar region and its Jacobian.
type Piece = Box<dyn Fn(f64, f64) -> ([f64; 2], f64) + Sync>;

impl ChartChange {
    pub fn g(&self, x: &[f64]) -> f64 {
        match self {
            ChartChange::HalfSpace { .. } => x[0],
            ChartChange::Sphere => x.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0,
        }
    }

    pub fn grad_g(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ChartChange::HalfSpace { .. } => {
                let mut d = vec![0.0; x.len()];
                d[0] = 1.0;
                d
            }
            ChartChange::Sphere => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter().map(|v| v / norm).collect()
            }
        }
    }

    pub fn h(&self, xh: &[f64]) -> f64 {
        match self {
            ChartChange::HalfSpace { .. } => xh[0],
            ChartChange::Sphere => ((xh[0] + 1.0).powi(2) - xh[1..].iter().map(|v| v * v).sum::<f64>()).sqrt(),
        }
    }

    pub fn grad_h(&self, xh: &[f64]) -> Vec<f64> {
        match self {
            ChartChange::HalfSpace { .. } => {
                let mut d = vec![0.0; xh.len()];
                d[0] = 1.0;
                d
            }
            ChartChange::Sphere => {
                let h = self.h(xh);
                std::iter::once((xh[0] + 1.0) / h).chain(xh[1..].iter().map(|v| -v / h)).collect()
            }
        }
    }

    pub fn psi(&self, x: &[f64]) -> Vec<f64> {
        std::iter::once(self.g(x)).chain(x[1..].iter().copied()).collect()
    }

    pub fn tau(&self, xh: &[f64]) -> Vec<f64> {
        std::iter::once(self.h(xh)).chain(xh[1..].iter().copied()).collect()
    }

    fn center_radius(&self) -> (f64, f64) {
        match *self {
            ChartChange::HalfSpace { r } => (0.0, r),
            ChartChange::Sphere => (1.0, 1.0 / 3.0),
        }
    }

    pub fn in_chart(&self, x: &[f64]) -> bool {
        let (c, r) = self.center_radius();
        let d2: f64 = (x[0] - c).powi(2) + x[1..].iter().map(|v| v * v).sum::<f64>();
        d2 < r * r && self.g(x) > 0.0
    }

    /// The chart constant `δ`.
    pub fn delta(&self, w: &Weights) -> f64 {
        match *self {
            ChartChange::HalfSpace { r } => 1f64.max(r).max(w.a(0).powi(2)),
            ChartChange::Sphere => {
                let tail = 64.0 * w.a(0).powi(2) / 9.0 + w.power_sum_from(1, 2.0) / 9.0;
                [4.0 / 3.0, 2.0, 8.0, tail].into_iter().fold(0.0, f64::max)
            }
        }
    }

    /// `|D_0 h(ψ(x))| · |D_0 g(x)|`.
    pub fn jacobian_product(&self, x: &[f64]) -> f64 {
        self.grad_h(&self.psi(x))[0].abs() * self.grad_g(x)[0].abs()
    }

    /// `(𝒥(ψ(x)), 𝒥_1(x))`, the densities of `P∘τ` and `P∘ψ`.
    pub fn jacobian_factors(&self, x: &[f64], w: &Weights) -> (f64, f64) {
        let two_a2 = 2.0 * w.a(0).powi(2);
        let xh = self.psi(x);
        let hx = self.h(&xh);
        let j = self.grad_h(&xh)[0].abs() * ((xh[0] * xh[0] - hx * hx) / two_a2).exp();
        let gx = self.g(x);
        let j1 = self.grad_g(x)[0].abs() * ((x[0] * x[0] - gx * gx) / two_a2).exp();
        (j, j1)
    }

    /// Uniform draws from `U_0 ∩ O` in `dims` coordinates.
    pub fn sample_points<R: Rng + ?Sized>(&self, rng: &mut R, dims: usize, count: usize) -> Vec<Vec<f64>> {
        let (c, r) = self.center_radius();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut x: Vec<f64> = (0..dims).map(|_| StandardNormal.sample(rng)).collect();
            let norm = x.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
            let u: f64 = rng.random();
            let rho = r * u.powf(1.0 / dims as f64);
            for v in x.iter_mut() {
                *v *= rho / norm;
            }
            x[0] += c;
            if self.in_chart(&x) {
                out.push(x);
            }
        }
        out
    }

    /// Checks the chart bounds with constant `δ` at each point.
    pub fn verify_condition(&self, delta: f64, points: &[Vec<f64>], w: &Weights) -> Result<()> {
        let inside = |v: f64| v.abs() < delta;
        let slope = |v: f64| 1.0 / delta < v && v < delta;
        for x in points {
            let xh = self.psi(x);
            let dh = self.grad_h(&xh);
            let energy: f64 = dh.iter().enumerate().map(|(i, d)| w.a(i).powi(2) * d * d).sum();
            let checks = [
                ("x_0", inside(x[0])),
                ("x̂_0", inside(xh[0])),
                ("h", inside(self.h(&xh))),
                ("g", inside(self.g(x))),
                ("D_0 h", slope(dh[0])),
                ("D_0 g", slope(self.grad_g(x)[0])),
                ("Σ a_i² |D_i h|²", energy < delta),
            ];
            if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
                return Err(Error::ConditionViolated(format!("{name} out of bounds at {x:?}")));
            }
        }
        Ok(())
    }

    /// `U_0 ∩ O` in the plane of the first two coordinates.
    fn original_pieces(&self) -> Vec<Piece> {
        match *self {
            ChartChange::HalfSpace { r } => vec![half_disc(r)],
            ChartChange::Sphere => {
                // the unit circle meets the small circle where x_1 = ±√35/18
                let xs = 35f64.sqrt() / 18.0;
                let theta0 = (3.0 * xs).asin();
                let central: Piece = Box::new(move |s, v| {
                    let x1 = xs * (2.0 * s - 1.0);
                    let lo = (1.0 - x1 * x1).sqrt();
                    let hi = 1.0 + (1.0 / 9.0 - x1 * x1).sqrt();
                    ([lo + (hi - lo) * v, x1], 2.0 * xs * (hi - lo))
                });
                let wing = move |sign: f64| -> Piece {
                    Box::new(move |s, v| {
                        let th = theta0 + (FRAC_PI_2 - theta0) * s;
                        let half = th.cos() / 3.0;
                        ([1.0 + half * (2.0 * v - 1.0), sign * th.sin() / 3.0], (FRAC_PI_2 - theta0) * half * 2.0 * half)
                    })
                };
                vec![central, wing(1.0), wing(-1.0)]
            }
        }
    }

    /// `ψ(U_0) ∩ {x̂_0 > 0}` in the same plane.
    fn flat_pieces(&self) -> Vec<Piece> {
        match *self {
            ChartChange::HalfSpace { r } => vec![half_disc(r)],
            ChartChange::Sphere => vec![Box::new(|s, v| {
                let x0 = (1.0 - s * s) / 3.0;
                let rho = 1.0 + x0;
                let c = (rho * rho + 8.0 / 9.0) / 2.0;
                let half = (rho * rho - c * c).max(0.0).sqrt();
                ([x0, half * (2.0 * v - 1.0)], 2.0 * s / 3.0 * 2.0 * half)
            })],
        }
    }
}

fn half_disc(r: f64) -> Piece {
    Box::new(move |s, v| {
        let rho = r * s;
        let th = std::f64::consts::PI * (v - 0.5);
        ([rho * th.cos(), rho * th.sin()], r * std::f64::consts::PI * rho)
    })
}

const CHART_PANELS: usize = 8;

fn integrate_pieces(pieces: &[Piece], w: &Weights, f: impl Fn(&[f64; 2]) -> f64 + Sync) -> f64 {
    let (a0, a1) = (w.a(0), w.a(1));
    pieces
        .iter()
        .map(|piece| {
            quad::integrate_box(
                |u| {
                    let (x, jac) = piece(u[0], u[1]);
                    f(&x) * jac * normal_pdf(x[0], a0) * normal_pdf(x[1], a1)
                },
                &[(0.0, 1.0), (0.0, 1.0)],
                CHART_PANELS,
            )
        })
        .sum()
}

/// `∫_{U_0 ∩ O} F dP` over the first two coordinates.
pub fn chart_integral(chart: &ChartChange, w: &Weights, f: impl Fn(&[f64; 2]) -> f64 + Sync) -> f64 {
    integrate_pieces(&chart.original_pieces(), w, f)
}

/// `∫_{ψ(U_0) ∩ H} F dP` over the first two coordinates.
pub fn flat_integral(chart: &ChartChange, w: &Weights, f: impl Fn(&[f64; 2]) -> f64 + Sync) -> f64 {
    integrate_pieces(&chart.flat_pieces(), w, f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartNormReport {
    pub c: f64,
    /// `C⁻¹‖f‖_{W^{1,2}(U_0∩O)}`.
    pub lhs: f64,
    /// `‖f(τ)‖_{W^{1,2}(ψ(U_0)∩H)}`.
    pub mid: f64,
    /// `C‖f‖_{W^{1,2}(U_0∩O)}`.
    pub rhs: f64,
}

impl ChartNormReport {
    pub fn holds(&self) -> bool {
        self.lhs <= self.mid && self.mid <= self.rhs
    }
}

/// `C_1 = δ⁻¹e^{−δ²/a_0²}` and `C_2 = δe^{δ²}`.
pub fn jacobian_bounds(delta: f64, w: &Weights) -> (f64, f64) {
    ((-delta * delta / w.a(0).powi(2)).exp() / delta, delta * (delta * delta).exp())
}

/// `C = max{√(2C_2(1+δ²+δ³/a_0²)), √(2C_2(1+δ/a_0²))}`.
pub fn equivalence_constant(delta: f64, w: &Weights) -> f64 {
    let a2 = w.a(0).powi(2);
    let (_, c2) = jacobian_bounds(delta, w);
    (2.0 * c2 * (1.0 + delta * delta + delta.powi(3) / a2))
        .sqrt()
        .max((2.0 * c2 * (1.0 + delta / a2)).sqrt())
}

/// First-order norms of `f` (a polynomial in `x_0, x_1`) over the chart and
/// of `f∘τ` over its flattened image, each in its own coordinates.
pub fn chart_norm_equivalence(chart: &ChartChange, f: &Poly, w: &Weights) -> Result<ChartNormReport> {
    if f.support_dim() > 2 {
        return Err(Error::InvalidInput("chart norms are computed in the first two coordinates".into()));
    }
    let (a0s, a1s) = (w.a(0).powi(2), w.a(1).powi(2));
    let (d0, d1) = (f.deriv(0), f.deriv(1));
    let original = chart_integral(chart, w, |x| {
        f.eval(x).powi(2) + a0s * d0.eval(x).powi(2) + a1s * d1.eval(x).powi(2)
    })
    .sqrt();
    let flat = flat_integral(chart, w, |xh| {
        let x = chart.tau(xh);
        let dh = chart.grad_h(xh);
        let (fx, g0, g1) = (f.eval(&x), d0.eval(&x), d1.eval(&x));
        fx * fx + a0s * (g0 * dh[0]).powi(2) + a1s * (g1 + g0 * dh[1]).powi(2)
    })
    .sqrt();
    let c = equivalence_constant(chart.delta(w), w);
    Ok(ChartNormReport { c, lhs: original / c, mid: flat, rhs: c * original })
}

/// `‖X_k f − f‖²_{H¹}` for the axis cut-off in `x_0`, by Monte Carlo, one
/// estimate per level.
pub fn cutoff_stability(f: &Poly, cut: &AxisCutoff, levels: &[u32], w: &Weights, stream: &SampleStream, samples: usize) -> Vec<Estimate> {
    let dims = f.support_dim().max(1);
    let sig: Vec<f64> = (0..dims).map(|i| w.a(i)).collect();
    let grads: Vec<Poly> = (0..dims).map(|i| f.deriv(i)).collect();
    levels
        .iter()
        .map(|&k| {
            stream.with_dims(dims).estimate(
                samples,
                |rng, buf| fill_gaussian(rng, &sig, buf),
                |x| {
                    let gap = cut.value(k, x[0]) - 1.0;
                    let fx = f.eval(x);
                    let mut e = gap * gap * fx * fx;
                    for (i, g) in grads.iter().enumerate() {
                        let mut d = gap * g.eval(x);
                        if i == 0 {
                            d += cut.derivative(k, x[0]) * fx;
                        }
                        e += w.a(i).powi(2) * d * d;
                    }
                    e
                },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x(i: usize) -> Poly {
        Poly::var(i)
    }

    #[test]
    fn adjoint_examples_and_duality() {
        let w = Weights::default();
        assert_eq!(adjoint_derivative(&Poly::one(), 2, &w), x(2).scale(1.0 / w.a(2).powi(2)));
        let expect = &(&x(0) * &x(0)).scale(4.0) - &Poly::one();
        assert_eq!(adjoint_derivative(&x(0), 0, &w), expect);
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for n in 0..30 {
            let f = Poly::random(&mut rng, 3, 4, 5);
            let tests: Vec<Poly> = (0..20).map(|_| Poly::random(&mut rng, 3, 3, 4)).collect();
            let scale: f64 = tests.iter().map(|t| integrate_polynomial(&(t * t), &w, 1.0)).sum::<f64>()
                * integrate_polynomial(&(&f * &f), &w, 1.0);
            assert!(weak_derivative_defect(&f, n % 3, &tests, &w) <= 1e-11 * (1.0 + scale.sqrt()));
        }
    }

    #[test]
    fn norm_examples() {
        let w = Weights::default();
        assert!((sobolev_norm(&x(0), 1, &w, Domain::Full) - 0.5f64.sqrt()).abs() < 1e-15);
        for m in 0..4 {
            assert_eq!(sobolev_norm(&Poly::one(), m, &w, Domain::Full), 1.0);
        }
        // x_0 x_1 with a = (1/2, 1/4): ∫f² = a0²a1², first derivatives a0²·a1² + a1²·a0², mixed a0²a1²
        let (a0, a1) = (0.25, 0.0625);
        let n2 = sobolev_norm(&(&x(0) * &x(1)), 2, &w, Domain::Full);
        assert!((n2 * n2 - 4.0 * a0 * a1).abs() < 1e-15);
        let half = sobolev_norm(&x(0), 0, &w, Domain::HalfSpace { coord: 0, offset: 0.0 });
        assert!((half * half - 0.125).abs() < 1e-15);
    }

    #[test]
    fn norms_grow_with_order() {
        let w = Weights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let f = Poly::random(&mut rng, 3, 4, 5);
            let l2 = integrate_polynomial(&(&f * &f), &w, 1.0).sqrt();
            assert!((sobolev_norm(&f, 0, &w, Domain::Full) - l2).abs() <= 1e-14 * l2.max(1.0));
            let norms: Vec<f64> = (0..4).map(|m| sobolev_norm(&f, m, &w, Domain::Full)).collect();
            assert!(norms.windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn translation_identity() {
        let w = Weights::default();
        let (l, r) = translation_identity_check(&x(0), 1.0, &w);
        assert!((l - 1.25).abs() < 1e-14 && (r - 1.25).abs() < 1e-12);
        let (l, r) = translation_identity_check(&Poly::one(), 1.7, &w);
        assert!((l - 1.0).abs() < 1e-15 && (r - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..100 {
            let f = Poly::random(&mut rng, 3, 4, 5);
            let t = rng.random_range(-2.0..2.0);
            let (l, r) = translation_identity_check(&f, t, &w);
            assert!((l - r).abs() <= 1e-12 * l.abs().max(1e-300), "{l} vs {r}");
            if t == 0.0 {
                assert_eq!(l, integrate_polynomial(&(&f * &f), &w, 1.0));
            }
        }
    }

    #[test]
    fn unboundedness_ratios() {
        let w = Weights::default();
        let rows: Vec<UnboundednessRow> = (0..=10).map(|n| translation_unboundedness(n, &w)).collect();
        assert!(rows.iter().all(UnboundednessRow::bracketed), "{rows:?}");
        assert!(rows.windows(2).all(|p| p[1].ratio < p[0].ratio));
        assert!(rows[10].ratio < 1e-6 && rows[10].upper < 5.7e-9);
        assert!((rows[10].upper - (-19f64).exp()).abs() < 1e-20);
    }

    #[test]
    fn sphere_chart_jacobians() {
        let w = Weights::default();
        let chart = ChartChange::Sphere;
        let delta = chart.delta(&w);
        assert_eq!(delta, 8.0);
        let (c1, c2) = jacobian_bounds(delta, &w);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for dims in [2, 4, 6] {
            let pts = chart.sample_points(&mut rng, dims, 3_000);
            chart.verify_condition(delta, &pts, &w).unwrap();
            for p in &pts {
                assert!((chart.jacobian_product(p) - 1.0).abs() < 1e-10);
                let (j, j1) = chart.jacobian_factors(p, &w);
                assert!(c1 <= j && j <= c2 && c1 <= j1 && j1 <= c2);
                // ψ and τ are inverse to each other
                let back = chart.tau(&chart.psi(p));
                assert!(back.iter().zip(p).all(|(a, b)| (a - b).abs() < 1e-12));
            }
        }
        assert!(matches!(chart.verify_condition(0.9, &chart.sample_points(&mut rng, 2, 50), &w), Err(Error::ConditionViolated(_))));
    }

    #[test]
    fn chart_change_of_variables() {
        // ∫_{U_0∩O} F dP = ∫_{ψ(U_0)∩H} F(τ) 𝒥 dP with the density of P∘τ
        let w = Weights::default();
        let chart = ChartChange::Sphere;
        let f = |x: &[f64]| 1.0 + x[0] * x[1] - 0.5 * x[1] * x[1];
        let direct = chart_integral(&chart, &w, |x| f(x));
        let two_a2 = 2.0 * w.a(0).powi(2);
        let pulled = flat_integral(&chart, &w, |xh| {
            let x = chart.tau(xh);
            let h = x[0];
            f(&x) * chart.grad_h(xh)[0] * ((xh[0] * xh[0] - h * h) / two_a2).exp()
        });
        assert!((direct - pulled).abs() < 1e-9 * direct.abs(), "{direct} vs {pulled}");
        // an exponent over a_0² instead of 2a_0² is not the density of P∘τ
        let doubled = flat_integral(&chart, &w, |xh| {
            let x = chart.tau(xh);
            f(&x) * chart.grad_h(xh)[0] * ((xh[0] * xh[0] - x[0] * x[0]) / (0.5 * two_a2)).exp()
        });
        assert!((direct - doubled).abs() > 1e-2 * direct.abs());
        // the area of the region is a second, measure-free check of the pieces
        let area = |pieces: Vec<Piece>| -> f64 {
            pieces.iter().map(|p| quad::integrate_box(|u| p(u[0], u[1]).1, &[(0.0, 1.0), (0.0, 1.0)], 8)).sum()
        };
        let ball_minus_disc = {
            // lens area of B_{1/3}(e_0) outside the unit disc
            let r: f64 = 1.0 / 3.0;
            let d: f64 = 1.0;
            let seg = |r: f64, rr: f64| r * r * ((d * d + r * r - rr * rr) / (2.0 * d * r)).acos();
            let k = 0.5 * ((-d + r + 1.0) * (d + r - 1.0) * (d - r + 1.0) * (d + r + 1.0)).sqrt();
            std::f64::consts::PI * r * r - (seg(r, 1.0) + seg(1.0, r) - k)
        };
        assert!((area(chart.original_pieces()) - ball_minus_disc).abs() < 1e-9);
    }

    #[test]
    fn norm_equivalence() {
        let w = Weights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        for _ in 0..5 {
            let f = Poly::random(&mut rng, 2, 3, 4);
            let id = chart_norm_equivalence(&ChartChange::HalfSpace { r: 0.8 }, &f, &w).unwrap();
            assert!(id.holds());
            assert!((id.mid - id.lhs * id.c).abs() <= 1e-13 * id.mid.max(1e-300));
            let sp = chart_norm_equivalence(&ChartChange::Sphere, &f, &w).unwrap();
            assert!(sp.holds(), "{sp:?}");
        }
        assert!(chart_norm_equivalence(&ChartChange::Sphere, &x(3), &w).is_err());
    }

    #[test]
    fn cutoff_stability_decreases() {
        let w = Weights::default();
        let cut = AxisCutoff::new(w.a(0), 0.5).unwrap();
        let f = &(&x(0) * &x(0)) + &x(1);
        let est = cutoff_stability(&f, &cut, &[0, 1, 2, 3], &w, &SampleStream::new(55, 1), 40_000);
        assert!(est[0].mean > 0.0);
        for p in est.windows(2) {
            assert!(p[1].mean <= p[0].mean + 2.0 * (p[0].std_error + p[1].std_error), "{est:?}");
        }
        assert!(est[3].mean < est[0].mean);
    }
}
