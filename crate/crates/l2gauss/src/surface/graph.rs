//! Graph surfaces of finite co-dimension, their area factor `n_I`, the
//! complementary density weight `F` and the surface measure in a chart.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::index::IndexSet;
use crate::error::{Error, Result};
use crate::numerics::sampling::{fill_gaussian, Estimate, SampleStream};
use crate::numerics::special::{interval_prob, normal_log_pdf, normal_pdf};
use crate::numerics::{quad, Poly, TruncatedPoint, Weights};

/// Default sample count when the integrand depends on more than three chart
/// coordinates.
pub const MC_SAMPLES: usize = 200_000;

/// Half-width of the quadrature box, in standard deviations.
const BOX_SIGMAS: f64 = 14.0;

/// An axis-aligned rectangle in chart coordinates. Unlisted coordinates are
/// unrestricted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub sides: Vec<(usize, f64, f64)>,
}

impl Region {
    pub fn full() -> Self {
        Region::default()
    }

    pub fn side(mut self, coord: usize, lo: f64, hi: f64) -> Self {
        self.sides.push((coord, lo, hi));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.sides.iter().any(|&(_, lo, hi)| hi <= lo)
    }

    fn bounds(&self, coord: usize) -> (f64, f64) {
        self.sides
            .iter()
            .filter(|s| s.0 == coord)
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), s| (lo.max(s.1), hi.min(s.2)))
    }
}

/// A surface given in one chart. Points are dense coordinate vectors; only
/// the chart coordinates in [`active_coords`](Self::active_coords) are read.
pub trait ChartedSurface: Sync {
    fn is_chart_coord(&self, i: usize) -> bool;
    /// Chart coordinates on which `n_I·F` depends, sorted.
    fn active_coords(&self) -> Vec<usize>;
    /// Standard deviation of chart coordinate `i` under `μ_I`.
    fn chart_sigma(&self, i: usize) -> f64;
    fn n_factor(&self, x: &[f64]) -> f64;
    /// `ln F` of the complementary coordinates at the surface point over `x`.
    fn log_f_weight(&self, x: &[f64]) -> Result<f64>;
}

/// How coordinates beyond a truncated point are filled when `F` is taken
/// over an infinite set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// Missing coordinates are 0.
    Zero,
    /// Missing coordinates sit at the point where the density equals 1.
    Balanced,
}

/// The coordinate `x > 0` with `φ_a(x) = 1`; requires `√(2π)·a < 1`.
pub fn balanced_coordinate(a: f64) -> Result<f64> {
    let l = -(a * (2.0 * PI).sqrt()).ln();
    if l < 0.0 {
        return Err(Error::InvalidInput(format!("weight {a} is too large for a unit density point")));
    }
    Ok(a * (2.0 * l).sqrt())
}

/// `F_I(x) = ∏_{i∈I} φ_{a_i}(x_i)`.
///
/// For infinite `I` the factors beyond `x.len()` are taken from `tail`: with
/// zeros the log-tail `Σ ln(1/(√(2π)a_i))` diverges for summable weights,
/// while balanced coordinates make every tail factor exactly 1.
pub fn f_weight(set: &IndexSet, x: &TruncatedPoint, w: &Weights, tail: TailMode) -> Result<f64> {
    let n = x.len();
    let mut log = 0.0;
    for i in set.below(n) {
        log += normal_log_pdf(x.get(i), w.a(i));
    }
    if !set.is_finite() {
        match tail {
            TailMode::Zero => return Err(Error::TailDivergent),
            TailMode::Balanced => {
                // the balanced point must exist for every remaining index
                let limit = n.max(w.len_explicit()) + 1;
                for i in (n..limit).filter(|&i| set.contains(i)) {
                    balanced_coordinate(w.a(i))?;
                }
            }
        }
    } else {
        for i in set.below(set.horizon()).into_iter().filter(|&i| i >= n) {
            log += normal_log_pdf(0.0, w.a(i));
        }
    }
    Ok(log.exp())
}

/// `√(Σ det(M)²)` over all square minors of `jac`, the empty minor included.
pub fn minor_norm(jac: &DMatrix<f64>) -> f64 {
    let (r, c) = jac.shape();
    let mut total = 1.0;
    for k in 1..=r.min(c) {
        for rows in subsets(r, k) {
            for cols in subsets(c, k) {
                let m = DMatrix::from_fn(k, k, |i, j| jac[(rows[i], cols[j])]);
                total += m.determinant().powi(2);
            }
        }
    }
    total.sqrt()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `x_j = g_j(x_I)` for the finitely many dependent coordinates `j`; every
/// other coordinate is a chart coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyGraph {
    pub weights: Weights,
    pub graph: BTreeMap<usize, Poly>,
}

impl PolyGraph {
    pub fn new(weights: Weights, graph: BTreeMap<usize, Poly>) -> Result<Self> {
        for (j, g) in &graph {
            if let Some(k) = g.support().into_iter().find(|k| graph.contains_key(k)) {
                return Err(Error::InvalidInput(format!("graph of x_{j} depends on dependent coordinate x_{k}")));
            }
        }
        Ok(PolyGraph { weights, graph })
    }

    /// The hyperplane `{x_k = c}`.
    pub fn level(weights: Weights, k: usize, c: f64) -> Self {
        PolyGraph { weights, graph: BTreeMap::from([(k, Poly::constant(c))]) }
    }

    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let active = self.active_coords();
        let rows: Vec<&Poly> = self.graph.values().collect();
        DMatrix::from_fn(rows.len(), active.len(), |i, j| rows[i].deriv(active[j]).eval(x))
    }

    /// The surface point over chart point `x`.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len().max(self.graph.keys().last().map_or(0, |k| k + 1));
        let mut out = x.to_vec();
        out.resize(n, 0.0);
        for (&j, g) in &self.graph {
            out[j] = g.eval(x);
        }
        out
    }
}

impl ChartedSurface for PolyGraph {
    fn is_chart_coord(&self, i: usize) -> bool {
        !self.graph.contains_key(&i)
    }

    fn active_coords(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.graph.values().flat_map(|g| g.support()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    fn chart_sigma(&self, i: usize) -> f64 {
        self.weights.a(i)
    }

    fn n_factor(&self, x: &[f64]) -> f64 {
        minor_norm(&self.jacobian(x))
    }

    fn log_f_weight(&self, x: &[f64]) -> Result<f64> {
        Ok(self.graph.iter().map(|(&j, g)| normal_log_pdf(g.eval(x), self.weights.a(j))).sum())
    }
}

/// `Σ_{j odd} term(j)`, stopped once beyond the explicit weights the terms
/// stay below `1e−300` or underflow.
fn odd_sum(w: &Weights, skip: Option<usize>, term: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut j = 1;
    while j < 4000 {
        if Some(j) != skip {
            let t = term(j);
            acc += t;
            if j > w.len_explicit() && t.abs() <= 1e-300_f64.max(acc.abs() * 1e-18) {
                break;
            }
        }
        j += 2;
    }
    acc
}

/// The affine line bundle `S = {x_I + x⁰_J + x_0·Δ_J}` with `I` the even and
/// `J` the odd coordinates, `x⁰_j` balanced and `Δ_j = κ·a_j³`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineBundle {
    pub weights: Weights,
    pub kappa: f64,
}

impl LineBundle {
    pub fn new(weights: Weights, kappa: f64) -> Result<Self> {
        if !(kappa != 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidInput("κ must be finite and nonzero".into()));
        }
        let b = LineBundle { weights, kappa };
        // every odd coordinate needs a balanced base point
        let limit = b.weights.len_explicit() + 2;
        for j in (1..limit).step_by(2) {
            balanced_coordinate(b.weights.a(j))?;
        }
        Ok(b)
    }

    /// The bundle with `‖Δ_J‖² = target`.
    pub fn with_delta_norm_sq(weights: Weights, target: f64) -> Result<Self> {
        let s6 = odd_sum(&weights, None, |j| weights.a(j).powi(6));
        LineBundle::new(weights, (target / s6).sqrt())
    }

    pub fn base(&self, j: usize) -> f64 {
        balanced_coordinate(self.weights.a(j)).expect("checked at construction")
    }

    pub fn delta(&self, j: usize) -> f64 {
        self.kappa * self.weights.a(j).powi(3)
    }

    pub fn delta_norm_sq(&self) -> f64 {
        odd_sum(&self.weights, None, |j| self.delta(j).powi(2))
    }

    /// `n_I = √(1 + ‖Δ_J‖²)`.
    pub fn n_even(&self) -> f64 {
        (1.0 + self.delta_norm_sq()).sqrt()
    }

    /// `(A, B)` with `F_J = exp(−A x_0 − B x_0²/2)` along the surface.
    pub fn exponent_coefficients(&self) -> (f64, f64) {
        let w = &self.weights;
        let a = odd_sum(w, None, |j| self.base(j) * self.delta(j) / w.a(j).powi(2));
        let b = odd_sum(w, None, |j| (self.delta(j) / w.a(j)).powi(2));
        (a, b)
    }

    pub fn chart_even(&self) -> LineBundleChartA {
        let (a, b) = self.exponent_coefficients();
        LineBundleChartA { a0: self.weights.a(0), n: self.n_even(), lin: a, quad: b }
    }

    /// The chart on `(I ∖ {0}) ∪ {pivot}` for an odd `pivot`.
    pub fn chart_pivot(&self, pivot: usize) -> Result<LineBundleChartB> {
        if pivot.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("pivot {pivot} must be an odd coordinate")));
        }
        Ok(LineBundleChartB { bundle: self.clone(), pivot })
    }
}

/// The line bundle over the even coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBundleChartA {
    a0: f64,
    n: f64,
    lin: f64,
    quad: f64,
}

impl ChartedSurface for LineBundleChartA {
    fn is_chart_coord(&self, i: usize) -> bool {
        i.is_multiple_of(2)
    }

    fn active_coords(&self) -> Vec<usize> {
        vec![0]
    }

    fn chart_sigma(&self, i: usize) -> f64 {
        if i == 0 {
            self.a0
        } else {
            // only coordinate 0 is read; the others integrate to 1
            1.0
        }
    }

    fn n_factor(&self, _x: &[f64]) -> f64 {
        self.n
    }

    fn log_f_weight(&self, x: &[f64]) -> Result<f64> {
        Ok(-self.lin * x[0] - 0.5 * self.quad * x[0] * x[0])
    }
}

/// The line bundle over `(I ∖ {0}) ∪ {pivot}`; `x_0` is recovered from the
/// pivot coordinate and `F` is summed term by term over `{0} ∪ J ∖ {pivot}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LineBundleChartB {
    bundle: LineBundle,
    pivot: usize,
}

impl LineBundleChartB {
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    fn x0(&self, xp: f64) -> f64 {
        (xp - self.bundle.base(self.pivot)) / self.bundle.delta(self.pivot)
    }

    /// The pivot interval covering `x_0 ∈ [lo, hi]`.
    pub fn pivot_interval(&self, lo: f64, hi: f64) -> (f64, f64) {
        let (b, d) = (self.bundle.base(self.pivot), self.bundle.delta(self.pivot));
        let (u, v) = (b + d * lo, b + d * hi);
        (u.min(v), u.max(v))
    }
}

impl ChartedSurface for LineBundleChartB {
    fn is_chart_coord(&self, i: usize) -> bool {
        i == self.pivot || (i.is_multiple_of(2) && i != 0)
    }

    fn active_coords(&self) -> Vec<usize> {
        vec![self.pivot]
    }

    fn chart_sigma(&self, i: usize) -> f64 {
        if i == self.pivot {
            self.bundle.weights.a(i)
        } else {
            1.0
        }
    }

    fn n_factor(&self, _x: &[f64]) -> f64 {
        let d = &self.bundle;
        (1.0 + odd_sum(&d.weights, None, |j| d.delta(j).powi(2))).sqrt() / d.delta(self.pivot).abs()
    }

    fn log_f_weight(&self, x: &[f64]) -> Result<f64> {
        let d = &self.bundle;
        let t = self.x0(x[self.pivot]);
        let rest = odd_sum(&d.weights, Some(self.pivot), |k| {
            let (b, dk, a) = (d.base(k), d.delta(k), d.weights.a(k));
            // ln φ_a(b + tΔ) − ln φ_a(b), and ln φ_a(b) = 0
            -(2.0 * b * t * dk + t * t * dk * dk) / (2.0 * a * a)
        });
        Ok(normal_log_pdf(t, d.weights.a(0)) + rest)
    }
}

fn quad_panels(active: usize) -> usize {
    match active {
        0 | 1 => 16,
        2 => 4,
        _ => 2,
    }
}

/// `∫_region n_I·F dμ_I` in the chart of `s`.
///
/// Restricted chart coordinates that the integrand ignores contribute exact
/// interval probabilities. Up to three active coordinates are integrated by
/// tensor Gauss–Legendre over the region clipped to `±14σ`; more use
/// `MC_SAMPLES` draws from `stream`.
pub fn surface_measure<S: ChartedSurface + ?Sized>(s: &S, region: &Region, stream: &SampleStream) -> Result<Estimate> {
    surface_measure_with(s, region, stream, MC_SAMPLES)
}

pub fn surface_measure_with<S: ChartedSurface + ?Sized>(
    s: &S,
    region: &Region,
    stream: &SampleStream,
    samples: usize,
) -> Result<Estimate> {
    if region.sides.iter().any(|&(c, _, _)| !s.is_chart_coord(c)) {
        return Err(Error::ChartMismatch);
    }
    if region.is_empty() {
        return Ok(Estimate::exact(0.0));
    }
    let active = s.active_coords();
    let mut outside = 1.0;
    let mut seen = Vec::new();
    for &(c, _, _) in &region.sides {
        if !active.contains(&c) && !seen.contains(&c) {
            seen.push(c);
            let (lo, hi) = region.bounds(c);
            outside *= interval_prob(lo, hi, s.chart_sigma(c));
        }
    }
    let dim = active.last().map_or(0, |m| m + 1);
    let integrand = |x: &[f64]| -> Result<f64> {
        let v = s.n_factor(x) * s.log_f_weight(x)?.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::LocalFinitenessViolated)
        }
    };
    let inner = if active.len() <= 3 {
        let bounds: Vec<(f64, f64)> = active
            .iter()
            .map(|&c| {
                let (lo, hi) = region.bounds(c);
                let r = BOX_SIGMAS * s.chart_sigma(c);
                (lo.max(-r), hi.min(r).max(lo.max(-r)))
            })
            .collect();
        let failed = std::sync::atomic::AtomicBool::new(false);
        let v = quad::integrate_box(
            |u| {
                let mut x = vec![0.0; dim];
                let mut dens = 1.0;
                for (k, &c) in active.iter().enumerate() {
                    x[c] = u[k];
                    dens *= normal_pdf(u[k], s.chart_sigma(c));
                }
                match integrand(&x) {
                    Ok(v) => v * dens,
                    Err(e) => {
                        if matches!(e, Error::LocalFinitenessViolated | Error::TailDivergent) {
                            failed.store(true, std::sync::atomic::Ordering::Relaxed);
                        }
                        f64::NAN
                    }
                }
            },
            &bounds,
            quad_panels(active.len()),
        );
        if failed.into_inner() || !v.is_finite() {
            return Err(Error::LocalFinitenessViolated);
        }
        Estimate::exact(v)
    } else {
        let sigmas: Vec<f64> = active.iter().map(|&c| s.chart_sigma(c)).collect();
        let st = stream.with_dims(active.len());
        let bad = std::sync::atomic::AtomicBool::new(false);
        let e = st.estimate(
            samples,
            |rng, buf| fill_gaussian(rng, &sigmas, buf),
            |u| {
                let mut x = vec![0.0; dim];
                for (k, &c) in active.iter().enumerate() {
                    x[c] = u[k];
                }
                if !region.contains_active(&x, &active) {
                    return 0.0;
                }
                integrand(&x).unwrap_or_else(|_| {
                    bad.store(true, std::sync::atomic::Ordering::Relaxed);
                    0.0
                })
            },
        );
        if bad.into_inner() {
            return Err(Error::LocalFinitenessViolated);
        }
        e
    };
    Ok(Estimate { mean: inner.mean * outside, std_error: inner.std_error * outside, n: inner.n })
}

impl Region {
    fn contains_active(&self, x: &[f64], active: &[usize]) -> bool {
        self.sides.iter().filter(|s| active.contains(&s.0)).all(|&(c, lo, hi)| x[c] >= lo && x[c] <= hi)
    }
}

/// The measure of a region of the line bundle, evaluated in the even chart
/// and in the pivot chart. The region is given in even-chart coordinates; a
/// side on an odd coordinate is not shared by both charts.
pub fn chart_consistency(
    bundle: &LineBundle,
    pivot: usize,
    region: &Region,
    stream: &SampleStream,
) -> Result<(Estimate, Estimate)> {
    if region.sides.iter().any(|&(c, _, _)| c % 2 == 1) {
        return Err(Error::ChartMismatch);
    }
    let a = bundle.chart_even();
    let b = bundle.chart_pivot(pivot)?;
    let mapped = Region {
        sides: region
            .sides
            .iter()
            .map(|&(c, lo, hi)| {
                if c == 0 {
                    let (u, v) = if hi <= lo { (0.0, 0.0) } else { b.pivot_interval(lo, hi) };
                    (pivot, u, v)
                } else {
                    (c, lo, hi)
                }
            })
            .collect(),
    };
    Ok((surface_measure(&a, region, stream)?, surface_measure(&b, &mapped, stream)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::index::FinitePerturbationMap;
    use proptest::prelude::*;

    fn stream() -> SampleStream {
        SampleStream::new(3, 1)
    }

    #[test]
    fn area_factor_examples() {
        let w = Weights::default();
        let flat = PolyGraph::level(w.clone(), 0, 0.7);
        assert_eq!(flat.n_factor(&[]), 1.0);
        let line = PolyGraph::new(w, BTreeMap::from([(1, Poly::var(0).scale(3.0))])).unwrap();
        assert!((line.n_factor(&[0.3]) - 10f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn minor_norm_matches_gram_determinant() {
        let j = DMatrix::from_row_slice(2, 3, &[1.0, -0.5, 2.0, 0.3, 0.7, -1.1]);
        let gram = DMatrix::<f64>::identity(3, 3) + j.transpose() * &j;
        assert!((minor_norm(&j) - gram.determinant().sqrt()).abs() < 1e-13);
    }

    #[test]
    fn density_weight_examples() {
        let w = Weights::default();
        let one = IndexSet::finite([0]);
        let v = f_weight(&one, &TruncatedPoint::zeros(1), &w, TailMode::Zero).unwrap();
        assert!((v - 1.0 / (2.0 * PI * 0.25).sqrt()).abs() < 1e-15);
        let x = TruncatedPoint::new(vec![0.3]);
        let r = f_weight(&one, &x, &w, TailMode::Zero).unwrap() / v;
        assert!((r - (-0.09_f64 / (2.0 * 0.25)).exp()).abs() < 1e-15);
        let tail = IndexSet::cofinite(0..9);
        assert_eq!(f_weight(&tail, &TruncatedPoint::zeros(4), &w, TailMode::Zero), Err(Error::TailDivergent));
        assert_eq!(f_weight(&tail, &TruncatedPoint::zeros(4), &w, TailMode::Balanced).unwrap(), 1.0);
        let b = balanced_coordinate(w.a(9)).unwrap();
        assert!((normal_pdf(b, w.a(9)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyperplane_mass() {
        let s = PolyGraph::level(Weights::default(), 0, 0.0);
        let m = surface_measure(&s, &Region::full(), &stream()).unwrap();
        assert!((m.mean - 1.0 / (0.5 * (2.0 * PI).sqrt())).abs() < 1e-15);
        let empty = Region::full().side(1, 0.2, 0.2);
        assert_eq!(surface_measure(&s, &empty, &stream()).unwrap().mean, 0.0);
        assert_eq!(surface_measure(&s, &Region::full().side(0, 0.0, 1.0), &stream()), Err(Error::ChartMismatch));
    }

    #[test]
    fn sloped_line_mass_against_closed_form() {
        // x_1 = 3x_0: mass √10 ∫ φ_{a1}(3x) φ_{a0}(x) dx = √10 / √(2π(a1² + 9a0²))
        let w = Weights::default();
        let line = PolyGraph::new(w.clone(), BTreeMap::from([(1, Poly::var(0).scale(3.0))])).unwrap();
        let m = surface_measure(&line, &Region::full(), &stream()).unwrap().mean;
        let (a0, a1) = (w.a(0), w.a(1));
        let exact = 10f64.sqrt() / (2.0 * PI * (a1 * a1 + 9.0 * a0 * a0)).sqrt();
        assert!((m - exact).abs() < 1e-12, "{m} vs {exact}");
    }

    #[test]
    fn line_bundle_closed_forms() {
        let lb = LineBundle::with_delta_norm_sq(Weights::default(), 3.0).unwrap();
        assert!((lb.n_even() - 2.0).abs() < 1e-12);
        let (a, b) = lb.exponent_coefficients();
        let a0 = lb.weights.a(0);
        let exact = lb.n_even() * (a * a * a0 * a0 / (2.0 * (1.0 + b * a0 * a0))).exp() / (1.0 + b * a0 * a0).sqrt();
        let m = surface_measure(&lb.chart_even(), &Region::full(), &stream()).unwrap().mean;
        assert!((m - exact).abs() < 1e-10 * exact, "{m} vs {exact}");
    }

    #[test]
    fn charts_agree_on_line_bundle() {
        let lb = LineBundle::with_delta_norm_sq(Weights::default(), 3.0).unwrap();
        for (lo, hi) in [(-0.4, 0.3), (0.0, 1.0), (-2.0, 2.0)] {
            let region = Region::full().side(0, lo, hi).side(2, -0.1, 0.2);
            let (x, y) = chart_consistency(&lb, 1, &region, &stream()).unwrap();
            assert!((x.mean - y.mean).abs() <= 1e-6 * x.mean, "{} vs {}", x.mean, y.mean);
        }
        let (x, y) = chart_consistency(&lb, 3, &Region::full().side(0, 0.5, 0.5), &stream()).unwrap();
        assert_eq!((x.mean, y.mean), (0.0, 0.0));
        assert_eq!(chart_consistency(&lb, 1, &Region::full().side(3, 0.0, 1.0), &stream()), Err(Error::ChartMismatch));
    }

    #[test]
    fn chart_change_scales_area_factor() {
        let lb = LineBundle::with_delta_norm_sq(Weights::default(), 3.0).unwrap();
        for pivot in [1, 3, 5] {
            let b = lb.chart_pivot(pivot).unwrap();
            let d = lb.delta(pivot);
            // chart change sends e_0 to Δ_pivot·e_pivot and fixes the rest
            let t = FinitePerturbationMap::from_columns(
                IndexSet::progression(0, 2),
                IndexSet::progression(2, 2).with_added(pivot),
                BTreeMap::from([(0, BTreeMap::from([(pivot, d)]))]),
            )
            .unwrap();
            let det = t.det().unwrap();
            assert!((det.abs() - d.abs()).abs() < 1e-15);
            assert!((lb.n_even() - det.abs() * b.n_factor(&[])).abs() < 1e-8);
            let back = t.inverse().unwrap();
            assert!((back.det().unwrap() * det - 1.0).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn measure_is_additive_over_split_rectangles(lo in -1.0f64..0.0, mid in 0.0f64..0.5, hi in 0.5f64..1.5, c in -0.5f64..0.5) {
            let w = Weights::default();
            let g = PolyGraph::new(w, BTreeMap::from([(2, &Poly::var(0).scale(c) + &(&Poly::var(1) * &Poly::var(1)))])).unwrap();
            let s = stream();
            let whole = surface_measure(&g, &Region::full().side(0, lo, hi), &s).unwrap().mean;
            let left = surface_measure(&g, &Region::full().side(0, lo, mid), &s).unwrap().mean;
            let right = surface_measure(&g, &Region::full().side(0, mid, hi), &s).unwrap().mean;
            prop_assert!((whole - left - right).abs() < 1e-9 * whole.abs().max(1.0));
        }

        #[test]
        fn area_factor_is_at_least_one(c0 in -3.0f64..3.0, c1 in -3.0f64..3.0, x in -1.0f64..1.0) {
            let g = PolyGraph::new(
                Weights::default(),
                BTreeMap::from([(2, &Poly::var(0).scale(c0) + &(&Poly::var(1) * &Poly::var(0)).scale(c1)), (3, Poly::var(1).scale(c1))]),
            )
            .unwrap();
            let j = g.jacobian(&[x, 0.5]);
            let gram = DMatrix::<f64>::identity(2, 2) + j.transpose() * &j;
            let n = g.n_factor(&[x, 0.5]);
            prop_assert!(n >= 1.0);
            prop_assert!((n - gram.determinant().sqrt()).abs() < 1e-10 * n);
        }
    }
}
