//! Gauss–Green under the product Gaussian at finite truncation:
//! `∫_V D_i f dP = ∫_V x_i f / a_i² dP + ∫_∂V f ν_i dμ_∂V`
//! with `ν` the outward unit normal.

use serde::{Deserialize, Serialize};

use super::graph::{surface_measure, PolyGraph, Region};
use crate::error::{Error, Result};
use crate::numerics::moments::{integrate_polynomial, upper_incomplete_moment};
use crate::numerics::sampling::{fill_gaussian, Estimate, SampleStream, Welford};
use crate::numerics::special::normal_pdf;
use crate::numerics::{Poly, Weights};

/// A function with first partial derivatives.
pub trait TestFunction: Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn partial(&self, i: usize, x: &[f64]) -> f64;
}

impl TestFunction for Poly {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }

    fn partial(&self, i: usize, x: &[f64]) -> f64 {
        self.deriv(i).eval(x)
    }
}

/// `{x_coord > offset}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub coord: usize,
    pub offset: f64,
}

/// `{x_0² + … + x_{dims−1}² < radius²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub dims: usize,
    pub radius: f64,
}

/// The three terms and `lhs − volume − boundary`. Monte Carlo estimates
/// share samples; the residual error is taken from the per-sample residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussGreenReport {
    pub lhs: Estimate,
    pub volume: Estimate,
    pub boundary: Estimate,
    pub residual: Estimate,
}

impl GaussGreenReport {
    pub fn balanced_within(&self, k: f64) -> bool {
        self.residual.within(0.0, k)
    }
}

/// `∫_{x_k > c} p dP_1` from the incomplete moments in `x_k` and the full
/// moments of the rest.
pub fn halfspace_integral(p: &Poly, hs: HalfSpace, w: &Weights) -> f64 {
    p.split_by_var(hs.coord)
        .iter()
        .map(|(&m, q)| upper_incomplete_moment(m, hs.offset, w.a(hs.coord)) * integrate_polynomial(q, w, 1.0))
        .sum()
}

/// Half-space identity with every term from exact moments; the boundary is
/// the hyperplane's surface mass times the conditional mean of `f`.
pub fn gauss_green_halfspace_exact(f: &Poly, w: &Weights, hs: HalfSpace, i: usize) -> Result<GaussGreenReport> {
    let ai2 = w.a(i).powi(2);
    let lhs = halfspace_integral(&f.deriv(i), hs, w);
    let volume = halfspace_integral(&f.mul_var(i).scale(1.0 / ai2), hs, w);
    let boundary = if i == hs.coord {
        let plane = PolyGraph::level(w.clone(), hs.coord, hs.offset);
        let mass = surface_measure(&plane, &Region::full(), &SampleStream::new(0, 1))?.mean;
        // outward normal of {x_k > c} is −e_k
        -mass * integrate_polynomial(&f.substitute(hs.coord, hs.offset), w, 1.0)
    } else {
        0.0
    };
    Ok(GaussGreenReport {
        lhs: Estimate::exact(lhs),
        volume: Estimate::exact(volume),
        boundary: Estimate::exact(boundary),
        residual: Estimate::exact(lhs - volume - boundary),
    })
}

struct Terms {
    lhs: Welford,
    volume: Welford,
    boundary: Welford,
    residual: Welford,
}

fn run_terms<F>(stream: &SampleStream, dims: usize, w: &Weights, n: usize, per_sample: F) -> Result<GaussGreenReport>
where
    F: Fn(&mut [f64]) -> (f64, f64, f64) + Sync,
{
    let sigmas: Vec<f64> = (0..dims).map(|k| w.a(k)).collect();
    let st = stream.with_dims(dims);
    let parts = st.map_chunks(n, |rng, count| {
        let mut x = vec![0.0; dims];
        let mut t = Terms {
            lhs: Welford::default(),
            volume: Welford::default(),
            boundary: Welford::default(),
            residual: Welford::default(),
        };
        for _ in 0..count {
            fill_gaussian(rng, &sigmas, &mut x);
            let (l, v, b) = per_sample(&mut x);
            t.lhs.push(l);
            t.volume.push(v);
            t.boundary.push(b);
            t.residual.push(l - v - b);
        }
        t
    });
    let merge = |g: fn(&Terms) -> Welford| parts.iter().map(g).fold(Welford::default(), |a, b| a.merge(&b));
    let r = GaussGreenReport {
        lhs: merge(|t| t.lhs).estimate(),
        volume: merge(|t| t.volume).estimate(),
        boundary: merge(|t| t.boundary).estimate(),
        residual: merge(|t| t.residual).estimate(),
    };
    if [r.lhs, r.volume, r.boundary].iter().any(|e| !e.mean.is_finite()) {
        return Err(Error::NonFiniteSample);
    }
    Ok(r)
}

fn check_dims(dims: usize, need: usize) -> Result<()> {
    if dims < need {
        return Err(Error::InvalidInput(format!("truncation {dims} is below the {need} coordinates in use")));
    }
    Ok(())
}

/// Half-space identity by Monte Carlo over the first `dims` coordinates. The
/// boundary samples reuse the draw with `x_k` replaced by the offset.
pub fn gauss_green_halfspace_mc<F: TestFunction>(
    f: &F,
    w: &Weights,
    hs: HalfSpace,
    i: usize,
    dims: usize,
    stream: &SampleStream,
    n: usize,
) -> Result<GaussGreenReport> {
    check_dims(dims, hs.coord.max(i) + 1)?;
    let ai2 = w.a(i).powi(2);
    let dens = normal_pdf(hs.offset, w.a(hs.coord));
    run_terms(stream, dims, w, n, |x| {
        let inside = x[hs.coord] > hs.offset;
        let (l, v) = if inside { (f.partial(i, x), x[i] * f.value(x) / ai2) } else { (0.0, 0.0) };
        let b = if i == hs.coord {
            let keep = x[hs.coord];
            x[hs.coord] = hs.offset;
            let fb = f.value(x);
            x[hs.coord] = keep;
            -dens * fb
        } else {
            0.0
        };
        (l, v, b)
    })
}

/// Ball identity by Monte Carlo. The sphere is charted over the coordinates
/// other than `x_i` as the two caps `x_i = ±h`, where the normal weighting
/// and the area factor cancel to `±φ_{a_i}(h)` against the chart measure.
pub fn gauss_green_ball<F: TestFunction>(
    f: &F,
    w: &Weights,
    ball: Ball,
    i: usize,
    dims: usize,
    stream: &SampleStream,
    n: usize,
) -> Result<GaussGreenReport> {
    check_dims(dims, ball.dims.max(i + 1))?;
    let ai2 = w.a(i).powi(2);
    let r2 = ball.radius * ball.radius;
    run_terms(stream, dims, w, n, |x| {
        let norm2: f64 = x[..ball.dims].iter().map(|v| v * v).sum();
        let (l, v) = if norm2 < r2 { (f.partial(i, x), x[i] * f.value(x) / ai2) } else { (0.0, 0.0) };
        let b = if i < ball.dims {
            let rest = norm2 - x[i] * x[i];
            if rest < r2 {
                let h = (r2 - rest).sqrt();
                let keep = x[i];
                x[i] = h;
                let up = f.value(x);
                x[i] = -h;
                let down = f.value(x);
                x[i] = keep;
                (up - down) * normal_pdf(h, w.a(i))
            } else {
                0.0
            }
        } else {
            0.0
        };
        (l, v, b)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad;
    use crate::numerics::MultiIndex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn constant_function_balances() {
        let w = Weights::default();
        let hs = HalfSpace { coord: 0, offset: 0.0 };
        let r = gauss_green_halfspace_exact(&Poly::one(), &w, hs, 0).unwrap();
        let phi0 = 1.0 / (w.a(0) * (2.0 * PI).sqrt());
        assert_eq!(r.lhs.mean, 0.0);
        assert!((r.volume.mean - phi0).abs() < 1e-15);
        assert!((r.boundary.mean + phi0).abs() < 1e-15);
        // volume again by quadrature of x φ(x) / a²
        let a = w.a(0);
        let q = quad::integrate(|x| x * normal_pdf(x, a) / (a * a), 0.0, 14.0 * a, 16);
        assert!((q + r.boundary.mean).abs() < 1e-10);
    }

    #[test]
    fn linear_examples() {
        let w = Weights::default();
        let hs = HalfSpace { coord: 0, offset: 0.0 };
        let r = gauss_green_halfspace_exact(&Poly::var(0), &w, hs, 0).unwrap();
        assert!((r.lhs.mean - 0.5).abs() < 1e-15 && (r.volume.mean - 0.5).abs() < 1e-15);
        assert_eq!(r.boundary.mean, 0.0);
        let r = gauss_green_halfspace_exact(&Poly::var(1), &w, hs, 0).unwrap();
        assert_eq!((r.lhs.mean, r.volume.mean, r.boundary.mean), (0.0, 0.0, 0.0));
    }

    #[test]
    fn exact_route_balances_for_random_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = Weights::default();
        for t in 0..40 {
            let f = Poly::random(&mut rng, 4, 4, 6);
            let hs = HalfSpace { coord: t % 3, offset: 0.1 * (t % 5) as f64 - 0.2 };
            let r = gauss_green_halfspace_exact(&f, &w, hs, t % 4).unwrap();
            let scale = r.lhs.mean.abs() + r.volume.mean.abs() + r.boundary.mean.abs() + 1.0;
            assert!(r.residual.mean.abs() < 1e-12 * scale, "{r:?}");
        }
    }

    #[test]
    fn monte_carlo_routes_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = Weights::default();
        let st = SampleStream::new(9, 1);
        for t in 0..6 {
            let dims = 2 + t;
            let f = Poly::random(&mut rng, dims, 3, 5);
            let i = t % dims;
            let hs = HalfSpace { coord: 0, offset: 0.1 };
            let r = gauss_green_halfspace_mc(&f, &w, hs, i, dims, &st.fork(t as u64), 50_000).unwrap();
            assert!(r.balanced_within(4.0), "{r:?}");
            let exact = gauss_green_halfspace_exact(&f, &w, hs, i).unwrap();
            assert!(r.lhs.within(exact.lhs.mean, 5.0));
            let b = Ball { dims: dims.min(3), radius: 0.6 };
            let r = gauss_green_ball(&f, &w, b, i, dims, &st.fork(100 + t as u64), 50_000).unwrap();
            assert!(r.balanced_within(4.0), "{r:?}");
        }
    }

    #[test]
    fn ball_boundary_term_for_linear_function() {
        // f = x_0 on the disc of radius R in two coordinates: the boundary term
        // is E[1{|x_1|<R} 2h φ_{a0}(h)], checked by 1-D quadrature
        let w = Weights::default();
        let (a0, a1, rad) = (w.a(0), w.a(1), 0.5);
        let oracle = quad::integrate(
            |y| {
                let h = (rad * rad - y * y).sqrt();
                2.0 * h * normal_pdf(h, a0) * normal_pdf(y, a1)
            },
            -rad,
            rad,
            64,
        );
        let f = Poly::monomial(MultiIndex::var(0), 1.0);
        let r = gauss_green_ball(&f, &w, Ball { dims: 2, radius: rad }, 0, 2, &SampleStream::new(2, 2), 200_000).unwrap();
        assert!(r.boundary.within(oracle, 4.0), "{} vs {oracle}", r.boundary.mean);
        assert!(r.balanced_within(4.0));
    }
}
