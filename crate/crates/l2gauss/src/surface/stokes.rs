//! Stokes-type identity for parametrized patches in a truncation of at most
//! four coordinates:
//! `−Σ_i ∫_S δ_i f · n_{(i,I0)} dμ_S = ∫_∂S f · n_{I0} dμ_∂S`,
//! with `δ_i f = D_i f − x_i f / a_i²`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gauss_green::TestFunction;
use crate::error::{Error, Result};
use crate::numerics::special::normal_pdf;
use crate::numerics::{quad, Poly, Weights};

pub const MAX_CODIM: usize = 2;
pub const MAX_DIMS: usize = 4;

/// A smooth map from a parameter box into the first `ambient_dim`
/// coordinates.
pub trait Parametrization: Sync {
    fn ambient_dim(&self) -> usize;
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn point(&self, u: &[f64]) -> Vec<f64>;
    /// `∂Φ_r/∂u_c`, shape `ambient_dim × bounds().len()`.
    fn jacobian(&self, u: &[f64]) -> DMatrix<f64>;
}

/// A graph over a box in the `base` coordinates; every other coordinate
/// below `dims` is given by a polynomial in the base coordinates (0 when
/// absent).
#[derive(Clone, Debug, PartialEq)]
pub struct GraphParam {
    pub dims: usize,
    pub base: Vec<(usize, f64, f64)>,
    pub graph: Vec<(usize, Poly)>,
}

impl Parametrization for GraphParam {
    fn ambient_dim(&self) -> usize {
        self.dims
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        self.base.iter().map(|&(_, lo, hi)| (lo, hi)).collect()
    }

    fn point(&self, u: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dims];
        for (&(c, _, _), &v) in self.base.iter().zip(u) {
            x[c] = v;
        }
        for (j, g) in &self.graph {
            x[*j] = g.eval(&x);
        }
        x
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let x = self.point(u);
        let mut m = DMatrix::zeros(self.dims, self.base.len());
        for (l, &(c, _, _)) in self.base.iter().enumerate() {
            m[(c, l)] = 1.0;
            for (j, g) in &self.graph {
                m[(*j, l)] = g.deriv(c).eval(&x);
            }
        }
        m
    }
}

/// The disc of radius `radius` in `(x_0, x_1)` in polar coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarDisk {
    pub radius: f64,
}

impl Parametrization for PolarDisk {
    fn ambient_dim(&self) -> usize {
        2
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, self.radius), (0.0, 2.0 * PI)]
    }

    fn point(&self, u: &[f64]) -> Vec<f64> {
        vec![u[0] * u[1].cos(), u[0] * u[1].sin()]
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let (s, c) = u[1].sin_cos();
        DMatrix::from_row_slice(2, 2, &[c, -u[0] * s, s, u[0] * c])
    }
}

/// The cap `θ ≤ theta_max` of the sphere of radius `radius` in
/// `(x_0, x_1, x_2)`; `theta_max = π` gives the closed sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalCap {
    pub radius: f64,
    pub theta_max: f64,
}

impl Parametrization for SphericalCap {
    fn ambient_dim(&self) -> usize {
        3
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, self.theta_max), (0.0, 2.0 * PI)]
    }

    fn point(&self, u: &[f64]) -> Vec<f64> {
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        vec![self.radius * st * cp, self.radius * st * sp, self.radius * ct]
    }

    fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        let r = self.radius;
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        DMatrix::from_row_slice(3, 2, &[r * ct * cp, -r * st * sp, r * ct * sp, r * st * cp, -r * st, 0.0])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StokesReport {
    pub surface_side: f64,
    pub boundary_side: f64,
    pub residual: f64,
    pub relative: f64,
}

fn minor(j: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| j[(rows[r], cols[c])]).determinant()
}

fn panels(k: usize) -> usize {
    match k {
        0 | 1 => 16,
        2 => 6,
        3 => 2,
        _ => 1,
    }
}

/// Both sides of the identity by Gauss–Legendre quadrature in parameter
/// space. The boundary is the oriented boundary of the parameter box taken
/// with the inward-first sign, which is what the leading minus on the
/// surface side pairs with.
pub fn stokes_check<P: Parametrization, F: TestFunction>(
    s: &P,
    f: &F,
    i0: &[usize],
    w: &Weights,
) -> Result<StokesReport> {
    let d = s.ambient_dim();
    let bounds = s.bounds();
    let k = bounds.len();
    if d > MAX_DIMS {
        return Err(Error::InvalidInput(format!("truncation {d} exceeds {MAX_DIMS} coordinates")));
    }
    if k > d || d - k > MAX_CODIM {
        return Err(Error::UnsupportedCodimension { codim: d.saturating_sub(k), limit: MAX_CODIM });
    }
    if k == 0 || i0.len() != k - 1 {
        return Err(Error::InvalidInput(format!("need {} indices in I0 for a {k}-dimensional patch", k.saturating_sub(1))));
    }
    let mut seen = i0.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != i0.len() || seen.last().is_some_and(|&m| m >= d) {
        return Err(Error::InvalidInput("I0 must hold distinct coordinates of the truncation".into()));
    }
    let sig: Vec<f64> = (0..d).map(|j| w.a(j)).collect();
    let rho = |x: &[f64]| x.iter().zip(&sig).map(|(&v, &a)| normal_pdf(v, a)).product::<f64>();
    let all_cols: Vec<usize> = (0..k).collect();

    let surface = quad::integrate_box(
        |u| {
            let x = s.point(u);
            let jac = s.jacobian(u);
            let weight = rho(&x);
            let fx = f.value(&x);
            let mut acc = 0.0;
            for i in (0..d).filter(|i| !i0.contains(i)) {
                let rows: Vec<usize> = std::iter::once(i).chain(i0.iter().copied()).collect();
                let delta = f.partial(i, &x) - x[i] * fx / (sig[i] * sig[i]);
                acc += delta * minor(&jac, &rows, &all_cols);
            }
            -acc * weight
        },
        &bounds,
        panels(k),
    );

    let mut boundary = 0.0;
    for l in 0..k {
        let rest: Vec<(f64, f64)> = bounds.iter().enumerate().filter(|&(c, _)| c != l).map(|(_, &b)| b).collect();
        let cols: Vec<usize> = (0..k).filter(|&c| c != l).collect();
        let parity = if l % 2 == 0 { 1.0 } else { -1.0 };
        for (value, sign) in [(bounds[l].1, parity), (bounds[l].0, -parity)] {
            let face = quad::integrate_box(
                |v| {
                    let mut u = Vec::with_capacity(k);
                    u.extend_from_slice(&v[..l]);
                    u.push(value);
                    u.extend_from_slice(&v[l..]);
                    let x = s.point(&u);
                    f.value(&x) * rho(&x) * minor(&s.jacobian(&u), i0, &cols)
                },
                &rest,
                panels(k - 1),
            );
            boundary -= sign * face;
        }
    }

    let residual = (surface - boundary).abs();
    let scale = surface.abs().max(boundary.abs());
    let relative = if scale > 0.0 { residual / scale } else { 0.0 };
    Ok(StokesReport { surface_side: surface, boundary_side: boundary, residual, relative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn radial(r2: f64) -> Poly {
        // 1 + c·|x|² + |x|⁴ in three coordinates
        let s: Poly = (0..3).map(|i| &Poly::var(i) * &Poly::var(i)).fold(Poly::zero(), |a, b| &a + &b);
        &(&Poly::one() + &s.scale(r2)) + &(&s * &s)
    }

    #[test]
    fn zero_function_is_trivial() {
        let r = stokes_check(&PolarDisk { radius: 0.5 }, &Poly::zero(), &[1], &Weights::default()).unwrap();
        assert_eq!((r.surface_side, r.boundary_side), (0.0, 0.0));
    }

    #[test]
    fn half_plane_graph() {
        let w = Weights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (a0, a1) = (w.a(0), w.a(1));
        let p = GraphParam { dims: 2, base: vec![(0, -14.0 * a0, 14.0 * a0), (1, 0.1, 14.0 * a1)], graph: vec![] };
        for _ in 0..10 {
            let f = Poly::random(&mut rng, 2, 3, 5);
            for i0 in [[0], [1]] {
                let r = stokes_check(&p, &f, &i0, &w).unwrap();
                assert!(r.relative < 1e-3 || r.residual < 1e-12, "{r:?}");
            }
        }
    }

    #[test]
    fn half_plane_boundary_matches_closed_form() {
        // f = 1, I0 = (0): only the face x_1 = c carries weight; the
        // surface side is −∫_{x1>c} (−x_1/a_1²)·(det[e_1, e_0] = −1) ρ
        let w = Weights::default();
        let (a0, a1, c) = (w.a(0), w.a(1), 0.05);
        let p = GraphParam { dims: 2, base: vec![(0, -14.0 * a0, 14.0 * a0), (1, c, 14.0 * a1)], graph: vec![] };
        let r = stokes_check(&p, &Poly::one(), &[0], &w).unwrap();
        let exact = -normal_pdf(c, a1);
        assert!((r.surface_side - exact).abs() < 1e-10, "{r:?}");
        assert!((r.boundary_side - exact).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn disc_and_sphere() {
        let w = Weights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let f = Poly::random(&mut rng, 3, 3, 5);
            let r = stokes_check(&PolarDisk { radius: 0.4 }, &f, &[0], &w).unwrap();
            assert!(r.relative < 1e-3 || r.residual < 1e-12, "{r:?}");
            let r = stokes_check(&SphericalCap { radius: 0.3, theta_max: 1.1 }, &f, &[2], &w).unwrap();
            assert!(r.relative < 1e-3 || r.residual < 1e-12, "{r:?}");
        }
        let closed = SphericalCap { radius: 0.3, theta_max: PI };
        let r = stokes_check(&closed, &radial(-0.5), &[0], &w).unwrap();
        assert!(r.boundary_side.abs() < 1e-12 && r.surface_side.abs() < 1e-3 * 0.3, "{r:?}");
    }

    #[test]
    fn curved_graph_in_three_coordinates() {
        let w = Weights::default();
        let g = &(&Poly::var(0) * &Poly::var(1)) + &Poly::var(0).scale(0.5);
        let p = GraphParam { dims: 3, base: vec![(0, -0.3, 0.4), (1, -0.2, 0.25)], graph: vec![(2, g)] };
        let f = &Poly::var(2) + &(&Poly::var(0) * &Poly::var(1));
        for i0 in [[0], [1], [2]] {
            let r = stokes_check(&p, &f, &i0, &w).unwrap();
            assert!(r.relative < 1e-3, "{r:?}");
        }
    }

    #[test]
    fn codimension_limit() {
        let p = GraphParam { dims: 4, base: vec![(0, 0.0, 1.0)], graph: vec![] };
        assert_eq!(
            stokes_check(&p, &Poly::one(), &[], &Weights::default()),
            Err(Error::UnsupportedCodimension { codim: 3, limit: 2 })
        );
    }
}
