//! The ∂̄ complex on ℓ² under `P_r` with exact complex polynomial
//! coefficients: `S`, `T`, the adjoint `T*`, weighted norms, the basic
//! estimate, a least-norm solver, the multiplier identity and dimension
//! reduction.

pub mod form;
pub mod multiplier;
pub mod reduce;
pub mod solve;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::cpoly::CPoly;
use crate::numerics::Weights;

pub use form::{epsilon, form_inner, form_norm, form_norm_sq, permutation_sign, Form, FormKey, FormSpec};
pub use multiplier::{multiplier_identity_check, MultiplierReport};
pub use reduce::{mollify, reduce_cpoly, reduce_dimension, reduce_function};
pub use solve::{solve_dbar, DbarSolution, SolveOptions};

/// `δ_j p = ∂_j p − z̄_j p / (2r²a_j²)`.
pub fn delta(p: &CPoly, j: usize, w: &Weights, r: f64) -> CPoly {
    let k = 1.0 / (2.0 * r * r * w.a(j).powi(2));
    &p.dz(j) - &p.mul_zbar(j).scale_re(k)
}

/// `δ̄_j p = ∂̄_j p − z_j p / (2r²a_j²)`.
pub fn delta_bar(p: &CPoly, j: usize, w: &Weights, r: f64) -> CPoly {
    let k = 1.0 / (2.0 * r * r * w.a(j).powi(2));
    &p.dzbar(j) - &p.mul_z(j).scale_re(k)
}

fn sign(e: i32) -> f64 {
    f64::from(e)
}

/// `S f = (−1)^s Σ_j Σ′_J ε^K_{j,J} ∂̄_j f_{I,J} dz_I ∧ dz̄_K`.
pub fn apply_s(f: &Form) -> Form {
    let (s, t) = f.bidegree();
    let global = if s % 2 == 0 { 1.0 } else { -1.0 };
    let mut out = Form::zero(s, t + 1);
    for ((i, jset), p) in f.terms() {
        for j in p.support() {
            if jset.contains(&j) {
                continue;
            }
            let d = p.dzbar(j);
            if d.is_zero() {
                continue;
            }
            let mut k = jset.clone();
            let pos = k.partition_point(|&v| v < j);
            k.insert(pos, j);
            let e = sign(form::epsilon(&k, j, jset));
            out.add_unchecked((i.clone(), k), &d.scale_re(global * e));
        }
    }
    out
}

/// `T* f = (−1)^{s−1} Σ′_K Σ_j a_j² δ_j(f_{I,jK}) dz_I ∧ dz̄_K` for an
/// `(s, t+1)`-form, with `f_{I,jK} = ε^{M}_{j,K} f_{I,M}`.
pub fn apply_tstar(f: &Form, w: &Weights, r: f64) -> Result<Form> {
    let (s, t1) = f.bidegree();
    if t1 == 0 {
        return Err(Error::InvalidInput("T* needs a form of positive z̄-degree".into()));
    }
    let global = if s % 2 == 1 { 1.0 } else { -1.0 };
    let mut out = Form::zero(s, t1 - 1);
    for ((i, m), p) in f.terms() {
        for (pos, &j) in m.iter().enumerate() {
            let mut k = m.clone();
            k.remove(pos);
            let e = sign(form::epsilon(m, j, &k));
            let term = delta(p, j, w, r).scale_re(global * e * w.a(j).powi(2));
            out.add_unchecked((i.clone(), k), &term);
        }
    }
    Ok(out)
}

/// Both sides of `(t+1)/(2r²)·‖f‖² ≤ ‖T*f‖² + ‖Sf‖²` for an `(s, t+1)`-form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicEstimate {
    pub lhs: f64,
    pub rhs: f64,
}

impl BasicEstimate {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lhs <= self.rhs + rel_tol * self.lhs.abs().max(self.rhs.abs()).max(1e-300)
    }
}

pub fn basic_estimate_check(f: &Form, w: &Weights, r: f64) -> Result<BasicEstimate> {
    let (_, t1) = f.bidegree();
    let lhs = t1 as f64 / (2.0 * r * r) * form_norm_sq(f, w, r);
    let rhs = form_norm_sq(&apply_tstar(f, w, r)?, w, r) + form_norm_sq(&apply_s(f), w, r);
    Ok(BasicEstimate { lhs, rhs })
}

/// `(T*f, u) − (f, Tu)`, which vanishes identically.
pub fn adjoint_defect(f: &Form, u: &Form, w: &Weights, r: f64) -> Result<Complex64> {
    Ok(form_inner(&apply_tstar(f, w, r)?, u, w, r) - form_inner(f, &apply_s(u), w, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cpoly::CMonomial;
    use crate::numerics::moments::cpoly_inner;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn delta_examples() {
        let w = Weights::default();
        let r = 1.3;
        let k = 1.0 / (2.0 * r * r * w.a(1).powi(2));
        assert_eq!(delta(&CPoly::one(), 1, &w, r), CPoly::zbar(1).scale_re(-k));
        let zz = CPoly::monomial(CMonomial::from_triples([(1, 1, 1)]), c(-k));
        assert_eq!(delta(&CPoly::z(1), 1, &w, r), &CPoly::one() + &zz);
    }

    #[test]
    fn integration_by_parts_for_delta() {
        let w = Weights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 0..50 {
            let f = CPoly::random(&mut rng, 3, 3, 4);
            let g = CPoly::random(&mut rng, 3, 3, 4);
            let i = n % 3;
            let lhs = cpoly_inner(&f.dzbar(i), &g, &w, 0.8);
            let rhs = -cpoly_inner(&f, &delta(&g, i, &w, 0.8), &w, 0.8);
            assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn s_examples() {
        let f = Form::function(CPoly::zbar(0));
        assert_eq!(apply_s(&f), Form::dzbar(0, CPoly::one()));
        let mut constant = Form::zero(1, 1);
        constant.add(vec![0], vec![1], CPoly::real(2.0)).unwrap();
        assert!(apply_s(&constant).is_zero());
    }

    #[test]
    fn s_squared_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 0..50 {
            let bideg = (n % 3, n % 2);
            let f = Form::random(&mut rng, bideg, 4, 4, 3, 4);
            assert!(apply_s(&apply_s(&f)).is_zero());
        }
    }

    #[test]
    fn adjointness_and_estimate() {
        let w = Weights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..40 {
            let (s, t) = (n % 2, n % 3);
            let f = Form::random(&mut rng, (s, t + 1), 4, 3, 3, 4);
            let u = Form::random(&mut rng, (s, t), 4, 3, 3, 4);
            let d = adjoint_defect(&f, &u, &w, 1.0).unwrap();
            assert!(d.norm() < 1e-11, "defect {d}");
            assert!(basic_estimate_check(&f, &w, 1.0).unwrap().holds(1e-10));
        }
    }

    #[test]
    fn estimate_examples() {
        let w = Weights::default();
        let e = basic_estimate_check(&Form::dzbar(0, CPoly::one()), &w, 1.0).unwrap();
        assert!((e.lhs - 0.125).abs() < 1e-15 && (e.rhs - 0.125).abs() < 1e-15);
        let e = basic_estimate_check(&Form::dzbar(1, CPoly::zbar(0)), &w, 1.0).unwrap();
        assert!(e.lhs < e.rhs);
        let e = basic_estimate_check(&Form::zero(0, 1), &w, 1.0).unwrap();
        assert_eq!((e.lhs, e.rhs), (0.0, 0.0));
        // holomorphic coefficients keep only the first-order part of T*
        let f = Form::dzbar(0, CPoly::z(0));
        let ts = apply_tstar(&f, &w, 1.0).unwrap();
        let expect = Form::function(&CPoly::one().scale_re(-0.25) + &(&CPoly::z(0) * &CPoly::zbar(0)).scale_re(0.5));
        assert_eq!(ts, expect);
    }
}
