//! Least-norm solution of `Tu = f` in a truncated polynomial basis.
//!
//! The basis of `(s, t)`-forms is every component key in the first `n`
//! coordinates times every monomial `z^α z̄^β` of degree `≤ D`. Each key
//! block is orthonormalised under the exact moment inner product (Cholesky
//! of the Gram matrix, i.e. Gram–Schmidt). In those coordinates the norm is
//! Euclidean, so the least-norm solution of the coefficient equations
//! `Tu = f` is a pseudo-inverse applied to `f`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::form::{form_norm, key_weight, Form, FormKey};
use super::{apply_s, Error, Result};
use crate::numerics::cpoly::{CMonomial, CPoly};
use crate::numerics::moments::cpoly_inner;
use crate::numerics::Weights;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Largest total degree `D` of the solution's coefficients.
    pub degree_cap: u32,
    /// Truncation dimension `n`.
    pub dims: usize,
    /// Allowed `‖Tu − f‖ / ‖f‖`.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { degree_cap: 4, dims: 1, tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DbarSolution {
    pub u: Form,
    pub norm_u: f64,
    pub norm_f: f64,
    /// `‖u‖ / ‖f‖` (0 for `f = 0`).
    pub ratio: f64,
    /// `√(2r²/(t+1))`.
    pub bound: f64,
    pub residual: f64,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.sort();
    out
}

fn monomials(n: usize, cap: u32) -> Vec<CMonomial> {
    fn go(j: usize, n: usize, left: u32, cur: &mut Vec<(usize, u32, u32)>, out: &mut Vec<CMonomial>) {
        if j == n {
            out.push(CMonomial::from_triples(cur.iter().copied()));
            return;
        }
        for a in 0..=left {
            for b in 0..=left - a {
                cur.push((j, a, b));
                go(j + 1, n, left - a - b, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, n, cap, &mut Vec::new(), &mut out);
    out.sort();
    out
}

type RowKey = (FormKey, CMonomial);

/// Least-norm `u` with `Tu = f` among `(s, t)`-forms of degree `≤ D` in the
/// first `n` coordinates.
pub fn solve_dbar(f: &Form, w: &Weights, r: f64, opts: SolveOptions) -> Result<DbarSolution> {
    let (s, t1) = f.bidegree();
    if t1 == 0 {
        return Err(Error::InvalidInput("the right-hand side must have positive z̄-degree".into()));
    }
    let t = t1 - 1;
    let n = opts.dims;
    let norm_f = form_norm(f, w, r);
    let bound = (2.0 * r * r / t1 as f64).sqrt();
    if f.support_dim() > n || (!f.is_zero() && f.degree() + 1 > opts.degree_cap) {
        return Err(Error::InvalidInput(format!(
            "data must have degree below {} in the first {n} coordinates",
            opts.degree_cap
        )));
    }
    let sf = form_norm(&apply_s(f), w, r);
    if sf > 1e-10 * norm_f.max(f64::MIN_POSITIVE) {
        return Err(Error::NotClosed { norm: sf });
    }
    if f.is_zero() {
        let u = Form::zero(s, t);
        return Ok(DbarSolution { u, norm_u: 0.0, norm_f, ratio: 0.0, bound, residual: 0.0 });
    }

    let monos = monomials(n, opts.degree_cap);
    let keys: Vec<FormKey> = subsets(n, s)
        .into_iter()
        .flat_map(|i| subsets(n, t).into_iter().map(move |j| (i.clone(), j)))
        .collect();

    // per-key Cholesky factors of the Gram matrix of the monomials
    let m = monos.len();
    let mut columns: Vec<(FormKey, usize)> = Vec::with_capacity(keys.len() * m);
    let mut factors: Vec<DMatrix<Complex64>> = Vec::with_capacity(keys.len());
    for key in &keys {
        let kw = key_weight(key, w);
        let polys: Vec<CPoly> = monos.iter().map(|mo| CPoly::monomial(mo.clone(), Complex64::new(1.0, 0.0))).collect();
        let gram = DMatrix::from_fn(m, m, |a, b| cpoly_inner(&polys[b], &polys[a], w, r) * kw);
        let chol = gram
            .cholesky()
            .ok_or(Error::BasisTooSmall { residual: f64::NAN })?;
        // L^{-*}: columns give orthonormal combinations of the monomials
        let l_inv_h = chol
            .l()
            .adjoint()
            .try_inverse()
            .ok_or(Error::BasisTooSmall { residual: f64::NAN })?;
        factors.push(l_inv_h);
        for a in 0..m {
            columns.push((key.clone(), a));
        }
    }

    // T applied to every monomial basis element, collected by row
    let mut rows: BTreeMap<RowKey, usize> = BTreeMap::new();
    let mut entries: Vec<(usize, usize, Complex64)> = Vec::new();
    for (col, (key, a)) in columns.iter().enumerate() {
        let mut basis = Form::zero(s, t);
        basis.add_unchecked(key.clone(), &CPoly::monomial(monos[*a].clone(), Complex64::new(1.0, 0.0)));
        for (k2, p) in apply_s(&basis).terms() {
            for (mo, c) in p.terms() {
                let next = rows.len();
                let row = *rows.entry((k2.clone(), mo.clone())).or_insert(next);
                entries.push((row, col, c));
            }
        }
    }
    for (k2, p) in f.terms() {
        for (mo, _) in p.terms() {
            let next = rows.len();
            rows.entry((k2.clone(), mo.clone())).or_insert(next);
        }
    }
    let mut b = DMatrix::<Complex64>::zeros(rows.len(), columns.len());
    for (row, col, c) in entries {
        b[(row, col)] += c;
    }
    let mut rhs = DVector::<Complex64>::zeros(rows.len());
    for ((k2, mo), &row) in &rows {
        rhs[row] = f.component(&k2.0, &k2.1).coeff(mo);
    }

    // change to orthonormal coordinates block by block
    let mut a_mat = DMatrix::<Complex64>::zeros(rows.len(), columns.len());
    for (kb, factor) in factors.iter().enumerate() {
        let range = kb * m..(kb + 1) * m;
        let block = b.columns(range.start, m) * factor;
        a_mat.columns_mut(range.start, m).copy_from(&block);
    }
    let svd = a_mat.svd(true, true);
    let v = svd
        .solve(&rhs, 1e-12 * svd.singular_values.max())
        .map_err(|e| Error::InvalidInput(e.to_string()))?;

    let mut u = Form::zero(s, t);
    for (kb, (key, factor)) in keys.iter().zip(&factors).enumerate() {
        let coeffs = factor * v.rows(kb * m, m);
        let p = CPoly::from_terms(monos.iter().cloned().zip(coeffs.iter().copied()).filter(|(_, c)| c.norm() > 1e-15));
        if !p.is_zero() {
            u.add_unchecked(key.clone(), &p);
        }
    }
    let residual = form_norm(&apply_s(&u).sub(f)?, w, r);
    if residual > opts.tol * norm_f {
        return Err(Error::BasisTooSmall { residual });
    }
    let norm_u = form_norm(&u, w, r);
    Ok(DbarSolution { u, norm_u, norm_f, ratio: norm_u / norm_f, bound, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dbar::form::form_inner;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn opts(d: u32, n: usize) -> SolveOptions {
        SolveOptions { degree_cap: d, dims: n, tol: 1e-8 }
    }

    #[test]
    fn antiderivative_examples() {
        let w = Weights::default();
        let sol = solve_dbar(&Form::dzbar(0, CPoly::one()), &w, 1.0, opts(3, 1)).unwrap();
        let expect = Form::function(CPoly::zbar(0));
        assert!(form_norm(&sol.u.sub(&expect).unwrap(), &w, 1.0) < 1e-12);
        assert!((sol.ratio - 2f64.sqrt()).abs() < 1e-12);

        let sol = solve_dbar(&Form::dzbar(0, CPoly::zbar(0)), &w, 1.0, opts(4, 1)).unwrap();
        let expect = Form::function((&CPoly::zbar(0) * &CPoly::zbar(0)).scale_re(0.5));
        assert!(form_norm(&sol.u.sub(&expect).unwrap(), &w, 1.0) < 1e-12);

        let zero = solve_dbar(&Form::zero(0, 1), &w, 1.0, opts(3, 1)).unwrap();
        assert!(zero.u.is_zero() && zero.ratio == 0.0);
    }

    #[test]
    fn rejects_open_forms() {
        let w = Weights::default();
        let mut f = Form::zero(0, 1);
        f.add(vec![], vec![0], CPoly::zbar(1)).unwrap();
        assert!(matches!(solve_dbar(&f, &w, 1.0, opts(3, 2)), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn random_closed_data_in_one_variable() {
        let w = Weights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let p = CPoly::random(&mut rng, 1, 3, 4);
            let f = Form::dzbar(0, p);
            let sol = solve_dbar(&f, &w, 1.0, opts(5, 1)).unwrap();
            assert!(sol.residual <= 1e-8 * sol.norm_f);
            assert!(sol.ratio <= sol.bound + 1e-8, "{} > {}", sol.ratio, sol.bound);
            for _ in 0..5 {
                let h = Form::function(CPoly::random_holomorphic(&mut rng, 1, 5, 3));
                assert!(form_inner(&sol.u, &h, &w, 1.0).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_data_in_two_variables() {
        let w = Weights::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let v = Form::function(CPoly::random(&mut rng, 2, 3, 4));
            let f = apply_s(&v);
            if f.is_zero() {
                continue;
            }
            let sol = solve_dbar(&f, &w, 0.9, opts(3, 2)).unwrap();
            assert!(sol.ratio <= sol.bound + 1e-8);
        }
    }
}
