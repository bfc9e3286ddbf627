use l2gauss::dbar::{apply_s, apply_tstar, basic_estimate_check, form_inner, form_norm, solve_dbar, Form, SolveOptions};
use l2gauss::numerics::CPoly;
use l2gauss::Result;
use num_complex::Complex64;

use super::{rng, Outcome, Worst};
use crate::config::RunConfig;

pub fn calculus(cfg: &RunConfig) -> Result<Outcome> {
    let w = &cfg.weights;
    let mut g = rng(cfg, 9);
    let mut s_squared_zero = 0usize;
    for n in 0..100 {
        let f = Form::random(&mut g, (n % 3, n % 2), 4, 4, 3, 4);
        s_squared_zero += usize::from(apply_s(&apply_s(&f)).is_zero());
    }
    let mut adjoint = Worst::default();
    for n in 0..100 {
        let (s, t) = (n % 2, n % 3);
        let f = Form::random(&mut g, (s, t + 1), 4, 3, 3, 4);
        let u = Form::random(&mut g, (s, t), 4, 3, 3, 4);
        let lhs = form_inner(&apply_tstar(&f, w, 1.0)?, &u, w, 1.0);
        let rhs = form_inner(&f, &apply_s(&u), w, 1.0);
        // the worst component, real or imaginary
        adjoint.push(lhs.re, rhs.re, lhs.norm().max(rhs.norm()).max(1.0));
        adjoint.push(lhs.im, rhs.im, lhs.norm().max(rhs.norm()).max(1.0));
    }
    let mut estimate_holds = 0usize;
    let mut min_slack = f64::INFINITY;
    for n in 0..200 {
        let (s, t) = (n % 2, n % 3);
        let f = Form::random(&mut g, (s, t + 1), 4, 3, 3, 4);
        let e = basic_estimate_check(&f, w, 1.0)?;
        estimate_holds += usize::from(e.holds(1e-12));
        if e.rhs > 0.0 {
            min_slack = min_slack.min(e.rhs / e.lhs.max(1e-300) - 1.0);
        }
    }
    let r = 1.0;
    let equality = basic_estimate_check(&Form::dzbar(0, CPoly::one()), w, r)?;
    let expect = w.a(0).powi(2) / (2.0 * r * r);
    let eq_err = (equality.lhs - expect).abs().max((equality.rhs - expect).abs());
    let tol = 1e-12;
    let o = Outcome::new(tol)
        .count("s_squared_zero", s_squared_zero)
        .count("estimate_holds", estimate_holds)
        .value("min_relative_slack", min_slack)
        .value("equality_lhs", equality.lhs)
        .value("equality_rhs", equality.rhs)
        .value("equality_expected", expect);
    Ok(adjoint
        .into_outcome(o, "adjoint")
        .require(s_squared_zero == 100, "S∘S ≠ 0")
        .require(adjoint.within(tol), "(T*f, u) ≠ (f, Tu)")
        .require(estimate_holds == 200, "basic estimate violated")
        .require(eq_err <= tol, "constant-coefficient case is not an equality"))
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome> {
    let w = &cfg.weights;
    let r = 1.0;
    let mut g = rng(cfg, 10);
    let opts = SolveOptions { degree_cap: 5, dims: 1, tol: 1e-8 };
    let (mut max_residual, mut max_excess, mut max_inner) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    let mut bound = 0.0;
    for _ in 0..10 {
        let f = Form::dzbar(0, CPoly::random(&mut g, 1, 3, 4));
        let sol = solve_dbar(&f, w, r, opts)?;
        max_residual = max_residual.max(sol.residual / sol.norm_f);
        max_excess = max_excess.max(sol.ratio - sol.bound);
        bound = sol.bound;
        for _ in 0..20 {
            let h = Form::function(CPoly::random_holomorphic(&mut g, 1, 5, 3));
            let hn = form_norm(&h, w, r);
            if hn == 0.0 {
                continue;
            }
            let ip: Complex64 = form_inner(&sol.u, &h, w, r) / hn;
            max_inner = max_inner.max(ip.norm() / sol.norm_u.max(1.0));
        }
    }
    Ok(Outcome::new(1e-8)
        .count("problems", 10)
        .value("max_relative_residual", max_residual)
        .value("max_ratio_minus_bound", max_excess)
        .value("bound", bound)
        .value("max_kernel_inner", max_inner)
        .require(max_residual <= 1e-8, "residual above 1e-8·‖f‖")
        .require(max_excess <= 1e-8, "norm ratio above the bound")
        .require(max_inner <= 1e-10, "solution not orthogonal to the holomorphic kernel"))
}
