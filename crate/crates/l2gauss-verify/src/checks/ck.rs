use l2gauss::ck::{ck_solve, majorant_frame, LinearCauchyProblem, MonomialSeries, Series, DEFAULT_DEGREE_CAP};
use l2gauss::numerics::moments::factorial;
use l2gauss::numerics::{MultiIndex, Sequence};
use l2gauss::Result;
use rand::Rng;

use super::{rng, Outcome, Worst};
use crate::config::RunConfig;

const D: u32 = DEFAULT_DEGREE_CAP;
const DIMS: usize = 2;

fn mi(e: &[u32]) -> MultiIndex {
    MultiIndex::from_dense(e)
}

/// Dyadic coefficients with small numerators keep the exact route in range.
fn random_series(g: &mut impl Rng, max_deg: u32, n: usize, with_t: bool) -> MonomialSeries {
    Series::from_terms(
        D,
        (0..n).map(|_| {
            let mut e = vec![0u32; DIMS + 1];
            for _ in 0..g.random_range(0..=max_deg) {
                e[if with_t { g.random_range(0..=DIMS) } else { g.random_range(1..=DIMS) }] += 1;
            }
            (mi(&e), f64::from(g.random_range(-4i32..=4)) / 4.0)
        }),
    )
}

fn random_problem(g: &mut impl Rng) -> Result<LinearCauchyProblem> {
    let a: Vec<(usize, MonomialSeries)> = (1..=DIMS).map(|i| (i, random_series(g, 1, 2, true))).collect();
    let a0 = random_series(g, 1, 2, true);
    LinearCauchyProblem::new(a0, a, random_series(g, 3, 4, false))
}

pub fn solver(cfg: &RunConfig) -> Result<Outcome> {
    let mut g = rng(cfg, 11);
    let mut exact_zero = 0usize;
    let mut float = Worst::default();
    for _ in 0..50 {
        let p = random_problem(&mut g)?;
        let exact = p.to_exact().ok_or_else(|| l2gauss::Error::InvalidInput("coefficients are not exact".into()))?;
        let u = ck_solve(&exact, D, DIMS);
        exact_zero += usize::from(exact.residual(&u, D - 1).is_empty());
        let uf = ck_solve(&p, D, DIMS);
        for (m, c) in u.terms() {
            let c = *c.numer() as f64 / *c.denom() as f64;
            float.push(uf.coeff(m), c, 1.0);
        }
    }

    // u = (x_1 + c t)² and u = e^{λt}
    let mut closed = Worst::default();
    let c = 0.75;
    let transport =
        LinearCauchyProblem::new(Series::zero(D), [(1, Series::constant(D, c))], Series::from_terms(D, [(mi(&[0, 2]), 1.0)]))?;
    let u = ck_solve(&transport, D, DIMS);
    for (e, v) in [([0, 2], 1.0), ([1, 1], 2.0 * c), ([2, 0], c * c)] {
        closed.push(u.coeff(&mi(&e)), v, 1.0);
    }
    closed.push(u.len() as f64, 3.0, 1.0);
    let lambda = -1.5;
    let expo = LinearCauchyProblem::new(Series::constant(D, lambda), [], Series::constant(D, 1.0))?;
    let u = ck_solve(&expo, D, DIMS);
    for k in 0..=D {
        closed.push(u.coeff(&mi(&[k])), lambda.powi(k as i32) / factorial(k), 1.0);
    }

    let mut frame = Worst::default();
    for (first, ratio, n, p) in [(2.0, 2.0, 6, 1.0), (1.5, 3.0, 4, 2.0), (3.0, 1.7, 8, 1.5), (1.1, 2.5, 1, 3.0)] {
        let f = majorant_frame(&Sequence::geometric(first, ratio, n), p)?;
        frame.push(f.power_sum()?, 1.0, 1.0);
    }
    let tol = 1e-12;
    let o = Outcome::new(tol).count("problems", 50).count("exact_residual_zero", exact_zero).count("degree", (D - 1) as usize);
    let o = float.into_outcome(o, "float_vs_exact");
    let o = closed.into_outcome(o, "closed_form");
    Ok(frame
        .into_outcome(o, "frame_power_sum")
        .require(exact_zero == 50, "residual series not identically zero")
        .require(float.within(tol), "float recursion differs from the exact one")
        .require(closed.within(tol), "closed-form Taylor coefficients differ")
        .require(frame.within(tol), "frame scales do not sum to one"))
}
