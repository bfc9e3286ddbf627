use l2gauss::numerics::Poly;
use l2gauss::sobolev::{
    chart_norm_equivalence, jacobian_bounds, translation_identity_check, translation_unboundedness, ChartChange, UnboundednessRow,
};
use l2gauss::Result;
use rand::Rng;

use super::{rng, Outcome, Worst};
use crate::config::RunConfig;

pub fn sobolev(cfg: &RunConfig) -> Result<Outcome> {
    let w = &cfg.weights;
    let mut g = rng(cfg, 12);

    let mut translation = Worst::default();
    for _ in 0..100 {
        let f = Poly::random(&mut g, 3, 4, 5);
        let (lhs, rhs) = translation_identity_check(&f, g.random_range(-2.0..2.0), w);
        translation.push(lhs, rhs, 1e-300);
    }

    let rows: Vec<UnboundednessRow> = (0..=10).map(|n| translation_unboundedness(n, w)).collect();
    let bracketed = rows.iter().filter(|r| r.bracketed()).count();
    let decreasing = rows.windows(2).all(|p| p[1].ratio < p[0].ratio);
    let last = rows[10].ratio;

    let chart = ChartChange::Sphere;
    let delta = chart.delta(w);
    let (c1, c2) = jacobian_bounds(delta, w);
    let mut product_err: f64 = 0.0;
    let mut in_bounds = 0usize;
    let mut points = 0usize;
    for dims in 2..=6 {
        let pts = chart.sample_points(&mut g, dims, 2_000);
        chart.verify_condition(delta, &pts, w)?;
        for p in &pts {
            product_err = product_err.max((chart.jacobian_product(p) - 1.0).abs());
            let (j, j1) = chart.jacobian_factors(p, w);
            in_bounds += usize::from(c1 <= j && j <= c2 && c1 <= j1 && j1 <= c2);
        }
        points += pts.len();
    }

    let mut equivalence = 0usize;
    let mut worst_margin = f64::INFINITY;
    let charts = [ChartChange::Sphere, ChartChange::HalfSpace { r: 0.8 }];
    for k in 0..10 {
        let f = Poly::random(&mut g, 2, 3, 4);
        let rep = chart_norm_equivalence(&charts[k % 2], &f, w)?;
        equivalence += usize::from(rep.holds());
        worst_margin = worst_margin.min((rep.mid - rep.lhs).min(rep.rhs - rep.mid));
    }

    let tol = 1e-12;
    let o = translation.into_outcome(Outcome::new(tol).count("polynomials", 100), "translation");
    Ok(o.count("ratios_bracketed", bracketed)
        .value("ratio_n10", last)
        .value("upper_n10", rows[10].upper)
        .count("chart_points", points)
        .value("max_jacobian_product_err", product_err)
        .count("jacobians_in_bounds", in_bounds)
        .count("norm_equivalence_holds", equivalence)
        .value("min_equivalence_margin", worst_margin)
        .require(translation.within(tol), "translation identity fails")
        .require(bracketed == rows.len(), "ratio outside its bounds")
        .require(decreasing && last < 1e-6, "ratios do not decrease below 1e-6")
        .require(points == 10_000 && product_err <= 1e-10, "chart Jacobians do not multiply to 1")
        .require(in_bounds == points, "Jacobian factor outside [C1, C2]")
        .require(equivalence == 10, "norm equivalence fails"))
}
