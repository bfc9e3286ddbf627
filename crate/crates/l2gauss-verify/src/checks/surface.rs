use std::collections::BTreeMap;

use l2gauss::numerics::special::normal_pdf;
use l2gauss::numerics::{quad, Poly};
use l2gauss::surface::{
    chart_consistency, gauss_green_ball, gauss_green_halfspace_exact, gauss_green_halfspace_mc, Ball, FinitePerturbationMap,
    HalfSpace, IndexSet, LineBundle, Region,
};
use l2gauss::Result;
use rand::Rng;

use super::{rng, stream, Outcome, Worst};
use crate::config::RunConfig;

const SPAN: usize = 9;

/// `base` with up to two members swapped for non-members below `SPAN`.
fn perturbed(g: &mut impl Rng, base: &IndexSet) -> IndexSet {
    let mut s = base.clone();
    for _ in 0..g.random_range(0..3) {
        let inside = s.below(SPAN);
        let outside: Vec<usize> = (0..SPAN).filter(|&i| !s.contains(i)).collect();
        if inside.is_empty() || outside.is_empty() {
            break;
        }
        let a = inside[g.random_range(0..inside.len())];
        let b = outside[g.random_range(0..outside.len())];
        s = s.with_removed(a).with_added(b);
    }
    s
}

/// A random map `P_from → P_to` that is the identity past `SPAN`.
fn random_map(g: &mut impl Rng, from: &IndexSet, to: &IndexSet) -> Result<FinitePerturbationMap> {
    let rows = to.below(SPAN);
    let mut columns = BTreeMap::new();
    for c in from.below(SPAN) {
        if !to.contains(c) || g.random_bool(0.5) {
            let mut v: BTreeMap<usize, f64> = BTreeMap::new();
            for &r in &rows {
                if g.random_bool(0.6) {
                    v.insert(r, g.random_range(-1.5..1.5));
                }
            }
            if to.contains(c) {
                *v.entry(c).or_insert(0.0) += 2.0;
            }
            columns.insert(c, v);
        }
    }
    FinitePerturbationMap::from_columns(from.clone(), to.clone(), columns)
}

fn bases() -> [IndexSet; 4] {
    [IndexSet::all(), IndexSet::progression(0, 2), IndexSet::progression(1, 3), IndexSet::finite(0..6)]
}

pub fn determinant(cfg: &RunConfig) -> Result<Outcome> {
    let mut g = rng(cfg, 6);
    let bases = bases();
    // Relative error is undefined when a factor is singular; those products
    // are drawn again and only checked to vanish.
    let mut product = Worst::default();
    let (mut singular_products, mut singular_residual) = (0usize, 0.0f64);
    let mut trial = 0;
    while trial < 100 {
        let base = &bases[trial % bases.len()];
        let (i1, i2, i3) = (perturbed(&mut g, base), perturbed(&mut g, base), perturbed(&mut g, base));
        let t1 = random_map(&mut g, &i1, &i2)?;
        let t2 = random_map(&mut g, &i2, &i3)?;
        let (lhs, rhs) = (t1.then(&t2)?.det()?, t1.det()? * t2.det()?);
        if rhs.abs() < 1e-6 {
            singular_products += 1;
            singular_residual = singular_residual.max(lhs.abs());
            continue;
        }
        product.push(lhs, rhs, 1e-300);
        trial += 1;
    }
    let mut reciprocal = Worst::default();
    let mut singular_skipped = 0usize;
    let mut done = 0;
    while done < 100 {
        let base = &bases[done % bases.len()];
        let (i1, i2) = (perturbed(&mut g, base), perturbed(&mut g, base));
        let t = random_map(&mut g, &i1, &i2)?;
        let d = t.det()?;
        if d.abs() < 1e-6 {
            singular_skipped += 1;
            continue;
        }
        reciprocal.push(t.inverse()?.det()? * d, 1.0, 1e-300);
        done += 1;
    }
    let tol = 1e-10;
    let o = product.into_outcome(Outcome::new(tol).count("cases", 100), "product");
    Ok(reciprocal
        .into_outcome(o, "reciprocal")
        .count("singular_skipped", singular_skipped)
        .count("singular_products", singular_products)
        .value("singular_product_max_det", singular_residual)
        .require(product.within(tol), "det(T2∘T1) ≠ det(T1)·det(T2)")
        .require(singular_residual <= 1e-6, "singular factors but det(T2∘T1) ≠ 0")
        .require(reciprocal.within(tol), "det(T⁻¹)·det(T) ≠ 1"))
}

pub fn charts(cfg: &RunConfig) -> Result<Outcome> {
    let bundle = LineBundle::with_delta_norm_sq(cfg.weights.clone(), 3.0)?;
    let mut g = rng(cfg, 7);
    let st = stream(cfg, 7);
    let mut worst = Worst::default();
    let mut cases = 0;
    for pivot in [1, 3, 5] {
        for _ in 0..4 {
            let lo = g.random_range(-2.0..1.0);
            let hi = lo + g.random_range(0.1..2.0);
            let c = g.random_range(-0.5..0.3);
            let region = Region::full().side(0, lo, hi).side(2, c, c + g.random_range(0.05..0.5));
            let (even, pivoted) = chart_consistency(&bundle, pivot, &region, &st)?;
            worst.push(even.mean, pivoted.mean, 1e-300);
            cases += 1;
        }
    }
    let tol = 1e-3;
    Ok(worst
        .into_outcome(Outcome::new(tol).count("regions", cases), "charts")
        .require(worst.within(tol), "chart values differ"))
}

pub fn gauss_green(cfg: &RunConfig) -> Result<Outcome> {
    let mut g = rng(cfg, 8);
    let st = stream(cfg, 8);
    let w = &cfg.weights;
    let n = cfg.samples.gauss_green;
    let (mut halfspace_ok, mut ball_ok) = (0usize, 0usize);
    let mut max_z: f64 = 0.0;
    let z = |r: &l2gauss::surface::GaussGreenReport| {
        let e = r.residual;
        if e.std_error > 0.0 {
            e.mean.abs() / e.std_error
        } else if e.mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    for t in 0..30u64 {
        let dims = 2 + (t as usize) % 7;
        let f = Poly::random(&mut g, dims, 3, 5);
        let i = g.random_range(0..dims);
        let hs = HalfSpace { coord: g.random_range(0..dims), offset: g.random_range(-0.3..0.3) };
        let r = gauss_green_halfspace_mc(&f, w, hs, i, dims, &st.fork(2 * t), n)?;
        halfspace_ok += usize::from(r.balanced_within(4.0));
        max_z = max_z.max(z(&r));
        let ball = Ball { dims, radius: g.random_range(0.4..0.9) };
        let r = gauss_green_ball(&f, w, ball, i, dims, &st.fork(2 * t + 1), n)?;
        ball_ok += usize::from(r.balanced_within(4.0));
        max_z = max_z.max(z(&r));
    }
    // f = 1 on {x_0 > 0}: 0 = 1/(a√(2π)) − 1/(a√(2π)), volume term by quadrature
    let a = w.a(0);
    let exact = gauss_green_halfspace_exact(&Poly::one(), w, HalfSpace { coord: 0, offset: 0.0 }, 0)?;
    let volume = quad::integrate(|x| x * normal_pdf(x, a) / (a * a), 0.0, 40.0 * a, 64);
    let boundary = -normal_pdf(0.0, a);
    let balance = (volume + boundary).abs();
    let agree = (exact.volume.mean - volume).abs().max((exact.boundary.mean - boundary).abs());
    Ok(Outcome::new(4.0)
        .count("functions", 30)
        .count("halfspace_balanced", halfspace_ok)
        .count("ball_balanced", ball_ok)
        .value("max_residual_z", max_z)
        .value("constant_volume", volume)
        .value("constant_boundary", boundary)
        .value("constant_balance", balance)
        .value("constant_exact_residual", exact.residual.mean)
        .require(halfspace_ok == 30, "half-space residual beyond 4 std errors")
        .require(ball_ok == 30, "ball residual beyond 4 std errors")
        .require(balance <= 1e-10 && exact.residual.mean.abs() <= 1e-10, "f = 1 does not balance")
        .require(agree <= 1e-10, "exact terms differ from quadrature"))
}
