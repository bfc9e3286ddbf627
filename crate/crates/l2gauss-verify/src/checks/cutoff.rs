use l2gauss::cutoff::{Cutoff, CutoffConfig, Smoothstep};
use l2gauss::Result;
use rand::Rng;

use super::{rng, stream, Outcome};
use crate::config::RunConfig;

const LEVEL: u32 = 1;

pub fn cutoffs(cfg: &RunConfig) -> Result<Outcome> {
    let cut = Cutoff::new(CutoffConfig {
        weights: cfg.weights.clone(),
        c_power: 0.5,
        dims: cfg.dims,
        samples: cfg.samples.cutoff_bank,
        seed: stream(cfg, 5).seed,
    })?;
    let mut g = rng(cfg, 5);
    let k = LEVEL;
    let outer = f64::from(k + 2 * cut.n1);
    let (mut ones, mut zeros) = (0usize, 0usize);
    let (mut min_inside, mut max_outside) = (f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let l = g.random_range(0.0..f64::from(k));
        let x = cut.point_at_level(&mut g, l);
        let v = cut.x_k(k, &x);
        ones += usize::from(v == 1.0);
        min_inside = min_inside.min(v);
        let l = outer * g.random_range(1.001..3.0);
        let y = cut.point_at_level(&mut g, l);
        let v = cut.x_k(k, &y);
        zeros += usize::from(v == 0.0);
        max_outside = max_outside.max(v);
    }
    let shell: Vec<_> = (0..100).map(|_| { let l = g.random_range(f64::from(k)..outer); cut.point_at_level(&mut g, l) }).collect();
    let bound = cut.gradient_bound(k, &shell);
    let c = Smoothstep::get().sup_derivative();
    Ok(Outcome::new(4.0)
        .count("level", k as usize)
        .count("n1", cut.n1 as usize)
        .count("inside_equal_one", ones)
        .count("outside_equal_zero", zeros)
        .value("min_inside", min_inside)
        .value("max_outside", max_outside)
        .value("max_gradient_energy", bound.max)
        .value("gradient_std_error", bound.std_error)
        .value("c_squared", c * c)
        .require(ones == 100, "X_k differs from 1 inside K_k")
        .require(zeros == 100, "X_k differs from 0 outside K_{k+2N1}")
        .require(bound.holds(4.0), "gradient energy exceeds C² by more than 4 std errors"))
}
