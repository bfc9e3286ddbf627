//! The product rule `T(X f) = X·Tf + (TX) ∧ f` for a cut-off `X`, checked
//! weakly: pairing with a test form `g` and moving `T` onto `g` gives
//! `∫ X ⟨f, T*g⟩ = ∫ X ⟨Tf, g⟩ + ∫ ⟨(TX) ∧ f, g⟩`, whose per-sample
//! difference has mean zero.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::form::{epsilon, key_weight, Form, FormKey};
use super::{apply_s, apply_tstar};
use crate::cutoff::AxisCutoff;
use crate::error::{Error, Result};
use crate::numerics::sampling::{Estimate, SampleStream, Welford};
use crate::numerics::Weights;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    /// Real and imaginary parts of the mean residual, one pair per test form.
    pub residuals: Vec<(Estimate, Estimate)>,
    /// Mean pointwise weighted norm² of `(TX) ∧ f`.
    pub wedge: Estimate,
    /// Largest `|mean| / std_error` over all residual parts.
    pub max_z: f64,
}

impl MultiplierReport {
    pub fn passes(&self, k: f64) -> bool {
        self.residuals.iter().all(|(re, im)| re.within(0.0, k) && im.within(0.0, k))
    }
}

/// `(TX) ∧ f` at one point, where `X` depends on `Re z_0` only.
fn wedge_at(f: &[(FormKey, Complex64)], s: usize, dbar_x0: Complex64) -> Vec<(FormKey, Complex64)> {
    let global = if s.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut out: Vec<(FormKey, Complex64)> = Vec::new();
    for ((i, jset), v) in f {
        if jset.contains(&0) {
            continue;
        }
        let mut k = jset.clone();
        k.insert(0, 0);
        let e = f64::from(epsilon(&k, 0, jset));
        out.push(((i.clone(), k), *v * dbar_x0 * global * e));
    }
    out
}

fn pair(f: &[(FormKey, Complex64)], g: &[(FormKey, Complex64)], w: &Weights) -> Complex64 {
    super::form::pointwise_pairing(f, g, w)
}

/// Runs the weak product rule for `X = X_k(Re z_0)` against each test form.
#[allow(clippy::too_many_arguments)]
pub fn multiplier_identity_check(
    f: &Form,
    cut: &AxisCutoff,
    k: u32,
    tests: &[Form],
    w: &Weights,
    r: f64,
    stream: &SampleStream,
    samples: usize,
) -> Result<MultiplierReport> {
    let (s, t) = f.bidegree();
    if tests.iter().any(|g| g.bidegree() != (s, t + 1)) {
        return Err(Error::InvalidInput("test forms must have bidegree (s, t+1)".into()));
    }
    let tf = apply_s(f);
    let tstar: Vec<Form> = tests.iter().map(|g| apply_tstar(g, w, r)).collect::<Result<_>>()?;
    let dims = tests.iter().map(Form::support_dim).chain([f.support_dim(), 1]).max().unwrap_or(1);
    let sig: Vec<f64> = (0..dims).map(|j| r * w.a(j)).collect();
    let st = stream.with_dims(2 * dims);
    let m = tests.len();
    let parts = st.map_chunks(samples, |rng, count| {
        let mut acc = vec![(Welford::default(), Welford::default()); m];
        let mut wedge = Welford::default();
        let mut z = vec![Complex64::default(); dims];
        for _ in 0..count {
            for (zj, &sj) in z.iter_mut().zip(&sig) {
                let x: f64 = StandardNormal.sample(rng);
                let y: f64 = StandardNormal.sample(rng);
                *zj = Complex64::new(sj * x, sj * y);
            }
            let x = cut.value(k, z[0].re);
            let dbar_x0 = Complex64::new(0.5 * cut.derivative(k, z[0].re), 0.0);
            let fv = f.eval(&z);
            let tfv = tf.eval(&z);
            let wv = wedge_at(&fv, s, dbar_x0);
            wedge.push(wv.iter().map(|(key, v)| v.norm_sqr() * key_weight(key, w)).sum());
            for (idx, (g, gs)) in tests.iter().zip(&tstar).enumerate() {
                let gv = g.eval(&z);
                let q = x * pair(&fv, &gs.eval(&z), w) - x * pair(&tfv, &gv, w) - pair(&wv, &gv, w);
                acc[idx].0.push(q.re);
                acc[idx].1.push(q.im);
            }
        }
        (acc, wedge)
    });
    let mut residuals = Vec::with_capacity(m);
    for idx in 0..m {
        let re = parts.iter().fold(Welford::default(), |a, p| a.merge(&p.0[idx].0)).estimate();
        let im = parts.iter().fold(Welford::default(), |a, p| a.merge(&p.0[idx].1)).estimate();
        residuals.push((re, im));
    }
    let wedge = parts.iter().fold(Welford::default(), |a, p| a.merge(&p.1)).estimate();
    let max_z = residuals
        .iter()
        .flat_map(|(a, b)| [*a, *b])
        .map(|e| if e.std_error > 0.0 { e.mean.abs() / e.std_error } else if e.mean == 0.0 { 0.0 } else { f64::INFINITY })
        .fold(0.0, f64::max);
    Ok(MultiplierReport { residuals, wedge, max_z })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::cpoly::CPoly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tests_for(rng: &mut ChaCha8Rng, bideg: (usize, usize)) -> Vec<Form> {
        (0..10).map(|_| Form::random(rng, bideg, 2, 2, 2, 3)).collect()
    }

    #[test]
    fn constant_coefficient_forms() {
        let w = Weights::default();
        let cut = AxisCutoff::new(w.a(0), 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut f = Form::zero(0, 1);
        f.add(vec![], vec![1], CPoly::real(1.0)).unwrap();
        let g = tests_for(&mut rng, (0, 2));
        let rep = multiplier_identity_check(&f, &cut, 1, &g, &w, 1.0, &SampleStream::new(4, 1), 40_000).unwrap();
        assert!(rep.passes(4.0), "{rep:?}");
        assert!(rep.wedge.mean > 0.0);
    }

    #[test]
    fn polynomial_functions() {
        let w = Weights::default();
        let cut = AxisCutoff::new(w.a(0), 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = Form::function(CPoly::random(&mut rng, 2, 3, 4));
        let g = tests_for(&mut rng, (0, 1));
        let rep = multiplier_identity_check(&f, &cut, 0, &g, &w, 1.0, &SampleStream::new(5, 1), 40_000).unwrap();
        assert!(rep.passes(4.0), "{rep:?}");
    }

    #[test]
    fn zero_form_and_large_level() {
        let w = Weights::default();
        let cut = AxisCutoff::new(w.a(0), 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let g = tests_for(&mut rng, (0, 1));
        let rep = multiplier_identity_check(&Form::zero(0, 0), &cut, 1, &g, &w, 1.0, &SampleStream::new(6, 1), 2_000).unwrap();
        assert!(rep.residuals.iter().all(|(a, b)| a.mean == 0.0 && b.mean == 0.0));
        let f = Form::function(CPoly::one());
        let rep = multiplier_identity_check(&f, &cut, 40, &g, &w, 1.0, &SampleStream::new(6, 1), 20_000).unwrap();
        assert_eq!(rep.wedge.mean, 0.0);
        assert!(rep.passes(4.0));
    }
}
