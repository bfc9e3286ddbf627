//! `(s, t)`-forms `Σ′ f_{I,J} dz_I ∧ dz̄_J` with complex polynomial
//! coefficients, the permutation sign `ε` and the weighted inner product.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::cpoly::{CMonomial, CPoly};
use crate::numerics::moments::cpoly_inner;
use crate::numerics::Weights;

/// Component key `(I, J)`, both strictly increasing.
pub type FormKey = (Vec<usize>, Vec<usize>);

#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    s: usize,
    t: usize,
    terms: BTreeMap<FormKey, CPoly>,
}

/// Sign of the permutation sorting `seq` into `target`; 0 when they are not
/// the same set or `seq` repeats an index.
pub fn permutation_sign(target: &[usize], seq: &[usize]) -> i32 {
    if target.len() != seq.len() {
        return 0;
    }
    let mut pos = Vec::with_capacity(seq.len());
    for v in seq {
        match target.binary_search(v) {
            Ok(p) => pos.push(p),
            Err(_) => return 0,
        }
    }
    let mut sign = 1;
    for a in 0..pos.len() {
        for b in a + 1..pos.len() {
            if pos[a] == pos[b] {
                return 0;
            }
            if pos[a] > pos[b] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `ε^K_{j,J}`: the sign sorting `(j, J)` into `K`.
pub fn epsilon(k: &[usize], j: usize, jset: &[usize]) -> i32 {
    let mut seq = Vec::with_capacity(jset.len() + 1);
    seq.push(j);
    seq.extend_from_slice(jset);
    permutation_sign(k, &seq)
}

fn strictly_increasing(v: &[usize]) -> bool {
    v.windows(2).all(|p| p[0] < p[1])
}

/// `a^{I,J} = Π a_i² · Π a_j²`.
pub fn key_weight(key: &FormKey, w: &Weights) -> f64 {
    key.0.iter().chain(&key.1).map(|&i| w.a(i).powi(2)).product()
}

impl Form {
    pub fn zero(s: usize, t: usize) -> Self {
        Form { s, t, terms: BTreeMap::new() }
    }

    /// A `(0, 0)`-form.
    pub fn function(p: CPoly) -> Self {
        let mut f = Form::zero(0, 0);
        f.add(Vec::new(), Vec::new(), p).expect("empty keys are valid");
        f
    }

    /// `p dz̄_j`.
    pub fn dzbar(j: usize, p: CPoly) -> Self {
        let mut f = Form::zero(0, 1);
        f.add(Vec::new(), vec![j], p).expect("single index is valid");
        f
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.s, self.t)
    }

    /// Adds `p` to the `(I, J)` component.
    pub fn add(&mut self, i: Vec<usize>, j: Vec<usize>, p: CPoly) -> Result<()> {
        if i.len() != self.s || j.len() != self.t || !strictly_increasing(&i) || !strictly_increasing(&j) {
            return Err(Error::InvalidInput(format!("component ({i:?}, {j:?}) does not fit a ({}, {})-form", self.s, self.t)));
        }
        self.add_unchecked((i, j), &p);
        Ok(())
    }

    pub(crate) fn add_unchecked(&mut self, key: FormKey, p: &CPoly) {
        let entry = self.terms.entry(key).or_default();
        *entry = &*entry + p;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn component(&self, i: &[usize], j: &[usize]) -> CPoly {
        self.terms.get(&(i.to_vec(), j.to_vec())).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FormKey, &CPoly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.values().map(CPoly::degree).max().unwrap_or(0)
    }

    /// One past the largest coordinate in any key or coefficient.
    pub fn support_dim(&self) -> usize {
        self.terms
            .iter()
            .map(|((i, j), p)| {
                let k = i.iter().chain(j).max().map_or(0, |m| m + 1);
                k.max(p.support_dim())
            })
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, c: Complex64) -> Form {
        let mut out = Form::zero(self.s, self.t);
        for (k, p) in &self.terms {
            out.add_unchecked(k.clone(), &p.scale(c));
        }
        out
    }

    pub fn sub(&self, o: &Form) -> Result<Form> {
        if self.bidegree() != o.bidegree() {
            return Err(Error::InvalidInput("forms of different bidegree".into()));
        }
        let mut out = self.clone();
        for (k, p) in &o.terms {
            out.add_unchecked(k.clone(), &-p);
        }
        Ok(out)
    }

    /// Coefficient values at `z`.
    pub fn eval(&self, z: &[Complex64]) -> Vec<(FormKey, Complex64)> {
        self.terms.iter().map(|(k, p)| (k.clone(), p.eval(z))).collect()
    }

    /// A random form with `components` distinct keys in the first `dims`
    /// coordinates, each with `n_terms` monomials of degree `≤ max_deg`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        (s, t): (usize, usize),
        dims: usize,
        max_deg: u32,
        components: usize,
        n_terms: usize,
    ) -> Form {
        let mut f = Form::zero(s, t);
        if s > dims || t > dims {
            return f;
        }
        for _ in 0..components {
            let mut i: Vec<usize> = sample(rng, dims, s).into_vec();
            let mut j: Vec<usize> = sample(rng, dims, t).into_vec();
            i.sort_unstable();
            j.sort_unstable();
            f.add_unchecked((i, j), &CPoly::random(rng, dims, max_deg, n_terms));
        }
        f
    }
}

/// `(f, g) = Σ′ a^{I,J} ∫ f_{I,J} conj(g_{I,J}) dP_r`, exact.
pub fn form_inner(f: &Form, g: &Form, w: &Weights, r: f64) -> Complex64 {
    f.terms
        .iter()
        .filter_map(|(k, p)| g.terms.get(k).map(|q| cpoly_inner(p, q, w, r) * key_weight(k, w)))
        .sum()
}

pub fn form_norm_sq(f: &Form, w: &Weights, r: f64) -> f64 {
    form_inner(f, f, w, r).re
}

pub fn form_norm(f: &Form, w: &Weights, r: f64) -> f64 {
    form_norm_sq(f, w, r).max(0.0).sqrt()
}

/// Pointwise `Σ′ a^{I,J} f_{I,J} conj(g_{I,J})` from evaluated components.
pub fn pointwise_pairing(f: &[(FormKey, Complex64)], g: &[(FormKey, Complex64)], w: &Weights) -> Complex64 {
    let gm: BTreeMap<&FormKey, Complex64> = g.iter().map(|(k, v)| (k, *v)).collect();
    f.iter().filter_map(|(k, v)| gm.get(k).map(|u| v * u.conj() * key_weight(k, w))).sum()
}

/// Serialized form: a list of components `{I, J, terms}` with each term a
/// monomial `[[j, z-exp, z̄-exp], …]` and a complex coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormSpec {
    pub s: usize,
    pub t: usize,
    pub components: Vec<ComponentSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    #[serde(rename = "I")]
    pub i: Vec<usize>,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub monomial: Vec<(usize, u32, u32)>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl TryFrom<&FormSpec> for Form {
    type Error = Error;
    fn try_from(spec: &FormSpec) -> Result<Form> {
        let mut f = Form::zero(spec.s, spec.t);
        for c in &spec.components {
            let p = CPoly::from_terms(
                c.terms.iter().map(|t| (CMonomial::from_triples(t.monomial.iter().copied()), Complex64::new(t.re, t.im))),
            );
            f.add(c.i.clone(), c.j.clone(), p)?;
        }
        Ok(f)
    }
}

impl From<&Form> for FormSpec {
    fn from(f: &Form) -> FormSpec {
        FormSpec {
            s: f.s,
            t: f.t,
            components: f
                .terms
                .iter()
                .map(|((i, j), p)| ComponentSpec {
                    i: i.clone(),
                    j: j.clone(),
                    terms: p
                        .terms()
                        .map(|(m, c)| TermSpec { monomial: m.triples().to_vec(), re: c.re, im: c.im })
                        .collect(),
                })
                .collect(),
        }
    }
}
