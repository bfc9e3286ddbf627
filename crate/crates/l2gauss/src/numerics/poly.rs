use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use super::multi_index::MultiIndex;

/// A sparse real polynomial in finitely many of the coordinates `x_0, x_1, …`
/// (a cylinder function). Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<MultiIndex, f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Poly::monomial(MultiIndex::one(), c)
    }

    pub fn var(i: usize) -> Self {
        Poly::monomial(MultiIndex::var(i), 1.0)
    }

    pub fn monomial(m: MultiIndex, c: f64) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, f64)>>(terms: I) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &MultiIndex) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// Variables that appear with a nonzero exponent.
    pub fn support(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.pairs().iter().map(|&(i, _)| i)).collect()
    }

    /// One past the largest variable used.
    pub fn support_dim(&self) -> usize {
        self.terms.keys().filter_map(MultiIndex::max_var).max().map_or(0, |m| m + 1)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::from_terms(self.terms().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn map_coeffs(&self, f: impl Fn(&MultiIndex, f64) -> f64) -> Poly {
        Poly::from_terms(self.terms().map(|(m, c)| (m.clone(), f(m, c))))
    }

    /// Partial derivative `D_i`.
    pub fn deriv(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in self.terms() {
            let e = m.exp(i);
            if e > 0 {
                out.add_term(m.with_exp(i, e - 1), c * f64::from(e));
            }
        }
        out
    }

    /// Multiplication by `x_i`.
    pub fn mul_var(&self, i: usize) -> Poly {
        Poly::from_terms(self.terms().map(|(m, c)| (m.with_exp(i, m.exp(i) + 1), c)))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms().map(|(m, c)| c * m.eval(x)).sum()
    }

    /// Substitution `x_i → x_i + t`.
    pub fn shift(&self, i: usize, t: f64) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in self.terms() {
            let e = m.exp(i);
            let mut binom = 1.0;
            for k in 0..=e {
                // C(e,k) x^k t^(e−k)
                let coef = c * binom * t.powi((e - k) as i32);
                out.add_term(m.with_exp(i, k), coef);
                binom = binom * f64::from(e - k) / f64::from(k + 1);
            }
        }
        out
    }

    /// Substitution `x_i = v`.
    pub fn substitute(&self, i: usize, v: f64) -> Poly {
        Poly::from_terms(self.terms().map(|(m, c)| (m.with_exp(i, 0), c * v.powi(m.exp(i) as i32))))
    }

    /// Decomposition `p = Σ_k x_i^k · q_k` with `q_k` free of `x_i`.
    pub fn split_by_var(&self, i: usize) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in self.terms() {
            out.entry(m.exp(i)).or_default().add_term(m.with_exp(i, 0), c);
        }
        out
    }

    /// Drops every term of total degree above `cap`.
    pub fn truncate_degree(&self, cap: u32) -> Poly {
        Poly::from_terms(self.terms().filter(|(m, _)| m.degree() <= cap).map(|(m, c)| (m.clone(), c)))
    }

    /// Random polynomial with `n_terms` monomials of degree `≤ max_deg` in the
    /// first `dims` variables, coefficients uniform in `[−1, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dims: usize, max_deg: u32, n_terms: usize) -> Poly {
        let mut p = Poly::zero();
        for _ in 0..n_terms {
            let deg = rng.random_range(0..=max_deg);
            let pairs: Vec<(usize, u32)> = (0..deg).map(|_| (rng.random_range(0..dims), 1)).collect();
            let c: f64 = rng.random_range(-1.0..1.0);
            p.add_term(MultiIndex::from_pairs(pairs), c);
        }
        p
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in o.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in o.terms() {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in self.terms() {
            for (m2, c2) in o.terms() {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms().map(|(m, c)| format!("{c}*{m}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}
