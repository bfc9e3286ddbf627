use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;

/// A monomial `Π z_j^{m_j} z̄_j^{n_j}`, stored as sorted `(j, m_j, n_j)`
/// triples with `m_j + n_j ≥ 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CMonomial(Vec<(usize, u32, u32)>);

impl CMonomial {
    pub fn one() -> Self {
        CMonomial(Vec::new())
    }

    pub fn from_triples<I: IntoIterator<Item = (usize, u32, u32)>>(it: I) -> Self {
        let mut v: Vec<(usize, u32, u32)> = Vec::new();
        for (j, m, n) in it {
            if m + n == 0 {
                continue;
            }
            match v.binary_search_by_key(&j, |t| t.0) {
                Ok(p) => {
                    v[p].1 += m;
                    v[p].2 += n;
                }
                Err(p) => v.insert(p, (j, m, n)),
            }
        }
        CMonomial(v)
    }

    pub fn triples(&self) -> &[(usize, u32, u32)] {
        &self.0
    }

    pub fn exps(&self, j: usize) -> (u32, u32) {
        match self.0.binary_search_by_key(&j, |t| t.0) {
            Ok(p) => (self.0[p].1, self.0[p].2),
            Err(_) => (0, 0),
        }
    }

    pub fn with_exps(&self, j: usize, m: u32, n: u32) -> CMonomial {
        let mut v = self.0.clone();
        match v.binary_search_by_key(&j, |t| t.0) {
            Ok(p) => {
                if m + n == 0 {
                    v.remove(p);
                } else {
                    v[p] = (j, m, n);
                }
            }
            Err(p) => {
                if m + n > 0 {
                    v.insert(p, (j, m, n));
                }
            }
        }
        CMonomial(v)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|t| t.1 + t.2).sum()
    }

    pub fn mul(&self, o: &CMonomial) -> CMonomial {
        CMonomial::from_triples(self.0.iter().chain(o.0.iter()).copied())
    }

    /// Swaps `z` and `z̄` exponents.
    pub fn conj(&self) -> CMonomial {
        CMonomial(self.0.iter().map(|&(j, m, n)| (j, n, m)).collect())
    }

    /// Whether every variable carries equal `z` and `z̄` exponents.
    pub fn is_balanced(&self) -> bool {
        self.0.iter().all(|&(_, m, n)| m == n)
    }

    /// Whether no `z̄` appears.
    pub fn is_holomorphic(&self) -> bool {
        self.0.iter().all(|&(_, _, n)| n == 0)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|t| t.0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.0.iter().fold(Complex64::new(1.0, 0.0), |acc, &(j, m, n)| {
            let zj = z.get(j).copied().unwrap_or_default();
            acc * zj.powu(m) * zj.conj().powu(n)
        })
    }
}

impl fmt::Display for CMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for &(j, m, n) in &self.0 {
            if m > 0 {
                parts.push(if m == 1 { format!("z{j}") } else { format!("z{j}^{m}") });
            }
            if n > 0 {
                parts.push(if n == 1 { format!("zb{j}") } else { format!("zb{j}^{n}") });
            }
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// A sparse complex polynomial in `z_j, z̄_j` (a complex cylinder function).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CPoly {
    terms: BTreeMap<CMonomial, Complex64>,
}

impl CPoly {
    pub fn zero() -> Self {
        CPoly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        CPoly::monomial(CMonomial::one(), c)
    }

    pub fn real(c: f64) -> Self {
        CPoly::constant(Complex64::new(c, 0.0))
    }

    pub fn one() -> Self {
        CPoly::real(1.0)
    }

    /// `z_j`.
    pub fn z(j: usize) -> Self {
        CPoly::monomial(CMonomial::from_triples([(j, 1, 0)]), Complex64::new(1.0, 0.0))
    }

    /// `z̄_j`.
    pub fn zbar(j: usize) -> Self {
        CPoly::monomial(CMonomial::from_triples([(j, 0, 1)]), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(m: CMonomial, c: Complex64) -> Self {
        let mut p = CPoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (CMonomial, Complex64)>>(it: I) -> Self {
        let mut p = CPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: CMonomial, c: Complex64) {
        if c == Complex64::default() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == Complex64::default() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&CMonomial, Complex64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &CMonomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(CMonomial::degree).max().unwrap_or(0)
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.triples().iter().map(|t| t.0)).collect()
    }

    pub fn support_dim(&self) -> usize {
        self.terms.keys().filter_map(CMonomial::max_var).max().map_or(0, |m| m + 1)
    }

    pub fn scale(&self, s: Complex64) -> CPoly {
        CPoly::from_terms(self.terms().map(|(m, c)| (m.clone(), c * s)))
    }

    pub fn scale_re(&self, s: f64) -> CPoly {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `∂/∂z_j`.
    pub fn dz(&self, j: usize) -> CPoly {
        let mut out = CPoly::zero();
        for (mono, c) in self.terms() {
            let (m, n) = mono.exps(j);
            if m > 0 {
                out.add_term(mono.with_exps(j, m - 1, n), c * f64::from(m));
            }
        }
        out
    }

    /// `∂/∂z̄_j`.
    pub fn dzbar(&self, j: usize) -> CPoly {
        let mut out = CPoly::zero();
        for (mono, c) in self.terms() {
            let (m, n) = mono.exps(j);
            if n > 0 {
                out.add_term(mono.with_exps(j, m, n - 1), c * f64::from(n));
            }
        }
        out
    }

    pub fn mul_z(&self, j: usize) -> CPoly {
        CPoly::from_terms(self.terms().map(|(mono, c)| {
            let (m, n) = mono.exps(j);
            (mono.with_exps(j, m + 1, n), c)
        }))
    }

    pub fn mul_zbar(&self, j: usize) -> CPoly {
        CPoly::from_terms(self.terms().map(|(mono, c)| {
            let (m, n) = mono.exps(j);
            (mono.with_exps(j, m, n + 1), c)
        }))
    }

    /// Complex conjugate function `z ↦ conj(p(z))`.
    pub fn conj(&self) -> CPoly {
        CPoly::from_terms(self.terms().map(|(m, c)| (m.conj(), c.conj())))
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms().map(|(m, c)| c * m.eval(z)).sum()
    }

    /// Largest coefficient modulus.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Random polynomial: `n_terms` monomials of degree `≤ max_deg` in the first
    /// `dims` complex variables with coefficients in the unit square.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dims: usize, max_deg: u32, n_terms: usize) -> CPoly {
        let mut p = CPoly::zero();
        for _ in 0..n_terms {
            let deg = rng.random_range(0..=max_deg);
            let triples: Vec<(usize, u32, u32)> = (0..deg)
                .map(|_| {
                    let j = rng.random_range(0..dims);
                    if rng.random_bool(0.5) {
                        (j, 1, 0)
                    } else {
                        (j, 0, 1)
                    }
                })
                .collect();
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            p.add_term(CMonomial::from_triples(triples), c);
        }
        p
    }

    /// Random holomorphic polynomial (no `z̄`).
    pub fn random_holomorphic<R: Rng + ?Sized>(
        rng: &mut R,
        dims: usize,
        max_deg: u32,
        n_terms: usize,
    ) -> CPoly {
        let mut p = CPoly::zero();
        for _ in 0..n_terms {
            let deg = rng.random_range(0..=max_deg);
            let triples: Vec<(usize, u32, u32)> =
                (0..deg).map(|_| (rng.random_range(0..dims), 1, 0)).collect();
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            p.add_term(CMonomial::from_triples(triples), c);
        }
        p
    }
}

impl Add for &CPoly {
    type Output = CPoly;
    fn add(self, o: &CPoly) -> CPoly {
        let mut out = self.clone();
        for (m, c) in o.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl Sub for &CPoly {
    type Output = CPoly;
    fn sub(self, o: &CPoly) -> CPoly {
        let mut out = self.clone();
        for (m, c) in o.terms() {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &CPoly {
    type Output = CPoly;
    fn mul(self, o: &CPoly) -> CPoly {
        let mut out = CPoly::zero();
        for (m1, c1) in self.terms() {
            for (m2, c2) in o.terms() {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        self.scale_re(-1.0)
    }
}

impl fmt::Display for CPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms().map(|(m, c)| format!("({}{:+}i)*{m}", c.re, c.im)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn wirtinger_derivatives_act_on_separate_exponents() {
        let p = &(&CPoly::z(0) * &CPoly::z(0)) * &CPoly::zbar(0);
        assert_eq!(p.dz(0), (&CPoly::z(0) * &CPoly::zbar(0)).scale(c(2.0)));
        assert_eq!(p.dzbar(0), &CPoly::z(0) * &CPoly::z(0));
        assert!(CPoly::z(1).dzbar(1).is_zero());
    }

    #[test]
    fn conj_matches_pointwise_conjugate() {
        let p = &CPoly::z(0).scale(Complex64::new(1.0, 2.0)) + &CPoly::zbar(1);
        let z = [Complex64::new(0.3, -0.4), Complex64::new(1.5, 0.5)];
        assert!((p.conj().eval(&z) - p.eval(&z).conj()).norm() < 1e-14);
    }

    #[test]
    fn balanced_and_holomorphic_flags() {
        let m = CMonomial::from_triples([(0, 2, 2), (3, 1, 1)]);
        assert!(m.is_balanced());
        assert!(!m.is_holomorphic());
        assert!(CMonomial::from_triples([(2, 3, 0)]).is_holomorphic());
    }
}
