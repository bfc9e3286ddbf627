use std::fmt;

use serde::{Deserialize, Serialize};

/// A finitely supported exponent pattern, stored as sorted `(variable,
/// exponent)` pairs with every exponent at least 1.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<(usize, u32)>);

impl MultiIndex {
    pub fn one() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn var(i: usize) -> Self {
        MultiIndex(vec![(i, 1)])
    }

    /// Builds from arbitrary pairs; zero exponents are dropped and repeated
    /// variables accumulate.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut v: Vec<(usize, u32)> = Vec::new();
        for (i, e) in pairs {
            if e == 0 {
                continue;
            }
            match v.binary_search_by_key(&i, |&(j, _)| j) {
                Ok(pos) => v[pos].1 += e,
                Err(pos) => v.insert(pos, (i, e)),
            }
        }
        MultiIndex(v)
    }

    /// Dense exponent vector `(α_0, α_1, …)`.
    pub fn from_dense(exps: &[u32]) -> Self {
        MultiIndex::from_pairs(exps.iter().enumerate().map(|(i, &e)| (i, e)))
    }

    pub fn to_dense(&self, n: usize) -> Vec<u32> {
        let mut out = vec![0; n];
        for &(i, e) in &self.0 {
            if i < n {
                out[i] = e;
            }
        }
        out
    }

    pub fn pairs(&self) -> &[(usize, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exp(&self, i: usize) -> u32 {
        match self.0.binary_search_by_key(&i, |&(j, _)| j) {
            Ok(pos) => self.0[pos].1,
            Err(_) => 0,
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|&(i, _)| i)
    }

    pub fn mul(&self, other: &MultiIndex) -> MultiIndex {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (0, 0);
        while a < self.0.len() && b < other.0.len() {
            let (i, e) = self.0[a];
            let (j, f) = other.0[b];
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    out.push((i, e));
                    a += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((j, f));
                    b += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((i, e + f));
                    a += 1;
                    b += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[a..]);
        out.extend_from_slice(&other.0[b..]);
        MultiIndex(out)
    }

    /// Exponent of `i` changed to `e` (removed when `e = 0`).
    pub fn with_exp(&self, i: usize, e: u32) -> MultiIndex {
        let mut v = self.0.clone();
        match v.binary_search_by_key(&i, |&(j, _)| j) {
            Ok(pos) => {
                if e == 0 {
                    v.remove(pos);
                } else {
                    v[pos].1 = e;
                }
            }
            Err(pos) => {
                if e > 0 {
                    v.insert(pos, (i, e));
                }
            }
        }
        MultiIndex(v)
    }

    /// `α!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&(_, e)| (1..=e).map(f64::from).product::<f64>()).product()
    }

    /// `Π x_i^{α_i}`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .map(|&(i, e)| x.get(i).copied().unwrap_or(0.0).powi(e as i32))
            .product()
    }

    /// Whether every variable used is below `n`.
    pub fn within(&self, n: usize) -> bool {
        self.max_var().is_none_or(|m| m < n)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&(i, e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}
