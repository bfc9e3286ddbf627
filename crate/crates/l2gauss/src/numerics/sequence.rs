use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form continuation of a sequence past its explicit entries.
///
/// Positions are 1-based inside tail formulas: entry `i` (0-based) sits at
/// position `m = i + 1`. With `n` explicit entries and last value `v`:
/// `Geometric` gives `v·ratio^(m−n)`, `Power` gives `v·(m/n)^(−exponent)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailRule {
    Zero,
    Geometric { ratio: f64 },
    Power { exponent: f64 },
    Unknown,
}

/// A term `c·rho^m·m^(−p)` describing a tail in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailTerm {
    pub c: f64,
    pub rho: f64,
    pub p: f64,
}

impl TailTerm {
    pub const ZERO: TailTerm = TailTerm { c: 0.0, rho: 1.0, p: 0.0 };

    pub fn eval(&self, m: usize) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        let m = m as f64;
        let ln = self.c.abs().ln() + m * self.rho.ln() - self.p * m.ln();
        self.c.signum() * ln.exp()
    }

    pub fn mul(&self, o: &TailTerm) -> TailTerm {
        TailTerm { c: self.c * o.c, rho: self.rho * o.rho, p: self.p + o.p }
    }

    pub fn div(&self, o: &TailTerm) -> TailTerm {
        TailTerm { c: self.c / o.c, rho: self.rho / o.rho, p: self.p - o.p }
    }

    pub fn powf(&self, q: f64) -> TailTerm {
        TailTerm { c: self.c.abs().powf(q), rho: self.rho.powf(q), p: self.p * q }
    }

    pub fn scale(&self, s: f64) -> TailTerm {
        TailTerm { c: self.c * s, ..*self }
    }

    /// Whether terms are eventually non-increasing in absolute value.
    pub fn eventually_decreasing(&self) -> bool {
        self.c == 0.0 || self.rho < 1.0 || (self.rho == 1.0 && self.p >= 0.0)
    }

    /// `Σ_{m > n} c·rho^m·m^(−p)`, or `None` when the series diverges.
    pub fn sum_after(&self, n: usize) -> Option<f64> {
        if self.c == 0.0 {
            return Some(0.0);
        }
        let rho_is_one = (self.rho - 1.0).abs() <= 1e-14;
        if rho_is_one {
            if self.p <= 1.0 {
                return None;
            }
            return Some(self.c * hurwitz_tail(self.p, n + 1));
        }
        if self.rho > 1.0 {
            return None;
        }
        // Geometric decay dominates any power: sum until negligible.
        let mut total = 0.0;
        let mut m = n + 1;
        loop {
            let t = self.eval(m);
            total += t;
            if m > n + 8 && t.abs() <= 1e-18 * total.abs().max(1e-300) {
                break;
            }
            if t == 0.0 && m > n + 8 {
                break;
            }
            m += 1;
            if m > n + 2_000_000 {
                return None;
            }
        }
        Some(total)
    }
}

/// `Σ_{m ≥ start} m^(−p)` for `p > 1`, direct head plus Euler–Maclaurin tail.
fn hurwitz_tail(p: f64, start: usize) -> f64 {
    let start = start.max(1);
    let cut = start + 32;
    let head: f64 = (start..cut).map(|m| (m as f64).powf(-p)).sum();
    let mm = cut as f64;
    let tail = mm.powf(1.0 - p) / (p - 1.0) + 0.5 * mm.powf(-p) + p * mm.powf(-p - 1.0) / 12.0
        - p * (p + 1.0) * (p + 2.0) * mm.powf(-p - 3.0) / 720.0;
    head + tail
}

/// A real sequence: finitely many explicit entries and a tail rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub explicit: Vec<f64>,
    pub tail: TailRule,
}

impl Sequence {
    pub fn new(explicit: Vec<f64>, tail: TailRule) -> Self {
        Sequence { explicit, tail }
    }

    pub fn finite(explicit: Vec<f64>) -> Self {
        Sequence { explicit, tail: TailRule::Zero }
    }

    /// `first·ratio^i` for `i < n`, continued geometrically.
    pub fn geometric(first: f64, ratio: f64, n: usize) -> Self {
        let explicit = (0..n).map(|i| first * ratio.powi(i as i32)).collect();
        Sequence { explicit, tail: TailRule::Geometric { ratio } }
    }

    pub fn len_explicit(&self) -> usize {
        self.explicit.len()
    }

    /// Entry `i`, using the tail rule past the explicit part. `None` if the
    /// tail is unknown.
    pub fn try_get(&self, i: usize) -> Option<f64> {
        if i < self.explicit.len() {
            return Some(self.explicit[i]);
        }
        self.tail_term().map(|t| t.eval(i + 1))
    }

    pub fn get(&self, i: usize) -> f64 {
        self.try_get(i).expect("sequence tail is unknown")
    }

    /// The tail as a closed-form term in the 1-based position.
    pub fn tail_term(&self) -> Option<TailTerm> {
        let n = self.explicit.len();
        match self.tail {
            TailRule::Zero => Some(TailTerm::ZERO),
            TailRule::Unknown => None,
            _ if n == 0 => None,
            TailRule::Geometric { ratio } => {
                let v = self.explicit[n - 1];
                if v == 0.0 {
                    return Some(TailTerm::ZERO);
                }
                let c = v.signum() * (v.abs().ln() - n as f64 * ratio.ln()).exp();
                Some(TailTerm { c, rho: ratio, p: 0.0 })
            }
            TailRule::Power { exponent } => {
                let v = self.explicit[n - 1];
                Some(TailTerm { c: v * (n as f64).powf(exponent), rho: 1.0, p: exponent })
            }
        }
    }

    /// Entries `0..n`, extended by the tail rule when `n` exceeds the
    /// explicit part.
    pub fn head(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.get(i)).collect()
    }
}

/// The positive summable weights `a_i` defining every measure and norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Sequence", into = "Sequence")]
pub struct Weights(Sequence);

impl TryFrom<Sequence> for Weights {
    type Error = Error;
    fn try_from(s: Sequence) -> Result<Self> {
        Weights::new(s)
    }
}

impl From<Weights> for Sequence {
    fn from(w: Weights) -> Sequence {
        w.0
    }
}

impl Default for Weights {
    /// `a_i = 2^(−(i+1))` (0-based `i`), eight explicit entries.
    fn default() -> Self {
        Weights::geometric(0.5, 0.5, 8)
    }
}

impl Weights {
    pub fn new(seq: Sequence) -> Result<Self> {
        if seq.explicit.is_empty() {
            return Err(Error::InvalidInput("weights need at least one explicit entry".into()));
        }
        if let Some(i) = seq.explicit.iter().position(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidInput(format!("weight {i} is not positive")));
        }
        match seq.tail {
            TailRule::Geometric { ratio } if ratio > 0.0 && ratio < 1.0 => {}
            TailRule::Power { exponent } if exponent > 1.0 => {}
            _ => {
                return Err(Error::InvalidInput(
                    "weights need a summable positive tail rule".into(),
                ))
            }
        }
        Ok(Weights(seq))
    }

    pub fn geometric(first: f64, ratio: f64, n: usize) -> Self {
        Weights::new(Sequence::geometric(first, ratio, n)).expect("valid geometric weights")
    }

    /// Explicit weights continued geometrically with the given ratio.
    pub fn from_explicit(explicit: Vec<f64>, ratio: f64) -> Result<Self> {
        Weights::new(Sequence::new(explicit, TailRule::Geometric { ratio }))
    }

    pub fn a(&self, i: usize) -> f64 {
        self.0.get(i)
    }

    pub fn head(&self, n: usize) -> Vec<f64> {
        self.0.head(n)
    }

    pub fn sequence(&self) -> &Sequence {
        &self.0
    }

    pub fn len_explicit(&self) -> usize {
        self.0.len_explicit()
    }

    pub fn tail_term(&self) -> TailTerm {
        self.0.tail_term().expect("weights always carry a tail rule")
    }

    /// `sup_i a_i` (tails are decreasing by construction).
    pub fn sup(&self) -> f64 {
        let n = self.len_explicit();
        self.0.explicit.iter().copied().fold(self.a(n), f64::max)
    }

    /// `Σ_{i ≥ n} a_i^q` in closed form.
    pub fn power_sum_from(&self, n: usize, q: f64) -> f64 {
        let head: f64 = (n..self.len_explicit()).map(|i| self.a(i).powf(q)).sum();
        let start = n.max(self.len_explicit());
        let tail = self.tail_term().powf(q).sum_after(start).expect("summable weight tail");
        head + tail
    }
}
