//! Power series in infinitely many variables and the coefficient recursion
//! for first-order linear Cauchy problems
//!
//! ```text
//! ∂_t u = Σ_i A_i ∂_{x_i} u + A_0 u,    u(0, x) = Φ(x)
//! ```
//!
//! Variable 0 of every [`MultiIndex`] is `t`; variable `i ≥ 1` is `x_i`.

use std::collections::BTreeMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::metric::near_infinity_gauge;
use crate::numerics::{MultiIndex, Sequence, TailRule};

pub const DEFAULT_DEGREE_CAP: u32 = 12;
pub const DEFAULT_DIMS: usize = 6;
/// Number of trailing diagonal coefficients used by the ratio test.
pub const RATIO_WINDOW: usize = 6;

/// Exact rationals used for residual checks.
pub type Rational = Ratio<i128>;

/// Scalar field of a series.
pub trait Coefficient:
    Clone
    + PartialEq
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_u32(n: u32) -> Self;
    fn magnitude(&self) -> f64;
}

impl Coefficient for f64 {
    fn from_u32(n: u32) -> Self {
        f64::from(n)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Coefficient for Rational {
    fn from_u32(n: u32) -> Self {
        Ratio::from_integer(i128::from(n))
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().unwrap_or(f64::INFINITY).abs()
    }
}

/// A finite sparse series `Σ c_α t^{α_0} x^α` with terms above the degree
/// cap dropped and their absolute mass recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<T> {
    terms: BTreeMap<MultiIndex, T>,
    degree_cap: u32,
    truncation: f64,
}

pub type MonomialSeries = Series<f64>;

impl<T: Coefficient> Series<T> {
    pub fn zero(degree_cap: u32) -> Self {
        Series { terms: BTreeMap::new(), degree_cap, truncation: 0.0 }
    }

    pub fn constant(degree_cap: u32, c: T) -> Self {
        Series::from_terms(degree_cap, [(MultiIndex::one(), c)])
    }

    pub fn var(degree_cap: u32, i: usize) -> Self {
        Series::from_terms(degree_cap, [(MultiIndex::var(i), T::from_u32(1))])
    }

    /// Sums repeated monomials; terms above the cap go to the truncation mass.
    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, T)>>(degree_cap: u32, terms: I) -> Self {
        let mut s = Series::zero(degree_cap);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub fn add_term(&mut self, m: MultiIndex, c: T) {
        if m.degree() > self.degree_cap {
            self.truncation += c.magnitude();
            return;
        }
        let e = self.terms.entry(m).or_insert_with(T::zero);
        *e = e.clone() + c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// Absolute coefficient mass dropped by the cap so far.
    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &T)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &MultiIndex) -> T {
        self.terms.get(m).cloned().unwrap_or_else(T::zero)
    }

    pub fn l1(&self) -> f64 {
        self.terms.values().map(Coefficient::magnitude).sum()
    }

    pub fn scale(&self, c: T) -> Self {
        Series::from_terms(self.degree_cap, self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c.clone())))
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = Series { truncation: self.truncation + o.truncation, ..self.clone() };
        out.degree_cap = self.degree_cap.min(o.degree_cap);
        out.terms.retain(|m, _| m.degree() <= out.degree_cap);
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-T::from_u32(1)))
    }

    /// `∂/∂(variable i)`.
    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Series::zero(self.degree_cap);
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e > 0 {
                out.add_term(m.with_exp(i, e - 1), c.clone() * T::from_u32(e));
            }
        }
        out
    }

    /// Drops every term using a variable beyond `x_dims`.
    pub fn restrict(&self, dims: usize) -> Self {
        Series {
            terms: self.terms.iter().filter(|(m, _)| m.within(dims + 1)).map(|(m, c)| (m.clone(), c.clone())).collect(),
            ..self.clone()
        }
    }

    pub fn with_cap(&self, cap: u32) -> Self {
        Series::from_terms(cap, self.terms.iter().map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> Series<U> {
        Series::from_terms(self.degree_cap, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }
}

/// Cauchy product truncated at the smaller cap. Dropped pairs and the
/// factors' own truncation feed the truncation mass.
pub fn series_product<T: Coefficient>(a: &Series<T>, b: &Series<T>) -> Series<T> {
    let mut out = Series::zero(a.degree_cap.min(b.degree_cap));
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            out.add_term(ma.mul(mb), ca.clone() * cb.clone());
        }
    }
    out.truncation += a.truncation * b.l1() + b.truncation * a.l1() + a.truncation * b.truncation;
    out
}

impl MonomialSeries {
    /// Exact rational copy; `None` if a coefficient is not finite.
    pub fn to_exact(&self) -> Option<Series<Rational>> {
        let terms: Option<Vec<(MultiIndex, Rational)>> =
            self.terms.iter().map(|(m, &c)| exact_ratio(c).map(|r| (m.clone(), r))).collect();
        Some(Series::from_terms(self.degree_cap, terms?))
    }

    pub fn abs(&self) -> MonomialSeries {
        self.map(|c| c.abs())
    }
}

/// The exact value of a binary float as a ratio of `i128`s, when it fits.
pub fn exact_ratio(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(Rational::zero());
    }
    let bits = x.to_bits();
    let sign: i128 = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mut mant = (bits & 0xf_ffff_ffff_ffff) as i128;
    let mut e = if exp == 0 { -1074 } else { exp - 1075 };
    if exp != 0 {
        mant |= 1 << 52;
    }
    while mant % 2 == 0 {
        mant /= 2;
        e += 1;
    }
    if e >= 0 {
        let v = mant.checked_mul(1i128.checked_shl(e as u32)?)?;
        Some(Ratio::from_integer(sign * v))
    } else if -e < 126 {
        Some(Ratio::new(sign * mant, 1i128 << (-e)))
    } else {
        None
    }
}

/// Serialized series: `[[exponents of (t, x_1, …)], coefficient]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    #[serde(default = "default_cap")]
    pub degree_cap: u32,
    pub terms: Vec<(Vec<u32>, f64)>,
}

fn default_cap() -> u32 {
    DEFAULT_DEGREE_CAP
}

impl From<&MonomialSeries> for SeriesSpec {
    fn from(s: &MonomialSeries) -> Self {
        let width = s.terms.keys().filter_map(MultiIndex::max_var).max().map_or(1, |m| m + 1);
        SeriesSpec { degree_cap: s.degree_cap, terms: s.terms.iter().map(|(m, &c)| (m.to_dense(width), c)).collect() }
    }
}

impl From<&SeriesSpec> for MonomialSeries {
    fn from(s: &SeriesSpec) -> Self {
        Series::from_terms(s.degree_cap, s.terms.iter().map(|(e, c)| (MultiIndex::from_dense(e), *c)))
    }
}

/// `∂_t u = Σ_i A_i ∂_{x_i} u + A_0 u`, `u(0, ·) = Φ`. The `A_i` are keyed by
/// `i ≥ 1`; only the `t = 0` part of `Φ` is used.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCauchyProblem<T = f64> {
    pub a0: Series<T>,
    pub a: BTreeMap<usize, Series<T>>,
    pub phi: Series<T>,
}

impl<T: Coefficient> LinearCauchyProblem<T> {
    /// Repeated indices are summed.
    pub fn new<I: IntoIterator<Item = (usize, Series<T>)>>(a0: Series<T>, a: I, phi: Series<T>) -> Result<Self> {
        let mut map: BTreeMap<usize, Series<T>> = BTreeMap::new();
        for (i, s) in a {
            if i == 0 {
                return Err(Error::InvalidInput("spatial coefficients are indexed from 1".into()));
            }
            let next = match map.remove(&i) {
                Some(prev) => prev.add(&s),
                None => s,
            };
            map.insert(i, next);
        }
        Ok(LinearCauchyProblem { a0, a: map, phi })
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U + Copy) -> LinearCauchyProblem<U> {
        LinearCauchyProblem {
            a0: self.a0.map(f),
            a: self.a.iter().map(|(&i, s)| (i, s.map(f))).collect(),
            phi: self.phi.map(f),
        }
    }

    /// `∂_t u − Σ A_i ∂_i u − A_0 u` through total degree `cap`.
    pub fn residual(&self, u: &Series<T>, cap: u32) -> Series<T> {
        let u = u.with_cap(cap + 1);
        let mut out = u.deriv(0).with_cap(cap);
        for (&i, ai) in &self.a {
            out = out.sub(&series_product(&ai.with_cap(cap), &u.deriv(i).with_cap(cap)));
        }
        out.sub(&series_product(&self.a0.with_cap(cap), &u.with_cap(cap)))
    }
}

impl LinearCauchyProblem<f64> {
    /// The same problem with every coefficient replaced by its absolute value.
    pub fn majorant(&self) -> Self {
        self.map(|c| c.abs())
    }

    pub fn to_exact(&self) -> Option<LinearCauchyProblem<Rational>> {
        Some(LinearCauchyProblem {
            a0: self.a0.to_exact()?,
            a: self.a.iter().map(|(&i, s)| s.to_exact().map(|e| (i, e))).collect::<Option<_>>()?,
            phi: self.phi.to_exact()?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub a0: SeriesSpec,
    #[serde(default)]
    pub a: Vec<(usize, SeriesSpec)>,
    pub phi: SeriesSpec,
}

impl TryFrom<&ProblemSpec> for LinearCauchyProblem {
    type Error = Error;
    fn try_from(p: &ProblemSpec) -> Result<Self> {
        LinearCauchyProblem::new((&p.a0).into(), p.a.iter().map(|(i, s)| (*i, s.into())), (&p.phi).into())
    }
}

type Slice<T> = BTreeMap<MultiIndex, T>;

fn add_into<T: Coefficient>(acc: &mut Slice<T>, m: MultiIndex, c: T) {
    let e = acc.entry(m).or_insert_with(T::zero);
    *e = e.clone() + c;
}

/// The `t^k` coefficient of `A ∂_i u` (or `A u` when `i` is `None`), kept to
/// spatial degree `xcap`.
fn slice_term<T: Coefficient>(a: &Series<T>, i: Option<usize>, slices: &[Slice<T>], k: usize, xcap: u32) -> Slice<T> {
    let mut acc = Slice::new();
    for (ma, ca) in &a.terms {
        let ta = ma.exp(0) as usize;
        if ta > k {
            continue;
        }
        let ax = ma.with_exp(0, 0);
        if ax.degree() > xcap + u32::from(i.is_some()) {
            continue;
        }
        for (mu, cu) in &slices[k - ta] {
            let (m, c) = match i {
                Some(i) => {
                    let e = mu.exp(i);
                    if e == 0 {
                        continue;
                    }
                    (mu.with_exp(i, e - 1), cu.clone() * T::from_u32(e))
                }
                None => (mu.clone(), cu.clone()),
            };
            let target = ax.mul(&m);
            if target.degree() <= xcap {
                add_into(&mut acc, target, ca.clone() * c);
            }
        }
    }
    acc
}

/// Coefficients of the solution through total degree `degree_cap`, with the
/// data restricted to `t, x_1, …, x_dims`.
pub fn ck_solve<T: Coefficient>(problem: &LinearCauchyProblem<T>, degree_cap: u32, dims: usize) -> Series<T> {
    let a0 = problem.a0.restrict(dims);
    let coeffs: Vec<(Option<usize>, Series<T>)> = problem
        .a
        .iter()
        .filter(|(&i, _)| i <= dims)
        .map(|(&i, s)| (Some(i), s.restrict(dims)))
        .chain([(None, a0)])
        .collect();
    let mut slices: Vec<Slice<T>> = vec![problem
        .phi
        .restrict(dims)
        .terms
        .iter()
        .filter(|(m, _)| m.exp(0) == 0 && m.degree() <= degree_cap)
        .map(|(m, c)| (m.clone(), c.clone()))
        .collect()];
    for k in 0..degree_cap as usize {
        let xcap = degree_cap - k as u32 - 1;
        let parts: Vec<Slice<T>> = coeffs.par_iter().map(|(i, a)| slice_term(a, *i, &slices, k, xcap)).collect();
        let mut next = Slice::new();
        for part in parts {
            for (m, c) in part {
                add_into(&mut next, m, c);
            }
        }
        let div = T::from_u32(k as u32 + 1);
        slices.push(next.into_iter().filter(|(_, c)| !c.is_zero()).map(|(m, c)| (m, c / div.clone())).collect());
    }
    Series::from_terms(
        degree_cap,
        slices.into_iter().enumerate().flat_map(|(k, s)| s.into_iter().map(move |(m, c)| (m.with_exp(0, k as u32), c))),
    )
}

/// Scales `s_i = ρ_0/|v_i|` with `Σ s_i^p = 1`; `s` index `j` scales `x_{j+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MajorantFrame {
    pub p: f64,
    pub rho0: f64,
    pub s: Sequence,
}

impl MajorantFrame {
    /// Scale of `x_i`, `i ≥ 1`.
    pub fn scale(&self, i: usize) -> f64 {
        self.s.get(i - 1)
    }

    /// `Σ s_i^p` including the closed-form tail.
    pub fn power_sum(&self) -> Result<f64> {
        let head: f64 = self.s.explicit.iter().map(|x| x.powf(self.p)).sum();
        let tail = self.s.tail_term().ok_or(Error::TailNotCertified)?.powf(self.p);
        tail.sum_after(self.s.len_explicit()).map(|t| head + t).ok_or(Error::NotNearInfinity)
    }
}

pub fn majorant_frame(v: &Sequence, p: f64) -> Result<MajorantFrame> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidInput(format!("frame exponent {p} must be a finite real ≥ 1")));
    }
    let gauge = match near_infinity_gauge(v, p) {
        Ok(g) => g,
        Err(Error::ZeroCoordinate { .. }) => return Err(Error::NotNearInfinity),
        Err(e) => return Err(e),
    };
    if !gauge.is_finite() {
        return Err(Error::NotNearInfinity);
    }
    let rho0 = gauge.powf(-1.0 / p);
    let tail = match v.tail {
        TailRule::Geometric { ratio } => TailRule::Geometric { ratio: 1.0 / ratio },
        TailRule::Power { exponent } => TailRule::Power { exponent: -exponent },
        ref other => other.clone(),
    };
    let s = Sequence::new(v.explicit.iter().map(|x| rho0 / x.abs()).collect(), tail);
    let frame = MajorantFrame { p, rho0, s };
    let total = frame.power_sum()?;
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::ConditionViolated(format!("frame scales sum to {total}, not 1")));
    }
    Ok(frame)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    /// Radius of the `ℓ^{p′}` ball; `+∞` when `entire` is set.
    pub radius: f64,
    pub entire: bool,
    /// `d_N = Σ_{n+m=N} K_{n,m}` for `N = 0..=cap`.
    pub diagonal: Vec<f64>,
    /// `d_{N+1}/d_N` over the trailing window.
    pub ratios: Vec<f64>,
}

/// Two-variable majorant coefficients `K_{n,m}` (`m` the `t`-degree) of the
/// majorant solution under `x_i → s_i y`, normalised so that
/// `Σ_{|α|=n} C_α x^α ≪ K_n (Σ s_i x_i)^n`, summed along diagonals.
fn diagonal_majorants(u: &MonomialSeries, frame: &MajorantFrame, cap: u32) -> Vec<f64> {
    let mut k: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (m, &c) in u.terms() {
        let mt = m.exp(0);
        let x = m.with_exp(0, 0);
        let n = x.degree();
        let n_fact: f64 = (1..=n).map(f64::from).product();
        let scale: f64 = x.pairs().iter().map(|&(i, e)| frame.scale(i).powi(e as i32)).product();
        let v = c.abs() * x.factorial() / (n_fact * scale);
        let e = k.entry((n, mt)).or_insert(0.0);
        *e = e.max(v);
    }
    let mut d = vec![0.0; cap as usize + 1];
    for ((n, m), v) in k {
        d[(n + m) as usize] += v;
    }
    d
}

/// Ratio test on the trailing diagonal of the majorant series.
///
/// Zero tail: entire. Strictly falling ratios with `(N+1)·d_{N+1}/d_N`
/// non-increasing: factorial decay, entire. Otherwise ratios within a factor
/// 1.5 of each other give radius `1/max ratio`; anything else is reported
/// as inconclusive.
pub fn convergence_certificate_with(
    problem: &LinearCauchyProblem,
    frame: &MajorantFrame,
    degree_cap: u32,
    dims: usize,
) -> Result<ConvergenceCertificate> {
    if (degree_cap as usize) < RATIO_WINDOW {
        return Err(Error::InvalidInput(format!("degree cap must be at least {RATIO_WINDOW}")));
    }
    let u = ck_solve(&problem.majorant(), degree_cap, dims);
    let diagonal = diagonal_majorants(&u, frame, degree_cap);
    let window = &diagonal[diagonal.len() - RATIO_WINDOW..];
    let first_n = diagonal.len() - RATIO_WINDOW;
    if window.iter().all(|&d| d == 0.0) {
        return Ok(ConvergenceCertificate { radius: f64::INFINITY, entire: true, diagonal, ratios: Vec::new() });
    }
    if window.iter().any(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::RatioTestInconclusive);
    }
    let ratios: Vec<f64> = window.windows(2).map(|w| w[1] / w[0]).collect();
    let falling = ratios.windows(2).all(|q| q[1] < q[0]);
    let weighted: Vec<f64> = ratios.iter().enumerate().map(|(j, q)| q * (first_n + j + 1) as f64).collect();
    let factorial = falling && weighted.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    if factorial {
        return Ok(ConvergenceCertificate { radius: f64::INFINITY, entire: true, diagonal, ratios });
    }
    let qmax = ratios.iter().copied().fold(0.0, f64::max);
    let qmin = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if qmax > 1.5 * qmin {
        return Err(Error::RatioTestInconclusive);
    }
    Ok(ConvergenceCertificate { radius: 1.0 / qmax, entire: false, diagonal, ratios })
}

pub fn convergence_certificate(problem: &LinearCauchyProblem, frame: &MajorantFrame) -> Result<ConvergenceCertificate> {
    convergence_certificate_with(problem, frame, DEFAULT_DEGREE_CAP, DEFAULT_DIMS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const D: u32 = DEFAULT_DEGREE_CAP;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::from_dense(e)
    }

    fn zero() -> MonomialSeries {
        Series::zero(D)
    }

    fn random_series(rng: &mut ChaCha8Rng, dims: usize, max_deg: u32, n: usize, with_t: bool) -> MonomialSeries {
        Series::from_terms(
            D,
            (0..n).map(|_| {
                let mut e = vec![0u32; dims + 1];
                let deg = rng.random_range(0..=max_deg);
                for _ in 0..deg {
                    let v = if with_t { rng.random_range(0..=dims) } else { rng.random_range(1..=dims) };
                    e[v] += 1;
                }
                // small dyadic values keep the exact route inside i128
                (mi(&e), f64::from(rng.random_range(-4i32..=4)) / 4.0)
            }),
        )
    }

    fn random_problem(rng: &mut ChaCha8Rng, dims: usize) -> LinearCauchyProblem {
        let a: Vec<(usize, MonomialSeries)> = (1..=dims).map(|i| (i, random_series(rng, dims, 1, 2, true))).collect();
        let a0 = random_series(rng, dims, 1, 2, true);
        LinearCauchyProblem::new(a0, a, random_series(rng, dims, 3, 4, false)).unwrap()
    }

    #[test]
    fn product_examples() {
        let x1 = Series::<f64>::var(D, 1);
        let x2 = Series::<f64>::var(D, 2);
        assert_eq!(series_product(&x1, &Series::constant(D, 1.0)), x1);
        assert_eq!(series_product(&x1, &x2), Series::from_terms(D, [(mi(&[0, 1, 1]), 1.0)]));
        let geom = Series::from_terms(D, (0..=D).map(|k| (mi(&[0, k]), 1.0)));
        let one_minus = Series::from_terms(D, [(MultiIndex::one(), 1.0), (mi(&[0, 1]), -1.0)]);
        let p = series_product(&geom, &one_minus);
        assert_eq!(p, Series { truncation: 1.0, ..Series::constant(D, 1.0) });
    }

    #[test]
    fn exact_ratio_examples() {
        assert_eq!(exact_ratio(0.75), Some(Ratio::new(3, 4)));
        assert_eq!(exact_ratio(-6.0), Some(Ratio::from_integer(-6)));
        assert_eq!(exact_ratio(0.1).map(|r| r.to_f64().unwrap()), Some(0.1));
        assert_eq!(exact_ratio(f64::NAN), None);
    }

    #[test]
    fn frame_examples() {
        let f = majorant_frame(&Sequence::geometric(2.0, 2.0, 6), 1.0).unwrap();
        assert!((f.rho0 - 1.0).abs() < 1e-14);
        for j in 0..20 {
            assert!((f.s.get(j) - 0.5f64.powi(j as i32 + 1)).abs() < 1e-15);
        }
        let flat = majorant_frame(&Sequence::new(vec![3.0; 4], TailRule::Geometric { ratio: 3.0 }), 2.0).unwrap();
        assert!(flat.s.explicit.windows(2).all(|w| w[0] == w[1]));
        assert!((flat.power_sum().unwrap() - 1.0).abs() < 1e-12);
        let bad = Sequence::new(vec![1.0, 0.0, 2.0], TailRule::Geometric { ratio: 2.0 });
        assert_eq!(majorant_frame(&bad, 1.0), Err(Error::NotNearInfinity));
        let bounded = Sequence::new(vec![1.0], TailRule::Geometric { ratio: 1.0 });
        assert_eq!(majorant_frame(&bounded, 1.0), Err(Error::NotNearInfinity));
    }

    proptest! {
        #[test]
        fn frame_scales_sum_to_one(first in 1.0f64..5.0, ratio in 1.2f64..4.0, n in 1usize..8, p in 1.0f64..3.0) {
            let f = majorant_frame(&Sequence::geometric(first, ratio, n), p).unwrap();
            prop_assert!((f.power_sum().unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((0..n + 5).all(|j| f.s.get(j) > 0.0 && f.s.get(j) < 1.0 + 1e-15));
        }
    }

    #[test]
    fn transport_solution() {
        let p = LinearCauchyProblem::new(zero(), [(1, Series::constant(D, 1.0))], Series::var(D, 1)).unwrap();
        let u = ck_solve(&p, D, DEFAULT_DIMS);
        let expect = Series::from_terms(D, [(mi(&[1]), 1.0), (mi(&[0, 1]), 1.0)]);
        assert_eq!(u, expect);
    }

    #[test]
    fn exponential_solution() {
        let p = LinearCauchyProblem::new(Series::constant(D, 1.0), [], Series::constant(D, 1.0)).unwrap();
        let u = ck_solve(&p, D, DEFAULT_DIMS);
        let mut fact = 1.0;
        for k in 0..=D {
            if k > 0 {
                fact *= f64::from(k);
            }
            assert!((u.coeff(&mi(&[k])) - 1.0 / fact).abs() < 1e-15);
        }
        assert_eq!(u.len(), D as usize + 1);
        let exact = ck_solve(&p.to_exact().unwrap(), D, DEFAULT_DIMS);
        assert_eq!(exact.coeff(&mi(&[D])), Ratio::new(1, 479_001_600));
    }

    #[test]
    fn zero_datum_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let mut p = random_problem(&mut rng, 3);
        p.phi = zero();
        assert!(ck_solve(&p, D, 3).is_empty());
    }

    #[test]
    fn residual_vanishes_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..6 {
            let p = random_problem(&mut rng, 2).to_exact().unwrap();
            let u = ck_solve(&p, 8, 2);
            assert!(p.residual(&u, 7).is_empty());
        }
        // the float route agrees with the exact one
        let p = random_problem(&mut rng, 2);
        let u = ck_solve(&p, 8, 2);
        let exact = ck_solve(&p.to_exact().unwrap(), 8, 2);
        for (m, c) in exact.terms() {
            assert!((u.coeff(m) - c.to_f64().unwrap()).abs() <= 1e-12 * c.to_f64().unwrap().abs().max(1.0));
        }
        assert!(p.residual(&u, 7).l1() < 1e-10);
    }

    #[test]
    fn locality_in_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..4 {
            // directions beyond the small truncation carry no transport
            let mut p = random_problem(&mut rng, 4);
            p.a.retain(|&i, _| i <= 2);
            let small = ck_solve(&p, 7, 2);
            let large = ck_solve(&p, 7, 4);
            for (m, c) in small.terms() {
                assert!((large.coeff(m) - c).abs() <= 1e-12 * c.abs().max(1.0));
            }
            for (m, c) in large.terms() {
                if m.within(3) {
                    assert!((small.coeff(m) - c).abs() <= 1e-12 * c.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn transport_along_dropped_direction_breaks_locality() {
        // u = x_1 + x_2 + t·x_1 solves ∂_t u = x_1 ∂_2 u; truncating to x_1 alone loses t·x_1
        let phi = Series::from_terms(D, [(mi(&[0, 1]), 1.0), (mi(&[0, 0, 1]), 1.0)]);
        let p = LinearCauchyProblem::new(zero(), [(2, Series::var(D, 1))], phi).unwrap();
        assert_eq!(ck_solve(&p, D, 2).coeff(&mi(&[1, 1])), 1.0);
        assert_eq!(ck_solve(&p, D, 1).coeff(&mi(&[1, 1])), 0.0);
    }

    #[test]
    fn majorant_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..5 {
            let p = random_problem(&mut rng, 3);
            let u = ck_solve(&p, 9, 3);
            let big = ck_solve(&p.majorant(), 9, 3);
            for (m, c) in u.terms() {
                assert!(c.abs() <= big.coeff(m) * (1.0 + 1e-12) + 1e-15, "{m:?}");
            }
        }
    }

    #[test]
    fn order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let p = random_problem(&mut rng, 3);
        let mut a: Vec<(usize, MonomialSeries)> = p.a.clone().into_iter().collect();
        a.reverse();
        let reordered_phi: Vec<(MultiIndex, f64)> = p.phi.terms().rev().map(|(m, c)| (m.clone(), *c)).collect();
        let q = LinearCauchyProblem::new(p.a0.clone(), a, Series::from_terms(D, reordered_phi)).unwrap();
        assert_eq!(ck_solve(&p, D, 3), ck_solve(&q, D, 3));
    }

    #[test]
    fn certificates() {
        let frame = majorant_frame(&Sequence::geometric(2.0, 2.0, 6), 1.0).unwrap();
        let transport = LinearCauchyProblem::new(zero(), [(1, Series::constant(D, 1.0))], Series::var(D, 1)).unwrap();
        let c = convergence_certificate(&transport, &frame).unwrap();
        assert!(c.entire && c.radius.is_infinite());
        let expo = LinearCauchyProblem::new(Series::constant(D, 2.0), [], Series::var(D, 1)).unwrap();
        assert!(convergence_certificate(&expo, &frame).unwrap().entire);

        // Φ = Σ (x_1/2)^k: the one-variable ratio test gives radius 2 in x_1
        let geom = Series::from_terms(D, (0..=D).map(|k| (mi(&[0, k]), 0.5f64.powi(k as i32))));
        let still = LinearCauchyProblem::new(zero(), [], geom).unwrap();
        let c = convergence_certificate(&still, &frame).unwrap();
        let s1 = frame.scale(1);
        assert!(!c.entire);
        assert!((c.radius - 2.0 * s1).abs() < 1e-12 && c.radius <= 2.0);

        // only even powers: the ratio test cannot decide
        let even = Series::from_terms(D, (0..=D / 2).map(|k| (mi(&[0, 2 * k]), 1.0)));
        let p = LinearCauchyProblem::new(zero(), [], even).unwrap();
        assert_eq!(convergence_certificate(&p, &frame), Err(Error::RatioTestInconclusive));
    }

    #[test]
    fn spec_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let p = random_problem(&mut rng, 2);
        let spec = ProblemSpec {
            a0: (&p.a0).into(),
            a: p.a.iter().map(|(&i, s)| (i, s.into())).collect(),
            phi: (&p.phi).into(),
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: ProblemSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(LinearCauchyProblem::try_from(&back).unwrap(), p);
    }
}
