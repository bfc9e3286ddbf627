//! The d_p metrics and the near-infinity gauge.

use crate::error::{Error, Result};

use super::point::TruncatedPoint;
use super::sequence::Sequence;

/// `min{1, (Σ|x_i − y_i|^p)^{1/max(1,p)}}`, and the capped supremum for
/// `p = ∞`.
pub fn dp_distance(x: &TruncatedPoint, y: &TruncatedPoint, p: f64) -> f64 {
    let n = x.len().max(y.len());
    let diffs = (0..n).map(|i| (x.get(i) - y.get(i)).abs());
    let raw = if p.is_infinite() {
        diffs.fold(0.0, f64::max)
    } else {
        diffs.map(|d| d.powf(p)).sum::<f64>().powf(1.0 / p.max(1.0))
    };
    raw.min(1.0)
}

/// `Σ 1/|v_i|^p` including the closed-form tail; `+∞` when the tail diverges.
pub fn near_infinity_gauge(v: &Sequence, p: f64) -> Result<f64> {
    if let Some(index) = v.explicit.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroCoordinate { index });
    }
    let tail = v.tail_term().ok_or(Error::TailNotCertified)?;
    if tail.c == 0.0 {
        return Err(Error::ZeroCoordinate { index: v.len_explicit() });
    }
    let head: f64 = v.explicit.iter().map(|x| x.abs().powf(-p)).sum();
    let inv = tail.powf(-p);
    Ok(match inv.sum_after(v.len_explicit()) {
        Some(t) => head + t,
        None => f64::INFINITY,
    })
}
