use serde::{Deserialize, Serialize};

/// A point of ℓ² with finitely many explicit coordinates and zeros beyond.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TruncatedPoint(pub Vec<f64>);

impl TruncatedPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        TruncatedPoint(coords)
    }

    pub fn zeros(n: usize) -> Self {
        TruncatedPoint(vec![0.0; n])
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0.get(i).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Coordinate-wise difference, padded with zeros.
    pub fn sub(&self, other: &TruncatedPoint) -> TruncatedPoint {
        let n = self.len().max(other.len());
        TruncatedPoint((0..n).map(|i| self.get(i) - other.get(i)).collect())
    }
}

impl From<Vec<f64>> for TruncatedPoint {
    fn from(v: Vec<f64>) -> Self {
        TruncatedPoint(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn access_beyond_explicit_part_is_zero() {
        let p = TruncatedPoint::new(vec![1.0, 2.0]);
        assert_eq!(p.get(1), 2.0);
        assert_eq!(p.get(7), 0.0);
        assert_eq!(p.sub(&TruncatedPoint::new(vec![0.0, 0.0, 3.0])).0, vec![1.0, 2.0, -3.0]);
    }
}
