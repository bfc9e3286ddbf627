//! Index sets of ℕ (0-based) and identity-plus-finite-rank maps between
//! coordinate subspaces.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Base {
    Empty,
    All,
    Progression { start: usize, step: usize },
}

/// A base set (empty, everything, or an arithmetic progression) with finitely
/// many indices added or removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    pub base: Base,
    #[serde(default)]
    pub added: BTreeSet<usize>,
    #[serde(default)]
    pub removed: BTreeSet<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl IndexSet {
    pub fn finite<I: IntoIterator<Item = usize>>(items: I) -> Self {
        IndexSet { base: Base::Empty, added: items.into_iter().collect(), removed: BTreeSet::new() }
    }

    pub fn all() -> Self {
        IndexSet { base: Base::All, added: BTreeSet::new(), removed: BTreeSet::new() }
    }

    pub fn cofinite<I: IntoIterator<Item = usize>>(excluded: I) -> Self {
        IndexSet { base: Base::All, added: BTreeSet::new(), removed: excluded.into_iter().collect() }
    }

    pub fn progression(start: usize, step: usize) -> Self {
        IndexSet { base: Base::Progression { start, step: step.max(1) }, added: BTreeSet::new(), removed: BTreeSet::new() }
    }

    pub fn with_added(mut self, i: usize) -> Self {
        self.removed.remove(&i);
        self.added.insert(i);
        self
    }

    pub fn with_removed(mut self, i: usize) -> Self {
        self.added.remove(&i);
        self.removed.insert(i);
        self
    }

    fn in_base(&self, i: usize) -> bool {
        match self.base {
            Base::Empty => false,
            Base::All => true,
            Base::Progression { start, step } => i >= start && (i - start).is_multiple_of(step),
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.added.contains(&i) || (self.in_base(i) && !self.removed.contains(&i))
    }

    /// Beyond this index membership is periodic with [`period`](Self::period).
    pub fn horizon(&self) -> usize {
        let start = match self.base {
            Base::Progression { start, .. } => start,
            _ => 0,
        };
        let m = self.added.iter().chain(&self.removed).max().map_or(0, |m| m + 1);
        m.max(start)
    }

    pub fn period(&self) -> usize {
        match self.base {
            Base::Progression { step, .. } => step,
            _ => 1,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.base == Base::Empty
    }

    pub fn below(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| self.contains(i)).collect()
    }

    /// `|self ∖ other|`, or `None` when infinite.
    pub fn difference_size(&self, other: &IndexSet) -> Option<usize> {
        let h = self.horizon().max(other.horizon());
        let (p, q) = (self.period(), other.period());
        let l = p / gcd(p, q) * q;
        if (h..h + l).any(|i| self.contains(i) && !other.contains(i)) {
            return None;
        }
        Some((0..h).filter(|&i| self.contains(i) && !other.contains(i)).count())
    }

    pub fn same_set(&self, other: &IndexSet) -> bool {
        self.difference_size(other) == Some(0) && other.difference_size(self) == Some(0)
    }
}

/// `I1 ∼ I2`: `|I1 ∖ I2| = |I2 ∖ I1| < ∞`.
pub fn index_equivalent(a: &IndexSet, b: &IndexSet) -> bool {
    match (a.difference_size(b), b.difference_size(a)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

/// A bounded map `P_{I1} → P_{I2}` that is the identity on all but finitely
/// many basis vectors. Stored columns hold `T e_c` as sparse rows; every
/// other `e_c` with `c ∈ I1 ∩ I2` is mapped to itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitePerturbationMap {
    pub domain: IndexSet,
    pub codomain: IndexSet,
    /// The finite set `I0 ⊆ I1 ∩ I2` outside of which `T` is the identity on
    /// the common coordinates.
    pub exceptional: BTreeSet<usize>,
    pub columns: BTreeMap<usize, BTreeMap<usize, f64>>,
}

impl FinitePerturbationMap {
    pub fn new(
        domain: IndexSet,
        codomain: IndexSet,
        exceptional: BTreeSet<usize>,
        columns: BTreeMap<usize, BTreeMap<usize, f64>>,
    ) -> Result<Self> {
        let t = FinitePerturbationMap { domain, codomain, exceptional, columns };
        t.validate()?;
        Ok(t)
    }

    /// A map given by its stored columns; `I0` is taken to be the stored
    /// columns that lie in `I1 ∩ I2`.
    pub fn from_columns(domain: IndexSet, codomain: IndexSet, columns: BTreeMap<usize, BTreeMap<usize, f64>>) -> Result<Self> {
        let exceptional = columns.keys().copied().filter(|&c| domain.contains(c) && codomain.contains(c)).collect();
        Self::new(domain, codomain, exceptional, columns)
    }

    pub fn identity(set: IndexSet) -> Self {
        FinitePerturbationMap { domain: set.clone(), codomain: set, exceptional: BTreeSet::new(), columns: BTreeMap::new() }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedBlock(m));
        if !index_equivalent(&self.domain, &self.codomain) {
            return bad("domain and codomain are not equivalent index sets".into());
        }
        for (&c, col) in &self.columns {
            if !self.domain.contains(c) {
                return bad(format!("column {c} is not in the domain"));
            }
            if let Some(&r) = col.keys().find(|&&r| !self.codomain.contains(r)) {
                return bad(format!("row {r} of column {c} is not in the codomain"));
            }
            let identity = col.len() == 1 && col.get(&c) == Some(&1.0);
            if self.codomain.contains(c) && !identity && !self.exceptional.contains(&c) {
                return bad(format!("column {c} is not the identity outside I0"));
            }
        }
        for &c in &self.exceptional {
            if !(self.domain.contains(c) && self.codomain.contains(c)) {
                return bad(format!("exceptional index {c} is not common to both sets"));
            }
        }
        let w = self.window();
        if let Some(c) = self.domain.below(w).into_iter().find(|&c| !self.codomain.contains(c) && !self.columns.contains_key(&c)) {
            return bad(format!("column {c} leaves the codomain but is not stored"));
        }
        Ok(())
    }

    /// `T e_c` as a sparse column.
    pub fn image(&self, c: usize) -> BTreeMap<usize, f64> {
        match self.columns.get(&c) {
            Some(col) => col.clone(),
            None => BTreeMap::from([(c, 1.0)]),
        }
    }

    /// One past every index where `T` or the two sets differ from the
    /// common identity.
    pub fn window(&self) -> usize {
        let h = self.domain.horizon().max(self.codomain.horizon());
        let (p, q) = (self.domain.period(), self.codomain.period());
        let l = p / gcd(p, q) * q;
        let stored = self
            .columns
            .iter()
            .flat_map(|(c, col)| std::iter::once(*c).chain(col.keys().copied()))
            .chain(self.exceptional.iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        (h + l).max(stored)
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> Result<DMatrix<f64>> {
        if rows.len() != cols.len() {
            return Err(Error::MalformedBlock(format!("block is {}×{}", rows.len(), cols.len())));
        }
        let mut m = DMatrix::zeros(rows.len(), cols.len());
        for (j, &c) in cols.iter().enumerate() {
            for (r, v) in self.image(c) {
                // rows outside the block sit in the identity part and leave
                // the determinant block-triangular
                if let Ok(i) = rows.binary_search(&r) {
                    m[(i, j)] = v;
                }
            }
        }
        Ok(m)
    }

    /// The determinant with rows `sorted(I0 ∪ (I2 ∖ I1))` and columns
    /// `sorted(I0 ∪ (I1 ∖ I2))` for the stored `I0`, entry `(T e_col, e_row)`.
    ///
    /// Its sign depends on the choice of `I0` when the two difference sets
    /// interleave with `I0`; see [`det`](Self::det).
    pub fn det_literal(&self) -> Result<f64> {
        let w = self.window();
        let mut rows: Vec<usize> = self.codomain.below(w).into_iter().filter(|&r| !self.domain.contains(r)).collect();
        let mut cols: Vec<usize> = self.domain.below(w).into_iter().filter(|&c| !self.codomain.contains(c)).collect();
        rows.extend(&self.exceptional);
        cols.extend(&self.exceptional);
        rows.sort_unstable();
        cols.sort_unstable();
        if rows.is_empty() {
            return Ok(1.0);
        }
        Ok(self.block(&rows, &cols)?.determinant())
    }

    /// The determinant with `I0` saturated by every common index below the
    /// window. This equals `det(σ⁻¹T)` for the order isomorphism
    /// `σ: I1 → I2`, is independent of the representation, and is
    /// multiplicative under composition.
    pub fn det(&self) -> Result<f64> {
        let w = self.window();
        let rows = self.codomain.below(w);
        let cols = self.domain.below(w);
        if rows.is_empty() && cols.is_empty() {
            return Ok(1.0);
        }
        Ok(self.block(&rows, &cols)?.determinant())
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &FinitePerturbationMap) -> Result<FinitePerturbationMap> {
        if !self.codomain.same_set(&next.domain) {
            return Err(Error::MalformedBlock("codomain does not match the next domain".into()));
        }
        let mut keys: BTreeSet<usize> = self.columns.keys().copied().collect();
        keys.extend(next.columns.keys().copied().filter(|&c| self.domain.contains(c)));
        let mut columns = BTreeMap::new();
        for c in keys {
            let mut out: BTreeMap<usize, f64> = BTreeMap::new();
            for (r, v) in self.image(c) {
                for (q, u) in next.image(r) {
                    *out.entry(q).or_insert(0.0) += v * u;
                }
            }
            out.retain(|_, v| *v != 0.0);
            columns.insert(c, out);
        }
        Self::from_columns(self.domain.clone(), next.codomain.clone(), columns)
    }

    /// The inverse map `P_{I2} → P_{I1}`, from the inverse of the window
    /// block.
    pub fn inverse(&self) -> Result<FinitePerturbationMap> {
        let w = self.window();
        let rows = self.codomain.below(w);
        let cols = self.domain.below(w);
        let inv = self
            .block(&rows, &cols)?
            .try_inverse()
            .ok_or_else(|| Error::MalformedBlock("singular block".into()))?;
        let mut columns = BTreeMap::new();
        for (j, &r) in rows.iter().enumerate() {
            let col: BTreeMap<usize, f64> =
                cols.iter().enumerate().map(|(i, &c)| (c, inv[(i, j)])).filter(|(_, v)| *v != 0.0).collect();
            let identity = col.len() == 1 && col.get(&r) == Some(&1.0);
            if !identity {
                columns.insert(r, col);
            }
        }
        Self::from_columns(self.codomain.clone(), self.domain.clone(), columns)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equivalence_examples() {
        let evens = IndexSet::progression(0, 2);
        let odds = IndexSet::progression(1, 2);
        assert!(index_equivalent(&evens, &evens));
        assert!(!index_equivalent(&evens, &odds));
        assert!(index_equivalent(&IndexSet::cofinite([0]), &IndexSet::cofinite([1])));
        assert!(!index_equivalent(&IndexSet::cofinite([0]), &IndexSet::cofinite([1, 2])));
        assert!(index_equivalent(&evens.clone().with_removed(0).with_added(5), &evens));
        assert_eq!(IndexSet::all().difference_size(&evens), None);
    }

    fn col(entries: &[(usize, f64)]) -> BTreeMap<usize, f64> {
        entries.iter().copied().collect()
    }

    #[test]
    fn determinant_examples() {
        let id = FinitePerturbationMap::identity(IndexSet::progression(0, 3));
        assert_eq!(id.det().unwrap(), 1.0);
        // I1 = {1,2}, I2 = {1,3}, I0 = {1}: Te1 = e1 + e3, Te2 = 2e3
        let t = FinitePerturbationMap::new(
            IndexSet::finite([1, 2]),
            IndexSet::finite([1, 3]),
            BTreeSet::from([1]),
            BTreeMap::from([(1, col(&[(1, 1.0), (3, 1.0)])), (2, col(&[(3, 2.0)]))]),
        )
        .unwrap();
        assert_eq!(t.det_literal().unwrap(), 2.0);
        assert_eq!(t.det().unwrap(), 2.0);
    }

    #[test]
    fn literal_determinant_depends_on_exceptional_set() {
        // I1 = {1,2}, I2 = {2,3}, Te1 = e3, Te2 = e2
        let cols = BTreeMap::from([(1, col(&[(3, 1.0)]))]);
        let lean = FinitePerturbationMap::new(
            IndexSet::finite([1, 2]),
            IndexSet::finite([2, 3]),
            BTreeSet::new(),
            cols.clone(),
        )
        .unwrap();
        let padded =
            FinitePerturbationMap::new(IndexSet::finite([1, 2]), IndexSet::finite([2, 3]), BTreeSet::from([2]), cols)
                .unwrap();
        assert_eq!(lean.det_literal().unwrap(), 1.0);
        assert_eq!(padded.det_literal().unwrap(), -1.0);
        assert_eq!(lean.det().unwrap(), padded.det().unwrap());
    }

    #[test]
    fn malformed_blocks_are_rejected() {
        let r = FinitePerturbationMap::new(
            IndexSet::finite([1, 2]),
            IndexSet::finite([1, 3]),
            BTreeSet::new(),
            BTreeMap::from([(1, col(&[(1, 2.0)])), (2, col(&[(3, 1.0)]))]),
        );
        assert!(matches!(r, Err(Error::MalformedBlock(_))));
        let missing =
            FinitePerturbationMap::new(IndexSet::finite([1, 2]), IndexSet::finite([1, 3]), BTreeSet::new(), BTreeMap::new());
        assert!(matches!(missing, Err(Error::MalformedBlock(_))));
    }

    /// `I` with a few random indices swapped for others, keeping `I ∼ I'`.
    fn perturbed(rng: &mut ChaCha8Rng, base: &IndexSet, span: usize) -> IndexSet {
        let mut s = base.clone();
        for _ in 0..rng.random_range(0..3) {
            let inside: Vec<usize> = s.below(span);
            let outside: Vec<usize> = (0..span).filter(|&i| !s.contains(i)).collect();
            if inside.is_empty() || outside.is_empty() {
                break;
            }
            let a = inside[rng.random_range(0..inside.len())];
            let b = outside[rng.random_range(0..outside.len())];
            s = s.with_removed(a).with_added(b);
        }
        s
    }

    fn random_map(rng: &mut ChaCha8Rng, from: &IndexSet, to: &IndexSet, span: usize) -> FinitePerturbationMap {
        let rows = to.below(span);
        let mut columns = BTreeMap::new();
        for c in from.below(span) {
            if !to.contains(c) || rng.random_bool(0.5) {
                let mut v: BTreeMap<usize, f64> = BTreeMap::new();
                for &r in &rows {
                    if rng.random_bool(0.6) {
                        v.insert(r, rng.random_range(-1.5..1.5));
                    }
                }
                if to.contains(c) {
                    *v.entry(c).or_insert(0.0) += 2.0;
                }
                columns.insert(c, v);
            }
        }
        FinitePerturbationMap::from_columns(from.clone(), to.clone(), columns).unwrap()
    }

    #[test]
    fn determinant_is_multiplicative_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let bases = [IndexSet::all(), IndexSet::progression(0, 2), IndexSet::progression(1, 3), IndexSet::finite(0..6)];
        for trial in 0..60 {
            let base = &bases[trial % bases.len()];
            let span = 9;
            let i1 = perturbed(&mut rng, base, span);
            let i2 = perturbed(&mut rng, base, span);
            let i3 = perturbed(&mut rng, base, span);
            let t1 = random_map(&mut rng, &i1, &i2, span);
            let t2 = random_map(&mut rng, &i2, &i3, span);
            let (d1, d2) = (t1.det().unwrap(), t2.det().unwrap());
            let d12 = t1.then(&t2).unwrap().det().unwrap();
            assert!((d12 - d1 * d2).abs() <= 1e-10 * (d1 * d2).abs().max(1.0), "{d12} vs {}", d1 * d2);
            if d1.abs() > 1e-6 {
                let back = t1.inverse().unwrap();
                assert!((back.det().unwrap() * d1 - 1.0).abs() < 1e-10);
            }
        }
    }
}
