//! Shared primitives: sequences with tail rules, points, multi-indices,
//! sparse polynomial algebra, Gaussian moment oracles, seeded sampling,
//! quadrature and the d_p metric family.

pub mod cpoly;
pub mod metric;
pub mod moments;
pub mod multi_index;
pub mod point;
pub mod poly;
pub mod quad;
pub mod sampling;
pub mod sequence;
pub mod special;

pub use cpoly::{CMonomial, CPoly};
pub use metric::{dp_distance, near_infinity_gauge};
pub use moments::{gaussian_moment, integrate_polynomial};
pub use multi_index::MultiIndex;
pub use point::TruncatedPoint;
pub use poly::Poly;
pub use sampling::{Estimate, SampleStream, Welford};
pub use sequence::{Sequence, TailRule, TailTerm, Weights};
