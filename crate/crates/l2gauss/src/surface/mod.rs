//! Index-set algebra, determinants of finite perturbations, surface densities
//! and measures, and numerical Gauss–Green and Stokes checks at finite
//! co-dimension.

pub mod gauss_green;
pub mod graph;
pub mod index;
pub mod stokes;

pub use gauss_green::{
    gauss_green_ball, gauss_green_halfspace_exact, gauss_green_halfspace_mc, Ball, GaussGreenReport, HalfSpace,
    TestFunction,
};
pub use graph::{
    balanced_coordinate, chart_consistency, f_weight, minor_norm, surface_measure, surface_measure_with, ChartedSurface,
    LineBundle, LineBundleChartA, LineBundleChartB, PolyGraph, Region, TailMode,
};
pub use index::{index_equivalent, FinitePerturbationMap, IndexSet};
pub use stokes::{stokes_check, GraphParam, Parametrization, PolarDisk, SphericalCap, StokesReport};
