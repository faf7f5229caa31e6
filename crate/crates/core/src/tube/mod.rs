//! Tubes: the zero sets `{R | (P₀P₁.Q₀R)² = |P₀P₁|²|Q₀R|²}` that stand in
//! for straight lines when the geometry is given by σ alone, and the line
//! cut out by auxiliary surfaces for comparison.

mod classify;
mod compare;
mod family;
mod io;
mod refine;
mod sample;
mod spec;
mod thickness;

pub use classify::{classify_detailed, classify_dimension, Classification, Method};
pub use compare::{compare_definitions, CompareOptions, Comparison, ObjectSummary, Verdict};
pub use family::{fit_spacelike_family, spacelike_family_point, FamilyFit};
pub use io::{read_samples_csv, write_projections_csv, write_samples_csv, SampleCounts, Tolerances, TubeSummary};
pub use sample::{sample_tube, SampleClass, SampleOptions, TubeSample, TubeSampleSet};
pub use spec::{tube_relative_residual, tube_residual, TubeKind, TubeSpec};
pub use thickness::{tube_cross_section_thickness, ThicknessOptions};
