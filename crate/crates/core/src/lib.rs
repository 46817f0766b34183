//! Numerical toolkit for the fundamental gap `xi = d^2 (lambda2 - lambda1)`
//! of the Dirichlet Laplacian on convex polygons, circular sectors and
//! their collapsing families.

pub mod error;
pub mod experiments;
pub mod fem;
pub mod gap;
pub mod geometry;
pub mod mesh;
pub mod sector;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
pub use experiments::{
    analyze_theorem2, certify, classify_theorem2, classify_theorem2_with, decide_theorem2,
    family_csv_header, family_exponent, make_family, run_family, scan_minimum, scan_moduli,
    triangle_gap, CertificateLine, Certification, CheckStatus, ClassifierConfig, ClassifierVerdict,
    FamilyDescriptor, FamilyKind, FamilyRow, RunOptions, ScanRow, Theorem2Analysis, Verdict,
    Window, CERTIFY_HEADER,
};
pub use fem::{
    dirichlet_eigenvalues, dirichlet_eigenvalues_with, equilateral_spectrum, fem_eigenvalues,
    fem_ladder, rectangle_spectrum, SolverConfig,
};
pub use gap::{
    fit_collapse_exponent, freitas_isosceles_eigenvalues, gap, isosceles_sandwich_gap_bound,
    mass_leakage_bound, poincare_lower_bound, rectangle_gap, sector_sandwich_gap_bound,
    sector_sandwich_report, Bound, BoundKind, GapReport,
};
pub use geometry::{
    isosceles_sandwich, moduli_grid, rectangle_sandwich, sector_sandwich, triangle_from_class,
    Point, Polygon, Region, Sandwich, SandwichKind, TriangleClass,
};
pub use mesh::{triangulate, Mesh, MeshPlan};
pub use sector::{sector_eigenvalue_estimate, sector_mode_eigenvalue, sector_spectrum, SectorSpec};
pub use special::{
    bessel_j, bessel_zero, bessel_zero_two_term, bessel_zeros, AsymptoticConstants, BesselOrder,
};
pub use spectrum::{Spectrum, SpectrumMethod};
