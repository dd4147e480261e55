//! Topological invariants and gapless-phase characterization.

pub mod curvature;
pub mod dirac;
pub mod nodal;
pub mod zak;

pub use curvature::{berry_curvature_map, CurvatureMap};
pub use dirac::{
    characterize_cone, dirac_charge, dirac_points, locate_dirac_points, merging_exponents, Cone,
    DiracPoint, DiracSearch, MergingExponents,
};
pub use nodal::{trace_nodal_lines, NodalSet};
pub use zak::{line_berry_phase, zak_vector, Direction, ZakVector};
