//! Direct scattering by a penetrable medium in 2D.

mod curve;
mod fields;
mod gmres;
mod green;
mod grid;
mod mie;
mod setup;
mod solver;

pub use curve::{
    uniform_directions, CauchyData, CurveDescriptor, FarFieldPattern, MeasurementCurve,
    ScatteredData,
};
pub use fields::{
    cauchy_data, far_field, far_field_alpha, scattered_at, scattered_normal_derivative,
};
pub use gmres::{gmres, GmresOptions, GmresOutcome};
pub use green::{green2d, green2d_normal_derivative, incident_plane_wave};
pub use grid::{ContrastGrid, ContrastSampling, GridGeometry};
pub use mie::{mie_disk_reference, MieDisk};
pub use setup::{solve_scene, ForwardConfig, Solution};
pub use solver::{ls_solve, ls_solve_with, SolverOptions, TotalField};
