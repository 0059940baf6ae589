//! Planar domains and their Schottky doubles: disk, sphere and annulus
//! Green functions, harmonic measures, capacities, and reduced vortex
//! dynamics on the annulus.
//!
//! Points are complex numbers `z = x + iy`. Gradients are returned as
//! `(∂_x, ∂_y)`; for `f = Re h` with `h` holomorphic this is `conj(h')`.

mod annulus;
mod disk;
mod schottky;

use num_complex::Complex64;

use crate::Vec2;

pub use annulus::{capacity_annulus, green_electro_annulus, green_hydro, harmonic_measure_annulus, AnnulusDomain, CapacityData};
pub use disk::{electro_from_double_check, green_double_disk, green_electro_disk, green_sphere, DOUBLE_DISK_CONSTANT};
pub use schottky::{
    boundary_circulations, impulsive_circulation, lin_reduced, schottky_diagnostics, AnnulusRunSettings, AnnulusSample,
    AnnulusSystem, AnnulusTrajectory, LinReduced, SchottkyReport,
};

pub(crate) fn to_vec(z: Complex64) -> Vec2 {
    Vec2::new(z.re, z.im)
}

/// Gradient of `Re h` given `h'`.
pub(crate) fn grad_of_real_part(h_prime: Complex64) -> Vec2 {
    to_vec(h_prime.conj())
}
