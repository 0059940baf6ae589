//! Point-vortex dynamics coupled to harmonic flow on flat and conformally
//! deformed tori, and on Schottky doubles of the disk and annulus.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod greens;
pub mod integrator;
pub mod planar;
pub mod quadrature;
pub mod special;
pub mod surface;

pub type Vec2 = nalgebra::Vector2<f64>;
pub use num_complex::Complex64;

pub use error::{Error, Result};
pub use greens::{ConformalGreen, FlatGreen, GreenEval, GreenMethod, PoissonSolution, RobinField};
pub use surface::{ConformalFactor, Lattice, SurfaceConfig};
