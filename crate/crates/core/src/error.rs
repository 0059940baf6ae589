use thiserror::Error;

/// Errors raised by geometry construction, Green-function evaluation and
/// trajectory integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate lattice: |det| = {det:e} is below 1e-14")]
    DegenerateLattice { det: f64 },

    #[error("lattice determinant {det} differs from 1 (pass rescale to normalize)")]
    DetNotOne { det: f64 },

    #[error("conformal density is not positive at ({x}, {y}): rho = {rho:e}")]
    NonPositiveDensity { x: f64, y: f64, rho: f64 },

    #[error("coincident points (separation {distance:e})")]
    CoincidentPoints { distance: f64 },

    #[error("series acceleration could not certify tolerance {tol:e}")]
    ToleranceNotReached { tol: f64 },

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("vortices {first} and {second} collided (distance {distance:e})")]
    Collision {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("step size {step:e} underflowed at t = {t}")]
    StepUnderflow { t: f64, step: f64 },

    #[error("curve passes within {distance:e} of vortex {vortex}")]
    CurveTooCloseToVortex { vortex: usize, distance: f64 },

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("image series did not converge after {terms} terms")]
    SeriesNotConverged { terms: usize },

    #[error("orbit {orbit} never crossed the section before t = {t_end}")]
    NoCrossings { orbit: usize, t_end: f64 },

    #[error("Newton iteration diverged from seed ({x}, {y})")]
    NewtonDiverged { x: f64, y: f64 },

    #[error("Robin function has no isolated critical points (gradient vanishes identically)")]
    NoIsolatedEquilibria,

    #[error("dipole dissociated: separation {separation:e} exceeds 10 x {initial:e}")]
    PairDissociated { separation: f64, initial: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Serializes an optional error as its display string.
pub(crate) fn serialize_optional<S: serde::Serializer>(e: &Option<Error>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.serialize_some(&e.to_string()),
        None => s.serialize_none(),
    }
}
