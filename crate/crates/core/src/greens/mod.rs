//! Green and Robin functions on the torus.

mod conformal;
mod flat;
mod hat_trick;
mod poisson;
mod robin;

use serde::{Deserialize, Serialize};

use crate::Vec2;

pub use conformal::{conformal_hamiltonian_terms, green_conformal, ConformalGreen};
pub use flat::{green_flat, green_flat_spectral, FlatGreen, COINCIDENCE_DISTANCE};
pub use hat_trick::{hat_trick_check, Cycle, HatTrickReport};
pub use poisson::{poisson_solve, PoissonSolution};
pub use robin::{robin, RobinField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenMethod {
    SpectralSum,
    Accelerated,
    ClosedForm,
    ImageSeries,
}

/// Value of a Green function and its gradient in the first argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEval {
    pub value: f64,
    pub grad_first_slot: Vec2,
    pub method: GreenMethod,
}
