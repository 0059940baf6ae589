//! Shared fixtures for the benchmarks.

use vortex_core::dynamics::{TorusSystem, VortexState};
use vortex_core::{ConformalFactor, Lattice, Vec2};

pub fn example_system() -> TorusSystem {
    TorusSystem::new(&ConformalFactor::example(), &Lattice::square())
}

/// Three well-separated vortices with nonzero total circulation.
pub fn three_vortices() -> VortexState {
    VortexState::new(
        vec![Vec2::new(0.1, 0.2), Vec2::new(0.55, 0.4), Vec2::new(0.3, 0.8)],
        vec![1.0, -0.5, 0.8],
        Vec2::new(0.2, -0.1),
    )
    .expect("finite state")
}
