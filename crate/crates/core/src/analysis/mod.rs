//! Diagnostics built on the torus dynamics: Poincaré sections, equilibrium
//! search, dipole shadowing and complete-vs-incomplete divergence.

mod dipole;
mod divergence;
mod equilibria;
mod section;

pub use dipole::{dipole_probe, geodesic_path, DipoleReport};
pub use divergence::{complete_vs_incomplete, DivergenceReport, DivergenceSample};
pub use equilibria::{find_equilibria, seed_grid, CriticalKind, Equilibrium, EquilibriumSearch};
pub use section::{complete_eta_x, occupancy, poincare_section, SectionBounds, SectionOrbit, SectionRun, SectionSpec};
