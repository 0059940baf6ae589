use serde::Serialize;

use crate::dynamics::{RhsKind, RunSettings, TorusSystem, VortexState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceSample {
    pub t: f64,
    /// `sqrt(Σ d_torus(s_j, s'_j)² + |η - η'|²)`.
    pub distance: f64,
    /// Energy split of the complete run.
    pub h_vortex: f64,
    pub h_harmonic: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub samples: Vec<DivergenceSample>,
    pub max_distance: f64,
}

/// Integrates the complete and incomplete systems from the same state and
/// compares them at common sample times.
pub fn complete_vs_incomplete(system: &TorusSystem, state: &VortexState, settings: &RunSettings) -> Result<DivergenceReport> {
    let complete = system.integrate(state, RhsKind::Complete, settings)?;
    let incomplete = system.integrate(state, RhsKind::Incomplete, settings)?;
    for halt in [&complete.halt, &incomplete.halt].into_iter().flatten() {
        return Err(halt.clone());
    }
    if complete.samples.len() != incomplete.samples.len() {
        return Err(Error::InvalidInput("runs produced different sample grids".into()));
    }
    let lattice = system.lattice();
    let samples: Vec<DivergenceSample> = complete
        .samples
        .iter()
        .zip(&incomplete.samples)
        .zip(&complete.ledger)
        .map(|((a, b), e)| {
            let pos: f64 = a
                .positions
                .iter()
                .zip(&b.positions)
                .map(|(p, q)| lattice.toroidal_distance(*p, *q).powi(2))
                .sum();
            DivergenceSample {
                t: a.time,
                distance: (pos + (a.eta - b.eta).norm_squared()).sqrt(),
                h_vortex: e.energy.vortex,
                h_harmonic: e.energy.harmonic,
            }
        })
        .collect();
    let max_distance = samples.iter().map(|s| s.distance).fold(0.0, f64::max);
    Ok(DivergenceReport { samples, max_distance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ConformalFactor, Lattice, Vec2};

    fn settings() -> RunSettings {
        RunSettings {
            t_end: 2.0,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            sample_dt: 0.1,
        }
    }

    #[test]
    fn flat_torus_runs_coincide() {
        let sys = TorusSystem::new(&ConformalFactor::flat(), &Lattice::square());
        let s = VortexState::new(vec![Vec2::new(0.2, 0.3), Vec2::new(0.6, 0.7)], vec![1.0, 0.5], Vec2::new(0.3, 0.1)).unwrap();
        let r = complete_vs_incomplete(&sys, &s, &settings()).unwrap();
        assert!(r.max_distance < 1e-12, "{}", r.max_distance);
    }

    #[test]
    fn equilibrium_does_not_diverge() {
        let sys = TorusSystem::new(&ConformalFactor::example(), &Lattice::square());
        let s = VortexState::single(Vec2::new(0.5, 0.75), 1.0, Vec2::zeros());
        let r = complete_vs_incomplete(&sys, &s, &settings()).unwrap();
        assert!(r.max_distance < 1e-12, "{}", r.max_distance);
    }

    #[test]
    fn generic_state_diverges_and_exchanges_energy() {
        let sys = TorusSystem::new(&ConformalFactor::example(), &Lattice::square());
        let s = VortexState::single(Vec2::new(0.1, 0.4), 1.0, Vec2::new(0.5, 0.0));
        let r = complete_vs_incomplete(&sys, &s, &settings()).unwrap();
        assert_eq!(r.samples[0].distance, 0.0);
        assert!(r.samples[1..].iter().all(|x| x.distance > 0.0));
        let h0 = r.samples[0].h_harmonic;
        assert!(r.samples.iter().any(|x| (x.h_harmonic - h0).abs() > 1e-6));
        for x in &r.samples {
            let total = x.h_vortex + x.h_harmonic;
            assert!((total - r.samples[0].h_vortex - h0).abs() < 1e-8);
        }
    }
}
