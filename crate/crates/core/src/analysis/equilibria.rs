use serde::Serialize;

use crate::dynamics::{RhsKind, TorusSystem, VortexState};
use crate::error::{Error, Result};
use crate::{Lattice, Vec2};

const MAX_ITERATIONS: usize = 60;
/// Newton steps are clipped to this length (lattice units).
const MAX_STEP: f64 = 0.1;
/// Critical points closer than this are the same equilibrium.
const DEDUP_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Maximum,
    Minimum,
    Saddle,
    Degenerate,
}

/// Single-vortex equilibrium: a critical point of `R` with `η = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equilibrium {
    pub point: Vec2,
    pub eta: Vec2,
    pub kind: CriticalKind,
    pub robin: f64,
    pub hamiltonian: f64,
    /// Norm of the complete right-hand side at the equilibrium.
    pub rhs_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSearch {
    pub equilibria: Vec<Equilibrium>,
    /// Seeds whose Newton iteration failed.
    #[serde(serialize_with = "serialize_errors")]
    pub failures: Vec<Error>,
}

fn serialize_errors<S: serde::Serializer>(v: &[Error], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|e| e.to_string()))
}

/// Cell-centred `n × n` grid of starting points.
pub fn seed_grid(lattice: &Lattice, n: usize) -> Vec<Vec2> {
    (0..n * n)
        .map(|k| {
            let f = Vec2::new(((k / n) as f64 + 0.5) / n as f64, ((k % n) as f64 + 0.5) / n as f64);
            lattice.from_fractional(f)
        })
        .collect()
}

/// Newton iteration on `∇R` from each seed. Results are wrapped,
/// deduplicated and sorted by position.
pub fn find_equilibria(system: &TorusSystem, seeds: &[Vec2], newton_tol: f64) -> Result<EquilibriumSearch> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("seed grid is empty".into()));
    }
    if !(newton_tol > 0.0) {
        return Err(Error::InvalidInput("newton_tol must be positive".into()));
    }
    let robin = system.green().robin();
    if robin.phi().is_zero() {
        return Err(Error::NoIsolatedEquilibria);
    }
    let lattice = system.lattice();
    let mut found: Vec<Vec2> = Vec::new();
    let mut failures = Vec::new();
    for &seed in seeds {
        match newton(system, seed, newton_tol) {
            Ok(p) => {
                let p = lattice.wrap(p);
                if found.iter().all(|q| lattice.toroidal_distance(*q, p) > DEDUP_DISTANCE) {
                    found.push(p);
                }
            }
            Err(e) => failures.push(e),
        }
    }
    let mut equilibria = found
        .into_iter()
        .map(|p| classify(system, p))
        .collect::<Result<Vec<_>>>()?;
    equilibria.sort_by(|a, b| a.point.x.total_cmp(&b.point.x).then(a.point.y.total_cmp(&b.point.y)));
    Ok(EquilibriumSearch { equilibria, failures })
}

fn newton(system: &TorusSystem, seed: Vec2, tol: f64) -> Result<Vec2> {
    let robin = system.green().robin();
    let mut p = seed;
    for _ in 0..MAX_ITERATIONS {
        let e = robin.eval(p)?;
        let step = match e.hess.lu().solve(&e.grad) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => break,
        };
        let len = step.norm();
        p -= if len > MAX_STEP { step * (MAX_STEP / len) } else { step };
        if len < tol {
            let g = robin.grad(p)?;
            if g.norm() < tol {
                return Ok(p);
            }
        }
    }
    Err(Error::NewtonDiverged { x: seed.x, y: seed.y })
}

fn classify(system: &TorusSystem, p: Vec2) -> Result<Equilibrium> {
    let robin = system.green().robin();
    let e = robin.eval(p)?;
    let eig = e.hess.symmetric_eigenvalues();
    let scale = eig.amax().max(1e-300);
    let kind = if eig.iter().any(|l| l.abs() < 1e-9 * scale) {
        CriticalKind::Degenerate
    } else if eig.iter().all(|&l| l < 0.0) {
        CriticalKind::Maximum
    } else if eig.iter().all(|&l| l > 0.0) {
        CriticalKind::Minimum
    } else {
        CriticalKind::Saddle
    };
    let state = VortexState::single(p, 1.0, Vec2::zeros());
    let rhs_norm = system.rhs(&state, RhsKind::Complete)?.norm();
    Ok(Equilibrium {
        point: p,
        eta: Vec2::zeros(),
        kind,
        robin: e.value,
        hamiltonian: system.hamiltonian(&state)?.total,
        rhs_norm,
    })
}
