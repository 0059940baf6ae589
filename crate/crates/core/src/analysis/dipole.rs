use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{RhsKind, RunSettings, TorusSystem, VortexState};
use crate::error::{Error, Result};
use crate::integrator::{self, Control, Options};
use crate::Vec2;

const PROBE_TOL: f64 = 1e-10;
/// Interpolated points per accepted geodesic step.
const GEODESIC_SUBSTEPS: usize = 16;
/// Dipole midpoints recorded per run.
const SAMPLES: f64 = 2000.0;

#[derive(Debug, Clone, Serialize)]
pub struct DipoleReport {
    pub separation: f64,
    /// Largest distance from the pair midpoint to the geodesic curve.
    pub deviation: f64,
    /// Largest pair separation over the initial one.
    pub max_separation_ratio: f64,
    /// Coordinate length travelled by the midpoint.
    pub path_length: f64,
    pub midpoints: Vec<Vec2>,
}

/// Geodesic of `ρ (dx² + dy²)` from `start` with initial velocity
/// `velocity`, sampled densely up to time `t_end` (unwrapped coordinates).
pub fn geodesic_path(system: &TorusSystem, start: Vec2, velocity: Vec2, t_end: f64, rel_tol: f64) -> Result<Vec<Vec2>> {
    let cf = system.factor();
    let lattice = system.lattice();
    // σ = (1/2) log ρ; ẍ_k = σ_k |ẋ|² - 2 (∇σ·ẋ) ẋ_k
    let rhs = |_: f64, y: &[f64]| -> Result<Vec<f64>> {
        let r = cf.eval(lattice, Vec2::new(y[0], y[1]))?;
        let s = r.grad / (2.0 * r.value);
        let v = Vec2::new(y[2], y[3]);
        let a = s * v.norm_squared() - v * (2.0 * s.dot(&v));
        Ok(vec![v.x, v.y, a.x, a.y])
    };
    let mut path = vec![start];
    let outcome = integrator::integrate(
        rhs,
        0.0,
        &[start.x, start.y, velocity.x, velocity.y],
        t_end,
        &Options::new(rel_tol, rel_tol * 1e-2),
        |step| {
            for k in 1..=GEODESIC_SUBSTEPS {
                let t = step.t0 + step.h * k as f64 / GEODESIC_SUBSTEPS as f64;
                path.push(Vec2::new(step.component(0, t), step.component(1, t)));
            }
            Control::Continue
        },
    );
    match outcome.halt {
        Some(e) => Err(e),
        None => Ok(path),
    }
}

fn distance_to_polyline(p: Vec2, path: &[Vec2]) -> f64 {
    path.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let len2 = d.norm_squared();
            let s = if len2 > 0.0 { ((p - w[0]).dot(&d) / len2).clamp(0.0, 1.0) } else { 0.0 };
            (p - (w[0] + d * s)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Runs a `±1` pair centred at `midpoint`, separated by `separation`
/// perpendicular to `direction` so that it translates along `direction`,
/// with `η = 0`.
///
/// `t_end` is measured in pair travel time: a flat-space dipole moves at
/// speed `1/(2π d)`, so the run lasts `2π d · t_end` and covers roughly
/// `t_end` units of length whatever `d` is. The reference geodesic starts at
/// the midpoint with the pair's initial midpoint velocity and runs twice as
/// long; the deviation is a curve distance, so speed mismatch does not enter.
pub fn dipole_probe(system: &TorusSystem, midpoint: Vec2, direction: Vec2, separation: f64, t_end: f64) -> Result<DipoleReport> {
    if !(separation > 0.0 && t_end > 0.0 && direction.norm() > 0.0) {
        return Err(Error::InvalidInput("separation, t_end and direction must be nonzero".into()));
    }
    let v = direction.normalize();
    let n = Vec2::new(-v.y, v.x);
    let state = VortexState::new(
        vec![midpoint + n * (0.5 * separation), midpoint - n * (0.5 * separation)],
        vec![1.0, -1.0],
        Vec2::zeros(),
    )?;
    let duration = 2.0 * PI * separation * t_end;
    let settings = RunSettings {
        t_end: duration,
        rel_tol: PROBE_TOL,
        abs_tol: PROBE_TOL * 1e-2,
        sample_dt: duration / SAMPLES,
    };
    let rec = system.integrate(&state, RhsKind::Complete, &settings)?;
    if let Some(e) = rec.halt {
        return Err(e);
    }
    let mut max_ratio: f64 = 0.0;
    let mut midpoints = Vec::with_capacity(rec.samples.len());
    for s in &rec.samples {
        let sep = (s.positions[0] - s.positions[1]).norm();
        max_ratio = max_ratio.max(sep / separation);
        if sep > 10.0 * separation {
            return Err(Error::PairDissociated {
                separation: sep,
                initial: separation,
            });
        }
        midpoints.push((s.positions[0] + s.positions[1]) * 0.5);
    }
    let d = system.rhs(&state, RhsKind::Complete)?;
    let v0 = (d.velocities[0] + d.velocities[1]) * 0.5;
    let geodesic = geodesic_path(system, midpoint, v0, 2.0 * duration, 0.1 * PROBE_TOL)?;
    let deviation = midpoints
        .iter()
        .map(|m| distance_to_polyline(*m, &geodesic))
        .fold(0.0, f64::max);
    let path_length = midpoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    Ok(DipoleReport {
        separation,
        deviation,
        max_separation_ratio: max_ratio,
        path_length,
        midpoints,
    })
}
