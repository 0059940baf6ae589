use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{RhsKind, TorusSystem, VortexState};
use crate::error::{Error, Result};
use crate::integrator::{self, Control, DenseStep, Options};
use crate::Vec2;

/// Crossing times are refined to this width.
const TIME_TOL: f64 = 1e-10;
/// Initial conditions must sit on the energy level to this accuracy.
const ENERGY_TOL: f64 = 1e-10;

/// Section `y[coordinate] = value (mod 1)` with `y[sign_coordinate] > 0`,
/// indices into the packed state `[x₁, y₁, …, η_x, η_y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub coordinate: usize,
    pub value: f64,
    pub sign_coordinate: usize,
    pub projection: [usize; 2],
}

impl SectionSpec {
    /// `x = 0 mod 1`, `η_x > 0`, projected on `(y, η_y)` for one vortex.
    pub fn single_vortex() -> Self {
        Self {
            coordinate: 0,
            value: 0.0,
            sign_coordinate: 2,
            projection: [1, 3],
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let ok = self.coordinate < dim
            && self.sign_coordinate < dim
            && self.projection.iter().all(|&i| i < dim)
            && self.value.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("section indices out of range for state dimension {dim}")))
        }
    }
}

/// Rectangle binned by [`occupancy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionBounds {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl SectionBounds {
    /// `y ∈ [0, 1)` and `|η_y| ≤ sqrt(2H - Γ² min R)` along `x = 0`, the
    /// accessible part of the single-vortex section.
    pub fn single_vortex(system: &TorusSystem, energy: f64, strength: f64) -> Result<Self> {
        let robin = system.green().robin();
        let mut min_r = f64::INFINITY;
        for i in 0..1000 {
            let p = system.lattice().from_fractional(Vec2::new(0.0, i as f64 / 1000.0));
            min_r = min_r.min(robin.value(p)?);
        }
        let room = 2.0 * energy - strength * strength * min_r;
        if room <= 0.0 {
            return Err(Error::InvalidInput(format!("energy {energy} lies below the section")));
        }
        let e = room.sqrt();
        Ok(Self {
            lo: [0.0, -e],
            hi: [1.0, e],
        })
    }
}

/// Fraction of the `bins × bins` cells of `bounds` that contain a point.
pub fn occupancy(points: &[[f64; 2]], bounds: &SectionBounds, bins: usize) -> f64 {
    let mut hit = vec![false; bins * bins];
    for p in points {
        let idx = |k: usize| {
            let u = (p[k] - bounds.lo[k]) / (bounds.hi[k] - bounds.lo[k]);
            ((u * bins as f64).floor() as i64).clamp(0, bins as i64 - 1) as usize
        };
        hit[idx(0) * bins + idx(1)] = true;
    }
    hit.iter().filter(|&&h| h).count() as f64 / (bins * bins) as f64
}

/// Single-vortex state at `(x, y)` with `η_y` given and `η_x ≥ 0` chosen so
/// that the energy equals `energy`.
pub fn complete_eta_x(system: &TorusSystem, position: Vec2, strength: f64, eta_y: f64, energy: f64) -> Result<VortexState> {
    let probe = VortexState::single(position, strength, Vec2::new(0.0, eta_y));
    let base = system.hamiltonian(&probe)?.total;
    let room = 2.0 * (energy - base);
    if room < 0.0 {
        return Err(Error::InvalidInput(format!(
            "energy {energy} is below H = {base} at eta_x = 0"
        )));
    }
    Ok(VortexState::single(position, strength, Vec2::new(room.sqrt(), eta_y)))
}

#[derive(Debug, Clone, Serialize)]
pub struct SectionOrbit {
    pub index: usize,
    pub points: Vec<[f64; 2]>,
    pub times: Vec<f64>,
    /// Largest `|H - energy|` over the recorded crossings.
    pub energy_error: f64,
    #[serde(serialize_with = "crate::error::serialize_optional")]
    pub halt: Option<Error>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionRun {
    pub t_end: f64,
    /// Stop an orbit after this many crossings.
    pub max_crossings: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

/// Crossings of each orbit through the section, in input order. Orbits run
/// in parallel. An orbit without crossings carries `NoCrossings` in `halt`.
pub fn poincare_section(
    initials: &[VortexState],
    spec: &SectionSpec,
    energy: f64,
    system: &TorusSystem,
    run: &SectionRun,
) -> Result<Vec<SectionOrbit>> {
    if !(run.t_end > 0.0 && run.t_end.is_finite()) {
        return Err(Error::InvalidInput("t_end must be positive".into()));
    }
    for s in initials {
        spec.validate(2 * s.len() + 2)?;
        let h = system.hamiltonian(s)?.total;
        if (h - energy).abs() > ENERGY_TOL {
            return Err(Error::InvalidInput(format!(
                "initial condition has energy {h}, expected {energy}"
            )));
        }
    }
    let orbits: Vec<Result<SectionOrbit>> = initials
        .par_iter()
        .enumerate()
        .map(|(i, s)| section_orbit(i, s, spec, energy, system, run))
        .collect();
    orbits.into_iter().collect()
}

fn bisect(step: &DenseStep, i: usize, level: f64) -> f64 {
    let (mut a, mut b) = (step.t0, step.t1());
    let fa = step.component(i, a) - level;
    while (b - a).abs() > TIME_TOL {
        let m = 0.5 * (a + b);
        if (step.component(i, m) - level) * fa > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn section_orbit(
    index: usize,
    initial: &VortexState,
    spec: &SectionSpec,
    energy: f64,
    system: &TorusSystem,
    run: &SectionRun,
) -> Result<SectionOrbit> {
    let mut points = Vec::new();
    let mut times = Vec::new();
    let mut energy_error: f64 = 0.0;
    let mut failure = None;
    let lattice = system.lattice();
    let n = initial.len();
    let strengths = initial.strengths.clone();
    let opts = Options::new(run.rel_tol, run.abs_tol);
    let c = spec.coordinate;
    let outcome = integrator::integrate(
        |_, y| system.rhs_vector(&strengths, y, RhsKind::Complete),
        initial.time,
        &initial.to_vector(),
        initial.time + run.t_end,
        &opts,
        |step| {
            let f0 = step.start()[c] - spec.value;
            let f1 = step.component(c, step.t1()) - spec.value;
            let (k0, k1) = (f0.floor() as i64, f1.floor() as i64);
            // each integer level between the endpoints is one crossing
            let mut levels: Vec<i64> = if k1 > k0 { (k0 + 1..=k1).collect() } else { (k1 + 1..=k0).rev().collect() };
            if f0 == f0.floor() {
                levels.retain(|&k| k as f64 != f0);
            }
            for k in levels {
                let t = bisect(step, c, spec.value + k as f64);
                let y = step.eval(t);
                if y[spec.sign_coordinate] <= 0.0 {
                    continue;
                }
                let state = initial.with_vector(&y, t);
                match system.hamiltonian(&state) {
                    Ok(e) => energy_error = energy_error.max((e.total - energy).abs()),
                    Err(e) => {
                        failure = Some(e);
                        return Control::Stop;
                    }
                }
                // positions wrapped to the fundamental cell before projecting
                let mut w = y.clone();
                for (j, p) in state.wrapped(lattice).iter().enumerate().take(n) {
                    w[2 * j] = p.x;
                    w[2 * j + 1] = p.y;
                }
                points.push([w[spec.projection[0]], w[spec.projection[1]]]);
                times.push(t);
                if points.len() >= run.max_crossings {
                    return Control::Stop;
                }
            }
            Control::Continue
        },
    );
    if let Some(Error::InvalidInput(m)) = outcome.halt {
        return Err(Error::InvalidInput(m));
    }
    let mut halt = failure.or(outcome.halt);
    if points.is_empty() && halt.is_none() {
        halt = Some(Error::NoCrossings {
            orbit: index,
            t_end: run.t_end,
        });
    }
    Ok(SectionOrbit {
        index,
        points,
        times,
        energy_error,
        halt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ConformalFactor, Lattice};

    fn run(t_end: f64, max_crossings: usize) -> SectionRun {
        SectionRun {
            t_end,
            max_crossings,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }

    #[test]
    fn flat_linear_flow_crossings_on_a_line() {
        let sys = TorusSystem::new(&ConformalFactor::flat(), &Lattice::square());
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let s = VortexState::single(Vec2::new(0.3, 0.1), 1.0, Vec2::new(1.0, g));
        let h = sys.hamiltonian(&s).unwrap().total;
        let orbits = poincare_section(&[s], &SectionSpec::single_vortex(), h, &sys, &run(50.0, 1000)).unwrap();
        let o = &orbits[0];
        assert_eq!(o.points.len(), 50);
        for (k, (p, t)) in o.points.iter().zip(&o.times).enumerate() {
            // crossing k+1 happens at t = k + 0.7
            assert!((t - (k as f64 + 0.7)).abs() < 1e-9);
            let y = (0.1 + g * t).rem_euclid(1.0);
            assert!((p[0] - y).abs() < 1e-9);
            assert!((p[1] - g).abs() < 1e-12);
        }
        assert!(o.energy_error < 1e-12);
    }

    #[test]
    fn equilibrium_has_no_crossings() {
        let sys = TorusSystem::new(&ConformalFactor::example(), &Lattice::square());
        let s = VortexState::single(Vec2::new(0.5, 0.75), 1.0, Vec2::zeros());
        let h = sys.hamiltonian(&s).unwrap().total;
        let orbits = poincare_section(&[s], &SectionSpec::single_vortex(), h, &sys, &run(5.0, 10)).unwrap();
        assert!(matches!(orbits[0].halt, Some(Error::NoCrossings { orbit: 0, .. })));
    }

    #[test]
    fn off_level_initial_condition_rejected() {
        let sys = TorusSystem::new(&ConformalFactor::example(), &Lattice::square());
        let s = VortexState::single(Vec2::new(0.0, 0.5), 1.0, Vec2::new(0.4, 0.1));
        let e = poincare_section(&[s], &SectionSpec::single_vortex(), 0.12754, &sys, &run(5.0, 10)).unwrap_err();
        assert!(matches!(e, Error::InvalidInput(_)));
    }

    #[test]
    fn section_points_lie_on_section_and_level() {
        let sys = TorusSystem::new(&ConformalFactor::example(), &Lattice::square());
        let h = 0.12754;
        let s = complete_eta_x(&sys, Vec2::new(0.0, 0.5), 1.0, 0.2, h).unwrap();
        assert!((sys.hamiltonian(&s).unwrap().total - h).abs() < 1e-14);
        let orbits = poincare_section(&[s], &SectionSpec::single_vortex(), h, &sys, &run(200.0, 40)).unwrap();
        let o = &orbits[0];
        assert_eq!(o.points.len(), 40);
        assert!(o.energy_error < 1e-7);
        let bounds = SectionBounds::single_vortex(&sys, h, 1.0).unwrap();
        for p in &o.points {
            assert!((0.0..1.0).contains(&p[0]));
            assert!(p[1].abs() <= bounds.hi[1]);
        }
    }

    #[test]
    fn occupancy_counts_cells() {
        let b = SectionBounds {
            lo: [0.0, 0.0],
            hi: [1.0, 1.0],
        };
        let pts = [[0.001, 0.001], [0.002, 0.003], [0.5, 0.5], [1.0, 1.0]];
        assert!((occupancy(&pts, &b, 10) - 0.03).abs() < 1e-15);
    }
}
