//! Reduced vortex dynamics on the annulus.
//!
//! The inner-boundary circulation `p` is a constant of motion. The
//! harmonic part of the flow has circulation `B = p - Σ Γ_k u(s_k)`, and the
//! stream function is `ψ = Σ Γ_k G_electro(·, s_k) - (1/2) Q B u`. The
//! reduced Hamiltonian
//!
//! ```text
//! H_red = (1/2) Σ Γ_j² R(s_j) + Σ_{j<k} Γ_j Γ_k G(s_j, s_k) + (1/4) Q B²
//! ```
//!
//! drives `Γ_j ẋ_j = ∂H/∂y_j`, `Γ_j ẏ_j = -∂H/∂x_j`. `B` is carried as an
//! extra state variable with `Ḃ = -Σ Γ_j ∇u(s_j)·ṡ_j`, so drift of
//! `B + Σ Γ u` measures integration error.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::annulus::AnnulusDomain;
use crate::error::{Error, Result};
use crate::integrator::{self, Control, Options, Stats};
use crate::quadrature::GaussLegendre;
use crate::Vec2;

/// Truncation for the image products used by the dynamics.
const SERIES_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSystem {
    pub domain: AnnulusDomain,
    /// Inner-boundary circulation.
    pub p: f64,
    pub collision_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinReduced {
    pub b: f64,
    pub h_red: f64,
    pub h_lin: f64,
    pub velocities: Vec<Vec2>,
}

impl AnnulusSystem {
    pub fn new(domain: AnnulusDomain, p: f64) -> Self {
        Self {
            domain,
            p,
            collision_distance: crate::dynamics::COLLISION_DISTANCE,
        }
    }

    fn check(&self, positions: &[Complex64]) -> Result<()> {
        for j in 0..positions.len() {
            self.domain.harmonic_measure(positions[j])?;
            for k in j + 1..positions.len() {
                let d = (positions[j] - positions[k]).norm();
                if d < self.collision_distance {
                    return Err(Error::Collision {
                        first: j,
                        second: k,
                        distance: d,
                    });
                }
            }
        }
        Ok(())
    }

    /// `B = p - Σ Γ_k u(s_k)`.
    pub fn harmonic_circulation(&self, positions: &[Complex64], strengths: &[f64]) -> Result<f64> {
        let mut b = self.p;
        for (s, g) in positions.iter().zip(strengths) {
            b -= g * self.domain.harmonic_measure(*s)?.0;
        }
        Ok(b)
    }

    fn interaction(&self, positions: &[Complex64], strengths: &[f64]) -> Result<f64> {
        let mut h = 0.0;
        for j in 0..positions.len() {
            h += 0.5 * strengths[j].powi(2) * self.domain.robin_electro(positions[j], SERIES_TOL)?.0;
            for k in j + 1..positions.len() {
                h += strengths[j] * strengths[k] * self.domain.green_electro(positions[j], positions[k], SERIES_TOL)?.value;
            }
        }
        Ok(h)
    }

    pub fn reduced_hamiltonian(&self, positions: &[Complex64], strengths: &[f64], b: f64) -> Result<f64> {
        self.check(positions)?;
        let q = self.domain.capacity().q;
        Ok(self.interaction(positions, strengths)? + 0.25 * q * b * b)
    }

    /// Kirchhoff–Routh form with Lin's Green function and the outside
    /// agency `ψ = -(1/2) p Q u`.
    pub fn lin_hamiltonian(&self, positions: &[Complex64], strengths: &[f64]) -> Result<f64> {
        self.check(positions)?;
        let q = self.domain.capacity().q;
        let u: Vec<f64> = positions
            .iter()
            .map(|s| self.domain.harmonic_measure(*s).map(|x| x.0))
            .collect::<Result<_>>()?;
        let mut h = self.interaction(positions, strengths)?;
        for j in 0..positions.len() {
            let g = strengths[j];
            h += 0.25 * g * g * q * u[j] * u[j];
            for k in j + 1..positions.len() {
                h += 0.5 * g * strengths[k] * q * u[j] * u[k];
            }
            h -= 0.5 * g * self.p * q * u[j];
        }
        Ok(h)
    }

    /// Vortex velocities for a given harmonic circulation `b`.
    pub fn velocities(&self, positions: &[Complex64], strengths: &[f64], b: f64) -> Result<Vec<Vec2>> {
        self.check(positions)?;
        let half_qb = 0.5 * self.domain.capacity().q * b;
        let mut out = Vec::with_capacity(positions.len());
        for j in 0..positions.len() {
            let mut grad = self.domain.robin_electro(positions[j], SERIES_TOL)?.1 * (0.5 * strengths[j]);
            for k in 0..positions.len() {
                if k != j {
                    grad += self.domain.green_electro(positions[j], positions[k], SERIES_TOL)?.grad_first_slot * strengths[k];
                }
            }
            let (_, du) = self.domain.harmonic_measure(positions[j])?;
            let stream = grad - du * half_qb;
            out.push(Vec2::new(stream.y, -stream.x));
        }
        Ok(out)
    }

    /// Packed right-hand side on `[x_1, y_1, ..., x_N, y_N, B]`.
    pub fn rhs_vector(&self, strengths: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let n = strengths.len();
        let positions: Vec<Complex64> = (0..n).map(|j| Complex64::new(y[2 * j], y[2 * j + 1])).collect();
        let b = y[2 * n];
        let v = self.velocities(&positions, strengths, b)?;
        let mut out: Vec<f64> = v.iter().flat_map(|p| [p.x, p.y]).collect();
        let mut b_dot = 0.0;
        for j in 0..n {
            let (_, du) = self.domain.harmonic_measure(positions[j])?;
            b_dot -= strengths[j] * du.dot(&v[j]);
        }
        out.push(b_dot);
        Ok(out)
    }

    /// Flow one-form `ν = (ψ_y, -ψ_x)` at `z`.
    pub fn flow_form(&self, positions: &[Complex64], strengths: &[f64], b: f64, z: Complex64) -> Result<Vec2> {
        let (_, du) = self.domain.harmonic_measure(z)?;
        let mut grad = -du * (0.5 * self.domain.capacity().q * b);
        for (s, g) in positions.iter().zip(strengths) {
            grad += self.domain.green_electro(z, *s, SERIES_TOL)?.grad_first_slot * *g;
        }
        Ok(Vec2::new(grad.y, -grad.x))
    }

    pub fn integrate(&self, positions: &[Complex64], strengths: &[f64], settings: &AnnulusRunSettings) -> Result<AnnulusTrajectory> {
        if positions.len() != strengths.len() {
            return Err(Error::InvalidInput("positions and strengths differ in length".into()));
        }
        if !(settings.t_end > 0.0 && settings.sample_dt > 0.0) {
            return Err(Error::InvalidInput("t_end and sample_dt must be positive".into()));
        }
        let n = positions.len();
        let b0 = self.harmonic_circulation(positions, strengths)?;
        let sample = |t: f64, y: &[f64]| -> Result<AnnulusSample> {
            let pos: Vec<Complex64> = (0..n).map(|j| Complex64::new(y[2 * j], y[2 * j + 1])).collect();
            let b = y[2 * n];
            let h_red = self.reduced_hamiltonian(&pos, strengths, b)?;
            let p = b + strengths
                .iter()
                .zip(&pos)
                .map(|(g, s)| self.domain.harmonic_measure(*s).map(|x| g * x.0))
                .sum::<Result<f64>>()?;
            Ok(AnnulusSample {
                t,
                positions: pos,
                b,
                h_red,
                p,
            })
        };
        let mut y0: Vec<f64> = positions.iter().flat_map(|s| [s.re, s.im]).collect();
        y0.push(b0);
        let mut samples = vec![sample(0.0, &y0)?];
        let mut next = 1u64;
        let mut sample_error = None;
        let opts = Options::new(settings.rel_tol, settings.abs_tol);
        let outcome = integrator::integrate(
            |_, y| self.rhs_vector(strengths, y),
            0.0,
            &y0,
            settings.t_end,
            &opts,
            |step| {
                loop {
                    let t = settings.sample_dt * next as f64;
                    if t > step.t1() || t >= settings.t_end {
                        break;
                    }
                    match sample(t, &step.eval(t)) {
                        Ok(s) => samples.push(s),
                        Err(e) => {
                            sample_error = Some(e);
                            return Control::Stop;
                        }
                    }
                    next += 1;
                }
                Control::Continue
            },
        );
        let mut halt = outcome.halt.or(sample_error);
        if halt.is_none() {
            match sample(settings.t_end, &outcome.y) {
                Ok(s) => samples.push(s),
                Err(e) => halt = Some(e),
            }
        }
        if let Some(Error::InvalidInput(m)) = &halt {
            return Err(Error::InvalidInput(m.clone()));
        }
        Ok(AnnulusTrajectory {
            p: self.p,
            strengths: strengths.to_vec(),
            samples,
            stats: outcome.stats,
            halt,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusRunSettings {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub sample_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusSample {
    pub t: f64,
    pub positions: Vec<Complex64>,
    pub b: f64,
    pub h_red: f64,
    /// `B + Σ Γ u(s)`, conserved.
    pub p: f64,
}

#[derive(Debug, Clone)]
pub struct AnnulusTrajectory {
    pub p: f64,
    pub strengths: Vec<f64>,
    pub samples: Vec<AnnulusSample>,
    pub stats: Stats,
    pub halt: Option<Error>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchottkyReport {
    pub p_initial: f64,
    pub p_drift_max: f64,
    pub h_drift_max: f64,
}

/// `lin_reduced` entry point: `B`, both Hamiltonians and the velocities.
pub fn lin_reduced(dom: &AnnulusDomain, positions: &[Complex64], strengths: &[f64], p: f64) -> Result<LinReduced> {
    let sys = AnnulusSystem::new(*dom, p);
    let b = sys.harmonic_circulation(positions, strengths)?;
    Ok(LinReduced {
        b,
        h_red: sys.reduced_hamiltonian(positions, strengths, b)?,
        h_lin: sys.lin_hamiltonian(positions, strengths)?,
        velocities: sys.velocities(positions, strengths, b)?,
    })
}

/// Circulation left on the inner boundary by vortices started from rest:
/// `p = Σ Γ_k u(s_k(0))`.
pub fn impulsive_circulation(dom: &AnnulusDomain, positions: &[Complex64], strengths: &[f64]) -> Result<f64> {
    positions
        .iter()
        .zip(strengths)
        .map(|(s, g)| dom.harmonic_measure(*s).map(|u| g * u.0))
        .sum()
}

/// `(p₀, p₁)`: circulations of the flow around the outer circle
/// (counterclockwise) and the inner circle (clockwise), by quadrature.
pub fn boundary_circulations(dom: &AnnulusDomain, positions: &[Complex64], strengths: &[f64], b: f64) -> Result<(f64, f64)> {
    let sys = AnnulusSystem::new(*dom, 0.0);
    let gl = GaussLegendre::new(64);
    let mut out = [0.0; 2];
    for (slot, (rad, sign)) in [(dom.big_r, 1.0), (dom.r, -1.0)].into_iter().enumerate() {
        let mut failure = None;
        out[slot] = gl.integrate_composite(0.0, 2.0 * PI, 16, |th| {
            let z = Complex64::from_polar(rad, th);
            let t = Complex64::new(0.0, sign) * z;
            match sys.flow_form(positions, strengths, b, z) {
                Ok(nu) => nu.x * t.re + nu.y * t.im,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok((out[0], out[1]))
}

pub fn schottky_diagnostics(traj: &AnnulusTrajectory) -> SchottkyReport {
    let first = &traj.samples[0];
    let p_drift_max = traj.samples.iter().map(|s| (s.p - first.p).abs()).fold(0.0, f64::max);
    let h_drift_max = traj.samples.iter().map(|s| (s.h_red - first.h_red).abs()).fold(0.0, f64::max);
    SchottkyReport {
        p_initial: first.p,
        p_drift_max,
        h_drift_max,
    }
}
