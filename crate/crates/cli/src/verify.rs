//! Golden-value checks on the example torus, the flat torus and the planar
//! domains. Small enough to run in seconds; the full acceptance suite lives
//! in the core crate.

use std::f64::consts::PI;

use clap::ValueEnum;
use serde::Serialize;
use vortex_core::analysis::{
    complete_eta_x, complete_vs_incomplete, find_equilibria, poincare_section, seed_grid, CriticalKind, SectionRun,
    SectionSpec,
};
use vortex_core::dynamics::{RhsKind, RunSettings, TorusSystem, VortexState};
use vortex_core::greens::{hat_trick_check, Cycle};
use vortex_core::planar::{green_double_disk, lin_reduced, AnnulusDomain};
use vortex_core::quadrature::GaussLegendre;
use vortex_core::{Complex64, ConformalFactor, Lattice, Vec2};

/// Deliberate faults used to confirm that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mutation {
    /// Flip the sign of the `φ` term in the Robin function.
    RobinSign,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckItem {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub mutation: Option<String>,
    pub items: Vec<CheckItem>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }

    pub fn failures(&self) -> usize {
        self.items.iter().filter(|i| !i.pass).count()
    }
}

struct Checks {
    items: Vec<CheckItem>,
}

impl Checks {
    fn add(&mut self, name: &str, outcome: vortex_core::Result<(bool, String)>) {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.items.push(CheckItem {
            name: name.into(),
            pass,
            detail,
        });
    }
}

fn example() -> TorusSystem {
    TorusSystem::new(&ConformalFactor::example(), &Lattice::square())
}

fn settings(t_end: f64, sample_dt: f64) -> RunSettings {
    RunSettings {
        t_end,
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        sample_dt,
    }
}

/// Robin value with the optional fault applied. `R = log ρ/4π + 2φ`, so the
/// flipped variant is `R - 4φ`.
fn robin_value(sys: &TorusSystem, p: Vec2, mutation: Option<Mutation>) -> vortex_core::Result<f64> {
    let rf = sys.green().robin();
    let r = rf.value(p)?;
    Ok(match mutation {
        Some(Mutation::RobinSign) => r - 4.0 * rf.phi().value(p),
        None => r,
    })
}

pub fn run(mutation: Option<Mutation>) -> VerifyReport {
    let mut c = Checks { items: Vec::new() };
    let sys = example();
    let lattice = *sys.lattice();

    c.add("density at (0, 1/4)", {
        let rho = sys.factor().value(&lattice, Vec2::new(0.0, 0.25));
        Ok(((rho - 1.5).abs() < 1e-14, format!("rho = {rho}")))
    });

    c.add("Robin value at (0, 1/4)", {
        robin_value(&sys, Vec2::new(0.0, 0.25), mutation)
            .map(|r| ((r - 0.00694).abs() < 1e-3, format!("R = {r:.6}, expected 0.00694")))
    });

    c.add("single-vortex equilibria", (|| {
        let out = find_equilibria(&sys, &seed_grid(&lattice, 4), 1e-12)?;
        let expected = [
            ((0.0, 0.25), CriticalKind::Maximum),
            ((0.0, 0.75), CriticalKind::Saddle),
            ((0.5, 0.25), CriticalKind::Saddle),
            ((0.5, 0.75), CriticalKind::Minimum),
        ];
        let matched = expected.iter().all(|&((x, y), kind)| {
            out.equilibria
                .iter()
                .any(|e| e.kind == kind && lattice.toroidal_distance(e.point, Vec2::new(x, y)) < 1e-8)
        });
        let rhs = out.equilibria.iter().map(|e| e.rhs_norm).fold(0.0, f64::max);
        Ok((
            matched && out.equilibria.len() == 4 && rhs < 1e-8,
            format!("{} found, max |RHS| {rhs:.1e}", out.equilibria.len()),
        ))
    })());

    c.add("flat torus single vortex drifts with eta", (|| {
        let flat = TorusSystem::new(&ConformalFactor::flat(), &lattice);
        let d = flat.rhs(&VortexState::single(Vec2::new(0.2, 0.7), 1.0, Vec2::new(0.5, 0.25)), RhsKind::Complete)?;
        let err = (d.velocities[0] - Vec2::new(0.5, 0.25)).norm();
        let eta_dot = d.eta_dot.norm();
        Ok((err < 1e-14 && eta_dot < 1e-14, format!("velocity error {err:.1e}, |eta'| {eta_dot:.1e}")))
    })());

    c.add("energy level of the section family", (|| {
        let s = VortexState::single(Vec2::new(0.0, 0.5), 1.0, Vec2::new(0.5, 0.0));
        let h = sys.hamiltonian(&s)?.total;
        // the quoted level carries five decimals, truncated
        Ok(((h - 0.12754).abs() < 1e-5, format!("H = {h:.6}")))
    })());

    c.add("hat trick jump", (|| {
        let pts = [Vec2::new(0.3, 0.2), Vec2::new(0.7, 0.6), Vec2::new(0.1, 0.85)];
        let r = hat_trick_check(&lattice, Cycle::A, &pts)?;
        Ok((
            r.max_residual < 1e-6 && (r.jump - 1.0).abs() < 1e-4,
            format!("residual {:.1e}, jump {:.8}", r.max_residual, r.jump),
        ))
    })());

    c.add("dipole momenta to t = 20", (|| {
        let s = VortexState::new(
            vec![Vec2::new(0.3, 0.5), Vec2::new(0.4, 0.55)],
            vec![1.0, -1.0],
            Vec2::new(0.2, -0.1),
        )?;
        let rec = sys.integrate(&s, RhsKind::Complete, &settings(20.0, 0.5))?;
        let drift = rec.max_momentum_drift().unwrap_or(f64::INFINITY);
        Ok((drift < 1e-6 && rec.halt.is_none(), format!("drift {drift:.1e}")))
    })());

    c.add("equilibrium stays put", (|| {
        let s = VortexState::single(Vec2::new(0.5, 0.75), 1.0, Vec2::zeros());
        let rec = sys.integrate(&s, RhsKind::Complete, &settings(10.0, 1.0))?;
        let moved = rec
            .samples
            .iter()
            .map(|x| lattice.toroidal_distance(x.positions[0], s.positions[0]).max(x.eta.norm()))
            .fold(0.0, f64::max);
        Ok((moved < 1e-9, format!("max displacement {moved:.1e}")))
    })());

    c.add("equilibrium complete and incomplete agree", (|| {
        let s = VortexState::single(Vec2::new(0.0, 0.25), 1.0, Vec2::zeros());
        let r = complete_vs_incomplete(&sys, &s, &settings(5.0, 0.5))?;
        Ok((r.max_distance < 1e-12, format!("max distance {:.1e}", r.max_distance)))
    })());

    c.add("short Poincare section", (|| {
        let h = 0.12754;
        let initials = [0.0, -0.3, 0.3]
            .iter()
            .map(|&e| complete_eta_x(&sys, Vec2::new(0.0, 0.5), 1.0, e, h))
            .collect::<vortex_core::Result<Vec<_>>>()?;
        let run = SectionRun {
            t_end: 1e4,
            max_crossings: 50,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        };
        let orbits = poincare_section(&initials, &SectionSpec::single_vortex(), h, &sys, &run)?;
        let full = orbits.iter().all(|o| o.points.len() == 50);
        let err = orbits.iter().map(|o| o.energy_error).fold(0.0, f64::max);
        let on_section = orbits.iter().flat_map(|o| &o.points).all(|p| (0.0..1.0).contains(&p[0]));
        Ok((full && on_section && err < 1e-8, format!("3 orbits, energy error {err:.1e}")))
    })());

    c.add("double disk is C1 and mean zero", (|| {
        let w = Complex64::new(0.4, 0.0);
        let mut c1: f64 = 0.0;
        for k in 0..8 {
            let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 8.0 + 0.1);
            let a = green_double_disk(e * (1.0 - 1e-10), w)?;
            let b = green_double_disk(e * (1.0 + 1e-10), w)?;
            let radial = |g: &vortex_core::GreenEval| g.grad_first_slot.dot(&Vec2::new(e.re, e.im));
            c1 = c1.max((a.value - b.value).abs()).max((radial(&a) - radial(&b)).abs());
        }
        let gl = GaussLegendre::new(40);
        let origin = Complex64::new(0.0, 0.0);
        let f = |rho: f64| green_double_disk(Complex64::new(rho, 0.0), origin).map(|g| g.value).unwrap_or(f64::NAN);
        let mean = 2.0 * PI
            * (gl.integrate_composite(0.0, 1.0, 64, |r| f(r) * r) + gl.integrate_composite(0.0, 1.0, 64, |s| f(1.0 / s) * s));
        Ok((c1 < 1e-8 && mean.abs() < 1e-8, format!("C1 residual {c1:.1e}, mean {mean:.1e}")))
    })());

    c.add("hydrodynamic Green flux", (|| {
        let d = AnnulusDomain::new(0.5, 2.0)?;
        let w = Complex64::new(0.3, 1.1);
        let gl = GaussLegendre::new(64);
        let mut worst: f64 = 0.0;
        for p in [0.0, 1.0] {
            // inner circle, clockwise
            let mut err = None;
            let flux = gl.integrate_composite(0.0, 2.0 * PI, 8, |th| {
                let z = Complex64::from_polar(d.r, th);
                match d.green_hydro(z, w, p, 1e-14) {
                    Ok(g) => {
                        let t = Complex64::new(0.0, -1.0) * z;
                        g.grad_first_slot.x * t.im - g.grad_first_slot.y * t.re
                    }
                    Err(e) => {
                        err = Some(e);
                        0.0
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            worst = worst.max((flux + p).abs());
        }
        Ok((worst < 1e-6, format!("max flux error {worst:.1e}")))
    })());

    c.add("Lin reduction offset is constant", (|| {
        let d = AnnulusDomain::new(0.5, 2.0)?;
        let configs = [
            [Complex64::new(0.9, 0.3), Complex64::new(-1.2, -0.5)],
            [Complex64::new(-0.7, 0.6), Complex64::new(0.2, 1.5)],
            [Complex64::new(1.6, -0.4), Complex64::new(-0.1, -0.8)],
        ];
        let diffs = configs
            .iter()
            .map(|pts| lin_reduced(&d, pts, &[1.0, -0.6], 0.4).map(|o| o.h_red - o.h_lin))
            .collect::<vortex_core::Result<Vec<_>>>()?;
        let spread = diffs.iter().cloned().fold(f64::MIN, f64::max) - diffs.iter().cloned().fold(f64::MAX, f64::min);
        Ok((spread < 1e-10, format!("spread {spread:.1e}")))
    })());

    VerifyReport {
        mutation: mutation.map(|m| format!("{m:?}")),
        items: c.items,
    }
}
