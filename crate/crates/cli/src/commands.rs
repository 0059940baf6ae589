//! Subcommand bodies. Each writes its artifacts into the output directory
//! and returns their paths. A run that halts early still writes what it
//! produced before reporting the numerical error.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vortex_core::analysis::{
    complete_eta_x, find_equilibria, occupancy, poincare_section, seed_grid, SectionBounds, SectionRun, SectionSpec,
};
use vortex_core::dynamics::{RunSettings, TorusSystem, VortexState};
use vortex_core::planar::{schottky_diagnostics, impulsive_circulation, AnnulusDomain, AnnulusRunSettings, AnnulusSystem};
use vortex_core::{Complex64, Error, Vec2};

use crate::config::{self, AnnulusConfig, EquilibriaConfig, GreensTableConfig, SectionConfig, SimulateConfig, TableKind};
use crate::output::{write_csv, write_json};
use crate::{Artifacts, CliError, CliResult};

fn halted(halt: &Option<Error>, art: Artifacts) -> CliResult<Artifacts> {
    match halt {
        None => Ok(art),
        Some(e) => Err(CliError::from(e.clone())),
    }
}

fn display(e: &Option<Error>) -> Option<String> {
    e.as_ref().map(|e| e.to_string())
}

pub fn simulate(cfg: &SimulateConfig, out: &Path) -> CliResult<Artifacts> {
    let (lattice, cf) = config::surface(&cfg.lattice, &cfg.conformal)?;
    let system = TorusSystem::new(&cf, &lattice);
    let state = VortexState::new(
        cfg.vortices.iter().map(|v| Vec2::new(v.x, v.y)).collect(),
        cfg.vortices.iter().map(|v| v.gamma).collect(),
        Vec2::new(cfg.eta[0], cfg.eta[1]),
    )?;
    let settings = RunSettings {
        t_end: cfg.t_end,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        sample_dt: cfg.sample_dt,
    };
    let rec = system.integrate(&state, cfg.rhs, &settings)?;

    let n = state.len();
    let mut header = vec!["t".to_string()];
    for j in 1..=n {
        header.push(format!("x{j}"));
        header.push(format!("y{j}"));
    }
    header.extend(["eta_x", "eta_y", "H", "Hvort", "Hharm"].map(String::from));
    let rows: Vec<Vec<f64>> = rec
        .samples
        .iter()
        .zip(&rec.ledger)
        .map(|(s, e)| {
            let mut row = vec![s.time];
            row.extend(s.positions.iter().flat_map(|p| [p.x, p.y]));
            row.extend([s.eta.x, s.eta.y, e.energy.total, e.energy.vortex, e.energy.harmonic]);
            row
        })
        .collect();

    #[derive(Serialize)]
    struct Summary {
        rhs: vortex_core::dynamics::RhsKind,
        settings: RunSettings,
        samples: usize,
        t_reached: f64,
        energy_initial: f64,
        energy_drift_max: f64,
        momentum_drift_max: Option<f64>,
        final_positions_wrapped: Vec<[f64; 2]>,
        accepted_steps: usize,
        rejected_steps: usize,
        seed: Option<u64>,
        halt: Option<String>,
    }
    let last = rec.last();
    let summary = Summary {
        rhs: cfg.rhs,
        settings,
        samples: rec.samples.len(),
        t_reached: last.time,
        energy_initial: rec.ledger[0].energy.total,
        energy_drift_max: rec.max_energy_drift(),
        momentum_drift_max: rec.max_momentum_drift(),
        final_positions_wrapped: last.wrapped(&lattice).iter().map(|p| [p.x, p.y]).collect(),
        accepted_steps: rec.stats.accepted,
        rejected_steps: rec.stats.rejected,
        seed: cfg.seed,
        halt: display(&rec.halt),
    };
    let art = Artifacts {
        files: vec![
            write_csv(out, "trajectory.csv", &header, &rows)?,
            write_json(out, "summary.json", &summary)?,
        ],
    };
    halted(&rec.halt, art)
}

pub fn section(cfg: &SectionConfig, out: &Path) -> CliResult<Artifacts> {
    let (lattice, cf) = config::surface(&cfg.lattice, &cfg.conformal)?;
    let system = TorusSystem::new(&cf, &lattice);
    let position = Vec2::new(cfg.position[0], cfg.position[1]);
    let initials = cfg
        .eta_y
        .iter()
        .map(|&e| complete_eta_x(&system, position, cfg.gamma, e, cfg.energy))
        .collect::<vortex_core::Result<Vec<_>>>()?;
    let spec = cfg.section.unwrap_or_else(SectionSpec::single_vortex);
    let run = SectionRun {
        t_end: cfg.t_end,
        max_crossings: cfg.max_crossings,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
    };
    let orbits = poincare_section(&initials, &spec, cfg.energy, &system, &run)?;
    let bounds = SectionBounds::single_vortex(&system, cfg.energy, cfg.gamma)?;

    #[derive(Serialize)]
    struct OrbitEntry {
        file: String,
        eta_y: f64,
        eta_x: f64,
        crossings: usize,
        occupancy: f64,
        energy_error: f64,
        halt: Option<String>,
    }
    #[derive(Serialize)]
    struct Manifest {
        energy: f64,
        section: SectionSpec,
        bounds: SectionBounds,
        bins: usize,
        run: SectionRun,
        orbits: Vec<OrbitEntry>,
    }
    let header = ["y".to_string(), "eta_y".to_string()];
    let mut files = Vec::new();
    let mut entries = Vec::new();
    for (orbit, init) in orbits.iter().zip(&initials) {
        let name = format!("orbit_{:03}.csv", orbit.index);
        let rows: Vec<Vec<f64>> = orbit.points.iter().map(|p| p.to_vec()).collect();
        files.push(write_csv(out, &name, &header, &rows)?);
        entries.push(OrbitEntry {
            file: name,
            eta_y: init.eta.y,
            eta_x: init.eta.x,
            crossings: orbit.points.len(),
            occupancy: occupancy(&orbit.points, &bounds, cfg.bins),
            energy_error: orbit.energy_error,
            halt: display(&orbit.halt),
        });
    }
    let manifest = Manifest {
        energy: cfg.energy,
        section: spec,
        bounds,
        bins: cfg.bins,
        run,
        orbits: entries,
    };
    files.push(write_json(out, "manifest.json", &manifest)?);
    // an orbit that never reaches the section is reported, not fatal
    Ok(Artifacts { files })
}

pub fn equilibria(cfg: &EquilibriaConfig, out: &Path) -> CliResult<Artifacts> {
    let (lattice, cf) = config::surface(&cfg.lattice, &cfg.conformal)?;
    let system = TorusSystem::new(&cf, &lattice);
    let mut seeds = seed_grid(&lattice, cfg.seeds);
    if let Some(seed) = cfg.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = 0.25 / cfg.seeds as f64;
        for s in &mut seeds {
            let f = lattice.to_fractional(*s) + Vec2::new(rng.gen_range(-half..half), rng.gen_range(-half..half));
            *s = lattice.from_fractional(f);
        }
    }
    let search = find_equilibria(&system, &seeds, cfg.newton_tol)?;

    #[derive(Serialize)]
    struct Entry {
        point: [f64; 2],
        #[serde(rename = "type")]
        kind: vortex_core::analysis::CriticalKind,
        rhs_norm: f64,
        robin: f64,
        hamiltonian: f64,
    }
    #[derive(Serialize)]
    struct Report {
        seeds: usize,
        newton_tol: f64,
        equilibria: Vec<Entry>,
        failures: Vec<String>,
    }
    let report = Report {
        seeds: seeds.len(),
        newton_tol: cfg.newton_tol,
        equilibria: search
            .equilibria
            .iter()
            .map(|e| Entry {
                point: [e.point.x, e.point.y],
                kind: e.kind,
                rhs_norm: e.rhs_norm,
                robin: e.robin,
                hamiltonian: e.hamiltonian,
            })
            .collect(),
        failures: search.failures.iter().map(|e| e.to_string()).collect(),
    };
    Ok(Artifacts {
        files: vec![write_json(out, "equilibria.json", &report)?],
    })
}

/// Grid `(i/nx) a + (j/ny) b`. The Green table puts `NaN` at the source.
pub fn greens_table(cfg: &GreensTableConfig, out: &Path) -> CliResult<Artifacts> {
    let (lattice, cf) = config::surface(&cfg.lattice, &cfg.conformal)?;
    let system = TorusSystem::new(&cf, &lattice);
    let green = system.green();
    let source = cfg.source.map(|s| Vec2::new(s[0], s[1]));
    let mut rows = Vec::with_capacity(cfg.nx * cfg.ny);
    for i in 0..cfg.nx {
        for j in 0..cfg.ny {
            let p = lattice.from_fractional(Vec2::new(i as f64 / cfg.nx as f64, j as f64 / cfg.ny as f64));
            let (v, g) = match (cfg.kind, source) {
                (TableKind::Robin, _) => {
                    let e = green.robin().eval(p)?;
                    (e.value, e.grad)
                }
                (TableKind::Green, Some(w)) => match green.eval(p, w) {
                    Ok(e) => (e.value, e.grad_first_slot),
                    Err(Error::CoincidentPoints { .. }) => (f64::NAN, Vec2::new(f64::NAN, f64::NAN)),
                    Err(e) => return Err(e.into()),
                },
                (TableKind::Green, None) => unreachable!("validated in config"),
            };
            rows.push(vec![p.x, p.y, v, g.x, g.y]);
        }
    }
    let header: Vec<String> = match cfg.kind {
        TableKind::Green => ["x", "y", "G", "Gx", "Gy"],
        TableKind::Robin => ["x", "y", "R", "Rx", "Ry"],
    }
    .map(String::from)
    .to_vec();
    Ok(Artifacts {
        files: vec![write_csv(out, "table.csv", &header, &rows)?],
    })
}

pub fn annulus(cfg: &AnnulusConfig, out: &Path) -> CliResult<Artifacts> {
    let domain = AnnulusDomain::new(cfg.r, cfg.big_r)?;
    let positions: Vec<Complex64> = cfg.vortices.iter().map(|v| Complex64::new(v.x, v.y)).collect();
    let strengths: Vec<f64> = cfg.vortices.iter().map(|v| v.gamma).collect();
    let p = match cfg.p {
        Some(p) => p,
        None => impulsive_circulation(&domain, &positions, &strengths)?,
    };
    let system = AnnulusSystem::new(domain, p);
    let settings = AnnulusRunSettings {
        t_end: cfg.t_end,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        sample_dt: cfg.sample_dt,
    };
    let traj = system.integrate(&positions, &strengths, &settings)?;

    let mut header = vec!["t".to_string()];
    for j in 1..=positions.len() {
        header.push(format!("x{j}"));
        header.push(format!("y{j}"));
    }
    header.extend(["B", "H_red", "p1"].map(String::from));
    let rows: Vec<Vec<f64>> = traj
        .samples
        .iter()
        .map(|s| {
            let mut row = vec![s.t];
            row.extend(s.positions.iter().flat_map(|z| [z.re, z.im]));
            row.extend([s.b, s.h_red, s.p]);
            row
        })
        .collect();
    let cap = domain.capacity();
    let diag = schottky_diagnostics(&traj);

    #[derive(Serialize)]
    struct Summary {
        #[serde(rename = "P")]
        p_cap: f64,
        #[serde(rename = "Q")]
        q_cap: f64,
        p_initial: f64,
        p_drift_max: f64,
        #[serde(rename = "H_drift_max")]
        h_drift_max: f64,
        samples: usize,
        halt: Option<String>,
    }
    let summary = Summary {
        p_cap: cap.p,
        q_cap: cap.q,
        p_initial: diag.p_initial,
        p_drift_max: diag.p_drift_max,
        h_drift_max: diag.h_drift_max,
        samples: traj.samples.len(),
        halt: display(&traj.halt),
    };
    let art = Artifacts {
        files: vec![
            write_csv(out, "annulus_trajectory.csv", &header, &rows)?,
            write_json(out, "annulus_summary.json", &summary)?,
        ],
    };
    halted(&traj.halt, art)
}
