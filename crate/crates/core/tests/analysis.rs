use proptest::prelude::*;
use vortex_core::analysis::{
    complete_eta_x, dipole_probe, find_equilibria, occupancy, poincare_section, seed_grid, CriticalKind, SectionBounds,
    SectionRun, SectionSpec,
};
use vortex_core::dynamics::{RhsKind, TorusSystem};
use vortex_core::{ConformalFactor, Error, Lattice, Vec2};

const LEVEL: f64 = 0.12754;

fn example() -> TorusSystem {
    TorusSystem::new(&ConformalFactor::example(), &Lattice::square())
}

fn short_run(crossings: usize) -> SectionRun {
    SectionRun {
        t_end: 1e4,
        max_crossings: crossings,
        rel_tol: 1e-10,
        abs_tol: 1e-12,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn section_points_stay_on_the_energy_shell(eta_y in -0.4..0.4f64) {
        let sys = example();
        let s = complete_eta_x(&sys, Vec2::new(0.0, 0.5), 1.0, eta_y, LEVEL).unwrap();
        prop_assert!((sys.hamiltonian(&s).unwrap().total - LEVEL).abs() < 1e-14);
        let orbit = &poincare_section(&[s], &SectionSpec::single_vortex(), LEVEL, &sys, &short_run(20)).unwrap()[0];
        prop_assert_eq!(orbit.points.len(), 20);
        prop_assert!(orbit.energy_error < 1e-8);
        prop_assert!(orbit.times.windows(2).all(|w| w[1] > w[0]));
        let bounds = SectionBounds::single_vortex(&sys, LEVEL, 1.0).unwrap();
        for p in &orbit.points {
            prop_assert!((0.0..1.0).contains(&p[0]));
            // η_x > 0 on the section, so |η_y| stays inside the accessible band
            prop_assert!(p[1] >= bounds.lo[1] && p[1] <= bounds.hi[1]);
        }
    }

    #[test]
    fn equilibria_are_critical_points_with_zero_rhs(scale in 0.2..1.0f64) {
        let sys = TorusSystem::new(&ConformalFactor::example_scaled(scale), &Lattice::square());
        let out = find_equilibria(&sys, &seed_grid(sys.lattice(), 4), 1e-12).unwrap();
        prop_assert_eq!(out.equilibria.len(), 4);
        let robin = sys.green().robin();
        for e in &out.equilibria {
            prop_assert!(e.rhs_norm < 1e-8);
            prop_assert!(robin.grad(e.point).unwrap().norm() < 1e-10);
        }
        let count = |k| out.equilibria.iter().filter(|e| e.kind == k).count();
        // Euler characteristic of the torus: maxima + minima - saddles = 0
        prop_assert_eq!(count(CriticalKind::Maximum) + count(CriticalKind::Minimum), count(CriticalKind::Saddle));
    }

    #[test]
    fn occupancy_is_a_fraction_that_grows_with_points(
        pts in proptest::collection::vec((0.0..1.0f64, -1.0..1.0f64), 1..200),
        extra in (0.0..1.0f64, -1.0..1.0f64)
    ) {
        let bounds = SectionBounds { lo: [0.0, -1.0], hi: [1.0, 1.0] };
        let mut v: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
        let before = occupancy(&v, &bounds, 10);
        prop_assert!(before > 0.0 && before <= v.len() as f64 / 100.0 + 1e-15);
        v.push([extra.0, extra.1]);
        prop_assert!(occupancy(&v, &bounds, 10) >= before);
    }
}

#[test]
fn equilibrium_orbit_never_crosses_the_section() {
    let sys = example();
    let s = complete_eta_x(&sys, Vec2::new(0.5, 0.75), 1.0, 0.0, sys.green().robin().value(Vec2::new(0.5, 0.75)).unwrap() / 2.0)
        .unwrap();
    assert_eq!(s.eta, Vec2::zeros());
    let h = sys.hamiltonian(&s).unwrap().total;
    let mut run = short_run(5);
    run.t_end = 20.0;
    let orbit = &poincare_section(&[s], &SectionSpec::single_vortex(), h, &sys, &run).unwrap()[0];
    assert!(orbit.points.is_empty());
    assert!(matches!(orbit.halt, Some(Error::NoCrossings { .. })));
}

#[test]
fn initial_state_off_the_energy_level_is_rejected() {
    let sys = example();
    let s = complete_eta_x(&sys, Vec2::new(0.0, 0.5), 1.0, 0.1, LEVEL).unwrap();
    let e = poincare_section(&[s], &SectionSpec::single_vortex(), LEVEL + 1e-6, &sys, &short_run(5)).unwrap_err();
    assert!(matches!(e, Error::InvalidInput(_)));
}

#[test]
fn energy_below_the_potential_is_rejected() {
    let sys = example();
    assert!(complete_eta_x(&sys, Vec2::new(0.0, 0.5), 1.0, 0.0, 0.0).is_err());
}

#[test]
fn flat_dipole_follows_a_straight_line() {
    let sys = TorusSystem::new(&ConformalFactor::flat(), &Lattice::square());
    let r = dipole_probe(&sys, Vec2::new(0.2, 0.3), Vec2::new(0.6, 0.8), 0.01, 1.0).unwrap();
    assert!(r.deviation < 1e-9, "{}", r.deviation);
    assert!((r.max_separation_ratio - 1.0).abs() < 1e-9);
}

#[test]
fn dipole_deviation_scales_with_separation() {
    let sys = example();
    let (mid, dir) = (Vec2::new(0.1, 0.4), Vec2::new(0.6, 0.8));
    let a = dipole_probe(&sys, mid, dir, 0.01, 1.0).unwrap();
    let b = dipole_probe(&sys, mid, dir, 0.005, 1.0).unwrap();
    let ratio = a.deviation / b.deviation;
    assert!((2.6..=6.0).contains(&ratio), "{ratio}");
}

#[test]
fn equilibrium_rhs_vanishes_for_both_kinds() {
    let sys = example();
    let out = find_equilibria(&sys, &seed_grid(sys.lattice(), 4), 1e-12).unwrap();
    for e in &out.equilibria {
        let s = vortex_core::dynamics::VortexState::single(e.point, 1.0, Vec2::zeros());
        for kind in [RhsKind::Complete, RhsKind::Incomplete] {
            assert!(sys.rhs(&s, kind).unwrap().norm() < 1e-8);
        }
    }
}
