use std::f64::consts::PI;

use proptest::prelude::*;
use vortex_core::planar::{green_double_disk, green_electro_disk, green_sphere, AnnulusDomain};
use vortex_core::Complex64;

const TOL: f64 = 1e-15;

fn domain() -> AnnulusDomain {
    AnnulusDomain::new(0.5, 2.0).unwrap()
}

fn laplacian(f: impl Fn(Complex64) -> f64, z: Complex64, h: f64) -> f64 {
    let (hx, hy) = (Complex64::new(h, 0.0), Complex64::new(0.0, h));
    (f(z + hx) + f(z - hx) + f(z + hy) + f(z - hy) - 4.0 * f(z)) / (h * h)
}

fn interior(rad: f64, th: f64) -> Complex64 {
    Complex64::from_polar(rad, th)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn annulus_electro_green_vanishes_on_both_circles(
        a in 0.6..1.9f64, ta in 0.0..2.0 * PI, th in 0.0..2.0 * PI
    ) {
        let d = domain();
        let w = interior(a, ta);
        for rad in [d.r, d.big_r] {
            let g = d.green_electro(Complex64::from_polar(rad, th), w, TOL).unwrap().value;
            prop_assert!(g.abs() < 1e-12, "G = {g} on |z| = {rad}");
        }
    }

    #[test]
    fn annulus_greens_are_symmetric(
        a in 0.6..1.9f64, ta in 0.0..2.0 * PI, b in 0.6..1.9f64, tb in 0.0..2.0 * PI, p in -1.0..1.0f64
    ) {
        let d = domain();
        let (z, w) = (interior(a, ta), interior(b, tb));
        prop_assume!((z - w).norm() > 1e-3);
        let e = |x, y| d.green_electro(x, y, TOL).unwrap().value;
        let h = |x, y| d.green_hydro(x, y, p, TOL).unwrap().value;
        prop_assert!((e(z, w) - e(w, z)).abs() < 1e-12);
        prop_assert!((h(z, w) - h(w, z)).abs() < 1e-12);
    }

    #[test]
    fn harmonic_measure_takes_boundary_values(th in 0.0..2.0 * PI) {
        let d = domain();
        let inner = d.harmonic_measure(Complex64::from_polar(d.r, th)).unwrap().0;
        let outer = d.harmonic_measure(Complex64::from_polar(d.big_r, th)).unwrap().0;
        prop_assert!((inner - 1.0).abs() < 1e-14 && outer.abs() < 1e-14);
    }

    #[test]
    fn disk_green_vanishes_on_circle_and_is_symmetric(
        a in 0.0..0.95f64, ta in 0.0..2.0 * PI, b in 0.0..0.95f64, tb in 0.0..2.0 * PI, th in 0.0..2.0 * PI
    ) {
        let (z, w) = (interior(a, ta), interior(b, tb));
        prop_assume!((z - w).norm() > 1e-3);
        let edge = green_electro_disk(Complex64::from_polar(1.0, th), w).unwrap().value;
        prop_assert!(edge.abs() < 1e-14);
        let g = |x, y| green_electro_disk(x, y).unwrap().value;
        prop_assert!((g(z, w) - g(w, z)).abs() < 1e-14);
    }

    #[test]
    fn double_disk_and_sphere_are_symmetric(
        a in 0.0..3.0f64, ta in 0.0..2.0 * PI, b in 0.0..3.0f64, tb in 0.0..2.0 * PI
    ) {
        let (z, w) = (interior(a, ta), interior(b, tb));
        prop_assume!((z - w).norm() > 1e-3);
        let dd = |x, y| green_double_disk(x, y).unwrap().value;
        let sp = |x, y| green_sphere(x, y).unwrap().value;
        prop_assert!((dd(z, w) - dd(w, z)).abs() < 1e-13);
        prop_assert!((sp(z, w) - sp(w, z)).abs() < 1e-13);
    }
}

#[test]
fn annulus_electro_green_is_harmonic_away_from_source() {
    let d = domain();
    let w = Complex64::new(0.4, 1.0);
    for z in [Complex64::new(-1.2, 0.3), Complex64::new(0.0, -0.8), Complex64::new(1.5, -0.2)] {
        let lap = laplacian(|x| d.green_electro(x, w, TOL).unwrap().value, z, 1e-3);
        assert!(lap.abs() < 1e-5, "{lap}");
        let lap_u = laplacian(|x| d.harmonic_measure(x).unwrap().0, z, 1e-3);
        assert!(lap_u.abs() < 1e-5, "{lap_u}");
    }
}

#[test]
fn annulus_robin_is_the_regular_part() {
    let d = domain();
    for w in [Complex64::new(0.7, 0.0), Complex64::new(-0.5, 1.1), Complex64::new(0.0, 1.8)] {
        let eps = 1e-5;
        let e = Complex64::new(0.6, 0.8);
        let regular = |s: f64| d.green_electro(w + e * (s * eps), w, TOL).unwrap().value + eps.ln() / (2.0 * PI);
        let limit = 0.5 * (regular(1.0) + regular(-1.0));
        let (r, _) = d.robin_electro(w, TOL).unwrap();
        assert!((limit - r).abs() < 1e-8, "{limit} vs {r}");
    }
}

#[test]
fn disk_green_has_unit_logarithmic_singularity() {
    let w = Complex64::new(0.3, -0.2);
    let eps = 1e-6;
    let g = green_electro_disk(w + eps, w).unwrap().value;
    // regular part (1/2π) log(1 - |w|²)
    let regular = (1.0 - w.norm_sqr()).ln() / (2.0 * PI);
    assert!((g + eps.ln() / (2.0 * PI) - regular).abs() < 1e-5);
}

#[test]
fn capacity_is_the_reciprocal_modulus() {
    let d = domain();
    let c = d.capacity();
    assert!((c.q - (4.0f64).ln() / PI).abs() < 1e-15);
    assert!((c.p * c.q - 1.0).abs() < 1e-15);
}
