use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::surface::{ConformalFactor, FieldEval, Lattice, Mode, SpectralField};
use crate::Vec2;

/// Zero-mean solution of `φ_xx + φ_yy = ρ - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSolution {
    coefficients: BTreeMap<(i32, i32), Complex64>,
    field: SpectralField,
    lattice: Lattice,
}

/// Termwise solve `φ_{mn} = -c_{mn} / (4π² Q(m, n))`, `Q` the Gram form.
pub fn poisson_solve(cf: &ConformalFactor, lattice: &Lattice) -> PoissonSolution {
    let gram = lattice.gram_matrix();
    let coefficients: BTreeMap<_, _> = cf
        .coefficients()
        .iter()
        .map(|(&(m, n), &c)| {
            let q = gram.quadratic(m as f64, n as f64);
            ((m, n), -c / (4.0 * PI * PI * q))
        })
        .collect();
    let modes = cf
        .field()
        .modes
        .iter()
        .map(|mode| Mode {
            c: coefficients[&(mode.m, mode.n)],
            ..*mode
        })
        .collect();
    PoissonSolution {
        coefficients,
        field: SpectralField { modes },
        lattice: *lattice,
    }
}

impl PoissonSolution {
    /// Both members of each conjugate pair; `(0, 0)` is never present.
    pub fn coefficients(&self) -> &BTreeMap<(i32, i32), Complex64> {
        &self.coefficients
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn eval(&self, p: Vec2) -> FieldEval {
        self.field.eval(&self.lattice, p)
    }

    pub fn value(&self, p: Vec2) -> f64 {
        self.field.value(&self.lattice, p)
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero()
    }

    /// `∫ (ρ - 1) φ dμ` over the unit-area cell, by Parseval.
    pub fn pairing_with(&self, cf: &ConformalFactor) -> f64 {
        cf.coefficients()
            .iter()
            .map(|(k, c)| (c * self.coefficients[k].conj()).re)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Lattice;

    #[test]
    fn example_metric_solution_is_scaled_density() {
        let l = Lattice::square();
        let cf = ConformalFactor::example();
        let phi = poisson_solve(&cf, &l);
        let expected = -0.125 / (4.0 * PI * PI);
        assert!((phi.coefficients()[&(1, 0)].re - expected).abs() < 1e-17);
        assert!(!phi.coefficients().contains_key(&(0, 0)));
        for p in [Vec2::new(0.1, 0.7), Vec2::new(0.0, 0.25), Vec2::new(0.8, 0.3)] {
            let rho = cf.value(&l, p);
            assert!((phi.value(p) + (rho - 1.0) / (4.0 * PI * PI)).abs() < 1e-16);
        }
    }

    #[test]
    fn flat_metric_gives_zero() {
        let phi = poisson_solve(&ConformalFactor::flat(), &Lattice::square());
        assert!(phi.is_zero());
        assert_eq!(phi.value(Vec2::new(0.3, 0.2)), 0.0);
    }

    #[test]
    fn laplacian_residual_on_grid() {
        let l = Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.3, 1.0), false).unwrap();
        let cf = ConformalFactor::new([
            ((1, 0), Complex64::new(0.05, 0.02)),
            ((1, 2), Complex64::new(-0.03, 0.01)),
            ((0, 3), Complex64::new(0.0, 0.04)),
        ])
        .unwrap();
        let phi = poisson_solve(&cf, &l);
        let mut worst: f64 = 0.0;
        for i in 0..32 {
            for j in 0..32 {
                let p = l.from_fractional(Vec2::new(i as f64 / 32.0, j as f64 / 32.0));
                let e = phi.eval(p);
                let rho = cf.value(&l, p);
                worst = worst.max((e.hess.trace() - (rho - 1.0)).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn pairing_is_negative_definite() {
        let cf = ConformalFactor::example();
        let phi = poisson_solve(&cf, &Lattice::square());
        // Σ |c|² / (4π² Q) over the four nonzero modes
        let expected = -4.0 * (0.125f64).powi(2) / (4.0 * PI * PI);
        assert!((phi.pairing_with(&cf) - expected).abs() < 1e-17);
    }
}
