use std::f64::consts::PI;

use nalgebra::Matrix2;

use super::poisson::{poisson_solve, PoissonSolution};
use crate::error::Result;
use crate::surface::{ConformalFactor, FieldEval, Lattice};
use crate::Vec2;

/// Robin function `R = (1/4π) log ρ + 2φ + constant` of a conformally flat
/// torus. Only differences of `R` enter the dynamics, so `constant` is a
/// convention.
#[derive(Debug, Clone, PartialEq)]
pub struct RobinField {
    lattice: Lattice,
    factor: ConformalFactor,
    phi: PoissonSolution,
    pub constant: f64,
}

impl RobinField {
    pub fn new(cf: &ConformalFactor, lattice: &Lattice) -> Self {
        Self {
            lattice: *lattice,
            factor: cf.clone(),
            phi: poisson_solve(cf, lattice),
            constant: 0.0,
        }
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn factor(&self) -> &ConformalFactor {
        &self.factor
    }

    pub fn phi(&self) -> &PoissonSolution {
        &self.phi
    }

    /// `R`, `∇R` and the Hessian of `R`.
    pub fn eval(&self, p: Vec2) -> Result<FieldEval> {
        let rho = self.factor.eval(&self.lattice, p)?;
        let phi = self.phi.eval(p);
        let inv = 1.0 / rho.value;
        let g = rho.grad;
        let hess = (rho.hess * inv - g * g.transpose() * (inv * inv)) / (4.0 * PI)
            + phi.hess * 2.0;
        Ok(FieldEval {
            value: rho.value.ln() / (4.0 * PI) + 2.0 * phi.value + self.constant,
            grad: g * (inv / (4.0 * PI)) + phi.grad * 2.0,
            hess,
        })
    }

    pub fn value(&self, p: Vec2) -> Result<f64> {
        Ok(self.eval(p)?.value)
    }

    pub fn grad(&self, p: Vec2) -> Result<Vec2> {
        Ok(self.eval(p)?.grad)
    }

    pub fn hessian(&self, p: Vec2) -> Result<Matrix2<f64>> {
        Ok(self.eval(p)?.hess)
    }
}

/// `robin` entry point: `(R, ∇R)` at `(x, y)`.
pub fn robin(rf: &RobinField, x: f64, y: f64) -> Result<(f64, Vec2)> {
    let e = rf.eval(Vec2::new(x, y))?;
    Ok((e.value, e.grad))
}
