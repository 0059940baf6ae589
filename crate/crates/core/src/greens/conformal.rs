use super::flat::FlatGreen;
use super::robin::RobinField;
use super::{GreenEval, GreenMethod};
use crate::error::Result;
use crate::surface::{ConformalFactor, Lattice};
use crate::Vec2;

/// Green function of `ρ |dz|²`, zero-mean with respect to `ρ dμ`:
/// `G_ρ(z, w) = G_flat(z - w) + φ(z) + φ(w) - ∫(ρ - 1) φ dμ`.
#[derive(Debug, Clone)]
pub struct ConformalGreen {
    flat: FlatGreen,
    robin: RobinField,
    offset: f64,
}

impl ConformalGreen {
    pub fn new(cf: &ConformalFactor, lattice: &Lattice) -> Self {
        let robin = RobinField::new(cf, lattice);
        let offset = -robin.phi().pairing_with(cf);
        Self {
            flat: FlatGreen::new(lattice),
            robin,
            offset,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        self.robin.lattice()
    }

    pub fn factor(&self) -> &ConformalFactor {
        self.robin.factor()
    }

    pub fn flat(&self) -> &FlatGreen {
        &self.flat
    }

    pub fn robin(&self) -> &RobinField {
        &self.robin
    }

    pub fn robin_mut(&mut self) -> &mut RobinField {
        &mut self.robin
    }

    /// Constant term `-∫(ρ - 1) φ dμ`.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn eval(&self, z: Vec2, w: Vec2) -> Result<GreenEval> {
        let (value, grad, _) = self.flat.eval_with_error(z - w)?;
        let phi = self.robin.phi();
        if phi.is_zero() {
            return Ok(GreenEval {
                value,
                grad_first_slot: grad,
                method: GreenMethod::Accelerated,
            });
        }
        let pz = phi.eval(z);
        Ok(GreenEval {
            value: value + pz.value + phi.value(w) + self.offset,
            grad_first_slot: grad + pz.grad,
            method: GreenMethod::Accelerated,
        })
    }

    pub fn value(&self, z: Vec2, w: Vec2) -> Result<f64> {
        Ok(self.eval(z, w)?.value)
    }

    /// Gradient in `z` of `G_ρ(z, w)`, skipping the value.
    pub fn grad_first(&self, z: Vec2, w: Vec2) -> Result<Vec2> {
        let g = self.flat.grad(z - w)?;
        let phi = self.robin.phi();
        if phi.is_zero() {
            return Ok(g);
        }
        Ok(g + phi.eval(z).grad)
    }
}

/// `green_conformal` entry point. Rebuilds tables per call; hold a
/// [`ConformalGreen`] for repeated use.
pub fn green_conformal(cf: &ConformalFactor, lattice: &Lattice, z: Vec2, w: Vec2) -> Result<GreenEval> {
    ConformalGreen::new(cf, lattice).eval(z, w)
}

/// Terms added to the flat vortex Hamiltonian under the conformal change:
/// `Σ (Γ_j²/8π) log ρ(s_j) + Γ Σ Γ_j φ(s_j)` with `Γ = Σ Γ_j`.
pub fn conformal_hamiltonian_terms(
    cf: &ConformalFactor,
    lattice: &Lattice,
    positions: &[Vec2],
    strengths: &[f64],
) -> Result<f64> {
    let phi = super::poisson::poisson_solve(cf, lattice);
    let total: f64 = strengths.iter().sum();
    let mut local = 0.0;
    let mut nonlocal = 0.0;
    for (p, &g) in positions.iter().zip(strengths) {
        let rho = cf.eval(lattice, *p)?.value;
        local += g * g * rho.ln() / (8.0 * std::f64::consts::PI);
        nonlocal += g * phi.value(*p);
    }
    if total == 0.0 {
        return Ok(local);
    }
    Ok(local + total * nonlocal)
}
