//! Harmonic one-forms recovered from the Green function.
//!
//! For a closed cycle `γ`, `U_γ(s) = ∮_γ ⋆_r d_r G(r, s)` is harmonic off
//! `γ`, jumps by one across it, and `dU_γ` is the harmonic form dual to
//! `γ`: `β` for the `a`-cycle and `-α` for the `b`-cycle.

use serde::{Deserialize, Serialize};

use super::flat::FlatGreen;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussLegendre};
use crate::surface::Lattice;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cycle {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HatTrickReport {
    /// Max over base points of `|dU_γ - (dual form)|`.
    pub max_residual: f64,
    /// `U_γ(right) - U_γ(left)` extrapolated to the cycle.
    pub jump: f64,
}

const MIN_CLEARANCE: f64 = 1e-6;
const FD_STEP: f64 = 1e-4;
const JUMP_OFFSET: f64 = 1e-3;

struct CycleIntegral<'a> {
    green: &'a FlatGreen,
    direction: Vec2,
    normal: Vec2,
    rule: GaussLegendre,
}

impl CycleIntegral<'_> {
    /// `U_γ(s)` along the straight representative `t ↦ t·v`.
    fn value(&self, s: Vec2) -> Result<f64> {
        let v = self.direction;
        // the cycle's images are the level sets {form = integer}
        let level = self.normal.dot(&s);
        let off = (level - level.round()).abs() / self.normal.norm();
        if off < MIN_CLEARANCE {
            return Err(Error::QuadratureFailure(format!(
                "cycle passes within {off:e} of the base point"
            )));
        }
        let mut failure = None;
        let value = adaptive(&self.rule, 0.0, 1.0, 1e-13, 50, |t| {
            match self.green.grad(v * t - s) {
                Ok(g) => -g.y * v.x + g.x * v.y,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        })?;
        match failure {
            Some(e) => Err(Error::QuadratureFailure(e.to_string())),
            None => Ok(value),
        }
    }

    fn differential(&self, s: Vec2) -> Result<Vec2> {
        let h = FD_STEP;
        let dx = Vec2::new(h, 0.0);
        let dy = Vec2::new(0.0, h);
        Ok(Vec2::new(
            (self.value(s + dx)? - self.value(s - dx)?) / (2.0 * h),
            (self.value(s + dy)? - self.value(s - dy)?) / (2.0 * h),
        ))
    }
}

/// Compares `dU_γ` with its expected harmonic form at each base point and
/// measures the jump of `U_γ` across the cycle at a fixed point on it.
pub fn hat_trick_check(lattice: &Lattice, cycle: Cycle, base_points: &[Vec2]) -> Result<HatTrickReport> {
    let green = FlatGreen::new(lattice);
    let (direction, expected) = match cycle {
        Cycle::A => (lattice.a(), lattice.beta()),
        Cycle::B => (lattice.b(), -lattice.alpha()),
    };
    let integral = CycleIntegral {
        green: &green,
        direction,
        normal: expected,
        rule: GaussLegendre::new(16),
    };
    let mut max_residual: f64 = 0.0;
    for &s in base_points {
        let du = integral.differential(s)?;
        max_residual = max_residual.max((du - expected).norm());
    }

    let on_cycle = direction * 0.37;
    let left = Vec2::new(-direction.y, direction.x) / direction.norm();
    let jump_at = |d: f64| -> Result<f64> {
        Ok(integral.value(on_cycle - left * d)? - integral.value(on_cycle + left * d)?)
    };
    // J(δ) = 1 + c δ + O(δ³)
    let jump = 2.0 * jump_at(JUMP_OFFSET)? - jump_at(2.0 * JUMP_OFFSET)?;
    Ok(HatTrickReport { max_residual, jump })
}
