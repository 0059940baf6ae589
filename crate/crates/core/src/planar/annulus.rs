//! The annulus `r < |z| < R`.
//!
//! The Dirichlet Green function is built from the product
//! `P(x) = (1 - x) Π_{k≥1} (1 - q^k x)(1 - q^k / x)`, `q = (r/R)²`, which
//! sums the images generated by reflection in both circles. With
//! `ζ = z/R`, `α = w/R`, `ρ₀ = r/R`:
//!
//! ```text
//! G(z, w) = -(1/2π) [ log|P(ζ/α)| - log|P(ζ ᾱ)| + log|α| - log|α| log|ζ| / log ρ₀ ]
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{grad_of_real_part, to_vec};
use crate::error::{Error, Result};
use crate::greens::{GreenEval, GreenMethod, COINCIDENCE_DISTANCE};
use crate::Vec2;

const MAX_FACTORS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusDomain {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
}

/// Capacity (period) matrix and its inverse; `g = 1`, so both are scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityData {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
}

/// `(log|P(x)|, P'(x)/P(x))`.
fn prime(x: Complex64, q: f64, tol: f64) -> Result<(f64, Complex64)> {
    let one = Complex64::new(1.0, 0.0);
    let mut log_abs = (one - x).norm().ln();
    let mut dlog = -one / (one - x);
    let reach = x.norm().max(1.0 / x.norm());
    let mut qk = q;
    for _ in 0..MAX_FACTORS {
        if qk * reach < tol * 1e-3 {
            return Ok((log_abs, dlog));
        }
        let a = one - x * qk;
        let b = one - qk / x;
        log_abs += a.norm().ln() + b.norm().ln();
        dlog += -qk / a + (qk / (x * x)) / b;
        qk *= q;
    }
    Err(Error::SeriesNotConverged { terms: MAX_FACTORS })
}

impl AnnulusDomain {
    pub fn new(r: f64, big_r: f64) -> Result<Self> {
        if !(r > 0.0 && big_r > r && big_r.is_finite()) {
            return Err(Error::InvalidInput(format!("annulus needs 0 < r < R, got r = {r}, R = {big_r}")));
        }
        Ok(Self { r, big_r })
    }

    /// `log(R/r)`.
    pub fn modulus(&self) -> f64 {
        (self.big_r / self.r).ln()
    }

    fn ratio(&self) -> f64 {
        self.r / self.big_r
    }

    fn check(&self, z: Complex64) -> Result<()> {
        let a = z.norm();
        let slack = 1e-12 * self.big_r;
        if !(a >= self.r - slack && a <= self.big_r + slack) {
            return Err(Error::OutsideDomain { x: z.re, y: z.im });
        }
        Ok(())
    }

    /// Harmonic measure of the inner circle, `u = log(R/|z|) / log(R/r)`.
    pub fn harmonic_measure(&self, z: Complex64) -> Result<(f64, Vec2)> {
        self.check(z)?;
        let l = self.modulus();
        let u = (self.big_r / z.norm()).ln() / l;
        Ok((u, -to_vec(z) / (z.norm_sqr() * l)))
    }

    pub fn capacity(&self) -> CapacityData {
        let l = self.modulus();
        CapacityData { p: PI / l, q: l / PI }
    }

    pub fn green_electro(&self, z: Complex64, w: Complex64, tol: f64) -> Result<GreenEval> {
        self.check(z)?;
        self.check(w)?;
        let d = (z - w).norm();
        if d < COINCIDENCE_DISTANCE {
            return Err(Error::CoincidentPoints { distance: d });
        }
        let q = self.ratio().powi(2);
        let log_rho0 = self.ratio().ln();
        let zeta = z / self.big_r;
        let alpha = w / self.big_r;
        let (la, da) = prime(zeta / alpha, q, tol)?;
        let (lb, db) = prime(zeta * alpha.conj(), q, tol)?;
        let log_alpha = alpha.norm().ln();
        let log_zeta = zeta.norm().ln();
        let value = -(la - lb + log_alpha - log_alpha * log_zeta / log_rho0) / (2.0 * PI);
        let h_prime = da / alpha - db * alpha.conj();
        let grad_zeta = grad_of_real_part(h_prime) - grad_of_real_part(Complex64::new(1.0, 0.0) / zeta) * (log_alpha / log_rho0);
        Ok(GreenEval {
            value,
            grad_first_slot: -grad_zeta / (2.0 * PI * self.big_r),
            method: GreenMethod::ImageSeries,
        })
    }

    /// Robin function `lim_{z→w} G(z, w) + (1/2π) log|z - w|` and its
    /// gradient. Depends on `|w|` only.
    pub fn robin_electro(&self, w: Complex64, tol: f64) -> Result<(f64, Vec2)> {
        self.check(w)?;
        let q = self.ratio().powi(2);
        let log_rho0 = self.ratio().ln();
        let t = w.norm() / self.big_r;
        let mut series = 0.0;
        let mut qk = q;
        while qk > tol * 1e-3 {
            series += (1.0 - qk).ln();
            qk *= q;
        }
        let (lp, dp) = prime(Complex64::new(t * t, 0.0), q, tol)?;
        let lt = t.ln();
        let value = -(2.0 * series - self.big_r.ln() - lp - lt * lt / log_rho0) / (2.0 * PI);
        let dt = -(-2.0 * t * dp.re - 2.0 * lt / (t * log_rho0)) / (2.0 * PI);
        Ok((value, to_vec(w) * (dt / (w.norm() * self.big_r))))
    }

    /// `G_electro + (1/2) Q U(z) U(w)` with `U = u - p`.
    pub fn green_hydro(&self, z: Complex64, w: Complex64, p: f64, tol: f64) -> Result<GreenEval> {
        let e = self.green_electro(z, w, tol)?;
        let q = self.capacity().q;
        let (uz, duz) = self.harmonic_measure(z)?;
        let (uw, _) = self.harmonic_measure(w)?;
        Ok(GreenEval {
            value: e.value + 0.5 * q * (uz - p) * (uw - p),
            grad_first_slot: e.grad_first_slot + duz * (0.5 * q * (uw - p)),
            method: GreenMethod::ImageSeries,
        })
    }
}

pub fn harmonic_measure_annulus(dom: &AnnulusDomain, z: Complex64) -> Result<(f64, Vec2)> {
    dom.harmonic_measure(z)
}

pub fn capacity_annulus(dom: &AnnulusDomain) -> CapacityData {
    dom.capacity()
}

pub fn green_electro_annulus(dom: &AnnulusDomain, z: Complex64, w: Complex64, tol: f64) -> Result<GreenEval> {
    dom.green_electro(z, w, tol)
}

pub fn green_hydro(dom: &AnnulusDomain, z: Complex64, w: Complex64, p: f64, tol: f64) -> Result<GreenEval> {
    dom.green_hydro(z, w, p, tol)
}
