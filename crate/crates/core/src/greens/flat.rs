//! Zero-mean Green function of the flat unit-area torus,
//! `G(r) = Σ_{k≠0} e^{i k·r} / |k|²` with `k` running over the dual lattice.
//!
//! The production path splits `1/k² = e^{-k²/4a²}/k² + (1 - e^{-k²/4a²})/k²`
//! and sums the second piece in real space, where it becomes
//! `(1/4π) E1(a²|r + L|²)`. The logarithmic singularity sits in the `L = 0`
//! real-space term, so both sums converge like Gaussians. Image pairs
//! `±L` and wave-vector pairs `±k` are summed together, which makes the
//! computed gradient exactly odd in `r`.
//!
//! [`green_flat_spectral`] is an independent route: the double Fourier sum
//! with the inner index summed in closed form (Poisson summation of a
//! Lorentzian), leaving an exponentially convergent single sum.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{GreenEval, GreenMethod};
use crate::error::{Error, Result};
use crate::special::{exp_e1, EULER_GAMMA};
use crate::surface::Lattice;
use crate::Vec2;

/// Points closer than this (toroidal distance) are treated as coincident.
pub const COINCIDENCE_DISTANCE: f64 = 1e-9;

/// Gaussian tail cut: terms below `e^{-CUTOFF_EXPONENT}` are dropped.
const CUTOFF_EXPONENT: f64 = 40.0;

/// Precomputed Ewald tables for one lattice. Cheap to share across threads.
#[derive(Debug, Clone)]
pub struct FlatGreen {
    lattice: Lattice,
    reduced_a: Vec2,
    reduced_b: Vec2,
    splitting: f64,
    /// One representative per `±k` pair with weight `e^{-k²/4a²}/k²`.
    waves: Vec<(Vec2, f64)>,
    /// One representative per `±L` pair (the origin excluded).
    images: Vec<Vec2>,
    robin_constant: f64,
}

fn gauss_reduce(mut a: Vec2, mut b: Vec2) -> (Vec2, Vec2) {
    loop {
        if b.norm_squared() < a.norm_squared() {
            std::mem::swap(&mut a, &mut b);
        }
        let mu = a.dot(&b) / a.norm_squared();
        if mu.abs() <= 0.5 {
            break;
        }
        b -= a * mu.round();
    }
    if a.x * b.y - a.y * b.x < 0.0 {
        b = -b;
    }
    (a, b)
}

impl FlatGreen {
    pub fn new(lattice: &Lattice) -> Self {
        let (ra, rb) = gauss_reduce(lattice.a(), lattice.b());
        // unit area: a = sqrt(π) balances the two sums
        let splitting = PI.sqrt();
        let s2 = splitting * splitting;

        let r_cut = (CUTOFF_EXPONENT / s2).sqrt();
        let r_max = 0.5 * (ra.norm() + rb.norm());
        let reach = r_cut + r_max;
        let span = |v: Vec2, w: Vec2| {
            // |i| bound from the distance of i·v to the line spanned by w
            let area = (v.x * w.y - v.y * w.x).abs();
            (reach * w.norm() / area).ceil() as i64 + 1
        };
        let (ni, nj) = (span(ra, rb), span(rb, ra));
        let mut images = Vec::new();
        for i in 0..=ni {
            for j in -nj..=nj {
                if i == 0 && j <= 0 {
                    continue;
                }
                let l = ra * i as f64 + rb * j as f64;
                if l.norm() <= reach {
                    images.push(l);
                }
            }
        }

        // dual lattice generators: k = 2π(m α + n β)
        let (ga, gb) = {
            let red = Lattice::new(ra, rb, false).expect("reduced basis keeps unit det");
            (red.alpha() * (2.0 * PI), red.beta() * (2.0 * PI))
        };
        let k_cut = 2.0 * splitting * CUTOFF_EXPONENT.sqrt();
        let (nm, nn) = {
            let area = (ga.x * gb.y - ga.y * gb.x).abs();
            (
                (k_cut * gb.norm() / area).ceil() as i64 + 1,
                (k_cut * ga.norm() / area).ceil() as i64 + 1,
            )
        };
        let mut waves = Vec::new();
        for m in 0..=nm {
            for n in -nn..=nn {
                if m == 0 && n <= 0 {
                    continue;
                }
                let k = ga * m as f64 + gb * n as f64;
                let k2 = k.norm_squared();
                if k2.sqrt() <= k_cut {
                    waves.push((k, (-k2 / (4.0 * s2)).exp() / k2));
                }
            }
        }

        let mut green = Self {
            lattice: *lattice,
            reduced_a: ra,
            reduced_b: rb,
            splitting,
            waves,
            images,
            robin_constant: 0.0,
        };
        green.robin_constant = green.regular_part_at_origin();
        green
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// `lim_{r→0} [G(r) + (1/2π) log |r|]`, the (constant) Robin function
    /// of the flat torus.
    pub fn robin_constant(&self) -> f64 {
        self.robin_constant
    }

    fn regular_part_at_origin(&self) -> f64 {
        let s2 = self.splitting * self.splitting;
        let waves: f64 = self.waves.iter().map(|&(_, w)| 2.0 * w).sum();
        let images: f64 = self
            .images
            .iter()
            .map(|l| 2.0 * exp_e1(s2 * l.norm_squared()))
            .sum::<f64>()
            / (4.0 * PI);
        // lim (1/4π) E1(a² r²) + (1/2π) log r = -(γ + log a²) / 4π
        waves + images - 1.0 / (4.0 * s2) - (EULER_GAMMA + s2.ln()) / (4.0 * PI)
    }

    /// Displacement reduced against the reduced basis; odd in `d`.
    fn reduce(&self, d: Vec2) -> Vec2 {
        let (a, b) = (self.reduced_a, self.reduced_b);
        let fa = b.y * d.x - b.x * d.y;
        let fb = -a.y * d.x + a.x * d.y;
        d - a * fa.round() - b * fb.round()
    }

    fn check_separation(&self, r: Vec2) -> Result<()> {
        let mut best = r.norm();
        for l in &self.images {
            if l.norm() > 2.0 {
                continue;
            }
            best = best.min((r + l).norm()).min((r - l).norm());
        }
        if best < COINCIDENCE_DISTANCE {
            return Err(Error::CoincidentPoints { distance: best });
        }
        Ok(())
    }

    /// Gradient of `G(z - w)` with respect to `z` (first slot).
    pub fn grad(&self, d: Vec2) -> Result<Vec2> {
        let r = self.reduce(d);
        self.check_separation(r)?;
        Ok(self.grad_reduced(r))
    }

    fn grad_reduced(&self, r: Vec2) -> Vec2 {
        let s2 = self.splitting * self.splitting;
        let mut g = Vec2::zeros();
        for &(k, w) in &self.waves {
            g -= k * (2.0 * w * k.dot(&r).sin());
        }
        let real = |v: Vec2| {
            let v2 = v.norm_squared();
            v * ((-s2 * v2).exp() / v2)
        };
        let mut images = Vec2::zeros();
        for l in &self.images {
            images += real(r + l) + real(r - l);
        }
        g - (real(r) + images) / (2.0 * PI)
    }

    /// Value and gradient of `G(z - w)`, with a rounding/truncation error
    /// estimate.
    pub fn eval_with_error(&self, d: Vec2) -> Result<(f64, Vec2, f64)> {
        let r = self.reduce(d);
        self.check_separation(r)?;
        let s2 = self.splitting * self.splitting;
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for &(k, w) in &self.waves {
            let t = 2.0 * w * k.dot(&r).cos();
            value += t;
            magnitude += t.abs();
        }
        let mut real = exp_e1(s2 * r.norm_squared());
        let mut real_mag = real.abs();
        for l in &self.images {
            let t = exp_e1(s2 * (r + l).norm_squared()) + exp_e1(s2 * (r - l).norm_squared());
            real += t;
            real_mag += t;
        }
        let constant = 1.0 / (4.0 * s2);
        value += real / (4.0 * PI) - constant;
        magnitude += real_mag / (4.0 * PI) + constant;
        let tail = 2.0 * (-CUTOFF_EXPONENT).exp() * (self.waves.len() + self.images.len()) as f64;
        let err = 8.0 * f64::EPSILON * magnitude + tail;
        Ok((value, self.grad_reduced(r), err))
    }

    pub fn value(&self, d: Vec2) -> Result<f64> {
        Ok(self.eval_with_error(d)?.0)
    }

    /// `G(z - w)` with gradient in `z`; fails if the error estimate exceeds
    /// `tol`.
    pub fn eval(&self, z: Vec2, w: Vec2, tol: f64) -> Result<GreenEval> {
        let (value, grad, err) = self.eval_with_error(z - w)?;
        if err > tol {
            return Err(Error::ToleranceNotReached { tol });
        }
        Ok(GreenEval {
            value,
            grad_first_slot: grad,
            method: GreenMethod::Accelerated,
        })
    }
}

/// `green_flat` entry point. Builds the lattice tables on every call; hold a
/// [`FlatGreen`] for repeated evaluation.
pub fn green_flat(lattice: &Lattice, z: Vec2, w: Vec2, tol: f64) -> Result<GreenEval> {
    FlatGreen::new(lattice).eval(z, w, tol)
}

/// Row-summed spectral evaluation of `G(z - w)`.
///
/// Writes the quadratic form as `A p² + 2B p q + C q²` (`AC - B² = 1`),
/// sums over `p` in closed form for each `q`, and picks the orientation
/// in which the rows decay fastest.
pub fn green_flat_spectral(lattice: &Lattice, z: Vec2, w: Vec2) -> Result<GreenEval> {
    let d = z - w;
    if lattice.toroidal_distance(z, w) < COINCIDENCE_DISTANCE {
        return Err(Error::CoincidentPoints {
            distance: lattice.toroidal_distance(z, w),
        });
    }
    let f = lattice.to_fractional(d);
    let u = f.x - f.x.floor();
    let v = f.y - f.y.floor();
    let m = lattice.gram_matrix().0;
    let dist = |x: f64| x.min(1.0 - x);
    let (value, d_alpha, d_beta) = if dist(u) >= dist(v) {
        let (val, ds, dt) = row_sum(u, v, m[(0, 0)], m[(0, 1)]);
        (val, ds, dt)
    } else {
        let (val, ds, dt) = row_sum(v, u, m[(1, 1)], m[(0, 1)]);
        (val, dt, ds)
    };
    let grad = lattice.alpha() * d_alpha + lattice.beta() * d_beta;
    Ok(GreenEval {
        value,
        grad_first_slot: grad,
        method: GreenMethod::SpectralSum,
    })
}

/// `Σ_{(p,q)≠0} e^{2πi(p s + q t)} / (4π² (A p² + 2B p q + C q²))` and its
/// partials in `s`, `t`, for `s ∈ [0, 1)`. `C` is implied by `AC - B² = 1`.
fn row_sum(s: f64, t: f64, a: f64, b: f64) -> (f64, f64, f64) {
    let tp = 2.0 * PI;
    // q = 0 row: Σ_{p≠0} e^{2πips}/(4π² A p²) = B2(s) / (2A)
    let mut value = (s * s - s + 1.0 / 6.0) / (2.0 * a);
    let mut ds = (2.0 * s - 1.0) / (2.0 * a);
    let mut dt = 0.0;
    let scale = 1.0 / (4.0 * PI * PI * a);
    let mut q: i64 = 1;
    loop {
        let mut row_mag = 0.0;
        for sign in [1.0, -1.0] {
            let qf = sign * q as f64;
            // A p² + 2B p q + C q² = A[(p + δ)² + κ²], δ = Bq/A, κ = |q|/A
            let delta = b * qf / a;
            let kappa = qf.abs() / a;
            let lower = Complex64::new(-tp * kappa, -tp * delta);
            let upper = Complex64::new(tp * kappa, -tp * delta);
            let z1 = Complex64::new(-tp * kappa, -tp * delta).exp();
            let z2 = Complex64::new(-tp * kappa, tp * delta).exp();
            let e1 = (lower * s).exp() / (1.0 - z1);
            // e^{upper·s} z2, folded so that large κ cannot overflow
            let e2 = Complex64::new(tp * kappa * (s - 1.0), tp * delta * (1.0 - s)).exp() / (1.0 - z2);
            let lorentz = PI / kappa;
            let phase = Complex64::new(0.0, tp * qf * t).exp();
            let row = phase * (e1 + e2) * (lorentz * scale);
            let row_ds = phase * (e1 * lower + e2 * upper) * (lorentz * scale);
            let row_dt = row * Complex64::new(0.0, tp * qf);
            value += row.re;
            ds += row_ds.re;
            dt += row_dt.re;
            row_mag += row.norm() + row_ds.norm();
        }
        if row_mag < 1e-18 || q > 100_000 {
            break;
        }
        q += 1;
    }
    (value, ds, dt)
}
