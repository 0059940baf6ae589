use std::f64::consts::PI;

use num_complex::Complex64;

use super::{grad_of_real_part, to_vec};
use crate::error::{Error, Result};
use crate::greens::{GreenEval, GreenMethod, COINCIDENCE_DISTANCE};

/// Additive constant making the double-disk Green function mean-zero.
pub const DOUBLE_DISK_CONSTANT: f64 = -1.5;

fn check_distinct(z: Complex64, w: Complex64) -> Result<()> {
    let d = (z - w).norm();
    if d < COINCIDENCE_DISTANCE {
        return Err(Error::CoincidentPoints { distance: d });
    }
    Ok(())
}

fn check_in_disk(z: Complex64) -> Result<()> {
    if !(z.norm() <= 1.0) {
        return Err(Error::OutsideDomain { x: z.re, y: z.im });
    }
    Ok(())
}

/// Dirichlet Green function of the unit disk,
/// `-(1/2π) log |(z - w)/(1 - z w̄)|`.
pub fn green_electro_disk(z: Complex64, w: Complex64) -> Result<GreenEval> {
    check_in_disk(z)?;
    check_in_disk(w)?;
    check_distinct(z, w)?;
    let one = Complex64::new(1.0, 0.0);
    let den = one - z * w.conj();
    let value = -((z - w).norm().ln() - den.norm().ln()) / (2.0 * PI);
    let h_prime = one / (z - w) + w.conj() / den;
    Ok(GreenEval {
        value,
        grad_first_slot: -grad_of_real_part(h_prime) / (2.0 * PI),
        method: GreenMethod::ClosedForm,
    })
}

/// Green function of the Schottky double of the unit disk (two flat disks
/// glued along the circle; the back face is parameterized by `|z| > 1`
/// with metric `|dz|/|z|²`). Values and first derivatives are continuous
/// across `|z| = 1`.
pub fn green_double_disk(z: Complex64, w: Complex64) -> Result<GreenEval> {
    check_distinct(z, w)?;
    let (az, aw) = (z.norm(), w.norm());
    let face = |a: f64| if a <= 1.0 { a * a } else { a.powi(-2) + 4.0 * a.ln() };
    let value = (-4.0 * (z - w).norm().ln() + face(az) + face(aw) + DOUBLE_DISK_CONSTANT) / (8.0 * PI);
    // ∇|z|² = 2z; ∇(|z|⁻² + 4 log|z|) = (4/|z|² - 2/|z|⁴) z
    let face_grad = if az <= 1.0 { z * 2.0 } else { z * (4.0 / (az * az) - 2.0 / az.powi(4)) };
    let log_grad = -4.0 * grad_of_real_part(Complex64::new(1.0, 0.0) / (z - w));
    Ok(GreenEval {
        value,
        grad_first_slot: (log_grad + to_vec(face_grad)) / (8.0 * PI),
        method: GreenMethod::ClosedForm,
    })
}

/// Residual of `G_electro(z, w) = G_double(z, w) - G_double(z, 1/w̄)`.
pub fn electro_from_double_check(z: Complex64, w: Complex64) -> Result<f64> {
    if z.norm() >= 1.0 || w.norm() >= 1.0 {
        let p = if z.norm() >= 1.0 { z } else { w };
        return Err(Error::OutsideDomain { x: p.re, y: p.im });
    }
    let electro = green_electro_disk(z, w)?.value;
    if w.norm() == 0.0 {
        // the image is the point at infinity of the back face, where
        // G_double(z, ·) → (|z|² + c)/8π
        let at_infinity = (z.norm_sqr() + DOUBLE_DISK_CONSTANT) / (8.0 * PI);
        return Ok(electro - (green_double_disk(z, w)?.value - at_infinity));
    }
    let image = Complex64::new(1.0, 0.0) / w.conj();
    let double = green_double_disk(z, w)?.value - green_double_disk(z, image)?.value;
    Ok(electro - double)
}

/// Green function of the round unit-area-normalized sphere in stereographic
/// coordinates, `-(1/4π)(log(|z-w|² / ((1+|z|²)(1+|w|²))) + 1)`. A point
/// with an infinite component stands for the north pole.
pub fn green_sphere(z: Complex64, w: Complex64) -> Result<GreenEval> {
    let inf = |p: Complex64| p.re.is_infinite() || p.im.is_infinite();
    let chordal_sq = match (inf(z), inf(w)) {
        (true, true) => 0.0,
        (true, false) => 1.0 / (1.0 + w.norm_sqr()),
        (false, true) => 1.0 / (1.0 + z.norm_sqr()),
        (false, false) => (z - w).norm_sqr() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())),
    };
    if chordal_sq < COINCIDENCE_DISTANCE * COINCIDENCE_DISTANCE {
        return Err(Error::CoincidentPoints {
            distance: chordal_sq.sqrt(),
        });
    }
    let value = -(chordal_sq.ln() + 1.0) / (4.0 * PI);
    let grad = if inf(z) {
        // no finite chart at the pole
        crate::Vec2::zeros()
    } else {
        let mut g = z * (-2.0 / (1.0 + z.norm_sqr()));
        if !inf(w) {
            g += (z - w) * (2.0 / (z - w).norm_sqr());
        }
        -to_vec(g) / (4.0 * PI)
    };
    Ok(GreenEval {
        value,
        grad_first_slot: grad,
        method: GreenMethod::ClosedForm,
    })
}
