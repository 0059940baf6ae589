//! Torus geometry: lattice generators, spectral conformal factor, harmonic
//! one-form basis and the period (Riemann-relation) data derived from them.
//!
//! Points are Cartesian `(x, y)` in the plane covering the torus. The
//! fractional ("lattice") coordinates of a point are `(α(p), β(p))`, where
//! `α, β` are the harmonic basis forms dual to the generators; the
//! fundamental cell is `[0, 1)²` in those coordinates.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec2;

/// Side of the sample grid used by the positivity guard on `ρ`.
pub const POSITIVITY_GRID: usize = 128;

/// Unit-area lattice `a Z + b Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    a: Vec2,
    b: Vec2,
}

impl Lattice {
    /// Builds a lattice with `a_x b_y - a_y b_x = 1`.
    ///
    /// With `rescale` both generators are multiplied by `det^{-1/2}`;
    /// otherwise the determinant must already be 1 within 1e-12. Negative
    /// orientation is rejected through the same checks.
    pub fn new(a: Vec2, b: Vec2, rescale: bool) -> Result<Self> {
        let det = a.x * b.y - a.y * b.x;
        if !det.is_finite() || det.abs() < 1e-14 || a.norm() == 0.0 || b.norm() == 0.0 {
            return Err(Error::DegenerateLattice { det });
        }
        if rescale {
            if det < 0.0 {
                return Err(Error::InvalidInput(
                    "generators are negatively oriented; swap a and b".into(),
                ));
            }
            let s = det.powf(-0.5);
            let lattice = Self { a: a * s, b: b * s };
            let det = lattice.det();
            if (det - 1.0).abs() > 1e-12 {
                return Err(Error::DetNotOne { det });
            }
            Ok(lattice)
        } else {
            if (det - 1.0).abs() > 1e-12 {
                return Err(Error::DetNotOne { det });
            }
            Ok(Self { a, b })
        }
    }

    pub fn square() -> Self {
        Self {
            a: Vec2::new(1.0, 0.0),
            b: Vec2::new(0.0, 1.0),
        }
    }

    pub fn a(&self) -> Vec2 {
        self.a
    }

    pub fn b(&self) -> Vec2 {
        self.b
    }

    pub fn det(&self) -> f64 {
        self.a.x * self.b.y - self.a.y * self.b.x
    }

    /// Gradient (covector components) of the fractional coordinate `α`.
    pub fn alpha(&self) -> Vec2 {
        Vec2::new(self.b.y, -self.b.x)
    }

    /// Gradient (covector components) of the fractional coordinate `β`.
    pub fn beta(&self) -> Vec2 {
        Vec2::new(-self.a.y, self.a.x)
    }

    pub fn to_fractional(&self, p: Vec2) -> Vec2 {
        Vec2::new(self.alpha().dot(&p), self.beta().dot(&p))
    }

    pub fn from_fractional(&self, f: Vec2) -> Vec2 {
        self.a * f.x + self.b * f.y
    }

    /// Representative of `p` in the fundamental cell `[0,1)²` (fractional).
    pub fn wrap(&self, p: Vec2) -> Vec2 {
        let f = self.to_fractional(p);
        let g = Vec2::new(f.x - f.x.floor(), f.y - f.y.floor());
        // floor can return 1.0 for tiny negative inputs
        let g = Vec2::new(
            if g.x >= 1.0 { 0.0 } else { g.x },
            if g.y >= 1.0 { 0.0 } else { g.y },
        );
        self.from_fractional(g)
    }

    /// Integer lattice coordinates `(i, j)` with `p - wrap(p) = i a + j b`.
    pub fn cell_index(&self, p: Vec2) -> (i64, i64) {
        let f = self.to_fractional(p);
        (f.x.floor() as i64, f.y.floor() as i64)
    }

    /// Representative of `d` with fractional coordinates in `[-1/2, 1/2)`.
    ///
    /// Odd up to rounding: `centered(-d) = -centered(d)` away from the
    /// cell boundary.
    pub fn centered(&self, d: Vec2) -> Vec2 {
        let f = self.to_fractional(d);
        let g = Vec2::new(f.x - f.x.round(), f.y - f.y.round());
        self.from_fractional(g)
    }

    /// Euclidean distance on the flat torus (minimum over images).
    pub fn toroidal_distance(&self, p: Vec2, q: Vec2) -> f64 {
        let c = self.centered(p - q);
        let mut best = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                let v = c + self.a * i as f64 + self.b * j as f64;
                best = best.min(v.norm());
            }
        }
        best
    }

    pub fn gram_matrix(&self) -> GramMatrix {
        gram_matrix(self)
    }

    pub fn harmonic_basis(&self) -> HarmonicBasis {
        HarmonicBasis {
            alpha: self.alpha(),
            beta: self.beta(),
        }
    }
}

/// `make_lattice` entry point.
pub fn make_lattice(a: Vec2, b: Vec2, rescale: bool) -> Result<Lattice> {
    Lattice::new(a, b, rescale)
}

/// Harmonic one-forms `α = b_y dx - b_x dy`, `β = -a_y dx + a_x dy`, stored
/// as covector components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicBasis {
    pub alpha: Vec2,
    pub beta: Vec2,
}

impl HarmonicBasis {
    /// Hodge star of a covector `(f, g)`: `⋆(f dx + g dy) = -g dx + f dy`.
    pub fn star(form: Vec2) -> Vec2 {
        Vec2::new(-form.y, form.x)
    }

    /// Period of a constant one-form along the straight cycle `t ↦ t v`.
    pub fn period(form: Vec2, cycle: Vec2) -> f64 {
        form.dot(&cycle)
    }
}

/// The 2×2 matrix `M` of the quadratic form `(m,n) M (m,n)^T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramMatrix(pub Matrix2<f64>);

impl GramMatrix {
    pub fn quadratic(&self, m: f64, n: f64) -> f64 {
        let k = self.0;
        k[(0, 0)] * m * m + 2.0 * k[(0, 1)] * m * n + k[(1, 1)] * n * n
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }
}

pub fn gram_matrix(lattice: &Lattice) -> GramMatrix {
    let (a, b) = (lattice.a, lattice.b);
    let off = -a.x * b.x - a.y * b.y;
    GramMatrix(Matrix2::new(
        b.x * b.x + b.y * b.y,
        off,
        off,
        a.x * a.x + a.y * a.y,
    ))
}

/// Harmonic coordinates of `η`: covector components or periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HarmonicCoords {
    /// `η = η_x dx + η_y dy`
    Components(Vec2),
    /// `η = A α + B β` with `A = ∮_a η`, `B = ∮_b η`
    Periods(Vec2),
}

/// Converts between `(η_x, η_y)` and `(A, B)`.
pub fn harmonic_coords(lattice: &Lattice, from: HarmonicCoords) -> HarmonicCoords {
    let (a, b) = (lattice.a, lattice.b);
    match from {
        HarmonicCoords::Components(eta) => {
            HarmonicCoords::Periods(Vec2::new(a.dot(&eta), b.dot(&eta)))
        }
        HarmonicCoords::Periods(p) => {
            let (big_a, big_b) = (p.x, p.y);
            HarmonicCoords::Components(Vec2::new(
                big_a * b.y - big_b * a.y,
                -big_a * b.x + big_b * a.x,
            ))
        }
    }
}

/// Residual of `(block)² + I` for the Riemann-relation block matrix
/// `[[-R, P], [-Q, R^T]]`, with `P, Q, R` computed as wedge integrals of
/// the harmonic basis over the unit-area cell.
pub fn riemann_block_check(lattice: &Lattice) -> Matrix2<f64> {
    let basis = lattice.harmonic_basis();
    let wedge = |u: Vec2, v: Vec2| (u.x * v.y - u.y * v.x) * lattice.det();
    let star = HarmonicBasis::star;
    let p = wedge(basis.alpha, star(basis.alpha));
    let q = wedge(basis.beta, star(basis.beta));
    let r = wedge(basis.alpha, star(basis.beta));
    let block = Matrix2::new(-r, p, -q, r);
    block * block + Matrix2::identity()
}

/// One Fourier mode `c e^{2πi(mα + nβ)}` paired with its conjugate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Mode {
    pub m: i32,
    pub n: i32,
    pub c: Complex64,
}

/// Value, gradient and Hessian of a real spectral field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEval {
    pub value: f64,
    pub grad: Vec2,
    pub hess: Matrix2<f64>,
}

/// Real trigonometric series stored as one representative per conjugate
/// pair, `f = Σ 2 Re(c e^{iθ})`, `θ = 2π(m α(p) + n β(p))`.
#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct SpectralField {
    pub modes: Vec<Mode>,
}

impl SpectralField {
    pub fn eval(&self, lattice: &Lattice, p: Vec2) -> FieldEval {
        let f = lattice.to_fractional(p);
        let (ga, gb) = (lattice.alpha(), lattice.beta());
        let mut value = 0.0;
        let mut grad = Vec2::zeros();
        let mut hess = Matrix2::zeros();
        for mode in &self.modes {
            let (m, n) = (mode.m as f64, mode.n as f64);
            let theta = 2.0 * PI * (m * f.x + n * f.y);
            let k = (ga * m + gb * n) * (2.0 * PI);
            let (s, c) = theta.sin_cos();
            // 2 Re(c e^{iθ}) and its derivatives
            let re = mode.c.re * c - mode.c.im * s;
            let im = mode.c.re * s + mode.c.im * c;
            value += 2.0 * re;
            grad -= k * (2.0 * im);
            hess -= (k * k.transpose()) * (2.0 * re);
        }
        FieldEval { value, grad, hess }
    }

    pub fn value(&self, lattice: &Lattice, p: Vec2) -> f64 {
        let f = lattice.to_fractional(p);
        self.modes
            .iter()
            .map(|mode| {
                let theta = 2.0 * PI * (mode.m as f64 * f.x + mode.n as f64 * f.y);
                let (s, c) = theta.sin_cos();
                2.0 * (mode.c.re * c - mode.c.im * s)
            })
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|m| m.c.norm() == 0.0)
    }
}

fn is_canonical(m: i32, n: i32) -> bool {
    m > 0 || (m == 0 && n > 0)
}

/// Density `ρ = λ² = 1 + Σ_{(m,n)≠0} c_{mn} e^{2πi(mα + nβ)}` with mean one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor {
    coefficients: BTreeMap<(i32, i32), Complex64>,
    truncation: u32,
    field: SpectralField,
}

/// `ρ` and its first two derivatives at a point.
pub type RhoEval = FieldEval;

impl ConformalFactor {
    /// Builds the factor from coefficients. A missing conjugate partner
    /// `c_{-m,-n}` is filled in; an inconsistent one is rejected. The
    /// `(0,0)` entry is implied to be 1 and may not be given. Positivity
    /// is checked on a 128×128 grid of the fundamental cell (a sampling
    /// heuristic, not a proof).
    pub fn new<I>(coefficients: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((i32, i32), Complex64)>,
    {
        let mut map: BTreeMap<(i32, i32), Complex64> = BTreeMap::new();
        for ((m, n), c) in coefficients {
            if m == 0 && n == 0 {
                return Err(Error::InvalidInput(
                    "the (0,0) coefficient is fixed to 1 and may not be given".into(),
                ));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "coefficient ({m},{n}) is not finite"
                )));
            }
            if let Some(prev) = map.insert((m, n), c) {
                if (prev - c).norm() > 1e-14 {
                    return Err(Error::InvalidInput(format!(
                        "coefficient ({m},{n}) given twice"
                    )));
                }
            }
        }
        let keys: Vec<_> = map.keys().copied().collect();
        for (m, n) in keys {
            let c = map[&(m, n)];
            match map.get(&(-m, -n)) {
                Some(partner) => {
                    if (partner - c.conj()).norm() > 1e-14 {
                        return Err(Error::InvalidInput(format!(
                            "coefficients ({m},{n}) and ({},{}) are not conjugate; rho would be complex",
                            -m, -n
                        )));
                    }
                }
                None => {
                    map.insert((-m, -n), c.conj());
                }
            }
        }
        let truncation = map
            .keys()
            .map(|&(m, n)| m.unsigned_abs().max(n.unsigned_abs()))
            .max()
            .unwrap_or(0)
            .max(1);
        let modes = map
            .iter()
            .filter(|(&(m, n), _)| is_canonical(m, n))
            .map(|(&(m, n), &c)| Mode { m, n, c })
            .collect();
        let cf = Self {
            coefficients: map,
            truncation,
            field: SpectralField { modes },
        };
        cf.check_positivity()?;
        Ok(cf)
    }

    /// The flat metric `ρ ≡ 1`.
    pub fn flat() -> Self {
        Self {
            coefficients: BTreeMap::new(),
            truncation: 1,
            field: SpectralField::default(),
        }
    }

    /// `ρ = 1 + (1/4)(cos 2πα + sin 2πβ)`; on the square torus this is
    /// `1 + (cos 2πx + sin 2πy)/4`.
    pub fn example() -> Self {
        Self::example_scaled(1.0)
    }

    /// The example density with its oscillating part scaled by `s`.
    pub fn example_scaled(s: f64) -> Self {
        let c = 0.125 * s;
        Self::new([
            ((1, 0), Complex64::new(c, 0.0)),
            ((0, 1), Complex64::new(0.0, -c)),
        ])
        .expect("example density is positive")
    }

    pub fn with_truncation(mut self, order: u32) -> Result<Self> {
        let needed = self
            .coefficients
            .keys()
            .map(|&(m, n)| m.unsigned_abs().max(n.unsigned_abs()))
            .max()
            .unwrap_or(0);
        if order == 0 || order < needed {
            return Err(Error::InvalidInput(format!(
                "truncation order {order} is below the largest index {needed}"
            )));
        }
        self.truncation = order;
        Ok(self)
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// All stored coefficients, both members of every conjugate pair.
    pub fn coefficients(&self) -> &BTreeMap<(i32, i32), Complex64> {
        &self.coefficients
    }

    pub fn is_flat(&self) -> bool {
        self.field.is_zero()
    }

    pub(crate) fn field(&self) -> &SpectralField {
        &self.field
    }

    fn check_positivity(&self) -> Result<()> {
        let n = POSITIVITY_GRID;
        let unit = Lattice::square();
        for i in 0..n {
            for j in 0..n {
                let f = Vec2::new(i as f64 / n as f64, j as f64 / n as f64);
                let rho = 1.0 + self.field.value(&unit, f);
                if rho <= 0.0 {
                    return Err(Error::NonPositiveDensity { x: f.x, y: f.y, rho });
                }
            }
        }
        Ok(())
    }

    /// `ρ` with gradient and Hessian at `p`.
    pub fn eval(&self, lattice: &Lattice, p: Vec2) -> Result<RhoEval> {
        let mut e = self.field.eval(lattice, p);
        e.value += 1.0;
        if e.value <= 0.0 {
            return Err(Error::NonPositiveDensity {
                x: p.x,
                y: p.y,
                rho: e.value,
            });
        }
        Ok(e)
    }

    pub fn value(&self, lattice: &Lattice, p: Vec2) -> f64 {
        1.0 + self.field.value(lattice, p)
    }
}

/// `eval_rho` entry point: `(ρ, ∇ρ)` at `(x, y)`.
pub fn eval_rho(cf: &ConformalFactor, x: f64, y: f64, lattice: &Lattice) -> Result<(f64, Vec2)> {
    let e = cf.eval(lattice, Vec2::new(x, y))?;
    Ok((e.value, e.grad))
}

/// JSON surface description:
/// `{"lattice": {"a": [..], "b": [..], "rescale": false},
///   "conformal": {"coefficients": [[m, n, re, im], ...]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceConfig {
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub conformal: ConformalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub a: [f64; 2],
    pub b: [f64; 2],
    #[serde(default)]
    pub rescale: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConformalConfig {
    #[serde(default)]
    pub coefficients: Vec<[f64; 4]>,
    #[serde(default)]
    pub truncation: Option<u32>,
}

impl SurfaceConfig {
    pub fn build(&self) -> Result<(Lattice, ConformalFactor)> {
        let lattice = Lattice::new(
            Vec2::new(self.lattice.a[0], self.lattice.a[1]),
            Vec2::new(self.lattice.b[0], self.lattice.b[1]),
            self.lattice.rescale,
        )?;
        let mut coeffs = Vec::with_capacity(self.conformal.coefficients.len());
        for entry in &self.conformal.coefficients {
            let [m, n, re, im] = *entry;
            if m.fract() != 0.0 || n.fract() != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "mode indices must be integers, got ({m}, {n})"
                )));
            }
            coeffs.push(((m as i32, n as i32), Complex64::new(re, im)));
        }
        let mut cf = ConformalFactor::new(coeffs)?;
        if let Some(order) = self.conformal.truncation {
            cf = cf.with_truncation(order)?;
        }
        Ok((lattice, cf))
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sheared() -> Lattice {
        Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.5, 1.0), false).unwrap()
    }

    #[test]
    fn square_lattice_is_valid() {
        let l = Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), false).unwrap();
        assert_eq!(l.det(), 1.0);
    }

    #[test]
    fn rescale_normalizes_determinant() {
        let l = Lattice::new(Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0), true).unwrap();
        assert!((l.a() - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        assert!((l.b() - Vec2::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn sheared_lattice_has_unit_det() {
        assert!((sheared().det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_errors() {
        let e = Lattice::new(Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0), true).unwrap_err();
        assert!(matches!(e, Error::DegenerateLattice { .. }));
        let e = Lattice::new(Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0), false).unwrap_err();
        assert!(matches!(e, Error::DetNotOne { .. }));
        let e = Lattice::new(Vec2::zeros(), Vec2::new(0.0, 1.0), true).unwrap_err();
        assert!(matches!(e, Error::DegenerateLattice { .. }));
    }

    #[test]
    fn rho_examples() {
        let l = Lattice::square();
        let cf = ConformalFactor::example();
        let (rho, _) = eval_rho(&cf, 0.0, 0.25, &l).unwrap();
        assert!((rho - 1.5).abs() < 1e-15);
        let (rho, grad) = eval_rho(&cf, 0.5, 0.75, &l).unwrap();
        assert!((rho - 0.5).abs() < 1e-15);
        assert!(grad.norm() < 1e-14);
        let (rho, grad) = eval_rho(&ConformalFactor::flat(), 0.3, 0.9, &l).unwrap();
        assert_eq!(rho, 1.0);
        assert_eq!(grad, Vec2::zeros());
    }

    #[test]
    fn rho_gradient_and_hessian_match_closed_form() {
        let l = Lattice::square();
        let cf = ConformalFactor::example();
        let p = Vec2::new(0.17, 0.61);
        let e = cf.eval(&l, p).unwrap();
        let tp = 2.0 * PI;
        let gx = -0.25 * tp * (tp * p.x).sin();
        let gy = 0.25 * tp * (tp * p.y).cos();
        assert!((e.grad - Vec2::new(gx, gy)).norm() < 1e-14);
        let hxx = -0.25 * tp * tp * (tp * p.x).cos();
        let hyy = -0.25 * tp * tp * (tp * p.y).sin();
        assert!((e.hess - Matrix2::new(hxx, 0.0, 0.0, hyy)).norm() < 1e-13);
    }

    #[test]
    fn non_positive_density_rejected() {
        let e = ConformalFactor::new([((1, 0), Complex64::new(0.6, 0.0))]).unwrap_err();
        assert!(matches!(e, Error::NonPositiveDensity { .. }));
    }

    #[test]
    fn conjugate_partner_checked() {
        let e = ConformalFactor::new([
            ((1, 0), Complex64::new(0.1, 0.0)),
            ((-1, 0), Complex64::new(0.2, 0.0)),
        ])
        .unwrap_err();
        assert!(matches!(e, Error::InvalidInput(_)));
        let cf = ConformalFactor::new([((2, -1), Complex64::new(0.1, 0.05))]).unwrap();
        assert_eq!(cf.coefficients()[&(-2, 1)], Complex64::new(0.1, -0.05));
        assert_eq!(cf.truncation(), 2);
        assert!(cf.clone().with_truncation(1).is_err());
        assert_eq!(cf.with_truncation(64).unwrap().truncation(), 64);
    }

    #[test]
    fn rho_has_unit_mean() {
        // trapezoid on a 256² grid is exact for trigonometric polynomials
        // of degree < 256
        for l in [Lattice::square(), sheared()] {
            let cf = ConformalFactor::new([
                ((1, 0), Complex64::new(0.1, 0.02)),
                ((1, 2), Complex64::new(-0.05, 0.03)),
                ((0, 3), Complex64::new(0.0, 0.04)),
            ])
            .unwrap();
            let n = 256;
            let mut sum = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let f = Vec2::new(i as f64 / n as f64, j as f64 / n as f64);
                    sum += cf.value(&l, l.from_fractional(f));
                }
            }
            let mean = sum / (n * n) as f64 * l.det();
            assert!((mean - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn gram_examples() {
        let m = gram_matrix(&Lattice::square());
        assert_eq!(m.0, Matrix2::identity());
        let m = gram_matrix(&sheared());
        assert!((m.0 - Matrix2::new(1.25, -0.5, -0.5, 1.0)).norm() < 1e-15);
        assert!((m.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_coord_examples() {
        let sq = Lattice::square();
        let eta = Vec2::new(0.3, -0.7);
        assert_eq!(
            harmonic_coords(&sq, HarmonicCoords::Components(eta)),
            HarmonicCoords::Periods(eta)
        );
        assert_eq!(
            harmonic_coords(&sheared(), HarmonicCoords::Components(Vec2::zeros())),
            HarmonicCoords::Periods(Vec2::zeros())
        );
        let HarmonicCoords::Periods(ab) =
            harmonic_coords(&sheared(), HarmonicCoords::Components(Vec2::new(1.0, 0.0)))
        else {
            unreachable!()
        };
        assert!((ab - Vec2::new(1.0, 0.5)).norm() < 1e-15);
        let back = harmonic_coords(&sheared(), HarmonicCoords::Periods(ab));
        assert_eq!(back, HarmonicCoords::Components(Vec2::new(1.0, 0.0)));
    }

    #[test]
    fn basis_periods_are_dual() {
        let l = sheared();
        let h = l.harmonic_basis();
        assert!((HarmonicBasis::period(h.alpha, l.a()) - 1.0).abs() < 1e-15);
        assert!((HarmonicBasis::period(h.beta, l.b()) - 1.0).abs() < 1e-15);
        assert!(HarmonicBasis::period(h.alpha, l.b()).abs() < 1e-15);
        assert!(HarmonicBasis::period(h.beta, l.a()).abs() < 1e-15);
    }

    #[test]
    fn riemann_block_examples() {
        assert!(riemann_block_check(&Lattice::square()).amax() < 1e-14);
        assert!(riemann_block_check(&sheared()).amax() < 1e-12);
    }

    #[test]
    fn wrap_and_centered() {
        let l = sheared();
        let p = Vec2::new(3.7, -2.2);
        let w = l.wrap(p);
        let f = l.to_fractional(w);
        assert!((0.0..1.0).contains(&f.x) && (0.0..1.0).contains(&f.y));
        let (i, j) = l.cell_index(p);
        assert!((p - w - l.from_fractional(Vec2::new(i as f64, j as f64))).norm() < 1e-12);
        let c = l.centered(Vec2::new(0.9, 0.05));
        assert!((c - Vec2::new(-0.1, 0.05)).norm() < 1e-12);
    }

    #[test]
    fn surface_config_parses() {
        let text = r#"{"lattice": {"a": [1, 0], "b": [0, 1]},
            "conformal": {"coefficients": [[1, 0, 0.125, 0], [0, 1, 0, -0.125]]}}"#;
        let (l, cf) = SurfaceConfig::from_json(text).unwrap().build().unwrap();
        assert_eq!(l, Lattice::square());
        assert_eq!(cf, ConformalFactor::example());
    }

    fn random_lattice() -> impl Strategy<Value = Lattice> {
        (0.3f64..2.0, -1.0f64..1.0, -1.0f64..1.0, 0.3f64..2.0).prop_filter_map(
            "well-conditioned",
            |(ax, ay, bx, by)| {
                let a = Vec2::new(ax, ay);
                let b = Vec2::new(bx, by);
                let det = a.x * b.y - a.y * b.x;
                (det > 0.2).then(|| Lattice::new(a, b, true).unwrap())
            },
        )
    }

    proptest! {
        #[test]
        fn gram_is_spd_with_unit_det(l in random_lattice()) {
            let m = l.gram_matrix();
            prop_assert!((m.0 - m.0.transpose()).amax() == 0.0);
            let eig = m.0.symmetric_eigenvalues();
            prop_assert!(eig.iter().all(|&e| e > 0.0));
            prop_assert!((m.det() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn riemann_residual_vanishes(l in random_lattice()) {
            prop_assert!(riemann_block_check(&l).amax() < 1e-12);
        }

        #[test]
        fn harmonic_coords_round_trip(l in random_lattice(), ex in -5.0f64..5.0, ey in -5.0f64..5.0) {
            let eta = Vec2::new(ex, ey);
            let there = harmonic_coords(&l, HarmonicCoords::Components(eta));
            let HarmonicCoords::Components(back) = harmonic_coords(&l, there) else { unreachable!() };
            prop_assert!((back - eta).amax() < 1e-14 * (1.0 + eta.amax()) * 10.0);
        }
    }
}
