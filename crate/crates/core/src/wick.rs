//! Wick calculus at desk scale (one spatial dimension for grid
//! operations): the Gaussian wave-packet transform, Wick quantization of
//! sampled symbols, the Wick-to-Weyl conversion for polynomial symbols,
//! and the composition-formula remainder.
//!
//! Everything here lives in the 2-pi-normalized Weyl quantization
//! `a^w u(x) = int e^{2 i pi (x-y) xi} a((x+y)/2, xi) u(y) dy dxi`,
//! which is kept strictly separate from the standard convention of the
//! Galerkin oracle. Matrices in this convention are produced by one small
//! adapter: the 2-pi basis functions are `(2 pi)^{1/4} psi_k(sqrt(2 pi) x)`
//! with `psi_k` the standard Hermite functions, so the matrix of a symbol
//! here equals the standard-convention matrix of the symbol dilated by
//! `1/sqrt(2 pi)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::{assemble, GalerkinMatrix};
use crate::linalg::{self, C64};
use crate::poly::PolynomialSymbol;

const PI: f64 = std::f64::consts::PI;

/// Largest grid step that still resolves the Gaussian window.
pub const MAX_GRID_STEP: f64 = 0.25;

/// Relative boundary-mass budget for grid functions.
pub const TAIL_BUDGET: f64 = 1e-8;

/// Samples of a function on the uniform grid `x_k = -L + k * 2L/(M-1)`.
#[derive(Debug, Clone)]
pub struct GridFunction {
    l: f64,
    samples: Vec<C64>,
}

impl GridFunction {
    pub fn new(l: f64, samples: Vec<C64>) -> Result<Self> {
        if samples.len() < 16 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 16 points, got {}",
                samples.len()
            )));
        }
        if l <= 0.0 {
            return Err(Error::InvalidInput(format!("half-width must be positive, got {l}")));
        }
        let gf = GridFunction { l, samples };
        let tail = gf.tail_fraction();
        if tail > TAIL_BUDGET {
            return Err(Error::BoundaryMass { tail });
        }
        Ok(gf)
    }

    pub fn from_fn(l: f64, m: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        let step = 2.0 * l / (m as f64 - 1.0);
        let samples = (0..m).map(|k| f(-l + k as f64 * step)).collect();
        Self::new(l, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn step(&self) -> f64 {
        2.0 * self.l / (self.samples.len() as f64 - 1.0)
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.l + k as f64 * self.step()
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Mass fraction carried by the outer 5% of the grid on each side.
    fn tail_fraction(&self) -> f64 {
        let m = self.samples.len();
        let edge = (m / 20).max(2);
        let total: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let tail: f64 = self.samples[..edge]
            .iter()
            .chain(&self.samples[m - edge..])
            .map(|z| z.norm_sqr())
            .sum();
        tail / total
    }

    /// Trapezoid L2 norm.
    pub fn norm_l2(&self) -> f64 {
        let step = self.step();
        let m = self.samples.len();
        let mut acc = 0.0;
        for (k, z) in self.samples.iter().enumerate() {
            let w = if k == 0 || k == m - 1 { 0.5 } else { 1.0 };
            acc += w * z.norm_sqr();
        }
        (acc * step).sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_l2();
        if n > 0.0 {
            for z in &mut self.samples {
                *z /= n;
            }
        }
        self
    }
}

/// A uniform square grid on `[-L, L]^2` in `(y, eta)`.
#[derive(Debug, Clone, Copy)]
pub struct PhaseGrid {
    pub l: f64,
    pub m: usize,
}

impl PhaseGrid {
    pub fn step(&self) -> f64 {
        2.0 * self.l / (self.m as f64 - 1.0)
    }

    pub fn coord(&self, k: usize) -> f64 {
        -self.l + k as f64 * self.step()
    }
}

/// Samples of a function of `(y, eta)` on a [`PhaseGrid`], row-major in
/// `y`.
#[derive(Debug, Clone)]
pub struct PhaseGridFunction {
    pub grid: PhaseGrid,
    samples: Vec<C64>,
}

impl PhaseGridFunction {
    pub fn get(&self, iy: usize, ieta: usize) -> C64 {
        self.samples[iy * self.grid.m + ieta]
    }

    /// Trapezoid L2 norm over the phase plane.
    pub fn norm_l2(&self) -> f64 {
        let m = self.grid.m;
        let step = self.grid.step();
        let mut acc = 0.0;
        for iy in 0..m {
            let wy = if iy == 0 || iy == m - 1 { 0.5 } else { 1.0 };
            for ie in 0..m {
                let we = if ie == 0 || ie == m - 1 { 0.5 } else { 1.0 };
                acc += wy * we * self.get(iy, ie).norm_sqr();
            }
        }
        (acc * step * step).sqrt()
    }
}

/// Wave-packet transform
/// `Wu(y, eta) = 2^{1/4} int u(x) e^{-pi (x-y)^2} e^{-2 i pi (x-y) eta} dx`
/// by trapezoid quadrature on the grid of `u`.
pub fn wave_packet_transform(u: &GridFunction, grid: &PhaseGrid) -> Result<PhaseGridFunction> {
    let step = u.step();
    if step > MAX_GRID_STEP {
        return Err(Error::UnderResolvedGrid { step, max: MAX_GRID_STEP });
    }
    let m = grid.m;
    let mu = u.len();
    let amp = 2.0f64.powf(0.25) * step;
    let samples: Vec<C64> = (0..m)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let y = grid.coord(iy);
            (0..m).map(move |ie| {
                let eta = grid.coord(ie);
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..mu {
                    let x = u.x(k);
                    let d = x - y;
                    let w = if k == 0 || k == mu - 1 { 0.5 } else { 1.0 };
                    let kernel = C64::from_polar((-PI * d * d).exp(), -2.0 * PI * d * eta);
                    acc += u.samples()[k] * kernel * w;
                }
                acc * amp
            })
        })
        .collect();
    Ok(PhaseGridFunction { grid: *grid, samples })
}

/// `(a^Wick u, u) = int a(Y) |Wu(Y)|^2 dY` for a symbol sampled on the
/// phase grid of a precomputed transform.
pub fn wick_expectation_with(
    a: impl Fn(f64, f64) -> C64,
    wu: &PhaseGridFunction,
) -> C64 {
    let m = wu.grid.m;
    let step = wu.grid.step();
    let mut acc = C64::new(0.0, 0.0);
    for iy in 0..m {
        let wy = if iy == 0 || iy == m - 1 { 0.5 } else { 1.0 };
        let y = wu.grid.coord(iy);
        for ie in 0..m {
            let we = if ie == 0 || ie == m - 1 { 0.5 } else { 1.0 };
            let eta = wu.grid.coord(ie);
            acc += a(y, eta) * wu.get(iy, ie).norm_sqr() * wy * we;
        }
    }
    acc * (step * step)
}

/// Wick expectation computed from scratch: transforms `u` and integrates
/// the sampled symbol against `|Wu|^2`.
pub fn wick_expectation(
    a: impl Fn(f64, f64) -> C64,
    u: &GridFunction,
    grid: &PhaseGrid,
) -> Result<C64> {
    let wu = wave_packet_transform(u, grid)?;
    Ok(wick_expectation_with(a, &wu))
}

/// Wick-to-Weyl conversion for symbols of degree at most two: the Weyl
/// symbol of `a^Wick` is `a + tr(A) / (4 pi)`, where `A` is the quadratic
/// coefficient matrix. (The smoothing Gaussian `2^n e^{-2 pi |Y|^2}` is a
/// probability density with per-coordinate variance `1/(4 pi)`; linear
/// and constant parts pass through unchanged.)
pub fn wick_to_weyl_quadratic(a: &PolynomialSymbol) -> Result<PolynomialSymbol> {
    if a.degree() > 2 {
        return Err(Error::DegreeTooHigh { degree: a.degree(), max: 2 });
    }
    Ok(a.heat_smoothed(1.0 / (8.0 * PI)))
}

/// General polynomial Wick-to-Weyl conversion (exact Gaussian smoothing,
/// any degree).
pub fn wick_symbol_to_weyl(a: &PolynomialSymbol) -> PolynomialSymbol {
    a.heat_smoothed(1.0 / (8.0 * PI))
}

/// Matrix of the 2-pi-normalized Weyl quantization of a polynomial symbol
/// in the adapted Hermite basis. This is the only bridge between the two
/// conventions: dilate by `1/sqrt(2 pi)`, then reuse the exact standard
/// assembler at `h = 1`.
pub fn assemble_2pi(sym: &PolynomialSymbol, n_basis: usize) -> Result<GalerkinMatrix> {
    assemble(&sym.dilated(1.0 / (2.0 * PI).sqrt()), n_basis, 1.0)
}

/// Matrix of `a^Wick` in the adapted basis.
pub fn wick_matrix(sym: &PolynomialSymbol, n_basis: usize) -> Result<GalerkinMatrix> {
    assemble_2pi(&wick_symbol_to_weyl(sym), n_basis)
}

/// Remainder report for the Wick composition formula
/// `a^Wick b^Wick = [ab - (1/4pi) a'.b' + (1/4ipi){a,b}]^Wick + S`.
#[derive(Debug, Clone, Serialize)]
pub struct CompositionReport {
    /// Spectral norm of the remainder on the size-`n_basis` block.
    pub remainder_norm: f64,
    /// `gamma_2(b)`: the largest second-derivative value of `b` on unit
    /// directions.
    pub gamma2_b: f64,
    /// max |a| over the unit ball (reference scale; `a` is unbounded on
    /// all of phase space for nonconstant polynomials).
    pub max_a_unit_ball: f64,
    /// Empirical constant `remainder / (max|a| gamma_2(b))` when defined.
    pub d1: Option<f64>,
    pub n_basis: usize,
}

fn max_on_unit_ball(a: &PolynomialSymbol) -> f64 {
    let dim = 2 * a.n();
    let mut best: f64 = a.eval_real(&vec![0.0; dim]).map(|v| v.norm()).unwrap_or(0.0);
    // Deterministic sphere sweep; desk scale is n = 1 (a circle), higher n
    // uses a seeded sample.
    if dim == 2 {
        for k in 0..720 {
            let t = 2.0 * PI * k as f64 / 720.0;
            let v = a.eval_real(&[t.cos(), t.sin()]).unwrap();
            best = best.max(v.norm());
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let mut x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            for v in &mut x {
                *v /= norm;
            }
            best = best.max(a.eval_real(&x).unwrap().norm());
        }
    }
    best
}

/// Largest |second derivative| of a degree-<=2 polynomial over unit
/// directions: the spectral norm of the (constant) Hessian `2 Q`.
fn gamma2(b: &PolynomialSymbol) -> Result<f64> {
    if b.degree() < 2 {
        return Ok(0.0);
    }
    // Quadratic part only: drop lower-order terms and read the form.
    let mut quad = PolynomialSymbol::zero(b.n());
    for (m, c) in b.terms() {
        if m.degree() == 2 {
            quad.add_term(m.clone(), *c);
        }
    }
    let q = quad.to_quadratic()?;
    let hessian = q.matrix().mapv(|z| z * C64::new(2.0, 0.0));
    linalg::operator_norm(&hessian)
}

/// Builds the matrices `M1 = mat(a^Wick) mat(b^Wick)` and
/// `M2 = mat([ab - (1/4pi) a'.b' + (1/4ipi){a,b}]^Wick)` on an enlarged
/// basis, crops to `n_basis`, and reports the remainder block norm. The
/// Poisson antisymmetry `{a,b} = -{b,a}` is asserted exactly on
/// coefficients as an internal consistency check.
pub fn composition_check(
    a: &PolynomialSymbol,
    b: &PolynomialSymbol,
    n_basis: usize,
) -> Result<CompositionReport> {
    if a.degree() > 2 || b.degree() > 2 {
        return Err(Error::DegreeTooHigh { degree: a.degree().max(b.degree()), max: 2 });
    }
    let bracket = a.poisson_bracket(b)?;
    let reversed = b.poisson_bracket(a)?;
    if bracket.add(&reversed)?.num_terms() != 0 {
        return Err(Error::InvalidInput(
            "Poisson bracket antisymmetry violated in symbolic assembly".into(),
        ));
    }

    let product = a.mul(b)?;
    let grad_term = a.gradient_dot(b)?.scaled(C64::new(-1.0 / (4.0 * PI), 0.0));
    let bracket_term = bracket.scaled(C64::new(0.0, -1.0 / (4.0 * PI))); // 1/(4 i pi)
    let c = product.add(&grad_term)?.add(&bracket_term)?;

    // Operators of degree <= 2 have per-axis band <= 2; the product needs
    // an enlarged basis to keep low-block entries exact.
    let enlarged = n_basis + 4;
    let mat_a = wick_matrix(a, enlarged)?;
    let mat_b = wick_matrix(b, enlarged)?;
    let mat_c = wick_matrix(&c, enlarged)?;
    let m1 = mat_a.a.dot(&mat_b.a);
    let mut s = &m1 - &mat_c.a;
    s = s.slice(ndarray::s![..n_basis, ..n_basis]).to_owned();

    let remainder_norm = linalg::operator_norm(&s)?;
    let gamma2_b = gamma2(b)?;
    let max_a = max_on_unit_ball(a);
    let d1 = if gamma2_b > 0.0 && max_a > 0.0 {
        Some(remainder_norm / (max_a * gamma2_b))
    } else {
        None
    };
    Ok(CompositionReport {
        remainder_norm,
        gamma2_b,
        max_a_unit_ball: max_a,
        d1,
        n_basis,
    })
}

/// Default grid parameters of the demo battery.
pub const DEMO_GRID_L: f64 = 8.0;
pub const DEMO_GRID_M: usize = 512;
pub const DEMO_PHASE_M: usize = 128;

/// One named check of the demo battery.
#[derive(Debug, Clone, Serialize)]
pub struct DemoCheck {
    pub name: String,
    pub measured: f64,
    pub budget: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WickDemoReport {
    pub checks: Vec<DemoCheck>,
}

impl WickDemoReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn random_smooth_u(rng: &mut ChaCha8Rng) -> GridFunction {
    // Polynomial times a centered Gaussian: rapidly decaying, tail-safe on
    // the default window.
    let c0 = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let c1 = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let c2 = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let shift = rng.gen::<f64>() - 0.5;
    GridFunction::from_fn(DEMO_GRID_L, DEMO_GRID_M, |x| {
        let p = c0 + c1 * x + c2 * x * x;
        p * (-PI * (x - shift) * (x - shift)).exp()
    })
    .expect("demo u is tail-safe")
    .normalized()
}

/// Runs the appendix invariant battery: isometry, positivity, the norm
/// bound, the Wick-Weyl shift against quadrature, and composition
/// stability under basis doubling.
pub fn demo_suite(seed: u64) -> Result<WickDemoReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = PhaseGrid { l: DEMO_GRID_L, m: DEMO_PHASE_M };
    let mut checks = Vec::new();

    // Isometry on a battery of smooth functions, including the ground
    // wave packet.
    let mut worst_isometry: f64 = 0.0;
    let ground = GridFunction::from_fn(DEMO_GRID_L, DEMO_GRID_M, |x| {
        C64::new(2.0f64.powf(0.25) * (-PI * x * x).exp(), 0.0)
    })?;
    let mut battery = vec![ground.normalized()];
    for _ in 0..4 {
        battery.push(random_smooth_u(&mut rng));
    }
    for u in &battery {
        let wu = wave_packet_transform(u, &grid)?;
        let defect = (wu.norm_l2().powi(2) - u.norm_l2().powi(2)).abs();
        worst_isometry = worst_isometry.max(defect);
    }
    checks.push(DemoCheck {
        name: "isometry".into(),
        measured: worst_isometry,
        budget: 1e-6,
        pass: worst_isometry <= 1e-6,
    });

    // Positivity: 50 random nonnegative symbols against 20 random states.
    let transforms: Vec<PhaseGridFunction> = (0..20)
        .map(|_| wave_packet_transform(&random_smooth_u(&mut rng), &grid))
        .collect::<Result<_>>()?;
    let mut most_negative: f64 = 0.0;
    let mut norm_bound_excess: f64 = 0.0;
    for _ in 0..50 {
        // Square of a random smooth function of (y, eta): nonnegative and
        // bounded, with a known sup over the grid.
        let (ay, ae, ph) = (rng.gen::<f64>() * 0.5, rng.gen::<f64>() * 0.5, rng.gen::<f64>());
        let f = move |y: f64, eta: f64| -> f64 {
            let envelope = (-0.05 * (y * y + eta * eta)).exp();
            let wave = (ay * y + ae * eta + ph).cos();
            envelope * wave
        };
        let a = move |y: f64, eta: f64| -> C64 {
            let v = f(y, eta);
            C64::new(v * v, 0.0)
        };
        let mut sup_a: f64 = 0.0;
        for iy in 0..grid.m {
            for ie in 0..grid.m {
                sup_a = sup_a.max(a(grid.coord(iy), grid.coord(ie)).re);
            }
        }
        for wu in &transforms {
            let value = wick_expectation_with(a, wu);
            most_negative = most_negative.min(value.re);
            let excess = value.norm() - sup_a * (1.0 + 1e-4);
            norm_bound_excess = norm_bound_excess.max(excess);
        }
    }
    checks.push(DemoCheck {
        name: "positivity".into(),
        measured: most_negative,
        budget: -1e-8,
        pass: most_negative >= -1e-8,
    });
    checks.push(DemoCheck {
        name: "norm-bound".into(),
        measured: norm_bound_excess,
        budget: 0.0,
        pass: norm_bound_excess <= 0.0,
    });

    // Reconstruction: a == 1 returns ||u||^2 = 1.
    let one = wick_expectation_with(|_, _| C64::new(1.0, 0.0), &transforms[0]);
    let recon_defect = (one.re - 1.0).abs().max(one.im.abs());
    checks.push(DemoCheck {
        name: "reconstruction".into(),
        measured: recon_defect,
        budget: 1e-6,
        pass: recon_defect <= 1e-6,
    });

    // Wick-Weyl shift against 2-D quadrature of the smoothing integral.
    let mut worst_shift: f64 = 0.0;
    for _ in 0..10 {
        let qxx = rng.gen::<f64>() - 0.5;
        let qxe = rng.gen::<f64>() - 0.5;
        let qee = rng.gen::<f64>() - 0.5;
        let expr = format!("{qxx}*x1^2 + {qxe}*x1*xi1 + {qee}*xi1^2");
        let a = crate::parse::parse_polynomial(&expr, 1)?;
        let tilde = wick_to_weyl_quadratic(&a)?;
        // Quadrature of int a(X0 + Y) 2 e^{-2 pi |Y|^2} dY at a test point.
        let x0 = [0.3, -0.7];
        let (l, m) = (4.0, 201);
        let step = 2.0 * l / (m as f64 - 1.0);
        let mut quad = C64::new(0.0, 0.0);
        for iy in 0..m {
            let y = -l + iy as f64 * step;
            let wy = if iy == 0 || iy == m - 1 { 0.5 } else { 1.0 };
            for ie in 0..m {
                let e = -l + ie as f64 * step;
                let we = if ie == 0 || ie == m - 1 { 0.5 } else { 1.0 };
                let weight = 2.0 * (-2.0 * PI * (y * y + e * e)).exp();
                let v = a.eval_real(&[x0[0] + y, x0[1] + e])?;
                quad += v * weight * wy * we;
            }
        }
        quad *= step * step;
        let closed = tilde.eval_real(&x0)?;
        worst_shift = worst_shift.max((quad - closed).norm());
    }
    checks.push(DemoCheck {
        name: "wick-weyl-shift".into(),
        measured: worst_shift,
        budget: 1e-8,
        pass: worst_shift <= 1e-8,
    });

    // Composition remainder stability under basis doubling.
    let pairs = [
        ("1", "1"),
        ("x1", "xi1"),
        ("x1^2 + xi1^2", "x1^2 + xi1^2"),
    ];
    let mut worst_drift: f64 = 0.0;
    for (ea, eb) in pairs {
        let a = crate::parse::parse_polynomial(ea, 1)?;
        let b = crate::parse::parse_polynomial(eb, 1)?;
        let small = composition_check(&a, &b, 16)?;
        let large = composition_check(&a, &b, 32)?;
        let scale = large.remainder_norm.max(1e-12);
        let drift = (large.remainder_norm - small.remainder_norm).abs() / scale;
        worst_drift = worst_drift.max(drift);
    }
    checks.push(DemoCheck {
        name: "composition-stability".into(),
        measured: worst_drift,
        budget: 0.05,
        pass: worst_drift < 0.05,
    });

    Ok(WickDemoReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn default_grid() -> PhaseGrid {
        PhaseGrid { l: DEMO_GRID_L, m: DEMO_PHASE_M }
    }

    fn ground_state() -> GridFunction {
        GridFunction::from_fn(DEMO_GRID_L, DEMO_GRID_M, |x| {
            C64::new(2.0f64.powf(0.25) * (-PI * x * x).exp(), 0.0)
        })
        .unwrap()
    }

    #[test]
    fn ground_gaussian_transform_matches_closed_form() {
        // Completing the square gives
        // Wu(y, eta) = e^{-pi (y^2 + eta^2)/2} e^{i pi y eta}.
        let u = ground_state();
        let wu = wave_packet_transform(&u, &default_grid()).unwrap();
        let g = default_grid();
        let mut worst: f64 = 0.0;
        for iy in (0..g.m).step_by(7) {
            for ie in (0..g.m).step_by(7) {
                let (y, eta) = (g.coord(iy), g.coord(ie));
                let expect = C64::from_polar((-PI * (y * y + eta * eta) / 2.0).exp(), PI * y * eta);
                worst = worst.max((wu.get(iy, ie) - expect).norm());
            }
        }
        assert!(worst < 1e-10, "worst deviation {worst}");
        // Peak value 1 at the origin.
        let mid = g.m / 2;
        assert!((wu.get(mid, mid).norm() - (-PI * (g.coord(mid).powi(2) * 2.0) / 2.0).exp()).abs() < 1e-10);
    }

    #[test]
    fn zero_function_transforms_to_zero() {
        let mut samples = vec![C64::new(0.0, 0.0); DEMO_GRID_M];
        samples[DEMO_GRID_M / 2] = C64::new(0.0, 0.0);
        let u = GridFunction::new(DEMO_GRID_L, samples).unwrap();
        let wu = wave_packet_transform(&u, &default_grid()).unwrap();
        assert_eq!(wu.norm_l2(), 0.0);
    }

    #[test]
    fn isometry_within_budget() {
        let u = ground_state().normalized();
        let wu = wave_packet_transform(&u, &default_grid()).unwrap();
        assert!((wu.norm_l2() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn under_resolved_grid_rejected() {
        let u = GridFunction::from_fn(8.0, 32, |x| C64::new((-x * x).exp(), 0.0)).unwrap();
        assert!(matches!(
            wave_packet_transform(&u, &default_grid()),
            Err(Error::UnderResolvedGrid { .. })
        ));
    }

    #[test]
    fn boundary_mass_rejected() {
        let r = GridFunction::from_fn(4.0, 64, |_| C64::new(1.0, 0.0));
        assert!(matches!(r, Err(Error::BoundaryMass { .. })));
    }

    #[test]
    fn constant_symbol_reproduces_the_norm() {
        let u = ground_state().normalized();
        let v = wick_expectation(|_, _| c(1.0, 0.0), &u, &default_grid()).unwrap();
        assert!((v.re - 1.0).abs() < 1e-8);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn wick_weyl_shift_for_the_oscillator() {
        // a = x^2 + xi^2 gains the constant 1/(2 pi).
        let a = crate::parse::parse_polynomial("x1^2 + xi1^2", 1).unwrap();
        let tilde = wick_to_weyl_quadratic(&a).unwrap();
        let at_origin = tilde.eval_real(&[0.0, 0.0]).unwrap();
        assert!((at_origin.re - 1.0 / (2.0 * PI)).abs() < 1e-15);
        // Linear and constant symbols pass through unchanged.
        let lin = crate::parse::parse_polynomial("x1 + 2*xi1", 1).unwrap();
        assert_eq!(wick_to_weyl_quadratic(&lin).unwrap(), lin);
        let cst = crate::parse::parse_polynomial("3.5", 1).unwrap();
        assert_eq!(wick_to_weyl_quadratic(&cst).unwrap(), cst);
        // Degree cap.
        let cubic = crate::parse::parse_polynomial("x1^3", 1).unwrap();
        assert!(wick_to_weyl_quadratic(&cubic).is_err());
    }

    #[test]
    fn two_pi_oscillator_spectrum() {
        // In the 2-pi convention the oscillator spectrum is (2k+1)/(2 pi).
        let a = crate::parse::parse_polynomial("x1^2 + xi1^2", 1).unwrap();
        let g = assemble_2pi(&a, 8).unwrap();
        for k in 0..8 {
            let expect = (2.0 * k as f64 + 1.0) / (2.0 * PI);
            assert!(
                (g.a[[k, k]] - c(expect, 0.0)).norm() < 1e-14,
                "diag {k}: {}",
                g.a[[k, k]]
            );
        }
    }

    #[test]
    fn composition_remainder_vanishes_for_linear_symbols() {
        // For a = x, b = xi the two-term expansion is exact: the bracket
        // constant matches the Moyal correction and the Gaussian shift
        // cancels.
        let a = crate::parse::parse_polynomial("x1", 1).unwrap();
        let b = crate::parse::parse_polynomial("xi1", 1).unwrap();
        let report = composition_check(&a, &b, 16).unwrap();
        assert!(report.remainder_norm < 1e-12, "remainder {}", report.remainder_norm);
    }

    #[test]
    fn composition_remainder_for_constants_is_zero() {
        let one = crate::parse::parse_polynomial("1", 1).unwrap();
        let report = composition_check(&one, &one, 12).unwrap();
        assert!(report.remainder_norm < 1e-14);
        assert!(report.d1.is_none());
    }

    #[test]
    fn composition_remainder_bounded_for_quadratics() {
        let a = crate::parse::parse_polynomial("x1^2 + xi1^2", 1).unwrap();
        let report = composition_check(&a, &a, 16).unwrap();
        assert!(report.remainder_norm.is_finite());
        assert!(report.gamma2_b > 0.0);
        assert!(report.d1.is_some());
        // Stability under doubling.
        let big = composition_check(&a, &a, 32).unwrap();
        let drift = (big.remainder_norm - report.remainder_norm).abs()
            / big.remainder_norm.max(1e-12);
        assert!(drift < 0.05, "drift {drift}");
    }

    #[test]
    fn demo_suite_passes() {
        let report = demo_suite(42).unwrap();
        for check in &report.checks {
            assert!(check.pass, "{}: measured {} budget {}", check.name, check.measured, check.budget);
        }
    }
}
