//! Geometry of the subelliptic spectral-parameter region and desk-scale
//! probing of the resolvent estimates: the subelliptic lower bound
//! `sigma_min(P - z) >= c0 h^{2k0/(2k0+1)} |z|^{1/(2k0+1)}` inside the
//! region, and the order-1/h estimate away from the eigenvalue set.
//!
//! The constants in the theorems are existential, so probes report
//! empirical ratios and check h-uniform positivity over a finite ladder;
//! nothing is asserted against values from the literature.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{low_lying_eigenvalues, ModelProblem};
use crate::linalg::{self, C64};
use crate::singular::{combined_k0, RankTolerance, K0};
use crate::symplectic::hamilton_map;

/// The region `Omega_h`: spectral parameters with
/// `Re z <= (1/C) h^{2k0/(2k0+1)} |z|^{1/(2k0+1)}` and `C h <= |z| <= C0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OmegaRegion {
    pub k0: usize,
    pub c: f64,
    pub c0: f64,
    pub h: f64,
}

impl OmegaRegion {
    pub fn new(k0: usize, c: f64, c0: f64, h: f64) -> Result<Self> {
        if c < 1.0 {
            return Err(Error::InvalidInput(format!("region constant C must be >= 1, got {c}")));
        }
        if c0 <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "C0 and h must be positive, got C0={c0}, h={h}"
            )));
        }
        if c * h > c0 {
            return Err(Error::EmptyRegion { c, c0, h });
        }
        Ok(OmegaRegion { k0, c, c0, h })
    }

    /// The subelliptic weight `h^{2k0/(2k0+1)} |z|^{1/(2k0+1)}`.
    pub fn bound(&self, z: C64) -> f64 {
        let k = self.k0 as f64;
        self.h.powf(2.0 * k / (2.0 * k + 1.0)) * z.norm().powf(1.0 / (2.0 * k + 1.0))
    }

    pub fn contains(&self, z: C64) -> bool {
        let r = z.norm();
        if r < self.c * self.h || r > self.c0 {
            return false;
        }
        z.re <= self.bound(z) / self.c
    }
}

/// Membership test for `Omega_h`.
pub fn omega_membership(region: &OmegaRegion, z: C64) -> bool {
    region.contains(z)
}

/// Radial/angular resolution of the probe grid inside `Omega_h`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub radii: usize,
    pub angles: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radii: 8, angles: 16 }
    }
}

/// One probed spectral parameter.
#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub re: f64,
    pub im: f64,
    pub sigma_min: f64,
    pub bound: f64,
    pub ratio: f64,
    pub converged: bool,
}

/// Heuristic sector check of the perturbation `r(Y)` on a sample ball:
/// Theorem-level hypotheses put `r(V) \ {0}` in a closed sector inside
/// the open right half-plane, but `V` is not quantified, so this is only
/// sampled and flagged as such.
#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub sample_radius: f64,
    pub samples: usize,
    pub max_abs_arg: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    pub grid: Vec<ProbePoint>,
    /// Minimum ratio over converged grid points.
    pub min_ratio: f64,
    pub converged_points: usize,
    pub h: f64,
    pub n_per_axis: usize,
    pub symbol_hash: String,
    pub sector: Option<SectorReport>,
}

/// Sampling configuration for the probe.
#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    /// Relative change of sigma_min allowed between truncations N and 2N.
    pub doubling_tol: f64,
    /// Radius of the ball on which the perturbation sector condition is
    /// sampled.
    pub sector_radius: f64,
    pub sector_samples: usize,
    /// Largest accepted |arg r(Y)| (radians).
    pub sector_max_arg: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            doubling_tol: 0.05,
            sector_radius: 0.5,
            sector_samples: 200,
            sector_max_arg: 85.0 * std::f64::consts::PI / 180.0,
            seed: 42,
        }
    }
}

fn fnv_hash(bytes: &[u8]) -> String {
    // 64-bit FNV-1a; enough to fingerprint the input symbol in reports.
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

fn problem_hash(problem: &ModelProblem) -> String {
    let mut bytes = Vec::new();
    for p in &problem.points {
        for v in p.q.matrix().iter() {
            bytes.extend_from_slice(&v.re.to_le_bytes());
            bytes.extend_from_slice(&v.im.to_le_bytes());
        }
        bytes.extend_from_slice(&p.p1.re.to_le_bytes());
        bytes.extend_from_slice(&p.p1.im.to_le_bytes());
    }
    if let Some(pert) = &problem.perturbation {
        for (m, c) in pert.terms() {
            bytes.extend(m.alpha.iter().map(|&a| a as u8));
            bytes.extend(m.beta.iter().map(|&b| b as u8));
            bytes.extend_from_slice(&c.re.to_le_bytes());
            bytes.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    fnv_hash(&bytes)
}

fn sector_check(problem: &ModelProblem, config: &ProbeConfig) -> Option<SectorReport> {
    let pert = problem.perturbation.as_ref()?;
    let dim = 2 * problem.points[0].q.n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut max_arg: f64 = 0.0;
    for _ in 0..config.sector_samples {
        let y: Vec<f64> = (0..dim)
            .map(|_| (rng.gen::<f64>() - 0.5) * 2.0 * config.sector_radius)
            .collect();
        let value = pert.eval_real(&y).expect("dimension checked");
        if value.norm() > 1e-14 {
            max_arg = max_arg.max(value.arg().abs());
        }
    }
    Some(SectorReport {
        sample_radius: config.sector_radius,
        samples: config.sector_samples,
        max_abs_arg: max_arg,
        ok: max_arg <= config.sector_max_arg,
    })
}

/// Lays out the probe grid: log-spaced radii, angles confined to the
/// `Omega_h` slice at each radius.
pub fn omega_grid(region: &OmegaRegion, spec: &GridSpec) -> Result<Vec<C64>> {
    let r_lo = region.c * region.h * (1.0 + 1e-9);
    let r_hi = region.c0 * (1.0 - 1e-9);
    if r_lo >= r_hi {
        return Err(Error::EmptyRegion { c: region.c, c0: region.c0, h: region.h });
    }
    let mut grid = Vec::with_capacity(spec.radii * spec.angles);
    for i in 0..spec.radii {
        let t = if spec.radii == 1 { 0.0 } else { i as f64 / (spec.radii - 1) as f64 };
        let r = r_lo * (r_hi / r_lo).powf(t);
        let threshold = region.bound(C64::new(r, 0.0)) / region.c;
        let cos_max = (threshold / r * (1.0 - 1e-9)).clamp(-1.0, 1.0);
        let phi_min = cos_max.acos();
        let span = 2.0 * std::f64::consts::PI - 2.0 * phi_min;
        for a in 0..spec.angles {
            let u = if spec.angles == 1 { 0.5 } else { a as f64 / (spec.angles - 1) as f64 };
            let phi = phi_min + u * span;
            let z = C64::from_polar(r, phi);
            debug_assert!(region.contains(z), "grid point {z} escaped the region");
            grid.push(z);
        }
    }
    Ok(grid)
}

fn sigma_min_over_points(operators: &[Array2<C64>], z: C64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for op in operators {
        let mut shifted = op.clone();
        for i in 0..shifted.nrows() {
            shifted[[i, i]] -= z;
        }
        best = best.min(linalg::smallest_singular_value_fast(&shifted, 1e-8)?);
    }
    Ok(best)
}

/// Probes the subelliptic resolvent estimate over a grid in `Omega_h`.
///
/// For each grid point the smallest singular value of the Galerkin model
/// operator minus `z` is compared with the subelliptic weight; a point is
/// trusted only when the value moves by less than the doubling tolerance
/// between truncations `N` and `2N`. Multi-point problems probe the
/// direct sum of the local models.
pub fn subelliptic_probe(
    problem: &ModelProblem,
    region: &OmegaRegion,
    spec: &GridSpec,
    n_per_axis: usize,
    config: &ProbeConfig,
) -> Result<ProbeResult> {
    // Preconditions: every singular space zero, and the region exponent
    // matching the problem's index.
    let mut indices = Vec::new();
    for point in &problem.points {
        let report =
            crate::singular::singular_space(&hamilton_map(&point.q), &RankTolerance::default())?;
        if report.dim_s() != 0 {
            return Err(Error::SingularSpaceNonzero { dim: report.dim_s() });
        }
        indices.push(report.k0);
    }
    let k0 = match combined_k0(&indices) {
        K0::Reached(k) => k,
        K0::NotReached => unreachable!("checked above"),
    };
    if k0 != region.k0 {
        return Err(Error::InvalidInput(format!(
            "region k0 = {} does not match the problem's index {k0}",
            region.k0
        )));
    }

    let grid = omega_grid(region, spec)?;
    let coarse: Vec<Array2<C64>> = (0..problem.points.len())
        .map(|j| problem.galerkin_operator(j, n_per_axis).map(|g| g.a))
        .collect::<Result<_>>()?;
    let fine: Vec<Array2<C64>> = (0..problem.points.len())
        .map(|j| problem.galerkin_operator(j, 2 * n_per_axis).map(|g| g.a))
        .collect::<Result<_>>()?;

    let points: Vec<ProbePoint> = grid
        .par_iter()
        .map(|&z| -> Result<ProbePoint> {
            let sigma_coarse = sigma_min_over_points(&coarse, z)?;
            let sigma_fine = sigma_min_over_points(&fine, z)?;
            let drift = (sigma_fine - sigma_coarse).abs();
            let converged = drift <= config.doubling_tol * sigma_fine.max(f64::MIN_POSITIVE);
            let bound = region.bound(z);
            Ok(ProbePoint {
                re: z.re,
                im: z.im,
                sigma_min: sigma_fine,
                bound,
                ratio: sigma_fine / bound,
                converged,
            })
        })
        .collect::<Result<_>>()?;

    let converged_points = points.iter().filter(|p| p.converged).count();
    if converged_points == 0 {
        return Err(Error::Unconverged(
            "no grid point passed the truncation doubling gate".into(),
        ));
    }
    let min_ratio = points
        .iter()
        .filter(|p| p.converged)
        .map(|p| p.ratio)
        .fold(f64::INFINITY, f64::min);

    Ok(ProbeResult {
        grid: points,
        min_ratio,
        converged_points,
        h: problem.h,
        n_per_axis,
        symbol_hash: problem_hash(problem),
        sector: sector_check(problem, config),
    })
}

/// One sample of the order-1/h resolvent test.
#[derive(Debug, Clone, Serialize)]
pub struct OrderHPoint {
    pub h: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub sigma_min: f64,
    /// Constant needed for `h ||u|| <= K ||(P - h z) u||` at this sample.
    pub k_needed: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderHResult {
    pub points: Vec<OrderHPoint>,
    /// Largest constant needed over all converged samples.
    pub max_k: f64,
}

/// Probes `sigma_min(P - h z) >= h / K` over spectral parameters
/// `|z| <= radius` at distance at least `1 / c_prime` from the predicted
/// eigenvalue set `{lambda_{j,k} + p1_j}`, for each h in the ladder.
pub fn order_h_probe(
    problem: &ModelProblem,
    radius: f64,
    h_ladder: &[f64],
    n_per_axis: usize,
    c_prime: f64,
    config: &ProbeConfig,
) -> Result<OrderHResult> {
    if c_prime <= 0.0 {
        return Err(Error::InvalidTolerance(c_prime));
    }
    let exclusion = 1.0 / c_prime;
    // The excluded set is h-independent at leading order.
    let base = ModelProblem::new(problem.points.clone(), 1.0, problem.perturbation.clone())?;
    let predictions = low_lying_eigenvalues(&base, radius + exclusion + 1.0, 1e-9)?;
    let excluded: Vec<C64> = predictions
        .entries
        .iter()
        .map(|e| Complex64::new(e.z_re, e.z_im))
        .collect();

    // Deterministic rectangular z-grid over the disc, thinned by the
    // exclusion rule.
    let steps = 9;
    let mut samples = Vec::new();
    for i in 0..steps {
        for j in 0..steps {
            let re = -radius + 2.0 * radius * (i as f64) / (steps - 1) as f64;
            let im = -radius + 2.0 * radius * (j as f64) / (steps - 1) as f64;
            let z = C64::new(re, im);
            if z.norm() > radius {
                continue;
            }
            let dist = excluded
                .iter()
                .map(|&l| (z - l).norm())
                .fold(f64::INFINITY, f64::min);
            if dist >= exclusion {
                samples.push(z);
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput(
            "no admissible spectral parameters after applying the exclusion rule".into(),
        ));
    }

    let mut points = Vec::new();
    for &h in h_ladder {
        let scaled = ModelProblem::new(problem.points.clone(), h, problem.perturbation.clone())?;
        let coarse: Vec<Array2<C64>> = (0..scaled.points.len())
            .map(|j| scaled.galerkin_operator(j, n_per_axis).map(|g| g.a))
            .collect::<Result<_>>()?;
        let fine: Vec<Array2<C64>> = (0..scaled.points.len())
            .map(|j| scaled.galerkin_operator(j, 2 * n_per_axis).map(|g| g.a))
            .collect::<Result<_>>()?;
        let batch: Vec<OrderHPoint> = samples
            .par_iter()
            .map(|&z| -> Result<OrderHPoint> {
                let hz = z * C64::new(h, 0.0);
                let sigma_coarse = sigma_min_over_points(&coarse, hz)?;
                let sigma_fine = sigma_min_over_points(&fine, hz)?;
                let drift = (sigma_fine - sigma_coarse).abs();
                let converged =
                    drift <= config.doubling_tol * sigma_fine.max(f64::MIN_POSITIVE);
                Ok(OrderHPoint {
                    h,
                    z_re: z.re,
                    z_im: z.im,
                    sigma_min: sigma_fine,
                    k_needed: h / sigma_fine.max(f64::MIN_POSITIVE),
                    converged,
                })
            })
            .collect::<Result<_>>()?;
        points.extend(batch);
    }
    let max_k = points
        .iter()
        .filter(|p| p.converged)
        .map(|p| p.k_needed)
        .fold(0.0, f64::max);
    Ok(OrderHResult { points, max_k })
}

/// Rasterizes `-log10(sigma_min(P - z))` over a rectangular window; the
/// heat-map companion of the probes.
pub fn sigma_raster(
    problem: &ModelProblem,
    center: C64,
    half_width: f64,
    pixels: usize,
    n_per_axis: usize,
) -> Result<Vec<f64>> {
    let operators: Vec<Array2<C64>> = (0..problem.points.len())
        .map(|j| problem.galerkin_operator(j, n_per_axis).map(|g| g.a))
        .collect::<Result<_>>()?;
    let coords: Vec<(usize, usize)> = (0..pixels)
        .flat_map(|row| (0..pixels).map(move |col| (row, col)))
        .collect();
    coords
        .par_iter()
        .map(|&(row, col)| {
            // Row 0 is the top of the image (largest imaginary part).
            let x = center.re - half_width + 2.0 * half_width * (col as f64 + 0.5) / pixels as f64;
            let y = center.im + half_width - 2.0 * half_width * (row as f64 + 0.5) / pixels as f64;
            let sigma = sigma_min_over_points(&operators, C64::new(x, y))?;
            Ok(-sigma.max(1e-300).log10())
        })
        .collect()
}

/// Writes a grayscale P5 pixmap: values are linearly rescaled to 0..255
/// over their range.
pub fn write_pgm<W: std::io::Write>(
    values: &[f64],
    width: usize,
    height: usize,
    out: &mut W,
) -> std::io::Result<()> {
    assert_eq!(values.len(), width * height);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    write!(out, "P5\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = values
        .iter()
        .map(|&v| (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8)
        .collect();
    out.write_all(&bytes)
}
