//! The exact spectrum of an elliptic-on-S quadratic operator: eigenvalues
//! of the Hamilton map are selected by the half-plane/ray rule, and the
//! spectrum is the lattice `sum_g (r_g + 2 k_g) mu_g` over nonnegative
//! integer labels. Also computes leading-order low-lying eigenvalue
//! predictions `h (lambda_{j,k} + p1(X_j))` for multi-well model problems.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::poly::PolynomialSymbol;
use crate::singular::{singular_space, symplectic_splitting, RankTolerance, SymplecticSplitting};
use crate::symplectic::{hamilton_map, QuadraticSymbol};

/// One selected Hamilton-map eigenvalue: `mu = -i lambda` with the
/// dimension `r` of the generalized eigenspace of `lambda`.
#[derive(Debug, Clone, Serialize)]
pub struct LatticeGenerator {
    pub mu_re: f64,
    pub mu_im: f64,
    pub r: usize,
    /// True when selected through the `Sigma(q|_S) \ {0}` ray branch
    /// rather than the open right half-plane.
    pub on_ray: bool,
}

impl LatticeGenerator {
    pub fn mu(&self) -> C64 {
        C64::new(self.mu_re, self.mu_im)
    }
}

/// The generator list describing the spectrum of `q^w(x, D_x)`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralLattice {
    pub generators: Vec<LatticeGenerator>,
    pub n: usize,
    /// Sum of the generator multiplicities; equals `n` when the selection
    /// is consistent (reported, not enforced).
    pub r_total: usize,
}

/// Eigenvalue clustering and boundary tolerances for generator selection.
#[derive(Debug, Clone, Copy)]
pub struct SelectionConfig {
    /// Eigenvalues of `F` within `merge_rel * ||F||` are one cluster.
    /// Defective pairs (Jordan blocks of size two, as in the
    /// Kramers-Fokker-Planck model) split by about sqrt(eps) ~ 1.5e-8
    /// under a dense eigensolve, so the default radius sits well above
    /// that; the cluster mean cancels the split to first order.
    pub merge_rel: f64,
    /// Half-width of the numerical boundary strip around `Re(-i lambda) = 0`.
    pub boundary_rel: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig { merge_rel: 1e-6, boundary_rel: 1e-8 }
    }
}

/// Selects the lattice generators of `q` from its Hamilton-map spectrum.
///
/// Eigenvalues `lambda` with `Re(-i lambda) > 0` are always selected; the
/// boundary ones are admitted only when `-i lambda` lies on the ray
/// `i epsilon_0 (0, infinity)` certified by the splitting (that ray is the
/// closure of `q(S)` minus the origin for a definite `q2`).
pub fn lattice_generators(
    q: &QuadraticSymbol,
    splitting: &SymplecticSplitting,
    config: &SelectionConfig,
) -> Result<SpectralLattice> {
    let f = hamilton_map(q);
    let scale = f.norm().max(f64::MIN_POSITIVE);
    let eigs = f.eigenvalues()?;
    let clusters = linalg::cluster(&eigs, config.merge_rel * scale);
    let boundary = config.boundary_rel * scale;

    let mut generators = Vec::new();
    for (lambda, mult) in clusters {
        let mu = C64::new(lambda.im, -lambda.re); // -i lambda
        if mu.re > boundary {
            generators.push(LatticeGenerator { mu_re: mu.re, mu_im: mu.im, r: mult, on_ray: false });
        } else if mu.re >= -boundary {
            // Boundary strip: the imaginary axis.
            if mu.norm() <= boundary {
                return Err(Error::DegenerateGenerator { modulus: mu.norm() });
            }
            match splitting.epsilon0 {
                Some(eps) => {
                    if mu.im * (eps as f64) > 0.0 {
                        generators.push(LatticeGenerator {
                            mu_re: mu.re,
                            mu_im: mu.im,
                            r: mult,
                            on_ray: true,
                        });
                    }
                    // The opposite sign is the partner -lambda: skip.
                }
                None => {
                    // S = {0} certifies no ray; a boundary eigenvalue is
                    // numerically unresolvable.
                    let with = generators.len() + 1;
                    let without = generators.len();
                    return Err(Error::AmbiguousBoundary {
                        re: mu.re,
                        im: mu.im,
                        with,
                        without,
                    });
                }
            }
        }
        // mu.re < -boundary: partner of a selected eigenvalue.
    }

    generators.sort_by(|a, b| {
        (a.mu_re, a.mu_im)
            .partial_cmp(&(b.mu_re, b.mu_im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let r_total = generators.iter().map(|g| g.r).sum();
    Ok(SpectralLattice { generators, n: q.n(), r_total })
}

/// Convenience path: singular space, splitting and generator selection in
/// one call.
pub fn lattice_of(q: &QuadraticSymbol) -> Result<SpectralLattice> {
    let f = hamilton_map(q);
    let report = singular_space(&f, &RankTolerance::default())?;
    if !report.elliptic_on_s {
        return Err(Error::NotEllipticOnS { margin: report.ellipticity_margin });
    }
    let split = symplectic_splitting(q, &report)?;
    lattice_generators(q, &split, &SelectionConfig::default())
}

/// One enumerated spectrum point: the value and its label multi-index
/// (one `k_g` per generator, in generator order).
#[derive(Debug, Clone, Serialize)]
pub struct LatticePoint {
    pub re: f64,
    pub im: f64,
    pub label: Vec<usize>,
}

impl LatticePoint {
    pub fn value(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Default cap on the number of enumerated labels.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// Enumerates all spectrum values `sum_g (r_g + 2 k_g) mu_g` with modulus
/// `< radius`, sorted by modulus. Termination relies on every generator
/// modulus being bounded away from zero, which generator selection
/// enforces.
pub fn enumerate_spectrum(
    lattice: &SpectralLattice,
    radius: f64,
    cap: usize,
) -> Result<Vec<LatticePoint>> {
    if radius <= 0.0 {
        return Err(Error::InvalidInput(format!("radius must be positive, got {radius}")));
    }
    let gens = &lattice.generators;
    if gens.is_empty() {
        return Ok(Vec::new());
    }
    for g in gens {
        if g.mu().norm() <= f64::EPSILON {
            return Err(Error::DegenerateGenerator { modulus: g.mu().norm() });
        }
    }

    // Per-axis label caps. Right-half-plane generators are bounded through
    // the real part, which no other generator can cancel below zero; ray
    // generators are bounded through the imaginary part once the bounded
    // right-plane contribution is accounted for (all ray imaginary parts
    // share the sign of epsilon_0).
    let mut caps = vec![0usize; gens.len()];
    let mut right_im_budget = 0.0;
    for (i, g) in gens.iter().enumerate() {
        if !g.on_ray {
            let re = g.mu_re.max(f64::MIN_POSITIVE);
            let k_max = ((radius / re - g.r as f64) / 2.0).floor().max(0.0) as usize + 1;
            caps[i] = k_max;
            right_im_budget += (g.r as f64 + 2.0 * k_max as f64) * g.mu_im.abs();
        }
    }
    for (i, g) in gens.iter().enumerate() {
        if g.on_ray {
            let im = g.mu_im.abs().max(f64::MIN_POSITIVE);
            caps[i] = (((radius + right_im_budget) / im - g.r as f64) / 2.0)
                .floor()
                .max(0.0) as usize
                + 1;
        }
    }

    let box_size: usize = caps
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c + 1))
        .ok_or(Error::EnumerationOverflow { cap })?;
    if box_size > cap {
        return Err(Error::EnumerationOverflow { cap });
    }

    let mut out = Vec::new();
    let mut label = vec![0usize; gens.len()];
    'enumerate: loop {
        let mut value = C64::new(0.0, 0.0);
        for (g, &k) in gens.iter().zip(label.iter()) {
            value += g.mu() * C64::new(g.r as f64 + 2.0 * k as f64, 0.0);
        }
        if value.norm() < radius {
            out.push(LatticePoint { re: value.re, im: value.im, label: label.clone() });
        }
        let mut ax = gens.len() - 1;
        loop {
            label[ax] += 1;
            if label[ax] <= caps[ax] {
                continue 'enumerate;
            }
            label[ax] = 0;
            if ax == 0 {
                break 'enumerate;
            }
            ax -= 1;
        }
    }

    out.sort_by(|a, b| {
        let ka = (a.value().norm(), a.re, a.im, a.label.clone());
        let kb = (b.value().norm(), b.re, b.im, b.label.clone());
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// A doubly-characteristic model problem: critical points with quadratic
/// parts and subprincipal values, a semiclassical parameter, and an
/// optional polynomial perturbation shared by all points.
#[derive(Debug, Clone)]
pub struct ModelPoint {
    /// Location `X_j` in phase space (bookkeeping; the local model only
    /// depends on the quadratic part).
    pub location: Vec<f64>,
    pub q: QuadraticSymbol,
    pub p1: C64,
}

#[derive(Debug, Clone)]
pub struct ModelProblem {
    pub points: Vec<ModelPoint>,
    pub h: f64,
    pub perturbation: Option<PolynomialSymbol>,
}

impl ModelProblem {
    pub fn new(
        points: Vec<ModelPoint>,
        h: f64,
        perturbation: Option<PolynomialSymbol>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("a model problem needs at least one point".into()));
        }
        if h <= 0.0 {
            return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
        }
        let dim = 2 * points[0].q.n();
        for (j, p) in points.iter().enumerate() {
            if p.location.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.location.len() });
            }
            // Re Q >= 0 up to rounding.
            let eigs = linalg::symmetric_eigenvalues(&p.q.re_matrix())?;
            let scale = p.q.norm().max(1.0);
            if eigs.first().copied().unwrap_or(0.0) < -1e-10 * scale {
                return Err(Error::InvalidInput(format!(
                    "point {j}: Re q has a negative eigenvalue {:.3e}",
                    eigs[0]
                )));
            }
        }
        for a in 0..points.len() {
            for b in (a + 1)..points.len() {
                let dist: f64 = points[a]
                    .location
                    .iter()
                    .zip(&points[b].location)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                if dist < 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "points {a} and {b} coincide"
                    )));
                }
            }
        }
        if let Some(pert) = &perturbation {
            if pert.degree() > crate::hermite::MAX_DEGREE {
                return Err(Error::DegreeTooHigh {
                    degree: pert.degree(),
                    max: crate::hermite::MAX_DEGREE,
                });
            }
            if pert.n() != points[0].q.n() {
                return Err(Error::DimensionMismatch { expected: points[0].q.n(), got: pert.n() });
            }
        }
        Ok(ModelProblem { points, h, perturbation })
    }

    /// Galerkin matrix of the local model operator at point `j`:
    /// the `h`-quantization of `q_j + perturbation` plus `h p1_j`.
    pub fn galerkin_operator(
        &self,
        j: usize,
        n_per_axis: usize,
    ) -> Result<crate::hermite::GalerkinMatrix> {
        let point = self
            .points
            .get(j)
            .ok_or_else(|| Error::InvalidInput(format!("no point with index {j}")))?;
        let mut sym = PolynomialSymbol::from_quadratic(&point.q);
        if let Some(pert) = &self.perturbation {
            sym = sym.add(pert)?;
        }
        let mut galerkin = crate::hermite::assemble(&sym, n_per_axis, self.h)?;
        galerkin.add_scalar(Complex64::new(self.h, 0.0) * point.p1);
        Ok(galerkin)
    }
}

/// One leading-order eigenvalue prediction `z = h (lambda + p1)`.
#[derive(Debug, Clone, Serialize)]
pub struct LowLyingEigenvalue {
    pub z_re: f64,
    pub z_im: f64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// Accumulated generalized-eigenspace dimension of `lambda` for
    /// `q_j^w`.
    pub n_jk: usize,
    /// Index of the critical point the prediction belongs to.
    pub point: usize,
    /// True when several distinct labels produced the same lattice value.
    pub label_collision: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowLyingReport {
    pub entries: Vec<LowLyingEigenvalue>,
    /// Values within tolerance of the disc boundary `|lambda + p1| = C`;
    /// the asymptotics are only clean when the boundary is avoided.
    pub boundary_warnings: Vec<(usize, f64, f64)>,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of tensor labels behind one cluster label: distributing `k`
/// quanta over a cluster of size `r` gives `C(k + r - 1, r - 1)` states.
fn label_dimension(label: &[usize], gens: &[LatticeGenerator]) -> usize {
    label
        .iter()
        .zip(gens)
        .map(|(&k, g)| binomial(k + g.r - 1, g.r - 1))
        .product()
}

/// Leading-order predictions for all eigenvalues of the model problem in
/// the disc `|lambda + p1| < radius`, with generalized-eigenspace
/// dimensions. Higher-order corrections are out of scope.
pub fn low_lying_eigenvalues(
    problem: &ModelProblem,
    radius: f64,
    boundary_tol: f64,
) -> Result<LowLyingReport> {
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for (j, point) in problem.points.iter().enumerate() {
        let lattice = lattice_of(&point.q)?;
        // Enumerate far enough that every shifted value in the disc is
        // covered.
        let enum_radius = radius + point.p1.norm() + 1e-9;
        let points = enumerate_spectrum(&lattice, enum_radius, ENUMERATION_CAP)?;

        // Group labels by value (within a merge radius) to accumulate
        // eigenspace dimensions.
        let mut grouped: Vec<(C64, usize, usize)> = Vec::new(); // value, dim, labels
        let merge = 1e-9 * (1.0 + radius);
        for p in &points {
            let dim = label_dimension(&p.label, &lattice.generators);
            if let Some(slot) = grouped.iter_mut().find(|(v, _, _)| (*v - p.value()).norm() <= merge) {
                slot.1 += dim;
                slot.2 += 1;
            } else {
                grouped.push((p.value(), dim, 1));
            }
        }

        for (lambda, n_jk, label_count) in grouped {
            let shifted = lambda + point.p1;
            if (shifted.norm() - radius).abs() <= boundary_tol {
                warnings.push((j, shifted.re, shifted.im));
            }
            if shifted.norm() < radius {
                let z = shifted * C64::new(problem.h, 0.0);
                entries.push(LowLyingEigenvalue {
                    z_re: z.re,
                    z_im: z.im,
                    lambda_re: lambda.re,
                    lambda_im: lambda.im,
                    n_jk,
                    point: j,
                    label_collision: label_count > 1,
                });
            }
        }
    }
    entries.sort_by(|a, b| {
        let ka = (C64::new(a.z_re, a.z_im).norm(), a.z_re, a.z_im, a.point);
        let kb = (C64::new(b.z_re, b.z_im).norm(), b.z_re, b.z_im, b.point);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(LowLyingReport { entries, boundary_warnings: warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn harmonic_lattice_is_the_odd_integers() {
        let q = models::harmonic(1).unwrap();
        let lattice = lattice_of(&q).unwrap();
        assert_eq!(lattice.generators.len(), 1);
        let g = &lattice.generators[0];
        assert!((g.mu() - c(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(g.r, 1);
        assert!(!g.on_ray);
        assert_eq!(lattice.r_total, 1);

        let points = enumerate_spectrum(&lattice, 6.0, ENUMERATION_CAP).unwrap();
        let values: Vec<f64> = points.iter().map(|p| p.re).collect();
        assert_eq!(values.len(), 3);
        for (v, expect) in values.iter().zip([1.0, 3.0, 5.0]) {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn imaginary_oscillator_selects_the_ray() {
        let q = models::imaginary_oscillator().unwrap();
        let lattice = lattice_of(&q).unwrap();
        assert_eq!(lattice.generators.len(), 1);
        let g = &lattice.generators[0];
        assert!(g.on_ray);
        assert!((g.mu() - c(0.0, 1.0)).norm() < 1e-12);
        assert_eq!(lattice.r_total, 1);

        let points = enumerate_spectrum(&lattice, 6.5, ENUMERATION_CAP).unwrap();
        let expected = [1.0, 3.0, 5.0];
        assert_eq!(points.len(), 3);
        for (p, e) in points.iter().zip(expected) {
            assert!((p.value() - c(0.0, e)).norm() < 1e-12);
        }
    }

    #[test]
    fn davies_lattice_on_the_diagonal_ray() {
        let q = models::davies().unwrap();
        let lattice = lattice_of(&q).unwrap();
        assert_eq!(lattice.generators.len(), 1);
        let g = &lattice.generators[0];
        let expect = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        assert!((g.mu() - expect).norm() < 1e-12, "mu = {}", g.mu());
        assert_eq!(g.r, 1);
    }

    #[test]
    fn kfp_lattice_is_the_positive_integers() {
        // The Hamilton map has eigenvalues +/- i/2 with two-dimensional
        // generalized eigenspaces, so the spectrum is (2 + 2k)/2 = 1 + k.
        let q = models::kfp(2).unwrap();
        let lattice = lattice_of(&q).unwrap();
        assert_eq!(lattice.generators.len(), 1);
        let g = &lattice.generators[0];
        assert!((g.mu() - c(0.5, 0.0)).norm() < 1e-10, "mu = {}", g.mu());
        assert_eq!(g.r, 2);
        assert_eq!(lattice.r_total, 2);

        let points = enumerate_spectrum(&lattice, 4.5, ENUMERATION_CAP).unwrap();
        let values: Vec<f64> = points.iter().map(|p| p.re).collect();
        for (v, expect) in values.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((v - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn two_generator_enumeration() {
        let lattice = SpectralLattice {
            generators: vec![
                LatticeGenerator { mu_re: 1.0, mu_im: 0.0, r: 1, on_ray: false },
                LatticeGenerator { mu_re: 0.0, mu_im: 1.0, r: 1, on_ray: true },
            ],
            n: 2,
            r_total: 2,
        };
        // |1+3i| = |3+i| = sqrt(10) ~ 3.162, so the disc must clear that.
        let points = enumerate_spectrum(&lattice, 3.2, ENUMERATION_CAP).unwrap();
        let values: Vec<C64> = points.iter().map(|p| p.value()).collect();
        assert_eq!(values.len(), 3);
        assert!((values[0] - c(1.0, 1.0)).norm() < 1e-12);
        // 3 + i and 1 + 3i tie in modulus; deterministic order sorts by
        // real part after modulus.
        assert!((values[1] - c(1.0, 3.0)).norm() < 1e-12);
        assert!((values[2] - c(3.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn enumeration_is_reorder_invariant() {
        let a = SpectralLattice {
            generators: vec![
                LatticeGenerator { mu_re: 1.0, mu_im: -0.3, r: 1, on_ray: false },
                LatticeGenerator { mu_re: 0.7, mu_im: 0.9, r: 2, on_ray: false },
            ],
            n: 3,
            r_total: 3,
        };
        let b = SpectralLattice {
            generators: vec![a.generators[1].clone(), a.generators[0].clone()],
            n: 3,
            r_total: 3,
        };
        let pa = enumerate_spectrum(&a, 9.0, ENUMERATION_CAP).unwrap();
        let pb = enumerate_spectrum(&b, 9.0, ENUMERATION_CAP).unwrap();
        assert_eq!(pa.len(), pb.len());
        for (x, y) in pa.iter().zip(pb.iter()) {
            assert!((x.value() - y.value()).norm() < 1e-12);
        }
    }

    #[test]
    fn enumeration_cap_overflows_loudly() {
        let lattice = SpectralLattice {
            generators: vec![LatticeGenerator { mu_re: 1e-4, mu_im: 0.0, r: 1, on_ray: false }],
            n: 1,
            r_total: 1,
        };
        assert!(matches!(
            enumerate_spectrum(&lattice, 10.0, 1000),
            Err(Error::EnumerationOverflow { .. })
        ));
    }

    #[test]
    fn pairing_is_exclusive() {
        // For each selected generator, its negation is not selected.
        for q in [
            models::harmonic(2).unwrap(),
            models::davies().unwrap(),
            models::kfp(2).unwrap(),
            models::imaginary_oscillator().unwrap(),
        ] {
            let lattice = lattice_of(&q).unwrap();
            for g in &lattice.generators {
                for g2 in &lattice.generators {
                    assert!(
                        (g.mu() + g2.mu()).norm() > 1e-10,
                        "generators {} and {} are negations",
                        g.mu(),
                        g2.mu()
                    );
                }
            }
            assert_eq!(lattice.r_total, q.n(), "r_total for n={}", q.n());
        }
    }

    #[test]
    fn rejects_non_elliptic_forms() {
        let q = crate::parse::parse_quadratic("i*x1*xi1", 1).unwrap();
        assert!(matches!(lattice_of(&q), Err(Error::NotEllipticOnS { .. })));
    }

    #[test]
    fn harmonic_low_lying_predictions() {
        let q = models::harmonic(1).unwrap();
        let problem = ModelProblem::new(
            vec![ModelPoint { location: vec![0.0, 0.0], q, p1: c(0.0, 0.0) }],
            0.01,
            None,
        )
        .unwrap();
        let report = low_lying_eigenvalues(&problem, 6.0, 1e-9).unwrap();
        assert_eq!(report.entries.len(), 3);
        for (e, expect) in report.entries.iter().zip([0.01, 0.03, 0.05]) {
            assert!((e.z_re - expect).abs() < 1e-12);
            assert_eq!(e.n_jk, 1);
            assert!(!e.label_collision);
        }
        assert!(report.boundary_warnings.is_empty());
    }

    #[test]
    fn davies_low_lying_with_shift() {
        let q = models::davies().unwrap();
        let problem = ModelProblem::new(
            vec![ModelPoint { location: vec![0.0, 0.0], q, p1: c(2.0, 0.0) }],
            0.1,
            None,
        )
        .unwrap();
        // |e^{i pi/4} + 2| ~ 2.80 and |3 e^{i pi/4} + 2| ~ 4.63.
        let report = low_lying_eigenvalues(&problem, 5.0, 1e-9).unwrap();
        let ray = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let expect0 = (ray + c(2.0, 0.0)) * c(0.1, 0.0);
        let expect1 = (ray * c(3.0, 0.0) + c(2.0, 0.0)) * c(0.1, 0.0);
        assert_eq!(report.entries.len(), 2);
        assert!((c(report.entries[0].z_re, report.entries[0].z_im) - expect0).norm() < 1e-10);
        assert!((c(report.entries[1].z_re, report.entries[1].z_im) - expect1).norm() < 1e-10);
    }

    #[test]
    fn two_identical_points_double_the_predictions() {
        let q = models::harmonic(1).unwrap();
        let problem = ModelProblem::new(
            vec![
                ModelPoint { location: vec![0.0, 0.0], q: q.clone(), p1: c(0.0, 0.0) },
                ModelPoint { location: vec![1.0, 0.0], q, p1: c(0.0, 0.0) },
            ],
            0.05,
            None,
        )
        .unwrap();
        let report = low_lying_eigenvalues(&problem, 4.0, 1e-9).unwrap();
        // {1, 3} per point, so four entries, one per point each.
        assert_eq!(report.entries.len(), 4);
        let from_point0 = report.entries.iter().filter(|e| e.point == 0).count();
        let from_point1 = report.entries.iter().filter(|e| e.point == 1).count();
        assert_eq!(from_point0, 2);
        assert_eq!(from_point1, 2);
    }

    #[test]
    fn kfp_multiplicities_grow_linearly() {
        // Eigenvalue m = 1 + k of the KFP model has generalized eigenspace
        // dimension C(k + 1, 1) = k + 1.
        let q = models::kfp(2).unwrap();
        let problem = ModelProblem::new(
            vec![ModelPoint { location: vec![0.0; 4], q, p1: c(0.0, 0.0) }],
            1.0,
            None,
        )
        .unwrap();
        let report = low_lying_eigenvalues(&problem, 4.5, 1e-9).unwrap();
        assert_eq!(report.entries.len(), 4);
        for (e, (value, dim)) in report.entries.iter().zip([(1.0, 1), (2.0, 2), (3.0, 3), (4.0, 4)])
        {
            assert!((e.lambda_re - value).abs() < 1e-9);
            assert_eq!(e.n_jk, dim, "dimension at lambda = {value}");
        }
    }

    #[test]
    fn model_problem_validation() {
        let q = models::harmonic(1).unwrap();
        // Coinciding points rejected.
        assert!(ModelProblem::new(
            vec![
                ModelPoint { location: vec![0.0, 0.0], q: q.clone(), p1: c(0.0, 0.0) },
                ModelPoint { location: vec![0.0, 0.0], q: q.clone(), p1: c(0.0, 0.0) },
            ],
            0.1,
            None,
        )
        .is_err());
        // Negative real part rejected.
        let bad = crate::parse::parse_quadratic("-1*x1^2 + xi1^2", 1).unwrap();
        assert!(ModelProblem::new(
            vec![ModelPoint { location: vec![0.0, 0.0], q: bad, p1: c(0.0, 0.0) }],
            0.1,
            None,
        )
        .is_err());
        // Bad h rejected.
        assert!(ModelProblem::new(
            vec![ModelPoint { location: vec![0.0, 0.0], q, p1: c(0.0, 0.0) }],
            0.0,
            None,
        )
        .is_err());
    }
}
