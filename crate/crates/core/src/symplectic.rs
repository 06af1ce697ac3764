//! Complex symplectic linear algebra on `R^{2n}`: quadratic forms, their
//! Hamilton maps and the canonical symplectic form.
//!
//! Coordinates are ordered `X = (x_1..x_n, xi_1..xi_n)` throughout the
//! crate, and the symplectic form is `sigma((x,xi),(y,eta)) = xi.y - x.eta`,
//! realized by the matrix `J = [[0,-I],[I,0]]` acting as `sigma(X,Y) =
//! X^T J Y`. Every module downstream inherits this convention.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_norm, C64};

/// A point of (complexified) phase space, `X = (x_1..x_n, xi_1..xi_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    coords: Array1<C64>,
}

impl PhasePoint {
    pub fn new(coords: Array1<C64>) -> Result<Self> {
        let len = coords.len();
        if len < 2 || len % 2 != 0 {
            return Err(Error::OddPhaseDimension(len));
        }
        Ok(PhasePoint { coords })
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Number of position variables (half the phase dimension).
    pub fn n(&self) -> usize {
        self.coords.len() / 2
    }

    pub fn coords(&self) -> &Array1<C64> {
        &self.coords
    }

    pub fn random_unit<R: Rng>(dim2n: usize, rng: &mut R) -> Self {
        let mut v: Array1<C64> =
            Array1::from_shape_fn(dim2n, |_| C64::new(rng.gen::<f64>() - 0.5, 0.0));
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.mapv_inplace(|z| z / norm);
        }
        PhasePoint { coords: v }
    }
}

/// The canonical symplectic form, held as the matrix `J` with
/// `sigma(X,Y) = X^T J Y`.
#[derive(Debug, Clone)]
pub struct SymplecticForm {
    j: Array2<f64>,
    n: usize,
}

impl SymplecticForm {
    pub fn new(n: usize) -> Self {
        let mut j = Array2::zeros((2 * n, 2 * n));
        for k in 0..n {
            j[[k, n + k]] = -1.0;
            j[[n + k, k]] = 1.0;
        }
        SymplecticForm { j, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.j
    }

    /// `sigma(X,Y) = xi.y - x.eta`.
    pub fn apply(&self, x: &PhasePoint, y: &PhasePoint) -> Result<C64> {
        if x.dim() != 2 * self.n || y.dim() != 2 * self.n {
            return Err(Error::DimensionMismatch { expected: 2 * self.n, got: x.dim().max(y.dim()) });
        }
        let n = self.n;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            acc += x.coords[n + k] * y.coords[k] - x.coords[k] * y.coords[n + k];
        }
        Ok(acc)
    }
}

/// `sigma(X,Y)` for two phase points of equal even dimension.
pub fn symplectic_product(x: &PhasePoint, y: &PhasePoint) -> Result<C64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    SymplecticForm::new(x.n()).apply(x, y)
}

/// A complex-valued quadratic form `q(X) = X^T Q X` on `R^{2n}`, stored by
/// its symmetric coefficient matrix.
#[derive(Debug, Clone)]
pub struct QuadraticSymbol {
    n: usize,
    q: Array2<C64>,
}

/// Relative asymmetry threshold for accepting user-supplied coefficient
/// matrices: quadratic forms only see the symmetric part, and larger
/// asymmetry indicates a construction error upstream.
pub const SYMMETRIZE_REL_TOL: f64 = 1e-10;

impl QuadraticSymbol {
    /// Builds a symbol from a coefficient matrix, symmetrizing away
    /// asymmetry up to `1e-10 * ||Q||` and rejecting anything larger.
    pub fn new(n: usize, q: Array2<C64>) -> Result<Self> {
        if q.nrows() != 2 * n || q.ncols() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: q.nrows().max(q.ncols()) });
        }
        let scale = max_norm(&q);
        let mut asym: f64 = 0.0;
        for i in 0..2 * n {
            for j in (i + 1)..2 * n {
                asym = asym.max((q[[i, j]] - q[[j, i]]).norm());
            }
        }
        if scale > 0.0 && asym > SYMMETRIZE_REL_TOL * scale {
            return Err(Error::NonSymmetric { asymmetry: asym, tolerance: SYMMETRIZE_REL_TOL * scale });
        }
        let sym = (&q + &q.t()) / C64::new(2.0, 0.0);
        Ok(QuadraticSymbol { n, q: sym })
    }

    pub fn zero(n: usize) -> Self {
        QuadraticSymbol { n, q: Array2::zeros((2 * n, 2 * n)) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.q
    }

    pub fn re_matrix(&self) -> Array2<f64> {
        self.q.mapv(|z| z.re)
    }

    pub fn im_matrix(&self) -> Array2<f64> {
        self.q.mapv(|z| z.im)
    }

    /// Max-norm of the coefficient matrix; the reference scale for every
    /// relative tolerance in the crate.
    pub fn norm(&self) -> f64 {
        max_norm(&self.q)
    }

    /// `q(X) = X^T Q X`.
    pub fn eval(&self, x: &PhasePoint) -> Result<C64> {
        self.polarized(x, x)
    }

    /// Polarized form `q(X;Y) = X^T Q Y`; symmetric in its arguments.
    pub fn polarized(&self, x: &PhasePoint, y: &PhasePoint) -> Result<C64> {
        if x.dim() != self.dim() || y.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim().max(y.dim()) });
        }
        let qy = self.q.dot(y.coords());
        Ok(x.coords().iter().zip(qy.iter()).map(|(a, b)| a * b).sum())
    }

    /// Evaluation on a real vector given as a slice (used by the singular
    /// space tests, which work with real bases).
    pub fn eval_real(&self, x: &[f64]) -> Result<C64> {
        let p = PhasePoint::from_real(x)?;
        self.eval(&p)
    }

    /// Scales the symbol by a complex factor.
    pub fn scaled(&self, factor: C64) -> Self {
        QuadraticSymbol { n: self.n, q: self.q.mapv(|z| z * factor) }
    }
}

/// Polarized evaluation `q(X;Y) = X^T Q Y` as a free function.
pub fn polarized_eval(q: &QuadraticSymbol, x: &PhasePoint, y: &PhasePoint) -> Result<C64> {
    q.polarized(x, y)
}

/// JSON wire format for a quadratic symbol: row-major real and imaginary
/// coefficient matrices.
#[derive(Debug, Serialize, Deserialize)]
pub struct QuadraticSymbolJson {
    pub n: usize,
    #[serde(rename = "Q_re")]
    pub q_re: Vec<Vec<f64>>,
    #[serde(rename = "Q_im")]
    pub q_im: Vec<Vec<f64>>,
}

impl QuadraticSymbol {
    pub fn to_json(&self) -> QuadraticSymbolJson {
        let d = self.dim();
        let row = |m: &Array2<C64>, i: usize, re: bool| -> Vec<f64> {
            (0..d).map(|j| if re { m[[i, j]].re } else { m[[i, j]].im }).collect()
        };
        QuadraticSymbolJson {
            n: self.n,
            q_re: (0..d).map(|i| row(&self.q, i, true)).collect(),
            q_im: (0..d).map(|i| row(&self.q, i, false)).collect(),
        }
    }

    pub fn from_json(json: &QuadraticSymbolJson) -> Result<Self> {
        let d = 2 * json.n;
        if json.q_re.len() != d || json.q_im.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: json.q_re.len().max(json.q_im.len()) });
        }
        let mut q = Array2::zeros((d, d));
        for i in 0..d {
            if json.q_re[i].len() != d || json.q_im[i].len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: json.q_re[i].len() });
            }
            for j in 0..d {
                q[[i, j]] = C64::new(json.q_re[i][j], json.q_im[i][j]);
            }
        }
        QuadraticSymbol::new(json.n, q)
    }
}

/// The Hamilton map `F` of a quadratic form, defined by
/// `q(X;Y) = sigma(X, F Y)` and skew-symmetric with respect to `sigma`.
#[derive(Debug, Clone)]
pub struct HamiltonMap {
    n: usize,
    f: Array2<C64>,
}

impl HamiltonMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.f
    }

    /// Hamilton map of `Re q` (entrywise real part of `F`).
    pub fn re_matrix(&self) -> Array2<f64> {
        self.f.mapv(|z| z.re)
    }

    /// Hamilton map of `Im q` (entrywise imaginary part of `F`).
    pub fn im_matrix(&self) -> Array2<f64> {
        self.f.mapv(|z| z.im)
    }

    pub fn norm(&self) -> f64 {
        max_norm(&self.f)
    }

    /// Eigenvalues of `F` (they come in `+/- lambda` pairs).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        crate::linalg::eigenvalues(&self.f)
    }
}

/// Computes the Hamilton map `F = J^{-1} Q = -J Q`.
///
/// Since `J` only permutes and negates rows, the entries of `F` are exact
/// copies of entries of `Q`; the defining identity is then checked on a
/// random sample by `verify_hamilton_identities`.
pub fn hamilton_map(q: &QuadraticSymbol) -> HamiltonMap {
    let n = q.n();
    let d = 2 * n;
    let mut f = Array2::zeros((d, d));
    // -J has the block form [[0, I], [-I, 0]]: row k of F is row n+k of Q,
    // row n+k of F is -(row k of Q).
    for k in 0..n {
        for j in 0..d {
            f[[k, j]] = q.matrix()[[n + k, j]];
            f[[n + k, j]] = -q.matrix()[[k, j]];
        }
    }
    HamiltonMap { n, f }
}

/// Residual report for the defining identities of a Hamilton map, measured
/// on a random sample of unit phase points.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    /// max |sigma(X,FY) - q(X;Y)| over the sample
    pub defining_residual: f64,
    /// max |sigma(X,FY) + sigma(FX,Y)| over the sample
    pub skew_residual: f64,
    /// max-norm of Re F minus the Hamilton map of Re q
    pub re_part_residual: f64,
    /// max-norm of Im F minus the Hamilton map of Im q
    pub im_part_residual: f64,
    /// |tr F|
    pub trace_abs: f64,
    pub samples: usize,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.defining_residual
            .max(self.skew_residual)
            .max(self.re_part_residual)
            .max(self.im_part_residual)
    }
}

/// Checks `sigma(X,FY) = q(X;Y)`, skewness, and the compatibility of
/// `Re F`/`Im F` with the Hamilton maps of `Re q`/`Im q` on `samples`
/// random pairs of unit vectors.
pub fn verify_hamilton_identities<R: Rng>(
    q: &QuadraticSymbol,
    f: &HamiltonMap,
    samples: usize,
    rng: &mut R,
) -> Result<IdentityReport> {
    if q.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: f.dim() });
    }
    let d = q.dim();
    let form = SymplecticForm::new(q.n());
    let mut defining: f64 = 0.0;
    let mut skew: f64 = 0.0;
    for _ in 0..samples {
        let x = PhasePoint::random_unit(d, rng);
        let y = PhasePoint::random_unit(d, rng);
        let fy = PhasePoint::new(f.matrix().dot(y.coords()))?;
        let fx = PhasePoint::new(f.matrix().dot(x.coords()))?;
        let s_xfy = form.apply(&x, &fy)?;
        let s_fxy = form.apply(&fx, &y)?;
        let pol = q.polarized(&x, &y)?;
        defining = defining.max((s_xfy - pol).norm());
        skew = skew.max((s_xfy + s_fxy).norm());
    }
    let re_q = QuadraticSymbol::new(q.n(), q.matrix().mapv(|z| C64::new(z.re, 0.0)))?;
    let im_q = QuadraticSymbol::new(q.n(), q.matrix().mapv(|z| C64::new(z.im, 0.0)))?;
    let re_f = hamilton_map(&re_q);
    let im_f = hamilton_map(&im_q);
    let re_res = max_norm(&(&f.matrix().mapv(|z| C64::new(z.re, 0.0)) - re_f.matrix()));
    let im_res = max_norm(&(&f.matrix().mapv(|z| C64::new(z.im, 0.0)) - im_f.matrix()));
    let trace: C64 = (0..d).map(|i| f.matrix()[[i, i]]).sum();
    Ok(IdentityReport {
        defining_residual: defining,
        skew_residual: skew,
        re_part_residual: re_res,
        im_part_residual: im_res,
        trace_abs: trace.norm(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn j_matrix_identities() {
        for n in 1..=4 {
            let form = SymplecticForm::new(n);
            let j = form.matrix();
            let jt = j.t();
            for i in 0..2 * n {
                for k in 0..2 * n {
                    assert_eq!(j[[i, k]], -jt[[i, k]]);
                }
            }
            let j2 = j.dot(j);
            for i in 0..2 * n {
                for k in 0..2 * n {
                    let expect = if i == k { -1.0 } else { 0.0 };
                    assert_eq!(j2[[i, k]], expect);
                }
            }
        }
    }

    #[test]
    fn canonical_pair_product() {
        // X=(x=1, xi=0), Y=(y=0, eta=1): sigma = xi.y - x.eta = -1.
        let x = PhasePoint::from_real(&[1.0, 0.0]).unwrap();
        let y = PhasePoint::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(symplectic_product(&x, &y).unwrap(), c(-1.0, 0.0));
        assert_eq!(symplectic_product(&x, &x).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn antisymmetry_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = PhasePoint::random_unit(6, &mut rng);
            let y = PhasePoint::random_unit(6, &mut rng);
            let a = symplectic_product(&x, &y).unwrap();
            let b = symplectic_product(&y, &x).unwrap();
            assert!((a + b).norm() < 1e-14);
        }
    }

    #[test]
    fn harmonic_oscillator_hamilton_map() {
        // q = x^2 + xi^2 has F = [[0,1],[-1,0]] with eigenvalues +/- i.
        let q = QuadraticSymbol::new(1, Array2::eye(2).mapv(|x: f64| c(x, 0.0))).unwrap();
        let f = hamilton_map(&q);
        let expect = array![[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]];
        assert_eq!(f.matrix(), &expect);
        let mut eigs = f.eigenvalues().unwrap();
        eigs.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((eigs[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((eigs[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_form_gives_zero_map() {
        let q = QuadraticSymbol::zero(2);
        let f = hamilton_map(&q);
        assert_eq!(max_norm(f.matrix()), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let report = verify_hamilton_identities(&q, &f, 10, &mut rng).unwrap();
        assert_eq!(report.max_residual(), 0.0);
        assert_eq!(report.trace_abs, 0.0);
    }

    #[test]
    fn defining_identity_on_a_basis() {
        // Verify sigma(X, FY) = X^T Q Y on the full standard basis for the
        // harmonic oscillator.
        let q = QuadraticSymbol::new(1, Array2::eye(2).mapv(|x: f64| c(x, 0.0))).unwrap();
        let f = hamilton_map(&q);
        let form = SymplecticForm::new(1);
        for i in 0..2 {
            for j in 0..2 {
                let mut xv = vec![0.0; 2];
                let mut yv = vec![0.0; 2];
                xv[i] = 1.0;
                yv[j] = 1.0;
                let x = PhasePoint::from_real(&xv).unwrap();
                let y = PhasePoint::from_real(&yv).unwrap();
                let fy = PhasePoint::new(f.matrix().dot(y.coords())).unwrap();
                let lhs = form.apply(&x, &fy).unwrap();
                let rhs = q.polarized(&x, &y).unwrap();
                assert!((lhs - rhs).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kfp_real_part_has_rank_two() {
        // q = xi2^2 + x2^2 + i(x2 xi1 - x1 xi2): only the (x2, xi2) block
        // contributes to Re F.
        let q = crate::models::kfp(2).unwrap();
        let f = hamilton_map(&q);
        let re = f.re_matrix();
        let svs = crate::linalg::singular_values(&re).unwrap();
        let rank = svs.iter().filter(|&&s| s > 1e-12).count();
        assert_eq!(rank, 2);
    }

    #[test]
    fn polarization_identity_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = Array2::from_shape_fn((4, 4), |_| {
                c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let q = QuadraticSymbol::new(2, (&m + &m.t()) / c(2.0, 0.0)).unwrap();
            let x = PhasePoint::random_unit(4, &mut rng);
            let y = PhasePoint::random_unit(4, &mut rng);
            let lhs = q.polarized(&x, &y).unwrap();
            let sum = PhasePoint::new(x.coords() + y.coords()).unwrap();
            let rhs = (q.eval(&sum).unwrap() - q.eval(&x).unwrap() - q.eval(&y).unwrap())
                / c(2.0, 0.0);
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn polarized_simple_values() {
        let q = QuadraticSymbol::new(1, Array2::eye(2).mapv(|x: f64| c(x, 0.0))).unwrap();
        let x = PhasePoint::from_real(&[1.0, 0.0]).unwrap();
        let y = PhasePoint::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(q.polarized(&x, &y).unwrap(), c(0.0, 0.0));
        let z = PhasePoint::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(q.polarized(&z, &z).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = array![[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(matches!(
            QuadraticSymbol::new(1, m),
            Err(Error::NonSymmetric { .. })
        ));
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let eps = 1e-13;
        let m = array![[c(1.0, 0.0), c(0.5 + eps, 0.0)], [c(0.5, 0.0), c(1.0, 0.0)]];
        let q = QuadraticSymbol::new(1, m).unwrap();
        assert!((q.matrix()[[0, 1]] - q.matrix()[[1, 0]]).norm() == 0.0);
    }

    #[test]
    fn identity_report_detects_injected_fault() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = crate::models::kfp(2).unwrap();
        let mut f = hamilton_map(&q);
        let clean = verify_hamilton_identities(&q, &f, 50, &mut rng).unwrap();
        assert!(clean.max_residual() <= 1e-12 * q.norm().max(1.0));
        assert!(clean.trace_abs <= 1e-12 * f.norm().max(1.0));
        // Perturb one entry by 1e-3 and expect the residual to land on the
        // 1e-3 scale.
        f.f[[0, 1]] += c(1e-3, 0.0);
        let dirty = verify_hamilton_identities(&q, &f, 50, &mut rng).unwrap();
        assert!(dirty.max_residual() > 1e-5);
        assert!(dirty.max_residual() < 1e-1);
    }

    #[test]
    fn eigenvalue_pairing_under_negation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let m = Array2::from_shape_fn((6, 6), |_| {
                c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let q = QuadraticSymbol::new(3, (&m + &m.t()) / c(2.0, 0.0)).unwrap();
            let f = hamilton_map(&q);
            let eigs = f.eigenvalues().unwrap();
            // For each eigenvalue, -lambda must also be present.
            for &l in &eigs {
                let closest = eigs.iter().map(|&m| (m + l).norm()).fold(f64::INFINITY, f64::min);
                assert!(closest < 1e-8 * f.norm().max(1.0), "unpaired eigenvalue {l}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let q = crate::models::kfp(2).unwrap();
        let json = q.to_json();
        let text = serde_json::to_string(&json).unwrap();
        let parsed: QuadraticSymbolJson = serde_json::from_str(&text).unwrap();
        let back = QuadraticSymbol::from_json(&parsed).unwrap();
        assert!(max_norm(&(q.matrix() - back.matrix())) < 1e-15);
    }
}
