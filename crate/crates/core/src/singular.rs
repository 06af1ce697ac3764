//! The singular space `S` of a complex quadratic form, the subelliptic
//! index `k0`, ellipticity of the restriction `q|_S`, and the symplectic
//! splitting of phase space along `S`.
//!
//! `S` is the real intersection of the kernels `Ker[Re F (Im F)^j]`,
//! `j = 0..2n-1`. Kernels are computed by stacking the matrices and taking
//! one rank-revealing SVD per truncation level, rather than intersecting
//! subspaces pairwise.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::Solve;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, max_norm_real, C64};
use crate::symplectic::{hamilton_map, HamiltonMap, QuadraticSymbol, SymplecticForm};

/// Rank decision parameters for the kernel stacks: singular values below
/// `(2n) * eps_machine * sigma_max * user_factor` count as zero.
#[derive(Debug, Clone, Copy)]
pub struct RankTolerance {
    pub user_factor: f64,
}

impl Default for RankTolerance {
    fn default() -> Self {
        RankTolerance { user_factor: 1e3 }
    }
}

impl RankTolerance {
    pub fn new(user_factor: f64) -> Result<Self> {
        if user_factor <= 0.0 {
            return Err(Error::InvalidTolerance(user_factor));
        }
        Ok(RankTolerance { user_factor })
    }

    fn absolute(&self, dim: usize, sigma_max: f64) -> f64 {
        dim as f64 * f64::EPSILON * sigma_max * self.user_factor
    }
}

/// Subelliptic index: the smallest `k` with the partial kernel intersection
/// reduced to zero, or `NotReached` when `S` itself is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum K0 {
    Reached(usize),
    NotReached,
}

impl K0 {
    pub fn as_option(&self) -> Option<usize> {
        match self {
            K0::Reached(k) => Some(*k),
            K0::NotReached => None,
        }
    }
}

impl std::fmt::Display for K0 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            K0::Reached(k) => write!(f, "{k}"),
            K0::NotReached => write!(f, "not-reached"),
        }
    }
}

/// Problem-level index: the maximum of the per-point indices; `NotReached`
/// if any point has a nonzero singular space.
pub fn combined_k0(indices: &[K0]) -> K0 {
    let mut max = 0;
    for k in indices {
        match k {
            K0::Reached(v) => max = max.max(*v),
            K0::NotReached => return K0::NotReached,
        }
    }
    K0::Reached(max)
}

/// Result of the singular-space computation.
#[derive(Debug, Clone)]
pub struct SingularSpaceReport {
    /// Orthonormal real basis of `S`, one column per dimension.
    pub s_basis: Array2<f64>,
    /// `dim(cap_{j<=k} Ker[Re F (Im F)^j])` for `k = 0..2n-1`.
    pub partial_dims: Vec<usize>,
    pub k0: K0,
    pub elliptic_on_s: bool,
    /// Certified definiteness margin of the pencil sweep (negative when no
    /// direction certifies ellipticity).
    pub ellipticity_margin: f64,
}

impl SingularSpaceReport {
    pub fn dim_s(&self) -> usize {
        self.s_basis.ncols()
    }
}

/// Number of directions sampled in the ellipticity pencil sweep.
#[derive(Debug, Clone, Copy)]
pub struct EllipticitySweep {
    pub theta_samples: usize,
    pub rel_tol: f64,
}

impl Default for EllipticitySweep {
    fn default() -> Self {
        EllipticitySweep { theta_samples: 360, rel_tol: 1e-10 }
    }
}

fn block_matrices(f: &HamiltonMap) -> (Vec<Array2<f64>>, usize) {
    let d = f.dim();
    let re_f = f.re_matrix();
    let im_f = f.im_matrix();
    let mut blocks = Vec::with_capacity(d);
    let mut power = Array2::<f64>::eye(d);
    for j in 0..d {
        if j > 0 {
            power = power.dot(&im_f);
        }
        let mut block = re_f.dot(&power);
        // Normalize each block so one rank tolerance serves every
        // truncation level; zero blocks stay zero.
        let norm = max_norm_real(&block);
        if norm > 0.0 {
            block.mapv_inplace(|x| x / norm);
        }
        blocks.push(block);
    }
    (blocks, d)
}

fn stack_rows(blocks: &[Array2<f64>], upto: usize, dim: usize) -> Array2<f64> {
    let mut stacked = Array2::zeros(((upto + 1) * dim, dim));
    for (j, block) in blocks.iter().take(upto + 1).enumerate() {
        stacked.slice_mut(s![j * dim..(j + 1) * dim, ..]).assign(block);
    }
    stacked
}

/// Computes the singular space of a Hamilton map, together with the
/// partial kernel dimensions, the index `k0`, and the ellipticity verdict
/// for the restriction of the underlying form to `S`.
pub fn singular_space(f: &HamiltonMap, tol: &RankTolerance) -> Result<SingularSpaceReport> {
    let dim = f.dim();
    let (blocks, _) = block_matrices(f);

    let mut partial_dims = Vec::with_capacity(dim);
    let mut s_basis = Array2::eye(dim);
    for k in 0..dim {
        let stack = stack_rows(&blocks, k, dim);
        let smax = linalg::singular_values(&stack)?
            .first()
            .copied()
            .unwrap_or(0.0);
        let kernel = linalg::null_space(&stack, tol.absolute(dim, smax))?;
        let mut d_k = kernel.ncols();
        // Ranks of nested stacks are monotone; clamp any sub-ulp
        // inconsistency in the numerical rank decisions.
        if let Some(&prev) = partial_dims.last() {
            d_k = d_k.min(prev);
        }
        partial_dims.push(d_k);
        if k == dim - 1 {
            s_basis = kernel;
        }
    }
    let d = partial_dims[dim - 1];
    if s_basis.ncols() > d {
        s_basis = s_basis.slice(s![.., ..d]).to_owned();
    }

    let k0 = if d == 0 {
        K0::Reached(
            partial_dims
                .iter()
                .position(|&v| v == 0)
                .expect("d == 0 implies some partial dim vanishes"),
        )
    } else {
        K0::NotReached
    };

    // Recover the form from its Hamilton map (Q = J F) for the
    // ellipticity decision.
    let form = SymplecticForm::new(f.n());
    let j_complex = form.matrix().mapv(|x| C64::new(x, 0.0));
    let q_matrix = j_complex.dot(f.matrix());
    let q = QuadraticSymbol::new(f.n(), q_matrix)?;
    let (elliptic, margin) = elliptic_on_s_with_basis(&q, &s_basis, &EllipticitySweep::default())?;

    Ok(SingularSpaceReport { s_basis, partial_dims, k0, elliptic_on_s: elliptic, ellipticity_margin: margin })
}

/// The subelliptic index of a single form.
pub fn k0_index(f: &HamiltonMap, tol: &RankTolerance) -> Result<K0> {
    Ok(singular_space(f, tol)?.k0)
}

fn restricted_matrix(q: &QuadraticSymbol, basis: &Array2<f64>) -> Array2<C64> {
    let b = basis.mapv(|x| C64::new(x, 0.0));
    b.t().dot(q.matrix()).dot(&b)
}

fn elliptic_on_s_with_basis(
    q: &QuadraticSymbol,
    s_basis: &Array2<f64>,
    sweep: &EllipticitySweep,
) -> Result<(bool, f64)> {
    let d = s_basis.ncols();
    if d == 0 {
        return Ok((true, f64::INFINITY));
    }
    let m = restricted_matrix(q, s_basis);
    let re: Array2<f64> = m.mapv(|z| z.re);
    let im: Array2<f64> = m.mapv(|z| z.im);
    let re_sym = (&re + &re.t()) / 2.0;
    let im_sym = (&im + &im.t()) / 2.0;
    let scale = max_norm_real(&re_sym).max(max_norm_real(&im_sym));
    if scale == 0.0 {
        // q vanishes identically on S: every vector of S is a zero.
        return Ok((false, 0.0));
    }

    // Fast negative: a common null vector of Re M and Im M is a real zero
    // of the restricted form.
    let mut stacked = Array2::zeros((2 * d, d));
    stacked.slice_mut(s![..d, ..]).assign(&re_sym);
    stacked.slice_mut(s![d.., ..]).assign(&im_sym);
    let smax = linalg::singular_values(&stacked)?.first().copied().unwrap_or(0.0);
    let common = linalg::null_space(&stacked, 2.0 * d as f64 * f64::EPSILON * smax * 1e3)?;
    if common.ncols() > 0 {
        return Ok((false, 0.0));
    }

    // Pencil sweep: if cos(t) Re M + sin(t) Im M is positive definite for
    // some direction t, then u^T M u is bounded away from zero on the unit
    // sphere of S.
    let mut best = f64::NEG_INFINITY;
    for k in 0..sweep.theta_samples {
        let theta = 2.0 * std::f64::consts::PI * (k as f64) / (sweep.theta_samples as f64);
        let pencil = &re_sym * theta.cos() + &im_sym * theta.sin();
        let eigs = linalg::symmetric_eigenvalues(&pencil)?;
        let min_eig = eigs.first().copied().unwrap_or(0.0);
        best = best.max(min_eig);
    }
    Ok((best > sweep.rel_tol * scale, best))
}

/// Decides whether `q` restricted to `span(S_basis)` vanishes only at the
/// origin. Vacuously true when `S = {0}`. The verdict comes with a margin:
/// the best certified definiteness of the direction-swept real pencil.
pub fn elliptic_on_s(
    q: &QuadraticSymbol,
    report: &SingularSpaceReport,
    sweep: &EllipticitySweep,
) -> Result<(bool, f64)> {
    elliptic_on_s_with_basis(q, &report.s_basis, sweep)
}

/// Coefficient matrix of `X -> sum_{l=0..k0} Re q((Im F)^l X)`; positive
/// definite whenever `S = {0}` and `Re q >= 0`.
pub fn msj5_gram(q: &QuadraticSymbol, k0: usize) -> Result<Array2<f64>> {
    let f = hamilton_map(q);
    let report = singular_space(&f, &RankTolerance::default())?;
    if report.dim_s() != 0 {
        return Err(Error::SingularSpaceNonzero { dim: report.dim_s() });
    }
    let re_q = q.re_matrix();
    let im_f = f.im_matrix();
    let dim = q.dim();
    let mut gram = Array2::<f64>::zeros((dim, dim));
    let mut power = Array2::<f64>::eye(dim);
    for l in 0..=k0 {
        if l > 0 {
            power = power.dot(&im_f);
        }
        gram = gram + power.t().dot(&re_q).dot(&power);
    }
    Ok((&gram + &gram.t()) / 2.0)
}

/// The symplectic splitting `R^{2n} = S^{sigma-perp} (+) S` together with
/// the restricted forms and the normal-form data of `q|_S`.
#[derive(Debug, Clone)]
pub struct SymplecticSplitting {
    /// Symplectic basis of `S^{sigma-perp}` (columns, ordered x-part then
    /// xi-part), so `q1` below is a form in canonical coordinates.
    pub basis_sperp: Array2<f64>,
    /// Symplectic basis of `S`, same ordering convention.
    pub basis_s: Array2<f64>,
    /// Restriction of `q` to `S^{sigma-perp}` in the canonical basis.
    pub q1: QuadraticSymbol,
    /// Real form with `q|_S = i q2`, in the canonical basis of `S`.
    /// Absent when `S = {0}`.
    pub q2: Option<QuadraticSymbol>,
    /// Sign of definiteness of `q2`; undefined when `S = {0}`.
    pub epsilon0: Option<i8>,
    /// Williamson frequencies of `q2`, ascending: `q2` is symplectically
    /// congruent to `epsilon0 * sum_j (lambda_j / 2)(x_j^2 + xi_j^2)`.
    pub frequencies: Vec<f64>,
}

impl SymplecticSplitting {
    pub fn dim_s(&self) -> usize {
        self.basis_s.ncols()
    }

    /// Decomposes a real phase point as `X' + X''` with `X'` in
    /// `S^{sigma-perp}` and `X''` in `S`; returns canonical coordinates of
    /// both components.
    pub fn decompose(&self, x: &[f64]) -> Result<(Array1<f64>, Array1<f64>)> {
        let dim = self.basis_sperp.nrows();
        if x.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
        }
        let d = self.dim_s();
        let mut combined = Array2::zeros((dim, dim));
        combined.slice_mut(s![.., ..dim - d]).assign(&self.basis_sperp);
        combined.slice_mut(s![.., dim - d..]).assign(&self.basis_s);
        let rhs = Array1::from(x.to_vec());
        let coords = combined
            .solve(&rhs)
            .map_err(|e| Error::EigFailure(e.to_string()))?;
        Ok((
            coords.slice(s![..dim - d]).to_owned(),
            coords.slice(s![dim - d..]).to_owned(),
        ))
    }
}

/// Symplectic Gram-Schmidt: turns an orthonormal basis of a
/// sigma-nondegenerate subspace into a canonical basis `(e_1..e_m,
/// f_1..f_m)` with `sigma(e_i, f_j) = -delta_ij` (the sign convention of
/// the coordinate ordering `(x, xi)`).
fn symplectic_basis(span: &Array2<f64>, j: &Array2<f64>) -> Result<Array2<f64>> {
    let dim = span.nrows();
    let d = span.ncols();
    if d % 2 != 0 {
        return Err(Error::OddSingularSpace { dim: d });
    }
    let m = d / 2;
    let mut work: Vec<Array1<f64>> = (0..d).map(|c| span.column(c).to_owned()).collect();
    let mut e_vectors: Vec<Array1<f64>> = Vec::with_capacity(m);
    let mut f_vectors: Vec<Array1<f64>> = Vec::with_capacity(m);

    let sigma = |a: &Array1<f64>, b: &Array1<f64>| -> f64 { a.dot(&j.dot(b)) };

    for _ in 0..m {
        // Pick the pair with the largest symplectic pairing for stability.
        let mut best = (0usize, 1usize, 0.0f64);
        for a in 0..work.len() {
            for b in (a + 1)..work.len() {
                let v = sigma(&work[a], &work[b]).abs();
                if v > best.2 {
                    best = (a, b, v);
                }
            }
        }
        if best.2 < 1e-12 {
            return Err(Error::InvalidInput(
                "symplectic form is numerically degenerate on the subspace".into(),
            ));
        }
        let e = work[best.0].clone();
        let pairing = sigma(&e, &work[best.1]);
        // sigma(e, f) = -1.
        let f = work[best.1].mapv(|v| -v / pairing);

        let mut next: Vec<Array1<f64>> = Vec::new();
        for (idx, w) in work.iter().enumerate() {
            if idx == best.0 || idx == best.1 {
                continue;
            }
            // Remove the (e, f) symplectic components.
            let we = sigma(w, &e);
            let wf = sigma(w, &f);
            let projected = w + &e.mapv(|v| v * wf) - &f.mapv(|v| v * we);
            next.push(projected);
        }
        // Re-orthonormalize the remaining span (plain Gram-Schmidt; the
        // dimensions here are tiny).
        let mut ortho: Vec<Array1<f64>> = Vec::new();
        for mut v in next {
            for u in &ortho {
                let c = v.dot(u);
                v = &v - &u.mapv(|x| x * c);
            }
            let norm = v.dot(&v).sqrt();
            if norm > 1e-12 {
                ortho.push(v.mapv(|x| x / norm));
            }
        }
        work = ortho;
        e_vectors.push(e);
        f_vectors.push(f);
    }

    let mut basis = Array2::zeros((dim, d));
    for (i, e) in e_vectors.iter().enumerate() {
        basis.column_mut(i).assign(e);
    }
    for (i, f) in f_vectors.iter().enumerate() {
        basis.column_mut(m + i).assign(f);
    }
    Ok(basis)
}

/// Relative tolerance used by the splitting consistency checks.
const SPLIT_REL_TOL: f64 = 1e-8;

/// Builds the symplectic splitting of `q` along its singular space.
///
/// Requires `q` elliptic on `S` (so that `S` is symplectic and `q2` is
/// definite) and an even singular dimension.
pub fn symplectic_splitting(
    q: &QuadraticSymbol,
    report: &SingularSpaceReport,
) -> Result<SymplecticSplitting> {
    if !report.elliptic_on_s {
        return Err(Error::NotEllipticOnS { margin: report.ellipticity_margin });
    }
    let dim = q.dim();
    let d = report.dim_s();
    if d % 2 != 0 {
        return Err(Error::OddSingularSpace { dim: d });
    }
    let form = SymplecticForm::new(q.n());
    let j = form.matrix().clone();

    if d == 0 {
        return Ok(SymplecticSplitting {
            basis_sperp: Array2::eye(dim),
            basis_s: Array2::zeros((dim, 0)),
            q1: q.clone(),
            q2: None,
            epsilon0: None,
            frequencies: Vec::new(),
        });
    }

    let basis_s = symplectic_basis(&report.s_basis, &j)?;

    // sigma-orthogonal complement: null space of S_basis^T J.
    let pairing_rows = report.s_basis.t().dot(&j);
    let smax = linalg::singular_values(&pairing_rows)?.first().copied().unwrap_or(0.0);
    let ortho_span = linalg::null_space(&pairing_rows, d as f64 * f64::EPSILON * smax * 1e3)?;
    if ortho_span.ncols() != dim - d {
        return Err(Error::InvalidInput(format!(
            "sigma-orthogonal complement has dimension {}, expected {}",
            ortho_span.ncols(),
            dim - d
        )));
    }
    let basis_sperp = symplectic_basis(&ortho_span, &j)?;

    // Restricted forms in the canonical bases.
    let m_s = restricted_matrix(q, &basis_s);
    let re_residual = max_norm_real(&m_s.mapv(|z| z.re));
    let scale = q.norm().max(1.0);
    if re_residual > SPLIT_REL_TOL * scale {
        return Err(Error::NotImaginaryOnS { residual: re_residual });
    }
    let q2_matrix = m_s.mapv(|z| z.im);
    let q2_sym = (&q2_matrix + &q2_matrix.t()) / 2.0;
    let eigs = linalg::symmetric_eigenvalues(&q2_sym)?;
    let epsilon0 = if eigs.iter().all(|&e| e > 0.0) {
        1i8
    } else if eigs.iter().all(|&e| e < 0.0) {
        -1i8
    } else {
        return Err(Error::NotEllipticOnS { margin: report.ellipticity_margin });
    };
    let q2 = QuadraticSymbol::new(d / 2, q2_sym.mapv(|x| C64::new(x, 0.0)))?;

    // Williamson frequencies: eigenvalues of the Hamilton map of q2 in the
    // restricted canonical structure are +/- i lambda_j / 2.
    let f2 = hamilton_map(&q2);
    let mut frequencies: Vec<f64> = f2
        .eigenvalues()?
        .into_iter()
        .filter(|e| e.im > 0.0)
        .map(|e| 2.0 * e.im)
        .collect();
    frequencies.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if frequencies.len() != d / 2 {
        return Err(Error::Unconverged(format!(
            "expected {} Williamson frequencies, found {}",
            d / 2,
            frequencies.len()
        )));
    }

    let m_perp = restricted_matrix(q, &basis_sperp);
    let q1 = QuadraticSymbol::new((dim - d) / 2, m_perp)?;

    Ok(SymplecticSplitting {
        basis_sperp,
        basis_s,
        q1,
        q2: Some(q2),
        epsilon0: Some(epsilon0),
        frequencies,
    })
}

/// Checks that the columns of a basis matrix have unit norm and are
/// mutually orthogonal (test helper, exact to `tol`).
pub fn orthonormality_defect(basis: &Array2<f64>) -> f64 {
    let gram = basis.t().dot(basis);
    let k = gram.nrows();
    let mut defect: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let expect = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[[i, j]] - expect).abs());
        }
    }
    defect
}
