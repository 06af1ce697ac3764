//! Thin wrappers around the dense LAPACK routines used throughout the
//! crate: nonsymmetric complex eigensolves, singular value decompositions,
//! rank-revealing null spaces and a shifted inverse-iteration estimator for
//! the smallest singular value.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, EigValsh, Factorize, Norm, Solve, UPLO, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max-norm (largest absolute entry) of a complex matrix.
pub fn max_norm(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-norm of a real matrix.
pub fn max_norm_real(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Eigenvalues of a dense complex matrix (LAPACK zgeev, Schur based).
pub fn eigenvalues(m: &Array2<C64>) -> Result<Vec<C64>> {
    let (vals, _) = m.eig().map_err(|e| Error::EigFailure(e.to_string()))?;
    Ok(vals.to_vec())
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Array2<f64>) -> Result<Vec<f64>> {
    let vals = m
        .eigvalsh(UPLO::Lower)
        .map_err(|e| Error::EigFailure(e.to_string()))?;
    Ok(vals.to_vec())
}

/// Singular values of a real matrix, descending.
pub fn singular_values(m: &Array2<f64>) -> Result<Vec<f64>> {
    let (_, s, _) = m
        .svd(false, false)
        .map_err(|e| Error::EigFailure(e.to_string()))?;
    Ok(s.to_vec())
}

/// Smallest singular value of a dense complex matrix via full SVD.
pub fn smallest_singular_value(m: &Array2<C64>) -> Result<f64> {
    let (_, s, _) = m
        .svd(false, false)
        .map_err(|e| Error::EigFailure(e.to_string()))?;
    Ok(s.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Spectral norm (largest singular value) of a dense complex matrix.
pub fn operator_norm(m: &Array2<C64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    let (_, s, _) = m
        .svd(false, false)
        .map_err(|e| Error::EigFailure(e.to_string()))?;
    Ok(s.iter().cloned().fold(0.0, f64::max))
}

/// Orthonormal basis of the (numerical) null space of a real matrix.
///
/// Singular values `<= tol_abs` count as zero. Returns a `cols x k` matrix
/// whose columns span the kernel. A matrix that is identically zero (or
/// empty) has a full kernel.
pub fn null_space(m: &Array2<f64>, tol_abs: f64) -> Result<Array2<f64>> {
    let cols = m.ncols();
    if m.nrows() == 0 || max_norm_real(m) == 0.0 {
        return Ok(Array2::eye(cols));
    }
    let (_, s, vt) = m
        .svd(false, true)
        .map_err(|e| Error::EigFailure(e.to_string()))?;
    let vt = vt.expect("requested V^T");
    let rank = s.iter().filter(|&&sv| sv > tol_abs).count();
    let k = cols - rank;
    let mut basis = Array2::zeros((cols, k));
    for (out_col, row) in (rank..cols).enumerate() {
        basis
            .column_mut(out_col)
            .assign(&vt.index_axis(Axis(0), row));
    }
    Ok(basis)
}

/// Smallest singular value estimated by inverse iteration on `(A^H A)^{-1}`
/// using one LU factorization. Falls back to a full SVD when the iteration
/// stalls. Intended for resolvent sweeps where the full SVD is too slow.
pub fn smallest_singular_value_fast(m: &Array2<C64>, rel_tol: f64) -> Result<f64> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let lu = match m.factorize() {
        Ok(lu) => lu,
        // Exactly singular to machine precision.
        Err(_) => return Ok(0.0),
    };
    // Deterministic start vector with all modes populated.
    let mut v: Array1<C64> = Array1::from_shape_fn(n, |i| {
        C64::new(1.0 + (i as f64 * 0.37).sin(), (i as f64 * 0.73).cos())
    });
    let nv = v.norm_l2();
    v.mapv_inplace(|z| z / nv);

    let mut sigma_prev = f64::INFINITY;
    let mut stable_iters = 0;
    for _ in 0..1000 {
        // w = A^{-1} A^{-H} v, so the Rayleigh quotient of (A^H A)^{-1}
        // against v is v^H w.
        let y = lu.solve_h(&v).map_err(|e| Error::EigFailure(e.to_string()))?;
        let w = lu.solve(&y).map_err(|e| Error::EigFailure(e.to_string()))?;
        let rho: C64 = v
            .iter()
            .zip(w.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let rho = rho.re.max(f64::MIN_POSITIVE);
        let sigma = rho.sqrt().recip();
        let nw = w.norm_l2();
        if nw == 0.0 || !nw.is_finite() {
            return Ok(0.0);
        }
        v = w.mapv(|z| z / nw);
        // Require a settled estimate over a few consecutive sweeps; a
        // single small step can be a plateau of slow convergence when the
        // two smallest singular values are close.
        if (sigma - sigma_prev).abs() <= rel_tol * sigma {
            stable_iters += 1;
            if stable_iters >= 3 {
                // v now approximates the right singular vector; ||A v|| is
                // the corresponding upper bound and sharp at convergence.
                let av = m.dot(&v);
                return Ok(av.norm_l2());
            }
        } else {
            stable_iters = 0;
        }
        sigma_prev = sigma;
    }
    smallest_singular_value(m)
}

/// Clusters a list of complex values: points within `radius` of a cluster
/// representative are merged. Returns `(representative, count)` pairs with
/// the representative being the cluster mean. Input order does not matter.
pub fn cluster(values: &[C64], radius: f64) -> Vec<(C64, usize)> {
    let mut sorted: Vec<C64> = values.to_vec();
    sorted.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    'outer: for &v in &sorted {
        for (rep, count) in clusters.iter_mut() {
            let mean = *rep;
            if (v - mean).norm() <= radius {
                // Running mean keeps the representative centered.
                *rep = (mean * (*count as f64) + v) / (*count as f64 + 1.0);
                *count += 1;
                continue 'outer;
            }
        }
        clusters.push((v, 1));
    }
    clusters
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn null_space_of_rank_one() {
        let m = array![[1.0, 1.0], [2.0, 2.0]];
        let basis = null_space(&m, 1e-12).unwrap();
        assert_eq!(basis.ncols(), 1);
        let v = basis.column(0);
        assert!((v[0] + v[1]).abs() < 1e-12);
    }

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        let m = Array2::<f64>::zeros((3, 4));
        let basis = null_space(&m, 1e-12).unwrap();
        assert_eq!(basis.ncols(), 4);
    }

    #[test]
    fn fast_sigma_min_matches_svd() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for trial in 0..5 {
            let m = Array2::from_shape_fn((20, 20), |_| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let exact = smallest_singular_value(&m).unwrap();
            let fast = smallest_singular_value_fast(&m, 1e-10).unwrap();
            assert!(
                (exact - fast).abs() <= 1e-6 * exact,
                "trial {trial}: {exact} vs {fast}"
            );
        }
    }

    #[test]
    fn fast_sigma_min_near_singular_matrix() {
        // Rank-deficient matrix: both paths must agree that sigma_min is
        // numerically zero.
        let mut m = Array2::<C64>::zeros((6, 6));
        for i in 0..6 {
            for j in 0..6 {
                m[[i, j]] = C64::new((i + j) as f64, (i * j) as f64);
            }
        }
        let fast = smallest_singular_value_fast(&m, 1e-8).unwrap();
        assert!(fast < 1e-10, "expected near-zero, got {fast}");
    }

    #[test]
    fn cluster_merges_nearby_values() {
        let vals = vec![
            C64::new(1.0, 0.0),
            C64::new(1.0 + 1e-12, 0.0),
            C64::new(3.0, 0.0),
        ];
        let clusters = cluster(&vals, 1e-8);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].1 + clusters[1].1, 3);
    }
}
