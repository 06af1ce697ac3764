//! Hermite-Galerkin oracle: exact matrix assembly of polynomial Weyl
//! symbols in the tensor harmonic-oscillator eigenbasis, dense
//! eigensolves and smallest singular values.
//!
//! Convention: standard Weyl quantization with `D = -i d/dx`, so
//! `x^2 + xi^2` assembles to `diag(1, 3, 5, ...)`. The semiclassical
//! parameter is handled by symbol rescaling: the `h`-Weyl operator of
//! `sym(x, xi)` is unitarily equivalent to the `h = 1` operator of
//! `sym(sqrt(h) X)`, so there is a single assembly path.
//!
//! Weyl ordering is realized by full symmetrization: each monomial
//! `x^m xi^r` quantizes as the average over all distinct orderings of `m`
//! position and `r` momentum factors. Products are evaluated on an
//! enlarged basis of size `N + 4` and cropped, which makes every retained
//! entry an exact matrix element of the infinite operator rather than a
//! truncated product.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::poly::PolynomialSymbol;

/// Hard cap on the dense matrix dimension `N^n`.
pub const DENSE_DIM_CAP: usize = 4096;

/// Maximum supported symbol degree.
pub const MAX_DEGREE: usize = 4;

/// Extra basis functions kept internally before cropping.
const ENLARGE: usize = MAX_DEGREE;

/// Banded complex matrix; row `i` holds entries for columns
/// `i - band ..= i + band`.
#[derive(Debug, Clone)]
struct BandMatrix {
    size: usize,
    band: usize,
    data: Vec<C64>,
}

impl BandMatrix {
    fn zeros(size: usize, band: usize) -> Self {
        BandMatrix { size, band, data: vec![C64::new(0.0, 0.0); size * (2 * band + 1)] }
    }

    fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, 0);
        for i in 0..size {
            m.data[i] = C64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> C64 {
        let lo = i.saturating_sub(self.band);
        if j < lo || j > i + self.band || j >= self.size {
            return C64::new(0.0, 0.0);
        }
        self.data[i * (2 * self.band + 1) + (j + self.band - i)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: C64) {
        debug_assert!(j + self.band >= i && j <= i + self.band);
        self.data[i * (2 * self.band + 1) + (j + self.band - i)] = v;
    }

    fn mul(&self, other: &BandMatrix) -> BandMatrix {
        debug_assert_eq!(self.size, other.size);
        let band = self.band + other.band;
        let mut out = BandMatrix::zeros(self.size, band);
        for i in 0..self.size {
            let j_lo = i.saturating_sub(band);
            let j_hi = (i + band).min(self.size - 1);
            for j in j_lo..=j_hi {
                let k_lo = i.saturating_sub(self.band).max(j.saturating_sub(other.band));
                let k_hi = (i + self.band).min(j + other.band).min(self.size - 1);
                let mut acc = C64::new(0.0, 0.0);
                for k in k_lo..=k_hi {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    fn add_scaled(&mut self, other: &BandMatrix, factor: C64) {
        debug_assert!(self.band >= other.band && self.size == other.size);
        for i in 0..self.size {
            let j_lo = i.saturating_sub(other.band);
            let j_hi = (i + other.band).min(self.size - 1);
            for j in j_lo..=j_hi {
                let v = self.get(i, j) + other.get(i, j) * factor;
                self.set(i, j, v);
            }
        }
    }

    fn crop(&self, size: usize) -> BandMatrix {
        debug_assert!(size <= self.size);
        let mut out = BandMatrix::zeros(size, self.band.min(size.saturating_sub(1)));
        for i in 0..size {
            let j_lo = i.saturating_sub(out.band);
            let j_hi = (i + out.band).min(size - 1);
            for j in j_lo..=j_hi {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    /// Nonzero entries of a row as `(column, value)` pairs.
    fn row(&self, i: usize) -> Vec<(usize, C64)> {
        let j_lo = i.saturating_sub(self.band);
        let j_hi = (i + self.band).min(self.size - 1);
        (j_lo..=j_hi)
            .map(|j| (j, self.get(i, j)))
            .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
            .collect()
    }
}

/// Position operator on the enlarged basis: `x[k, k+1] = sqrt((k+1)/2)`.
fn position_op(size: usize) -> BandMatrix {
    let mut m = BandMatrix::zeros(size, 1);
    for k in 0..size - 1 {
        let v = C64::new(((k + 1) as f64 / 2.0).sqrt(), 0.0);
        m.set(k, k + 1, v);
        m.set(k + 1, k, v);
    }
    m
}

/// Momentum operator `D = -i d/dx`: `D[k, k+1] = -i sqrt((k+1)/2)`.
fn momentum_op(size: usize) -> BandMatrix {
    let mut m = BandMatrix::zeros(size, 1);
    for k in 0..size - 1 {
        let v = ((k + 1) as f64 / 2.0).sqrt();
        m.set(k, k + 1, C64::new(0.0, -v));
        m.set(k + 1, k, C64::new(0.0, v));
    }
    m
}

/// Distinct orderings of `m` position and `r` momentum factors, encoded as
/// boolean words (`true` = position).
fn orderings(m: usize, r: usize) -> Vec<Vec<bool>> {
    fn rec(m: usize, r: usize, prefix: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if m == 0 && r == 0 {
            out.push(prefix.clone());
            return;
        }
        if m > 0 {
            prefix.push(true);
            rec(m - 1, r, prefix, out);
            prefix.pop();
        }
        if r > 0 {
            prefix.push(false);
            rec(m, r - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, r, &mut Vec::new(), &mut out);
    out
}

/// Weyl quantization of the 1-D monomial `x^m xi^r` on the enlarged basis,
/// cropped to `n` rows/columns; entries are exact matrix elements.
fn weyl_monomial_1d(m: usize, r: usize, n: usize) -> BandMatrix {
    let size = n + ENLARGE;
    if m + r == 0 {
        return BandMatrix::identity(size).crop(n);
    }
    let x = position_op(size);
    let p = momentum_op(size);
    let words = orderings(m, r);
    let weight = C64::new(1.0 / words.len() as f64, 0.0);
    let mut acc = BandMatrix::zeros(size, m + r);
    for word in &words {
        let mut prod: Option<BandMatrix> = None;
        for &is_x in word {
            let factor = if is_x { &x } else { &p };
            prod = Some(match prod {
                None => factor.clone(),
                Some(p0) => p0.mul(factor),
            });
        }
        acc.add_scaled(&prod.expect("nonempty word"), weight);
    }
    acc.crop(n)
}

/// Dense matrix of a polynomial Weyl symbol on the `n`-dimensional tensor
/// Hermite basis with per-axis truncation `N`.
#[derive(Debug, Clone)]
pub struct GalerkinMatrix {
    /// Number of spatial dimensions (axes).
    pub n: usize,
    /// Per-axis truncation; the basis is all tensor products with each
    /// index `< N`.
    pub n_per_axis: usize,
    /// Semiclassical parameter the symbol was rescaled with.
    pub h: f64,
    /// The assembled dense operator matrix, dimension `N^n`.
    pub a: Array2<C64>,
}

impl GalerkinMatrix {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Full eigenvalue list (Schur-based dense solve), sorted by modulus
    /// then lexicographically.
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let mut eigs = linalg::eigenvalues(&self.a)?;
        sort_complex(&mut eigs);
        Ok(eigs)
    }

    /// Smallest singular value of `A - z I`.
    pub fn min_singular_value(&self, z: C64) -> Result<f64> {
        linalg::smallest_singular_value(&self.shifted(z))
    }

    /// Same quantity through the LU-based iterative estimator; intended
    /// for grid sweeps.
    pub fn min_singular_value_fast(&self, z: C64) -> Result<f64> {
        linalg::smallest_singular_value_fast(&self.shifted(z), 1e-8)
    }

    pub fn shifted(&self, z: C64) -> Array2<C64> {
        let mut m = self.a.clone();
        for i in 0..m.nrows() {
            m[[i, i]] -= z;
        }
        m
    }

    /// Adds `c * I` in place (subprincipal constants).
    pub fn add_scalar(&mut self, c: C64) {
        for i in 0..self.a.nrows() {
            self.a[[i, i]] += c;
        }
    }
}

pub fn sort_complex(values: &mut [C64]) {
    values.sort_by(|a, b| {
        (a.norm(), a.re, a.im)
            .partial_cmp(&(b.norm(), b.re, b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Assembles the Weyl quantization of a polynomial symbol (degree <= 4)
/// in the tensor Hermite basis.
pub fn assemble(sym: &PolynomialSymbol, n_per_axis: usize, h: f64) -> Result<GalerkinMatrix> {
    let degree = sym.degree();
    if degree > MAX_DEGREE {
        return Err(Error::DegreeTooHigh { degree, max: MAX_DEGREE });
    }
    if n_per_axis < 2 {
        return Err(Error::TruncationTooSmall { n: n_per_axis, need: 2 });
    }
    if n_per_axis < degree + 1 {
        return Err(Error::TruncationTooSmall { n: n_per_axis, need: degree + 1 });
    }
    if h <= 0.0 {
        return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
    }
    let axes = sym.n();
    let dim = checked_dim(n_per_axis, axes)?;

    // h-Weyl is unitarily equivalent to h=1 Weyl of the dilated symbol.
    let scaled = sym.dilated(h.sqrt());

    let mut a: Array2<C64> = Array2::zeros((dim, dim));
    let mut cache: BTreeMap<(u32, u32), BandMatrix> = BTreeMap::new();

    for (mono, &coeff) in scaled.terms() {
        // Per-axis 1-D Weyl factors (identity for untouched axes).
        let factors: Vec<&BandMatrix> = {
            let mut keys = Vec::with_capacity(axes);
            for ax in 0..axes {
                let key = (mono.alpha[ax], mono.beta[ax]);
                keys.push(key);
                cache.entry(key).or_insert_with(|| {
                    weyl_monomial_1d(key.0 as usize, key.1 as usize, n_per_axis)
                });
            }
            keys.iter().map(|k| &cache[k]).collect()
        };

        // Kronecker accumulation over the banded per-axis rows.
        let mut digits = vec![0usize; axes];
        for row in 0..dim {
            // decode row into per-axis indices (first axis slowest)
            {
                let mut rest = row;
                for ax in (0..axes).rev() {
                    digits[ax] = rest % n_per_axis;
                    rest /= n_per_axis;
                }
            }
            let rows: Vec<Vec<(usize, C64)>> =
                (0..axes).map(|ax| factors[ax].row(digits[ax])).collect();
            if rows.iter().any(|r| r.is_empty()) {
                continue;
            }
            // cartesian product over per-axis entries, last axis fastest
            let mut idx = vec![0usize; axes];
            'product: loop {
                let mut col = 0usize;
                let mut val = coeff;
                for ax in 0..axes {
                    let (j, v) = rows[ax][idx[ax]];
                    col = col * n_per_axis + j;
                    val *= v;
                }
                a[[row, col]] += val;
                let mut ax = axes - 1;
                loop {
                    idx[ax] += 1;
                    if idx[ax] < rows[ax].len() {
                        continue 'product;
                    }
                    idx[ax] = 0;
                    if ax == 0 {
                        break 'product;
                    }
                    ax -= 1;
                }
            }
        }
    }

    Ok(GalerkinMatrix { n: axes, n_per_axis, h, a })
}

fn checked_dim(n_per_axis: usize, axes: usize) -> Result<usize> {
    let mut dim = 1usize;
    for _ in 0..axes {
        dim = dim
            .checked_mul(n_per_axis)
            .ok_or(Error::DenseCapExceeded { dim: usize::MAX, cap: DENSE_DIM_CAP })?;
        if dim > DENSE_DIM_CAP {
            return Err(Error::DenseCapExceeded { dim, cap: DENSE_DIM_CAP });
        }
    }
    Ok(dim)
}

/// Outcome of matching one target value against eigenvalues computed at
/// truncations `N` and `2N`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DoublingMatch {
    pub target_re: f64,
    pub target_im: f64,
    /// Nearest eigenvalue at the doubled truncation.
    pub nearest_re: f64,
    pub nearest_im: f64,
    /// Distance target -> nearest eigenvalue at 2N.
    pub error: f64,
    /// Movement of the matched eigenvalue between N and 2N.
    pub drift: f64,
    pub converged: bool,
}

/// Mean of the `count` eigenvalues nearest to `target`.
fn cluster_mean(eigs: &[C64], target: C64, count: usize) -> C64 {
    let mut sorted: Vec<C64> = eigs.to_vec();
    sorted.sort_by(|a, b| {
        (*a - target)
            .norm()
            .partial_cmp(&(*b - target).norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let count = count.max(1).min(sorted.len());
    sorted.iter().take(count).sum::<C64>() / C64::new(count as f64, 0.0)
}

/// Doubling protocol: a value claimed to precision `eps` must move by less
/// than `eps` between truncations `N` and `2N`. Each target carries the
/// dimension of its generalized eigenspace; for a defective eigenvalue a
/// dense eigensolver splits the cluster by roughly `eps_machine^{1/m}`,
/// while the cluster mean stays at working accuracy, so the oracle value
/// for a multiplicity-`m` target is the mean of the `m` nearest computed
/// eigenvalues.
pub fn doubling_matches_with_multiplicity(
    sym: &PolynomialSymbol,
    targets: &[(C64, usize)],
    n_per_axis: usize,
    h: f64,
    eps: f64,
) -> Result<Vec<DoublingMatch>> {
    let coarse = assemble(sym, n_per_axis, h)?.eigenvalues()?;
    let fine = assemble(sym, 2 * n_per_axis, h)?.eigenvalues()?;
    Ok(targets
        .iter()
        .map(|&(t, mult)| {
            let value_fine = cluster_mean(&fine, t, mult);
            let value_coarse = cluster_mean(&coarse, t, mult);
            let drift = (value_fine - value_coarse).norm();
            DoublingMatch {
                target_re: t.re,
                target_im: t.im,
                nearest_re: value_fine.re,
                nearest_im: value_fine.im,
                error: (value_fine - t).norm(),
                drift,
                converged: drift < eps,
            }
        })
        .collect())
}

/// Multiplicity-one doubling protocol.
pub fn doubling_matches(
    sym: &PolynomialSymbol,
    targets: &[C64],
    n_per_axis: usize,
    h: f64,
    eps: f64,
) -> Result<Vec<DoublingMatch>> {
    let with_mult: Vec<(C64, usize)> = targets.iter().map(|&t| (t, 1)).collect();
    doubling_matches_with_multiplicity(sym, &with_mult, n_per_axis, h, eps)
}

/// Writes the matrix in the binary container format: two little-endian
/// u64 dimensions followed by row-major `(re, im)` pairs of little-endian
/// f64.
pub fn write_matrix_binary<W: Write>(m: &Array2<C64>, out: &mut W) -> std::io::Result<()> {
    out.write_all(&(m.nrows() as u64).to_le_bytes())?;
    out.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for row in m.rows() {
        for z in row {
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a matrix written by [`write_matrix_binary`].
pub fn read_matrix_binary<R: Read>(input: &mut R) -> Result<Array2<C64>> {
    let mut buf8 = [0u8; 8];
    let mut read_u64 = |input: &mut R| -> Result<u64> {
        input
            .read_exact(&mut buf8)
            .map_err(|e| Error::InvalidInput(format!("binary container truncated: {e}")))?;
        Ok(u64::from_le_bytes(buf8))
    };
    let rows = read_u64(input)? as usize;
    let cols = read_u64(input)? as usize;
    if rows.checked_mul(cols).is_none() || rows * cols > DENSE_DIM_CAP * DENSE_DIM_CAP {
        return Err(Error::InvalidInput("binary container dimensions too large".into()));
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut pair = [0u8; 16];
    for _ in 0..rows * cols {
        input
            .read_exact(&mut pair)
            .map_err(|e| Error::InvalidInput(format!("binary container truncated: {e}")))?;
        let re = f64::from_le_bytes(pair[..8].try_into().unwrap());
        let im = f64::from_le_bytes(pair[8..].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Writes the matrix as CSV with interleaved `re, im` columns.
pub fn write_matrix_csv<W: Write>(m: &Array2<C64>, out: &mut W) -> std::io::Result<()> {
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|z| format!("{},{}", z.re, z.im)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
