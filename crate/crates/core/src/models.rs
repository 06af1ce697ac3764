//! Built-in model symbols: the harmonic oscillator, the rotated (Davies)
//! oscillator, the Kramers-Fokker-Planck quadratic model and the two chain
//! families realizing every subelliptic index in `{0,...,2n-1}`. Also hosts
//! the random-form generator used by the verification batteries.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::parse::parse_quadratic;
use crate::symplectic::QuadraticSymbol;

/// `sum_j x_j^2 + xi_j^2`; positive definite real part, index 0.
pub fn harmonic(n: usize) -> Result<QuadraticSymbol> {
    let expr = (1..=n)
        .map(|j| format!("x{j}^2 + xi{j}^2"))
        .collect::<Vec<_>>()
        .join(" + ");
    parse_quadratic(&expr, n)
}

/// Davies' rotated oscillator `xi^2 + i x^2` (n = 1).
pub fn davies() -> Result<QuadraticSymbol> {
    parse_quadratic("xi1^2 + i*x1^2", 1)
}

/// Purely imaginary oscillator `i (x^2 + xi^2)` (n = 1); its singular
/// space is the whole phase plane.
pub fn imaginary_oscillator() -> Result<QuadraticSymbol> {
    parse_quadratic("i*(x1^2 + xi1^2)", 1)
}

/// Kramers-Fokker-Planck quadratic model tensorized with harmonic
/// oscillators in the remaining variables:
/// `xi2^2 + x2^2 + i(x2 xi1 - x1 xi2) + sum_{j>=3} xi_j^2 + x_j^2`.
/// Subelliptic index 1. Requires `n >= 2`.
pub fn kfp(n: usize) -> Result<QuadraticSymbol> {
    if n < 2 {
        return Err(Error::InvalidInput("kfp model needs n >= 2".into()));
    }
    let mut expr = String::from("xi2^2 + x2^2 + i*(x2*xi1 - x1*xi2)");
    for j in 3..=n {
        expr.push_str(&format!(" + xi{j}^2 + x{j}^2"));
    }
    parse_quadratic(&expr, n)
}

fn chain_imaginary_part(p: usize) -> String {
    // xi1^2 + 2 x2 xi1 + xi2^2 + 2 x3 xi2 + ... + xi_p^2 + 2 x_{p+1} xi_p
    // + xi_{p+1}^2
    let mut parts = Vec::new();
    for j in 1..=p {
        parts.push(format!("xi{j}^2"));
        parts.push(format!("2*x{}*xi{}", j + 1, j));
    }
    parts.push(format!("xi{}^2", p + 1));
    parts.join(" + ")
}

/// Chain model with index `2p`:
/// `xi1^2 + x1^2 + i(chain) + sum_{j>=p+2} xi_j^2 + x_j^2`,
/// valid for `1 <= p <= n-1`.
pub fn chain_even(n: usize, p: usize) -> Result<QuadraticSymbol> {
    if p < 1 || p > n.saturating_sub(1) {
        return Err(Error::InvalidInput(format!(
            "chain model needs 1 <= p <= n-1, got p={p}, n={n}"
        )));
    }
    let mut expr = format!("xi1^2 + x1^2 + i*({})", chain_imaginary_part(p));
    for j in (p + 2)..=n {
        expr.push_str(&format!(" + xi{j}^2 + x{j}^2"));
    }
    parse_quadratic(&expr, n)
}

/// Chain model with index `2p+1`:
/// `x1^2 + i(chain) + sum_{j>=p+2} xi_j^2 + x_j^2`,
/// valid for `1 <= p <= n-1`.
pub fn chain_odd(n: usize, p: usize) -> Result<QuadraticSymbol> {
    if p < 1 || p > n.saturating_sub(1) {
        return Err(Error::InvalidInput(format!(
            "chain model needs 1 <= p <= n-1, got p={p}, n={n}"
        )));
    }
    let mut expr = format!("x1^2 + i*({})", chain_imaginary_part(p));
    for j in (p + 2)..=n {
        expr.push_str(&format!(" + xi{j}^2 + x{j}^2"));
    }
    parse_quadratic(&expr, n)
}

/// Random quadratic form with `Re Q = G^T G >= 0` (G possibly
/// rank-deficient) and an arbitrary symmetric imaginary part, normalized
/// to unit max-norm.
pub fn random_nonneg_form<R: Rng>(n: usize, rng: &mut R) -> QuadraticSymbol {
    let dim = 2 * n;
    let rank = 1 + (rng.gen::<u32>() as usize) % dim;
    let g = Array2::from_shape_fn((rank, dim), |_| rng.gen::<f64>() - 0.5);
    let re = g.t().dot(&g);
    let im_raw = Array2::from_shape_fn((dim, dim), |_| rng.gen::<f64>() - 0.5);
    let im = (&im_raw + &im_raw.t()) / 2.0;
    let mut q = Array2::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            q[[i, j]] = Complex64::new(re[[i, j]], im[[i, j]]);
        }
    }
    let scale = crate::linalg::max_norm(&q);
    QuadraticSymbol::new(n, q.mapv(|z| z / scale)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_produce_expected_dimensions() {
        assert_eq!(harmonic(3).unwrap().n(), 3);
        assert_eq!(davies().unwrap().n(), 1);
        assert_eq!(kfp(4).unwrap().n(), 4);
        assert_eq!(chain_even(3, 2).unwrap().n(), 3);
        assert_eq!(chain_odd(4, 1).unwrap().n(), 4);
    }

    #[test]
    fn chain_bounds_are_enforced() {
        assert!(chain_even(2, 2).is_err());
        assert!(chain_odd(2, 0).is_err());
        assert!(kfp(1).is_err());
    }

    #[test]
    fn harmonic_real_part_is_identity() {
        let q = harmonic(2).unwrap();
        let re = q.re_matrix();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(re[[i, j]], expect);
            }
        }
        assert_eq!(crate::linalg::max_norm_real(&q.im_matrix()), 0.0);
    }
}
