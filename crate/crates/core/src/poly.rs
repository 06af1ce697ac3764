//! Polynomial phase-space symbols with complex coefficients, stored as a
//! sorted map from monomials to coefficients. Supports the small amount of
//! symbolic algebra the oracle and the Wick module need: products,
//! derivatives, Poisson brackets and Gaussian smoothing.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::symplectic::QuadraticSymbol;

/// A monomial `x^alpha xi^beta` on phase space, exponents per axis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseMonomial {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl PhaseMonomial {
    pub fn constant(n: usize) -> Self {
        PhaseMonomial { alpha: vec![0; n], beta: vec![0; n] }
    }

    pub fn degree(&self) -> usize {
        (self.alpha.iter().sum::<u32>() + self.beta.iter().sum::<u32>()) as usize
    }
}

/// A polynomial symbol `sum_m c_m x^alpha xi^beta` in `n` position and `n`
/// momentum variables.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSymbol {
    n: usize,
    terms: BTreeMap<PhaseMonomial, C64>,
}

impl PolynomialSymbol {
    pub fn zero(n: usize) -> Self {
        PolynomialSymbol { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: C64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(PhaseMonomial::constant(n), c);
        p
    }

    /// Single monomial `c * x^alpha xi^beta`.
    pub fn monomial(n: usize, alpha: Vec<u32>, beta: Vec<u32>, c: C64) -> Result<Self> {
        if alpha.len() != n || beta.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: alpha.len().max(beta.len()) });
        }
        let mut p = Self::zero(n);
        p.add_term(PhaseMonomial { alpha, beta }, c);
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PhaseMonomial, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: PhaseMonomial, c: C64) {
        let entry = self.terms.entry(m.clone()).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        // Drop exact zeros so num_terms reflects the support; floating dust
        // is kept for the caller to judge.
        if entry.re == 0.0 && entry.im == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &PolynomialSymbol) -> Result<PolynomialSymbol> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut out = self.clone();
        for (m, c) in other.terms.iter() {
            out.add_term(m.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PolynomialSymbol) -> Result<PolynomialSymbol> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> PolynomialSymbol {
        let mut out = Self::zero(self.n);
        for (m, c) in self.terms.iter() {
            out.add_term(m.clone(), c * factor);
        }
        out
    }

    pub fn mul(&self, other: &PolynomialSymbol) -> Result<PolynomialSymbol> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut out = Self::zero(self.n);
        for (ma, ca) in self.terms.iter() {
            for (mb, cb) in other.terms.iter() {
                let alpha = ma.alpha.iter().zip(&mb.alpha).map(|(a, b)| a + b).collect();
                let beta = ma.beta.iter().zip(&mb.beta).map(|(a, b)| a + b).collect();
                out.add_term(PhaseMonomial { alpha, beta }, ca * cb);
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to `x_axis` (`momentum = false`) or
    /// `xi_axis` (`momentum = true`), zero-based axis.
    pub fn derivative(&self, axis: usize, momentum: bool) -> PolynomialSymbol {
        let mut out = Self::zero(self.n);
        for (m, c) in self.terms.iter() {
            let exps = if momentum { &m.beta } else { &m.alpha };
            let e = exps[axis];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            if momentum {
                m2.beta[axis] -= 1;
            } else {
                m2.alpha[axis] -= 1;
            }
            out.add_term(m2, c * C64::new(e as f64, 0.0));
        }
        out
    }

    /// Full gradient dot product `a' . b'` (both position and momentum
    /// derivatives).
    pub fn gradient_dot(&self, other: &PolynomialSymbol) -> Result<PolynomialSymbol> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut out = Self::zero(self.n);
        for axis in 0..self.n {
            for momentum in [false, true] {
                let da = self.derivative(axis, momentum);
                let db = other.derivative(axis, momentum);
                out = out.add(&da.mul(&db)?)?;
            }
        }
        Ok(out)
    }

    /// Poisson bracket `{a,b} = da/dxi . db/dx - da/dx . db/dxi`.
    pub fn poisson_bracket(&self, other: &PolynomialSymbol) -> Result<PolynomialSymbol> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut out = Self::zero(self.n);
        for axis in 0..self.n {
            let term1 = self.derivative(axis, true).mul(&other.derivative(axis, false))?;
            let term2 = self.derivative(axis, false).mul(&other.derivative(axis, true))?;
            out = out.add(&term1.sub(&term2)?)?;
        }
        Ok(out)
    }

    /// Phase-space Laplacian `sum_i d^2/dx_i^2 + d^2/dxi_i^2`.
    pub fn laplacian(&self) -> PolynomialSymbol {
        let mut out = Self::zero(self.n);
        for axis in 0..self.n {
            for momentum in [false, true] {
                out = out
                    .add(&self.derivative(axis, momentum).derivative(axis, momentum))
                    .expect("same n");
            }
        }
        out
    }

    /// Gaussian smoothing `exp(s Laplacian)` applied to the polynomial;
    /// exact for polynomials (the series terminates).
    pub fn heat_smoothed(&self, s: f64) -> PolynomialSymbol {
        let mut out = self.clone();
        let mut term = self.clone();
        let mut k = 1.0;
        loop {
            term = term.laplacian();
            if term.terms.is_empty() {
                break;
            }
            let coeff = C64::new(s / k, 0.0);
            term = term.scaled(coeff);
            out = out.add(&term).expect("same n");
            // undo scaled factor accumulation: term currently holds
            // s^k Delta^k / k!, which is exactly what the next step needs.
            k += 1.0;
        }
        out
    }

    /// Rescales `X -> factor * X`, multiplying each monomial coefficient by
    /// `factor^degree`. Used for the semiclassical reduction `sym(sqrt(h) X)`.
    pub fn dilated(&self, factor: f64) -> PolynomialSymbol {
        let mut out = Self::zero(self.n);
        for (m, c) in self.terms.iter() {
            let scale = factor.powi(m.degree() as i32);
            out.add_term(m.clone(), c * C64::new(scale, 0.0));
        }
        out
    }

    /// Evaluates at a real phase point `(x_1..x_n, xi_1..xi_n)`.
    pub fn eval_real(&self, point: &[f64]) -> Result<C64> {
        if point.len() != 2 * self.n {
            return Err(Error::DimensionMismatch { expected: 2 * self.n, got: point.len() });
        }
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in self.terms.iter() {
            let mut v = 1.0;
            for (i, &e) in m.alpha.iter().enumerate() {
                v *= point[i].powi(e as i32);
            }
            for (i, &e) in m.beta.iter().enumerate() {
                v *= point[self.n + i].powi(e as i32);
            }
            acc += c * C64::new(v, 0.0);
        }
        Ok(acc)
    }

    /// Largest absolute coefficient.
    pub fn coeff_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Converts a quadratic form to a polynomial symbol.
    pub fn from_quadratic(q: &QuadraticSymbol) -> PolynomialSymbol {
        let n = q.n();
        let mut out = Self::zero(n);
        let d = 2 * n;
        let var = |i: usize| -> (usize, bool) {
            if i < n {
                (i, false)
            } else {
                (i - n, true)
            }
        };
        for i in 0..d {
            for j in i..d {
                let c = if i == j {
                    q.matrix()[[i, j]]
                } else {
                    q.matrix()[[i, j]] * C64::new(2.0, 0.0)
                };
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                let mut alpha = vec![0u32; n];
                let mut beta = vec![0u32; n];
                let (a0, m0) = var(i);
                let (a1, m1) = var(j);
                if m0 {
                    beta[a0] += 1;
                } else {
                    alpha[a0] += 1;
                }
                if m1 {
                    beta[a1] += 1;
                } else {
                    alpha[a1] += 1;
                }
                out.add_term(PhaseMonomial { alpha, beta }, c);
            }
        }
        out
    }

    /// Interprets a homogeneous degree-2 polynomial as a quadratic form.
    pub fn to_quadratic(&self) -> Result<QuadraticSymbol> {
        let n = self.n;
        let d = 2 * n;
        let mut q = ndarray::Array2::zeros((d, d));
        for (m, c) in self.terms.iter() {
            if m.degree() != 2 {
                return Err(Error::InvalidInput(format!(
                    "quadratic form requires homogeneous degree-2 terms, found degree {}",
                    m.degree()
                )));
            }
            let mut vars: Vec<usize> = Vec::with_capacity(2);
            for (i, &e) in m.alpha.iter().enumerate() {
                for _ in 0..e {
                    vars.push(i);
                }
            }
            for (i, &e) in m.beta.iter().enumerate() {
                for _ in 0..e {
                    vars.push(n + i);
                }
            }
            let (i, j) = (vars[0], vars[1]);
            if i == j {
                q[[i, i]] += *c;
            } else {
                let half = *c / C64::new(2.0, 0.0);
                q[[i, j]] += half;
                q[[j, i]] += half;
            }
        }
        QuadraticSymbol::new(n, q)
    }
}

/// Serialized form of a polynomial symbol term.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Serialized polynomial symbol.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSymbolJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

impl PolynomialSymbol {
    pub fn to_json(&self) -> PolynomialSymbolJson {
        PolynomialSymbolJson {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermJson {
                    alpha: m.alpha.clone(),
                    beta: m.beta.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolynomialSymbolJson) -> Result<Self> {
        let mut out = Self::zero(json.n);
        for t in &json.terms {
            if t.alpha.len() != json.n || t.beta.len() != json.n {
                return Err(Error::DimensionMismatch {
                    expected: json.n,
                    got: t.alpha.len().max(t.beta.len()),
                });
            }
            out.add_term(
                PhaseMonomial { alpha: t.alpha.clone(), beta: t.beta.clone() },
                Complex64::new(t.re, t.im),
            );
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn x(n: usize, axis: usize) -> PolynomialSymbol {
        let mut alpha = vec![0; n];
        alpha[axis] = 1;
        PolynomialSymbol::monomial(n, alpha, vec![0; n], c(1.0, 0.0)).unwrap()
    }

    fn xi(n: usize, axis: usize) -> PolynomialSymbol {
        let mut beta = vec![0; n];
        beta[axis] = 1;
        PolynomialSymbol::monomial(n, vec![0; n], beta, c(1.0, 0.0)).unwrap()
    }

    #[test]
    fn product_and_degree() {
        let p = x(1, 0).mul(&xi(1, 0)).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.eval_real(&[2.0, 3.0]).unwrap(), c(6.0, 0.0));
    }

    #[test]
    fn poisson_bracket_canonical() {
        // {x, xi} = dx/dxi * dxi/dx - dx/dx * dxi/dxi = -1.
        let b = x(1, 0).poisson_bracket(&xi(1, 0)).unwrap();
        assert_eq!(b.eval_real(&[0.5, -2.0]).unwrap(), c(-1.0, 0.0));
        // Antisymmetry on coefficients.
        let b2 = xi(1, 0).poisson_bracket(&x(1, 0)).unwrap();
        let sum = b.add(&b2).unwrap();
        assert_eq!(sum.num_terms(), 0);
    }

    #[test]
    fn quadratic_round_trip() {
        let q = crate::models::kfp(2).unwrap();
        let p = PolynomialSymbol::from_quadratic(&q);
        let back = p.to_quadratic().unwrap();
        let diff = q.matrix() - back.matrix();
        assert!(crate::linalg::max_norm(&diff) < 1e-15);
    }

    #[test]
    fn heat_smoothing_of_square() {
        // exp(s Delta) x^2 = x^2 + 2s.
        let p = x(1, 0).mul(&x(1, 0)).unwrap();
        let sm = p.heat_smoothed(0.25);
        assert_eq!(sm.eval_real(&[0.0, 0.0]).unwrap(), c(0.5, 0.0));
        assert_eq!(sm.eval_real(&[1.0, 0.0]).unwrap(), c(1.5, 0.0));
    }

    #[test]
    fn dilation_scales_by_degree() {
        let p = x(1, 0).mul(&x(1, 0)).unwrap(); // x^2
        let d = p.dilated(0.5);
        assert_eq!(d.eval_real(&[1.0, 0.0]).unwrap(), c(0.25, 0.0));
    }

    #[test]
    fn json_round_trip() {
        let p = x(2, 0)
            .mul(&xi(2, 1))
            .unwrap()
            .add(&PolynomialSymbol::constant(2, c(0.0, 1.5)))
            .unwrap();
        let json = p.to_json();
        let text = serde_json::to_string(&json).unwrap();
        let parsed: PolynomialSymbolJson = serde_json::from_str(&text).unwrap();
        let back = PolynomialSymbol::from_json(&parsed).unwrap();
        assert_eq!(p, back);
    }
}
