//! Input file schemas. Everything is a single strict JSON document:
//! unknown keys fail before any computation starts.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use quadspec_core::error::{Error, Result};
use quadspec_core::lattice::{ModelPoint, ModelProblem};
use quadspec_core::parse::{parse_polynomial, parse_quadratic};
use quadspec_core::poly::{PolynomialSymbol, PolynomialSymbolJson};
use quadspec_core::symplectic::{QuadraticSymbol, QuadraticSymbolJson};

/// A symbol given either as an expression or as coefficient matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, rename = "Q_re", skip_serializing_if = "Option::is_none")]
    pub q_re: Option<Vec<Vec<f64>>>,
    #[serde(default, rename = "Q_im", skip_serializing_if = "Option::is_none")]
    pub q_im: Option<Vec<Vec<f64>>>,
}

impl SymbolSpec {
    pub fn to_quadratic(&self) -> Result<QuadraticSymbol> {
        match (&self.expr, &self.q_re, &self.q_im) {
            (Some(expr), None, None) => parse_quadratic(expr, self.n),
            (None, Some(re), Some(im)) => QuadraticSymbol::from_json(&QuadraticSymbolJson {
                n: self.n,
                q_re: re.clone(),
                q_im: im.clone(),
            }),
            (None, Some(re), None) => QuadraticSymbol::from_json(&QuadraticSymbolJson {
                n: self.n,
                q_re: re.clone(),
                q_im: vec![vec![0.0; 2 * self.n]; 2 * self.n],
            }),
            _ => Err(Error::InvalidInput(
                "symbol needs either 'expr' or 'Q_re'/'Q_im' matrices, not both".into(),
            )),
        }
    }

    /// Polynomial view (for the oracle, where degree up to 4 is legal).
    pub fn to_polynomial(&self) -> Result<PolynomialSymbol> {
        match &self.expr {
            Some(expr) => parse_polynomial(expr, self.n),
            None => Ok(PolynomialSymbol::from_quadratic(&self.to_quadratic()?)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl ComplexSpec {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub location: Vec<f64>,
    /// Name of an entry in the problem's symbol table.
    pub symbol: String,
    #[serde(default)]
    pub p1: Option<ComplexSpec>,
}

/// Perturbation polynomial: an expression or an explicit term list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<quadspec_core::poly::TermJson>>,
}

impl PerturbationSpec {
    pub fn to_polynomial(&self) -> Result<PolynomialSymbol> {
        match (&self.expr, &self.terms) {
            (Some(expr), None) => parse_polynomial(expr, self.n),
            (None, Some(terms)) => PolynomialSymbol::from_json(&PolynomialSymbolJson {
                n: self.n,
                terms: terms.clone(),
            }),
            _ => Err(Error::InvalidInput(
                "perturbation needs either 'expr' or 'terms', not both".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub points: Vec<PointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
}

/// The one-document problem file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: u32,
    pub symbols: BTreeMap<String, SymbolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
}

impl ProblemFile {
    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            return Err(Error::InvalidInput(format!(
                "unsupported problem-file version {}",
                self.version
            )));
        }
        if self.symbols.is_empty() {
            return Err(Error::InvalidInput("problem file declares no symbols".into()));
        }
        Ok(())
    }

    pub fn to_model_problem(&self, h_override: Option<f64>) -> Result<ModelProblem> {
        let model = self
            .model
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("problem file has no 'model' section".into()))?;
        let h = h_override
            .or(model.h)
            .ok_or_else(|| Error::InvalidInput("no h given (model.h or --h)".into()))?;
        let mut points = Vec::new();
        for spec in &model.points {
            let symbol = self.symbols.get(&spec.symbol).ok_or_else(|| {
                Error::InvalidInput(format!("unknown symbol '{}' in model points", spec.symbol))
            })?;
            points.push(ModelPoint {
                location: spec.location.clone(),
                q: symbol.to_quadratic()?,
                p1: spec.p1.as_ref().map(|c| c.value()).unwrap_or(Complex64::new(0.0, 0.0)),
            });
        }
        let perturbation = model
            .perturbation
            .as_ref()
            .map(|p| p.to_polynomial())
            .transpose()?;
        ModelProblem::new(points, h, perturbation)
    }
}

/// Reads a file and parses it as strict JSON into `T`.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let value: T = serde_json::from_slice(&bytes)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok((value, bytes))
}

/// Loads a symbol file (bare `SymbolSpec` document).
pub fn load_symbol(path: &Path) -> Result<(SymbolSpec, Vec<u8>)> {
    read_json::<SymbolSpec>(path)
}

/// Loads a problem file and validates it.
pub fn load_problem(path: &Path) -> Result<(ProblemFile, Vec<u8>)> {
    let (problem, bytes) = read_json::<ProblemFile>(path)?;
    problem.validate()?;
    Ok((problem, bytes))
}
