//! Scalar fields with ambient extension data, registered by name.

use crate::error::{Error, Result};
use crate::geometry::EmbeddedManifold;
use crate::linalg::SquareMatrix;

/// A smooth scalar field on the manifold together with its ambient
/// extension: value, ambient gradient `∇f̄` (tangent on the manifold) and
/// ambient Hessian `Hess f̄`.
pub trait ScalarField: Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn hessian(&self, x: &[f64]) -> SquareMatrix;
    fn name(&self) -> String;
}

/// Coordinate function `ῑ^i` of the embedding extension.
pub struct CoordinateField {
    manifold: EmbeddedManifold,
    index: usize,
}

impl CoordinateField {
    pub fn new(manifold: EmbeddedManifold, index: usize) -> Result<Self> {
        if index >= manifold.ambient_dim() {
            return Err(Error::InvalidParam(format!(
                "coordinate {index} out of range for ambient dimension {}",
                manifold.ambient_dim()
            )));
        }
        Ok(Self { manifold, index })
    }
}

impl ScalarField for CoordinateField {
    fn value(&self, x: &[f64]) -> f64 {
        self.manifold.extension_value(x)[self.index]
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.manifold.extension_jacobian(x).row(self.index).to_vec()
    }

    fn hessian(&self, x: &[f64]) -> SquareMatrix {
        self.manifold.extension_hessian(x, self.index)
    }

    fn name(&self) -> String {
        format!("coord:{}", self.index)
    }
}

/// Affine field `f(x) = ⟨c, x⟩` (gradient constant, Hessian zero).
pub struct LinearField {
    coeffs: Vec<f64>,
}

impl LinearField {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }
}

impl ScalarField for LinearField {
    fn value(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(&self.coeffs, x)
    }

    fn gradient(&self, _x: &[f64]) -> Vec<f64> {
        self.coeffs.clone()
    }

    fn hessian(&self, _x: &[f64]) -> SquareMatrix {
        SquareMatrix::zeros(self.coeffs.len())
    }

    fn name(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        format!("linear:{}", parts.join(","))
    }
}

/// Resolve a field by its registry name: `coord:<i>` or
/// `linear:<c1>,<c2>,…`.
pub fn resolve_field(spec: &str, m: &EmbeddedManifold) -> Result<Box<dyn ScalarField>> {
    if let Some(idx) = spec.strip_prefix("coord:") {
        let i: usize = idx
            .parse()
            .map_err(|_| Error::InvalidParam(format!("bad coordinate index in '{spec}'")))?;
        return Ok(Box::new(CoordinateField::new(m.clone(), i)?));
    }
    if let Some(list) = spec.strip_prefix("linear:") {
        let coeffs: Vec<f64> = list
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidParam(format!("bad coefficients in '{spec}'")))?;
        if coeffs.len() != m.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: m.ambient_dim(),
                got: coeffs.len(),
            });
        }
        return Ok(Box::new(LinearField::new(coeffs)));
    }
    Err(Error::InvalidParam(format!("unknown field '{spec}'")))
}

/// The default integrand dictionary: every coordinate function.
pub fn field_dictionary(m: &EmbeddedManifold) -> Vec<Box<dyn ScalarField>> {
    (0..m.ambient_dim())
        .map(|i| Box::new(CoordinateField::new(m.clone(), i).unwrap()) as Box<dyn ScalarField>)
        .collect()
}
