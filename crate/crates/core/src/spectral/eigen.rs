use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::{Basis, Field};
use crate::spectral::spectrum::{sobolev_norm, Spectrum};

/// Orthonormal eigenbasis of a discretized positive operator `A`, expressed
/// as a map from a model's working coordinates to sorted eigen-coordinates.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    spectrum: Spectrum,
    transform: Transform,
}

#[derive(Clone, Debug)]
enum Transform {
    /// Working coordinates are already eigen-coordinates up to a positive
    /// per-entry scale (the square root of the inner-product weight).
    Diagonal { order: Vec<usize>, scale: Vec<f64> },
    /// `c = Q^T (sqrt_w * f)` with orthonormal eigenvector columns `Q`.
    Dense {
        vectors: Arc<DMatrix<f64>>,
        sqrt_weights: Vec<f64>,
    },
}

impl EigenBasis {
    /// Operator diagonal in the working coordinates, with eigenvalues in
    /// storage order and inner-product weights `weights`.
    pub fn diagonal(eigenvalues: &[f64], weights: &[f64]) -> Result<Self> {
        if eigenvalues.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                found: weights.len(),
            });
        }
        let (spectrum, order) = Spectrum::from_unsorted(eigenvalues)?;
        Ok(Self {
            spectrum,
            transform: Transform::Diagonal {
                order,
                scale: weights.iter().map(|w| w.sqrt()).collect(),
            },
        })
    }

    /// Eigendecomposition of the symmetric matrix `sym`, which represents the
    /// operator in coordinates `x = sqrt(w) * f`.
    pub fn symmetric(sym: DMatrix<f64>, weights: &[f64]) -> Result<Self> {
        let n = sym.nrows();
        if weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
        }
        let eig = SymmetricEigen::new(sym);
        let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
        if let Some(v) = vals.iter().find(|v| **v <= 1e-12 * scale) {
            return Err(Error::SingularOperator(format!(
                "discretized operator has eigenvalue {v:.3e}; check boundary or pole treatment"
            )));
        }
        let (spectrum, order) = Spectrum::from_unsorted(&vals)?;
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Self {
            spectrum,
            transform: Transform::Dense {
                vectors: Arc::new(vectors),
                sqrt_weights: weights.iter().map(|w| w.sqrt()).collect(),
            },
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn len(&self) -> usize {
        self.spectrum.truncation()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dense orthonormal eigenvectors (columns, sorted by eigenvalue) in the
    /// symmetric coordinates, if this basis is not diagonal.
    pub fn vectors(&self) -> Option<(&DMatrix<f64>, &[f64])> {
        match &self.transform {
            Transform::Dense { vectors, sqrt_weights } => Some((vectors.as_ref(), sqrt_weights)),
            Transform::Diagonal { .. } => None,
        }
    }

    pub(crate) fn shared_vectors(&self) -> Option<Arc<DMatrix<f64>>> {
        match &self.transform {
            Transform::Dense { vectors, .. } => Some(vectors.clone()),
            Transform::Diagonal { .. } => None,
        }
    }

    /// Coordinates of `f` in this eigenbasis.
    pub fn coordinates(&self, f: &Field) -> Result<Field> {
        let n = self.len();
        if f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.len() });
        }
        let v = f.coeffs();
        let coeffs = match &self.transform {
            Transform::Diagonal { order, scale } => {
                order.iter().map(|&i| v[i] * scale[i]).collect()
            }
            Transform::Dense { vectors, sqrt_weights } => {
                let mut out = vec![Complex64::default(); n];
                for (j, o) in out.iter_mut().enumerate() {
                    let col = vectors.column(j);
                    *o = col
                        .iter()
                        .zip(v.iter().zip(sqrt_weights))
                        .map(|(q, (x, s))| x * (q * s))
                        .sum();
                }
                out
            }
        };
        Field::new(coeffs, Basis::Eigen { len: n })
    }

    /// Inverse of [`coordinates`](Self::coordinates): builds the working
    /// representation of the field with eigen-coordinates `coords`.
    pub fn synthesize(&self, coords: &[Complex64], basis: Basis) -> Result<Field> {
        let n = self.len();
        if coords.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: coords.len() });
        }
        let mut out = vec![Complex64::default(); n];
        match &self.transform {
            Transform::Diagonal { order, scale } => {
                for (j, &i) in order.iter().enumerate() {
                    out[i] = coords[j] / scale[i];
                }
            }
            Transform::Dense { vectors, sqrt_weights } => {
                for (j, c) in coords.iter().enumerate() {
                    if *c == Complex64::default() {
                        continue;
                    }
                    for (i, q) in vectors.column(j).iter().enumerate() {
                        out[i] += c * *q;
                    }
                }
                for (o, s) in out.iter_mut().zip(sqrt_weights) {
                    *o /= *s;
                }
            }
        }
        Field::new(out, basis)
    }
}

/// `||A^{-1/2} f||_H`, the discrete H^{-1} norm. In finite dimensions this
/// coincides with the dual norm `sup |<f, eta>| / ||eta||_{H^1}`.
pub fn dual_norm_hminus(f: &Field, basis: &EigenBasis) -> Result<f64> {
    let c = basis.coordinates(f)?;
    sobolev_norm(&c, basis.spectrum(), -1.0)
}
