use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::Field;

/// Eigenvalues of a strictly positive self-adjoint operator, truncated to a
/// finite number of modes and sorted ascending. Degenerate eigenvalues appear
/// repeated.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidParameter("spectrum must be non-empty".into()));
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::SingularOperator(format!(
                "eigenvalue {bad} is not strictly positive"
            )));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "eigenvalues must be sorted in nondecreasing order".into(),
            ));
        }
        Ok(Self { eigenvalues })
    }

    /// Sorts the eigenvalues and returns the permutation `order` such that
    /// sorted position `j` corresponds to input index `order[j]`.
    pub fn from_unsorted(values: &[f64]) -> Result<(Self, Vec<usize>)> {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let sorted = order.iter().map(|&i| values[i]).collect();
        Ok((Self::new(sorted)?, order))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Number of retained modes.
    pub fn truncation(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn median(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() / 2]
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.len() != self.eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: self.eigenvalues.len(),
                found: f.len(),
            });
        }
        Ok(())
    }
}

/// `(sum_j lambda_j^s |f_j|^2)^(1/2)` for a field given in the eigenbasis of
/// `spec`.
pub fn sobolev_norm(f: &Field, spec: &Spectrum, s: f64) -> Result<f64> {
    spec.check(f)?;
    Ok(sobolev_norm_sq(f.coeffs(), spec.eigenvalues(), s).sqrt())
}

pub(crate) fn sobolev_norm_sq(coeffs: &[Complex64], eigenvalues: &[f64], s: f64) -> f64 {
    if s == 0.0 {
        return coeffs.iter().map(|c| c.norm_sqr()).sum();
    }
    coeffs
        .iter()
        .zip(eigenvalues)
        .map(|(c, l)| l.powf(s) * c.norm_sqr())
        .sum()
}

/// Projection onto the eigenmodes with `lambda_j <= r`.
pub fn project_low(f: &Field, spec: &Spectrum, r: f64) -> Result<Field> {
    spec.check(f)?;
    let coeffs = f
        .coeffs()
        .iter()
        .zip(spec.eigenvalues())
        .map(|(&c, &l)| if l <= r { c } else { Complex64::new(0.0, 0.0) })
        .collect();
    Field::new(coeffs, f.basis().clone())
}
