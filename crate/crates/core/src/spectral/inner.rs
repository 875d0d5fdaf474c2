use num_complex::Complex64;

use crate::error::{Error, Result};

/// Working inner product of a model's coefficient space.
#[derive(Clone, Debug, PartialEq)]
pub enum InnerProduct {
    /// `sum a conj(b)`: torus Fourier coefficients, or orthonormal Hermite
    /// coefficients (where it realizes the Gibbs-weighted product).
    Flat,
    /// Midpoint quadrature `sum a conj(b) r_j dr` on the radial grid.
    WeightedRadial { weights: Vec<f64> },
    /// `int phi conj(psi) G(v) dv` expressed in orthonormal Hermite coefficients.
    GibbsWeighted,
    /// `int (I + Delta_k^{-1}) phi conj(psi) dy`, per-mode multipliers
    /// `1 - 1/(L^2 k^2 + m^2)` in storage order.
    KolmogorovModified { multipliers: Vec<f64> },
}

impl InnerProduct {
    pub fn kolmogorov(multipliers: Vec<f64>) -> Result<Self> {
        if let Some(w) = multipliers.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "modified inner product multiplier {w} is not positive"
            )));
        }
        Ok(Self::KolmogorovModified { multipliers })
    }

    pub fn name(&self) -> &'static str {
        match self {
            InnerProduct::Flat => "flat",
            InnerProduct::WeightedRadial { .. } => "weighted-radial",
            InnerProduct::GibbsWeighted => "gibbs-weighted",
            InnerProduct::KolmogorovModified { .. } => "kolmogorov-modified",
        }
    }

    /// Per-coefficient weights; `None` means all ones.
    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            InnerProduct::WeightedRadial { weights } => Some(weights),
            InnerProduct::KolmogorovModified { multipliers } => Some(multipliers),
            InnerProduct::Flat | InnerProduct::GibbsWeighted => None,
        }
    }

    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        match self.weights() {
            None => a.iter().zip(b).map(|(x, y)| x * y.conj()).sum(),
            Some(w) => a.iter().zip(b).zip(w).map(|((x, y), w)| x * y.conj() * w).sum(),
        }
    }

    pub fn norm_sq(&self, a: &[Complex64]) -> f64 {
        match self.weights() {
            None => a.iter().map(|x| x.norm_sqr()).sum(),
            Some(w) => a.iter().zip(w).map(|(x, w)| x.norm_sqr() * w).sum(),
        }
    }

    pub fn norm(&self, a: &[Complex64]) -> f64 {
        self.norm_sq(a).sqrt()
    }
}
