use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which representation a [`Field`]'s coefficients live in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Basis {
    /// Fourier coefficients in y for modes `m in [-m_max, m_max]`, stored in
    /// FFT order (0, 1, .., m_max, -m_max, .., -1). `real` marks fields that
    /// represent real scalars and must be conjugate symmetric.
    TorusFourier { m_max: usize, real: bool },
    /// Point values on the cell-centred grid `r_j = (j - 1/2)/points`.
    RadialGrid { points: usize },
    /// Coefficients on normalized Hermite functions of total degree
    /// `1..=degree` in `dim` velocity variables.
    Hermite { dim: usize, degree: usize },
    /// Coordinates in an orthonormal eigenbasis, sorted by eigenvalue.
    Eigen { len: usize },
}

impl Basis {
    pub fn len(&self) -> usize {
        match *self {
            Basis::TorusFourier { m_max, .. } => 2 * m_max + 1,
            Basis::RadialGrid { points } => points,
            Basis::Hermite { dim, degree } => hermite_count(dim, degree),
            Basis::Eigen { len } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Number of multi-indices in `dim` variables with total degree in `1..=degree`.
pub fn hermite_count(dim: usize, degree: usize) -> usize {
    // C(degree + dim, dim) - 1
    let mut c: usize = 1;
    for i in 1..=dim {
        c = c * (degree + i) / i;
    }
    c - 1
}

/// Mode number of FFT-ordered index `i` on a grid of `n` points.
pub fn fft_mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT-ordered index of mode `m` on a grid of `n` points.
pub fn fft_index(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    coeffs: Vec<Complex64>,
    basis: Basis,
}

impl Field {
    pub fn new(coeffs: Vec<Complex64>, basis: Basis) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: coeffs.len(),
            });
        }
        let f = Self { coeffs, basis };
        if let Basis::TorusFourier { real: true, .. } = f.basis {
            if !f.is_conjugate_symmetric(1e-12) {
                return Err(Error::InvalidParameter(
                    "real-representation torus field is not conjugate symmetric".into(),
                ));
            }
        }
        Ok(f)
    }

    pub fn zeros(basis: Basis) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); basis.len()],
            basis,
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            basis: self.basis.clone(),
        }
    }

    /// Coefficient-wise difference; the bases must agree.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if self.basis != other.basis {
            return Err(Error::InvalidParameter(format!(
                "basis mismatch: {:?} vs {:?}",
                self.basis, other.basis
            )));
        }
        Ok(Field {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
            basis: self.basis.clone(),
        })
    }

    /// Checks `c_{-m} = conj(c_m)` for torus fields; other bases are trivially
    /// accepted.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let Basis::TorusFourier { m_max, .. } = self.basis else {
            return true;
        };
        let n = 2 * m_max + 1;
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        (0..=m_max as i64).all(|m| {
            let a = self.coeffs[fft_index(m, n)];
            let b = self.coeffs[fft_index(-m, n)];
            (a - b.conj()).norm() <= tol * scale
        })
    }
}
