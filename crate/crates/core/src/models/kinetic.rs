use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Hermite truncation of `B = i v.k` and the Ornstein-Uhlenbeck operator
/// `A = -Delta_v + v.grad_v` in `d` velocity variables.
///
/// Normalized Hermite functions `h_n = He_n / sqrt(n!)` satisfy
/// `v h_n = sqrt(n+1) h_{n+1} + sqrt(n) h_{n-1}`, so `v.k` is a real
/// symmetric matrix coupling adjacent total degrees, and `A h_n = |n| h_n`.
#[derive(Clone, Debug)]
pub struct HermiteSpace {
    pub(crate) dim: usize,
    pub(crate) degree: usize,
    pub(crate) indices: Vec<Vec<usize>>,
    pub(crate) total_degree: Vec<f64>,
    /// `sum_j k_j V_j`.
    pub(crate) jacobi: DMatrix<f64>,
    /// Eigenpairs of `jacobi`, for the exact advection exponential.
    pub(crate) jacobi_values: Vec<f64>,
    pub(crate) jacobi_vectors: Arc<DMatrix<f64>>,
}

impl HermiteSpace {
    pub fn new(k: &[i64], degree: usize) -> Result<Self> {
        let dim = k.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("velocity dimension must be >= 1".into()));
        }
        if degree < 2 {
            return Err(Error::InvalidParameter(format!(
                "Hermite truncation degree {degree} is too small to represent v.k (need >= 2)"
            )));
        }
        if k.iter().all(|&x| x == 0) {
            return Err(Error::InvalidParameter("spatial frequency k must be nonzero".into()));
        }
        let mut indices = Vec::new();
        for total in 1..=degree {
            push_compositions(dim, total, &mut Vec::new(), &mut indices);
        }
        let lookup: HashMap<&[usize], usize> =
            indices.iter().enumerate().map(|(i, n)| (n.as_slice(), i)).collect();
        let len = indices.len();
        let mut jacobi = DMatrix::zeros(len, len);
        for (i, n) in indices.iter().enumerate() {
            for (j, &kj) in k.iter().enumerate() {
                if kj == 0 {
                    continue;
                }
                // coupling n -> n + e_j with weight sqrt(n_j + 1)
                let mut up = n.clone();
                up[j] += 1;
                if let Some(&iu) = lookup.get(up.as_slice()) {
                    let c = kj as f64 * ((n[j] + 1) as f64).sqrt();
                    jacobi[(i, iu)] += c;
                    jacobi[(iu, i)] += c;
                }
            }
        }
        let total_degree = indices.iter().map(|n| n.iter().sum::<usize>() as f64).collect();
        let eig = SymmetricEigen::new(jacobi.clone());
        Ok(Self {
            dim,
            degree,
            indices,
            total_degree,
            jacobi,
            jacobi_values: eig.eigenvalues.iter().copied().collect(),
            jacobi_vectors: Arc::new(eig.eigenvectors),
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn spectral_radius(&self) -> f64 {
        self.jacobi_values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Positions of the coefficients at the truncation degree.
    pub fn top_degree(&self) -> impl Iterator<Item = usize> + '_ {
        let top = self.degree as f64;
        self.total_degree
            .iter()
            .enumerate()
            .filter(move |(_, d)| **d == top)
            .map(|(i, _)| i)
    }
}

fn push_compositions(slots: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if slots == 1 {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        push_compositions(slots - 1, total - first, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_ladder() {
        let h = HermiteSpace::new(&[2], 4).unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(h.total_degree, vec![1.0, 2.0, 3.0, 4.0]);
        // v h_1 = sqrt(2) h_2 + h_0 (h_0 dropped)
        assert!((h.jacobi[(0, 1)] - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        assert!((h.jacobi[(2, 3)] - 2.0 * 4f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.jacobi[(0, 2)], 0.0);
    }

    #[test]
    fn multi_index_enumeration() {
        let h = HermiteSpace::new(&[1, 1], 3).unwrap();
        assert_eq!(h.len(), 9);
        assert_eq!(h.top_degree().count(), 4);
    }

    #[test]
    fn rejects_degenerate_truncations() {
        assert!(HermiteSpace::new(&[1], 1).is_err());
        assert!(HermiteSpace::new(&[0, 0], 4).is_err());
        assert!(HermiteSpace::new(&[], 4).is_err());
    }
}
