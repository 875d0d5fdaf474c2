//! Second-order finite differences for `-Delta_k = -(d_rr + d_r / r - k^2 / r^2)`
//! on the unit disk.
//!
//! The grid is cell centred, `r_j = (j - 1/2) / N`, so the pole is never a
//! grid point. Fluxes are taken at the half points `r_{j+1/2}`; the flux at
//! `r = 0` carries the factor `r_{1/2} = 0` and the flux at `r = 1` vanishes
//! (no-flux, equivalent to a reflected ghost point). With the quadrature
//! `<f, g> = sum_j f_j conj(g_j) r_j dr` the resulting matrix is exactly
//! self-adjoint.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::eigen::EigenBasis;

#[derive(Clone, Debug)]
pub struct RadialLaplacian {
    k: i64,
    dr: f64,
    r: Vec<f64>,
    weights: Vec<f64>,
    // S = R (-Delta_k), symmetric tridiagonal.
    diag: Vec<f64>,
    off: Vec<f64>,
    // LDL^T factors of S; `None` when S is singular (k = 0).
    ldl: Option<(Vec<f64>, Vec<f64>)>,
}

impl RadialLaplacian {
    pub fn new(points: usize, k: i64) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!(
                "radial grid needs at least 2 points, got {points}"
            )));
        }
        let dr = 1.0 / points as f64;
        let r: Vec<f64> = (1..=points).map(|j| (j as f64 - 0.5) * dr).collect();
        let weights = r.iter().map(|r| r * dr).collect();
        let k2 = (k * k) as f64;
        let half = |j: usize| j as f64 * dr; // r_{j+1/2} for 0-based j is (j+1) dr
        let mut diag = Vec::with_capacity(points);
        let mut off = Vec::with_capacity(points - 1);
        for j in 0..points {
            let outer = if j + 1 < points { half(j + 1) } else { 0.0 };
            let inner = half(j);
            diag.push((outer + inner) / (dr * dr) + k2 / r[j]);
            if j + 1 < points {
                off.push(-outer / (dr * dr));
            }
        }
        let ldl = factor(&diag, &off);
        Ok(Self { k, dr, r, weights, diag, off, ldl })
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn points(&self) -> usize {
        self.r.len()
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn grid(&self) -> &[f64] {
        &self.r
    }

    /// Midpoint quadrature weights `r_j dr`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter()
            .zip(b)
            .zip(&self.weights)
            .map(|((x, y), w)| x * y.conj() * w)
            .sum()
    }

    fn apply_s(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = f.len();
        (0..n)
            .map(|j| {
                let mut v = f[j] * self.diag[j];
                if j > 0 {
                    v += f[j - 1] * self.off[j - 1];
                }
                if j + 1 < n {
                    v += f[j + 1] * self.off[j];
                }
                v
            })
            .collect()
    }

    /// `-Delta_k f`.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut s = self.apply_s(f);
        s.iter_mut().zip(&self.r).for_each(|(v, r)| *v /= *r);
        s
    }

    /// Discrete `int (|f'|^2 + k^2/r^2 |f|^2) r dr`, i.e. `<-Delta_k f, f>`.
    pub fn dirichlet_form(&self, f: &[Complex64]) -> f64 {
        let s = self.apply_s(f);
        s.iter().zip(f).map(|(a, b)| (a * b.conj()).re).sum::<f64>() * self.dr
    }

    /// Solves `-Delta_k g = f`.
    pub fn solve(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        let (d, l) = self.ldl.as_ref().ok_or_else(|| {
            Error::SingularOperator(format!("-Delta_k with k = {} is singular under no-flux", self.k))
        })?;
        let n = f.len();
        // S g = R f
        let mut y: Vec<Complex64> = f.iter().zip(&self.r).map(|(v, r)| v * r).collect();
        for j in 1..n {
            let prev = y[j - 1];
            y[j] -= prev * l[j - 1];
        }
        for j in 0..n {
            y[j] /= d[j];
        }
        for j in (0..n - 1).rev() {
            let next = y[j + 1];
            y[j] -= next * l[j];
        }
        Ok(y)
    }

    /// `||f||_{H^-1}^2 = <(-Delta_k)^{-1} f, f>`.
    pub fn hminus_sq(&self, f: &[Complex64]) -> Result<f64> {
        let g = self.solve(f)?;
        Ok(self.inner(&g, f).re)
    }

    /// The operator in the symmetric coordinates `x = sqrt(r dr) f`.
    pub fn symmetric_matrix(&self) -> DMatrix<f64> {
        let n = self.points();
        let sr: Vec<f64> = self.r.iter().map(|r| r.sqrt()).collect();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = self.diag[j] / self.r[j];
            if j + 1 < n {
                let v = self.off[j] / (sr[j] * sr[j + 1]);
                m[(j, j + 1)] = v;
                m[(j + 1, j)] = v;
            }
        }
        m
    }

    /// Eigendecomposition, computed once per `(k, points)` for the process.
    pub fn eigenbasis(&self) -> Result<Arc<EigenBasis>> {
        type Slot = Arc<OnceLock<std::result::Result<Arc<EigenBasis>, String>>>;
        static CACHE: OnceLock<Mutex<HashMap<(i64, usize), Slot>>> = OnceLock::new();
        let slot = {
            let mut map = CACHE.get_or_init(Default::default).lock().unwrap();
            map.entry((self.k, self.points())).or_default().clone()
        };
        slot.get_or_init(|| {
            EigenBasis::symmetric(self.symmetric_matrix(), &self.weights)
                .map(Arc::new)
                .map_err(|e| e.to_string())
        })
        .clone()
        .map_err(Error::SingularOperator)
    }
}

fn factor(diag: &[f64], off: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let tol = 1e-12 * diag.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut d = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n.saturating_sub(1));
    d.push(diag[0]);
    for j in 1..n {
        if d[j - 1] <= tol {
            return None;
        }
        let lj = off[j - 1] / d[j - 1];
        l.push(lj);
        d.push(diag[j] - lj * off[j - 1]);
    }
    if d[n - 1] <= tol {
        return None;
    }
    Some((d, l))
}
