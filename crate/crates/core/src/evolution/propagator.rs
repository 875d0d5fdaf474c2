//! Strang-split propagator `e^{-nu A dt/2} e^{-B dt} e^{-nu A dt/2}`.
//!
//! Each model is evolved in coordinates where `A` is diagonal and the `H`
//! norm is the plain Euclidean norm, so diffusion is an exact pointwise
//! decay and norms cost `O(n)`:
//!
//! * torus: Fourier coefficients, advection as a phase in physical space;
//! * Kolmogorov: `psi = sqrt(w) phi`, where `B` becomes a real antisymmetric
//!   tridiagonal matrix split into exactly solvable 2x2 rotations;
//! * spiral: eigen-coordinates of the discrete `-Delta_k`, advection as a
//!   phase on the radial grid;
//! * kinetic: Hermite coefficients, advection through the eigenvectors of `v.k`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::models::{ModelProblem, Norms, Operators};
use crate::spectral::field::fft_index;
use crate::spectral::{EigenBasis, Field, TorusGrid};

/// Advection substeps must preserve the `H` norm to this relative accuracy.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
enum Advection {
    Phase {
        grid: TorusGrid,
        phase: Vec<Complex64>,
        scratch: Vec<Complex64>,
    },
    Rotations {
        /// `(i, j, cos, sin)` for the half step on even bonds.
        even: Vec<(usize, usize, f64, f64)>,
        odd: Vec<(usize, usize, f64, f64)>,
    },
    /// `x -> U diag(phase) U^T x` with real orthogonal `U`, or
    /// `U^T diag(phase) U x` when `transposed`.
    Conjugated {
        u: Arc<DMatrix<f64>>,
        transposed: bool,
        phase: Vec<Complex64>,
        work: DMatrix<f64>,
        out: DMatrix<f64>,
    },
}

/// Reusable one-step map for a fixed model, viscosity and time step.
#[derive(Clone, Debug)]
pub struct Propagator<'m> {
    model: &'m ModelProblem,
    nu: f64,
    dt: f64,
    lambda: Vec<f64>,
    half: Vec<f64>,
    full: Vec<f64>,
    advection: Advection,
    /// Spiral eigenbasis, kept to convert back to grid values.
    eigen: Option<Arc<EigenBasis>>,
    sqrt_w: Option<Vec<f64>>,
}

impl<'m> Propagator<'m> {
    pub fn new(model: &'m ModelProblem, nu: f64, dt: f64) -> Result<Self> {
        Self::with_direction(model, nu, dt, false)
    }

    /// Propagator for the adjoint flow `B -> -B` when `reverse` is set.
    /// Composing `n` steps gives the exact adjoint of `n` forward steps.
    pub fn with_direction(model: &'m ModelProblem, nu: f64, dt: f64, reverse: bool) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step {dt} must be positive")));
        }
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParameter(format!("viscosity {nu} must be nonnegative")));
        }
        let sign = if reverse { -1.0 } else { 1.0 };
        let mut eigen = None;
        let mut sqrt_w = None;
        let (lambda, advection) = match &model.ops {
            Operators::Torus { grid, k, lambda, velocity } => {
                let kk = *k as f64;
                let phase = velocity
                    .iter()
                    .map(|u| Complex64::from_polar(1.0, -sign * kk * u * dt))
                    .collect();
                let scratch = vec![Complex64::default(); grid.scratch_len()];
                (lambda.clone(), Advection::Phase { grid: grid.clone(), phase, scratch })
            }
            Operators::Kolmogorov { m_max, kl, lambda, weight } => {
                let n = 2 * m_max + 1;
                let mm = *m_max as i64;
                let mut even = Vec::new();
                let mut odd = Vec::new();
                for (bond, m) in (-mm..mm).enumerate() {
                    let i = fft_index(m, n);
                    let j = fft_index(m + 1, n);
                    let b = 0.5 * kl * (weight[i] * weight[j]).sqrt();
                    if bond % 2 == 0 {
                        let a = sign * b * 0.5 * dt;
                        even.push((i, j, a.cos(), a.sin()));
                    } else {
                        let a = sign * b * dt;
                        odd.push((i, j, a.cos(), a.sin()));
                    }
                }
                sqrt_w = Some(weight.iter().map(|w| w.sqrt()).collect());
                (lambda.clone(), Advection::Rotations { even, odd })
            }
            Operators::Spiral { lap, rate, .. } => {
                let basis = lap.eigenbasis()?;
                let u = basis.shared_vectors().expect("radial eigenbasis is dense");
                let n = rate.len();
                let phase = rate.iter().map(|a| Complex64::from_polar(1.0, -sign * a * dt)).collect();
                let lambda = basis.spectrum().eigenvalues().to_vec();
                eigen = Some(basis);
                (
                    lambda,
                    Advection::Conjugated {
                        u,
                        transposed: true,
                        phase,
                        work: DMatrix::zeros(n, 2),
                        out: DMatrix::zeros(n, 2),
                    },
                )
            }
            Operators::Kinetic { space } => {
                let n = space.len();
                let phase = space
                    .jacobi_values
                    .iter()
                    .map(|mu| Complex64::from_polar(1.0, -sign * mu * dt))
                    .collect();
                (
                    space.total_degree.clone(),
                    Advection::Conjugated {
                        u: space.jacobi_vectors.clone(),
                        transposed: false,
                        phase,
                        work: DMatrix::zeros(n, 2),
                        out: DMatrix::zeros(n, 2),
                    },
                )
            }
        };
        let half = lambda.iter().map(|l| (-0.5 * nu * l * dt).exp()).collect();
        let full = lambda.iter().map(|l| (-nu * l * dt).exp()).collect();
        Ok(Self { model, nu, dt, lambda, half, full, advection, eigen, sqrt_w })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn model(&self) -> &ModelProblem {
        self.model
    }

    /// Eigenvalues of `A` in propagator coordinates.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Converts a field into propagator coordinates.
    pub fn load(&self, f: &Field) -> Result<Vec<Complex64>> {
        self.model.check(f)?;
        if let Some(e) = &self.eigen {
            return Ok(e.coordinates(f)?.into_coeffs());
        }
        let mut x = f.coeffs().to_vec();
        if let Some(s) = &self.sqrt_w {
            x.iter_mut().zip(s).for_each(|(v, s)| *v *= s);
        }
        Ok(x)
    }

    /// Converts propagator coordinates back into a model field.
    pub fn store(&self, x: &[Complex64]) -> Result<Field> {
        let basis = self.model.basis();
        if let Some(e) = &self.eigen {
            return e.synthesize(x, basis);
        }
        let mut v = x.to_vec();
        if let Some(s) = &self.sqrt_w {
            v.iter_mut().zip(s).for_each(|(v, s)| *v /= s);
        }
        Field::new(v, basis)
    }

    pub fn norms(&self, x: &[Complex64]) -> Norms {
        let (mut h, mut h1, mut hm1) = (0.0, 0.0, 0.0);
        for (v, l) in x.iter().zip(&self.lambda) {
            let a = v.norm_sqr();
            h += a;
            h1 += a * l;
            hm1 += a / l;
        }
        Norms { h: h.sqrt(), h1: h1.sqrt(), hm1: hm1.sqrt() }
    }

    pub fn h_norm(&self, x: &[Complex64]) -> f64 {
        x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies `steps` Strang steps, fusing the interior half-step diffusions.
    pub fn advance(&mut self, x: &mut [Complex64], steps: usize) -> Result<()> {
        if steps == 0 {
            return Ok(());
        }
        let diffuse = self.nu > 0.0;
        if diffuse {
            scale(x, &self.half);
        }
        for i in 0..steps {
            self.advect(x)?;
            if diffuse && i + 1 < steps {
                scale(x, &self.full);
            }
        }
        if diffuse {
            scale(x, &self.half);
        }
        Ok(())
    }

    /// Applies `e^{-nu A tau}` alone.
    pub fn diffuse(&self, x: &mut [Complex64], tau: f64) {
        for (v, l) in x.iter_mut().zip(&self.lambda) {
            *v *= (-self.nu * l * tau).exp();
        }
    }

    fn advect(&mut self, x: &mut [Complex64]) -> Result<()> {
        match &mut self.advection {
            Advection::Phase { grid, phase, scratch } => {
                grid.to_physical(x, scratch);
                x.iter_mut().zip(phase.iter()).for_each(|(v, p)| *v *= p);
                grid.to_spectral(x, scratch);
            }
            Advection::Rotations { even, odd } => {
                let before = norm_sq(x);
                rotate(x, even);
                rotate(x, odd);
                rotate(x, even);
                check_defect(before, norm_sq(x), self.dt)?;
            }
            Advection::Conjugated { u, transposed, phase, work, out } => {
                let before = norm_sq(x);
                for (i, v) in x.iter().enumerate() {
                    work[(i, 0)] = v.re;
                    work[(i, 1)] = v.im;
                }
                if *transposed {
                    out.gemm(1.0, u, work, 0.0);
                } else {
                    out.gemm_tr(1.0, u, work, 0.0);
                }
                for (i, p) in phase.iter().enumerate() {
                    let y = Complex64::new(out[(i, 0)], out[(i, 1)]) * p;
                    out[(i, 0)] = y.re;
                    out[(i, 1)] = y.im;
                }
                if *transposed {
                    work.gemm_tr(1.0, u, out, 0.0);
                } else {
                    work.gemm(1.0, u, out, 0.0);
                }
                for (i, v) in x.iter_mut().enumerate() {
                    *v = Complex64::new(work[(i, 0)], work[(i, 1)]);
                }
                check_defect(before, norm_sq(x), self.dt)?;
            }
        }
        Ok(())
    }
}

fn scale(x: &mut [Complex64], f: &[f64]) {
    x.iter_mut().zip(f).for_each(|(v, s)| *v *= s);
}

fn norm_sq(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

fn rotate(x: &mut [Complex64], bonds: &[(usize, usize, f64, f64)]) {
    for &(i, j, c, s) in bonds {
        let (a, b) = (x[i], x[j]);
        x[i] = a * c + b * s;
        x[j] = b * c - a * s;
    }
}

fn check_defect(before: f64, after: f64, dt: f64) -> Result<()> {
    if before == 0.0 {
        return Ok(());
    }
    let defect = ((after - before) / before).abs();
    if defect > UNITARITY_TOL {
        return Err(Error::UnitarityDefect { defect, dt });
    }
    Ok(())
}
