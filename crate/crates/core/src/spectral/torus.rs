use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::spectral::field::fft_mode;

/// Collocation grid `y_j = 2 pi j / n`, `n = 2 m_max + 1`, paired with the
/// Fourier modes `|m| <= m_max`. Coefficients are normalized so that
/// `sum |c_m|^2` equals the mean of `|f(y)|^2`.
#[derive(Clone)]
pub struct TorusGrid {
    m_max: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGrid").field("m_max", &self.m_max).finish()
    }
}

impl TorusGrid {
    pub fn new(m_max: usize) -> Self {
        let n = 2 * m_max + 1;
        let mut planner = FftPlanner::new();
        Self {
            m_max,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn len(&self) -> usize {
        2 * self.m_max + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
    }

    /// Mode numbers in storage (FFT) order.
    pub fn modes(&self) -> Vec<i64> {
        let n = self.len();
        (0..n).map(|i| fft_mode(i, n)).collect()
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// Coefficients to grid values, in place.
    pub fn to_physical(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }

    /// Grid values to coefficients, in place.
    pub fn to_spectral(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
        let s = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|c| *c *= s);
    }

    pub fn physical(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.to_physical(&mut buf, &mut scratch);
        buf
    }

    pub fn spectral(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.to_spectral(&mut buf, &mut scratch);
        buf
    }

    /// Spectral derivative of real samples.
    pub fn derivative(&self, values: &[f64]) -> Vec<f64> {
        let v: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut c = self.spectral(&v);
        for (ci, m) in c.iter_mut().zip(self.modes()) {
            *ci *= Complex64::new(0.0, m as f64);
        }
        self.physical(&c).iter().map(|z| z.re).collect()
    }
}
