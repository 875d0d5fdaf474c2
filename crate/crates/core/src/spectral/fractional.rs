use crate::error::{Error, Result};

/// Fourier symbol `(k^2 + m^2)^(gamma/2)` of `Lambda^gamma`, `Lambda = sqrt(-Delta)`,
/// on the torus mode `(k, m)`.
pub fn fractional_symbol(gamma: f64, k: i64, m: i64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(symbol_unchecked(gamma, (k * k + m * m) as f64))
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "diffusion order gamma = {gamma} must lie in (0, 2]"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn symbol_unchecked(gamma: f64, wavenumber_sq: f64) -> f64 {
    if gamma == 2.0 {
        wavenumber_sq
    } else {
        wavenumber_sq.powf(0.5 * gamma)
    }
}
