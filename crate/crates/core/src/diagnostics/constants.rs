//! Literal evaluations of the exponent and constant formulas of the decay
//! theorems.

/// Enhanced-dissipation exponent for polynomial mixing at rate `p`.
pub fn q_poly(p: f64) -> f64 {
    2.0 / (2.0 + p)
}

/// Exponent when mixing is measured from `H^s` to `H^{-s}`.
pub fn q_s(s: f64, p: f64) -> f64 {
    let m = s.max(1.0);
    (m + s) / (m + s + p)
}

/// Shear flows with dissipation `Lambda^gamma` and critical points of order `n0`.
pub fn q_shear(n0: u32, gamma: f64) -> f64 {
    2.0 / (2.0 + gamma / (2.0 * (n0 as f64 + 1.0)))
}

/// `(1/128) min{1 / (2(1+c_B)), 1 / (a 4^p)}`.
pub fn constant_c0_poly(p: f64, a: f64, c_b: f64) -> f64 {
    f64::min(1.0 / (2.0 * (1.0 + c_b)), 1.0 / (a * 4f64.powf(p))) / 128.0
}

/// `(1/128) min{a2^{2/p} / (32(1+c_B)), 1}`.
pub fn constant_c0_exp(p: f64, _a1: f64, a2: f64, c_b: f64) -> f64 {
    f64::min(a2.powf(2.0 / p) / (32.0 * (1.0 + c_b)), 1.0) / 128.0
}

/// Rate constant for the `H^s -> H^{-s}` mixing variant.
pub fn constant_cs(s: f64, p: f64, a: f64, c_b: f64, lambda1: f64) -> f64 {
    let first = 1.0 / (128.0 * (1.0 + c_b));
    let inner = lambda1.powf(1.0 - s) / (4f64.powf(2.0 * p + 2.0) * (s + 1.0) * a * a);
    let second = (s / (16.0 * (s + 1.0))).powf(s / (1.0 + s)) * inner.powf(1.0 / (1.0 + s));
    0.5 * first.min(second)
}

/// Rate constant for spiral flows, `(1/128) min{1/(64(1+alpha^2)), 1/(a 4^p)}`
/// with mixing amplitude `a` and rate `p` (nominally `p_alpha`).
pub fn constant_c_alpha(alpha: f64, a: f64, p: f64) -> f64 {
    f64::min(1.0 / (64.0 * (1.0 + alpha * alpha)), 1.0 / (a * 4f64.powf(p))) / 128.0
}

/// Largest viscosity for which the exponential-mixing bound is asserted:
/// `min{e^{-4^p/(2 a2)}, e^{-1}, e^{-a1^{p/2}}}` (exclusive).
pub fn exp_nu_threshold(p: f64, a1: f64, a2: f64) -> f64 {
    let t1 = (-(4f64.powf(p)) / (2.0 * a2)).exp();
    let t3 = (-(a1.powf(0.5 * p))).exp();
    t1.min((-1.0f64).exp()).min(t3)
}
