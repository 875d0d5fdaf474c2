//! Concrete model problems as `(A, B, inner product)` triples with their
//! predicted constants.

mod initial;
mod kinetic;
mod profile;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::constants::{constant_c0_poly, constant_c_alpha};
use crate::error::{Error, Result};
use crate::spectral::field::fft_index;
use crate::spectral::fractional::{check_gamma, symbol_unchecked};
use crate::spectral::{Basis, EigenBasis, Field, InnerProduct, RadialLaplacian, TorusGrid};

pub use initial::{initial_field, normalize_h1, InitialDatum};
pub use kinetic::HermiteSpace;
pub use profile::Profile;

pub const DEFAULT_TORUS_MODES: usize = 512;
pub const DEFAULT_RADIAL_POINTS: usize = 256;
pub const DEFAULT_HERMITE_DEGREE: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Heat,
    Shear,
    Kolmogorov,
    Spiral,
    Kinetic,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Heat => "heat",
            Family::Shear => "shear",
            Family::Kolmogorov => "kolmogorov",
            Family::Spiral => "spiral",
            Family::Kinetic => "kinetic",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heat" => Ok(Family::Heat),
            "shear" => Ok(Family::Shear),
            "kolmogorov" => Ok(Family::Kolmogorov),
            "spiral" => Ok(Family::Spiral),
            "kinetic" => Ok(Family::Kinetic),
            _ => Err(Error::InvalidParameter(format!("unknown model family '{s}'"))),
        }
    }
}

/// Serializable summary of how a model was built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDescriptor {
    pub family: Family,
    pub k: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavevector: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    pub resolution: usize,
}

#[derive(Clone, Debug)]
pub struct ShearModel {
    pub profile: Profile,
    /// Maximal vanishing order of `u'` at critical points, declared by the
    /// caller.
    pub n0: Option<u32>,
    pub gamma: f64,
    pub k: i64,
    pub m_max: usize,
}

impl ShearModel {
    pub fn new(profile: Profile, gamma: f64, k: i64) -> Self {
        let n0 = profile.default_n0();
        Self { profile, n0, gamma, k, m_max: DEFAULT_TORUS_MODES }
    }
}

#[derive(Clone, Debug)]
pub struct KolmogorovModel {
    pub l: f64,
    pub k: i64,
    pub m_max: usize,
}

impl KolmogorovModel {
    pub fn new(l: f64, k: i64) -> Self {
        Self { l, k, m_max: DEFAULT_TORUS_MODES }
    }
}

#[derive(Clone, Debug)]
pub struct SpiralModel {
    pub alpha: f64,
    pub k: i64,
    pub points: usize,
}

impl SpiralModel {
    pub fn new(alpha: f64, k: i64) -> Self {
        Self { alpha, k, points: DEFAULT_RADIAL_POINTS }
    }
}

#[derive(Clone, Debug)]
pub struct KineticModel {
    /// Spatial frequency vector; its length is the velocity dimension.
    pub k: Vec<i64>,
    pub degree: usize,
}

impl KineticModel {
    pub fn new(k: i64, degree: usize) -> Self {
        Self { k: vec![k], degree }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Operators {
    /// Shear flow (or pure diffusion) on one x-Fourier mode of the torus.
    Torus {
        grid: TorusGrid,
        k: i64,
        lambda: Vec<f64>,
        velocity: Vec<f64>,
    },
    Kolmogorov {
        m_max: usize,
        kl: f64,
        lambda: Vec<f64>,
        weight: Vec<f64>,
    },
    Spiral {
        lap: RadialLaplacian,
        /// `k r_j^alpha`
        rate: Vec<f64>,
    },
    Kinetic {
        space: Box<HermiteSpace>,
    },
}

/// H, H^1 and H^{-1} norms of a field in its model's scale of spaces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub h: f64,
    pub h1: f64,
    pub hm1: f64,
}

#[derive(Clone, Debug)]
pub struct ModelProblem {
    descriptor: ModelDescriptor,
    pub(crate) ops: Operators,
    inner: InnerProduct,
    c_b: f64,
    mixed_bound: Option<f64>,
    p: Option<f64>,
    q: Option<f64>,
    q_alt: Option<f64>,
    exact_inviscid: bool,
}

/// Exponents and constants predicted for a model at a given mixing amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedRates {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub c_b: f64,
    pub c0: Option<f64>,
    /// Second prediction where two routes exist (Kolmogorov: 3/5).
    pub q_alt: Option<f64>,
}

pub fn build_shear(m: &ShearModel) -> Result<ModelProblem> {
    build_torus(m, Family::Shear)
}

/// Pure diffusion `-Delta` on the torus mode `k`: a shear with zero velocity.
pub fn build_heat(k: i64, m_max: usize) -> Result<ModelProblem> {
    let m = ShearModel { profile: Profile::Constant(0.0), n0: None, gamma: 2.0, k, m_max };
    build_torus(&m, Family::Heat)
}

fn build_torus(m: &ShearModel, family: Family) -> Result<ModelProblem> {
    check_gamma(m.gamma)?;
    if m.k == 0 {
        return Err(Error::InvalidParameter(
            "x-wavenumber k must be nonzero; the k = 0 mode is pure diffusion".into(),
        ));
    }
    if m.m_max == 0 {
        return Err(Error::InvalidParameter("need at least one y-mode pair".into()));
    }
    let grid = TorusGrid::new(m.m_max);
    let lambda = grid
        .modes()
        .iter()
        .map(|&mm| symbol_unchecked(m.gamma, (m.k * m.k + mm * mm) as f64))
        .collect();
    let velocity = grid.points().iter().map(|&y| m.profile.eval(y)).collect();
    let c_b = m.profile.max_slope();
    let (p, q) = match (family, m.n0) {
        (Family::Shear, Some(n0)) => {
            let p = m.gamma / (2.0 * (n0 as f64 + 1.0));
            (Some(p), Some(2.0 / (2.0 + p)))
        }
        // no mixing: the dissipation time is the diffusive one
        (Family::Heat, _) => (None, Some(1.0)),
        _ => (None, None),
    };
    Ok(ModelProblem {
        descriptor: ModelDescriptor {
            family,
            k: m.k,
            wavevector: None,
            alpha: None,
            gamma: Some(m.gamma),
            n0: m.n0,
            profile: Some(m.profile.name()),
            l: None,
            resolution: m.m_max,
        },
        ops: Operators::Torus { grid, k: m.k, lambda, velocity },
        inner: InnerProduct::Flat,
        c_b,
        mixed_bound: None,
        p,
        q,
        q_alt: None,
        exact_inviscid: true,
    })
}

pub fn build_kolmogorov(m: &KolmogorovModel) -> Result<ModelProblem> {
    if !(m.l >= 1.0) || !m.l.is_finite() {
        return Err(Error::InvalidParameter(format!("aspect L = {} must be >= 1", m.l)));
    }
    let min_k = if m.l > 1.0 { 1 } else { 2 };
    if m.k.abs() < min_k {
        return Err(Error::WavenumberConstraint { l: m.l, k: m.k });
    }
    let n = 2 * m.m_max + 1;
    let kl = m.k as f64 * m.l;
    let lambda: Vec<f64> = (0..n)
        .map(|i| {
            let mm = crate::spectral::field::fft_mode(i, n) as f64;
            kl * kl + mm * mm
        })
        .collect();
    let weight: Vec<f64> = lambda.iter().map(|l| 1.0 - 1.0 / l).collect();
    let inner = InnerProduct::kolmogorov(weight.clone())?;
    // |Re<B phi, A phi>| <= (|kL|/2) sum (2|m|+1) |phi_m|^2, and
    // 2|m|+1 <= max(3, 1/(L^2k^2 - 1)) (lambda_m - 1) = C w_m lambda_m.
    let c_b = 0.5 * kl.abs() * f64::max(3.0, 1.0 / (kl * kl - 1.0));
    Ok(ModelProblem {
        descriptor: ModelDescriptor {
            family: Family::Kolmogorov,
            k: m.k,
            wavevector: None,
            alpha: None,
            gamma: Some(2.0),
            n0: None,
            profile: Some("sin".into()),
            l: Some(m.l),
            resolution: m.m_max,
        },
        ops: Operators::Kolmogorov { m_max: m.m_max, kl, lambda, weight },
        inner,
        c_b,
        mixed_bound: None,
        // inviscid damping at rate t^-1 feeds the generic route (q = 2/3);
        // the spiral-type structure gives 3/5.
        p: Some(1.0),
        q: Some(2.0 / 3.0),
        q_alt: Some(0.6),
        exact_inviscid: false,
    })
}

pub fn spiral_p(alpha: f64) -> f64 {
    2.0 / alpha.max(2.0)
}

pub fn spiral_q(alpha: f64) -> f64 {
    let p = spiral_p(alpha);
    (4.0 - p) / (4.0 + p)
}

pub fn build_spiral(m: &SpiralModel) -> Result<ModelProblem> {
    if !(m.alpha >= 1.0) || !m.alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {} must be >= 1", m.alpha)));
    }
    if m.k == 0 {
        return Err(Error::InvalidParameter(
            "angular wavenumber k must be nonzero; the k = 0 mode is conserved".into(),
        ));
    }
    let lap = RadialLaplacian::new(m.points, m.k)?;
    let rate = lap.grid().iter().map(|r| m.k as f64 * r.powf(m.alpha)).collect();
    let mixed = m.alpha * m.k.unsigned_abs() as f64;
    let inner = InnerProduct::WeightedRadial { weights: lap.weights().to_vec() };
    Ok(ModelProblem {
        descriptor: ModelDescriptor {
            family: Family::Spiral,
            k: m.k,
            wavevector: None,
            alpha: Some(m.alpha),
            gamma: Some(2.0),
            n0: None,
            profile: None,
            l: None,
            resolution: m.points,
        },
        ops: Operators::Spiral { lap, rate },
        inner,
        // lambda_1 >= 1 for k != 0, so the mixed bound implies Eq-2.7 form
        c_b: mixed,
        mixed_bound: Some(mixed),
        p: Some(spiral_p(m.alpha)),
        q: Some(spiral_q(m.alpha)),
        q_alt: None,
        exact_inviscid: true,
    })
}

pub fn build_kinetic(m: &KineticModel) -> Result<ModelProblem> {
    let space = HermiteSpace::new(&m.k, m.degree)?;
    let knorm = m.k.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
    Ok(ModelProblem {
        descriptor: ModelDescriptor {
            family: Family::Kinetic,
            k: m.k[0],
            wavevector: Some(m.k.clone()),
            alpha: None,
            gamma: None,
            n0: None,
            profile: None,
            l: None,
            resolution: m.degree,
        },
        ops: Operators::Kinetic { space: Box::new(space) },
        inner: InnerProduct::GibbsWeighted,
        c_b: knorm,
        mixed_bound: Some(knorm),
        p: None,
        q: None,
        q_alt: None,
        exact_inviscid: false,
    })
}

/// Rebuilds a model from its serialized descriptor.
pub fn rebuild(d: &ModelDescriptor) -> Result<ModelProblem> {
    match d.family {
        Family::Heat => build_heat(d.k, d.resolution),
        Family::Shear => {
            let profile = Profile::resolve(d.profile.as_deref().unwrap_or("sin"))?;
            build_shear(&ShearModel { profile, n0: d.n0, gamma: d.gamma.unwrap_or(2.0), k: d.k, m_max: d.resolution })
        }
        Family::Kolmogorov => {
            build_kolmogorov(&KolmogorovModel { l: d.l.unwrap_or(2.0), k: d.k, m_max: d.resolution })
        }
        Family::Spiral => {
            build_spiral(&SpiralModel { alpha: d.alpha.unwrap_or(1.0), k: d.k, points: d.resolution })
        }
        Family::Kinetic => build_kinetic(&KineticModel {
            k: d.wavevector.clone().unwrap_or_else(|| vec![d.k]),
            degree: d.resolution,
        }),
    }
}

impl ModelProblem {
    pub fn descriptor(&self) -> &ModelDescriptor {
        &self.descriptor
    }

    pub fn family(&self) -> Family {
        self.descriptor.family
    }

    pub fn inner_product(&self) -> &InnerProduct {
        &self.inner
    }

    pub fn c_b(&self) -> f64 {
        self.c_b
    }

    /// Constant `c` of the stronger bound `|Re<B phi, A phi>| <= c ||phi|| ||phi||_{H^1}`
    /// where the model satisfies it.
    pub fn mixed_bound(&self) -> Option<f64> {
        self.mixed_bound
    }

    pub fn predicted_p(&self) -> Option<f64> {
        self.p
    }

    pub fn predicted_q(&self) -> Option<f64> {
        self.q
    }

    pub fn q_alt(&self) -> Option<f64> {
        self.q_alt
    }

    pub fn has_exact_inviscid(&self) -> bool {
        self.exact_inviscid
    }

    pub fn basis(&self) -> Basis {
        match &self.ops {
            Operators::Torus { grid, .. } => Basis::TorusFourier { m_max: grid.m_max(), real: false },
            Operators::Kolmogorov { m_max, .. } => Basis::TorusFourier { m_max: *m_max, real: false },
            Operators::Spiral { lap, .. } => Basis::RadialGrid { points: lap.points() },
            Operators::Kinetic { space } => Basis::Hermite { dim: space.dim, degree: space.degree },
        }
    }

    pub fn dim(&self) -> usize {
        self.basis().len()
    }

    pub fn check(&self, f: &Field) -> Result<()> {
        let expected = self.dim();
        if f.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: f.len() });
        }
        if std::mem::discriminant(f.basis()) != std::mem::discriminant(&self.basis()) {
            return Err(Error::InvalidParameter(format!(
                "field basis {:?} does not match model basis {:?}",
                f.basis(),
                self.basis()
            )));
        }
        Ok(())
    }

    /// Eigenvalues of `A` per stored coefficient, when `A` is diagonal in the
    /// working basis.
    pub(crate) fn diagonal_a(&self) -> Option<&[f64]> {
        match &self.ops {
            Operators::Torus { lambda, .. } | Operators::Kolmogorov { lambda, .. } => Some(lambda),
            Operators::Kinetic { space } => Some(&space.total_degree),
            Operators::Spiral { .. } => None,
        }
    }

    pub fn inner(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        self.inner.inner(a, b)
    }

    pub fn apply_a(&self, f: &[Complex64]) -> Vec<Complex64> {
        match (&self.ops, self.diagonal_a()) {
            (Operators::Spiral { lap, .. }, _) => lap.apply(f),
            (_, Some(l)) => f.iter().zip(l).map(|(c, l)| c * l).collect(),
            _ => unreachable!(),
        }
    }

    pub fn apply_a_inv(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        match (&self.ops, self.diagonal_a()) {
            (Operators::Spiral { lap, .. }, _) => lap.solve(f),
            (_, Some(l)) => Ok(f.iter().zip(l).map(|(c, l)| c / l).collect()),
            _ => unreachable!(),
        }
    }

    pub fn apply_b(&self, f: &[Complex64]) -> Vec<Complex64> {
        match &self.ops {
            Operators::Torus { grid, k, velocity, .. } => {
                let mut buf = f.to_vec();
                let mut scratch = vec![Complex64::default(); grid.scratch_len()];
                grid.to_physical(&mut buf, &mut scratch);
                for (v, u) in buf.iter_mut().zip(velocity) {
                    *v *= Complex64::new(0.0, *k as f64 * u);
                }
                grid.to_spectral(&mut buf, &mut scratch);
                buf
            }
            Operators::Kolmogorov { m_max, kl, weight, .. } => {
                let n = 2 * m_max + 1;
                let mm = *m_max as i64;
                let mut out = vec![Complex64::default(); n];
                for m in -mm..=mm {
                    let i = fft_index(m, n);
                    let mut v = Complex64::default();
                    if m > -mm {
                        let j = fft_index(m - 1, n);
                        v += f[j] * weight[j];
                    }
                    if m < mm {
                        let j = fft_index(m + 1, n);
                        v -= f[j] * weight[j];
                    }
                    out[i] = v * (0.5 * kl);
                }
                out
            }
            Operators::Spiral { rate, .. } => f
                .iter()
                .zip(rate)
                .map(|(c, a)| c * Complex64::new(0.0, *a))
                .collect(),
            Operators::Kinetic { space } => {
                let n = space.len();
                (0..n)
                    .map(|i| {
                        let row = space.jacobi.row(i);
                        let s: Complex64 = row.iter().zip(f).map(|(j, c)| c * *j).sum();
                        s * Complex64::new(0.0, 1.0)
                    })
                    .collect()
            }
        }
    }

    pub fn h_sq(&self, f: &[Complex64]) -> f64 {
        self.inner.norm_sq(f)
    }

    pub fn h1_sq(&self, f: &[Complex64]) -> f64 {
        match &self.ops {
            Operators::Spiral { lap, .. } => lap.dirichlet_form(f),
            _ => {
                let l = self.diagonal_a().unwrap();
                match self.inner.weights() {
                    None => f.iter().zip(l).map(|(c, l)| l * c.norm_sqr()).sum(),
                    Some(w) => f
                        .iter()
                        .zip(l)
                        .zip(w)
                        .map(|((c, l), w)| w * l * c.norm_sqr())
                        .sum(),
                }
            }
        }
    }

    pub fn hm1_sq(&self, f: &[Complex64]) -> Result<f64> {
        match &self.ops {
            Operators::Spiral { lap, .. } => lap.hminus_sq(f),
            _ => {
                let l = self.diagonal_a().unwrap();
                Ok(match self.inner.weights() {
                    None => f.iter().zip(l).map(|(c, l)| c.norm_sqr() / l).sum(),
                    Some(w) => f
                        .iter()
                        .zip(l)
                        .zip(w)
                        .map(|((c, l), w)| w * c.norm_sqr() / l)
                        .sum(),
                })
            }
        }
    }

    pub fn norms(&self, f: &Field) -> Result<Norms> {
        self.check(f)?;
        self.norms_of(f.coeffs())
    }

    pub(crate) fn norms_of(&self, c: &[Complex64]) -> Result<Norms> {
        Ok(Norms {
            h: self.h_sq(c).sqrt(),
            h1: self.h1_sq(c).sqrt(),
            hm1: self.hm1_sq(c)?.max(0.0).sqrt(),
        })
    }

    /// Orthonormal eigenbasis of `A` in the model's inner product.
    pub fn eigenbasis(&self) -> Result<Arc<EigenBasis>> {
        match &self.ops {
            Operators::Spiral { lap, .. } => lap.eigenbasis(),
            _ => {
                let l = self.diagonal_a().unwrap();
                let ones;
                let w = match self.inner.weights() {
                    Some(w) => w,
                    None => {
                        ones = vec![1.0; l.len()];
                        &ones
                    }
                };
                Ok(Arc::new(EigenBasis::diagonal(l, w)?))
            }
        }
    }

    /// Largest modulus of the advection symbol, used to pick time steps.
    pub fn max_b_symbol(&self) -> f64 {
        match &self.ops {
            Operators::Torus { k, velocity, .. } => {
                (*k as f64).abs() * velocity.iter().fold(0.0f64, |a, u| a.max(u.abs()))
            }
            Operators::Kolmogorov { kl, weight, .. } => {
                kl.abs() * weight.iter().fold(0.0f64, |a, w| a.max(*w))
            }
            Operators::Spiral { rate, .. } => rate.iter().fold(0.0f64, |a, r| a.max(r.abs())),
            Operators::Kinetic { space } => space.spectral_radius(),
        }
    }

    /// `min(0.01, 0.1 / max |symbol of B|)`.
    pub fn default_dt(&self) -> f64 {
        let b = self.max_b_symbol();
        if b > 0.0 {
            f64::min(0.01, 0.1 / b)
        } else {
            0.01
        }
    }

    /// Fraction of the H energy sitting at the Hermite truncation degree.
    pub fn top_degree_fraction(&self, f: &[Complex64]) -> Option<f64> {
        let Operators::Kinetic { space } = &self.ops else {
            return None;
        };
        let total: f64 = f.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return Some(0.0);
        }
        Some(space.top_degree().map(|i| f[i].norm_sqr()).sum::<f64>() / total)
    }

    pub fn torus_grid(&self) -> Option<&TorusGrid> {
        match &self.ops {
            Operators::Torus { grid, .. } => Some(grid),
            _ => None,
        }
    }

    pub fn radial(&self) -> Option<&RadialLaplacian> {
        match &self.ops {
            Operators::Spiral { lap, .. } => Some(lap),
            _ => None,
        }
    }

    pub fn hermite(&self) -> Option<&HermiteSpace> {
        match &self.ops {
            Operators::Kinetic { space } => Some(space),
            _ => None,
        }
    }
}

/// Closed-form inviscid solution for shear and spiral models: pointwise
/// phase `exp(-i k u(y) t)` or `exp(-i k r^alpha t)`.
pub fn exact_inviscid(model: &ModelProblem, f_in: &Field, t: f64) -> Result<Field> {
    model.check(f_in)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time {t} must be nonnegative")));
    }
    if !model.exact_inviscid {
        return Err(Error::Unsupported(format!(
            "no closed-form inviscid solution for the {} model",
            model.family().name()
        )));
    }
    let mut buf = f_in.coeffs().to_vec();
    model.apply_inviscid(&mut buf, t);
    Field::new(buf, f_in.basis().clone())
}

impl ModelProblem {
    /// In-place `P(t)` for models with a closed-form inviscid flow; negative
    /// `t` gives the adjoint. No-op for other models.
    pub(crate) fn apply_inviscid(&self, buf: &mut [Complex64], t: f64) {
        match &self.ops {
            Operators::Torus { grid, k, velocity, .. } => {
                let mut scratch = vec![Complex64::default(); grid.scratch_len()];
                grid.to_physical(buf, &mut scratch);
                for (v, u) in buf.iter_mut().zip(velocity) {
                    *v *= Complex64::from_polar(1.0, -(*k as f64) * u * t);
                }
                grid.to_spectral(buf, &mut scratch);
            }
            Operators::Spiral { rate, .. } => {
                for (v, a) in buf.iter_mut().zip(rate) {
                    *v *= Complex64::from_polar(1.0, -a * t);
                }
            }
            _ => {}
        }
    }
}

/// Model-appropriate exponents and constants for mixing amplitude `a`.
/// Spiral models use the improved-bound constants; all others the generic
/// polynomial-mixing formulas.
pub fn predicted_rates(model: &ModelProblem, a: f64) -> PredictedRates {
    let c0 = match (model.family(), model.p) {
        (Family::Spiral, Some(p)) => Some(constant_c_alpha(model.descriptor.alpha.unwrap_or(1.0), a, p)),
        (_, Some(p)) => Some(constant_c0_poly(p, a, model.c_b)),
        _ => None,
    };
    PredictedRates { p: model.p, q: model.q, c_b: model.c_b, c0, q_alt: model.q_alt }
}
