use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ModelProblem, Operators};
use crate::error::{Error, Result};
use crate::spectral::field::fft_index;
use crate::spectral::Field;

/// Named initial data. Every datum is normalized to unit `H^1` norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialDatum {
    /// Torus: the single y-mode `e^{i m y}`. Disk and Hermite models: the
    /// `m`-th eigenmode of `A` counted from 1.
    SingleMode { m: i64 },
    /// Lowest eigenmode of `A`.
    LowestMode,
    /// Smooth localized bump (a coherent state for the kinetic model).
    GaussianBump,
    /// Seeded complex Gaussian coefficients damped by `1 / (1 + lambda)`.
    Random { seed: u64 },
    /// Datum maximizing `||S(tau)||`; produced by the sweep, not here.
    WorstCase,
}

impl InitialDatum {
    pub fn name(&self) -> String {
        match self {
            InitialDatum::SingleMode { m } => format!("single-mode:{m}"),
            InitialDatum::LowestMode => "lowest-mode".into(),
            InitialDatum::GaussianBump => "gaussian-bump".into(),
            InitialDatum::Random { seed } => format!("random:{seed}"),
            InitialDatum::WorstCase => "worst-case".into(),
        }
    }

    /// Parses `single-mode[:m]`, `lowest-mode`, `gaussian-bump`,
    /// `random[:seed]` or `worst-case`.
    pub fn parse(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>, default: i64| -> Result<i64> {
            a.map_or(Ok(default), |v| {
                v.parse().map_err(|_| Error::InvalidParameter(format!("bad datum argument in '{s}'")))
            })
        };
        match head {
            "single-mode" => Ok(InitialDatum::SingleMode { m: num(arg, 1)? }),
            "lowest-mode" => Ok(InitialDatum::LowestMode),
            "gaussian-bump" => Ok(InitialDatum::GaussianBump),
            "random" => Ok(InitialDatum::Random { seed: num(arg, 0)? as u64 }),
            "worst-case" => Ok(InitialDatum::WorstCase),
            _ => Err(Error::InvalidParameter(format!(
                "unknown initial datum '{s}' (single-mode[:m], lowest-mode, gaussian-bump, random[:seed], worst-case)"
            ))),
        }
    }
}

/// Builds a named datum for `model`, scaled to unit `H^1` norm.
pub fn initial_field(model: &ModelProblem, datum: &InitialDatum) -> Result<Field> {
    let n = model.dim();
    let basis = model.basis();
    let coeffs: Vec<Complex64> = match datum {
        InitialDatum::SingleMode { m } => match &model.ops {
            Operators::Torus { grid, .. } => torus_mode(*m, grid.m_max(), n)?,
            Operators::Kolmogorov { m_max, .. } => torus_mode(*m, *m_max, n)?,
            _ => {
                if *m < 1 || *m as usize > n {
                    return Err(Error::InvalidParameter(format!("eigenmode index {m} outside 1..={n}")));
                }
                return eigenmode(model, *m as usize - 1);
            }
        },
        InitialDatum::LowestMode => return eigenmode(model, 0),
        InitialDatum::GaussianBump => match &model.ops {
            Operators::Torus { grid, .. } => {
                let values: Vec<Complex64> = grid
                    .points()
                    .iter()
                    .map(|y| Complex64::new((-(y - std::f64::consts::PI).powi(2) / 0.5).exp(), 0.0))
                    .collect();
                grid.spectral(&values)
            }
            Operators::Kolmogorov { m_max, .. } => {
                let grid = crate::spectral::TorusGrid::new(*m_max);
                let values: Vec<Complex64> = grid
                    .points()
                    .iter()
                    .map(|y| Complex64::new((-(y - std::f64::consts::PI).powi(2) / 0.5).exp(), 0.0))
                    .collect();
                grid.spectral(&values)
            }
            Operators::Spiral { lap, .. } => lap
                .grid()
                .iter()
                .map(|r| Complex64::new((-(r - 0.5).powi(2) / 0.02).exp(), 0.0))
                .collect(),
            Operators::Kinetic { space } => space
                .indices()
                .iter()
                .map(|idx| {
                    // coherent state centred at v = e_1: coefficient 1/sqrt(n_1!) on n = n_1 e_1
                    if idx[1..].iter().all(|&x| x == 0) {
                        let f: f64 = (1..=idx[0]).map(|j| j as f64).product();
                        Complex64::new(1.0 / f.sqrt(), 0.0)
                    } else {
                        Complex64::default()
                    }
                })
                .collect(),
        },
        InitialDatum::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let damp = diagonal_or_ones(model);
            (0..n)
                .map(|i| {
                    let z = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                    z / (1.0 + damp[i])
                })
                .collect()
        }
        InitialDatum::WorstCase => {
            return Err(Error::Unsupported(
                "the worst-case datum depends on nu; it is computed by the sweep".into(),
            ))
        }
    };
    normalize_h1(model, Field::new(coeffs, basis)?)
}

fn torus_mode(m: i64, m_max: usize, n: usize) -> Result<Vec<Complex64>> {
    if m.unsigned_abs() as usize > m_max {
        return Err(Error::InvalidParameter(format!("mode {m} outside |m| <= {m_max}")));
    }
    let mut v = vec![Complex64::default(); n];
    v[fft_index(m, n)] = Complex64::new(1.0, 0.0);
    Ok(v)
}

fn diagonal_or_ones(model: &ModelProblem) -> Vec<f64> {
    match model.diagonal_a() {
        Some(l) => l.to_vec(),
        None => model
            .radial()
            .map(|lap| lap.grid().iter().map(|r| (model.descriptor().k as f64 / r).powi(2)).collect())
            .unwrap_or_else(|| vec![0.0; model.dim()]),
    }
}

fn eigenmode(model: &ModelProblem, j: usize) -> Result<Field> {
    let eb = model.eigenbasis()?;
    let mut c = vec![Complex64::default(); eb.len()];
    c[j] = Complex64::new(1.0, 0.0);
    normalize_h1(model, eb.synthesize(&c, model.basis())?)
}

/// Rescales `f` to unit `H^1` norm.
pub fn normalize_h1(model: &ModelProblem, f: Field) -> Result<Field> {
    let h1 = model.h1_sq(f.coeffs()).sqrt();
    if !(h1 > 0.0) || !h1.is_finite() {
        return Err(Error::InvalidParameter("initial datum has zero H^1 norm".into()));
    }
    Ok(f.scaled(1.0 / h1))
}
