use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Periodic shear profile `u(y)` on `[0, 2 pi)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// `sin y`, the Kolmogorov shear.
    Sin,
    /// `sin y + sin 2y`.
    Sin2,
    /// Constant velocity; zero gives the pure heat equation.
    Constant(f64),
    /// Samples `(y_i, u_i)`, interpolated linearly and periodically.
    Tabulated { name: String, y: Vec<f64>, u: Vec<f64> },
}

#[derive(Deserialize)]
struct Row {
    y: f64,
    u: f64,
}

impl Profile {
    /// Looks up a built-in profile. Accepts `sin`, `sin2`, `zero`, and
    /// `const:<value>`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sin" => Ok(Profile::Sin),
            "sin2" => Ok(Profile::Sin2),
            "zero" => Ok(Profile::Constant(0.0)),
            _ => {
                if let Some(v) = name.strip_prefix("const:") {
                    let c = v.parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!("bad constant profile '{name}'"))
                    })?;
                    return Ok(Profile::Constant(c));
                }
                Err(Error::InvalidParameter(format!(
                    "unknown profile '{name}' (expected sin, sin2, zero, const:<u>, or a CSV path)"
                )))
            }
        }
    }

    /// Resolves a registry name, falling back to a CSV file with columns `y,u`.
    pub fn resolve(name: &str) -> Result<Self> {
        match Self::by_name(name) {
            Ok(p) => Ok(p),
            Err(e) => {
                let path = Path::new(name);
                if path.extension().is_some_and(|x| x == "csv") {
                    Self::from_csv(path)
                } else {
                    Err(e)
                }
            }
        }
    }

    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut rows: Vec<Row> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
        if rows.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "profile table {} needs at least 3 rows",
                path.display()
            )));
        }
        for r in &mut rows {
            r.y = r.y.rem_euclid(2.0 * PI);
        }
        rows.sort_by(|a, b| a.y.total_cmp(&b.y));
        if rows.windows(2).any(|w| w[1].y <= w[0].y) {
            return Err(Error::InvalidParameter("profile table has repeated y values".into()));
        }
        Ok(Profile::Tabulated {
            name: path.display().to_string(),
            y: rows.iter().map(|r| r.y).collect(),
            u: rows.iter().map(|r| r.u).collect(),
        })
    }

    pub fn name(&self) -> String {
        match self {
            Profile::Sin => "sin".into(),
            Profile::Sin2 => "sin2".into(),
            Profile::Constant(c) if *c == 0.0 => "zero".into(),
            Profile::Constant(c) => format!("const:{c}"),
            Profile::Tabulated { name, .. } => name.clone(),
        }
    }

    /// Known maximal vanishing order of `u'` at critical points.
    pub fn default_n0(&self) -> Option<u32> {
        match self {
            Profile::Sin | Profile::Sin2 => Some(1),
            _ => None,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Profile::Sin => y.sin(),
            Profile::Sin2 => y.sin() + (2.0 * y).sin(),
            Profile::Constant(c) => *c,
            Profile::Tabulated { y: ys, u, .. } => {
                let (i, j, s) = bracket(ys, y);
                u[i] + s * (u[j] - u[i])
            }
        }
    }

    /// `sup |u'|`.
    pub fn max_slope(&self) -> f64 {
        match self {
            Profile::Sin => 1.0,
            Profile::Sin2 => {
                // u' = cos y + 2 cos 2y peaks at y = 0 with value 3.
                3.0
            }
            Profile::Constant(_) => 0.0,
            Profile::Tabulated { y, u, .. } => {
                let n = y.len();
                (0..n)
                    .map(|i| {
                        let j = (i + 1) % n;
                        let dy = if j == 0 { y[0] + 2.0 * PI - y[i] } else { y[j] - y[i] };
                        ((u[j] - u[i]) / dy).abs()
                    })
                    .fold(0.0, f64::max)
            }
        }
    }

    /// y-locations where `u'` vanishes, for the built-in profiles.
    pub fn critical_points(&self) -> Vec<f64> {
        match self {
            Profile::Sin => vec![0.5 * PI, 1.5 * PI],
            _ => Vec::new(),
        }
    }
}

fn bracket(ys: &[f64], y: f64) -> (usize, usize, f64) {
    let n = ys.len();
    let y = y.rem_euclid(2.0 * PI);
    let pos = ys.partition_point(|&v| v <= y);
    let (i, j) = if pos == 0 || pos == n { (n - 1, 0) } else { (pos - 1, pos) };
    let mut span = ys[j] - ys[i];
    let mut off = y - ys[i];
    if span <= 0.0 {
        span += 2.0 * PI;
    }
    if off < 0.0 {
        off += 2.0 * PI;
    }
    (i, j, off / span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn registry() {
        assert_eq!(Profile::by_name("sin").unwrap(), Profile::Sin);
        assert_eq!(Profile::by_name("sin").unwrap().default_n0(), Some(1));
        assert_eq!(Profile::by_name("sin2").unwrap().default_n0(), Some(1));
        assert_eq!(Profile::by_name("const:2.5").unwrap(), Profile::Constant(2.5));
        assert!(Profile::by_name("cos").is_err());
    }

    #[test]
    fn sin2_slope_bound() {
        let p = Profile::Sin2;
        let sampled = (0..10_000)
            .map(|i| {
                let y = 2.0 * PI * i as f64 / 10_000.0;
                (y.cos() + 2.0 * (2.0 * y).cos()).abs()
            })
            .fold(0.0, f64::max);
        assert!((p.max_slope() - sampled).abs() < 1e-6);
    }

    #[test]
    fn tabulated_profile_interpolates_periodically() {
        let mut file = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        writeln!(file, "y,u").unwrap();
        for i in 0..4 {
            let y = 0.5 * PI * i as f64;
            writeln!(file, "{y},{}", i as f64).unwrap();
        }
        let p = Profile::resolve(file.path().to_str().unwrap()).unwrap();
        assert!((p.eval(0.25 * PI) - 0.5).abs() < 1e-12);
        // wraps from u=3 at 3pi/2 back to u=0 at 2pi
        assert!((p.eval(1.75 * PI) - 1.5).abs() < 1e-12);
        assert!((p.max_slope() - 3.0 / (0.5 * PI)).abs() < 1e-12);
        assert_eq!(p.default_n0(), None);
    }
}
