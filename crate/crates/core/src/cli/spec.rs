use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{build_icosphere_mesh, build_interval_mesh, build_rectangle_mesh, load_mesh, Mesh, MeshFormat};
use crate::spectral::{
    fractional_symbol, from_spde_symbol, matern_spectral, SpectralFunction,
};

/// Parses a number, accepting `pi` and `-pi`.
fn number(s: &str) -> Result<f64> {
    match s.trim() {
        "pi" => Ok(std::f64::consts::PI),
        "-pi" => Ok(-std::f64::consts::PI),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("expected a number, got '{t}'"))),
    }
}

fn count(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::invalid(format!("expected a non-negative integer, got '{}'", s.trim())))
}

/// `interval:a,b,n`, `rect:lx,ly,nx,ny`, `icosphere:r,k`, or a mesh file.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshSpec {
    Interval { a: f64, b: f64, cells: usize },
    Rectangle { lx: f64, ly: f64, nx: usize, ny: usize },
    Icosphere { radius: f64, subdivisions: usize },
    File(PathBuf),
}

impl FromStr for MeshSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some((name, args)) = s.split_once(':') else {
            return Ok(MeshSpec::File(PathBuf::from(s)));
        };
        let parts: Vec<&str> = args.split(',').collect();
        let expect = |n: usize| {
            if parts.len() == n {
                Ok(())
            } else {
                Err(Error::invalid(format!("mesh '{name}' takes {n} arguments, got {}", parts.len())))
            }
        };
        match name {
            "interval" => {
                expect(3)?;
                Ok(MeshSpec::Interval {
                    a: number(parts[0])?,
                    b: number(parts[1])?,
                    cells: count(parts[2])?,
                })
            }
            "rect" => {
                expect(4)?;
                Ok(MeshSpec::Rectangle {
                    lx: number(parts[0])?,
                    ly: number(parts[1])?,
                    nx: count(parts[2])?,
                    ny: count(parts[3])?,
                })
            }
            "icosphere" => {
                expect(2)?;
                Ok(MeshSpec::Icosphere {
                    radius: number(parts[0])?,
                    subdivisions: count(parts[1])?,
                })
            }
            // a path that happens to contain ':'
            _ => Ok(MeshSpec::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSpec::Interval { a, b, cells } => write!(f, "interval:{a},{b},{cells}"),
            MeshSpec::Rectangle { lx, ly, nx, ny } => write!(f, "rect:{lx},{ly},{nx},{ny}"),
            MeshSpec::Icosphere { radius, subdivisions } => write!(f, "icosphere:{radius},{subdivisions}"),
            MeshSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh> {
        match self {
            MeshSpec::Interval { a, b, cells } => build_interval_mesh(*a, *b, *cells),
            MeshSpec::Rectangle { lx, ly, nx, ny } => build_rectangle_mesh(*lx, *ly, *nx, *ny),
            MeshSpec::Icosphere { radius, subdivisions } => build_icosphere_mesh(*radius, *subdivisions),
            MeshSpec::File(p) => load_mesh(p, MeshFormat::from_path(p)),
        }
    }

    /// The same builder with every cell count multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        match self {
            MeshSpec::Interval { a, b, cells } => Ok(MeshSpec::Interval {
                a: *a,
                b: *b,
                cells: cells * factor,
            }),
            MeshSpec::Rectangle { lx, ly, nx, ny } => Ok(MeshSpec::Rectangle {
                lx: *lx,
                ly: *ly,
                nx: nx * factor,
                ny: ny * factor,
            }),
            _ => Err(Error::invalid("refinement needs an interval or rect mesh")),
        }
    }
}

/// Spectral function spec `name:key=val,...`:
///
/// | name        | keys                         | gamma(l)                            |
/// |-------------|------------------------------|-------------------------------------|
/// | `matern`    | `kappa`, `nu`, `sigma2`      | Matern spectral density, square root |
/// | `spde`      | `kappa`, `alpha`             | `(kappa^2 + l)^(-alpha/2)`          |
/// | `spde-poly` | `c0`, `c1`, ...              | `1 / (c0 + c1 l + ...)`             |
/// | `power`     | `scale`, `exponent`          | `scale * l^-exponent`               |
/// | `const`     | `value`                      | `value`                             |
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSpec {
    Matern { kappa: f64, nu: f64, sigma2: f64 },
    Spde { kappa: f64, alpha: f64 },
    SpdePolynomial { coeffs: Vec<f64> },
    Power { scale: f64, exponent: f64 },
    Constant { value: f64 },
}

struct KeyValues<'a> {
    name: &'a str,
    pairs: Vec<(&'a str, f64)>,
}

impl<'a> KeyValues<'a> {
    fn parse(name: &'a str, args: &'a str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in args.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("'{item}' in gamma '{name}' is not key=value")))?;
            let k = k.trim();
            if pairs.iter().any(|(p, _)| *p == k) {
                return Err(Error::invalid(format!("duplicate key '{k}' in gamma '{name}'")));
            }
            pairs.push((k, number(v)?));
        }
        Ok(KeyValues { name, pairs })
    }

    fn take(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.pairs.iter().position(|(k, _)| *k == key) {
            Some(i) => Ok(self.pairs.remove(i).1),
            None => default.ok_or_else(|| Error::invalid(format!("gamma '{}' needs '{key}'", self.name))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.pairs.first() {
            Some((k, _)) => Err(Error::invalid(format!("unknown key '{k}' for gamma '{}'", self.name))),
            None => Ok(()),
        }
    }
}

impl FromStr for GammaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = KeyValues::parse(name, args)?;
        let spec = match name {
            "matern" => GammaSpec::Matern {
                kappa: kv.take("kappa", None)?,
                nu: kv.take("nu", None)?,
                sigma2: kv.take("sigma2", Some(1.0))?,
            },
            "spde" => GammaSpec::Spde {
                kappa: kv.take("kappa", None)?,
                alpha: kv.take("alpha", None)?,
            },
            "spde-poly" => {
                let mut coeffs = Vec::new();
                while let Ok(c) = kv.take(&format!("c{}", coeffs.len()), None) {
                    coeffs.push(c);
                }
                if coeffs.is_empty() {
                    return Err(Error::invalid("gamma 'spde-poly' needs c0, c1, ..."));
                }
                GammaSpec::SpdePolynomial { coeffs }
            }
            "power" => GammaSpec::Power {
                scale: kv.take("scale", Some(1.0))?,
                exponent: kv.take("exponent", None)?,
            },
            "const" => GammaSpec::Constant {
                value: kv.take("value", None)?,
            },
            other => return Err(Error::invalid(format!("unknown gamma '{other}'"))),
        };
        kv.finish()?;
        Ok(spec)
    }
}

impl fmt::Display for GammaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaSpec::Matern { kappa, nu, sigma2 } => write!(f, "matern:kappa={kappa},nu={nu},sigma2={sigma2}"),
            GammaSpec::Spde { kappa, alpha } => write!(f, "spde:kappa={kappa},alpha={alpha}"),
            GammaSpec::SpdePolynomial { coeffs } => {
                let terms: Vec<String> = coeffs.iter().enumerate().map(|(i, c)| format!("c{i}={c}")).collect();
                write!(f, "spde-poly:{}", terms.join(","))
            }
            GammaSpec::Power { scale, exponent } => write!(f, "power:scale={scale},exponent={exponent}"),
            GammaSpec::Constant { value } => write!(f, "const:value={value}"),
        }
    }
}

impl GammaSpec {
    /// Builds `gamma` for a mesh of intrinsic dimension `dim`.
    pub fn build(&self, dim: usize) -> Result<SpectralFunction> {
        match self {
            GammaSpec::Matern { kappa, nu, sigma2 } => matern_spectral(*kappa, *nu, dim, *sigma2),
            GammaSpec::Spde { kappa, alpha } => {
                if !(*kappa > 0.0 && *alpha > 0.0) {
                    return Err(Error::invalid("spde needs kappa > 0 and alpha > 0"));
                }
                Ok(from_spde_symbol(&fractional_symbol(*kappa, *alpha)))
            }
            GammaSpec::SpdePolynomial { coeffs } => {
                Ok(from_spde_symbol(&SpectralFunction::polynomial(coeffs.clone())))
            }
            GammaSpec::Power { scale, exponent } => {
                if !(*exponent >= 0.0) {
                    return Err(Error::invalid("power needs exponent >= 0"));
                }
                Ok(SpectralFunction::power(*scale, *exponent))
            }
            GammaSpec::Constant { value } => Ok(SpectralFunction::constant(*value)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, GammaSpec::Constant { value } if *value == 0.0)
    }
}
