use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{power_law_ln_norm, Density, Family, Gaussian, Grid};
use crate::error::{invalid, Error, Result};

/// A coordinate given either as a bare number (d = 1) or as a vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Coords {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            Coords::Scalar(x) => vec![*x],
            Coords::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentConfig {
    pub mean: Coords,
    pub var: f64,
}

fn one() -> f64 {
    1.0
}

/// JSON form of a density.
///
/// ```json
/// {"family":"gaussian","mean":[0],"var":1,"scale":1}
/// {"family":"mixture","components":[{"mean":[0],"var":1}],"weights":[1]}
/// {"family":"power_law","beta":2}
/// {"family":"grid","domain":[0,1],"values":[1,1,1]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    Gaussian {
        mean: Coords,
        var: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Mixture {
        components: Vec<ComponentConfig>,
        weights: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    PowerLaw {
        beta: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Coords>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default = "one")]
        scale: f64,
    },
    Grid {
        domain: [f64; 2],
        values: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
}

impl DensityConfig {
    pub fn gaussian(mean: f64, var: f64, scale: f64) -> Self {
        DensityConfig::Gaussian {
            mean: Coords::Vector(vec![mean]),
            var,
            scale,
        }
    }

    pub fn mixture(components: &[(f64, f64)], weights: &[f64], scale: f64) -> Self {
        DensityConfig::Mixture {
            components: components
                .iter()
                .map(|&(m, v)| ComponentConfig {
                    mean: Coords::Vector(vec![m]),
                    var: v,
                })
                .collect(),
            weights: weights.to_vec(),
            scale,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub(crate) fn to_family(&self) -> Result<(Family, usize, f64)> {
        match self {
            DensityConfig::Gaussian { mean, var, scale } => {
                check_scale(*scale)?;
                let (g, dim) = component(mean, *var, "mean", "var")?;
                Ok((Family::Gaussian(g), dim, *scale))
            }
            DensityConfig::Mixture {
                components,
                weights,
                scale,
            } => {
                check_scale(*scale)?;
                if components.is_empty() {
                    return Err(invalid("components", "mixture needs at least one component"));
                }
                if weights.len() != components.len() {
                    return Err(invalid(
                        "weights",
                        format!("{} weights for {} components", weights.len(), components.len()),
                    ));
                }
                if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
                    return Err(invalid("weights", format!("weights must be positive, got {w}")));
                }
                let mut out = Vec::with_capacity(components.len());
                let mut dim = 0;
                for c in components {
                    let (g, d) = component(&c.mean, c.var, "components.mean", "components.var")?;
                    if dim != 0 && d != dim {
                        return Err(invalid("components.mean", "components differ in dimension"));
                    }
                    dim = d;
                    out.push(g);
                }
                Ok((
                    Family::Mixture {
                        components: out,
                        weights: weights.clone(),
                    },
                    dim,
                    *scale,
                ))
            }
            DensityConfig::PowerLaw {
                beta,
                center,
                width,
                dim,
                scale,
            } => {
                check_scale(*scale)?;
                let c = center.as_ref().map(Coords::to_vec);
                let d = dim.or(c.as_ref().map(Vec::len)).unwrap_or(1);
                check_dim(d, "dim")?;
                let mut ctr = [0.0; 2];
                if let Some(c) = c {
                    if c.len() != d {
                        return Err(invalid("center", "length does not match dim"));
                    }
                    ctr[..d].copy_from_slice(&c);
                }
                if !(*beta > d as f64) || !beta.is_finite() {
                    return Err(invalid("beta", format!("exponent must exceed d = {d}, got {beta}")));
                }
                let w = width.unwrap_or(1.0);
                if !(w > 0.0) || !w.is_finite() {
                    return Err(invalid("width", "must be positive"));
                }
                Ok((
                    Family::PowerLaw {
                        beta: *beta,
                        center: ctr,
                        width: w,
                        ln_norm: power_law_ln_norm(d, *beta),
                    },
                    d,
                    *scale,
                ))
            }
            DensityConfig::Grid { domain, values, scale } => {
                check_scale(*scale)?;
                if !(domain[1] > domain[0]) || !domain[0].is_finite() || !domain[1].is_finite() {
                    return Err(invalid("domain", "expected [lo, hi] with lo < hi"));
                }
                if values.len() < 2 {
                    return Err(invalid("values", "grid needs at least two points"));
                }
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
                    return Err(invalid("values", format!("values must be nonnegative, got {v}")));
                }
                if values.iter().all(|v| *v == 0.0) {
                    return Err(Error::AllZeroGrid);
                }
                let grid = Grid {
                    lo: domain[0],
                    hi: domain[1],
                    values: values.clone(),
                };
                Ok((Family::Grid(Arc::new(grid)), 1, *scale))
            }
        }
    }

    pub(crate) fn from_density(d: &Density) -> Self {
        let dim = d.dim();
        let coords = |m: &[f64; 2]| Coords::Vector(m[..dim].to_vec());
        match d.family() {
            Family::Gaussian(g) => DensityConfig::Gaussian {
                mean: coords(&g.mean),
                var: g.var,
                scale: d.scale(),
            },
            Family::Mixture { components, weights } => DensityConfig::Mixture {
                components: components
                    .iter()
                    .map(|c| ComponentConfig {
                        mean: coords(&c.mean),
                        var: c.var,
                    })
                    .collect(),
                weights: weights.clone(),
                scale: d.scale(),
            },
            Family::PowerLaw {
                beta, center, width, ..
            } => DensityConfig::PowerLaw {
                beta: *beta,
                center: Some(coords(center)),
                width: Some(*width),
                dim: Some(dim),
                scale: d.scale(),
            },
            Family::Grid(g) => DensityConfig::Grid {
                domain: [g.lo, g.hi],
                values: g.values.clone(),
                scale: d.scale(),
            },
        }
    }
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(invalid("scale", format!("must be positive, got {scale}")))
    }
}

fn check_dim(d: usize, field: &str) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(invalid(field, format!("dimension must be 1 or 2, got {d}")))
    }
}

fn component(mean: &Coords, var: f64, mfield: &str, vfield: &str) -> Result<(Gaussian, usize)> {
    let m = mean.to_vec();
    check_dim(m.len(), mfield)?;
    if m.iter().any(|x| !x.is_finite()) {
        return Err(invalid(mfield, "must be finite"));
    }
    if !(var > 0.0) || !var.is_finite() {
        return Err(invalid(vfield, format!("variance must be positive, got {var}")));
    }
    let mut mean = [0.0; 2];
    mean[..m.len()].copy_from_slice(&m);
    Ok((Gaussian { mean, var }, m.len()))
}
