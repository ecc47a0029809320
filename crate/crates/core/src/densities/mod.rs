//! Denormalised predictive densities, signed directions built from them,
//! prediction-cone specifications and the homogeneous extensions of
//! entropies and scores.

mod cone;
mod config;
mod field;
mod jet;

use std::f64::consts::PI;
use std::sync::Arc;

pub use cone::{
    cone_check, default_probes, default_schedule, feasible_direction, ConeReport, ConeSpec, DirectionProbe, Violation,
};
pub use config::{ComponentConfig, Coords, DensityConfig};
pub use field::{Bump, Field, Term};
pub use jet::Jet;

use crate::error::{invalid, Error, Result};
use crate::pairing::{self, QuadratureScheme};

/// One isotropic Gaussian component `N(mean, var·I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub mean: [f64; 2],
    pub var: f64,
}

impl Gaussian {
    fn log_pdf(&self, dim: usize, x: &[f64; 2]) -> f64 {
        let r2 = sq_dist(dim, x, &self.mean);
        -0.5 * dim as f64 * (2.0 * PI * self.var).ln() - 0.5 * r2 / self.var
    }

    /// Jet with `value = 1`, gradient and Laplacian divided by the density.
    fn unit_jet(&self, dim: usize, x: &[f64; 2], log_weight: f64) -> Jet {
        let mut g = [0.0; 2];
        for (k, gk) in g.iter_mut().enumerate().take(dim) {
            *gk = -(x[k] - self.mean[k]) / self.var;
        }
        let r2 = sq_dist(dim, x, &self.mean);
        Jet {
            log_scale: log_weight + self.log_pdf(dim, x),
            value: 1.0,
            gradient: g,
            laplacian: r2 / (self.var * self.var) - dim as f64 / self.var,
            smooth: true,
        }
    }
}

/// Uniform one-dimensional grid of nonnegative values on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub values: Vec<f64>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Same node layout (values may differ).
    pub fn same_layout(&self, other: &Grid) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.values.len() == other.values.len()
    }

    /// Linear interpolation; exact at the nodes.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let h = self.spacing();
        let t = (x - self.lo) / h;
        let i = t.floor() as usize;
        if i + 1 >= self.values.len() {
            return Some(self.values[self.values.len() - 1]);
        }
        let frac = t - i as f64;
        if frac == 0.0 {
            return Some(self.values[i]);
        }
        Some(self.values[i] * (1.0 - frac) + self.values[i + 1] * frac)
    }

    /// Central differences in the interior, one-sided at the ends.
    pub fn fd_gradient(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        let h = self.spacing();
        let n = self.values.len();
        let i = (((x - self.lo) / h).round() as usize).min(n - 1);
        let d = if i == 0 {
            (self.values[1] - self.values[0]) / h
        } else if i == n - 1 {
            (self.values[n - 1] - self.values[n - 2]) / h
        } else {
            (self.values[i + 1] - self.values[i - 1]) / (2.0 * h)
        };
        Some(d)
    }
}

/// Density families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Gaussian(Gaussian),
    Mixture {
        components: Vec<Gaussian>,
        weights: Vec<f64>,
    },
    /// `(1 + |x - center|²/width²)^(-β/2)`, normalised.
    PowerLaw {
        beta: f64,
        center: [f64; 2],
        width: f64,
        ln_norm: f64,
    },
    Grid(Arc<Grid>),
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Gaussian(_) => "gaussian",
            Family::Mixture { .. } => "mixture",
            Family::PowerLaw { .. } => "power_law",
            Family::Grid(_) => "grid",
        }
    }
}

/// Extent of a support along one axis, with the part needing uniform
/// resolution (`core`) and the smallest feature length (`resolution`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisExtent {
    pub lo: f64,
    pub hi: f64,
    pub core_lo: f64,
    pub core_hi: f64,
    pub resolution: f64,
}

impl AxisExtent {
    fn union(&self, o: &AxisExtent) -> AxisExtent {
        AxisExtent {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
            core_lo: self.core_lo.min(o.core_lo),
            core_hi: self.core_hi.max(o.core_hi),
            resolution: self.resolution.min(o.resolution),
        }
    }
}

/// Integration region of a density or field.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Native grid nodes on a bounded interval.
    Grid(Arc<Grid>),
    /// Truncated box of ℝ^d.
    Whole(Vec<AxisExtent>),
}

impl Support {
    pub fn union(&self, other: &Support) -> Result<Support> {
        match (self, other) {
            (Support::Grid(a), Support::Grid(b)) => {
                if a.same_layout(b) {
                    Ok(Support::Grid(a.clone()))
                } else {
                    Err(Error::GridMismatch(format!(
                        "[{}, {}] x {} vs [{}, {}] x {}",
                        a.lo,
                        a.hi,
                        a.len(),
                        b.lo,
                        b.hi,
                        b.len()
                    )))
                }
            }
            (Support::Grid(g), Support::Whole(_)) | (Support::Whole(_), Support::Grid(g)) => {
                Ok(Support::Grid(g.clone()))
            }
            (Support::Whole(a), Support::Whole(b)) => {
                if a.len() != b.len() {
                    return Err(invalid("dim", "supports of different dimension"));
                }
                Ok(Support::Whole(a.iter().zip(b).map(|(x, y)| x.union(y)).collect()))
            }
        }
    }
}

/// Value, gradient and Laplacian at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEval {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
    pub laplacian: Option<f64>,
    /// Set for grid densities, whose gradient is a finite difference.
    pub gradient_is_approximate: bool,
}

/// A nonnegative, possibly denormalised, density on ℝ^d (d ≤ 2) or on a
/// bounded interval (grid). Immutable; cloning is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    family: Family,
    dim: usize,
    scale: f64,
    mass: f64,
}

/// Builds a density from its configuration with the default quadrature.
pub fn make_density(config: &DensityConfig) -> Result<Density> {
    make_density_with(config, &QuadratureScheme::default())
}

/// Builds a density; its total mass is computed with `scheme`.
pub fn make_density_with(config: &DensityConfig, scheme: &QuadratureScheme) -> Result<Density> {
    let (family, dim, scale) = config.to_family()?;
    let mut d = Density {
        family,
        dim,
        scale,
        mass: f64::NAN,
    };
    let mass = pairing::total_mass(&d, scheme)?;
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::ZeroMass { mass });
    }
    d.mass = mass;
    Ok(d)
}

impl Density {
    pub fn gaussian(mean: f64, var: f64) -> Result<Density> {
        make_density(&DensityConfig::gaussian(mean, var, 1.0))
    }

    pub fn mixture(components: &[(f64, f64)], weights: &[f64]) -> Result<Density> {
        make_density(&DensityConfig::mixture(components, weights, 1.0))
    }

    pub fn power_law(beta: f64) -> Result<Density> {
        make_density(&DensityConfig::PowerLaw {
            beta,
            center: None,
            width: None,
            dim: None,
            scale: 1.0,
        })
    }

    pub fn grid(lo: f64, hi: f64, values: Vec<f64>) -> Result<Density> {
        make_density(&DensityConfig::Grid {
            domain: [lo, hi],
            values,
            scale: 1.0,
        })
    }

    /// Constant `1` on `[0, 1]` sampled at `points` nodes.
    pub fn uniform_grid(points: usize) -> Result<Density> {
        Density::grid(0.0, 1.0, vec![1.0; points])
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Cached total mass `q·1`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.family, Family::Grid(_))
    }

    pub fn grid_data(&self) -> Option<&Arc<Grid>> {
        match &self.family {
            Family::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// `λ·q`; the mass scales by exactly `λ`.
    pub fn scaled(&self, lambda: f64) -> Density {
        assert!(lambda > 0.0, "scale factor must be positive");
        Density {
            family: self.family.clone(),
            dim: self.dim,
            scale: self.scale * lambda,
            mass: self.mass * lambda,
        }
    }

    /// `q / (q·1)`.
    pub fn normalized(&self) -> Density {
        let mut d = self.scaled(1.0 / self.mass);
        d.mass = 1.0;
        d
    }

    pub fn config(&self) -> DensityConfig {
        DensityConfig::from_density(self)
    }

    /// Short stable hex digest of the configuration.
    pub fn digest(&self) -> String {
        crate::digest(&serde_json::to_string(&self.config()).unwrap_or_default())
    }

    pub(crate) fn point(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.dim {
            return Err(invalid(
                "x",
                format!("expected {} coordinates, got {}", self.dim, x.len()),
            ));
        }
        let mut p = [0.0; 2];
        p[..self.dim].copy_from_slice(x);
        Ok(p)
    }

    pub(crate) fn jet_at(&self, x: &[f64; 2]) -> Result<Jet> {
        let ln_scale = self.scale.ln();
        let dim = self.dim;
        Ok(match &self.family {
            Family::Gaussian(g) => g.unit_jet(dim, x, ln_scale),
            Family::Mixture { components, weights } => {
                let mut jets = Vec::with_capacity(components.len());
                for (c, w) in components.iter().zip(weights) {
                    jets.push(c.unit_jet(dim, x, ln_scale + w.ln()));
                }
                Jet::combine(jets.iter().map(|j| (1.0, j)))
            }
            Family::PowerLaw {
                beta,
                center,
                width,
                ln_norm,
            } => {
                let mut u = [0.0; 2];
                let mut s = 0.0;
                for k in 0..dim {
                    u[k] = (x[k] - center[k]) / width;
                    s += u[k] * u[k];
                }
                let one_s = 1.0 + s;
                let mut g = [0.0; 2];
                let mut g2 = 0.0;
                for k in 0..dim {
                    g[k] = -beta * u[k] / (width * one_s);
                    g2 += g[k] * g[k];
                }
                let lap_log = -beta / (width * width) * (dim as f64 / one_s - 2.0 * s / (one_s * one_s));
                Jet {
                    log_scale: ln_scale - ln_norm - dim as f64 * width.ln() - 0.5 * beta * one_s.ln(),
                    value: 1.0,
                    gradient: g,
                    laplacian: lap_log + g2,
                    smooth: true,
                }
            }
            Family::Grid(grid) => {
                let v = grid
                    .interpolate(x[0])
                    .ok_or_else(|| Error::OutOfDomain { x: vec![x[0]] })?;
                Jet::value_only(self.scale * v)
            }
        })
    }

    /// Scaled local data at `x`.
    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        let p = self.point(x)?;
        self.jet_at(&p)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jet(x)?.raw_value())
    }

    /// Value with gradient and Laplacian where the family provides them.
    pub fn eval(&self, x: &[f64]) -> Result<PointEval> {
        let p = self.point(x)?;
        let j = self.jet_at(&p)?;
        if let Family::Grid(g) = &self.family {
            let d = g
                .fd_gradient(p[0])
                .ok_or_else(|| Error::OutOfDomain { x: x.to_vec() })?;
            return Ok(PointEval {
                value: j.raw_value(),
                gradient: Some(vec![self.scale * d]),
                laplacian: None,
                gradient_is_approximate: true,
            });
        }
        let g = j.raw_gradient();
        Ok(PointEval {
            value: j.raw_value(),
            gradient: Some(g[..self.dim].to_vec()),
            laplacian: Some(j.raw_laplacian()),
            gradient_is_approximate: false,
        })
    }

    /// Integration region, truncated so the neglected tail mass is below `tail_tol`.
    pub fn support(&self, tail_tol: f64) -> Support {
        match &self.family {
            Family::Gaussian(g) => Support::Whole(gaussian_extent(self.dim, g, tail_tol)),
            Family::Mixture { components, .. } => {
                let mut axes = gaussian_extent(self.dim, &components[0], tail_tol);
                for c in &components[1..] {
                    let e = gaussian_extent(self.dim, c, tail_tol);
                    for (a, b) in axes.iter_mut().zip(&e) {
                        *a = a.union(b);
                    }
                }
                Support::Whole(axes)
            }
            Family::PowerLaw {
                beta,
                center,
                width,
                ln_norm,
            } => {
                let d = self.dim as f64;
                let sphere = if self.dim == 1 { 2.0 } else { 2.0 * PI };
                // Tail mass beyond radius ρ (in width units) is at most
                // sphere·ρ^(d-β) / ((β-d)·Z).
                let rho = (sphere / ((beta - d) * ln_norm.exp() * tail_tol)).powf(1.0 / (beta - d));
                let rho = rho.clamp(16.0, 1e12);
                let core = 16.0_f64.min(rho);
                let axes = (0..self.dim)
                    .map(|k| AxisExtent {
                        lo: center[k] - width * rho,
                        hi: center[k] + width * rho,
                        core_lo: center[k] - width * core,
                        core_hi: center[k] + width * core,
                        resolution: *width,
                    })
                    .collect();
                Support::Whole(axes)
            }
            Family::Grid(g) => Support::Grid(g.clone()),
        }
    }
}

/// Number of standard deviations kept for a Gaussian at tail tolerance `tol`.
pub(crate) fn gaussian_radius(tol: f64) -> f64 {
    ((2.0 * (1.0 / tol).ln()).sqrt() + 3.0).max(8.0)
}

fn gaussian_extent(dim: usize, g: &Gaussian, tol: f64) -> Vec<AxisExtent> {
    let sd = g.var.sqrt();
    let r = gaussian_radius(tol) * sd;
    (0..dim)
        .map(|k| AxisExtent {
            lo: g.mean[k] - r,
            hi: g.mean[k] + r,
            core_lo: g.mean[k] - r,
            core_hi: g.mean[k] + r,
            resolution: sd,
        })
        .collect()
}

fn sq_dist(dim: usize, a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (0..dim).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum()
}

/// `ln ∫ (1 + |u|²)^(-β/2) du` over ℝ^d.
pub(crate) fn power_law_ln_norm(dim: usize, beta: f64) -> f64 {
    let d = dim as f64;
    0.5 * d * PI.ln() + libm::lgamma((beta - d) / 2.0) - libm::lgamma(beta / 2.0)
}

/// Extends an entropy given on normalised densities 1-homogeneously:
/// `Φ(q) = (q·1) Φ(q / (q·1))`.
pub fn extend_entropy<F>(phi_normalized: F, q: &Density) -> Result<f64>
where
    F: Fn(&Density) -> Result<f64>,
{
    let m = q.mass();
    if !(m > 0.0) {
        return Err(Error::ZeroMass { mass: m });
    }
    Ok(m * phi_normalized(&q.normalized())?)
}

/// Extends a score map given on normalised densities 0-homogeneously:
/// `S(q) = S(q / (q·1))`.
pub fn extend_score<S, G>(score_normalized: S, q: &Density) -> Result<G>
where
    S: Fn(&Density) -> Result<G>,
{
    let m = q.mass();
    if !(m > 0.0) {
        return Err(Error::ZeroMass { mass: m });
    }
    score_normalized(&q.normalized())
}
