//! The bilinear pairing `p·f = ∫ f p dμ` by deterministic quadrature,
//! weighted L² norms, and the surface term of the Hyvärinen
//! integration-by-parts argument.

mod gauss;
mod mesh;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use gauss::gauss_legendre;
pub use mesh::{Mesh, NeumaierSum, Sampled};

use crate::densities::{AxisExtent, Density, Field, Support};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    GaussLegendreComposite,
    Trapezoid,
}

/// How integrals are discretised. Grid densities always use the trapezoid
/// rule on their own nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    pub rule: QuadratureRule,
    /// Panels per unit length in the core region.
    pub panels: usize,
    /// Nodes per panel.
    pub nodes: usize,
    /// Fixed truncation radius; `None` derives it from the family's decay.
    pub radius: Option<f64>,
    pub tail_tol: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme {
            rule: QuadratureRule::GaussLegendreComposite,
            panels: 16,
            nodes: 8,
            radius: None,
            tail_tol: 1e-10,
        }
    }
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<()> {
        if self.panels == 0 {
            return Err(invalid("panels", "must be positive"));
        }
        if self.nodes == 0 {
            return Err(invalid("nodes", "must be positive"));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) || !r.is_finite() {
                return Err(invalid("radius", "must be positive"));
            }
        }
        if !(self.tail_tol > 0.0) || self.tail_tol >= 1.0 {
            return Err(invalid("tail_tol", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Same scheme with twice the panel density.
    pub fn refined(&self) -> Self {
        QuadratureScheme {
            panels: self.panels * 2,
            ..self.clone()
        }
    }
}

/// Mesh covering the supports of all given fields.
pub fn mesh_for(fields: &[&Field], scheme: &QuadratureScheme) -> Result<Arc<Mesh>> {
    let mut support: Option<Support> = None;
    for f in fields {
        let s = f.support(scheme.tail_tol)?;
        support = Some(match support {
            None => s,
            Some(acc) => acc.union(&s)?,
        });
    }
    let support = support.ok_or_else(|| invalid("fields", "no field given"))?;
    Ok(Arc::new(Mesh::build(&support, scheme)?))
}

/// `∫ f p dμ` over the truncated support of `p`.
///
/// Nodes where `p` vanishes are skipped; a non-finite `f` anywhere else is
/// an [`Error::IntegrandSingularity`].
pub fn pair<F>(f: F, p: &Density, scheme: &QuadratureScheme) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    pair_field(f, &Field::from(p), scheme)
}

/// [`pair`] for a signed field.
pub fn pair_field<F>(f: F, p: &Field, scheme: &QuadratureScheme) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let sampled = Sampled::on_own_mesh(p, scheme)?;
    pair_sampled(f, &sampled)
}

pub(crate) fn pair_sampled<F>(f: F, p: &Sampled) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = p.mesh.dim;
    let mut sum = NeumaierSum::default();
    for ((x, w), j) in p.mesh.points.iter().zip(&p.mesh.weights).zip(&p.jets) {
        let pv = j.raw_value();
        if pv == 0.0 {
            continue;
        }
        let fx = f(&x[..dim]);
        if !fx.is_finite() {
            return Err(Error::IntegrandSingularity {
                node: x[..dim].to_vec(),
            });
        }
        sum.add(w * fx * pv);
    }
    Ok(sum.value())
}

/// `q·1`.
pub fn total_mass(p: &Density, scheme: &QuadratureScheme) -> Result<f64> {
    let sampled = Sampled::on_own_mesh(&Field::from(p), scheme)?;
    Ok(sampled.mass())
}

/// Domain of a weighted norm.
#[derive(Debug, Clone, PartialEq)]
pub enum NormDomain {
    /// Bounded box `[lo, hi]^d`.
    Box { lo: f64, hi: f64, dim: usize },
    /// ℝ^d truncated at the scheme radius (default 32), checked against twice that.
    Whole { dim: usize },
}

/// `(∫ f² (1+|x|)^m dμ)^(1/2)`.
pub fn weighted_norm<F>(f: F, m: f64, domain: &NormDomain, scheme: &QuadratureScheme) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if !(m > 0.0) {
        return Err(invalid("m", "weight exponent must be positive"));
    }
    let on = |lo: f64, hi: f64, dim: usize| -> Result<f64> {
        let axis = AxisExtent {
            lo,
            hi,
            core_lo: lo,
            core_hi: hi,
            resolution: f64::INFINITY,
        };
        let scheme = QuadratureScheme {
            radius: None,
            ..scheme.clone()
        };
        let mesh = Mesh::build(&Support::Whole(vec![axis; dim]), &scheme)?;
        let v = mesh.integrate(|_, x| {
            let y = f(&x[..dim]);
            y * y * (1.0 + norm(&x[..dim])).powf(m)
        });
        if !v.is_finite() {
            return Err(Error::IntegrandSingularity { node: vec![] });
        }
        Ok(v)
    };
    match *domain {
        NormDomain::Box { lo, hi, dim } => {
            if !(hi > lo) {
                return Err(invalid("domain", "expected lo < hi"));
            }
            Ok(on(lo, hi, dim)?.sqrt())
        }
        NormDomain::Whole { dim } => {
            let r = scheme.radius.unwrap_or(32.0);
            let v1 = on(-r, r, dim)?;
            let v2 = on(-2.0 * r, 2.0 * r, dim)?;
            if (v2 - v1).abs() > scheme.tail_tol.sqrt() * v1.max(1.0) {
                return Err(Error::Divergence {
                    radius: r,
                    at_r: v1.sqrt(),
                    at_2r: v2.sqrt(),
                });
            }
            Ok(v2.sqrt())
        }
    }
}

/// `(∫ f² (1+|x|)^m dμ)^(1/2)` for a field, on the field's own mesh.
pub fn weighted_norm_field(f: &Field, m: f64, scheme: &QuadratureScheme) -> Result<f64> {
    let s = Sampled::on_own_mesh(f, scheme)?;
    let dim = s.mesh.dim;
    let v = s.mesh.integrate(|i, x| {
        let y = s.jets[i].raw_value();
        y * y * (1.0 + norm(&x[..dim])).powf(m)
    });
    Ok(v.sqrt())
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Surface term `(1/R) Σ_{y = ±R} y·q'(y)/q(y) · p(y)` in d = 1.
pub fn boundary_term(p: &Density, q: &Density, r: f64) -> Result<f64> {
    if p.dim() != 1 || q.dim() != 1 {
        return Err(Error::Unsupported("boundary term is implemented for d = 1".into()));
    }
    if !q.is_analytic() {
        return Err(Error::HyvarinenOnGrid);
    }
    if !(r > 0.0) {
        return Err(invalid("R", "radius must be positive"));
    }
    let mut total = 0.0;
    for y in [-r, r] {
        let jq = q.jet(&[y])?;
        // ln(1e-300)
        if jq.value <= 0.0 || jq.ln_abs() < -690.0 {
            return Err(Error::BoundaryEvaluation { y });
        }
        total += y * jq.grad_ratio()[0] * p.value(&[y])?;
    }
    Ok(total / r)
}
