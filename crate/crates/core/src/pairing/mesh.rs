//! Quadrature meshes and fields sampled on them.

use std::sync::Arc;

use super::gauss::gauss_legendre;
use super::{QuadratureRule, QuadratureScheme};
use crate::densities::{AxisExtent, Field, Grid, Jet, Support, Term};
use crate::error::{invalid, Result};

/// Nodes and weights of a tensor-product rule, or the trapezoid rule on a
/// grid's native nodes.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Set when the nodes are exactly the nodes of this grid, in order.
    pub grid: Option<Arc<Grid>>,
}

impl Mesh {
    pub fn build(support: &Support, scheme: &QuadratureScheme) -> Result<Mesh> {
        scheme.validate()?;
        match support {
            Support::Grid(g) => {
                let n = g.len();
                let h = g.spacing();
                let points = (0..n).map(|i| [g.node(i), 0.0]).collect();
                let weights = (0..n).map(|i| if i == 0 || i + 1 == n { 0.5 * h } else { h }).collect();
                Ok(Mesh {
                    dim: 1,
                    points,
                    weights,
                    grid: Some(g.clone()),
                })
            }
            Support::Whole(axes) => {
                let rules: Vec<(Vec<f64>, Vec<f64>)> = axes
                    .iter()
                    .map(|a| axis_rule(&apply_radius(a, scheme.radius), scheme))
                    .collect();
                let (points, weights) = match rules.as_slice() {
                    [(x, w)] => (x.iter().map(|&x| [x, 0.0]).collect(), w.clone()),
                    [(x, wx), (y, wy)] => {
                        let mut pts = Vec::with_capacity(x.len() * y.len());
                        let mut ws = Vec::with_capacity(x.len() * y.len());
                        for (xi, wi) in x.iter().zip(wx) {
                            for (yj, wj) in y.iter().zip(wy) {
                                pts.push([*xi, *yj]);
                                ws.push(wi * wj);
                            }
                        }
                        (pts, ws)
                    }
                    _ => return Err(invalid("dim", "only d = 1 and d = 2 are supported")),
                };
                Ok(Mesh {
                    dim: axes.len(),
                    points,
                    weights,
                    grid: None,
                })
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ wᵢ f(xᵢ)` with compensated summation.
    pub fn integrate<F: FnMut(usize, &[f64; 2]) -> f64>(&self, mut f: F) -> f64 {
        let mut s = NeumaierSum::default();
        for (i, (x, w)) in self.points.iter().zip(&self.weights).enumerate() {
            s.add(w * f(i, x));
        }
        s.value()
    }
}

fn apply_radius(a: &AxisExtent, radius: Option<f64>) -> AxisExtent {
    match radius {
        None => *a,
        Some(r) => AxisExtent {
            lo: -r,
            hi: r,
            core_lo: a.core_lo.max(-r),
            core_hi: a.core_hi.min(r),
            resolution: a.resolution,
        },
    }
}

/// Panels of width `h` aligned to multiples of `h` over the core, then
/// geometrically growing panels out to the truncation radius.
fn panels(a: &AxisExtent, scheme: &QuadratureScheme) -> Vec<(f64, f64)> {
    let h = (1.0 / scheme.panels as f64).min(a.resolution / 4.0);
    let mut out = Vec::new();
    let core_lo = a.core_lo.max(a.lo);
    let core_hi = a.core_hi.min(a.hi);
    if core_hi <= core_lo {
        return out;
    }
    let k0 = (core_lo / h).floor() as i64;
    let k1 = (core_hi / h).ceil() as i64;
    let start = (k0 as f64 * h).max(a.lo);
    let end = (k1 as f64 * h).min(a.hi);
    let mut cuts = vec![start];
    for k in (k0 + 1)..k1 {
        cuts.push(k as f64 * h);
    }
    cuts.push(end);
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            out.push((w[0], w[1]));
        }
    }
    let mid = 0.5 * (core_lo + core_hi);
    // Right tail.
    let mut b = end;
    while b < a.hi {
        let width = h.max(0.25 * (b - mid).abs());
        let nb = (b + width).min(a.hi);
        out.push((b, nb));
        b = nb;
    }
    // Left tail.
    let mut b = start;
    while b > a.lo {
        let width = h.max(0.25 * (b - mid).abs());
        let nb = (b - width).max(a.lo);
        out.push((nb, b));
        b = nb;
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

fn axis_rule(a: &AxisExtent, scheme: &QuadratureScheme) -> (Vec<f64>, Vec<f64>) {
    let ps = panels(a, scheme);
    let n = scheme.nodes;
    let mut xs = Vec::with_capacity(ps.len() * (n + 1));
    let mut ws = Vec::with_capacity(ps.len() * (n + 1));
    match scheme.rule {
        QuadratureRule::GaussLegendreComposite => {
            let (gx, gw) = gauss_legendre(n);
            for (a, b) in ps {
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for (x, w) in gx.iter().zip(&gw) {
                    xs.push(mid + half * x);
                    ws.push(half * w);
                }
            }
        }
        QuadratureRule::Trapezoid => {
            for (a, b) in ps {
                let step = (b - a) / n as f64;
                for i in 0..=n {
                    let w = if i == 0 || i == n { 0.5 * step } else { step };
                    xs.push(a + i as f64 * step);
                    ws.push(w);
                }
            }
        }
    }
    (xs, ws)
}

/// A field's jets at every node of a mesh.
#[derive(Debug, Clone)]
pub struct Sampled {
    pub mesh: Arc<Mesh>,
    pub jets: Vec<Jet>,
}

impl Sampled {
    pub fn new(field: &Field, mesh: Arc<Mesh>) -> Result<Sampled> {
        let mut jets = vec![Jet::ZERO; mesh.len()];
        // Grid densities living on the mesh's own grid are read node by node.
        let on_grid = |t: &Term| match (t, &mesh.grid) {
            (Term::Density(d), Some(g)) => d.grid_data().is_some_and(|dg| dg.same_layout(g)),
            _ => false,
        };
        if field.terms().iter().all(|(_, t)| on_grid(t)) {
            for (i, j) in jets.iter_mut().enumerate() {
                let mut v = 0.0;
                for (c, t) in field.terms() {
                    if let Term::Density(d) = t {
                        v += c * d.scale() * d.grid_data().expect("grid term").values[i];
                    }
                }
                *j = Jet::value_only(v);
            }
            return Ok(Sampled { mesh, jets });
        }
        for (j, x) in jets.iter_mut().zip(&mesh.points) {
            *j = field.jet_at(x)?;
        }
        Ok(Sampled { mesh, jets })
    }

    /// Samples `field` on the mesh of its own support.
    pub fn on_own_mesh(field: &Field, scheme: &QuadratureScheme) -> Result<Sampled> {
        let mesh = Arc::new(Mesh::build(&field.support(scheme.tail_tol)?, scheme)?);
        Sampled::new(field, mesh)
    }

    /// `a·self + b·other` node by node; both must share the mesh.
    pub fn lin(&self, a: f64, other: &Sampled, b: f64) -> Sampled {
        debug_assert!(Arc::ptr_eq(&self.mesh, &other.mesh));
        let jets = self
            .jets
            .iter()
            .zip(&other.jets)
            .map(|(x, y)| Jet::lin(a, x, b, y))
            .collect();
        Sampled {
            mesh: self.mesh.clone(),
            jets,
        }
    }

    pub fn scale(&self, a: f64) -> Sampled {
        Sampled {
            mesh: self.mesh.clone(),
            jets: self.jets.iter().map(|j| j.scaled(a)).collect(),
        }
    }

    pub fn mass(&self) -> f64 {
        self.mesh.integrate(|i, _| self.jets[i].raw_value())
    }

    pub fn is_smooth(&self) -> bool {
        self.jets.iter().all(|j| j.smooth)
    }

    pub fn raw_values(&self) -> Vec<f64> {
        self.jets.iter().map(Jet::raw_value).collect()
    }
}

/// Kahan–Babuška–Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extent(lo: f64, hi: f64) -> AxisExtent {
        AxisExtent {
            lo,
            hi,
            core_lo: lo,
            core_hi: hi,
            resolution: 1.0,
        }
    }

    #[test]
    fn panels_are_contiguous_and_aligned() {
        let s = QuadratureScheme::default();
        let ps = panels(&extent(-1.03, 2.5), &s);
        assert_eq!(ps.first().unwrap().0, -1.03);
        assert_eq!(ps.last().unwrap().1, 2.5);
        for w in ps.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        // zero is a breakpoint
        assert!(ps.iter().any(|p| p.0 == 0.0));
    }

    #[test]
    fn geometric_tails_reach_far_out_with_few_panels() {
        let s = QuadratureScheme::default();
        let a = AxisExtent {
            lo: -1e10,
            hi: 1e10,
            core_lo: -16.0,
            core_hi: 16.0,
            resolution: 1.0,
        };
        let ps = panels(&a, &s);
        assert!(ps.len() < 16 * 32 + 250, "{} panels", ps.len());
        let (x, w) = axis_rule(&a, &s);
        // ∫ 1/(1+x²) over ±1e10 = π - 2e-10
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w / (1.0 + x * x)).sum();
        assert!((v - (std::f64::consts::PI - 2e-10)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn trapezoid_axis_rule_integrates_linear_exactly() {
        let s = QuadratureScheme {
            rule: QuadratureRule::Trapezoid,
            ..QuadratureScheme::default()
        };
        let (x, w) = axis_rule(&extent(0.0, 3.0), &s);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * (2.0 * x + 1.0)).sum();
        assert!((v - 12.0).abs() < 1e-12);
    }

    #[test]
    fn neumaier_recovers_cancelled_bits() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
