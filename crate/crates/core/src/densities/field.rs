use super::{AxisExtent, Density, Jet, Support};
use crate::error::{invalid, Result};

/// Compactly supported polynomial bump `(1 - |u|²)²`, `u = (x - center)/half_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: [f64; 2],
    pub half_width: f64,
    pub dim: usize,
}

impl Bump {
    pub fn new(center: f64, half_width: f64) -> Self {
        assert!(half_width > 0.0, "bump half width must be positive");
        Bump {
            center: [center, 0.0],
            half_width,
            dim: 1,
        }
    }

    /// `∫ (1 - u²)² dx` over its support in d = 1.
    pub fn integral(&self) -> f64 {
        match self.dim {
            1 => 16.0 / 15.0 * self.half_width,
            _ => std::f64::consts::PI / 3.0 * self.half_width * self.half_width,
        }
    }

    fn jet(&self, x: &[f64; 2]) -> Jet {
        let h = self.half_width;
        let mut u = [0.0; 2];
        let mut s = 0.0;
        for k in 0..self.dim {
            u[k] = (x[k] - self.center[k]) / h;
            s += u[k] * u[k];
        }
        if s >= 1.0 {
            return Jet::ZERO;
        }
        let one_s = 1.0 - s;
        let mut g = [0.0; 2];
        for k in 0..self.dim {
            g[k] = -4.0 * u[k] * one_s / h;
        }
        Jet {
            log_scale: 0.0,
            value: one_s * one_s,
            gradient: g,
            laplacian: -4.0 / (h * h) * (self.dim as f64 * one_s - 2.0 * s),
            smooth: true,
        }
    }

    fn support(&self) -> Support {
        let h = self.half_width;
        Support::Whole(
            (0..self.dim)
                .map(|k| AxisExtent {
                    lo: self.center[k] - h,
                    hi: self.center[k] + h,
                    core_lo: self.center[k] - h,
                    core_hi: self.center[k] + h,
                    resolution: h,
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Density(Density),
    Bump(Bump),
}

impl Term {
    fn dim(&self) -> usize {
        match self {
            Term::Density(d) => d.dim(),
            Term::Bump(b) => b.dim,
        }
    }
}

/// A signed finite linear combination `Σ cᵢ fᵢ` of densities and bumps.
///
/// Directions `p - q`, perturbed points `q + t·p` and sign-changing test
/// functions are all fields. Like terms are merged, so `q + 1·(p - q)`
/// is represented exactly as `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    dim: usize,
    terms: Vec<(f64, Term)>,
}

impl From<Density> for Field {
    fn from(d: Density) -> Self {
        Field {
            dim: d.dim(),
            terms: vec![(1.0, Term::Density(d))],
        }
    }
}

impl From<&Density> for Field {
    fn from(d: &Density) -> Self {
        Field::from(d.clone())
    }
}

impl From<Bump> for Field {
    fn from(b: Bump) -> Self {
        Field {
            dim: b.dim,
            terms: vec![(1.0, Term::Bump(b))],
        }
    }
}

impl Field {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(f64, Term)] {
        &self.terms
    }

    /// `a·self + b·other`.
    pub fn lin(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        if self.dim != other.dim {
            return Err(invalid("dim", "fields of different dimension"));
        }
        let mut out = Field {
            dim: self.dim,
            terms: Vec::with_capacity(self.terms.len() + other.terms.len()),
        };
        for (c, t) in &self.terms {
            out.push(a * c, t);
        }
        for (c, t) in &other.terms {
            out.push(b * c, t);
        }
        out.terms.retain(|(c, _)| *c != 0.0);
        Ok(out)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.lin(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.lin(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Field {
        let mut f = self.clone();
        for (c, _) in &mut f.terms {
            *c *= a;
        }
        f.terms.retain(|(c, _)| *c != 0.0);
        f
    }

    fn push(&mut self, c: f64, t: &Term) {
        debug_assert_eq!(t.dim(), self.dim);
        for (c0, t0) in &mut self.terms {
            match (t0, t) {
                (Term::Density(a), Term::Density(b)) if a.family() == b.family() => {
                    *c0 += c * b.scale() / a.scale();
                    return;
                }
                (Term::Bump(a), Term::Bump(b)) if a == b => {
                    *c0 += c;
                    return;
                }
                _ => {}
            }
        }
        self.terms.push((c, t.clone()));
    }

    /// The single density this field equals, if it is a positive multiple of one.
    pub fn as_density(&self) -> Option<Density> {
        match self.terms.as_slice() {
            [(c, Term::Density(d))] if *c > 0.0 => Some(d.scaled(*c)),
            _ => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.terms.iter().all(|(_, t)| match t {
            Term::Density(d) => d.is_analytic(),
            Term::Bump(_) => true,
        })
    }

    pub(crate) fn jet_at(&self, x: &[f64; 2]) -> Result<Jet> {
        let mut jets = Vec::with_capacity(self.terms.len());
        for (c, t) in &self.terms {
            let j = match t {
                Term::Density(d) => d.jet_at(x)?,
                Term::Bump(b) => b.jet(x),
            };
            jets.push((*c, j));
        }
        Ok(Jet::combine(jets.iter().map(|(c, j)| (*c, j))))
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        if x.len() != self.dim {
            return Err(invalid("x", "wrong number of coordinates"));
        }
        let mut p = [0.0; 2];
        p[..self.dim].copy_from_slice(x);
        self.jet_at(&p)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.jet(x)?.raw_value())
    }

    pub fn support(&self, tail_tol: f64) -> Result<Support> {
        let mut it = self.terms.iter().map(|(_, t)| match t {
            Term::Density(d) => d.support(tail_tol),
            Term::Bump(b) => b.support(),
        });
        let first = it
            .next()
            .ok_or_else(|| invalid("field", "empty combination has no support"))?;
        it.try_fold(first, |acc, s| acc.union(&s))
    }

    /// Sum of `cᵢ·massᵢ` using cached masses and exact bump integrals.
    pub fn mass(&self) -> f64 {
        self.terms
            .iter()
            .map(|(c, t)| match t {
                Term::Density(d) => c * d.mass(),
                Term::Bump(b) => c * b.integral(),
            })
            .sum()
    }
}
