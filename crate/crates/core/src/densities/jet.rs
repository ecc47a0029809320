//! Scaled local expansions of a function at a point.
//!
//! A [`Jet`] stores `value`, `gradient` and `laplacian` all multiplied by a
//! common factor `exp(-log_scale)`. Gaussian tails therefore never underflow:
//! a Gaussian far from its mean carries its log-density in `log_scale` and
//! `value = 1`. Ratios such as `∇q/q` and `Δq/q` are scale free and stay
//! accurate wherever the density itself would be a subnormal number.

/// Local data of a (possibly signed) function at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub log_scale: f64,
    pub value: f64,
    pub gradient: [f64; 2],
    pub laplacian: f64,
    /// Whether `gradient` and `laplacian` carry exact analytic data.
    pub smooth: bool,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        log_scale: 0.0,
        value: 0.0,
        gradient: [0.0; 2],
        laplacian: 0.0,
        smooth: true,
    };

    /// A jet with only a value, as produced by grid data.
    pub fn value_only(value: f64) -> Self {
        Jet {
            log_scale: 0.0,
            value,
            gradient: [f64::NAN; 2],
            laplacian: f64::NAN,
            smooth: false,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0.0
    }

    /// Unscaled value. May underflow to zero in far tails.
    pub fn raw_value(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.value * self.log_scale.exp()
        }
    }

    /// `ln |f|`, `-inf` at zeros.
    pub fn ln_abs(&self) -> f64 {
        if self.value == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.log_scale + self.value.abs().ln()
        }
    }

    /// `∇f / f`.
    pub fn grad_ratio(&self) -> [f64; 2] {
        [self.gradient[0] / self.value, self.gradient[1] / self.value]
    }

    /// `Δf / f`.
    pub fn laplacian_ratio(&self) -> f64 {
        self.laplacian / self.value
    }

    pub fn raw_gradient(&self) -> [f64; 2] {
        let s = self.log_scale.exp();
        [self.gradient[0] * s, self.gradient[1] * s]
    }

    pub fn raw_laplacian(&self) -> f64 {
        self.laplacian * self.log_scale.exp()
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.gradient[0] *= factor;
        self.gradient[1] *= factor;
        self.laplacian *= factor;
        self
    }

    /// Linear combination `Σ cᵢ jetᵢ`, rescaled to the largest contributing term.
    pub fn combine<'a, I>(terms: I) -> Jet
    where
        I: IntoIterator<Item = (f64, &'a Jet)> + Clone,
    {
        let mut top = f64::NEG_INFINITY;
        for (c, j) in terms.clone() {
            if c != 0.0 && j.value != 0.0 && j.log_scale > top {
                top = j.log_scale;
            }
        }
        if top == f64::NEG_INFINITY {
            return Jet::ZERO;
        }
        let mut out = Jet {
            log_scale: top,
            value: 0.0,
            gradient: [0.0; 2],
            laplacian: 0.0,
            smooth: true,
        };
        for (c, j) in terms {
            if c == 0.0 {
                continue;
            }
            out.smooth &= j.smooth;
            if j.value == 0.0 && (!j.smooth || (j.gradient == [0.0; 2] && j.laplacian == 0.0)) {
                continue;
            }
            let w = c * (j.log_scale - top).exp();
            if w == 0.0 {
                continue;
            }
            out.value += w * j.value;
            out.gradient[0] += w * j.gradient[0];
            out.gradient[1] += w * j.gradient[1];
            out.laplacian += w * j.laplacian;
        }
        if !out.smooth {
            out.gradient = [f64::NAN; 2];
            out.laplacian = f64::NAN;
        }
        out
    }

    pub fn lin(a: f64, x: &Jet, b: f64, y: &Jet) -> Jet {
        Jet::combine([(a, x), (b, y)])
    }
}
