//! Seeded generators for test densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::densities::{make_density, Density, DensityConfig};
use crate::error::Result;

/// Nodes of every sampled grid density on `[0, 1]`.
pub const GRID_POINTS: usize = 401;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridShape {
    /// Positive background plus Gaussian bumps; a unique maximum.
    Smooth,
    /// A smooth shape cut off at a level, so the maximum is a plateau.
    Plateau,
    /// Triangle on a positive base, peaking at a node.
    Tent,
}

/// Mixture of 1 to 3 Gaussians, means in `[-2, 2]`, variances in
/// `[0.25, 4]`, weights in `[0.2, 1]`, overall scale in `[0.5, 2]`.
pub fn mixture_density<R: Rng>(rng: &mut R) -> Result<Density> {
    let k = rng.gen_range(1..=3);
    let comps: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(-2.0..=2.0), rng.gen_range(0.25..=4.0)))
        .collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..=1.0)).collect();
    let scale = rng.gen_range(0.5..=2.0);
    make_density(&DensityConfig::mixture(&comps, &weights, scale))
}

fn smooth_values<R: Rng>(rng: &mut R) -> Vec<f64> {
    let base = rng.gen_range(0.2..=1.0);
    let bumps: Vec<(f64, f64, f64)> = (0..2)
        .map(|_| {
            (
                rng.gen_range(0.5..=2.0),
                rng.gen_range(0.1..=0.9),
                rng.gen_range(0.05..=0.3),
            )
        })
        .collect();
    (0..GRID_POINTS)
        .map(|i| {
            let x = i as f64 / (GRID_POINTS - 1) as f64;
            base + bumps
                .iter()
                .map(|(a, c, s)| a * (-(x - c) * (x - c) / (2.0 * s * s)).exp())
                .sum::<f64>()
        })
        .collect()
}

/// A 401-node grid density on `[0, 1]` of the given shape, scale in `[0.5, 2]`.
pub fn grid_density<R: Rng>(shape: GridShape, rng: &mut R) -> Result<Density> {
    let values = match shape {
        GridShape::Smooth => smooth_values(rng),
        GridShape::Plateau => {
            let v = smooth_values(rng);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let level = lo + (hi - lo) * rng.gen_range(0.6..=0.9);
            v.into_iter().map(|x| x.min(level)).collect()
        }
        GridShape::Tent => {
            let peak = rng.gen_range(40..=360) as f64 / (GRID_POINTS - 1) as f64;
            let height = rng.gen_range(1.0..=3.0);
            let base = rng.gen_range(0.1..=0.5);
            let width = rng.gen_range(0.1..=0.4);
            (0..GRID_POINTS)
                .map(|i| {
                    let x = i as f64 / (GRID_POINTS - 1) as f64;
                    base + height * (1.0 - (x - peak).abs() / width).max(0.0)
                })
                .collect()
        }
    };
    let scale = rng.gen_range(0.5..=2.0);
    make_density(&DensityConfig::Grid {
        domain: [0.0, 1.0],
        values,
        scale,
    })
}

/// A seeded stream of densities.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn mixture(&mut self) -> Result<Density> {
        mixture_density(&mut self.rng)
    }

    pub fn mixtures(&mut self, n: usize) -> Result<Vec<Density>> {
        (0..n).map(|_| self.mixture()).collect()
    }

    pub fn grid(&mut self, shape: GridShape) -> Result<Density> {
        grid_density(shape, &mut self.rng)
    }

    /// `n` grid densities cycling through `shapes`.
    pub fn grids(&mut self, n: usize, shapes: &[GridShape]) -> Result<Vec<Density>> {
        (0..n).map(|i| self.grid(shapes[i % shapes.len()])).collect()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::Family;
    use crate::rules::{mode_set, DEFAULT_MODE_TOL};

    #[test]
    fn same_seed_same_stream() {
        let a = Sampler::new(42).mixtures(5).unwrap();
        let b = Sampler::new(42).mixtures(5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, Sampler::new(43).mixtures(5).unwrap());
    }

    #[test]
    fn mixture_parameters_in_range() {
        let mut s = Sampler::new(7);
        for d in s.mixtures(50).unwrap() {
            let Family::Mixture { components, weights } = d.family() else {
                panic!("not a mixture")
            };
            assert!((1..=3).contains(&components.len()));
            for c in components {
                assert!((-2.0..=2.0).contains(&c.mean[0]));
                assert!((0.25..=4.0).contains(&c.var));
            }
            assert!(weights.iter().all(|w| (0.2..=1.0).contains(w)));
        }
    }

    #[test]
    fn grid_shapes_have_the_expected_mode_regimes() {
        let mut s = Sampler::new(3);
        for _ in 0..5 {
            let p = s.grid(GridShape::Plateau).unwrap();
            assert!(mode_set(&p, DEFAULT_MODE_TOL).unwrap().measure > 0.0);
            let t = s.grid(GridShape::Tent).unwrap();
            assert!(mode_set(&t, DEFAULT_MODE_TOL).unwrap().is_null());
        }
    }
}
