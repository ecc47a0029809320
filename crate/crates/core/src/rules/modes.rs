//! Mode sets of grid densities and the subgradient of the supremum entropy.

use serde::Serialize;

use crate::densities::{Density, Field, Grid};
use crate::error::{Error, Result};

/// Relative tolerance below the maximum that still counts as a mode.
pub const DEFAULT_MODE_TOL: f64 = 1e-9;

/// Where a grid density attains its maximum.
///
/// A cell `[x_i, x_{i+1}]` belongs to the mode region when both of its
/// endpoints are modes; the linear interpolant is then within tolerance of
/// the maximum on the whole cell. Mode nodes with no such neighbour are
/// isolated points and carry no Lebesgue measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSet {
    pub lo: f64,
    pub spacing: f64,
    pub nodes: usize,
    pub max: f64,
    /// Indices of every node with `q ≥ (1 - δ) max q`.
    pub mode_nodes: Vec<usize>,
    /// Cell `i` is `[x_i, x_{i+1}]`.
    pub cells: Vec<usize>,
    pub isolated: Vec<usize>,
    pub measure: f64,
}

impl ModeSet {
    pub(crate) fn from_values(lo: f64, spacing: f64, values: &[f64], delta: f64) -> ModeSet {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cut = (1.0 - delta) * max;
        let is_mode: Vec<bool> = values.iter().map(|&v| v >= cut).collect();
        let mode_nodes: Vec<usize> = (0..values.len()).filter(|&i| is_mode[i]).collect();
        let cells: Vec<usize> = (0..values.len().saturating_sub(1))
            .filter(|&i| is_mode[i] && is_mode[i + 1])
            .collect();
        let isolated = mode_nodes
            .iter()
            .copied()
            .filter(|&i| !(i > 0 && is_mode[i - 1]) && !(i + 1 < values.len() && is_mode[i + 1]))
            .collect();
        ModeSet {
            lo,
            spacing,
            nodes: values.len(),
            max,
            measure: cells.len() as f64 * spacing,
            mode_nodes,
            cells,
            isolated,
        }
    }

    pub(crate) fn of_grid(g: &Grid, scale: f64, delta: f64) -> ModeSet {
        let v: Vec<f64> = g.values.iter().map(|v| scale * v).collect();
        ModeSet::from_values(g.lo, g.spacing(), &v, delta)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing
    }

    /// No mode cell: the Dirac regime.
    pub fn is_null(&self) -> bool {
        self.cells.is_empty()
    }

    /// Whether `x` lies in a closed mode cell.
    pub fn contains(&self, x: f64) -> bool {
        let u = (x - self.lo) / self.spacing;
        let i = u.floor();
        if i < 0.0 {
            return false;
        }
        let i = i as usize;
        let on_node = u == u.floor();
        self.cells.binary_search(&i).is_ok() || (on_node && i > 0 && self.cells.binary_search(&(i - 1)).is_ok())
    }
}

/// Mode set of a grid density with relative tolerance `delta`.
pub fn mode_set(q: &Density, delta: f64) -> Result<ModeSet> {
    let g = q
        .grid_data()
        .ok_or_else(|| Error::Unsupported("mode sets are computed for grid densities".into()))?;
    Ok(ModeSet::of_grid(g, q.scale(), delta))
}

/// `q* = 1_M / μ(M)`, constant on the mode cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFunction {
    pub modes: ModeSet,
    pub height: f64,
}

impl CellFunction {
    pub fn at(&self, x: f64) -> f64 {
        if self.modes.contains(x) {
            self.height
        } else {
            0.0
        }
    }

    /// `p·q*`, integrating the grid interpolant of `p` cell by cell.
    pub fn pair(&self, p: &Field) -> Result<f64> {
        let mut values = vec![0.0; self.modes.nodes];
        for &c in &self.modes.cells {
            for i in [c, c + 1] {
                values[i] = p.value(&[self.modes.node(i)])?;
            }
        }
        Ok(self.pair_values(&values))
    }

    /// `p·q*` for node values of `p` on the same grid.
    pub(crate) fn pair_values(&self, values: &[f64]) -> f64 {
        let h = self.modes.spacing;
        let s: f64 = self
            .modes
            .cells
            .iter()
            .map(|&c| 0.5 * h * (values[c] + values[c + 1]))
            .sum();
        self.height * s
    }
}

/// The integrable subgradient of `sup` at `q`, when the mode set has
/// positive measure.
pub fn sup_subgradient(q: &Density, delta: f64) -> Result<CellFunction> {
    let modes = mode_set(q, delta)?;
    if modes.is_null() {
        return Err(Error::MeasureZeroMode);
    }
    Ok(CellFunction {
        height: 1.0 / modes.measure,
        modes,
    })
}
