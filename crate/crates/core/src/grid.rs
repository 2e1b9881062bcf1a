//! Uniform interior meshes of a box domain, boundary distances, and weighted norms.
//!
//! Only interior nodes are stored; the homogeneous exterior condition is
//! structural, every nodal function is extended by zero outside the box.

use crate::error::CoreError;

/// Uniform interior mesh of a 1D interval or a 2D square box.
///
/// For `cells` interior nodes per axis the spacing is `L / (cells + 1)`, so
/// the mesh excludes the boundary. `bdist[i]` is the exact Euclidean distance
/// from node `i` to the box boundary and `quad_weight = spacing^dim` is the
/// cell measure used by all discrete integrals.
#[derive(Debug, Clone)]
pub struct Grid {
    pub dim: usize,
    pub cells_per_axis: usize,
    pub spacing: f64,
    pub nodes: Vec<[f64; 2]>,
    pub bdist: Vec<f64>,
    pub quad_weight: f64,
    pub box_lengths: [f64; 2],
}

impl Grid {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Row-major node index for 2D grids (`ix` fastest).
    pub fn index2(&self, ix: usize, iy: usize) -> usize {
        iy * self.cells_per_axis + ix
    }
}

/// Real values on the interior nodes, extended by zero outside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, CoreError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidParam(
                "grid function contains a non-finite value".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            values: vec![c; n],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self {
            values: grid.nodes.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Nodewise positive part.
    pub fn pos(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// Nodewise power of the positive part, `(u⁺)^q`.
    pub fn pos_pow(&self, q: f64) -> Self {
        self.map(|v| if v > 0.0 { v.powf(q) } else { 0.0 })
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// self += c * other
    pub fn add_scaled(&mut self, c: f64, other: &Self) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// Builds the uniform interior mesh. `cells` is the interior node count per
/// axis; 2D boxes must be square so that a single spacing tiles both axes.
pub fn build_grid(dim: usize, cells: usize, box_lengths: &[f64]) -> Result<Grid, CoreError> {
    if dim != 1 && dim != 2 {
        return Err(CoreError::InvalidGrid(format!(
            "dim must be 1 or 2, got {dim}"
        )));
    }
    if cells < 2 {
        return Err(CoreError::InvalidGrid(format!(
            "cells must be at least 2, got {cells}"
        )));
    }
    if box_lengths.len() != dim {
        return Err(CoreError::InvalidGrid(format!(
            "expected {dim} box lengths, got {}",
            box_lengths.len()
        )));
    }
    if box_lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(CoreError::InvalidGrid(
            "box lengths must be positive and finite".into(),
        ));
    }
    if dim == 2 && (box_lengths[0] - box_lengths[1]).abs() > 1e-14 * box_lengths[0] {
        return Err(CoreError::InvalidGrid(
            "2D boxes must be square (equal box lengths) for a uniform spacing".into(),
        ));
    }

    let lx = box_lengths[0];
    let h = lx / (cells + 1) as f64;
    let mut nodes = Vec::new();
    let mut bdist = Vec::new();
    match dim {
        1 => {
            for i in 1..=cells {
                let x = i as f64 * h;
                nodes.push([x, 0.0]);
                bdist.push(x.min(lx - x));
            }
        }
        _ => {
            let ly = box_lengths[1];
            for iy in 1..=cells {
                let y = iy as f64 * h;
                for ix in 1..=cells {
                    let x = ix as f64 * h;
                    nodes.push([x, y]);
                    bdist.push(x.min(lx - x).min(y).min(ly - y));
                }
            }
        }
    }

    Ok(Grid {
        dim,
        cells_per_axis: cells,
        spacing: h,
        nodes,
        bdist,
        quad_weight: h.powi(dim as i32),
        box_lengths: [lx, if dim == 2 { box_lengths[1] } else { 0.0 }],
    })
}

/// Discrete Lebesgue norm `(Σ_i quad_weight · |u_i|^r)^{1/r}` for `r ≥ 1`.
pub fn lp_norm(u: &GridFunction, g: &Grid, r: f64) -> Result<f64, CoreError> {
    if !(r >= 1.0) {
        return Err(CoreError::InvalidParam(format!(
            "Lebesgue exponent must be >= 1, got {r}"
        )));
    }
    if u.len() != g.node_count() {
        return Err(CoreError::ShapeMismatch {
            expected: g.node_count(),
            got: u.len(),
        });
    }
    let sum: f64 = u.values.iter().map(|v| v.abs().powf(r)).sum();
    Ok((g.quad_weight * sum).powf(1.0 / r))
}
