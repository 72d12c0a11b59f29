//! Numerical kernels shared by every geometric routine: grids, fixed-step
//! RK4 with Hermite dense output, finite-difference stencils and polynomial
//! least squares.

mod diff;
mod ode;
mod poly;

pub use diff::{derivative_stencil, differentiate, fd_weights, node_derivatives};
pub use ode::{hermite, hermite_derivative, integrate, rk4_step, Trajectory};
pub use poly::{eval_poly, fit_poly, l2_residual, PolyBasis, PolyCoeffs, MAX_CONDITION};

use crate::error::{Error, Result};

/// Strictly increasing time nodes `t_0 < … < t_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
    uniform: bool,
}

impl Grid {
    /// Smallest admissible number of intervals.
    pub const MIN_INTERVALS: usize = 4;

    /// Uniform grid with `intervals` equal steps on `[start, end]`.
    pub fn uniform(start: f64, end: f64, intervals: usize) -> Result<Self> {
        if intervals < Self::MIN_INTERVALS {
            return Err(Error::GridTooCoarse {
                nodes: intervals + 1,
                required: Self::MIN_INTERVALS + 1,
            });
        }
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidGrid(format!(
                "need finite start < end, got [{start}, {end}]"
            )));
        }
        let n = intervals as f64;
        let nodes = (0..=intervals)
            .map(|i| {
                let s = i as f64 / n;
                start * (1.0 - s) + end * s
            })
            .collect();
        Ok(Self {
            nodes,
            uniform: true,
        })
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < Self::MIN_INTERVALS + 1 {
            return Err(Error::GridTooCoarse {
                nodes: nodes.len(),
                required: Self::MIN_INTERVALS + 1,
            });
        }
        if nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite node".into()));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!(
                "nodes must be strictly increasing (violated at index {})",
                i + 1
            )));
        }
        let uniform = is_uniform(&nodes);
        Ok(Self { nodes, uniform })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes, `N + 1`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of intervals, `N`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Step size of a uniform grid.
    pub fn spacing(&self) -> Option<f64> {
        self.uniform
            .then(|| (self.end() - self.start()) / self.intervals() as f64)
    }

    /// Index of the node equal to `t` (within `1e-12` of the span).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-12 * (self.end() - self.start());
        self.nodes.iter().position(|&x| (x - t).abs() <= tol)
    }

    /// Interval `j` with `t_j ≤ t ≤ t_{j+1}`, clamped to the grid.
    pub fn locate(&self, t: f64) -> usize {
        let last = self.intervals() - 1;
        match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(last),
            Err(0) => 0,
            Err(i) => (i - 1).min(last),
        }
    }

    /// Trapezoid weights defining the grid's discrete `L²` inner product.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.nodes[i] - self.nodes[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.nodes[i + 1] - self.nodes[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }

    /// Every `stride`-th node; the stride must divide the interval count.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.intervals().is_multiple_of(stride) {
            return Err(Error::InvalidGrid(format!(
                "stride {stride} does not divide {} intervals",
                self.intervals()
            )));
        }
        let nodes: Vec<f64> = self.nodes.iter().copied().step_by(stride).collect();
        if self.uniform {
            Self::uniform(self.start(), self.end(), nodes.len() - 1)
        } else {
            Self::from_nodes(nodes)
        }
    }
}

fn is_uniform(nodes: &[f64]) -> bool {
    let n = nodes.len() - 1;
    let h = (nodes[n] - nodes[0]) / n as f64;
    nodes
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs())
}

/// Cumulative trapezoid integral of nodal values, starting from zero.
pub fn cumulative_trapezoid(values: &[f64], grid: &Grid) -> Vec<f64> {
    let t = grid.nodes();
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..values.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (values[i] + values[i - 1]);
        out.push(acc);
    }
    out
}

/// Cumulative integral using nodal values and derivatives (Hermite
/// quadrature, fourth order).
pub fn cumulative_hermite(values: &[f64], derivatives: &[f64], grid: &Grid) -> Vec<f64> {
    let t = grid.nodes();
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..values.len() {
        let h = t[i] - t[i - 1];
        acc += 0.5 * h * (values[i - 1] + values[i])
            + h * h / 12.0 * (derivatives[i - 1] - derivatives[i]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_has_exact_middle_zero() {
        let g = Grid::uniform(-1.0, 1.0, 400).unwrap();
        assert_eq!(g.nodes()[200], 0.0);
        assert_eq!(g.index_of(0.0), Some(200));
        assert!(g.is_uniform());
    }

    #[test]
    fn coarse_grids_are_rejected() {
        assert!(matches!(
            Grid::uniform(0.0, 1.0, 3),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(matches!(
            Grid::from_nodes(vec![0.0, 0.2, 0.1, 0.5, 0.9]),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn from_nodes_detects_nonuniform() {
        let g = Grid::from_nodes(vec![0.0, 0.1, 0.3, 0.4, 0.9, 1.0]).unwrap();
        assert!(!g.is_uniform());
        assert_eq!(g.spacing(), None);
        assert_eq!(g.locate(0.35), 2);
        assert_eq!(g.locate(1.0), 4);
        assert_eq!(g.locate(-5.0), 0);
    }

    #[test]
    fn subsample_keeps_endpoints() {
        let g = Grid::uniform(0.0, 1.0, 800).unwrap().subsample(2).unwrap();
        assert_eq!(g.intervals(), 400);
        assert_eq!(g.end(), 1.0);
    }

    #[test]
    fn hermite_quadrature_is_fourth_order() {
        let g = Grid::uniform(0.0, 1.0, 50).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|t| t.cos()).collect();
        let df: Vec<f64> = g.nodes().iter().map(|t| -t.sin()).collect();
        let c = cumulative_hermite(&f, &df, &g);
        assert!((c[50] - 1f64.sin()).abs() < 1e-9);
    }
}
