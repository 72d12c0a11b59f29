use nalgebra::DVector;

use super::Grid;
use crate::error::{Error, Result};

const STENCIL: usize = 5;

/// Fourth-order first-derivative weights (times `h`) for a node at offset
/// `o` inside a five-node uniform window.
const UNIFORM_WEIGHTS: [[f64; STENCIL]; STENCIL] = [
    [-25.0, 48.0, -36.0, 16.0, -3.0],
    [-3.0, -10.0, 18.0, -6.0, 1.0],
    [1.0, -8.0, 0.0, 8.0, -1.0],
    [-1.0, 6.0, -18.0, 10.0, 3.0],
    [3.0, -16.0, 36.0, -48.0, 25.0],
];

/// Finite-difference weights for derivatives `0..=max_order` at `x0` using
/// the nodes `xs` (Fornberg's recursion). `w[k][i]` multiplies `f(xs[i])` in
/// the `k`-th derivative.
pub fn fd_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Window start and first-derivative weights for node `j`: centered in the
/// interior, one-sided in the two boundary bands. Fourth order either way.
pub fn derivative_stencil(nodes: &[f64], j: usize) -> (usize, [f64; STENCIL]) {
    let n = nodes.len();
    debug_assert!(n >= STENCIL);
    let start = j.saturating_sub(2).min(n - STENCIL);
    let window = &nodes[start..start + STENCIL];
    let h = (window[STENCIL - 1] - window[0]) / (STENCIL - 1) as f64;
    let uniform = window
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs());
    let mut out = [0.0; STENCIL];
    if uniform {
        for (o, w) in out.iter_mut().zip(UNIFORM_WEIGHTS[j - start]) {
            *o = w / (12.0 * h);
        }
    } else {
        let w = fd_weights(nodes[j], window, 1);
        out.copy_from_slice(&w[1]);
    }
    (start, out)
}

/// Nodal first derivatives on an arbitrary grid with at least five nodes.
pub fn node_derivatives(values: &[DVector<f64>], nodes: &[f64]) -> Result<Vec<DVector<f64>>> {
    if nodes.len() < STENCIL {
        return Err(Error::GridTooCoarse {
            nodes: nodes.len(),
            required: STENCIL,
        });
    }
    if values.len() != nodes.len() {
        return Err(Error::InvalidInput(format!(
            "{} values for {} nodes",
            values.len(),
            nodes.len()
        )));
    }
    let m = values[0].len();
    Ok((0..nodes.len())
        .map(|j| {
            let (start, w) = derivative_stencil(nodes, j);
            // The weights sum to zero; differencing against the node value
            // keeps constants exact.
            let mut acc = DVector::zeros(m);
            for (k, wk) in w.iter().enumerate() {
                acc.axpy(*wk, &(&values[start + k] - &values[j]), 1.0);
            }
            acc
        })
        .collect())
}

/// Fourth-order first derivative of nodal data on a uniform grid.
pub fn differentiate(values: &[DVector<f64>], grid: &Grid) -> Result<Vec<DVector<f64>>> {
    if !grid.is_uniform() {
        return Err(Error::InvalidGrid("differentiation needs a uniform grid".into()));
    }
    node_derivatives(values, grid.nodes())
}
