use nalgebra::DVector;

use super::Grid;
use crate::error::{Error, Result};

/// Advances `y` from `t` to `t + h` using `substeps` classical RK4 steps.
pub fn rk4_step<F>(rhs: &mut F, t: f64, y: &DVector<f64>, h: f64, substeps: usize) -> DVector<f64>
where
    F: FnMut(f64, &DVector<f64>) -> DVector<f64>,
{
    let n = substeps.max(1);
    let dt = h / n as f64;
    let mut y = y.clone();
    for s in 0..n {
        let ts = t + dt * s as f64;
        let k1 = rhs(ts, &y);
        let k2 = rhs(ts + 0.5 * dt, &(&y + &k1 * (0.5 * dt)));
        let k3 = rhs(ts + 0.5 * dt, &(&y + &k2 * (0.5 * dt)));
        let k4 = rhs(ts + dt, &(&y + &k3 * dt));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    y
}

/// Cubic Hermite interpolant on `[t0, t1]`.
pub fn hermite(
    t0: f64,
    t1: f64,
    y0: &DVector<f64>,
    y1: &DVector<f64>,
    d0: &DVector<f64>,
    d1: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
        + d0 * (h * (s3 - 2.0 * s2 + s))
        + y1 * (-2.0 * s3 + 3.0 * s2)
        + d1 * (h * (s3 - s2))
}

/// Time derivative of [`hermite`].
pub fn hermite_derivative(
    t0: f64,
    t1: f64,
    y0: &DVector<f64>,
    y1: &DVector<f64>,
    d0: &DVector<f64>,
    d1: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    (y1 - y0) * ((6.0 * s - 6.0 * s2) / h)
        + d0 * (3.0 * s2 - 4.0 * s + 1.0)
        + d1 * (3.0 * s2 - 2.0 * s)
}

/// Nodal solution of an initial-value problem plus the right-hand side at
/// each node, which feeds the Hermite dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub derivatives: Vec<DVector<f64>>,
}

impl Trajectory {
    /// Dense output at `t` (clamped to the covered span).
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let n = self.times.len();
        let j = match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        hermite(
            self.times[j],
            self.times[j + 1],
            &self.states[j],
            &self.states[j + 1],
            &self.derivatives[j],
            &self.derivatives[j + 1],
            t,
        )
    }
}

/// Integrates `y' = f(t, y)` over the grid, one RK4 block of `substeps` per
/// interval. `states[0]` is `y0` exactly.
pub fn integrate<F>(mut rhs: F, y0: &DVector<f64>, grid: &Grid, substeps: usize) -> Result<Trajectory>
where
    F: FnMut(f64, &DVector<f64>) -> DVector<f64>,
{
    let t = grid.nodes();
    let mut states = Vec::with_capacity(t.len());
    let mut derivatives = Vec::with_capacity(t.len());
    states.push(y0.clone());
    derivatives.push(rhs(t[0], y0));
    for j in 0..t.len() - 1 {
        let next = rk4_step(&mut rhs, t[j], &states[j], t[j + 1] - t[j], substeps);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: t[j + 1] });
        }
        derivatives.push(rhs(t[j + 1], &next));
        states.push(next);
    }
    Ok(Trajectory {
        times: t.to_vec(),
        states,
        derivatives,
    })
}
