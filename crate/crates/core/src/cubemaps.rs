//! Linearization of based maps `α: [−1, 1]² → M`.
//!
//! `v1` is the linearization of the `s₂ = 0` line. `v2(s₁, s₂)` is
//! `∂α/∂s₂` transported to `s₂ = 0` along its `s₂`-line and then to the
//! basepoint along the `s₁`-line; in practice the parallel frame of the
//! `s₁`-line is transported along every `s₂`-line and `∂α/∂s₂` is read off
//! in it.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{Frame, Manifold, Point};
use crate::linearize::{p_forward_with_field, p_inverse_with_frames, TangentCurve};
use crate::numerics::{node_derivatives, Grid};
use crate::par::par_map;
use crate::transport::{curve_velocities, transport_frame_with, SampledCurve, TransportConfig};

/// Samples of `α` on `grid1 × grid2`; `points[i][j] = α(s₁_i, s₂_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeSample {
    pub grid1: Grid,
    pub grid2: Grid,
    pub points: Vec<Vec<Point>>,
    /// Node indices of the basepoint `(0, 0)`.
    pub base: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeLinearization {
    pub v1: TangentCurve,
    pub grid2: Grid,
    /// `v2[i][j]`, components in `v1.frame0`.
    pub v2: Vec<Vec<DVector<f64>>>,
    pub base2: usize,
}

impl CubeSample {
    pub fn new(grid1: Grid, grid2: Grid, points: Vec<Vec<Point>>, base: (usize, usize)) -> Result<Self> {
        if points.len() != grid1.len() || points.iter().any(|row| row.len() != grid2.len()) {
            return Err(Error::InvalidInput(format!(
                "points must be {}x{}",
                grid1.len(),
                grid2.len()
            )));
        }
        if base.0 >= grid1.len() || base.1 >= grid2.len() {
            return Err(Error::InvalidInput("base index out of range".into()));
        }
        Ok(Self {
            grid1,
            grid2,
            points,
            base,
        })
    }

    pub fn basepoint(&self) -> &Point {
        &self.points[self.base.0][self.base.1]
    }

    /// The line `s₁ ↦ α(s₁, 0)`.
    pub fn first_line(&self) -> SampledCurve {
        SampledCurve {
            grid: self.grid1.clone(),
            points: self.points.iter().map(|row| row[self.base.1].clone()).collect(),
            order: 1,
            base_index: self.base.0,
        }
    }

    /// The line `s₂ ↦ α(s₁_i, s₂)`, based at `s₂ = 0`.
    pub fn second_line(&self, i: usize) -> SampledCurve {
        SampledCurve {
            grid: self.grid2.clone(),
            points: self.points[i].clone(),
            order: 1,
            base_index: self.base.1,
        }
    }

    fn validate(&self, model: &dyn Manifold) -> Result<()> {
        if !self.grid1.is_uniform() || !self.grid2.is_uniform() {
            return Err(Error::InvalidGrid("cube grids must be uniform".into()));
        }
        self.first_line().validate(model)?;
        for i in 0..self.points.len() {
            self.second_line(i).validate(model)?;
        }
        Ok(())
    }
}

impl CubeLinearization {
    pub fn new(v1: TangentCurve, grid2: Grid, v2: Vec<Vec<DVector<f64>>>, base2: usize) -> Result<Self> {
        let m = v1.frame0.base.coords.len();
        if v2.len() != v1.grid.len() || v2.iter().any(|row| row.len() != grid2.len()) {
            return Err(Error::InvalidInput(format!(
                "v2 must be {}x{}",
                v1.grid.len(),
                grid2.len()
            )));
        }
        if v2.iter().flatten().any(|c| c.len() != m || c.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput(format!("v2 entries must be finite {m}-tuples")));
        }
        if base2 >= grid2.len() {
            return Err(Error::InvalidInput("base index out of range".into()));
        }
        Ok(Self { v1, grid2, v2, base2 })
    }
}

pub fn p2_forward(
    model: &dyn Manifold,
    alpha: &CubeSample,
    frame0: &Frame,
    cfg: &TransportConfig,
) -> Result<CubeLinearization> {
    alpha.validate(model)?;
    let (report, field) = p_forward_with_field(model, &alpha.first_line(), frame0, cfg)?;
    let v2 = par_map(alpha.points.len(), |i| {
        let line = alpha.second_line(i);
        let vels = curve_velocities(model, &line)?;
        let frames = transport_frame_with(model, &line, &vels, &field.frames[i], cfg)?;
        frames
            .frames
            .iter()
            .zip(&vels)
            .map(|(f, r)| f.coefficients(&model.push_tangent(r, f.base.chart)?.components))
            .collect::<Result<Vec<_>>>()
    })?;
    CubeLinearization::new(report.tangent_curve, alpha.grid2.clone(), v2, alpha.base.1)
}

pub fn p2_inverse(model: &dyn Manifold, lin: &CubeLinearization, cfg: &TransportConfig) -> Result<CubeSample> {
    let first = p_inverse_with_frames(model, &lin.v1, cfg)?;
    let points = par_map(lin.v2.len(), |i| {
        let derivs = node_derivatives(&lin.v2[i], lin.grid2.nodes())?;
        let (points, _, _) = crate::linearize::integrate_inverse(
            model,
            &lin.grid2,
            lin.base2,
            &lin.v2[i],
            &derivs,
            &first.frames[i],
            cfg,
        )?;
        Ok(points)
    })?;
    CubeSample::new(
        lin.v1.grid.clone(),
        lin.grid2.clone(),
        points,
        (lin.v1.base_index, lin.base2),
    )
}

/// Largest pointwise distance between two cubes on the same grids.
pub fn cube_distance(model: &dyn Manifold, a: &CubeSample, b: &CubeSample) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (ra, rb) in a.points.iter().zip(&b.points) {
        for (p, q) in ra.iter().zip(rb) {
            worst = worst.max(model.point_distance(p, q)?.0);
        }
    }
    Ok(worst)
}

/// Largest component difference between two cube linearizations.
pub fn linearization_distance(a: &CubeLinearization, b: &CubeLinearization) -> f64 {
    let d1 = a
        .v1
        .components
        .iter()
        .zip(&b.v1.components)
        .map(|(x, y)| (x - y).amax())
        .fold(0.0, f64::max);
    let d2 = a
        .v2
        .iter()
        .flatten()
        .zip(b.v2.iter().flatten())
        .map(|(x, y)| (x - y).amax())
        .fold(0.0, f64::max);
    d1.max(d2)
}
