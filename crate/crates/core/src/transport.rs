//! Parallel transport of frames and vectors along sampled curves.
//!
//! The frame equation `de_i^l/dt = −e_i^j Γ^l_{kj}(γ) r^k` is integrated
//! interval by interval with RK4. Between nodes the curve is the cubic Hermite
//! interpolant of its nodal coordinates and finite-difference velocities.
//! Charts only change at nodes: when the current node sits outside the
//! current chart's trusted region, the whole state moves to the chart whose
//! center is nearest.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{ChartId, Domain, Frame, Manifold, Point, Tangent};
use crate::numerics::{derivative_stencil, hermite, hermite_derivative, rk4_step, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportConfig {
    /// RK4 substeps per grid interval.
    pub substeps: usize,
    /// Rescale frame columns to their initial `g`-norms after every node.
    pub renormalize: bool,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            substeps: 2,
            renormalize: false,
        }
    }
}

/// A curve given by its values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub grid: Grid,
    pub points: Vec<Point>,
    /// Declared regularity `k ≥ 1`.
    pub order: usize,
    /// Node holding the basepoint `p`.
    pub base_index: usize,
}

impl SampledCurve {
    pub fn new(grid: Grid, points: Vec<Point>, order: usize, base_index: usize) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "samples: {} points for {} grid nodes",
                points.len(),
                grid.len()
            )));
        }
        if base_index >= points.len() {
            return Err(Error::InvalidInput(format!(
                "base_index {base_index} out of range"
            )));
        }
        if order == 0 {
            return Err(Error::InvalidInput("order must be at least 1".into()));
        }
        Ok(Self {
            grid,
            points,
            order,
            base_index,
        })
    }

    pub fn base(&self) -> &Point {
        &self.points[self.base_index]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every `stride`-th sample; the basepoint node must survive.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.base_index.is_multiple_of(stride) {
            return Err(Error::InvalidGrid(format!(
                "stride {stride} drops the basepoint node {}",
                self.base_index
            )));
        }
        Ok(Self {
            grid: self.grid.subsample(stride)?,
            points: self.points.iter().step_by(stride).cloned().collect(),
            order: self.order,
            base_index: self.base_index / stride,
        })
    }

    /// Checks points against their charts, that neighbours share a chart, and
    /// that consecutive samples are closer than the injectivity floor.
    pub fn validate(&self, model: &dyn Manifold) -> Result<()> {
        for (j, p) in self.points.iter().enumerate() {
            model
                .check_point(p)
                .map_err(|e| Error::InvalidInput(format!("samples[{j}]: {e}")))?;
        }
        for j in 0..self.points.len() - 1 {
            let (a, b) = (&self.points[j], &self.points[j + 1]);
            if model.transition(b, a.chart).is_err() && model.transition(a, b.chart).is_err() {
                return Err(Error::InvalidInput(format!(
                    "samples[{j}] and samples[{}] share no chart",
                    j + 1
                )));
            }
            if let Some(oracle) = model.oracle() {
                let d = oracle.dist(a, b);
                if !(d < model.r0(a).max(model.r0(b))) {
                    return Err(Error::InvalidInput(format!(
                        "samples[{j}] and samples[{}] are {d:.3} apart, beyond the injectivity floor",
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// The same curve traversed backwards from `base_index` to node 0, with
    /// time `τ = −t`.
    pub(crate) fn backward_half(&self) -> (Vec<f64>, Vec<Point>) {
        let t = self.grid.nodes();
        let times = (0..=self.base_index).rev().map(|i| -t[i]).collect();
        let points = self.points[..=self.base_index].iter().rev().cloned().collect();
        (times, points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwitchEvent {
    pub node: usize,
    pub from: ChartId,
    pub to: ChartId,
}

/// Chart to continue in at a node: the current one while the node sits
/// inside its trusted region, else the chart with the nearest center.
pub(crate) fn continue_chart(
    model: &dyn Manifold,
    current: ChartId,
    p: &Point,
    node: usize,
) -> Result<ChartId> {
    if let Ok(q) = model.transition(p, current) {
        if model.domain_test(current, &q.coords) == Domain::Inside {
            return Ok(current);
        }
    }
    model
        .best_chart(p)
        .map(|q| q.chart)
        .ok_or(Error::ChartContinuationFailure { node })
}

/// Chart in which the whole stencil window around node `j` can be written.
fn stencil_chart(model: &dyn Manifold, points: &[Point], j: usize, start: usize) -> Result<ChartId> {
    window_chart(model, &points[start..start + 5], &points[j], j)
}

/// A chart holding every point of `window`: the chart of `centre` when it is
/// trusted there, else the continuation chart.
pub(crate) fn window_chart(model: &dyn Manifold, window: &[Point], centre: &Point, node: usize) -> Result<ChartId> {
    let fits = |chart: ChartId| window.iter().all(|p| model.transition(p, chart).is_ok());
    let own = centre.chart;
    if model.domain_test(own, &centre.coords) == Domain::Inside && fits(own) {
        return Ok(own);
    }
    let best = continue_chart(model, own, centre, node)?;
    if fits(best) {
        Ok(best)
    } else {
        Err(Error::ChartContinuationFailure { node })
    }
}

fn require_stencil(curve: &SampledCurve) -> Result<()> {
    if curve.len() < 5 {
        return Err(Error::GridTooCoarse {
            nodes: curve.len(),
            required: 5,
        });
    }
    Ok(())
}

/// Coordinates of the stencil window for node `j` in `chart`, and the
/// fourth-order derivative of the coordinates at `j` (the velocity).
fn stencil_velocity(
    model: &dyn Manifold,
    curve: &SampledCurve,
    j: usize,
    chart: ChartId,
    start: usize,
    weights: &[f64; 5],
) -> Result<(Point, DVector<f64>)> {
    // Differences against the centre node keep constant curves exact.
    let base = model.transition(&curve.points[j], chart)?;
    let mut vel = DVector::zeros(model.dim());
    for (k, w) in weights.iter().enumerate() {
        let q = model.transition(&curve.points[start + k], chart)?;
        vel.axpy(*w, &(&q.coords - &base.coords), 1.0);
    }
    Ok((base, vel))
}

/// Velocities `γ̇(t_j)` from fourth-order finite differences, each based at
/// its curve point in that point's chart.
pub fn curve_velocities(model: &dyn Manifold, curve: &SampledCurve) -> Result<Vec<Tangent>> {
    require_stencil(curve)?;
    let nodes = curve.grid.nodes();
    (0..curve.len())
        .map(|j| {
            let (start, w) = derivative_stencil(nodes, j);
            let chart = stencil_chart(model, &curve.points, j, start)?;
            let (base, vel) = stencil_velocity(model, curve, j, chart, start, &w)?;
            model.push_tangent(&Tangent::new(base, vel), curve.points[j].chart)
        })
        .collect()
}

/// Covariant derivative `(∇_γ̇ X)^l = dX^l/dt + Γ^l_{kj} r^k X^j` of a field
/// given at every node.
pub fn covariant_derivative(
    model: &dyn Manifold,
    curve: &SampledCurve,
    field: &[Tangent],
) -> Result<Vec<Tangent>> {
    require_stencil(curve)?;
    if !curve.grid.is_uniform() {
        return Err(Error::InvalidGrid(
            "covariant differentiation needs a uniform grid".into(),
        ));
    }
    if field.len() != curve.len() {
        return Err(Error::InvalidInput(format!(
            "field has {} vectors for {} nodes",
            field.len(),
            curve.len()
        )));
    }
    let nodes = curve.grid.nodes();
    (0..curve.len())
        .map(|j| {
            let (start, w) = derivative_stencil(nodes, j);
            let chart = stencil_chart(model, &curve.points, j, start)?;
            let (base, vel) = stencil_velocity(model, curve, j, chart, start, &w)?;
            let x = model.push_tangent(&field[j], chart)?;
            let mut dx = DVector::zeros(model.dim());
            for (k, wk) in w.iter().enumerate() {
                let y = model.push_tangent(&field[start + k], chart)?;
                dx.axpy(*wk, &(&y.components - &x.components), 1.0);
            }
            let gamma = model.christoffel(chart, &base.coords);
            let out = dx + gamma.contract(&vel, &x.components);
            model.push_tangent(&Tangent::new(base, out), curve.points[j].chart)
        })
        .collect()
}

/// One integration interval in its integration chart, kept for dense output.
#[derive(Debug, Clone)]
struct Segment {
    chart: ChartId,
    /// Integration ran in `τ = −t` (backward half of a two-sided curve).
    reversed: bool,
    tau: (f64, f64),
    x: (DVector<f64>, DVector<f64>),
    r: (DVector<f64>, DVector<f64>),
    e: (DVector<f64>, DVector<f64>),
    de: (DVector<f64>, DVector<f64>),
}

/// A parallel frame along a sampled curve.
#[derive(Debug, Clone)]
pub struct FrameField {
    /// One frame per node, based at the curve point in that point's chart.
    pub frames: Vec<Frame>,
    pub switch_log: Vec<SwitchEvent>,
    times: Vec<f64>,
    /// `segments[j]` covers `[t_j, t_{j+1}]`.
    segments: Vec<Segment>,
}

fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn unflatten(v: &DVector<f64>, m: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(m, m, v.as_slice())
}

/// Right-hand side of the frame equation for all columns at once.
pub(crate) fn frame_rhs(
    model: &dyn Manifold,
    chart: ChartId,
    x: &DVector<f64>,
    r: &DVector<f64>,
    e: &DVector<f64>,
) -> DVector<f64> {
    let m = model.dim();
    let gamma = model.christoffel(chart, x);
    let mut out = DVector::zeros(m * m);
    for i in 0..m {
        let col = e.rows(i * m, m).into_owned();
        let d = gamma.contract(r, &col);
        out.rows_mut(i * m, m).copy_from(&(-d));
    }
    out
}

pub(crate) fn renormalize_columns(
    model: &dyn Manifold,
    base: &Point,
    e: &mut DMatrix<f64>,
    target: &[f64],
) {
    for (i, norm) in target.iter().enumerate() {
        let col = e.column(i).into_owned();
        let n = model.inner(base, &col, &col).sqrt();
        if n > 0.0 {
            e.column_mut(i).scale_mut(norm / n);
        }
    }
}

struct March {
    frames: Vec<Frame>,
    segments: Vec<Segment>,
    switches: Vec<SwitchEvent>,
}

/// Marches a frame along points with known velocities (times increasing).
/// `nodes` maps local indices back to curve nodes for logs and errors.
#[allow(clippy::too_many_arguments)]
fn march(
    model: &dyn Manifold,
    times: &[f64],
    points: &[Point],
    vels: &[Tangent],
    f0: &Frame,
    cfg: &TransportConfig,
    nodes: &dyn Fn(usize) -> usize,
    reversed: bool,
) -> Result<March> {
    let m = model.dim();
    let mut chart = points[0].chart;
    let start = model.push_frame(f0, chart)?;
    let mut e = start.columns.clone();
    let target_norms: Vec<f64> = (0..m)
        .map(|i| {
            let c = e.column(i).into_owned();
            model.inner(&start.base, &c, &c).sqrt()
        })
        .collect();
    let mut frames = vec![Frame {
        base: start.base,
        columns: e.clone(),
    }];
    let mut segments = Vec::with_capacity(times.len().saturating_sub(1));
    let mut switches = Vec::new();

    for j in 0..times.len() - 1 {
        let next_chart = continue_chart(model, chart, &points[j], nodes(j))?;
        if next_chart != chart {
            let f = model.push_frame(
                &Frame {
                    base: model.transition(&points[j], chart)?,
                    columns: e,
                },
                next_chart,
            )?;
            e = f.columns;
            switches.push(SwitchEvent {
                node: nodes(j),
                from: chart,
                to: next_chart,
            });
            chart = next_chart;
        }
        let fail = |_| Error::ChartContinuationFailure { node: nodes(j) };
        let x0 = model.transition(&points[j], chart).map_err(fail)?.coords;
        let x1 = model.transition(&points[j + 1], chart).map_err(fail)?.coords;
        let r0 = model.push_tangent(&vels[j], chart).map_err(fail)?.components;
        let r1 = model.push_tangent(&vels[j + 1], chart).map_err(fail)?.components;
        let (t0, t1) = (times[j], times[j + 1]);

        let mut rhs = |t: f64, y: &DVector<f64>| {
            let x = hermite(t0, t1, &x0, &x1, &r0, &r1, t);
            let r = hermite_derivative(t0, t1, &x0, &x1, &r0, &r1, t);
            frame_rhs(model, chart, &x, &r, y)
        };
        let y0 = flatten(&e);
        let de0 = rhs(t0, &y0);
        let y1 = rk4_step(&mut rhs, t0, &y0, t1 - t0, cfg.substeps);
        if y1.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                t: if reversed { -t1 } else { t1 },
            });
        }
        let mut e1 = unflatten(&y1, m);
        let base1 = Point::new(chart, x1.clone());
        if cfg.renormalize {
            renormalize_columns(model, &base1, &mut e1, &target_norms);
        }
        let y1 = flatten(&e1);
        let de1 = rhs(t1, &y1);
        segments.push(Segment {
            chart,
            reversed,
            tau: (t0, t1),
            x: (x0, x1),
            r: (r0, r1),
            e: (y0, y1),
            de: (de0, de1),
        });
        frames.push(Frame {
            base: base1,
            columns: e1.clone(),
        });
        e = e1;
    }
    Ok(March {
        frames,
        segments,
        switches,
    })
}

impl FrameField {
    fn segment(&self, t: f64) -> &Segment {
        let n = self.times.len();
        let j = match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        &self.segments[j]
    }

    /// Dense-output frame at an arbitrary time in the grid span.
    pub fn frame_at(&self, model: &dyn Manifold, t: f64) -> Frame {
        let s = self.segment(t);
        let tau = if s.reversed { -t } else { t };
        let x = hermite(s.tau.0, s.tau.1, &s.x.0, &s.x.1, &s.r.0, &s.r.1, tau);
        let e = hermite(s.tau.0, s.tau.1, &s.e.0, &s.e.1, &s.de.0, &s.de.1, tau);
        Frame {
            base: Point::new(s.chart, x),
            columns: unflatten(&e, model.dim()),
        }
    }

    /// Dense-output curve point at an arbitrary time in the grid span.
    pub fn point_at(&self, t: f64) -> Point {
        let s = self.segment(t);
        let tau = if s.reversed { -t } else { t };
        Point::new(
            s.chart,
            hermite(s.tau.0, s.tau.1, &s.x.0, &s.x.1, &s.r.0, &s.r.1, tau),
        )
    }
}

/// Parallel frame along `curve` starting from `f0` at the basepoint node.
/// Curves with an interior basepoint are transported in both directions.
pub fn transport_frame(
    model: &dyn Manifold,
    curve: &SampledCurve,
    f0: &Frame,
    cfg: &TransportConfig,
) -> Result<FrameField> {
    let vels = curve_velocities(model, curve)?;
    transport_frame_with(model, curve, &vels, f0, cfg)
}

pub(crate) fn transport_frame_with(
    model: &dyn Manifold,
    curve: &SampledCurve,
    vels: &[Tangent],
    f0: &Frame,
    cfg: &TransportConfig,
) -> Result<FrameField> {
    let b = curve.base_index;
    let anchored = model
        .transition(&f0.base, curve.base().chart)
        .map(|q| (q.coords - &curve.base().coords).norm() < 1e-9)
        .unwrap_or(false);
    if !anchored {
        return Err(Error::InvalidInput(
            "initial frame is not based at the curve's basepoint".into(),
        ));
    }
    let n = curve.len();
    let t = curve.grid.nodes();
    let mut frames: Vec<Option<Frame>> = vec![None; n];
    let mut segments: Vec<Option<Segment>> = vec![None; n - 1];
    let mut switch_log = Vec::new();

    if b + 1 < n {
        let fwd = march(
            model,
            &t[b..],
            &curve.points[b..],
            &vels[b..],
            f0,
            cfg,
            &|i| b + i,
            false,
        )?;
        for (i, f) in fwd.frames.into_iter().enumerate() {
            frames[b + i] = Some(f);
        }
        for (i, s) in fwd.segments.into_iter().enumerate() {
            segments[b + i] = Some(s);
        }
        switch_log.extend(fwd.switches);
    }
    if b > 0 {
        let (times, points) = curve.backward_half();
        let back_vels: Vec<Tangent> = vels[..=b]
            .iter()
            .rev()
            .map(|v| Tangent::new(v.base.clone(), -&v.components))
            .collect();
        let bwd = march(
            model,
            &times,
            &points,
            &back_vels,
            f0,
            cfg,
            &|i| b - i,
            true,
        )?;
        for (i, f) in bwd.frames.into_iter().enumerate() {
            frames[b - i] = Some(f);
        }
        for (i, s) in bwd.segments.into_iter().enumerate() {
            segments[b - i - 1] = Some(s);
        }
        switch_log.extend(bwd.switches);
    }
    if n == 1 {
        frames[0] = Some(model.push_frame(f0, curve.points[0].chart)?);
    }

    let frames = frames
        .into_iter()
        .zip(&curve.points)
        .map(|(f, p)| model.push_frame(&f.expect("every node is visited"), p.chart))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameField {
        frames,
        switch_log,
        times: t.to_vec(),
        segments: segments.into_iter().map(|s| s.expect("every interval is integrated")).collect(),
    })
}

/// Parallel transport `P_γ^{from→to}` of `v`, which must be based at
/// `γ(from)`. Off-grid times use the Hermite dense output.
pub fn transport_vector(
    model: &dyn Manifold,
    curve: &SampledCurve,
    v: &Tangent,
    from_t: f64,
    to_t: f64,
    cfg: &TransportConfig,
) -> Result<Tangent> {
    let (lo, hi) = (curve.grid.start(), curve.grid.end());
    for t in [from_t, to_t] {
        if !(t >= lo && t <= hi) {
            return Err(Error::InvalidInput(format!(
                "time {t} outside the curve's span [{lo}, {hi}]"
            )));
        }
    }
    if from_t == to_t {
        return Ok(v.clone());
    }
    let field = transport_frame(model, curve, &model.default_frame(curve.base()), cfg)?;
    let ea = field.frame_at(model, from_t);
    let va = model.push_tangent(v, ea.base.chart)?;
    if (va.base.coords - &ea.base.coords).norm() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "vector is not based at the curve point at t = {from_t}"
        )));
    }
    let c = ea.coefficients(&va.components)?;
    let eb = field.frame_at(model, to_t);
    Ok(Tangent::new(eb.base, eb.columns * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{self, sphere as sphere_chart};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn line_curve(n: usize) -> SampledCurve {
        let grid = Grid::uniform(0.0, 1.0, n).unwrap();
        let points = grid
            .nodes()
            .iter()
            .map(|&t| Point::from_slice(ChartId(0), &[0.2 + t, -0.1 + 0.5 * t * t]))
            .collect();
        SampledCurve::new(grid, points, 2, 0).unwrap()
    }

    #[test]
    fn euclidean_frames_stay_identity() {
        let model = geometry::model("euclidean2").unwrap();
        let curve = line_curve(40);
        let f0 = Frame::coordinate(curve.base().clone());
        let field = transport_frame(model.as_ref(), &curve, &f0, &TransportConfig::default()).unwrap();
        for f in &field.frames {
            assert!((&f.columns - DMatrix::identity(2, 2)).abs().max() < 1e-14);
        }
        assert!(field.switch_log.is_empty());
    }

    #[test]
    fn euclidean_covariant_derivative_is_plain_derivative() {
        let model = geometry::model("euclidean2").unwrap();
        let curve = line_curve(20);
        let field: Vec<Tangent> = curve
            .points
            .iter()
            .zip(curve.grid.nodes())
            .map(|(p, &t)| Tangent::new(p.clone(), DVector::from_column_slice(&[t, 0.0])))
            .collect();
        let d = covariant_derivative(model.as_ref(), &curve, &field).unwrap();
        for v in d {
            assert!((v.components - DVector::from_column_slice(&[1.0, 0.0])).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_transport_returns_input() {
        let model = geometry::model("sphere2").unwrap();
        let curve = line_curve(20);
        let v = Tangent::new(curve.points[3].clone(), DVector::from_column_slice(&[0.3, 0.1]));
        let t = curve.grid.nodes()[3];
        let out = transport_vector(model.as_ref(), &curve, &v, t, t, &TransportConfig::default()).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn mismatched_initial_frame_is_rejected() {
        let model = geometry::model("euclidean2").unwrap();
        let curve = line_curve(20);
        let f0 = Frame::coordinate(Point::from_slice(ChartId(0), &[5.0, 5.0]));
        let err = transport_frame(model.as_ref(), &curve, &f0, &TransportConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn torus_seam_crossing_logs_switch() {
        let model = geometry::model("torus2").unwrap();
        let grid = Grid::uniform(0.0, 1.0, 200).unwrap();
        // once around the x-cycle, across every seam
        let points = grid
            .nodes()
            .iter()
            .map(|&t| {
                let p = Point::from_slice(ChartId(0), &[PI + 0.3 + 2.0 * PI * t, 0.3]);
                model.best_chart(&p).unwrap()
            })
            .collect();
        let curve = SampledCurve::new(grid, points, 2, 0).unwrap();
        curve.validate(model.as_ref()).unwrap();
        let f0 = Frame::coordinate(curve.base().clone());
        let field = transport_frame(model.as_ref(), &curve, &f0, &TransportConfig::default()).unwrap();
        assert!(!field.switch_log.is_empty());
        for f in &field.frames {
            assert!((&f.columns - DMatrix::identity(2, 2)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn octant_loop_holonomy_is_quarter_turn() {
        use nalgebra::Vector3;
        let model = geometry::model("sphere2").unwrap();
        let corners = [Vector3::z(), Vector3::x(), Vector3::y(), Vector3::z()];
        // three quarter great circles, each sampled on 200 intervals
        let per_edge = 200;
        let mut pts = Vec::new();
        for e in 0..3 {
            let (a, b) = (corners[e], corners[e + 1]);
            for k in 0..per_edge {
                let s = FRAC_PI_2 * k as f64 / per_edge as f64;
                pts.push(a * s.cos() + b * s.sin());
            }
        }
        pts.push(corners[3]);
        let points: Vec<Point> = pts.iter().map(sphere_chart::from_embedded).collect();
        let grid = Grid::uniform(0.0, 3.0 * FRAC_PI_2, 3 * per_edge).unwrap();
        let curve = SampledCurve::new(grid, points, 1, 0).unwrap();
        let p = curve.base().clone();
        let start = Vector3::x();
        let v = sphere_chart::tangent_from_embedded(&p, &start);
        let out = transport_vector(
            model.as_ref(),
            &curve,
            &v,
            0.0,
            3.0 * FRAC_PI_2,
            &TransportConfig::default(),
        )
        .unwrap();
        let got = sphere_chart::embed_tangent(&out);
        // The curve is only C⁰ at the corners, so accuracy is limited there.
        let angle = start.cross(&got).z.atan2(start.dot(&got));
        assert!((angle.abs() - FRAC_PI_2).abs() < 1e-3, "angle {angle}");
        assert!((got.norm() - 1.0).abs() < 1e-6);
    }
}
