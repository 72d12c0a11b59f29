//! The linearization `P(γ)(t) = P^{t→0}_γ γ̇(t)` and its inverse.
//!
//! `P` transports one frame along the curve and reads off the components of
//! `γ̇` in it. `P⁻¹` integrates the coupled position/frame system
//! `dγ^k/dt = v^i e_i^k`, `de_i^l/dt = −e_i^j Γ^l_{kj} r^k` from the
//! basepoint, in both directions when the basepoint is interior.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{ChartId, DistanceKind, Frame, Manifold, Point};
use crate::numerics::{hermite, node_derivatives, rk4_step, Grid};
use crate::transport::{
    continue_chart, curve_velocities, frame_rhs, FrameField, renormalize_columns, transport_frame_with,
    SampledCurve, SwitchEvent, TransportConfig,
};

/// Regularity attached to curves synthesized from tangent curves that carry
/// no declared order.
pub const SYNTHESIZED_ORDER: usize = 4;

/// A curve in `T_pM`, given by components in `frame0` at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCurve {
    pub base: Point,
    pub frame0: Frame,
    pub grid: Grid,
    pub base_index: usize,
    pub components: Vec<DVector<f64>>,
    /// Regularity `k` of the corresponding curve (`v` is `C^{k−1}`).
    pub order: usize,
}

impl TangentCurve {
    pub fn new(
        frame0: Frame,
        grid: Grid,
        base_index: usize,
        components: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let m = frame0.base.coords.len();
        if components.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "components: {} tuples for {} grid nodes",
                components.len(),
                grid.len()
            )));
        }
        if base_index >= grid.len() {
            return Err(Error::InvalidInput(format!(
                "base_index {base_index} out of range"
            )));
        }
        for (j, c) in components.iter().enumerate() {
            if c.len() != m {
                return Err(Error::InvalidInput(format!(
                    "components[{j}] has length {}, expected {m}",
                    c.len()
                )));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("components[{j}] is not finite")));
            }
        }
        Ok(Self {
            base: frame0.base.clone(),
            frame0,
            grid,
            base_index,
            components,
            order: SYNTHESIZED_ORDER,
        })
    }

    /// `v(t) = c(t)` for a closure of time.
    pub fn from_fn(
        frame0: Frame,
        grid: Grid,
        base_index: usize,
        f: impl Fn(f64) -> DVector<f64>,
    ) -> Result<Self> {
        let components = grid.nodes().iter().map(|&t| f(t)).collect();
        Self::new(frame0, grid, base_index, components)
    }

    /// Same abstract curve with `frame0` replaced by `frame0 · A`.
    pub fn in_frame(&self, model: &dyn Manifold, frame: &Frame) -> Result<Self> {
        let frame = model.push_frame(frame, self.base.chart)?;
        let change = frame.columns.clone().lu().solve(&self.frame0.columns).ok_or(Error::SingularFrame)?;
        Ok(Self {
            base: frame.base.clone(),
            frame0: frame,
            grid: self.grid.clone(),
            base_index: self.base_index,
            components: self.components.iter().map(|c| &change * c).collect(),
            order: self.order,
        })
    }

    /// Same abstract curve with base and frame expressed in `chart`.
    pub fn in_chart(&self, model: &dyn Manifold, chart: ChartId) -> Result<Self> {
        let frame0 = model.push_frame(&self.frame0, chart)?;
        Ok(Self {
            base: frame0.base.clone(),
            frame0,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone)]
pub struct LinearizationReport {
    pub tangent_curve: TangentCurve,
    pub switch_log: Vec<SwitchEvent>,
    /// `max_j |‖v(t_j)‖ − ‖γ̇(t_j)‖_g|`, with `‖v‖` from the Gram matrix of
    /// `frame0`.
    pub norm_drift: f64,
    /// Grid spacing, or the largest interval on a non-uniform grid.
    pub spacing: f64,
}

fn max_spacing(grid: &Grid) -> f64 {
    grid.nodes()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}

fn check_base_frame(model: &dyn Manifold, curve: &SampledCurve, frame0: &Frame) -> Result<Frame> {
    let f = model
        .push_frame(frame0, curve.base().chart)
        .map_err(|_| Error::InvalidInput("frame0 is not based at the curve's basepoint".into()))?;
    if (&f.base.coords - &curve.base().coords).norm() > 1e-9 {
        return Err(Error::InvalidInput(
            "frame0 is not based at the curve's basepoint".into(),
        ));
    }
    Ok(f)
}

/// `P(γ)`: components of `P^{t_j→0} γ̇(t_j)` in `frame0`.
pub fn p_forward(
    model: &dyn Manifold,
    curve: &SampledCurve,
    frame0: &Frame,
    cfg: &TransportConfig,
) -> Result<LinearizationReport> {
    Ok(p_forward_with_field(model, curve, frame0, cfg)?.0)
}

/// [`p_forward`] together with the parallel frame field it transported.
pub fn p_forward_with_field(
    model: &dyn Manifold,
    curve: &SampledCurve,
    frame0: &Frame,
    cfg: &TransportConfig,
) -> Result<(LinearizationReport, FrameField)> {
    let frame0 = check_base_frame(model, curve, frame0)?;
    let vels = curve_velocities(model, curve)?;
    let field = transport_frame_with(model, curve, &vels, &frame0, cfg)?;
    let gram = model.gram(&frame0);
    let mut components = Vec::with_capacity(curve.len());
    let mut drift: f64 = 0.0;
    for (f, r) in field.frames.iter().zip(&vels) {
        let r = model.push_tangent(r, f.base.chart)?;
        let v = f.coefficients(&r.components)?;
        let nv = (v.transpose() * &gram * &v)[(0, 0)].max(0.0).sqrt();
        drift = drift.max((nv - model.norm(&r)).abs());
        components.push(v);
    }
    let mut tangent_curve =
        TangentCurve::new(frame0, curve.grid.clone(), curve.base_index, components)?;
    tangent_curve.order = curve.order;
    let report = LinearizationReport {
        tangent_curve,
        switch_log: field.switch_log.clone(),
        norm_drift: drift,
        spacing: max_spacing(&curve.grid),
    };
    Ok((report, field))
}

/// Output of the inverse integration, with the parallel frame it carried.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub curve: SampledCurve,
    pub frames: Vec<Frame>,
    pub switch_log: Vec<SwitchEvent>,
}

/// `P⁻¹(v)`.
pub fn p_inverse(model: &dyn Manifold, v: &TangentCurve, cfg: &TransportConfig) -> Result<SampledCurve> {
    Ok(p_inverse_with_frames(model, v, cfg)?.curve)
}

pub fn p_inverse_with_frames(
    model: &dyn Manifold,
    v: &TangentCurve,
    cfg: &TransportConfig,
) -> Result<Synthesis> {
    model.check_point(&v.base)?;
    let derivs = node_derivatives(&v.components, v.grid.nodes())?;
    let (points, frames, switch_log) =
        integrate_inverse(model, &v.grid, v.base_index, &v.components, &derivs, &v.frame0, cfg)?;
    Ok(Synthesis {
        curve: SampledCurve {
            grid: v.grid.clone(),
            points,
            order: v.order,
            base_index: v.base_index,
        },
        frames,
        switch_log,
    })
}

/// Integrates the coupled system from node `base` with frame `frame0`; `v`
/// between nodes is the cubic Hermite interpolant of the nodal values and
/// derivatives.
pub(crate) fn integrate_inverse(
    model: &dyn Manifold,
    grid: &Grid,
    base: usize,
    values: &[DVector<f64>],
    derivs: &[DVector<f64>],
    frame0: &Frame,
    cfg: &TransportConfig,
) -> Result<(Vec<Point>, Vec<Frame>, Vec<SwitchEvent>)> {
    let n = grid.len();
    let mut points: Vec<Option<Point>> = vec![None; n];
    let mut frames: Vec<Option<Frame>> = vec![None; n];
    let mut switches = Vec::new();
    let start = model.settle(&frame0.base, frame0.base.chart);
    let start = model.push_frame(frame0, start.chart)?;
    points[base] = Some(frame0.base.clone());
    frames[base] = Some(frame0.clone());
    for dir in [1isize, -1] {
        let order: Vec<usize> = if dir > 0 {
            (base..n).collect()
        } else {
            (0..=base).rev().collect()
        };
        if order.len() < 2 {
            continue;
        }
        let half = march_inverse(model, grid, &order, dir as f64, values, derivs, &start, cfg)?;
        for (k, (p, f)) in half.0.into_iter().zip(half.1).enumerate().skip(1) {
            points[order[k]] = Some(p);
            frames[order[k]] = Some(f);
        }
        switches.extend(half.2);
    }
    Ok((
        points.into_iter().map(|p| p.expect("every node is integrated")).collect(),
        frames.into_iter().map(|f| f.expect("every node is integrated")).collect(),
        switches,
    ))
}

#[allow(clippy::too_many_arguments)]
fn march_inverse(
    model: &dyn Manifold,
    grid: &Grid,
    order: &[usize],
    sign: f64,
    values: &[DVector<f64>],
    derivs: &[DVector<f64>],
    start: &Frame,
    cfg: &TransportConfig,
) -> Result<(Vec<Point>, Vec<Frame>, Vec<SwitchEvent>)> {
    let m = model.dim();
    let t = grid.nodes();
    let mut chart = start.base.chart;
    let mut x = start.base.coords.clone();
    let mut e = start.columns.clone();
    let target_norms: Vec<f64> = (0..m)
        .map(|i| {
            let c = e.column(i).into_owned();
            model.inner(&start.base, &c, &c).sqrt()
        })
        .collect();
    let mut points = vec![start.base.clone()];
    let mut frames = vec![start.clone()];
    let mut switches = Vec::new();

    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        let here = Point::new(chart, x.clone());
        let next = continue_chart(model, chart, &here, a)?;
        if next != chart {
            let f = model.push_frame(&Frame { base: here, columns: e }, next)?;
            x = f.base.coords;
            e = f.columns;
            switches.push(SwitchEvent {
                node: a,
                from: chart,
                to: next,
            });
            chart = next;
        }
        let lo = a.min(b);
        let (t0, t1) = (t[lo], t[lo + 1]);
        let mut rhs = |tau: f64, y: &DVector<f64>| {
            let time = sign * tau;
            let v = hermite(t0, t1, &values[lo], &values[lo + 1], &derivs[lo], &derivs[lo + 1], time) * sign;
            let xs = y.rows(0, m).into_owned();
            let es = y.rows(m, m * m).into_owned();
            let frame = DMatrix::from_column_slice(m, m, es.as_slice());
            let r = frame * v;
            let mut out = DVector::zeros(m + m * m);
            out.rows_mut(m, m * m).copy_from(&frame_rhs(model, chart, &xs, &r, &es));
            out.rows_mut(0, m).copy_from(&r);
            out
        };
        let mut y = DVector::zeros(m + m * m);
        y.rows_mut(0, m).copy_from(&x);
        y.rows_mut(m, m * m).copy_from(&DVector::from_column_slice(e.as_slice()));
        let (tau0, tau1) = (sign * t[a], sign * t[b]);
        let y1 = rk4_step(&mut rhs, tau0, &y, tau1 - tau0, cfg.substeps);
        if y1.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteState { t: t[b] });
        }
        x = y1.rows(0, m).into_owned();
        e = DMatrix::from_column_slice(m, m, y1.rows(m, m * m).as_slice());
        let p = Point::new(chart, x.clone());
        if model.check_point(&p).is_err() {
            return Err(Error::ChartContinuationFailure { node: b });
        }
        if cfg.renormalize {
            renormalize_columns(model, &p, &mut e, &target_norms);
        }
        points.push(p.clone());
        frames.push(Frame {
            base: p,
            columns: e.clone(),
        });
    }
    Ok((points, frames, switches))
}

#[derive(Debug, Clone)]
pub struct RoundtripReport {
    pub max_error: f64,
    pub distance: DistanceKind,
    pub norm_drift: f64,
    pub switch_log: Vec<SwitchEvent>,
}

/// Largest pointwise distance between two curves on the same grid.
pub fn curve_distance(model: &dyn Manifold, a: &SampledCurve, b: &SampledCurve) -> Result<(f64, DistanceKind)> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput("curves have different lengths".into()));
    }
    let mut worst: f64 = 0.0;
    let mut kind = DistanceKind::Oracle;
    for (p, q) in a.points.iter().zip(&b.points) {
        let (d, k) = model.point_distance(p, q)?;
        worst = worst.max(d);
        kind = k;
    }
    Ok((worst, kind))
}

/// `max_j d(P⁻¹(P(γ))(t_j), γ(t_j))` with the default frame at the basepoint.
pub fn roundtrip_check(
    model: &dyn Manifold,
    curve: &SampledCurve,
    cfg: &TransportConfig,
) -> Result<RoundtripReport> {
    let frame0 = model.default_frame(curve.base());
    let report = p_forward(model, curve, &frame0, cfg)?;
    let back = p_inverse(model, &report.tangent_curve, cfg)?;
    let (max_error, distance) = curve_distance(model, &back, curve)?;
    Ok(RoundtripReport {
        max_error,
        distance,
        norm_drift: report.norm_drift,
        switch_log: report.switch_log,
    })
}

/// Linearizes `curve` in `frame_a`, re-expresses the same tangent curve in
/// `frame_b`, and compares the two reconstructions.
pub fn basis_independence_check(
    model: &dyn Manifold,
    curve: &SampledCurve,
    frame_a: &Frame,
    frame_b: &Frame,
    cfg: &TransportConfig,
) -> Result<f64> {
    let va = p_forward(model, curve, frame_a, cfg)?.tangent_curve;
    check_base_frame(model, curve, frame_b)?;
    let vb = va.in_frame(model, frame_b)?;
    let a = p_inverse(model, &va, cfg)?;
    let b = p_inverse(model, &vb, cfg)?;
    Ok(curve_distance(model, &a, &b)?.0)
}

/// Reconstructs the linearization of `curve` starting once from each chart.
pub fn chart_independence_check(
    model: &dyn Manifold,
    curve: &SampledCurve,
    chart_a: ChartId,
    chart_b: ChartId,
    cfg: &TransportConfig,
) -> Result<f64> {
    let v = p_forward(model, curve, &model.default_frame(curve.base()), cfg)?.tangent_curve;
    let a = p_inverse(model, &v.in_chart(model, chart_a)?, cfg)?;
    let b = p_inverse(model, &v.in_chart(model, chart_b)?, cfg)?;
    Ok(curve_distance(model, &a, &b)?.0)
}

/// Pulls a tangent curve on `[−a, a]` back to `[−1, 1]`: `ṽ(s) = a·v(as)`.
pub fn rescale_to_unit(v: &TangentCurve, a: f64) -> Result<TangentCurve> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidInput(format!("scale must be positive, got {a}")));
    }
    let grid = Grid::from_nodes(v.grid.nodes().iter().map(|t| t / a).collect())?;
    Ok(TangentCurve {
        grid,
        components: v.components.iter().map(|c| c * a).collect(),
        ..v.clone()
    })
}
