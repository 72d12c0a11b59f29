//! Flows that move one point to another, and the bundle charts built from
//! them.
//!
//! The carrier field `Y(p, q)` is the constant field `q′ = Log_p q` in normal
//! coordinates at `p`, cut off smoothly between `r0/2` and `2r0/3`. Its
//! time-one flow `φ_{p,q}` fixes everything outside the cutoff and sends `p`
//! to `q`, so composing curves with it trivializes evaluation bundles.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{ChartId, Frame, Manifold, Point, Tangent};
use crate::linearize::integrate_inverse;
use crate::numerics::{cumulative_hermite, fd_weights, node_derivatives, rk4_step, Grid};
use crate::par::par_map;
use crate::transport::{continue_chart, curve_velocities, window_chart, SampledCurve, TransportConfig};

/// RK4 steps used for a unit-time flow.
pub const FLOW_STEPS: usize = 128;
/// Intervals of the constant-velocity curve used by shooting.
pub const SHOOTING_INTERVALS: usize = 200;
pub const SHOOTING_TOLERANCE: f64 = 1e-9;
pub const SHOOTING_MAX_ITERATIONS: usize = 50;
/// Nodes of the local polynomial used to resample normalized curves.
const INTERPOLATION_NODES: usize = 6;

/// Where `Exp`/`Log` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpSource {
    #[default]
    Oracle,
    /// Integrate geodesics with `P⁻¹` and solve for `Log` by Newton's method.
    Shooting,
}

/// `Exp_p v` by integrating the geodesic equation.
pub fn shooting_exp(model: &dyn Manifold, v: &Tangent) -> Result<Point> {
    let grid = Grid::uniform(0.0, 1.0, SHOOTING_INTERVALS)?;
    let c = vec![v.components.clone(); grid.len()];
    let d = vec![DVector::zeros(model.dim()); grid.len()];
    let frame = Frame::coordinate(v.base.clone());
    let (points, _, _) = integrate_inverse(model, &grid, 0, &c, &d, &frame, &TransportConfig::default())?;
    Ok(points.into_iter().last().expect("grid is nonempty"))
}

/// `Log_p q` by damped Newton iteration on `v ↦ Exp_p v` with a
/// finite-difference Jacobian.
pub fn shooting_log(model: &dyn Manifold, p: &Point, q: &Point) -> Result<Tangent> {
    let m = model.dim();
    let target = model.settle(q, q.chart);
    let residual = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let x = shooting_exp(model, &Tangent::new(p.clone(), v.clone()))?;
        Ok(model.transition(&x, target.chart)?.coords - &target.coords)
    };
    let mut v = match model.transition(&target, p.chart) {
        Ok(t) => t.coords - &p.coords,
        Err(_) => DVector::zeros(m),
    };
    let mut r = residual(&v)?;
    for _ in 0..SHOOTING_MAX_ITERATIONS {
        if r.norm() < SHOOTING_TOLERANCE {
            return Ok(Tangent::new(p.clone(), v));
        }
        let h = 1e-6;
        let mut jac = DMatrix::zeros(m, m);
        for k in 0..m {
            let mut a = v.clone();
            let mut b = v.clone();
            a[k] += h;
            b[k] -= h;
            jac.set_column(k, &((residual(&a)? - residual(&b)?) / (2.0 * h)));
        }
        let step = jac.lu().solve(&r).ok_or(Error::SingularFrame)?;
        let mut damping = 1.0;
        loop {
            let trial = &v - &step * damping;
            if let Ok(rt) = residual(&trial) {
                if rt.norm() < r.norm() {
                    v = trial;
                    r = rt;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-6 {
                return Err(Error::NonFiniteState { t: 1.0 });
            }
        }
    }
    if r.norm() < SHOOTING_TOLERANCE {
        Ok(Tangent::new(p.clone(), v))
    } else {
        Err(Error::InvalidInput(format!(
            "geodesic shooting did not converge (residual {:.2e})",
            r.norm()
        )))
    }
}

fn exp_with(model: &dyn Manifold, source: ExpSource, v: &Tangent) -> Result<Point> {
    match source {
        ExpSource::Oracle => model.exp_oracle(v),
        ExpSource::Shooting => shooting_exp(model, v),
    }
}

fn log_with(model: &dyn Manifold, source: ExpSource, p: &Point, q: &Point) -> Result<Tangent> {
    match source {
        ExpSource::Oracle => model.log_oracle(p, q),
        ExpSource::Shooting => shooting_log(model, p, q),
    }
}

fn dist_with(model: &dyn Manifold, source: ExpSource, p: &Point, q: &Point) -> Result<f64> {
    match source {
        ExpSource::Oracle => model.dist_oracle(p, q),
        ExpSource::Shooting => Ok(model.norm(&shooting_log(model, p, q)?)),
    }
}

/// Smooth step `e^{−1/x} / (e^{−1/x} + e^{−1/(1−x)})`, 0 for `x ≤ 0` and 1 for
/// `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

#[derive(Debug, Clone)]
pub struct CarrierFieldSpec {
    pub p: Point,
    pub q: Point,
    /// `q′ = Log_p q`.
    pub q_log: Tangent,
    pub r_in: f64,
    pub r_out: f64,
    pub source: ExpSource,
}

impl CarrierFieldSpec {
    pub fn new(model: &dyn Manifold, p: &Point, q: &Point, source: ExpSource) -> Result<Self> {
        model.check_point(p)?;
        model.check_point(q)?;
        let r0 = model.r0(p);
        let d = dist_with(model, source, p, q)?;
        if !(d < 0.5 * r0) {
            return Err(Error::OutOfInjectivityRange {
                distance: d,
                radius: 0.5 * r0,
                node: None,
            });
        }
        Ok(Self {
            p: p.clone(),
            q: q.clone(),
            q_log: log_with(model, source, p, q)?,
            r_in: 0.5 * r0,
            r_out: 2.0 * r0 / 3.0,
            source,
        })
    }

    /// Cutoff `ρ₂` at distance `d` from `p`.
    pub fn cutoff(&self, d: f64) -> f64 {
        if d >= self.r_out {
            0.0
        } else if d <= self.r_in {
            1.0
        } else {
            smooth_step((self.r_out - d) / (self.r_out - self.r_in))
        }
    }
}

/// `Y(p, q)(m) = ρ₂(d(p, m)) · d/dt|₀ Exp_p(m′ + t q′)`, in the chart of `m`.
pub fn carrier_field(model: &dyn Manifold, spec: &CarrierFieldSpec, m: &Point) -> Result<Tangent> {
    let d = dist_with(model, spec.source, &spec.p, m)?;
    let rho = spec.cutoff(d);
    if rho == 0.0 {
        return Ok(Tangent::zero(m.clone()));
    }
    let mp = log_with(model, spec.source, &spec.p, m)?;
    let h = 1e-3;
    let at = |t: f64| -> Result<DVector<f64>> {
        let v = Tangent::new(spec.p.clone(), &mp.components + &spec.q_log.components * t);
        let x = exp_with(model, spec.source, &v)?;
        Ok(model.transition(&x, m.chart)?.coords)
    };
    let y1 = (at(-2.0 * h)? - at(2.0 * h)? + (at(h)? - at(-h)?) * 8.0) / (12.0 * h);
    Ok(Tangent::new(m.clone(), y1 * rho))
}

/// Time-`t` flow of the carrier field from `m`, with `FLOW_STEPS` RK4 steps
/// per unit time.
pub fn flow(model: &dyn Manifold, spec: &CarrierFieldSpec, m: &Point, t: f64) -> Result<Point> {
    model.check_point(m)?;
    let steps = ((t.abs() * FLOW_STEPS as f64).ceil() as usize).max(1);
    let h = t / steps as f64;
    let mut chart = m.chart;
    let mut x = m.coords.clone();
    let mut failure = None;
    for k in 0..steps {
        let here = Point::new(chart, x.clone());
        let next = continue_chart(model, chart, &here, k)?;
        if next != chart {
            x = model.transition(&here, next)?.coords;
            chart = next;
        }
        let mut rhs = |_: f64, y: &DVector<f64>| match carrier_field(model, spec, &Point::new(chart, y.clone())) {
            Ok(v) => v.components,
            Err(e) => {
                failure.get_or_insert(e);
                DVector::from_element(y.len(), f64::NAN)
            }
        };
        x = rk4_step(&mut rhs, k as f64 * h, &x, h, 2);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteState { t: (k + 1) as f64 * h });
        }
    }
    Ok(model.settle(&Point::new(chart, x), m.chart))
}

/// `φ_{p,q}(m)`, the time-one flow.
pub fn phi(model: &dyn Manifold, spec: &CarrierFieldSpec, m: &Point) -> Result<Point> {
    flow(model, spec, m, 1.0)
}

/// Carrier specs keyed by chart and the exact coordinate bits of `m`.
type SpecCache = RwLock<HashMap<(ChartId, Vec<u64>), Arc<CarrierFieldSpec>>>;

/// Local trivialization of the evaluation bundle over a neighbourhood of
/// `p`: a curve `γ` through `p` becomes `φ_{p,m} ∘ γ` through `m`.
#[derive(Debug)]
pub struct TrivializationChart {
    pub base: Point,
    pub source: ExpSource,
    specs: SpecCache,
}

impl TrivializationChart {
    pub fn new(model: &dyn Manifold, base: &Point, source: ExpSource) -> Result<Self> {
        model.check_point(base)?;
        Ok(Self {
            base: base.clone(),
            source,
            specs: RwLock::new(HashMap::new()),
        })
    }

    /// Carrier spec for `φ_{p,m}`, memoized by the exact coordinates of `m`.
    /// Construction is deterministic, so racing writers store equal values.
    pub fn spec(&self, model: &dyn Manifold, m: &Point) -> Result<Arc<CarrierFieldSpec>> {
        let key = (m.chart, m.coords.iter().map(|c| c.to_bits()).collect::<Vec<_>>());
        if let Some(s) = self.specs.read().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let s = Arc::new(CarrierFieldSpec::new(model, &self.base, m, self.source)?);
        Ok(self
            .specs
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert(s)
            .clone())
    }

    pub fn cached(&self) -> usize {
        self.specs.read().expect("cache lock").len()
    }
}

fn map_curve(
    curve: &SampledCurve,
    f: impl Fn(&Point) -> Result<Point> + Sync,
) -> Result<SampledCurve> {
    let points = par_map(curve.len(), |j| f(&curve.points[j]))?;
    Ok(SampledCurve {
        points,
        ..curve.clone()
    })
}

/// `F(m, γ) = φ_{p,m} ∘ γ`.
pub fn trivialize(
    model: &dyn Manifold,
    chart: &TrivializationChart,
    m: &Point,
    gamma: &SampledCurve,
) -> Result<SampledCurve> {
    let (d, _) = model.point_distance(gamma.base(), &chart.base)?;
    if d > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "curve is based {d:.2e} away from the chart's base point"
        )));
    }
    let spec = chart.spec(model, m)?;
    map_curve(gamma, |x| phi(model, &spec, x))
}

/// `F⁻¹(σ) = (σ(0), φ_{p,σ(0)}⁻¹ ∘ σ)`.
pub fn untrivialize(
    model: &dyn Manifold,
    chart: &TrivializationChart,
    sigma: &SampledCurve,
) -> Result<(Point, SampledCurve)> {
    let m = sigma.base().clone();
    let spec = chart.spec(model, &m)?;
    let gamma = map_curve(sigma, |x| flow(model, &spec, x, -1.0))?;
    Ok((m, gamma))
}

/// Mapping-space chart at `γ_ref`: `x ↦ Log_{γ_ref(x)} f(x)`.
pub fn mapping_chart_in(
    model: &dyn Manifold,
    gamma_ref: &SampledCurve,
    f: &SampledCurve,
    source: ExpSource,
) -> Result<Vec<Tangent>> {
    if gamma_ref.len() != f.len() {
        return Err(Error::InvalidInput("curves have different lengths".into()));
    }
    gamma_ref
        .points
        .iter()
        .zip(&f.points)
        .enumerate()
        .map(|(j, (a, b))| {
            let r0 = model.r0(a);
            let d = dist_with(model, source, a, b)?;
            if !(d < r0) {
                return Err(Error::OutOfInjectivityRange {
                    distance: d,
                    radius: r0,
                    node: Some(j),
                });
            }
            log_with(model, source, a, b)
        })
        .collect()
}

/// Inverse chart: `x ↦ Exp_{γ_ref(x)} β(x)`.
pub fn mapping_chart_out(
    model: &dyn Manifold,
    gamma_ref: &SampledCurve,
    section: &[Tangent],
    source: ExpSource,
) -> Result<SampledCurve> {
    if gamma_ref.len() != section.len() {
        return Err(Error::InvalidInput("section and curve have different lengths".into()));
    }
    let points = gamma_ref
        .points
        .iter()
        .zip(section)
        .map(|(a, v)| {
            let v = model.push_tangent(v, a.chart)?;
            if (&v.base.coords - &a.coords).norm() > 1e-9 {
                return Err(Error::InvalidInput("section is not based along the curve".into()));
            }
            exp_with(model, source, &v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampledCurve {
        points,
        ..gamma_ref.clone()
    })
}

/// Unit-speed reparametrization `γ ∘ s⁻¹` with `s(t) = ∫_{t_b}^t ‖γ̇‖_g`.
///
/// The output keeps the node count; its grid spans `[t0, t0 + L]` and is
/// uniform on each side of the basepoint node, so the basepoint is kept.
pub fn arclength_normalize(model: &dyn Manifold, gamma: &SampledCurve, floor: f64) -> Result<SampledCurve> {
    if !(floor > 0.0) {
        return Err(Error::InvalidInput("immersion floor must be positive".into()));
    }
    if gamma.len() < INTERPOLATION_NODES {
        return Err(Error::GridTooCoarse {
            nodes: gamma.len(),
            required: INTERPOLATION_NODES,
        });
    }
    let vels = curve_velocities(model, gamma)?;
    let speed: Vec<f64> = vels.iter().map(|v| model.norm(v)).collect();
    if let Some((node, &s)) = speed
        .iter()
        .enumerate()
        .find(|(_, s)| !(**s > floor))
    {
        return Err(Error::NotImmersed { node, speed: s });
    }
    let t = gamma.grid.nodes();
    let sv: Vec<DVector<f64>> = speed.iter().map(|&s| DVector::from_element(1, s)).collect();
    let ds: Vec<f64> = node_derivatives(&sv, t)?.iter().map(|d| d[0]).collect();
    let s = cumulative_hermite(&speed, &ds, &gamma.grid);
    let n = gamma.len() - 1;
    let (b, t0, total) = (gamma.base_index, t[0], s[n]);
    let sb = s[b];

    let arc_at = |j: usize, tau: f64| -> f64 {
        let h = t[j + 1] - t[j];
        let u = (tau - t[j]) / h;
        let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
        s[j] + h
            * (speed[j] * (u4 / 2.0 - u3 + u)
                + h * ds[j] * (u4 / 4.0 - 2.0 * u3 / 3.0 + u2 / 2.0)
                + speed[j + 1] * (u3 - u4 / 2.0)
                + h * ds[j + 1] * (u4 / 4.0 - u3 / 3.0))
    };
    let invert = |target: f64| -> (usize, f64) {
        let j = match s.binary_search_by(|x| x.partial_cmp(&target).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => return (i.min(n - 1), t[i]),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 1),
        };
        let (mut lo, mut hi) = (t[j], t[j + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if arc_at(j, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (j, 0.5 * (lo + hi))
    };

    let mut nodes = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let sigma = if b == 0 {
            total * k as f64 / n as f64
        } else if k <= b {
            sb * k as f64 / b as f64
        } else {
            sb + (total - sb) * (k - b) as f64 / (n - b) as f64
        };
        nodes.push(sigma);
    }
    nodes[n] = total;
    let points = nodes
        .iter()
        .enumerate()
        .map(|(k, &sigma)| {
            if k == b {
                return Ok(gamma.points[b].clone());
            }
            let (j, tau) = invert(sigma);
            let start = (j + 1).saturating_sub(INTERPOLATION_NODES / 2).min(n + 1 - INTERPOLATION_NODES);
            let window = &gamma.points[start..start + INTERPOLATION_NODES];
            let chart = window_chart(model, window, &gamma.points[j], j)?;
            let weights = &fd_weights(tau, &t[start..start + INTERPOLATION_NODES], 0)[0];
            let mut x = DVector::zeros(model.dim());
            for (w, q) in weights.iter().zip(window) {
                x.axpy(*w, &model.transition(q, chart)?.coords, 1.0);
            }
            Ok(model.settle(&Point::new(chart, x), chart))
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid::from_nodes(nodes.iter().map(|x| t0 + x).collect())?;
    Ok(SampledCurve {
        grid,
        points,
        order: gamma.order.max(1),
        base_index: b,
    })
}
