//! Chart-atlas manifolds with Christoffel symbols, metrics and closed-form
//! geodesic oracles.
//!
//! Every point carries the id of the chart its coordinates live in. Chart
//! changes go through [`Manifold::change_coords`], which also returns the
//! Jacobian so tangent components can follow the point.

mod euclidean;
mod hyperbolic;
pub mod sphere;
mod torus;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use euclidean::Euclidean;
pub use hyperbolic::PoincareDisk;
pub use sphere::Sphere;
pub use torus::FlatTorus;

/// Default injectivity cap for models whose true injectivity radius is infinite.
pub const DEFAULT_R0_CAP: f64 = 10.0;

/// Registered model names, in the fixed order used for reports.
pub const MODEL_NAMES: [&str; 4] = ["euclidean2", "hyperbolic2", "sphere2", "torus2"];

/// Looks up a model by its registry name.
pub fn model(name: &str) -> Option<Arc<dyn Manifold>> {
    match name {
        "euclidean2" => Some(Arc::new(Euclidean::default())),
        "sphere2" => Some(Arc::new(Sphere::default())),
        "hyperbolic2" => Some(Arc::new(PoincareDisk::default())),
        "torus2" => Some(Arc::new(FlatTorus::default())),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChartId(pub usize);

impl fmt::Display for ChartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Where a coordinate tuple sits relative to a chart's trusted region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Inside,
    Margin,
    Outside,
}

#[derive(Debug, Clone)]
pub struct ChartSpec {
    pub id: ChartId,
    pub name: &'static str,
    pub center: DVector<f64>,
    /// Radius (in the chart's own distance measure) beyond which coordinates
    /// are reported as [`Domain::Margin`].
    pub trust_radius: f64,
    pub description: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub chart: ChartId,
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(chart: ChartId, coords: DVector<f64>) -> Self {
        Self { chart, coords }
    }

    pub fn from_slice(chart: ChartId, coords: &[f64]) -> Self {
        Self::new(chart, DVector::from_column_slice(coords))
    }
}

/// A tangent vector with components in the base chart's coordinate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub base: Point,
    pub components: DVector<f64>,
}

impl Tangent {
    pub fn new(base: Point, components: DVector<f64>) -> Self {
        Self { base, components }
    }

    pub fn zero(base: Point) -> Self {
        let m = base.coords.len();
        Self::new(base, DVector::zeros(m))
    }
}

/// A basis of a tangent space; column `i` holds the coordinates `e_i^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub base: Point,
    pub columns: DMatrix<f64>,
}

impl Frame {
    pub fn new(base: Point, columns: DMatrix<f64>) -> Result<Self> {
        let m = base.coords.len();
        if columns.nrows() != m || columns.ncols() != m {
            return Err(Error::InvalidInput(format!(
                "frame must be {m}x{m}, got {}x{}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        // Hadamard ratio: |det| over the product of column norms.
        let scale: f64 = columns.column_iter().map(|c| c.norm()).product();
        if !(scale > 0.0) || !(columns.determinant().abs() / scale > 1e-10) {
            return Err(Error::SingularFrame);
        }
        Ok(Self { base, columns })
    }

    pub fn coordinate(base: Point) -> Self {
        let m = base.coords.len();
        Self {
            base,
            columns: DMatrix::identity(m, m),
        }
    }

    pub fn column(&self, i: usize) -> Tangent {
        Tangent::new(self.base.clone(), self.columns.column(i).into_owned())
    }

    /// Components of `v` in this frame.
    pub fn coefficients(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.columns.clone().lu().solve(v).ok_or(Error::SingularFrame)
    }
}

/// Christoffel symbols `Γ^l_{kj}` of a connection at one coordinate point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, l: usize, k: usize, j: usize) -> f64 {
        self.data[(l * self.dim + k) * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, l: usize, k: usize, j: usize, value: f64) {
        self.data[(l * self.dim + k) * self.dim + j] = value;
    }

    /// `out^l = Γ^l_{kj} r^k x^j`.
    pub fn contract(&self, r: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        let m = self.dim;
        DVector::from_fn(m, |l, _| {
            let mut acc = 0.0;
            for k in 0..m {
                for j in 0..m {
                    acc += self.get(l, k, j) * r[k] * x[j];
                }
            }
            acc
        })
    }

    /// Levi-Civita symbols of a conformally flat metric `e^{2φ} δ`, given `∂φ`.
    pub fn conformal(grad_phi: &DVector<f64>) -> Self {
        let m = grad_phi.len();
        let mut out = Self::zeros(m);
        for l in 0..m {
            for k in 0..m {
                for j in 0..m {
                    let mut v = 0.0;
                    if l == k {
                        v += grad_phi[j];
                    }
                    if l == j {
                        v += grad_phi[k];
                    }
                    if k == j {
                        v -= grad_phi[l];
                    }
                    out.set(l, k, j, v);
                }
            }
        }
        out
    }
}

/// Closed-form geodesic data for a model. Callers go through the checked
/// wrappers on `dyn Manifold` ([`exp_oracle`](trait.Manifold.html) etc.).
pub trait GeodesicOracle: Send + Sync {
    /// `Exp_p(v)` with `p = v.base`.
    fn exp(&self, v: &Tangent) -> Point;
    /// `Exp_p^{-1}(q)`; only meaningful inside the injectivity radius.
    fn log(&self, p: &Point, q: &Point) -> Tangent;
    fn dist(&self, p: &Point, q: &Point) -> f64;
    /// Parallel transport of `w` (based at `v.base`) along `t ↦ Exp(t v)`, `t ∈ [0, 1]`.
    fn transport_along_geodesic(&self, v: &Tangent, w: &Tangent) -> Tangent;
}

/// A Riemannian manifold presented by an atlas of coordinate charts.
pub trait Manifold: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn charts(&self) -> &[ChartSpec];
    fn domain_test(&self, chart: ChartId, coords: &DVector<f64>) -> Domain;

    /// Coordinate change together with its Jacobian, or `None` when the point
    /// has no representative in `to`.
    fn change_coords(
        &self,
        from: ChartId,
        to: ChartId,
        coords: &DVector<f64>,
    ) -> Option<(DVector<f64>, DMatrix<f64>)>;

    fn christoffel(&self, chart: ChartId, coords: &DVector<f64>) -> Christoffel;
    fn metric(&self, chart: ChartId, coords: &DVector<f64>) -> DMatrix<f64>;

    /// Conservative injectivity floor at `p`.
    fn r0(&self, p: &Point) -> f64;

    /// Normalized distance from the chart center, used to pick charts.
    fn center_distance(&self, chart: ChartId, coords: &DVector<f64>) -> f64 {
        let spec = &self.charts()[chart.0];
        (coords - &spec.center).norm() / spec.trust_radius
    }

    fn oracle(&self) -> Option<&dyn GeodesicOracle> {
        None
    }

    /// Free-form notes on coordinate conventions for the model manifest.
    fn conventions(&self) -> &'static str;
}

impl dyn Manifold + '_ {
    pub fn chart_by_name(&self, name: &str) -> Option<ChartId> {
        self.charts().iter().find(|c| c.name == name).map(|c| c.id)
    }

    pub fn chart_name(&self, chart: ChartId) -> &'static str {
        self.charts()[chart.0].name
    }

    /// Checks that `p` has the right dimension and lies in its chart.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.chart.0 >= self.charts().len() {
            return Err(Error::InvalidInput(format!("unknown chart {}", p.chart)));
        }
        if p.coords.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has {} coordinates, model dimension is {}",
                p.coords.len(),
                self.dim()
            )));
        }
        if self.domain_test(p.chart, &p.coords) == Domain::Outside {
            return Err(Error::InvalidInput(format!(
                "coordinates {:?} lie outside chart `{}`",
                p.coords.as_slice(),
                self.chart_name(p.chart)
            )));
        }
        Ok(())
    }

    pub fn transition(&self, p: &Point, target: ChartId) -> Result<Point> {
        if p.chart == target {
            return Ok(p.clone());
        }
        let no_overlap = || Error::NoOverlap {
            target: self.chart_name(target).to_string(),
        };
        let (coords, _) = self
            .change_coords(p.chart, target, &p.coords)
            .ok_or_else(no_overlap)?;
        if self.domain_test(target, &coords) == Domain::Outside {
            return Err(no_overlap());
        }
        Ok(Point::new(target, coords))
    }

    pub fn push_tangent(&self, v: &Tangent, target: ChartId) -> Result<Tangent> {
        if v.base.chart == target {
            return Ok(v.clone());
        }
        let no_overlap = || Error::NoOverlap {
            target: self.chart_name(target).to_string(),
        };
        let (coords, jac) = self
            .change_coords(v.base.chart, target, &v.base.coords)
            .ok_or_else(no_overlap)?;
        if self.domain_test(target, &coords) == Domain::Outside {
            return Err(no_overlap());
        }
        Ok(Tangent::new(Point::new(target, coords), jac * &v.components))
    }

    pub fn push_frame(&self, f: &Frame, target: ChartId) -> Result<Frame> {
        if f.base.chart == target {
            return Ok(f.clone());
        }
        let no_overlap = || Error::NoOverlap {
            target: self.chart_name(target).to_string(),
        };
        let (coords, jac) = self
            .change_coords(f.base.chart, target, &f.base.coords)
            .ok_or_else(no_overlap)?;
        if self.domain_test(target, &coords) == Domain::Outside {
            return Err(no_overlap());
        }
        Ok(Frame {
            base: Point::new(target, coords),
            columns: jac * &f.columns,
        })
    }

    /// Re-expresses `p` in the chart whose center is nearest (ties go to the
    /// lowest chart id).
    pub fn best_chart(&self, p: &Point) -> Option<Point> {
        let mut best: Option<(f64, Point)> = None;
        for spec in self.charts() {
            let Ok(q) = self.transition(p, spec.id) else {
                continue;
            };
            let d = self.center_distance(spec.id, &q.coords);
            if !d.is_finite() {
                continue;
            }
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, q));
            }
        }
        best.map(|(_, q)| q)
    }

    /// Keeps `p` in `preferred` when it sits inside that chart's trusted
    /// region, otherwise falls back to [`best_chart`](Self::best_chart).
    pub fn settle(&self, p: &Point, preferred: ChartId) -> Point {
        if let Ok(q) = self.transition(p, preferred) {
            if self.domain_test(preferred, &q.coords) == Domain::Inside {
                return q;
            }
        }
        self.best_chart(p).unwrap_or_else(|| p.clone())
    }

    pub fn metric_at(&self, p: &Point) -> DMatrix<f64> {
        self.metric(p.chart, &p.coords)
    }

    pub fn inner(&self, p: &Point, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a.transpose() * self.metric_at(p) * b)[(0, 0)]
    }

    pub fn norm(&self, v: &Tangent) -> f64 {
        self.inner(&v.base, &v.components, &v.components).max(0.0).sqrt()
    }

    /// Gram matrix `F^T g F` of a frame.
    pub fn gram(&self, f: &Frame) -> DMatrix<f64> {
        f.columns.transpose() * self.metric_at(&f.base) * &f.columns
    }

    /// `g`-orthonormalization of the coordinate basis at `p` (Gram–Schmidt in
    /// column order).
    pub fn default_frame(&self, p: &Point) -> Frame {
        let m = self.dim();
        let g = self.metric_at(p);
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(m);
        for i in 0..m {
            let mut v = DVector::from_fn(m, |r, _| if r == i { 1.0 } else { 0.0 });
            for c in &cols {
                let proj = (c.transpose() * &g * &v)[(0, 0)];
                v -= c * proj;
            }
            let n = (v.transpose() * &g * &v)[(0, 0)].sqrt();
            cols.push(v / n);
        }
        Frame {
            base: p.clone(),
            columns: DMatrix::from_columns(&cols),
        }
    }

    fn require_oracle(&self) -> Result<&dyn GeodesicOracle> {
        self.oracle()
            .ok_or_else(|| Error::NoOracle(self.name().to_string()))
    }

    pub fn has_oracle(&self) -> bool {
        self.oracle().is_some()
    }

    pub fn exp_oracle(&self, v: &Tangent) -> Result<Point> {
        Ok(self.require_oracle()?.exp(v))
    }

    pub fn log_oracle(&self, p: &Point, q: &Point) -> Result<Tangent> {
        let oracle = self.require_oracle()?;
        let d = oracle.dist(p, q);
        let radius = self.r0(p);
        if !(d < radius) {
            return Err(Error::OutOfInjectivityRange {
                distance: d,
                radius,
                node: None,
            });
        }
        Ok(oracle.log(p, q))
    }

    pub fn dist_oracle(&self, p: &Point, q: &Point) -> Result<f64> {
        Ok(self.require_oracle()?.dist(p, q))
    }

    pub fn transport_geodesic_oracle(&self, v: &Tangent, w: &Tangent) -> Result<Tangent> {
        Ok(self.require_oracle()?.transport_along_geodesic(v, w))
    }

    /// Distance used by comparison checks: the oracle distance when the model
    /// has one, otherwise the coordinate distance after moving `q` into the
    /// chart of `p`.
    pub fn point_distance(&self, p: &Point, q: &Point) -> Result<(f64, DistanceKind)> {
        if let Some(oracle) = self.oracle() {
            return Ok((oracle.dist(p, q), DistanceKind::Oracle));
        }
        let q = self.transition(q, p.chart)?;
        Ok(((&p.coords - &q.coords).norm(), DistanceKind::Coordinate))
    }

    /// Largest violation of `∂_k g_ij = Γ^l_{ki} g_lj + Γ^l_{kj} g_il`, with
    /// `∂_k` taken by central differences of step `h`.
    pub fn compatibility_residual(&self, chart: ChartId, coords: &DVector<f64>, h: f64) -> f64 {
        let m = self.dim();
        let g = self.metric(chart, coords);
        let gamma = self.christoffel(chart, coords);
        let mut worst: f64 = 0.0;
        for k in 0..m {
            let mut plus = coords.clone();
            let mut minus = coords.clone();
            plus[k] += h;
            minus[k] -= h;
            let dg = (self.metric(chart, &plus) - self.metric(chart, &minus)) / (2.0 * h);
            for i in 0..m {
                for j in 0..m {
                    let mut rhs = 0.0;
                    for l in 0..m {
                        rhs += gamma.get(l, k, i) * g[(l, j)] + gamma.get(l, k, j) * g[(i, l)];
                    }
                    worst = worst.max((dg[(i, j)] - rhs).abs());
                }
            }
        }
        worst
    }
}

/// How a distance in a comparison check was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    Oracle,
    Coordinate,
}

impl DistanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::Oracle => "oracle",
            DistanceKind::Coordinate => "coordinate",
        }
    }
}

/// Validates that a connection is metric compatible on the given samples.
pub fn validate_connection(
    model: &dyn Manifold,
    samples: &[Point],
    tolerance: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in samples {
        let r = model.compatibility_residual(p.chart, &p.coords, 1e-5);
        worst = worst.max(r);
    }
    if worst < tolerance {
        Ok(worst)
    } else {
        Err(Error::InvalidInput(format!(
            "connection is not metric compatible (residual {worst:.3e})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_symbols_match_flat_case() {
        let g = Christoffel::conformal(&DVector::zeros(2));
        assert!(g.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn frame_rejects_dependent_columns() {
        let p = Point::from_slice(ChartId(0), &[0.0, 0.0]);
        let cols = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        assert_eq!(Frame::new(p, cols), Err(Error::SingularFrame));
    }

    #[test]
    fn registry_knows_all_models() {
        for name in MODEL_NAMES {
            let m = model(name).unwrap();
            assert_eq!(m.name(), name);
            assert_eq!(m.dim(), 2);
        }
        assert!(model("klein-bottle").is_none());
    }

    #[test]
    fn default_frame_is_orthonormal() {
        for name in MODEL_NAMES {
            let m = model(name).unwrap();
            let p = Point::from_slice(ChartId(0), &[0.3, -0.2]);
            let f = m.default_frame(&p);
            let gram = m.gram(&f);
            assert!((gram - DMatrix::identity(2, 2)).abs().max() < 1e-13, "{name}");
        }
    }
}
