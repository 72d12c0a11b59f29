use nalgebra::{DMatrix, DVector};

use super::{ChartId, ChartSpec, Christoffel, Domain, GeodesicOracle, Manifold, Point, Tangent};

/// The Euclidean plane with its single identity chart `plane`.
#[derive(Debug, Clone)]
pub struct Euclidean {
    charts: Vec<ChartSpec>,
    r0_cap: f64,
}

impl Euclidean {
    pub fn new(r0_cap: f64) -> Self {
        Self {
            charts: vec![ChartSpec {
                id: ChartId(0),
                name: "plane",
                center: DVector::zeros(2),
                trust_radius: f64::INFINITY,
                description: "identity coordinates (x, y)",
            }],
            r0_cap,
        }
    }
}

impl Default for Euclidean {
    fn default() -> Self {
        Self::new(super::DEFAULT_R0_CAP)
    }
}

impl Manifold for Euclidean {
    fn name(&self) -> &'static str {
        "euclidean2"
    }

    fn dim(&self) -> usize {
        2
    }

    fn charts(&self) -> &[ChartSpec] {
        &self.charts
    }

    fn domain_test(&self, _chart: ChartId, coords: &DVector<f64>) -> Domain {
        if coords.iter().all(|c| c.is_finite()) {
            Domain::Inside
        } else {
            Domain::Outside
        }
    }

    fn center_distance(&self, _chart: ChartId, _coords: &DVector<f64>) -> f64 {
        0.0
    }

    fn change_coords(
        &self,
        _from: ChartId,
        _to: ChartId,
        coords: &DVector<f64>,
    ) -> Option<(DVector<f64>, DMatrix<f64>)> {
        Some((coords.clone(), DMatrix::identity(2, 2)))
    }

    fn christoffel(&self, _chart: ChartId, _coords: &DVector<f64>) -> Christoffel {
        Christoffel::zeros(2)
    }

    fn metric(&self, _chart: ChartId, _coords: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(2, 2)
    }

    fn r0(&self, _p: &Point) -> f64 {
        self.r0_cap
    }

    fn oracle(&self) -> Option<&dyn GeodesicOracle> {
        Some(self)
    }

    fn conventions(&self) -> &'static str {
        "single chart `plane` with identity coordinates; metric δ_ij; r0 is a configurable cap"
    }
}

impl GeodesicOracle for Euclidean {
    fn exp(&self, v: &Tangent) -> Point {
        Point::new(v.base.chart, &v.base.coords + &v.components)
    }

    fn log(&self, p: &Point, q: &Point) -> Tangent {
        Tangent::new(p.clone(), &q.coords - &p.coords)
    }

    fn dist(&self, p: &Point, q: &Point) -> f64 {
        (&q.coords - &p.coords).norm()
    }

    fn transport_along_geodesic(&self, v: &Tangent, w: &Tangent) -> Tangent {
        Tangent::new(self.exp(v), w.components.clone())
    }
}
