use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use super::{ChartId, ChartSpec, Christoffel, Domain, GeodesicOracle, Manifold, Point, Tangent};

const TRUST_RADIUS: f64 = 0.8 * PI;

/// The flat torus `ℝ² / (2πℤ)²`.
///
/// Four charts, each the open square of half-width `π` around its center:
/// `A` at `(π, 0)`, `B` at `(0, 0)`, `C` at `(π, π)` and `D` at `(0, π)`.
/// Transitions are translations by multiples of `2π`.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    charts: Vec<ChartSpec>,
}

impl Default for FlatTorus {
    fn default() -> Self {
        let spec = |id, name, cx: f64, cy: f64, description| ChartSpec {
            id: ChartId(id),
            name,
            center: DVector::from_column_slice(&[cx, cy]),
            trust_radius: TRUST_RADIUS,
            description,
        };
        Self {
            charts: vec![
                spec(0, "A", PI, 0.0, "(0, 2pi) x (-pi, pi)"),
                spec(1, "B", 0.0, 0.0, "(-pi, pi) x (-pi, pi)"),
                spec(2, "C", PI, PI, "(0, 2pi) x (0, 2pi)"),
                spec(3, "D", 0.0, PI, "(-pi, pi) x (0, 2pi)"),
            ],
        }
    }
}

/// Representative of `a` modulo `2π` in `[-π, π]`.
fn wrap(a: f64) -> f64 {
    a - TAU * (a / TAU).round()
}

impl FlatTorus {
    fn offset(&self, chart: ChartId, coords: &DVector<f64>) -> DVector<f64> {
        coords - &self.charts[chart.0].center
    }
}

impl Manifold for FlatTorus {
    fn name(&self) -> &'static str {
        "torus2"
    }

    fn dim(&self) -> usize {
        2
    }

    fn charts(&self) -> &[ChartSpec] {
        &self.charts
    }

    fn domain_test(&self, chart: ChartId, coords: &DVector<f64>) -> Domain {
        let d = self.offset(chart, coords).amax();
        if !d.is_finite() || d >= PI {
            Domain::Outside
        } else if d > TRUST_RADIUS {
            Domain::Margin
        } else {
            Domain::Inside
        }
    }

    fn center_distance(&self, chart: ChartId, coords: &DVector<f64>) -> f64 {
        self.offset(chart, coords).amax() / TRUST_RADIUS
    }

    fn change_coords(
        &self,
        _from: ChartId,
        to: ChartId,
        coords: &DVector<f64>,
    ) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let center = &self.charts[to.0].center;
        let mut out = DVector::zeros(2);
        for i in 0..2 {
            let w = wrap(coords[i] - center[i]);
            if !(w.abs() < PI) {
                return None;
            }
            out[i] = center[i] + w;
        }
        Some((out, DMatrix::identity(2, 2)))
    }

    fn christoffel(&self, _chart: ChartId, _coords: &DVector<f64>) -> Christoffel {
        Christoffel::zeros(2)
    }

    fn metric(&self, _chart: ChartId, _coords: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(2, 2)
    }

    fn r0(&self, _p: &Point) -> f64 {
        PI / 2.0
    }

    fn oracle(&self) -> Option<&dyn GeodesicOracle> {
        Some(self)
    }

    fn conventions(&self) -> &'static str {
        "flat torus R^2/(2 pi Z)^2; charts A,B,C,D are open squares of half-width pi centered at \
         (pi,0), (0,0), (pi,pi), (0,pi); transitions translate by multiples of 2 pi; trust radius 0.8 pi \
         (max-norm); r0 = pi/2"
    }
}

impl GeodesicOracle for FlatTorus {
    fn exp(&self, v: &Tangent) -> Point {
        let raw = Point::new(v.base.chart, &v.base.coords + &v.components);
        // `raw` may have left its chart; re-home it through any chart that holds it.
        let m: &dyn Manifold = self;
        let homed = self
            .charts
            .iter()
            .find_map(|c| {
                let (coords, _) = self.change_coords(raw.chart, c.id, &raw.coords)?;
                Some(Point::new(c.id, coords))
            })
            .unwrap_or(raw);
        m.settle(&homed, v.base.chart)
    }

    fn log(&self, p: &Point, q: &Point) -> Tangent {
        let d = DVector::from_fn(2, |i, _| wrap(q.coords[i] - p.coords[i]));
        Tangent::new(p.clone(), d)
    }

    fn dist(&self, p: &Point, q: &Point) -> f64 {
        self.log(p, q).components.norm()
    }

    fn transport_along_geodesic(&self, v: &Tangent, w: &Tangent) -> Tangent {
        let q = self.exp(v);
        Tangent::new(q, w.components.clone())
    }
}
