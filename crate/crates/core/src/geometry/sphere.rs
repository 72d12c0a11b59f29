use nalgebra::{DMatrix, DVector, Matrix3x2, Vector3};

use super::{ChartId, ChartSpec, Christoffel, Domain, GeodesicOracle, Manifold, Point, Tangent};

/// Chart centered at the north pole (projection from the south pole).
pub const NORTH: ChartId = ChartId(0);
/// Chart centered at the south pole (projection from the north pole).
pub const SOUTH: ChartId = ChartId(1);

const TRUST_RADIUS: f64 = 1.5;
const HARD_RADIUS: f64 = 1.0e6;

/// The unit sphere `S²` with two stereographic charts.
///
/// In the `north` chart, `x ↦ (2x, 1 − |x|²) / (1 + |x|²)`; in the `south`
/// chart the third component flips sign. The transition between the two is
/// the inversion `x ↦ x / |x|²`, and both carry the metric `4 / (1 + |x|²)² δ`.
#[derive(Debug, Clone)]
pub struct Sphere {
    charts: Vec<ChartSpec>,
}

impl Default for Sphere {
    fn default() -> Self {
        Self {
            charts: vec![
                ChartSpec {
                    id: NORTH,
                    name: "north",
                    center: DVector::zeros(2),
                    trust_radius: TRUST_RADIUS,
                    description: "stereographic projection from the south pole; (0,0) is the north pole",
                },
                ChartSpec {
                    id: SOUTH,
                    name: "south",
                    center: DVector::zeros(2),
                    trust_radius: TRUST_RADIUS,
                    description: "stereographic projection from the north pole; (0,0) is the south pole",
                },
            ],
        }
    }
}

fn pole_sign(chart: ChartId) -> f64 {
    if chart == NORTH {
        1.0
    } else {
        -1.0
    }
}

fn jacobian(chart: ChartId, x: &DVector<f64>) -> Matrix3x2<f64> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let s = 1.0 + r2;
    let s2 = s * s;
    let sg = pole_sign(chart);
    Matrix3x2::new(
        2.0 / s - 4.0 * x[0] * x[0] / s2,
        -4.0 * x[0] * x[1] / s2,
        -4.0 * x[0] * x[1] / s2,
        2.0 / s - 4.0 * x[1] * x[1] / s2,
        -4.0 * sg * x[0] / s2,
        -4.0 * sg * x[1] / s2,
    )
}

/// Embedded unit vector in `ℝ³`.
pub fn embed(p: &Point) -> Vector3<f64> {
    let (x, y) = (p.coords[0], p.coords[1]);
    let r2 = x * x + y * y;
    let s = 1.0 + r2;
    Vector3::new(2.0 * x / s, 2.0 * y / s, pole_sign(p.chart) * (1.0 - r2) / s)
}

pub fn embed_tangent(v: &Tangent) -> Vector3<f64> {
    jacobian(v.base.chart, &v.base.coords) * nalgebra::Vector2::new(v.components[0], v.components[1])
}

/// Point in the chart that holds `x` nearest its center.
pub fn from_embedded(x: &Vector3<f64>) -> Point {
    let chart = if x[2] >= 0.0 { NORTH } else { SOUTH };
    let d = 1.0 + pole_sign(chart) * x[2];
    Point::from_slice(chart, &[x[0] / d, x[1] / d])
}

/// Tangent components at `base` of an embedded vector tangent to the sphere there.
pub fn tangent_from_embedded(base: &Point, v: &Vector3<f64>) -> Tangent {
    let j = jacobian(base.chart, &base.coords);
    let r2 = base.coords.norm_squared();
    let lambda = 2.0 / (1.0 + r2);
    let c = j.transpose() * v / (lambda * lambda);
    Tangent::new(base.clone(), DVector::from_column_slice(&[c[0], c[1]]))
}

impl Manifold for Sphere {
    fn name(&self) -> &'static str {
        "sphere2"
    }

    fn dim(&self) -> usize {
        2
    }

    fn charts(&self) -> &[ChartSpec] {
        &self.charts
    }

    fn domain_test(&self, _chart: ChartId, coords: &DVector<f64>) -> Domain {
        let r = coords.norm();
        if !r.is_finite() || r > HARD_RADIUS {
            Domain::Outside
        } else if r > TRUST_RADIUS {
            Domain::Margin
        } else {
            Domain::Inside
        }
    }

    fn change_coords(
        &self,
        from: ChartId,
        to: ChartId,
        coords: &DVector<f64>,
    ) -> Option<(DVector<f64>, DMatrix<f64>)> {
        if from == to {
            return Some((coords.clone(), DMatrix::identity(2, 2)));
        }
        let r2 = coords.norm_squared();
        if !(r2 > 0.0) || !r2.is_finite() {
            return None;
        }
        let y = coords / r2;
        if !y.iter().all(|c| c.is_finite()) {
            return None;
        }
        let jac = (DMatrix::identity(2, 2) * r2 - coords * coords.transpose() * 2.0) / (r2 * r2);
        Some((y, jac))
    }

    fn christoffel(&self, _chart: ChartId, coords: &DVector<f64>) -> Christoffel {
        let s = 1.0 + coords.norm_squared();
        Christoffel::conformal(&(coords * (-2.0 / s)))
    }

    fn metric(&self, _chart: ChartId, coords: &DVector<f64>) -> DMatrix<f64> {
        let s = 1.0 + coords.norm_squared();
        DMatrix::identity(2, 2) * (4.0 / (s * s))
    }

    fn r0(&self, _p: &Point) -> f64 {
        std::f64::consts::FRAC_PI_2
    }

    fn oracle(&self) -> Option<&dyn GeodesicOracle> {
        Some(self)
    }

    fn conventions(&self) -> &'static str {
        "unit sphere; chart `north` maps x to (2x, 1-|x|^2)/(1+|x|^2), chart `south` to (2x, |x|^2-1)/(1+|x|^2); \
         transition x -> x/|x|^2; metric 4/(1+|x|^2)^2 delta; trust radius |x| <= 1.5; r0 = pi/2"
    }
}

impl GeodesicOracle for Sphere {
    fn exp(&self, v: &Tangent) -> Point {
        let p = embed(&v.base);
        let w = embed_tangent(v);
        let theta = w.norm();
        let q = if theta > 0.0 {
            p * theta.cos() + w * (theta.sin() / theta)
        } else {
            p
        };
        let q = from_embedded(&q.normalize());
        (self as &dyn Manifold).settle(&q, v.base.chart)
    }

    fn log(&self, p: &Point, q: &Point) -> Tangent {
        let pe = embed(p);
        let qe = embed(q);
        let c = pe.dot(&qe);
        let w = qe - pe * c;
        let s = w.norm();
        if s == 0.0 {
            return Tangent::zero(p.clone());
        }
        let theta = s.atan2(c);
        tangent_from_embedded(p, &(w * (theta / s)))
    }

    fn dist(&self, p: &Point, q: &Point) -> f64 {
        let pe = embed(p);
        let qe = embed(q);
        pe.cross(&qe).norm().atan2(pe.dot(&qe))
    }

    fn transport_along_geodesic(&self, v: &Tangent, w: &Tangent) -> Tangent {
        let q = self.exp(v);
        let pe = embed(&v.base);
        let ve = embed_tangent(v);
        let we = embed_tangent(w);
        let theta = ve.norm();
        if theta == 0.0 {
            return (self as &dyn Manifold)
                .push_tangent(w, q.chart)
                .unwrap_or_else(|_| w.clone());
        }
        let u = ve / theta;
        let along = we.dot(&u);
        let perp = we - u * along;
        let moved = (u * theta.cos() - pe * theta.sin()) * along + perp;
        tangent_from_embedded(&q, &moved)
    }
}
