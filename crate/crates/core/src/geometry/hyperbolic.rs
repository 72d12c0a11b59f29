use nalgebra::{Complex, DMatrix, DVector};

use super::{ChartId, ChartSpec, Christoffel, Domain, GeodesicOracle, Manifold, Point, Tangent};

/// The Poincaré disk model of the hyperbolic plane, metric `4 / (1 − |x|²)² δ`.
///
/// One chart covers the whole manifold. The coordinate boundary `|x| = 1` is
/// infinitely far away, so the chart never reports a margin: a finite-length
/// trajectory cannot reach it, and anything that does is a numerical failure.
#[derive(Debug, Clone)]
pub struct PoincareDisk {
    charts: Vec<ChartSpec>,
    r0_cap: f64,
}

impl PoincareDisk {
    pub fn new(r0_cap: f64) -> Self {
        Self {
            charts: vec![ChartSpec {
                id: ChartId(0),
                name: "disk",
                center: DVector::zeros(2),
                trust_radius: 1.0,
                description: "Poincaré disk coordinates, |x| < 1",
            }],
            r0_cap,
        }
    }
}

impl Default for PoincareDisk {
    fn default() -> Self {
        Self::new(super::DEFAULT_R0_CAP)
    }
}

fn to_c(x: &DVector<f64>) -> Complex<f64> {
    Complex::new(x[0], x[1])
}

fn from_c(z: Complex<f64>) -> DVector<f64> {
    DVector::from_column_slice(&[z.re, z.im])
}

/// Möbius map sending `a` to the origin.
fn to_origin(a: Complex<f64>, z: Complex<f64>) -> Complex<f64> {
    (z - a) / (Complex::new(1.0, 0.0) - a.conj() * z)
}

fn from_origin(a: Complex<f64>, z: Complex<f64>) -> Complex<f64> {
    (z + a) / (Complex::new(1.0, 0.0) + a.conj() * z)
}

impl Manifold for PoincareDisk {
    fn name(&self) -> &'static str {
        "hyperbolic2"
    }

    fn dim(&self) -> usize {
        2
    }

    fn charts(&self) -> &[ChartSpec] {
        &self.charts
    }

    fn domain_test(&self, _chart: ChartId, coords: &DVector<f64>) -> Domain {
        let r = coords.norm();
        if r.is_finite() && r < 1.0 {
            Domain::Inside
        } else {
            Domain::Outside
        }
    }

    fn change_coords(
        &self,
        _from: ChartId,
        _to: ChartId,
        coords: &DVector<f64>,
    ) -> Option<(DVector<f64>, DMatrix<f64>)> {
        Some((coords.clone(), DMatrix::identity(2, 2)))
    }

    fn christoffel(&self, _chart: ChartId, coords: &DVector<f64>) -> Christoffel {
        let s = 1.0 - coords.norm_squared();
        Christoffel::conformal(&(coords * (2.0 / s)))
    }

    fn metric(&self, _chart: ChartId, coords: &DVector<f64>) -> DMatrix<f64> {
        let s = 1.0 - coords.norm_squared();
        DMatrix::identity(2, 2) * (4.0 / (s * s))
    }

    fn r0(&self, _p: &Point) -> f64 {
        self.r0_cap
    }

    fn oracle(&self) -> Option<&dyn GeodesicOracle> {
        Some(self)
    }

    fn conventions(&self) -> &'static str {
        "Poincare disk, single chart `disk` with |x| < 1; metric 4/(1-|x|^2)^2 delta (curvature -1); \
         the coordinate boundary is never a chart margin; r0 is a configurable cap"
    }
}

impl GeodesicOracle for PoincareDisk {
    fn exp(&self, v: &Tangent) -> Point {
        let a = to_c(&v.base.coords);
        let w = to_c(&v.components) / (1.0 - a.norm_sqr());
        let n = w.norm();
        let z = if n > 0.0 { w * (n.tanh() / n) } else { w };
        Point::new(v.base.chart, from_c(from_origin(a, z)))
    }

    fn log(&self, p: &Point, q: &Point) -> Tangent {
        let a = to_c(&p.coords);
        let z = to_origin(a, to_c(&q.coords));
        let n = z.norm();
        let w = if n > 0.0 { z * (n.atanh() / n) } else { z };
        Tangent::new(p.clone(), from_c(w * (1.0 - a.norm_sqr())))
    }

    fn dist(&self, p: &Point, q: &Point) -> f64 {
        let z = to_origin(to_c(&p.coords), to_c(&q.coords));
        2.0 * z.norm().min(1.0).atanh()
    }

    fn transport_along_geodesic(&self, v: &Tangent, w: &Tangent) -> Tangent {
        let a = to_c(&v.base.coords);
        let scale = 1.0 - a.norm_sqr();
        let v0 = to_c(&v.components) / scale;
        let w0 = to_c(&w.components) / scale;
        let n = v0.norm();
        let z1 = if n > 0.0 { v0 * (n.tanh() / n) } else { v0 };
        // Along a diameter the transported vector keeps its Euclidean direction
        // and its length scales with the conformal factor.
        let w1 = w0 * (1.0 - z1.norm_sqr());
        let d = Complex::new(1.0, 0.0) + a.conj() * z1;
        let out = w1 * scale / (d * d);
        Tangent::new(
            Point::new(v.base.chart, from_c(from_origin(a, z1))),
            from_c(out),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mobius_maps_are_inverse() {
        let a = Complex::new(0.3, -0.5);
        let z = Complex::new(-0.2, 0.1);
        let back = from_origin(a, to_origin(a, z));
        assert_abs_diff_eq!((back - z).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn distance_from_origin() {
        let d = PoincareDisk::default();
        let o = Point::from_slice(ChartId(0), &[0.0, 0.0]);
        let q = Point::from_slice(ChartId(0), &[0.5, 0.0]);
        assert_abs_diff_eq!(d.dist(&o, &q), 2.0 * 0.5f64.atanh(), epsilon = 1e-15);
    }

    #[test]
    fn boundary_is_never_a_margin() {
        let d = PoincareDisk::default();
        let c = DVector::from_column_slice(&[0.999999, 0.0]);
        assert_eq!(d.domain_test(ChartId(0), &c), Domain::Inside);
        let c = DVector::from_column_slice(&[1.0, 0.0]);
        assert_eq!(d.domain_test(ChartId(0), &c), Domain::Outside);
    }
}
