mod common;

use common::*;
use nalgebra::{DMatrix, Vector3};
use pathlin_core::fixtures::{self, embedded_sphere_curve};
use pathlin_core::geometry::{self, MODEL_NAMES};
use pathlin_core::transport::{covariant_derivative, curve_velocities, transport_frame, transport_vector};
use pathlin_core::{ChartId, Frame, Grid, Manifold, Point, SampledCurve, Tangent, TransportConfig};

const CFG: TransportConfig = TransportConfig {
    substeps: 2,
    renormalize: false,
};

fn sphere() -> std::sync::Arc<dyn Manifold> {
    geometry::model("sphere2").unwrap()
}

/// Unit-speed great circle from the north pole through (1, 0, 0) and on
/// into the southern hemisphere.
fn meridian(n: usize, length: f64) -> SampledCurve {
    embedded_sphere_curve(Grid::uniform(0.0, length, n).unwrap(), 0, |t| {
        Vector3::new(t.sin(), 0.0, t.cos())
    })
}

#[test]
fn frame_along_meridian_keeps_tangent() {
    let m = sphere();
    let c = meridian(400, 2.5);
    let p = c.base().clone();
    let e1 = Tangent::new(p.clone(), dv(&[0.5, 0.0]));
    let e2 = Tangent::new(p.clone(), dv(&[0.0, 0.5]));
    let f0 = Frame::new(p, DMatrix::from_columns(&[e1.components, e2.components])).unwrap();
    let field = transport_frame(m.as_ref(), &c, &f0, &CFG).unwrap();
    assert!(!field.switch_log.is_empty());
    for (f, &t) in field.frames.iter().zip(c.grid.nodes()) {
        let tangent = Vector3::new(t.cos(), 0.0, -t.sin());
        let col1 = sphere_embed_tangent(&f.base, &f.columns.column(0).into_owned());
        assert!((col1 - tangent).norm() < 1e-6, "t = {t}");
        let g = m.gram(f);
        assert!((g - DMatrix::identity(2, 2)).amax() < 1e-6);
    }
}

#[test]
fn transported_column_and_geodesic_velocity_are_parallel() {
    let m = sphere();
    let c = meridian(400, 2.5);
    let field = transport_frame(m.as_ref(), &c, &m.default_frame(c.base()), &CFG).unwrap();
    let col: Vec<Tangent> = field.frames.iter().map(|f| f.column(1)).collect();
    for d in covariant_derivative(m.as_ref(), &c, &col).unwrap() {
        assert!(m.norm(&d) < 1e-5);
    }
    let vel = curve_velocities(m.as_ref(), &c).unwrap();
    for d in covariant_derivative(m.as_ref(), &c, &vel).unwrap() {
        assert!(m.norm(&d) < 1e-5);
    }
}

#[test]
fn euclidean_vectors_do_not_change() {
    let m = geometry::model("euclidean2").unwrap();
    let c = fixtures::random_curve(m.as_ref(), 3).unwrap().subsample(8).unwrap();
    let t = c.grid.nodes();
    let v = Tangent::new(c.points[10].clone(), dv(&[0.4, -1.3]));
    let w = transport_vector(m.as_ref(), &c, &v, t[10], t[300], &CFG).unwrap();
    assert!((w.components - dv(&[0.4, -1.3])).norm() < 1e-13);
}

fn edge(a: Vector3<f64>, b: Vector3<f64>, n: usize) -> SampledCurve {
    let grid = Grid::uniform(0.0, std::f64::consts::FRAC_PI_2, n).unwrap();
    embedded_sphere_curve(grid, 0, move |s| a * s.cos() + b * s.sin())
}

#[test]
fn octant_loop_rotates_by_a_quarter_turn() {
    let m = sphere();
    let corners = [Vector3::z(), Vector3::x(), Vector3::y(), Vector3::z()];
    let start = Vector3::new(0.0, 1.0, 0.0);
    let mut v = pathlin_core::geometry::sphere::tangent_from_embedded(&sphere_point(corners[0]), &start);
    for k in 0..3 {
        let c = edge(corners[k], corners[k + 1], 400);
        let v0 = m.push_tangent(&v, c.base().chart).unwrap();
        v = transport_vector(m.as_ref(), &c, &v0, 0.0, c.grid.end(), &CFG).unwrap();
    }
    let end = sphere_embed_tangent(&v.base, &v.components);
    // enclosed solid angle π/2: the start vector comes back rotated by π/2
    let angle = start.cross(&end).dot(&Vector3::z()).atan2(start.dot(&end));
    assert!((angle.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-6, "{angle}");
    assert!((end.norm() - 1.0).abs() < 1e-6);
}

#[test]
fn seeded_curves_preserve_norms() {
    for name in MODEL_NAMES {
        let m = geometry::model(name).unwrap();
        for seed in 0..50 {
            let c = fixtures::random_curve(m.as_ref(), seed).unwrap().subsample(8).unwrap();
            let f0 = m.default_frame(c.base());
            let field = transport_frame(m.as_ref(), &c, &f0, &CFG).unwrap();
            for f in &field.frames {
                let g = m.gram(f);
                assert!((g - DMatrix::identity(2, 2)).amax() < 1e-5, "{name} seed {seed}");
            }
        }
    }
}

#[test]
fn reversed_transport_inverts() {
    for name in MODEL_NAMES {
        let m = geometry::model(name).unwrap();
        for seed in 0..10 {
            let c = fixtures::random_curve(m.as_ref(), seed).unwrap().subsample(8).unwrap();
            let (a, b) = (c.grid.start() + 0.13, c.grid.end() - 0.071);
            let field = transport_frame(m.as_ref(), &c, &m.default_frame(c.base()), &CFG).unwrap();
            let pa = field.point_at(a);
            let v = Tangent::new(pa, dv(&[0.3, -0.2]));
            let w = transport_vector(m.as_ref(), &c, &v, a, b, &CFG).unwrap();
            assert!((m.norm(&w) - m.norm(&v)).abs() < 1e-6);
            let back = transport_vector(m.as_ref(), &c, &w, b, a, &CFG).unwrap();
            let back = m.push_tangent(&back, v.base.chart).unwrap();
            assert!((back.components - &v.components).norm() < 1e-5, "{name} seed {seed}");
        }
    }
}

/// Error of transporting a fixed vector from the pole along the meridian,
/// against the closed form (both tangent and normal components are kept).
fn meridian_transport_error(n: usize) -> f64 {
    let m = sphere();
    let length = 2.0;
    let c = meridian(n, length);
    let start = Vector3::new(0.6, 0.8, 0.0);
    let v = pathlin_core::geometry::sphere::tangent_from_embedded(c.base(), &start);
    let w = transport_vector(m.as_ref(), &c, &v, 0.0, length, &CFG).unwrap();
    let expected = Vector3::new(0.6 * length.cos(), 0.8, -0.6 * length.sin());
    (sphere_embed_tangent(&w.base, &w.components) - expected).norm()
}

#[test]
fn transport_converges_at_fourth_order() {
    let errors: Vec<f64> = [25, 50, 100].iter().map(|&n| meridian_transport_error(n)).collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.5, "{errors:?}");
    }
}

#[test]
fn starting_chart_does_not_matter() {
    let m = sphere();
    // tilted small circle, away from both poles
    let c = embedded_sphere_curve(Grid::uniform(0.0, 3.0, 400).unwrap(), 0, |t| {
        Vector3::new(t.cos(), t.sin(), 0.3 + 0.2 * t.sin())
    });
    let relabel = |chart: ChartId| SampledCurve {
        points: c.points.iter().map(|p| m.transition(p, chart).unwrap()).collect(),
        ..c.clone()
    };
    let (north, south) = (relabel(ChartId(0)), relabel(ChartId(1)));
    let v = pathlin_core::geometry::sphere::tangent_from_embedded(north.base(), &Vector3::new(0.0, 0.2, 1.0).normalize());
    let a = transport_vector(m.as_ref(), &north, &v, 0.0, 3.0, &CFG).unwrap();
    let vs = m.push_tangent(&v, ChartId(1)).unwrap();
    let b = transport_vector(m.as_ref(), &south, &vs, 0.0, 3.0, &CFG).unwrap();
    let b = m.push_tangent(&b, a.base.chart).unwrap();
    assert!((a.components - b.components).norm() < 1e-6);
}

#[test]
fn torus_seam_is_crossed_with_constant_frames() {
    let m = geometry::model("torus2").unwrap();
    let grid = Grid::uniform(0.0, 1.0, 200).unwrap();
    let points: Vec<Point> = grid
        .nodes()
        .iter()
        .map(|&t| m.best_chart(&Point::from_slice(ChartId(1), &[-0.5 + 6.0 * t, 1.0 + 2.0 * t])).unwrap())
        .collect();
    let c = SampledCurve::new(grid, points, 2, 0).unwrap();
    let field = transport_frame(m.as_ref(), &c, &Frame::coordinate(c.base().clone()), &CFG).unwrap();
    assert!(!field.switch_log.is_empty());
    for f in &field.frames {
        assert!((&f.columns - DMatrix::identity(2, 2)).amax() < 1e-12);
    }
}
