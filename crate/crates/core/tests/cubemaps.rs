mod common;

use common::*;
use nalgebra::Vector3;
use pathlin_core::cubemaps::*;
use pathlin_core::geometry::{self, MODEL_NAMES};
use pathlin_core::linearize::p_forward;
use pathlin_core::{fixtures, ChartId, Frame, Grid, Manifold, Point, TransportConfig};

const CFG: TransportConfig = TransportConfig {
    substeps: 2,
    renormalize: false,
};

fn cube(n: usize, f: impl Fn(f64, f64) -> Point) -> CubeSample {
    let g = Grid::uniform(-1.0, 1.0, n).unwrap();
    let points = g
        .nodes()
        .iter()
        .map(|&a| g.nodes().iter().map(|&b| f(a, b)).collect())
        .collect();
    CubeSample::new(g.clone(), g, points, (n / 2, n / 2)).unwrap()
}

#[test]
fn affine_square_in_the_plane() {
    let m = geometry::model("euclidean2").unwrap();
    let alpha = cube(20, |a, b| Point::from_slice(ChartId(0), &[0.5 + 2.0 * a - b, 1.0 + 0.3 * b]));
    let lin = p2_forward(m.as_ref(), &alpha, &Frame::coordinate(alpha.basepoint().clone()), &CFG).unwrap();
    assert!(lin.v1.components.iter().all(|c| (c - dv(&[2.0, 0.0])).amax() < 1e-12));
    assert!(lin.v2.iter().flatten().all(|c| (c - dv(&[-1.0, 0.3])).amax() < 1e-12));
    let back = p2_inverse(m.as_ref(), &lin, &CFG).unwrap();
    assert!(cube_distance(m.as_ref(), &back, &alpha).unwrap() < 1e-12);
}

#[test]
fn map_constant_in_second_variable_has_no_second_component() {
    let m = geometry::model("sphere2").unwrap();
    let alpha = cube(40, |a, _| sphere_point(Vector3::new(a.sin(), 0.3, a.cos())));
    let lin = p2_forward(m.as_ref(), &alpha, &m.default_frame(alpha.basepoint()), &CFG).unwrap();
    assert!(lin.v2.iter().flatten().all(|c| c.amax() < 1e-12));
    let back = p2_inverse(m.as_ref(), &lin, &CFG).unwrap();
    for row in &back.points {
        for q in row {
            assert!(sphere_dist(q, &row[back.base.1]) < 1e-12);
        }
    }
}

#[test]
fn degenerate_cube_linearizes_to_zero() {
    let m = geometry::model("hyperbolic2").unwrap();
    let p = Point::from_slice(ChartId(0), &[0.2, -0.3]);
    let alpha = cube(16, |_, _| p.clone());
    let lin = p2_forward(m.as_ref(), &alpha, &m.default_frame(&p), &CFG).unwrap();
    assert!(lin.v1.components.iter().all(|c| c.amax() < 1e-10));
    assert!(lin.v2.iter().flatten().all(|c| c.amax() < 1e-10));
}

/// `α(s₁, s₂) = Exp_p(s₁u₁ + s₂u₂)` for orthonormal embedded `u₁, u₂` scaled
/// by `a`.
fn exp_patch(n: usize, a: f64) -> (CubeSample, Vector3<f64>, Vector3<f64>) {
    let x = Vector3::new(0.1, 0.2, 1.0).normalize();
    let u1 = Vector3::new(1.0, 0.0, -0.1).cross(&x).normalize();
    let u2 = x.cross(&u1);
    let alpha = cube(n, |s1, s2| sphere_point(sphere_exp(x, (u1 * s1 + u2 * s2) * a)));
    (alpha, u1, u2)
}

#[test]
fn exp_patch_second_component_follows_the_jacobi_field() {
    let m = geometry::model("sphere2").unwrap();
    let a = 0.4;
    let (alpha, u1, u2) = exp_patch(200, a);
    let p = alpha.basepoint().clone();
    let f0 = m.default_frame(&p);
    let lin = p2_forward(m.as_ref(), &alpha, &f0, &CFG).unwrap();
    // frame0 components of the embedded vectors u₁, u₂
    let e: Vec<Vector3<f64>> = (0..2).map(|i| sphere_embed_tangent(&p, &f0.columns.column(i).into_owned())).collect();
    let comp = |u: Vector3<f64>| dv(&[u.dot(&e[0]), u.dot(&e[1])]);
    for (i, &s1) in alpha.grid1.nodes().iter().enumerate() {
        let th = (s1 * a).abs();
        let factor = if th == 0.0 { 1.0 } else { th.sin() / th };
        let expected = comp(u2) * (a * factor);
        assert!((&lin.v2[i][alpha.base.1] - expected).amax() < 1e-5, "s1 = {s1}");
        assert!((&lin.v1.components[i] - comp(u1) * a).amax() < 1e-5);
    }
    let back = p2_inverse(m.as_ref(), &lin, &CFG).unwrap();
    assert!(cube_distance(m.as_ref(), &back, &alpha).unwrap() < 1e-4);
}

#[test]
fn first_component_is_the_boundary_linearization() {
    let m = geometry::model("sphere2").unwrap();
    let (alpha, _, _) = exp_patch(40, 0.5);
    let f0 = m.default_frame(alpha.basepoint());
    let lin = p2_forward(m.as_ref(), &alpha, &f0, &CFG).unwrap();
    let v1 = p_forward(m.as_ref(), &alpha.first_line(), &f0, &CFG).unwrap().tangent_curve;
    assert_eq!(lin.v1, v1);
}

fn roundtrip_errors(m: &dyn Manifold, seed: u64, n: usize) -> (f64, f64) {
    let lin = fixtures::random_cube_linearization(m, seed, n).unwrap();
    let alpha = p2_inverse(m, &lin, &CFG).unwrap();
    let lin2 = p2_forward(m, &alpha, &lin.v1.frame0, &CFG).unwrap();
    let alpha2 = p2_inverse(m, &lin2, &CFG).unwrap();
    (linearization_distance(&lin, &lin2), cube_distance(m, &alpha, &alpha2).unwrap())
}

#[test]
fn seeded_cubes_roundtrip_on_every_model() {
    for name in MODEL_NAMES {
        let m = geometry::model(name).unwrap();
        let (dl, da) = roundtrip_errors(m.as_ref(), 1, 200);
        assert!(dl < 1e-4 && da < 1e-4, "{name}: {dl:e} {da:e}");
    }
}
