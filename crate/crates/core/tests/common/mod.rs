//! Closed-form references written independently of the library's oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};
use pathlin_core::{ChartId, Point};

/// Inverse stereographic projection; chart 0 projects from the south pole,
/// chart 1 from the north pole.
pub fn sphere_embed(p: &Point) -> Vector3<f64> {
    let (x, y) = (p.coords[0], p.coords[1]);
    let d = 1.0 + x * x + y * y;
    let z = (1.0 - x * x - y * y) / d;
    Vector3::new(2.0 * x / d, 2.0 * y / d, if p.chart == ChartId(0) { z } else { -z })
}

pub fn sphere_point(x: Vector3<f64>) -> Point {
    let x = x.normalize();
    if x.z >= 0.0 {
        Point::from_slice(ChartId(0), &[x.x / (1.0 + x.z), x.y / (1.0 + x.z)])
    } else {
        Point::from_slice(ChartId(1), &[x.x / (1.0 - x.z), x.y / (1.0 - x.z)])
    }
}

pub fn sphere_dist(a: &Point, b: &Point) -> f64 {
    let (x, y) = (sphere_embed(a), sphere_embed(b));
    x.cross(&y).norm().atan2(x.dot(&y))
}

/// Embedded image of a tangent vector, by differentiating the embedding.
pub fn sphere_embed_tangent(p: &Point, v: &DVector<f64>) -> Vector3<f64> {
    let h = 1e-6;
    let plus = Point::new(p.chart, &p.coords + v * h);
    let minus = Point::new(p.chart, &p.coords - v * h);
    (sphere_embed(&plus) - sphere_embed(&minus)) / (2.0 * h)
}

/// Great-circle exponential in `ℝ³`.
pub fn sphere_exp(x: Vector3<f64>, v: Vector3<f64>) -> Vector3<f64> {
    let n = v.norm();
    if n == 0.0 {
        return x;
    }
    x * n.cos() + v * (n.sin() / n)
}

pub fn disk_dist(a: &Point, b: &Point) -> f64 {
    let (a, b) = (&a.coords, &b.coords);
    // sinh(d/2) form; acosh(1 + x) cannot resolve small distances
    let den = (1.0 - a.norm_squared()) * (1.0 - b.norm_squared());
    2.0 * ((a - b).norm() / den.sqrt()).asinh()
}

pub fn torus_dist(a: &Point, b: &Point) -> f64 {
    let w = |x: f64| x - 2.0 * PI * (x / (2.0 * PI)).round();
    let d = &a.coords - &b.coords;
    (w(d[0]).powi(2) + w(d[1]).powi(2)).sqrt()
}

pub fn plane_dist(a: &Point, b: &Point) -> f64 {
    (&a.coords - &b.coords).norm()
}

/// Reference distance for a named model.
pub fn reference_dist(model: &str, a: &Point, b: &Point) -> f64 {
    match model {
        "sphere2" => sphere_dist(a, b),
        "hyperbolic2" => disk_dist(a, b),
        "torus2" => torus_dist(a, b),
        _ => plane_dist(a, b),
    }
}

pub fn dv(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}
