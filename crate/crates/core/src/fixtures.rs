//! Seeded test curves shared by the test suites and the `check` command.

use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cubemaps::CubeLinearization;
use crate::error::Result;
use crate::geometry::{sphere, ChartId, Manifold, Point};
use crate::linearize::{p_inverse, TangentCurve};
use crate::numerics::Grid;
use crate::transport::{SampledCurve, TransportConfig};

/// Intervals of the fine construction grid that seeded curves are cut from.
pub const FINE_INTERVALS: usize = 3200;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random basepoint well inside the model's trusted region.
pub fn random_point(model: &dyn Manifold, rng: &mut impl Rng) -> Point {
    match model.name() {
        "sphere2" => {
            let x = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let x = if x.norm() < 1e-3 { Vector3::z() } else { x.normalize() };
            sphere::from_embedded(&x)
        }
        "hyperbolic2" => {
            let r = 0.5 * rng.gen::<f64>().sqrt();
            let a = rng.gen_range(0.0..2.0 * PI);
            Point::from_slice(ChartId(0), &[r * a.cos(), r * a.sin()])
        }
        "torus2" => {
            let x = Point::from_slice(ChartId(1), &[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]);
            model.best_chart(&x).unwrap_or(x)
        }
        _ => Point::from_slice(ChartId(0), &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]),
    }
}

/// Coefficients of a random polynomial `v(t) = Σ c_k t^k` of degree ≤ 3 with
/// decaying magnitudes.
pub fn random_poly(dim: usize, rng: &mut impl Rng) -> Vec<DVector<f64>> {
    let degree = rng.gen_range(0..=3usize);
    let scales = [0.8, 0.6, 0.4, 0.3];
    (0..=degree)
        .map(|k| DVector::from_fn(dim, |_, _| scales[k] * rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn eval_monomials(coeffs: &[DVector<f64>], t: f64) -> DVector<f64> {
    coeffs
        .iter()
        .rev()
        .fold(DVector::zeros(coeffs[0].len()), |acc, c| acc * t + c)
}

/// Seeded random tangent curve; even seeds live on `[0, 1]`, odd seeds on
/// `[−1, 1]` with the basepoint in the middle.
pub fn random_tangent_curve(model: &dyn Manifold, seed: u64, intervals: usize) -> Result<TangentCurve> {
    let mut rng = rng(seed);
    let p = random_point(model, &mut rng);
    let coeffs = random_poly(model.dim(), &mut rng);
    let (grid, base) = if seed.is_multiple_of(2) {
        (Grid::uniform(0.0, 1.0, intervals)?, 0)
    } else {
        (Grid::uniform(-1.0, 1.0, intervals)?, intervals / 2)
    };
    TangentCurve::from_fn(model.default_frame(&p), grid, base, |t| eval_monomials(&coeffs, t))
}

/// Seeded smooth curve, synthesized on the fine grid.
pub fn random_curve(model: &dyn Manifold, seed: u64) -> Result<SampledCurve> {
    let v = random_tangent_curve(model, seed, FINE_INTERVALS)?;
    p_inverse(model, &v, &TransportConfig::default())
}

/// Seeded random cube linearization on `[−1, 1]²`: `v1` of degree ≤ 3 in
/// `s₁`, `v2` bilinear in `(s₁, s₂)`.
pub fn random_cube_linearization(
    model: &dyn Manifold,
    seed: u64,
    intervals: usize,
) -> Result<CubeLinearization> {
    let mut rng = rng(seed.wrapping_add(0x5eed));
    let p = random_point(model, &mut rng);
    let m = model.dim();
    let c1: Vec<DVector<f64>> = random_poly(m, &mut rng).into_iter().map(|c| c * 0.7).collect();
    let c2: Vec<DVector<f64>> = (0..4)
        .map(|k| DVector::from_fn(m, |_, _| [0.5, 0.2, 0.2, 0.1][k] * rng.gen_range(-1.0..1.0)))
        .collect();
    let grid = Grid::uniform(-1.0, 1.0, intervals)?;
    let base = intervals / 2;
    let v1 = TangentCurve::from_fn(model.default_frame(&p), grid.clone(), base, |t| eval_monomials(&c1, t))?;
    let v2 = grid
        .nodes()
        .iter()
        .map(|&a| {
            grid.nodes()
                .iter()
                .map(|&b| &c2[0] + &c2[1] * a + &c2[2] * b + &c2[3] * (a * b))
                .collect()
        })
        .collect();
    CubeLinearization::new(v1, grid, v2, base)
}

/// Sphere curve sampled from a closed form `t ↦ X(t)/|X(t)|` in `ℝ³`.
pub fn embedded_sphere_curve(grid: Grid, base_index: usize, f: impl Fn(f64) -> Vector3<f64>) -> SampledCurve {
    let points = grid
        .nodes()
        .iter()
        .map(|&t| sphere::from_embedded(&f(t).normalize()))
        .collect();
    SampledCurve {
        grid,
        points,
        order: 4,
        base_index,
    }
}

/// Great circle from the north pole through `(1, 0, 0)` at the given speed,
/// on `[0, 1]`.
pub fn great_circle(speed: f64, intervals: usize) -> Result<SampledCurve> {
    let grid = Grid::uniform(0.0, 1.0, intervals)?;
    Ok(embedded_sphere_curve(grid, 0, |t| {
        Vector3::new((speed * t).sin(), 0.0, (speed * t).cos())
    }))
}

/// A non-geodesic sphere curve with several oscillations, on `[0, 1]`.
pub fn wiggly_sphere_curve(intervals: usize) -> Result<SampledCurve> {
    let grid = Grid::uniform(0.0, 1.0, intervals)?;
    Ok(embedded_sphere_curve(grid, 0, |t| {
        let a = 1.4 * t + 0.2;
        let w = 0.35 * (7.0 * t).sin() + 0.15 * (13.0 * t).cos();
        Vector3::new(a.sin() * w.cos(), w.sin(), a.cos() * w.cos())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{self, MODEL_NAMES};

    #[test]
    fn seeds_are_reproducible() {
        for name in MODEL_NAMES {
            let model = geometry::model(name).unwrap();
            let a = random_tangent_curve(model.as_ref(), 5, 40).unwrap();
            let b = random_tangent_curve(model.as_ref(), 5, 40).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.base_index, 20);
        }
    }

    #[test]
    fn great_circle_starts_at_pole() {
        let c = great_circle(1.0, 10).unwrap();
        assert!(c.base().coords.norm() < 1e-15);
    }
}
