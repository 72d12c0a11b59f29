mod common;

use common::*;
use nalgebra::Vector3;
use pathlin_core::bundleflow::*;
use pathlin_core::error::Error;
use pathlin_core::fixtures::{self, great_circle, wiggly_sphere_curve};
use pathlin_core::geometry::{self, MODEL_NAMES};
use pathlin_core::linearize::p_forward;
use pathlin_core::transport::curve_velocities;
use pathlin_core::{ChartId, Grid, Manifold, Point, SampledCurve, Tangent, TransportConfig};
use rand::Rng;

fn model(name: &str) -> std::sync::Arc<dyn Manifold> {
    geometry::model(name).unwrap()
}

fn pt(chart: usize, x: f64, y: f64) -> Point {
    Point::from_slice(ChartId(chart), &[x, y])
}

/// A point within `fraction · r0(p)/2` of `p`, by reference distance.
fn nearby(name: &str, m: &dyn Manifold, p: &Point, fraction: f64, rng: &mut impl Rng) -> Point {
    let limit = fraction * 0.5 * m.r0(p);
    loop {
        let step = rng.gen_range(0.0..limit.min(1.0));
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let q = Point::new(p.chart, &p.coords + dv(&[a.cos(), a.sin()]) * (step * 0.5));
        if m.check_point(&q).is_ok() && reference_dist(name, p, &q) < limit {
            return m.settle(&q, q.chart);
        }
    }
}

fn pair(name: &str, m: &dyn Manifold, seed: u64) -> (Point, Point) {
    let mut rng = fixtures::rng(seed);
    let p = fixtures::random_point(m, &mut rng);
    let q = nearby(name, m, &p, 0.9, &mut rng);
    (p, q)
}

#[test]
fn flow_carries_disk_origin_to_target() {
    let m = model("hyperbolic2");
    let spec = CarrierFieldSpec::new(m.as_ref(), &pt(0, 0.0, 0.0), &pt(0, 0.3, 0.0), ExpSource::Oracle).unwrap();
    let x = phi(m.as_ref(), &spec, &spec.p).unwrap();
    assert!((&x.coords - dv(&[0.3, 0.0])).amax() < 1e-6, "{x:?}");
}

#[test]
fn field_at_base_is_log_of_target() {
    let m = model("hyperbolic2");
    let spec = CarrierFieldSpec::new(m.as_ref(), &pt(0, 0.0, 0.0), &pt(0, 0.3, 0.0), ExpSource::Oracle).unwrap();
    let y = carrier_field(m.as_ref(), &spec, &spec.p).unwrap();
    // Along a diameter the disk geodesic reaches coordinate tanh(s/2) at arc length s.
    assert!((&y.components - dv(&[0.3f64.atanh(), 0.0])).amax() < 1e-9, "{y:?}");
}

#[test]
fn flow_hits_target_on_seeded_pairs() {
    for name in MODEL_NAMES {
        let m = model(name);
        let mut worst: f64 = 0.0;
        for seed in 0..50 {
            let (p, q) = pair(name, m.as_ref(), seed);
            let spec = CarrierFieldSpec::new(m.as_ref(), &p, &q, ExpSource::Oracle).unwrap();
            let x = phi(m.as_ref(), &spec, &p).unwrap();
            worst = worst.max(reference_dist(name, &x, &q));
        }
        assert!(worst < 1e-6, "{name}: {worst:e}");
    }
}

#[test]
fn flow_group_law() {
    for name in MODEL_NAMES {
        let m = model(name);
        for seed in 0..10 {
            let (p, q) = pair(name, m.as_ref(), 100 + seed);
            let spec = CarrierFieldSpec::new(m.as_ref(), &p, &q, ExpSource::Oracle).unwrap();
            let mut rng = fixtures::rng(200 + seed);
            let x = nearby(name, m.as_ref(), &p, 1.2, &mut rng);
            let (s, t) = (rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
            let two = flow(m.as_ref(), &spec, &flow(m.as_ref(), &spec, &x, s).unwrap(), t).unwrap();
            let one = flow(m.as_ref(), &spec, &x, s + t).unwrap();
            let d = reference_dist(name, &one, &two);
            assert!(d < 1e-5, "{name} seed {seed}: {d:e}");
            let back = flow(m.as_ref(), &spec, &flow(m.as_ref(), &spec, &x, 1.0).unwrap(), -1.0).unwrap();
            assert!(reference_dist(name, &back, &x) < 1e-6);
        }
    }
}

#[test]
fn field_vanishes_exactly_outside_cutoff() {
    let m = model("sphere2");
    let p = pt(0, 0.0, 0.0);
    let spec = CarrierFieldSpec::new(m.as_ref(), &p, &sphere_point(Vector3::new(0.3f64.sin(), 0.0, 0.3f64.cos())), ExpSource::Oracle).unwrap();
    for angle in [spec.r_out, spec.r_out + 1e-9, 1.2, 2.0, 3.0] {
        let x = sphere_point(Vector3::new(angle.sin() * 0.6, angle.sin() * 0.8, angle.cos()));
        let y = carrier_field(m.as_ref(), &spec, &x).unwrap();
        assert!(y.components.iter().all(|&c| c == 0.0), "{angle}: {y:?}");
        assert_eq!(phi(m.as_ref(), &spec, &x).unwrap().coords, x.coords);
    }
    // r0 itself lies outside the support.
    let x = sphere_point(Vector3::new(m.r0(&p).sin(), 0.0, m.r0(&p).cos()));
    assert!(carrier_field(m.as_ref(), &spec, &x).unwrap().components.iter().all(|&c| c == 0.0));
}

#[test]
fn euclidean_field_is_a_translation_inside() {
    let m = model("euclidean2");
    let (p, q) = (pt(0, 0.5, -1.0), pt(0, 1.5, 0.5));
    let spec = CarrierFieldSpec::new(m.as_ref(), &p, &q, ExpSource::Oracle).unwrap();
    for x in [pt(0, 0.5, -1.0), pt(0, 2.0, 1.0), pt(0, -1.0, 0.0)] {
        let y = carrier_field(m.as_ref(), &spec, &x).unwrap();
        assert!((&y.components - dv(&[1.0, 1.5])).amax() < 1e-10);
        let z = phi(m.as_ref(), &spec, &x).unwrap();
        assert!((&z.coords - (&x.coords + dv(&[1.0, 1.5]))).amax() < 1e-10);
    }
}

#[test]
fn target_beyond_half_radius_is_rejected() {
    let m = model("sphere2");
    let far = sphere_point(Vector3::new(1.0f64.sin(), 0.0, 1.0f64.cos()));
    let err = CarrierFieldSpec::new(m.as_ref(), &pt(0, 0.0, 0.0), &far, ExpSource::Oracle).unwrap_err();
    assert!(matches!(err, Error::OutOfInjectivityRange { .. }));
}

fn sphere_curve(seed: u64) -> SampledCurve {
    let m = model("sphere2");
    let c = fixtures::random_curve(m.as_ref(), seed).unwrap();
    c.subsample(fixtures::FINE_INTERVALS / 400).unwrap()
}

#[test]
fn trivialization_roundtrip_on_the_sphere() {
    let m = model("sphere2");
    let gamma = sphere_curve(4);
    let p = gamma.base().clone();
    let x = sphere_embed(&p);
    let axis = x.cross(&Vector3::new(0.3, -0.5, 0.8)).normalize();
    let target = sphere_point(sphere_exp(x, axis * 0.3));
    assert!((sphere_dist(&p, &target) - 0.3).abs() < 1e-12);
    let chart = TrivializationChart::new(m.as_ref(), &p, ExpSource::Oracle).unwrap();
    let sigma = trivialize(m.as_ref(), &chart, &target, &gamma).unwrap();
    assert!(sphere_dist(sigma.base(), &target) < 1e-6);
    let (base, back) = untrivialize(m.as_ref(), &chart, &sigma).unwrap();
    assert!(sphere_dist(&base, &target) < 1e-6);
    let worst = gamma
        .points
        .iter()
        .zip(&back.points)
        .map(|(a, b)| sphere_dist(a, b))
        .fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst:e}");
}

#[test]
fn trivialization_at_base_is_identity() {
    let m = model("sphere2");
    let gamma = sphere_curve(6);
    let chart = TrivializationChart::new(m.as_ref(), gamma.base(), ExpSource::Oracle).unwrap();
    let sigma = trivialize(m.as_ref(), &chart, gamma.base(), &gamma).unwrap();
    for (a, b) in gamma.points.iter().zip(&sigma.points) {
        assert!(sphere_dist(a, b) < 1e-12);
    }
}

#[test]
fn euclidean_trivialization_translates() {
    let m = model("euclidean2");
    let grid = Grid::uniform(0.0, 1.0, 50).unwrap();
    let points = grid.nodes().iter().map(|&t| pt(0, t, 0.5 * t * t)).collect();
    let gamma = SampledCurve::new(grid, points, 2, 0).unwrap();
    let chart = TrivializationChart::new(m.as_ref(), gamma.base(), ExpSource::Oracle).unwrap();
    let sigma = trivialize(m.as_ref(), &chart, &pt(0, 0.3, -0.2), &gamma).unwrap();
    for (a, b) in gamma.points.iter().zip(&sigma.points) {
        assert!((&b.coords - &a.coords - dv(&[0.3, -0.2])).amax() < 1e-10);
    }
}

#[test]
fn mapping_charts_invert() {
    let m = model("sphere2");
    let g1 = sphere_curve(8);
    let f = SampledCurve {
        points: g1
            .points
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let x = sphere_embed(p);
                let u = x.cross(&Vector3::new(1.0, 0.2, -0.4)).normalize();
                sphere_point(sphere_exp(x, u * (0.4 + 0.3 * (j as f64 * 0.05).sin())))
            })
            .collect(),
        ..g1.clone()
    };
    let section = mapping_chart_in(m.as_ref(), &g1, &f, ExpSource::Oracle).unwrap();
    for ((a, b), v) in g1.points.iter().zip(&f.points).zip(&section) {
        assert!((m.norm(v) - sphere_dist(a, b)).abs() < 1e-9);
    }
    let back = mapping_chart_out(m.as_ref(), &g1, &section, ExpSource::Oracle).unwrap();
    for (a, b) in f.points.iter().zip(&back.points) {
        assert!(sphere_dist(a, b) < 1e-8);
    }
    let zero = mapping_chart_in(m.as_ref(), &g1, &g1, ExpSource::Oracle).unwrap();
    assert!(zero.iter().all(|v| v.components.amax() < 1e-12));

    // Transition through a second, nearby reference curve.
    let shift: Vec<Tangent> = g1
        .points
        .iter()
        .map(|p| Tangent::new(p.clone(), dv(&[0.05, -0.03])))
        .collect();
    let g2 = mapping_chart_out(m.as_ref(), &g1, &shift, ExpSource::Oracle).unwrap();
    let s2 = mapping_chart_in(m.as_ref(), &g2, &f, ExpSource::Oracle).unwrap();
    let f2 = mapping_chart_out(m.as_ref(), &g2, &s2, ExpSource::Oracle).unwrap();
    let s1 = mapping_chart_in(m.as_ref(), &g1, &f2, ExpSource::Oracle).unwrap();
    for (a, b) in f.points.iter().zip(&f2.points) {
        assert!(sphere_dist(a, b) < 1e-7);
    }
    for (a, b) in section.iter().zip(&s1) {
        let b = m.push_tangent(b, a.base.chart).unwrap();
        assert!((&a.components - &b.components).amax() < 1e-7);
    }
}

#[test]
fn euclidean_section_is_a_difference() {
    let m = model("euclidean2");
    let grid = Grid::uniform(0.0, 1.0, 10).unwrap();
    let g = SampledCurve::new(grid.clone(), grid.nodes().iter().map(|&t| pt(0, t, 0.0)).collect(), 1, 0).unwrap();
    let f = SampledCurve::new(grid.clone(), grid.nodes().iter().map(|&t| pt(0, t, t * t)).collect(), 1, 0).unwrap();
    let s = mapping_chart_in(m.as_ref(), &g, &f, ExpSource::Oracle).unwrap();
    for (v, &t) in s.iter().zip(grid.nodes()) {
        assert!((&v.components - dv(&[0.0, t * t])).amax() < 1e-14);
    }
}

#[test]
fn mapping_chart_reports_offending_node() {
    let m = model("sphere2");
    let grid = Grid::uniform(0.0, 1.0, 10).unwrap();
    let g = SampledCurve::new(grid.clone(), vec![pt(0, 0.0, 0.0); 11], 1, 0).unwrap();
    let mut points = vec![pt(0, 0.1, 0.0); 11];
    points[7] = sphere_point(Vector3::new(2.0f64.sin(), 0.0, 2.0f64.cos()));
    let f = SampledCurve::new(grid, points, 1, 0).unwrap();
    match mapping_chart_in(m.as_ref(), &g, &f, ExpSource::Oracle).unwrap_err() {
        Error::OutOfInjectivityRange { node, .. } => assert_eq!(node, Some(7)),
        e => panic!("{e}"),
    }
}

fn speeds(m: &dyn Manifold, c: &SampledCurve) -> Vec<f64> {
    curve_velocities(m, c).unwrap().iter().map(|v| m.norm(v)).collect()
}

#[test]
fn normalization_of_a_straight_line() {
    let m = model("euclidean2");
    let grid = Grid::uniform(0.0, 1.0, 100).unwrap();
    let c = SampledCurve::new(grid.clone(), grid.nodes().iter().map(|&t| pt(0, 0.2 + 2.0 * t, 0.1)).collect(), 3, 0).unwrap();
    let u = arclength_normalize(m.as_ref(), &c, 1e-6).unwrap();
    assert!((u.grid.end() - 2.0).abs() < 1e-12);
    assert!(speeds(m.as_ref(), &u).iter().all(|s| (s - 1.0).abs() < 1e-10));
    for (p, &s) in u.points.iter().zip(u.grid.nodes()) {
        assert!((&p.coords - dv(&[0.2 + s, 0.1])).amax() < 1e-12);
    }
}

#[test]
fn normalized_fast_great_circle_linearizes_to_unit_constant() {
    let m = model("sphere2");
    let c = great_circle(3.0, 400).unwrap();
    let u = arclength_normalize(m.as_ref(), &c, 1e-6).unwrap();
    assert!((u.grid.end() - 3.0).abs() < 1e-8);
    let frame = m.default_frame(u.base());
    let v = p_forward(m.as_ref(), &u, &frame, &TransportConfig::default()).unwrap();
    let first = v.tangent_curve.components[0].clone();
    assert!((first.norm() - 1.0).abs() < 1e-5);
    for c in &v.tangent_curve.components {
        assert!((c - &first).amax() < 1e-5);
    }
}

#[test]
fn normalization_is_unit_speed_and_idempotent() {
    for name in MODEL_NAMES {
        let m = model(name);
        let mut normalized = 0;
        for seed in 0..10 {
            let c = fixtures::random_curve(m.as_ref(), seed).unwrap().subsample(8).unwrap();
            let u = match arclength_normalize(m.as_ref(), &c, 0.1) {
                Ok(u) => u,
                Err(Error::NotImmersed { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            normalized += 1;
            let worst = speeds(m.as_ref(), &u).iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-4, "{name} seed {seed}: {worst:e}");
            assert_eq!(u.points[0], c.points[0]);
            let uu = arclength_normalize(m.as_ref(), &u, 0.1).unwrap();
            let drift = u
                .points
                .iter()
                .zip(&uu.points)
                .map(|(a, b)| reference_dist(name, a, b))
                .fold(0.0, f64::max);
            assert!(drift < 1e-5, "{name} seed {seed}: {drift:e}");
        }
        assert!(normalized >= 8, "{name}: {normalized}");
    }
}

#[test]
fn normalization_of_a_wiggly_curve_is_idempotent() {
    let m = model("sphere2");
    let u = arclength_normalize(m.as_ref(), &wiggly_sphere_curve(400).unwrap(), 1e-6).unwrap();
    let uu = arclength_normalize(m.as_ref(), &u, 1e-6).unwrap();
    let drift = u.points.iter().zip(&uu.points).map(|(a, b)| sphere_dist(a, b)).fold(0.0, f64::max);
    assert!(drift < 1e-5, "{drift:e}");
    // The resampled points agree with a much finer normalization.
    let fine = arclength_normalize(m.as_ref(), &wiggly_sphere_curve(3200).unwrap(), 1e-6).unwrap();
    for (k, p) in u.points.iter().enumerate() {
        assert!(sphere_dist(p, &fine.points[8 * k]) < 1e-7);
    }
}

#[test]
fn unit_speed_curve_is_a_fixed_point() {
    let m = model("sphere2");
    let c = great_circle(1.0, 400).unwrap();
    let u = arclength_normalize(m.as_ref(), &c, 1e-6).unwrap();
    for (a, b) in c.points.iter().zip(&u.points) {
        assert!(sphere_dist(a, b) < 1e-6);
    }
}

#[test]
fn two_sided_normalization_keeps_the_basepoint() {
    let m = model("sphere2");
    let grid = Grid::uniform(-1.0, 1.0, 400).unwrap();
    let c = fixtures::embedded_sphere_curve(grid, 200, |t| Vector3::new((t + 0.3 * t * t).sin(), 0.2 * t, 1.0));
    let u = arclength_normalize(m.as_ref(), &c, 1e-6).unwrap();
    assert_eq!(u.base(), c.base());
    let worst = speeds(m.as_ref(), &u).iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst:e}");
}

#[test]
fn stalled_curve_is_not_immersed() {
    let m = model("euclidean2");
    let grid = Grid::uniform(0.0, 1.0, 40).unwrap();
    let points = grid.nodes().iter().map(|&t| pt(0, (t - 0.5).powi(3), 0.0)).collect();
    let c = SampledCurve::new(grid, points, 3, 0).unwrap();
    match arclength_normalize(m.as_ref(), &c, 1e-3).unwrap_err() {
        Error::NotImmersed { node, .. } => assert!((18..=22).contains(&node), "{node}"),
        e => panic!("{e}"),
    }
}

#[test]
fn shooting_matches_closed_forms() {
    let m = model("sphere2");
    let p = sphere_point(Vector3::new(0.3, -0.2, 0.9));
    let x = sphere_embed(&p);
    for (a, b) in [(0.4, 0.1), (-0.3, 0.25), (0.5, -0.4)] {
        let v = Tangent::new(p.clone(), dv(&[a, b]));
        let q = shooting_exp(m.as_ref(), &v).unwrap();
        let expected = sphere_exp(x, sphere_embed_tangent(&p, &v.components));
        assert!((sphere_embed(&q) - expected).norm() < 1e-7);
        let w = shooting_log(m.as_ref(), &p, &q).unwrap();
        let w = m.push_tangent(&w, p.chart).unwrap();
        assert!((&w.components - &v.components).amax() < 1e-6);
    }
}

#[test]
fn shooting_flow_agrees_with_oracle_flow() {
    let m = model("hyperbolic2");
    let (p, q) = (pt(0, 0.1, 0.0), pt(0, 0.2, 0.25));
    let a = CarrierFieldSpec::new(m.as_ref(), &p, &q, ExpSource::Shooting).unwrap();
    let x = phi(m.as_ref(), &a, &p).unwrap();
    assert!(disk_dist(&x, &q) < 1e-6);
}
