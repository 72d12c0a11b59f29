//! The invariant suite behind `pathlin check`: a seeded sample of every
//! module's properties, one row per check. Models run concurrently and rows
//! are printed in a fixed order, without timings, so the table is a pure
//! function of the seed and the model list.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use pathlin_core::bundleflow::{
    arclength_normalize, carrier_field, mapping_chart_in, mapping_chart_out, phi, trivialize,
    untrivialize, CarrierFieldSpec, ExpSource, TrivializationChart,
};
use pathlin_core::cubemaps::{linearization_distance, p2_forward, p2_inverse};
use pathlin_core::fixtures;
use pathlin_core::linearize::{
    basis_independence_check, curve_distance, p_inverse, roundtrip_check, TangentCurve,
};
use pathlin_core::numerics::{PolyBasis, PolyCoeffs};
use pathlin_core::polycurves::{conjugation_residual, make_polynomial_like};
use pathlin_core::{Frame, Grid, Manifold, Point, Result, SampledCurve, Tangent, TransportConfig};
use rand::Rng;

use crate::commands::unit_speed_error;
use crate::report::Report;

const CUBE_INTERVALS: usize = 64;

#[derive(Debug, Clone)]
pub struct Row {
    pub model: String,
    pub name: &'static str,
    pub value: std::result::Result<f64, String>,
    pub tolerance: f64,
}

impl Row {
    pub fn pass(&self) -> bool {
        matches!(self.value, Ok(v) if v < self.tolerance)
    }
}

struct Suite<'a> {
    model: &'a dyn Manifold,
    rows: Vec<Row>,
}

impl Suite<'_> {
    fn run(&mut self, name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<f64>) {
        self.rows.push(Row {
            model: self.model.name().into(),
            name,
            value: f().map_err(|e| e.to_string()),
            tolerance,
        });
    }
}

/// A point at distance below `fraction · r0(p)/2` from `p`, by oracle.
fn nearby(model: &dyn Manifold, p: &Point, fraction: f64, rng: &mut impl Rng) -> Result<Point> {
    let e = model.default_frame(p);
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = rng.gen_range(0.2..1.0) * fraction * 0.5 * model.r0(p).min(2.0);
    let v = e.columns.column(0) * (r * a.cos()) + e.columns.column(1) * (r * a.sin());
    model.exp_oracle(&Tangent::new(p.clone(), v))
}

fn rotated(model: &dyn Manifold, p: &Point, angle: f64) -> Result<Frame> {
    let e = model.default_frame(p);
    let (s, c) = angle.sin_cos();
    Frame::new(p.clone(), &e.columns * DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
}

/// A curve whose speed stays between 1 and 1.5: transport preserves the
/// length of the orthonormal components.
fn immersed_curve(model: &dyn Manifold, p: &Point, cfg: &TransportConfig) -> Result<SampledCurve> {
    let grid = Grid::uniform(0.0, 1.0, 400)?;
    let v = TangentCurve::from_fn(model.default_frame(p), grid, 0, |t| {
        DVector::from_column_slice(&[1.0 + 0.3 * t, 0.5 * (2.0 * t).sin()])
    })?;
    p_inverse(model, &v, cfg)
}

fn model_suite(model: &dyn Manifold, seed: u64, cfg: &TransportConfig) -> Vec<Row> {
    let mut s = Suite {
        model,
        rows: Vec::new(),
    };
    let mut rng = fixtures::rng(seed);
    let p = fixtures::random_point(model, &mut rng);

    s.run("geometry.chart_transition_roundtrip", 1e-10, || {
        let mut worst: f64 = 0.0;
        for c in model.charts() {
            if let Ok(x) = model.transition(&p, c.id) {
                let back = model.transition(&x, p.chart)?;
                worst = worst.max((&back.coords - &p.coords).amax());
            }
        }
        Ok(worst)
    });
    let q = nearby(model, &p, 0.9, &mut rng);
    s.run("geometry.exp_log_roundtrip", 1e-10, || {
        let q = q.clone()?;
        let back = model.exp_oracle(&model.log_oracle(&p, &q)?)?;
        Ok(model.point_distance(&back, &q)?.0)
    });

    let curve = fixtures::random_curve(model, seed).and_then(|c| c.subsample(8));
    let roundtrip = curve.as_ref().map_err(Clone::clone).and_then(|c| roundtrip_check(model, c, cfg));
    s.run("linearize.roundtrip", 1e-5, || Ok(roundtrip.clone()?.max_error));
    s.run("linearize.norm_drift", 1e-5, || Ok(roundtrip.clone()?.norm_drift));
    s.run("linearize.basis_independence", 1e-6, || {
        let c = curve.clone()?;
        let fb = rotated(model, c.base(), 0.7)?;
        basis_independence_check(model, &c, &model.default_frame(c.base()), &fb, cfg)
    });

    s.run("cubemaps.roundtrip", 1e-4, || {
        let lin = fixtures::random_cube_linearization(model, seed, CUBE_INTERVALS)?;
        let cube = p2_inverse(model, &lin, cfg)?;
        let again = p2_forward(model, &cube, &lin.v1.frame0, cfg)?;
        Ok(linearization_distance(&lin, &again))
    });

    s.run("polycurves.covariant_power", 1e-4, || {
        let coeffs = (0..3)
            .map(|k| DVector::from_fn(2, |i, _| [0.8, 0.4, 0.3][k] * rng_value(seed, 2 * k + i)))
            .collect();
        let coeffs = PolyCoeffs::new(PolyBasis::Monomial, (0.0, 1.0), coeffs)?;
        let grid = Grid::uniform(0.0, 1.0, 400)?;
        let poly = make_polynomial_like(model, &model.default_frame(&p), &coeffs, &grid, cfg)?;
        poly.residual.ok_or(pathlin_core::Error::GridTooCoarse {
            nodes: grid.len(),
            required: 13,
        })
    });
    s.run("polycurves.conjugation", 1e-4, || conjugation_residual(model, &curve.clone()?, cfg));

    let spec = q
        .clone()
        .and_then(|q| CarrierFieldSpec::new(model, &p, &q, ExpSource::Oracle));
    s.run("bundleflow.phi_p_to_q", 1e-6, || {
        let spec = spec.clone()?;
        Ok(model.point_distance(&phi(model, &spec, &p)?, &spec.q)?.0)
    });
    s.run("bundleflow.field_beyond_cutoff", f64::MIN_POSITIVE, || {
        let spec = spec.clone()?;
        let e = model.default_frame(&p).columns.column(1) * (1.1 * spec.r_out);
        let far = model.exp_oracle(&Tangent::new(p.clone(), e))?;
        Ok(model.norm(&carrier_field(model, &spec, &far)?))
    });

    let gamma = curve.clone().and_then(|c| c.subsample(5));
    let m = gamma.clone().and_then(|g| nearby(model, g.base(), 0.3, &mut rng));
    let chart = gamma
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|g| TrivializationChart::new(model, g.base(), ExpSource::Oracle));
    let sigma = match (&chart, &gamma, &m) {
        (Ok(chart), Ok(g), Ok(m)) => trivialize(model, chart, m, g),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => Err(e.clone()),
    };
    s.run("bundleflow.trivialize_roundtrip", 1e-5, || {
        let chart = chart.as_ref().map_err(Clone::clone)?;
        let (_, back) = untrivialize(model, chart, &sigma.clone()?)?;
        Ok(curve_distance(model, &back, &gamma.clone()?)?.0)
    });
    s.run("bundleflow.mapping_chart_roundtrip", 1e-8, || {
        let (g, sigma) = (gamma.clone()?, sigma.clone()?);
        let section = mapping_chart_in(model, &g, &sigma, ExpSource::Oracle)?;
        let back = mapping_chart_out(model, &g, &section, ExpSource::Oracle)?;
        Ok(curve_distance(model, &back, &sigma)?.0)
    });

    let unit = immersed_curve(model, &p, cfg).and_then(|c| arclength_normalize(model, &c, 0.1));
    s.run("bundleflow.unit_speed", 1e-4, || unit_speed_error(model, &unit.clone()?));
    s.run("bundleflow.normalize_idempotent", 1e-5, || {
        let u = unit.clone()?;
        let again = arclength_normalize(model, &u, 0.1)?;
        Ok(curve_distance(model, &again, &u)?.0)
    });
    s.rows
}

/// Deterministic coefficient in `[−1, 1)` for the polynomial-like check.
fn rng_value(seed: u64, k: usize) -> f64 {
    let mut r = fixtures::rng(seed.wrapping_mul(31).wrapping_add(k as u64 + 1));
    r.gen_range(-1.0..1.0)
}

/// Runs the suite on each model concurrently; rows come back in model order.
pub fn run(models: &[std::sync::Arc<dyn Manifold>], seed: u64, cfg: &TransportConfig) -> Vec<Row> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = models
            .iter()
            .map(|m| scope.spawn(move || model_suite(m.as_ref(), seed, cfg)))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("suite thread panicked"))
            .collect()
    })
}

pub fn table(rows: &[Row], seed: u64) -> String {
    let mut out = format!("pathlin check (seed {seed})\n");
    let _ = writeln!(
        out,
        "{:<12} {:<38} {:>11} {:>11}  status",
        "model", "check", "value", "tolerance"
    );
    for r in rows {
        let (value, status) = match &r.value {
            Ok(v) => (format!("{v:.3e}"), if r.pass() { "pass" } else { "FAIL" }),
            Err(_) => ("-".to_string(), "ERROR"),
        };
        let _ = write!(
            out,
            "{:<12} {:<38} {:>11} {:>11.1e}  {status}",
            r.model, r.name, value, r.tolerance
        );
        if let Err(e) = &r.value {
            let _ = write!(out, " ({e})");
        }
        out.push('\n');
    }
    let passed = rows.iter().filter(|r| r.pass()).count();
    let _ = writeln!(out, "{passed}/{} checks passed", rows.len());
    out
}

pub fn report(command: &[String], rows: &[Row]) -> Report {
    let mut report = Report::new(command, None);
    for r in rows {
        let name = format!("{}.{}", r.model, r.name);
        report.check(&name, *r.value.as_ref().unwrap_or(&f64::NAN), r.tolerance);
    }
    report
}
