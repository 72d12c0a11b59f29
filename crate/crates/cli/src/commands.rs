//! Pipeline commands. Each one loads and validates its inputs, computes, and
//! returns everything it wants written; nothing is emitted until the whole
//! computation has succeeded.

use std::path::{Path, PathBuf};

use anyhow::Result;
use pathlin_core::bundleflow::{
    arclength_normalize, flow, phi, trivialize, untrivialize, CarrierFieldSpec, ExpSource,
    TrivializationChart,
};
use pathlin_core::cubemaps::{p2_forward, p2_inverse};
use pathlin_core::geometry::MODEL_NAMES;
use pathlin_core::linearize::{curve_distance, p_forward, p_inverse_with_frames, roundtrip_check};
use pathlin_core::numerics::PolyBasis;
use pathlin_core::polycurves::weierstrass_fit;
use pathlin_core::transport::curve_velocities;
use pathlin_core::{Frame, Manifold, SampledCurve, TransportConfig};
use serde::Serialize;

use crate::files::{
    curve_csv, invalid, lookup_model, parse_point, read_json, tangent_csv, to_json, CubeFile,
    CubeLinearizationFile, CurveFile, PointsFile, TangentCurveFile,
};
use crate::report::Report;

pub const NORM_DRIFT_TOLERANCE: f64 = 1e-5;
pub const ROUNDTRIP_TOLERANCE: f64 = 1e-5;
pub const PHI_TOLERANCE: f64 = 1e-6;
pub const TRIVIALIZE_TOLERANCE: f64 = 1e-5;
pub const UNIT_SPEED_TOLERANCE: f64 = 1e-4;

/// Where a piece of output goes; `None` is stdout.
pub type Destination = Option<PathBuf>;

#[derive(Debug, Default)]
pub struct Outcome {
    pub writes: Vec<(Destination, String)>,
    pub report: Option<Report>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.report.as_ref().is_none_or(|r| r.pass)
    }
}

/// Shared `-o/--report/--csv` handling.
#[derive(Debug, Clone, Default)]
pub struct Sinks {
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Sinks {
    fn finish(&self, primary: String, csv: Option<String>, report: Report) -> Result<Outcome> {
        let mut writes = vec![(self.output.clone(), primary)];
        if let (Some(path), Some(csv)) = (&self.csv, csv) {
            writes.push((Some(path.clone()), csv));
        }
        if let Some(path) = &self.report {
            writes.push((Some(path.clone()), to_json(&report)?));
        }
        Ok(Outcome {
            writes,
            report: Some(report),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FrameKind {
    /// `g`-orthonormal frame from Gram-Schmidt on the coordinate basis.
    Orthonormal,
    /// Coordinate basis of the basepoint's chart.
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BasisKind {
    Bernstein,
    Monomial,
}

fn source(shooting: bool) -> ExpSource {
    if shooting {
        ExpSource::Shooting
    } else {
        ExpSource::Oracle
    }
}

fn load_curve(path: &Path) -> Result<(std::sync::Arc<dyn Manifold>, SampledCurve)> {
    read_json::<CurveFile>(path)?.load()
}

#[derive(Serialize)]
struct ChartManifest {
    id: usize,
    name: &'static str,
    center: Vec<f64>,
    trust_radius: f64,
    description: &'static str,
}

#[derive(Serialize)]
struct ModelManifest {
    name: &'static str,
    dim: usize,
    charts: Vec<ChartManifest>,
    oracle: bool,
    conventions: &'static str,
}

pub fn models(describe: Option<&str>) -> Result<Outcome> {
    let names: Vec<&str> = match describe {
        Some(name) => vec![lookup_model(name)?.name()],
        None => MODEL_NAMES.to_vec(),
    };
    let manifests: Vec<ModelManifest> = names
        .iter()
        .map(|n| {
            let m = lookup_model(n).expect("known model");
            ModelManifest {
                name: m.name(),
                dim: m.dim(),
                charts: m
                    .charts()
                    .iter()
                    .map(|c| ChartManifest {
                        id: c.id.0,
                        name: c.name,
                        center: c.center.iter().copied().collect(),
                        trust_radius: c.trust_radius,
                        description: c.description,
                    })
                    .collect(),
                oracle: m.has_oracle(),
                conventions: m.conventions(),
            }
        })
        .collect();
    let text = match describe {
        Some(_) => to_json(&manifests[0])?,
        None => to_json(&manifests)?,
    };
    Ok(Outcome {
        writes: vec![(None, text)],
        report: None,
    })
}

pub fn linearize(
    command: &[String],
    curve: &Path,
    frame: FrameKind,
    sinks: &Sinks,
    cfg: &TransportConfig,
) -> Result<Outcome> {
    let (model, curve) = load_curve(curve)?;
    let m = model.as_ref();
    let rep = p_forward(m, &curve, &base_frame(m, curve.base(), frame), cfg)?;
    let mut report = Report::new(command, Some(m));
    report.metric("spacing", rep.spacing);
    report.check("norm_drift", rep.norm_drift, NORM_DRIFT_TOLERANCE);
    report.switches(m, &rep.switch_log);
    let primary = to_json(&TangentCurveFile::new(m, &rep.tangent_curve))?;
    sinks.finish(primary, Some(tangent_csv(&rep.tangent_curve)), report)
}

pub fn synthesize(command: &[String], tangent: &Path, sinks: &Sinks, cfg: &TransportConfig) -> Result<Outcome> {
    let (model, v) = read_json::<TangentCurveFile>(tangent)?.load()?;
    let m = model.as_ref();
    let syn = p_inverse_with_frames(m, &v, cfg)?;
    let mut report = Report::new(command, Some(m));
    report.metric("nodes", syn.curve.len() as f64);
    report.switches(m, &syn.switch_log);
    let primary = to_json(&CurveFile::new(m, &syn.curve))?;
    sinks.finish(primary, Some(curve_csv(&syn.curve)), report)
}

pub fn roundtrip(command: &[String], curve: &Path, output: Option<PathBuf>, cfg: &TransportConfig) -> Result<Outcome> {
    let (model, curve) = load_curve(curve)?;
    let m = model.as_ref();
    let rt = roundtrip_check(m, &curve, cfg)?;
    let mut report = Report::new(command, Some(m));
    report.distance = Some(rt.distance.as_str());
    report.check("roundtrip_error", rt.max_error, ROUNDTRIP_TOLERANCE);
    report.check("norm_drift", rt.norm_drift, NORM_DRIFT_TOLERANCE);
    report.switches(m, &rt.switch_log);
    Ok(Outcome {
        writes: vec![(output, to_json(&report)?)],
        report: Some(report),
    })
}

fn base_frame(model: &dyn Manifold, base: &pathlin_core::Point, kind: FrameKind) -> Frame {
    match kind {
        FrameKind::Orthonormal => model.default_frame(base),
        FrameKind::Coordinate => Frame::coordinate(base.clone()),
    }
}

pub fn cube_forward(
    command: &[String],
    cube: &Path,
    frame: FrameKind,
    sinks: &Sinks,
    cfg: &TransportConfig,
) -> Result<Outcome> {
    let (model, cube) = read_json::<CubeFile>(cube)?.load()?;
    let m = model.as_ref();
    let lin = p2_forward(m, &cube, &base_frame(m, cube.basepoint(), frame), cfg)?;
    let mut report = Report::new(command, Some(m));
    report.metric("nodes1", cube.grid1.len() as f64);
    report.metric("nodes2", cube.grid2.len() as f64);
    sinks.finish(to_json(&CubeLinearizationFile::new(m, &lin))?, None, report)
}

pub fn cube_inverse(command: &[String], lin: &Path, sinks: &Sinks, cfg: &TransportConfig) -> Result<Outcome> {
    let (model, lin) = read_json::<CubeLinearizationFile>(lin)?.load()?;
    let m = model.as_ref();
    let cube = p2_inverse(m, &lin, cfg)?;
    let mut report = Report::new(command, Some(m));
    report.metric("nodes1", cube.grid1.len() as f64);
    report.metric("nodes2", cube.grid2.len() as f64);
    sinks.finish(to_json(&CubeFile::new(m, &cube))?, None, report)
}

pub fn polyfit(
    command: &[String],
    curve: &Path,
    degree: usize,
    basis: BasisKind,
    sinks: &Sinks,
    cfg: &TransportConfig,
) -> Result<Outcome> {
    let (model, curve) = load_curve(curve)?;
    let m = model.as_ref();
    let basis = match basis {
        BasisKind::Bernstein => PolyBasis::Bernstein,
        BasisKind::Monomial => PolyBasis::Monomial,
    };
    let (fit, w) = weierstrass_fit(m, &curve, degree, basis, cfg)?;
    let mut report = Report::new(command, Some(m));
    report.distance = Some(curve_distance(m, &fit.realized, &curve)?.1.as_str());
    report.metric("degree", degree as f64);
    report.metric("c0_error", w.c0);
    report.metric("c1_error", w.c1);
    report.metric("v_residual", w.v_residual);
    if let Some(r) = fit.residual {
        report.metric("covariant_power_residual", r);
    }
    let primary = to_json(&CurveFile::new(m, &fit.realized))?;
    sinks.finish(primary, Some(curve_csv(&fit.realized)), report)
}

pub struct FlowArgs<'a> {
    pub points: &'a Path,
    pub p: &'a str,
    pub q: &'a str,
    pub time: f64,
    pub shooting: bool,
}

pub fn flow_points(command: &[String], args: &FlowArgs, sinks: &Sinks) -> Result<Outcome> {
    let (model, points) = read_json::<PointsFile>(args.points)?.load()?;
    let m = model.as_ref();
    let p = parse_point(m, args.p, "--p")?;
    let q = parse_point(m, args.q, "--q")?;
    if !args.time.is_finite() {
        return Err(invalid("--time: must be finite"));
    }
    let spec = CarrierFieldSpec::new(m, &p, &q, source(args.shooting))?;
    let moved = points
        .iter()
        .map(|x| flow(m, &spec, x, args.time))
        .collect::<pathlin_core::Result<Vec<_>>>()?;
    let mut report = Report::new(command, Some(m));
    let (d, kind) = m.point_distance(&phi(m, &spec, &p)?, &q)?;
    report.distance = Some(kind.as_str());
    report.metric("r_in", spec.r_in);
    report.metric("r_out", spec.r_out);
    report.check("phi_p_to_q", d, PHI_TOLERANCE);
    sinks.finish(to_json(&PointsFile::new(m, &moved))?, None, report)
}

pub fn trivialize_curve(
    command: &[String],
    curve: &Path,
    to: &str,
    shooting: bool,
    sinks: &Sinks,
) -> Result<Outcome> {
    let (model, gamma) = load_curve(curve)?;
    let m = model.as_ref();
    let target = parse_point(m, to, "--to")?;
    let chart = TrivializationChart::new(m, gamma.base(), source(shooting))?;
    let sigma = trivialize(m, &chart, &target, &gamma)?;
    let (_, back) = untrivialize(m, &chart, &sigma)?;
    let (err, kind) = curve_distance(m, &back, &gamma)?;
    let mut report = Report::new(command, Some(m));
    report.distance = Some(kind.as_str());
    report.check("untrivialize_roundtrip", err, TRIVIALIZE_TOLERANCE);
    report.check("base_error", m.point_distance(sigma.base(), &target)?.0, PHI_TOLERANCE);
    sinks.finish(to_json(&CurveFile::new(m, &sigma))?, Some(curve_csv(&sigma)), report)
}

pub fn untrivialize_curve(
    command: &[String],
    curve: &Path,
    base: &str,
    shooting: bool,
    sinks: &Sinks,
) -> Result<Outcome> {
    let (model, sigma) = load_curve(curve)?;
    let m = model.as_ref();
    let p = parse_point(m, base, "--base")?;
    let chart = TrivializationChart::new(m, &p, source(shooting))?;
    let (_, gamma) = untrivialize(m, &chart, &sigma)?;
    let mut report = Report::new(command, Some(m));
    let (d, kind) = m.point_distance(gamma.base(), &p)?;
    report.distance = Some(kind.as_str());
    report.check("base_error", d, PHI_TOLERANCE);
    sinks.finish(to_json(&CurveFile::new(m, &gamma))?, Some(curve_csv(&gamma)), report)
}

/// Largest deviation of the measured speed from 1.
pub fn unit_speed_error(model: &dyn Manifold, curve: &SampledCurve) -> pathlin_core::Result<f64> {
    Ok(curve_velocities(model, curve)?
        .iter()
        .map(|v| (model.norm(v) - 1.0).abs())
        .fold(0.0, f64::max))
}

pub fn normalize(command: &[String], curve: &Path, floor: f64, sinks: &Sinks) -> Result<Outcome> {
    if !(floor > 0.0 && floor.is_finite()) {
        return Err(invalid("--floor: must be a positive number"));
    }
    let (model, gamma) = load_curve(curve)?;
    let m = model.as_ref();
    let unit = arclength_normalize(m, &gamma, floor)?;
    let mut report = Report::new(command, Some(m));
    report.metric("length", unit.grid.end() - unit.grid.start());
    report.check("unit_speed", unit_speed_error(m, &unit)?, UNIT_SPEED_TOLERANCE);
    sinks.finish(to_json(&CurveFile::new(m, &unit))?, Some(curve_csv(&unit)), report)
}
