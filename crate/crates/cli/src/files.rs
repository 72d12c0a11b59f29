//! JSON file formats (schema version 1) and their validation.
//!
//! Every loader checks the whole file before any numerical work starts, and
//! its messages name the offending field.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use nalgebra::{DMatrix, DVector};
use pathlin_core::cubemaps::{CubeLinearization, CubeSample};
use pathlin_core::geometry::{self, MODEL_NAMES};
use pathlin_core::linearize::TangentCurve;
use pathlin_core::{ChartId, Frame, Grid, Manifold, Point, SampledCurve};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// An input problem; maps to exit code 2.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

/// `{start, end, n}` with `n` intervals, or an explicit `{nodes}` list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn from_grid(grid: &Grid) -> Self {
        if grid.is_uniform() {
            let uniform = Grid::uniform(grid.start(), grid.end(), grid.intervals());
            // Only use the short form when it reproduces the nodes exactly.
            if uniform.as_ref().is_ok_and(|u| u == grid) {
                return Self {
                    start: Some(grid.start()),
                    end: Some(grid.end()),
                    n: Some(grid.intervals()),
                    nodes: None,
                };
            }
        }
        Self {
            start: None,
            end: None,
            n: None,
            nodes: Some(grid.nodes().to_vec()),
        }
    }

    pub fn to_grid(&self, field: &str) -> Result<Grid> {
        let grid = match (self.start, self.end, self.n, &self.nodes) {
            (Some(a), Some(b), Some(n), None) => Grid::uniform(a, b, n),
            (None, None, None, Some(nodes)) => Grid::from_nodes(nodes.clone()),
            _ => {
                return Err(invalid(format!(
                    "{field}: give either start, end and n, or nodes"
                )))
            }
        };
        grid.map_err(|e| invalid(format!("{field}: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl Sample {
    pub fn from_point(p: &Point) -> Self {
        Self {
            chart: p.chart.0,
            coords: p.coords.iter().copied().collect(),
        }
    }

    pub fn to_point(&self, model: &dyn Manifold, field: &str) -> Result<Point> {
        if self.chart >= model.charts().len() {
            return Err(invalid(format!(
                "{field}.chart: {} has no chart {}",
                model.name(),
                self.chart
            )));
        }
        if self.coords.len() != model.dim() {
            return Err(invalid(format!(
                "{field}.coords: expected {} values, got {}",
                model.dim(),
                self.coords.len()
            )));
        }
        let p = Point::from_slice(ChartId(self.chart), &self.coords);
        model.check_point(&p).map_err(|e| invalid(format!("{field}: {e}")))?;
        Ok(p)
    }
}

fn vector(values: &[f64], dim: usize, field: &str) -> Result<DVector<f64>> {
    if values.len() != dim {
        return Err(invalid(format!(
            "{field}: expected {dim} values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(invalid(format!("{field}: values must be finite")));
    }
    Ok(DVector::from_column_slice(values))
}

fn frame_columns(frame: &Frame) -> Vec<Vec<f64>> {
    frame.columns.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn to_frame(model: &dyn Manifold, base: Point, columns: &[Vec<f64>], field: &str) -> Result<Frame> {
    let m = model.dim();
    if columns.len() != m {
        return Err(invalid(format!("{field}: expected {m} columns, got {}", columns.len())));
    }
    let mut mat = DMatrix::zeros(m, m);
    for (i, c) in columns.iter().enumerate() {
        mat.set_column(i, &vector(c, m, &format!("{field}[{i}]"))?);
    }
    Frame::new(base, mat).map_err(|e| invalid(format!("{field}: {e}")))
}

pub fn lookup_model(name: &str) -> Result<Arc<dyn Manifold>> {
    geometry::model(name).ok_or_else(|| {
        invalid(format!(
            "manifold: unknown model `{name}` (known: {})",
            MODEL_NAMES.join(", ")
        ))
    })
}

fn check_header(version: u32, kind: &Option<String>, expected: &str) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(invalid(format!(
            "schema_version: unsupported version {version}, expected {SCHEMA_VERSION}"
        )));
    }
    match kind {
        Some(k) if k != expected => Err(invalid(format!("kind: expected `{expected}`, got `{k}`"))),
        _ => Ok(()),
    }
}

fn check_base_index(base_index: usize, len: usize, field: &str) -> Result<()> {
    if base_index >= len {
        return Err(invalid(format!(
            "{field}: {base_index} is out of range for {len} grid nodes"
        )));
    }
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).context("serializing output")?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Option<String>,
    pub manifold: String,
    pub grid: GridSpec,
    pub base_index: usize,
    pub order: usize,
    pub samples: Vec<Sample>,
}

impl CurveFile {
    pub fn new(model: &dyn Manifold, curve: &SampledCurve) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: Some("curve".into()),
            manifold: model.name().into(),
            grid: GridSpec::from_grid(&curve.grid),
            base_index: curve.base_index,
            order: curve.order,
            samples: curve.points.iter().map(Sample::from_point).collect(),
        }
    }

    pub fn load(&self) -> Result<(Arc<dyn Manifold>, SampledCurve)> {
        check_header(self.schema_version, &self.kind, "curve")?;
        let model = lookup_model(&self.manifold)?;
        let grid = self.grid.to_grid("grid")?;
        if self.samples.len() != grid.len() {
            return Err(invalid(format!(
                "samples: {} entries but the grid has {} nodes",
                self.samples.len(),
                grid.len()
            )));
        }
        check_base_index(self.base_index, grid.len(), "base_index")?;
        if self.order == 0 {
            return Err(invalid("order: must be at least 1"));
        }
        let points = self
            .samples
            .iter()
            .enumerate()
            .map(|(j, s)| s.to_point(model.as_ref(), &format!("samples[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let curve = SampledCurve::new(grid, points, self.order, self.base_index)
            .map_err(|e| invalid(format!("curve: {e}")))?;
        curve
            .validate(model.as_ref())
            .map_err(|e| invalid(format!("samples: {e}")))?;
        Ok((model, curve))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TangentCurveFile {
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Option<String>,
    pub manifold: String,
    pub base: Sample,
    /// Frame columns at the basepoint, in the base chart's coordinates.
    pub frame: Vec<Vec<f64>>,
    pub grid: GridSpec,
    pub base_index: usize,
    pub order: usize,
    pub components: Vec<Vec<f64>>,
}

impl TangentCurveFile {
    pub fn new(model: &dyn Manifold, v: &TangentCurve) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: Some("tangent_curve".into()),
            manifold: model.name().into(),
            base: Sample::from_point(&v.base),
            frame: frame_columns(&v.frame0),
            grid: GridSpec::from_grid(&v.grid),
            base_index: v.base_index,
            order: v.order,
            components: v.components.iter().map(|c| c.iter().copied().collect()).collect(),
        }
    }

    pub fn load(&self) -> Result<(Arc<dyn Manifold>, TangentCurve)> {
        check_header(self.schema_version, &self.kind, "tangent_curve")?;
        let model = lookup_model(&self.manifold)?;
        let base = self.base.to_point(model.as_ref(), "base")?;
        let frame = to_frame(model.as_ref(), base, &self.frame, "frame")?;
        let grid = self.grid.to_grid("grid")?;
        if self.components.len() != grid.len() {
            return Err(invalid(format!(
                "components: {} entries but the grid has {} nodes",
                self.components.len(),
                grid.len()
            )));
        }
        check_base_index(self.base_index, grid.len(), "base_index")?;
        if self.order == 0 {
            return Err(invalid("order: must be at least 1"));
        }
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(j, c)| vector(c, model.dim(), &format!("components[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let mut v = TangentCurve::new(frame, grid, self.base_index, components)
            .map_err(|e| invalid(format!("tangent curve: {e}")))?;
        v.order = self.order;
        Ok((model, v))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeFile {
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Option<String>,
    pub manifold: String,
    pub grid1: GridSpec,
    pub grid2: GridSpec,
    /// Node indices `(i, j)` of the basepoint `α(0, 0)`.
    pub base: [usize; 2],
    /// `samples[i][j] = α(s₁_i, s₂_j)`.
    pub samples: Vec<Vec<Sample>>,
}

impl CubeFile {
    pub fn new(model: &dyn Manifold, cube: &CubeSample) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: Some("cube".into()),
            manifold: model.name().into(),
            grid1: GridSpec::from_grid(&cube.grid1),
            grid2: GridSpec::from_grid(&cube.grid2),
            base: [cube.base.0, cube.base.1],
            samples: cube
                .points
                .iter()
                .map(|row| row.iter().map(Sample::from_point).collect())
                .collect(),
        }
    }

    pub fn load(&self) -> Result<(Arc<dyn Manifold>, CubeSample)> {
        check_header(self.schema_version, &self.kind, "cube")?;
        let model = lookup_model(&self.manifold)?;
        let grid1 = self.grid1.to_grid("grid1")?;
        let grid2 = self.grid2.to_grid("grid2")?;
        if self.samples.len() != grid1.len() {
            return Err(invalid(format!(
                "samples: {} rows but grid1 has {} nodes",
                self.samples.len(),
                grid1.len()
            )));
        }
        check_base_index(self.base[0], grid1.len(), "base[0]")?;
        check_base_index(self.base[1], grid2.len(), "base[1]")?;
        let mut points = Vec::with_capacity(grid1.len());
        for (i, row) in self.samples.iter().enumerate() {
            if row.len() != grid2.len() {
                return Err(invalid(format!(
                    "samples[{i}]: {} entries but grid2 has {} nodes",
                    row.len(),
                    grid2.len()
                )));
            }
            points.push(
                row.iter()
                    .enumerate()
                    .map(|(j, s)| s.to_point(model.as_ref(), &format!("samples[{i}][{j}]")))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let cube = CubeSample::new(grid1, grid2, points, (self.base[0], self.base[1]))
            .map_err(|e| invalid(format!("cube: {e}")))?;
        Ok((model, cube))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeLinearizationFile {
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Option<String>,
    pub manifold: String,
    pub base: Sample,
    pub frame: Vec<Vec<f64>>,
    pub grid1: GridSpec,
    pub grid2: GridSpec,
    pub base_index: [usize; 2],
    pub v1: Vec<Vec<f64>>,
    /// `v2[i][j]`, components in `frame`.
    pub v2: Vec<Vec<Vec<f64>>>,
}

impl CubeLinearizationFile {
    pub fn new(model: &dyn Manifold, lin: &CubeLinearization) -> Self {
        let vec = |c: &DVector<f64>| c.iter().copied().collect::<Vec<_>>();
        Self {
            schema_version: SCHEMA_VERSION,
            kind: Some("cube_linearization".into()),
            manifold: model.name().into(),
            base: Sample::from_point(&lin.v1.base),
            frame: frame_columns(&lin.v1.frame0),
            grid1: GridSpec::from_grid(&lin.v1.grid),
            grid2: GridSpec::from_grid(&lin.grid2),
            base_index: [lin.v1.base_index, lin.base2],
            v1: lin.v1.components.iter().map(vec).collect(),
            v2: lin.v2.iter().map(|row| row.iter().map(vec).collect()).collect(),
        }
    }

    pub fn load(&self) -> Result<(Arc<dyn Manifold>, CubeLinearization)> {
        check_header(self.schema_version, &self.kind, "cube_linearization")?;
        let model = lookup_model(&self.manifold)?;
        let m = model.dim();
        let base = self.base.to_point(model.as_ref(), "base")?;
        let frame = to_frame(model.as_ref(), base, &self.frame, "frame")?;
        let grid1 = self.grid1.to_grid("grid1")?;
        let grid2 = self.grid2.to_grid("grid2")?;
        if self.v1.len() != grid1.len() {
            return Err(invalid(format!(
                "v1: {} entries but grid1 has {} nodes",
                self.v1.len(),
                grid1.len()
            )));
        }
        if self.v2.len() != grid1.len() {
            return Err(invalid(format!(
                "v2: {} rows but grid1 has {} nodes",
                self.v2.len(),
                grid1.len()
            )));
        }
        check_base_index(self.base_index[0], grid1.len(), "base_index[0]")?;
        check_base_index(self.base_index[1], grid2.len(), "base_index[1]")?;
        let v1 = self
            .v1
            .iter()
            .enumerate()
            .map(|(j, c)| vector(c, m, &format!("v1[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        let mut v2 = Vec::with_capacity(grid1.len());
        for (i, row) in self.v2.iter().enumerate() {
            if row.len() != grid2.len() {
                return Err(invalid(format!(
                    "v2[{i}]: {} entries but grid2 has {} nodes",
                    row.len(),
                    grid2.len()
                )));
            }
            v2.push(
                row.iter()
                    .enumerate()
                    .map(|(j, c)| vector(c, m, &format!("v2[{i}][{j}]")))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let v1 = TangentCurve::new(frame, grid1, self.base_index[0], v1)
            .map_err(|e| invalid(format!("v1: {e}")))?;
        let lin = CubeLinearization::new(v1, grid2, v2, self.base_index[1])
            .map_err(|e| invalid(format!("v2: {e}")))?;
        Ok((model, lin))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsFile {
    pub schema_version: u32,
    #[serde(default)]
    pub kind: Option<String>,
    pub manifold: String,
    pub points: Vec<Sample>,
}

impl PointsFile {
    pub fn new(model: &dyn Manifold, points: &[Point]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: Some("points".into()),
            manifold: model.name().into(),
            points: points.iter().map(Sample::from_point).collect(),
        }
    }

    pub fn load(&self) -> Result<(Arc<dyn Manifold>, Vec<Point>)> {
        check_header(self.schema_version, &self.kind, "points")?;
        let model = lookup_model(&self.manifold)?;
        let points = self
            .points
            .iter()
            .enumerate()
            .map(|(j, s)| s.to_point(model.as_ref(), &format!("points[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok((model, points))
    }
}

/// Parses `x,y` or `CHART:x,y` into a point of `model`.
pub fn parse_point(model: &dyn Manifold, text: &str, flag: &str) -> Result<Point> {
    let (chart, coords) = match text.split_once(':') {
        Some((c, rest)) => (
            c.trim()
                .parse::<usize>()
                .map_err(|_| invalid(format!("{flag}: chart `{c}` is not an integer")))?,
            rest,
        ),
        None => (0, text),
    };
    let coords = coords
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("{flag}: `{x}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    Sample { chart, coords }.to_point(model, flag)
}

/// CSV with columns `t, x1, …, xm, chart`.
pub fn curve_csv(curve: &SampledCurve) -> String {
    let m = curve.points.first().map_or(0, |p| p.coords.len());
    let mut out = String::from("t");
    for k in 1..=m {
        out.push_str(&format!(",x{k}"));
    }
    out.push_str(",chart\n");
    for (p, t) in curve.points.iter().zip(curve.grid.nodes()) {
        out.push_str(&t.to_string());
        for c in p.coords.iter() {
            out.push_str(&format!(",{c}"));
        }
        out.push_str(&format!(",{}\n", p.chart.0));
    }
    out
}

/// CSV with columns `t, v1, …, vm, chart` (the basepoint's chart).
pub fn tangent_csv(v: &TangentCurve) -> String {
    let m = v.base.coords.len();
    let mut out = String::from("t");
    for k in 1..=m {
        out.push_str(&format!(",v{k}"));
    }
    out.push_str(",chart\n");
    for (c, t) in v.components.iter().zip(v.grid.nodes()) {
        out.push_str(&t.to_string());
        for x in c.iter() {
            out.push_str(&format!(",{x}"));
        }
        out.push_str(&format!(",{}\n", v.base.chart.0));
    }
    out
}
