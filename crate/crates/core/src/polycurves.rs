//! Polynomial-like curves, `∇^{(n)}_γ̇ γ̇ = 0`, and approximation by them.
//!
//! `P⁻¹` maps polynomial tangent curves to polynomial-like curves because
//! `P` intertwines `∇_γ̇` with `d/dt`. Fitting a polynomial to `P(γ)` and
//! mapping it back therefore approximates `γ` by polynomial-like curves.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{Frame, Manifold, Tangent};
use crate::linearize::{curve_distance, p_forward, p_forward_with_field, p_inverse, TangentCurve};
use crate::numerics::{differentiate, eval_poly, fd_weights, fit_poly, l2_residual, Grid, PolyBasis, PolyCoeffs};
use crate::transport::{covariant_derivative, curve_velocities, SampledCurve, TransportConfig};

#[derive(Debug, Clone)]
pub struct PolyLikeCurve {
    pub frame0: Frame,
    pub coeffs: PolyCoeffs,
    pub realized: SampledCurve,
    /// `covariant_power_residual(realized, degree + 1)`, when the grid
    /// supports it.
    pub residual: Option<f64>,
}

/// Realizes `v = coeffs` through `P⁻¹`. The basepoint sits at the grid node
/// `t = 0`.
pub fn make_polynomial_like(
    model: &dyn Manifold,
    frame0: &Frame,
    coeffs: &PolyCoeffs,
    grid: &Grid,
    cfg: &TransportConfig,
) -> Result<PolyLikeCurve> {
    if coeffs.dim() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "coefficients have dimension {}, model has {}",
            coeffs.dim(),
            model.dim()
        )));
    }
    let base_index = grid
        .index_of(0.0)
        .ok_or_else(|| Error::InvalidGrid("grid has no node at t = 0".into()))?;
    let v = TangentCurve::new(frame0.clone(), grid.clone(), base_index, eval_poly(coeffs, grid))?;
    let realized = p_inverse(model, &v, cfg)?;
    let n = coeffs.degree() + 1;
    let residual = if grid.is_uniform() && grid.intervals() >= 4 * n {
        Some(covariant_power_residual(model, &realized, n)?)
    } else {
        None
    };
    Ok(PolyLikeCurve {
        frame0: frame0.clone(),
        coeffs: coeffs.clone(),
        realized,
        residual,
    })
}

/// Spacing at which `n + 1` nested fourth-order differences of double
/// precision samples balance roundoff against truncation.
fn balanced_spacing(n: usize) -> f64 {
    0.5 * (f64::EPSILON * 1.5f64.powi(n as i32 + 1)).powf(1.0 / (n as f64 + 5.0))
}

/// Smallest stride reaching [`balanced_spacing`] that still leaves room for
/// the boundary bands.
fn differentiation_stride(curve: &SampledCurve, n: usize) -> usize {
    let intervals = curve.len() - 1;
    let h = (curve.grid.end() - curve.grid.start()) / intervals as f64;
    let target = balanced_spacing(n);
    let mut best = 1;
    for s in (1..=intervals).filter(|s| intervals.is_multiple_of(*s)) {
        if intervals / s < 4 * n + 4 {
            break;
        }
        best = s;
        if s as f64 * h >= target {
            break;
        }
    }
    best
}

fn nested_power(model: &dyn Manifold, curve: &SampledCurve, n: usize, stride: usize) -> Result<Vec<Tangent>> {
    let coarse = SampledCurve {
        grid: curve.grid.subsample(stride)?,
        points: curve.points.iter().step_by(stride).cloned().collect(),
        order: curve.order,
        base_index: 0,
    };
    let mut x = curve_velocities(model, &coarse)?;
    for _ in 0..n {
        x = covariant_derivative(model, &coarse, &x)?;
    }
    Ok(x)
}

/// Sup over interior nodes of `‖∇^{(n)}_γ̇ γ̇‖_g`. The velocity is itself a
/// difference, so `n + 1` nested stencils reach `2n + 2` nodes into each end;
/// that band is excluded. Fine grids are differentiated on a strided sub-grid
/// so that roundoff in the samples is not amplified past the truncation error,
/// and the leading `h⁴` error is removed by Richardson extrapolation against
/// twice that stride when the grid allows it.
pub fn covariant_power_residual(model: &dyn Manifold, curve: &SampledCurve, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("power must be at least 1".into()));
    }
    let intervals = curve.len().saturating_sub(1);
    if intervals < 4 * n {
        return Err(Error::GridTooCoarse {
            nodes: curve.len(),
            required: 4 * n + 1,
        });
    }
    let stride = differentiation_stride(curve, n);
    let fine = nested_power(model, curve, n, stride)?;
    let band = 2 * n + 2;
    let wide = intervals / stride;
    if wide.is_multiple_of(2) && wide / 2 >= 4 * n + 4 {
        let coarse = nested_power(model, curve, n, 2 * stride)?;
        let last = coarse.len() - 1;
        let mut worst: f64 = 0.0;
        for (i, c) in coarse.iter().enumerate().take(last - band + 1).skip(band) {
            let f = &fine[2 * i];
            let c = model.push_tangent(c, f.base.chart)?;
            let x = (&f.components * 16.0 - &c.components) / 15.0;
            worst = worst.max(model.norm(&Tangent::new(f.base.clone(), x)));
        }
        return Ok(worst);
    }
    let last = fine.len() - 1;
    let band = band.min(last / 2);
    Ok(fine[band..=last - band]
        .iter()
        .map(|v| model.norm(v))
        .fold(0.0, f64::max))
}

/// Sup over nodes of `‖P^{t→0}(∇_γ̇ γ̇)(t) − d/dt P(γ)(t)‖`, measured with the
/// metric at the basepoint.
pub fn conjugation_residual(model: &dyn Manifold, curve: &SampledCurve, cfg: &TransportConfig) -> Result<f64> {
    if curve.order < 2 {
        return Err(Error::InvalidInput(
            "conjugation needs a curve of order at least 2".into(),
        ));
    }
    let frame0 = model.default_frame(curve.base());
    let (report, field) = p_forward_with_field(model, curve, &frame0, cfg)?;
    let vels = curve_velocities(model, curve)?;
    let acc = covariant_derivative(model, curve, &vels)?;
    let dv = differentiate(&report.tangent_curve.components, &curve.grid)?;
    let gram = model.gram(&frame0);
    let mut worst: f64 = 0.0;
    for ((f, a), d) in field.frames.iter().zip(&acc).zip(&dv) {
        let a = model.push_tangent(a, f.base.chart)?;
        let diff = f.coefficients(&a.components)? - d;
        worst = worst.max((diff.transpose() * &gram * &diff)[(0, 0)].max(0.0).sqrt());
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct WeierstrassReport {
    /// Sup distance between the fitted and the input curve.
    pub c0: f64,
    /// Sup `g`-norm of the velocity difference, after moving the fitted
    /// velocity to the input point along the connecting geodesic.
    pub c1: f64,
    /// Discrete `L²` residual of the polynomial fit to `P(γ)`.
    pub v_residual: f64,
}

pub fn weierstrass_fit(
    model: &dyn Manifold,
    curve: &SampledCurve,
    degree: usize,
    basis: PolyBasis,
    cfg: &TransportConfig,
) -> Result<(PolyLikeCurve, WeierstrassReport)> {
    let frame0 = model.default_frame(curve.base());
    let v = p_forward(model, curve, &frame0, cfg)?.tangent_curve;
    let coeffs = fit_poly(&v.components, &curve.grid, degree, basis)?;
    let v_residual = l2_residual(&v.components, &eval_poly(&coeffs, &curve.grid), &curve.grid);
    let fitted = TangentCurve {
        components: eval_poly(&coeffs, &curve.grid),
        ..v
    };
    let realized = p_inverse(model, &fitted, cfg)?;
    let (c0, _) = curve_distance(model, &realized, curve)?;

    let ours = curve_velocities(model, curve)?;
    let theirs = curve_velocities(model, &realized)?;
    let mut c1: f64 = 0.0;
    for (a, b) in ours.iter().zip(&theirs) {
        let moved = match model.oracle() {
            Some(_) => {
                let w = model.log_oracle(&b.base, &a.base)?;
                let t = model.transport_geodesic_oracle(&w, b)?;
                model.push_tangent(&t, a.base.chart)?
            }
            None => model.push_tangent(b, a.base.chart)?,
        };
        let d = Tangent::new(a.base.clone(), &a.components - &moved.components);
        c1 = c1.max(model.norm(&d));
    }
    let residual = if curve.grid.is_uniform() && curve.grid.intervals() >= 4 * (degree + 1) {
        Some(covariant_power_residual(model, &realized, degree + 1)?)
    } else {
        None
    };
    Ok((
        PolyLikeCurve {
            frame0,
            coeffs,
            realized,
            residual,
        },
        WeierstrassReport { c0, c1, v_residual },
    ))
}

/// `v^{(k)}(0)/k!` for `k = 0..=q`, from finite differences of `P(γ)` on a
/// window of `q + 5` nodes around the basepoint. On fine grids the window
/// nodes are spread out to about a quarter of the grid, which keeps the
/// nodal error of `P(γ)` from being amplified by the high differences.
pub fn taylor_coefficients(
    model: &dyn Manifold,
    curve: &SampledCurve,
    q: usize,
    cfg: &TransportConfig,
) -> Result<Vec<DVector<f64>>> {
    if curve.order < q + 1 {
        return Err(Error::InvalidInput(format!(
            "order {} curve has no Taylor coefficients up to {q}",
            curve.order
        )));
    }
    let width = q + 5;
    if curve.len() < width {
        return Err(Error::GridTooCoarse {
            nodes: curve.len(),
            required: width,
        });
    }
    let v = p_forward(model, curve, &model.default_frame(curve.base()), cfg)?.tangent_curve;
    let b = curve.base_index;
    let stride = ((curve.len() - 1) / (4 * width)).max(1);
    // Window `b + (k - j) * stride`, with `j` nodes below the basepoint.
    let last = curve.len() - 1;
    let j = (0..width)
        .filter(|&j| j * stride <= b && b + (width - 1 - j) * stride <= last)
        .min_by_key(|&j| j.abs_diff((width - 1) / 2))
        .expect("stride leaves room for the window");
    let idx: Vec<usize> = (0..width).map(|k| b + k * stride - j * stride).collect();
    let nodes: Vec<f64> = idx.iter().map(|&i| curve.grid.nodes()[i]).collect();
    let weights = fd_weights(curve.grid.nodes()[b], &nodes, q);
    let mut factorial = 1.0;
    Ok((0..=q)
        .map(|k| {
            if k > 0 {
                factorial *= k as f64;
            }
            let mut d = DVector::zeros(model.dim());
            for (w, &i) in weights[k].iter().zip(&idx) {
                d.axpy(*w, &v.components[i], 1.0);
            }
            d / factorial
        })
        .collect())
}
