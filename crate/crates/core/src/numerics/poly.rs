use nalgebra::{DMatrix, DVector};

use super::Grid;
use crate::error::{Error, Result};

/// Upper bound on the condition estimate of the normal system.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PolyBasis {
    #[default]
    Bernstein,
    Monomial,
}

impl PolyBasis {
    /// All basis functions of the given degree at the normalized parameter `u ∈ [0, 1]`.
    pub fn values(self, degree: usize, u: f64) -> Vec<f64> {
        match self {
            PolyBasis::Monomial => {
                let mut out = Vec::with_capacity(degree + 1);
                let mut p = 1.0;
                for _ in 0..=degree {
                    out.push(p);
                    p *= u;
                }
                out
            }
            PolyBasis::Bernstein => {
                // de Casteljau-style build-up of B_{k,d}(u)
                let mut b = vec![0.0; degree + 1];
                b[0] = 1.0;
                let v = 1.0 - u;
                for d in 1..=degree {
                    for k in (0..=d).rev() {
                        let left = if k > 0 { b[k - 1] * u } else { 0.0 };
                        b[k] = left + b[k] * v;
                    }
                }
                b
            }
        }
    }
}

/// Polynomial with vector coefficients over `interval`, parametrized by
/// `u = (t − a) / (b − a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    pub basis: PolyBasis,
    pub interval: (f64, f64),
    pub coefficients: Vec<DVector<f64>>,
}

impl PolyCoeffs {
    pub fn new(basis: PolyBasis, interval: (f64, f64), coefficients: Vec<DVector<f64>>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidInput("polynomial needs at least one coefficient".into()));
        }
        let m = coefficients[0].len();
        if coefficients.iter().any(|c| c.len() != m) {
            return Err(Error::InvalidInput("coefficient tuples differ in length".into()));
        }
        if !(interval.1 > interval.0) {
            return Err(Error::InvalidInput("polynomial interval must be increasing".into()));
        }
        Ok(Self {
            basis,
            interval,
            coefficients,
        })
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coefficients[0].len()
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        let u = (t - self.interval.0) / (self.interval.1 - self.interval.0);
        let b = self.basis.values(self.degree(), u);
        let mut acc = DVector::zeros(self.dim());
        for (bk, ck) in b.iter().zip(&self.coefficients) {
            acc.axpy(*bk, ck, 1.0);
        }
        acc
    }
}

pub fn eval_poly(coeffs: &PolyCoeffs, grid: &Grid) -> Vec<DVector<f64>> {
    grid.nodes().iter().map(|&t| coeffs.eval(t)).collect()
}

/// Discrete `L²` norm (trapezoid weights) of `values − fitted`.
pub fn l2_residual(values: &[DVector<f64>], fitted: &[DVector<f64>], grid: &Grid) -> f64 {
    grid.trapezoid_weights()
        .iter()
        .zip(values.iter().zip(fitted))
        .map(|(w, (a, b))| w * (a - b).norm_squared())
        .sum::<f64>()
        .sqrt()
}

/// Least-squares fit in the grid's discrete `L²` inner product.
pub fn fit_poly(
    values: &[DVector<f64>],
    grid: &Grid,
    degree: usize,
    basis: PolyBasis,
) -> Result<PolyCoeffs> {
    let n = grid.len();
    if values.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} values for {n} grid nodes",
            values.len()
        )));
    }
    if degree + 1 > n {
        return Err(Error::InvalidInput(format!(
            "degree {degree} needs at least {} nodes",
            degree + 1
        )));
    }
    let m = values[0].len();
    let (a, b) = (grid.start(), grid.end());
    let sqrt_w: Vec<f64> = grid.trapezoid_weights().into_iter().map(f64::sqrt).collect();

    let mut design = DMatrix::zeros(n, degree + 1);
    let mut rhs = DMatrix::zeros(n, m);
    for (i, &t) in grid.nodes().iter().enumerate() {
        let row = basis.values(degree, (t - a) / (b - a));
        for (k, v) in row.into_iter().enumerate() {
            design[(i, k)] = sqrt_w[i] * v;
        }
        for d in 0..m {
            rhs[(i, d)] = sqrt_w[i] * values[i][d];
        }
    }

    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let coefficients = (0..=degree)
        .map(|k| sol.row(k).transpose())
        .collect();
    PolyCoeffs::new(basis, (a, b), coefficients)
}
