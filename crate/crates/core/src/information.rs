//! Information matrices, the log-det objective and the sensitivity function.
//!
//! Intensities of extreme linear predictors span hundreds of orders of
//! magnitude, so all determinant and sensitivity computations factor out
//! `exp(max log q)` first. Both quantities are scale-covariant: det picks up
//! `c^(k+1)` and ψ is invariant.

use nalgebra::DMatrix;

use crate::design::{ExactDesign, MarginalDesign};
use crate::error::{DesignError, Result};
use crate::models::{IntensityModel, ShiftedIntensity};

/// Dense symmetric (k+1)×(k+1) information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix(DMatrix<f64>);

impl InfoMatrix {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(DesignError::Dimension(format!(
                "information matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// ln det, or −∞ when the matrix is not positive definite.
    pub fn log_det(&self) -> f64 {
        log_det_spd(self.0.clone())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(&self.0 * factor)
    }
}

pub(crate) fn log_det_spd(m: DMatrix<f64>) -> f64 {
    match m.cholesky() {
        Some(c) => 2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        None => f64::NEG_INFINITY,
    }
}

/// f(x) = (1, x₁, …, x_k)ᵀ.
fn regressor(x: &[f64]) -> nalgebra::DVector<f64> {
    let mut f = nalgebra::DVector::zeros(x.len() + 1);
    f[0] = 1.0;
    for (i, v) in x.iter().enumerate() {
        f[i + 1] = *v;
    }
    f
}

fn linear_predictor(beta: &[f64], x: &[f64]) -> f64 {
    beta[0] + beta[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

fn check_lengths(beta: &[f64], x: &[f64]) -> Result<()> {
    if beta.len() != x.len() + 1 {
        return Err(DesignError::Dimension(format!(
            "parameter vector of length {} does not fit a point in dimension {}",
            beta.len(),
            x.len()
        )));
    }
    Ok(())
}

/// λ(f(x)ᵀβ) f(x) f(x)ᵀ.
pub fn elemental_info(model: &IntensityModel, beta: &[f64], x: &[f64]) -> Result<InfoMatrix> {
    check_lengths(beta, x)?;
    let lambda = model.lambda(linear_predictor(beta, x))?;
    let f = regressor(x);
    Ok(InfoMatrix(&f * f.transpose() * lambda))
}

/// Σ wᵢ λ(f(xᵢ)ᵀβ) f(xᵢ) f(xᵢ)ᵀ over arbitrary points (not necessarily on the sphere).
pub fn weighted_info(
    model: &IntensityModel,
    beta: &[f64],
    points: &[Vec<f64>],
    weights: &[f64],
) -> Result<InfoMatrix> {
    let n = beta.len();
    let mut m = DMatrix::zeros(n, n);
    for (x, &w) in points.iter().zip(weights) {
        check_lengths(beta, x)?;
        let f = regressor(x);
        let lambda = model.lambda(linear_predictor(beta, x))?;
        m += &f * f.transpose() * (w * lambda);
    }
    Ok(InfoMatrix(m))
}

/// ln det of [`weighted_info`], evaluated with the intensities rescaled.
pub fn weighted_log_det(
    model: &IntensityModel,
    beta: &[f64],
    points: &[Vec<f64>],
    weights: &[f64],
) -> Result<f64> {
    let n = beta.len();
    let mut logs = Vec::with_capacity(points.len());
    for x in points {
        check_lengths(beta, x)?;
        logs.push(model.log_lambda(linear_predictor(beta, x))?);
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut m = DMatrix::zeros(n, n);
    for ((x, &w), l) in points.iter().zip(weights).zip(&logs) {
        let f = regressor(x);
        m += &f * f.transpose() * (w * (l - top).exp());
    }
    Ok(n as f64 * top + log_det_spd(m))
}

pub fn exact_info(model: &IntensityModel, beta: &[f64], design: &ExactDesign) -> Result<InfoMatrix> {
    weighted_info(model, beta, design.points(), design.weights())
}

pub fn exact_log_det(model: &IntensityModel, beta: &[f64], design: &ExactDesign) -> Result<f64> {
    weighted_log_det(model, beta, design.points(), design.weights())
}

/// Moments of a marginal design with intensities divided by `exp(shift)`.
#[derive(Debug, Clone, Copy)]
struct Moments {
    m0: f64,
    m1: f64,
    m2: f64,
    /// Σ wᵢ q(xᵢ)(1 − xᵢ²)
    ring: f64,
    /// det of the (1, x₁) block via Σ_{i<j} wᵢwⱼqᵢqⱼ(xᵢ − xⱼ)², free of cancellation
    det: f64,
    shift: f64,
}

impl Moments {
    fn new(s: &ShiftedIntensity, xi1: &MarginalDesign) -> Self {
        let logs: Vec<f64> = xi1.points().iter().map(|&x| s.log_q(x)).collect();
        let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut m = Self {
            m0: 0.0,
            m1: 0.0,
            m2: 0.0,
            ring: 0.0,
            det: 0.0,
            shift,
        };
        let scaled: Vec<(f64, f64)> = xi1
            .iter()
            .zip(logs)
            .map(|((x, w), l)| (x, w * (l - shift).exp()))
            .collect();
        for (i, &(x, wq)) in scaled.iter().enumerate() {
            m.m0 += wq;
            m.m1 += wq * x;
            m.m2 += wq * x * x;
            m.ring += wq * (1.0 - x * x);
            for &(y, wq2) in &scaled[..i] {
                m.det += wq * wq2 * (x - y) * (x - y);
            }
        }
        m
    }

    fn det_block(&self) -> f64 {
        self.det
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(DesignError::Dimension("k must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Information matrix of ξ₁ ⊗ η̄, assembled block by block.
pub fn marginal_info(s: &ShiftedIntensity, xi1: &MarginalDesign, k: usize) -> Result<InfoMatrix> {
    check_k(k)?;
    let mut m = DMatrix::zeros(k + 1, k + 1);
    let (mut s0, mut s1, mut s2, mut ring) = (0.0, 0.0, 0.0, 0.0);
    for (x, w) in xi1.iter() {
        let wq = w * s.q(x);
        s0 += wq;
        s1 += wq * x;
        s2 += wq * x * x;
        ring += wq * (1.0 - x * x);
    }
    m[(0, 0)] = s0;
    m[(0, 1)] = s1;
    m[(1, 0)] = s1;
    m[(1, 1)] = s2;
    if k > 1 {
        let d = ring / (k - 1) as f64;
        for i in 2..=k {
            m[(i, i)] = d;
        }
    }
    Ok(InfoMatrix(m))
}

/// ln det of [`marginal_info`], −∞ if singular.
pub fn marginal_log_det(s: &ShiftedIntensity, xi1: &MarginalDesign, k: usize) -> Result<f64> {
    check_k(k)?;
    let m = Moments::new(s, xi1);
    let det = m.det_block();
    if det <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mut value = (k + 1) as f64 * m.shift + det.ln();
    if k > 1 {
        if m.ring <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let km1 = (k - 1) as f64;
        value += km1 * (m.ring / km1).ln();
    }
    Ok(value)
}

/// ln det for the two-point marginal {x: α, y: 1 − α}.
///
/// Returns −∞ for singular designs, including x = y.
pub fn log_det_two_point(s: &ShiftedIntensity, x: f64, y: f64, alpha: f64, k: usize) -> f64 {
    if k == 0 || x <= y || !(alpha > 0.0 && alpha < 1.0) {
        return f64::NEG_INFINITY;
    }
    let (lx, ly) = (s.log_q(x), s.log_q(y));
    let d = x - y;
    let mut value = lx + ly + (d * d).ln() + alpha.ln() + (1.0 - alpha).ln();
    if k > 1 {
        let top = lx.max(ly);
        let ring = (lx - top).exp() * (1.0 - x * x) * alpha
            + (ly - top).exp() * (1.0 - y * y) * (1.0 - alpha);
        if ring <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let km1 = (k - 1) as f64;
        value += km1 * (-km1.ln() + top + ring.ln());
    }
    value
}

/// Sensitivity function of a rotation-invariant design, precomputed for
/// repeated evaluation.
#[derive(Debug, Clone)]
pub struct Sensitivity<'a> {
    s: &'a ShiftedIntensity,
    k: usize,
    shift: f64,
    // B⁻¹ entries
    i00: f64,
    i01: f64,
    i11: f64,
    ring: f64,
}

impl<'a> Sensitivity<'a> {
    pub fn new(s: &'a ShiftedIntensity, xi1: &MarginalDesign, k: usize) -> Result<Self> {
        check_k(k)?;
        let m = Moments::new(s, xi1);
        let det = m.det_block();
        if !(det > 1e-15 * m.m0 * m.m2.max(f64::MIN_POSITIVE)) {
            return Err(DesignError::Singular(
                "the (1, x1) block needs two distinct support levels".into(),
            ));
        }
        if k > 1 && !(m.ring > 1e-15 * m.m0) {
            return Err(DesignError::Singular(
                "for k >= 2 at least one support level must satisfy |x1| < 1".into(),
            ));
        }
        Ok(Self {
            s,
            k,
            shift: m.shift,
            i00: m.m2 / det,
            i01: -m.m1 / det,
            i11: m.m0 / det,
            ring: m.ring,
        })
    }

    /// p₁(x₁) = ψ(x₁)/q(x₁), a quadratic in x₁.
    pub fn polynomial(&self, x1: f64) -> f64 {
        let mut p = self.i00 + 2.0 * self.i01 * x1 + self.i11 * x1 * x1;
        if self.k > 1 {
            p += (self.k - 1) as f64 * (1.0 - x1 * x1) / self.ring;
        }
        p * (-self.shift).exp()
    }

    /// ψ at any sphere point whose first coordinate is `x1`.
    pub fn eval(&self, x1: f64) -> f64 {
        let mut p = self.i00 + 2.0 * self.i01 * x1 + self.i11 * x1 * x1;
        if self.k > 1 {
            p += (self.k - 1) as f64 * (1.0 - x1 * x1) / self.ring;
        }
        (self.s.log_q(x1) - self.shift).exp() * p
    }
}

pub fn sensitivity(s: &ShiftedIntensity, xi1: &MarginalDesign, k: usize, x1: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x1) {
        return Err(DesignError::Domain(format!("x1 = {x1} outside [-1, 1]")));
    }
    Ok(Sensitivity::new(s, xi1, k)?.eval(x1))
}
