//! Design containers: marginal designs on [−1, 1] and exact designs on the sphere.

use serde::{Deserialize, Serialize};

use crate::error::{DesignError, Result};

const WEIGHT_SUM_TOL: f64 = 1e-9;
const SPHERE_TOL: f64 = 1e-12;

/// The x₁-marginal of a rotation-invariant design.
///
/// Points are kept strictly decreasing, so `points[0]` is x₁₁* and
/// `points[1]` is x₁₂* for two-point designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarginal")]
pub struct MarginalDesign {
    points: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMarginal {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawMarginal> for MarginalDesign {
    type Error = DesignError;

    fn try_from(raw: RawMarginal) -> Result<Self> {
        MarginalDesign::new(raw.points, raw.weights)
    }
}

impl MarginalDesign {
    /// Validates, sorts decreasingly and renormalizes the weights to sum to 1.
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(DesignError::InvalidDesign(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(p) = points
            .iter()
            .find(|p| !p.is_finite() || !(-1.0..=1.0).contains(*p))
        {
            return Err(DesignError::InvalidDesign(format!(
                "support point {p} outside [-1, 1]"
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(DesignError::InvalidDesign(format!(
                "weight {w} is not positive"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(DesignError::InvalidDesign(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let mut pairs: Vec<(f64, f64)> = points.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(DesignError::InvalidDesign(
                "support points must be distinct".into(),
            ));
        }
        let (points, weights): (Vec<f64>, Vec<f64>) =
            pairs.into_iter().map(|(p, w)| (p, w / total)).unzip();
        Ok(Self { points, weights })
    }

    /// {x: α, y: 1 − α} with x > y.
    pub fn two_point(x: f64, y: f64, alpha: f64) -> Result<Self> {
        if x <= y {
            return Err(DesignError::InvalidDesign(format!(
                "expected x > y, got x = {x}, y = {y}"
            )));
        }
        Self::new(vec![x, y], vec![alpha, 1.0 - alpha])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// A finitely supported design on the unit sphere in ℝᵏ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDesign {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl ExactDesign {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(DesignError::InvalidDesign(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let k = points[0].len();
        if k == 0 || points.iter().any(|p| p.len() != k) {
            return Err(DesignError::Dimension(
                "all points must share a positive dimension".into(),
            ));
        }
        for p in &points {
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > SPHERE_TOL {
                return Err(DesignError::InvalidDesign(format!(
                    "point {p:?} has norm {norm}, not on the unit sphere"
                )));
            }
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(DesignError::InvalidDesign("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(DesignError::InvalidDesign(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { points, weights })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Projection onto the first coordinate; points closer than `tol` merge.
    pub fn marginal(&self, tol: f64) -> Result<MarginalDesign> {
        let mut pairs: Vec<(f64, f64)> = self
            .points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| (p[0], w))
            .collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (x, w) in pairs {
            match merged.last_mut() {
                Some(last) if (last.0 - x).abs() <= tol => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        let (points, weights) = merged.into_iter().unzip();
        MarginalDesign::new(points, weights)
    }
}
