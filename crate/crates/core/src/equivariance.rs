//! Reduction of a parameter vector to the canonical form (β₀, β̃₁, 0, …, 0).

use nalgebra::{DMatrix, DVector};

use crate::design::ExactDesign;
use crate::error::{DesignError, Result};

/// Norms of (β₁, …, β_k) below this are treated as zero.
pub const ZERO_SLOPE_TOL: f64 = 1e-14;

/// A parameter vector in canonical coordinates together with the orthogonal
/// map back to the original coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalProblem {
    k: usize,
    beta0: f64,
    beta1_tilde: f64,
    rotation: DMatrix<f64>,
}

impl CanonicalProblem {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn beta1_tilde(&self) -> f64 {
        self.beta1_tilde
    }

    /// Maps canonical coordinates to original coordinates; column 0 is the
    /// unit direction of (β₁, …, β_k).
    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn is_degenerate(&self) -> bool {
        self.beta1_tilde == 0.0
    }

    /// (β₀, β̃₁, 0, …, 0).
    pub fn canonical_beta(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.k + 1];
        b[0] = self.beta0;
        b[1] = self.beta1_tilde;
        b
    }

    /// The original parameter vector, reconstructed through the rotation.
    pub fn original_beta(&self) -> Vec<f64> {
        let mut b = vec![self.beta0];
        b.extend(self.rotation.column(0).iter().map(|r| r * self.beta1_tilde));
        b
    }
}

pub fn canonicalize(beta: &[f64]) -> Result<CanonicalProblem> {
    if beta.len() < 2 {
        return Err(DesignError::Dimension(format!(
            "parameter vector needs length k + 1 >= 2, got {}",
            beta.len()
        )));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(DesignError::Domain("parameters must be finite".into()));
    }
    let k = beta.len() - 1;
    let slope = DVector::from_column_slice(&beta[1..]);
    let norm = slope.norm();
    if norm < ZERO_SLOPE_TOL {
        return Ok(CanonicalProblem {
            k,
            beta0: beta[0],
            beta1_tilde: 0.0,
            rotation: DMatrix::identity(k, k),
        });
    }
    let v = slope / norm;
    Ok(CanonicalProblem {
        k,
        beta0: beta[0],
        beta1_tilde: norm,
        rotation: householder_to(&v),
    })
}

/// Orthogonal R with R e₁ = v, built from one Householder reflection.
///
/// When v₁ > 0 the reflection e₁ ↦ −v is used and the first column flipped,
/// so the Householder vector never suffers cancellation.
fn householder_to(v: &DVector<f64>) -> DMatrix<f64> {
    let k = v.len();
    let flip = v[0] > 0.0;
    let mut u = if flip { v.clone() } else { -v.clone() };
    u[0] += 1.0;
    let uu = u.norm_squared();
    let mut r = DMatrix::identity(k, k) - (&u * u.transpose()) * (2.0 / uu);
    if flip {
        r.column_mut(0).neg_mut();
    }
    r
}

/// Applies the canonical-to-original rotation to every support point.
pub fn push_forward(design: &ExactDesign, problem: &CanonicalProblem) -> Result<ExactDesign> {
    if design.dim() != problem.k {
        return Err(DesignError::Dimension(format!(
            "design lives in dimension {}, problem in {}",
            design.dim(),
            problem.k
        )));
    }
    let points = design
        .points()
        .iter()
        .map(|p| {
            let x = &problem.rotation * DVector::from_column_slice(p);
            x.iter().copied().collect()
        })
        .collect();
    ExactDesign::new(points, design.weights().to_vec())
}

/// Ellipsoidal regions: points x ↦ S x for a diagonal scaling S.
pub fn scale_points(points: &[Vec<f64>], scales: &[f64]) -> Result<Vec<Vec<f64>>> {
    points
        .iter()
        .map(|p| {
            if p.len() != scales.len() {
                return Err(DesignError::Dimension(format!(
                    "point of dimension {} vs {} scales",
                    p.len(),
                    scales.len()
                )));
            }
            Ok(p.iter().zip(scales).map(|(x, s)| x * s).collect())
        })
        .collect()
}

/// The matching parameter map (β₀, b) ↦ (β₀, S⁻¹ b), leaving every linear
/// predictor unchanged.
pub fn scale_parameters(beta: &[f64], scales: &[f64]) -> Result<Vec<f64>> {
    if beta.len() != scales.len() + 1 {
        return Err(DesignError::Dimension(format!(
            "{} parameters vs {} scales",
            beta.len(),
            scales.len()
        )));
    }
    if scales.iter().any(|s| !s.is_finite() || *s == 0.0) {
        return Err(DesignError::Domain("scales must be finite and non-zero".into()));
    }
    let mut out = vec![beta[0]];
    out.extend(beta[1..].iter().zip(scales).map(|(b, s)| b / s));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_orthogonal(r: &DMatrix<f64>) {
        let e = r.transpose() * r - DMatrix::identity(r.nrows(), r.nrows());
        assert!(e.amax() < 1e-12, "{e}");
    }

    #[test]
    fn already_canonical() {
        let p = canonicalize(&[1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.beta0(), 1.0);
        assert_eq!(p.beta1_tilde(), 2.0);
        assert!((p.rotation() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn coordinate_permutation() {
        let p = canonicalize(&[0.5, 0.0, 0.0, 3.0]).unwrap();
        assert_eq!(p.beta1_tilde(), 3.0);
        let e1 = p.rotation().column(0);
        assert!((e1[2] - 1.0).abs() < 1e-15 && e1[0].abs() < 1e-15 && e1[1].abs() < 1e-15);
        assert_orthogonal(p.rotation());
    }

    #[test]
    fn diagonal_direction() {
        let p = canonicalize(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((p.beta1_tilde() - 3f64.sqrt()).abs() < 1e-15);
        let c = p.rotation().column(0);
        for i in 0..3 {
            assert!((c[i] - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
        assert_orthogonal(p.rotation());
        let back = p.original_beta();
        for (a, b) in back.iter().zip([1.0, 1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_slope_and_errors() {
        let p = canonicalize(&[0.3, 0.0, 0.0]).unwrap();
        assert!(p.is_degenerate());
        assert_eq!(p.rotation(), &DMatrix::<f64>::identity(2, 2));
        assert!(matches!(canonicalize(&[1.0]), Err(DesignError::Dimension(_))));
        assert!(canonicalize(&[1.0, f64::NAN]).is_err());
        let p = canonicalize(&[0.0, -2.0]).unwrap();
        assert_eq!(p.beta1_tilde(), 2.0);
        assert_eq!(p.rotation()[(0, 0)], -1.0);
    }

    #[test]
    fn planar_quarter_turn() {
        let p = CanonicalProblem {
            k: 2,
            beta0: 0.0,
            beta1_tilde: 1.0,
            rotation: DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]),
        };
        let d = ExactDesign::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        let out = push_forward(&d, &p).unwrap();
        assert!((out.points()[0][0]).abs() < 1e-15);
        assert!((out.points()[0][1] - 1.0).abs() < 1e-15);
        assert_eq!(out.weights(), &[1.0]);

        let id = canonicalize(&[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(push_forward(&d, &id).unwrap(), d);
        let d3 = ExactDesign::new(vec![vec![1.0, 0.0, 0.0]], vec![1.0]).unwrap();
        assert!(matches!(push_forward(&d3, &id), Err(DesignError::Dimension(_))));
    }

    #[test]
    fn scaling_keeps_linear_predictor() {
        let beta = [0.2, 1.0, -3.0];
        let s = [2.0, 0.5];
        let b2 = scale_parameters(&beta, &s).unwrap();
        let pts = scale_points(&[vec![0.6, 0.8]], &s).unwrap();
        let lp = |b: &[f64], x: &[f64]| b[0] + b[1] * x[0] + b[2] * x[1];
        assert!((lp(&beta, &[0.6, 0.8]) - lp(&b2, &pts[0])).abs() < 1e-15);
        assert!(scale_parameters(&beta, &[1.0, 0.0]).is_err());
    }
}
