//! Exact designs from rotation-invariant ones.
//!
//! The uniform distribution on an orbit {x : x₁ = c, ‖x‖ = 1} carries the same
//! information as any set of n points on it whose centred parts form a tight
//! frame: Σ v = 0 and Σ v vᵀ = (n r²/(k−1)) I. Vertices of a regular simplex,
//! cross-polytope or cube inscribed in the orbit all qualify.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::design::{ExactDesign, MarginalDesign};
use crate::error::{DesignError, Result};
use crate::information::{exact_log_det, marginal_log_det};
use crate::models::ShiftedIntensity;

/// Largest cube dimension (k − 1) accepted; 2^20 vertices.
pub const MAX_CUBE_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polytope {
    Simplex,
    CrossPolytope,
    Cube,
    /// A pole orbit, x₁ = ±1.
    Point,
}

impl Polytope {
    /// Vertex count on an orbit of a k-dimensional ball.
    pub fn vertex_count(self, k: usize) -> Option<usize> {
        let d = k.checked_sub(1)?;
        match self {
            Polytope::Point => Some(1),
            _ if d == 0 => None,
            Polytope::Simplex => Some(k),
            Polytope::CrossPolytope => Some(2 * d),
            Polytope::Cube if d <= MAX_CUBE_DIM => Some(1 << d),
            Polytope::Cube => None,
        }
    }
}

impl std::str::FromStr for Polytope {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(Polytope::Simplex),
            "cross" | "cross-polytope" | "cross_polytope" => Ok(Polytope::CrossPolytope),
            "cube" => Ok(Polytope::Cube),
            "point" => Ok(Polytope::Point),
            _ => Err(DesignError::Contract(format!("unknown polytope `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDiscretization {
    pub x1: f64,
    pub radius: f64,
    pub polytope: Polytope,
    pub points: Vec<Vec<f64>>,
}

impl OrbitDiscretization {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Unit-norm vertices of a centred regular polytope in ℝᵈ.
fn unit_vertices(d: usize, polytope: Polytope) -> Result<Vec<Vec<f64>>> {
    match polytope {
        Polytope::Simplex => {
            // Helmert basis of the hyperplane orthogonal to (1, …, 1) in ℝ^(d+1)
            let scale = (d as f64 / (d as f64 + 1.0)).sqrt();
            Ok((0..=d)
                .map(|i| {
                    (1..=d)
                        .map(|j| {
                            let norm = ((j * (j + 1)) as f64).sqrt();
                            let c = match i.cmp(&j) {
                                std::cmp::Ordering::Less => 1.0,
                                std::cmp::Ordering::Equal => -(j as f64),
                                std::cmp::Ordering::Greater => 0.0,
                            };
                            c / norm / scale
                        })
                        .collect()
                })
                .collect())
        }
        Polytope::CrossPolytope => Ok((0..d)
            .flat_map(|j| {
                [1.0, -1.0].into_iter().map(move |s| {
                    let mut v = vec![0.0; d];
                    v[j] = s;
                    v
                })
            })
            .collect()),
        Polytope::Cube => {
            if d > MAX_CUBE_DIM {
                return Err(DesignError::Dimension(format!(
                    "cube with {} vertices is too large",
                    2f64.powi(d as i32)
                )));
            }
            let c = 1.0 / (d as f64).sqrt();
            Ok((0..1usize << d)
                .map(|mask| {
                    (0..d)
                        .map(|j| if mask >> j & 1 == 1 { -c } else { c })
                        .collect()
                })
                .collect())
        }
        Polytope::Point => Ok(vec![vec![0.0; d]]),
    }
}

/// Vertices of a regular polytope inscribed in the orbit at level `x1`.
///
/// `orientation`, when given, is a (k−1)×(k−1) orthogonal matrix applied to
/// the polytope before it is placed on the orbit.
pub fn orbit_vertices(
    k: usize,
    x1: f64,
    polytope: Polytope,
    orientation: Option<&DMatrix<f64>>,
) -> Result<OrbitDiscretization> {
    if k == 0 {
        return Err(DesignError::Dimension("k must be at least 1".into()));
    }
    if !(x1.abs() <= 1.0) {
        return Err(DesignError::Domain(format!("orbit level {x1} outside [-1, 1]")));
    }
    let d = k - 1;
    let pole = x1.abs() == 1.0;
    if k == 1 && !pole {
        return Err(DesignError::Domain(format!(
            "for k = 1 the sphere is {{-1, 1}}, got level {x1}"
        )));
    }
    if polytope == Polytope::Point && !pole {
        return Err(DesignError::Contract(format!(
            "a single point cannot represent the orbit at x1 = {x1}"
        )));
    }
    let polytope = if pole { Polytope::Point } else { polytope };
    let radius = (1.0 - x1 * x1).max(0.0).sqrt();
    let mut unit = unit_vertices(d, polytope)?;
    if let Some(r) = orientation {
        if r.nrows() != d || r.ncols() != d {
            return Err(DesignError::Dimension(format!(
                "orientation must be {d}x{d}, got {}x{}",
                r.nrows(),
                r.ncols()
            )));
        }
        for v in unit.iter_mut() {
            let rotated = r * nalgebra::DVector::from_column_slice(v);
            v.copy_from_slice(rotated.as_slice());
        }
    }
    let points = unit
        .into_iter()
        .map(|v| {
            let mut p = Vec::with_capacity(k);
            p.push(x1);
            p.extend(v.into_iter().map(|c| c * radius));
            p
        })
        .collect();
    Ok(OrbitDiscretization {
        x1,
        radius,
        polytope,
        points,
    })
}

/// Haar-distributed orthogonal d×d matrix from a seed.
pub fn random_orientation(d: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum Strategy {
    /// Pick per-orbit polytopes maximizing the efficiency of equal weights.
    #[default]
    Auto,
    /// The same polytope on every non-pole orbit.
    Uniform(Polytope),
    /// Explicit vertex counts per orbit (in marginal order); counts may
    /// combine several polytopes on one orbit.
    Counts(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Every support point gets weight 1/N.
    #[default]
    Equal,
    /// Each orbit keeps its marginal weight, split equally over its vertices.
    Exact,
}

#[derive(Debug, Clone, Default)]
pub struct DiscretizeOptions {
    pub strategy: Strategy,
    pub weighting: Weighting,
    /// Rotates every orbit's polytope about the x₁-axis reproducibly.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPlan {
    pub x1: f64,
    pub polytopes: Vec<Polytope>,
    pub count: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    /// In canonical coordinates.
    pub design: ExactDesign,
    pub orbits: Vec<OrbitPlan>,
    pub efficiency: f64,
}

/// Decomposes `n` into the fewest polytope vertex sets on an orbit of ℝᵏ.
fn decompose(n: usize, k: usize) -> Option<Vec<Polytope>> {
    let kinds: Vec<(Polytope, usize)> = [Polytope::Simplex, Polytope::CrossPolytope, Polytope::Cube]
        .into_iter()
        .filter_map(|p| p.vertex_count(k).map(|c| (p, c)))
        .collect();
    // fewest pieces by dynamic programming over counts
    let mut best: Vec<Option<Vec<Polytope>>> = vec![None; n + 1];
    best[0] = Some(Vec::new());
    for total in 1..=n {
        for &(p, c) in &kinds {
            if c <= total {
                if let Some(prev) = &best[total - c] {
                    let len = prev.len() + 1;
                    if best[total].as_ref().is_none_or(|b| len < b.len()) {
                        let mut v = prev.clone();
                        v.push(p);
                        best[total] = Some(v);
                    }
                }
            }
        }
    }
    best[n].take().filter(|v| !v.is_empty())
}

fn build(
    marginal: &MarginalDesign,
    k: usize,
    plan: &[Vec<Polytope>],
    weighting: Weighting,
    seed: Option<u64>,
) -> Result<(ExactDesign, Vec<OrbitPlan>)> {
    let d = k - 1;
    let mut orbits = Vec::with_capacity(marginal.len());
    let mut per_orbit: Vec<Vec<Vec<f64>>> = Vec::with_capacity(marginal.len());
    for (i, ((x1, _), polys)) in marginal.iter().zip(plan).enumerate() {
        let mut pts = Vec::new();
        for (j, &p) in polys.iter().enumerate() {
            // extra pieces on one orbit are turned against each other
            let orient = match (seed, j) {
                (Some(s), _) => Some(random_orientation(d, s.wrapping_add((i * 64 + j) as u64))),
                (None, 0) => None,
                (None, _) if d > 1 => Some(random_orientation(d, (i * 64 + j) as u64)),
                (None, _) => None,
            };
            pts.extend(orbit_vertices(k, x1, p, orient.as_ref())?.points);
        }
        orbits.push(OrbitPlan {
            x1,
            polytopes: polys.clone(),
            count: pts.len(),
            weight: 0.0,
        });
        per_orbit.push(pts);
    }
    let total: usize = per_orbit.iter().map(Vec::len).sum();
    let mut points = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for ((pts, orbit), (_, w)) in per_orbit.into_iter().zip(orbits.iter_mut()).zip(marginal.iter()) {
        let n = pts.len();
        let each = match weighting {
            Weighting::Equal => 1.0 / total as f64,
            Weighting::Exact => w / n as f64,
        };
        orbit.weight = each * n as f64;
        weights.extend(std::iter::repeat_n(each, n));
        points.extend(pts);
    }
    Ok((ExactDesign::new(points, weights)?, orbits))
}

fn canonical_beta(s: &ShiftedIntensity, k: usize) -> Vec<f64> {
    let mut beta = vec![0.0; k + 1];
    beta[0] = s.beta0();
    beta[1] = s.beta1();
    beta
}

/// Replaces every orbit of `marginal` by polytope vertices.
///
/// Never fails for lack of a perfect weight match: the returned efficiency
/// reports the rounding loss.
pub fn discretize_design(
    s: &ShiftedIntensity,
    marginal: &MarginalDesign,
    k: usize,
    opts: &DiscretizeOptions,
) -> Result<Discretization> {
    if k == 0 {
        return Err(DesignError::Dimension("k must be at least 1".into()));
    }
    let optimum = marginal_log_det(s, marginal, k)?;
    let beta = canonical_beta(s, k);
    let pole = |x: f64| x.abs() == 1.0;

    let plans: Vec<Vec<Vec<Polytope>>> = match &opts.strategy {
        Strategy::Uniform(p) => vec![marginal
            .points()
            .iter()
            .map(|&x| if pole(x) { vec![Polytope::Point] } else { vec![*p] })
            .collect()],
        Strategy::Counts(counts) => {
            if counts.len() != marginal.len() {
                return Err(DesignError::Dimension(format!(
                    "{} vertex counts for {} orbits",
                    counts.len(),
                    marginal.len()
                )));
            }
            let plan = marginal
                .points()
                .iter()
                .zip(counts)
                .map(|(&x, &n)| {
                    if pole(x) {
                        if n == 1 {
                            Ok(vec![Polytope::Point])
                        } else {
                            Err(DesignError::Contract(format!("pole orbit x1 = {x} has a single point")))
                        }
                    } else {
                        decompose(n, k).ok_or_else(|| {
                            DesignError::Contract(format!(
                                "{n} vertices cannot be assembled from polytopes in dimension {}",
                                k - 1
                            ))
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            vec![plan]
        }
        Strategy::Auto => {
            let kinds: Vec<Polytope> = if k == 1 {
                vec![]
            } else {
                let mut seen = Vec::new();
                let mut kinds = Vec::new();
                for p in [Polytope::Simplex, Polytope::CrossPolytope, Polytope::Cube] {
                    if let Some(c) = p.vertex_count(k) {
                        if !seen.contains(&c) {
                            seen.push(c);
                            kinds.push(p);
                        }
                    }
                }
                kinds
            };
            let mut plans: Vec<Vec<Vec<Polytope>>> = vec![Vec::new()];
            for &x in marginal.points() {
                let options: Vec<Polytope> = if pole(x) { vec![Polytope::Point] } else { kinds.clone() };
                plans = plans
                    .into_iter()
                    .flat_map(|plan| {
                        options.iter().map(move |&p| {
                            let mut next = plan.clone();
                            next.push(vec![p]);
                            next
                        })
                    })
                    .collect();
            }
            plans
        }
    };

    let mut best: Option<Discretization> = None;
    for plan in plans {
        let (design, orbits) = build(marginal, k, &plan, opts.weighting, opts.seed)?;
        let efficiency = d_efficiency_canonical(s, &design, optimum, k, &beta)?;
        let better = match &best {
            None => true,
            Some(b) => {
                efficiency > b.efficiency + 1e-12
                    || ((efficiency - b.efficiency).abs() <= 1e-12 && design.len() < b.design.len())
            }
        };
        if better {
            best = Some(Discretization {
                design,
                orbits,
                efficiency,
            });
        }
    }
    best.ok_or_else(|| DesignError::InvalidDesign("no polytope assignment available".into()))
}

fn d_efficiency_canonical(
    s: &ShiftedIntensity,
    candidate: &ExactDesign,
    optimal_log_det: f64,
    k: usize,
    beta: &[f64],
) -> Result<f64> {
    let ld = exact_log_det(s.model(), beta, candidate)?;
    if !ld.is_finite() {
        return Ok(0.0);
    }
    Ok(((ld - optimal_log_det) / k as f64).exp())
}

/// (det M(candidate) / det M(optimum))^(1/k); 0 for singular candidates.
pub fn d_efficiency(
    candidate: &ExactDesign,
    optimal_log_det: f64,
    k: usize,
    beta: &[f64],
    model: &crate::models::IntensityModel,
) -> Result<f64> {
    if candidate.dim() != k || beta.len() != k + 1 {
        return Err(DesignError::Dimension(format!(
            "candidate in dimension {}, k = {k}, {} parameters",
            candidate.dim(),
            beta.len()
        )));
    }
    let ld = exact_log_det(model, beta, candidate)?;
    if !ld.is_finite() {
        return Ok(0.0);
    }
    Ok(((ld - optimal_log_det) / k as f64).exp())
}
