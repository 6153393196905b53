//! Optimal marginal designs by case analysis on the mode of q.
//!
//! With c_q = (c_λ − β₀)/β₁ the optimum has one support point at the pole
//! x₁ = 1 when c_q > 1 (case A), at x₁ = −1 when c_q < −1 (case B), and is
//! searched over the closed box otherwise (case C). In case C the pole forms
//! remain candidates: the interior stationary point need not exist.

use serde::{Deserialize, Serialize};

use crate::design::{ExactDesign, MarginalDesign};
use crate::discretize::{orbit_vertices, Polytope};
use crate::equivariance::{canonicalize, CanonicalProblem};
use crate::error::{DesignError, Result};
use crate::information::{log_det_two_point, marginal_log_det};
use crate::models::{IntensityModel, ShiftedIntensity};
use crate::optim::{self, NelderMeadOptions};
use crate::roots;
use crate::verify;

/// Root brackets are refined to this width.
pub const ROOT_TOL: f64 = 1e-14;
/// Maximum residual accepted for the pole root equation and the interior system.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Distance from ±1 under which an optimized point counts as a pole.
pub const BOUNDARY_TOL: f64 = 1e-7;
pub use crate::verify::KW_TOL;
pub const KW_GRID: usize = 10_001;

const ROOT_SCAN_INTERVALS: usize = 2000;
const COARSE_GRID: usize = 41;
const STARTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    A,
    B,
    C,
    #[serde(rename = "DEGENERATE")]
    Degenerate,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C => "C",
            CaseLabel::Degenerate => "DEGENERATE",
        })
    }
}

/// Where the accepted support sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportForm {
    /// x₁₁* = 1 with weight 1/(k+1).
    UpperPole,
    /// x₁₂* = −1 with weight 1/(k+1).
    LowerPole,
    /// Both levels in (−1, 1).
    Interior,
    /// Constant intensity: regular simplex.
    Simplex,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Largest absolute residual of the defining equations at the solution.
    pub residual: f64,
    /// Log-det of every candidate the dispatcher compared, by form.
    pub candidates: Vec<(SupportForm, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub model: String,
    pub k: usize,
    /// Parameters as given.
    pub beta: Vec<f64>,
    pub beta0: f64,
    /// Norm of (β₁, …, β_k).
    pub beta1: f64,
    pub case: CaseLabel,
    pub form: SupportForm,
    pub marginal: MarginalDesign,
    pub log_det: f64,
    pub kw_max: f64,
    pub kw_argmax: f64,
    pub kw_pass: bool,
    pub diagnostics: Diagnostics,
}

impl SolveReport {
    pub fn problem(&self) -> Result<CanonicalProblem> {
        canonicalize(&self.beta)
    }

    pub fn shifted(&self) -> Result<ShiftedIntensity> {
        ShiftedIntensity::new(IntensityModel::from_name(&self.model)?, self.beta0, self.beta1)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub kw_grid: usize,
    pub kw_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            kw_grid: KW_GRID,
            kw_tol: KW_TOL,
        }
    }
}

pub fn classify(s: &ShiftedIntensity, k: usize) -> Result<CaseLabel> {
    if k == 0 {
        return Err(DesignError::Dimension("k must be at least 1".into()));
    }
    if s.beta1() == 0.0 {
        return Ok(CaseLabel::Degenerate);
    }
    let c = s.mode().expect("beta1 > 0");
    Ok(if c > 1.0 {
        CaseLabel::A
    } else if c < -1.0 {
        CaseLabel::B
    } else {
        CaseLabel::C
    })
}

/// q viewed through the reflection x₁ ↦ −x₁ when `sign` is −1.
#[derive(Clone, Copy)]
struct Profile<'a> {
    s: &'a ShiftedIntensity,
    sign: f64,
}

impl Profile<'_> {
    fn dlog_q(&self, x: f64) -> f64 {
        self.sign * self.s.dlog_q(self.sign * x)
    }
}

/// h(y) = (q′/q)(y)·k(1 − y²) − 2(1 + ky) for k ≥ 2, and
/// (q′/q)(y)(1 − y) − 2 for k = 1.
fn pole_equation(p: Profile<'_>, k: usize, y: f64) -> f64 {
    let g = p.dlog_q(y);
    if k == 1 {
        g * (1.0 - y) - 2.0
    } else {
        let kf = k as f64;
        g * kf * (1.0 - y * y) - 2.0 * (1.0 + kf * y)
    }
}

/// Best design of the form {1: 1/(k+1), y: k/(k+1)} on the (possibly
/// reflected) profile. Returns (y, residual, roots examined).
fn pole_inner_point(p: Profile<'_>, k: usize) -> Result<(f64, f64, usize)> {
    let kf = k as f64;
    let alpha = 1.0 / (kf + 1.0);
    let value = |y: f64| {
        // evaluate on the unreflected intensity
        if p.sign > 0.0 {
            log_det_two_point(p.s, 1.0, y, alpha, k)
        } else {
            log_det_two_point(p.s, -y, -1.0, 1.0 - alpha, k)
        }
    };
    let h = |y: f64| pole_equation(p, k, y);
    let mut roots = roots::all_roots(h, -1.0, 1.0, ROOT_SCAN_INTERVALS, ROOT_TOL);
    roots.retain(|&y| y < 1.0);
    if k >= 2 {
        roots.retain(|&y| y > -1.0);
        if roots.is_empty() {
            return Err(DesignError::Convergence(format!(
                "pole equation has no root in (-1, 1) (h(-1) = {}, h(1) = {})",
                h(-1.0),
                h(1.0)
            )));
        }
    } else if roots.is_empty() {
        roots.push(-1.0);
    }
    let n = roots.len();
    let best = roots
        .into_iter()
        .max_by(|a, b| value(*a).total_cmp(&value(*b)))
        .expect("non-empty");
    let residual = if k == 1 && best == -1.0 && h(-1.0) < 0.0 {
        0.0
    } else {
        h(best).abs()
    };
    if residual > RESIDUAL_TOL {
        return Err(DesignError::Convergence(format!(
            "pole equation residual {residual:e} at y = {best}"
        )));
    }
    Ok((best, residual, n))
}

/// Case A: x₁₁* = 1 with weight 1/(k+1), x₁₂* from the pole equation.
pub fn solve_case_a(s: &ShiftedIntensity, k: usize) -> Result<MarginalDesign> {
    Ok(case_a(s, k)?.0)
}

fn case_a(s: &ShiftedIntensity, k: usize) -> Result<(MarginalDesign, f64, usize)> {
    check_k(k)?;
    let (y, residual, n) = pole_inner_point(Profile { s, sign: 1.0 }, k)?;
    let kf = k as f64;
    let design = MarginalDesign::two_point(1.0, y, 1.0 / (kf + 1.0))?;
    Ok((design, residual, n))
}

/// Case B: the mirror image of case A, x₁₂* = −1 with weight 1/(k+1).
pub fn solve_case_b(s: &ShiftedIntensity, k: usize) -> Result<MarginalDesign> {
    Ok(case_b(s, k)?.0)
}

fn case_b(s: &ShiftedIntensity, k: usize) -> Result<(MarginalDesign, f64, usize)> {
    check_k(k)?;
    let (y, residual, n) = pole_inner_point(Profile { s, sign: -1.0 }, k)?;
    let kf = k as f64;
    let design = MarginalDesign::two_point(-y, -1.0, kf / (kf + 1.0))?;
    Ok((design, residual, n))
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(DesignError::Dimension("k must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Maximizer over α of ln α + ln(1 − α) + (k − 1) ln(aα + b(1 − α)) with
/// a = q(x)(1 − x²), b = q(y)(1 − y²) on a common scale.
///
/// The stationarity condition reduces to
/// −(k+1)(a − b)α² + (k(a − b) − 2b)α + b = 0, which has exactly one root in
/// [0, 1] whenever a + b > 0.
pub(crate) fn optimal_alpha(a: f64, b: f64, k: usize) -> f64 {
    if k == 1 {
        return 0.5;
    }
    let kf = k as f64;
    let d = a - b;
    let c2 = -(kf + 1.0) * d;
    let c1 = kf * d - 2.0 * b;
    let c0 = b;
    let root = if c2.abs() <= 1e-14 * (c1.abs() + c0.abs()) {
        -c0 / c1
    } else {
        let disc = (c1 * c1 - 4.0 * c2 * c0).max(0.0);
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        let r1 = q / c2;
        let r2 = if q != 0.0 { c0 / q } else { f64::NAN };
        // the cleared polynomial is b ≥ 0 at 0 and −a ≤ 0 at 1; the wanted
        // root is the downward crossing in between
        let wanted = |r: f64| (-1e-12..=1.0 + 1e-12).contains(&r) && 2.0 * c2 * r + c1 <= 0.0;
        if wanted(r1) {
            r1
        } else {
            r2
        }
    };
    root.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// Values needed for the interior system at (x, y) on a common scale.
struct Pair {
    gx: f64,
    gy: f64,
    qx: f64,
    qy: f64,
}

impl Pair {
    fn new(s: &ShiftedIntensity, x: f64, y: f64) -> Self {
        let (lx, ly) = (s.log_q(x), s.log_q(y));
        let top = lx.max(ly);
        Self {
            gx: s.dlog_q(x),
            gy: s.dlog_q(y),
            qx: (lx - top).exp(),
            qy: (ly - top).exp(),
        }
    }

    fn alpha(&self, x: f64, y: f64, k: usize) -> f64 {
        optimal_alpha(self.qx * (1.0 - x * x), self.qy * (1.0 - y * y), k)
    }
}

/// Residuals of the three stationarity equations (derivatives of the two-point
/// log-det in x, y and α).
pub fn stationarity_residuals(s: &ShiftedIntensity, x: f64, y: f64, alpha: f64, k: usize) -> [f64; 3] {
    let p = Pair::new(s, x, y);
    residuals_with(&p, x, y, alpha, k)
}

fn residuals_with(p: &Pair, x: f64, y: f64, alpha: f64, k: usize) -> [f64; 3] {
    let km1 = (k - 1) as f64;
    let gap = 2.0 / (x - y);
    let mut r = [p.gx + gap, p.gy - gap, 1.0 / alpha - 1.0 / (1.0 - alpha)];
    if k > 1 {
        let ax = p.qx * (1.0 - x * x);
        let by = p.qy * (1.0 - y * y);
        let d = ax * alpha + by * (1.0 - alpha);
        r[0] += km1 * alpha * p.qx * (p.gx * (1.0 - x * x) - 2.0 * x) / d;
        r[1] += km1 * (1.0 - alpha) * p.qy * (p.gy * (1.0 - y * y) - 2.0 * y) / d;
        r[2] += km1 * (ax - by) / d;
    }
    r
}

/// ln det with α profiled out; −∞ outside {−1 ≤ y < x ≤ 1}.
fn profiled(s: &ShiftedIntensity, x: f64, y: f64, k: usize) -> (f64, f64) {
    if !(x <= 1.0 && y >= -1.0 && x > y) {
        return (f64::NEG_INFINITY, f64::NAN);
    }
    let alpha = Pair::new(s, x, y).alpha(x, y, k);
    (log_det_two_point(s, x, y, alpha, k), alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CaseCOutcome {
    Interior {
        design: MarginalDesign,
        residuals: [f64; 3],
        iterations: usize,
    },
    /// The box maximum lies on a face; one of the pole forms is optimal.
    Boundary,
}

/// Case C: interior stationary point of the two-point log-det, if the box
/// maximum is interior.
pub fn solve_case_c(s: &ShiftedIntensity, k: usize) -> Result<CaseCOutcome> {
    check_k(k)?;
    let n = COARSE_GRID;
    let grid: Vec<f64> = (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect();
    let mut coarse: Vec<(f64, f64, f64)> = Vec::with_capacity(n * n / 2);
    for (i, &x) in grid.iter().enumerate() {
        for &y in &grid[..i] {
            let (v, _) = profiled(s, x, y, k);
            if v.is_finite() {
                coarse.push((v, x, y));
            }
        }
    }
    coarse.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut starts: Vec<(f64, f64)> = Vec::new();
    for &(_, x, y) in &coarse {
        if starts
            .iter()
            .all(|&(sx, sy)| (sx - x).abs() + (sy - y).abs() > 0.15)
        {
            starts.push((x, y));
        }
        if starts.len() == STARTS {
            break;
        }
    }
    if starts.is_empty() {
        return Err(DesignError::Singular("every coarse two-point design is singular".into()));
    }

    let opts = NelderMeadOptions {
        initial_step: 0.03,
        ..Default::default()
    };
    let mut polished: Vec<(f64, f64, f64, usize)> = starts
        .iter()
        .map(|&(x, y)| {
            let r = optim::maximize(|p| profiled(s, p[0], p[1], k).0, &[x, y], opts);
            (r.value, r.point[0], r.point[1], r.iterations)
        })
        .collect();
    polished.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (_, x, y, nm_iters) = polished[0];
    if x >= 1.0 - BOUNDARY_TOL || y <= -1.0 + BOUNDARY_TOL {
        return Ok(CaseCOutcome::Boundary);
    }
    let (x, y, newton_iters) = newton_polish(s, x, y, k)?;
    if x >= 1.0 - BOUNDARY_TOL || y <= -1.0 + BOUNDARY_TOL {
        return Ok(CaseCOutcome::Boundary);
    }
    let p = Pair::new(s, x, y);
    let alpha = p.alpha(x, y, k);
    let residuals = residuals_with(&p, x, y, alpha, k);
    let worst = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    if worst > RESIDUAL_TOL {
        return Err(DesignError::Convergence(format!(
            "interior system residual {worst:e} at x = {x}, y = {y}, alpha = {alpha}"
        )));
    }
    Ok(CaseCOutcome::Interior {
        design: MarginalDesign::two_point(x, y, alpha)?,
        residuals,
        iterations: nm_iters + newton_iters,
    })
}

/// Damped Newton on the (x, y) gradient with α at its profiled optimum.
fn newton_polish(s: &ShiftedIntensity, mut x: f64, mut y: f64, k: usize) -> Result<(f64, f64, usize)> {
    let grad = |x: f64, y: f64| {
        let p = Pair::new(s, x, y);
        let a = p.alpha(x, y, k);
        let r = residuals_with(&p, x, y, a, k);
        [r[0], r[1]]
    };
    let norm = |g: [f64; 2]| g[0].abs().max(g[1].abs());
    let feasible = |x: f64, y: f64| x < 1.0 && y > -1.0 && x > y;
    let mut g = grad(x, y);
    for it in 0..100 {
        if norm(g) <= 1e-12 {
            return Ok((x, y, it));
        }
        let h = 1e-7;
        let gxp = grad(x + h, y);
        let gxm = grad(x - h, y);
        let gyp = grad(x, y + h);
        let gym = grad(x, y - h);
        let j = [
            [(gxp[0] - gxm[0]) / (2.0 * h), (gyp[0] - gym[0]) / (2.0 * h)],
            [(gxp[1] - gxm[1]) / (2.0 * h), (gyp[1] - gym[1]) / (2.0 * h)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det == 0.0 {
            break;
        }
        let dx = (j[1][1] * g[0] - j[0][1] * g[1]) / det;
        let dy = (-j[1][0] * g[0] + j[0][0] * g[1]) / det;
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-6 {
            let (nx, ny) = (x - t * dx, y - t * dy);
            if feasible(nx, ny) {
                let ng = grad(nx, ny);
                if norm(ng) < norm(g) {
                    x = nx;
                    y = ny;
                    g = ng;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if norm(g) <= RESIDUAL_TOL {
        Ok((x, y, 100))
    } else {
        Err(DesignError::Convergence(format!(
            "Newton polish stalled at x = {x}, y = {y} with gradient {g:?}"
        )))
    }
}

/// Regular simplex inscribed in the unit sphere with a vertex at e₁ and equal weights.
pub fn solve_degenerate(k: usize) -> Result<ExactDesign> {
    check_k(k)?;
    let kf = k as f64;
    let mut points = vec![{
        let mut e = vec![0.0; k];
        e[0] = 1.0;
        e
    }];
    let level = orbit_vertices(k, -1.0 / kf, Polytope::Simplex, None)?;
    points.extend(level.points().iter().cloned());
    let w = 1.0 / (kf + 1.0);
    ExactDesign::new(points, vec![w; k + 1])
}

/// Marginal of [`solve_degenerate`]: {1: 1/(k+1), −1/k: k/(k+1)}.
pub fn degenerate_marginal(k: usize) -> Result<MarginalDesign> {
    check_k(k)?;
    let kf = k as f64;
    MarginalDesign::two_point(1.0, -1.0 / kf, 1.0 / (kf + 1.0))
}

/// Limit of the inner support point of the logit model as |β₀| → ∞.
pub fn asymptotic_inner_point(model: &IntensityModel, beta1: f64, k: usize) -> Result<f64> {
    if model.name() != "logit" {
        return Err(DesignError::Contract(
            "the closed-form limit is derived for the logit intensity".into(),
        ));
    }
    check_k(k)?;
    if !(beta1 >= 0.0 && beta1.is_finite()) {
        return Err(DesignError::Domain(format!("beta1 = {beta1} must be >= 0")));
    }
    let kf = k as f64;
    if beta1 == 0.0 {
        return Ok(-1.0 / kf);
    }
    let disc = 1.0 - 2.0 * beta1 / kf + beta1 * beta1;
    if disc < 0.0 {
        return Err(DesignError::Domain(format!("negative discriminant {disc}")));
    }
    Ok((-1.0 + disc.sqrt()) / beta1)
}

/// Full pipeline: canonicalize, classify, solve the applicable cases, keep the
/// best log-det and certify it with the equivalence theorem.
pub fn solve(model: &IntensityModel, beta: &[f64], opts: SolveOptions) -> Result<SolveReport> {
    let problem = canonicalize(beta)?;
    let k = problem.k();
    let s = ShiftedIntensity::new(model.clone(), problem.beta0(), problem.beta1_tilde())?;
    let mut report = solve_canonical(&s, k, opts)?;
    report.beta = beta.to_vec();
    Ok(report)
}

/// [`solve`] for parameters already in canonical form.
pub fn solve_canonical(s: &ShiftedIntensity, k: usize, opts: SolveOptions) -> Result<SolveReport> {
    let case = classify(s, k)?;
    let mut diagnostics = Diagnostics::default();

    let (form, marginal) = match case {
        CaseLabel::Degenerate => (SupportForm::Simplex, degenerate_marginal(k)?),
        CaseLabel::A => {
            let (d, residual, n) = case_a(s, k)?;
            diagnostics.residual = residual;
            diagnostics.iterations = n;
            (SupportForm::UpperPole, d)
        }
        CaseLabel::B => {
            let (d, residual, n) = case_b(s, k)?;
            diagnostics.residual = residual;
            diagnostics.iterations = n;
            (SupportForm::LowerPole, d)
        }
        CaseLabel::C => {
            let mut candidates: Vec<(SupportForm, MarginalDesign, f64, usize)> = Vec::new();
            if let CaseCOutcome::Interior {
                design,
                residuals,
                iterations,
            } = solve_case_c(s, k)?
            {
                let worst = residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
                candidates.push((SupportForm::Interior, design, worst, iterations));
            }
            let (a, ra, na) = case_a(s, k)?;
            candidates.push((SupportForm::UpperPole, a, ra, na));
            let (b, rb, nb) = case_b(s, k)?;
            candidates.push((SupportForm::LowerPole, b, rb, nb));

            let scored: Vec<(f64, SupportForm, MarginalDesign, f64, usize)> = candidates
                .into_iter()
                .map(|(f, d, r, n)| (marginal_log_det(s, &d, k).unwrap_or(f64::NEG_INFINITY), f, d, r, n))
                .collect();
            diagnostics.candidates = scored.iter().map(|c| (c.1, c.0)).collect();
            let best = scored
                .into_iter()
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .expect("pole candidates always exist");
            diagnostics.residual = best.3;
            diagnostics.iterations = best.4;
            (best.1, best.2)
        }
    };

    let log_det = marginal_log_det(s, &marginal, k)?;
    let kw = verify::kw_check_with_tol(s, &marginal, k, opts.kw_grid, opts.kw_tol)?;
    let mut beta = vec![0.0; k + 1];
    beta[0] = s.beta0();
    beta[1] = s.beta1();
    Ok(SolveReport {
        model: s.model().name().to_string(),
        k,
        beta,
        beta0: s.beta0(),
        beta1: s.beta1(),
        case,
        form,
        marginal,
        log_det,
        kw_max: kw.max_psi,
        kw_argmax: kw.argmax_x1,
        kw_pass: kw.pass,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logit(b0: f64, b1: f64) -> ShiftedIntensity {
        ShiftedIntensity::new(IntensityModel::logit(), b0, b1).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&logit(-0.5, 1.0), 3).unwrap(), CaseLabel::C);
        assert_eq!(classify(&logit(-2.0, 1.0), 3).unwrap(), CaseLabel::A);
        assert_eq!(classify(&logit(2.0, 1.0), 3).unwrap(), CaseLabel::B);
        assert_eq!(classify(&logit(-1.0, 1.0), 3).unwrap(), CaseLabel::C);
        assert_eq!(classify(&logit(1.0, 1.0), 3).unwrap(), CaseLabel::C);
        assert_eq!(classify(&logit(1.0, 0.0), 3).unwrap(), CaseLabel::Degenerate);
        let e = ShiftedIntensity::new(IntensityModel::exponential(), 5.0, 0.1).unwrap();
        assert_eq!(classify(&e, 2).unwrap(), CaseLabel::A);
        assert!(classify(&e, 0).is_err());
    }

    #[test]
    fn optimal_alpha_matches_bisection() {
        for &(a, b, k) in &[
            (0.8, 0.3, 3usize),
            (0.3, 0.8, 3),
            (0.5, 0.5, 6),
            (0.0, 0.4, 4),
            (0.4, 0.0, 4),
            (1e-9, 2.0, 2),
            (0.7, 0.2, 1),
        ] {
            let km1 = (k - 1) as f64;
            let deriv = |t: f64| 1.0 / t - 1.0 / (1.0 - t) + km1 * (a - b) / (a * t + b * (1.0 - t));
            let r = roots::bisect(deriv, 1e-15, 1.0 - 1e-15, 1e-15).unwrap();
            assert!((optimal_alpha(a, b, k) - r).abs() < 1e-10, "{a} {b} {k}");
        }
        assert!((optimal_alpha(0.0, 1.0, 3) - 0.25).abs() < 1e-15);
        assert!((optimal_alpha(1.0, 0.0, 3) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn case_a_root_satisfies_equation() {
        let s = logit(-2.0, 1.0);
        let d = solve_case_a(&s, 3).unwrap();
        assert_eq!(d.points()[0], 1.0);
        assert_eq!(d.weights()[0], 0.25);
        let y = d.points()[1];
        let rhs = 2.0 * (1.0 + 3.0 * y) / (3.0 * (1.0 - y * y));
        assert!((s.dlog_q(y) - rhs).abs() < 1e-9);
    }

    #[test]
    fn case_b_is_reflection_of_case_a() {
        // reflect logit(b0, b1) via λ(−z) = λ(z): q(−x) = λ(−b0 + b1 x)
        for (b0, b1, k) in [(1.7, 1.0, 3usize), (30.0, 1.0, 2), (2.5, 2.0, 1)] {
            let b = solve_case_b(&logit(b0, b1), k).unwrap();
            let a = solve_case_a(&logit(-b0, b1), k).unwrap();
            assert_eq!(b.points()[1], -1.0);
            assert!((b.points()[0] + a.points()[1]).abs() < 1e-12);
            assert!((b.weights()[0] - a.weights()[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn k1_pole_fallback() {
        // logit with small slope: q'/q(1 - y) never reaches 2
        let d = solve_case_a(&logit(-2.0, 1.0), 1).unwrap();
        assert_eq!(d.points(), &[1.0, -1.0]);
        // exponential with slope 3: root of 3(1 - y) = 2 is y = 1/3
        let e = ShiftedIntensity::new(IntensityModel::exponential(), 0.0, 3.0).unwrap();
        let d = solve_case_a(&e, 1).unwrap();
        assert!((d.points()[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_limits() {
        let m = IntensityModel::logit();
        assert!((asymptotic_inner_point(&m, 1.0, 3).unwrap() - 0.154_700_538_379_251_5).abs() < 1e-12);
        assert!((asymptotic_inner_point(&m, 1.0, 6).unwrap() - 0.290_994_448_735_805_6).abs() < 1e-12);
        assert_eq!(asymptotic_inner_point(&m, 0.0, 4).unwrap(), -0.25);
        assert!(asymptotic_inner_point(&IntensityModel::probit(), 1.0, 3).is_err());
        assert!(asymptotic_inner_point(&m, -1.0, 3).is_err());
    }

    #[test]
    fn degenerate_simplex() {
        for k in 1..=6 {
            let d = solve_degenerate(k).unwrap();
            assert_eq!(d.len(), k + 1);
            let m = d.marginal(1e-12).unwrap();
            let expected = degenerate_marginal(k).unwrap();
            assert_eq!(m.len(), expected.len());
            for (a, b) in m.iter().zip(expected.iter()) {
                assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
            }
        }
    }
}
