//! Derivative-free maximization (Nelder–Mead) used to polish grid starts.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub initial_step: f64,
    pub max_iter: usize,
    /// Stop when the simplex spread in both value and position drops below this.
    pub tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.02,
            max_iter: 5000,
            tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Maximizes `f`; infeasible points should evaluate to −∞.
pub fn maximize(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    opts: NelderMeadOptions,
) -> NelderMeadResult {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = f(start);
    simplex.push((start.to_vec(), v0));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += opts.initial_step;
        let mut v = f(&p);
        if !v.is_finite() {
            p[i] = start[i] - opts.initial_step;
            v = f(&p);
        }
        simplex.push((p, v));
    }

    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        // best first
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = simplex
            .iter()
            .skip(1)
            .flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if best.is_finite() && (best - worst).abs() <= opts.tol && spread <= opts.tol.sqrt() * 1e-2
        {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, w: &[f64]| -> Vec<f64> {
            centroid
                .iter()
                .zip(w)
                .map(|(c, x)| c + t * (x - c))
                .collect()
        };
        let worst_p = simplex[n].0.clone();

        let reflected = along(-1.0, &worst_p);
        let fr = f(&reflected);
        if fr > simplex[0].1 {
            let expanded = along(-2.0, &worst_p);
            let fe = f(&expanded);
            simplex[n] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr > worst {
            let c = along(-0.5, &worst_p);
            let v = f(&c);
            (c, v)
        } else {
            let c = along(0.5, &worst_p);
            let v = f(&c);
            (c, v)
        };
        if fc > worst.max(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        // shrink toward the best vertex
        let best_p = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let p: Vec<f64> = best_p
                .iter()
                .zip(&entry.0)
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            let v = f(&p);
            *entry = (p, v);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (point, value) = simplex.swap_remove(0);
    NelderMeadResult {
        point,
        value,
        iterations,
    }
}
