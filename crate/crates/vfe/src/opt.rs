//! Limited-memory quasi-Newton descent with backtracking, used by the
//! filament-energy minimizer and (negated) by the ratio maximizer.
//!
//! Deliberately small: two-loop L-BFGS recursion, Armijo backtracking,
//! optional per-trial projection and acceptance hooks so callers can keep
//! iterates inside their feasible region without regularizing the objective.

use crate::Result;

pub struct Options {
    pub memory: usize,
    /// Terminate when the max-norm of the gradient drops below this.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub shrink: f64,
    pub max_line_failures: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            memory: 10,
            grad_tol: 1e-9,
            max_iter: 2000,
            armijo: 1e-4,
            shrink: 0.5,
            max_line_failures: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    GradTol,
    MaxIter,
    /// The line search failed `max_line_failures` times in a row.
    Stalled,
}

/// One accepted iterate, in order; the index in [`Outcome::trace`] is the
/// accepted-step count (a failed line search consumes an iteration but adds
/// no trace entry).
pub struct TracePoint {
    pub value: f64,
    pub grad_norm: f64,
    /// Whatever the `observe` hook measured at this iterate (NaN without one).
    pub extra: f64,
}

pub struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub stop: Stop,
    pub trace: Vec<TracePoint>,
    /// Number of trial points the projection hook had to modify.
    pub projections: usize,
}

pub struct Problem<'a> {
    /// Objective and gradient; the gradient buffer arrives zeroed-or-stale
    /// and must be fully overwritten.
    pub eval: &'a mut dyn FnMut(&[f64], &mut [f64]) -> Result<f64>,
    /// Clamp a trial point into the feasible region; returns how many
    /// coordinates were modified.
    pub project: Option<&'a dyn Fn(&mut [f64]) -> usize>,
    /// Reject trial points (treated as a failed line-search step).
    pub accept: Option<&'a dyn Fn(&[f64]) -> bool>,
    /// Diagnostic scalar recorded in the trace at every accepted iterate.
    pub observe: Option<&'a dyn Fn(&[f64]) -> f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimize `eval` starting from `x0`.
pub fn lbfgs(mut x: Vec<f64>, problem: Problem, opts: &Options) -> Result<Outcome> {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut projections = 0;
    if let Some(p) = problem.project {
        projections += p(&mut x);
    }
    let mut f = (problem.eval)(&x, &mut g)?;
    let watch = |x: &[f64]| problem.observe.map(|o| o(x)).unwrap_or(f64::NAN);
    let mut trace = vec![TracePoint { value: f, grad_norm: inf_norm(&g), extra: watch(&x) }];

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut consecutive_failures = 0usize;
    let mut iter = 0usize;

    loop {
        let gnorm = inf_norm(&g);
        if gnorm <= opts.grad_tol {
            return Ok(Outcome { x, value: f, grad_norm: gnorm, iterations: iter, stop: Stop::GradTol, trace, projections });
        }
        if iter >= opts.max_iter {
            return Ok(Outcome { x, value: f, grad_norm: gnorm, iterations: iter, stop: Stop::MaxIter, trace, projections });
        }

        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        if !s_hist.is_empty() {
            let m = s_hist.len();
            let mut alpha = vec![0.0; m];
            for i in (0..m).rev() {
                alpha[i] = rho_hist[i] * dot(&s_hist[i], &d);
                for (dj, yj) in d.iter_mut().zip(&y_hist[i]) {
                    *dj -= alpha[i] * yj;
                }
            }
            let last = m - 1;
            let scale = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
            if scale.is_finite() && scale > 0.0 {
                for dj in d.iter_mut() {
                    *dj *= scale;
                }
            }
            for i in 0..m {
                let beta = rho_hist[i] * dot(&y_hist[i], &d);
                for (dj, sj) in d.iter_mut().zip(&s_hist[i]) {
                    *dj += (alpha[i] - beta) * sj;
                }
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            // not a descent direction: drop the memory and use steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }

        // backtracking line search
        let mut step = 1.0;
        let mut accepted = false;
        let mut xt = vec![0.0; n];
        let mut gt = vec![0.0; n];
        let mut ft = f;
        for _ in 0..60 {
            for i in 0..n {
                xt[i] = x[i] + step * d[i];
            }
            if let Some(p) = problem.project {
                projections += p(&mut xt);
            }
            let ok = problem.accept.map(|a| a(&xt)).unwrap_or(true);
            if ok {
                match (problem.eval)(&xt, &mut gt) {
                    // strict decrease: once the objective is pinned at its
                    // representable floor, ties read as failures so the stall
                    // counter can fire instead of spinning on no-op steps
                    Ok(v) if v.is_finite() && v < f + opts.armijo * step * slope => {
                        ft = v;
                        accepted = true;
                        break;
                    }
                    Ok(_) => {}
                    // non-finite or out-of-domain trial: shrink and retry
                    Err(_) => {}
                }
            }
            step *= opts.shrink;
        }
        if !accepted {
            consecutive_failures += 1;
            if consecutive_failures >= opts.max_line_failures {
                return Ok(Outcome { x, value: f, grad_norm: gnorm, iterations: iter, stop: Stop::Stalled, trace, projections });
            }
            // restart the memory and try again from steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            iter += 1;
            continue;
        }
        consecutive_failures = 0;

        let mut s_new = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        for i in 0..n {
            s_new[i] = xt[i] - x[i];
            y_new[i] = gt[i] - g[i];
        }
        let sy = dot(&s_new, &y_new);
        if sy > 1e-30 {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            rho_hist.push(1.0 / sy);
            s_hist.push(s_new);
            y_hist.push(y_new);
        }
        x.copy_from_slice(&xt);
        g.copy_from_slice(&gt);
        f = ft;
        iter += 1;
        trace.push(TracePoint { value: f, grad_norm: inf_norm(&g), extra: watch(&x) });
    }
}
