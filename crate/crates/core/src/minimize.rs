//! First-order descent with backtracking line search.
//!
//! The energies minimized here are smooth away from the kink set of the
//! positive-part source terms, so a line-searched descent with an optional
//! limited-memory quasi-Newton direction is the workhorse. Both direction
//! choices satisfy the same sufficient-decrease contract, and the energy
//! trace is nonincreasing on every run.

use crate::grid::GridFunction;

#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    /// Stationarity tolerance; the stop test is
    /// `max|grad| <= grad_tol * (1 + |energy|)`.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Backtracking shrink factor in (0,1).
    pub ls_shrink: f64,
    /// Sufficient-decrease slope in (0, 0.5).
    pub ls_slope: f64,
    /// Line search fails when the step falls below this.
    pub min_step: f64,
    /// Quasi-Newton memory; 0 means plain steepest descent.
    pub history: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-9,
            max_iters: 20_000,
            ls_shrink: 0.5,
            ls_slope: 1e-4,
            min_step: 1e-16,
            history: 8,
        }
    }
}

impl MinimizeOptions {
    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeReport {
    pub iterations: usize,
    pub final_grad_norm: f64,
    pub final_energy: f64,
    pub converged: bool,
    pub energy_trace: Vec<f64>,
    pub stall_reason: Option<String>,
}

struct LbfgsMemory {
    s: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    rho: Vec<f64>,
    cap: usize,
}

impl LbfgsMemory {
    fn new(cap: usize) -> Self {
        Self {
            s: Vec::new(),
            y: Vec::new(),
            rho: Vec::new(),
            cap,
        }
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        // curvature guard: skip pairs that would break positive definiteness
        if !(sy > 1e-300) {
            return;
        }
        if self.s.len() == self.cap {
            self.s.remove(0);
            self.y.remove(0);
            self.rho.remove(0);
        }
        self.s.push(s);
        self.y.push(y);
        self.rho.push(1.0 / sy);
    }

    /// Two-loop recursion; returns an approximation of H · grad.
    fn direction(&self, grad: &[f64]) -> Vec<f64> {
        let mut q: Vec<f64> = grad.to_vec();
        if self.s.is_empty() {
            return q;
        }
        let k = self.s.len();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            let a = self.rho[i]
                * self.s[i]
                    .iter()
                    .zip(&q)
                    .map(|(si, qi)| si * qi)
                    .sum::<f64>();
            alpha[i] = a;
            for (qi, yi) in q.iter_mut().zip(&self.y[i]) {
                *qi -= a * yi;
            }
        }
        let last = k - 1;
        let yy: f64 = self.y[last].iter().map(|v| v * v).sum();
        let scale = if yy > 0.0 {
            1.0 / (self.rho[last] * yy)
        } else {
            1.0
        };
        for qi in q.iter_mut() {
            *qi *= scale;
        }
        for i in 0..k {
            let b = self.rho[i]
                * self.y[i]
                    .iter()
                    .zip(&q)
                    .map(|(yi, qi)| yi * qi)
                    .sum::<f64>();
            for (qi, si) in q.iter_mut().zip(&self.s[i]) {
                *qi += (alpha[i] - b) * si;
            }
        }
        q
    }
}

/// Minimizes `energy` from `u_init`, using `grad` as its exact gradient.
///
/// Every accepted step satisfies the sufficient-decrease condition
/// `energy(u - t d) <= energy(u) - ls_slope * t * <grad, d>`. A stalled line
/// search halves the quasi-Newton memory and retries once before giving up
/// with `converged = false`; the method never panics on admissible inputs.
pub fn minimize<E, G>(
    energy: E,
    grad: G,
    u_init: &GridFunction,
    opts: &MinimizeOptions,
) -> (GridFunction, MinimizeReport)
where
    E: Fn(&GridFunction) -> f64,
    G: Fn(&GridFunction) -> GridFunction,
{
    let n = u_init.len();
    let mut u = u_init.clone();
    let mut e = energy(&u);
    let mut g = grad(&u);
    let mut memory = LbfgsMemory::new(opts.history);
    let mut trace = vec![e];
    let mut iterations = 0;
    let mut converged = false;
    let mut stall_reason = None;
    let mut retried_after_stall = false;

    while iterations < opts.max_iters {
        let gnorm = g.max_abs();
        if gnorm <= opts.grad_tol * (1.0 + e.abs()) {
            converged = true;
            break;
        }

        let mut dir = memory.direction(&g.values);
        let mut gd: f64 = g.values.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if !(gd > 0.0) || !gd.is_finite() {
            // quasi-Newton direction lost descent; fall back to the gradient
            dir = g.values.clone();
            gd = g.values.iter().map(|v| v * v).sum();
        }

        // Backtracking Armijo search along u - t * dir.
        let mut t = 1.0;
        let mut accepted = None;
        while t >= opts.min_step {
            let mut candidate = u.clone();
            for (c, d) in candidate.values.iter_mut().zip(&dir) {
                *c -= t * d;
            }
            let e_new = energy(&candidate);
            let decrease = opts.ls_slope * t * gd;
            if e_new <= e - decrease {
                accepted = Some((candidate, e_new));
                break;
            }
            // near the rounding floor the predicted decrease is below machine
            // noise; accept any non-increasing point to keep the trace monotone
            if decrease <= 4.0 * f64::EPSILON * (1.0 + e.abs()) && e_new <= e {
                accepted = Some((candidate, e_new));
                break;
            }
            t *= opts.ls_shrink;
        }

        match accepted {
            Some((u_new, e_new)) => {
                let g_new = grad(&u_new);
                let s: Vec<f64> = u_new
                    .values
                    .iter()
                    .zip(&u.values)
                    .map(|(a, b)| a - b)
                    .collect();
                let y: Vec<f64> = g_new
                    .values
                    .iter()
                    .zip(&g.values)
                    .map(|(a, b)| a - b)
                    .collect();
                if opts.history > 0 {
                    memory.push(s, y);
                }
                u = u_new;
                e = e_new;
                g = g_new;
                trace.push(e);
                iterations += 1;
            }
            None => {
                if !retried_after_stall && memory.cap > 0 {
                    // drop half the memory and retry from the same point
                    retried_after_stall = true;
                    memory = LbfgsMemory::new(memory.cap / 2);
                    continue;
                }
                stall_reason = Some(format!(
                    "line search stalled below min_step at |grad| = {:.3e}",
                    g.max_abs()
                ));
                break;
            }
        }
    }

    if !converged && stall_reason.is_none() && iterations >= opts.max_iters {
        stall_reason = Some(format!("iteration budget {} exhausted", opts.max_iters));
    }

    let report = MinimizeReport {
        iterations,
        final_grad_norm: g.max_abs(),
        final_energy: e,
        converged,
        energy_trace: trace,
        stall_reason,
    };
    debug_assert_eq!(u.len(), n);
    (u, report)
}
