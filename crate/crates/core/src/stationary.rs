//! Stationary solvers: the λ-problem, the limit problem, the first eigenpair
//! of the mixed operator, and the sub/super-solution barriers.

use crate::error::CoreError;
use crate::functionals::{
    energy_j, energy_l, grad_j, grad_l, rayleigh_quotient, StationaryProblem,
};
use crate::grid::{Grid, GridFunction};
use crate::minimize::{minimize, MinimizeOptions, MinimizeReport};
use crate::operators::{local_energy, local_grad, nonlocal_energy, nonlocal_grad, NonlocalKernel};
use crate::params::ModelParams;

/// First eigenpair of `-Δ_p + (-Δ)^s_p`, sup-normalized.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda1: f64,
    pub phi1: GridFunction,
}

/// Minimizes the energy of the stationary λ-problem.
///
/// The returned state is nonnegative in exact arithmetic; positivity where
/// `g0` is positive is a property of the minimizer, reported by callers
/// rather than enforced here.
pub fn solve_s_lambda(
    prob: &StationaryProblem,
    opts: &MinimizeOptions,
) -> Result<(GridFunction, MinimizeReport), CoreError> {
    let m = prob.params.m;
    // natural scale of the solution: u ~ g0^{1/(m+1)} when λ is small
    let init = prob.g0.pos_pow(1.0 / (m + 1.0));
    let (u, report) = minimize(
        |u| energy_j(u, prob),
        |u| grad_j(u, prob),
        &init,
        opts,
    );
    if !report.converged {
        return Err(CoreError::NoConvergence(format!(
            "stationary λ-problem: {}",
            report
                .stall_reason
                .clone()
                .unwrap_or_else(|| "unknown".into())
        )));
    }
    Ok((u, report))
}

/// Warm-started variant used by the time stepper.
pub fn solve_s_lambda_from(
    prob: &StationaryProblem,
    init: &GridFunction,
    opts: &MinimizeOptions,
) -> Result<(GridFunction, MinimizeReport), CoreError> {
    let (u, report) = minimize(|u| energy_j(u, prob), |u| grad_j(u, prob), init, opts);
    if !report.converged {
        return Err(CoreError::NoConvergence(format!(
            "stationary λ-problem (warm start): {}",
            report
                .stall_reason
                .clone()
                .unwrap_or_else(|| "unknown".into())
        )));
    }
    Ok((u, report))
}

/// Solves `-Δ_p u + (-Δ)^s_p u = f` for a frozen nonnegative source, the
/// elementary building block of the barrier fixed-point iterations.
fn solve_linear_source_report(
    f: &GridFunction,
    params: &ModelParams,
    grid: &Grid,
    kernel: &NonlocalKernel,
    opts: &MinimizeOptions,
) -> Result<(GridFunction, MinimizeReport), CoreError> {
    let p = params.p;
    let h = grid.quad_weight;
    let energy = |u: &GridFunction| {
        (local_energy(u, grid, p) + nonlocal_energy(u, kernel)) / p
            - h * u
                .values
                .iter()
                .zip(&f.values)
                .map(|(&v, fv)| fv * v.max(0.0))
                .sum::<f64>()
    };
    let grad = |u: &GridFunction| {
        let lg = local_grad(u, grid, p);
        let ng = nonlocal_grad(u, kernel);
        GridFunction {
            values: (0..u.len())
                .map(|i| {
                    (lg.values[i] + ng.values[i]) / p
                        - h * f.values[i] * if u.values[i] >= 0.0 { 1.0 } else { 0.0 }
                })
                .collect(),
        }
    };
    let init = f.pos_pow(1.0 / (p - 1.0));
    let (u, report) = minimize(energy, grad, &init, opts);
    if !report.converged {
        return Err(CoreError::NoConvergence(format!(
            "frozen-source solve: {}",
            report
                .stall_reason
                .clone()
                .unwrap_or_else(|| "unknown".into())
        )));
    }
    Ok((u, report))
}

fn solve_linear_source(
    f: &GridFunction,
    params: &ModelParams,
    grid: &Grid,
    kernel: &NonlocalKernel,
    opts: &MinimizeOptions,
) -> Result<GridFunction, CoreError> {
    solve_linear_source_report(f, params, grid, kernel, opts).map(|(u, _)| u)
}

/// Minimizes the energy of the limit problem `-Δ_p u + (-Δ)^s_p u = b u^m +
/// m d^{-γ} u^δ`. Strict positivity at convergence is checked and reported
/// through the returned report, not enforced.
pub fn solve_p7(
    b: &GridFunction,
    params: &ModelParams,
    grid: &Grid,
    kernel: &NonlocalKernel,
    opts: &MinimizeOptions,
) -> Result<(GridFunction, MinimizeReport), CoreError> {
    if b.values.iter().any(|&v| v < 0.0) || b.values.iter().all(|&v| v == 0.0) {
        return Err(CoreError::InvalidParam(
            "b must be nonnegative and not identically zero".into(),
        ));
    }
    // warm start: for m = 0 the frozen-source solve IS the problem; for m > 0
    // it has the right boundary behavior and positivity
    if params.m == 0.0 {
        return solve_linear_source_report(b, params, grid, kernel, opts);
    }
    let init = solve_linear_source(b, params, grid, kernel, opts)?;
    let (u, report) = minimize(
        |u| energy_l(u, b, params, grid, kernel),
        |u| grad_l(u, b, params, grid, kernel),
        &init,
        opts,
    );
    if !report.converged {
        return Err(CoreError::NoConvergence(format!(
            "limit problem: {}",
            report
                .stall_reason
                .clone()
                .unwrap_or_else(|| "unknown".into())
        )));
    }
    if u.values.iter().all(|&v| v <= 0.0) {
        return Err(CoreError::NoConvergence(
            "limit problem converged to the zero state, contradicting positivity".into(),
        ));
    }
    Ok((u, report))
}

/// Minimizes the Rayleigh quotient by normalized descent and returns the
/// sup-normalized positive eigenfunction with its eigenvalue.
pub fn first_eigenpair(
    grid: &Grid,
    kernel: &NonlocalKernel,
    p: f64,
    opts: &MinimizeOptions,
) -> Result<EigenPair, CoreError> {
    let h = grid.quad_weight;
    let n = grid.node_count();

    let num_grad = |u: &GridFunction| {
        let lg = local_grad(u, grid, p);
        let ng = nonlocal_grad(u, kernel);
        GridFunction {
            values: (0..n).map(|i| lg.values[i] + ng.values[i]).collect(),
        }
    };
    let denominator =
        |u: &GridFunction| h * u.values.iter().map(|v| v.abs().powf(p)).sum::<f64>();
    let den_grad = |u: &GridFunction| {
        u.map(|v| h * p * crate::operators::signed_pow(v, p - 1.0))
    };
    let normalize = |u: &GridFunction| {
        let d = denominator(u).powf(1.0 / p);
        u.scaled(1.0 / d)
    };

    // distance-shaped positive start, symmetric on symmetric grids
    let mut u = normalize(&GridFunction {
        values: grid.bdist.clone(),
    });
    let mut q = rayleigh_quotient(&u, grid, kernel, p)?;

    let mut converged = false;
    for _ in 0..opts.max_iters {
        // ∇R = (∇N - R ∇D)/D on the unit sphere (D = 1 after normalization)
        let ng = num_grad(&u);
        let dg = den_grad(&u);
        let grad = GridFunction {
            values: (0..n)
                .map(|i| ng.values[i] - q * dg.values[i])
                .collect(),
        };
        if grad.max_abs() <= opts.grad_tol * (1.0 + q.abs()) {
            converged = true;
            break;
        }
        let gd: f64 = grad.values.iter().map(|v| v * v).sum();
        let mut t = 1.0;
        let mut accepted = false;
        while t >= opts.min_step {
            let mut cand = u.clone();
            cand.add_scaled(-t, &grad);
            // folding to the positive cone never increases the quotient
            let cand = normalize(&cand.map(f64::abs));
            let q_new = rayleigh_quotient(&cand, grid, kernel, p)?;
            let decrease = opts.ls_slope * t * gd;
            if q_new <= q - decrease
                || (decrease <= 4.0 * f64::EPSILON * (1.0 + q.abs()) && q_new <= q)
            {
                u = cand;
                q = q_new;
                accepted = true;
                break;
            }
            t *= opts.ls_shrink;
        }
        if !accepted {
            // the quotient is at its rounding floor
            converged = grad.max_abs() <= opts.grad_tol.sqrt() * (1.0 + q.abs());
            break;
        }
    }
    if !converged {
        return Err(CoreError::NoConvergence(
            "Rayleigh quotient descent did not reach the stationarity tolerance".into(),
        ));
    }

    let sup = u.max();
    if !(sup > 0.0) {
        return Err(CoreError::NoConvergence(
            "eigenfunction lost positivity".into(),
        ));
    }
    let phi1 = u.scaled(1.0 / sup);
    let lambda1 = rayleigh_quotient(&phi1, grid, kernel, p)?;
    Ok(EigenPair { lambda1, phi1 })
}

/// Builds the uniform sub-solution: the solution of
/// `-Δ_p u + (-Δ)^s_p u = k^{-1}(g_lower u^m + m d^{-γ} u^δ)`
/// by frozen-source fixed-point iteration. Larger `k` gives smaller barriers.
pub fn build_subsolution(
    k: f64,
    g_lower: &GridFunction,
    params: &ModelParams,
    grid: &Grid,
    kernel: &NonlocalKernel,
    opts: &MinimizeOptions,
) -> Result<GridFunction, CoreError> {
    if !(k > 0.0) {
        return Err(CoreError::InvalidParam(format!(
            "k must be positive, got {k}"
        )));
    }
    let m = params.m;
    let scaled_lower = g_lower.scaled(1.0 / k);
    if m == 0.0 {
        return solve_linear_source(&scaled_lower, params, grid, kernel, opts);
    }

    let source = |u: &GridFunction| -> GridFunction {
        GridFunction {
            values: (0..u.len())
                .map(|i| {
                    let up = u.values[i].max(0.0);
                    (g_lower.values[i] * up.powf(m)
                        + m * grid.bdist[i].powf(-params.gamma) * up.powf(params.delta))
                        / k
                })
                .collect(),
        }
    };

    let mut u = solve_linear_source(&scaled_lower, params, grid, kernel, opts)?;
    for _ in 0..200 {
        let next = solve_linear_source(&source(&u), params, grid, kernel, opts)?;
        let diff = next
            .values
            .iter()
            .zip(&u.values)
            .fold(0.0_f64, |mx, (a, b)| mx.max((a - b).abs()));
        u = next;
        if diff <= 1e-8 {
            return Ok(u);
        }
    }
    Err(CoreError::NoConvergence(
        "sub-solution fixed point did not settle within 200 outer iterations".into(),
    ))
}

/// Builds the uniform super-solution: solves the singular auxiliary problem
/// `-Δ_p u + (-Δ)^s_p u = (u + ε)^{-ϑ}` by warm-started ε-continuation, then
/// scales by `M^{1/(p-1)}`.
pub fn build_supersolution(
    m_scale: f64,
    params: &ModelParams,
    grid: &Grid,
    kernel: &NonlocalKernel,
    opts: &MinimizeOptions,
) -> Result<GridFunction, CoreError> {
    if !(m_scale > 0.0) {
        return Err(CoreError::InvalidParam(format!(
            "M must be positive, got {m_scale}"
        )));
    }
    let vt = params.vartheta;
    if !(params.p * (1.0 - params.s) < 1.0)
        || !(vt > params.vartheta_lower() && vt < params.vartheta_upper())
    {
        return Err(CoreError::InvalidParam(format!(
            "vartheta = {vt} outside the admissible window ({}, {}) or p(1-s) >= 1",
            params.vartheta_lower(),
            params.vartheta_upper()
        )));
    }

    let mut u = solve_linear_source(
        &GridFunction::constant(grid.node_count(), 1.0),
        params,
        grid,
        kernel,
        opts,
    )?;

    for stage in 1..=6 {
        let eps = 10f64.powi(-stage);
        let source = |w: &GridFunction| -> GridFunction {
            w.map(|v| (v.max(0.0) + eps).powf(-vt))
        };
        // damped iteration: the solve map is antitone in u, so plain
        // iteration can two-cycle; mixing restores convergence
        let mut omega = 0.5;
        let mut prev_residual = f64::INFINITY;
        let mut settled = false;
        for _ in 0..300 {
            let solved = solve_linear_source(&source(&u), params, grid, kernel, opts)?;
            let residual = solved
                .values
                .iter()
                .zip(&u.values)
                .fold(0.0_f64, |mx, (a, b)| mx.max((a - b).abs()));
            let mut next = u.scaled(1.0 - omega);
            next.add_scaled(omega, &solved);
            u = next;
            if residual <= 1e-8 {
                settled = true;
                break;
            }
            if residual > prev_residual {
                omega = (omega * 0.5).max(0.05);
            }
            prev_residual = residual;
        }
        if !settled {
            return Err(CoreError::NoConvergence(format!(
                "super-solution continuation stalled at eps = {eps}"
            )));
        }
    }

    Ok(u.scaled(m_scale.powf(1.0 / (params.p - 1.0))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;
    use crate::operators::assemble_kernel;

    fn setup(
        cells: usize,
        p: f64,
        s: f64,
        m: f64,
    ) -> (Grid, ModelParams, NonlocalKernel, MinimizeOptions) {
        let grid = build_grid(1, cells, &[1.0]).unwrap();
        let params = ModelParams {
            p,
            s,
            m,
            delta: if m > 0.0 { 0.5 * m } else { 0.0 },
            gamma: 0.1,
            vartheta: 0.5 * (1.0 + p * (1.0 - s) / s) + 0.5 * (2.0 + 1.0 / (p - 1.0)),
            d_bold: 2.0,
        };
        let kernel = assemble_kernel(&grid, &params).unwrap();
        let opts = MinimizeOptions::default().with_grad_tol(1e-11);
        (grid, params, kernel, opts)
    }

    #[test]
    fn zero_source_gives_zero_state() {
        let (grid, params, kernel, opts) = setup(8, 2.0, 0.5, 0.0);
        let prob =
            StationaryProblem::new(0.5, GridFunction::zeros(8), &params, &grid, &kernel).unwrap();
        let (u, _) = solve_s_lambda(&prob, &opts).unwrap();
        assert!(u.max_abs() < 1e-12);
    }

    #[test]
    fn p7_scales_linearly_at_p2_m0() {
        let (grid, params, kernel, opts) = setup(12, 2.0, 0.5, 0.0);
        let b = GridFunction::from_fn(&grid, |x| 1.0 + x[0]);
        let (u1, _) = solve_p7(&b, &params, &grid, &kernel, &opts).unwrap();
        let (u3, _) = solve_p7(&b.scaled(3.0), &params, &grid, &kernel, &opts).unwrap();
        for i in 0..12 {
            assert!(
                (u3.values[i] - 3.0 * u1.values[i]).abs() < 1e-7 * u1.max_abs(),
                "node {i}"
            );
        }
    }

    #[test]
    fn p7_rejects_zero_or_signed_sources() {
        let (grid, params, kernel, opts) = setup(8, 2.0, 0.5, 0.0);
        assert!(solve_p7(&GridFunction::zeros(8), &params, &grid, &kernel, &opts).is_err());
        let mut b = GridFunction::constant(8, 1.0);
        b.values[2] = -0.5;
        assert!(solve_p7(&b, &params, &grid, &kernel, &opts).is_err());
    }

    #[test]
    fn p7_positive_for_doubly_nonlinear_case() {
        let (grid, params, kernel, opts) = setup(12, 2.5, 0.9, 0.4);
        let b = GridFunction::constant(12, 1.0);
        let (u, _) = solve_p7(&b, &params, &grid, &kernel, &opts).unwrap();
        assert!(u.min() > 0.0);
    }

    #[test]
    fn eigenpair_properties() {
        let (grid, params, kernel, opts) = setup(16, 2.0, 0.7, 0.0);
        drop(params);
        let pair = first_eigenpair(&grid, &kernel, 2.0, &opts).unwrap();
        assert!((pair.phi1.max() - 1.0).abs() < 1e-14);
        assert!(pair.phi1.min() > 0.0);
        // palindromic on the symmetric grid
        for i in 0..16 {
            assert!(
                (pair.phi1.values[i] - pair.phi1.values[15 - i]).abs() < 1e-8,
                "node {i}"
            );
        }
        // quotient consistency
        let q = rayleigh_quotient(&pair.phi1, &grid, &kernel, 2.0).unwrap();
        assert!((q - pair.lambda1).abs() <= 1e-10 * pair.lambda1);
        // minimality against sampled candidates
        let mut rng = crate::rng::Rng64::new(23);
        for _ in 0..20 {
            let u = GridFunction {
                values: rng.uniform_vec(16, 0.1, 1.0),
            };
            assert!(pair.lambda1 <= rayleigh_quotient(&u, &grid, &kernel, 2.0).unwrap() + 1e-9);
        }
    }

    #[test]
    fn subsolution_single_solve_at_m0() {
        let (grid, params, kernel, opts) = setup(10, 2.0, 0.5, 0.0);
        let ones = GridFunction::constant(10, 1.0);
        let u = build_subsolution(2.0, &ones, &params, &grid, &kernel, &opts).unwrap();
        let direct =
            solve_linear_source(&ones.scaled(0.5), &params, &grid, &kernel, &opts).unwrap();
        for i in 0..10 {
            assert!((u.values[i] - direct.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn subsolution_decreases_in_k() {
        let (grid, params, kernel, opts) = setup(10, 2.5, 0.9, 0.4);
        let ones = GridFunction::constant(10, 1.0);
        let u1 = build_subsolution(1.0, &ones, &params, &grid, &kernel, &opts).unwrap();
        let u2 = build_subsolution(2.0, &ones, &params, &grid, &kernel, &opts).unwrap();
        for i in 0..10 {
            assert!(u2.values[i] <= u1.values[i] + 1e-8, "node {i}");
        }
    }

    #[test]
    fn supersolution_scaling_homogeneity() {
        let (grid, params, kernel, opts) = setup(10, 2.0, 0.9, 0.0);
        let p = params.p;
        let u1 = build_supersolution(1.0, &params, &grid, &kernel, &opts).unwrap();
        let u2 = build_supersolution(2f64.powf(p - 1.0), &params, &grid, &kernel, &opts).unwrap();
        for i in 0..10 {
            assert!(
                (u2.values[i] - 2.0 * u1.values[i]).abs() < 1e-8,
                "node {i}: {} vs {}",
                u2.values[i],
                2.0 * u1.values[i]
            );
        }
    }

    #[test]
    fn supersolution_envelope_slope_near_alpha_prime() {
        let (grid, params, kernel, opts) = setup(256, 2.0, 0.9, 0.0);
        let u = build_supersolution(1.0, &params, &grid, &kernel, &opts).unwrap();
        assert!(u.min() > 0.0);
        // log-log regression on the nearest-boundary quartile
        let mut idx: Vec<usize> = (0..256).collect();
        idx.sort_by(|&a, &b| grid.bdist[a].partial_cmp(&grid.bdist[b]).unwrap());
        let quartile = &idx[..64];
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for &i in quartile {
            let x = grid.bdist[i].ln();
            let y = u.values[i].ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let nq = quartile.len() as f64;
        let slope = (nq * sxy - sx * sy) / (nq * sxx - sx * sx);
        let alpha = params.alpha_prime();
        assert!(
            (slope - alpha).abs() < 0.1,
            "fitted slope {slope} vs alpha' {alpha}"
        );
    }
}
