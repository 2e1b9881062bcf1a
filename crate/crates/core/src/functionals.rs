//! Variational energies of the stationary problems and the hidden-convexity
//! functional behind the comparison machinery.

use crate::error::CoreError;
use crate::grid::{Grid, GridFunction};
use crate::operators::{
    local_energy, local_grad, nonlocal_energy, nonlocal_grad, signed_pow, NonlocalKernel,
};
use crate::params::ModelParams;

/// Data of the stationary problem: the Euler step reduces to this with
/// `lambda = dt` and `g0 = u_prev^{m+1} + dt * g^n`.
#[derive(Debug, Clone)]
pub struct StationaryProblem<'a> {
    pub lambda: f64,
    pub g0: GridFunction,
    pub params: &'a ModelParams,
    pub grid: &'a Grid,
    pub kernel: &'a NonlocalKernel,
}

impl<'a> StationaryProblem<'a> {
    pub fn new(
        lambda: f64,
        g0: GridFunction,
        params: &'a ModelParams,
        grid: &'a Grid,
        kernel: &'a NonlocalKernel,
    ) -> Result<Self, CoreError> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(CoreError::InvalidParam(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if g0.len() != grid.node_count() {
            return Err(CoreError::ShapeMismatch {
                expected: grid.node_count(),
                got: g0.len(),
            });
        }
        if g0.values.iter().any(|&v| v < 0.0) {
            return Err(CoreError::InvalidParam(
                "g0 must be nonnegative nodewise".into(),
            ));
        }
        Ok(Self {
            lambda,
            g0,
            params,
            grid,
            kernel,
        })
    }
}

/// Nodewise derivative factor of the source term `(u⁺)^{m+1}/(m+1)`.
///
/// For `m > 0` this is `(u⁺)^m`, which vanishes continuously at 0. For
/// `m = 0` the positive part has a kink; the derivative from above is used at
/// the origin so that descent from `u = 0` feels the source and the discrete
/// minimizer is not spuriously stationary at zero.
fn source_slope(u: f64, m: f64) -> f64 {
    if m == 0.0 {
        if u >= 0.0 {
            1.0
        } else {
            0.0
        }
    } else if u > 0.0 {
        u.powf(m)
    } else {
        0.0
    }
}

/// Energy of the stationary problem,
/// `J(u) = 1/(2(m+1)) ∫ |u|^{2(m+1)} + (λ/p) (∫|∇u|^p + [u]_{s,p}^p)
///  - 1/(m+1) ∫ g0 (u⁺)^{m+1} - λm/(δ+1) ∫ d^{-γ} (u⁺)^{δ+1}`.
pub fn energy_j(u: &GridFunction, prob: &StationaryProblem) -> f64 {
    let pr = prob.params;
    let h = prob.grid.quad_weight;
    let m = pr.m;
    let two_m2 = 2.0 * (m + 1.0);

    let mass: f64 = u.values.iter().map(|v| v.abs().powf(two_m2)).sum::<f64>() * h / two_m2;
    let dirichlet = prob.lambda / pr.p
        * (local_energy(u, prob.grid, pr.p) + nonlocal_energy(u, prob.kernel));
    let source: f64 = u
        .values
        .iter()
        .zip(&prob.g0.values)
        .map(|(&v, g)| g * v.max(0.0).powf(m + 1.0))
        .sum::<f64>()
        * h
        / (m + 1.0);
    let singular = if m > 0.0 {
        u.values
            .iter()
            .zip(&prob.grid.bdist)
            .map(|(&v, d)| d.powf(-pr.gamma) * v.max(0.0).powf(pr.delta + 1.0))
            .sum::<f64>()
            * h
            * prob.lambda
            * m
            / (pr.delta + 1.0)
    } else {
        0.0
    };
    mass + dirichlet - source - singular
}

/// Exact gradient of [`energy_j`]; its zeros on the positive cone are the
/// discrete weak solutions of the stationary problem.
pub fn grad_j(u: &GridFunction, prob: &StationaryProblem) -> GridFunction {
    let pr = prob.params;
    let h = prob.grid.quad_weight;
    let m = pr.m;

    let lg = local_grad(u, prob.grid, pr.p);
    let ng = nonlocal_grad(u, prob.kernel);
    let scale = prob.lambda / pr.p;

    let values = (0..u.len())
        .map(|i| {
            let v = u.values[i];
            let mut g = h * signed_pow(v, 2.0 * m + 1.0);
            g += scale * (lg.values[i] + ng.values[i]);
            g -= h * prob.g0.values[i] * source_slope(v, m);
            if m > 0.0 && v > 0.0 {
                g -= prob.lambda
                    * m
                    * h
                    * prob.grid.bdist[i].powf(-pr.gamma)
                    * v.powf(pr.delta);
            }
            g
        })
        .collect();
    GridFunction { values }
}

/// Energy of the limit stationary problem,
/// `L(u) = (1/p)(∫|∇u|^p + [u]_{s,p}^p) - 1/(m+1) ∫ b (u⁺)^{m+1}
///  - m/(δ+1) ∫ d^{-γ} (u⁺)^{δ+1}`.
pub fn energy_l(
    u: &GridFunction,
    b: &GridFunction,
    params: &ModelParams,
    grid: &Grid,
    kernel: &NonlocalKernel,
) -> f64 {
    let h = grid.quad_weight;
    let m = params.m;
    let dirichlet =
        (local_energy(u, grid, params.p) + nonlocal_energy(u, kernel)) / params.p;
    let source: f64 = u
        .values
        .iter()
        .zip(&b.values)
        .map(|(&v, b)| b * v.max(0.0).powf(m + 1.0))
        .sum::<f64>()
        * h
        / (m + 1.0);
    let singular = if m > 0.0 {
        u.values
            .iter()
            .zip(&grid.bdist)
            .map(|(&v, d)| d.powf(-params.gamma) * v.max(0.0).powf(params.delta + 1.0))
            .sum::<f64>()
            * h
            * m
            / (params.delta + 1.0)
    } else {
        0.0
    };
    dirichlet - source - singular
}

/// Exact gradient of [`energy_l`].
pub fn grad_l(
    u: &GridFunction,
    b: &GridFunction,
    params: &ModelParams,
    grid: &Grid,
    kernel: &NonlocalKernel,
) -> GridFunction {
    let h = grid.quad_weight;
    let m = params.m;
    let lg = local_grad(u, grid, params.p);
    let ng = nonlocal_grad(u, kernel);
    let values = (0..u.len())
        .map(|i| {
            let v = u.values[i];
            let mut g = (lg.values[i] + ng.values[i]) / params.p;
            g -= h * b.values[i] * source_slope(v, m);
            if m > 0.0 && v > 0.0 {
                g -= m * h * grid.bdist[i].powf(-params.gamma) * v.powf(params.delta);
            }
            g
        })
        .collect();
    GridFunction { values }
}

/// `(local + nonlocal p-energy) / ‖u‖_p^p`; scale invariant.
pub fn rayleigh_quotient(
    u: &GridFunction,
    grid: &Grid,
    kernel: &NonlocalKernel,
    p: f64,
) -> Result<f64, CoreError> {
    let denom: f64 =
        u.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * grid.quad_weight;
    if denom == 0.0 {
        return Err(CoreError::InvalidParam(
            "Rayleigh quotient of the zero function".into(),
        ));
    }
    Ok((local_energy(u, grid, p) + nonlocal_energy(u, kernel)) / denom)
}

/// Hidden-convexity functional `W(w) = ∫|∇ w^{1/(r+1)}|^p + [w^{1/(r+1)}]_{s,p}^p`
/// on the positive cone, for `0 < r <= p-1`.
pub fn diaz_saa_w(
    w: &GridFunction,
    r: f64,
    grid: &Grid,
    kernel: &NonlocalKernel,
    p: f64,
) -> Result<f64, CoreError> {
    if !(r > 0.0 && r <= p - 1.0) {
        return Err(CoreError::InvalidParam(format!(
            "r must lie in (0, p-1], got r = {r}, p = {p}"
        )));
    }
    if w.values.iter().any(|&v| v <= 0.0) {
        return Err(CoreError::InvalidParam(
            "W is defined on strictly positive functions".into(),
        ));
    }
    let root = w.map(|v| v.powf(1.0 / (r + 1.0)));
    Ok(local_energy(&root, grid, p) + nonlocal_energy(&root, kernel))
}

/// Samples `Φ(θ) = W((1-θ) w1 + θ w2)` at equispaced `θ ∈ [0,1]`.
///
/// Convexity of this profile is the discrete counterpart of the ray-convexity
/// statement; its second differences certify the inequality more robustly
/// than two one-sided derivative estimates.
pub fn convexity_profile(
    w1: &GridFunction,
    w2: &GridFunction,
    r: f64,
    grid: &Grid,
    kernel: &NonlocalKernel,
    p: f64,
    n_samples: usize,
) -> Result<Vec<(f64, f64)>, CoreError> {
    if n_samples < 3 {
        return Err(CoreError::InvalidParam(format!(
            "profile needs at least 3 samples, got {n_samples}"
        )));
    }
    if w1.len() != w2.len() {
        return Err(CoreError::ShapeMismatch {
            expected: w1.len(),
            got: w2.len(),
        });
    }
    let mut out = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let theta = k as f64 / (n_samples - 1) as f64;
        let mut w = w1.scaled(1.0 - theta);
        w.add_scaled(theta, w2);
        out.push((theta, diaz_saa_w(&w, r, grid, kernel, p)?));
    }
    Ok(out)
}
