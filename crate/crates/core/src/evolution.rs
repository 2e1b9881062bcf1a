//! Rothe time stepping: source averaging, the implicit Euler step as a
//! stationary minimization, trajectory assembly, and the energy ledger.

use crate::error::CoreError;
use crate::functionals::StationaryProblem;
use crate::grid::{Grid, GridFunction};
use crate::minimize::MinimizeOptions;
use crate::operators::{local_energy, nonlocal_energy, NonlocalKernel};
use crate::params::ModelParams;
use crate::stationary::solve_s_lambda_from;

/// Time-space source, either closed form or tabulated on the time grid.
pub enum TimeSource {
    Constant(GridFunction),
    /// One field per step, constant on `[t_{n-1}, t_n)`.
    PerStep(Vec<GridFunction>),
    /// Closed-form sampler of `g(t, x)`; receives the node and its boundary
    /// distance.
    Sampler(Box<dyn Fn(f64, [f64; 2], f64) -> f64 + Send + Sync>),
}

pub struct EvolutionProblem<'a> {
    pub t_final: f64,
    pub n_steps: usize,
    pub source: TimeSource,
    pub u0: GridFunction,
    pub params: &'a ModelParams,
    pub grid: &'a Grid,
    pub kernel: &'a NonlocalKernel,
}

impl<'a> EvolutionProblem<'a> {
    pub fn new(
        t_final: f64,
        n_steps: usize,
        source: TimeSource,
        u0: GridFunction,
        params: &'a ModelParams,
        grid: &'a Grid,
        kernel: &'a NonlocalKernel,
    ) -> Result<Self, CoreError> {
        if !(t_final > 0.0) || n_steps == 0 {
            return Err(CoreError::InvalidParam(format!(
                "need T > 0 and n_steps >= 1, got T = {t_final}, n_steps = {n_steps}"
            )));
        }
        if u0.len() != grid.node_count() {
            return Err(CoreError::ShapeMismatch {
                expected: grid.node_count(),
                got: u0.len(),
            });
        }
        if u0.values.iter().any(|&v| v <= 0.0) {
            return Err(CoreError::InvalidParam(
                "initial state must be positive at every node".into(),
            ));
        }
        if let TimeSource::PerStep(table) = &source {
            if table.len() != n_steps {
                return Err(CoreError::InvalidParam(format!(
                    "source table has {} entries for {n_steps} steps",
                    table.len()
                )));
            }
        }
        Ok(Self {
            t_final,
            n_steps,
            source,
            u0,
            params,
            grid,
            kernel,
        })
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }

    /// Fitted envelope constants of the initial state against `c·d` and
    /// `c·d^{α'}`; diagnostic only.
    pub fn u0_envelope(&self) -> (f64, f64) {
        let alpha = self.params.alpha_prime();
        let mut c_low = f64::INFINITY;
        let mut c_high: f64 = 0.0;
        for (v, d) in self.u0.values.iter().zip(&self.grid.bdist) {
            c_low = c_low.min(v / d);
            c_high = c_high.max(v / d.powf(alpha));
        }
        (c_low, c_high)
    }
}

/// Per-node time average `g^n(x) = (1/Δt) ∫_{t_{n-1}}^{t_n} g(s, x) ds`.
///
/// Sampler sources are integrated by 5-point Gauss-Legendre quadrature, which
/// is exact for the tabulated and constant forms.
pub fn time_average_g(problem: &EvolutionProblem, n: usize) -> Result<GridFunction, CoreError> {
    if n == 0 || n > problem.n_steps {
        return Err(CoreError::InvalidParam(format!(
            "step index {n} outside 1..={}",
            problem.n_steps
        )));
    }
    match &problem.source {
        TimeSource::Constant(g) => Ok(g.clone()),
        TimeSource::PerStep(table) => Ok(table[n - 1].clone()),
        TimeSource::Sampler(f) => {
            // Gauss-Legendre nodes and weights on [-1, 1]
            const NODES: [f64; 5] = [
                -0.906179845938664,
                -0.5384693101056831,
                0.0,
                0.5384693101056831,
                0.906179845938664,
            ];
            const WEIGHTS: [f64; 5] = [
                0.23692688505618908,
                0.47862867049936647,
                0.5688888888888889,
                0.47862867049936647,
                0.23692688505618908,
            ];
            let dt = problem.dt();
            let t0 = (n - 1) as f64 * dt;
            let mid = t0 + 0.5 * dt;
            let half = 0.5 * dt;
            let values = problem
                .grid
                .nodes
                .iter()
                .zip(&problem.grid.bdist)
                .map(|(&x, &d)| {
                    NODES
                        .iter()
                        .zip(&WEIGHTS)
                        .map(|(&z, &w)| w * f(mid + half * z, x, d))
                        .sum::<f64>()
                        * 0.5
                })
                .collect();
            Ok(GridFunction { values })
        }
    }
}

#[derive(Debug, Clone)]
pub struct StepDiagnostics {
    pub energy: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub min_state: f64,
    pub max_state: f64,
    /// `‖u_n^{m+1} - u_{n-1}^{m+1}‖_2`
    pub increment_l2: f64,
}

/// One implicit Euler step: the minimizer of the stationary energy with
/// `λ = dt` and `g0 = u_prev^{m+1} + dt g^n`, warm-started at `u_prev`.
pub fn rothe_step(
    u_prev: &GridFunction,
    g_n: &GridFunction,
    dt: f64,
    params: &ModelParams,
    grid: &Grid,
    kernel: &NonlocalKernel,
    opts: &MinimizeOptions,
) -> Result<(GridFunction, StepDiagnostics), CoreError> {
    if u_prev.values.iter().any(|&v| v < 0.0) {
        return Err(CoreError::InvalidParam(
            "previous state must be nonnegative".into(),
        ));
    }
    let m = params.m;
    let mut g0 = u_prev.pos_pow(m + 1.0);
    g0.add_scaled(dt, g_n);
    let g0 = GridFunction {
        values: g0.values.iter().map(|v| v.max(0.0)).collect(),
    };
    let prob = StationaryProblem::new(dt, g0, params, grid, kernel)?;
    let (u, report) = solve_s_lambda_from(&prob, u_prev, opts)?;

    let h = grid.quad_weight;
    let increment_l2 = {
        let vn = u.pos_pow(m + 1.0);
        let vp = u_prev.pos_pow(m + 1.0);
        (h * vn
            .values
            .iter()
            .zip(&vp.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>())
        .sqrt()
    };
    let diag = StepDiagnostics {
        energy: report.final_energy,
        iterations: report.iterations,
        grad_norm: report.final_grad_norm,
        min_state: u.min(),
        max_state: u.max(),
        increment_l2,
    };
    Ok((u, diag))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectoryStatus {
    Complete,
    StepFailed { step: usize, reason: String },
}

/// Time stamps, states, and per-step diagnostics of one Rothe run.
#[derive(Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.status == TrajectoryStatus::Complete
    }

    pub fn terminal(&self) -> &GridFunction {
        self.states.last().expect("trajectory holds at least u0")
    }
}

/// Runs the scheme for all steps; a failed step truncates the trajectory and
/// records the failure instead of panicking.
pub fn evolve(problem: &EvolutionProblem, opts: &MinimizeOptions) -> Trajectory {
    let dt = problem.dt();
    let mut times = vec![0.0];
    let mut states = vec![problem.u0.clone()];
    let mut diagnostics = Vec::new();
    let mut status = TrajectoryStatus::Complete;

    for n in 1..=problem.n_steps {
        let g_n = match time_average_g(problem, n) {
            Ok(g) => g,
            Err(e) => {
                status = TrajectoryStatus::StepFailed {
                    step: n,
                    reason: e.to_string(),
                };
                break;
            }
        };
        match rothe_step(
            &states[n - 1],
            &g_n,
            dt,
            problem.params,
            problem.grid,
            problem.kernel,
            opts,
        ) {
            Ok((u, diag)) => {
                times.push(n as f64 * dt);
                states.push(u);
                diagnostics.push(diag);
            }
            Err(e) => {
                status = TrajectoryStatus::StepFailed {
                    step: n,
                    reason: e.to_string(),
                };
                break;
            }
        }
    }

    Trajectory {
        times,
        states,
        diagnostics,
        status,
    }
}

/// One row of the discrete energy balance.
///
/// The scheme satisfies, per step,
/// `dissipation + energy_increment <= work_g + work_singular`
/// up to minimizer error; `defect` is the right side minus the left side and
/// tends to zero with the step size.
#[derive(Debug, Clone, serde::Serialize)]
pub struct LedgerRow {
    pub step: usize,
    pub dissipation: f64,
    pub energy_increment: f64,
    pub work_g: f64,
    pub work_singular: f64,
    pub defect: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
    pub cumulative_defect: f64,
}

pub fn energy_ledger(
    traj: &Trajectory,
    problem: &EvolutionProblem,
) -> Result<EnergyLedger, CoreError> {
    let pr = problem.params;
    let grid = problem.grid;
    let h = grid.quad_weight;
    let dt = problem.dt();
    let m = pr.m;

    let dirichlet = |u: &GridFunction| {
        (m + 1.0) / pr.p * (local_energy(u, grid, pr.p) + nonlocal_energy(u, problem.kernel))
    };

    let mut rows = Vec::with_capacity(traj.states.len().saturating_sub(1));
    let mut cumulative = 0.0;
    let mut prev_dirichlet = dirichlet(&traj.states[0]);
    for n in 1..traj.states.len() {
        let u_n = &traj.states[n];
        let v_n = u_n.pos_pow(m + 1.0);
        let v_p = traj.states[n - 1].pos_pow(m + 1.0);
        let g_n = time_average_g(problem, n)?;

        let mut dissipation = 0.0;
        let mut work_g = 0.0;
        let mut work_singular = 0.0;
        for i in 0..u_n.len() {
            let dv = v_n.values[i] - v_p.values[i];
            dissipation += h * dv * dv / dt;
            work_g += h * g_n.values[i] * dv;
            if m > 0.0 && u_n.values[i] > 0.0 {
                work_singular += m
                    * h
                    * grid.bdist[i].powf(-pr.gamma)
                    * u_n.values[i].powf(pr.delta - m)
                    * dv;
            }
        }
        let cur_dirichlet = dirichlet(u_n);
        let energy_increment = cur_dirichlet - prev_dirichlet;
        prev_dirichlet = cur_dirichlet;

        let defect = work_g + work_singular - dissipation - energy_increment;
        cumulative += defect;
        rows.push(LedgerRow {
            step: n,
            dissipation,
            energy_increment,
            work_g,
            work_singular,
            defect,
        });
    }
    Ok(EnergyLedger {
        rows,
        cumulative_defect: cumulative,
    })
}
