//! Discrete solvers for the doubly nonlinear parabolic problem driven by the
//! mixed operator `-Δ_p + (-Δ)^s_p`, together with executable checks of its
//! comparison, contraction, energy, convexity, and stabilization properties.
//!
//! The spatial discretization lives on a uniform interior mesh with zero
//! extension outside the domain; the time discretization is the implicit
//! Euler scheme in which every step minimizes the stationary energy with
//! `λ = Δt` and source `u_prev^{m+1} + Δt g^n`.

pub mod error;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod minimize;
pub mod operators;
pub mod params;
pub mod rng;
pub mod stationary;
pub mod verify;

pub use error::CoreError;
pub use evolution::{
    energy_ledger, evolve, rothe_step, time_average_g, EnergyLedger, EvolutionProblem, LedgerRow,
    StepDiagnostics, TimeSource, Trajectory, TrajectoryStatus,
};
pub use functionals::{
    convexity_profile, diaz_saa_w, energy_j, energy_l, grad_j, grad_l, rayleigh_quotient,
    StationaryProblem,
};
pub use grid::{build_grid, lp_norm, Grid, GridFunction};
pub use minimize::{minimize, MinimizeOptions, MinimizeReport};
pub use operators::{
    assemble_kernel, local_energy, local_grad, nonlocal_energy, nonlocal_grad, signed_pow,
    NonlocalKernel,
};
pub use params::{validate, Finding, ModelParams, Status, ValidationReport};
pub use rng::Rng64;
pub use stationary::{
    build_subsolution, build_supersolution, first_eigenpair, solve_p7, solve_s_lambda,
    solve_s_lambda_from, EigenPair,
};
pub use verify::{
    check_barrier_confinement, check_boundary_envelope, check_comparison,
    check_gradient_consistency, check_parabolic_accretivity, check_ray_convexity,
    check_stabilization, check_stationary_contraction, VerifyCtx, VerifyReport,
};
