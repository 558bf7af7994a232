//! Pseudo-spectral solvers for the Navier–Stokes–Maxwell system and its
//! 2D MHD limit on the periodic torus `[0, 2π)²`, with the energy
//! functionals and convergence diagnostics used to study the limit `ε → 0`.

pub mod diagnostics;
pub mod error;
pub mod expo;
pub mod field;
pub mod initial;
pub mod maxwell;
pub mod mhd;
pub mod nsm;
pub mod scaling;
pub mod spectral;
pub mod time;

pub use error::{Error, Result};
pub use field::{advect, cross, curl25, divergence, leray_project, ohm_current, Field3};
pub use spectral::{Axis, Grid, ScalarField2D};
pub use mhd::{mhd_rhs, run_mhd, step_mhd, MhdState};
pub use time::{cfl_limit, StepSize, Trajectory};
pub use maxwell::{maxwell_eigenvalues, maxwell_propagator, LinearOps, PhiKind};
pub use nsm::{derived_fields, nsm_rhs, run_nsm, step_nsm, DerivedFields, NsmState, NsmStepper};
pub use scaling::{check_scaling, manufactured_frames, ScalingReport, diffusive_scaling, residual_factors, residual_nsm, scaling_index, NsmFields, NsmResidual, ScaledFields};
pub use initial::{dtb_at_zero, initial_data_residual, mollify, prepare_family, solve_e0, standard_ic, FamilyOptions, InitialCondition, PreparedFamily, SmallnessCheck};
pub use diagnostics::{
    check_lemma_e1, check_lemma_e2, energy_balance_residual, energy_report, fit_convergence_order,
    functional_d1, functional_d2, functional_e1, functional_e2, h1_distance, mhd_energy_report,
    third_component_norms, vanishing_terms, ConvergenceRecord, EnergyReport, IntervalStatus,
    TestFunctions,
};
