//! A unified fragility/threshold framework for cascading processes on
//! directed weighted networks.
//!
//! Every node carries a failure flag s, a fragility phi and a threshold
//! theta; it fails once its net fragility z = phi - theta reaches zero,
//! and failures raise the fragility of neighbours. On top of that common
//! core the crate provides:
//!
//! - [`models`]: six deterministic fragility rules in three classes —
//!   constant load (inward/outward), load redistribution (LLSC/LLSS) and
//!   overload redistribution (LLSC/LLSS);
//! - [`network`]: the graph/state types and the synchronous cascade engine;
//! - [`meanfield`]: macroscopic solvers (MF1/MF2/MF3) for the final failed
//!   fraction X* and (mu, sigma) phase-diagram sweeps;
//! - [`stochastic`]: logit failure/recovery transitions recovering the
//!   deterministic limit, the voter model and SIS/SI;
//! - [`clearing`]: the Eisenberg-Noe clearing algorithm and its fragility
//!   mapping;
//! - [`io`]: edge-list / node-attribute / trace file formats;
//! - [`generators`]: ring, star, path, complete, Erdos-Renyi and random
//!   regular helper networks.

pub mod clearing;
pub mod dist;
pub mod generators;
pub mod io;
pub mod meanfield;
pub mod models;
pub mod network;
pub mod stochastic;

pub use clearing::{
    clearing_iterate, en_fragility, fictitious_default, validate_system, ClearingError,
    ClearingResult, FinancialSystem, Violation,
};
pub use dist::{DistError, ThresholdDistribution};
pub use meanfield::{
    linspace, mf1_step, mf2_step, mf3_solve, mf3_step, phase_diagram, solve_fixed_point,
    DiscretizedDensity, GridSpec, MeanfieldError, Mf1Class, MfMethod, PhaseDiagramGrid,
    SolverSettings,
};
pub use models::{
    fragility_constant_inward, fragility_constant_outward, fragility_llsc, reach_failed_in,
    reach_healthy_out, step_llss, LoadVariant, ModelClass, ModelError, ModelKind, ModelSpec,
    SharingVariant,
};
pub use network::{
    apply_threshold, build_network, fraction_failed, net_fragility, run_cascade, CascadeError,
    CascadeTrace, Network, NetworkError, NodeState,
};
pub use stochastic::{
    logit_prob, macro_step, seeded_rng, sis_macro_step, stochastic_cascade,
    stochastic_cascade_ensemble, stochastic_step, transition_probs, vm_macro_step,
    vm_monte_carlo_complete, NetFragilityDensity, SisParams, StochasticError, TransitionParams,
    VmResponse, VmRun,
};
