//! Attacker-defender security investment contest.
//!
//! The breach probability is a contest between attacker amplification `h(a)`
//! and defender effort `d` whose signal is eroded by `delta(a)`. On top of the
//! contest form the crate provides arms-race ratios, equilibrium solvers,
//! best-response dynamics, multi-surface signal scaling, and strategic
//! extensions (deterrence of complex attacks, target selection).
//!
//! Every item is generic over [`Scalar`] (`f32` or `f64`); the `*F64` and
//! `*F32` aliases name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contest;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod multisurface;
pub mod optimize;
pub mod ratio;
pub mod scalar;
pub mod strategic;

pub use contest::{
    adversarial_discount, adversarial_leverage, attacker_marginal_breakdown, breach_probability,
    contest_denominator, defender_marginal, eval_delta, eval_h, payoff_attacker, payoff_defender,
    AmplificationFamily, AmplificationSpec, ChannelBreakdown, ErosionFamily, ErosionSpec,
    ModelParams, ModelParamsBuilder,
};
pub use dynamics::{
    best_response_curves, best_response_residual, simulate_continuous, simulate_discrete,
    stability_report, step_discrete, BestResponseCurve, ContinuousOptions, DiscreteOptions,
    InvestmentState, StabilityClass, StabilityReport, Trajectory,
};
pub use equilibrium::{
    adoption_gain, attacker_best_response, attacker_response, defender_best_response,
    interior_breach, provocation_threshold, reduced_attacker_objective, solve_equilibrium,
    uniqueness_check, AttackerResponse, EquilibriumResult, ProvocationThreshold, UniquenessReport,
};
pub use error::{ModelError, Result};
pub use multisurface::{
    asymptotic_breach, effective_signal, log_breach_rate, multi_surface_state, overall_breach,
    scaling_experiment, MultiSurfaceState, ScalingRow, SurfaceConfig,
};
pub use ratio::{
    critical_surface_count, dgamma_sensitivity_at_zero, r0_multi, r0_single, r_general, sweep_r0,
    CriticalSurfaceCount, RatioReport, SurfaceThreshold, SweepAxis, SweepRow,
};
pub use scalar::Scalar;
pub use strategic::{
    DefenderProfile, DeterrenceScenario, DeterrenceThreshold, TargetSelection, TargetingMode,
};

pub type ModelParamsF64 = ModelParams<f64>;
pub type ModelParamsF32 = ModelParams<f32>;
pub type AmplificationSpecF64 = AmplificationSpec<f64>;
pub type AmplificationSpecF32 = AmplificationSpec<f32>;
pub type ErosionSpecF64 = ErosionSpec<f64>;
pub type ErosionSpecF32 = ErosionSpec<f32>;
pub type SurfaceConfigF64 = SurfaceConfig<f64>;
pub type SurfaceConfigF32 = SurfaceConfig<f32>;
pub type EquilibriumResultF64 = EquilibriumResult<f64>;
pub type EquilibriumResultF32 = EquilibriumResult<f32>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type DeterrenceScenarioF64 = DeterrenceScenario<f64>;
pub type DeterrenceScenarioF32 = DeterrenceScenario<f32>;
pub type DefenderProfileF64 = DefenderProfile<f64>;
pub type DefenderProfileF32 = DefenderProfile<f32>;
