//! Deterrence of complex attacks and target selection among defenders.

pub mod deterrence;
pub mod targeting;

pub use deterrence::{
    delta_pi, delta_pi_report, deterrence_threshold, threshold_sensitivity, ConditionFailure,
    DefenderMode, DeltaPiReport, DeterrenceScenario, DeterrenceThreshold, SensitivityParameter,
    ThresholdSensitivity, SENSITIVITY_AGREEMENT,
};
pub use targeting::{
    redirection_effect, select_target, DefenderProfile, RedirectionRow, TargetRow,
    TargetSelection, TargetingChange, TargetingMode,
};
