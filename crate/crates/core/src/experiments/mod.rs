//! Scaling-law studies, recovery sequences, the matching solver and the hierarchy classifier.

mod classify;
mod equipartition;
mod matching;
mod recovery;
mod scaling;

pub use classify::{alpha_to_beta, hierarchy_exponent, order_for_scaling, parse_exponent, Exponent, HierarchyBracket};
pub use equipartition::{equipartition_report, EquipartitionReport};
pub use matching::{matching_solve, matching_sweep, MatchingOptions, MatchingResult, MatchingSolution};
pub use recovery::{build_recovery_sequence, Regime};
pub use scaling::{scaling_study, LimitCheck, ScalingOptions, ScalingReport, ScalingTarget, TargetComparison};

#[cfg(test)]
mod tests;
