//! Shared fixtures for the criterion benches.

use warpcurv::{LogWarpState, WarpState};

/// A generic smooth state away from all special loci, used to exercise
/// the general curvature path.
pub fn generic_state() -> WarpState {
    WarpState::new(1.3, 0.7, 0.4, 0.2, 1.9, 0.8, 0.5, 2.4, 1.1, 0.9)
        .expect("fixture state is valid")
}

/// Log-space version of [`generic_state`].
pub fn generic_log_state() -> LogWarpState {
    generic_state().to_log()
}
