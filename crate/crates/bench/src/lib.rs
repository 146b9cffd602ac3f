//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use quermass_core::flows::{self, FlowConfig, FlowState};
use quermass_core::{build_grid, GridSpec, Hypersurface, ShapeSpec};

pub fn grid(n_lat: usize) -> Arc<GridSpec> {
    build_grid(2, n_lat, 2 * n_lat).expect("valid grid")
}

/// `0.05 (Y20 + 0.5 Y40)`, the usual nearly spherical test surface.
pub fn surface(grid: &Arc<GridSpec>) -> Hypersurface {
    ShapeSpec::harmonic(vec![(2, 0, 0.05), (4, 0, 0.025)]).build(grid, 0).expect("valid shape")
}

pub fn inverse_state(grid: &Arc<GridSpec>) -> (FlowConfig, FlowState) {
    let cfg = FlowConfig { compute_alpha: false, c2_gate: 1.0, ..Default::default() };
    let state = flows::prepare_initial(&cfg, &surface(grid)).expect("admissible surface");
    (cfg, state)
}
