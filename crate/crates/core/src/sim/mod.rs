//! Network geometry, mobility and the PU-to-SU radio channel.

mod channel;
mod geometry;

pub use channel::{
    correlation_matrix, kappa_squared, path_gain, received_samples, sample_pu_state,
    sample_shadow_field, BandRole, PuState, ShadowField, JITTER_LADDER,
};
pub use geometry::{advance_node, init_topology, step_mobility, Point, Topology};

pub(crate) use channel::{band_signal_power, fill_samples};
