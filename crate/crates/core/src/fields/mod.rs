//! The discrete spectral state `v_{ξ,p}`, its norms and the gauge transform.

mod field;
mod grid;
mod norms;
mod snapshot;

pub use field::{gauge_transform, linear_frequencies, GaugeDirection, SpectralField};
pub use grid::{SpectralLine, XiGrid};
pub use norms::{
    default_sobolev_order, h_k_norm, hk_weights, k_norm, norm_chain_constants, norm_report, s_norm_discrete,
    sobolev_norm, xi_derivative, z_d_norm, ChainConstants, NormReport, NormSpec, SNorm, DEFAULT_EPS,
};
pub use snapshot::{read_snapshot, sidecar_path, write_snapshot, SnapshotMeta};
