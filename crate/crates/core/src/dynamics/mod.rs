//! Time integration of the quasi-resonant systems, the effective flow and the
//! full waveguide equation.

mod claim;
mod effective;
mod integrate;
mod ode;
mod rhs;
mod split_step;
mod system;

pub use claim::claim_identity_check;
pub use effective::{effective_flow_samples, effective_flow_step};
pub use integrate::{integrate, integrate_flow, DriftDiagnostics, Flow, IntegratorConfig, TrajectoryRecord};
pub use ode::{advance, Method, StepStats};
pub use rhs::{rhs_gauged, rhs_truncated, Kernel};
pub use split_step::{
    split_step_full, split_step_with, LineSpec, SplitStepConfig, SplitStepTrajectory, Waveguide, WaveguideGrid,
    ALIASING_LIMIT,
};
pub use system::{Nonlinearity, QuasiResonantSystem, SystemParams};
