//! Two-lane car-following dynamics with lateral coupling.
//!
//! The crate covers the full chain from model evaluation to jam prediction:
//!
//! - [`model`] — the tanh optimal-velocity function, its gated adjacent-lane
//!   counterpart, analytic derivatives, and the acceleration law.
//! - [`stability`] — long-wave linear stability of the uniform flow and the
//!   neutral sensitivity surface `a_c(h)`.
//! - [`mkdv`] — the modified-KdV reduction near the critical point: m₁–m₅
//!   coefficients, the kink-antikink soliton amplitude, the coexisting curve,
//!   and a finite-difference residual check of the analytic kink.
//! - [`sim`] — a deterministic two-lane ring-road integrator with periodic
//!   boundaries, no lane changing, and trajectory recording.

pub mod error;
pub mod mkdv;
pub mod model;
pub mod sim;
pub mod stability;

pub use error::{Error, Result};
pub use mkdv::{CoexistingPoint, MkdvCoefficients, ResidualGrid, SensitivityEval};
pub use model::{ModelParams, NeighborView};
pub use sim::{
    HeadwayDelta, LaneState, LaneTrack, NeighborMode, PerturbationSpec, RingConfig, RunOptions,
    Scheme, SystemState, TrajectoryRecord,
};
pub use stability::{Classification, OperatingPoint, StabilityReport};
