//! Masked autoregressive policy over hybrid (generator, duration) actions.

mod adam;
mod masked;
mod net;

pub use adam::Adam;
pub use net::{
    embed, shape_params, AutoregressivePolicy, HybridAction, PolicyDims, StepHeads, Trajectory, TrajectoryCache, TrajectoryWeights,
    BETA_SHAPE_RANGE, DISCRETE_ONLY_VALUE, XI_RANGE,
};
