//! Built-in target densities and the tempering/annealing wrappers.

mod benchmarks;
mod logit;
mod rejection;
mod transform;

pub use benchmarks::{dropwave, gaussian, rosenbrock, smiley, smiley_components, SMILEY_MODES};
pub use logit::{
    choice_probability, nonlinear_logit_loglik, simulate_logit_data, utility, LogitData,
    OFFER_RANGE,
};
pub use rejection::{
    dropwave_sample, rejection_sample, smiley_sample, DROPWAVE_LOG_ENVELOPE, SMILEY_BOUNDS,
    SMILEY_LOG_ENVELOPE,
};
pub use transform::{geometric_bridge, powered, product};
