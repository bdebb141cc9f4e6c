//! Continuous empowerment approximations.
//!
//! Two routes are provided. [`mc_empowerment`] runs Blahut-Arimoto over a
//! finite set of candidate actions whose outcomes are Gaussian, estimating
//! each divergence by sampling. [`qlg_empowerment`] assumes a locally linear
//! action-to-sensor map with additive Gaussian noise under a power budget and
//! solves it exactly via whitening, SVD, and water-filling.
//!
//! Naive binning of the sensor space is deliberately not offered: its
//! estimates depend on bin placement rather than on the dynamics.

mod mc;
mod qlg;

pub use mc::{mc_empowerment, GaussianActionModel, McParams, McResult, DENSITY_FLOOR};
pub use qlg::{
    qlg_empowerment, qlg_from_matrices, subchannel_bits, water_filling, whiten,
    LinearGaussianChannel, QlgResult, WaterFillingResult, NOISE_EIGENVALUE_FLOOR,
    SINGULAR_VALUE_CUTOFF,
};
