//! Second-moment exponential scaling (SMES) optimizers and the machinery to
//! study them: dense tensors, a small backprop network, analytic objectives,
//! synthetic datasets, and a reproducible alpha-sweep harness.
//!
//! The update rule is `θ ← θ − η m̂ / (v̂ᵅ + ε)`; `α = 0` gives SGD-shaped
//! steps and `α = 0.5` gives Adam.

pub mod config;
pub mod data;
pub mod error;
pub mod net;
pub mod objectives;
pub mod optim;
pub mod plot;
pub mod rng;
pub mod selfcheck;
pub mod sweep;
pub mod tensor;

pub use error::{Error, Result};
pub use net::{Activation, GradientReport, Loss, Network, NetworkSpec};
pub use optim::{clip_global_norm, preset, smes_step, smes_step_group, DecayMode, Smes, SmesConfig, SmesState};
pub use rng::RngStream;
pub use sweep::{RunConfig, RunRecord, SweepSpec, SweepSummary};
pub use tensor::Tensor;
