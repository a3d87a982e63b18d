//! State-space control of an inverted pendulum on a cart.
//!
//! The crate covers the whole design loop for a single-input plant:
//!
//! * [`model`]: nonlinear dynamics and Taylor linearization of the plant,
//! * [`props`]: controllability / observability rank tests,
//! * [`placement`]: pole placement through the controllable canonical form,
//!   the `s -> z` pole map and reference feedforward,
//! * [`discretize`]: exact zero-order-hold discretization,
//! * [`sim`]: continuous and sampled closed-loop simulation, performance
//!   metrics and sampling-period sweeps,
//!
//! all on top of the small dense matrix engine in [`kernel`].
//!
//! ```
//! use num_complex::Complex64;
//! use pendctl::{linearize, place, OperatingPoint, PendulumParams};
//!
//! let sys = linearize(&PendulumParams::default(), OperatingPoint::AngleZero).unwrap();
//! let poles = [
//!     Complex64::new(-2.0, 0.0),
//!     Complex64::new(-3.0, 0.5),
//!     Complex64::new(-3.0, -0.5),
//!     Complex64::new(-4.0, 0.0),
//! ];
//! let spec = place(&sys, &poles).unwrap();
//! assert!(spec.residual < 1e-6);
//! ```

pub mod discretize;
pub mod error;
pub mod kernel;
pub mod model;
pub mod placement;
pub mod props;
pub mod sim;

pub use discretize::{sweep_discretize, zoh_discretize};
pub use error::{Error, Result};
pub use kernel::{Matrix, Polynomial};
pub use model::{
    dynamics, equilibria, linearize, output, Equilibrium, LinearSystem, OperatingPoint,
    PendulumParams, Stability, StateVector, TimeDomain,
};
pub use placement::{
    canonical_transform, feedforward_gain, gamma_matrix, map_poles_s_to_z, place, CanonicalForm,
    GainSpec,
};
pub use props::{check, controllability_matrix, observability_matrix, PropertyReport};
pub use sim::{
    evaluate, simulate, simulate_continuous, simulate_sampled, sweep_sampling, Controller,
    PerfMetrics, Plant, SimConfig, SweepPoint, SweepSetup, Trajectory,
};
