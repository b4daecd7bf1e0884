//! Homogenized limit models of non-isothermal Darcy-Brinkman flow in a thin
//! domain with a periodically rough upper boundary.
//!
//! The crate builds, for each roughness regime, the chain
//! cell problem -> effective mobility -> macroscopic Reynolds pressure ->
//! reconstructed velocity and temperature fields, and ships an independent
//! brute-force oracle layer that validates every closed form.
//!
//! * [`params`] - physical constants, roughness profiles, grids.
//! * [`profile`] - closed-form vertical Brinkman profile and flow factor.
//! * [`cell_sub`] - periodic scalar cell problems (subcritical regime).
//! * [`cell_crit`] - 3D Darcy-Brinkman cell problems (critical regime).
//! * [`reynolds`] - macroscopic pressure problem with tensor mobility.
//! * [`reconstruct`] - limit velocity/temperature fields and their averages.
//! * [`oracle`] - independent finite-difference and quadrature references.
//! * [`config`], [`pipeline`], [`verify`] - batch pipeline and check suites.

pub mod cell_crit;
pub mod cell_sub;
pub mod config;
pub mod error;
pub mod linsolve;
pub mod oracle;
pub mod params;
pub mod pipeline;
pub mod profile;
pub mod reconstruct;
pub mod reynolds;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use params::{CellGrid, MacroGrid, PhysicalParams, RoughnessProfile};
pub use tensor::{EffectiveTensor, Regime};
