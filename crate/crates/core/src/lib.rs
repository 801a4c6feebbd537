//! Spectral-Galerkin simulation of the strongly damped p-Laplacian wave
//! equation
//!
//! ```text
//! u_tt - Δ_p u - Δu_t = f(u)                         in (0, L) × (0, T)
//! |u_x|^{p-2} ∂_ν u + |u|^{p-2} u + ∂_ν u_t + u_t = h(u)   at x = 0, L
//! ```
//!
//! on an interval, using the eigenbasis of `-d²/dx²` with the Robin
//! condition `∂_ν w + w = 0`. Alongside the integrator the crate tracks the
//! energy functionals that separate bounded solutions from finite-time
//! blow-up.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod config;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod function_space;
pub mod quadrature;
pub mod sources;
pub mod spectrum;
pub mod verify;

pub use config::{InitialData, InitialProfile, ParamChoice, Scheme, SimulationConfig};
pub use dynamics::{simulate, weak_residual, GalerkinSystem, ModalState, Termination, Trajectory};
pub use energy::{BlowupParameters, EnergyRecord};
pub use error::{Error, Result};
pub use function_space::{DiscreteFunction, NodalFunction, Region};
pub use quadrature::{QuadratureParams, QuadratureRule};
pub use sources::{SourceForm, SourceSpec, Truncation};
pub use spectrum::{DomainSpec, RobinEigenpair, SpectralBasis};
