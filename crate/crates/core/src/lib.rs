//! Spectral controller synthesis and closed-loop simulation for heat-type
//! diffusion on box domains, with rejection of bounded unknown disturbances.
//!
//! The toolkit works entirely in modal coordinates: the state is expanded in
//! the Dirichlet-Laplacian eigenbasis of the box, the control subdomain enters
//! through the Gram matrix of eigenfunctions restricted to it, and the
//! feedback law combines a linear damping of the low modes with a saturated
//! (regularized sign) term that dominates any disturbance of known bound.
//!
//! Pipeline:
//! 1. [`spectral`] enumerates eigenpairs of `-Δ + c` on `Ω = Π (0, L_k)` and
//!    selects how many modes a target decay rate requires.
//! 2. [`gram`] assembles the `ω`-restricted Gram matrix and extracts the
//!    spectral constant (smallest eigenvalue of its leading block).
//! 3. [`controller`] fixes the feedback gains and evaluates both feedback
//!    terms in modal coordinates.
//! 4. [`disturbance`] generates bounded test disturbances, including an
//!    adversarial one aligned against the rejection term.
//! 5. [`simulator`] integrates the closed loop with an exponential or IMEX
//!    Euler scheme and logs per-step diagnostics.
//! 6. [`diagnostics`] fits decay rates and checks the exponential-decay
//!    certificate on logged trajectories.
//!
//! All numerics are generic over the scalar type ([`Real`]); `f64` aliases
//! for the main types live at the crate root.

// `!(x > 0)` guards are deliberate: they reject NaN along with the
// out-of-range values, which `x <= 0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::RealField;

pub mod controller;
pub mod disturbance;
pub mod diagnostics;
mod error;
pub mod gram;
pub mod simulator;
pub mod spectral;

pub use error::{Error, Result};

/// Scalar type for all core math: `f32` or `f64`.
pub trait Real: RealField + Copy {}
impl<T: RealField + Copy> Real for T {}

/// Shorthand for converting an `f64` literal into the working scalar type.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

pub type DomainSpec64 = spectral::DomainSpec<f64>;
pub type ModeSet64 = spectral::ModeSet<f64>;
pub type GramMatrix64 = gram::GramMatrix<f64>;
pub type SpectralConstant64 = gram::SpectralConstant<f64>;
pub type ControllerParams64 = controller::ControllerParams<f64>;
pub type ModalState64 = controller::ModalState<f64>;
pub type DisturbanceSpec64 = disturbance::DisturbanceSpec<f64>;
pub type SimConfig64 = simulator::SimConfig<f64>;
pub type Trajectory64 = simulator::Trajectory<f64>;
pub type DecayReport64 = diagnostics::DecayReport<f64>;
