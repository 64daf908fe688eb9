//! Spectral data, total Q-curvature functionals and degenerate-stability
//! probes for GJMS operators on `S¹(τ) × S^{n−1}`, plus the fourth-order
//! kernel quadratics on Einstein products.

pub mod as3;
pub mod error;
pub mod exact;
pub mod inequality;
pub mod numerics;
pub mod qfunctional;
pub mod quartic;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Dims, ModeIndex};
