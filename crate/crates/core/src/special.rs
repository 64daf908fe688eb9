//! Log-Gamma and sphere volumes.

use std::f64::consts::PI;

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln |S^d| for the unit d-sphere, |S^d| = 2π^{(d+1)/2}/Γ((d+1)/2).
pub fn ln_sphere_volume(d: u32) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    std::f64::consts::LN_2 + h * PI.ln() - ln_gamma(h)
}

pub fn sphere_volume(d: u32) -> f64 {
    ln_sphere_volume(d).exp()
}
