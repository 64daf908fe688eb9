//! Total Q-curvature functional on `M = S¹(τ) × S^{n−1}` for conformal
//! factors that depend on the circle variable only.
//!
//! `Q(u) = E(u) / ‖u‖²_{2*}` with `E(u) = (2/(n−2k)) ∫ u P u dμ`. The energy is
//! evaluated spectrally; the `L^{2*}` norm by the trapezoid rule in `t`
//! times the volume of `S^{n−1}`.

mod quadrature;
mod radial;
mod variation;

use serde::{Deserialize, Serialize};

pub use quadrature::{circle_mean, CircleMean, QuadratureConfig};
pub use radial::{RadialFourierFunction, RadialMode};
pub use variation::{
    f_functional, gradient, gradient_check, hessian_at_one, GradientCheck, GradientComparison,
    GradientEntry, HessianEntry, KernelMode, Parity, VariationReport, KERNEL_TOL,
};

use crate::error::{Error, Result};
use crate::numerics::golden_section_min;
use crate::special;
use crate::spectral::{alpha_at, solve_tau0, Dims, DEFAULT_TAU0_TOL};

/// `vol(S¹(τ) × S^{n−1}) = 2πτ·ω_{n−1}`.
pub fn volume(dims: Dims, tau: f64) -> f64 {
    std::f64::consts::TAU * tau * special::sphere_volume(dims.n() - 1)
}

/// Sharp constant of the order-2k Sobolev inequality on the round `S^n`,
/// `ω_n^{2k/n} Γ(n/2 + k) / Γ(n/2 − k)`.
pub fn sobolev_sharp_constant(dims: Dims) -> f64 {
    let n = f64::from(dims.n());
    let k = f64::from(dims.k());
    let ln = (2.0 * k / n) * special::ln_sphere_volume(dims.n()) + special::ln_gamma(n / 2.0 + k)
        - special::ln_gamma(n / 2.0 - k);
    ln.exp()
}

/// Constants of the product at its critical radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConstants {
    pub dims: Dims,
    pub tau0: f64,
    pub vol: f64,
    pub omega_n_minus_1: f64,
    /// `Q(1)`, evaluated through the quotient.
    pub yamabe: f64,
    pub sobolev_sharp: f64,
}

impl GeometryConstants {
    pub fn new(dims: Dims) -> Result<Self> {
        let tau0 = solve_tau0(dims, DEFAULT_TAU0_TOL)?.tau0;
        let one = RadialFourierFunction::constant(dims, tau0, 1.0)?;
        Ok(GeometryConstants {
            dims,
            tau0,
            vol: volume(dims, tau0),
            omega_n_minus_1: special::sphere_volume(dims.n() - 1),
            yamabe: q_functional(&one)?,
            sobolev_sharp: sobolev_sharp_constant(dims),
        })
    }

    /// `mean + Σ a_m cos(mt/τ₀) + b_m sin(mt/τ₀)`.
    pub fn function(
        &self,
        mean: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    ) -> Result<RadialFourierFunction> {
        RadialFourierFunction::new(self.dims, self.tau0, mean, cos_coeffs, sin_coeffs)
    }

    pub fn constant(&self, c: f64) -> RadialFourierFunction {
        RadialFourierFunction::constant(self.dims, self.tau0, c).expect("tau0 is positive")
    }
}

/// `α_{m,0}(τ)` for the circle frequency of a radial mode.
fn mode_alpha(dims: Dims, tau: f64, m: u32) -> f64 {
    alpha_at(dims, 0, f64::from(m).powi(2) / (tau * tau))
}

/// `∫ v P u dμ`, diagonal in the Fourier basis.
pub fn pairing(u: &RadialFourierFunction, v: &RadialFourierFunction) -> Result<f64> {
    if u.dims() != v.dims() || u.tau() != v.tau() {
        return Err(Error::domain("functions live on different geometries"));
    }
    let (dims, tau) = (u.dims(), u.tau());
    let vol = volume(dims, tau);
    let order = u.order().max(v.order()) as u32;
    let mut s = mode_alpha(dims, tau, 0) * u.mean() * v.mean();
    for m in 1..=order {
        let cs = u.coefficient(RadialMode::Cos(m)) * v.coefficient(RadialMode::Cos(m))
            + u.coefficient(RadialMode::Sin(m)) * v.coefficient(RadialMode::Sin(m));
        if cs != 0.0 {
            s += mode_alpha(dims, tau, m) * cs * 0.5;
        }
    }
    Ok(s * vol)
}

/// `E(u) = (2/(n−2k)) ∫ u P u dμ`.
pub fn energy(u: &RadialFourierFunction) -> f64 {
    u.dims().energy_factor() * pairing(u, u).expect("same geometry")
}

/// `(∫_M |u|^{2*} dμ)^{1/2*}`.
pub fn lp_norm_2star(u: &RadialFourierFunction, cfg: &QuadratureConfig) -> Result<f64> {
    let p = u.dims().two_star_f64();
    Ok(power_integral(u, cfg)?.powf(1.0 / p))
}

/// `∫_M |u|^{2*} dμ`.
fn power_integral(u: &RadialFourierFunction, cfg: &QuadratureConfig) -> Result<f64> {
    let p = u.dims().two_star_f64();
    let mean = circle_mean(1, cfg, |theta, out| {
        let v = u.eval_angle(theta);
        if v <= 0.0 && !cfg.absolute_value {
            return Err(non_positive(theta, v));
        }
        out[0] = v.abs().powf(p);
        Ok(())
    })?;
    Ok(volume(u.dims(), u.tau()) * mean.values[0])
}

pub(crate) fn non_positive(theta: f64, v: f64) -> Error {
    Error::domain(format!(
        "conformal factor is non-positive (u = {v:e} at t/tau = {theta:.6})"
    ))
}

pub fn q_functional(u: &RadialFourierFunction) -> Result<f64> {
    q_functional_with(u, &QuadratureConfig::default())
}

pub fn q_functional_with(u: &RadialFourierFunction, cfg: &QuadratureConfig) -> Result<f64> {
    let p = u.dims().two_star_f64();
    let n = power_integral(u, cfg)?;
    Ok(energy(u) / n.powf(2.0 / p))
}

/// Squared `W^{k,2}` norm with weight `(1 + m²τ⁻²)^k` per circle mode.
pub fn sobolev_norm_sq(u: &RadialFourierFunction) -> f64 {
    let (dims, tau) = (u.dims(), u.tau());
    let vol = volume(dims, tau);
    let k = dims.k() as i32;
    let mut s = u.mean().powi(2);
    for m in 1..=u.order() as u32 {
        let w = (1.0 + f64::from(m).powi(2) / (tau * tau)).powi(k);
        let c2 =
            u.coefficient(RadialMode::Cos(m)).powi(2) + u.coefficient(RadialMode::Sin(m)).powi(2);
        s += w * c2 * 0.5;
    }
    s * vol
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitAndDistance {
    /// `Q(u) − Q(1)`.
    pub deficit: f64,
    /// `E(u) − Q(1)‖u‖²_{2*}`.
    pub f_value: f64,
    /// `‖u‖²_{2*}`, the factor converting `f_value` into `deficit`.
    pub norm_sq: f64,
    /// `‖u − ū‖_{k,2} / ‖u‖_{k,2}`.
    pub dist: f64,
    /// `E(u − ū)^{1/2}`.
    pub energy_dist: f64,
}

pub fn deficit_and_distance(u: &RadialFourierFunction) -> Result<DeficitAndDistance> {
    deficit_and_distance_with(u, &QuadratureConfig::default())
}

/// Deficit through the stable form.
///
/// With `u = ū(1 + ρ)` and `I = vol⁻¹ ∫ ((1+ρ)^{2*} − 1 − 2*ρ)`, the identity
/// `E(1) = Q(1)‖1‖²` gives `E(u) − Q(1)‖u‖² = ū²(E(ρ) − E(1)((1+I)^{2/2*} − 1))`,
/// and both brackets are evaluated without cancellation at small `ρ`.
pub fn deficit_and_distance_with(
    u: &RadialFourierFunction,
    cfg: &QuadratureConfig,
) -> Result<DeficitAndDistance> {
    let (f_value, norm_sq) = stable_f(u, cfg)?;
    let osc = u.oscillation();
    let full = sobolev_norm_sq(u);
    Ok(DeficitAndDistance {
        deficit: f_value / norm_sq,
        f_value,
        norm_sq,
        dist: (sobolev_norm_sq(&osc) / full).sqrt(),
        energy_dist: energy(&osc).sqrt(),
    })
}

pub(crate) fn stable_f(u: &RadialFourierFunction, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let dims = u.dims();
    let ubar = u.mean();
    if ubar <= 0.0 {
        return Err(Error::domain(format!("mean {ubar:e} must be positive")));
    }
    let p = dims.two_star_f64();
    let osc = u.oscillation();
    let excess = circle_mean(1, cfg, |theta, out| {
        let rho = osc.eval_angle(theta) / ubar;
        if rho <= -1.0 {
            return Err(non_positive(theta, ubar * (1.0 + rho)));
        }
        out[0] = (p * rho.ln_1p()).exp_m1() - p * rho;
        Ok(())
    })?
    .values[0];
    let vol = volume(dims, u.tau());
    let e_one = dims.energy_factor() * mode_alpha(dims, u.tau(), 0) * vol;
    let e_rho = energy(&osc) / (ubar * ubar);
    let growth = 2.0 / p * excess.ln_1p();
    let f_value = ubar * ubar * (e_rho - e_one * growth.exp_m1());
    let norm_sq = ubar * ubar * vol.powf(2.0 / p) * growth.exp();
    Ok((f_value, norm_sq))
}

/// Infimum of `‖u − c‖_{k,2}` over `c ∈ [ū/2, 2ū]` against the value at `c = ū`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NearestConstant {
    pub mean: f64,
    pub argmin: f64,
    pub dist_at_mean: f64,
    pub min_dist: f64,
    /// `(dist_at_mean − min_dist) / dist_at_mean`, zero when both vanish.
    pub relative_gap: f64,
}

pub fn nearest_constant_check(u: &RadialFourierFunction) -> Result<NearestConstant> {
    let ubar = u.mean();
    if ubar <= 0.0 {
        return Err(Error::domain(format!("mean {ubar:e} must be positive")));
    }
    let dist_to = |c: f64| {
        let w = u.with_added(RadialMode::Constant, -c);
        sobolev_norm_sq(&w).sqrt()
    };
    let (argmin, min_dist) = golden_section_min(dist_to, 0.5 * ubar, 2.0 * ubar, 1e-12 * ubar);
    let dist_at_mean = dist_to(ubar);
    let relative_gap = if dist_at_mean > 0.0 {
        (dist_at_mean - min_dist) / dist_at_mean
    } else {
        0.0
    };
    Ok(NearestConstant {
        mean: ubar,
        argmin,
        dist_at_mean,
        min_dist,
        relative_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalNorms {
    /// `‖u − v‖_{L^{2*}}`
    pub norm2star: f64,
    /// `(∫ (u − v) P (u − v))^{1/2}`
    pub norm_star: f64,
}

pub fn conformal_norms(
    u: &RadialFourierFunction,
    v: &RadialFourierFunction,
) -> Result<ConformalNorms> {
    let w = u.minus(v)?;
    let norm2star = lp_norm_2star(&w, &QuadratureConfig::default().with_absolute_value())?;
    Ok(ConformalNorms {
        norm2star,
        norm_star: pairing(&w, &w)?.max(0.0).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n: u32, k: u32) -> GeometryConstants {
        GeometryConstants::new(Dims::new(n, k).unwrap()).unwrap()
    }

    #[test]
    fn energy_examples() {
        let g = geom(5, 1);
        let one = g.constant(1.0);
        assert!((energy(&one) - (2.0 / 3.0) * 2.25 * g.vol).abs() < 1e-13 * g.vol);
        let c = g.function(0.0, vec![1.0], vec![0.0]).unwrap();
        let expect = (2.0 / 3.0) * 5.25 * g.vol / 2.0;
        assert!((energy(&c) - expect).abs() < 1e-13 * expect);
        let both = g.function(1.0, vec![1.0], vec![0.0]).unwrap();
        assert!((energy(&both) - energy(&one) - energy(&c)).abs() < 1e-13 * expect);
    }

    #[test]
    fn constant_norm_and_yamabe() {
        let g = geom(6, 2);
        let p = g.dims.two_star_f64();
        let c = 3.5;
        let norm = lp_norm_2star(&g.constant(c), &QuadratureConfig::default()).unwrap();
        assert!((norm - c * g.vol.powf(1.0 / p)).abs() < 1e-13 * norm);
        let p0 = 9.0;
        let y = 2.0 / 2.0 * p0 * g.vol.powf(2.0 * 2.0 / 6.0);
        assert!((g.yamabe - y).abs() < 1e-12 * y);
        assert!((q_functional(&g.constant(7.0)).unwrap() - g.yamabe).abs() < 1e-12 * y);
    }

    #[test]
    fn non_positive_is_refused_unless_absolute() {
        let g = geom(5, 1);
        let u = g.function(0.2, vec![1.0], vec![0.0]).unwrap();
        let cfg = QuadratureConfig::default();
        assert_eq!(lp_norm_2star(&u, &cfg).unwrap_err().kind(), "domain");
        assert!(q_functional(&u).is_err());
        assert!(deficit_and_distance(&u).is_err());
        assert!(lp_norm_2star(&u, &cfg.with_absolute_value()).unwrap() > 0.0);
    }

    #[test]
    fn stable_deficit_agrees_with_quotient() {
        let g = geom(7, 2);
        let u = g.function(1.3, vec![0.2, -0.05], vec![0.1, 0.02]).unwrap();
        let d = deficit_and_distance(&u).unwrap();
        let direct = q_functional(&u).unwrap() - g.yamabe;
        assert!((d.deficit - direct).abs() < 1e-11 * g.yamabe);
        let norm = lp_norm_2star(&u, &QuadratureConfig::default()).unwrap();
        assert!((d.norm_sq - norm * norm).abs() < 1e-12 * d.norm_sq);
    }

    #[test]
    fn deficit_of_constant_vanishes() {
        let g = geom(5, 1);
        let d = deficit_and_distance(&g.constant(2.0)).unwrap();
        assert_eq!(d.deficit, 0.0);
        assert_eq!(d.dist, 0.0);
        assert_eq!(d.energy_dist, 0.0);
    }

    #[test]
    fn nearest_constant_is_the_mean() {
        let g = geom(5, 1);
        let u = g.function(1.0, vec![0.1, 0.03], vec![0.0, -0.02]).unwrap();
        let r = nearest_constant_check(&u).unwrap();
        assert!((r.argmin - 1.0).abs() < 1e-5);
        assert!(r.relative_gap.abs() <= 1e-6);
    }

    #[test]
    fn conformal_norms_vanish_on_diagonal() {
        let g = geom(5, 1);
        let u = g.function(1.0, vec![0.1], vec![0.2]).unwrap();
        let r = conformal_norms(&u, &u).unwrap();
        assert_eq!(r.norm2star, 0.0);
        assert_eq!(r.norm_star, 0.0);
    }

    #[test]
    fn sobolev_constant_k1_matches_yamabe_form() {
        // k = 1: S = n(n−2)/4 · ω_n^{2/n}
        let dims = Dims::new(5, 1).unwrap();
        let expect = 5.0 * 3.0 / 4.0 * special::sphere_volume(5).powf(0.4);
        assert!((sobolev_sharp_constant(dims) - expect).abs() < 1e-12 * expect);
    }
}
