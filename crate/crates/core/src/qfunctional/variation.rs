//! First and second variation of the functional.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{
    circle_mean, energy, mode_alpha, non_positive, pairing, q_functional_with, stable_f, volume,
    QuadratureConfig, RadialFourierFunction, RadialMode,
};
use crate::error::{Error, Result};
use crate::spectral::{alpha, solve_tau0, Dims, ModeIndex, DEFAULT_TAU0_TOL};

/// `F(u) = E(u) − Q(1)‖u‖²_{2*}`, which vanishes on constants.
pub fn f_functional(u: &RadialFourierFunction) -> Result<f64> {
    Ok(stable_f(u, &QuadratureConfig::default())?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientEntry {
    pub mode: RadialMode,
    pub value: f64,
}

/// Closed-form `DQ(u)(φ)` for every basis direction `φ` of the truncated class:
///
/// `DQ(u)(v) = (2/(n−2k)) N^{−2/2*} 2∫vPu − (4/(n−2k)) N^{−2/2*−1} ∫u^{2*−1}v ∫uPu`,
/// with `N = ∫u^{2*}`.
pub fn gradient(u: &RadialFourierFunction, cfg: &QuadratureConfig) -> Result<Vec<GradientEntry>> {
    Ok(gradient_with_points(u, cfg)?.0)
}

fn gradient_with_points(
    u: &RadialFourierFunction,
    cfg: &QuadratureConfig,
) -> Result<(Vec<GradientEntry>, usize)> {
    let dims = u.dims();
    let p = dims.two_star_f64();
    let f = dims.energy_factor();
    let vol = volume(dims, u.tau());
    let modes = u.modes();

    let means = circle_mean(1 + modes.len(), cfg, |theta, out| {
        let v = u.eval_angle(theta);
        if v <= 0.0 {
            return Err(non_positive(theta, v));
        }
        let w = v.powf(p - 1.0);
        out[0] = w * v;
        for (slot, mode) in out[1..].iter_mut().zip(&modes) {
            *slot = w * mode.eval_angle(theta);
        }
        Ok(())
    })?;

    let n_int = vol * means.values[0];
    let upu = pairing(u, u)?;
    let scale_a = n_int.powf(-2.0 / p);
    let scale_b = n_int.powf(-2.0 / p - 1.0);
    let entries = modes
        .iter()
        .zip(&means.values[1..])
        .map(|(&mode, &mixed)| {
            let weight = mode.mean_square() * vol;
            let vpu = mode_alpha(dims, u.tau(), mode.frequency()) * u.coefficient(mode) * weight;
            let value = f * scale_a * 2.0 * vpu - 2.0 * f * scale_b * vol * mixed * upu;
            GradientEntry { mode, value }
        })
        .collect();
    Ok((entries, means.points))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientComparison {
    pub mode: RadialMode,
    pub closed_form: f64,
    pub finite_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub h: f64,
    pub entries: Vec<GradientComparison>,
    pub max_abs_error: f64,
    /// Largest absolute error divided by the largest closed-form component.
    pub max_rel_error: f64,
}

/// Closed-form gradient against central differences of `Q` with step `h`.
pub fn gradient_check(u: &RadialFourierFunction, h: f64) -> Result<GradientCheck> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(Error::domain(format!(
            "step h = {h:e} outside [1e-7, 1e-3]"
        )));
    }
    let (closed, points) = gradient_with_points(u, &QuadratureConfig::default())?;
    let fd_cfg = QuadratureConfig::fixed(2 * points);
    let mut entries = Vec::with_capacity(closed.len());
    for g in &closed {
        let plus = q_functional_with(&u.with_added(g.mode, h), &fd_cfg)?;
        let minus = q_functional_with(&u.with_added(g.mode, -h), &fd_cfg)?;
        entries.push(GradientComparison {
            mode: g.mode,
            closed_form: g.value,
            finite_difference: (plus - minus) / (2.0 * h),
        });
    }
    let max_abs_error = entries
        .iter()
        .map(|e| (e.closed_form - e.finite_difference).abs())
        .fold(0.0, f64::max);
    let scale = entries
        .iter()
        .map(|e| e.closed_form.abs())
        .fold(0.0, f64::max);
    let max_rel_error = if scale > 0.0 {
        max_abs_error / scale
    } else {
        f64::INFINITY
    };
    Ok(GradientCheck {
        h,
        entries,
        max_abs_error,
        max_rel_error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianEntry {
    pub mode: ModeIndex,
    pub parity: Parity,
    /// Number of spherical harmonics of degree `j`.
    pub multiplicity: u128,
    /// `D²F(1)[φ, φ] / ∫φ²`.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelMode {
    pub mode: ModeIndex,
    pub parity: Parity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub dims: Dims,
    pub tau0: f64,
    /// `Q(1)`
    pub value: f64,
    /// `DQ(1)` on the circle modes up to `mMax`.
    pub gradient: Vec<GradientEntry>,
    pub hessian_diagonal: Vec<HessianEntry>,
    pub kernel_modes: Vec<KernelMode>,
    pub kernel_dimension: u128,
    pub positive_off_kernel: bool,
}

/// Relative size below which a Hessian entry counts as zero.
pub const KERNEL_TOL: f64 = 1e-10;

/// Diagonal Hessian of `F` at `u ≡ 1` in the basis `{cos, sin}(mt/τ₀)·Y_j`.
///
/// For mean-zero `ρ` in mode `(m, j)`,
/// `D²F(1)[ρ, ρ] = 2·(2/(n−2k))·(α_{m,j} − α_{1,0}) ∫ρ²`; `F` vanishes on constants.
pub fn hessian_at_one(dims: Dims, m_max: u32, j_max: u32) -> Result<VariationReport> {
    let tau0 = solve_tau0(dims, DEFAULT_TAU0_TOL)?.tau0;
    let f = dims.energy_factor();
    let a10 = alpha(dims, ModeIndex::new(1, 0), tau0)?;
    let zero = KERNEL_TOL * f * a10;

    let mut hessian_diagonal = Vec::new();
    for m in 0..=m_max {
        for j in 0..=j_max {
            let mode = ModeIndex::new(m, j);
            let multiplicity = mode
                .sphere_multiplicity(dims)
                .to_u128()
                .ok_or_else(|| Error::domain(format!("multiplicity of degree {j} overflows")))?;
            let value = if m == 0 && j == 0 {
                0.0
            } else {
                2.0 * f * (alpha(dims, mode, tau0)? - a10)
            };
            let parities: &[Parity] = if m == 0 {
                &[Parity::Cos]
            } else {
                &[Parity::Cos, Parity::Sin]
            };
            for &parity in parities {
                hessian_diagonal.push(HessianEntry {
                    mode,
                    parity,
                    multiplicity,
                    value,
                });
            }
        }
    }

    let kernel: Vec<&HessianEntry> = hessian_diagonal
        .iter()
        .filter(|e| e.value.abs() <= zero)
        .collect();
    let kernel_dimension = kernel.iter().map(|e| e.multiplicity).sum();
    let kernel_modes = kernel
        .iter()
        .map(|e| KernelMode {
            mode: e.mode,
            parity: e.parity,
        })
        .collect();
    let positive_off_kernel = hessian_diagonal
        .iter()
        .all(|e| e.value.abs() <= zero || e.value > 0.0);

    let mut one = RadialFourierFunction::constant(dims, tau0, 1.0)?;
    if m_max > 1 {
        one = one.with_added(RadialMode::Cos(m_max), 0.0);
    }
    let value = energy(&one) / super::lp_norm_2star(&one, &QuadratureConfig::default())?.powi(2);
    let gradient = gradient(&one, &QuadratureConfig::default())?;

    Ok(VariationReport {
        dims,
        tau0,
        value,
        gradient,
        hessian_diagonal,
        kernel_modes,
        kernel_dimension,
        positive_off_kernel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfunctional::GeometryConstants;

    #[test]
    fn kernel_of_five_one() {
        let r = hessian_at_one(Dims::new(5, 1).unwrap(), 3, 3).unwrap();
        assert_eq!(r.kernel_dimension, 3);
        assert!(r.positive_off_kernel);
        let modes: Vec<_> = r
            .kernel_modes
            .iter()
            .map(|k| (k.mode.m, k.mode.j, k.parity))
            .collect();
        assert_eq!(
            modes,
            vec![
                (0, 0, Parity::Cos),
                (1, 0, Parity::Cos),
                (1, 0, Parity::Sin)
            ]
        );
        assert!(r.gradient.iter().all(|g| g.value.abs() < 1e-12));
    }

    #[test]
    fn hessian_entries_follow_eigenvalue_gaps() {
        let dims = Dims::new(5, 1).unwrap();
        let r = hessian_at_one(dims, 2, 1).unwrap();
        let get = |m, j| {
            r.hessian_diagonal
                .iter()
                .find(|e| e.mode == ModeIndex::new(m, j))
                .unwrap()
                .value
        };
        // 2·(2/3)·(57/4 − 21/4), 2·(2/3)·(25/4 − 21/4)
        assert!((get(2, 0) - 12.0).abs() < 1e-12);
        assert!((get(0, 1) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let g = GeometryConstants::new(Dims::new(5, 1).unwrap()).unwrap();
        let one = g.function(1.0, vec![0.0; 3], vec![0.0; 3]).unwrap();
        let c = gradient_check(&one, 1e-4).unwrap();
        assert!(c.max_abs_error < 1e-8);
        let u = g.function(1.0, vec![0.0, 0.2], vec![0.0, 0.0]).unwrap();
        let c = gradient_check(&u, 1e-4).unwrap();
        assert!(c.max_rel_error < 1e-6, "{c:?}");
        assert!(gradient_check(&u, 1e-2).is_err());
    }
}
