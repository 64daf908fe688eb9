//! Degenerate-stability probe: a family along the first Hessian kernel mode
//! whose deficit vanishes to fourth order in the distance to the constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::quartic_constant_c;
use crate::numerics::{fit_line, golden_section_min, LineFit};
use crate::qfunctional::{
    circle_mean, deficit_and_distance_with, energy, stable_f, GeometryConstants, QuadratureConfig,
    RadialFourierFunction,
};
use crate::spectral::{alpha, Dims, ModeIndex};

pub const XI_MAX: f64 = 0.2;
/// Samples with deficit at or below `DEFICIT_FLOOR · ε · Y` are not fitted.
pub const DEFICIT_FLOOR: f64 = 1e3;
pub const MIN_FIT_SAMPLES: usize = 6;
pub const MIN_GRID_POINTS: usize = 8;

/// Second-mode amplitude annihilating the completed square,
/// `b* = α_{1,0}(2*−2)ξ / (4(α_{2,0} − α_{1,0}))`.
pub fn optimal_b(dims: Dims, xi: f64) -> Result<f64> {
    check_xi(xi, true)?;
    let tau0 = crate::spectral::solve_tau0(dims, crate::spectral::DEFAULT_TAU0_TOL)?.tau0;
    optimal_b_at(dims, tau0, xi)
}

fn optimal_b_at(dims: Dims, tau0: f64, xi: f64) -> Result<f64> {
    let a10 = alpha(dims, ModeIndex::new(1, 0), tau0)?;
    let a20 = alpha(dims, ModeIndex::new(2, 0), tau0)?;
    Ok(a10 * (dims.two_star_f64() - 2.0) * xi / (4.0 * (a20 - a10)))
}

fn check_xi(xi: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { xi >= 0.0 } else { xi > 0.0 };
    if ok && xi <= XI_MAX {
        Ok(())
    } else {
        Err(Error::domain(format!("xi = {xi} outside (0, {XI_MAX}]")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    /// `1 + ξ(cos θ + b*(ξ) cos 2θ)`
    Degenerate,
    /// `1 + ξ cos θ`
    FirstMode,
    /// `1 + ξ cos 2θ`, a positive Hessian direction.
    SecondMode,
}

impl SequenceKind {
    pub const ALL: [SequenceKind; 3] = [
        SequenceKind::Degenerate,
        SequenceKind::FirstMode,
        SequenceKind::SecondMode,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SequenceKind::Degenerate => "degenerate",
            SequenceKind::FirstMode => "first-mode",
            SequenceKind::SecondMode => "second-mode",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitSample {
    pub xi: f64,
    pub b: f64,
    pub deficit: f64,
    pub dist: f64,
    pub energy_dist: f64,
    /// `‖u‖²_{2*}`, converting `F(u)` to `Q(u) − Y`.
    pub norm_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub dims: Dims,
    pub yamabe: f64,
    pub kind: SequenceKind,
    pub samples: Vec<DeficitSample>,
}

/// `0.1 · 2^{−i/2}` down to `10⁻³`.
pub fn default_xi_grid() -> Vec<f64> {
    (0..)
        .map(|i| 0.1 * 2f64.powf(-f64::from(i) / 2.0))
        .take_while(|&x| x >= 1e-3)
        .collect()
}

pub fn sequence_member(
    g: &GeometryConstants,
    kind: SequenceKind,
    xi: f64,
) -> Result<(RadialFourierFunction, f64)> {
    let (c1, c2) = match kind {
        SequenceKind::Degenerate => (xi, xi * optimal_b_at(g.dims, g.tau0, xi)?),
        SequenceKind::FirstMode => (xi, 0.0),
        SequenceKind::SecondMode => (0.0, xi),
    };
    let b = if kind == SequenceKind::Degenerate {
        c2 / xi
    } else {
        0.0
    };
    Ok((g.function(1.0, vec![c1, c2], vec![0.0; 2])?, b))
}

pub fn deficit_sample(g: &GeometryConstants, kind: SequenceKind, xi: f64) -> Result<DeficitSample> {
    check_xi(xi, false)?;
    let (u, b) = sequence_member(g, kind, xi)?;
    let r = deficit_and_distance_with(&u, &QuadratureConfig::default())?;
    Ok(DeficitSample {
        xi,
        b,
        deficit: r.deficit,
        dist: r.dist,
        energy_dist: r.energy_dist,
        norm_sq: r.norm_sq,
    })
}

pub fn sample_sequence(dims: Dims, kind: SequenceKind, grid: &[f64]) -> Result<SampleSet> {
    if grid.len() < MIN_GRID_POINTS {
        return Err(Error::domain(format!(
            "xi grid needs at least {MIN_GRID_POINTS} points"
        )));
    }
    let g = GeometryConstants::new(dims)?;
    let samples = grid
        .iter()
        .map(|&xi| deficit_sample(&g, kind, xi))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleSet {
        dims,
        yamabe: g.yamabe,
        kind,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    Dist,
    #[default]
    EnergyDist,
}

impl DistanceMetric {
    fn of(&self, s: &DeficitSample) -> f64 {
        match self {
            DistanceMetric::Dist => s.dist,
            DistanceMetric::EnergyDist => s.energy_dist,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub metric: DistanceMetric,
    pub samples: Vec<DeficitSample>,
    pub exponent: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
}

pub fn deficit_floor(yamabe: f64) -> f64 {
    DEFICIT_FLOOR * f64::EPSILON * yamabe
}

pub fn fit_exponent(set: &SampleSet, metric: DistanceMetric) -> Result<ExponentFit> {
    fit_exponent_window(set, metric, f64::INFINITY)
}

/// Log–log fit restricted to samples with `ξ ≤ xi_max`.
pub fn fit_exponent_window(
    set: &SampleSet,
    metric: DistanceMetric,
    xi_max: f64,
) -> Result<ExponentFit> {
    let floor = deficit_floor(set.yamabe);
    let used: Vec<DeficitSample> = set
        .samples
        .iter()
        .filter(|s| s.xi <= xi_max && s.deficit > floor && metric.of(s) > 0.0)
        .copied()
        .collect();
    if used.len() < MIN_FIT_SAMPLES {
        return Err(Error::accuracy(format!(
            "only {} samples above the deficit floor {floor:e}; need {MIN_FIT_SAMPLES}",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|s| metric.of(s).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|s| s.deficit.ln()).collect();
    let LineFit {
        slope,
        intercept,
        r2,
    } = fit_line(&xs, &ys).ok_or_else(|| Error::accuracy("degenerate log-log fit"))?;
    let lo = used.iter().map(|s| s.xi).fold(f64::INFINITY, f64::min);
    let hi = used.iter().map(|s| s.xi).fold(0.0, f64::max);
    Ok(ExponentFit {
        metric,
        samples: used,
        exponent: slope,
        intercept,
        r2,
        window: (lo, hi),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    /// `deficit/ξ⁴` at the smallest grid points.
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// `(max − min)/mean`
    pub spread: f64,
}

pub fn plateau(set: &SampleSet, last: usize) -> Result<Plateau> {
    let mut sorted = set.samples.clone();
    sorted.sort_by(|a, b| a.xi.total_cmp(&b.xi));
    if last == 0 || sorted.len() < last {
        return Err(Error::domain(format!("plateau needs {last} samples")));
    }
    let ratios: Vec<f64> = sorted[..last]
        .iter()
        .map(|s| s.deficit / s.xi.powi(4))
        .collect();
    let mean = ratios.iter().sum::<f64>() / last as f64;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });
    Ok(Plateau {
        ratios,
        mean,
        spread: (hi - lo) / mean,
    })
}

/// Limit of `deficit/ξ⁴` on the degenerate sequence: `c · E(φ)² / vol^{2/2*}`.
pub fn predicted_plateau(dims: Dims) -> Result<f64> {
    let g = GeometryConstants::new(dims)?;
    let c = quartic_constant_c(dims)?.c;
    let e_phi = energy(&g.function(0.0, vec![1.0], vec![0.0])?);
    Ok(c * e_phi * e_phi / g.vol.powf(2.0 / dims.two_star_f64()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BMinimization {
    pub xi: f64,
    pub b_star: f64,
    pub b_numeric: f64,
    pub deficit_at_b_star: f64,
    pub deficit_numeric: f64,
}

/// Golden-section search for the deficit-minimizing `b` at fixed `ξ`.
pub fn minimize_b(dims: Dims, xi: f64) -> Result<BMinimization> {
    check_xi(xi, false)?;
    let g = GeometryConstants::new(dims)?;
    let b_star = optimal_b_at(dims, g.tau0, xi)?;
    let cfg = QuadratureConfig::default();
    let deficit = |b: f64| -> Result<f64> {
        let u = g.function(1.0, vec![xi, xi * b], vec![0.0; 2])?;
        Ok(deficit_and_distance_with(&u, &cfg)?.deficit)
    };
    let mut failure = None;
    let (b_numeric, deficit_numeric) = golden_section_min(
        |b| {
            deficit(b).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::INFINITY
            })
        },
        b_star - 0.25,
        b_star + 0.25,
        1e-9,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(BMinimization {
        xi,
        b_star,
        b_numeric,
        deficit_at_b_star: deficit(b_star)?,
        deficit_numeric,
    })
}

/// Cosine series `Σ c_m cos mθ`; returns the coefficients of the product.
fn cos_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            let half = 0.5 * x * y;
            if i == 0 || j == 0 {
                out[i + j] += x * y;
            } else {
                out[i.abs_diff(j)] += half;
                out[i + j] += half;
            }
        }
    }
    out
}

/// Exact circle means of `(Σ c_m cos mθ)^j` for `j = 0..=max_power`.
pub fn trig_moments(coeffs: &[f64], max_power: usize) -> Vec<f64> {
    let mut power = vec![1.0];
    let mut means = vec![1.0];
    for _ in 0..max_power {
        power = cos_product(&power, coeffs);
        means.push(power[0]);
    }
    means
}

fn gen_binomial(p: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (p - f64::from(i)) / f64::from(i + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub xi: f64,
    pub b: f64,
    /// `F(u)` by quadrature.
    pub numeric: f64,
    /// Fourth-order expansion with exact moments.
    pub analytic: f64,
    pub discrepancy: f64,
    /// `discrepancy / |analytic|`
    pub relative_discrepancy: f64,
}

/// Quadrature `F(1 + ξ(φ + b cos 2θ))` against
/// `E(ρ) − E(1)[(2/2*)Σ_{j≤4} C(2*,j)M_j/vol + (1/2*)(2/2* − 1)(C(2*,2)M_2/vol)²]`.
pub fn frank3_expansion_check(dims: Dims, xi: f64, b: f64) -> Result<ExpansionCheck> {
    if !(xi > 0.0 && xi <= 0.05) {
        return Err(Error::domain(format!("xi = {xi} outside (0, 0.05]")));
    }
    let g = GeometryConstants::new(dims)?;
    let u = g.function(1.0, vec![xi, xi * b], vec![0.0; 2])?;
    let (numeric, _) = stable_f(&u, &QuadratureConfig::default())?;

    let p = dims.two_star_f64();
    let moments = trig_moments(&[0.0, xi, xi * b], 4);
    let s1: f64 = (2..=4)
        .map(|j| gen_binomial(p, j) * moments[j as usize])
        .sum();
    let s2 = gen_binomial(p, 2) * moments[2];
    let e_one = energy(&g.constant(1.0));
    let e_rho = energy(&u.oscillation());
    let analytic = e_rho - e_one * (2.0 / p * s1 + (1.0 / p) * (2.0 / p - 1.0) * s2 * s2);
    let discrepancy = (numeric - analytic).abs();
    Ok(ExpansionCheck {
        xi,
        b,
        numeric,
        analytic,
        discrepancy,
        relative_discrepancy: discrepancy / analytic.abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiMoments {
    pub vol: f64,
    /// `∫φ⁴` by quadrature
    pub fourth: f64,
    /// `(∫φ²)²` by quadrature
    pub square_squared: f64,
}

impl PhiMoments {
    pub fn fourth_error(&self) -> f64 {
        (self.fourth / (0.375 * self.vol) - 1.0).abs()
    }

    pub fn square_squared_error(&self) -> f64 {
        (self.square_squared / (0.25 * self.vol * self.vol) - 1.0).abs()
    }
}

/// Moments of `φ = cos(t/τ₀)` over the product.
pub fn phi_moments(dims: Dims) -> Result<PhiMoments> {
    let g = GeometryConstants::new(dims)?;
    let m = circle_mean(2, &QuadratureConfig::default(), |theta, out| {
        let c = theta.cos();
        out[0] = c * c;
        out[1] = c.powi(4);
        Ok(())
    })?;
    let square = g.vol * m.values[0];
    Ok(PhiMoments {
        vol: g.vol,
        fourth: g.vol * m.values[1],
        square_squared: square * square,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = default_xi_grid();
        assert_eq!(g.len(), 14);
        assert_eq!(g[0], 0.1);
        assert!(g.last().unwrap() >= &1e-3);
        assert!(g
            .windows(2)
            .all(|w| (w[1] / w[0] - 0.5f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn cos_moments_exact() {
        let m = trig_moments(&[0.0, 1.0], 6);
        let expected = [1.0, 0.0, 0.5, 0.0, 0.375, 0.0, 0.3125];
        for (a, b) in m.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        // mean(cos²θ cos 2θ) = 1/4 gives mean((cos θ + b cos 2θ)³) = 3b/4
        let m = trig_moments(&[0.0, 1.0, 0.3], 3);
        assert!((m[3] - 0.225).abs() < 1e-15);
    }

    #[test]
    fn binomials() {
        assert_eq!(gen_binomial(5.0, 2), 10.0);
        assert!((gen_binomial(0.5, 2) + 0.125).abs() < 1e-16);
    }

    #[test]
    fn xi_validation() {
        let d = Dims::new(5, 1).unwrap();
        assert_eq!(optimal_b(d, 0.0).unwrap(), 0.0);
        assert!(optimal_b(d, 0.3).is_err());
        assert!(optimal_b(d, -0.1).is_err());
        assert!(frank3_expansion_check(d, 0.06, 0.0).is_err());
        assert!(sample_sequence(d, SequenceKind::Degenerate, &[0.1, 0.05]).is_err());
    }
}
