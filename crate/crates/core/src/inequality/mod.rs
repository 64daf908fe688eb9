//! Special-function and spectral inequalities on `S¹(τ₀) × S^{n−1}`.

mod greens;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use greens::{
    greens_kernel, sample_point_pairs, GreenValue, PointPair, ProductPoint, GREEN_TAIL_REL,
};

use crate::error::Result;
use crate::exact;
use crate::qfunctional::GeometryConstants;
use crate::special::ln_gamma;
use crate::spectral::{
    alpha, build_spectral_polynomial, solve_tau0, Dims, ModeIndex, SpectralPolynomial,
    DEFAULT_TAU0_TOL,
};

/// Relative threshold separating equality from strict inequality.
pub const EQUALITY_TOL: f64 = 1e-10;

/// Outcome of a claim `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`
    pub margin: f64,
    pub holds: bool,
    pub equality_case: bool,
}

impl InequalityVerdict {
    pub fn less_eq(name: &str, parameters: BTreeMap<String, f64>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        let scale = EQUALITY_TOL * lhs.abs().max(rhs.abs());
        InequalityVerdict {
            name: name.to_string(),
            parameters,
            lhs,
            rhs,
            margin,
            holds: margin > -scale,
            equality_case: margin.abs() <= scale,
        }
    }

    /// `lhs < rhs` with a margin beyond the equality threshold.
    pub fn strict(&self) -> bool {
        self.holds && !self.equality_case
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn dims_params(dims: Dims) -> BTreeMap<String, f64> {
    params(&[("n", f64::from(dims.n())), ("k", f64::from(dims.k()))])
}

/// `Ψ_k(n) = (p_{k,0} Γ(n/2 − k) / Γ(n/2 + k))^{n/2}`.
pub fn psi(dims: Dims) -> f64 {
    let n = f64::from(dims.n());
    let k = f64::from(dims.k());
    let ln_p0 = exact::to_f64(build_spectral_polynomial(dims).p0()).ln();
    (n / 2.0 * (ln_p0 + ln_gamma(n / 2.0 - k) - ln_gamma(n / 2.0 + k))).exp()
}

/// `Φ_k(n) = (√(n − 2k) / (2√π)) Γ(n/2) / Γ((n+1)/2)`.
pub fn phi(dims: Dims) -> f64 {
    let n = f64::from(dims.n());
    let ln =
        0.5 * f64::from(dims.gap()).ln() - std::f64::consts::LN_2 - 0.5 * std::f64::consts::PI.ln()
            + ln_gamma(n / 2.0)
            - ln_gamma((n + 1.0) / 2.0);
    ln.exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictBinding {
    /// `Q(1)` against the same quotient on the round sphere, `(2/(n−2k))·S_{n,k}`.
    pub quotient: InequalityVerdict,
    /// `Q(1)` against the bare Sobolev constant `S_{n,k}`.
    pub bare_constant: InequalityVerdict,
    /// `Ψ_k(n) < Φ_k(n)`
    pub reduced: InequalityVerdict,
}

impl StrictBinding {
    /// Both normalization-consistent comparisons hold strictly.
    pub fn holds(&self) -> bool {
        self.quotient.strict() && self.reduced.strict()
    }
}

pub fn strict_binding(dims: Dims) -> Result<StrictBinding> {
    let g = GeometryConstants::new(dims)?;
    let p = dims_params(dims);
    let sphere = dims.energy_factor() * g.sobolev_sharp;
    Ok(StrictBinding {
        quotient: InequalityVerdict::less_eq("yamabe-below-sphere", p.clone(), g.yamabe, sphere),
        bare_constant: InequalityVerdict::less_eq(
            "yamabe-below-sobolev-constant",
            p.clone(),
            g.yamabe,
            g.sobolev_sharp,
        ),
        reduced: InequalityVerdict::less_eq("psi-below-phi", p, psi(dims), phi(dims)),
    })
}

/// `Φ_{n,k}(ℓ) = Γ(a)Γ(b + ℓ) / (Γ(b)Γ(a + ℓ))`, `a = (n−2k)/2n`, `b = (n+2k)/2n`.
pub fn gamma_ratio(dims: Dims, ell: f64) -> f64 {
    gamma_ratio_ln(dims, ell).exp()
}

fn gamma_ratio_ln(dims: Dims, ell: f64) -> f64 {
    let n = f64::from(dims.n());
    let a = f64::from(dims.gap()) / (2.0 * n);
    let b = f64::from(dims.n() + 2 * dims.k()) / (2.0 * n);
    ln_gamma(a) + ln_gamma(b + ell) - ln_gamma(b) - ln_gamma(a + ell)
}

/// Spectral side `P_k(τ₀⁻² ℓ²) / p_{k,0}` shared across `ℓ`.
pub struct BecknerContext {
    dims: Dims,
    poly: SpectralPolynomial,
    y0: f64,
}

impl BecknerContext {
    pub fn new(dims: Dims) -> Result<Self> {
        Ok(BecknerContext {
            dims,
            poly: build_spectral_polynomial(dims),
            y0: solve_tau0(dims, DEFAULT_TAU0_TOL)?.y,
        })
    }

    pub fn verdict(&self, ell: u32) -> InequalityVerdict {
        let l = f64::from(ell);
        let lhs = gamma_ratio(self.dims, l);
        let rhs = self.poly.eval(self.y0 * l * l) / self.poly.p0_f64();
        let mut p = dims_params(self.dims);
        p.insert("ell".into(), l);
        InequalityVerdict::less_eq("gamma-ratio-below-spectral", p, lhs, rhs)
    }
}

pub fn beckner_gap(dims: Dims, ell: u32) -> Result<InequalityVerdict> {
    Ok(BecknerContext::new(dims)?.verdict(ell))
}

/// `d/dℓ ln Φ_{n,k}(ℓ) < 2k/(nℓ)` by central differences.
pub fn log_ratio_derivative_check(dims: Dims, ell: u32) -> InequalityVerdict {
    let l = f64::from(ell);
    let h = 1e-4;
    let d = (gamma_ratio_ln(dims, l + h) - gamma_ratio_ln(dims, l - h)) / (2.0 * h);
    let bound = 2.0 * f64::from(dims.k()) / (f64::from(dims.n()) * l);
    let mut p = dims_params(dims);
    p.insert("ell".into(), l);
    InequalityVerdict::less_eq("log-ratio-derivative", p, d, bound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarticConstant {
    pub c: f64,
    pub positive: bool,
    /// `((2·2* − 1)/(2* + 1)) α_{1,0} < α_{2,0}`
    pub alpha_ineq: InequalityVerdict,
    /// `(2 − 1/(2* − 1)) α_{1,0} ≤ α_{2,0}`
    pub convexity: InequalityVerdict,
    /// `2P(1/τ₀) − P(0) ≤ P(2/τ₀)` for the even polynomial `P(X) = Σ p_{k,m} X^{2m}`.
    pub even_form_convexity: InequalityVerdict,
}

/// Constant of the fourth-order deficit expansion,
/// `c = ((n−2k)/2)((2*−2)/(8 vol)) α_{1,0}⁻¹ ((2*+1) − α_{1,0}(2*−2)/(α_{2,0} − α_{1,0}))`.
pub fn quartic_constant_c(dims: Dims) -> Result<QuarticConstant> {
    let g = GeometryConstants::new(dims)?;
    let p = dims.two_star_f64();
    let a10 = alpha(dims, ModeIndex::new(1, 0), g.tau0)?;
    let a20 = alpha(dims, ModeIndex::new(2, 0), g.tau0)?;
    let c = f64::from(dims.gap()) / 2.0 * (p - 2.0) / (8.0 * g.vol) / a10
        * ((p + 1.0) - a10 * (p - 2.0) / (a20 - a10));
    let poly = build_spectral_polynomial(dims);
    let x = 1.0 / g.tau0;
    let pr = dims_params(dims);
    Ok(QuarticConstant {
        c,
        positive: c > 0.0,
        alpha_ineq: InequalityVerdict::less_eq(
            "second-mode-threshold",
            pr.clone(),
            (2.0 * p - 1.0) / (p + 1.0) * a10,
            a20,
        ),
        convexity: InequalityVerdict::less_eq(
            "second-mode-convexity",
            pr.clone(),
            (2.0 - 1.0 / (p - 1.0)) * a10,
            a20,
        ),
        even_form_convexity: InequalityVerdict::less_eq(
            "even-polynomial-convexity",
            pr,
            2.0 * poly.eval_even(x) - poly.eval_even(0.0),
            poly.eval_even(2.0 * x),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: u32, k: u32) -> Dims {
        Dims::new(n, k).unwrap()
    }

    #[test]
    fn verdict_thresholds() {
        let v = InequalityVerdict::less_eq("x", BTreeMap::new(), 1.0, 1.0 + 1e-12);
        assert!(v.holds && v.equality_case && !v.strict());
        let v = InequalityVerdict::less_eq("x", BTreeMap::new(), 1.0, 1.1);
        assert!(v.strict());
        let v = InequalityVerdict::less_eq("x", BTreeMap::new(), 1.0, 0.9);
        assert!(!v.holds);
    }

    #[test]
    fn strict_binding_examples() {
        assert!(strict_binding(d(5, 1)).unwrap().holds());
        assert!(strict_binding(d(5, 2)).unwrap().holds());
    }

    #[test]
    fn beckner_small_cases() {
        let ctx = BecknerContext::new(d(5, 1)).unwrap();
        let v0 = ctx.verdict(0);
        assert!(v0.equality_case && (v0.lhs - 1.0).abs() < 1e-15);
        let v1 = ctx.verdict(1);
        assert!(v1.equality_case && (v1.lhs - 7.0 / 3.0).abs() < 1e-13);
        assert!(ctx.verdict(2).strict());
    }

    #[test]
    fn quartic_constant_five_one() {
        let q = quartic_constant_c(d(5, 1)).unwrap();
        assert!(q.positive);
        assert!((q.alpha_ineq.lhs - 357.0 / 52.0).abs() < 1e-12);
        assert!((q.alpha_ineq.rhs - 57.0 / 4.0).abs() < 1e-12);
        assert!(q.alpha_ineq.strict() && q.convexity.holds && q.even_form_convexity.holds);
        assert!((q.even_form_convexity.rhs - q.alpha_ineq.rhs).abs() < 1e-12);
    }
}
