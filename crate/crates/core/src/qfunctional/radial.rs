//! Truncated Fourier series in the circle variable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Dims;

/// One basis direction of the truncated class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "m", rename_all = "lowercase")]
pub enum RadialMode {
    Constant,
    Cos(u32),
    Sin(u32),
}

impl RadialMode {
    /// Circle frequency.
    pub fn frequency(&self) -> u32 {
        match *self {
            RadialMode::Constant => 0,
            RadialMode::Cos(m) | RadialMode::Sin(m) => m,
        }
    }

    /// Value of the basis function at angle `θ = t/τ`.
    pub fn eval_angle(&self, theta: f64) -> f64 {
        match *self {
            RadialMode::Constant => 1.0,
            RadialMode::Cos(m) => (f64::from(m) * theta).cos(),
            RadialMode::Sin(m) => (f64::from(m) * theta).sin(),
        }
    }

    /// `∫_M φ² dμ / vol`.
    pub fn mean_square(&self) -> f64 {
        match self {
            RadialMode::Constant => 1.0,
            _ => 0.5,
        }
    }
}

/// `u(t) = mean + Σ_{m=1}^{M} a_m cos(mt/τ) + b_m sin(mt/τ)` on `S¹(τ) × S^{n−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFourierFunction {
    dims: Dims,
    tau: f64,
    mean: f64,
    cos_coeffs: Vec<f64>,
    sin_coeffs: Vec<f64>,
}

impl RadialFourierFunction {
    pub fn new(
        dims: Dims,
        tau: f64,
        mean: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    ) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("tau = {tau} violates tau > 0")));
        }
        if cos_coeffs.len() != sin_coeffs.len() || cos_coeffs.is_empty() {
            return Err(Error::domain(
                "cosine and sine coefficient lists must have equal length M >= 1",
            ));
        }
        let finite =
            mean.is_finite() && cos_coeffs.iter().chain(&sin_coeffs).all(|c| c.is_finite());
        if !finite {
            return Err(Error::domain("Fourier coefficients must be finite"));
        }
        Ok(RadialFourierFunction {
            dims,
            tau,
            mean,
            cos_coeffs,
            sin_coeffs,
        })
    }

    pub fn constant(dims: Dims, tau: f64, c: f64) -> Result<Self> {
        Self::new(dims, tau, c, vec![0.0], vec![0.0])
    }

    /// `c + Σ amp·φ` for a list of `(mode, amp)` pairs.
    pub fn from_modes(dims: Dims, tau: f64, terms: &[(RadialMode, f64)]) -> Result<Self> {
        let order = terms
            .iter()
            .map(|(m, _)| m.frequency())
            .max()
            .unwrap_or(1)
            .max(1) as usize;
        let mut u = Self::new(dims, tau, 0.0, vec![0.0; order], vec![0.0; order])?;
        for &(mode, amp) in terms {
            u = u.with_added(mode, amp);
        }
        Ok(u)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos_coeffs
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin_coeffs
    }

    /// Truncation order `M`.
    pub fn order(&self) -> usize {
        self.cos_coeffs.len()
    }

    /// All basis directions of the truncated class, constant first.
    pub fn modes(&self) -> Vec<RadialMode> {
        let mut out = vec![RadialMode::Constant];
        for m in 1..=self.order() as u32 {
            out.push(RadialMode::Cos(m));
            out.push(RadialMode::Sin(m));
        }
        out
    }

    pub fn coefficient(&self, mode: RadialMode) -> f64 {
        match mode {
            RadialMode::Constant => self.mean,
            RadialMode::Cos(m) => self.cos_coeffs.get(m as usize - 1).copied().unwrap_or(0.0),
            RadialMode::Sin(m) => self.sin_coeffs.get(m as usize - 1).copied().unwrap_or(0.0),
        }
    }

    /// Copy with `delta` added to one coefficient, growing the order if needed.
    pub fn with_added(&self, mode: RadialMode, delta: f64) -> Self {
        let mut u = self.clone();
        let m = mode.frequency() as usize;
        if m > u.order() {
            u.cos_coeffs.resize(m, 0.0);
            u.sin_coeffs.resize(m, 0.0);
        }
        match mode {
            RadialMode::Constant => u.mean += delta,
            RadialMode::Cos(_) => u.cos_coeffs[m - 1] += delta,
            RadialMode::Sin(_) => u.sin_coeffs[m - 1] += delta,
        }
        u
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialFourierFunction {
            mean: self.mean * c,
            cos_coeffs: self.cos_coeffs.iter().map(|a| a * c).collect(),
            sin_coeffs: self.sin_coeffs.iter().map(|b| b * c).collect(),
            ..self.clone()
        }
    }

    /// `self − other` on the same geometry.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims || self.tau != other.tau {
            return Err(Error::domain("functions live on different geometries"));
        }
        let order = self.order().max(other.order()) as u32;
        let mut out = Self::new(
            self.dims,
            self.tau,
            0.0,
            vec![0.0; order as usize],
            vec![0.0; order as usize],
        )?;
        out.mean = self.mean - other.mean;
        for m in 1..=order {
            for mode in [RadialMode::Cos(m), RadialMode::Sin(m)] {
                out = out.with_added(mode, self.coefficient(mode) - other.coefficient(mode));
            }
        }
        Ok(out)
    }

    /// `u − ū`.
    pub fn oscillation(&self) -> Self {
        RadialFourierFunction {
            mean: 0.0,
            ..self.clone()
        }
    }

    /// Value at angle `θ = t/τ`.
    pub fn eval_angle(&self, theta: f64) -> f64 {
        let mut acc = self.mean;
        for (i, (a, b)) in self.cos_coeffs.iter().zip(&self.sin_coeffs).enumerate() {
            if *a == 0.0 && *b == 0.0 {
                continue;
            }
            let (s, c) = ((i + 1) as f64 * theta).sin_cos();
            acc += a * c + b * s;
        }
        acc
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_angle(t / self.tau)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> Dims {
        Dims::new(5, 1).unwrap()
    }

    #[test]
    fn evaluation_and_period() {
        let u =
            RadialFourierFunction::new(dims(), 0.5, 1.0, vec![0.2, 0.0], vec![0.0, -0.1]).unwrap();
        let t = 0.3;
        let expect = 1.0 + 0.2 * (t / 0.5f64).cos() - 0.1 * (2.0 * t / 0.5f64).sin();
        assert!((u.eval(t) - expect).abs() < 1e-15);
        let period = std::f64::consts::TAU * 0.5;
        assert!((u.eval(t + period) - u.eval(t)).abs() < 1e-14);
    }

    #[test]
    fn rejects_malformed() {
        assert!(RadialFourierFunction::new(dims(), 0.0, 1.0, vec![0.0], vec![0.0]).is_err());
        assert!(RadialFourierFunction::new(dims(), 1.0, 1.0, vec![], vec![]).is_err());
        assert!(RadialFourierFunction::new(dims(), 1.0, 1.0, vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(RadialFourierFunction::new(dims(), 1.0, f64::NAN, vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn with_added_grows_order() {
        let u = RadialFourierFunction::constant(dims(), 1.0, 2.0).unwrap();
        let v = u.with_added(RadialMode::Sin(3), 0.5);
        assert_eq!(v.order(), 3);
        assert_eq!(v.coefficient(RadialMode::Sin(3)), 0.5);
        assert_eq!(v.coefficient(RadialMode::Cos(7)), 0.0);
        assert_eq!(v.modes().len(), 7);
    }

    #[test]
    fn minus_pads_orders() {
        let u = RadialFourierFunction::from_modes(
            dims(),
            1.0,
            &[(RadialMode::Constant, 1.0), (RadialMode::Cos(2), 0.3)],
        )
        .unwrap();
        let v = RadialFourierFunction::constant(dims(), 1.0, 0.5).unwrap();
        let w = u.minus(&v).unwrap();
        assert_eq!(w.mean(), 0.5);
        assert_eq!(w.coefficient(RadialMode::Cos(2)), 0.3);
        let other = RadialFourierFunction::constant(dims(), 2.0, 0.5).unwrap();
        assert!(u.minus(&other).is_err());
    }
}
