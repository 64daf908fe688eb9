//! Periodized Green's kernel of the GJMS operator on `S¹(τ) × S^{n−1}`,
//! up to its positive normalizing constant:
//! `G = Σ_{m∈ℤ} (cosh(t − s − 2πmτ) − ⟨ω, η⟩)^{−(n−2k)/2}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Dims;

/// Target ratio of the tail bound to the partial sum.
pub const GREEN_TAIL_REL: f64 = 1e-10;
const MAX_TERMS: u32 = 1 << 20;
const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub t: f64,
    pub omega: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPair {
    pub x: ProductPoint,
    pub y: ProductPoint,
}

impl PointPair {
    pub fn swapped(&self) -> Self {
        PointPair {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub value: f64,
    /// Rigorous bound on the omitted terms `|m| > terms`.
    pub tail_bound: f64,
    pub terms: u32,
}

fn inner(dims: Dims, a: &[f64], b: &[f64]) -> Result<f64> {
    let n = dims.n() as usize;
    if a.len() != n || b.len() != n {
        return Err(Error::domain(format!(
            "sphere points must have {n} coordinates"
        )));
    }
    for v in [a, b] {
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain(format!(
                "sphere point has norm {norm}, expected 1"
            )));
        }
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .sum::<f64>()
        .clamp(-1.0, 1.0))
}

pub fn greens_kernel(
    dims: Dims,
    tau: f64,
    pairs: &[PointPair],
    truncation: u32,
) -> Result<Vec<GreenValue>> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain(format!("tau = {tau} violates tau > 0")));
    }
    if truncation == 0 {
        return Err(Error::domain("truncation must be at least 1"));
    }
    let beta = f64::from(dims.gap()) / 2.0;
    let period = std::f64::consts::TAU * tau;
    let q = (-period * beta).exp();

    pairs
        .iter()
        .map(|pair| {
            let c = inner(dims, &pair.x.omega, &pair.y.omega)?;
            let raw = pair.x.t - pair.y.t;
            let delta = raw - period * (raw / period).round();
            let term = |x: f64| (x.cosh() - c).powf(-beta);

            let base = delta.cosh() - c;
            if base.is_nan() || base <= 0.0 {
                return Err(Error::domain(format!(
                    "coincident points (t - s = {raw}, <omega, eta> = {c}): kernel is singular"
                )));
            }
            let tail = |m: u32| -> f64 {
                let gap = period * f64::from(m + 1) - delta.abs();
                if gap < 4f64.ln() {
                    return f64::INFINITY;
                }
                2.0 * 4f64.powf(beta) * (beta * delta.abs()).exp() * q.powi(m as i32 + 1)
                    / (1.0 - q)
            };

            let mut sum = base.powf(-beta);
            let mut m = 0u32;
            loop {
                m += 1;
                let off = period * f64::from(m);
                sum += term(delta - off) + term(delta + off);
                if m >= truncation && tail(m) <= GREEN_TAIL_REL * sum {
                    return Ok(GreenValue {
                        value: sum,
                        tail_bound: tail(m),
                        terms: m,
                    });
                }
                if m >= MAX_TERMS {
                    return Err(Error::accuracy(format!(
                        "Green's series tail did not fall below {GREEN_TAIL_REL:e} of the sum"
                    )));
                }
            }
        })
        .collect()
}

/// Uniformly distributed point pairs on `S¹(τ) × S^{n−1}`.
pub fn sample_point_pairs(dims: Dims, tau: f64, count: usize, seed: u64) -> Vec<PointPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let circle = Uniform::new(0.0, std::f64::consts::TAU * tau).expect("positive period");
    let n = dims.n() as usize;
    let point = |rng: &mut ChaCha8Rng| {
        let mut omega: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = omega.iter().map(|x| x * x).sum::<f64>().sqrt();
        omega.iter_mut().for_each(|x| *x /= norm);
        ProductPoint {
            t: circle.sample(rng),
            omega,
        }
    };
    (0..count)
        .map(|_| PointPair {
            x: point(&mut rng),
            y: point(&mut rng),
        })
        .collect()
}
