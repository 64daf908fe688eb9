//! Uniform trapezoid rule on the circle with grid doubling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub initial_points: usize,
    pub max_points: usize,
    /// Stop once successive doublings change the result by at most this, relatively.
    pub rel_tol: f64,
    /// Integrate `|u|` powers instead of refusing non-positive samples.
    pub absolute_value: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            initial_points: 256,
            max_points: 1 << 20,
            rel_tol: 1e-12,
            absolute_value: false,
        }
    }
}

impl QuadratureConfig {
    /// A single evaluation on `points` nodes, no refinement.
    pub fn fixed(points: usize) -> Self {
        QuadratureConfig {
            initial_points: points,
            max_points: points,
            ..Self::default()
        }
    }

    pub fn with_absolute_value(mut self) -> Self {
        self.absolute_value = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleMean {
    /// Mean over `θ ∈ [0, 2π)` of each component.
    pub values: Vec<f64>,
    /// Nodes used by the final estimate.
    pub points: usize,
}

/// Mean over the circle of a vector-valued periodic integrand `f(θ, out)`.
///
/// `out` is zeroed before each call. Nodes are `θ_i = 2πi/N`; each doubling
/// only evaluates the new midpoints.
pub fn circle_mean<F>(dim: usize, cfg: &QuadratureConfig, mut f: F) -> Result<CircleMean>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    if cfg.initial_points == 0 || cfg.max_points < cfg.initial_points {
        return Err(Error::domain(
            "quadrature needs 0 < initial_points <= max_points",
        ));
    }
    let tau = std::f64::consts::TAU;
    let mut buf = vec![0.0; dim];
    let mut sums = vec![0.0; dim];

    let mut accumulate = |sums: &mut [f64], theta: f64, buf: &mut [f64]| -> Result<()> {
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(theta, buf)?;
        for (s, v) in sums.iter_mut().zip(buf.iter()) {
            *s += v;
        }
        Ok(())
    };

    let mut n = cfg.initial_points;
    for i in 0..n {
        accumulate(&mut sums, tau * i as f64 / n as f64, &mut buf)?;
    }
    let mut current: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();

    while n < cfg.max_points {
        for i in 0..n {
            let theta = tau * (2 * i + 1) as f64 / (2 * n) as f64;
            accumulate(&mut sums, theta, &mut buf)?;
        }
        n *= 2;
        let next: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        let scale = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let change = next
            .iter()
            .zip(&current)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        current = next;
        if change <= cfg.rel_tol * scale {
            return Ok(CircleMean {
                values: current,
                points: n,
            });
        }
    }

    if cfg.initial_points == cfg.max_points {
        return Ok(CircleMean {
            values: current,
            points: n,
        });
    }
    Err(Error::accuracy(format!(
        "trapezoid rule did not reach relative change {:e} within {} points",
        cfg.rel_tol, cfg.max_points
    )))
}
