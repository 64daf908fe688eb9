//! Fourth-order kernel quadratics on Einstein products `(N^m × F, h)`.
//!
//! `N` is an `m`-dimensional Einstein manifold with constant `λ`; the fiber `F`
//! is a round `S^ℓ` or `ℂP^ℓ` with the Fubini–Study metric. For a fiber
//! eigenfunction `v` of `−Δ` with eigenvalue `μ`, the shifted Paneitz operator
//! `P_h − ((n+4)/2) Q_h` acts on `v` by a number that is a quadratic in `λ`.

use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, ExactScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "ell", rename_all = "snake_case")]
pub enum Fiber {
    Sphere(u32),
    ComplexProjective(u32),
}

impl Fiber {
    pub fn ell(&self) -> u32 {
        match *self {
            Fiber::Sphere(l) | Fiber::ComplexProjective(l) => l,
        }
    }

    pub fn real_dim(&self) -> u32 {
        match *self {
            Fiber::Sphere(l) => l,
            Fiber::ComplexProjective(l) => 2 * l,
        }
    }

    /// `ℓ − 1` for the unit sphere, `2(ℓ + 1)` for Fubini–Study.
    pub fn einstein_constant(&self) -> ExactScalar {
        let l = i64::from(self.ell());
        match self {
            Fiber::Sphere(_) => exact::int(l - 1),
            Fiber::ComplexProjective(_) => exact::int(2 * (l + 1)),
        }
    }

    pub fn scalar_curvature(&self) -> ExactScalar {
        exact::int(i64::from(self.real_dim())) * self.einstein_constant()
    }

    /// `|Ric|²`
    pub fn ricci_norm_sq(&self) -> ExactScalar {
        let c = self.einstein_constant();
        exact::int(i64::from(self.real_dim())) * &c * &c
    }

    /// Eigenvalue of `−Δ` on the test function: `2(ℓ + 1)` on `S^ℓ`, `8ℓ + 16` on `ℂP^ℓ`.
    pub fn test_eigenvalue(&self) -> ExactScalar {
        let l = i64::from(self.ell());
        match self {
            Fiber::Sphere(_) => exact::int(2 * (l + 1)),
            Fiber::ComplexProjective(_) => exact::int(8 * l + 16),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Fiber::Sphere(_) => "sphere",
            Fiber::ComplexProjective(_) => "cp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EinsteinProductSpec {
    pub base_dim: u32,
    pub fiber: Fiber,
}

impl EinsteinProductSpec {
    pub fn new(base_dim: u32, fiber: Fiber) -> Result<Self> {
        if fiber.ell() < 2 {
            return Err(Error::domain(format!(
                "fiber parameter ell = {} violates ell >= 2",
                fiber.ell()
            )));
        }
        if base_dim == 0 {
            return Err(Error::domain("base dimension m must be positive"));
        }
        let n = base_dim + fiber.real_dim();
        if n < 5 {
            return Err(Error::domain(format!(
                "total dimension n = {n} violates n >= 5 (fourth-order formulas degenerate)"
            )));
        }
        Ok(EinsteinProductSpec { base_dim, fiber })
    }

    pub fn total_dim(&self) -> u32 {
        self.base_dim + self.fiber.real_dim()
    }

    /// `R = mλ + R_F`
    pub fn scalar_curvature(&self) -> LambdaPoly {
        LambdaPoly::new(
            self.fiber.scalar_curvature(),
            exact::int(i64::from(self.base_dim)),
            ExactScalar::zero(),
        )
    }

    /// `|Ric|² = mλ² + |Ric_F|²`
    pub fn ricci_norm_sq(&self) -> LambdaPoly {
        LambdaPoly::new(
            self.fiber.ricci_norm_sq(),
            ExactScalar::zero(),
            exact::int(i64::from(self.base_dim)),
        )
    }
}

/// `c0 + c1 λ + c2 λ²` with exact coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPoly {
    pub c0: ExactScalar,
    pub c1: ExactScalar,
    pub c2: ExactScalar,
}

impl LambdaPoly {
    pub fn new(c0: ExactScalar, c1: ExactScalar, c2: ExactScalar) -> Self {
        LambdaPoly { c0, c1, c2 }
    }

    pub fn constant(c: ExactScalar) -> Self {
        LambdaPoly::new(c, ExactScalar::zero(), ExactScalar::zero())
    }

    pub fn eval_exact(&self, lambda: &ExactScalar) -> ExactScalar {
        (&self.c2 * lambda + &self.c1) * lambda + &self.c0
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        (exact::to_f64(&self.c2) * lambda + exact::to_f64(&self.c1)) * lambda
            + exact::to_f64(&self.c0)
    }

    fn scale(&self, s: &ExactScalar) -> Self {
        LambdaPoly::new(&self.c0 * s, &self.c1 * s, &self.c2 * s)
    }

    fn add(&self, o: &Self) -> Self {
        LambdaPoly::new(&self.c0 + &o.c0, &self.c1 + &o.c1, &self.c2 + &o.c2)
    }

    /// Product of two polynomials of degree at most one.
    fn mul_linear(&self, o: &Self) -> Result<Self> {
        if !self.c2.is_zero() || !o.c2.is_zero() {
            return Err(Error::internal("product would exceed degree two"));
        }
        Ok(LambdaPoly::new(
            &self.c0 * &o.c0,
            &self.c0 * &o.c1 + &self.c1 * &o.c0,
            &self.c1 * &o.c1,
        ))
    }
}

/// Q-curvature of an Einstein-type metric with constant curvatures:
/// `Q = −2|Ric|²/(n−2)² + (n³ − 4n² + 16n − 16) R² / (8(n−1)²(n−2)²)`.
pub fn q_curvature(n: u32, scalar: &LambdaPoly, ricci_sq: &LambdaPoly) -> Result<LambdaPoly> {
    if n < 5 {
        return Err(Error::domain(format!("n = {n} violates n >= 5")));
    }
    let n = i64::from(n);
    let a = exact::ratio(-2, (n - 2) * (n - 2));
    let b = exact::ratio(
        n * n * n - 4 * n * n + 16 * n - 16,
        8 * (n - 1) * (n - 1) * (n - 2) * (n - 2),
    );
    Ok(ricci_sq
        .scale(&a)
        .add(&scalar.mul_linear(scalar)?.scale(&b)))
}

pub fn q2_of_product(spec: &EinsteinProductSpec) -> Result<LambdaPoly> {
    q_curvature(
        spec.total_dim(),
        &spec.scalar_curvature(),
        &spec.ricci_norm_sq(),
    )
}

/// How `Δv` is substituted in the first-order divergence terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenSubstitution {
    /// `Δv = −μv` everywhere.
    Consistent,
    /// `Δv = −μv` in `Δ²v` but `+μv` inside the divergence terms.
    FlippedFirstOrder,
}

/// Eigenvalue of the Paneitz operator on a function `v` with `Δv = −μv`,
/// `Ric(∇v) = ρ∇v`, on a metric with constant `R`, `|Ric|²`:
///
/// `P v = Δ²v + div((4/(n−2)) Ric(∇v) − a_n R ∇v) + ((n−4)/2) Q v`,
/// `a_n = ((n−2)² + 4) / (2(n−1)(n−2))`.
pub fn paneitz_eigenvalue(
    n: u32,
    scalar: &LambdaPoly,
    ricci_sq: &LambdaPoly,
    ricci_on_gradient: &ExactScalar,
    mu: &ExactScalar,
    substitution: EigenSubstitution,
) -> Result<LambdaPoly> {
    let q = q_curvature(n, scalar, ricci_sq)?;
    let ni = i64::from(n);
    let a_n = exact::ratio((ni - 2) * (ni - 2) + 4, 2 * (ni - 1) * (ni - 2));
    let b_n = exact::ratio(4, ni - 2);
    let lap = match substitution {
        EigenSubstitution::Consistent => -mu.clone(),
        EigenSubstitution::FlippedFirstOrder => mu.clone(),
    };
    let first_order =
        LambdaPoly::constant(&b_n * ricci_on_gradient * &lap).add(&scalar.scale(&(-(&a_n * &lap))));
    Ok(LambdaPoly::constant(mu * mu)
        .add(&first_order)
        .add(&q.scale(&exact::ratio(ni - 4, 2))))
}

/// `a λ² + b λ + c` with its discriminant and real roots.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaQuadratic {
    pub a: ExactScalar,
    pub b: ExactScalar,
    pub c: ExactScalar,
    pub discriminant: ExactScalar,
    /// `(λ₋, λ₊)` with `λ₋ ≤ λ₊`, when the discriminant is non-negative.
    pub roots: Option<(f64, f64)>,
}

impl LambdaQuadratic {
    fn from_poly(p: LambdaPoly) -> Self {
        let LambdaPoly {
            c0: c,
            c1: b,
            c2: a,
        } = p;
        let discriminant = &b * &b - exact::int(4) * &a * &c;
        let roots = if discriminant.is_negative() || a.is_zero() {
            None
        } else {
            let (af, bf, cf) = (exact::to_f64(&a), exact::to_f64(&b), exact::to_f64(&c));
            let sq = exact::to_f64(&discriminant).sqrt();
            let q = -0.5 * (bf + bf.signum() * sq);
            let (r1, r2) = if q == 0.0 {
                (0.0, 0.0)
            } else {
                (q / af, cf / q)
            };
            Some((r1.min(r2), r1.max(r2)))
        };
        LambdaQuadratic {
            a,
            b,
            c,
            discriminant,
            roots,
        }
    }

    pub fn poly(&self) -> LambdaPoly {
        LambdaPoly::new(self.c.clone(), self.b.clone(), self.a.clone())
    }

    /// `|q(λ)| / max(|a|, |b|, |c|)` at each root, evaluated exactly.
    pub fn root_residuals(&self) -> Option<(f64, f64)> {
        let (lo, hi) = self.roots?;
        let scale = [&self.a, &self.b, &self.c].iter().map(|x| x.abs()).max()?;
        let poly = self.poly();
        let r = |x: f64| -> Option<f64> {
            let v = poly.eval_exact(&exact::from_f64(x).ok()?).abs();
            Some(exact::to_f64(&(v / &scale)))
        };
        Some((r(lo)?, r(hi)?))
    }

    pub fn pattern(&self) -> RootPattern {
        if self.a.is_zero() {
            return RootPattern::Degenerate;
        }
        match self.roots {
            None => RootPattern::Complex,
            Some((lo, hi)) => {
                if lo < 0.0 && hi > 0.0 {
                    RootPattern::MixedSigns
                } else if hi < 0.0 {
                    RootPattern::BothNegative
                } else if lo > 0.0 {
                    RootPattern::BothPositive
                } else {
                    RootPattern::ZeroRoot
                }
            }
        }
    }
}

/// Shifted Paneitz quadratic with the consistent substitution `Δv = −μv`.
pub fn shifted_paneitz_eigenvalue(spec: &EinsteinProductSpec) -> Result<LambdaQuadratic> {
    shifted_paneitz_eigenvalue_with(spec, EigenSubstitution::Consistent)
}

/// `q(λ)` with `(P_h − ((n+4)/2) Q_h) v = q(λ) v` for the fiber test function.
pub fn shifted_paneitz_eigenvalue_with(
    spec: &EinsteinProductSpec,
    substitution: EigenSubstitution,
) -> Result<LambdaQuadratic> {
    let n = spec.total_dim();
    let scalar = spec.scalar_curvature();
    let ricci_sq = spec.ricci_norm_sq();
    let p = paneitz_eigenvalue(
        n,
        &scalar,
        &ricci_sq,
        &spec.fiber.einstein_constant(),
        &spec.fiber.test_eigenvalue(),
        substitution,
    )?;
    let q = q_curvature(n, &scalar, &ricci_sq)?;
    let shifted = p.add(&q.scale(&exact::ratio(-(i64::from(n) + 4), 2)));
    Ok(LambdaQuadratic::from_poly(shifted))
}

/// Closed-form large-`m` expressions for the quadratic's coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeadingOrder {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
    /// `λ²` and `λ` coefficients of `Q_h`.
    pub q2: f64,
    pub q1: f64,
}

/// Reference asymptotics:
/// sphere `a = −m/2 + 2`, `b = −m(ℓ+1) − ℓ² + 5ℓ + 4`, `c = −ℓ³ + 4ℓ² + 9ℓ + 4`,
/// disc `m²(ℓ+1)²`; `ℂP^ℓ` `a = −m/2 + 2`, `b = −4m(ℓ+2) − 4(ℓ² − 3ℓ − 8)`,
/// `c = −16ℓ³ + 16ℓ² + 224ℓ + 256`, disc `16m²`; `Q = (m/8 − 1/2)λ² + q1 λ`
/// with `q1 = ℓ(ℓ−1)/4` (sphere) or `ℓ(ℓ+1)` (`ℂP^ℓ`).
pub fn reference_leading_order(fiber: Fiber, m: u32) -> LeadingOrder {
    let m = f64::from(m);
    let l = f64::from(fiber.ell());
    let a = -m / 2.0 + 2.0;
    let q2 = m / 8.0 - 0.5;
    match fiber {
        Fiber::Sphere(_) => LeadingOrder {
            a,
            b: -m * (l + 1.0) - l * l + 5.0 * l + 4.0,
            c: -l.powi(3) + 4.0 * l * l + 9.0 * l + 4.0,
            discriminant: m * m * (l + 1.0).powi(2),
            q2,
            q1: l * (l - 1.0) / 4.0,
        },
        Fiber::ComplexProjective(_) => LeadingOrder {
            a,
            b: -4.0 * m * (l + 2.0) - 4.0 * (l * l - 3.0 * l - 8.0),
            c: -16.0 * l.powi(3) + 16.0 * l * l + 224.0 * l + 256.0,
            discriminant: 16.0 * m * m,
            q2,
            q1: l * (l + 1.0),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootPattern {
    /// `λ₋ < 0 < λ₊`
    MixedSigns,
    /// `λ₋ < λ₊ < 0`
    BothNegative,
    BothPositive,
    ZeroRoot,
    Complex,
    Degenerate,
}

/// Pattern the large-`m` analysis predicts: mixed signs for sphere `ℓ ≤ 5`
/// and `ℂP` `ℓ ≤ 3`, both roots negative beyond.
pub fn predicted_pattern(fiber: Fiber) -> RootPattern {
    let mixed = match fiber {
        Fiber::Sphere(l) => l <= 5,
        Fiber::ComplexProjective(l) => l <= 3,
    };
    if mixed {
        RootPattern::MixedSigns
    } else {
        RootPattern::BothNegative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct As3Row {
    pub m: u32,
    pub discriminant_positive: bool,
    pub lambda_minus: Option<f64>,
    pub lambda_plus: Option<f64>,
    pub pattern: RootPattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct As3Verdict {
    pub fiber: Fiber,
    pub substitution: EigenSubstitution,
    pub predicted: RootPattern,
    pub rows: Vec<As3Row>,
    /// Least `m` from which the predicted pattern holds through `mMax`.
    pub holds_from: Option<u32>,
}

pub fn as3_verdict(
    fiber: Fiber,
    m_min: u32,
    m_max: u32,
    substitution: EigenSubstitution,
) -> Result<As3Verdict> {
    if m_min > m_max {
        return Err(Error::domain("mMin must not exceed mMax"));
    }
    let rows = (m_min..=m_max)
        .map(|m| {
            let spec = EinsteinProductSpec::new(m, fiber)?;
            let q = shifted_paneitz_eigenvalue_with(&spec, substitution)?;
            Ok(As3Row {
                m,
                discriminant_positive: q.discriminant.is_positive(),
                lambda_minus: q.roots.map(|r| r.0),
                lambda_plus: q.roots.map(|r| r.1),
                pattern: q.pattern(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let predicted = predicted_pattern(fiber);
    let holds_from = rows
        .iter()
        .rposition(|r| r.pattern != predicted)
        .map_or(Some(m_min), |i| rows.get(i + 1).map(|r| r.m));
    Ok(As3Verdict {
        fiber,
        substitution,
        predicted,
        rows,
        holds_from,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub ell: u32,
    pub samples: u64,
    pub seed: u64,
    /// Mean of `ṽ³` over the uniform probability measure on `S^ℓ`.
    pub mean: f64,
    pub std_error: f64,
}

impl MonteCarloEstimate {
    /// Estimate differs from zero by more than `k` standard errors.
    pub fn nonzero_by(&self, k: f64) -> bool {
        self.mean.abs() > k * self.std_error
    }
}

/// Monte Carlo mean of `ṽ³`, `ṽ = x₁x₂ + x₂x₃ + x₃x₁`, on `S^ℓ ⊂ ℝ^{ℓ+1}`.
pub fn cubic_moment_monte_carlo(ell: u32, samples: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if ell < 2 {
        return Err(Error::domain(format!("ell = {ell} violates ell >= 2")));
    }
    if samples < 2 {
        return Err(Error::domain("Monte Carlo needs at least two samples"));
    }
    let d = ell as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0f64; d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let mut r2 = 0.0;
        for xi in x.iter_mut() {
            *xi = StandardNormal.sample(&mut rng);
            r2 += *xi * *xi;
        }
        let v = (x[0] * x[1] + x[1] * x[2] + x[2] * x[0]) / r2;
        let v3 = v * v * v;
        sum += v3;
        sum_sq += v3 * v3;
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean) * nf / (nf - 1.0);
    Ok(MonteCarloEstimate {
        ell,
        samples,
        seed,
        mean,
        std_error: (var / nf).sqrt(),
    })
}
