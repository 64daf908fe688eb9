//! Spectral data of the GJMS operator on S¹(τ) × S^{n−1}.
//!
//! On the product the operator of order 2k diagonalizes in the basis
//! `cos(mt/τ)·Y_j`, `sin(mt/τ)·Y_j` with eigenvalues
//! `α_{m,j}(τ) = ∏_{ℓ=1}^{k} (m²τ⁻² + (j + n/2 + k − 2ℓ)²)`.
//! The j = 0 eigenvalues are the spectral polynomial `P_k(y) = ∏ (y + c_ℓ²)`
//! evaluated at `y = m²τ⁻²`. Coefficients are stored in the variable `y = X²`.

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, ExactScalar};

/// Dimension `n` and half-order `k` with `n > 2k`, `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDims")]
pub struct Dims {
    n: u32,
    k: u32,
}

#[derive(Deserialize)]
struct RawDims {
    n: u32,
    k: u32,
}

impl TryFrom<RawDims> for Dims {
    type Error = Error;

    fn try_from(raw: RawDims) -> Result<Self> {
        Dims::new(raw.n, raw.k)
    }
}

impl Dims {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain(format!("k = 0 violates k >= 1 (n = {n})")));
        }
        if u64::from(n) <= 2 * u64::from(k) {
            return Err(Error::domain(format!("n = {n}, k = {k} violates n > 2k")));
        }
        Ok(Dims { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `n − 2k`, always positive.
    pub fn gap(&self) -> u32 {
        self.n - 2 * self.k
    }

    /// Critical exponent `2n/(n − 2k)`.
    pub fn two_star(&self) -> ExactScalar {
        exact::ratio(2 * i64::from(self.n), i64::from(self.gap()))
    }

    pub fn two_star_f64(&self) -> f64 {
        2.0 * f64::from(self.n) / f64::from(self.gap())
    }

    /// `2/(n − 2k)`, the factor in front of the energy.
    pub fn energy_factor(&self) -> f64 {
        2.0 / f64::from(self.gap())
    }

    /// `(n + 2k)/(n − 2k)`, the ratio `α_{1,0}(τ₀)/p_{k,0}`.
    pub fn kernel_ratio(&self) -> ExactScalar {
        exact::ratio(i64::from(self.n + 2 * self.k), i64::from(self.gap()))
    }

    /// Half-integer `n/2 + k − 2ℓ`.
    fn shift(&self, l: u32) -> ExactScalar {
        exact::ratio(
            i64::from(self.n) + 2 * i64::from(self.k) - 4 * i64::from(l),
            2,
        )
    }

    fn shift_f64(&self, l: u32) -> f64 {
        f64::from(self.n) / 2.0 + f64::from(self.k) - 2.0 * f64::from(l)
    }

    /// Every valid pair with `n ≤ n_max`, ordered by `n` then `k`.
    pub fn all_up_to(n_max: u32) -> Vec<Dims> {
        (3..=n_max)
            .flat_map(|n| (1..=(n - 1) / 2).map(move |k| Dims { n, k }))
            .collect()
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(n={}, k={})", self.n, self.k)
    }
}

/// Circle frequency `m` and spherical-harmonic degree `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub m: u32,
    pub j: u32,
}

impl ModeIndex {
    pub fn new(m: u32, j: u32) -> Self {
        ModeIndex { m, j }
    }

    /// Dimension of degree-`j` spherical harmonics on S^{n−1}:
    /// `(2j + n − 2)(j + n − 3)! / ((n − 2)! j!)`.
    pub fn sphere_multiplicity(&self, dims: Dims) -> BigUint {
        let n = u64::from(dims.n());
        let j = u64::from(self.j);
        let binom = binomial(j + n - 3, j);
        (BigUint::from(2 * j + n - 2) * binom) / BigUint::from(n - 2)
    }

    /// Number of basis functions sharing this eigenvalue: the sphere
    /// multiplicity times two circle parities when `m ≥ 1`.
    pub fn multiplicity(&self, dims: Dims) -> BigUint {
        let base = self.sphere_multiplicity(dims);
        if self.m == 0 {
            base
        } else {
            base * 2u32
        }
    }
}

fn binomial(n: u64, r: u64) -> BigUint {
    let r = r.min(n - r);
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Exact coefficients `p_{k,0..k}` of `P_k(y) = ∏_{ℓ=1}^{k} (y + (n/2 + k − 2ℓ)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPolynomial {
    dims: Dims,
    coeffs: Vec<ExactScalar>,
    coeffs_f64: Vec<f64>,
}

pub fn build_spectral_polynomial(dims: Dims) -> SpectralPolynomial {
    let mut coeffs = vec![ExactScalar::one()];
    for l in 1..=dims.k() {
        let c = dims.shift(l);
        let c2 = &c * &c;
        let mut next = vec![ExactScalar::zero(); coeffs.len() + 1];
        for (i, p) in coeffs.iter().enumerate() {
            next[i] += p * &c2;
            next[i + 1] += p;
        }
        coeffs = next;
    }
    let coeffs_f64 = coeffs.iter().map(exact::to_f64).collect();
    SpectralPolynomial {
        dims,
        coeffs,
        coeffs_f64,
    }
}

impl SpectralPolynomial {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Coefficients ascending in `y = X²`.
    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.coeffs
    }

    pub fn coeffs_f64(&self) -> &[f64] {
        &self.coeffs_f64
    }

    pub fn p0(&self) -> &ExactScalar {
        &self.coeffs[0]
    }

    pub fn p0_f64(&self) -> f64 {
        self.coeffs_f64[0]
    }

    /// `((n + 2k)/(n − 2k))·p_{k,0}`, the value `P_k` takes at `τ₀⁻²`.
    pub fn kernel_target(&self) -> ExactScalar {
        self.dims.kernel_ratio() * self.p0()
    }

    pub fn eval_exact(&self, y: &ExactScalar) -> ExactScalar {
        exact::horner(&self.coeffs, y)
    }

    /// Product form `∏ (y + c_ℓ²)`, evaluated without the expansion.
    pub fn eval_factored_exact(&self, y: &ExactScalar) -> ExactScalar {
        (1..=self.dims.k()).fold(ExactScalar::one(), |acc, l| {
            let c = self.dims.shift(l);
            acc * (y + &c * &c)
        })
    }

    /// Value at `y = X²`.
    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs_f64.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    /// Value of the even polynomial `Σ p_{k,m} X^{2m}` at `X`.
    pub fn eval_even(&self, x: f64) -> f64 {
        self.eval(x * x)
    }
}

/// `α_{m,j}(τ)`.
pub fn alpha(dims: Dims, mode: ModeIndex, tau: f64) -> Result<f64> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::domain(format!("tau = {tau} violates tau > 0")));
    }
    let y = f64::from(mode.m).powi(2) / (tau * tau);
    Ok(alpha_at(dims, mode.j, y))
}

/// `α_{m,j}` written through `y = m²τ⁻²`.
pub(crate) fn alpha_at(dims: Dims, j: u32, y: f64) -> f64 {
    (1..=dims.k())
        .map(|l| {
            let c = f64::from(j) + dims.shift_f64(l);
            y + c * c
        })
        .product()
}

/// Exact `α_{m,j}` for a rational `τ⁻²`.
pub fn alpha_exact(dims: Dims, mode: ModeIndex, inv_tau_sq: &ExactScalar) -> ExactScalar {
    let y = exact::int(i64::from(mode.m).pow(2)) * inv_tau_sq;
    (1..=dims.k()).fold(ExactScalar::one(), |acc, l| {
        let c = exact::int(i64::from(mode.j)) + dims.shift(l);
        acc * (&y + &c * &c)
    })
}

/// Critical radius `τ₀`, the unique `τ` with `α_{1,0}(τ) = ((n+2k)/(n−2k))p_{k,0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tau0Result {
    pub dims: Dims,
    /// `τ₀⁻²`
    pub y: f64,
    pub tau0: f64,
    /// `|P_k(y) − target| / target`, evaluated exactly at the returned `y`.
    pub residual: f64,
}

pub const DEFAULT_TAU0_TOL: f64 = 1e-14;

fn tau0_bracket(dims: Dims) -> (f64, f64) {
    let n = f64::from(dims.n());
    let k = f64::from(dims.k());
    (n - 2.0 * k, n + 2.0 * k - 4.0)
}

fn exact_relative_residual(poly: &SpectralPolynomial, target: &ExactScalar, y: f64) -> Result<f64> {
    let y = exact::from_f64(y)?;
    let diff = (poly.eval_exact(&y) - target).abs();
    Ok(exact::to_f64(&(diff / target)))
}

pub fn solve_tau0(dims: Dims, tol: f64) -> Result<Tau0Result> {
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(Error::domain(format!(
            "tol = {tol} violates 0 < tol <= 1e-6"
        )));
    }
    let poly = build_spectral_polynomial(dims);
    let target = poly.kernel_target();
    let target_f = exact::to_f64(&target);
    let (mut lo, mut hi) = tau0_bracket(dims);

    let below = poly.eval_exact(&exact::from_f64(lo)?) <= target;
    let above = poly.eval_exact(&exact::from_f64(hi)?) >= target;
    if !(below && above) {
        return Err(Error::internal(format!(
            "bracket [{lo}, {hi}] does not straddle the target for {dims}"
        )));
    }

    let finish = |y: f64, residual: f64| Tau0Result {
        dims,
        y,
        tau0: 1.0 / y.sqrt(),
        residual,
    };

    if lo == hi {
        let residual = exact_relative_residual(&poly, &target, lo)?;
        return Ok(finish(lo, residual));
    }

    loop {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        let g = poly.eval(mid) - target_f;
        if (g / target_f).abs() <= tol / 8.0 {
            let residual = exact_relative_residual(&poly, &target, mid)?;
            if residual <= tol {
                return Ok(finish(mid, residual));
            }
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let r_lo = exact_relative_residual(&poly, &target, lo)?;
    let r_hi = exact_relative_residual(&poly, &target, hi)?;
    let (y, residual) = if r_lo <= r_hi { (lo, r_lo) } else { (hi, r_hi) };
    if residual <= tol {
        Ok(finish(y, residual))
    } else {
        Err(Error::accuracy(format!(
            "bisection for {dims} stalled at relative residual {residual:e} > {tol:e}"
        )))
    }
}

/// Rational enclosure `lo ≤ τ₀⁻² ≤ hi` certified by exact sign evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Tau0Enclosure {
    pub dims: Dims,
    pub lo: ExactScalar,
    pub hi: ExactScalar,
}

impl Tau0Enclosure {
    pub fn width(&self) -> ExactScalar {
        &self.hi - &self.lo
    }

    pub fn contains(&self, y: &ExactScalar) -> bool {
        &self.lo <= y && y <= &self.hi
    }
}

/// Exact interval narrowing for `P_k(y) = target` down to `width`.
pub fn certify_tau0(dims: Dims, width: &ExactScalar) -> Result<Tau0Enclosure> {
    if !width.is_positive() {
        return Err(Error::domain("enclosure width must be positive"));
    }
    let poly = build_spectral_polynomial(dims);
    let target = poly.kernel_target();
    let side = |y: &ExactScalar| poly.eval_exact(y).cmp(&target);

    let (flo, fhi) = tau0_bracket(dims);
    let mut lo = exact::from_f64(flo)?;
    let mut hi = exact::from_f64(fhi)?;

    // Start from a tight bracket around the float root when it straddles.
    if let Ok(guess) = solve_tau0(dims, DEFAULT_TAU0_TOL) {
        let g = exact::from_f64(guess.y)?;
        let delta = exact::from_f64(guess.y * 1e-12)?;
        let a = &g - &delta;
        let b = &g + &delta;
        if side(&a).is_le() && side(&b).is_ge() {
            lo = a;
            hi = b;
        }
    }
    if !(side(&lo).is_le() && side(&hi).is_ge()) {
        return Err(Error::internal(format!("exact bracket fails for {dims}")));
    }

    let two = exact::int(2);
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / &two;
        match side(&mid) {
            std::cmp::Ordering::Less => lo = mid,
            std::cmp::Ordering::Greater => hi = mid,
            std::cmp::Ordering::Equal => {
                lo = mid.clone();
                hi = mid;
            }
        }
    }
    Ok(Tau0Enclosure { dims, lo, hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tau0Bounds {
    pub lower: f64,
    pub upper: f64,
    pub tau0: f64,
    pub holds: bool,
}

pub const TAU0_BOUNDS_SLACK: f64 = 1e-12;

/// `1/√(n + 2k − 4) ≤ τ₀ ≤ 1/√(n − 2k)`.
pub fn tau0_bounds_check(dims: Dims) -> Result<Tau0Bounds> {
    let t = solve_tau0(dims, DEFAULT_TAU0_TOL)?;
    let (ylo, yhi) = tau0_bracket(dims);
    let lower = 1.0 / yhi.sqrt();
    let upper = 1.0 / ylo.sqrt();
    let holds = lower - TAU0_BOUNDS_SLACK <= t.tau0 && t.tau0 <= upper + TAU0_BOUNDS_SLACK;
    Ok(Tau0Bounds {
        lower,
        upper,
        tau0: t.tau0,
        holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub mode: ModeIndex,
    pub alpha: f64,
}

/// Eigenvalues at `τ₀` sorted ascending, with the ordering facts checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub dims: Dims,
    pub tau0: f64,
    pub kernel_value: f64,
    pub entries: Vec<GapEntry>,
    pub increasing_in_m: bool,
    pub increasing_in_j: bool,
    /// The kernel value is attained at (1,0) and nowhere else.
    pub kernel_unique: bool,
    pub alpha01_exceeds_alpha10: bool,
}

/// Relative tolerance used to decide that two eigenvalues coincide.
pub const EIGEN_MATCH_TOL: f64 = 1e-12;

pub fn eigenvalue_gap_report(dims: Dims, m_max: u32, j_max: u32) -> Result<GapReport> {
    if m_max < 2 || j_max < 2 {
        return Err(Error::domain(
            "eigenvalue table needs mMax >= 2 and jMax >= 2",
        ));
    }
    let t = solve_tau0(dims, DEFAULT_TAU0_TOL)?;
    let kernel_value = exact::to_f64(&build_spectral_polynomial(dims).kernel_target());
    let grid: Vec<Vec<f64>> = (0..=m_max)
        .map(|m| {
            (0..=j_max)
                .map(|j| alpha(dims, ModeIndex::new(m, j), t.tau0))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let increasing_in_m =
        (0..=j_max as usize).all(|j| (1..=m_max as usize).all(|m| grid[m][j] > grid[m - 1][j]));
    let increasing_in_j =
        (0..=m_max as usize).all(|m| (1..=j_max as usize).all(|j| grid[m][j] > grid[m][j - 1]));

    let mut kernel_unique = true;
    let mut entries = Vec::new();
    for (m, row) in grid.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            let hit = (a - kernel_value).abs() <= EIGEN_MATCH_TOL * kernel_value;
            if hit != (m == 1 && j == 0) {
                kernel_unique = false;
            }
            entries.push(GapEntry {
                mode: ModeIndex::new(m as u32, j as u32),
                alpha: a,
            });
        }
    }
    entries.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.mode.cmp(&b.mode)));

    Ok(GapReport {
        dims,
        tau0: t.tau0,
        kernel_value,
        entries,
        increasing_in_m,
        increasing_in_j,
        kernel_unique,
        alpha01_exceeds_alpha10: grid[0][1] > grid[1][0],
    })
}

/// Largest `C` with `α_{m,j}(τ) ≥ C(1 + m^{2k} + j^{2k})` on the finite grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coercivity {
    pub constant: f64,
    pub argmin: ModeIndex,
}

pub fn coercivity_constant(dims: Dims, tau: f64, m_max: u32, j_max: u32) -> Result<Coercivity> {
    let two_k = 2 * dims.k() as i32;
    let mut best = Coercivity {
        constant: f64::INFINITY,
        argmin: ModeIndex::new(0, 0),
    };
    for m in 0..=m_max {
        for j in 0..=j_max {
            let mode = ModeIndex::new(m, j);
            let weight = 1.0 + f64::from(m).powi(two_k) + f64::from(j).powi(two_k);
            let ratio = alpha(dims, mode, tau)? / weight;
            if ratio < best.constant {
                best = Coercivity {
                    constant: ratio,
                    argmin: mode,
                };
            }
        }
    }
    Ok(best)
}
