//! Gaussian mechanism: privacy profile, the μ₀ solver and scale calibration.
//!
//! A Gaussian mechanism with scales σ is (ε,δ)-DP under decoupled
//! coordinates iff `φ_ε(μ) ≤ δ` where `μ² = Σ λ_i²/σ_i²`. The solver finds
//! the largest admissible μ once per budget; every calibration mode then
//! spends exactly that μ.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{bisect_monotone, gaussian_q, gaussian_q_inv, scaled_tail_product, BisectionConfig};
use crate::profile::SensitivityProfile;
use crate::scales::{check_error_order, Mechanism, Mode, NoiseScales};

/// Smallest δ accepted by the Gaussian solver.
pub const MIN_DELTA: f64 = 1e-300;
/// δ at or above `1 - DELTA_MARGIN` is rejected.
pub const DELTA_MARGIN: f64 = 1e-12;

/// (ε, δ) pair. `delta == 0` is pure DP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return domain(format!("epsilon must be finite and >= 0, got {epsilon}"));
        }
        if !(0.0..=1.0).contains(&delta) {
            return domain(format!("delta must lie in [0, 1], got {delta}"));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }

    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }

    fn check_gaussian(&self) -> Result<()> {
        if self.delta == 0.0 {
            return Err(Error::Unsupported(
                "pure DP unsupported for Gaussian: delta must be > 0".into(),
            ));
        }
        if self.delta < MIN_DELTA {
            return domain(format!("delta {} is below the solver floor {MIN_DELTA}", self.delta));
        }
        if self.delta >= 1.0 - DELTA_MARGIN {
            return domain(format!(
                "delta {} is too close to 1; no noise is needed",
                self.delta
            ));
        }
        Ok(())
    }
}

/// `φ_ε(μ) = Q(ε/μ − μ/2) − e^ε Q(ε/μ + μ/2)`, increasing in μ.
pub fn privacy_profile(mu: f64, budget: &PrivacyBudget) -> Result<f64> {
    if !(mu > 0.0) {
        return domain(format!("privacy profile needs mu > 0, got {mu}"));
    }
    Ok(phi(mu, budget.epsilon))
}

fn phi(mu: f64, eps: f64) -> f64 {
    let a = eps / mu;
    let h = 0.5 * mu;
    gaussian_q(a - h) - scaled_tail_product(eps, a + h)
}

/// `√(q² + 2ε) − q` with `q = Q⁻¹(δ)`, written to avoid cancellation when
/// `q > 0`.
fn mu_lower_bound(eps: f64, delta: f64) -> Result<f64> {
    let q = gaussian_q_inv(delta)?;
    let r = (q * q + 2.0 * eps).sqrt();
    Ok(if q > 0.0 { 2.0 * eps / (r + q) } else { r - q })
}

/// Root of the privacy-profile equation with its bracketing interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianSolverResult {
    pub mu0: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub delta_prime: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

impl GaussianSolverResult {
    /// zCDP-style resource `μ₀²/2`.
    pub fn eta(&self) -> f64 {
        0.5 * self.mu0 * self.mu0
    }
}

/// Largest μ with `φ_ε(μ) ≤ δ`, by bisection between the closed-form bounds
/// `R_ε(δ) ≤ μ₀ ≤ R_ε(δ′)`, `δ′ = δ + e^ε Q(√(2ε))`.
pub fn solve_mu0(budget: &PrivacyBudget, cfg: &BisectionConfig) -> Result<GaussianSolverResult> {
    budget.check_gaussian()?;
    let (eps, delta) = (budget.epsilon, budget.delta);
    let lo = mu_lower_bound(eps, delta)?;
    let delta_prime = delta + scaled_tail_product(eps, (2.0 * eps).sqrt());

    let f = |mu: f64| if mu <= 0.0 { -delta } else { phi(mu, eps) - delta };

    let mut reported_hi = None;
    let mut hi = if delta_prime < 1.0 - DELTA_MARGIN {
        let h = mu_lower_bound(eps, delta_prime)?;
        reported_hi = Some(h);
        h
    } else {
        (2.0 * lo).max(1.0)
    };
    // rounding can leave φ(R_ε(δ′)) a hair below δ; widen until it brackets
    let mut widen = 0;
    while f(hi) <= 0.0 {
        widen += 1;
        if widen > 200 || !hi.is_finite() {
            return Err(Error::Bracket {
                lo,
                hi,
                f_lo: f(lo),
                f_hi: f(hi),
            });
        }
        hi = if hi > lo { lo + 2.0 * (hi - lo) } else { 2.0 * hi.max(1e-300) };
    }
    // the lower bound is exact in theory; guard against rounding the other way
    let mut lo_b = lo;
    while f(lo_b) > 0.0 {
        lo_b *= 0.5;
        if lo_b < 1e-300 {
            lo_b = 0.0;
            break;
        }
    }

    let b = bisect_monotone(f, lo_b, hi, cfg)?;
    Ok(GaussianSolverResult {
        mu0: b.root,
        bracket_lo: lo,
        bracket_hi: reported_hi.unwrap_or(hi),
        delta_prime,
        iterations: b.iterations,
        tolerance: cfg.tolerance,
    })
}

/// Calibrates many profiles against one budget, solving for μ₀ once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianCalibrator {
    pub budget: PrivacyBudget,
    pub solver: GaussianSolverResult,
}

impl GaussianCalibrator {
    pub fn new(budget: PrivacyBudget) -> Result<Self> {
        Self::with_config(budget, &BisectionConfig::default())
    }

    pub fn with_config(budget: PrivacyBudget, cfg: &BisectionConfig) -> Result<Self> {
        let solver = solve_mu0(&budget, cfg)?;
        Ok(Self { budget, solver })
    }

    pub fn mu0(&self) -> f64 {
        self.solver.mu0
    }

    pub fn calibrate(&self, profile: &SensitivityProfile, mode: Mode, p: f64) -> Result<NoiseScales> {
        check_error_order(p)?;
        let scales = gaussian_scales(profile.lambda(), self.mu0(), mode, p);
        NoiseScales::new(Mechanism::Gaussian, mode, p, scales)
    }
}

/// Scales for a given μ. For `Inid`,
/// `σ_i² = λ_i^{4/(p+2)} Σ_j λ_j^{2p/(p+2)} / μ²`.
pub fn gaussian_scales(lambda: &[f64], mu: f64, mode: Mode, p: f64) -> Vec<f64> {
    match mode {
        Mode::Iid => {
            let d2 = crate::profile::lp_norm(lambda, 2.0);
            vec![d2 / mu; lambda.len()]
        }
        Mode::Spr => {
            let k = active_count(lambda);
            lambda.iter().map(|l| k.sqrt() * l / mu).collect()
        }
        Mode::Inid => {
            let (a, b) = (4.0 / (p + 2.0), 2.0 * p / (p + 2.0));
            let s: f64 = lambda.iter().map(|l| pow_or_zero(*l, b)).sum();
            lambda
                .iter()
                .map(|l| (pow_or_zero(*l, a) * s).sqrt() / mu)
                .collect()
        }
    }
}

/// Coordinates with nonzero sensitivity; SPR splits the resource over
/// these only.
pub(crate) fn active_count(lambda: &[f64]) -> f64 {
    lambda.iter().filter(|l| **l > 0.0).count() as f64
}

pub(crate) fn pow_or_zero(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

/// Gaussian scales for one profile; solves μ₀ internally.
pub fn calibrate_gaussian(
    profile: &SensitivityProfile,
    budget: &PrivacyBudget,
    mode: Mode,
    p: f64,
) -> Result<NoiseScales> {
    check_error_order(p)?;
    GaussianCalibrator::new(*budget)?.calibrate(profile, mode, p)
}

/// `√(Σ λ_i²/σ_i²)`, the effective μ actually spent by `scales`. Coordinates
/// with `λ_i = 0` are skipped.
pub fn realized_mu(profile: &SensitivityProfile, scales: &NoiseScales) -> Result<f64> {
    if scales.mechanism != Mechanism::Gaussian {
        return Err(Error::MechanismMismatch {
            expected: "gaussian".into(),
            found: scales.mechanism.to_string(),
        });
    }
    if scales.len() != profile.len() {
        return domain(format!(
            "scales have length {} but profile has {}",
            scales.len(),
            profile.len()
        ));
    }
    let mut s = 0.0;
    for (i, (l, sig)) in profile.lambda().iter().zip(&scales.scales).enumerate() {
        if *l == 0.0 {
            continue;
        }
        if *sig == 0.0 {
            return Err(Error::InfiniteLoss {
                coordinate: i,
                lambda: *l,
            });
        }
        s += (l / sig).powi(2);
    }
    Ok(s.sqrt())
}
