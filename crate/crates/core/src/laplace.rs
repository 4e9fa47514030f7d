//! Laplace mechanism calibration.
//!
//! Under decoupled coordinates the worst-case privacy loss of independent
//! Laplace noise is `Σ λ_i/β_i`, so every mode below is a different way of
//! spending the same ε across coordinates.

use crate::error::{domain, Error, Result};
use crate::gaussian::{active_count, pow_or_zero, PrivacyBudget};
use crate::profile::SensitivityProfile;
use crate::scales::{check_error_order, Mechanism, Mode, NoiseScales};

/// Scales for a pure ε budget. For `Inid`,
/// `β_i = λ_i^{1/(p+1)} Σ_j λ_j^{p/(p+1)} / ε`.
pub fn calibrate_laplace(
    profile: &SensitivityProfile,
    epsilon: f64,
    mode: Mode,
    p: f64,
) -> Result<NoiseScales> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return domain(format!("Laplace calibration needs finite epsilon > 0, got {epsilon}"));
    }
    check_error_order(p)?;
    NoiseScales::new(
        Mechanism::Laplace,
        mode,
        p,
        laplace_scales(profile.lambda(), epsilon, mode, p),
    )
}

pub fn laplace_scales(lambda: &[f64], epsilon: f64, mode: Mode, p: f64) -> Vec<f64> {
    match mode {
        Mode::Iid => {
            let d1: f64 = lambda.iter().sum();
            vec![d1 / epsilon; lambda.len()]
        }
        Mode::Spr => {
            let k = active_count(lambda);
            lambda.iter().map(|l| k * l / epsilon).collect()
        }
        Mode::Inid => {
            let (a, b) = (1.0 / (p + 1.0), p / (p + 1.0));
            let s: f64 = lambda.iter().map(|l| pow_or_zero(*l, b)).sum();
            lambda
                .iter()
                .map(|l| pow_or_zero(*l, a) * s / epsilon)
                .collect()
        }
    }
}

/// `ε − ln(1 − δ)`: the pure-DP budget that an (ε,δ) target can be traded
/// for with Laplace noise.
pub fn effective_epsilon(budget: &PrivacyBudget) -> Result<f64> {
    if budget.delta >= 1.0 {
        return domain("delta = 1 leaves nothing to protect");
    }
    let e = budget.epsilon - (-budget.delta).ln_1p();
    if !(e > 0.0) {
        return domain("epsilon - ln(1 - delta) must be positive");
    }
    Ok(e)
}

/// Optimal i.n.i.d. Laplace scales for an (ε,δ) budget.
pub fn calibrate_laplace_approx_dp(
    profile: &SensitivityProfile,
    budget: &PrivacyBudget,
    p: f64,
) -> Result<NoiseScales> {
    calibrate_laplace(profile, effective_epsilon(budget)?, Mode::Inid, p)
}

/// Realized pure-DP budget `Σ λ_i/β_i`, the supremum of the privacy loss.
pub fn pure_dp_check(profile: &SensitivityProfile, scales: &NoiseScales) -> Result<f64> {
    if scales.mechanism != Mechanism::Laplace {
        return Err(Error::MechanismMismatch {
            expected: "laplace".into(),
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
    let mut total = 0.0;
    for (i, (l, b)) in profile.lambda().iter().zip(&scales.scales).enumerate() {
        if *l == 0.0 {
            continue;
        }
        if *b == 0.0 {
            return Err(Error::InfiniteLoss {
                coordinate: i,
                lambda: *l,
            });
        }
        total += l / b;
    }
    Ok(total)
}
