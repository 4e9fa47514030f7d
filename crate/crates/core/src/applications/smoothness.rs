//! Private estimation of coordinate-wise smoothness constants for
//! generalized linear models, where `M_i ∝ (1/N) Σ_n x_{n,i}²`.

use nalgebra::DMatrix;

use crate::error::{domain, Result};
use crate::mechanism::SeededRng;

/// Floor applied to noisy estimates, relative to the largest estimate.
pub const SMOOTHNESS_FLOOR: f64 = 1e-6;

/// `(1/N) Σ clip(x_{n,i}²; b_i²) + (b_i² K/(N ε′)) T_i` with standard
/// Laplace `T_i`, floored at `SMOOTHNESS_FLOOR · max_j`.
///
/// `eps_prime = f64::INFINITY` returns the exact clipped means.
pub fn estimate_smoothness_private(
    features: &DMatrix<f64>,
    bounds: &[f64],
    eps_prime: f64,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let (n, k) = features.shape();
    if n == 0 || k == 0 {
        return domain("smoothness estimation needs a nonempty feature matrix");
    }
    if bounds.len() != k {
        return domain(format!("{} bounds for {k} features", bounds.len()));
    }
    if bounds.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return domain("feature bounds must be positive and finite");
    }
    if !(eps_prime > 0.0) {
        return domain(format!("eps_prime must be positive, got {eps_prime}"));
    }
    let nf = n as f64;
    let mut est: Vec<f64> = (0..k)
        .map(|i| {
            let b2 = bounds[i] * bounds[i];
            let mean = features.column(i).iter().map(|x| (x * x).min(b2)).sum::<f64>() / nf;
            if eps_prime.is_infinite() {
                mean
            } else {
                mean + b2 * k as f64 / (nf * eps_prime) * rng.standard_laplace()
            }
        })
        .collect();
    let top = est.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = if top > 0.0 {
        SMOOTHNESS_FLOOR * top
    } else {
        SMOOTHNESS_FLOOR * bounds.iter().map(|b| b * b).fold(0.0, f64::max)
    };
    for e in &mut est {
        *e = e.max(floor);
    }
    Ok(est)
}
