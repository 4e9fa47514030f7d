//! Privacy-resource bookkeeping across coordinates and across layers.
//!
//! The Gaussian resource is `η = μ₀²/2` with coordinate shares
//! `η_i = λ_i²/(2σ_i²)`; the Laplace resource is ε with shares
//! `ε_i = λ_i/β_i`. Optimal calibration corresponds to shares proportional
//! to `λ_i` and `λ_i^{2/3}` respectively, SPR to equal shares.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::gaussian::pow_or_zero;
use crate::profile::SensitivityProfile;
use crate::scales::{Mechanism, Mode, NoiseScales};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    /// Gaussian resource `η = μ₀²/2`.
    ZcdpEta,
    /// Laplace budget ε.
    PureEpsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceSplit {
    pub kind: ResourceKind,
    pub total: f64,
    pub shares: Vec<f64>,
}

/// Optimal (mean-squared-error) split of `total` across coordinates.
pub fn split_resource(profile: &SensitivityProfile, total: f64, kind: ResourceKind) -> Result<ResourceSplit> {
    let exponent = match kind {
        ResourceKind::ZcdpEta => 1.0,
        ResourceKind::PureEpsilon => 2.0 / 3.0,
    };
    let w: Vec<f64> = profile.lambda().iter().map(|l| pow_or_zero(*l, exponent)).collect();
    split_by_weights(&w, total, kind)
}

/// Equal split over coordinates with nonzero sensitivity.
pub fn equal_split(profile: &SensitivityProfile, total: f64, kind: ResourceKind) -> Result<ResourceSplit> {
    let w: Vec<f64> = profile
        .lambda()
        .iter()
        .map(|&l| if l > 0.0 { 1.0 } else { 0.0 })
        .collect();
    split_by_weights(&w, total, kind)
}

fn split_by_weights(w: &[f64], total: f64, kind: ResourceKind) -> Result<ResourceSplit> {
    if !(total > 0.0 && total.is_finite()) {
        return domain(format!("resource total must be positive, got {total}"));
    }
    let s: f64 = w.iter().sum();
    if s == 0.0 {
        return domain("cannot split a resource over an all-zero profile");
    }
    Ok(ResourceSplit {
        kind,
        total,
        shares: w.iter().map(|x| total * x / s).collect(),
    })
}

impl ResourceSplit {
    /// Converts shares back to noise scales: `σ_i = λ_i/√(2η_i)` or
    /// `β_i = λ_i/ε_i`. Coordinates with a zero share get zero noise.
    pub fn to_scales(&self, profile: &SensitivityProfile, mode: Mode, p: f64) -> Result<NoiseScales> {
        if profile.len() != self.shares.len() {
            return domain("split and profile lengths differ");
        }
        let it = profile.lambda().iter().zip(&self.shares);
        let (mech, scales): (Mechanism, Vec<f64>) = match self.kind {
            ResourceKind::ZcdpEta => (
                Mechanism::Gaussian,
                it.map(|(l, e)| if *e == 0.0 { 0.0 } else { l / (2.0 * e).sqrt() })
                    .collect(),
            ),
            ResourceKind::PureEpsilon => (
                Mechanism::Laplace,
                it.map(|(l, e)| if *e == 0.0 { 0.0 } else { l / e }).collect(),
            ),
        };
        NoiseScales::new(mech, mode, p, scales)
    }

    /// Splits each share equally across `passes` compositions.
    pub fn per_pass(&self, passes: usize) -> Result<ResourceSplit> {
        if passes == 0 {
            return domain("passes must be >= 1");
        }
        let l = passes as f64;
        Ok(ResourceSplit {
            kind: self.kind,
            total: self.total / l,
            shares: self.shares.iter().map(|s| s / l).collect(),
        })
    }
}

/// Shares actually spent by a set of scales.
pub fn realized_shares(profile: &SensitivityProfile, scales: &NoiseScales) -> Vec<f64> {
    profile
        .lambda()
        .iter()
        .zip(&scales.scales)
        .map(|(l, s)| {
            if *l == 0.0 {
                0.0
            } else {
                match scales.mechanism {
                    Mechanism::Gaussian => l * l / (2.0 * s * s),
                    Mechanism::Laplace => l / s,
                }
            }
        })
        .collect()
}

/// Per-coordinate clipping bounds for grouped (per-layer) clipping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerClippingPlan {
    pub layer_sizes: Vec<usize>,
    pub layer_budgets: Vec<f64>,
    pub norm_order_p: f64,
    pub per_coordinate_lambda: Vec<Vec<f64>>,
}

impl LayerClippingPlan {
    /// Plan from explicit per-layer budgets; `λ_i^(m) = C_m / K_m^{1/p}`.
    pub fn new(layer_sizes: Vec<usize>, layer_budgets: Vec<f64>, p: f64) -> Result<Self> {
        if layer_sizes.is_empty() {
            return domain("need at least one layer");
        }
        if layer_sizes.len() != layer_budgets.len() {
            return domain("layer sizes and budgets differ in length");
        }
        if !(p >= 1.0) || p.is_infinite() {
            return domain(format!("norm order must be finite and >= 1, got {p}"));
        }
        if layer_sizes.contains(&0) {
            return domain("layer sizes must be >= 1");
        }
        if layer_budgets.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return domain("layer budgets must be positive");
        }
        let per_coordinate_lambda = layer_sizes
            .iter()
            .zip(&layer_budgets)
            .map(|(&k, &c)| vec![c / (k as f64).powf(1.0 / p); k])
            .collect();
        Ok(Self {
            layer_sizes,
            layer_budgets,
            norm_order_p: p,
            per_coordinate_lambda,
        })
    }

    /// Concatenated per-coordinate bounds as a profile.
    pub fn flattened_profile(&self) -> Result<SensitivityProfile> {
        SensitivityProfile::new(self.per_coordinate_lambda.concat())
    }
}

/// Equal budgets `C_m = C₀/M^{1/p}` so that their ℓp norm is `C₀`.
pub fn flat_per_layer_plan(layer_sizes: &[usize], total_budget: f64, p: f64) -> Result<LayerClippingPlan> {
    if !(total_budget > 0.0 && total_budget.is_finite()) {
        return domain("total clipping budget must be positive");
    }
    if !(p >= 1.0) || p.is_infinite() {
        return domain(format!("norm order must be finite and >= 1, got {p}"));
    }
    let m = layer_sizes.len() as f64;
    let c = total_budget / m.powf(1.0 / p);
    LayerClippingPlan::new(layer_sizes.to_vec(), vec![c; layer_sizes.len()], p)
}
