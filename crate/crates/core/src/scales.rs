//! Noise-scale vectors shared by both mechanisms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Gaussian,
    Laplace,
}

impl Mechanism {
    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Gaussian => "gaussian",
            Mechanism::Laplace => "laplace",
        }
    }

    /// `E|T|^p / s^p` for a zero-mean variable of scale `s`: the Gaussian
    /// absolute moment `2^{p/2} Γ((p+1)/2)/√π`, or `Γ(p+1)` for Laplace.
    pub fn moment_factor(self, p: f64) -> f64 {
        match self {
            Mechanism::Gaussian => {
                (2f64.powf(p) / std::f64::consts::PI).sqrt() * gamma((p + 1.0) / 2.0)
            }
            Mechanism::Laplace => gamma(p + 1.0),
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(Mechanism::Gaussian),
            "laplace" => Ok(Mechanism::Laplace),
            other => Err(Error::Parse(format!("unknown mechanism '{other}'"))),
        }
    }
}

/// How per-coordinate scales are chosen.
///
/// `Iid` uses one scale for every coordinate, `Spr` rescales coordinates to
/// equal sensitivity before adding i.i.d. noise (an equal split of the
/// privacy resource), and `Inid` is the error-minimizing allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Iid,
    Spr,
    Inid,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Iid, Mode::Spr, Mode::Inid];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Iid => "iid",
            Mode::Spr => "spr",
            Mode::Inid => "inid",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iid" => Ok(Mode::Iid),
            "spr" => Ok(Mode::Spr),
            "inid" => Ok(Mode::Inid),
            other => Err(Error::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

pub(crate) fn check_error_order(p: f64) -> Result<()> {
    if p.is_infinite() {
        return Err(Error::Unsupported(
            "error order p = inf has no closed-form calibration".into(),
        ));
    }
    if !(p >= 1.0) {
        return domain(format!("error order p must be >= 1, got {p}"));
    }
    Ok(())
}

/// Per-coordinate noise scales (σ_i for Gaussian, β_i for Laplace).
///
/// `theoretical_error` is `E‖T‖_p^p`, not its p-th root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseScales {
    pub mechanism: Mechanism,
    pub mode: Mode,
    pub error_order_p: f64,
    pub scales: Vec<f64>,
    pub theoretical_error: f64,
}

impl NoiseScales {
    /// Wraps scales and fills in the closed-form expected ℓp^p error.
    pub fn new(mechanism: Mechanism, mode: Mode, p: f64, scales: Vec<f64>) -> Result<Self> {
        check_error_order(p)?;
        if let Some((i, s)) = scales
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s >= 0.0))
        {
            return domain(format!("scale {i} is {s}; scales must be finite and >= 0"));
        }
        let theoretical_error = expected_lp_error(mechanism, p, &scales);
        Ok(Self {
            mechanism,
            mode,
            error_order_p: p,
            scales,
            theoretical_error,
        })
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Same scales multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.mechanism,
            self.mode,
            self.error_order_p,
            self.scales.iter().map(|s| s * c).collect(),
        )
    }

    /// Same scales with the error re-evaluated at a different order.
    pub fn with_error_order(&self, p: f64) -> Result<Self> {
        Self::new(self.mechanism, self.mode, p, self.scales.clone())
    }

    /// Per-coordinate variance: σ² or 2β².
    pub fn variances(&self) -> Vec<f64> {
        let f = match self.mechanism {
            Mechanism::Gaussian => 1.0,
            Mechanism::Laplace => 2.0,
        };
        self.scales.iter().map(|s| f * s * s).collect()
    }

    pub fn theoretical_error_db(&self) -> f64 {
        10.0 * self.theoretical_error.log10()
    }
}

pub fn expected_lp_error(mechanism: Mechanism, p: f64, scales: &[f64]) -> f64 {
    let sum: f64 = if p == 2.0 {
        scales.iter().map(|s| s * s).sum()
    } else if p == 1.0 {
        scales.iter().sum()
    } else {
        scales.iter().map(|s| s.powf(p)).sum()
    };
    mechanism.moment_factor(p) * sum
}
