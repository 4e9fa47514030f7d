//! Per-coordinate sensitivity profiles, their norms and disparity measures,
//! the synthetic profile families used in the sweeps, and majorization.
//!
//! Norms of a profile stand in for the ℓp-sensitivities of the query. That
//! is exact when coordinates can be driven to their extremes independently
//! and an over-estimate otherwise.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Absolute tolerance on prefix sums in [`majorizes`].
pub const MAJORIZATION_TOL: f64 = 1e-12;

/// Vector of non-negative per-coordinate sensitivities, not all zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityProfile {
    lambda: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProfileFile {
    Object { lambda: Vec<f64> },
    Array(Vec<f64>),
}

impl SensitivityProfile {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return domain("profile must have at least one coordinate");
        }
        if let Some((i, v)) = lambda
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return domain(format!("profile entry {i} is {v}; entries must be finite and >= 0"));
        }
        if lambda.iter().all(|&v| v == 0.0) {
            return domain("profile is all zero");
        }
        Ok(Self { lambda })
    }

    pub fn uniform(k: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; k])
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.lambda
    }

    /// ‖λ‖_p; `p = f64::INFINITY` gives the largest entry.
    pub fn lp_sensitivity(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return domain(format!("norm order must be >= 1, got {p}"));
        }
        Ok(lp_norm(&self.lambda, p))
    }

    pub fn l1(&self) -> f64 {
        self.lambda.iter().sum()
    }

    pub fn l2(&self) -> f64 {
        lp_norm(&self.lambda, 2.0)
    }

    pub fn max(&self) -> f64 {
        self.lambda.iter().copied().fold(0.0, f64::max)
    }

    /// Gini coefficient `(1/(2K‖λ‖₁)) Σ_i Σ_j |λ_i − λ_j|`, via sorted
    /// prefix sums.
    pub fn gini(&self) -> f64 {
        let mut v = self.lambda.clone();
        v.sort_by(|a, b| a.total_cmp(b));
        let k = v.len() as f64;
        // Σ_i Σ_j |v_i − v_j| = 2 Σ_i (2i − K + 1) v_i for ascending v
        let weighted: f64 = v
            .iter()
            .enumerate()
            .map(|(i, &x)| (2.0 * i as f64 - k + 1.0) * x)
            .sum();
        (weighted / (k * self.l1())).max(0.0)
    }

    /// Mean-to-max ratio `‖λ‖₁/(K·max λ)`.
    pub fn disparity_nu(&self) -> f64 {
        self.l1() / (self.len() as f64 * self.max())
    }

    pub fn is_uniform(&self, tol: f64) -> bool {
        let m = self.max();
        self.lambda.iter().all(|&v| (m - v).abs() <= tol * m)
    }

    /// Same shape rescaled so that ‖λ‖_p = 1.
    pub fn normalized(&self, p: f64) -> Result<Self> {
        let n = self.lp_sensitivity(p)?;
        Self::new(self.lambda.iter().map(|v| v / n).collect())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: ProfileFile =
            serde_json::from_str(s).map_err(|e| Error::Parse(format!("profile json: {e}")))?;
        Self::new(match f {
            ProfileFile::Object { lambda } | ProfileFile::Array(lambda) => lambda,
        })
    }

    /// Single numeric column, optional non-numeric header line.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut out = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(format!("profile csv: {e}")))?;
            if rec.len() != 1 {
                return Err(Error::Parse(format!(
                    "profile csv line {}: expected one column, found {}",
                    line + 1,
                    rec.len()
                )));
            }
            let field = &rec[0];
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) => out.push(v),
                Err(_) if line == 0 => continue,
                Err(_) => {
                    return Err(Error::Parse(format!(
                        "profile csv line {}: '{field}' is not a number",
                        line + 1
                    )))
                }
            }
        }
        Self::new(out)
    }

    /// Loads `.json` files as `{"lambda": [...]}` or a bare array, and
    /// anything else as CSV.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_json = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("json"))
            .unwrap_or(false);
        if is_json || text.trim_start().starts_with(['{', '[']) {
            Self::from_json_str(&text)
        } else {
            Self::from_csv_reader(text.as_bytes())
        }
    }
}

pub(crate) fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    }
    // scale by the max entry so large p does not overflow
    let m = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    let s: f64 = v.iter().map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// `a ≻ b`: sorted-descending prefix sums of `a` dominate those of `b` and
/// totals agree.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return domain(format!(
            "majorization needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        ));
    }
    let desc = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|x, y| y.total_cmp(x));
        s
    };
    let (sa, sb) = (desc(a), desc(b));
    let (mut pa, mut pb) = (0.0, 0.0);
    for (x, y) in sa.iter().zip(&sb) {
        pa += x;
        pb += y;
        if pa < pb - MAJORIZATION_TOL {
            return Ok(false);
        }
    }
    Ok((pa - pb).abs() <= MAJORIZATION_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Uniform,
    OneHot,
    Linear,
    Quadratic,
    Exponential,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 5] = [
        ProfileKind::Uniform,
        ProfileKind::Linear,
        ProfileKind::Quadratic,
        ProfileKind::Exponential,
        ProfileKind::OneHot,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Uniform => "uniform",
            ProfileKind::OneHot => "one_hot",
            ProfileKind::Linear => "linear",
            ProfileKind::Quadratic => "quadratic",
            ProfileKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "uniform" => Ok(ProfileKind::Uniform),
            "one_hot" | "onehot" => Ok(ProfileKind::OneHot),
            "linear" => Ok(ProfileKind::Linear),
            "quadratic" => Ok(ProfileKind::Quadratic),
            "exponential" | "exp" => Ok(ProfileKind::Exponential),
            other => Err(Error::Parse(format!("unknown profile family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    L1Unit,
    L2Unit,
    None,
}

impl FromStr for Normalization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "l1_unit" => Ok(Normalization::L1Unit),
            "l2" | "l2_unit" => Ok(Normalization::L2Unit),
            "none" => Ok(Normalization::None),
            other => Err(Error::Parse(format!("unknown normalization '{other}'"))),
        }
    }
}

/// A named profile shape at a given dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProfileFamily {
    pub kind: ProfileKind,
    pub k: usize,
    pub normalization: Normalization,
}

impl ProfileFamily {
    pub fn new(kind: ProfileKind, k: usize, normalization: Normalization) -> Self {
        Self {
            kind,
            k,
            normalization,
        }
    }

    /// Builds the profile. Entries are 1-indexed (`λ_i ∝ i`, `i²`, `e^i`);
    /// the one-hot spike sits on the last coordinate.
    pub fn generate(&self) -> Result<SensitivityProfile> {
        let k = self.k;
        if k == 0 {
            return domain("profile family needs K >= 1");
        }
        let kf = k as f64;
        let raw: Vec<f64> = (1..=k)
            .map(|i| {
                let x = i as f64;
                match self.kind {
                    ProfileKind::Uniform => 1.0,
                    ProfileKind::OneHot => {
                        if i == k {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    ProfileKind::Linear => x,
                    ProfileKind::Quadratic => x * x,
                    ProfileKind::Exponential => (x - kf).exp(),
                }
            })
            .collect();
        let p = SensitivityProfile::new(raw)?;
        match self.normalization {
            Normalization::L1Unit => p.normalized(1.0),
            Normalization::L2Unit => p.normalized(2.0),
            Normalization::None => {
                if self.kind == ProfileKind::Exponential {
                    // undo the e^{-K} factor used for stability
                    SensitivityProfile::new(p.lambda.iter().map(|v| v * kf.exp()).collect())
                } else {
                    Ok(p)
                }
            }
        }
    }
}
